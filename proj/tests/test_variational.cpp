#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "suncast/autodiff.hpp"
#include "suncast/variational.hpp"

using namespace suncast;
using ad::NodePtr;
using vi::VariationalGaussian;

namespace {

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double rho_for_sigma(double sigma) { return std::log(std::expm1(sigma)); }

VariationalGaussian vg_scalar(double mu, double sigma, double prior_sigma) {
  ad::Mat m(1, 1), r(1, 1);
  m(0, 0) = mu;
  r(0, 0) = rho_for_sigma(sigma);
  return VariationalGaussian(m, r, prior_sigma);
}

}  // namespace

TEST_CASE("closed-form KL hand values") {
  // KL(N(0,1) || N(0,1)) = 0
  CHECK(vi::kl_gaussian_value(vg_scalar(0.0, 1.0, 1.0)) == doctest::Approx(0.0).epsilon(1e-12));
  // KL(N(1,1) || N(0,1)) = mu^2/2 = 0.5
  CHECK(vi::kl_gaussian_value(vg_scalar(1.0, 1.0, 1.0)) == doctest::Approx(0.5).epsilon(1e-12));
  // KL(N(0,0.5) || N(0,1)) = log(1/0.5) + 0.25/2 - 0.5 = 0.318147...
  double expect = std::log(2.0) + 0.125 - 0.5;
  CHECK(vi::kl_gaussian_value(vg_scalar(0.0, 0.5, 1.0)) == doctest::Approx(expect).epsilon(1e-12));
  // sums over entries
  ad::Mat m(2, 1), r(2, 1);
  m << 1.0, 1.0;
  r(0, 0) = rho_for_sigma(1.0);
  r(1, 0) = rho_for_sigma(1.0);
  CHECK(vi::kl_gaussian_value(VariationalGaussian(m, r, 1.0)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("KL node agrees with value and its gradient passes finite differences") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ad::Mat mu(2, 3), rho(2, 3);
  for (int i = 0; i < mu.size(); ++i) {
    mu.data()[i] = u(rng);
    rho.data()[i] = -1.0 + u(rng);
  }
  VariationalGaussian vg(mu, rho, 1.3);

  auto nodes = vi::make_posterior_nodes(vg);
  auto kl = vi::kl_gaussian(nodes, vg.prior_sigma);
  CHECK(kl->value(0, 0) == doctest::Approx(vi::kl_gaussian_value(vg)).epsilon(1e-12));

  ad::backward(kl);

  // Pack (mu, rho) into one flat point and compare adjoints against
  // central differences of the closed-form value.
  const int n = static_cast<int>(mu.size());
  Eigen::VectorXd point(2 * n), analytic(2 * n);
  for (int i = 0; i < n; ++i) {
    point(i) = mu.data()[i];
    point(n + i) = rho.data()[i];
    analytic(i) = nodes.mu->adjoint.data()[i];
    analytic(n + i) = nodes.rho->adjoint.data()[i];
  }
  auto f = [&](const Eigen::VectorXd& p) {
    VariationalGaussian v = vg;
    for (int i = 0; i < n; ++i) {
      v.mu.data()[i] = p(i);
      v.rho.data()[i] = p(n + i);
    }
    return vi::kl_gaussian_value(v);
  };
  double err = ad::finite_difference_check(
      f, [&](const Eigen::VectorXd&) { return analytic; }, point, 1e-5);
  CHECK(err < 1e-6);
}

TEST_CASE("closed-form KL agrees with a Monte-Carlo estimate within 3 SE") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-0.8, 0.8);
  for (int trial = 0; trial < 3; ++trial) {
    ad::Mat mu(3, 2), rho(3, 2);
    for (int i = 0; i < mu.size(); ++i) {
      mu.data()[i] = u(rng);
      rho.data()[i] = -1.5 + u(rng);
    }
    VariationalGaussian vg(mu, rho, 1.0);
    ad::Mat sig = vg.sigma_p();

    const int S = 20000;
    std::normal_distribution<double> nd(0.0, 1.0);
    double sum = 0.0, sumsq = 0.0;
    for (int s = 0; s < S; ++s) {
      double lq = 0.0, lp = 0.0;
      for (int i = 0; i < mu.size(); ++i) {
        double eps = nd(rng);
        double theta = mu.data()[i] + sig.data()[i] * eps;
        lq += -0.5 * std::log(2 * M_PI) - std::log(sig.data()[i]) - 0.5 * eps * eps;
        lp += -0.5 * std::log(2 * M_PI) - 0.5 * theta * theta;
      }
      double x = lq - lp;
      sum += x;
      sumsq += x * x;
    }
    double mean = sum / S;
    double se = std::sqrt((sumsq / S - mean * mean) / S);
    double cf = vi::kl_gaussian_value(vg);
    CHECK(std::abs(cf - mean) < 3.0 * se + 1e-9);
  }
}

TEST_CASE("collapsed coefficient is identically zero on a grid") {
  for (double a = 0.25; a <= 15.0; a += 0.73) {
    for (double b = 0.25; b <= 15.0; b += 0.73) {
      CHECK(std::abs(vi::ab_coefficient(a, b)) < 1e-12);
    }
  }
  CHECK(std::abs(vi::ab_coefficient(2.0, 6.0)) < 1e-12);
  CHECK(std::abs(vi::ab_coefficient(5.0, 15.0)) < 1e-12);
}

TEST_CASE("reparameterized sampling is exact and noise-free at zero noise") {
  auto vg = vg_scalar(0.7, 0.4, 1.0);
  ad::Mat zero = ad::Mat::Zero(1, 1);
  CHECK(vi::sample_weights_value(vg, zero)(0, 0) == doctest::Approx(0.7));
  ad::Mat one = ad::Mat::Ones(1, 1);
  CHECK(vi::sample_weights_value(vg, one)(0, 0) ==
        doctest::Approx(0.7 + softplus(rho_for_sigma(0.4))).epsilon(1e-12));

  auto nodes = vi::make_posterior_nodes(vg);
  auto theta = vi::sample_weights(nodes, one);
  CHECK(theta->value(0, 0) == doctest::Approx(vi::sample_weights_value(vg, one)(0, 0)));
  ad::backward(theta);
  CHECK(nodes.mu->adjoint(0, 0) == doctest::Approx(1.0));
  // d theta / d rho = eps * sigmoid(rho)
  double sg = 1.0 / (1.0 + std::exp(-rho_for_sigma(0.4)));
  CHECK(nodes.rho->adjoint(0, 0) == doctest::Approx(sg).epsilon(1e-10));
}

TEST_CASE("log_q and log_prior hand values") {
  auto vg = vg_scalar(0.0, 1.0, 1.0);
  auto nodes = vi::make_posterior_nodes(vg);
  auto theta = ad::constant(ad::Mat::Zero(1, 1));
  auto lq = vi::log_q_gaussian(nodes, theta);
  CHECK(lq->value(0, 0) == doctest::Approx(-0.5 * std::log(2 * M_PI)).epsilon(1e-12));
  auto lp = vi::log_prior_gaussian(theta, 2.0);
  CHECK(lp->value(0, 0) == doctest::Approx(-0.5 * std::log(2 * M_PI) - std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("AB Monte-Carlo divergence with target = posterior centers on zero") {
  // log_joint chosen so that p(theta) is exactly the posterior density:
  // each expectation term is then an average of ratios with mean 1, so
  // the estimator converges to 0.
  auto vg = vg_scalar(0.3, 0.6, 1.0);
  std::vector<const VariationalGaussian*> vgs = {&vg};

  auto log_joint = [&](const vi::SampledSet& set) { return set.log_q; };

  vi::DivergenceSpec spec;
  spec.kind = vi::DivergenceKind::AB_MONTE_CARLO;
  spec.alpha = 1.0;
  spec.beta = 2.0;

  // replicate with independent seeds and check the spread around zero
  std::vector<double> vals;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    std::mt19937_64 rng(seed * 77 + 5);
    spec.mc_samples = 256;
    auto d = vi::ab_divergence_mc(vgs, log_joint, spec, rng);
    vals.push_back(d->value(0, 0));
  }
  double mean = 0.0, var = 0.0;
  for (double v : vals) mean += v;
  mean /= vals.size();
  for (double v : vals) var += (v - mean) * (v - mean);
  var /= (vals.size() - 1);
  double se = std::sqrt(var / vals.size());
  CHECK(std::abs(mean) < 3.0 * se + 5e-3);
}

TEST_CASE("AB divergence grows when the posterior moves away from the target") {
  // Fixed target density p = N(0,1); divergence at a matching posterior
  // should sit well below the divergence at a displaced posterior.
  auto make_div = [&](double mu_off, std::uint64_t seed) {
    auto vg = vg_scalar(mu_off, 1.0, 1.0);
    std::vector<const VariationalGaussian*> vgs = {&vg};
    auto log_joint = [](const vi::SampledSet& set) {
      NodePtr acc;
      for (const auto& th : set.thetas) {
        auto term = ad::sum(ad::scale(ad::square(th), -0.5));
        acc = acc ? ad::add(acc, term) : term;
      }
      return acc;
    };
    vi::DivergenceSpec spec;
    spec.kind = vi::DivergenceKind::AB_MONTE_CARLO;
    spec.alpha = 1.0;
    spec.beta = 2.0;
    spec.mc_samples = 512;
    std::mt19937_64 rng(seed);
    return vi::ab_divergence_mc(vgs, log_joint, spec, rng)->value(0, 0);
  };
  double near = 0.0, far = 0.0;
  for (std::uint64_t s = 0; s < 8; ++s) {
    near += make_div(0.0, 100 + s);
    far += make_div(2.5, 200 + s);
  }
  CHECK(far / 8 > near / 8 + 0.1);
}

TEST_CASE("AB divergence gradient flows to mu and rho") {
  auto vg = vg_scalar(1.2, 0.5, 1.0);
  std::vector<const VariationalGaussian*> vgs = {&vg};
  auto log_joint = [](const vi::SampledSet& set) {
    NodePtr acc;
    for (const auto& th : set.thetas) {
      auto term = ad::sum(ad::scale(ad::square(th), -0.5));
      acc = acc ? ad::add(acc, term) : term;
    }
    return acc;
  };
  vi::DivergenceSpec spec;
  spec.kind = vi::DivergenceKind::AB_MONTE_CARLO;
  spec.mc_samples = 64;
  std::mt19937_64 rng(9);
  std::vector<vi::PosteriorNodes> leaves;
  auto d = vi::ab_divergence_mc(vgs, log_joint, spec, rng, &leaves);
  CHECK(std::isfinite(d->value(0, 0)));
  ad::backward(d);
  double gmu = 0.0, grho = 0.0;
  for (const auto& pn : leaves) {
    gmu += pn.mu->adjoint(0, 0);
    grho += pn.rho->adjoint(0, 0);
  }
  CHECK(std::isfinite(gmu));
  CHECK(std::isfinite(grho));
  CHECK(std::abs(gmu) > 1e-8);  // posterior is off-target, so pull is nonzero
}

TEST_CASE("divergence spec validation and string round trips") {
  for (auto k : {vi::DivergenceKind::KL_CLOSED_FORM, vi::DivergenceKind::AB_MONTE_CARLO,
                 vi::DivergenceKind::AB_COLLAPSED_EQ21, vi::DivergenceKind::NONE}) {
    CHECK(vi::divergence_kind_from_string(vi::to_string(k)) == k);
  }
  CHECK_THROWS_AS(vi::divergence_kind_from_string("bogus"), InvalidValue);
  vi::DivergenceSpec bad;
  bad.kind = vi::DivergenceKind::AB_MONTE_CARLO;
  bad.alpha = 0.0;
  CHECK_THROWS_AS(bad.validate(), DomainError);
  bad.alpha = 1.0;
  bad.mc_samples = 0;
  CHECK_THROWS_AS(bad.validate(), InvalidValue);
}
