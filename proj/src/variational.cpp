#include "suncast/variational.hpp"

#include <algorithm>
#include <cmath>

namespace suncast::vi {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;

Mat standard_normal(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Mat m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = nd(rng);
  return m;
}

// log-sum-exp over scalar nodes, stabilized by the (constant) max value
NodePtr logsumexp(const std::vector<NodePtr>& xs) {
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& x : xs) m = std::max(m, x->scalar());
  if (!std::isfinite(m)) throw InvalidValue("logsumexp: non-finite inputs");
  const auto shift = ad::constant_scalar(m);
  NodePtr acc = ad::exp(ad::sub(xs[0], shift));
  for (size_t i = 1; i < xs.size(); ++i)
    acc = ad::add(acc, ad::exp(ad::sub(xs[i], shift)));
  return ad::add(shift, ad::log(acc));
}
}  // namespace

VariationalGaussian::VariationalGaussian(Mat mu_, Mat rho_, double prior_sigma_)
    : mu(std::move(mu_)), rho(std::move(rho_)), prior_sigma(prior_sigma_) {
  if (mu.rows() != rho.rows() || mu.cols() != rho.cols())
    throw ShapeError("VariationalGaussian: mu/rho shape mismatch");
  if (prior_sigma <= 0) throw InvalidValue("VariationalGaussian: prior_sigma <= 0");
}

Mat VariationalGaussian::sigma_p() const {
  return rho.unaryExpr([](double x) {
    return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
  });
}

void DivergenceSpec::validate() const {
  if (mc_samples < 1) throw InvalidValue("DivergenceSpec: mc_samples < 1");
  if (kind == DivergenceKind::AB_MONTE_CARLO ||
      kind == DivergenceKind::AB_COLLAPSED_EQ21) {
    if (alpha == 0.0 || beta == 0.0 || alpha + beta == 0.0)
      throw DomainError("DivergenceSpec: alpha, beta, alpha+beta must be nonzero");
  }
}

std::string to_string(DivergenceKind k) {
  switch (k) {
    case DivergenceKind::KL_CLOSED_FORM: return "kl";
    case DivergenceKind::AB_MONTE_CARLO: return "ab";
    case DivergenceKind::AB_COLLAPSED_EQ21: return "ab_collapsed";
    case DivergenceKind::NONE: return "none";
  }
  return "none";
}

DivergenceKind divergence_kind_from_string(const std::string& s) {
  if (s == "kl") return DivergenceKind::KL_CLOSED_FORM;
  if (s == "ab") return DivergenceKind::AB_MONTE_CARLO;
  if (s == "ab_collapsed") return DivergenceKind::AB_COLLAPSED_EQ21;
  if (s == "none") return DivergenceKind::NONE;
  throw InvalidValue("unknown divergence kind: " + s);
}

PosteriorNodes make_posterior_nodes(const VariationalGaussian& vg) {
  return {ad::leaf(vg.mu, true), ad::leaf(vg.rho, true)};
}

NodePtr sample_weights(const PosteriorNodes& nodes, const Mat& noise) {
  if (noise.rows() != nodes.mu->rows() || noise.cols() != nodes.mu->cols())
    throw ShapeError("sample_weights: noise shape mismatch");
  return ad::add(nodes.mu, ad::mul(ad::softplus(nodes.rho), ad::constant(noise)));
}

Mat sample_weights_value(const VariationalGaussian& vg, const Mat& noise) {
  if (noise.rows() != vg.mu.rows() || noise.cols() != vg.mu.cols())
    throw ShapeError("sample_weights_value: noise shape mismatch");
  return vg.mu + vg.sigma_p().cwiseProduct(noise);
}

NodePtr kl_gaussian(const PosteriorNodes& nodes, double prior_sigma) {
  const double n = static_cast<double>(nodes.mu->value.size());
  const double inv2s2 = 1.0 / (2.0 * prior_sigma * prior_sigma);
  auto sp = ad::softplus(nodes.rho);
  auto t1 = ad::negate(ad::sum(ad::log(sp)));
  auto t2 = ad::scale(ad::add(ad::sum(ad::square(sp)), ad::sum(ad::square(nodes.mu))),
                      inv2s2);
  auto c = ad::constant_scalar(n * (std::log(prior_sigma) - 0.5));
  return ad::add(ad::add(t1, t2), c);
}

double kl_gaussian_value(const VariationalGaussian& vg) {
  const Mat sp = vg.sigma_p();
  const double s2 = vg.prior_sigma * vg.prior_sigma;
  double acc = 0.0;
  for (int r = 0; r < vg.rows(); ++r)
    for (int c = 0; c < vg.cols(); ++c) {
      const double sigp = sp(r, c);
      const double mu = vg.mu(r, c);
      acc += std::log(vg.prior_sigma / sigp) + (sigp * sigp + mu * mu) / (2.0 * s2) - 0.5;
    }
  return acc;
}

double ab_coefficient(double alpha, double beta) {
  const double ab = alpha * beta;
  const double s = alpha + beta;
  if (alpha == 0.0 || beta == 0.0 || s == 0.0)
    throw DomainError("ab_coefficient: zero denominator");
  return (s - 1.0) / (beta * s) - (s - 1.0) / ab - 1.0 / (alpha * s) + 1.0 / alpha;
}

NodePtr log_q_gaussian(const PosteriorNodes& nodes, const NodePtr& theta) {
  const double n = static_cast<double>(nodes.mu->value.size());
  auto logsp = ad::log(ad::softplus(nodes.rho));
  auto diff = ad::sub(theta, nodes.mu);
  auto z = ad::mul(diff, ad::exp(ad::negate(logsp)));
  auto t = ad::sub(ad::scale(ad::sum(ad::square(z)), -0.5), ad::sum(logsp));
  return ad::add(t, ad::constant_scalar(-0.5 * n * kLog2Pi));
}

NodePtr log_prior_gaussian(const NodePtr& theta, double prior_sigma) {
  const double n = static_cast<double>(theta->value.size());
  auto t = ad::scale(ad::sum(ad::square(theta)),
                     -1.0 / (2.0 * prior_sigma * prior_sigma));
  return ad::add(t, ad::constant_scalar(-n * (std::log(prior_sigma) + 0.5 * kLog2Pi)));
}

SampledSet sample_posterior_set_with(const std::vector<const VariationalGaussian*>& vgs,
                                     const std::vector<Mat>& noises) {
  if (noises.size() != vgs.size())
    throw ShapeError("sample_posterior_set_with: noise count mismatch");
  SampledSet set;
  for (std::size_t i = 0; i < vgs.size(); ++i) {
    auto nodes = make_posterior_nodes(*vgs[i]);
    auto theta = sample_weights(nodes, noises[i]);
    auto lq = log_q_gaussian(nodes, theta);
    set.log_q = set.log_q ? ad::add(set.log_q, lq) : lq;
    set.posteriors.push_back(std::move(nodes));
    set.thetas.push_back(std::move(theta));
  }
  if (!set.log_q) throw InvalidValue("sample_posterior_set_with: empty posterior set");
  return set;
}

SampledSet sample_posterior_set(const std::vector<const VariationalGaussian*>& vgs,
                                std::mt19937_64& rng) {
  SampledSet set;
  for (const auto* vg : vgs) {
    auto nodes = make_posterior_nodes(*vg);
    Mat noise = standard_normal(vg->rows(), vg->cols(), rng);
    auto theta = sample_weights(nodes, noise);
    auto lq = log_q_gaussian(nodes, theta);
    set.log_q = set.log_q ? ad::add(set.log_q, lq) : lq;
    set.posteriors.push_back(std::move(nodes));
    set.thetas.push_back(std::move(theta));
  }
  if (!set.log_q) throw InvalidValue("sample_posterior_set: empty posterior set");
  return set;
}

NodePtr ab_divergence_mc(const std::vector<const VariationalGaussian*>& vgs,
                         const LogJointFn& log_joint, const DivergenceSpec& spec,
                         std::mt19937_64& rng,
                         std::vector<PosteriorNodes>* collected) {
  spec.validate();
  if (spec.mc_samples < 1) throw InvalidValue("ab_divergence_mc: mc_samples < 1");
  const double a = spec.alpha, b = spec.beta, s = a + b;
  const int S = spec.mc_samples;
  const double log_s = std::log(static_cast<double>(S));

  // Antithetic pairs (noise, -noise) inside each expectation: exact for
  // the even-symmetric q-only factors and a large variance cut for the
  // joint-dependent ones, at no extra forward cost.
  auto expectation = [&](const std::function<NodePtr(const SampledSet&)>& term) {
    std::vector<NodePtr> xs;
    xs.reserve(S);
    std::vector<Mat> noises(vgs.size());
    for (int i = 0; i < S; ++i) {
      if (i % 2 == 0) {
        for (std::size_t t = 0; t < vgs.size(); ++t)
          noises[t] = standard_normal(vgs[t]->rows(), vgs[t]->cols(), rng);
      } else {
        for (auto& nmat : noises) nmat = -nmat;
      }
      auto set = sample_posterior_set_with(vgs, noises);
      if (collected)
        for (auto& pn : set.posteriors) collected->push_back(pn);
      auto x = term(set);
      if (!std::isfinite(x->scalar()))
        throw InvalidValue("ab_divergence_mc: non-finite term");
      xs.push_back(std::move(x));
    }
    return ad::sub(logsumexp(xs), ad::constant_scalar(log_s));
  };

  // E[p^(a+b)/q]
  auto termA = expectation([&](const SampledSet& set) {
    return ad::sub(ad::scale(log_joint(set), s), set.log_q);
  });
  // E[q^(a+b-1)]
  auto termB = expectation([&](const SampledSet& set) {
    return ad::scale(set.log_q, s - 1.0);
  });
  // E[q^(a+b-1) (p/q)^b]
  auto termC = expectation([&](const SampledSet& set) {
    return ad::add(ad::scale(set.log_q, s - 1.0 - b),
                   ad::scale(log_joint(set), b));
  });

  return ad::add(ad::add(ad::scale(termA, 1.0 / (a * s)),
                         ad::scale(termB, 1.0 / (b * s))),
                 ad::scale(termC, -1.0 / (a * b)));
}

double ab_divergence_mc_value(
    const std::vector<const VariationalGaussian*>& vgs,
    const std::function<double(const std::vector<Mat>&)>& log_joint_value,
    const DivergenceSpec& spec, std::mt19937_64& rng, double* se_out) {
  spec.validate();
  const double a = spec.alpha, b = spec.beta, s = a + b;
  const int S = spec.mc_samples;
  std::normal_distribution<double> nd(0.0, 1.0);

  auto draw = [&](double& log_q, std::vector<Mat>& thetas) {
    log_q = 0.0;
    thetas.clear();
    for (const auto* vg : vgs) {
      const Mat sp = vg->sigma_p();
      Mat th(vg->rows(), vg->cols());
      for (int i = 0; i < th.size(); ++i) {
        const double eps = nd(rng);
        th.data()[i] = vg->mu.data()[i] + sp.data()[i] * eps;
        log_q += -0.5 * std::log(2.0 * M_PI) - std::log(sp.data()[i]) -
                 0.5 * eps * eps;
      }
      thetas.push_back(std::move(th));
    }
  };

  struct Term {
    double mean, var;  // var of the log-mean-exp estimate
  };
  auto expectation = [&](const std::function<double(double, const std::vector<Mat>&)>&
                             exponent) -> Term {
    std::vector<double> xs(S);
    std::vector<Mat> thetas;
    for (int i = 0; i < S; ++i) {
      double lq;
      draw(lq, thetas);
      xs[i] = exponent(lq, thetas);
      if (!std::isfinite(xs[i]))
        throw InvalidValue("ab_divergence_mc_value: non-finite term");
    }
    const double m = *std::max_element(xs.begin(), xs.end());
    double sum = 0.0, sumsq = 0.0;
    for (double x : xs) {
      const double y = std::exp(x - m);
      sum += y;
      sumsq += y * y;
    }
    const double mean = sum / S;
    const double var_y = std::max(0.0, sumsq / S - mean * mean);
    // delta method for log of a sample mean
    return {m + std::log(mean), var_y / (S * mean * mean)};
  };

  const Term ta = expectation([&](double lq, const std::vector<Mat>& th) {
    return s * log_joint_value(th) - lq;
  });
  const Term tb = expectation(
      [&](double lq, const std::vector<Mat>&) { return (s - 1.0) * lq; });
  const Term tc = expectation([&](double lq, const std::vector<Mat>& th) {
    return (s - 1.0 - b) * lq + b * log_joint_value(th);
  });

  const double ca = 1.0 / (a * s), cb = 1.0 / (b * s), cc = -1.0 / (a * b);
  if (se_out)
    *se_out = std::sqrt(ca * ca * ta.var + cb * cb * tb.var + cc * cc * tc.var);
  return ca * ta.mean + cb * tb.mean + cc * tc.mean;
}

NodePtr divergence(const std::vector<const VariationalGaussian*>& vgs,
                   const LogJointFn& log_joint, const DivergenceSpec& spec,
                   std::mt19937_64& rng,
                   std::vector<PosteriorNodes>* posterior_nodes) {
  spec.validate();
  switch (spec.kind) {
    case DivergenceKind::NONE:
      return ad::constant_scalar(0.0);
    case DivergenceKind::KL_CLOSED_FORM: {
      NodePtr total;
      for (const auto* vg : vgs) {
        auto nodes = make_posterior_nodes(*vg);
        auto kl = kl_gaussian(nodes, vg->prior_sigma);
        total = total ? ad::add(total, kl) : kl;
        if (posterior_nodes) posterior_nodes->push_back(std::move(nodes));
      }
      return total ? total : ad::constant_scalar(0.0);
    }
    case DivergenceKind::AB_MONTE_CARLO: {
      return ab_divergence_mc(vgs, log_joint, spec, rng, posterior_nodes);
    }
    case DivergenceKind::AB_COLLAPSED_EQ21: {
      // coefficient x MC estimate of E_q[log q]; verification-only path
      const double coeff = ab_coefficient(spec.alpha, spec.beta);
      double e_log_q = 0.0;
      for (int i = 0; i < spec.mc_samples; ++i) {
        auto set = sample_posterior_set(vgs, rng);
        e_log_q += set.log_q->scalar();
      }
      e_log_q /= static_cast<double>(spec.mc_samples);
      return ad::constant_scalar(coeff * e_log_q);
    }
  }
  return ad::constant_scalar(0.0);
}

}  // namespace suncast::vi
