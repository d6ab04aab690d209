#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "suncast/metrics.hpp"

using namespace suncast;

TEST_CASE("pinball matches hand-worked values") {
  // over-prediction branch: (y_hat - y) * (1 - tau)
  CHECK(metrics::pinball(0.5, 1.0, 0.9) == doctest::Approx(0.05).epsilon(1e-15));
  // under-prediction branch: (y - y_hat) * tau
  CHECK(metrics::pinball(2.0, 1.0, 0.9) == doctest::Approx(0.9).epsilon(1e-15));
  CHECK(metrics::pinball(1.0, 1.0, 0.3) == doctest::Approx(0.0));
  CHECK(metrics::pinball(3.0, 5.0, 0.25) == doctest::Approx(1.5).epsilon(1e-15));
}

TEST_CASE("pinball reflection identity") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  std::uniform_real_distribution<double> ut(0.05, 0.95);
  for (int i = 0; i < 200; ++i) {
    double y = u(rng), yh = u(rng), tau = ut(rng);
    CHECK(metrics::pinball(y, yh, tau) ==
          doctest::Approx(metrics::pinball(-y, -yh, 1.0 - tau)).epsilon(1e-12));
  }
}

TEST_CASE("winkler matches hand-worked values") {
  // inside the band: just the width
  CHECK(metrics::winkler(2.0, 1.0, 3.0, 0.1) == doctest::Approx(2.0));
  // below the band: width + 2*(lb - y)/gamma
  CHECK(metrics::winkler(0.5, 1.0, 3.0, 0.1) == doctest::Approx(12.0).epsilon(1e-15));
  // above the band: width + 2*(y - ub)/gamma
  CHECK(metrics::winkler(4.0, 1.0, 3.0, 0.1) == doctest::Approx(22.0).epsilon(1e-15));
  // boundary counts as inside
  CHECK(metrics::winkler(3.0, 1.0, 3.0, 0.1) == doctest::Approx(2.0));
}

TEST_CASE("rmse and mae hand values and inequality") {
  std::vector<double> yh = {0.0, 3.0};
  std::vector<double> y = {0.0, 0.0};
  CHECK(metrics::rmse(yh, y) == doctest::Approx(std::sqrt(4.5)).epsilon(1e-15));
  CHECK(metrics::mae(yh, y) == doctest::Approx(1.5).epsilon(1e-15));

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> a(50), b(50);
    for (int i = 0; i < 50; ++i) { a[i] = u(rng); b[i] = u(rng); }
    CHECK(metrics::mae(a, b) <= metrics::rmse(a, b) + 1e-12);
  }
}

TEST_CASE("rmse/mae invariant under paired permutation") {
  std::vector<double> yh = {1.0, 2.0, 5.0, -1.0};
  std::vector<double> y = {0.5, 2.5, 4.0, 0.0};
  std::vector<double> yh2 = {5.0, -1.0, 1.0, 2.0};
  std::vector<double> y2 = {4.0, 0.0, 0.5, 2.5};
  CHECK(metrics::rmse(yh, y) == doctest::Approx(metrics::rmse(yh2, y2)).epsilon(1e-15));
  CHECK(metrics::mae(yh, y) == doctest::Approx(metrics::mae(yh2, y2)).epsilon(1e-15));
}

TEST_CASE("rmse/mae reject mismatched lengths") {
  std::vector<double> a = {1.0, 2.0};
  std::vector<double> b = {1.0};
  CHECK_THROWS_AS(metrics::rmse(a, b), ShapeError);
  CHECK_THROWS_AS(metrics::mae(a, b), ShapeError);
}

TEST_CASE("score_forecasts aggregates a degenerate distribution exactly") {
  // All sample paths identical -> every quantile equals the path, the
  // band is the point itself, and the metrics reduce to closed forms.
  forecast::ForecastDistribution d;
  d.samples = Eigen::MatrixXd(4, 2);
  d.samples << 1.0, 2.0, 1.0, 2.0, 1.0, 2.0, 1.0, 2.0;
  std::vector<std::vector<double>> actuals = {{1.5, 2.0}};
  auto rep = metrics::score_forecasts({d}, actuals, metrics::decile_quantiles(), 0.1);
  CHECK(rep.n == 2);
  CHECK(rep.rmse == doctest::Approx(std::sqrt(0.125)).epsilon(1e-12));
  CHECK(rep.mae == doctest::Approx(0.25).epsilon(1e-12));
  // step 1: zero-width band, y above by 0.5 -> 0 + 2*0.5/0.1 = 10
  // step 2: exact hit -> 0; mean over the two steps = 5
  CHECK(rep.winkler == doctest::Approx(5.0).epsilon(1e-12));
  // pinball at tau for step 1 is 0.5*tau (under-prediction), step 2 is 0;
  // averaged over deciles and the two steps: mean(tau)=0.5 -> 0.125
  CHECK(rep.pinball_avg == doctest::Approx(0.125).epsilon(1e-12));
}

TEST_CASE("score_forecasts rejects misaligned shapes") {
  forecast::ForecastDistribution d;
  d.samples = Eigen::MatrixXd::Zero(3, 2);
  std::vector<std::vector<double>> actuals = {{1.0}};  // wrong horizon
  CHECK_THROWS_AS(metrics::score_forecasts({d}, actuals), ShapeError);
}
