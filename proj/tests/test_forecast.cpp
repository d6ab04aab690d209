#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "suncast/forecast.hpp"

using namespace suncast;

namespace {

forecast::Predictor small_predictor(bool bayesian, int k = 6, int H = 4) {
  net::NetworkConfig cfg;
  cfg.cell = net::CellKind::LSTM;
  cfg.hidden = 3;
  cfg.horizon = H;
  cfg.bayesian = bayesian;
  forecast::Predictor p;
  p.blocks.push_back(net::Model::init(cfg, 11));
  p.scaler.min = 0.0;
  p.scaler.max = 2.0;
  p.k = k;
  p.H = H;
  p.block_size = H;
  return p;
}

}  // namespace

TEST_CASE("empirical quantile interpolates between order statistics") {
  std::vector<double> v(100);
  for (int i = 0; i < 100; ++i) v[i] = i + 1.0;  // 1..100
  CHECK(forecast::empirical_quantile(v, 0.9) == doctest::Approx(90.1).epsilon(1e-12));
  CHECK(forecast::empirical_quantile(v, 0.05) == doctest::Approx(5.95).epsilon(1e-12));
  CHECK(forecast::empirical_quantile(v, 0.95) == doctest::Approx(95.05).epsilon(1e-12));
  CHECK(forecast::empirical_quantile(v, 0.5) == doctest::Approx(50.5).epsilon(1e-12));
  // order independence
  std::vector<double> shuffled = {3.0, 1.0, 2.0};
  CHECK(forecast::empirical_quantile(shuffled, 0.5) == doctest::Approx(2.0));
}

TEST_CASE("empirical quantile clamps to min/max when the tail is unsampled") {
  std::vector<double> two = {1.0, 9.0};
  CHECK(forecast::empirical_quantile(two, 0.95) == doctest::Approx(9.0));
  CHECK(forecast::empirical_quantile(two, 0.05) == doctest::Approx(1.0));
  std::vector<double> one = {4.0};
  CHECK(forecast::empirical_quantile(one, 0.9) == doctest::Approx(4.0));
  CHECK_THROWS_AS(forecast::empirical_quantile({}, 0.5), InvalidValue);
  CHECK_THROWS_AS(forecast::empirical_quantile(two, 1.5), InvalidValue);
}

TEST_CASE("mc_forecast is deterministic per seed and varies across seeds") {
  auto p = small_predictor(true);
  Eigen::MatrixXd window = Eigen::MatrixXd::Constant(p.k, 1, 0.3);
  auto a = forecast::mc_forecast(p, window, 8, 101);
  auto b = forecast::mc_forecast(p, window, 8, 101);
  auto c = forecast::mc_forecast(p, window, 8, 102);
  REQUIRE(a.sample_count() == 8);
  REQUIRE(a.horizon() == p.H);
  CHECK((a.samples - b.samples).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  CHECK((a.samples - c.samples).cwiseAbs().maxCoeff() > 0.0);
  // Bayesian draws differ across sample paths
  CHECK((a.samples.row(0) - a.samples.row(1)).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("deterministic predictor collapses every sample path") {
  auto p = small_predictor(false);
  Eigen::MatrixXd window = Eigen::MatrixXd::Constant(p.k, 1, 0.3);
  auto d = forecast::mc_forecast(p, window, 5, 1);
  for (int s = 1; s < d.sample_count(); ++s)
    CHECK((d.samples.row(s) - d.samples.row(0)).cwiseAbs().maxCoeff() ==
          doctest::Approx(0.0));
}

TEST_CASE("forecast samples are inverse-scaled to kWh") {
  auto p = small_predictor(false);
  Eigen::MatrixXd window = Eigen::MatrixXd::Constant(p.k, 1, 0.3);
  auto scaled = p.predict_scaled(window, nullptr);
  auto d = forecast::mc_forecast(p, window, 1, 1);
  for (int h = 0; h < p.H; ++h)
    CHECK(d.samples(0, h) == doctest::Approx(p.scaler.inverse(scaled(h))).epsilon(1e-12));
}

TEST_CASE("batched forecast matches per-draw weight sharing semantics") {
  auto p = small_predictor(true);
  Eigen::MatrixXd windows(3, p.k);
  windows << Eigen::RowVectorXd::Constant(p.k, 0.1),
      Eigen::RowVectorXd::Constant(p.k, 0.5),
      Eigen::RowVectorXd::Constant(p.k, 0.9);
  auto ds = forecast::mc_forecast_batch(p, windows, 6, 33);
  REQUIRE(ds.size() == 3);
  for (const auto& d : ds) {
    CHECK(d.sample_count() == 6);
    CHECK(d.horizon() == p.H);
  }
  // deterministic per seed
  auto ds2 = forecast::mc_forecast_batch(p, windows, 6, 33);
  for (int w = 0; w < 3; ++w)
    CHECK((ds[w].samples - ds2[w].samples).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  // distinct windows produce distinct distributions
  CHECK((ds[0].samples - ds[2].samples).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("predictive mean recomputes from the sample matrix") {
  forecast::ForecastDistribution d;
  d.samples = Eigen::MatrixXd(2, 3);
  d.samples << 1.0, 2.0, 3.0, 3.0, 4.0, 7.0;
  auto m = forecast::predictive_mean(d);
  REQUIRE(m.size() == 3);
  CHECK(m[0] == doctest::Approx(2.0));
  CHECK(m[1] == doctest::Approx(3.0));
  CHECK(m[2] == doctest::Approx(5.0));
}

TEST_CASE("interval bands nest and respect levels") {
  forecast::ForecastDistribution d;
  std::mt19937_64 rng(4);
  std::normal_distribution<double> nd(5.0, 1.0);
  d.samples = Eigen::MatrixXd(400, 2);
  for (int i = 0; i < d.samples.size(); ++i) d.samples.data()[i] = nd(rng);
  auto bands = forecast::intervals(d, {0.5, 0.9});
  REQUIRE(bands.size() == 2);
  CHECK(bands[0].level == doctest::Approx(0.5));
  for (int h = 0; h < 2; ++h) {
    CHECK(bands[0].lb[h] <= bands[0].ub[h]);
    // wider level contains the narrower one
    CHECK(bands[1].lb[h] <= bands[0].lb[h]);
    CHECK(bands[1].ub[h] >= bands[0].ub[h]);
  }
  forecast::ForecastDistribution single;
  single.samples = Eigen::MatrixXd::Zero(1, 2);
  CHECK_THROWS_AS(forecast::intervals(single, {0.9}), InvalidValue);
}

TEST_CASE("msa_predict clamps negatives and keeps band order") {
  auto p = small_predictor(true);
  std::vector<double> tail(p.k, 0.4);
  auto out = forecast::msa_predict(p, tail, 16, {0.5, 0.9}, 9);
  REQUIRE(static_cast<int>(out.mean_kwh.size()) == p.H);
  REQUIRE(out.bands.size() == 2);
  for (int h = 0; h < p.H; ++h) {
    CHECK(out.mean_kwh[h] >= 0.0);
    for (const auto& b : out.bands) {
      CHECK(b.lb[h] >= 0.0);
      CHECK(b.lb[h] <= b.ub[h]);
    }
  }
  CHECK_THROWS_AS(forecast::msa_predict(p, std::vector<double>(p.k - 1, 0.1), 4,
                                        {0.9}, 1),
                  ShapeError);
}
