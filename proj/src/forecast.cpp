#include "suncast/forecast.hpp"

#include <algorithm>
#include <cmath>

namespace suncast::forecast {

Eigen::VectorXd Predictor::predict_scaled(const Eigen::MatrixXd& window,
                                          std::mt19937_64* rng) const {
  if (static_cast<int>(window.rows()) != k)
    throw ShapeError("Predictor::predict_scaled: window must have k rows");
  Eigen::VectorXd out(H);
  int base = 0;
  for (const auto& m : blocks) {
    Eigen::VectorXd y = m.predict(window, rng);
    out.segment(base, y.size()) = y;
    base += static_cast<int>(y.size());
  }
  if (base != H) throw ShapeError("Predictor: block horizons do not sum to H");
  return out;
}

double empirical_quantile(std::vector<double> values, double tau) {
  if (values.empty()) throw InvalidValue("empirical_quantile: empty sample");
  if (tau <= 0.0 || tau >= 1.0)
    throw InvalidValue("empirical_quantile: tau must be in (0,1)");
  std::sort(values.begin(), values.end());
  const int n = static_cast<int>(values.size());
  if (n == 1) return values[0];
  // tail too thin to interpolate: clamp to the extreme order statistic
  if (n * tau <= 1.0 && tau < 0.5) return values.front();
  if (n * (1.0 - tau) <= 1.0 && tau > 0.5) return values.back();
  const double h = (n - 1) * tau;  // R-7
  const int lo = static_cast<int>(std::floor(h));
  const int hi = std::min(lo + 1, n - 1);
  const double frac = h - lo;
  return values[lo] + frac * (values[hi] - values[lo]);
}

double predictive_quantile(const ForecastDistribution& dist, int h, double tau) {
  if (tau <= 0.0 || tau >= 1.0)
    throw InvalidValue("predictive_quantile: tau must be in (0,1)");
  const int S = dist.sample_count();
  if (S < 1) throw InvalidValue("predictive_quantile: empty sample");
  const auto col = dist.samples.col(h);
  if (dist.noise_sd <= 0.0)
    return empirical_quantile(std::vector<double>(col.data(), col.data() + S),
                              tau);
  const double sd = dist.noise_sd;
  // mixture CDF is strictly increasing: bisect F(x) = tau
  auto cdf = [&](double x) {
    double acc = 0.0;
    for (int s = 0; s < S; ++s)
      acc += 0.5 * std::erfc(-(x - col(s)) / (sd * std::sqrt(2.0)));
    return acc / S;
  };
  double lo = col.minCoeff() - 10.0 * sd;
  double hi = col.maxCoeff() + 10.0 * sd;
  for (int it = 0; it < 200 && hi - lo > 1e-12 * (1.0 + std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    (cdf(mid) < tau ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

ForecastDistribution mc_forecast(const Predictor& pred,
                                 const Eigen::MatrixXd& window_scaled, int S,
                                 std::uint64_t seed) {
  if (S < 1) throw InvalidValue("mc_forecast: S < 1");
  ForecastDistribution dist;
  dist.samples.resize(S, pred.H);
  dist.noise_sd = pred.noise_sigma * (pred.scaler.max - pred.scaler.min);
  for (int s = 0; s < S; ++s) {
    // per-draw stream keeps samples order-stable and parallelizable
    std::mt19937_64 rng(seed ^ (0x9e3779b97f4a7c15ULL * (s + 1)));
    Eigen::VectorXd y = pred.predict_scaled(window_scaled, &rng);
    for (int h = 0; h < pred.H; ++h)
      dist.samples(s, h) = pred.scaler.inverse(y(h));
  }
  return dist;
}

std::vector<ForecastDistribution> mc_forecast_batch(
    const Predictor& pred, const Eigen::MatrixXd& windows_scaled, int S,
    std::uint64_t seed) {
  if (S < 1) throw InvalidValue("mc_forecast_batch: S < 1");
  if (static_cast<int>(windows_scaled.cols()) != pred.k)
    throw ShapeError("mc_forecast_batch: windows must have k columns");
  const int n = static_cast<int>(windows_scaled.rows());
  const double noise_kwh = pred.noise_sigma * (pred.scaler.max - pred.scaler.min);
  std::vector<ForecastDistribution> out(n);
  for (auto& d : out) {
    d.samples.resize(S, pred.H);
    d.noise_sd = noise_kwh;
  }

  std::vector<Eigen::MatrixXd> seq;
  seq.reserve(pred.k);
  for (int t = 0; t < pred.k; ++t) seq.push_back(windows_scaled.col(t));

  for (int s = 0; s < S; ++s) {
    std::mt19937_64 rng(seed ^ (0x9e3779b97f4a7c15ULL * (s + 1)));
    int base = 0;
    for (const auto& model : pred.blocks) {
      auto pass = model.forward(seq, &rng);
      const auto& y = pass.output->value;  // n x block horizon
      for (int i = 0; i < n; ++i)
        for (int h = 0; h < y.cols(); ++h)
          out[i].samples(s, base + h) = pred.scaler.inverse(y(i, h));
      base += static_cast<int>(y.cols());
    }
  }
  return out;
}

std::vector<double> predictive_mean(const ForecastDistribution& dist) {
  std::vector<double> out(dist.horizon());
  for (int h = 0; h < dist.horizon(); ++h)
    out[h] = dist.samples.col(h).mean();
  return out;
}

std::vector<IntervalBand> intervals(const ForecastDistribution& dist,
                                    const std::vector<double>& levels) {
  if (dist.sample_count() < 2)
    throw InvalidValue("intervals: need at least 2 samples");
  std::vector<IntervalBand> out;
  for (double level : levels) {
    if (level <= 0.0 || level >= 1.0)
      throw InvalidValue("intervals: level must be in (0,1)");
    IntervalBand band;
    band.level = level;
    const double tau_lo = (1.0 - level) / 2.0;
    for (int h = 0; h < dist.horizon(); ++h) {
      band.lb.push_back(predictive_quantile(dist, h, tau_lo));
      band.ub.push_back(predictive_quantile(dist, h, 1.0 - tau_lo));
    }
    out.push_back(std::move(band));
  }
  return out;
}

MsaForecast msa_predict(const Predictor& pred,
                        const std::vector<double>& series_tail_kwh, int S,
                        const std::vector<double>& levels, std::uint64_t seed) {
  if (static_cast<int>(series_tail_kwh.size()) != pred.k)
    throw ShapeError("msa_predict: tail length must equal k");
  Eigen::MatrixXd window(pred.k, 1);
  for (int i = 0; i < pred.k; ++i)
    window(i, 0) = pred.scaler.transform(series_tail_kwh[i]);
  MsaForecast out;
  out.dist = mc_forecast(pred, window, S, seed);
  out.mean_kwh = predictive_mean(out.dist);
  if (S >= 2) out.bands = intervals(out.dist, levels);
  // clamp after quantiles so nesting is preserved
  for (auto& v : out.mean_kwh) v = std::max(v, 0.0);
  for (auto& band : out.bands) {
    for (auto& v : band.lb) v = std::max(v, 0.0);
    for (auto& v : band.ub) v = std::max(v, 0.0);
  }
  return out;
}

}  // namespace suncast::forecast
