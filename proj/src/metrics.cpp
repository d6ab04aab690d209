#include "suncast/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace suncast::metrics {

double pinball(double y, double y_hat_tau, double tau) {
  if (tau <= 0.0 || tau >= 1.0)
    throw InvalidValue("pinball: tau must be in (0,1)");
  return y >= y_hat_tau ? tau * (y - y_hat_tau) : (1.0 - tau) * (y_hat_tau - y);
}

double winkler(double y, double lb, double ub, double gamma) {
  if (lb > ub) throw InvalidValue("winkler: lb > ub");
  if (gamma <= 0.0 || gamma >= 1.0)
    throw InvalidValue("winkler: gamma must be in (0,1)");
  const double delta = ub - lb;
  if (y < lb) return delta + 2.0 * (lb - y) / gamma;
  if (y > ub) return delta + 2.0 * (y - ub) / gamma;
  return delta;
}

double rmse(const std::vector<double>& y_hat, const std::vector<double>& y) {
  if (y_hat.size() != y.size() || y.empty())
    throw ShapeError("rmse: length mismatch or empty");
  double acc = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double e = y_hat[i] - y[i];
    acc += e * e;
  }
  return std::sqrt(acc / static_cast<double>(y.size()));
}

double mae(const std::vector<double>& y_hat, const std::vector<double>& y) {
  if (y_hat.size() != y.size() || y.empty())
    throw ShapeError("mae: length mismatch or empty");
  double acc = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) acc += std::abs(y_hat[i] - y[i]);
  return acc / static_cast<double>(y.size());
}

std::string ScoreReport::to_text() const {
  std::ostringstream os;
  char buf[64];
  auto put = [&](const char* key, double v) {
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    os << key << " " << buf << "\n";
  };
  put("rmse_kwh", rmse);
  put("mae_kwh", mae);
  put("pinball_avg_kwh", pinball_avg);
  put("winkler_kwh", winkler);
  os << "n " << n << "\n";
  for (const auto& [tau, v] : pinball_per_quantile) {
    std::snprintf(buf, sizeof(buf), "pinball_q%02d %.6f",
                  static_cast<int>(std::lround(tau * 100)), v);
    os << buf << "\n";
  }
  return os.str();
}

std::string ScoreReport::csv_header() {
  return "rmse_kwh,mae_kwh,pinball_avg_kwh,winkler_kwh,n";
}

std::string ScoreReport::to_csv_row() const {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%.6f,%.6f,%.6f,%.6f,%d", rmse, mae,
                pinball_avg, winkler, n);
  return buf;
}

ScoreReport score_forecasts(
    const std::vector<forecast::ForecastDistribution>& dists,
    const std::vector<std::vector<double>>& actuals,
    const std::vector<double>& quantile_set, double gamma) {
  if (dists.empty() || dists.size() != actuals.size())
    throw InvalidValue("score_forecasts: empty or mismatched inputs");
  std::vector<double> means, ys;
  double pinball_acc = 0.0;
  double winkler_acc = 0.0;
  std::map<double, double> per_q;
  int n = 0;
  const double tau_lo = gamma / 2.0;
  for (std::size_t w = 0; w < dists.size(); ++w) {
    const auto& dist = dists[w];
    const auto& actual = actuals[w];
    if (static_cast<int>(actual.size()) != dist.horizon())
      throw ShapeError("score_forecasts: horizon mismatch");
    auto mean = forecast::predictive_mean(dist);
    for (int h = 0; h < dist.horizon(); ++h) {
      means.push_back(mean[h]);
      ys.push_back(actual[h]);
      // quantiles come from the full predictive mixture (weights + noise)
      for (double tau : quantile_set) {
        const double q = forecast::predictive_quantile(dist, h, tau);
        const double p = pinball(actual[h], q, tau);
        pinball_acc += p;
        per_q[tau] += p;
      }
      const double lb = forecast::predictive_quantile(dist, h, tau_lo);
      const double ub = forecast::predictive_quantile(dist, h, 1.0 - tau_lo);
      winkler_acc += winkler(actual[h], lb, ub, gamma);
      ++n;
    }
  }
  ScoreReport rep;
  rep.rmse = rmse(means, ys);
  rep.mae = mae(means, ys);
  rep.pinball_avg = pinball_acc / (static_cast<double>(n) * quantile_set.size());
  rep.winkler = winkler_acc / static_cast<double>(n);
  for (auto& [tau, v] : per_q) v /= static_cast<double>(n);
  rep.pinball_per_quantile = per_q;
  rep.n = n;
  return rep;
}

}  // namespace suncast::metrics
