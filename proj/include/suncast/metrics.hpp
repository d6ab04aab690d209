#ifndef SUNCAST_METRICS_HPP
#define SUNCAST_METRICS_HPP

#include <map>
#include <string>
#include <vector>

#include "suncast/errors.hpp"
#include "suncast/forecast.hpp"

// Forecast scoring: Pinball loss, Winkler score, RMSE, MAE. All scores
// are computed in kWh space.
namespace suncast::metrics {

double pinball(double y, double y_hat_tau, double tau);
double winkler(double y, double lb, double ub, double gamma);
double rmse(const std::vector<double>& y_hat, const std::vector<double>& y);
double mae(const std::vector<double>& y_hat, const std::vector<double>& y);

inline const std::vector<double>& decile_quantiles() {
  static const std::vector<double> q = {0.1, 0.2, 0.3, 0.4, 0.5,
                                        0.6, 0.7, 0.8, 0.9};
  return q;
}

struct ScoreReport {
  double rmse = 0.0;
  double mae = 0.0;
  double pinball_avg = 0.0;
  double winkler = 0.0;
  std::map<double, double> pinball_per_quantile;
  int n = 0;  // scored (window, step) pairs

  std::string to_text() const;    // flat key-value block
  std::string to_csv_row() const; // headline metrics only
  static std::string csv_header();
};

// Aggregates over test windows: RMSE/MAE against the predictive mean,
// Pinball over the quantile grid using empirical sample quantiles, and
// Winkler at confidence 1-gamma using the matching central band.
ScoreReport score_forecasts(
    const std::vector<forecast::ForecastDistribution>& dists,
    const std::vector<std::vector<double>>& actuals,
    const std::vector<double>& quantile_set = decile_quantiles(),
    double gamma = 0.1);

}  // namespace suncast::metrics

#endif
