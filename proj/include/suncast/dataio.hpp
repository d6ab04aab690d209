#ifndef SUNCAST_DATAIO_HPP
#define SUNCAST_DATAIO_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "suncast/errors.hpp"

// Half-hourly solar generation series: ingestion, scaling, supervised
// windowing, chronological splits, and a synthetic outlier-laden
// generator for desk-scale experiments.
namespace suncast::data {

// Timestamps are minutes since the Unix epoch; spacing is exactly 30.
struct Series {
  std::vector<std::int64_t> timestamps;
  std::vector<double> values;  // kWh per interval, finite, >= 0

  std::size_t size() const { return values.size(); }
  void validate() const;  // spacing, monotonicity, finiteness
};

std::int64_t parse_iso8601_minutes(const std::string& s);
std::string format_iso8601_minutes(std::int64_t minutes);

// Long CSV with header "timestamp,kwh". Lines starting with '#' are
// skipped. Gaps, duplicates, and out-of-order rows are errors.
Series load_csv(const std::string& path);
void save_csv(const Series& s, const std::string& path,
              const std::string& header_comment = "");

// Ausgrid-style wide CSV (one row per customer/category/day, 48
// half-hour columns) filtered to one customer's gross generation.
Series convert_wide_csv(const std::string& path, const std::string& customer_id,
                        const std::string& category = "GG");

// Min-max scaler fit on the training portion only.
struct Scaler {
  double min = 0.0;
  double max = 1.0;

  static Scaler fit(const std::vector<double>& train_values);
  double transform(double v) const { return (v - min) / (max - min); }
  double inverse(double s) const { return min + s * (max - min); }
  std::vector<double> transform(const std::vector<double>& v) const;
  std::vector<double> inverse(const std::vector<double>& v) const;
};

// Supervised windows: inputs N x k (univariate features), targets N x H.
// Row i holds series[i..i+k) as input and series[i+k..i+k+H) as target.
struct WindowSet {
  Eigen::MatrixXd inputs;
  Eigen::MatrixXd targets;
  int k = 0;
  int H = 0;

  int count() const { return static_cast<int>(inputs.rows()); }
};

WindowSet make_windows(const std::vector<double>& scaled, int k, int H);

struct SplitSeries {
  Series train;
  Series validation;
  Series test;
};

// Chronological split; validation is carved from the tail of the
// training segment. Fractions must lie in (0,1).
SplitSeries split(const Series& s, double train_fraction,
                  double validation_fraction);

// Synthetic half-hourly solar series: clipped-sinusoid diurnal envelope,
// day-level amplitude random walk, multiplicative noise, and occasional
// outlier spikes/drops. Deterministic per seed; night intervals are
// exactly zero.
Series synth_solar(int days, std::uint64_t seed, double outlier_rate,
                   double outlier_scale);

}  // namespace suncast::data

#endif
