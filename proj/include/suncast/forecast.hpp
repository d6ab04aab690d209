#ifndef SUNCAST_FORECAST_HPP
#define SUNCAST_FORECAST_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "suncast/dataio.hpp"
#include "suncast/recurrent.hpp"

// Monte-Carlo predictive distributions over the H-step horizon and the
// percentile prediction intervals derived from them.
namespace suncast::forecast {

// S Monte-Carlo sample paths over the horizon, already in kWh.
// samples holds the network outputs under weight draws; noise_sd is the
// scale of the zero-mean residual component, so the full predictive
// distribution is the equal-weight mixture of N(sample, noise_sd^2).
// Quantiles and intervals come from the mixture; the predictive mean
// uses the samples alone, since the noise is zero-mean and would only
// add estimator variance.
struct ForecastDistribution {
  Eigen::MatrixXd samples;  // S x H
  double noise_sd = 0.0;    // residual scale, kWh

  int sample_count() const { return static_cast<int>(samples.rows()); }
  int horizon() const { return static_cast<int>(samples.cols()); }
};

struct IntervalBand {
  double level;            // nominal coverage, e.g. 0.90
  std::vector<double> lb;  // length H
  std::vector<double> ub;
};

// A trained forecaster: one model per DIRMO block (one block = pure
// MIMO), plus the scaler fit on its training data.
struct Predictor {
  std::vector<net::Model> blocks;  // block b covers steps [b*s, min((b+1)s, H))
  data::Scaler scaler;
  int k = 0;
  int H = 0;
  int block_size = 0;  // s; H for pure MIMO
  vi::DivergenceSpec divergence;  // echo of the training spec
  // Residual scale in scaled units, estimated on the validation windows
  // after training. Widens predictive draws beyond weight uncertainty so
  // intervals cover observation noise, not just epistemic spread.
  double noise_sigma = 0.0;

  // Full-horizon pass over a scaled k-row window; one fresh weight draw
  // per block when rng is non-null.
  Eigen::VectorXd predict_scaled(const Eigen::MatrixXd& window,
                                 std::mt19937_64* rng) const;
};

// Empirical quantile with linear interpolation between order statistics;
// falls back to min/max when the requested tail holds less than one
// sample (n*tau <= 1 or n*(1-tau) <= 1).
double empirical_quantile(std::vector<double> values, double tau);

// Quantile of the horizon-step-h predictive mixture: the equal-weight
// Gaussian mixture over samples.col(h) with bandwidth noise_sd, solved
// by bisection on the mixture CDF. Falls back to the empirical quantile
// when noise_sd is 0. Deterministic, and far more stable in the tails
// than order statistics of noisy draws.
double predictive_quantile(const ForecastDistribution& dist, int h, double tau);

// S independent weight draws, one forward pass each, inverse-scaled to
// kWh. Deterministic per seed; draw s uses a seed derived from (seed, s).
ForecastDistribution mc_forecast(const Predictor& pred,
                                 const Eigen::MatrixXd& window_scaled, int S,
                                 std::uint64_t seed);

// Batched variant over n scaled windows (n x k). Draw s shares one
// weight sample across the windows; distributions stay per-window.
std::vector<ForecastDistribution> mc_forecast_batch(
    const Predictor& pred, const Eigen::MatrixXd& windows_scaled, int S,
    std::uint64_t seed);

std::vector<double> predictive_mean(const ForecastDistribution& dist);

// Central bands at the given coverage levels; level l uses quantiles
// (1-l)/2 and 1-(1-l)/2 per horizon step.
std::vector<IntervalBand> intervals(const ForecastDistribution& dist,
                                    const std::vector<double>& levels);

struct MsaForecast {
  std::vector<double> mean_kwh;  // length H, clamped at 0
  std::vector<IntervalBand> bands;
  ForecastDistribution dist;
};

// scale -> mc_forecast -> mean + bands; negative kWh clamped to 0 after
// quantile computation.
MsaForecast msa_predict(const Predictor& pred,
                        const std::vector<double>& series_tail_kwh, int S,
                        const std::vector<double>& levels, std::uint64_t seed);

}  // namespace suncast::forecast

#endif
