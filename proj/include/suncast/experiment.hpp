#ifndef SUNCAST_EXPERIMENT_HPP
#define SUNCAST_EXPERIMENT_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "suncast/checkpoint.hpp"
#include "suncast/metrics.hpp"
#include "suncast/training.hpp"

// End-to-end pipeline: data -> split -> scale -> windows -> train ->
// forecast -> score, plus the method-comparison matrix.
namespace suncast::exp {

struct SynthSpec {
  int days = 120;
  std::uint64_t seed = 1;
  double outlier_rate = 0.02;
  double outlier_scale = 3.0;
};

struct ExperimentConfig {
  std::string csv_path;  // empty: synthesize
  SynthSpec synth;
  double train_fraction = 0.75;
  double validation_fraction = 0.2;

  net::CellKind cell = net::CellKind::BILSTM;
  int hidden = 64;
  int k = 48;
  int horizon = 48;
  bool bayesian = true;
  double prior_sigma = 1.0;
  int dirmo_block = 0;  // 0: pure MIMO (block = H)

  train::TrainConfig train;

  int forecast_samples = 200;
  std::vector<double> levels = {0.2, 0.5, 0.9};
  int eval_stride = 48;  // windows scored on the test segment
  std::uint64_t seed = 1;
  std::string output_dir = ".";

  void validate() const;
};

std::string config_to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const std::string& text);
ExperimentConfig load_config(const std::string& path);
// FNV-1a over the canonical JSON dump.
std::string config_hash(const ExperimentConfig& cfg);

struct TrainedArtifacts {
  forecast::Predictor pred;
  std::vector<train::TrainReport> reports;  // one per DIRMO block
  data::SplitSeries splits;
};

data::Series load_or_synth(const ExperimentConfig& cfg);

// Trains the predictor (all DIRMO blocks) on the configured data.
TrainedArtifacts run_training(const ExperimentConfig& cfg);

struct Evaluation {
  metrics::ScoreReport report;
  // empirical PI coverage per requested level
  std::vector<double> levels;
  std::vector<double> coverage;
};

// Scores the predictor on the test segment: every eval_stride-th window,
// S Monte-Carlo draws each.
Evaluation evaluate_predictor(const forecast::Predictor& pred,
                              const data::Series& test, int S,
                              const std::vector<double>& levels, int stride,
                              std::uint64_t seed);

struct CompareCell {
  net::CellKind cell;
  vi::DivergenceKind mode;  // NONE = deterministic
  int horizon;
  std::uint64_t seed;
  metrics::ScoreReport report;
  double train_seconds = 0.0;
};

// Paired comparison: every cell sees the same series and split for a
// given seed. Cell RNG streams are derived from (base seed, cell id).
std::vector<CompareCell> run_compare(
    const ExperimentConfig& base, const std::vector<net::CellKind>& cells,
    const std::vector<vi::DivergenceKind>& modes,
    const std::vector<int>& horizons, const std::vector<std::uint64_t>& seeds);

std::string compare_to_csv(const std::vector<CompareCell>& cells,
                           const std::string& header_comment);

double median(std::vector<double> v);

}  // namespace suncast::exp

#endif
