#include "suncast/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace suncast::exp {

using nlohmann::json;

void ExperimentConfig::validate() const {
  if (k < 1 || horizon < 1) throw InvalidValue("config: k and horizon must be >= 1");
  if (hidden < 1) throw InvalidValue("config: hidden < 1");
  if (prior_sigma <= 0) throw InvalidValue("config: prior_sigma must be > 0");
  if (dirmo_block < 0 || dirmo_block > horizon)
    throw InvalidValue("config: dirmo_block out of [0, horizon]");
  if (forecast_samples < 1) throw InvalidValue("config: forecast_samples < 1");
  if (eval_stride < 1) throw InvalidValue("config: eval_stride < 1");
  for (double l : levels)
    if (l <= 0 || l >= 1) throw InvalidValue("config: levels must be in (0,1)");
  if (train_fraction <= 0 || train_fraction >= 1 || validation_fraction <= 0 ||
      validation_fraction >= 1)
    throw InvalidValue("config: fractions must be in (0,1)");
  train.validate();
}

std::string config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["data"] = {{"csv", cfg.csv_path},
               {"synth",
                {{"days", cfg.synth.days},
                 {"seed", cfg.synth.seed},
                 {"outlier_rate", cfg.synth.outlier_rate},
                 {"outlier_scale", cfg.synth.outlier_scale}}},
               {"train_fraction", cfg.train_fraction},
               {"validation_fraction", cfg.validation_fraction}};
  j["model"] = {{"cell", net::to_string(cfg.cell)},
                {"hidden", cfg.hidden},
                {"k", cfg.k},
                {"horizon", cfg.horizon},
                {"bayesian", cfg.bayesian},
                {"prior_sigma", cfg.prior_sigma},
                {"dirmo_block", cfg.dirmo_block}};
  j["divergence"] = {{"kind", vi::to_string(cfg.train.divergence.kind)},
                     {"alpha", cfg.train.divergence.alpha},
                     {"beta", cfg.train.divergence.beta},
                     {"mc_samples", cfg.train.divergence.mc_samples}};
  j["train"] = {{"epochs", cfg.train.epochs},
                {"batch_size", cfg.train.batch_size},
                {"learning_rate", cfg.train.learning_rate},
                {"obs_sigma", cfg.train.obs_sigma},
                {"patience", cfg.train.patience},
                {"min_delta", cfg.train.min_delta},
                {"max_grad_norm", cfg.train.max_grad_norm}};
  j["forecast"] = {{"samples", cfg.forecast_samples},
                   {"levels", cfg.levels},
                   {"eval_stride", cfg.eval_stride}};
  j["seed"] = cfg.seed;
  j["output_dir"] = cfg.output_dir;
  return j.dump(2);
}

ExperimentConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  ExperimentConfig cfg;
  auto get = [](const json& obj, const char* section, const char* key, auto& out) {
    if (!obj.contains(section)) return;
    const auto& s = obj.at(section);
    if (!s.contains(key)) return;
    try {
      s.at(key).get_to(out);
    } catch (const std::exception& e) {
      throw ParseError(std::string("config field ") + section + "." + key + ": " +
                       e.what());
    }
  };
  get(j, "data", "csv", cfg.csv_path);
  if (j.contains("data") && j.at("data").contains("synth")) {
    const json wrap = {{"synth", j.at("data").at("synth")}};
    get(wrap, "synth", "days", cfg.synth.days);
    get(wrap, "synth", "seed", cfg.synth.seed);
    get(wrap, "synth", "outlier_rate", cfg.synth.outlier_rate);
    get(wrap, "synth", "outlier_scale", cfg.synth.outlier_scale);
  }
  get(j, "data", "train_fraction", cfg.train_fraction);
  get(j, "data", "validation_fraction", cfg.validation_fraction);
  std::string cell_name = net::to_string(cfg.cell);
  get(j, "model", "cell", cell_name);
  cfg.cell = net::cell_kind_from_string(cell_name);
  get(j, "model", "hidden", cfg.hidden);
  get(j, "model", "k", cfg.k);
  get(j, "model", "horizon", cfg.horizon);
  get(j, "model", "bayesian", cfg.bayesian);
  get(j, "model", "prior_sigma", cfg.prior_sigma);
  get(j, "model", "dirmo_block", cfg.dirmo_block);
  std::string kind = vi::to_string(cfg.train.divergence.kind);
  get(j, "divergence", "kind", kind);
  cfg.train.divergence.kind = vi::divergence_kind_from_string(kind);
  get(j, "divergence", "alpha", cfg.train.divergence.alpha);
  get(j, "divergence", "beta", cfg.train.divergence.beta);
  get(j, "divergence", "mc_samples", cfg.train.divergence.mc_samples);
  get(j, "train", "epochs", cfg.train.epochs);
  get(j, "train", "batch_size", cfg.train.batch_size);
  get(j, "train", "learning_rate", cfg.train.learning_rate);
  get(j, "train", "obs_sigma", cfg.train.obs_sigma);
  get(j, "train", "patience", cfg.train.patience);
  get(j, "train", "min_delta", cfg.train.min_delta);
  get(j, "train", "max_grad_norm", cfg.train.max_grad_norm);
  get(j, "forecast", "samples", cfg.forecast_samples);
  get(j, "forecast", "levels", cfg.levels);
  get(j, "forecast", "eval_stride", cfg.eval_stride);
  if (j.contains("seed")) j.at("seed").get_to(cfg.seed);
  if (j.contains("output_dir")) j.at("output_dir").get_to(cfg.output_dir);
  cfg.train.validation_fraction = cfg.validation_fraction;
  cfg.train.seed = cfg.seed;
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw NotFound("cannot open config " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return config_from_json(ss.str());
}

std::string config_hash(const ExperimentConfig& cfg) {
  const std::string dump = config_to_json(cfg);
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

data::Series load_or_synth(const ExperimentConfig& cfg) {
  if (!cfg.csv_path.empty()) return data::load_csv(cfg.csv_path);
  return data::synth_solar(cfg.synth.days, cfg.synth.seed, cfg.synth.outlier_rate,
                           cfg.synth.outlier_scale);
}

TrainedArtifacts run_training(const ExperimentConfig& cfg) {
  cfg.validate();
  TrainedArtifacts art;
  data::Series series = load_or_synth(cfg);
  art.splits = data::split(series, cfg.train_fraction, cfg.validation_fraction);

  art.pred.scaler = data::Scaler::fit(art.splits.train.values);
  art.pred.k = cfg.k;
  art.pred.H = cfg.horizon;
  art.pred.block_size = cfg.dirmo_block == 0 ? cfg.horizon : cfg.dirmo_block;
  art.pred.divergence = cfg.train.divergence;

  const auto train_scaled = art.pred.scaler.transform(art.splits.train.values);
  const auto val_scaled = art.pred.scaler.transform(art.splits.validation.values);
  const auto train_ws = data::make_windows(train_scaled, cfg.k, cfg.horizon);
  const auto val_ws = data::make_windows(val_scaled, cfg.k, cfg.horizon);

  const int s = art.pred.block_size;
  const int num_blocks = (cfg.horizon + s - 1) / s;
  for (int b = 0; b < num_blocks; ++b) {
    const int h0 = b * s;
    const int bh = std::min(s, cfg.horizon - h0);
    net::NetworkConfig ncfg;
    ncfg.cell = cfg.cell;
    ncfg.hidden = cfg.hidden;
    ncfg.input_dim = 1;
    ncfg.horizon = bh;
    ncfg.bayesian = cfg.bayesian;
    ncfg.prior_sigma = cfg.prior_sigma;
    net::Model model = net::Model::init(ncfg, cfg.seed + 7919ULL * b);

    data::WindowSet tws{train_ws.inputs, train_ws.targets.middleCols(h0, bh),
                        cfg.k, bh};
    data::WindowSet vws{val_ws.inputs, val_ws.targets.middleCols(h0, bh), cfg.k,
                        bh};
    train::TrainConfig tcfg = cfg.train;
    tcfg.seed = cfg.seed + 104729ULL * b;
    art.reports.push_back(train::train(model, tws, vws, tcfg));
    art.pred.blocks.push_back(std::move(model));
  }

  // Residual scale at mu on the validation windows (scaled units); used
  // to widen predictive draws beyond weight uncertainty.
  if (val_ws.count() > 0) {
    std::vector<Eigen::MatrixXd> seq;
    seq.reserve(cfg.k);
    for (int t = 0; t < cfg.k; ++t) seq.push_back(val_ws.inputs.col(t));
    double sq = 0.0;
    long n = 0;
    int base = 0;
    for (const auto& model : art.pred.blocks) {
      auto pass = model.forward(seq, nullptr);
      const auto& y = pass.output->value;
      for (int i = 0; i < y.rows(); ++i)
        for (int h = 0; h < y.cols(); ++h) {
          const double r = y(i, h) - val_ws.targets(i, base + h);
          sq += r * r;
          ++n;
        }
      base += static_cast<int>(y.cols());
    }
    if (n > 0) art.pred.noise_sigma = std::sqrt(sq / static_cast<double>(n));
  }
  return art;
}

Evaluation evaluate_predictor(const forecast::Predictor& pred,
                              const data::Series& test, int S,
                              const std::vector<double>& levels, int stride,
                              std::uint64_t seed) {
  const auto scaled = pred.scaler.transform(test.values);
  const auto ws = data::make_windows(scaled, pred.k, pred.H);
  std::vector<int> picks;
  for (int i = 0; i < ws.count(); i += stride) picks.push_back(i);
  if (picks.empty()) throw TooShort("evaluate_predictor: no test windows");

  Eigen::MatrixXd windows(picks.size(), pred.k);
  for (std::size_t i = 0; i < picks.size(); ++i)
    windows.row(i) = ws.inputs.row(picks[i]);

  auto dists = forecast::mc_forecast_batch(pred, windows, S, seed);
  std::vector<std::vector<double>> actuals;
  for (int idx : picks) {
    std::vector<double> row(pred.H);
    for (int h = 0; h < pred.H; ++h)
      row[h] = pred.scaler.inverse(ws.targets(idx, h));
    actuals.push_back(std::move(row));
  }

  Evaluation ev;
  ev.report = metrics::score_forecasts(dists, actuals);
  ev.levels = levels;
  for (double level : levels) {
    long inside = 0, total = 0;
    for (std::size_t w = 0; w < dists.size(); ++w) {
      auto bands = forecast::intervals(dists[w], {level});
      for (int h = 0; h < pred.H; ++h) {
        const double y = actuals[w][h];
        if (y >= bands[0].lb[h] && y <= bands[0].ub[h]) ++inside;
        ++total;
      }
    }
    ev.coverage.push_back(static_cast<double>(inside) / static_cast<double>(total));
  }
  return ev;
}

std::vector<CompareCell> run_compare(
    const ExperimentConfig& base, const std::vector<net::CellKind>& cells,
    const std::vector<vi::DivergenceKind>& modes,
    const std::vector<int>& horizons, const std::vector<std::uint64_t>& seeds) {
  std::vector<CompareCell> out;
  for (std::uint64_t seed : seeds) {
    std::uint64_t cell_id = 0;
    for (int H : horizons) {
      for (auto cell : cells) {
        for (auto mode : modes) {
          ++cell_id;
          ExperimentConfig cfg = base;
          cfg.cell = cell;
          cfg.horizon = H;
          cfg.bayesian = mode != vi::DivergenceKind::NONE;
          cfg.train.divergence.kind = mode;
          // data split is fixed per seed so method deltas are paired
          cfg.synth.seed = base.synth.seed + seed;
          cfg.seed = seed * 1000003ULL + cell_id;
          cfg.train.seed = cfg.seed;

          const auto t0 = std::chrono::steady_clock::now();
          auto art = run_training(cfg);
          CompareCell cc;
          cc.cell = cell;
          cc.mode = mode;
          cc.horizon = H;
          cc.seed = seed;
          cc.train_seconds = std::chrono::duration<double>(
                                 std::chrono::steady_clock::now() - t0)
                                 .count();
          // a deterministic predictor collapses to its point forecast;
          // two draws are enough to carry the band plumbing
          const int S = cfg.bayesian ? cfg.forecast_samples : 2;
          auto ev = evaluate_predictor(art.pred, art.splits.test, S, cfg.levels,
                                       cfg.eval_stride, cfg.seed + 17);
          cc.report = ev.report;
          out.push_back(std::move(cc));
        }
      }
    }
  }
  return out;
}

std::string compare_to_csv(const std::vector<CompareCell>& cells,
                           const std::string& header_comment) {
  std::ostringstream os;
  if (!header_comment.empty()) os << "# " << header_comment << "\n";
  os << "cell,mode,horizon,seed,rmse_kwh,mae_kwh,pinball_avg_kwh,winkler_kwh,"
        "train_seconds\n";
  char buf[256];
  for (const auto& c : cells) {
    // deterministic rows have no probabilistic scores, matching the
    // "-" cells of point methods
    std::string pin = "-", win = "-";
    if (c.mode != vi::DivergenceKind::NONE) {
      std::snprintf(buf, sizeof(buf), "%.6f", c.report.pinball_avg);
      pin = buf;
      std::snprintf(buf, sizeof(buf), "%.6f", c.report.winkler);
      win = buf;
    }
    std::snprintf(buf, sizeof(buf), "%s,%s,%d,%llu,%.6f,%.6f,%s,%s,%.2f",
                  net::to_string(c.cell).c_str(),
                  vi::to_string(c.mode).c_str(), c.horizon,
                  static_cast<unsigned long long>(c.seed), c.report.rmse,
                  c.report.mae, pin.c_str(), win.c_str(), c.train_seconds);
    os << buf << "\n";
  }
  return os.str();
}

double median(std::vector<double> v) {
  if (v.empty()) throw InvalidValue("median: empty");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace suncast::exp
