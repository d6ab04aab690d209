// suncast command-line interface:
//   convert   Ausgrid-style wide CSV -> long timestamp,kwh CSV
//   synth     write a synthetic half-hourly solar CSV
//   train     train a forecaster from a JSON config
//   forecast  multi-step forecast CSV from a checkpoint
//   evaluate  score a checkpoint on a test CSV
//   compare   method-comparison matrix on one dataset
//
// Exit codes: 0 success, 1 usage/config error, 2 data error, 3 training
// divergence.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "suncast/checkpoint.hpp"
#include "suncast/experiment.hpp"

namespace fs = std::filesystem;
using namespace suncast;

namespace {

constexpr const char* kVersion = "suncast 0.1.0";

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw ParseError("cannot write " + path);
  f << text;
}

std::string file_header(const std::string& hash) {
  return std::string(kVersion) + " config=" + hash;
}

int cmd_train(const std::string& config_path) {
  auto cfg = exp::load_config(config_path);
  const std::string hash = exp::config_hash(cfg);
  fs::create_directories(cfg.output_dir);

  auto art = exp::run_training(cfg);

  ckpt::save_predictor(art.pred, cfg.output_dir + "/checkpoint.json", hash);
  // resolved config echo (all defaults materialized)
  write_text(cfg.output_dir + "/config_echo.json", exp::config_to_json(cfg) + "\n");

  std::ostringstream log;
  log << "# " << file_header(hash) << "\n";
  log << "epoch,train_loss,val_loss\n";
  const auto& rep = art.reports.front();
  for (int e = 0; e < rep.epochs_run; ++e)
    log << e << "," << rep.train_loss[e] << "," << rep.val_loss[e] << "\n";
  write_text(cfg.output_dir + "/train_log.csv", log.str());

  double total_s = 0;
  for (const auto& r : art.reports) total_s += r.wall_time_s;
  std::cout << "trained " << art.pred.blocks.size() << " block(s), "
            << rep.epochs_run << " epochs (first block), " << total_s
            << " s total -> " << cfg.output_dir << "/checkpoint.json\n";
  return 0;
}

int cmd_forecast(const std::string& ckpt_path, const std::string& series_path,
                 const std::string& out_path, int S,
                 std::vector<double> levels, std::uint64_t seed) {
  auto pred = ckpt::load_predictor(ckpt_path);
  auto series = data::load_csv(series_path);
  if (static_cast<int>(series.size()) < pred.k)
    throw TooShort("forecast: series shorter than k");
  std::vector<double> tail(series.values.end() - pred.k, series.values.end());
  if (levels.empty()) levels = {0.2, 0.5, 0.9};
  std::sort(levels.begin(), levels.end());
  auto fc = forecast::msa_predict(pred, tail, S, levels, seed);

  std::ostringstream os;
  os << "# " << kVersion << " checkpoint=" << ckpt_path << " samples=" << S
     << " seed=" << seed << "\n";
  os << "step,mean_kwh";
  for (double l : levels) {
    const int pct = static_cast<int>(std::lround(l * 100));
    os << ",lb" << pct << ",ub" << pct;
  }
  os << "\n";
  char buf[64];
  for (int h = 0; h < pred.H; ++h) {
    os << (h + 1);
    std::snprintf(buf, sizeof(buf), ",%.6f", fc.mean_kwh[h]);
    os << buf;
    for (const auto& band : fc.bands) {
      std::snprintf(buf, sizeof(buf), ",%.6f,%.6f", band.lb[h], band.ub[h]);
      os << buf;
    }
    if (fc.bands.empty() && S == 1) {
      // single-draw run has no bands
    }
    os << "\n";
  }
  write_text(out_path, os.str());
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

int cmd_evaluate(const std::string& ckpt_path, const std::string& series_path,
                 const std::string& out_path, int S, int stride,
                 std::uint64_t seed) {
  auto pred = ckpt::load_predictor(ckpt_path);
  auto series = data::load_csv(series_path);
  auto ev = exp::evaluate_predictor(pred, series, S, {0.2, 0.5, 0.9}, stride, seed);
  std::ostringstream os;
  os << "# " << kVersion << " checkpoint=" << ckpt_path << "\n";
  os << ev.report.to_text();
  for (std::size_t i = 0; i < ev.levels.size(); ++i) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "coverage_%02d %.4f",
                  static_cast<int>(std::lround(ev.levels[i] * 100)),
                  ev.coverage[i]);
    os << buf << "\n";
  }
  write_text(out_path, os.str());
  std::cout << os.str();
  return 0;
}

int cmd_compare(const std::string& config_path, const std::string& out_path,
                int num_seeds, const std::vector<int>& horizons,
                const std::vector<std::string>& ab_grid) {
  auto cfg = exp::load_config(config_path);
  const std::string hash = exp::config_hash(cfg);

  if (!ab_grid.empty()) {
    // alpha-beta sweep for the Bayesian BiLSTM at one horizon
    std::ostringstream os;
    os << "# " << file_header(hash) << "\n";
    os << "alpha,beta,seed,rmse_kwh,mae_kwh,pinball_avg_kwh,winkler_kwh\n";
    for (const auto& pair : ab_grid) {
      double a, b;
      if (std::sscanf(pair.c_str(), "%lf:%lf", &a, &b) != 2)
        throw InvalidValue("--ab-grid entries must look like 1:2");
      for (int s = 0; s < num_seeds; ++s) {
        exp::ExperimentConfig c = cfg;
        c.bayesian = true;
        c.train.divergence.kind = vi::DivergenceKind::AB_MONTE_CARLO;
        c.train.divergence.alpha = a;
        c.train.divergence.beta = b;
        c.synth.seed = cfg.synth.seed + s;
        c.seed = cfg.seed + 31ULL * s;
        c.train.seed = c.seed;
        auto art = exp::run_training(c);
        auto ev = exp::evaluate_predictor(art.pred, art.splits.test,
                                          c.forecast_samples, c.levels,
                                          c.eval_stride, c.seed + 17);
        char buf[200];
        std::snprintf(buf, sizeof(buf), "%g,%g,%d,%.6f,%.6f,%.6f,%.6f", a, b, s,
                      ev.report.rmse, ev.report.mae, ev.report.pinball_avg,
                      ev.report.winkler);
        os << buf << "\n";
      }
    }
    write_text(out_path, os.str());
    std::cout << "wrote " << out_path << "\n";
    return 0;
  }

  std::vector<net::CellKind> cells = {net::CellKind::RNN, net::CellKind::LSTM,
                                      net::CellKind::BILSTM};
  std::vector<vi::DivergenceKind> modes = {vi::DivergenceKind::NONE,
                                           vi::DivergenceKind::KL_CLOSED_FORM,
                                           vi::DivergenceKind::AB_MONTE_CARLO};
  std::vector<std::uint64_t> seeds;
  for (int s = 0; s < num_seeds; ++s) seeds.push_back(cfg.seed + s);
  auto rows = exp::run_compare(cfg, cells, modes, horizons, seeds);
  write_text(out_path, exp::compare_to_csv(rows, file_header(hash)));
  std::cout << "wrote " << out_path << " (" << rows.size() << " rows)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Probabilistic multi-step solar generation forecasting"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  // convert
  auto* conv = app.add_subcommand("convert", "wide Ausgrid CSV -> long CSV");
  std::string in_path, out_path, customer, category = "GG";
  conv->add_option("input", in_path, "wide CSV path")->required();
  conv->add_option("output", out_path, "long CSV path")->required();
  conv->add_option("--customer", customer, "customer id")->required();
  conv->add_option("--category", category, "consumption category (default GG)");

  // synth
  auto* synth = app.add_subcommand("synth", "write synthetic solar CSV");
  int days = 120;
  std::uint64_t seed = 1;
  double outlier_rate = 0.02, outlier_scale = 3.0;
  std::string synth_out;
  synth->add_option("output", synth_out, "output CSV")->required();
  synth->add_option("--days", days);
  synth->add_option("--seed", seed);
  synth->add_option("--outlier-rate", outlier_rate);
  synth->add_option("--outlier-scale", outlier_scale);

  // train
  auto* train_cmd = app.add_subcommand("train", "train from JSON config");
  std::string config_path;
  train_cmd->add_option("config", config_path, "config JSON")->required();

  // forecast
  auto* fc_cmd = app.add_subcommand("forecast", "forecast from a checkpoint");
  std::string ckpt_path, series_path, fc_out = "forecast.csv";
  int samples = 200;
  std::vector<double> levels;
  std::uint64_t fc_seed = 1;
  fc_cmd->add_option("checkpoint", ckpt_path)->required();
  fc_cmd->add_option("series", series_path, "long CSV; last k values feed the model")
      ->required();
  fc_cmd->add_option("--out", fc_out);
  fc_cmd->add_option("--samples", samples);
  fc_cmd->add_option("--levels", levels, "PI coverage levels (default 0.2 0.5 0.9)");
  fc_cmd->add_option("--seed", fc_seed);

  // evaluate
  auto* ev_cmd = app.add_subcommand("evaluate", "score a checkpoint on a CSV");
  std::string ev_out = "scores.txt";
  int stride = 48;
  ev_cmd->add_option("checkpoint", ckpt_path)->required();
  ev_cmd->add_option("series", series_path)->required();
  ev_cmd->add_option("--out", ev_out);
  ev_cmd->add_option("--samples", samples);
  ev_cmd->add_option("--stride", stride);
  ev_cmd->add_option("--seed", fc_seed);

  // compare
  auto* cmp_cmd = app.add_subcommand("compare", "method comparison matrix");
  std::string cmp_out = "compare.csv";
  int num_seeds = 5;
  std::vector<int> horizons = {1, 12, 24, 48};
  std::vector<std::string> ab_grid;
  cmp_cmd->add_option("config", config_path, "base config JSON")->required();
  cmp_cmd->add_option("--out", cmp_out);
  cmp_cmd->add_option("--seeds", num_seeds);
  cmp_cmd->add_option("--horizons", horizons);
  cmp_cmd->add_option("--ab-grid", ab_grid,
                      "alpha:beta pairs; runs the sweep instead of the matrix");

  CLI11_PARSE(app, argc, argv);

  try {
    if (conv->parsed()) {
      auto series = data::convert_wide_csv(in_path, customer, category);
      data::save_csv(series, out_path,
                     std::string(kVersion) + " converted from " + in_path);
      std::cout << "wrote " << out_path << " (" << series.size() << " rows)\n";
      return 0;
    }
    if (synth->parsed()) {
      auto series = data::synth_solar(days, seed, outlier_rate, outlier_scale);
      data::save_csv(series, synth_out,
                     std::string(kVersion) + " synth seed=" + std::to_string(seed));
      std::cout << "wrote " << synth_out << " (" << series.size() << " rows)\n";
      return 0;
    }
    if (train_cmd->parsed()) return cmd_train(config_path);
    if (fc_cmd->parsed())
      return cmd_forecast(ckpt_path, series_path, fc_out, samples, levels, fc_seed);
    if (ev_cmd->parsed())
      return cmd_evaluate(ckpt_path, series_path, ev_out, samples, stride, fc_seed);
    if (cmp_cmd->parsed())
      return cmd_compare(config_path, cmp_out, num_seeds, horizons, ab_grid);
  } catch (const TrainingDiverged& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NotFound& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
