#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "suncast/checkpoint.hpp"
#include "suncast/dataio.hpp"
#include "suncast/experiment.hpp"
#include "suncast/forecast.hpp"
#include "suncast/metrics.hpp"
#include "suncast/variational.hpp"

namespace py = pybind11;
using namespace suncast;

namespace {

py::dict series_to_dict(const data::Series& s) {
  py::dict d;
  d["timestamps"] = s.timestamps;
  d["values"] = s.values;
  return d;
}

py::dict report_to_dict(const metrics::ScoreReport& r) {
  py::dict d;
  d["rmse"] = r.rmse;
  d["mae"] = r.mae;
  d["pinball_avg"] = r.pinball_avg;
  d["winkler"] = r.winkler;
  d["pinball_per_quantile"] = r.pinball_per_quantile;
  d["n"] = r.n;
  return d;
}

}  // namespace

PYBIND11_MODULE(_suncast, m) {
  m.doc() = "Probabilistic multi-step solar forecasting core";

  // ---- divergences ----
  m.def("ab_coefficient", &vi::ab_coefficient, py::arg("alpha"),
        py::arg("beta"),
        "Scale factor of the alpha-beta divergence family; 0 at the KL "
        "limit alpha + beta = 1.");
  m.def(
      "kl_gaussian",
      [](const Eigen::MatrixXd& mu, const Eigen::MatrixXd& rho,
         double prior_sigma) {
        return vi::kl_gaussian_value(
            vi::VariationalGaussian(mu, rho, prior_sigma));
      },
      py::arg("mu"), py::arg("rho"), py::arg("prior_sigma") = 1.0,
      "Closed-form KL(q || prior) for a mean-field Gaussian tensor.");

  // ---- metrics ----
  m.def("pinball", &metrics::pinball, py::arg("y"), py::arg("y_hat_tau"),
        py::arg("tau"));
  m.def("winkler", &metrics::winkler, py::arg("y"), py::arg("lb"),
        py::arg("ub"), py::arg("gamma"));
  m.def("rmse", &metrics::rmse, py::arg("y_hat"), py::arg("y"));
  m.def("mae", &metrics::mae, py::arg("y_hat"), py::arg("y"));

  // ---- data ----
  m.def(
      "synth_solar",
      [](int days, std::uint64_t seed, double outlier_rate,
         double outlier_scale) {
        return series_to_dict(
            data::synth_solar(days, seed, outlier_rate, outlier_scale));
      },
      py::arg("days"), py::arg("seed") = 1, py::arg("outlier_rate") = 0.02,
      py::arg("outlier_scale") = 3.0,
      "Half-hourly synthetic solar series with outliers; returns "
      "{'timestamps', 'values'}.");
  m.def(
      "load_csv",
      [](const std::string& path) {
        return series_to_dict(data::load_csv(path));
      },
      py::arg("path"));
  m.def(
      "save_csv",
      [](const std::string& path, const std::vector<std::int64_t>& timestamps,
         const std::vector<double>& values) {
        data::Series s;
        s.timestamps = timestamps;
        s.values = values;
        data::save_csv(s, path);
      },
      py::arg("path"), py::arg("timestamps"), py::arg("values"));

  // ---- training / forecasting ----
  m.def(
      "train",
      [](const std::string& config_json, const std::string& checkpoint_path) {
        auto cfg = exp::config_from_json(config_json);
        auto art = exp::run_training(cfg);
        ckpt::save_predictor(art.pred, checkpoint_path,
                             exp::config_hash(cfg));
        py::list logs;
        for (const auto& rep : art.reports) {
          py::dict d;
          d["train_loss"] = rep.train_loss;
          d["val_loss"] = rep.val_loss;
          d["epochs_run"] = rep.epochs_run;
          d["stopped_early"] = rep.stopped_early;
          logs.append(d);
        }
        return logs;
      },
      py::arg("config_json"), py::arg("checkpoint_path"),
      "Train from a config JSON string, write a checkpoint, and return "
      "per-block training logs.");
  m.def(
      "forecast",
      [](const std::string& checkpoint_path,
         const std::vector<double>& series_tail_kwh, int samples,
         const std::vector<double>& levels, std::uint64_t seed) {
        auto pred = ckpt::load_predictor(checkpoint_path);
        auto f = forecast::msa_predict(pred, series_tail_kwh, samples, levels,
                                       seed);
        py::dict d;
        d["mean"] = f.mean_kwh;
        py::dict bands;
        for (const auto& b : f.bands) {
          py::dict band;
          band["lb"] = b.lb;
          band["ub"] = b.ub;
          bands[py::float_(b.level)] = band;
        }
        d["bands"] = bands;
        d["samples"] = f.dist.samples;
        return d;
      },
      py::arg("checkpoint_path"), py::arg("series_tail"),
      py::arg("samples") = 200,
      py::arg("levels") = std::vector<double>{0.5, 0.9}, py::arg("seed") = 1,
      "Monte-Carlo multi-step forecast from a checkpoint; returns mean, "
      "interval bands and the raw sample paths (kWh).");
  m.def(
      "evaluate",
      [](const std::string& checkpoint_path, const std::string& config_json,
         int samples, const std::vector<double>& levels, int stride,
         std::uint64_t seed) {
        auto pred = ckpt::load_predictor(checkpoint_path);
        auto cfg = exp::config_from_json(config_json);
        auto series = exp::load_or_synth(cfg);
        auto splits =
            data::split(series, cfg.train_fraction, cfg.validation_fraction);
        auto ev = exp::evaluate_predictor(pred, splits.test, samples, levels,
                                          stride, seed);
        py::dict d = report_to_dict(ev.report);
        py::dict cov;
        for (std::size_t i = 0; i < ev.levels.size(); ++i)
          cov[py::float_(ev.levels[i])] = ev.coverage[i];
        d["coverage"] = cov;
        return d;
      },
      py::arg("checkpoint_path"), py::arg("config_json"),
      py::arg("samples") = 200,
      py::arg("levels") = std::vector<double>{0.5, 0.9}, py::arg("stride") = 48,
      py::arg("seed") = 1,
      "Score a checkpoint on the test split of the configured series.");
  m.def("default_config",
        [] { return exp::config_to_json(exp::ExperimentConfig{}); });
}
