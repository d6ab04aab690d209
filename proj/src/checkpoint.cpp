#include "suncast/checkpoint.hpp"

#include <fstream>

#include <json.hpp>

namespace suncast::ckpt {

using nlohmann::json;

namespace {

json mat_to_json(const ad::Mat& m) {
  json out = json::array();
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c) out.push_back(m(r, c));
  return out;
}

ad::Mat mat_from_json(const json& j, int rows, int cols) {
  ad::Mat m(rows, cols);
  if (static_cast<int>(j.size()) != rows * cols)
    throw InvalidValue("checkpoint: tensor size mismatch");
  int i = 0;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = j[i++].get<double>();
  return m;
}

}  // namespace

void save_predictor(const forecast::Predictor& pred, const std::string& path,
                    const std::string& config_hash) {
  json j;
  j["artifact"] = "suncast";
  j["version"] = 1;
  if (!config_hash.empty()) j["config_hash"] = config_hash;
  j["k"] = pred.k;
  j["horizon"] = pred.H;
  j["block_size"] = pred.block_size;
  j["scaler"] = {{"min", pred.scaler.min}, {"max", pred.scaler.max}};
  j["noise_sigma"] = pred.noise_sigma;
  j["divergence"] = {{"kind", vi::to_string(pred.divergence.kind)},
                     {"alpha", pred.divergence.alpha},
                     {"beta", pred.divergence.beta},
                     {"mc_samples", pred.divergence.mc_samples}};
  json blocks = json::array();
  for (const auto& model : pred.blocks) {
    const auto& cfg = model.config();
    json b;
    b["cell"] = net::to_string(cfg.cell);
    b["hidden"] = cfg.hidden;
    b["input_dim"] = cfg.input_dim;
    b["horizon"] = cfg.horizon;
    b["bayesian"] = cfg.bayesian;
    json tensors = json::array();
    for (const auto& t : model.tensors()) {
      json tj;
      tj["name"] = t.name;
      tj["rows"] = t.vg.rows();
      tj["cols"] = t.vg.cols();
      tj["mu"] = mat_to_json(t.vg.mu);
      tj["rho"] = mat_to_json(t.vg.rho);
      tj["prior_sigma"] = t.vg.prior_sigma;
      tensors.push_back(std::move(tj));
    }
    b["tensors"] = std::move(tensors);
    blocks.push_back(std::move(b));
  }
  j["blocks"] = std::move(blocks);
  std::ofstream f(path);
  if (!f) throw ParseError("cannot write " + path);
  f << j.dump(2) << "\n";
}

forecast::Predictor load_predictor(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw NotFound("cannot open " + path);
  json j;
  try {
    f >> j;
  } catch (const std::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  forecast::Predictor pred;
  pred.k = j.at("k").get<int>();
  pred.H = j.at("horizon").get<int>();
  pred.block_size = j.at("block_size").get<int>();
  pred.scaler.min = j.at("scaler").at("min").get<double>();
  pred.scaler.max = j.at("scaler").at("max").get<double>();
  pred.noise_sigma = j.value("noise_sigma", 0.0);
  const auto& dj = j.at("divergence");
  pred.divergence.kind = vi::divergence_kind_from_string(dj.at("kind").get<std::string>());
  pred.divergence.alpha = dj.at("alpha").get<double>();
  pred.divergence.beta = dj.at("beta").get<double>();
  pred.divergence.mc_samples = dj.at("mc_samples").get<int>();
  for (const auto& b : j.at("blocks")) {
    net::NetworkConfig cfg;
    cfg.cell = net::cell_kind_from_string(b.at("cell").get<std::string>());
    cfg.hidden = b.at("hidden").get<int>();
    cfg.input_dim = b.at("input_dim").get<int>();
    cfg.horizon = b.at("horizon").get<int>();
    cfg.bayesian = b.at("bayesian").get<bool>();
    net::Model model = net::Model::init(cfg, 0);
    auto& tensors = model.tensors();
    if (tensors.size() != b.at("tensors").size())
      throw InvalidValue(path + ": tensor count mismatch for cell " +
                         b.at("cell").get<std::string>());
    for (std::size_t i = 0; i < tensors.size(); ++i) {
      const auto& tj = b.at("tensors")[i];
      if (tj.at("name").get<std::string>() != tensors[i].name)
        throw InvalidValue(path + ": unexpected tensor " +
                           tj.at("name").get<std::string>());
      const int rows = tj.at("rows").get<int>();
      const int cols = tj.at("cols").get<int>();
      tensors[i].vg.mu = mat_from_json(tj.at("mu"), rows, cols);
      tensors[i].vg.rho = mat_from_json(tj.at("rho"), rows, cols);
      tensors[i].vg.prior_sigma = tj.at("prior_sigma").get<double>();
    }
    pred.blocks.push_back(std::move(model));
  }
  return pred;
}

}  // namespace suncast::ckpt
