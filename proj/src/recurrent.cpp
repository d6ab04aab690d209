#include "suncast/recurrent.hpp"

#include <cmath>

namespace suncast::net {

namespace {

NodePtr broadcast_rows(const NodePtr& row, int batch) {
  if (row->rows() != 1) throw ShapeError("broadcast_rows: expected row vector");
  return ad::matmul(ad::constant(Mat::Ones(batch, 1)), row);
}

Mat standard_normal(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Mat m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = nd(rng);
  return m;
}

}  // namespace

std::string to_string(CellKind k) {
  switch (k) {
    case CellKind::RNN: return "rnn";
    case CellKind::LSTM: return "lstm";
    case CellKind::BILSTM: return "bilstm";
  }
  return "bilstm";
}

CellKind cell_kind_from_string(const std::string& s) {
  if (s == "rnn") return CellKind::RNN;
  if (s == "lstm") return CellKind::LSTM;
  if (s == "bilstm") return CellKind::BILSTM;
  throw InvalidValue("unknown cell kind: " + s);
}

CellState zero_state(int batch, int hidden) {
  return {ad::constant(Mat::Zero(batch, hidden)),
          ad::constant(Mat::Zero(batch, hidden))};
}

CellState lstm_cell_step(const LstmNodeParams& p, const NodePtr& x_t,
                         const CellState& prev) {
  const int batch = x_t->rows();
  auto z = ad::concat_cols(prev.y, x_t);  // [y_{t-1}, x_t]
  auto gate = [&](const NodePtr& w, const NodePtr& b) {
    return ad::add(ad::matmul(z, w), broadcast_rows(b, batch));
  };
  auto i = ad::sigmoid(gate(p.w_i, p.b_i));
  auto f = ad::sigmoid(gate(p.w_f, p.b_f));
  auto o = ad::sigmoid(gate(p.w_o, p.b_o));
  auto c_tilde = ad::tanh(gate(p.w_c, p.b_c));
  auto c = ad::add(ad::mul(prev.c, f), ad::mul(i, c_tilde));
  auto y = ad::mul(o, ad::tanh(c));
  return {c, y};
}

NodePtr rnn_cell_step(const NodePtr& w, const NodePtr& b, const NodePtr& x_t,
                      const NodePtr& prev_y) {
  auto z = ad::concat_cols(prev_y, x_t);
  return ad::tanh(ad::add(ad::matmul(z, w), broadcast_rows(b, x_t->rows())));
}

NodePtr bilstm_forward(const LstmNodeParams& fwd, const LstmNodeParams& bwd,
                       const std::vector<NodePtr>& sequence) {
  if (sequence.empty()) throw InvalidValue("bilstm_forward: empty sequence");
  const int batch = sequence.front()->rows();
  const int hidden = fwd.b_i->cols();
  CellState sf = zero_state(batch, hidden);
  for (const auto& x : sequence) sf = lstm_cell_step(fwd, x, sf);
  CellState sb = zero_state(batch, hidden);
  for (auto it = sequence.rbegin(); it != sequence.rend(); ++it)
    sb = lstm_cell_step(bwd, *it, sb);
  return ad::concat_cols(sf.y, sb.y);
}

NodePtr dense_head(const NodePtr& w, const NodePtr& b, const NodePtr& features) {
  return ad::add(ad::matmul(features, w), broadcast_rows(b, features->rows()));
}

int Model::head_input_dim() const {
  return cfg_.cell == CellKind::BILSTM ? 2 * cfg_.hidden : cfg_.hidden;
}

Model Model::init(const NetworkConfig& cfg, std::uint64_t seed) {
  if (cfg.hidden < 1 || cfg.input_dim < 1 || cfg.horizon < 1)
    throw InvalidValue("NetworkConfig: hidden, input_dim, horizon must be >= 1");
  Model m;
  m.cfg_ = cfg;
  std::mt19937_64 rng(seed);
  auto add_tensor = [&](const std::string& name, int rows, int cols, int fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> ud(-bound, bound);
    Mat mu(rows, cols);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) mu(r, c) = ud(rng);
    // rho = -3 gives sigma_p ~ 0.0486 at init
    Mat rho = Mat::Constant(rows, cols, -3.0);
    m.tensors_.push_back({name, vi::VariationalGaussian(mu, rho, cfg.prior_sigma)});
  };
  const int zdim = cfg.hidden + cfg.input_dim;
  auto add_lstm = [&](const std::string& prefix) {
    for (const char* g : {"w_i", "w_f", "w_o", "w_c"})
      add_tensor(prefix + "." + g, zdim, cfg.hidden, zdim);
    for (const char* g : {"b_i", "b_f", "b_o", "b_c"})
      add_tensor(prefix + "." + g, 1, cfg.hidden, zdim);
  };
  switch (cfg.cell) {
    case CellKind::RNN:
      add_tensor("rnn.w", zdim, cfg.hidden, zdim);
      add_tensor("rnn.b", 1, cfg.hidden, zdim);
      break;
    case CellKind::LSTM:
      add_lstm("fwd");
      break;
    case CellKind::BILSTM:
      add_lstm("fwd");
      add_lstm("bwd");
      break;
  }
  add_tensor("head.w", m.head_input_dim(), cfg.horizon, m.head_input_dim());
  add_tensor("head.b", 1, cfg.horizon, m.head_input_dim());
  return m;
}

std::vector<const vi::VariationalGaussian*> Model::posteriors() const {
  std::vector<const vi::VariationalGaussian*> out;
  out.reserve(tensors_.size());
  for (const auto& t : tensors_) out.push_back(&t.vg);
  return out;
}

std::vector<Mat*> Model::trainable() {
  std::vector<Mat*> out;
  for (auto& t : tensors_) {
    out.push_back(&t.vg.mu);
    if (cfg_.bayesian) out.push_back(&t.vg.rho);
  }
  return out;
}

Pass Model::forward(const std::vector<Mat>& sequence,
                    std::mt19937_64* noise_rng) const {
  if (sequence.empty()) throw InvalidValue("Model::forward: empty sequence");
  for (const auto& x : sequence)
    if (static_cast<int>(x.cols()) != cfg_.input_dim)
      throw ShapeError("Model::forward: input_dim mismatch");

  Pass pass;
  std::vector<NodePtr> weights;  // aligned with tensors_
  weights.reserve(tensors_.size());
  for (const auto& t : tensors_) {
    BoundTensor bt;
    bt.mu = ad::leaf(t.vg.mu, true);
    NodePtr w;
    if (cfg_.bayesian && noise_rng != nullptr) {
      bt.rho = ad::leaf(t.vg.rho, true);
      Mat noise = standard_normal(t.vg.rows(), t.vg.cols(), *noise_rng);
      w = vi::sample_weights({bt.mu, bt.rho}, noise);
    } else {
      w = bt.mu;  // deterministic pass, or Bayesian evaluation at mu
    }
    weights.push_back(std::move(w));
    pass.bound.push_back(std::move(bt));
  }

  std::vector<NodePtr> seq;
  seq.reserve(sequence.size());
  for (const auto& x : sequence) seq.push_back(ad::constant(x));
  pass.output = forward_with(weights, seq);
  return pass;
}

NodePtr Model::forward_with(const std::vector<NodePtr>& weights,
                            const std::vector<NodePtr>& seq) const {
  if (weights.size() != tensors_.size())
    throw ShapeError("Model::forward_with: weight count mismatch");
  if (seq.empty()) throw InvalidValue("Model::forward_with: empty sequence");
  const int batch = seq.front()->rows();

  auto lstm_at = [&](int base) {
    return LstmNodeParams{weights[base + 0], weights[base + 1], weights[base + 2],
                          weights[base + 3], weights[base + 4], weights[base + 5],
                          weights[base + 6], weights[base + 7]};
  };

  NodePtr features;
  switch (cfg_.cell) {
    case CellKind::RNN: {
      NodePtr y = ad::constant(Mat::Zero(batch, cfg_.hidden));
      for (const auto& x : seq) y = rnn_cell_step(weights[0], weights[1], x, y);
      features = y;
      break;
    }
    case CellKind::LSTM: {
      CellState s = zero_state(batch, cfg_.hidden);
      for (const auto& x : seq) s = lstm_cell_step(lstm_at(0), x, s);
      features = s.y;
      break;
    }
    case CellKind::BILSTM: {
      features = bilstm_forward(lstm_at(0), lstm_at(8), seq);
      break;
    }
  }
  const size_t head = tensors_.size() - 2;
  return dense_head(weights[head], weights[head + 1], features);
}

Eigen::VectorXd Model::predict(const Mat& window,
                               std::mt19937_64* noise_rng) const {
  if (static_cast<int>(window.cols()) != cfg_.input_dim)
    throw ShapeError("Model::predict: window column count != input_dim");
  std::vector<Mat> seq;
  seq.reserve(window.rows());
  for (int t = 0; t < window.rows(); ++t)
    seq.push_back(window.row(t));
  Pass p = forward(seq, noise_rng);
  return p.output->value.row(0).transpose();
}

}  // namespace suncast::net
