#ifndef SUNCAST_RECURRENT_HPP
#define SUNCAST_RECURRENT_HPP

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "suncast/autodiff.hpp"
#include "suncast/variational.hpp"

// RNN / LSTM / BiLSTM layers with a dense multi-output head. Parameters
// are either fixed matrices or mean-field Gaussian posteriors; every
// forward pass builds a fresh graph. Batch samples are folded into rows,
// so a cell state is B x hidden and an input step is B x input_dim.
namespace suncast::net {

using ad::Mat;
using ad::NodePtr;

enum class CellKind { RNN, LSTM, BILSTM };
std::string to_string(CellKind k);
CellKind cell_kind_from_string(const std::string& s);

struct NetworkConfig {
  CellKind cell = CellKind::BILSTM;
  int hidden = 64;
  int input_dim = 1;
  int horizon = 1;  // H output neurons
  bool bayesian = true;
  double prior_sigma = 1.0;  // N(0, prior_sigma^2) weight prior
};

// Gate weights are stored (hidden+input) x hidden so a batched step is
// [y_{t-1}, x_t] * w; biases are 1 x hidden row vectors.
struct LstmNodeParams {
  NodePtr w_i, w_f, w_o, w_c;
  NodePtr b_i, b_f, b_o, b_c;
};

struct CellState {
  NodePtr c;  // B x hidden
  NodePtr y;  // B x hidden
};

CellState zero_state(int batch, int hidden);

// One LSTM step: gates from sigma(z w + b) with z = [y_{t-1}, x_t],
// c_t = c_{t-1} .* f + i .* tanh(z w_c + b_c), y_t = o .* tanh(c_t).
CellState lstm_cell_step(const LstmNodeParams& p, const NodePtr& x_t,
                         const CellState& prev);

// Elman step y_t = tanh([y_{t-1}, x_t] w + b).
NodePtr rnn_cell_step(const NodePtr& w, const NodePtr& b, const NodePtr& x_t,
                      const NodePtr& prev_y);

// Runs fwd left-to-right and bwd right-to-left from zero states and
// returns concat(y_fwd_last, y_bwd_last), B x 2*hidden.
NodePtr bilstm_forward(const LstmNodeParams& fwd, const LstmNodeParams& bwd,
                       const std::vector<NodePtr>& sequence);

// Affine map features * w + b with no output activation; B x H.
NodePtr dense_head(const NodePtr& w, const NodePtr& b, const NodePtr& features);

// One named parameter tensor. mu doubles as the fixed value in
// deterministic mode; rho and prior_sigma are used only when Bayesian.
struct ParamTensor {
  std::string name;
  vi::VariationalGaussian vg;
};

// Leaves bound to one tensor during a pass. rho is null in
// deterministic mode.
struct BoundTensor {
  NodePtr mu;
  NodePtr rho;
};

struct Pass {
  NodePtr output;                   // B x H
  std::vector<BoundTensor> bound;   // aligned with Model::tensors
};

class Model {
 public:
  Model() = default;
  static Model init(const NetworkConfig& cfg, std::uint64_t seed);

  const NetworkConfig& config() const { return cfg_; }
  std::vector<ParamTensor>& tensors() { return tensors_; }
  const std::vector<ParamTensor>& tensors() const { return tensors_; }

  // Posterior views for divergence computation (Bayesian mode only).
  std::vector<const vi::VariationalGaussian*> posteriors() const;

  // Trainable raw matrices: {mu} per tensor, plus {rho} when Bayesian.
  std::vector<Mat*> trainable();

  // One pass over a length-k sequence of B x input_dim steps. With a
  // noise rng each Bayesian tensor is sampled once via the
  // reparameterization; with rng == nullptr the pass runs at mu.
  Pass forward(const std::vector<Mat>& sequence, std::mt19937_64* noise_rng) const;

  // Pass with caller-supplied weight nodes (aligned with tensors());
  // used by the Monte-Carlo divergence, whose draws live on its own
  // leaves.
  NodePtr forward_with(const std::vector<NodePtr>& weights,
                       const std::vector<NodePtr>& sequence) const;

  // Value-only convenience for a single window (k x input_dim).
  Eigen::VectorXd predict(const Mat& window, std::mt19937_64* noise_rng) const;

 private:
  NetworkConfig cfg_;
  std::vector<ParamTensor> tensors_;
  int head_input_dim() const;
  friend class ModelBuilder;
};

}  // namespace suncast::net

#endif
