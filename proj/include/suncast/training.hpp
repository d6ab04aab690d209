#ifndef SUNCAST_TRAINING_HPP
#define SUNCAST_TRAINING_HPP

#include <cstdint>
#include <vector>

#include "suncast/dataio.hpp"
#include "suncast/recurrent.hpp"
#include "suncast/variational.hpp"

// Loss assembly (NLL + weighted divergence), Adam, and the epoch loop
// with early stopping on validation loss.
namespace suncast::train {

using ad::Mat;
using ad::NodePtr;

struct TrainConfig {
  int epochs = 100;
  int batch_size = 32;
  double learning_rate = 1e-3;
  double validation_fraction = 0.2;
  vi::DivergenceSpec divergence;
  double obs_sigma = 0.05;  // likelihood scale, in scaled units
  int patience = 10;
  double min_delta = 1e-6;
  double max_grad_norm = 0.0;  // 0 disables the guard
  std::uint64_t seed = 0;

  void validate() const;
};

struct TrainReport {
  std::vector<double> train_loss;  // per epoch
  std::vector<double> val_loss;
  int epochs_run = 0;
  bool stopped_early = false;
  double wall_time_s = 0.0;
};

// Sum over entries of 1/2 log(2 pi sigma^2) + (pred - target)^2 / (2 sigma^2).
NodePtr gaussian_nll(const NodePtr& predicted, const Mat& target,
                     double obs_sigma);

struct BatchLoss {
  NodePtr loss;
  net::Pass pass;                              // likelihood-pass leaves
  std::vector<vi::PosteriorNodes> div_leaves;  // divergence-pass leaves,
                                               // groups aligned with tensors
  double nll_value = 0.0;
  double divergence_value = 0.0;
};

// Mean NLL over the batch plus divergence / num_batches. data_scale is
// the full-dataset reweighting N_train / batch_size applied to the
// likelihood inside the AB joint.
BatchLoss batch_loss(const net::Model& model, const Mat& inputs,
                     const Mat& targets, const TrainConfig& cfg,
                     int num_batches, double data_scale, std::mt19937_64& rng);

// Standard Adam (beta1=0.9, beta2=0.999, eps=1e-8) over a fixed list of
// parameter matrices.
class Adam {
 public:
  Adam(std::vector<Mat*> params, double lr);
  void step(const std::vector<Mat>& grads);

 private:
  std::vector<Mat*> params_;
  std::vector<Mat> m_, v_;
  double lr_;
  long t_ = 0;
};

// Gradients of one backward pass, accumulated per trainable matrix and
// aligned with Model::trainable().
std::vector<Mat> collect_gradients(net::Model& model, const BatchLoss& bl);

// Epoch loop of the training algorithm: minibatch Adam on the ELBO-style
// loss, per-epoch validation at mu, early stopping with best-parameter
// restore. Throws TrainingDiverged when the loss leaves the finite range.
TrainReport train(net::Model& model, const data::WindowSet& train_ws,
                  const data::WindowSet& val_ws, const TrainConfig& cfg);

// Mean validation NLL at mu (zero-noise pass), in scaled units.
double validation_loss(const net::Model& model, const data::WindowSet& ws,
                       double obs_sigma);

}  // namespace suncast::train

#endif
