#ifndef SUNCAST_VARIATIONAL_HPP
#define SUNCAST_VARIATIONAL_HPP

#include <functional>
#include <random>
#include <string>
#include <vector>

#include "suncast/autodiff.hpp"

// Mean-field Gaussian posteriors over weight tensors, reparameterized
// sampling, and the divergence family used by the training objective.
namespace suncast::vi {

using ad::Mat;
using ad::NodePtr;

struct VariationalGaussian {
  Mat mu;            // posterior mean
  Mat rho;           // pre-softplus scale, sigma_p = softplus(rho)
  double prior_sigma = 1.0;  // prior N(0, prior_sigma^2)

  VariationalGaussian() = default;
  VariationalGaussian(Mat mu_, Mat rho_, double prior_sigma_);
  int rows() const { return static_cast<int>(mu.rows()); }
  int cols() const { return static_cast<int>(mu.cols()); }
  Mat sigma_p() const;  // softplus(rho), elementwise
};

enum class DivergenceKind { KL_CLOSED_FORM, AB_MONTE_CARLO, AB_COLLAPSED_EQ21, NONE };

struct DivergenceSpec {
  DivergenceKind kind = DivergenceKind::NONE;
  double alpha = 1.0;
  double beta = 2.0;
  int mc_samples = 8;

  void validate() const;
};

std::string to_string(DivergenceKind k);
DivergenceKind divergence_kind_from_string(const std::string& s);

// Leaves for one posterior during a forward pass; adjoints of mu/rho
// are read back after backward().
struct PosteriorNodes {
  NodePtr mu;
  NodePtr rho;
};

PosteriorNodes make_posterior_nodes(const VariationalGaussian& vg);

// Reparameterized draw mu + softplus(rho) .* noise; differentiable wrt
// the mu/rho leaves.
NodePtr sample_weights(const PosteriorNodes& nodes, const Mat& noise);
// Convenience: value-only draw (no graph).
Mat sample_weights_value(const VariationalGaussian& vg, const Mat& noise);

// Closed-form KL(N(mu, sigma_p^2) || N(0, prior_sigma^2)) summed over
// all entries, as a differentiable node.
NodePtr kl_gaussian(const PosteriorNodes& nodes, double prior_sigma);
double kl_gaussian_value(const VariationalGaussian& vg);

// The scalar coefficient multiplying E[log(theta)] in the collapsed
// alpha-beta expression. Identically zero for every valid (alpha, beta);
// kept for the zero-coefficient property check.
double ab_coefficient(double alpha, double beta);

// log q(theta) for a sampled theta, built from the posterior leaves so
// gradients carry both the pathwise and the direct density terms.
NodePtr log_q_gaussian(const PosteriorNodes& nodes, const NodePtr& theta);

// log N(theta; 0, prior_sigma^2) summed over entries.
NodePtr log_prior_gaussian(const NodePtr& theta, double prior_sigma);

// One reparameterized draw of every posterior in a set, on a shared graph.
struct SampledSet {
  std::vector<PosteriorNodes> posteriors;  // aligned with the vg set
  std::vector<NodePtr> thetas;
  NodePtr log_q;  // summed over the set
};

SampledSet sample_posterior_set(const std::vector<const VariationalGaussian*>& vgs,
                                std::mt19937_64& rng);

// Same draw with caller-supplied noise matrices (aligned with vgs).
SampledSet sample_posterior_set_with(const std::vector<const VariationalGaussian*>& vgs,
                                     const std::vector<Mat>& noises);

// log p(theta, w): unnormalized joint likelihood x prior of one sampled
// weight set.
using LogJointFn = std::function<NodePtr(const SampledSet&)>;

// Monte-Carlo estimate of the scale-invariant alpha-beta divergence
//   1/(a(a+b)) log E[p^(a+b)/q] + 1/(b(a+b)) log E[q^(a+b-1)]
//                               - 1/(ab) log E[q^(a+b-1) (p/q)^b]
// with independent draw sets per expectation and log-sum-exp
// stabilization. Differentiable wrt every posterior in vgs.
// collected, when non-null, receives the mu/rho leaves of every draw
// set (groups of vgs.size()) so callers can read gradients back.
NodePtr ab_divergence_mc(const std::vector<const VariationalGaussian*>& vgs,
                         const LogJointFn& log_joint, const DivergenceSpec& spec,
                         std::mt19937_64& rng,
                         std::vector<PosteriorNodes>* collected = nullptr);

// Value-only variant of the same estimator for large sample counts
// (no graph). log_joint_value receives one sampled theta per posterior,
// aligned with vgs. se_out, when non-null, receives a delta-method
// standard error of the estimate (the three expectations use
// independent draw sets, so their errors add in quadrature).
double ab_divergence_mc_value(
    const std::vector<const VariationalGaussian*>& vgs,
    const std::function<double(const std::vector<Mat>&)>& log_joint_value,
    const DivergenceSpec& spec, std::mt19937_64& rng, double* se_out = nullptr);

// Dispatcher over DivergenceSpec.kind. For KL_CLOSED_FORM the result is
// the sum of closed-form KLs and log_joint is unused; posterior_nodes,
// when non-null, receives the leaves created for gradient collection.
NodePtr divergence(const std::vector<const VariationalGaussian*>& vgs,
                   const LogJointFn& log_joint, const DivergenceSpec& spec,
                   std::mt19937_64& rng,
                   std::vector<PosteriorNodes>* posterior_nodes = nullptr);

}  // namespace suncast::vi

#endif
