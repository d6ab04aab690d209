#ifndef SUNCAST_CHECKPOINT_HPP
#define SUNCAST_CHECKPOINT_HPP

#include <string>

#include "suncast/forecast.hpp"

// Model checkpoints: named {mu, rho} tensors per block plus prior_sigma,
// scaler, and the divergence spec echo, as portable JSON.
namespace suncast::ckpt {

void save_predictor(const forecast::Predictor& pred, const std::string& path,
                    const std::string& config_hash = "");
forecast::Predictor load_predictor(const std::string& path);

}  // namespace suncast::ckpt

#endif
