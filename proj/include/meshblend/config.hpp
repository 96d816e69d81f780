#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>

#include "meshblend/correspondence.hpp"
#include "meshblend/fusion.hpp"
#include "meshblend/training.hpp"

namespace meshblend {

using ConfigMap = std::map<std::string, std::string>;

// Flat `key = value` text; `#` starts a comment. Duplicate keys are an error.
ConfigMap parse_config(std::istream& in, const std::string& source = "<config>");
ConfigMap load_config(const std::filesystem::path& path);

// Applies recognised keys; throws std::invalid_argument on an unknown key or a
// value that does not parse. Any target may be null to ignore its keys.
//
// Keys: seed, steps, learning_rate, optimizer (adam|gd), beta1, beta2, epsilon,
// checkpoint_every, split_ratio, weight_interpolate, weight_future,
// weight_past, corr_loss_target (red|sigmoid), K, d, hidden1, hidden2,
// lambda_s, lambda_r, learn_lambdas, sinkhorn_iters, sinkhorn_tau, fusion_d.
void apply_config(const ConfigMap& config, TrainConfig* train, CorrespondenceConfig* corr,
                  FusionConfig* fusion);

}  // namespace meshblend
