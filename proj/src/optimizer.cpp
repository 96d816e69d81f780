#include "meshblend/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace meshblend {

OptimizerKind parse_optimizer_kind(const std::string& name) {
  if (name == "adam") return OptimizerKind::Adam;
  if (name == "gd" || name == "sgd") return OptimizerKind::GradientDescent;
  throw std::invalid_argument("unknown optimizer '" + name + "' (expected adam or gd)");
}

const char* to_string(OptimizerKind kind) {
  return kind == OptimizerKind::Adam ? "adam" : "gd";
}

Optimizer::Optimizer(OptimizerConfig config) : config_(config) {
  if (config_.learning_rate < 0.0) throw std::invalid_argument("Optimizer: negative learning rate");
}

void Optimizer::step(std::span<Matrix* const> params, std::span<const Matrix> grads,
                     std::span<const bool> frozen) {
  if (params.size() != grads.size()) throw std::invalid_argument("Optimizer: gradient count mismatch");
  if (!frozen.empty() && frozen.size() != params.size()) {
    throw std::invalid_argument("Optimizer: frozen mask size mismatch");
  }
  if (m_.empty()) {
    for (Matrix* p : params) {
      m_.emplace_back(p->rows(), p->cols(), 0.0);
      v_.emplace_back(p->rows(), p->cols(), 0.0);
    }
  }
  if (m_.size() != params.size()) throw std::invalid_argument("Optimizer: parameter list changed");
  ++t_;
  const double lr = config_.learning_rate;
  const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!frozen.empty() && frozen[i]) continue;
    require_same_shape(*params[i], grads[i], "Optimizer::step");
    auto p = params[i]->data();
    auto g = grads[i].data();
    if (config_.kind == OptimizerKind::GradientDescent) {
      for (std::size_t k = 0; k < p.size(); ++k) p[k] -= lr * g[k];
      continue;
    }
    auto m = m_[i].data();
    auto v = v_[i].data();
    for (std::size_t k = 0; k < p.size(); ++k) {
      m[k] = config_.beta1 * m[k] + (1.0 - config_.beta1) * g[k];
      v[k] = config_.beta2 * v[k] + (1.0 - config_.beta2) * g[k] * g[k];
      p[k] -= lr * (m[k] / bc1) / (std::sqrt(v[k] / bc2) + config_.epsilon);
    }
  }
}

}  // namespace meshblend
