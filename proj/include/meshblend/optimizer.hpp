#pragma once

#include <span>
#include <string>
#include <vector>

#include "meshblend/matrix.hpp"

namespace meshblend {

enum class OptimizerKind { GradientDescent, Adam };

OptimizerKind parse_optimizer_kind(const std::string& name);
const char* to_string(OptimizerKind kind);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::Adam;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Updates parameters in place. Adam keeps per-parameter moment estimates, so
// one optimizer instance belongs to one fixed parameter list.
class Optimizer {
 public:
  explicit Optimizer(OptimizerConfig config);

  // frozen[i] skips parameter i; an empty span freezes nothing.
  void step(std::span<Matrix* const> params, std::span<const Matrix> grads,
            std::span<const bool> frozen = {});

  long long steps_taken() const { return t_; }

 private:
  OptimizerConfig config_;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
  long long t_ = 0;
};

}  // namespace meshblend
