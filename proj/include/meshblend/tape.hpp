#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <vector>

#include "meshblend/matrix.hpp"

namespace meshblend {

class Tape;

// Handle to a matrix recorded on a Tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;

  const Matrix& value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  std::size_t id() const { return id_; }
  Tape* tape() const { return tape_; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

// Reverse-mode record of matrix operations. Single writer: one forward/backward
// pass owns a tape. Node storage is a deque so recorded values keep stable
// addresses, which lets pullbacks refer to them without copying.
class Tape {
 public:
  // Given dL/d(output), returns dL/d(input_k) for every input, in input order.
  using Pullback = std::function<std::vector<Matrix>(const Matrix& grad_out)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value);

  // Tracked leaf. backward() reports gradients in parameter registration order.
  Var parameter(Matrix value);

  Var record(Matrix value, std::vector<Var> inputs, Pullback pullback);

  const Matrix& value(Var v) const { return nodes_[v.id()].value; }
  std::size_t size() const { return nodes_.size(); }
  std::size_t parameter_count() const { return params_.size(); }

  // loss must be 1x1 and recorded on this tape.
  std::vector<Matrix> backward(Var loss) const;

 private:
  struct Node {
    Matrix value;
    std::vector<std::size_t> inputs;
    Pullback pullback;
    bool needs_grad = false;
  };

  std::deque<Node> nodes_;
  std::vector<std::size_t> params_;
};

// Differentiable primitives. All inputs must live on the same tape.
namespace ad {

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var hadamard(Var a, Var b);
Var scale(Var a, double s);
// s is a 1x1 variable.
Var scale_by(Var s, Var a);
Var add_row_vector(Var a, Var row);
Var matmul(Var a, Var b);
Var transpose(Var a);
Var relu(Var a);
Var sigmoid(Var a);
Var l2_normalize_rows(Var a);
Var row_softmax(Var a, double tau);
Var normalize_rows_by_sum(Var a);
Var normalize_cols_by_sum(Var a);
// Recorded as its row-softmax / row / column normalization steps.
Var sinkhorn(Var a, int iters = kDefaultSinkhornIters, double tau = kDefaultSinkhornTau);
Var concat_cols(const std::vector<Var>& blocks);
Var sum(Var a);
// Gradient at the zero matrix is taken as zero.
Var frobenius_norm(Var a);

}  // namespace ad

}  // namespace meshblend
