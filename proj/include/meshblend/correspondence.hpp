#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "meshblend/matrix.hpp"
#include "meshblend/mesh.hpp"
#include "meshblend/tape.hpp"

namespace meshblend {

struct CorrespondenceConfig {
  int iterations = 4;  // message-passing rounds K
  int width = 32;      // vertex feature width d
  int hidden1 = 32;    // f_init widths: 3 -> hidden1 -> hidden2 -> width
  int hidden2 = 32;
  double lambda_s = 0.5;
  double lambda_r = 0.5;
  bool learn_lambdas = true;
  int sinkhorn_iters = kDefaultSinkhornIters;
  double sinkhorn_tau = kDefaultSinkhornTau;
  std::uint64_t seed = 0;
};

// All learnable weights of the red-blue network. Blue/red weights are per
// iteration. The mixing weights lambda_s and lambda_r are 1x1 and kept >= 0.
struct CorrespondenceParams {
  CorrespondenceConfig config;
  Matrix w1, b1, w2, b2, w3, b3;
  std::vector<Matrix> w_blue;
  std::vector<Matrix> w_red;
  Matrix w_t;
  Matrix lambda_s;
  Matrix lambda_r;

  // Glorot-uniform weights, zero biases, seeded by config.seed.
  static CorrespondenceParams initialize(const CorrespondenceConfig& config);

  // Declaration order; this is the checkpoint and tape registration order.
  std::vector<Matrix*> tensors();
  std::vector<const Matrix*> tensors() const;

  // Throws std::invalid_argument on inconsistent shapes or negative lambdas.
  void validate() const;
};

// Entry (i, j) scores G_1 vertex i against G_0 vertex j. The matrix is
// sigmoid((R^K)^T), so every entry lies in (0, 1).
struct SoftCorrespondence {
  Matrix matrix;
};

// Row-argmax of a score matrix. choice[i] is the column picked by row i.
struct HardCorrespondence {
  std::vector<std::size_t> choice;
  std::size_t cols = 0;
  bool is_valid_permutation = false;

  Matrix matrix() const;
};

// One 1 per row at the largest entry, ties toward the lowest column index.
HardCorrespondence binarize(const Matrix& scores);

// [[A_0, R], [R^T, A_1]] with R = (1/n) * ones.
Matrix build_augmented(const TriMesh& g0, const TriMesh& g1);

struct CorrespondenceVars {
  Var w1, b1, w2, b2, w3, b3;
  std::vector<Var> w_blue;
  std::vector<Var> w_red;
  Var w_t;
  Var lambda_s;
  Var lambda_r;
};

// Registers every tensor as a tape parameter, in tensors() order.
CorrespondenceVars bind(Tape& tape, const CorrespondenceParams& params);

struct RbmpnnTrace {
  Var soft;   // sigmoid((R^K)^T)
  Var red_t;  // (R^K)^T
};

RbmpnnTrace rbmpnn_forward(Tape& tape, const CorrespondenceVars& vars,
                           const CorrespondenceConfig& config, const TriMesh& g0,
                           const TriMesh& g1);

SoftCorrespondence rbmpnn_forward(const TriMesh& g0, const TriMesh& g1,
                                  const CorrespondenceParams& params);

// Vertex positions minus their mean.
Matrix center_vertices(const Matrix& v);

}  // namespace meshblend
