#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "meshblend/matrix.hpp"
#include "meshblend/mesh.hpp"
#include "meshblend/refinement.hpp"
#include "meshblend/tape.hpp"

namespace meshblend {

inline constexpr int kResidualLayers = 6;

struct FusionConfig {
  int width = 32;
  std::uint64_t seed = 0;
};

// One blue message-passing network: MLP (in -> d -> d) then six residual
// propagation layers h(V) = relu(S V W) + V with S = D^-1/2 (A + I) D^-1/2.
struct BmpnnParams {
  Matrix w1, b1, w2, b2;
  std::array<Matrix, kResidualLayers> w_res;
};

// Encoder (3 -> d, shared by both inputs), decoder (4d -> d) and a final
// d -> 3 projection back to coordinates.
struct FusionParams {
  FusionConfig config;
  BmpnnParams encoder;
  BmpnnParams decoder;
  Matrix w_out, b_out;

  static FusionParams initialize(const FusionConfig& config);
  std::vector<Matrix*> tensors();
  std::vector<const Matrix*> tensors() const;
  void validate() const;
};

// D^-1/2 (A + I) D^-1/2, D the degree matrix of A + I.
Matrix propagation_matrix(const Matrix& adjacency);

struct BmpnnVars {
  Var w1, b1, w2, b2;
  std::array<Var, kResidualLayers> w_res;
};

struct FusionVars {
  BmpnnVars encoder;
  BmpnnVars decoder;
  Var w_out, b_out;
};

FusionVars bind(Tape& tape, const FusionParams& params);

// prop is the propagation matrix of the graph.
Var bmpnn(Var v, Var prop, const BmpnnVars& vars);
Matrix bmpnn(const Matrix& v, const Matrix& adjacency, const BmpnnParams& params);

enum class Provenance : std::uint8_t { Permuted, Propagated, Original };

struct AlignedPair {
  TriMesh g0;
  Matrix v1_aligned;  // row i: G_1's estimate for G_0 vertex i
  std::vector<Provenance> provenance;

  const Matrix& v0() const { return g0.vertices(); }
};

// Reorders G_1 into G_0's indexing. Unassigned slots are filled by repeated
// neighbor averaging; slots never reached keep G_0's own position.
AlignedPair align(const TriMesh& g0, const TriMesh& g1, const RefinementResult& refinement);
AlignedPair align_with_permutation(const TriMesh& g0, const TriMesh& g1, const Permutation& p);

// Partial alignment from a G_0 -> G_1 match plus neighbor-mean propagation.
AlignedPair align_partial(const TriMesh& g0, const TriMesh& g1, const PartialMatch& match);

struct BlendTrace {
  Var features0;  // encoder(V_0)
  Var features1;  // encoder(V_1 aligned)
  Var linear;     // (1 - t) features0 + t features1
  Var stacked;    // [features0 | features1 | linear | t * ones]
  Var vertices;   // n x 3 prediction
};

BlendTrace blend_forward(Tape& tape, const FusionVars& vars, const AlignedPair& aligned, double t);

struct BlendedMesh {
  TriMesh mesh;  // connectivity shared with G_0
  double t = 0.0;
};

BlendedMesh blend(const AlignedPair& aligned, double t, const FusionParams& params);

}  // namespace meshblend
