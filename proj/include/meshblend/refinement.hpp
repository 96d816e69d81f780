#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "meshblend/correspondence.hpp"
#include "meshblend/mesh.hpp"

namespace meshblend {

inline constexpr std::size_t kUnmatched = std::numeric_limits<std::size_t>::max();

// Injective map from a subset of G_0 vertices to G_1 vertices.
struct PartialMatch {
  std::vector<std::size_t> target;  // target[u0] = u1, or kUnmatched

  explicit PartialMatch(std::size_t n = 0) : target(n, kUnmatched) {}
  std::size_t matched_count() const;
  bool matched(std::size_t u0) const { return target[u0] != kUnmatched; }
};

struct SeedTriangle {
  Face t0;  // face of G_0
  Face t1;  // t1[k] is the match of t0[k]
};

enum class RefinementOutcome { ExactPermutation, PartialMatch, Fallback };

const char* to_string(RefinementOutcome outcome);

struct RefinementStats {
  std::size_t verified = 0;  // pairs passing verify_matches
  std::size_t matched = 0;   // pairs in the final match
  std::size_t rounds = 0;    // expansion rounds
  bool aborted = false;      // expansion stopped on an inconsistency
};

struct RefinementResult {
  RefinementOutcome outcome = RefinementOutcome::Fallback;
  // Set for ExactPermutation: A_1 = P A_0 P^T with P.source(u1) = u0.
  std::optional<Permutation> permutation;
  // Matched pairs G_0 -> G_1 (complete for ExactPermutation).
  PartialMatch pairs;
  // Row-argmax of the soft matrix, rows indexed by G_1. Set when produced by
  // conditional_refine.
  std::optional<HardCorrespondence> hard;
  RefinementStats stats;
};

// A pair u0 -> u1 is kept when h10 maps u1 to u0, h01 maps u0 to u1, row u1
// of H10 A0 H10^T equals row u1 of A1, and row u0 of H01 A1 H01^T equals row
// u0 of A0. h10 has one row per G_1 vertex, h01 one row per G_0 vertex.
PartialMatch verify_matches(const TriMesh& g0, const TriMesh& g1, const HardCorrespondence& h01,
                            const HardCorrespondence& h10);

// First G_0 face (in face order) whose vertices are all matched and whose
// images form a G_1 face.
std::optional<SeedTriangle> find_seed(const TriMesh& g0, const TriMesh& g1,
                                      const PartialMatch& pm);

// Grows matches outward from the seed through shared neighborhoods of matched
// edges. Returns ExactPermutation only if every vertex is matched, adjacency
// conjugates exactly, and both meshes are watertight 2-manifolds.
RefinementResult expand_seed(const TriMesh& g0, const TriMesh& g1, const SeedTriangle& seed);

RefinementResult conditional_refine(const TriMesh& g0, const TriMesh& g1,
                                    const SoftCorrespondence& soft);

// True if mapping every G_0 edge through `pairs` (where both ends are matched)
// lands on a G_1 edge, and every mapped non-edge on a non-edge.
bool locally_consistent(const TriMesh& g0, const TriMesh& g1, const PartialMatch& pairs);

}  // namespace meshblend
