#include "meshblend/refinement.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace meshblend {

std::size_t PartialMatch::matched_count() const {
  return static_cast<std::size_t>(
      std::count_if(target.begin(), target.end(), [](std::size_t t) { return t != kUnmatched; }));
}

const char* to_string(RefinementOutcome outcome) {
  switch (outcome) {
    case RefinementOutcome::ExactPermutation:
      return "exact";
    case RefinementOutcome::PartialMatch:
      return "partial";
    case RefinementOutcome::Fallback:
      return "fallback";
  }
  return "unknown";
}

PartialMatch verify_matches(const TriMesh& g0, const TriMesh& g1, const HardCorrespondence& h01,
                            const HardCorrespondence& h10) {
  const std::size_t n = g0.vertex_count();
  if (g1.vertex_count() != n || h01.choice.size() != n || h10.choice.size() != n ||
      h01.cols != n || h10.cols != n) {
    throw std::invalid_argument("verify_matches: shape mismatch");
  }
  const Matrix& a0 = g0.adjacency();
  const Matrix& a1 = g1.adjacency();
  PartialMatch pm(n);
  for (std::size_t u1 = 0; u1 < n; ++u1) {
    const std::size_t u0 = h10.choice[u1];
    if (h01.choice[u0] != u1) continue;
    bool ok = true;
    for (std::size_t k = 0; k < n && ok; ++k) ok = a0(u0, h10.choice[k]) == a1(u1, k);
    for (std::size_t k = 0; k < n && ok; ++k) ok = a1(u1, h01.choice[k]) == a0(u0, k);
    if (ok) pm.target[u0] = u1;
  }
  return pm;
}

std::optional<SeedTriangle> find_seed(const TriMesh& g0, const TriMesh& g1,
                                      const PartialMatch& pm) {
  if (pm.target.size() != g0.vertex_count()) {
    throw std::invalid_argument("find_seed: match size does not equal G_0 vertex count");
  }
  for (const Face& f : g0.faces()) {
    if (!pm.matched(f[0]) || !pm.matched(f[1]) || !pm.matched(f[2])) continue;
    const Face img{pm.target[f[0]], pm.target[f[1]], pm.target[f[2]]};
    if (g1.has_face(img[0], img[1], img[2])) return SeedTriangle{f, img};
  }
  return std::nullopt;
}

bool locally_consistent(const TriMesh& g0, const TriMesh& g1, const PartialMatch& pairs) {
  const std::size_t n = g0.vertex_count();
  for (std::size_t u = 0; u < n; ++u) {
    if (!pairs.matched(u)) continue;
    for (std::size_t v = 0; v < n; ++v) {
      if (!pairs.matched(v)) continue;
      if (g0.adjacent(u, v) != g1.adjacent(pairs.target[u], pairs.target[v])) return false;
    }
  }
  return true;
}

namespace {

bool conjugation_exact(const TriMesh& g0, const TriMesh& g1, const PartialMatch& m) {
  for (std::size_t u = 0; u < g0.vertex_count(); ++u) {
    auto nb0 = g0.neighbors(u);
    if (nb0.size() != g1.neighbors(m.target[u]).size()) return false;
    for (std::size_t w : nb0)
      if (!g1.adjacent(m.target[u], m.target[w])) return false;
  }
  return true;
}

}  // namespace

RefinementResult expand_seed(const TriMesh& g0, const TriMesh& g1, const SeedTriangle& seed) {
  const std::size_t n = g0.vertex_count();
  if (g1.vertex_count() != n) {
    throw std::invalid_argument("expand_seed: vertex counts differ (" + std::to_string(n) +
                                " vs " + std::to_string(g1.vertex_count()) + ")");
  }
  if (!g0.has_face(seed.t0[0], seed.t0[1], seed.t0[2]) ||
      !g1.has_face(seed.t1[0], seed.t1[1], seed.t1[2])) {
    throw std::invalid_argument("expand_seed: seed is not a face pair");
  }

  RefinementResult result;
  result.pairs = PartialMatch(n);
  std::vector<std::size_t>& to1 = result.pairs.target;
  std::vector<bool> used1(n, false);
  for (int k = 0; k < 3; ++k) {
    to1[seed.t0[k]] = seed.t1[k];
    used1[seed.t1[k]] = true;
  }

  std::vector<bool> queued(n, false);
  std::vector<std::size_t> queue;
  auto enqueue_neighbors = [&](std::size_t v) {
    for (std::size_t w : g0.neighbors(v)) {
      if (to1[w] == kUnmatched && !queued[w]) {
        queued[w] = true;
        queue.push_back(w);
      }
    }
  };
  for (std::size_t v : seed.t0) enqueue_neighbors(v);

  bool aborted = false;
  std::size_t rounds = 0;
  while (!queue.empty() && !aborted) {
    ++rounds;
    bool progress = false;
    std::vector<std::size_t> pending;
    pending.swap(queue);
    std::vector<std::size_t> deferred;
    for (std::size_t i = 0; i < pending.size() && !aborted; ++i) {
      const std::size_t v = pending[i];
      queued[v] = false;
      std::vector<std::size_t> matched_nb;
      for (std::size_t w : g0.neighbors(v))
        if (to1[w] != kUnmatched) matched_nb.push_back(w);

      // Matched edges (a, b) adjacent to v in lexicographic order; the first
      // one leaving exactly one unmatched candidate decides.
      std::size_t chosen = kUnmatched;
      for (std::size_t x = 0; x < matched_nb.size() && chosen == kUnmatched && !aborted; ++x) {
        for (std::size_t y = x + 1; y < matched_nb.size(); ++y) {
          const std::size_t a = matched_nb[x];
          const std::size_t b = matched_nb[y];
          if (!g0.adjacent(a, b)) continue;
          std::vector<std::size_t> cands = g1.shared_neighbors(to1[a], to1[b]);
          std::erase_if(cands, [&](std::size_t c) { return used1[c]; });
          if (cands.empty()) {
            aborted = true;
            break;
          }
          if (cands.size() == 1) {
            chosen = cands.front();
            break;
          }
        }
      }
      if (aborted) break;
      if (chosen == kUnmatched) {
        deferred.push_back(v);
        continue;
      }
      for (std::size_t w : matched_nb) {
        if (!g1.adjacent(chosen, to1[w])) {
          aborted = true;
          break;
        }
      }
      if (aborted) break;
      to1[v] = chosen;
      used1[chosen] = true;
      progress = true;
      enqueue_neighbors(v);
    }
    if (aborted || !progress) break;
    for (std::size_t v : deferred) {
      if (to1[v] == kUnmatched && !queued[v]) {
        queued[v] = true;
        queue.push_back(v);
      }
    }
  }

  result.stats.rounds = rounds;
  result.stats.aborted = aborted;
  result.stats.matched = result.pairs.matched_count();
  result.outcome = RefinementOutcome::PartialMatch;
  if (result.stats.matched == n && conjugation_exact(g0, g1, result.pairs) &&
      validate_watertight_manifold(g0).ok && validate_watertight_manifold(g1).ok) {
    std::vector<std::size_t> source(n);
    for (std::size_t u0 = 0; u0 < n; ++u0) source[to1[u0]] = u0;
    result.permutation = Permutation(std::move(source));
    result.outcome = RefinementOutcome::ExactPermutation;
  }
  return result;
}

RefinementResult conditional_refine(const TriMesh& g0, const TriMesh& g1,
                                    const SoftCorrespondence& soft) {
  const std::size_t n = g0.vertex_count();
  if (g1.vertex_count() != n || soft.matrix.rows() != n || soft.matrix.cols() != n) {
    throw std::invalid_argument("conditional_refine: shape mismatch");
  }
  HardCorrespondence h10 = binarize(soft.matrix);
  const HardCorrespondence h01 = binarize(transpose(soft.matrix));
  const PartialMatch verified = verify_matches(g0, g1, h01, h10);
  const std::size_t verified_count = verified.matched_count();

  RefinementResult result;
  if (auto seed = find_seed(g0, g1, verified)) {
    result = expand_seed(g0, g1, *seed);
  } else {
    result.outcome = RefinementOutcome::Fallback;
    result.pairs = verified;
    result.stats.matched = verified_count;
  }
  result.stats.verified = verified_count;
  result.hard = std::move(h10);
  return result;
}

}  // namespace meshblend
