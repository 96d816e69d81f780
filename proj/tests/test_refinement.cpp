#include "doctest.h"

#include <algorithm>
#include <numeric>

#include "meshblend/refinement.hpp"
#include "meshblend/shapes.hpp"
#include "test_support.hpp"

using namespace meshblend;
using meshblend::testing::conjugates;
using meshblend::testing::random_permutation;

namespace {

// Soft matrix with `hit` on the true G_1 -> G_0 entries and the rest spread
// evenly. g1 = apply_permutation(g0, p), so G_1 vertex u1 is G_0 vertex p[u1].
Matrix concentrated_soft(const Permutation& p, double hit = 0.9) {
  const std::size_t n = p.size();
  Matrix s(n, n, (1.0 - hit) / static_cast<double>(n - 1));
  for (std::size_t u1 = 0; u1 < n; ++u1) s(u1, p[u1]) = hit;
  return s;
}

SeedTriangle true_seed(const TriMesh& g0, const Permutation& p, std::size_t face = 0) {
  const Permutation inv = p.inverse();
  const Face& f = g0.faces()[face];
  return {f, Face{inv[f[0]], inv[f[1]], inv[f[2]]}};
}

// Two tetrahedra with no shared vertex.
TriMesh two_tetrahedra() {
  const TriMesh t = shapes::tetrahedron();
  Matrix v(8, 3);
  std::vector<Face> f = t.faces();
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t k = 0; k < 3; ++k) {
      v(i, k) = t.vertices()(i, k);
      v(i + 4, k) = t.vertices()(i, k) + 5.0;
    }
  for (Face face : t.faces()) {
    for (auto& x : face) x += 4;
    f.push_back(face);
  }
  return TriMesh(std::move(v), std::move(f));
}

// Brute force: build H10 A0 H10^T and H01 A1 H01^T by matrix products and
// test each row directly.
PartialMatch brute_force_verify(const TriMesh& g0, const TriMesh& g1, const HardCorrespondence& h01,
                                const HardCorrespondence& h10) {
  const std::size_t n = g0.vertex_count();
  const Matrix m10 = h10.matrix();
  const Matrix m01 = h01.matrix();
  const Matrix c1 = matmul(matmul(m10, g0.adjacency()), transpose(m10));
  const Matrix c0 = matmul(matmul(m01, g1.adjacency()), transpose(m01));
  PartialMatch pm(n);
  for (std::size_t u1 = 0; u1 < n; ++u1) {
    std::size_t u0 = 0;
    while (m10(u1, u0) != 1.0) ++u0;
    if (m01(u0, u1) != 1.0) continue;
    bool ok = true;
    for (std::size_t k = 0; k < n; ++k) {
      ok = ok && c1(u1, k) == g1.adjacency()(u1, k);
      ok = ok && c0(u0, k) == g0.adjacency()(u0, k);
    }
    if (ok) pm.target[u0] = u1;
  }
  return pm;
}

}  // namespace

TEST_CASE("verify_matches on exact and degenerate inputs") {
  const TriMesh ico = shapes::icosahedron();
  Rng rng(1);
  const Permutation p = random_permutation(12, rng);
  const TriMesh g1 = apply_permutation(ico, p);
  const Matrix soft = concentrated_soft(p);
  const PartialMatch all = verify_matches(ico, g1, binarize(transpose(soft)), binarize(soft));
  CHECK(all.matched_count() == 12);
  for (std::size_t u0 = 0; u0 < 12; ++u0) CHECK(all.target[u0] == p.inverse()[u0]);

  Matrix col0(12, 12, 0.0);
  for (std::size_t i = 0; i < 12; ++i) col0(i, 0) = 1.0;
  CHECK(verify_matches(ico, g1, binarize(col0), binarize(col0)).matched_count() == 0);
}

TEST_CASE("verify_matches agrees with a brute-force row oracle") {
  const TriMesh ico = shapes::icosahedron();
  Rng rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    const Permutation p = random_permutation(12, rng);
    const TriMesh g1 = apply_permutation(ico, p);
    HardCorrespondence h10 = binarize(concentrated_soft(p));
    HardCorrespondence h01 = binarize(transpose(concentrated_soft(p)));
    // Corrupt two vertices by swapping their choices in both directions.
    const std::size_t a = rng.below(12);
    std::size_t b = rng.below(11);
    if (b >= a) ++b;
    std::swap(h10.choice[a], h10.choice[b]);
    std::swap(h01.choice[h10.choice[a]], h01.choice[h10.choice[b]]);
    const PartialMatch fast = verify_matches(ico, g1, h01, h10);
    const PartialMatch slow = brute_force_verify(ico, g1, h01, h10);
    CHECK(fast.target == slow.target);
    CHECK(fast.matched_count() <= 10);
  }
}

TEST_CASE("find_seed") {
  const TriMesh ico = shapes::icosahedron();
  PartialMatch identity(12);
  std::iota(identity.target.begin(), identity.target.end(), 0);
  const auto seed = find_seed(ico, ico, identity);
  REQUIRE(seed.has_value());
  CHECK(seed->t0 == ico.faces()[0]);
  CHECK(seed->t1 == ico.faces()[0]);

  CHECK_FALSE(find_seed(ico, ico, PartialMatch(12)).has_value());

  // Three matched strip vertices that are not a face.
  const TriMesh st = shapes::strip(6);
  PartialMatch three(st.vertex_count());
  for (std::size_t v : {0, 2, 4}) three.target[v] = v;
  CHECK_FALSE(st.has_face(0, 2, 4));
  CHECK_FALSE(find_seed(st, st, three).has_value());
}

TEST_CASE("tetrahedron: every permutation from every seed face") {
  const TriMesh tet = shapes::tetrahedron();
  std::vector<std::size_t> src{0, 1, 2, 3};
  int cases = 0;
  do {
    const Permutation p(src);
    const TriMesh g1 = apply_permutation(tet, p);
    for (std::size_t face = 0; face < 4; ++face) {
      const RefinementResult r = expand_seed(tet, g1, true_seed(tet, p, face));
      REQUIRE(r.outcome == RefinementOutcome::ExactPermutation);
      CHECK(conjugates(tet.adjacency(), g1.adjacency(), r.permutation->matrix()));
    }
    ++cases;
  } while (std::next_permutation(src.begin(), src.end()));
  CHECK(cases == 24);
}

TEST_CASE("icosahedron: 100 random permutations") {
  const TriMesh ico = shapes::icosahedron();
  Rng rng(12);
  int exact = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const Permutation p = random_permutation(12, rng);
    const TriMesh g1 = apply_permutation(ico, p);
    const RefinementResult r = expand_seed(ico, g1, true_seed(ico, p, rng.below(ico.face_count())));
    if (r.outcome == RefinementOutcome::ExactPermutation &&
        conjugates(ico.adjacency(), g1.adjacency(), r.permutation->matrix())) {
      ++exact;
    }
  }
  CHECK(exact == 100);
}

TEST_CASE("expansion stays inside the seed's component") {
  const TriMesh two = two_tetrahedra();
  const RefinementResult r = expand_seed(two, two, true_seed(two, Permutation::identity(8)));
  CHECK(r.outcome == RefinementOutcome::PartialMatch);
  CHECK(r.stats.matched == 4);
  for (std::size_t v = 0; v < 4; ++v) CHECK(r.pairs.target[v] == v);
  for (std::size_t v = 4; v < 8; ++v) CHECK_FALSE(r.pairs.matched(v));
}

TEST_CASE("open meshes never claim an exact permutation") {
  const TriMesh st = shapes::strip(5);
  const RefinementResult r = expand_seed(st, st, true_seed(st, Permutation::identity(st.vertex_count())));
  CHECK(r.outcome != RefinementOutcome::ExactPermutation);
  CHECK(locally_consistent(st, st, r.pairs));
}

TEST_CASE("expand_seed rejects a seed that is not a face pair") {
  const TriMesh ico = shapes::icosahedron();
  CHECK_THROWS(expand_seed(ico, ico, SeedTriangle{Face{0, 1, 2}, Face{0, 1, 2}}));
}

TEST_CASE("conditional_refine end to end") {
  const TriMesh mesh = shapes::icosphere(1);
  const std::size_t n = mesh.vertex_count();
  Rng rng(3);

  SUBCASE("concentrated soft matrix gives the exact permutation") {
    for (int trial = 0; trial < 10; ++trial) {
      const Permutation p = random_permutation(n, rng);
      const TriMesh g1 = apply_permutation(mesh, p);
      const RefinementResult r = conditional_refine(mesh, g1, {concentrated_soft(p)});
      REQUIRE(r.outcome == RefinementOutcome::ExactPermutation);
      CHECK(*r.permutation == p);
      CHECK(r.stats.verified == n);
    }
  }
  SUBCASE("uniform soft matrix falls back to the row argmax") {
    const Matrix uniform(n, n, 0.5);
    const RefinementResult r = conditional_refine(mesh, mesh, {uniform});
    CHECK(r.outcome == RefinementOutcome::Fallback);
    REQUIRE(r.hard.has_value());
    CHECK(r.hard->choice == binarize(uniform).choice);
  }
  SUBCASE("regionally corrupted soft matrix stays sound") {
    for (int trial = 0; trial < 20; ++trial) {
      const Permutation p = random_permutation(n, rng);
      const TriMesh g1 = apply_permutation(mesh, p);
      Matrix soft = concentrated_soft(p);
      // Scramble the rows of one vertex neighborhood.
      const std::size_t centre = rng.below(n);
      std::vector<std::size_t> region{p.inverse()[centre]};
      for (std::size_t w : mesh.neighbors(centre)) region.push_back(p.inverse()[w]);
      for (std::size_t u1 : region) {
        for (double& x : soft.row(u1)) x = 0.01;
        soft(u1, rng.below(n)) = 0.95;
      }
      const RefinementResult r = conditional_refine(mesh, g1, {soft});
      CHECK(locally_consistent(mesh, g1, r.pairs));
      if (r.outcome == RefinementOutcome::ExactPermutation) {
        CHECK(conjugates(mesh.adjacency(), g1.adjacency(), r.permutation->matrix()));
      }
      REQUIRE(r.hard.has_value());
      CHECK(r.hard->choice == binarize(soft).choice);
    }
  }
}

TEST_CASE("refinement is deterministic") {
  const TriMesh mesh = shapes::torus_grid(6, 7);
  Rng rng(9);
  const Permutation p = random_permutation(mesh.vertex_count(), rng);
  const TriMesh g1 = apply_permutation(mesh, p);
  Matrix soft = concentrated_soft(p);
  for (std::size_t u1 = 0; u1 < 10; ++u1) soft(u1, 0) = 1.0;
  const RefinementResult a = conditional_refine(mesh, g1, {soft});
  const RefinementResult b = conditional_refine(mesh, g1, {soft});
  CHECK(a.outcome == b.outcome);
  CHECK(a.pairs.target == b.pairs.target);
  CHECK(a.stats.rounds == b.stats.rounds);
}
