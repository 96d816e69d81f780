#include "doctest.h"

#include <filesystem>
#include <sstream>
#include <stdexcept>

#include "meshblend/dataset.hpp"
#include "meshblend/mesh.hpp"
#include "meshblend/obj_io.hpp"
#include "meshblend/shapes.hpp"
#include "test_support.hpp"

using namespace meshblend;
using meshblend::testing::random_permutation;

namespace {

bool symmetric_zero_diagonal(const Matrix& a) {
  for (std::size_t i = 0; i < a.rows(); ++i) {
    if (a(i, i) != 0.0) return false;
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (a(i, j) != a(j, i)) return false;
  }
  return true;
}

// Two tetrahedra sharing vertex 0 and nothing else.
TriMesh bowtie() {
  TriMesh a = shapes::tetrahedron();
  Matrix v(7, 3);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t k = 0; k < 3; ++k) v(i, k) = a.vertices()(i, k);
  for (std::size_t i = 4; i < 7; ++i)
    for (std::size_t k = 0; k < 3; ++k) v(i, k) = -a.vertices()(i - 3, k);
  std::vector<Face> f = a.faces();
  for (Face face : a.faces()) {
    for (auto& x : face) x = x == 0 ? 0 : x + 3;
    f.push_back(face);
  }
  return TriMesh(std::move(v), std::move(f));
}

}  // namespace

TEST_CASE("adjacency of small meshes") {
  const std::vector<Face> tri{{0, 1, 2}};
  CHECK(build_adjacency(tri, 3) == Matrix{{0, 1, 1}, {1, 0, 1}, {1, 1, 0}});
  CHECK(shapes::tetrahedron().adjacency() == sub(Matrix(4, 4, 1.0), Matrix::identity(4)));
  const TriMesh ico = shapes::icosahedron();
  for (double deg : row_sums(ico.adjacency())) CHECK(deg == 5.0);
  CHECK(symmetric_zero_diagonal(ico.adjacency()));
  CHECK(symmetric_zero_diagonal(shapes::torus_grid(5, 7).adjacency()));
}

TEST_CASE("adjacency rejects bad faces") {
  const std::vector<Face> out_of_range{{0, 1, 3}};
  CHECK_THROWS_AS(build_adjacency(out_of_range, 3), std::out_of_range);
  const std::vector<Face> degenerate{{0, 1, 1}};
  CHECK_THROWS_AS(build_adjacency(degenerate, 3), std::invalid_argument);
}

TEST_CASE("watertight manifold validation") {
  CHECK(validate_watertight_manifold(shapes::tetrahedron()).ok);
  CHECK(validate_watertight_manifold(shapes::icosphere(2)).ok);
  CHECK(validate_watertight_manifold(shapes::torus_grid(8, 8)).ok);

  const TriMesh tri(Matrix{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {{0, 1, 2}});
  const ManifoldReport open = validate_watertight_manifold(tri);
  CHECK_FALSE(open.ok);
  CHECK(open.boundary_edges.size() == 3);

  const ManifoldReport bt = validate_watertight_manifold(bowtie());
  CHECK_FALSE(bt.ok);
  CHECK(bt.boundary_edges.empty());
  REQUIRE(bt.nonmanifold_vertices.size() == 1);
  CHECK(bt.nonmanifold_vertices[0] == 0);

  const ManifoldReport st = validate_watertight_manifold(shapes::strip(4));
  CHECK_FALSE(st.ok);
  CHECK_FALSE(st.boundary_edges.empty());
}

TEST_CASE("icosphere and torus sizes") {
  CHECK(shapes::icosphere(0).vertex_count() == 12);
  CHECK(shapes::icosphere(1).vertex_count() == 42);
  CHECK(shapes::icosphere(2).vertex_count() == 162);
  CHECK(shapes::icosphere(2).face_count() == 320);
  CHECK(shapes::torus_grid(8, 8).vertex_count() == 64);
  CHECK(shapes::torus_grid(8, 8).face_count() == 128);
  CHECK(shapes::strip(5).vertex_count() == 12);
}

TEST_CASE("permutations") {
  CHECK_THROWS_AS(Permutation({0, 0, 1}), std::invalid_argument);
  CHECK_THROWS_AS(Permutation({0, 3, 1}), std::invalid_argument);
  const Permutation p({2, 0, 1});
  CHECK(p.inverse().inverse() == p);
  const Matrix pm = p.matrix();
  CHECK(matmul(pm, transpose(pm)) == Matrix::identity(3));
  CHECK(matmul(pm, p.inverse().matrix()) == Matrix::identity(3));
}

TEST_CASE("apply_permutation conjugates adjacency") {
  const TriMesh ico = shapes::icosahedron();
  CHECK(apply_permutation(ico, Permutation::identity(12)).vertices() == ico.vertices());
  CHECK(apply_permutation(ico, Permutation::identity(12)).faces() == ico.faces());
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const Permutation p = random_permutation(12, rng);
    const TriMesh g1 = apply_permutation(ico, p);
    const Matrix pm = p.matrix();
    CHECK(g1.adjacency() == matmul(matmul(pm, ico.adjacency()), transpose(pm)));
    CHECK(g1.vertices() == matmul(pm, ico.vertices()));
    const TriMesh back = apply_permutation(g1, p.inverse());
    CHECK(back.vertices() == ico.vertices());
    CHECK(back.faces() == ico.faces());
    CHECK(back.adjacency() == ico.adjacency());
  }
  CHECK_THROWS_AS(apply_permutation(ico, Permutation::identity(4)), std::invalid_argument);
}

TEST_CASE("neighborhood queries") {
  const TriMesh tet = shapes::tetrahedron();
  CHECK(tet.shared_neighbors(0, 1) == std::vector<std::size_t>{2, 3});
  const TriMesh ico = shapes::icosahedron();
  for (std::size_t u = 0; u < 12; ++u)
    for (std::size_t v : ico.neighbors(u)) CHECK(ico.shared_neighbors(u, v).size() == 2);
  const TriMesh st = shapes::strip(10);
  CHECK(st.shared_neighbors(0, 20).empty());
  CHECK(st.shared_neighbors(1, 21).empty());
  CHECK_THROWS_AS(tet.neighbors(4), std::out_of_range);
  CHECK(tet.has_face(2, 1, 0));
  CHECK_FALSE(shapes::icosahedron().has_face(0, 1, 2));
}

TEST_CASE("with_vertices shares connectivity") {
  const TriMesh ico = shapes::icosahedron();
  const TriMesh moved = ico.with_vertices(scale(ico.vertices(), 2.0));
  CHECK(moved.same_connectivity(ico));
  CHECK(moved.faces() == ico.faces());
  CHECK_THROWS(ico.with_vertices(Matrix(3, 3)));
}

TEST_CASE("OBJ round trip") {
  const TriMesh tet = shapes::tetrahedron();
  const TriMesh ico = shapes::icosphere(1);
  for (const TriMesh* m : {&tet, &ico}) {
    std::stringstream buf;
    write_obj(buf, *m);
    const TriMesh back = parse_obj(buf);
    CHECK(back.faces() == m->faces());
    CHECK(max_abs_diff(back.vertices(), m->vertices()) <= 1e-9);
    CHECK(back.vertices() == m->vertices());  // shortest round-trip form is exact
  }
  const auto path = std::filesystem::temp_directory_path() / "meshblend_obj_roundtrip.obj";
  save_obj(ico, path);
  CHECK(load_obj(path).vertices() == ico.vertices());
  std::filesystem::remove(path);
}

TEST_CASE("OBJ parsing details") {
  std::istringstream slashes("# comment\nv 0 0 0\nv 1 0 0\nv 0 1 0\nvn 0 0 1\nf 1/1/1 2/2/2 3/3/3\n");
  const TriMesh m = parse_obj(slashes);
  REQUIRE(m.face_count() == 1);
  CHECK(m.faces()[0] == Face{0, 1, 2});

  std::istringstream quad("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n");
  try {
    parse_obj(quad, "quad.obj");
    FAIL("quad accepted");
  } catch (const ObjError& e) {
    CHECK(e.line() == 5);
    CHECK(std::string(e.what()).find("quad.obj:5") != std::string::npos);
  }

  std::istringstream range("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 4\n");
  CHECK_THROWS_AS(parse_obj(range), ObjError);
  std::istringstream zero("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 0 1 2\n");
  CHECK_THROWS_AS(parse_obj(zero), ObjError);
  std::istringstream junk("v 0 zero 0\n");
  CHECK_THROWS_AS(parse_obj(junk), ObjError);
  CHECK_THROWS(load_obj("/nonexistent/meshblend.obj"));
}

TEST_CASE("sequence directory round trip") {
  DatasetSpec spec;
  spec.sequences = 1;
  spec.frames = 3;
  spec.level = 0;
  Rng rng(1);
  const MotionSequence seq = generate_sequence(make_base_shape(spec), spec, rng);
  const auto dir = std::filesystem::temp_directory_path() / "meshblend_seq_test";
  std::filesystem::remove_all(dir);
  save_sequence(seq, dir);
  CHECK(std::filesystem::exists(dir / "frame_00000.obj"));
  CHECK(std::filesystem::exists(dir / "sequence.meta"));
  const MotionSequence back = load_sequence(dir);
  CHECK(back.frame_indices == seq.frame_indices);
  REQUIRE(back.frame_count() == seq.frame_count());
  for (std::size_t k = 0; k < seq.frame_count(); ++k) CHECK(back.frames[k] == seq.frames[k]);
  CHECK(back.base.faces() == seq.base.faces());
  std::filesystem::remove_all(dir);
}
