#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "meshblend/matrix.hpp"

namespace meshblend {

using Face = std::array<std::size_t, 3>;
using Edge = std::pair<std::size_t, std::size_t>;

// Dense binary adjacency induced by a face list. Rejects out-of-range indices
// and faces with a repeated vertex.
Matrix build_adjacency(std::span<const Face> faces, std::size_t n);

// Triangle mesh: vertices (n x 3), faces, and derived adjacency. Connectivity
// is immutable and shared between meshes created through with_vertices(), so
// the frames of a motion sequence cost one adjacency matrix in total.
class TriMesh {
 public:
  TriMesh() = default;
  TriMesh(Matrix vertices, std::vector<Face> faces);

  // Same connectivity, new positions. vertices must be n x 3.
  TriMesh with_vertices(Matrix vertices) const;

  std::size_t vertex_count() const { return vertices_.rows(); }
  std::size_t face_count() const { return topo_ ? topo_->faces.size() : 0; }

  const Matrix& vertices() const { return vertices_; }
  const std::vector<Face>& faces() const { return topo_->faces; }
  const Matrix& adjacency() const { return topo_->adjacency; }

  // Sorted neighbor list of v.
  std::span<const std::size_t> neighbors(std::size_t v) const;
  bool adjacent(std::size_t u, std::size_t v) const;
  // Sorted intersection of the neighborhoods of u and v.
  std::vector<std::size_t> shared_neighbors(std::size_t u, std::size_t v) const;
  // True if {a, b, c} is a face, in any vertex order.
  bool has_face(std::size_t a, std::size_t b, std::size_t c) const;

  bool same_connectivity(const TriMesh& other) const;

 private:
  struct Topology {
    std::vector<Face> faces;
    Matrix adjacency;
    std::vector<std::vector<std::size_t>> neighbors;
    std::vector<Face> sorted_faces;  // each face sorted, list sorted
  };

  void check_index(std::size_t v) const;

  Matrix vertices_;
  std::shared_ptr<const Topology> topo_;
};

struct ManifoldReport {
  bool ok = true;
  std::vector<Edge> boundary_edges;      // used by exactly one face
  std::vector<Edge> nonmanifold_edges;   // used by three or more faces
  std::vector<std::size_t> nonmanifold_vertices;  // incident faces not a single closed fan
  std::vector<std::size_t> isolated_vertices;     // no incident face
};

// Watertight 2-manifold: every edge in exactly two faces and every vertex's
// incident faces form one closed fan.
ManifoldReport validate_watertight_manifold(const TriMesh& mesh);

// Bijection on [0, n). Position i of the permuted object holds source element
// source(i); as a matrix P has P(i, source(i)) = 1, so rows permute as P * V
// and adjacency conjugates as P * A * P^T.
class Permutation {
 public:
  Permutation() = default;
  explicit Permutation(std::vector<std::size_t> source);

  static Permutation identity(std::size_t n);

  std::size_t size() const { return source_.size(); }
  std::size_t source(std::size_t i) const { return source_[i]; }
  std::size_t operator[](std::size_t i) const { return source_[i]; }
  const std::vector<std::size_t>& sources() const { return source_; }

  Permutation inverse() const;
  Matrix matrix() const;

  bool operator==(const Permutation&) const = default;

 private:
  std::vector<std::size_t> source_;
};

// out.row(i) = v.row(p[i]), i.e. P * V.
Matrix permute_rows(const Matrix& v, const Permutation& p);

// Vertices become P * V, faces are remapped, adjacency becomes P * A * P^T.
TriMesh apply_permutation(const TriMesh& mesh, const Permutation& p);

// Ordered frames sharing one connectivity.
struct MotionSequence {
  TriMesh base;                     // connectivity plus the first frame's positions
  std::vector<Matrix> frames;       // n x 3 each
  std::vector<int> frame_indices;   // strictly increasing

  std::size_t frame_count() const { return frames.size(); }
  TriMesh frame(std::size_t k) const { return base.with_vertices(frames.at(k)); }
};

}  // namespace meshblend
