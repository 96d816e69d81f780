#include "meshblend/mesh.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>

namespace meshblend {

namespace {

Edge make_edge(std::size_t a, std::size_t b) { return a < b ? Edge{a, b} : Edge{b, a}; }

Face sorted(Face f) {
  std::sort(f.begin(), f.end());
  return f;
}

void check_face(const Face& f, std::size_t index, std::size_t n) {
  for (std::size_t v : f) {
    if (v >= n) {
      throw std::out_of_range("face " + std::to_string(index) + ": vertex index " +
                              std::to_string(v) + " out of range [0," + std::to_string(n) + ")");
    }
  }
  if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2]) {
    throw std::invalid_argument("face " + std::to_string(index) + ": degenerate (repeated vertex)");
  }
}

}  // namespace

Matrix build_adjacency(std::span<const Face> faces, std::size_t n) {
  Matrix a(n, n);
  for (std::size_t i = 0; i < faces.size(); ++i) {
    const Face& f = faces[i];
    check_face(f, i, n);
    for (int k = 0; k < 3; ++k) {
      const std::size_t u = f[k];
      const std::size_t v = f[(k + 1) % 3];
      a(u, v) = 1.0;
      a(v, u) = 1.0;
    }
  }
  return a;
}

TriMesh::TriMesh(Matrix vertices, std::vector<Face> faces) : vertices_(std::move(vertices)) {
  if (vertices_.cols() != 3 && !(vertices_.rows() == 0)) {
    throw std::invalid_argument("TriMesh: vertices must be n x 3");
  }
  const std::size_t n = vertices_.rows();
  auto topo = std::make_shared<Topology>();
  topo->adjacency = build_adjacency(faces, n);
  topo->neighbors.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = topo->adjacency.row(i);
    for (std::size_t j = 0; j < n; ++j)
      if (row[j] != 0.0) topo->neighbors[i].push_back(j);
  }
  topo->sorted_faces.reserve(faces.size());
  for (const Face& f : faces) topo->sorted_faces.push_back(sorted(f));
  std::sort(topo->sorted_faces.begin(), topo->sorted_faces.end());
  topo->faces = std::move(faces);
  topo_ = std::move(topo);
}

TriMesh TriMesh::with_vertices(Matrix vertices) const {
  if (vertices.rows() != vertex_count() || vertices.cols() != 3) {
    throw std::invalid_argument("TriMesh::with_vertices: expected " +
                                std::to_string(vertex_count()) + " x 3 vertices");
  }
  TriMesh m;
  m.vertices_ = std::move(vertices);
  m.topo_ = topo_;
  return m;
}

void TriMesh::check_index(std::size_t v) const {
  if (v >= vertex_count()) {
    throw std::out_of_range("vertex index " + std::to_string(v) + " out of range [0," +
                            std::to_string(vertex_count()) + ")");
  }
}

std::span<const std::size_t> TriMesh::neighbors(std::size_t v) const {
  check_index(v);
  return topo_->neighbors[v];
}

bool TriMesh::adjacent(std::size_t u, std::size_t v) const {
  check_index(u);
  check_index(v);
  return topo_->adjacency(u, v) != 0.0;
}

std::vector<std::size_t> TriMesh::shared_neighbors(std::size_t u, std::size_t v) const {
  auto nu = neighbors(u);
  auto nv = neighbors(v);
  std::vector<std::size_t> out;
  std::set_intersection(nu.begin(), nu.end(), nv.begin(), nv.end(), std::back_inserter(out));
  return out;
}

bool TriMesh::has_face(std::size_t a, std::size_t b, std::size_t c) const {
  return std::binary_search(topo_->sorted_faces.begin(), topo_->sorted_faces.end(),
                            sorted(Face{a, b, c}));
}

bool TriMesh::same_connectivity(const TriMesh& other) const {
  if (topo_ == other.topo_) return true;
  if (!topo_ || !other.topo_) return false;
  return topo_->faces == other.topo_->faces && vertex_count() == other.vertex_count();
}

ManifoldReport validate_watertight_manifold(const TriMesh& mesh) {
  ManifoldReport report;
  const std::size_t n = mesh.vertex_count();
  std::map<Edge, int> edge_use;
  std::vector<std::vector<Edge>> link(n);
  for (const Face& f : mesh.faces()) {
    for (int k = 0; k < 3; ++k) {
      ++edge_use[make_edge(f[k], f[(k + 1) % 3])];
      link[f[k]].push_back(make_edge(f[(k + 1) % 3], f[(k + 2) % 3]));
    }
  }
  for (const auto& [e, count] : edge_use) {
    if (count == 1) report.boundary_edges.push_back(e);
    if (count > 2) report.nonmanifold_edges.push_back(e);
  }
  for (std::size_t v = 0; v < n; ++v) {
    if (link[v].empty()) {
      report.isolated_vertices.push_back(v);
      continue;
    }
    // The link of v must be a single cycle.
    std::map<std::size_t, std::vector<std::size_t>> g;
    for (const auto& [a, b] : link[v]) {
      g[a].push_back(b);
      g[b].push_back(a);
    }
    bool fan = std::all_of(g.begin(), g.end(), [](const auto& kv) { return kv.second.size() == 2; });
    if (fan) {
      std::size_t start = g.begin()->first;
      std::size_t prev = start;
      std::size_t cur = g[start][0];
      std::size_t visited = 1;
      while (cur != start && visited <= g.size()) {
        const auto& nb = g[cur];
        const std::size_t next = nb[0] == prev ? nb[1] : nb[0];
        prev = cur;
        cur = next;
        ++visited;
      }
      fan = cur == start && visited == g.size();
    }
    if (!fan) report.nonmanifold_vertices.push_back(v);
  }
  report.ok = report.boundary_edges.empty() && report.nonmanifold_edges.empty() &&
              report.nonmanifold_vertices.empty() && report.isolated_vertices.empty();
  return report;
}

Permutation::Permutation(std::vector<std::size_t> source) : source_(std::move(source)) {
  std::vector<bool> seen(source_.size(), false);
  for (std::size_t s : source_) {
    if (s >= source_.size() || seen[s]) {
      throw std::invalid_argument("Permutation: not a bijection on [0," +
                                  std::to_string(source_.size()) + ")");
    }
    seen[s] = true;
  }
}

Permutation Permutation::identity(std::size_t n) {
  std::vector<std::size_t> s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = i;
  return Permutation(std::move(s));
}

Permutation Permutation::inverse() const {
  std::vector<std::size_t> inv(source_.size());
  for (std::size_t i = 0; i < source_.size(); ++i) inv[source_[i]] = i;
  return Permutation(std::move(inv));
}

Matrix Permutation::matrix() const {
  Matrix p(size(), size());
  for (std::size_t i = 0; i < size(); ++i) p(i, source_[i]) = 1.0;
  return p;
}

Matrix permute_rows(const Matrix& v, const Permutation& p) {
  if (v.rows() != p.size()) {
    throw std::invalid_argument("permute_rows: permutation size " + std::to_string(p.size()) +
                                " does not match " + std::to_string(v.rows()) + " rows");
  }
  Matrix out(v.rows(), v.cols());
  for (std::size_t i = 0; i < v.rows(); ++i) {
    auto src = v.row(p[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

TriMesh apply_permutation(const TriMesh& mesh, const Permutation& p) {
  if (p.size() != mesh.vertex_count()) {
    throw std::invalid_argument("apply_permutation: permutation size " + std::to_string(p.size()) +
                                " does not match vertex count " +
                                std::to_string(mesh.vertex_count()));
  }
  const Permutation inv = p.inverse();
  std::vector<Face> faces = mesh.faces();
  for (Face& f : faces)
    for (std::size_t& v : f) v = inv[v];
  return TriMesh(permute_rows(mesh.vertices(), p), std::move(faces));
}

}  // namespace meshblend
