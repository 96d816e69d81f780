#include "meshblend/shapes.hpp"

#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

namespace meshblend::shapes {

TriMesh tetrahedron() {
  Matrix v{{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}};
  return TriMesh(std::move(v), {{0, 1, 2}, {0, 3, 1}, {0, 2, 3}, {1, 3, 2}});
}

TriMesh icosahedron() {
  const double p = (1.0 + std::sqrt(5.0)) / 2.0;
  const double s = 1.0 / std::sqrt(1.0 + p * p);
  Matrix v{{-1, p, 0}, {1, p, 0}, {-1, -p, 0}, {1, -p, 0}, {0, -1, p}, {0, 1, p},
           {0, -1, -p}, {0, 1, -p}, {p, 0, -1}, {p, 0, 1}, {-p, 0, -1}, {-p, 0, 1}};
  for (double& x : v.data()) x *= s;
  std::vector<Face> f{{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                      {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                      {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                      {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  return TriMesh(std::move(v), std::move(f));
}

TriMesh icosphere(int level) {
  if (level < 0) throw std::invalid_argument("icosphere: negative level");
  TriMesh base = icosahedron();
  std::vector<std::array<double, 3>> pts;
  for (std::size_t i = 0; i < base.vertex_count(); ++i) {
    pts.push_back({base.vertices()(i, 0), base.vertices()(i, 1), base.vertices()(i, 2)});
  }
  std::vector<Face> faces = base.faces();
  for (int l = 0; l < level; ++l) {
    std::map<Edge, std::size_t> midpoint;
    auto mid = [&](std::size_t a, std::size_t b) {
      const Edge e = a < b ? Edge{a, b} : Edge{b, a};
      auto it = midpoint.find(e);
      if (it != midpoint.end()) return it->second;
      std::array<double, 3> m{};
      double norm = 0.0;
      for (int k = 0; k < 3; ++k) {
        m[k] = 0.5 * (pts[a][k] + pts[b][k]);
        norm += m[k] * m[k];
      }
      norm = std::sqrt(norm);
      for (double& x : m) x /= norm;
      pts.push_back(m);
      midpoint.emplace(e, pts.size() - 1);
      return pts.size() - 1;
    };
    std::vector<Face> next;
    next.reserve(faces.size() * 4);
    for (const Face& f : faces) {
      const std::size_t ab = mid(f[0], f[1]);
      const std::size_t bc = mid(f[1], f[2]);
      const std::size_t ca = mid(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({f[1], bc, ab});
      next.push_back({f[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    faces = std::move(next);
  }
  Matrix v(pts.size(), 3);
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (int k = 0; k < 3; ++k) v(i, k) = pts[i][k];
  return TriMesh(std::move(v), std::move(faces));
}

TriMesh torus_grid(std::size_t rows, std::size_t cols, double major_radius,
                   double minor_radius) {
  if (rows < 3 || cols < 3) throw std::invalid_argument("torus_grid: rows and cols must be >= 3");
  Matrix v(rows * cols, 3);
  auto id = [cols](std::size_t r, std::size_t c) { return r * cols + c; };
  for (std::size_t r = 0; r < rows; ++r) {
    const double u = 2.0 * M_PI * static_cast<double>(r) / static_cast<double>(rows);
    for (std::size_t c = 0; c < cols; ++c) {
      const double w = 2.0 * M_PI * static_cast<double>(c) / static_cast<double>(cols);
      const double ring = major_radius + minor_radius * std::cos(w);
      v(id(r, c), 0) = ring * std::cos(u);
      v(id(r, c), 1) = minor_radius * std::sin(w);
      v(id(r, c), 2) = ring * std::sin(u);
    }
  }
  std::vector<Face> faces;
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t r1 = (r + 1) % rows;
    for (std::size_t c = 0; c < cols; ++c) {
      const std::size_t c1 = (c + 1) % cols;
      faces.push_back({id(r, c), id(r, c1), id(r1, c)});
      faces.push_back({id(r1, c), id(r, c1), id(r1, c1)});
    }
  }
  return TriMesh(std::move(v), std::move(faces));
}

TriMesh strip(std::size_t length) {
  const std::size_t n = 2 * (length + 1);
  Matrix v(n, 3);
  for (std::size_t i = 0; i <= length; ++i) {
    v(2 * i, 0) = static_cast<double>(i);
    v(2 * i + 1, 0) = static_cast<double>(i);
    v(2 * i + 1, 1) = 1.0;
  }
  std::vector<Face> faces;
  for (std::size_t i = 0; i < length; ++i) {
    faces.push_back({2 * i, 2 * i + 2, 2 * i + 1});
    faces.push_back({2 * i + 1, 2 * i + 2, 2 * i + 3});
  }
  return TriMesh(std::move(v), std::move(faces));
}

}  // namespace meshblend::shapes
