#pragma once

#include <cstddef>

#include "meshblend/mesh.hpp"

namespace meshblend::shapes {

TriMesh tetrahedron();
TriMesh icosahedron();

// Icosahedron subdivided `level` times with midpoints projected onto the unit
// sphere: 10 * 4^level + 2 vertices.
TriMesh icosphere(int level);

// rows x cols grid wrapped in both directions onto a torus, two triangles per
// cell. Needs rows, cols >= 3 to be a simplicial surface.
TriMesh torus_grid(std::size_t rows, std::size_t cols, double major_radius = 1.0,
                   double minor_radius = 0.4);

// Open triangle strip of `length` quads (2 * (length + 1) vertices). Has a boundary.
TriMesh strip(std::size_t length);

}  // namespace meshblend::shapes
