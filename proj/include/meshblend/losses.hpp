#pragma once

#include "meshblend/matrix.hpp"
#include "meshblend/tape.hpp"

namespace meshblend {

// ||P A0 P^T - A1||_F + ||P^T A1 P - A0||_F + ||P P^T - I||_F + ||P^T P - I||_F.
// p_hat rows index G_1 vertices, columns G_0 vertices.
Var correspondence_loss(Var p_hat, const Matrix& a0, const Matrix& a1);
double correspondence_loss(const Matrix& p_hat, const Matrix& a0, const Matrix& a1);

// Mean squared distance from each predicted point to its nearest ground-truth
// point plus the same from the ground-truth side. Nearest-point ties go to the
// lowest index; gradients flow only through the selected pairs.
Var chamfer_loss(Var pred, Var gt);
double chamfer_loss(const Matrix& pred, const Matrix& gt);

}  // namespace meshblend
