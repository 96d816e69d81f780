#include "meshblend/losses.hpp"

#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace meshblend {

namespace {

void check_square_set(std::size_t p_rows, std::size_t p_cols, const Matrix& a0, const Matrix& a1) {
  const std::size_t n = p_rows;
  if (p_cols != n || a0.rows() != n || a0.cols() != n || a1.rows() != n || a1.cols() != n) {
    throw std::invalid_argument("correspondence_loss: expected n x n inputs with n = " +
                                std::to_string(n));
  }
}

struct NearestPairs {
  std::vector<std::size_t> pred_to_gt;
  std::vector<std::size_t> gt_to_pred;
  double value = 0.0;
};

double sq_dist(const Matrix& a, std::size_t i, const Matrix& b, std::size_t j) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.cols(); ++k) {
    const double d = a(i, k) - b(j, k);
    s += d * d;
  }
  return s;
}

NearestPairs nearest_pairs(const Matrix& pred, const Matrix& gt) {
  if (pred.rows() == 0 || gt.rows() == 0) throw std::invalid_argument("chamfer_loss: empty point set");
  if (pred.cols() != gt.cols()) throw std::invalid_argument("chamfer_loss: dimension mismatch");
  const std::size_t n = pred.rows();
  const std::size_t m = gt.rows();
  NearestPairs np;
  np.pred_to_gt.assign(n, 0);
  np.gt_to_pred.assign(m, 0);
  std::vector<double> best_pred(n, std::numeric_limits<double>::infinity());
  std::vector<double> best_gt(m, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double d = sq_dist(pred, i, gt, j);
      if (d < best_pred[i]) {
        best_pred[i] = d;
        np.pred_to_gt[i] = j;
      }
      if (d < best_gt[j]) {
        best_gt[j] = d;
        np.gt_to_pred[j] = i;
      }
    }
  }
  double a = 0.0;
  for (double d : best_pred) a += d;
  double b = 0.0;
  for (double d : best_gt) b += d;
  np.value = a / static_cast<double>(n) + b / static_cast<double>(m);
  return np;
}

}  // namespace

Var correspondence_loss(Var p_hat, const Matrix& a0, const Matrix& a1) {
  check_square_set(p_hat.rows(), p_hat.cols(), a0, a1);
  Tape& tape = *p_hat.tape();
  const std::size_t n = a0.rows();
  const Var c0 = tape.constant(a0);
  const Var c1 = tape.constant(a1);
  const Var eye = tape.constant(Matrix::identity(n));
  const Var pt = ad::transpose(p_hat);
  const Var t1 = ad::frobenius_norm(ad::sub(ad::matmul(ad::matmul(p_hat, c0), pt), c1));
  const Var t2 = ad::frobenius_norm(ad::sub(ad::matmul(ad::matmul(pt, c1), p_hat), c0));
  const Var t3 = ad::frobenius_norm(ad::sub(ad::matmul(p_hat, pt), eye));
  const Var t4 = ad::frobenius_norm(ad::sub(ad::matmul(pt, p_hat), eye));
  return ad::add(ad::add(t1, t2), ad::add(t3, t4));
}

double correspondence_loss(const Matrix& p_hat, const Matrix& a0, const Matrix& a1) {
  check_square_set(p_hat.rows(), p_hat.cols(), a0, a1);
  const Matrix pt = transpose(p_hat);
  const Matrix eye = Matrix::identity(a0.rows());
  return frobenius_norm(sub(matmul(matmul(p_hat, a0), pt), a1)) +
         frobenius_norm(sub(matmul(matmul(pt, a1), p_hat), a0)) +
         frobenius_norm(sub(matmul(p_hat, pt), eye)) + frobenius_norm(sub(matmul(pt, p_hat), eye));
}

Var chamfer_loss(Var pred, Var gt) {
  const Matrix* pv = &pred.value();
  const Matrix* gv = &gt.value();
  NearestPairs np = nearest_pairs(*pv, *gv);
  const double value = np.value;
  return pred.tape()->record(
      Matrix(1, 1, value), {pred, gt}, [pv, gv, np = std::move(np)](const Matrix& g) {
        const double s = g(0, 0);
        const double wn = 2.0 * s / static_cast<double>(pv->rows());
        const double wm = 2.0 * s / static_cast<double>(gv->rows());
        Matrix dp(pv->rows(), pv->cols());
        Matrix dg(gv->rows(), gv->cols());
        for (std::size_t i = 0; i < pv->rows(); ++i) {
          const std::size_t j = np.pred_to_gt[i];
          for (std::size_t k = 0; k < pv->cols(); ++k) {
            const double diff = (*pv)(i, k) - (*gv)(j, k);
            dp(i, k) += wn * diff;
            dg(j, k) -= wn * diff;
          }
        }
        for (std::size_t j = 0; j < gv->rows(); ++j) {
          const std::size_t i = np.gt_to_pred[j];
          for (std::size_t k = 0; k < pv->cols(); ++k) {
            const double diff = (*pv)(i, k) - (*gv)(j, k);
            dp(i, k) += wm * diff;
            dg(j, k) -= wm * diff;
          }
        }
        return std::vector<Matrix>{std::move(dp), std::move(dg)};
      });
}

double chamfer_loss(const Matrix& pred, const Matrix& gt) { return nearest_pairs(pred, gt).value; }

}  // namespace meshblend
