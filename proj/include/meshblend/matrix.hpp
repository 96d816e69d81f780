#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace meshblend {

// Dense row-major matrix of doubles. Value type: copies are deep.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  Matrix& operator+=(const Matrix& other);

  bool operator==(const Matrix& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

bool same_shape(const Matrix& a, const Matrix& b);

// Throws std::invalid_argument naming `what` when shapes differ.
void require_same_shape(const Matrix& a, const Matrix& b, const char* what);

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);
Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
Matrix hadamard(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& a, double s);

// Adds a 1×c row vector to every row of an r×c matrix.
Matrix add_row_vector(const Matrix& a, const Matrix& row);

Matrix relu(const Matrix& a);
Matrix sigmoid(const Matrix& a);

inline constexpr double kNormEpsilon = 1e-12;

// Rows whose Euclidean norm is below kNormEpsilon pass through unchanged.
Matrix l2_normalize_rows(const Matrix& a);

// Row-wise softmax of a / tau.
Matrix row_softmax(const Matrix& a, double tau);
Matrix normalize_rows_by_sum(const Matrix& a);
Matrix normalize_cols_by_sum(const Matrix& a);

inline constexpr int kDefaultSinkhornIters = 20;
inline constexpr double kDefaultSinkhornTau = 1.0;

// exp(a / tau) followed by `iters` rounds of (row normalization, column
// normalization). The first exponentiate-and-row-normalize step is evaluated
// as a row softmax, which is mathematically identical and cannot overflow.
Matrix sinkhorn(const Matrix& a, int iters = kDefaultSinkhornIters,
                double tau = kDefaultSinkhornTau);

// Horizontal concatenation; all blocks must share a row count.
Matrix concat_cols(std::span<const Matrix> blocks);

double sum(const Matrix& a);
double frobenius_norm(const Matrix& a);
double max_abs_diff(const Matrix& a, const Matrix& b);
bool all_finite(const Matrix& a);

std::vector<double> row_sums(const Matrix& a);
std::vector<double> col_sums(const Matrix& a);

}  // namespace meshblend
