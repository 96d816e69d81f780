#include "meshblend/correspondence.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "meshblend/rng.hpp"

namespace meshblend {

namespace {

Matrix glorot(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Matrix w(fan_in, fan_out);
  for (double& x : w.data()) x = rng.uniform(-limit, limit);
  return w;
}

void expect_shape(const Matrix& m, std::size_t r, std::size_t c, const std::string& name) {
  if (m.rows() != r || m.cols() != c) {
    throw std::invalid_argument("CorrespondenceParams: " + name + " is " +
                                std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                                ", expected " + std::to_string(r) + "x" + std::to_string(c));
  }
}

}  // namespace

CorrespondenceParams CorrespondenceParams::initialize(const CorrespondenceConfig& config) {
  if (config.iterations < 1 || config.width < 1 || config.hidden1 < 1 || config.hidden2 < 1) {
    throw std::invalid_argument("CorrespondenceConfig: iterations and widths must be >= 1");
  }
  Rng rng(config.seed);
  const auto d = static_cast<std::size_t>(config.width);
  const auto h1 = static_cast<std::size_t>(config.hidden1);
  const auto h2 = static_cast<std::size_t>(config.hidden2);
  CorrespondenceParams p;
  p.config = config;
  p.w1 = glorot(3, h1, rng);
  p.b1 = Matrix(1, h1);
  p.w2 = glorot(h1, h2, rng);
  p.b2 = Matrix(1, h2);
  p.w3 = glorot(h2, d, rng);
  p.b3 = Matrix(1, d);
  for (int i = 0; i < config.iterations; ++i) {
    p.w_blue.push_back(glorot(d, d, rng));
    p.w_red.push_back(glorot(d, d, rng));
  }
  p.w_t = glorot(d, d, rng);
  p.lambda_s = Matrix(1, 1, config.lambda_s);
  p.lambda_r = Matrix(1, 1, config.lambda_r);
  p.validate();
  return p;
}

std::vector<Matrix*> CorrespondenceParams::tensors() {
  std::vector<Matrix*> out{&w1, &b1, &w2, &b2, &w3, &b3};
  for (auto& w : w_blue) out.push_back(&w);
  for (auto& w : w_red) out.push_back(&w);
  out.push_back(&w_t);
  out.push_back(&lambda_s);
  out.push_back(&lambda_r);
  return out;
}

std::vector<const Matrix*> CorrespondenceParams::tensors() const {
  std::vector<const Matrix*> out;
  for (Matrix* m : const_cast<CorrespondenceParams*>(this)->tensors()) out.push_back(m);
  return out;
}

void CorrespondenceParams::validate() const {
  const auto d = static_cast<std::size_t>(config.width);
  const auto h1 = static_cast<std::size_t>(config.hidden1);
  const auto h2 = static_cast<std::size_t>(config.hidden2);
  if (config.iterations < 1) throw std::invalid_argument("CorrespondenceParams: K must be >= 1");
  expect_shape(w1, 3, h1, "w1");
  expect_shape(b1, 1, h1, "b1");
  expect_shape(w2, h1, h2, "w2");
  expect_shape(b2, 1, h2, "b2");
  expect_shape(w3, h2, d, "w3");
  expect_shape(b3, 1, d, "b3");
  if (w_blue.size() != static_cast<std::size_t>(config.iterations) ||
      w_red.size() != static_cast<std::size_t>(config.iterations)) {
    throw std::invalid_argument("CorrespondenceParams: need one blue and red weight per iteration");
  }
  for (std::size_t i = 0; i < w_blue.size(); ++i) {
    expect_shape(w_blue[i], d, d, "w_blue[" + std::to_string(i) + "]");
    expect_shape(w_red[i], d, d, "w_red[" + std::to_string(i) + "]");
  }
  expect_shape(w_t, d, d, "w_t");
  expect_shape(lambda_s, 1, 1, "lambda_s");
  expect_shape(lambda_r, 1, 1, "lambda_r");
  if (lambda_s(0, 0) < 0.0 || lambda_r(0, 0) < 0.0) {
    throw std::invalid_argument("CorrespondenceParams: lambdas must be non-negative");
  }
}

Matrix HardCorrespondence::matrix() const {
  Matrix m(choice.size(), cols);
  for (std::size_t i = 0; i < choice.size(); ++i) m(i, choice[i]) = 1.0;
  return m;
}

HardCorrespondence binarize(const Matrix& scores) {
  HardCorrespondence h;
  h.cols = scores.cols();
  h.choice.resize(scores.rows(), 0);
  std::vector<int> hits(scores.cols(), 0);
  for (std::size_t i = 0; i < scores.rows(); ++i) {
    auto r = scores.row(i);
    std::size_t best = 0;
    for (std::size_t j = 1; j < r.size(); ++j)
      if (r[j] > r[best]) best = j;
    h.choice[i] = best;
    if (!r.empty()) ++hits[best];
  }
  h.is_valid_permutation = scores.rows() == scores.cols();
  for (int c : hits)
    if (c != 1) h.is_valid_permutation = false;
  return h;
}

Matrix build_augmented(const TriMesh& g0, const TriMesh& g1) {
  const std::size_t n = g0.vertex_count();
  if (g1.vertex_count() != n) {
    throw std::invalid_argument("build_augmented: vertex counts differ (" + std::to_string(n) +
                                " vs " + std::to_string(g1.vertex_count()) + ")");
  }
  Matrix aug(2 * n, 2 * n);
  const double r0 = n == 0 ? 0.0 : 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      aug(i, j) = g0.adjacency()(i, j);
      aug(n + i, n + j) = g1.adjacency()(i, j);
      aug(i, n + j) = r0;
      aug(n + i, j) = r0;
    }
  }
  return aug;
}

CorrespondenceVars bind(Tape& tape, const CorrespondenceParams& params) {
  CorrespondenceVars v;
  v.w1 = tape.parameter(params.w1);
  v.b1 = tape.parameter(params.b1);
  v.w2 = tape.parameter(params.w2);
  v.b2 = tape.parameter(params.b2);
  v.w3 = tape.parameter(params.w3);
  v.b3 = tape.parameter(params.b3);
  for (const auto& w : params.w_blue) v.w_blue.push_back(tape.parameter(w));
  for (const auto& w : params.w_red) v.w_red.push_back(tape.parameter(w));
  v.w_t = tape.parameter(params.w_t);
  v.lambda_s = tape.parameter(params.lambda_s);
  v.lambda_r = tape.parameter(params.lambda_r);
  return v;
}

Matrix center_vertices(const Matrix& v) {
  if (v.rows() == 0) return v;
  auto mean = col_sums(v);
  for (double& m : mean) m /= static_cast<double>(v.rows());
  Matrix out = v;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto r = out.row(i);
    for (std::size_t k = 0; k < r.size(); ++k) r[k] -= mean[k];
  }
  return out;
}

RbmpnnTrace rbmpnn_forward(Tape& tape, const CorrespondenceVars& vars,
                           const CorrespondenceConfig& config, const TriMesh& g0,
                           const TriMesh& g1) {
  const std::size_t n = g0.vertex_count();
  if (g1.vertex_count() != n) {
    throw std::invalid_argument("rbmpnn_forward: vertex counts differ (" + std::to_string(n) +
                                " vs " + std::to_string(g1.vertex_count()) + ")");
  }
  if (n == 0) throw std::invalid_argument("rbmpnn_forward: empty mesh");
  if (vars.w_blue.size() != static_cast<std::size_t>(config.iterations)) {
    throw std::invalid_argument("rbmpnn_forward: parameter count does not match K");
  }

  auto f_init = [&](const Matrix& coords) {
    Var x = tape.constant(center_vertices(coords));
    x = ad::relu(ad::add_row_vector(ad::matmul(x, vars.w1), vars.b1));
    x = ad::relu(ad::add_row_vector(ad::matmul(x, vars.w2), vars.b2));
    return ad::relu(ad::add_row_vector(ad::matmul(x, vars.w3), vars.b3));
  };

  const Var a0 = tape.constant(g0.adjacency());
  const Var a1 = tape.constant(g1.adjacency());
  Var red = tape.constant(Matrix(n, n, 1.0 / static_cast<double>(n)));
  Var v0 = f_init(g0.vertices());
  Var v1 = f_init(g1.vertices());

  for (int i = 0; i < config.iterations; ++i) {
    const Var wb = vars.w_blue[static_cast<std::size_t>(i)];
    const Var wr = vars.w_red[static_cast<std::size_t>(i)];
    const Var red_t = ad::transpose(red);
    const Var next0 = ad::relu(
        ad::add(ad::matmul(ad::matmul(a0, v0), wb), ad::matmul(ad::matmul(red, v1), wr)));
    const Var next1 = ad::relu(
        ad::add(ad::matmul(ad::matmul(a1, v1), wb), ad::matmul(ad::matmul(red_t, v0), wr)));
    v0 = next0;
    v1 = next1;
    const Var e0 = ad::matmul(ad::l2_normalize_rows(v0), vars.w_t);
    const Var e1 = ad::matmul(ad::l2_normalize_rows(v1), vars.w_t);
    const Var affinity = ad::matmul(e0, ad::transpose(e1));
    const Var normalized = ad::sinkhorn(affinity, config.sinkhorn_iters, config.sinkhorn_tau);
    red = ad::add(ad::scale_by(vars.lambda_s, normalized), ad::scale_by(vars.lambda_r, red));
    if (!all_finite(red.value())) {
      throw std::runtime_error("rbmpnn_forward: non-finite red-edge weights at iteration " +
                               std::to_string(i));
    }
  }
  RbmpnnTrace trace;
  trace.red_t = ad::transpose(red);
  trace.soft = ad::sigmoid(trace.red_t);
  return trace;
}

SoftCorrespondence rbmpnn_forward(const TriMesh& g0, const TriMesh& g1,
                                  const CorrespondenceParams& params) {
  Tape tape;
  const CorrespondenceVars vars = bind(tape, params);
  return {rbmpnn_forward(tape, vars, params.config, g0, g1).soft.value()};
}

}  // namespace meshblend
