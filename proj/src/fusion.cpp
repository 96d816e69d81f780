#include "meshblend/fusion.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "meshblend/rng.hpp"

namespace meshblend {

namespace {

constexpr double kResidualInitScale = 0.1;

Matrix glorot(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Matrix w(fan_in, fan_out);
  for (double& x : w.data()) x = rng.uniform(-limit, limit);
  return w;
}

BmpnnParams init_bmpnn(std::size_t in, std::size_t d, Rng& rng) {
  BmpnnParams p;
  p.w1 = glorot(in, d, rng);
  p.b1 = Matrix(1, d);
  p.w2 = glorot(d, d, rng);
  p.b2 = Matrix(1, d);
  // Residual branches start small so each layer begins close to the identity;
  // full-size Glorot weights compound over six layers and blow up the output.
  for (auto& w : p.w_res) w = scale(glorot(d, d, rng), kResidualInitScale);
  return p;
}

void push(BmpnnParams& p, std::vector<Matrix*>& out) {
  out.insert(out.end(), {&p.w1, &p.b1, &p.w2, &p.b2});
  for (auto& w : p.w_res) out.push_back(&w);
}

void expect_shape(const Matrix& m, std::size_t r, std::size_t c, const char* name) {
  if (m.rows() != r || m.cols() != c) {
    throw std::invalid_argument(std::string("FusionParams: ") + name + " is " +
                                std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                                ", expected " + std::to_string(r) + "x" + std::to_string(c));
  }
}

void check_bmpnn(const BmpnnParams& p, std::size_t in, std::size_t d, const char* name) {
  expect_shape(p.w1, in, d, name);
  expect_shape(p.b1, 1, d, name);
  expect_shape(p.w2, d, d, name);
  expect_shape(p.b2, 1, d, name);
  for (const auto& w : p.w_res) expect_shape(w, d, d, name);
}

BmpnnVars bind_bmpnn(Tape& tape, const BmpnnParams& p) {
  BmpnnVars v;
  v.w1 = tape.parameter(p.w1);
  v.b1 = tape.parameter(p.b1);
  v.w2 = tape.parameter(p.w2);
  v.b2 = tape.parameter(p.b2);
  for (std::size_t i = 0; i < p.w_res.size(); ++i) v.w_res[i] = tape.parameter(p.w_res[i]);
  return v;
}

}  // namespace

FusionParams FusionParams::initialize(const FusionConfig& config) {
  if (config.width < 1) throw std::invalid_argument("FusionConfig: width must be >= 1");
  Rng rng(config.seed);
  const auto d = static_cast<std::size_t>(config.width);
  FusionParams p;
  p.config = config;
  p.encoder = init_bmpnn(3, d, rng);
  p.decoder = init_bmpnn(4 * d, d, rng);
  p.w_out = glorot(d, 3, rng);
  p.b_out = Matrix(1, 3);
  return p;
}

std::vector<Matrix*> FusionParams::tensors() {
  std::vector<Matrix*> out;
  push(encoder, out);
  push(decoder, out);
  out.push_back(&w_out);
  out.push_back(&b_out);
  return out;
}

std::vector<const Matrix*> FusionParams::tensors() const {
  std::vector<const Matrix*> out;
  for (Matrix* m : const_cast<FusionParams*>(this)->tensors()) out.push_back(m);
  return out;
}

void FusionParams::validate() const {
  const auto d = static_cast<std::size_t>(config.width);
  check_bmpnn(encoder, 3, d, "encoder");
  check_bmpnn(decoder, 4 * d, d, "decoder");
  expect_shape(w_out, d, 3, "w_out");
  expect_shape(b_out, 1, 3, "b_out");
}

Matrix propagation_matrix(const Matrix& adjacency) {
  const std::size_t n = adjacency.rows();
  if (adjacency.cols() != n) throw std::invalid_argument("propagation_matrix: non-square adjacency");
  Matrix a_hat = add(adjacency, Matrix::identity(n));
  std::vector<double> inv_sqrt = row_sums(a_hat);
  for (double& x : inv_sqrt) x = 1.0 / std::sqrt(x);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a_hat(i, j) *= inv_sqrt[i] * inv_sqrt[j];
  return a_hat;
}

FusionVars bind(Tape& tape, const FusionParams& params) {
  FusionVars v;
  v.encoder = bind_bmpnn(tape, params.encoder);
  v.decoder = bind_bmpnn(tape, params.decoder);
  v.w_out = tape.parameter(params.w_out);
  v.b_out = tape.parameter(params.b_out);
  return v;
}

Var bmpnn(Var v, Var prop, const BmpnnVars& vars) {
  Var x = ad::relu(ad::add_row_vector(ad::matmul(v, vars.w1), vars.b1));
  x = ad::add_row_vector(ad::matmul(x, vars.w2), vars.b2);
  for (const Var& w : vars.w_res) x = ad::add(ad::relu(ad::matmul(ad::matmul(prop, x), w)), x);
  return x;
}

Matrix bmpnn(const Matrix& v, const Matrix& adjacency, const BmpnnParams& params) {
  Tape tape;
  BmpnnVars vars = bind_bmpnn(tape, params);
  return bmpnn(tape.constant(v), tape.constant(propagation_matrix(adjacency)), vars).value();
}

AlignedPair align_partial(const TriMesh& g0, const TriMesh& g1, const PartialMatch& match) {
  const std::size_t n = g0.vertex_count();
  if (g1.vertex_count() != n || match.target.size() != n) {
    throw std::invalid_argument("align: vertex counts differ");
  }
  AlignedPair out{g0, Matrix(n, 3), std::vector<Provenance>(n, Provenance::Original)};
  std::vector<bool> assigned(n, false);
  for (std::size_t u = 0; u < n; ++u) {
    if (!match.matched(u)) continue;
    auto src = g1.vertices().row(match.target[u]);
    std::copy(src.begin(), src.end(), out.v1_aligned.row(u).begin());
    out.provenance[u] = Provenance::Permuted;
    assigned[u] = true;
  }
  // Each pass reads only slots assigned before the pass began.
  for (std::size_t pass = 0; pass < n; ++pass) {
    std::vector<std::size_t> newly;
    Matrix next = out.v1_aligned;
    for (std::size_t u = 0; u < n; ++u) {
      if (assigned[u]) continue;
      double acc[3] = {0.0, 0.0, 0.0};
      std::size_t count = 0;
      for (std::size_t w : g0.neighbors(u)) {
        if (!assigned[w]) continue;
        for (int k = 0; k < 3; ++k) acc[k] += out.v1_aligned(w, k);
        ++count;
      }
      if (count == 0) continue;
      for (int k = 0; k < 3; ++k) next(u, k) = acc[k] / static_cast<double>(count);
      newly.push_back(u);
    }
    if (newly.empty()) break;
    out.v1_aligned = std::move(next);
    for (std::size_t u : newly) {
      assigned[u] = true;
      out.provenance[u] = Provenance::Propagated;
    }
  }
  for (std::size_t u = 0; u < n; ++u) {
    if (assigned[u]) continue;
    auto src = g0.vertices().row(u);
    std::copy(src.begin(), src.end(), out.v1_aligned.row(u).begin());
  }
  return out;
}

AlignedPair align_with_permutation(const TriMesh& g0, const TriMesh& g1, const Permutation& p) {
  const std::size_t n = g0.vertex_count();
  if (g1.vertex_count() != n || p.size() != n) {
    throw std::invalid_argument("align: vertex counts differ");
  }
  // P^T V_1: slot u0 receives the G_1 row whose source is u0.
  return AlignedPair{g0, permute_rows(g1.vertices(), p.inverse()),
                     std::vector<Provenance>(n, Provenance::Permuted)};
}

AlignedPair align(const TriMesh& g0, const TriMesh& g1, const RefinementResult& refinement) {
  const std::size_t n = g0.vertex_count();
  switch (refinement.outcome) {
    case RefinementOutcome::ExactPermutation:
      if (!refinement.permutation) throw std::invalid_argument("align: exact result without permutation");
      return align_with_permutation(g0, g1, *refinement.permutation);
    case RefinementOutcome::PartialMatch:
      return align_partial(g0, g1, refinement.pairs);
    case RefinementOutcome::Fallback: {
      if (!refinement.hard) return align_partial(g0, g1, refinement.pairs);
      // Rows of the hard matrix are G_1 vertices; keep the G_0 slots hit exactly once.
      const auto& choice = refinement.hard->choice;
      std::vector<std::size_t> hits(n, 0);
      for (std::size_t c : choice) ++hits[c];
      PartialMatch m(n);
      for (std::size_t u1 = 0; u1 < choice.size(); ++u1)
        if (hits[choice[u1]] == 1) m.target[choice[u1]] = u1;
      return align_partial(g0, g1, m);
    }
  }
  throw std::logic_error("align: unknown outcome");
}

BlendTrace blend_forward(Tape& tape, const FusionVars& vars, const AlignedPair& aligned, double t) {
  const std::size_t n = aligned.g0.vertex_count();
  if (aligned.v1_aligned.rows() != n || aligned.v1_aligned.cols() != 3) {
    throw std::invalid_argument("blend: aligned vertices must be n x 3");
  }
  const Var prop = tape.constant(propagation_matrix(aligned.g0.adjacency()));
  BlendTrace tr;
  tr.features0 = bmpnn(tape.constant(aligned.v0()), prop, vars.encoder);
  tr.features1 = bmpnn(tape.constant(aligned.v1_aligned), prop, vars.encoder);
  tr.linear = ad::add(ad::scale(tr.features0, 1.0 - t), ad::scale(tr.features1, t));
  const Var time = tape.constant(Matrix(n, tr.features0.cols(), t));
  tr.stacked = ad::concat_cols({tr.features0, tr.features1, tr.linear, time});
  const Var decoded = bmpnn(tr.stacked, prop, vars.decoder);
  tr.vertices = ad::add_row_vector(ad::matmul(decoded, vars.w_out), vars.b_out);
  return tr;
}

BlendedMesh blend(const AlignedPair& aligned, double t, const FusionParams& params) {
  Tape tape;
  const FusionVars vars = bind(tape, params);
  Matrix v = blend_forward(tape, vars, aligned, t).vertices.value();
  if (!all_finite(v)) throw std::runtime_error("blend: non-finite output");
  return BlendedMesh{aligned.g0.with_vertices(std::move(v)), t};
}

}  // namespace meshblend
