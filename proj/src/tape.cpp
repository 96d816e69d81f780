#include "meshblend/tape.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace meshblend {

const Matrix& Var::value() const {
  if (tape_ == nullptr) throw std::logic_error("Var: not bound to a tape");
  return tape_->value(*this);
}

Var Tape::constant(Matrix value) {
  nodes_.push_back(Node{std::move(value), {}, nullptr, false});
  return Var(this, nodes_.size() - 1);
}

Var Tape::parameter(Matrix value) {
  nodes_.push_back(Node{std::move(value), {}, nullptr, true});
  params_.push_back(nodes_.size() - 1);
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Matrix value, std::vector<Var> inputs, Pullback pullback) {
  Node node;
  node.value = std::move(value);
  node.pullback = std::move(pullback);
  node.inputs.reserve(inputs.size());
  for (const Var& v : inputs) {
    if (v.tape() != this) throw std::invalid_argument("Tape: input recorded on another tape");
    node.inputs.push_back(v.id());
    node.needs_grad = node.needs_grad || nodes_[v.id()].needs_grad;
  }
  if (!node.needs_grad) node.pullback = nullptr;
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

std::vector<Matrix> Tape::backward(Var loss) const {
  if (loss.tape() != this) throw std::invalid_argument("backward: loss is not on this tape");
  const Matrix& lv = nodes_[loss.id()].value;
  if (lv.rows() != 1 || lv.cols() != 1) {
    throw std::invalid_argument("backward: loss must be 1x1, got " + std::to_string(lv.rows()) +
                                "x" + std::to_string(lv.cols()));
  }
  std::vector<Matrix> grads(loss.id() + 1);
  grads[loss.id()] = Matrix(1, 1, 1.0);
  for (std::size_t id = loss.id() + 1; id-- > 0;) {
    const Node& node = nodes_[id];
    if (grads[id].empty() || !node.pullback) continue;
    std::vector<Matrix> in_grads = node.pullback(grads[id]);
    for (std::size_t k = 0; k < node.inputs.size(); ++k) {
      const std::size_t in = node.inputs[k];
      if (!nodes_[in].needs_grad) continue;
      if (grads[in].empty()) {
        grads[in] = std::move(in_grads[k]);
      } else {
        grads[in] += in_grads[k];
      }
    }
  }
  std::vector<Matrix> out;
  out.reserve(params_.size());
  for (std::size_t p : params_) {
    if (p < grads.size() && !grads[p].empty()) {
      out.push_back(std::move(grads[p]));
    } else {
      out.emplace_back(nodes_[p].value.rows(), nodes_[p].value.cols(), 0.0);
    }
  }
  return out;
}

namespace ad {

namespace {

Tape& tape_of(Var a) {
  if (a.tape() == nullptr) throw std::logic_error("ad: unbound Var");
  return *a.tape();
}

// Shared backward of x / rowsum(x) given y = output: dx_ij = (g_ij - <g_i, y_i>) / s_i.
Matrix row_normalize_pullback(const Matrix& g, const Matrix& y, const std::vector<double>& s) {
  Matrix dx(g.rows(), g.cols());
  for (std::size_t i = 0; i < g.rows(); ++i) {
    auto gr = g.row(i);
    auto yr = y.row(i);
    double dot = 0.0;
    for (std::size_t j = 0; j < gr.size(); ++j) dot += gr[j] * yr[j];
    auto d = dx.row(i);
    for (std::size_t j = 0; j < gr.size(); ++j) d[j] = (gr[j] - dot) / s[i];
  }
  return dx;
}

}  // namespace

Var add(Var a, Var b) {
  return tape_of(a).record(meshblend::add(a.value(), b.value()), {a, b},
                           [](const Matrix& g) { return std::vector<Matrix>{g, g}; });
}

Var sub(Var a, Var b) {
  return tape_of(a).record(meshblend::sub(a.value(), b.value()), {a, b}, [](const Matrix& g) {
    return std::vector<Matrix>{g, meshblend::scale(g, -1.0)};
  });
}

Var hadamard(Var a, Var b) {
  const Matrix* av = &a.value();
  const Matrix* bv = &b.value();
  return tape_of(a).record(meshblend::hadamard(*av, *bv), {a, b}, [av, bv](const Matrix& g) {
    return std::vector<Matrix>{meshblend::hadamard(g, *bv), meshblend::hadamard(g, *av)};
  });
}

Var scale(Var a, double s) {
  return tape_of(a).record(meshblend::scale(a.value(), s), {a}, [s](const Matrix& g) {
    return std::vector<Matrix>{meshblend::scale(g, s)};
  });
}

Var scale_by(Var s, Var a) {
  if (s.rows() != 1 || s.cols() != 1) throw std::invalid_argument("scale_by: scalar must be 1x1");
  const Matrix* sv = &s.value();
  const Matrix* av = &a.value();
  return tape_of(a).record(meshblend::scale(*av, (*sv)(0, 0)), {s, a},
                           [sv, av](const Matrix& g) {
                             Matrix ds(1, 1, meshblend::sum(meshblend::hadamard(g, *av)));
                             return std::vector<Matrix>{ds, meshblend::scale(g, (*sv)(0, 0))};
                           });
}

Var add_row_vector(Var a, Var row) {
  return tape_of(a).record(meshblend::add_row_vector(a.value(), row.value()), {a, row},
                           [](const Matrix& g) {
                             const auto cs = col_sums(g);
                             return std::vector<Matrix>{g, Matrix(1, cs.size(), cs)};
                           });
}

Var matmul(Var a, Var b) {
  const Matrix* av = &a.value();
  const Matrix* bv = &b.value();
  return tape_of(a).record(meshblend::matmul(*av, *bv), {a, b}, [av, bv](const Matrix& g) {
    return std::vector<Matrix>{meshblend::matmul(g, meshblend::transpose(*bv)),
                               meshblend::matmul(meshblend::transpose(*av), g)};
  });
}

Var transpose(Var a) {
  return tape_of(a).record(meshblend::transpose(a.value()), {a}, [](const Matrix& g) {
    return std::vector<Matrix>{meshblend::transpose(g)};
  });
}

Var relu(Var a) {
  const Matrix* av = &a.value();
  return tape_of(a).record(meshblend::relu(*av), {a}, [av](const Matrix& g) {
    Matrix d = g;
    auto x = av->data();
    auto dd = d.data();
    for (std::size_t i = 0; i < dd.size(); ++i)
      if (!(x[i] > 0.0)) dd[i] = 0.0;
    return std::vector<Matrix>{std::move(d)};
  });
}

Var sigmoid(Var a) {
  Matrix y = meshblend::sigmoid(a.value());
  Matrix ycopy = y;
  return tape_of(a).record(std::move(y), {a}, [yc = std::move(ycopy)](const Matrix& g) {
    Matrix d = g;
    auto y = yc.data();
    auto dd = d.data();
    for (std::size_t i = 0; i < dd.size(); ++i) dd[i] *= y[i] * (1.0 - y[i]);
    return std::vector<Matrix>{std::move(d)};
  });
}

Var l2_normalize_rows(Var a) {
  const Matrix* av = &a.value();
  Matrix y = meshblend::l2_normalize_rows(*av);
  std::vector<double> norms(av->rows());
  for (std::size_t i = 0; i < av->rows(); ++i) {
    double ss = 0.0;
    for (double x : av->row(i)) ss += x * x;
    norms[i] = std::sqrt(ss);
  }
  Matrix ycopy = y;
  return tape_of(a).record(std::move(y), {a},
                           [yc = std::move(ycopy), norms = std::move(norms)](const Matrix& g) {
                             Matrix d(g.rows(), g.cols());
                             for (std::size_t i = 0; i < g.rows(); ++i) {
                               if (norms[i] < kNormEpsilon) continue;
                               auto gr = g.row(i);
                               auto yr = yc.row(i);
                               double dot = 0.0;
                               for (std::size_t j = 0; j < gr.size(); ++j) dot += gr[j] * yr[j];
                               auto dr = d.row(i);
                               for (std::size_t j = 0; j < gr.size(); ++j)
                                 dr[j] = (gr[j] - yr[j] * dot) / norms[i];
                             }
                             return std::vector<Matrix>{std::move(d)};
                           });
}

Var row_softmax(Var a, double tau) {
  Matrix y = meshblend::row_softmax(a.value(), tau);
  Matrix ycopy = y;
  return tape_of(a).record(std::move(y), {a}, [yc = std::move(ycopy), tau](const Matrix& g) {
    Matrix d(g.rows(), g.cols());
    for (std::size_t i = 0; i < g.rows(); ++i) {
      auto gr = g.row(i);
      auto yr = yc.row(i);
      double dot = 0.0;
      for (std::size_t j = 0; j < gr.size(); ++j) dot += gr[j] * yr[j];
      auto dr = d.row(i);
      for (std::size_t j = 0; j < gr.size(); ++j) dr[j] = yr[j] * (gr[j] - dot) / tau;
    }
    return std::vector<Matrix>{std::move(d)};
  });
}

Var normalize_rows_by_sum(Var a) {
  Matrix y = meshblend::normalize_rows_by_sum(a.value());
  auto s = row_sums(a.value());
  Matrix ycopy = y;
  return tape_of(a).record(std::move(y), {a},
                           [yc = std::move(ycopy), s = std::move(s)](const Matrix& g) {
                             return std::vector<Matrix>{row_normalize_pullback(g, yc, s)};
                           });
}

Var normalize_cols_by_sum(Var a) {
  Matrix y = meshblend::normalize_cols_by_sum(a.value());
  auto s = col_sums(a.value());
  Matrix yt = meshblend::transpose(y);
  return tape_of(a).record(std::move(y), {a},
                           [yt = std::move(yt), s = std::move(s)](const Matrix& g) {
                             Matrix dt = row_normalize_pullback(meshblend::transpose(g), yt, s);
                             return std::vector<Matrix>{meshblend::transpose(dt)};
                           });
}

Var sinkhorn(Var a, int iters, double tau) {
  if (a.rows() != a.cols()) {
    throw std::invalid_argument("sinkhorn: non-square input " + std::to_string(a.rows()) + "x" +
                                std::to_string(a.cols()));
  }
  if (iters < 1) throw std::invalid_argument("sinkhorn: tracked version needs iters >= 1");
  Var m = normalize_cols_by_sum(row_softmax(a, tau));
  for (int it = 1; it < iters; ++it) m = normalize_cols_by_sum(normalize_rows_by_sum(m));
  return m;
}

Var concat_cols(const std::vector<Var>& blocks) {
  if (blocks.empty()) throw std::invalid_argument("concat_cols: no blocks");
  std::vector<Matrix> values;
  std::vector<std::size_t> widths;
  for (const Var& b : blocks) {
    values.push_back(b.value());
    widths.push_back(b.cols());
  }
  return tape_of(blocks.front())
      .record(meshblend::concat_cols(values), blocks, [widths](const Matrix& g) {
        std::vector<Matrix> out;
        std::size_t off = 0;
        for (std::size_t w : widths) {
          Matrix d(g.rows(), w);
          for (std::size_t i = 0; i < g.rows(); ++i)
            for (std::size_t j = 0; j < w; ++j) d(i, j) = g(i, off + j);
          off += w;
          out.push_back(std::move(d));
        }
        return out;
      });
}

Var sum(Var a) {
  const std::size_t r = a.rows();
  const std::size_t c = a.cols();
  return tape_of(a).record(Matrix(1, 1, meshblend::sum(a.value())), {a},
                           [r, c](const Matrix& g) {
                             return std::vector<Matrix>{Matrix(r, c, g(0, 0))};
                           });
}

Var frobenius_norm(Var a) {
  const Matrix* av = &a.value();
  const double n = meshblend::frobenius_norm(*av);
  return tape_of(a).record(Matrix(1, 1, n), {a}, [av, n](const Matrix& g) {
    if (n == 0.0) return std::vector<Matrix>{Matrix(av->rows(), av->cols(), 0.0)};
    return std::vector<Matrix>{meshblend::scale(*av, g(0, 0) / n)};
  });
}

}  // namespace ad

}  // namespace meshblend
