#include <algorithm>
#include <cmath>

#include "eipolab/funcapprox.hpp"

namespace eipolab::funcapprox {

const Matrix& Var::value() const { return tape->value(id); }

Var Tape::push(Matrix value, std::vector<int> inputs, Backward backward) {
  Node n;
  n.value = std::move(value);
  n.inputs = std::move(inputs);
  n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<int>(nodes_.size()) - 1};
}

Var Tape::constant(Matrix value) { return push(std::move(value), {}, nullptr); }

Var Tape::param(const ParamVector& params, std::size_t slot) {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].owner == &params && nodes_[i].slot == slot) {
      return Var{this, static_cast<int>(i)};
    }
  }
  Var v = push(Matrix(params.tensor(slot)), {}, nullptr);
  nodes_.back().owner = &params;
  nodes_.back().slot = slot;
  return v;
}

void Tape::tag(Var v, std::string name) { tags_.emplace_back(v.id, std::move(name)); }

Matrix& Tape::grad(int id) {
  auto& n = nodes_[static_cast<std::size_t>(id)];
  if (n.grad.size() == 0) n.grad = Matrix::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

void Tape::backward(Var root) {
  for (auto& n : nodes_) n.grad.resize(0, 0);
  grad(root.id).setOnes();
  for (int i = root.id; i >= 0; --i) {
    const auto& n = nodes_[static_cast<std::size_t>(i)];
    if (n.grad.size() == 0 || !n.backward) continue;
    n.backward(*this, i);
  }
}

Vector Tape::param_grad(const ParamVector& params) const {
  Vector out = Vector::Zero(static_cast<Eigen::Index>(params.size()));
  for (const auto& n : nodes_) {
    if (n.owner != &params || n.grad.size() == 0) continue;
    const auto& s = params.slot(n.slot);
    out.segment(static_cast<Eigen::Index>(s.offset), n.grad.size()) =
        Eigen::Map<const Vector>(n.grad.data(), n.grad.size());
  }
  return out;
}

std::vector<std::string> Tape::non_finite_tags() const {
  std::vector<std::string> out;
  for (const auto& [id, name] : tags_) {
    if (!nodes_[static_cast<std::size_t>(id)].value.allFinite()) out.push_back(name);
  }
  return out;
}

// --- primitives -------------------------------------------------------------

Var matmul(Var a, Var b) {
  Tape& t = *a.tape;
  return t.push(a.value() * b.value(), {a.id, b.id}, [](Tape& t, int self) {
    const auto& in = t.inputs(self);
    const Matrix g = t.grad(self);
    t.grad(in[0]) += g * t.value(in[1]).transpose();
    t.grad(in[1]) += t.value(in[0]).transpose() * g;
  });
}

Var add_bias(Var x, Var bias) {
  Tape& t = *x.tape;
  Matrix out = x.value();
  out.rowwise() += bias.value().col(0).transpose();
  return t.push(std::move(out), {x.id, bias.id}, [](Tape& t, int self) {
    const auto& in = t.inputs(self);
    const Matrix g = t.grad(self);
    t.grad(in[0]) += g;
    t.grad(in[1]).col(0) += g.colwise().sum().transpose();
  });
}

Var tanh(Var x) {
  Tape& t = *x.tape;
  return t.push(x.value().array().tanh().matrix(), {x.id}, [](Tape& t, int self) {
    const auto& y = t.value(self);
    const Matrix g = t.grad(self);
    t.grad(t.inputs(self)[0]).array() += g.array() * (1.0 - y.array().square());
  });
}

Var relu(Var x) {
  Tape& t = *x.tape;
  return t.push(x.value().cwiseMax(0.0), {x.id}, [](Tape& t, int self) {
    const int in = t.inputs(self)[0];
    const Matrix g = t.grad(self);
    t.grad(in).array() += (t.value(in).array() > 0.0).select(g.array(), 0.0);
  });
}

Var add(Var a, Var b) {
  Tape& t = *a.tape;
  return t.push(a.value() + b.value(), {a.id, b.id}, [](Tape& t, int self) {
    const auto& in = t.inputs(self);
    const Matrix g = t.grad(self);
    t.grad(in[0]) += g;
    t.grad(in[1]) += g;
  });
}

Var sub(Var a, Var b) {
  Tape& t = *a.tape;
  return t.push(a.value() - b.value(), {a.id, b.id}, [](Tape& t, int self) {
    const auto& in = t.inputs(self);
    const Matrix g = t.grad(self);
    t.grad(in[0]) += g;
    t.grad(in[1]) -= g;
  });
}

Var mul(Var a, Var b) {
  Tape& t = *a.tape;
  return t.push(a.value().cwiseProduct(b.value()), {a.id, b.id},
                [](Tape& t, int self) {
                  const auto& in = t.inputs(self);
                  const Matrix g = t.grad(self);
                  t.grad(in[0]) += g.cwiseProduct(t.value(in[1]));
                  t.grad(in[1]) += g.cwiseProduct(t.value(in[0]));
                });
}

Var scale(Var a, double s) {
  Tape& t = *a.tape;
  return t.push(a.value() * s, {a.id}, [s](Tape& t, int self) {
    const Matrix g = t.grad(self);
    t.grad(t.inputs(self)[0]) += g * s;
  });
}

Var exp(Var a) {
  Tape& t = *a.tape;
  return t.push(a.value().array().exp().matrix(), {a.id}, [](Tape& t, int self) {
    const Matrix g = t.grad(self);
    t.grad(t.inputs(self)[0]) += g.cwiseProduct(t.value(self));
  });
}

Var square(Var a) {
  Tape& t = *a.tape;
  return t.push(a.value().array().square().matrix(), {a.id}, [](Tape& t, int self) {
    const int in = t.inputs(self)[0];
    const Matrix g = t.grad(self);
    t.grad(in) += 2.0 * g.cwiseProduct(t.value(in));
  });
}

Var minimum(Var a, Var b) {
  Tape& t = *a.tape;
  return t.push(a.value().cwiseMin(b.value()), {a.id, b.id}, [](Tape& t, int self) {
    const auto& in = t.inputs(self);
    const Matrix g = t.grad(self);
    const auto take_a = (t.value(in[0]).array() <= t.value(in[1]).array());
    t.grad(in[0]).array() += take_a.select(g.array(), 0.0);
    t.grad(in[1]).array() += take_a.select(0.0, g.array());
  });
}

Var clip(Var a, double lo, double hi) {
  Tape& t = *a.tape;
  return t.push(a.value().cwiseMax(lo).cwiseMin(hi), {a.id},
                [lo, hi](Tape& t, int self) {
                  const int in = t.inputs(self)[0];
                  const Matrix g = t.grad(self);
                  const auto& x = t.value(in).array();
                  t.grad(in).array() += (x >= lo && x <= hi).select(g.array(), 0.0);
                });
}

Matrix log_softmax_rows(const Matrix& logits) {
  const Vector row_max = logits.rowwise().maxCoeff();
  Matrix shifted = logits.colwise() - row_max;
  const Vector lse = shifted.array().exp().rowwise().sum().log().matrix();
  shifted.colwise() -= lse;
  return shifted;
}

Var log_softmax(Var logits) {
  Tape& t = *logits.tape;
  return t.push(log_softmax_rows(logits.value()), {logits.id}, [](Tape& t, int self) {
    const Matrix g = t.grad(self);
    const Matrix p = t.value(self).array().exp().matrix();
    const Vector gsum = g.rowwise().sum();
    Matrix dx = g - (p.array().colwise() * gsum.array()).matrix();
    t.grad(t.inputs(self)[0]) += dx;
  });
}

Var pick(Var x, std::span<const int> cols) {
  Tape& t = *x.tape;
  const Matrix& xv = x.value();
  if (static_cast<Eigen::Index>(cols.size()) != xv.rows()) {
    throw UsageError("pick: index count does not match row count");
  }
  std::vector<int> idx(cols.begin(), cols.end());
  Matrix out(xv.rows(), 1);
  for (Eigen::Index i = 0; i < xv.rows(); ++i) out(i, 0) = xv(i, idx[static_cast<std::size_t>(i)]);
  return t.push(std::move(out), {x.id}, [idx = std::move(idx)](Tape& t, int self) {
    const Matrix g = t.grad(self);
    Matrix& gx = t.grad(t.inputs(self)[0]);
    for (Eigen::Index i = 0; i < g.rows(); ++i) gx(i, idx[static_cast<std::size_t>(i)]) += g(i, 0);
  });
}

Var row_sum(Var x) {
  Tape& t = *x.tape;
  Matrix out = x.value().rowwise().sum();
  return t.push(std::move(out), {x.id}, [](Tape& t, int self) {
    const int in = t.inputs(self)[0];
    const Matrix g = t.grad(self);
    t.grad(in).colwise() += g.col(0);
  });
}

Var mean(Var x) {
  Tape& t = *x.tape;
  const double n = static_cast<double>(x.value().size());
  Matrix out(1, 1);
  out(0, 0) = x.value().sum() / n;
  return t.push(std::move(out), {x.id}, [n](Tape& t, int self) {
    const double g = t.grad(self)(0, 0);
    t.grad(t.inputs(self)[0]).array() += g / n;
  });
}

Var sum(Var x) {
  Tape& t = *x.tape;
  Matrix out(1, 1);
  out(0, 0) = x.value().sum();
  return t.push(std::move(out), {x.id}, [](Tape& t, int self) {
    const double g = t.grad(self)(0, 0);
    t.grad(t.inputs(self)[0]).array() += g;
  });
}

Var dot_flat(Var a, const Matrix& b) {
  Tape& t = *a.tape;
  Matrix out(1, 1);
  out(0, 0) = a.value().cwiseProduct(b).sum();
  return t.push(std::move(out), {a.id}, [b](Tape& t, int self) {
    const double g = t.grad(self)(0, 0);
    t.grad(t.inputs(self)[0]) += g * b;
  });
}

Var entropy(Var logits) {
  Tape& t = *logits.tape;
  const Matrix logp = log_softmax_rows(logits.value());
  const Matrix p = logp.array().exp().matrix();
  Matrix h = -(p.cwiseProduct(logp)).rowwise().sum();
  return t.push(std::move(h), {logits.id}, [logp, p](Tape& t, int self) {
    const Matrix g = t.grad(self);
    const Matrix& h = t.value(self);
    // dH/dz_j = -p_j (log p_j + H)
    Matrix dz = -(p.array() * (logp.array().colwise() + h.col(0).array())).matrix();
    dz = (dz.array().colwise() * g.col(0).array()).matrix();
    t.grad(t.inputs(self)[0]) += dz;
  });
}

ValueAndGrad value_and_grad(const LossFn& loss_fn, const ParamVector& params) {
  Tape tape;
  Var loss = loss_fn(tape, params);
  if (loss.value().size() != 1) {
    throw UsageError("loss function must return a 1x1 value");
  }
  const double v = loss.scalar();
  if (!std::isfinite(v)) {
    std::string msg = "non-finite loss";
    const auto bad = tape.non_finite_tags();
    if (!bad.empty()) {
      msg += "; offending components:";
      for (const auto& b : bad) msg += " " + b;
    }
    throw NumericError(msg);
  }
  tape.backward(loss);
  return {v, tape.param_grad(params)};
}

Vector finite_difference_grad(const LossFn& loss_fn, ParamVector params,
                              double h) {
  auto eval = [&](const ParamVector& p) {
    Tape tape;
    return loss_fn(tape, p).scalar();
  };
  Vector g(static_cast<Eigen::Index>(params.size()));
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    const double x0 = params.flat()(i);
    params.flat()(i) = x0 + h;
    const double up = eval(params);
    params.flat()(i) = x0 - h;
    const double down = eval(params);
    params.flat()(i) = x0;
    g(i) = (up - down) / (2.0 * h);
  }
  return g;
}

}  // namespace eipolab::funcapprox
