// Copyright 2026 The ewae Authors
// SPDX-License-Identifier: Apache-2.0

#include "ewae/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "ewae/kernels.hpp"

namespace ewae {

Parameter::Parameter(std::string name, std::size_t rows, std::size_t cols)
    : value(rows * cols, 0.0),
      grad(rows * cols, 0.0),
      name_(std::move(name)),
      rows_(rows),
      cols_(cols) {}

Parameter& ParameterSet::add(const std::string& name, std::size_t rows,
                             std::size_t cols) {
  if (find(name) != nullptr) throw std::logic_error("duplicate parameter " + name);
  params_.push_back(std::make_unique<Parameter>(name, rows, cols));
  return *params_.back();
}

Parameter* ParameterSet::find(const std::string& name) {
  for (auto& p : params_)
    if (p->name() == name) return p.get();
  return nullptr;
}

const Parameter* ParameterSet::find(const std::string& name) const {
  for (const auto& p : params_)
    if (p->name() == name) return p.get();
  return nullptr;
}

Parameter& ParameterSet::at(const std::string& name) {
  Parameter* p = find(name);
  if (p == nullptr) throw std::out_of_range("no parameter named " + name);
  return *p;
}

std::vector<Parameter*> ParameterSet::all() {
  std::vector<Parameter*> out;
  out.reserve(params_.size());
  for (auto& p : params_) out.push_back(p.get());
  return out;
}

std::vector<const Parameter*> ParameterSet::all() const {
  std::vector<const Parameter*> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.push_back(p.get());
  return out;
}

std::vector<Parameter*> ParameterSet::with_prefix(std::span<const std::string> prefixes) {
  std::vector<Parameter*> out;
  for (auto& p : params_) {
    for (const auto& pre : prefixes) {
      if (p->name().rfind(pre, 0) == 0) {
        out.push_back(p.get());
        break;
      }
    }
  }
  return out;
}

void ParameterSet::zero_grad() {
  for (auto& p : params_) std::fill(p->grad.begin(), p->grad.end(), 0.0);
}

std::size_t ParameterSet::count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p->size();
  return n;
}

std::uint64_t checksum(std::span<const Parameter* const> params) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const Parameter* p : params) {
    for (double v : p->value) {
      std::uint64_t bits;
      std::memcpy(&bits, &v, sizeof bits);
      for (int i = 0; i < 8; ++i) {
        h ^= (bits >> (8 * i)) & 0xffU;
        h *= 1099511628211ULL;
      }
    }
  }
  return h;
}

// ---------------------------------------------------------------------------

std::span<const double> Var::value() const { return tape_->value(id_); }
std::size_t Var::size() const { return tape_->value(id_).size(); }
double Var::scalar() const {
  auto v = value();
  if (v.size() != 1) throw std::logic_error("Var::scalar on non-scalar");
  return v[0];
}
std::span<const double> Var::grad() const { return tape_->grad(id_); }

Var Tape::constant(std::vector<double> value) { return push(std::move(value), nullptr); }

Var Tape::constant(std::span<const double> value) {
  return push(std::vector<double>(value.begin(), value.end()), nullptr);
}

Var Tape::param(Parameter& p) {
  return push(p.value, [&p](Tape& t, std::size_t self) {
    const auto g = t.grad(self);
    for (std::size_t i = 0; i < g.size(); ++i) p.grad[i] += g[i];
  });
}

Var Tape::push(std::vector<double> value, Backward backward) {
  nodes_.push_back(Node{std::move(value), {}, std::move(backward)});
  return Var(this, nodes_.size() - 1);
}

std::vector<double>& Tape::grad_mut(std::size_t id) {
  Node& n = nodes_[id];
  if (n.grad.empty()) n.grad.assign(n.value.size(), 0.0);
  return n.grad;
}

void Tape::backward(Var root, double seed) {
  if (root.size() != 1) throw std::logic_error("backward(double) needs a scalar root");
  const double s[1] = {seed};
  backward(root, std::span<const double>(s, 1));
}

void Tape::backward(Var root, std::span<const double> seed) {
  if (root.tape() != this) throw std::logic_error("root belongs to another tape");
  auto& g = grad_mut(root.id());
  if (seed.size() != g.size()) throw std::logic_error("seed size mismatch");
  for (std::size_t i = 0; i < g.size(); ++i) g[i] += seed[i];
  for (std::size_t id = root.id() + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (n.grad.empty() || !n.backward) continue;
    n.backward(*this, id);
  }
}

// ---------------------------------------------------------------------------

namespace ad {
namespace {

void check_same(Var a, Var b, const char* op) {
  if (a.tape() != b.tape()) throw std::logic_error(std::string(op) + ": mixed tapes");
  if (a.size() != b.size())
    throw std::invalid_argument(std::string(op) + ": size mismatch " +
                                std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()));
}

template <typename F>
Var unary(Var a, F f, std::function<double(double x, double y)> dfdx) {
  Tape& t = *a.tape();
  const auto av = a.value();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = f(av[i]);
  const std::size_t ia = a.id();
  return t.push(std::move(out), [ia, dfdx = std::move(dfdx)](Tape& t, std::size_t self) {
    const auto g = t.grad(self);
    const auto x = t.value(ia);
    const auto y = t.value(self);
    auto& ga = t.grad_mut(ia);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * dfdx(x[i], y[i]);
  });
}

}  // namespace

Var add(Var a, Var b) {
  check_same(a, b, "add");
  Tape& t = *a.tape();
  std::vector<double> out(a.value().begin(), a.value().end());
  const auto bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  const std::size_t ia = a.id(), ib = b.id();
  return t.push(std::move(out), [ia, ib](Tape& t, std::size_t self) {
    const auto g = t.grad(self);
    auto& ga = t.grad_mut(ia);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    auto& gb = t.grad_mut(ib);
    for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
  });
}

Var sub(Var a, Var b) {
  check_same(a, b, "sub");
  Tape& t = *a.tape();
  std::vector<double> out(a.value().begin(), a.value().end());
  const auto bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= bv[i];
  const std::size_t ia = a.id(), ib = b.id();
  return t.push(std::move(out), [ia, ib](Tape& t, std::size_t self) {
    const auto g = t.grad(self);
    auto& ga = t.grad_mut(ia);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    auto& gb = t.grad_mut(ib);
    for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
  });
}

Var mul(Var a, Var b) {
  check_same(a, b, "mul");
  Tape& t = *a.tape();
  std::vector<double> out(a.value().begin(), a.value().end());
  const auto bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  const std::size_t ia = a.id(), ib = b.id();
  return t.push(std::move(out), [ia, ib](Tape& t, std::size_t self) {
    const auto g = t.grad(self);
    const auto av = t.value(ia);
    const auto bv = t.value(ib);
    auto& ga = t.grad_mut(ia);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
    auto& gb = t.grad_mut(ib);
    for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
  });
}

Var scale(Var a, double c) {
  Tape& t = *a.tape();
  std::vector<double> out(a.value().begin(), a.value().end());
  for (double& v : out) v *= c;
  const std::size_t ia = a.id();
  return t.push(std::move(out), [ia, c](Tape& t, std::size_t self) {
    kernels::axpy(c, t.grad(self), t.grad_mut(ia));
  });
}

Var scale_by(Var a, Var s) {
  if (s.size() != 1) throw std::invalid_argument("scale_by: scale must be scalar");
  Tape& t = *a.tape();
  const double c = s.scalar();
  std::vector<double> out(a.value().begin(), a.value().end());
  for (double& v : out) v *= c;
  const std::size_t ia = a.id(), is = s.id();
  return t.push(std::move(out), [ia, is](Tape& t, std::size_t self) {
    const auto g = t.grad(self);
    const double c = t.value(is)[0];
    t.grad_mut(is)[0] += kernels::dot(g, t.value(ia));
    kernels::axpy(c, g, t.grad_mut(ia));
  });
}

Var add_n(std::span<const Var> xs) {
  if (xs.empty()) throw std::invalid_argument("add_n: empty");
  Tape& t = *xs[0].tape();
  std::vector<double> out(xs[0].value().begin(), xs[0].value().end());
  std::vector<std::size_t> ids{xs[0].id()};
  for (std::size_t k = 1; k < xs.size(); ++k) {
    check_same(xs[0], xs[k], "add_n");
    const auto v = xs[k].value();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += v[i];
    ids.push_back(xs[k].id());
  }
  return t.push(std::move(out), [ids = std::move(ids)](Tape& t, std::size_t self) {
    const auto g = t.grad(self);
    for (std::size_t id : ids) {
      auto& gi = t.grad_mut(id);
      for (std::size_t i = 0; i < g.size(); ++i) gi[i] += g[i];
    }
  });
}

Var mean_n(std::span<const Var> xs) {
  return scale(add_n(xs), 1.0 / static_cast<double>(xs.size()));
}

Var sigmoid(Var a) {
  return unary(
      a, [](double x) { return 1.0 / (1.0 + std::exp(-x)); },
      [](double, double y) { return y * (1.0 - y); });
}

Var tanh(Var a) {
  return unary(
      a, [](double x) { return std::tanh(x); },
      [](double, double y) { return 1.0 - y * y; });
}

Var relu(Var a) {
  return unary(
      a, [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var exp(Var a) {
  return unary(
      a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Var clamp(Var a, double lo, double hi) {
  return unary(
      a, [lo, hi](double x) { return std::clamp(x, lo, hi); },
      [lo, hi](double x, double) { return (x < lo || x > hi) ? 0.0 : 1.0; });
}

Var concat(std::span<const Var> xs) {
  if (xs.empty()) throw std::invalid_argument("concat: empty");
  Tape& t = *xs[0].tape();
  std::vector<double> out;
  std::vector<std::pair<std::size_t, std::size_t>> parts;  // id, length
  for (const Var& x : xs) {
    const auto v = x.value();
    out.insert(out.end(), v.begin(), v.end());
    parts.emplace_back(x.id(), v.size());
  }
  return t.push(std::move(out), [parts = std::move(parts)](Tape& t, std::size_t self) {
    const auto g = t.grad(self);
    std::size_t off = 0;
    for (auto [id, len] : parts) {
      auto& gi = t.grad_mut(id);
      for (std::size_t i = 0; i < len; ++i) gi[i] += g[off + i];
      off += len;
    }
  });
}

Var concat(std::initializer_list<Var> xs) {
  return concat(std::span<const Var>(xs.begin(), xs.size()));
}

Var slice(Var a, std::size_t offset, std::size_t len) {
  if (offset + len > a.size()) throw std::out_of_range("slice out of range");
  Tape& t = *a.tape();
  const auto av = a.value();
  std::vector<double> out(av.begin() + offset, av.begin() + offset + len);
  const std::size_t ia = a.id();
  return t.push(std::move(out), [ia, offset](Tape& t, std::size_t self) {
    const auto g = t.grad(self);
    auto& ga = t.grad_mut(ia);
    for (std::size_t i = 0; i < g.size(); ++i) ga[offset + i] += g[i];
  });
}

Var matvec(Parameter& w, Var x) {
  if (w.cols() != x.size())
    throw std::invalid_argument("matvec: " + w.name() + " expects " +
                                std::to_string(w.cols()) + " inputs, got " +
                                std::to_string(x.size()));
  Tape& t = *x.tape();
  std::vector<double> out(w.rows());
  const auto& k = kernels::active();
  k.gemv(w.value.data(), w.rows(), w.cols(), x.value().data(), out.data(), false);
  const std::size_t ix = x.id();
  return t.push(std::move(out), [&w, ix](Tape& t, std::size_t self) {
    const auto g = t.grad(self);
    const auto& k = kernels::active();
    k.ger_acc(g.data(), w.rows(), t.value(ix).data(), w.cols(), w.grad.data());
    k.gemv_t_acc(w.value.data(), w.rows(), w.cols(), g.data(), t.grad_mut(ix).data());
  });
}

Var affine(Parameter& w, Var x, Parameter& b) {
  if (w.cols() != x.size() || b.size() != w.rows())
    throw std::invalid_argument("affine: shape mismatch for " + w.name());
  Tape& t = *x.tape();
  std::vector<double> out(b.value);
  const auto& k = kernels::active();
  k.gemv(w.value.data(), w.rows(), w.cols(), x.value().data(), out.data(), true);
  const std::size_t ix = x.id();
  return t.push(std::move(out), [&w, &b, ix](Tape& t, std::size_t self) {
    const auto g = t.grad(self);
    const auto& k = kernels::active();
    for (std::size_t i = 0; i < g.size(); ++i) b.grad[i] += g[i];
    k.ger_acc(g.data(), w.rows(), t.value(ix).data(), w.cols(), w.grad.data());
    k.gemv_t_acc(w.value.data(), w.rows(), w.cols(), g.data(), t.grad_mut(ix).data());
  });
}

Var embedding(Tape& t, Parameter& table, std::size_t row) {
  if (row >= table.rows())
    throw std::out_of_range("embedding row " + std::to_string(row) + " >= " +
                            std::to_string(table.rows()));
  const std::size_t d = table.cols();
  const auto first = table.value.begin() + static_cast<std::ptrdiff_t>(row * d);
  std::vector<double> out(first, first + static_cast<std::ptrdiff_t>(d));
  return t.push(std::move(out), [&table, row, d](Tape& t, std::size_t self) {
    const auto g = t.grad(self);
    double* dst = table.grad.data() + row * d;
    for (std::size_t i = 0; i < d; ++i) dst[i] += g[i];
  });
}

Var gru_cell(const GruWeights& w, Var x, Var h) {
  const std::size_t H = w.hidden();
  if (x.size() != w.input() || h.size() != H)
    throw std::invalid_argument("gru_cell: shape mismatch for " + w.w_input->name());
  Tape& t = *x.tape();
  const auto& k = kernels::active();

  // Pre-activations from the input and the hidden state, kept for backward.
  std::vector<double> ax(w.b_input->value), ah(w.b_hidden->value);
  k.gemv(w.w_input->value.data(), 3 * H, w.input(), x.value().data(), ax.data(), true);
  k.gemv(w.w_hidden->value.data(), 3 * H, H, h.value().data(), ah.data(), true);

  // Saved activations: [r | u | n] followed by the output.
  auto saved = std::make_shared<std::vector<double>>(4 * H);
  auto& s = *saved;
  const auto hv = h.value();
  std::vector<double> out(H);
  for (std::size_t i = 0; i < H; ++i) {
    const double r = 1.0 / (1.0 + std::exp(-(ax[i] + ah[i])));
    const double u = 1.0 / (1.0 + std::exp(-(ax[H + i] + ah[H + i])));
    const double n = std::tanh(ax[2 * H + i] + r * ah[2 * H + i]);
    s[i] = r;
    s[H + i] = u;
    s[2 * H + i] = n;
    s[3 * H + i] = ah[2 * H + i];
    out[i] = (1.0 - u) * n + u * hv[i];
  }

  const std::size_t ix = x.id(), ih = h.id();
  return t.push(std::move(out), [w, ix, ih, saved, H](Tape& t, std::size_t self) {
    const auto g = t.grad(self);
    const auto& s = *saved;
    const auto hv = t.value(ih);
    std::vector<double> dax(3 * H), dah(3 * H);
    auto& gh = t.grad_mut(ih);
    for (std::size_t i = 0; i < H; ++i) {
      const double r = s[i], u = s[H + i], n = s[2 * H + i], hn = s[3 * H + i];
      const double dn = g[i] * (1.0 - u) * (1.0 - n * n);
      const double du = g[i] * (hv[i] - n) * u * (1.0 - u);
      const double dr = dn * hn * r * (1.0 - r);
      gh[i] += g[i] * u;
      dax[i] = dr;
      dah[i] = dr;
      dax[H + i] = du;
      dah[H + i] = du;
      dax[2 * H + i] = dn;
      dah[2 * H + i] = dn * r;
    }
    const auto& k = kernels::active();
    const std::size_t I = w.input();
    for (std::size_t i = 0; i < 3 * H; ++i) {
      w.b_input->grad[i] += dax[i];
      w.b_hidden->grad[i] += dah[i];
    }
    k.ger_acc(dax.data(), 3 * H, t.value(ix).data(), I, w.w_input->grad.data());
    k.gemv_t_acc(w.w_input->value.data(), 3 * H, I, dax.data(), t.grad_mut(ix).data());
    k.ger_acc(dah.data(), 3 * H, hv.data(), H, w.w_hidden->grad.data());
    k.gemv_t_acc(w.w_hidden->value.data(), 3 * H, H, dah.data(), gh.data());
  });
}

Var dot(Var a, Var b) {
  check_same(a, b, "dot");
  Tape& t = *a.tape();
  const double v = kernels::dot(a.value(), b.value());
  const std::size_t ia = a.id(), ib = b.id();
  return t.push({v}, [ia, ib](Tape& t, std::size_t self) {
    const double g = t.grad(self)[0];
    kernels::axpy(g, t.value(ib), t.grad_mut(ia));
    kernels::axpy(g, t.value(ia), t.grad_mut(ib));
  });
}

Var sum(Var a) {
  Tape& t = *a.tape();
  double v = 0.0;
  for (double x : a.value()) v += x;
  const std::size_t ia = a.id();
  return t.push({v}, [ia](Tape& t, std::size_t self) {
    const double g = t.grad(self)[0];
    for (double& x : t.grad_mut(ia)) x += g;
  });
}

Var cosine(Var a, Var b, double min_norm) {
  check_same(a, b, "cosine");
  Tape& t = *a.tape();
  const auto av = a.value(), bv = b.value();
  const double na = std::sqrt(kernels::dot(av, av));
  const double nb = std::sqrt(kernels::dot(bv, bv));
  if (na < min_norm || nb < min_norm)
    throw std::domain_error("cosine: vector norm below guard");
  const double ab = kernels::dot(av, bv);
  const double c = ab / (na * nb);
  const std::size_t ia = a.id(), ib = b.id();
  return t.push({c}, [ia, ib, na, nb, c](Tape& t, std::size_t self) {
    const double g = t.grad(self)[0];
    const auto av = t.value(ia), bv = t.value(ib);
    // d cos / d a = b / (|a||b|) - cos * a / |a|^2
    auto& ga = t.grad_mut(ia);
    for (std::size_t i = 0; i < av.size(); ++i)
      ga[i] += g * (bv[i] / (na * nb) - c * av[i] / (na * na));
    auto& gb = t.grad_mut(ib);
    for (std::size_t i = 0; i < bv.size(); ++i)
      gb[i] += g * (av[i] / (na * nb) - c * bv[i] / (nb * nb));
  });
}

Var softmax(Var a) {
  Tape& t = *a.tape();
  const auto av = a.value();
  const double mx = *std::max_element(av.begin(), av.end());
  std::vector<double> out(av.size());
  double z = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) z += (out[i] = std::exp(av[i] - mx));
  for (double& v : out) v /= z;
  const std::size_t ia = a.id();
  return t.push(std::move(out), [ia](Tape& t, std::size_t self) {
    const auto g = t.grad(self);
    const auto y = t.value(self);
    const double gy = kernels::dot(g, y);
    auto& ga = t.grad_mut(ia);
    for (std::size_t i = 0; i < y.size(); ++i) ga[i] += y[i] * (g[i] - gy);
  });
}

Var nll(Var logits, std::size_t target) {
  Tape& t = *logits.tape();
  const auto lv = logits.value();
  if (target >= lv.size()) throw std::out_of_range("nll: target out of range");
  const double mx = *std::max_element(lv.begin(), lv.end());
  double z = 0.0;
  for (double v : lv) z += std::exp(v - mx);
  const double lse = mx + std::log(z);
  const std::size_t il = logits.id();
  return t.push({lse - lv[target]}, [il, target, lse](Tape& t, std::size_t self) {
    const double g = t.grad(self)[0];
    const auto lv = t.value(il);
    auto& gl = t.grad_mut(il);
    for (std::size_t i = 0; i < lv.size(); ++i) gl[i] += g * std::exp(lv[i] - lse);
    gl[target] -= g;
  });
}

Var weighted_sum(std::span<const Var> xs, Var w) {
  if (xs.empty() || w.size() != xs.size())
    throw std::invalid_argument("weighted_sum: weight count mismatch");
  Tape& t = *w.tape();
  const auto wv = w.value();
  std::vector<double> out(xs[0].size(), 0.0);
  std::vector<std::size_t> ids;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    check_same(xs[0], xs[k], "weighted_sum");
    kernels::axpy(wv[k], xs[k].value(), out);
    ids.push_back(xs[k].id());
  }
  const std::size_t iw = w.id();
  return t.push(std::move(out), [ids = std::move(ids), iw](Tape& t, std::size_t self) {
    const auto g = t.grad(self);
    const auto wv = t.value(iw);
    auto& gw = t.grad_mut(iw);
    for (std::size_t k = 0; k < ids.size(); ++k) {
      gw[k] += kernels::dot(g, t.value(ids[k]));
      kernels::axpy(wv[k], g, t.grad_mut(ids[k]));
    }
  });
}

}  // namespace ad
}  // namespace ewae
