// Copyright 2026 The ewae Authors
// SPDX-License-Identifier: Apache-2.0

#include "ewae/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace ewae {

Linear Linear::make(ParameterSet& ps, const std::string& name, std::size_t in,
                    std::size_t out) {
  return Linear{&ps.add(name + ".w", out, in), &ps.add(name + ".b", out, 1)};
}

Mlp Mlp::make(ParameterSet& ps, const std::string& prefix,
              const std::vector<std::size_t>& widths, Activation hidden, Activation last) {
  if (widths.size() < 2) throw std::invalid_argument("Mlp needs at least two widths");
  Mlp m;
  m.hidden = hidden;
  m.last = last;
  for (std::size_t i = 0; i + 1 < widths.size(); ++i)
    m.layers.push_back(
        Linear::make(ps, prefix + ".l" + std::to_string(i + 1), widths[i], widths[i + 1]));
  return m;
}

Var activate(Var x, Activation a) {
  switch (a) {
    case Activation::kTanh: return ad::tanh(x);
    case Activation::kRelu: return ad::relu(x);
    case Activation::kNone: break;
  }
  return x;
}

Var Mlp::operator()(Var x) const {
  for (std::size_t i = 0; i < layers.size(); ++i)
    x = activate(layers[i](x), i + 1 == layers.size() ? last : hidden);
  return x;
}

std::vector<Parameter*> Mlp::parameters() const {
  std::vector<Parameter*> out;
  for (const auto& l : layers) {
    out.push_back(l.w);
    out.push_back(l.b);
  }
  return out;
}

void init_uniform(Parameter& p, Rng& rng, double scale) {
  const double a = scale / std::sqrt(static_cast<double>(p.cols()));
  std::uniform_real_distribution<double> dist(-a, a);
  for (double& v : p.value) v = dist(rng.engine());
}

void init_linear(const Linear& l, Rng& rng, double scale) {
  init_uniform(*l.w, rng, scale);
  std::fill(l.b->value.begin(), l.b->value.end(), 0.0);
}

GruWeights make_gru(ParameterSet& ps, const std::string& prefix, std::size_t input,
                    std::size_t hidden) {
  return GruWeights{&ps.add(prefix + ".wi", 3 * hidden, input),
                    &ps.add(prefix + ".bi", 3 * hidden, 1),
                    &ps.add(prefix + ".wh", 3 * hidden, hidden),
                    &ps.add(prefix + ".bh", 3 * hidden, 1)};
}

void init_gru(const GruWeights& g, Rng& rng) {
  // Both matrices share the 1/sqrt(hidden) range, as in common GRU defaults.
  const double a = 1.0 / std::sqrt(static_cast<double>(g.hidden()));
  std::uniform_real_distribution<double> dist(-a, a);
  for (Parameter* p : {g.w_input, g.b_input, g.w_hidden, g.b_hidden})
    for (double& v : p->value) v = dist(rng.engine());
}

}  // namespace ewae
