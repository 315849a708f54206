// Copyright 2026 The ewae Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "ewae/autodiff.hpp"
#include "ewae/random.hpp"

namespace ewae {

enum class Activation { kNone, kTanh, kRelu };

struct Linear {
  Parameter* w = nullptr;
  Parameter* b = nullptr;

  static Linear make(ParameterSet& ps, const std::string& name, std::size_t in,
                     std::size_t out);
  Var operator()(Var x) const { return ad::affine(*w, x, *b); }
  std::size_t in() const { return w->cols(); }
  std::size_t out() const { return w->rows(); }
};

// Stack of Linear layers. Hidden layers use `hidden`; the last uses `last`.
struct Mlp {
  std::vector<Linear> layers;
  Activation hidden = Activation::kTanh;
  Activation last = Activation::kNone;

  static Mlp make(ParameterSet& ps, const std::string& prefix,
                  const std::vector<std::size_t>& widths, Activation hidden,
                  Activation last);
  Var operator()(Var x) const;
  std::vector<Parameter*> parameters() const;
};

Var activate(Var x, Activation a);

// U(-scale/sqrt(fan_in), +scale/sqrt(fan_in)) for weights, zeros for biases.
void init_uniform(Parameter& p, Rng& rng, double scale = 1.0);
void init_linear(const Linear& l, Rng& rng, double scale = 1.0);
void init_gru(const GruWeights& g, Rng& rng);
GruWeights make_gru(ParameterSet& ps, const std::string& prefix, std::size_t input,
                    std::size_t hidden);

}  // namespace ewae
