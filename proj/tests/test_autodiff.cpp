// Copyright 2026 The ewae Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <random>

#include "doctest.h"
#include "ewae/autodiff.hpp"
#include "ewae/nn.hpp"
#include "support/gradcheck.hpp"

using namespace ewae;
using ewae::testing::check_input;

namespace {

std::vector<double> vec(std::initializer_list<double> v) { return v; }

}  // namespace

TEST_CASE("elementwise ops match finite differences") {
  const auto x = vec({0.3, -1.2, 0.7, 2.1});
  CHECK(check_input(x, [](Tape&, Var v) { return ad::sum(ad::tanh(v)); }) < 1e-7);
  CHECK(check_input(x, [](Tape&, Var v) { return ad::sum(ad::sigmoid(v)); }) < 1e-7);
  CHECK(check_input(x, [](Tape&, Var v) { return ad::sum(ad::exp(v)); }) < 1e-7);
  CHECK(check_input(x, [](Tape&, Var v) { return ad::dot(v, ad::mul(v, v)); }) < 1e-7);
  CHECK(check_input(x, [](Tape&, Var v) { return ad::nll(v, 2); }) < 1e-7);
  CHECK(check_input(x, [](Tape& t, Var v) {
          return ad::dot(ad::softmax(v), t.constant(vec({1, -2, 3, 0.5})));
        }) < 1e-7);
  CHECK(check_input(x, [](Tape& t, Var v) {
          return ad::cosine(v, t.constant(vec({1, 2, -1, 0.5})));
        }) < 1e-7);
  CHECK(check_input(x, [](Tape& t, Var v) {
          Var a = ad::slice(v, 0, 2), b = ad::slice(v, 2, 2);
          std::vector<Var> xs{a, b};
          return ad::sum(ad::weighted_sum(xs, ad::softmax(t.constant(vec({0.2, -0.4})))));
        }) < 1e-7);
  CHECK(check_input(x, [](Tape&, Var v) {
          return ad::sum(ad::scale_by(v, ad::slice(v, 1, 1)));
        }) < 1e-7);
}

TEST_CASE("clamp has zero gradient outside its bounds") {
  Tape t;
  Var x = t.constant(vec({-3.0, 0.5, 4.0}));
  t.backward(ad::sum(ad::clamp(x, -1.0, 1.0)));
  CHECK(x.grad()[0] == 0.0);
  CHECK(x.grad()[1] == 1.0);
  CHECK(x.grad()[2] == 0.0);
}

TEST_CASE("cosine refuses zero-norm vectors") {
  Tape t;
  Var a = t.constant(vec({0.0, 0.0}));
  Var b = t.constant(vec({1.0, 0.0}));
  CHECK_THROWS_AS(ad::cosine(a, b), std::domain_error);
}

TEST_CASE("gru cell and affine layers match finite differences") {
  ParameterSet ps;
  Rng rng(4);
  GruWeights g = make_gru(ps, "g", 3, 4);
  init_gru(g, rng);
  Linear lin = Linear::make(ps, "lin", 4, 2);
  init_linear(lin, rng);
  const auto x = vec({0.5, -0.2, 0.9});
  const auto h0 = vec({0.1, 0.0, -0.3, 0.2});
  auto loss = [&](bool back) {
    Tape t;
    Var h = ad::gru_cell(g, t.constant(x), t.constant(h0));
    h = ad::gru_cell(g, t.constant(x), h);
    Var out = ad::nll(lin(h), 1);
    if (back) t.backward(out);
    return out.scalar();
  };
  for (Parameter* p : ps.all()) {
    CAPTURE(p->name());
    CHECK(ewae::testing::check_parameter(ps, *p, loss).rel_error < 1e-6);
  }
  CHECK(check_input(h0, [&](Tape& t, Var h) {
          return ad::sum(ad::gru_cell(g, t.constant(x), h));
        }) < 1e-7);
}

TEST_CASE("parameter checksum tracks values") {
  ParameterSet ps;
  Parameter& p = ps.add("p", 2, 2);
  p.value = {1, 2, 3, 4};
  const std::vector<const Parameter*> view{&p};
  const auto before = checksum(view);
  CHECK(checksum(view) == before);
  p.value[3] = 4.0000001;
  CHECK(checksum(view) != before);
  CHECK_THROWS(ps.add("p", 1, 1));
}
