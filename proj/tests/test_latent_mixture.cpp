// Copyright 2026 The ewae Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <numeric>

#include "doctest.h"
#include "ewae/error.hpp"
#include "ewae/latent_mixture.hpp"
#include "support/fixtures.hpp"
#include "support/gradcheck.hpp"

using namespace ewae;
using namespace ewae::testing;

namespace {

std::vector<double> wave(std::size_t n, double phase) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = std::cos(phase + 0.7 * static_cast<double>(i));
  return v;
}

struct Nets {
  ModelConfig cfg;
  ParameterSet ps;
  std::unique_ptr<LatentNets> nets;
  explicit Nets(std::size_t n_prior = 0) {
    cfg = tiny_config(20);
    cfg.n_prior_components = n_prior;
    nets = std::make_unique<LatentNets>(ps, cfg);
    Rng rng(4);
    nets->init_recognition(rng);
    nets->init_prior(rng);
    nets->init_generators(rng);
  }
};

// Mixture over constants on the given tape.
MixtureSpec constant_mixture(Tape& t, const std::vector<std::vector<double>>& mu,
                             const std::vector<std::vector<double>>& log_var,
                             const std::vector<double>& weights) {
  MixtureSpec m;
  for (std::size_t i = 0; i < mu.size(); ++i)
    m.components.push_back({t.constant(mu[i]), t.constant(log_var[i])});
  m.weights = t.constant(weights);
  return m;
}

}  // namespace

TEST_CASE("posterior weights: softmax of cosines against a hand oracle") {
  Tape t;
  Var h = t.constant(std::vector<double>{1, 0});
  std::vector<Var> list{t.constant(std::vector<double>{1, 0}), t.constant(std::vector<double>{0, 1}),
                        t.constant(std::vector<double>{-1, 0})};
  Var s = posterior_weights(h, list);
  CHECK(s[0] == doctest::Approx(0.6652).epsilon(1e-4));
  CHECK(s[1] == doctest::Approx(0.2447).epsilon(1e-3));
  CHECK(s[2] == doctest::Approx(0.0900).epsilon(1e-3));
  const double e = std::exp(1.0);
  CHECK(s[0] == doctest::Approx(e / (e + 1 + 1 / e)).epsilon(1e-12));
}

TEST_CASE("gold weight is e/(e+k) when every exemplar context is orthogonal") {
  for (std::size_t k = 1; k <= 4; ++k) {
    Tape t;
    std::vector<double> hc(5, 0.0);
    hc[0] = 2.0;
    std::vector<Var> list{t.constant(hc)};
    for (std::size_t i = 1; i <= k; ++i) {
      std::vector<double> v(5, 0.0);
      v[i] = 1.0 + static_cast<double>(i);
      list.push_back(t.constant(v));
    }
    Var s = posterior_weights(t.constant(hc), list);
    const double e = std::exp(1.0);
    CHECK(s[0] == doctest::Approx(e / (e + static_cast<double>(k))).epsilon(1e-12));
  }
}

TEST_CASE("zero-norm context is a numeric error") {
  Tape t;
  std::vector<Var> list{t.constant(std::vector<double>{0, 0})};
  CHECK_THROWS_AS(posterior_weights(t.constant(std::vector<double>{1, 0}), list), NumericError);
}

TEST_CASE("prior weights follow the component logits") {
  Nets n(2);
  for (Parameter* p : n.nets->prior_parameters())
    if (p->name().rfind("pri.head", 0) == 0) std::fill(p->value.begin(), p->value.end(), 0.0);
  n.ps.at("pri.head1.b").value[0] = std::log(2.0);
  Tape t;
  const auto m = n.nets->prior_forward(t.constant(wave(n.cfg.hidden_size, 0.1)));
  REQUIRE(m.components.size() == 2);
  CHECK(m.weights[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(m.weights[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("simplex: 1000 random inputs give positive weights summing to one") {
  Nets n;
  std::mt19937_64 gen(99);
  std::normal_distribution<double> nd(0.0, 3.0);
  auto rand_vec = [&](std::size_t d) {
    std::vector<double> v(d);
    for (auto& x : v) x = nd(gen);
    return v;
  };
  const std::size_t H = n.cfg.hidden_size;
  for (int draw = 0; draw < 1000; ++draw) {
    Tape t;
    Var hc = t.constant(rand_vec(H));
    std::vector<Var> list{hc};
    for (std::size_t i = 0; i < n.cfg.k_exemplars; ++i) list.push_back(t.constant(rand_vec(H)));
    for (Var w : {posterior_weights(hc, list), n.nets->prior_forward(hc).weights}) {
      double s = 0;
      for (double x : w.value()) {
        CHECK(x > 0.0);
        s += x;
      }
      CHECK(std::abs(s - 1.0) < 1e-6);
    }
  }
}

TEST_CASE("component counts") {
  Nets n;
  Tape t;
  Var hc = t.constant(wave(n.cfg.hidden_size, 0.3));
  CHECK(n.nets->prior_forward(hc).components.size() == n.cfg.k_exemplars + 1);
  std::vector<Var> hr{hc, hc, hc};
  const auto comps = n.nets->recognition_forward(hc, hr);
  CHECK(comps.size() == 3);
  for (const auto& c : comps) {
    CHECK(c.mu.size() == n.cfg.latent_dim);
    for (double lv : c.log_var.value()) CHECK(std::abs(lv) <= n.cfg.log_var_clamp);
  }
}

TEST_CASE("weighted-sum draws have the mixture-mean expectation") {
  const std::vector<std::vector<double>> mu{{1.0, -2.0, 0.5}, {-3.0, 0.0, 2.0}, {0.5, 4.0, -1.0}};
  const std::vector<std::vector<double>> lv{{0.0, 0.5, -1.0}, {0.3, -0.2, 0.0}, {-0.5, 1.0, 0.2}};
  const std::vector<double> s{0.5, 0.3, 0.2};
  const std::size_t N = 10000;
  std::vector<double> mean(3, 0.0);
  Rng rng(17);
  for (std::size_t n = 0; n < N; ++n) {
    Tape t;
    Var e = sample_posterior_noise(constant_mixture(t, mu, lv, s), rng, PosteriorMode::kWeightedSum);
    for (std::size_t j = 0; j < 3; ++j) mean[j] += e[j] / static_cast<double>(N);
  }
  for (std::size_t j = 0; j < 3; ++j) {
    double expect = 0, var = 0;
    for (std::size_t i = 0; i < 3; ++i) {
      expect += s[i] * mu[i][j];
      var += s[i] * s[i] * std::exp(lv[i][j]);
    }
    CHECK(std::abs(mean[j] - expect) < 4.0 * std::sqrt(var) / std::sqrt(static_cast<double>(N)));
  }
}

TEST_CASE("weighted-sum draw has d eps / d mu_i = s_i") {
  Tape t;
  const std::vector<double> s{0.6, 0.25, 0.15};
  auto m = constant_mixture(t, {{0, 1}, {2, 3}, {4, 5}}, {{0, 0}, {0, 0}, {0, 0}}, s);
  Rng rng(2);
  t.backward(ad::sum(sample_posterior_noise(m, rng, PosteriorMode::kWeightedSum)));
  for (std::size_t i = 0; i < 3; ++i)
    for (double g : m.components[i].mu.grad()) CHECK(g == doctest::Approx(s[i]).epsilon(1e-12));
}

TEST_CASE("categorical posterior draw comes from one component") {
  Tape t;
  auto m = constant_mixture(t, {{-10, -10}, {10, 10}}, {{-8, -8}, {-8, -8}}, {0.5, 0.5});
  Rng rng(3);
  std::size_t high = 0;
  for (int i = 0; i < 400; ++i) {
    std::vector<double> noise;
    Var e = sample_posterior_noise(m, rng, PosteriorMode::kCategorical, &noise);
    CHECK(noise.size() == 2);
    CHECK(std::abs(std::abs(e[0]) - 10.0) < 0.5);
    if (e[0] > 0) ++high;
  }
  CHECK(high > 120);
  CHECK(high < 280);
}

TEST_CASE("prior with equal weights is bimodal") {
  Tape t;
  auto m = constant_mixture(t, {{-5, -5}, {5, 5}}, {{0, 0}, {0, 0}}, {0.5, 0.5});
  Rng rng(8);
  const int N = 10000;
  int first = 0, between = 0;
  for (int i = 0; i < N; ++i) {
    Var e = sample_prior_noise(m, rng);
    if (e[0] < 0) ++first;
    if (std::abs(e[0]) < 1.0) ++between;
  }
  const double frac = static_cast<double>(first) / N;
  CHECK(frac >= 0.40);
  CHECK(frac <= 0.60);
  CHECK(between < N / 100);  // modes stay separated: no mass averaged in between
}

TEST_CASE("latent networks match finite differences") {
  Nets n;
  const std::size_t H = n.cfg.hidden_size, L = n.cfg.latent_dim;
  const auto hc = wave(H, 0.2), hr = wave(H, 1.1), w = wave(L, 2.0);

  SUBCASE("recognition_forward") {
    LossFn loss = [&](bool bw) {
      Tape t;
      Var c = t.constant(hc);
      std::vector<Var> rs{t.constant(hr), c};
      const auto comps = n.nets->recognition_forward(c, rs);
      Var y = ad::add(ad::dot(comps[0].mu, t.constant(w)), ad::sum(comps[1].log_var));
      if (bw) t.backward(y);
      return y.scalar();
    };
    for (Parameter* p : n.nets->recognition_parameters()) {
      CAPTURE(p->name());
      CHECK(check_parameter(n.ps, *p, loss).rel_error < 1e-3);
    }
  }
  SUBCASE("prior_forward") {
    LossFn loss = [&](bool bw) {
      Tape t;
      const auto m = n.nets->prior_forward(t.constant(hc));
      Var y = ad::add(ad::dot(m.components[1].mu, t.constant(w)),
                      ad::dot(m.weights, t.constant(std::vector<double>{1.0, -0.5, 2.0})));
      if (bw) t.backward(y);
      return y.scalar();
    };
    for (Parameter* p : n.nets->prior_parameters()) {
      CAPTURE(p->name());
      CHECK(check_parameter(n.ps, *p, loss).rel_error < 1e-3);
    }
  }
  SUBCASE("generator Q: parameters and Jacobian-vector product") {
    const auto eps = wave(L, 0.6);
    LossFn loss = [&](bool bw) {
      Tape t;
      Var y = ad::dot(n.nets->generator_q(t.constant(eps)), t.constant(w));
      if (bw) t.backward(y);
      return y.scalar();
    };
    for (Parameter* p : n.nets->q_parameters()) {
      CAPTURE(p->name());
      CHECK(check_parameter(n.ps, *p, loss).rel_error < 1e-3);
    }
    CHECK(check_input(eps, [&](Tape& t, Var e) {
            return ad::dot(n.nets->generator_q(e), t.constant(w));
          }) < 1e-3);
  }
  SUBCASE("posterior weights with respect to the context") {
    CHECK(check_input(hc, [&](Tape& t, Var c) {
            std::vector<Var> list{c, t.constant(hr), t.constant(wave(H, 3.0))};
            return ad::dot(posterior_weights(c, list),
                           t.constant(std::vector<double>{0.3, -1.0, 2.0}));
          }) < 1e-3);
  }
}
