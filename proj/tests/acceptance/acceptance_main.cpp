// Copyright 2026 The ewae Authors
// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite. Prints one PASS/FAIL line per criterion and exits non-zero
// if any criterion fails. Pass criterion numbers as arguments to run a subset
// (e.g. `acceptance 1 7 11`).

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ewae/adversarial.hpp"
#include "ewae/curriculum.hpp"
#include "ewae/metrics.hpp"
#include "ewae/pipeline.hpp"
#include "ewae/retrieval.hpp"
#include "ewae/run_config.hpp"
#include "support/fixtures.hpp"
#include "support/gradcheck.hpp"

namespace fs = std::filesystem;
using namespace ewae;
using namespace ewae::testing;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---------------------------------------------------------------------------
// 1. Gradient suite

Outcome gradient_suite() {
  auto corpus = toy_corpus();
  ModelConfig cfg = tiny_config(corpus.vocab.size());
  cfg.latent_dim = 8;
  cfg.critic_clip = 1.0;
  Model m(cfg);
  m.init();
  Rng rng(3);
  for (Parameter* p : m.critic_parameters())
    for (double& v : p->value) v = 0.5 * rng.normal();

  const auto& pair = corpus.pairs[3];  // 4-token context, 3-token response
  const std::size_t H = cfg.hidden_size, L = cfg.latent_dim;
  auto wave = [](std::size_t n, double phase) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = std::sin(phase + 0.9 * static_cast<double>(i));
    return v;
  };
  const auto wh = wave(H, 0.1), wl = wave(L, 0.7), z0 = wave(L, 1.9);

  double worst = 0.0;
  std::string worst_name;
  std::size_t checked = 0;
  auto check_all = [&](const std::string& what, const std::vector<Parameter*>& params,
                       const LossFn& loss) {
    for (Parameter* p : params) {
      const auto r = check_parameter(m.params(), *p, loss, 25);
      checked += r.checked;
      if (r.rel_error > worst) {
        worst = r.rel_error;
        worst_name = what + ":" + p->name();
      }
    }
  };
  auto track_input = [&](const std::string& what, double err) {
    if (err > worst) {
      worst = err;
      worst_name = what;
    }
  };

  check_all("encode_utterance", m.seq().parameters(), [&](bool bw) {
    Tape t;
    Var y = ad::dot(m.seq().encode_utterance(t, pair.context[0]), t.constant(wh));
    if (bw) t.backward(y);
    return y.scalar();
  });
  check_all("encode_context", m.seq().parameters(), [&](bool bw) {
    Tape t;
    Var y = ad::dot(m.seq().encode_context(t, corpus.pairs[2].context), t.constant(wh));
    if (bw) t.backward(y);
    return y.scalar();
  });
  check_all("decode", m.seq().parameters(), [&](bool bw) {
    Tape t;
    Var y = m.seq().reconstruction_nll(t, t.constant(z0), m.seq().encode_context(t, pair.context),
                                       pair.response);
    if (bw) t.backward(y);
    return y.scalar();
  });
  check_all("recognition_forward", m.latent().recognition_parameters(), [&](bool bw) {
    Tape t;
    Var hc = t.constant(wave(H, 0.3));
    std::vector<Var> hr{t.constant(wave(H, 2.2)), t.constant(wave(H, 4.0))};
    const auto comps = m.latent().recognition_forward(hc, hr);
    Var y = ad::add(ad::dot(comps[0].mu, t.constant(wl)), ad::sum(comps[1].log_var));
    if (bw) t.backward(y);
    return y.scalar();
  });
  check_all("generator_Q", m.latent().q_parameters(), [&](bool bw) {
    Tape t;
    Var y = ad::dot(m.latent().generator_q(t.constant(z0)), t.constant(wl));
    if (bw) t.backward(y);
    return y.scalar();
  });
  track_input("generator_Q:jvp", check_input(z0, [&](Tape& t, Var e) {
                return ad::dot(m.latent().generator_q(e), t.constant(wl));
              }));
  check_all("critic_forward", m.critic_parameters(), [&](bool bw) {
    Tape t;
    Var y = m.critic()(t.constant(z0), t.constant(wave(H, 0.5)));
    if (bw) t.backward(y);
    return y.scalar();
  });
  track_input("critic_forward:z", check_input(z0, [&](Tape& t, Var z) {
                return m.critic()(z, t.constant(wave(H, 0.5)));
              }));
  return {worst < 1e-3, fmt("max rel err %.2e at %s over %zu coordinates", worst,
                            worst_name.c_str(), checked)};
}

// ---------------------------------------------------------------------------
// 2. Simplex suite

Outcome simplex_suite() {
  ModelConfig cfg = tiny_config(10);
  ParameterSet ps;
  LatentNets nets(ps, cfg);
  Rng init(5);
  nets.init_recognition(init);
  nets.init_prior(init);
  std::mt19937_64 gen(77);
  std::normal_distribution<double> nd(0.0, 4.0);
  auto draw = [&](std::size_t n) {
    std::vector<double> v(n);
    for (auto& x : v) x = nd(gen);
    return v;
  };
  double worst_sum = 0.0, min_w = 1.0;
  for (int i = 0; i < 1000; ++i) {
    Tape t;
    Var hc = t.constant(draw(cfg.hidden_size));
    std::vector<Var> list{hc};
    for (std::size_t j = 0; j < cfg.k_exemplars; ++j) list.push_back(t.constant(draw(cfg.hidden_size)));
    for (Var w : {posterior_weights(hc, list), nets.prior_forward(hc).weights}) {
      double s = 0.0;
      for (double x : w.value()) {
        s += x;
        min_w = std::min(min_w, x);
      }
      worst_sum = std::max(worst_sum, std::abs(s - 1.0));
    }
  }
  return {min_w > 0.0 && worst_sum < 1e-6,
          fmt("2000 weight vectors, min weight %.3g, max |sum-1| %.2e", min_w, worst_sum)};
}

// ---------------------------------------------------------------------------
// 3. Mixture-sampling statistics

Outcome mixture_statistics() {
  const std::vector<std::vector<double>> mu{{1.0, -2.0, 0.5, 3.0}, {-3.0, 0.0, 2.0, -1.0},
                                            {0.5, 4.0, -1.0, 0.0}};
  const std::vector<std::vector<double>> lv{{0.0, 0.5, -1.0, 0.2}, {0.3, -0.2, 0.0, 1.0},
                                            {-0.5, 1.0, 0.2, -0.3}};
  const std::vector<double> s{0.5, 0.3, 0.2};
  const std::size_t N = 10000, L = 4;
  std::vector<double> mean(L, 0.0);
  Rng rng(11);
  for (std::size_t n = 0; n < N; ++n) {
    Tape t;
    MixtureSpec m;
    for (std::size_t i = 0; i < 3; ++i) m.components.push_back({t.constant(mu[i]), t.constant(lv[i])});
    m.weights = t.constant(s);
    Var e = sample_posterior_noise(m, rng, PosteriorMode::kWeightedSum);
    for (std::size_t j = 0; j < L; ++j) mean[j] += e[j] / static_cast<double>(N);
  }
  double worst_z = 0.0;
  for (std::size_t j = 0; j < L; ++j) {
    double expect = 0.0, var = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
      expect += s[i] * mu[i][j];
      var += s[i] * s[i] * std::exp(lv[i][j]);
    }
    worst_z = std::max(worst_z, std::abs(mean[j] - expect) / (std::sqrt(var / N)));
  }

  std::size_t first = 0;
  for (std::size_t n = 0; n < N; ++n) {
    Tape t;
    MixtureSpec prior;
    prior.components.push_back({t.constant(std::vector<double>{-6, -6}), t.constant(std::vector<double>{0, 0})});
    prior.components.push_back({t.constant(std::vector<double>{6, 6}), t.constant(std::vector<double>{0, 0})});
    prior.weights = t.constant(std::vector<double>{0.5, 0.5});
    if (sample_prior_noise(prior, rng)[0] < 0) ++first;
  }
  const double frac = static_cast<double>(first) / N;
  return {worst_z < 4.0 && frac >= 0.4 && frac <= 0.6,
          fmt("MC mean within %.2f sigma/sqrt(N); prior modes split %.3f / %.3f", worst_z, frac,
              1.0 - frac)};
}

// ---------------------------------------------------------------------------
// 4. Curriculum internal consistency

Outcome curriculum_consistency() {
  auto corpus = toy_corpus();
  double worst = 0.0;
  {
    Model m(tiny_config(corpus.vocab.size(), 0));
    m.init();
    for (const auto& ex : toy_examples(corpus.pairs, 0)) {
      Rng a(21), b(21);
      Tape ta, tb;
      worst = std::max(worst, std::abs(phase1_loss(ta, m, ex, a).scalar() -
                                       phase1_loss_via_mixture(tb, m, ex, b).scalar()));
    }
  }
  Model m(tiny_config(corpus.vocab.size(), 2));
  m.init();
  const auto ex = toy_examples(corpus.pairs, 2);
  TrainConfig tc;
  tc.batch_size = 2;
  tc.critic_steps = 1;
  CurriculumSchedule sc;
  sc.phase1_epochs = sc.phase2_epochs = sc.phase3_epochs = 2;
  Trainer tr(m, tc, sc, ex, ex);
  tr.run();
  bool preserved = tr.state().handoffs.size() == 2;
  for (const auto& h : tr.state().handoffs) preserved &= h.checksum_end == h.checksum_start;
  return {worst < 1e-6 && preserved,
          fmt("k=0 paths differ by %.2e; %zu hand-offs, checksums %s", worst,
              tr.state().handoffs.size(), preserved ? "equal" : "DIFFER")};
}

// ---------------------------------------------------------------------------
// 5. Overfit oracle

Outcome overfit_oracle() {
  auto corpus = toy_corpus();
  ModelConfig cfg = tiny_config(corpus.vocab.size(), 0);
  cfg.embedding_dim = 16;
  cfg.hidden_size = 32;
  cfg.latent_dim = 8;
  cfg.ffn_hidden = 32;
  Model m(cfg);
  m.init();
  const auto ex = toy_examples(corpus.pairs, 0);
  TrainConfig tc;
  tc.batch_size = ex.size();
  CurriculumSchedule sc;
  sc.lr_phase1 = 1e-2;
  Trainer tr(m, tc, sc, ex, {});
  const double log_v = std::log(static_cast<double>(cfg.vocab_size));
  const double initial = tr.phase1_step(ex).recon_per_token();
  std::size_t reached = 0;
  double nll = 0.0;
  for (std::size_t step = 2; step <= 500; ++step) {
    nll = tr.phase1_step(ex).recon_per_token();
    if (nll < 0.1) {
      reached = step;
      break;
    }
  }
  const bool init_ok = std::abs(initial - log_v) / log_v < 0.10;
  return {init_ok && reached > 0,
          fmt("initial %.3f vs log|V| %.3f; per-token NLL %.4f %s step %zu", initial, log_v, nll,
              reached ? "at" : "still above 0.1 at", reached ? reached : std::size_t{500})};
}

// ---------------------------------------------------------------------------
// 6. WGAN mechanics

Outcome wgan_mechanics() {
  auto corpus = toy_corpus();
  ModelConfig cfg = tiny_config(corpus.vocab.size(), 2);
  cfg.critic_clip = 0.05;
  Model m(cfg);
  m.init();
  auto max_abs = [&] {
    double a = 0.0;
    for (const Parameter* p : m.critic_parameters())
      for (double v : p->value) a = std::max(a, std::abs(v));
    return a;
  };
  const auto ex = toy_examples(corpus.pairs, 2);
  TrainConfig tc;
  tc.batch_size = 5;
  CurriculumSchedule sc;
  sc.lr_critic = 0.02;
  Trainer tr(m, tc, sc, ex, {});
  bool clipped = true;
  for (int i = 0; i < 20; ++i) {
    tr.critic_step(ex);
    clipped &= max_abs() <= cfg.critic_clip;
  }

  Rng rng(4);
  bool antisym = true;
  for (int trial = 0; trial < 20; ++trial) {
    Tape t;
    std::vector<Var> a, b, h;
    for (int i = 0; i < 4; ++i) {
      a.push_back(t.constant(rng.normal_vector(cfg.latent_dim)));
      b.push_back(t.constant(rng.normal_vector(cfg.latent_dim)));
      h.push_back(t.constant(rng.normal_vector(cfg.hidden_size)));
    }
    antisym &= disc_loss(m.critic(), a, b, h).scalar() == -disc_loss(m.critic(), b, a, h).scalar();
  }

  // Fresh critic, fixed separable batches, plain ascent with clipping.
  Model fresh(cfg);
  fresh.init();
  const auto params = fresh.critic_parameters();
  RmsProp opt;
  auto disc = [&](bool bw) {
    Tape t;
    std::vector<Var> post, prior, h;
    for (int i = 0; i < 4; ++i) {
      post.push_back(t.constant(std::vector<double>(cfg.latent_dim, 1.0 + 0.1 * i)));
      prior.push_back(t.constant(std::vector<double>(cfg.latent_dim, -1.0 - 0.1 * i)));
      h.push_back(t.constant(std::vector<double>(cfg.hidden_size, 0.3)));
    }
    Var d = disc_loss(fresh.critic(), post, prior, h);
    if (bw) t.backward(d, -1.0);
    return d.scalar();
  };
  double prev = disc(false);
  const double start = prev;
  bool monotone = true;
  std::size_t increasing = 0;
  for (int step = 0; step < 50; ++step) {
    fresh.params().zero_grad();
    disc(true);
    std::vector<std::vector<double>> before;
    for (auto* p : params) before.push_back(p->value);
    opt.step(params, 1e-3);
    fresh.critic().clip(cfg.critic_clip);
    bool moved = false;
    for (std::size_t i = 0; i < params.size(); ++i) moved |= params[i]->value != before[i];
    const double now = disc(false);
    if (moved) {
      monotone &= now > prev;
      increasing += now > prev;
    } else {
      monotone &= now == prev;  // every weight saturated at the clip bound
    }
    prev = now;
  }
  return {clipped && antisym && monotone && prev > start,
          fmt("clip box held: %s; antisymmetry exact: %s; disc %.4g -> %.4g, %zu strict increases",
              clipped ? "yes" : "NO", antisym ? "yes" : "NO", start, prev, increasing)};
}

// ---------------------------------------------------------------------------
// 7. Metric oracles

Outcome metric_oracles() {
  auto words = [](const std::string& s) { return tokenize(s); };
  std::vector<std::string> failures;
  auto expect = [&](bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  };
  auto near = [](double a, double b) { return std::abs(a - b) < 1e-9; };

  expect(near(sentence_bleu(words("a b c d"), words("a b c d")), 1.0), "bleu self");
  expect(near(sentence_bleu(words("a b c"), words("x y z")), std::cbrt(1.0 / 24.0)), "bleu disjoint");
  expect(near(sentence_bleu(words("a b"), words("a b c d")), std::exp(-1.0)), "bleu brevity");
  SampleSet prf{"c", {words("a b c")}, words("a b c")};
  for (int i = 0; i < 9; ++i) prf.samples.push_back(words("x y z"));
  const auto p = bleu_prf(prf);
  expect(near(p.recall, 1.0) && near(p.precision, (1.0 + 9.0 * std::cbrt(1.0 / 24.0)) / 10.0),
         "bleu prf");

  Embeddings emb;
  emb.set("a", {1, 0});
  emb.set("b", {0, 1});
  emb.set("c", {1, 1});
  emb.set("d", {2, 1});
  const auto bow = bow_pair(words("a b"), words("c d"), emb);
  expect(near(bow.greedy, (2 / std::sqrt(5.0) + 1 / std::sqrt(2.0)) / 2), "bow greedy");
  expect(near(bow.extrema, 3 / std::sqrt(10.0)), "bow extrema");
  expect(near(bow.average, 5 / std::sqrt(26.0)), "bow average");
  const auto same = bow_pair(words("a d"), words("a d"), emb);
  expect(near(same.greedy, 1.0) && near(same.average, 1.0), "bow identity");
  const auto orth = bow_pair(words("a"), words("b"), emb);
  expect(orth.greedy == 0 && orth.extrema == 0 && orth.average == 0, "bow orthogonal");

  expect(distinct_ratio(words("a b a b"), 1) == 0.5, "distinct-1");
  expect(distinct_ratio(words("a b a b"), 2) == 2.0 / 3.0, "distinct-2");
  SampleSet ten{"c", std::vector<Words>(10, words("a b c a")), words("a")};
  expect(distinct(ten).inter1 == 3.0 / 40.0, "inter-dist identical samples");
  SampleSet uniq{"c", {words("p q r s")}, words("p")};
  expect(distinct(uniq).intra1 == 1.0, "intra-dist distinct tokens");

  std::mt19937_64 rng(7);
  const std::vector<std::string> vocab{"a", "b", "c", "d", "e", "f", "zz"};
  const auto rand_emb = Embeddings::random(std::vector<std::string>(vocab.begin(), vocab.end() - 1), 8, 3);
  std::size_t out_of_range = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    SampleSet set;
    auto sentence = [&](std::size_t min_len) {
      Words out(min_len + rng() % 8);
      for (auto& x : out) x = vocab[rng() % vocab.size()];
      return out;
    };
    set.reference = sentence(1);
    for (std::size_t s = 0, n = 1 + rng() % 10; s < n; ++s) set.samples.push_back(sentence(0));
    const std::vector<SampleSet> one{set};
    for (double v : evaluate_sets(one, rand_emb).csv_values()) out_of_range += (v < 0.0 || v > 1.0);
  }
  expect(out_of_range == 0, "range property");
  std::string detail = failures.empty() ? "all hand oracles match; 1000 random sets in [0, 1]"
                                        : "failed:";
  for (const auto& f : failures) detail += " " + f;
  return {failures.empty(), detail};
}

// ---------------------------------------------------------------------------
// 8. Retrieval oracle

Outcome retrieval_oracle() {
  const std::vector<ContextResponsePair> pairs{
      make_pair(10, {"the cat sat on the mat"}, "r0"),
      make_pair(11, {"a dog sat", "on a log"}, "r1"),
      make_pair(12, {"cats and dogs and cats"}, "r2"),
      make_pair(13, {"the mat was red"}, "r3"),
      make_pair(14, {"nothing in common here"}, "r4"),
  };
  const double k1 = 1.2, b = 0.75;
  std::vector<std::vector<std::string>> docs;
  double avgdl = 0.0;
  for (const auto& p : pairs) {
    std::vector<std::string> d;
    for (const auto& u : p.context) d.insert(d.end(), u.words.begin(), u.words.end());
    avgdl += static_cast<double>(d.size()) / pairs.size();
    docs.push_back(d);
  }
  const auto idx = Bm25Index::build(pairs, {k1, b});
  double worst = 0.0;
  bool order_ok = true;
  for (const std::string q : {"the mat", "sat on a log", "cats", "red cat"}) {
    const auto terms = tokenize(q);
    std::vector<std::pair<double, PairId>> expected;
    for (std::size_t d = 0; d < docs.size(); ++d) {
      double s = 0.0;
      for (const auto& term : terms) {
        double df = 0;
        for (const auto& doc : docs) df += std::count(doc.begin(), doc.end(), term) > 0;
        const double idf = std::log((docs.size() - df + 0.5) / (df + 0.5) + 1.0);
        const double tf = static_cast<double>(std::count(docs[d].begin(), docs[d].end(), term));
        s += idf * tf * (k1 + 1) / (tf + k1 * (1 - b + b * docs[d].size() / avgdl));
      }
      expected.emplace_back(-s, pairs[d].pair_id);
      worst = std::max(worst, std::abs(s - idx.score(terms, d)));
    }
    std::sort(expected.begin(), expected.end());
    const auto got = idx.retrieve(make_pair(99, {q}, "x"), pairs.size(), false);
    for (std::size_t r = 0; r < pairs.size(); ++r) order_ok &= got.exemplars[r].pair_id == expected[r].second;
  }
  bool self_removed = true;
  for (const auto& p : pairs)
    for (const auto& e : idx.retrieve(p, 4, true).exemplars) self_removed &= e.pair_id != p.pair_id;
  return {worst < 1e-12 && order_ok && self_removed,
          fmt("max |score - formula| %.1e; ranking %s; self-exclusion %s", worst,
              order_ok ? "matches" : "DIFFERS", self_removed ? "holds" : "BROKEN")};
}

// ---------------------------------------------------------------------------
// 9 and 10. Desk-scale ablations on the synthetic task

RunConfig desk_config(std::uint64_t seed) {
  RunConfig c;
  c.merge_text(
      "synth_contexts = 100\nsynth_modes = 3\n"
      "embedding_dim = 32\nhidden_size = 48\nlatent_dim = 16\nffn_hidden = 48\n"
      "k_exemplars = 2\nmax_decode_len = 20\n"
      "phase1_epochs = 5\nphase2_epochs = 5\nphase3_epochs = 30\npatience = 0\n"
      "lr_phase1 = 3e-3\nlr_phase2 = 3e-3\nlr_phase3 = 3e-3\n"
      "lr_critic = 1e-3\ncritic_clip = 0.05\ncritic_steps = 5\nbatch_size = 32\n"
      "samples = 10\neval_embedding_dim = 32\n",
      "acceptance");
  c.set("seed", std::to_string(seed));
  c.validate();
  return c;
}

struct DeskRun {
  double valid_nll = 0.0;
  double inter_dist2 = 0.0;
  double multi_mode = 0.0;  // fraction of test contexts with >= 2 gold modes
  std::size_t steps = 0;
  double seconds = 0.0;
};

struct DeskData {
  SyntheticCorpus corpus;
  Vocabulary vocab;
};

DeskData desk_data(const RunConfig& cfg) {
  DeskData d{generate_synthetic(cfg.synthetic()), {}};
  d.vocab = fit_vocabulary(cfg, d.corpus.train);
  for (auto* split : {&d.corpus.train, &d.corpus.valid, &d.corpus.test})
    d.vocab.index(*split, cfg.limits());
  return d;
}

DeskRun desk_run(const RunConfig& cfg, const DeskData& d) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto res = train_run(cfg, d.corpus.train, d.corpus.valid, d.vocab);
  DeskRun r;
  r.valid_nll = res.final_valid_nll;
  r.steps = res.state.global_step;
  const auto sets = generate_sets(*res.model, d.vocab, d.corpus.test, cfg.get_size("samples"),
                                  cfg.get_u64("seed") + 1000);
  const auto report = evaluate_sets(sets, eval_embeddings(cfg, d.vocab), cfg.inter_dist_mode());
  r.inter_dist2 = report.inter_dist2;
  std::size_t multi = 0;
  for (const auto& s : sets) multi += modes_recovered(s.samples, d.corpus.manifest.at(s.context_id)) >= 2;
  r.multi_mode = static_cast<double>(multi) / static_cast<double>(sets.size());
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

struct SeedRuns {
  DeskRun full, no_exemplar, no_curriculum;
};

const std::vector<std::uint64_t> kSeeds{1, 2, 3};

// Runs each seed's three trainings once; criteria 9 and 10 share the full run.
const std::map<std::uint64_t, SeedRuns>& desk_runs() {
  static const std::map<std::uint64_t, SeedRuns> runs = [] {
    std::map<std::uint64_t, SeedRuns> out;
    for (std::uint64_t seed : kSeeds) {
      const RunConfig full = desk_config(seed);
      const DeskData data = desk_data(full);
      SeedRuns s;
      s.full = desk_run(full, data);
      RunConfig noex = full;
      noex.set("no_exemplar", "true");
      s.no_exemplar = desk_run(noex, data);
      // Same total epochs, all spent in phase III.
      RunConfig nocurr = full;
      nocurr.set("no_curriculum", "true");
      nocurr.set("phase3_epochs",
                 std::to_string(full.get_size("phase1_epochs") + full.get_size("phase2_epochs") +
                                full.get_size("phase3_epochs")));
      s.no_curriculum = desk_run(nocurr, data);
      std::printf("  seed %llu: full inter-dist2 %.4f multi-mode %.2f valid %.4f (%zu steps, %.0fs) | "
                  "w/o examplar inter-dist2 %.4f (%.0fs) | w/o Curriculum valid %.4f (%zu steps, %.0fs)\n",
                  static_cast<unsigned long long>(seed), s.full.inter_dist2, s.full.multi_mode,
                  s.full.valid_nll, s.full.steps, s.full.seconds, s.no_exemplar.inter_dist2,
                  s.no_exemplar.seconds, s.no_curriculum.valid_nll, s.no_curriculum.steps,
                  s.no_curriculum.seconds);
      std::fflush(stdout);
      out.emplace(seed, s);
    }
    return out;
  }();
  return runs;
}

Outcome diversity_ablation() {
  std::size_t held = 0;
  std::string detail;
  for (const auto& [seed, s] : desk_runs()) {
    const bool ok = s.full.inter_dist2 > s.no_exemplar.inter_dist2 && s.full.multi_mode >= 0.30;
    held += ok;
    detail += fmt("%sseed %llu: %.3f vs %.3f, multi-mode %.2f %s", detail.empty() ? "" : "; ",
                  static_cast<unsigned long long>(seed), s.full.inter_dist2,
                  s.no_exemplar.inter_dist2, s.full.multi_mode, ok ? "ok" : "no");
  }
  return {held >= 2, fmt("%zu/3 seeds hold (", held) + detail + ")"};
}

Outcome curriculum_ablation() {
  std::size_t held = 0;
  bool same_budget = true;
  std::string detail;
  for (const auto& [seed, s] : desk_runs()) {
    same_budget &= s.full.steps == s.no_curriculum.steps;
    const bool ok = s.full.valid_nll <= s.no_curriculum.valid_nll;
    held += ok;
    detail += fmt("%sseed %llu: %.4f vs %.4f %s", detail.empty() ? "" : "; ",
                  static_cast<unsigned long long>(seed), s.full.valid_nll,
                  s.no_curriculum.valid_nll, ok ? "ok" : "no");
  }
  return {held >= 2 && same_budget,
          fmt("%zu/3 seeds hold, step budgets %s (", held, same_budget ? "equal" : "DIFFER") +
              detail + ")"};
}

// ---------------------------------------------------------------------------
// 11. Sweep harness

Outcome sweep_harness() {
  const fs::path dir = fs::temp_directory_path() / "ewae_acceptance_sweep";
  fs::remove_all(dir);
  fs::create_directories(dir);
  {
    std::ofstream cfg(dir / "tiny.cfg");
    cfg << "synth_contexts = 8\nembedding_dim = 8\nhidden_size = 12\nlatent_dim = 4\n"
           "ffn_hidden = 12\nmax_decode_len = 10\nphase1_epochs = 1\nphase2_epochs = 1\n"
           "phase3_epochs = 1\nbatch_size = 16\ncritic_steps = 1\nsamples = 5\n"
           "eval_embedding_dim = 8\n";
  }
  const std::string cli = std::string("\"") + EWAE_CLI_PATH + "\" --config \"" +
                          (dir / "tiny.cfg").string() + "\" ";
  const std::string quiet = " > \"" + (dir / "cli.log").string() + "\" 2>&1";
  if (std::system((cli + "synth --out-dir \"" + dir.string() + "\"" + quiet).c_str()) != 0)
    return {false, "synth failed"};
  const int rc = std::system((cli + "sweep-k --train \"" + (dir / "train.jsonl").string() +
                              "\" --valid \"" + (dir / "valid.jsonl").string() + "\" --test \"" +
                              (dir / "test.jsonl").string() + "\" --out-dir \"" +
                              (dir / "runs").string() + "\"" + quiet)
                                 .c_str());
  if (!WIFEXITED(rc) || WEXITSTATUS(rc) != 0) return {false, "sweep-k exited with failure"};
  std::ifstream in(dir / "runs" / "sweep_k.csv");
  std::string header, line;
  std::getline(in, header);
  const auto n_cols = static_cast<std::size_t>(std::count(header.begin(), header.end(), ',')) + 1;
  std::size_t rows = 0, bad_cells = 0;
  std::set<std::string> ks;
  while (std::getline(in, line)) {
    ++rows;
    std::stringstream ss(line);
    std::string cell;
    std::size_t cols = 0;
    while (std::getline(ss, cell, ',')) {
      if (cols == 0) ks.insert(cell);
      bad_cells += cell.empty();
      ++cols;
    }
    bad_cells += cols != n_cols;
  }
  bool has_metrics = true;
  for (const auto& c : MetricReport::csv_columns()) has_metrics &= header.find(c) != std::string::npos;
  const bool ok = rows == 5 && bad_cells == 0 && has_metrics && ks == std::set<std::string>{"1", "2", "3", "4", "5"};
  return {ok, fmt("%zu rows x %zu columns, k = 1..5 %s, %zu empty cells", rows, n_cols,
                  ks.size() == 5 ? "present" : "MISSING", bad_cells)};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "gradient suite", gradient_suite},
      {2, "simplex suite", simplex_suite},
      {3, "mixture-sampling statistics", mixture_statistics},
      {4, "curriculum internal consistency", curriculum_consistency},
      {5, "overfit oracle", overfit_oracle},
      {6, "WGAN mechanics", wgan_mechanics},
      {7, "metric oracles", metric_oracles},
      {8, "retrieval oracle", retrieval_oracle},
      {9, "diversity ablation (full vs w/o examplar)", diversity_ablation},
      {10, "curriculum ablation (full vs w/o Curriculum)", curriculum_ablation},
      {11, "sweep-k harness", sweep_harness},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : all) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %d %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(),
                secs);
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
