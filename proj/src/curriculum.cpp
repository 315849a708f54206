// Copyright 2026 The ewae Authors
// SPDX-License-Identifier: Apache-2.0

#include "ewae/curriculum.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <ostream>
#include <unordered_map>

#include "ewae/error.hpp"

namespace ewae {

const char* phase_name(Phase p) {
  switch (p) {
    case Phase::kI: return "I";
    case Phase::kII: return "II";
    case Phase::kIII: return "III";
    case Phase::kDone: return "done";
  }
  return "?";
}

Phase phase_from_name(const std::string& s) {
  if (s == "I" || s == "1") return Phase::kI;
  if (s == "II" || s == "2") return Phase::kII;
  if (s == "III" || s == "3") return Phase::kIII;
  if (s == "done") return Phase::kDone;
  throw DataError("unknown phase tag '" + s + "'");
}

void CurriculumSchedule::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw ConfigError(std::string(name) + " must be a positive finite number");
  };
  positive(lr_phase1, "lr_phase1");
  positive(lr_phase2, "lr_phase2");
  positive(lr_phase3, "lr_phase3");
  positive(lr_critic, "lr_critic");
  std::size_t planned = phase3_epochs;
  if (runs(Phase::kI)) planned += phase1_epochs;
  if (runs(Phase::kII)) planned += phase2_epochs;
  if (planned == 0) throw ConfigError("schedule runs zero epochs");
}

bool CurriculumSchedule::runs(Phase p) const {
  switch (p) {
    case Phase::kI: return !skip_all_curriculum && !skip_phase1;
    case Phase::kII: return !skip_all_curriculum && !skip_phase2;
    case Phase::kIII: return true;
    case Phase::kDone: return false;
  }
  return false;
}

std::vector<Example> attach_exemplars(std::span<const ContextResponsePair> queries,
                                      std::span<const ContextResponsePair> pool,
                                      const Bm25Index& index, std::size_t k,
                                      bool exclude_self) {
  std::unordered_map<PairId, const ContextResponsePair*> by_id;
  for (const auto& p : pool) by_id.emplace(p.pair_id, &p);
  std::vector<Example> out;
  out.reserve(queries.size());
  for (const auto& q : queries) {
    Example ex{&q, {}};
    if (k > 0) {
      for (const Exemplar& e : index.retrieve(q, k, exclude_self).exemplars) {
        auto it = by_id.find(e.pair_id);
        if (it == by_id.end())
          throw DataError("exemplar pair " + std::to_string(e.pair_id) +
                          " is not in the training pool");
        ex.exemplars.push_back(it->second);
      }
    }
    out.push_back(std::move(ex));
  }
  return out;
}

namespace {

std::size_t target_tokens(const Example& ex) { return ex.pair->response.tokens.size() + 1; }

// Posterior over the gold response (index 0) and every exemplar response.
MixtureSpec full_posterior(Tape& t, const Model& m, const Example& ex, Var h_c) {
  std::vector<Var> hc_list{h_c};
  std::vector<Var> hr_list{m.seq().encode_utterance(t, ex.pair->response)};
  for (const ContextResponsePair* e : ex.exemplars) {
    hc_list.push_back(m.seq().encode_context(t, e->context));
    hr_list.push_back(m.seq().encode_utterance(t, e->response));
  }
  MixtureSpec post;
  post.components = m.latent().recognition_forward(h_c, hr_list);
  post.weights = posterior_weights(h_c, hc_list);
  return post;
}

MixtureSpec constant_mixture(Tape& t, const MixtureValues& v) {
  MixtureSpec out;
  for (std::size_t i = 0; i < v.mu.size(); ++i)
    out.components.push_back({t.constant(v.mu[i]), t.constant(v.log_var[i])});
  out.weights = t.constant(v.weights);
  return out;
}

// Everything phase III needs from one example except the critic terms, so
// the critic can be updated between building this and finishing the loss.
struct Phase3Forward {
  Var recon, z_post, z_prior, h_c_const;
  MixtureValues post, prior;
};

Phase3Forward phase3_forward(Tape& t, const Model& m, const Example& ex, Rng& rng) {
  Phase3Forward f;
  Var h_c = m.seq().encode_context(t, ex.pair->context);
  const MixtureSpec post = full_posterior(t, m, ex, h_c);
  f.z_post = m.latent().generator_q(
      sample_posterior_noise(post, rng, m.config().posterior_mode));
  f.recon = m.seq().reconstruction_nll(t, f.z_post, h_c, ex.pair->response);
  const MixtureSpec prior = m.latent().prior_forward(h_c);
  f.z_prior = m.latent().generator_g(sample_prior_noise(prior, rng));
  // The critic sees h(c) as data: no critic gradient reaches the encoders.
  f.h_c_const = t.constant(h_c.value());
  f.post = snapshot(post);
  f.prior = snapshot(prior);
  return f;
}

Var critic_gap(const Model& m, Var z_post, Var z_prior, Var h_c) {
  return ad::sub(m.critic()(z_post, h_c), m.critic()(z_prior, h_c));
}

double now_seconds() {
  using namespace std::chrono;
  return duration<double>(steady_clock::now().time_since_epoch()).count();
}

void require_batch(std::span<const Example> batch, const char* who) {
  if (batch.empty()) throw std::invalid_argument(std::string(who) + ": empty batch");
}

}  // namespace

Var phase1_loss(Tape& t, const Model& m, const Example& ex, Rng& rng) {
  Var h_c = m.seq().encode_context(t, ex.pair->context);
  Var h_r = m.seq().encode_utterance(t, ex.pair->response);
  const std::vector<Var> hr{h_r};
  const auto comps = m.latent().recognition_forward(h_c, hr);
  const auto eta = rng.normal_vector(m.config().latent_dim);
  Var z = m.latent().generator_q(reparameterize(comps[0], eta));
  return m.seq().reconstruction_nll(t, z, h_c, ex.pair->response);
}

Var phase1_loss_via_mixture(Tape& t, const Model& m, const Example& ex, Rng& rng) {
  Example gold_only{ex.pair, {}};
  Var h_c = m.seq().encode_context(t, ex.pair->context);
  const MixtureSpec post = full_posterior(t, m, gold_only, h_c);
  Var z = m.latent().generator_q(
      sample_posterior_noise(post, rng, PosteriorMode::kWeightedSum));
  return m.seq().reconstruction_nll(t, z, h_c, ex.pair->response);
}

Phase2Terms phase2_terms(Tape& t, const Model& m, const Example& ex, Rng& rng) {
  if (ex.exemplars.empty()) throw DataError("phase II needs retrieved exemplars");
  Var h_c = m.seq().encode_context(t, ex.pair->context);
  std::vector<Var> hc_list, hr_list;
  for (const ContextResponsePair* e : ex.exemplars) {
    hc_list.push_back(m.seq().encode_context(t, e->context));
    hr_list.push_back(m.seq().encode_utterance(t, e->response));
  }
  // Normalized over the exemplars only: the gold pair is not part of this sum.
  Var s = posterior_weights(h_c, hc_list);
  const auto comps = m.latent().recognition_forward(h_c, hr_list);
  std::vector<Var> nlls;
  Phase2Terms out;
  for (std::size_t i = 0; i < comps.size(); ++i) {
    const auto eta = rng.normal_vector(m.config().latent_dim);
    Var z = m.latent().generator_q(reparameterize(comps[i], eta));
    nlls.push_back(m.seq().reconstruction_nll(t, z, h_c, ex.exemplars[i]->response));
    out.nlls.push_back(nlls.back().scalar());
  }
  out.loss = ad::weighted_sum(nlls, s);
  out.weights.assign(s.value().begin(), s.value().end());
  return out;
}

Phase3Terms phase3_terms(Tape& t, const Model& m, const Example& ex, Rng& rng) {
  Phase3Forward f = phase3_forward(t, m, ex, rng);
  Phase3Terms out;
  out.recon = f.recon;
  out.disc = critic_gap(m, f.z_post, f.z_prior, f.h_c_const);
  out.total = phase3_loss(out.recon, out.disc);
  out.z_post = f.z_post;
  out.z_prior = f.z_prior;
  out.h_c = f.h_c_const;
  return out;
}

std::pair<double, std::size_t> posterior_mean_nll(const Model& m, const Example& ex) {
  Tape t;
  Var h_c = m.seq().encode_context(t, ex.pair->context);
  const MixtureSpec post = full_posterior(t, m, ex, h_c);
  std::vector<Var> mus;
  for (const auto& c : post.components) mus.push_back(c.mu);
  Var z = m.latent().generator_q(ad::weighted_sum(mus, post.weights));
  Var nll = m.seq().reconstruction_nll(t, z, h_c, ex.pair->response);
  return {nll.scalar(), target_tokens(ex)};
}

double validation_nll(const Model& m, std::span<const Example> examples) {
  if (examples.empty()) throw std::invalid_argument("validation_nll: no examples");
  double total = 0.0;
  std::size_t tokens = 0;
  for (const Example& ex : examples) {
    const auto [nll, n] = posterior_mean_nll(m, ex);
    total += nll;
    tokens += n;
  }
  return total / static_cast<double>(tokens);
}

double StepStats::recon_per_token() const {
  return tokens == 0 ? 0.0
                     : recon * static_cast<double>(examples) / static_cast<double>(tokens);
}

// ---------------------------------------------------------------------------

Trainer::Trainer(Model& model, TrainConfig cfg, CurriculumSchedule schedule,
                 std::vector<Example> train, std::vector<Example> valid)
    : model_(model),
      cfg_(std::move(cfg)),
      schedule_(schedule),
      train_(std::move(train)),
      valid_(std::move(valid)) {
  schedule_.validate();
  if (cfg_.batch_size == 0) throw ConfigError("batch_size must be positive");
  if (cfg_.critic_steps == 0) throw ConfigError("critic_steps must be positive");
  if (!(cfg_.grad_clip >= 0.0)) throw ConfigError("grad_clip must be non-negative");
  if (train_.empty()) throw DataError("no training examples");
  const std::size_t k = model_.config().k_exemplars;
  for (const auto* set : {&train_, &valid_})
    for (const Example& ex : *set)
      if (ex.exemplars.size() != k)
        throw DataError("example " + std::to_string(ex.pair->pair_id) + " carries " +
                        std::to_string(ex.exemplars.size()) + " exemplars, model expects " +
                        std::to_string(k));
  state_.rng = Rng(cfg_.seed);
  state_.optimizer = RmsProp(cfg_.rms_rho, cfg_.rms_eps);
  state_.critic_optimizer = RmsProp(cfg_.rms_rho, cfg_.rms_eps);
  state_.phase = schedule_.runs(Phase::kI) ? Phase::kI
                 : schedule_.runs(Phase::kII) && k > 0 ? Phase::kII
                                                        : Phase::kIII;
  wall_start_ = now_seconds();
}

StepStats Trainer::phase1_step(std::span<const Example> batch) {
  require_batch(batch, "phase1_step");
  model_.params().zero_grad();
  const double w = 1.0 / static_cast<double>(batch.size());
  StepStats s;
  for (const Example& ex : batch) {
    Tape t;
    Var loss = phase1_loss(t, model_, ex, state_.rng);
    t.backward(loss, w);
    s.recon += loss.scalar() * w;
    s.tokens += target_tokens(ex);
  }
  s.total = s.recon;
  s.examples = batch.size();
  auto params = model_.shared_parameters();
  clip_grad_norm(params, cfg_.grad_clip);
  state_.optimizer.step(params, schedule_.lr_phase1);
  return s;
}

StepStats Trainer::phase2_step(std::span<const Example> batch) {
  require_batch(batch, "phase2_step");
  model_.params().zero_grad();
  const double w = 1.0 / static_cast<double>(batch.size());
  StepStats s;
  for (const Example& ex : batch) {
    Tape t;
    Phase2Terms terms = phase2_terms(t, model_, ex, state_.rng);
    t.backward(terms.loss, w);
    s.recon += terms.loss.scalar() * w;
    for (const auto* e : ex.exemplars) s.tokens += e->response.tokens.size() + 1;
  }
  s.total = s.recon;
  s.examples = batch.size();
  auto params = model_.shared_parameters();
  clip_grad_norm(params, cfg_.grad_clip);
  state_.optimizer.step(params, schedule_.lr_phase2);
  return s;
}

namespace {

struct CriticInput {
  std::vector<double> h_c;
  MixtureValues post, prior;
};

// One ascent step on L_disc with fresh posterior and prior noise.
double critic_iteration(Model& m, std::span<const CriticInput> inputs, Rng& rng,
                        RmsProp& opt, double lr) {
  m.params().zero_grad();
  const double w = 1.0 / static_cast<double>(inputs.size());
  double disc = 0.0;
  for (const CriticInput& in : inputs) {
    Tape t;
    const MixtureSpec post = constant_mixture(t, in.post);
    const MixtureSpec prior = constant_mixture(t, in.prior);
    Var z_post = m.latent().generator_q(
        sample_posterior_noise(post, rng, m.config().posterior_mode));
    Var z_prior = m.latent().generator_g(sample_prior_noise(prior, rng));
    Var gap = critic_gap(m, z_post, z_prior, t.constant(in.h_c));
    disc += gap.scalar() * w;
    // Ascent: descend on -L_disc.
    t.backward(gap, -w);
  }
  auto params = m.critic_parameters();
  opt.step(params, lr);
  m.critic().clip(m.config().critic_clip);
  return disc;
}

}  // namespace

double Trainer::critic_step(std::span<const Example> batch) {
  require_batch(batch, "critic_step");
  std::vector<CriticInput> inputs;
  for (const Example& ex : batch) {
    Tape t;
    Phase3Forward f = phase3_forward(t, model_, ex, state_.rng);
    inputs.push_back({{f.h_c_const.value().begin(), f.h_c_const.value().end()},
                      std::move(f.post), std::move(f.prior)});
  }
  return critic_iteration(model_, inputs, state_.rng, state_.critic_optimizer,
                          schedule_.lr_critic);
}

StepStats Trainer::phase3_step(std::span<const Example> batch) {
  require_batch(batch, "phase3_step");
  // Forward every example once; keep the tapes so the critic terms can be
  // appended after the critic has been updated.
  std::vector<std::unique_ptr<Tape>> tapes;
  std::vector<Phase3Forward> fwd;
  std::vector<CriticInput> inputs;
  for (const Example& ex : batch) {
    tapes.push_back(std::make_unique<Tape>());
    fwd.push_back(phase3_forward(*tapes.back(), model_, ex, state_.rng));
    const auto hc = fwd.back().h_c_const.value();
    inputs.push_back({{hc.begin(), hc.end()}, fwd.back().post, fwd.back().prior});
  }
  for (std::size_t i = 0; i < cfg_.critic_steps; ++i)
    critic_iteration(model_, inputs, state_.rng, state_.critic_optimizer,
                     schedule_.lr_critic);

  model_.params().zero_grad();
  const double w = 1.0 / static_cast<double>(batch.size());
  StepStats s;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Phase3Forward& f = fwd[i];
    Var disc = critic_gap(model_, f.z_post, f.z_prior, f.h_c_const);
    Var total = phase3_loss(f.recon, disc);
    tapes[i]->backward(total, w);
    s.recon += f.recon.scalar() * w;
    s.disc += disc.scalar() * w;
    s.tokens += target_tokens(batch[i]);
    tapes[i].reset();
  }
  s.total = s.recon + s.disc;
  s.examples = batch.size();
  auto params = model_.generator_parameters();
  clip_grad_norm(params, cfg_.grad_clip);
  state_.optimizer.step(params, schedule_.lr_phase3);
  return s;
}

std::vector<std::vector<const Example*>> Trainer::make_batches(
    std::span<const Example> pool) {
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), state_.rng.engine());
  std::vector<std::vector<const Example*>> out;
  for (std::size_t i = 0; i < order.size(); i += cfg_.batch_size) {
    std::vector<const Example*> b;
    for (std::size_t j = i; j < std::min(order.size(), i + cfg_.batch_size); ++j)
      b.push_back(&pool[order[j]]);
    out.push_back(std::move(b));
  }
  return out;
}

void Trainer::write_log_header() {
  if (!log) return;
  *log << "# config_hash: " << std::hex << fnv1a(cfg_.config_echo) << std::dec << '\n';
  *log << "# ablation: " << (cfg_.ablation_label.empty() ? "none" : cfg_.ablation_label)
       << '\n';
  *log << "step,phase,epoch,L_recon,L_disc,L_total,wallclock\n";
  log->flush();
}

void Trainer::record_step(Phase p, const StepStats& s) {
  ++state_.global_step;
  if (log) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%zu,%s,%zu,%.17g,%.17g,%.17g,%.3f\n",
                  state_.global_step, phase_name(p), state_.epoch, s.recon, s.disc,
                  s.total, now_seconds() - wall_start_);
    *log << buf;
  }
  if (on_step) on_step(p, state_.epoch, s);
}

void Trainer::guard(const StepStats& s, Phase p) {
  const bool ok = std::isfinite(s.recon) && std::isfinite(s.disc) &&
                  std::isfinite(s.total) && all_finite(model_.params().all());
  if (!ok) {
    if (log) log->flush();
    throw NumericError("non-finite loss or parameter at step " +
                       std::to_string(state_.global_step) + " (phase " + phase_name(p) +
                       ", epoch " + std::to_string(state_.epoch) + ")");
  }
}

void Trainer::checkpoint(const std::string& tag) {
  if (cfg_.out_dir.empty()) return;
  std::filesystem::create_directories(cfg_.out_dir);
  save_checkpoint(cfg_.out_dir / (tag + ".ckpt"), model_, state_, cfg_.config_echo);
}

void Trainer::run_phase(Phase p) {
  const std::size_t epochs = p == Phase::kI    ? schedule_.phase1_epochs
                             : p == Phase::kII ? schedule_.phase2_epochs
                                               : schedule_.phase3_epochs;
  if (state_.epoch == 0 && !state_.in_progress) {
    if (p == Phase::kIII) {
      // PriNet, G and the critic are unused before phase III.
      model_.reinit_prior_side(state_.rng);
      auto fresh = model_.params().with_prefix(
          std::vector<std::string>{"pri.", "g.", "d."});
      state_.optimizer.reset(fresh);
      state_.critic_optimizer.reset(fresh);
      state_.phase3_start_valid = validation_nll(model_, valid_);
      state_.has_best = false;
      state_.epochs_since_best = 0;
    }
    if (state_.pending_handoff) {
      state_.handoffs.push_back(Handoff{state_.pending_handoff->first, p,
                                        state_.pending_handoff->second,
                                        checksum(model_.shared_parameters())});
      state_.pending_handoff.reset();
    }
    state_.in_progress = true;
  }

  while (state_.epoch < epochs && !state_.stopped_early) {
    for (const auto& idx : make_batches(train_)) {
      std::vector<Example> batch;
      batch.reserve(idx.size());
      for (const Example* e : idx) batch.push_back(*e);
      StepStats s = p == Phase::kI    ? phase1_step(batch)
                    : p == Phase::kII ? phase2_step(batch)
                                      : phase3_step(batch);
      record_step(p, s);
      guard(s, p);
    }
    ++state_.epoch;
    if (log) log->flush();
    if (!valid_.empty()) {
      const double v = validation_nll(model_, valid_);
      state_.valid_history.emplace_back(p, v);
      if (p == Phase::kIII) {
        if (!state_.has_best || v < state_.best_valid) {
          state_.best_valid = v;
          state_.has_best = true;
          state_.epochs_since_best = 0;
          checkpoint("best");
        } else if (schedule_.patience > 0 &&
                   ++state_.epochs_since_best >= schedule_.patience) {
          state_.stopped_early = true;
        }
      }
    }
    checkpoint("last");
  }
  state_.pending_handoff = std::make_pair(p, checksum(model_.shared_parameters()));
  state_.in_progress = false;
  checkpoint(std::string("phase") + (p == Phase::kI ? "1" : p == Phase::kII ? "2" : "3"));
}

void Trainer::run() {
  const bool has_exemplars = model_.config().k_exemplars > 0;
  for (Phase p : {Phase::kI, Phase::kII, Phase::kIII}) {
    if (static_cast<int>(p) < static_cast<int>(state_.phase)) continue;
    if (!schedule_.runs(p) || (p == Phase::kII && !has_exemplars)) continue;
    if (p != state_.phase) {
      state_.phase = p;
      state_.epoch = 0;
      state_.in_progress = false;
    }
    run_phase(p);
  }
  state_.phase = Phase::kDone;
  checkpoint("final");
}

}  // namespace ewae
