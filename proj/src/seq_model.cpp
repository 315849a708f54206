// Copyright 2026 The ewae Authors
// SPDX-License-Identifier: Apache-2.0

#include "ewae/seq_model.hpp"

#include <algorithm>
#include <cmath>

#include "ewae/error.hpp"

namespace ewae {

void ModelConfig::validate() const {
  auto need = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("invalid model config: ") + what);
  };
  need(vocab_size > kNumReserved, "vocab_size must exceed the reserved ids");
  need(embedding_dim > 0, "embedding_dim must be positive");
  need(hidden_size > 0, "hidden_size must be positive");
  need(latent_dim > 0, "latent_dim must be positive");
  need(ffn_hidden > 0, "ffn_hidden must be positive");
  need(prior_components() >= 1, "n_prior_components must be >= 1");
  need(max_decode_len > 0, "max_decode_len must be positive");
  need(log_var_clamp > 0.0, "log_var_clamp must be positive");
  need(critic_clip > 0.0, "critic_clip must be positive");
}

SeqModel::SeqModel(ParameterSet& ps, const ModelConfig& cfg) : cfg_(cfg) {
  const std::size_t E = cfg.embedding_dim, H = cfg.hidden_size, L = cfg.latent_dim;
  embed_ = &ps.add("embed", cfg.vocab_size, E);
  utt_fwd_ = make_gru(ps, "utt.fwd", E, H);
  utt_bwd_ = make_gru(ps, "utt.bwd", E, H);
  utt_proj_ = Linear::make(ps, "utt.proj", 2 * H, H);
  ctx_gru_ = make_gru(ps, "ctx.gru", H, H);
  dec_init_ = Linear::make(ps, "dec.init", L + H, H);
  dec_gru_ = make_gru(ps, "dec.gru", E + L + H, H);
  dec_out_ = Linear::make(ps, "dec.out", H, cfg.vocab_size);
}

void SeqModel::init(Rng& rng) {
  std::normal_distribution<double> emb(0.0, 0.1);
  for (double& v : embed_->value) v = emb(rng.engine());
  init_gru(utt_fwd_, rng);
  init_gru(utt_bwd_, rng);
  init_linear(utt_proj_, rng);
  init_gru(ctx_gru_, rng);
  init_linear(dec_init_, rng);
  init_gru(dec_gru_, rng);
  // Small output layer: the initial softmax is close to uniform.
  init_linear(dec_out_, rng, 0.1);
}

Var SeqModel::encode_utterance(Tape& t, const Utterance& u) const {
  if (u.tokens.empty()) throw DataError("encode_utterance: empty utterance");
  for (TokenId id : u.tokens)
    if (id >= cfg_.vocab_size)
      throw DataError("encode_utterance: token id " + std::to_string(id) +
                      " out of range for vocabulary of " + std::to_string(cfg_.vocab_size));
  const std::size_t H = cfg_.hidden_size;
  std::vector<Var> emb;
  emb.reserve(u.tokens.size());
  for (TokenId id : u.tokens) emb.push_back(ad::embedding(t, *embed_, id));
  Var hf = t.constant(std::vector<double>(H, 0.0));
  Var hb = t.constant(std::vector<double>(H, 0.0));
  for (std::size_t i = 0; i < emb.size(); ++i) {
    hf = ad::gru_cell(utt_fwd_, emb[i], hf);
    hb = ad::gru_cell(utt_bwd_, emb[emb.size() - 1 - i], hb);
  }
  return utt_proj_(ad::concat({hf, hb}));
}

Var SeqModel::encode_context(Tape& t, std::span<const Utterance> context) const {
  if (context.empty()) throw DataError("encode_context: empty context");
  Var h = t.constant(std::vector<double>(cfg_.hidden_size, 0.0));
  for (const auto& u : context) h = ad::gru_cell(ctx_gru_, encode_utterance(t, u), h);
  return h;
}

Var SeqModel::decoder_step(Tape& t, Var& h, TokenId prev, Var zc) const {
  Var x = ad::concat({ad::embedding(t, *embed_, prev), zc});
  h = ad::gru_cell(dec_gru_, x, h);
  return dec_out_(h);
}

DecodeResult SeqModel::decode(Tape& t, Var z, Var h_c, const Utterance* target,
                              DecodeMode mode, Rng* rng) const {
  if (z.size() != cfg_.latent_dim)
    throw std::invalid_argument("decode: z has dimension " + std::to_string(z.size()));
  if (h_c.size() != cfg_.hidden_size)
    throw std::invalid_argument("decode: h_c has dimension " + std::to_string(h_c.size()));
  if (mode == DecodeMode::kTeacherForced && target == nullptr)
    throw std::invalid_argument("decode: teacher-forced mode needs a target");
  if (mode == DecodeMode::kSampled && rng == nullptr)
    throw std::invalid_argument("decode: sampled mode needs an rng");

  Var zc = ad::concat({z, h_c});
  Var h = dec_init_(zc);
  DecodeResult out;
  TokenId prev = kBos;

  if (mode == DecodeMode::kTeacherForced) {
    std::vector<Var> losses;
    losses.reserve(target->tokens.size() + 1);
    for (std::size_t i = 0; i <= target->tokens.size(); ++i) {
      const TokenId want = i < target->tokens.size() ? target->tokens[i] : kEos;
      if (want >= cfg_.vocab_size) throw DataError("decode: target token out of range");
      Var step = ad::nll(decoder_step(t, h, prev, zc), want);
      out.step_log_probs.push_back(-step.scalar());
      losses.push_back(step);
      prev = want;
    }
    out.tokens = target->tokens;
    out.nll = ad::add_n(losses);
    return out;
  }

  std::vector<double> probs(cfg_.vocab_size);
  for (std::size_t i = 0; i < cfg_.max_decode_len; ++i) {
    Var logits = decoder_step(t, h, prev, zc);
    const auto lv = logits.value();
    const double mx = *std::max_element(lv.begin(), lv.end());
    double zsum = 0.0;
    for (std::size_t v = 0; v < lv.size(); ++v) zsum += (probs[v] = std::exp(lv[v] - mx));
    for (double& p : probs) p /= zsum;
    TokenId next;
    if (mode == DecodeMode::kGreedy) {
      next = static_cast<TokenId>(std::max_element(probs.begin(), probs.end()) - probs.begin());
    } else {
      next = static_cast<TokenId>(rng->categorical(probs));
    }
    out.step_log_probs.push_back(std::log(probs[next]));
    if (next == kEos) break;
    out.tokens.push_back(next);
    prev = next;
  }
  return out;
}

Var SeqModel::reconstruction_nll(Tape& t, Var z, Var h_c, const Utterance& target) const {
  return decode(t, z, h_c, &target, DecodeMode::kTeacherForced).nll;
}

std::vector<Parameter*> SeqModel::parameters() const {
  std::vector<Parameter*> out{embed_};
  for (const GruWeights* g : {&utt_fwd_, &utt_bwd_})
    out.insert(out.end(), {g->w_input, g->b_input, g->w_hidden, g->b_hidden});
  out.insert(out.end(), {utt_proj_.w, utt_proj_.b});
  out.insert(out.end(),
             {ctx_gru_.w_input, ctx_gru_.b_input, ctx_gru_.w_hidden, ctx_gru_.b_hidden});
  out.insert(out.end(), {dec_init_.w, dec_init_.b});
  out.insert(out.end(),
             {dec_gru_.w_input, dec_gru_.b_input, dec_gru_.w_hidden, dec_gru_.b_hidden});
  out.insert(out.end(), {dec_out_.w, dec_out_.b});
  return out;
}

}  // namespace ewae
