// Copyright 2026 The ewae Authors
// SPDX-License-Identifier: Apache-2.0

#include "ewae/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"

#include "ewae/error.hpp"

namespace ewae {

using nlohmann::json;

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) out.push_back(std::move(cur));
    cur.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const unsigned char c = static_cast<unsigned char>(text[i]);
    if (std::isspace(c)) {
      flush();
    } else if (std::ispunct(c)) {
      const bool inner_apostrophe =
          c == '\'' && !cur.empty() && i + 1 < text.size() &&
          std::isalnum(static_cast<unsigned char>(text[i + 1]));
      if (inner_apostrophe) {
        cur.push_back('\'');
      } else {
        flush();
        out.emplace_back(1, static_cast<char>(c));
      }
    } else {
      cur.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  flush();
  return out;
}

std::string detokenize(std::span<const std::string> words) {
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out.push_back(' ');
    out += w;
  }
  return out;
}

Utterance make_utterance(std::string_view text) {
  Utterance u;
  u.raw_text = std::string(text);
  u.words = tokenize(text);
  return u;
}

// ---------------------------------------------------------------------------

Vocabulary::Vocabulary() {
  for (const char* w : {"<pad>", "<unk>", "<s>", "</s>"}) append(w);
}

void Vocabulary::append(const std::string& word) {
  word_to_id_.emplace(word, static_cast<TokenId>(id_to_word_.size()));
  id_to_word_.push_back(word);
}

TokenId Vocabulary::id(std::string_view word) const {
  auto it = word_to_id_.find(std::string(word));
  return it == word_to_id_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::word(TokenId id) const {
  if (id >= id_to_word_.size()) throw DataError("token id out of range");
  return id_to_word_[id];
}

bool Vocabulary::contains(std::string_view word) const {
  return word_to_id_.count(std::string(word)) != 0;
}

std::vector<TokenId> Vocabulary::encode(std::span<const std::string> words) const {
  std::vector<TokenId> out;
  out.reserve(words.size());
  for (const auto& w : words) out.push_back(id(w));
  return out;
}

std::vector<std::string> Vocabulary::decode(std::span<const TokenId> ids,
                                            bool stop_at_eos) const {
  std::vector<std::string> out;
  for (TokenId t : ids) {
    if (stop_at_eos && t == kEos) break;
    if (t == kBos || t == kPad) continue;
    out.push_back(word(t));
  }
  return out;
}

void Vocabulary::index(std::vector<ContextResponsePair>& pairs,
                       const CorpusLimits& limits) const {
  auto encode_one = [&](Utterance& u) {
    u.tokens = encode(u.words);
    if (u.tokens.size() > limits.max_utterance_len) u.tokens.resize(limits.max_utterance_len);
  };
  for (auto& p : pairs) {
    if (p.context.size() > limits.max_turns) {
      p.context.erase(p.context.begin(),
                      p.context.end() - static_cast<std::ptrdiff_t>(limits.max_turns));
    }
    for (auto& u : p.context) encode_one(u);
    encode_one(p.response);
  }
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write vocabulary " + path.string());
  for (std::size_t i = 0; i < id_to_word_.size(); ++i)
    out << id_to_word_[i] << '\t' << i << '\n';
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read vocabulary " + path.string());
  Vocabulary v;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto tab = line.rfind('\t');
    if (tab == std::string::npos)
      throw DataError("vocabulary line " + std::to_string(lineno) + ": missing tab");
    const std::string w = line.substr(0, tab);
    const std::size_t id = std::stoul(line.substr(tab + 1));
    if (id < kNumReserved) {
      if (v.id_to_word_[id] != w)
        throw DataError("vocabulary line " + std::to_string(lineno) + ": reserved id mismatch");
      continue;
    }
    if (id != v.id_to_word_.size())
      throw DataError("vocabulary line " + std::to_string(lineno) + ": ids not contiguous");
    v.append(w);
  }
  return v;
}

Vocabulary build_vocabulary(std::span<const ContextResponsePair> pairs,
                            std::size_t min_count, std::size_t max_size) {
  std::unordered_map<std::string, std::size_t> counts;
  auto add = [&](const Utterance& u) {
    for (const auto& w : u.words) ++counts[w];
  };
  for (const auto& p : pairs) {
    for (const auto& u : p.context) add(u);
    add(p.response);
  }
  std::vector<std::pair<std::string, std::size_t>> ranked;
  for (auto& [w, c] : counts)
    if (c >= min_count) ranked.emplace_back(w, c);
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  Vocabulary v;
  for (const auto& [w, c] : ranked) {
    if (v.size() >= max_size) break;
    if (!v.contains(w)) v.append(w);
  }
  return v;
}

// ---------------------------------------------------------------------------

std::vector<ContextResponsePair> parse_jsonl(std::string_view text) {
  std::vector<ContextResponsePair> pairs;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "line " + std::to_string(lineno);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataError(where + ": malformed JSON (" + e.what() + ")");
    }
    if (!j.is_object() || !j.contains("context") || !j["context"].is_array() ||
        !j.contains("response") || !j["response"].is_string())
      throw DataError(where + ": expected {\"context\": [...], \"response\": \"...\"}");
    ContextResponsePair p;
    p.pair_id = j.contains("id") ? j["id"].get<PairId>()
                                 : static_cast<PairId>(pairs.size());
    if (j.contains("context_id")) p.context_id = j["context_id"].get<std::string>();
    for (const auto& turn : j["context"]) {
      if (!turn.is_string()) throw DataError(where + ": context turns must be strings");
      Utterance u = make_utterance(turn.get<std::string>());
      if (!u.words.empty()) p.context.push_back(std::move(u));
    }
    p.response = make_utterance(j["response"].get<std::string>());
    const std::string pair_where =
        where + " (pair " + std::to_string(pairs.size()) + ")";
    if (p.context.empty()) throw DataError(pair_where + ": empty context");
    if (p.response.words.empty()) throw DataError(pair_where + ": empty response");
    pairs.push_back(std::move(p));
  }
  return pairs;
}

std::vector<ContextResponsePair> load_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_jsonl(ss.str());
}

void save_jsonl(const std::filesystem::path& path,
                std::span<const ContextResponsePair> pairs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& p : pairs) {
    json j;
    j["id"] = p.pair_id;
    if (!p.context_id.empty()) j["context_id"] = p.context_id;
    j["context"] = json::array();
    for (const auto& u : p.context) j["context"].push_back(u.raw_text);
    j["response"] = p.response.raw_text;
    out << j.dump() << '\n';
  }
}

// ---------------------------------------------------------------------------

namespace {

constexpr const char* kTopics[] = {
    "pizza",  "coffee", "tennis", "jazz",   "python", "hiking", "sushi",  "chess",
    "movies", "cats",   "rent",   "trains", "soccer", "tea",    "poetry", "camping",
    "bread",  "opera",  "yoga",   "guitar", "skiing", "pasta",  "wine",   "robots"};
constexpr const char* kNames[] = {"anna", "ben",  "carl", "dora", "eli",
                                  "fay",  "gus",  "hana", "ivan", "june"};
constexpr const char* kTimes[] = {"today", "tonight", "tomorrow", "monday", "friday", "later"};
constexpr const char* kOpeners[] = {"hello {n} how are you", "good morning {n}",
                                    "hey {n} long time no see", "hi {n} what is new"};
constexpr const char* kLastTurns[] = {"{n} wants to talk about {t} {w}",
                                      "did {n} mention {t} {w}",
                                      "{n} asked me about {t} {w}"};
constexpr const char* kModes[] = {
    "i love {t} so much",         "{t} is too expensive",       "can we discuss {t} later",
    "i have never tried {t}",     "my brother hates {t}",       "where can i find {t}",
    "{t} sounds great to me",     "no thanks i do not want {t}", "how much does {t} cost",
    "tell me more about {t}",     "i am tired of {t}",          "we should try {t} together"};
constexpr const char* kNoiseWords[] = {"um", "well", "maybe", "sure", "hmm",
                                       "okay", "right", "so", "yes", "no"};

std::string fill(std::string tpl, std::string_view name, std::string_view topic,
                 std::string_view when) {
  auto sub = [&](std::string_view key, std::string_view val) {
    for (auto pos = tpl.find(key); pos != std::string::npos; pos = tpl.find(key))
      tpl.replace(pos, key.size(), val);
  };
  sub("{n}", name);
  sub("{t}", topic);
  sub("{w}", when);
  return tpl;
}

}  // namespace

SyntheticCorpus generate_synthetic(const SyntheticTaskSpec& spec) {
  constexpr std::size_t kModeCount = std::size(kModes);
  if (spec.modes_per_context < 2)
    throw ConfigError("modes_per_context must be >= 2 (the task must be multimodal)");
  if (spec.modes_per_context > kModeCount)
    throw ConfigError("modes_per_context exceeds the template pool (" +
                      std::to_string(kModeCount) + ")");
  if (spec.noise_rate < 0.0 || spec.noise_rate > 1.0)
    throw ConfigError("noise_rate must lie in [0, 1]");
  if (spec.pairs_per_context < 3)
    throw ConfigError("pairs_per_context must be >= 3 for a train/valid/test split");
  const std::size_t combos = std::size(kNames) * std::size(kTopics) * std::size(kTimes);
  if (spec.n_contexts == 0 || spec.n_contexts > combos)
    throw ConfigError("n_contexts must be in [1, " + std::to_string(combos) + "]");

  std::mt19937_64 rng(spec.seed);
  auto pick = [&rng](std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
  };

  std::vector<std::size_t> combo_ids(combos);
  for (std::size_t i = 0; i < combos; ++i) combo_ids[i] = i;
  std::shuffle(combo_ids.begin(), combo_ids.end(), rng);

  const std::size_t held = std::max<std::size_t>(1, spec.pairs_per_context / 10);
  SyntheticCorpus out;
  std::vector<ContextResponsePair> train, valid, test;

  for (std::size_t c = 0; c < spec.n_contexts; ++c) {
    const std::size_t combo = combo_ids[c];
    const std::string_view name = kNames[combo % std::size(kNames)];
    const std::string_view topic = kTopics[(combo / std::size(kNames)) % std::size(kTopics)];
    const std::string_view when =
        kTimes[combo / (std::size(kNames) * std::size(kTopics))];

    std::vector<std::string> turns;
    if (pick(2) == 1) turns.push_back(fill(kOpeners[pick(std::size(kOpeners))], name, topic, when));
    turns.push_back(fill(kLastTurns[pick(std::size(kLastTurns))], name, topic, when));

    std::vector<std::size_t> mode_ids(kModeCount);
    for (std::size_t i = 0; i < kModeCount; ++i) mode_ids[i] = i;
    std::shuffle(mode_ids.begin(), mode_ids.end(), rng);
    mode_ids.resize(spec.modes_per_context);

    const std::string context_id = "c" + std::to_string(c);
    auto& modes = out.manifest[context_id];
    for (std::size_t m : mode_ids)
      modes.push_back(detokenize(tokenize(fill(kModes[m], name, topic, when))));

    std::bernoulli_distribution is_noise(spec.noise_rate);
    for (std::size_t k = 0; k < spec.pairs_per_context; ++k) {
      ContextResponsePair p;
      p.context_id = context_id;
      for (const auto& t : turns) p.context.push_back(make_utterance(t));
      std::string response;
      if (is_noise(rng)) {
        const std::size_t len = 3 + pick(3);
        for (std::size_t i = 0; i < len; ++i) {
          if (i) response.push_back(' ');
          response += kNoiseWords[pick(std::size(kNoiseWords))];
        }
      } else {
        response = modes[pick(modes.size())];
      }
      p.response = make_utterance(response);
      if (k < held) {
        valid.push_back(std::move(p));
      } else if (k < 2 * held) {
        test.push_back(std::move(p));
      } else {
        train.push_back(std::move(p));
      }
    }
  }
  std::shuffle(train.begin(), train.end(), rng);

  PairId next = 0;
  for (auto* split : {&train, &valid, &test})
    for (auto& p : *split) p.pair_id = next++;
  out.train = std::move(train);
  out.valid = std::move(valid);
  out.test = std::move(test);
  return out;
}

void save_manifest(const std::filesystem::path& path,
                   const std::map<std::string, std::vector<std::string>>& manifest) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << json(manifest).dump(1) << '\n';
}

std::map<std::string, std::vector<std::string>> load_manifest(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  try {
    return json::parse(in).get<std::map<std::string, std::vector<std::string>>>();
  } catch (const json::exception& e) {
    throw DataError("bad manifest " + path.string() + ": " + e.what());
  }
}

}  // namespace ewae
