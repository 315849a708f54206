// Copyright 2026 The ewae Authors
// SPDX-License-Identifier: Apache-2.0
//
// ewae command-line tool. Subcommands:
//   synth, index, retrieve, train, generate, evaluate, sweep-k, inspect-latent
// Exit codes: 0 ok, 1 unexpected, 2 usage, 3 io, 4 config, 5 data, 6 numeric.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "ewae/curriculum.hpp"
#include "ewae/error.hpp"
#include "ewae/kernels.hpp"
#include "ewae/pipeline.hpp"
#include "ewae/retrieval.hpp"
#include "ewae/run_config.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace ewae;
using nlohmann::ordered_json;

namespace {

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;  // key=value
};

RunConfig resolve_config(const Common& c) {
  RunConfig cfg;
  std::string path = c.config_path;
  if (path.empty())
    if (const char* env = std::getenv(kConfigEnvVar)) path = env;
  if (!path.empty()) cfg = RunConfig::from_file(path);
  for (const auto& kv : c.overrides) cfg.merge_text(kv, "--set");
  cfg.validate();
  return cfg;
}

std::vector<ContextResponsePair> load_indexed(const fs::path& p, const Vocabulary& v,
                                              const RunConfig& cfg) {
  auto pairs = load_jsonl(p);
  v.index(pairs, cfg.limits());
  return pairs;
}

void write_text(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + p.string());
  out << text;
}

void append_csv(const fs::path& p, const std::string& header, const std::string& row) {
  const bool fresh = !fs::exists(p) || fs::file_size(p) == 0;
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::app);
  if (!out) throw IoError("cannot write " + p.string());
  if (fresh) out << header << '\n';
  out << row << '\n';
}

ordered_json mixture_json(const MixtureValues& m) {
  ordered_json comps = ordered_json::array();
  for (std::size_t i = 0; i < m.mu.size(); ++i) {
    double norm = 0.0, trace = 0.0;
    for (double v : m.mu[i]) norm += v * v;
    for (double v : m.log_var[i]) trace += std::exp(v);
    comps.push_back({{"weight", m.weights[i]},
                     {"mean_norm", std::sqrt(norm)},
                     {"variance_trace", trace}});
  }
  return comps;
}

// Loads vocab.txt from next to the checkpoint unless given explicitly.
Vocabulary vocab_for(const fs::path& ckpt, const std::string& explicit_path) {
  fs::path p = explicit_path.empty() ? ckpt.parent_path() / "vocab.txt" : fs::path(explicit_path);
  return Vocabulary::load(p);
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Exemplar-augmented Wasserstein auto-encoder for dialogue"};
  app.require_subcommand(1);
  Common common;
  app.add_option("--config", common.config_path,
                 std::string("key=value config file (default: $") + kConfigEnvVar + ")");
  app.add_option("--set", common.overrides, "override a config key, e.g. --set seed=3");
  std::string kernels;
  app.add_option("--kernels", kernels, "force kernel backend (scalar|avx2)");

  // synth
  auto* synth = app.add_subcommand("synth", "generate the synthetic multimodal task");
  std::string synth_out = "data";
  std::optional<std::uint64_t> synth_seed;
  synth->add_option("--out-dir", synth_out, "output directory");
  synth->add_option("--seed", synth_seed, "generator seed (overrides config seed)");

  // index
  auto* index = app.add_subcommand("index", "build a BM25 index over training contexts");
  std::string index_train, index_out;
  index->add_option("--train", index_train, "training JSONL")->required();
  index->add_option("--out", index_out, "index file")->required();

  // retrieve
  auto* retrieve = app.add_subcommand("retrieve", "print top-k exemplars as TSV");
  std::string ret_index, ret_queries;
  std::size_t ret_k = 0;
  bool ret_exclude = false;
  retrieve->add_option("--index", ret_index, "index file")->required();
  retrieve->add_option("--queries", ret_queries, "query JSONL")->required();
  retrieve->add_option("--k", ret_k, "exemplars per query (default: config k_exemplars)");
  retrieve->add_flag("--exclude-self", ret_exclude, "drop the query's own pair_id");

  // train
  auto* train = app.add_subcommand("train", "run the three-phase curriculum");
  std::string tr_train, tr_valid, tr_out = "run";
  bool f_skip1 = false, f_skip2 = false, f_nocurr = false, f_noex = false, f_resume = false;
  train->add_option("--train", tr_train, "training JSONL")->required();
  train->add_option("--valid", tr_valid, "validation JSONL")->required();
  train->add_option("--out-dir", tr_out, "checkpoint + log directory");
  train->add_flag("--skip-phase1", f_skip1, "ablation: w/o I");
  train->add_flag("--skip-phase2", f_skip2, "ablation: w/o II");
  train->add_flag("--no-curriculum", f_nocurr, "ablation: phase III only, from scratch");
  train->add_flag("--no-exemplar", f_noex, "ablation: k = 0, single-Gaussian posterior");
  train->add_flag("--resume", f_resume, "continue from <out-dir>/last.ckpt if present");

  // generate
  auto* generate = app.add_subcommand("generate", "sample responses on the prior path");
  std::string gen_ckpt, gen_input, gen_out = "samples.jsonl", gen_vocab;
  std::optional<std::size_t> gen_s;
  generate->add_option("--checkpoint", gen_ckpt, "checkpoint file")->required();
  generate->add_option("--input", gen_input, "contexts JSONL")->required();
  generate->add_option("--out", gen_out, "samples JSONL");
  generate->add_option("--vocab", gen_vocab, "vocabulary file (default: next to checkpoint)");
  generate->add_option("--samples", gen_s, "responses per context (default: config samples)");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "compute the metric report");
  std::string ev_samples, ev_ckpt, ev_test, ev_vocab, ev_json = "report.json", ev_csv,
                                                       ev_emb, ev_label;
  std::optional<std::size_t> ev_s;
  evaluate->add_option("--samples-file", ev_samples, "samples JSONL from `generate`");
  evaluate->add_option("--checkpoint", ev_ckpt, "checkpoint (generates samples itself)");
  evaluate->add_option("--test", ev_test, "test JSONL (with --checkpoint)");
  evaluate->add_option("--vocab", ev_vocab, "vocabulary file (default: next to checkpoint)");
  evaluate->add_option("--embeddings", ev_emb, "GloVe-format embeddings");
  evaluate->add_option("--samples", ev_s, "responses per context (default: config samples)");
  evaluate->add_option("--out-json", ev_json, "report JSON");
  evaluate->add_option("--csv", ev_csv, "append one CSV row here");
  evaluate->add_option("--label", ev_label, "row label for the CSV");

  // sweep-k
  auto* sweep = app.add_subcommand("sweep-k", "train + evaluate for k = 1..5");
  std::string sw_train, sw_valid, sw_test, sw_out = "sweep", sw_csv;
  std::size_t sw_lo = 1, sw_hi = 5;
  sweep->add_option("--train", sw_train, "training JSONL")->required();
  sweep->add_option("--valid", sw_valid, "validation JSONL")->required();
  sweep->add_option("--test", sw_test, "test JSONL")->required();
  sweep->add_option("--out-dir", sw_out, "per-k run directories");
  sweep->add_option("--csv", sw_csv, "result table (default: <out-dir>/sweep_k.csv)");
  sweep->add_option("--k-min", sw_lo, "smallest k");
  sweep->add_option("--k-max", sw_hi, "largest k");

  // inspect-latent
  auto* inspect = app.add_subcommand("inspect-latent", "dump posterior/prior mixtures as JSON");
  std::string in_ckpt, in_vocab, in_pairs, in_train;
  std::size_t in_row = 0;
  inspect->add_option("--checkpoint", in_ckpt, "checkpoint file")->required();
  inspect->add_option("--input", in_pairs, "JSONL holding the pair to inspect")->required();
  inspect->add_option("--row", in_row, "0-based line of the pair in --input");
  inspect->add_option("--train", in_train, "training JSONL for exemplar retrieval");
  inspect->add_option("--vocab", in_vocab, "vocabulary file (default: next to checkpoint)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(ErrorKind::kUsage);
  }

  if (kernels == "scalar") kernels::set_backend(kernels::Backend::kScalar);
  else if (kernels == "avx2") kernels::set_backend(kernels::Backend::kAvx2);
  else if (!kernels.empty()) throw ConfigError("--kernels must be scalar or avx2");

  RunConfig cfg = resolve_config(common);

  if (*synth) {
    if (synth_seed) cfg.set("seed", std::to_string(*synth_seed));
    cfg.validate();
    const auto corpus = generate_synthetic(cfg.synthetic());
    const fs::path dir = synth_out;
    fs::create_directories(dir);
    save_jsonl(dir / "train.jsonl", corpus.train);
    save_jsonl(dir / "valid.jsonl", corpus.valid);
    save_jsonl(dir / "test.jsonl", corpus.test);
    save_manifest(dir / "manifest.json", corpus.manifest);
    std::cout << "wrote " << corpus.train.size() << "/" << corpus.valid.size() << "/"
              << corpus.test.size() << " pairs to " << dir.string() << '\n';
    return 0;
  }

  if (*index) {
    auto idx = Bm25Index::build(load_jsonl(index_train), cfg.bm25());
    idx.save(index_out);
    std::cout << "indexed " << idx.size() << " documents\n";
    return 0;
  }

  if (*retrieve) {
    const auto idx = Bm25Index::load(ret_index);
    const std::size_t k = ret_k ? ret_k : cfg.get_size("k_exemplars");
    if (k == 0) throw ConfigError("retrieve needs k >= 1");
    std::cout << "query_pair_id\trank\tpair_id\tscore\tpadded\n";
    for (const auto& q : load_jsonl(ret_queries)) {
      const auto set = idx.retrieve(q, k, ret_exclude);
      for (std::size_t r = 0; r < set.exemplars.size(); ++r)
        std::cout << q.pair_id << '\t' << r + 1 << '\t' << set.exemplars[r].pair_id << '\t'
                  << set.exemplars[r].score << '\t' << (set.padded ? 1 : 0) << '\n';
    }
    return 0;
  }

  if (*train) {
    if (f_skip1) cfg.set("skip_phase1", "true");
    if (f_skip2) cfg.set("skip_phase2", "true");
    if (f_nocurr) cfg.set("no_curriculum", "true");
    if (f_noex) cfg.set("no_exemplar", "true");
    cfg.validate();
    auto train_pairs = load_jsonl(tr_train);
    const auto vocab = fit_vocabulary(cfg, train_pairs);
    vocab.index(train_pairs, cfg.limits());
    const auto valid_pairs = load_indexed(tr_valid, vocab, cfg);
    const fs::path out = tr_out;
    write_text(out / "config.txt", cfg.resolved());
    const auto res = train_run(cfg, train_pairs, valid_pairs, vocab, out, f_resume);
    std::cout << "ablation: " << cfg.ablation_label() << "\nsteps: " << res.state.global_step
              << "\nfinal valid NLL/token: " << res.final_valid_nll
              << "\ncheckpoint: " << (out / "final.ckpt").string() << '\n';
    return 0;
  }

  if (*generate) {
    CheckpointInfo info;
    const auto model = load_checkpoint(gen_ckpt, nullptr, &info);
    const auto vocab = vocab_for(gen_ckpt, gen_vocab);
    const auto pairs = load_indexed(gen_input, vocab, cfg);
    const std::size_t S = gen_s ? *gen_s : cfg.get_size("samples");
    const auto sets = generate_sets(*model, vocab, pairs, S, cfg.get_u64("seed"));
    std::ostringstream out;
    for (std::size_t i = 0; i < sets.size(); ++i) {
      ordered_json j;
      j["pair_id"] = pairs[i].pair_id;
      j["context_id"] = sets[i].context_id;
      j["reference"] = detokenize(sets[i].reference);
      j["samples"] = ordered_json::array();
      for (const auto& s : sets[i].samples) j["samples"].push_back(detokenize(s));
      j["config_hash"] = hex64(info.config_hash);
      out << j.dump() << '\n';
    }
    write_text(gen_out, out.str());
    std::cout << "wrote " << sets.size() << " sample sets to " << gen_out << '\n';
    return 0;
  }

  if (*evaluate) {
    if (!ev_emb.empty()) cfg.set("embedding_file", ev_emb);
    std::vector<SampleSet> sets;
    Vocabulary vocab;
    if (!ev_samples.empty()) {
      std::ifstream in(ev_samples);
      if (!in) throw IoError("cannot read " + ev_samples);
      std::string line;
      std::size_t lineno = 0;
      while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
          const auto j = nlohmann::json::parse(line);
          SampleSet s;
          s.context_id = j.at("context_id").get<std::string>();
          s.reference = tokenize(j.at("reference").get<std::string>());
          for (const auto& x : j.at("samples")) s.samples.push_back(tokenize(x.get<std::string>()));
          sets.push_back(std::move(s));
        } catch (const nlohmann::json::exception& e) {
          throw DataError(ev_samples + ":" + std::to_string(lineno) + ": " + e.what());
        }
      }
      if (!ev_ckpt.empty()) vocab = vocab_for(ev_ckpt, ev_vocab);
      else if (!ev_vocab.empty()) vocab = Vocabulary::load(ev_vocab);
    } else {
      if (ev_ckpt.empty() || ev_test.empty())
        throw ConfigError("evaluate needs --samples-file or --checkpoint with --test");
      const auto model = load_checkpoint(ev_ckpt);
      vocab = vocab_for(ev_ckpt, ev_vocab);
      const auto pairs = load_indexed(ev_test, vocab, cfg);
      sets = generate_sets(*model, vocab, pairs, ev_s ? *ev_s : cfg.get_size("samples"),
                           cfg.get_u64("seed"));
    }
    Embeddings emb;
    if (vocab.size() == kNumReserved && cfg.get("embedding_file").empty()) {
      // No vocabulary at hand: key the random table on the words seen here.
      std::set<std::string> words;
      for (const auto& s : sets) {
        words.insert(s.reference.begin(), s.reference.end());
        for (const auto& x : s.samples) words.insert(x.begin(), x.end());
      }
      const std::vector<std::string> list(words.begin(), words.end());
      emb = Embeddings::random(list, cfg.get_size("eval_embedding_dim"),
                               cfg.get_u64("eval_embedding_seed"));
    } else {
      emb = eval_embeddings(cfg, vocab);
    }
    const auto report = evaluate_sets(sets, emb, cfg.inter_dist_mode());
    write_text(ev_json, report_json(report, cfg) + "\n");
    if (!ev_csv.empty())
      append_csv(ev_csv, report_csv_header(),
                 report_csv_row(report, ev_label.empty() ? "eval" : ev_label, cfg));
    std::cout << report_json(report, cfg) << '\n';
    return 0;
  }

  if (*sweep) {
    if (sw_lo == 0 || sw_hi < sw_lo) throw ConfigError("need 1 <= k-min <= k-max");
    auto train_pairs = load_jsonl(sw_train);
    const auto vocab = fit_vocabulary(cfg, train_pairs);
    vocab.index(train_pairs, cfg.limits());
    const auto valid_pairs = load_indexed(sw_valid, vocab, cfg);
    const auto test_pairs = load_indexed(sw_test, vocab, cfg);
    const fs::path out = sw_out;
    const fs::path csv = sw_csv.empty() ? out / "sweep_k.csv" : fs::path(sw_csv);
    fs::create_directories(out);
    std::ostringstream table;
    table << "k";
    for (const auto& c : MetricReport::csv_columns()) table << ',' << c;
    table << ",valid_nll,n_contexts,config_hash\n";
    const auto emb = eval_embeddings(cfg, vocab);
    for (std::size_t k = sw_lo; k <= sw_hi; ++k) {
      RunConfig run_cfg = cfg;
      run_cfg.set("k_exemplars", std::to_string(k));
      run_cfg.validate();
      const auto res = train_run(run_cfg, train_pairs, valid_pairs, vocab,
                                 out / ("k" + std::to_string(k)));
      const auto sets = generate_sets(*res.model, vocab, test_pairs,
                                      run_cfg.get_size("samples"), run_cfg.get_u64("seed"));
      const auto report = evaluate_sets(sets, emb, run_cfg.inter_dist_mode());
      table << k;
      char buf[64];
      for (double v : report.csv_values()) {
        std::snprintf(buf, sizeof buf, ",%.6f", v);
        table << buf;
      }
      std::snprintf(buf, sizeof buf, ",%.6f", res.final_valid_nll);
      table << buf << ',' << report.n_contexts << ',' << run_cfg.hash_hex() << '\n';
      std::cerr << "k=" << k << " done\n";
    }
    write_text(csv, table.str());
    std::cout << table.str();
    return 0;
  }

  if (*inspect) {
    const auto model = load_checkpoint(in_ckpt);
    const auto vocab = vocab_for(in_ckpt, in_vocab);
    const auto pairs = load_indexed(in_pairs, vocab, cfg);
    if (in_row >= pairs.size())
      throw DataError("--row " + std::to_string(in_row) + " beyond " + in_pairs);
    const auto& pair = pairs[in_row];
    const std::size_t k = model->config().k_exemplars;

    std::vector<ContextResponsePair> pool;
    Example ex{&pair, {}};
    std::optional<Bm25Index> idx;
    if (k > 0) {
      if (in_train.empty()) throw ConfigError("inspect-latent needs --train when k > 0");
      pool = load_indexed(in_train, vocab, cfg);
      idx.emplace(Bm25Index::build(pool, cfg.bm25()));
      ex = attach_exemplars(std::span(&pair, 1), pool, *idx, k, true).front();
    }
    Tape t;
    Var h_c = model->seq().encode_context(t, pair.context);
    std::vector<Var> hc_list{h_c}, hr_list{model->seq().encode_utterance(t, pair.response)};
    for (const auto* e : ex.exemplars) {
      hc_list.push_back(model->seq().encode_context(t, e->context));
      hr_list.push_back(model->seq().encode_utterance(t, e->response));
    }
    MixtureSpec post{model->latent().recognition_forward(h_c, hr_list),
                     posterior_weights(h_c, hc_list)};
    const MixtureSpec prior = model->latent().prior_forward(h_c);
    ordered_json j;
    j["pair_id"] = pair.pair_id;
    j["exemplar_pair_ids"] = ordered_json::array();
    for (const auto* e : ex.exemplars) j["exemplar_pair_ids"].push_back(e->pair_id);
    j["posterior"] = mixture_json(snapshot(post));
    j["prior"] = mixture_json(snapshot(prior));
    j["config_hash"] = cfg.hash_hex();
    std::cout << j.dump(2) << '\n';
    return 0;
  }
  return 0;
}

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const Error& e) {
    std::cerr << "ewae: " << e.what() << '\n';
    return static_cast<int>(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "ewae: " << e.what() << '\n';
    return static_cast<int>(ErrorKind::kIo);
  } catch (const std::invalid_argument& e) {
    std::cerr << "ewae: " << e.what() << '\n';
    return static_cast<int>(ErrorKind::kData);
  } catch (const std::exception& e) {
    std::cerr << "ewae: " << e.what() << '\n';
    return 1;
  }
}
