// Copyright 2026 The dprewrite Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dprewrite/cli.h"

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dprewrite/corpus.h"
#include "dprewrite/error.h"
#include "dprewrite/evaluation.h"
#include "dprewrite/lm_provider.h"
#include "dprewrite/mechanism.h"
#include "dprewrite/prompt.h"
#include "dprewrite/protocol.h"
#include "dprewrite/rewriter.h"
#include "dprewrite/tokenizer.h"
#include "json.hpp"

namespace dprewrite {
namespace {

namespace fs = std::filesystem;

struct LmOptions {
  int order = 3;
  double alpha = 0.1;
  double copy_weight = 0.8;
};

struct PrepareOptions {
  std::string input;
  std::string out_dir = ".";
  bool synthetic = false;
  std::uint64_t seed = 42;
  std::size_t n_docs = 500;
  std::size_t n_authors = 4;
  double signal = 0.8;
  double topic_rate = 0.10;
};

struct RewriteOptions {
  std::string input;
  std::string dataset;
  std::string out_dir = ".";
  std::vector<std::string> strategies{"dp", "quasi-dp", "non-dp"};
  std::vector<double> epsilons{25, 50, 100, 150, 250};
  std::vector<std::size_t> top_ks{50, 25, 10, 5, 3};
  std::size_t dp_top_k = kDefaultTopK;
  bool full_vocab = false;
  std::string bounds = "-19.23,7.48";
  std::uint64_t seed = 0;
  std::string provider = "local";
  std::string endpoint;
  std::size_t max_new_tokens = 64;
  std::size_t workers = 0;
  std::size_t jobs = 4;
  LmOptions lm;
};

struct EvalOptions {
  std::string original;
  std::vector<std::string> inputs;
  std::string out;
  std::vector<std::uint64_t> attack_seeds{0, 1, 2};
  double split_ratio = 0.9;
  std::uint64_t split_seed = 42;
  LmOptions lm;
};

struct ReportOptions {
  std::vector<std::string> inputs;
  std::string format = "markdown";
  std::string out;
};

struct ServeOptions {
  std::string listen = "127.0.0.1:8765";
  std::string input;
  std::string echo_fixture;
  std::string manifest;
  LmOptions lm;
};

ClipBounds parse_bounds(const std::string& text) {
  const std::size_t comma = text.find(',');
  if (comma == std::string::npos) {
    throw DomainError("--bounds expects lo,hi; got '" + text + "'");
  }
  try {
    return ClipBounds(std::stod(text.substr(0, comma)),
                      std::stod(text.substr(comma + 1)));
  } catch (const std::logic_error&) {
    throw DomainError("--bounds expects two numbers; got '" + text + "'");
  }
}

std::vector<std::string> texts_of(const Corpus& corpus) {
  std::vector<std::string> texts;
  texts.reserve(corpus.size());
  for (const auto& d : corpus) texts.push_back(d.text);
  return texts;
}

// Rewriting model: n-gram over the corpus plus the prompt words, mixed with
// a copy distribution over the prompt's document.
ProviderHandle local_rewriter(const Corpus& corpus, const LmOptions& o) {
  const std::vector<std::string> prompt_words = tokenize(build_prompt(""));
  return make_local_provider(
      train_ngram(texts_of(corpus), o.order, o.alpha, prompt_words),
      o.copy_weight);
}

// Reads a corpus and reports malformed lines. Returns the number of them.
std::size_t load_reporting(const std::string& path, Corpus& corpus,
                           std::ostream& err) {
  LoadResult r = load_corpus(path);
  for (const LineError& e : r.errors) {
    err << path << ":" << e.line << ": skipped: " << e.message << "\n";
  }
  corpus = std::move(r.corpus);
  return r.errors.size();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  out << text;
}

int cmd_prepare(const PrepareOptions& o, std::ostream& out, std::ostream& err) {
  fs::create_directories(o.out_dir);
  nlohmann::ordered_json summary;
  std::size_t malformed = 0;
  if (o.synthetic) {
    SyntheticOptions so;
    so.seed = o.seed;
    so.n_docs = o.n_docs;
    so.n_authors = o.n_authors;
    so.signal_strength = o.signal;
    const Corpus corpus = generate_synthetic(so);
    const fs::path path = fs::path(o.out_dir) / "synthetic.jsonl";
    save_corpus(path, corpus);
    out << "synthetic corpus: seed " << o.seed << ", " << corpus.size()
        << " documents, " << o.n_authors << " authors -> " << path.string()
        << "\n";
    summary["synthetic"] = true;
    summary["seed"] = o.seed;
    summary["documents"] = corpus.size();
  } else {
    if (o.input.empty()) throw DomainError("--input is required without --synthetic");
    Corpus corpus;
    malformed = load_reporting(o.input, corpus, err);
    FilterSummary fs_summary;
    const Corpus filtered = filter_pipeline(corpus, &fs_summary);
    const Corpus author10 = select_author10(filtered);
    const Corpus topic10 = select_topic10(filtered, o.topic_rate, o.seed);
    save_corpus(fs::path(o.out_dir) / "author10.jsonl", author10);
    save_corpus(fs::path(o.out_dir) / "topic10.jsonl", topic10);
    summary["input"] = fs_summary.input;
    summary["malformed"] = malformed;
    summary["after_topic_drop"] = fs_summary.after_topic_drop;
    summary["after_top_topics"] = fs_summary.after_top_topics;
    summary["after_length"] = fs_summary.after_length;
    summary["author10"] = author10.size();
    summary["topic10"] = topic10.size();
    summary["topic_rate"] = o.topic_rate;
    summary["seed"] = o.seed;
    out << "prepared " << fs_summary.input << " -> " << fs_summary.after_length
        << " documents; author10 " << author10.size() << ", topic10 "
        << topic10.size() << "\n";
  }
  write_text(fs::path(o.out_dir) / "summary.json", summary.dump(2) + "\n");
  return malformed == 0 ? kExitOk : kExitRunErrors;
}

std::vector<PrivacyParams> rewrite_grid(const RewriteOptions& o,
                                        double sensitivity) {
  const std::size_t dp_k = o.full_vocab ? kFullVocab : o.dp_top_k;
  std::vector<PrivacyParams> grid;
  for (const std::string& name : o.strategies) {
    switch (parse_strategy(name)) {
      case Strategy::kDp:
        for (double eps : o.epsilons) grid.push_back(PrivacyParams::dp(eps, sensitivity, dp_k));
        break;
      case Strategy::kQuasiDp:
        for (double eps : o.epsilons) {
          grid.push_back(PrivacyParams::quasi_dp(eps, sensitivity, dp_k));
        }
        break;
      case Strategy::kNonDp:
        for (std::size_t k : o.top_ks) grid.push_back(PrivacyParams::non_dp(k));
        break;
    }
  }
  return grid;
}

int cmd_rewrite(const RewriteOptions& o, std::ostream& out, std::ostream& err) {
  const ClipBounds bounds = parse_bounds(o.bounds);
  Corpus corpus;
  std::size_t errors = load_reporting(o.input, corpus, err);
  if (corpus.empty()) throw DomainError("no documents in " + o.input);

  ProviderHandle provider;
  if (o.provider == "local") {
    provider = local_rewriter(corpus, o.lm);
  } else {
    if (o.endpoint.empty()) {
      throw DomainError("--provider remote needs --endpoint or DPREWRITE_ENDPOINT");
    }
    provider = make_remote_provider(o.endpoint);
  }

  const std::string dataset =
      o.dataset.empty() ? fs::path(o.input).stem().string() : o.dataset;
  fs::create_directories(o.out_dir);
  GenerationConfig config;
  config.max_new_tokens = o.max_new_tokens;
  config.workers = o.workers;

  const std::vector<PrivacyParams> grid = rewrite_grid(o, bounds.sensitivity());
  const std::size_t jobs = std::max<std::size_t>(1, o.jobs);
  for (std::size_t start = 0; start < grid.size(); start += jobs) {
    const std::size_t end = std::min(grid.size(), start + jobs);
    std::vector<std::future<CorpusRewrite>> running;
    for (std::size_t i = start; i < end; ++i) {
      running.push_back(std::async(std::launch::async, [&, i] {
        return rewrite_corpus(corpus, grid[i], bounds, *provider, config, o.seed);
      }));
    }
    for (std::size_t i = start; i < end; ++i) {
      const CorpusRewrite result = running[i - start].get();
      const fs::path path =
          fs::path(o.out_dir) / (dataset + "_" + std::string(to_string(grid[i].strategy())) +
                                 "_" + param_label(grid[i]) + ".jsonl");
      save_privatized(path, result.documents);
      for (const auto& d : result.documents) {
        if (d.record.error) err << path.string() << ": " << d.source.id << ": " << *d.record.error << "\n";
      }
      errors += result.failures;
      out << "wrote " << path.string() << " (" << result.documents.size()
          << " documents, " << result.failures << " failed)\n";
    }
  }
  return errors == 0 ? kExitOk : kExitRunErrors;
}

int cmd_eval(const EvalOptions& o, std::ostream& out, std::ostream& err) {
  if (!fs::exists(o.original)) {
    throw FormatError("baseline file not found: " + o.original);
  }
  Corpus original;
  std::size_t errors = load_reporting(o.original, original, err);
  if (original.empty()) throw DomainError("no documents in " + o.original);

  const NgramLm scorer = train_ngram(texts_of(original), o.lm.order, o.lm.alpha);
  AttackConfig attack;
  attack.seeds = o.attack_seeds;
  attack.split_ratio = o.split_ratio;
  attack.split_seed = o.split_seed;

  std::vector<EvalRow> rows{evaluate_baseline(original, scorer, attack)};
  out << "baseline: " << o.original << "\n";
  for (const std::string& input : o.inputs) {
    const std::vector<PrivatizedDocument> docs = load_privatized(input);
    if (docs.empty()) throw DomainError("no records in " + input);
    for (const auto& d : docs) {
      if (d.record.error) {
        err << input << ": " << d.source.id << ": rewrite failed: " << *d.record.error << "\n";
        ++errors;
      }
    }
    rows.push_back(evaluate_privatized(original, docs, scorer, attack));
    out << "evaluated " << input << "\n";
  }
  const std::string csv = write_eval_csv(rows);
  if (o.out.empty()) {
    out << csv;
  } else {
    write_text(o.out, csv);
    out << "wrote " << o.out << "\n";
  }
  return errors == 0 ? kExitOk : kExitRunErrors;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cmd_report(const ReportOptions& o, std::ostream& out) {
  std::vector<EvalRow> rows;
  for (const std::string& input : o.inputs) {
    std::vector<EvalRow> part;
    try {
      part = read_eval_csv(read_text(input));
    } catch (const FormatError& e) {
      throw FormatError(input + ": " + e.what());
    }
    rows.insert(rows.end(), part.begin(), part.end());
  }
  const ResultsTable table = assemble_table(rows);
  const std::string text =
      o.format == "csv" ? render_csv(table) : render_markdown(table);
  if (o.out.empty()) {
    out << text;
  } else {
    write_text(o.out, text);
    out << "wrote " << o.out << "\n";
  }
  return kExitOk;
}

ProviderHandle echo_from_fixture(const std::string& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_text(path));
    std::vector<std::string> tokens = doc.at("tokens").get<std::vector<std::string>>();
    LogitVector logits{doc.at("logits").get<std::vector<double>>()};
    return make_echo_provider(Vocabulary::from_tokens(std::move(tokens)),
                              std::move(logits));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
}

int cmd_serve(const ServeOptions& o, std::ostream& out, std::ostream& err) {
  const std::size_t colon = o.listen.rfind(':');
  if (colon == std::string::npos) throw DomainError("--listen expects host:port");
  const std::string host = o.listen.substr(0, colon);
  const int port = std::stoi(o.listen.substr(colon + 1));

  ProviderHandle provider;
  if (!o.echo_fixture.empty()) {
    provider = echo_from_fixture(o.echo_fixture);
  } else {
    if (o.input.empty()) throw DomainError("serve needs --input or --echo-fixture");
    Corpus corpus;
    load_reporting(o.input, corpus, err);
    if (corpus.empty()) throw DomainError("no documents in " + o.input);
    provider = local_rewriter(corpus, o.lm);
  }
  if (!o.manifest.empty()) {
    provider->vocabulary().save(o.manifest);
    out << "wrote " << o.manifest << "\n";
  }
  LogitsServer server(provider);
  out << "serving " << provider->vocabulary().size() << "-token vocabulary on "
      << host << ":" << port << "\n"
      << std::flush;
  server.listen(host, port);
  return kExitOk;
}

void add_lm_options(CLI::App* cmd, LmOptions& lm, bool copy) {
  cmd->add_option("--lm-order", lm.order, "n-gram order")
      ->check(CLI::Range(1, 8))
      ->capture_default_str();
  cmd->add_option("--lm-alpha", lm.alpha, "Add-alpha smoothing")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  if (copy) {
    cmd->add_option("--copy-weight", lm.copy_weight,
                    "Weight of the copy distribution in [0, 1)")
        ->check(CLI::Range(0.0, 0.999999))
        ->capture_default_str();
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Differentially private text rewriting and evaluation"};
  app.name("dprewrite");
  app.set_config("--config", "", "TOML file of option defaults; flags override it");
  app.require_subcommand(1);
  app.fallthrough();

  PrepareOptions prep;
  CLI::App* prepare = app.add_subcommand(
      "prepare", "Filter a blog corpus into the author10 and topic10 datasets");
  prepare->add_option("--input", prep.input, "Corpus JSONL")
      ->check(CLI::ExistingFile);
  prepare->add_option("--out-dir", prep.out_dir, "Output directory")
      ->capture_default_str();
  prepare->add_flag("--synthetic", prep.synthetic,
                    "Generate a synthetic labeled corpus instead");
  prepare->add_option("--seed", prep.seed, "Topic10 sampling or generator seed")
      ->capture_default_str();
  prepare->add_option("--docs", prep.n_docs, "Synthetic documents")->capture_default_str();
  prepare->add_option("--authors", prep.n_authors, "Synthetic authors")->capture_default_str();
  prepare->add_option("--signal", prep.signal, "Synthetic author signal strength")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  prepare->add_option("--topic-rate", prep.topic_rate, "Topic10 sampling rate")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();

  RewriteOptions rw;
  CLI::App* rewrite = app.add_subcommand(
      "rewrite", "Rewrite a dataset once per grid point, one JSONL file each");
  rewrite->add_option("--input", rw.input, "Dataset JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  rewrite->add_option("--dataset", rw.dataset, "Dataset name in output files (default: input stem)");
  rewrite->add_option("--out-dir", rw.out_dir, "Output directory")->capture_default_str();
  rewrite->add_option("--strategy", rw.strategies, "Strategies to run")
      ->check(CLI::IsMember({"dp", "quasi-dp", "non-dp"}))
      ->capture_default_str();
  rewrite->add_option("--epsilon", rw.epsilons, "Per-token epsilon grid (dp, quasi-dp)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  rewrite->add_option("--top-k", rw.top_ks, "Top-k grid (non-dp)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  rewrite->add_option("--dp-top-k", rw.dp_top_k, "Top-k used by dp and quasi-dp")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  rewrite->add_flag("--full-vocab", rw.full_vocab,
                    "dp and quasi-dp sample from the whole vocabulary");
  rewrite->add_option("--bounds", rw.bounds, "Logit clip bounds lo,hi")
      ->capture_default_str();
  rewrite->add_option("--seed", rw.seed, "Run seed")->capture_default_str();
  rewrite->add_option("--provider", rw.provider, "Logits provider")
      ->check(CLI::IsMember({"local", "remote"}))
      ->capture_default_str();
  rewrite->add_option("--endpoint", rw.endpoint, "Remote logits endpoint host:port")
      ->envname("DPREWRITE_ENDPOINT");
  rewrite->add_option("--max-new-tokens", rw.max_new_tokens, "Generation cap")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  rewrite->add_option("--workers", rw.workers,
                      "Threads per grid point (0: hardware concurrency)")
      ->capture_default_str();
  rewrite->add_option("--jobs", rw.jobs, "Grid points run concurrently")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  add_lm_options(rewrite, rw.lm, true);

  EvalOptions ev;
  CLI::App* eval = app.add_subcommand(
      "eval", "Score rewrites for utility and attribute inference");
  eval->add_option("--original", ev.original, "Baseline (original) dataset JSONL")
      ->required();
  eval->add_option("--inputs", ev.inputs, "Rewrite JSONL files")
      ->check(CLI::ExistingFile);
  eval->add_option("--out", ev.out, "Eval CSV (default: stdout)");
  eval->add_option("--attack-seeds", ev.attack_seeds, "Attacker seeds")
      ->capture_default_str();
  eval->add_option("--split-ratio", ev.split_ratio, "Attack train fraction")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  eval->add_option("--split-seed", ev.split_seed, "Attack split seed")
      ->capture_default_str();
  add_lm_options(eval, ev.lm, false);

  ReportOptions rep;
  CLI::App* report = app.add_subcommand(
      "report", "Merge eval CSVs into one Baseline | DP | Quasi-DP | Non-DP table");
  report->add_option("--inputs", rep.inputs, "Eval CSV files")
      ->required()
      ->check(CLI::ExistingFile);
  report->add_option("--format", rep.format, "Table format")
      ->check(CLI::IsMember({"csv", "markdown"}))
      ->capture_default_str();
  report->add_option("--out", rep.out, "Output file (default: stdout)");

  ServeOptions sv;
  CLI::App* serve = app.add_subcommand(
      "serve", "Serve next-token logits over the wire protocol");
  serve->add_option("--listen", sv.listen, "host:port")->capture_default_str();
  serve->add_option("--input", sv.input, "Corpus JSONL to train the local model on")
      ->check(CLI::ExistingFile);
  serve->add_option("--echo-fixture", sv.echo_fixture,
                    "JSON {tokens, logits} returned for every request")
      ->check(CLI::ExistingFile);
  serve->add_option("--write-manifest", sv.manifest, "Write the vocabulary manifest here");
  add_lm_options(serve, sv.lm, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*prepare) {
      if (!prep.synthetic && prep.input.empty()) {
        err << "prepare: --input is required unless --synthetic is given\n"
            << prepare->help();
        return kExitUsage;
      }
      return cmd_prepare(prep, out, err);
    }
    if (*rewrite) return cmd_rewrite(rw, out, err);
    if (*eval) return cmd_eval(ev, out, err);
    if (*report) return cmd_report(rep, out);
    return cmd_serve(sv, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRunErrors;
  }
}

}  // namespace dprewrite
