#include "covr/cli.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "covr/coverage.hpp"
#include "covr/embedding.hpp"
#include "covr/encoder.hpp"
#include "covr/error.hpp"
#include "covr/evaluate.hpp"
#include "covr/experiment.hpp"
#include "covr/formats.hpp"
#include "covr/judge.hpp"
#include "covr/objectives.hpp"
#include "covr/parallel.hpp"
#include "covr/rankers.hpp"
#include "covr/synthetic.hpp"

namespace covr {

namespace fs = std::filesystem;

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError(fmt::format("config file '{}' line {}: expected key=value", path, lineno));
    }
    auto key = trim(line.substr(0, eq));
    auto value = trim(line.substr(eq + 1));
    if (key.empty()) throw UsageError(fmt::format("config file '{}' line {}: empty key", path, lineno));
    out[key] = value;
  }
  return out;
}

std::vector<std::string> merge_config(std::vector<std::string> args,
                                      const std::map<std::string, std::string>& config) {
  for (const auto& [key, value] : config) {
    std::string flag = "--" + key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    bool present = false;
    for (const auto& a : args) {
      if (a == flag || a.rfind(flag + "=", 0) == 0) present = true;
    }
    if (!present) args.push_back(flag + "=" + value);
  }
  return args;
}

namespace {

struct Global {
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::string log_level = "warn";
  std::string config;
};

// Writes to `path`, or to `fallback` when path is empty or "-".
void emit(const std::string& path, std::ostream& fallback, const std::function<void(std::ostream&)>& fn) {
  if (path.empty() || path == "-") {
    fn(fallback);
    return;
  }
  auto f = open_output(path);
  fn(f);
  if (!f) throw DataError("failed writing '" + path + "'");
}

void emit_binary(const std::string& path, const std::function<void(std::ostream&)>& fn) {
  auto f = open_output(path, std::ios::out | std::ios::binary);
  fn(f);
  if (!f) throw DataError("failed writing '" + path + "'");
}

std::vector<Topic> load_topics(const std::string& p) { return parse_file(p, [](auto& in) { return parse_topics(in); }); }
std::vector<Document> load_corpus(const std::string& p) { return parse_file(p, [](auto& in) { return parse_corpus(in); }); }
std::vector<RankedList> load_run(const std::string& p) { return parse_file(p, [](auto& in) { return parse_trec_run(in); }); }
std::vector<Qrels> load_qrels(const std::string& p) { return parse_file(p, [](auto& in) { return parse_qrels(in); }); }
std::vector<NuggetJudgmentSet> load_judgments(const std::string& p) {
  return parse_file(p, [](auto& in) { return parse_nugget_judgments(in); });
}

Encoder load_encoder(const std::string& p) {
  auto in = open_input(p, std::ios::in | std::ios::binary);
  return read_params(in);
}

EmbeddingMatrix load_vectors(const std::string& p) {
  auto in = open_input(p, std::ios::in | std::ios::binary);
  return read_vectors(in);
}

void configure_logging(const std::string& level) {
  static std::shared_ptr<spdlog::logger> logger = [] {
    auto l = std::make_shared<spdlog::logger>("covr", std::make_shared<spdlog::sinks::stderr_sink_mt>());
    spdlog::set_default_logger(l);
    return l;
  }();
  auto lvl = spdlog::level::from_str(level);
  if (lvl == spdlog::level::off && level != "off") throw UsageError("unknown log level '" + level + "'");
  logger->set_level(lvl);
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
  std::string out_dir;
  SyntheticConfig data;
  std::size_t heldout = 10;
};

void cmd_synth(const SynthArgs& a, const Global& g) {
  auto cfg = a.data;
  cfg.seed = g.seed;
  auto ds = make_synthetic_dataset(cfg);
  fs::create_directories(a.out_dir);
  const fs::path dir(a.out_dir);
  auto split = split_topics(ds.topics, a.heldout);
  emit((dir / "corpus.jsonl").string(), std::cout, [&](auto& o) { serialize_corpus(ds.corpus, o); });
  emit((dir / "topics.jsonl").string(), std::cout, [&](auto& o) { serialize_topics(ds.topics, o); });
  emit((dir / "topics_train.jsonl").string(), std::cout, [&](auto& o) { serialize_topics(split.train, o); });
  emit((dir / "topics_test.jsonl").string(), std::cout, [&](auto& o) { serialize_topics(split.heldout, o); });
  emit((dir / "judgments.jsonl").string(), std::cout, [&](auto& o) { serialize_nugget_judgments(ds.judgments, o); });
  emit((dir / "qrels.txt").string(), std::cout, [&](auto& o) { serialize_qrels(ds.qrels, o); });
  emit((dir / "candidates.trec").string(), std::cout, [&](auto& o) { serialize_trec_run(ds.candidates, o); });
  spdlog::info("wrote {} docs, {} topics ({} held out) to {}", ds.corpus.size(), ds.topics.size(),
               split.heldout.size(), a.out_dir);
}

// ---------------------------------------------------------------- sample

struct SampleArgs {
  std::string topics, judgments, candidates, out;
  int eta = 4;
  std::string pos_range = "0.5:1.0";
  std::string neg_range = ":0";
  std::size_t negatives = 16;
  std::size_t rank_floor = 50;
};

void cmd_sample(const SampleArgs& a, const Global& g, std::ostream& out) {
  CoverageConfig cfg;
  cfg.eta = a.eta;
  cfg.pos_range = CoverageRange::parse(a.pos_range);
  cfg.neg_range = CoverageRange::parse(a.neg_range);
  cfg.negatives_per_query = a.negatives;
  cfg.supplement_rank_floor = a.rank_floor;
  cfg.validate();
  auto report = build_training_pairs(load_topics(a.topics), load_judgments(a.judgments),
                                     load_run(a.candidates), cfg, g.seed);
  emit(a.out, out, [&](auto& o) { serialize_training_pairs(report.pairs, o); });
  spdlog::info("sampled {} training pairs, skipped {} queries", report.pairs.size(), report.skipped.size());
}

// ---------------------------------------------------------------- judge

struct JudgeArgs {
  std::string topics, corpus, candidates, out;
  std::string endpoint, model;
  std::size_t depth = 20;
  std::size_t attempts = 3;
  std::size_t backoff_ms = 500;
  std::size_t in_flight = 0;
};

void cmd_judge(const JudgeArgs& a, const Global& g, std::ostream& out) {
  auto ep = JudgeEndpoint::from_env();
  if (!a.endpoint.empty()) ep.url = a.endpoint;
  if (!a.model.empty()) ep.model = a.model;
  ep.max_attempts = a.attempts;
  ep.initial_backoff = std::chrono::milliseconds(a.backoff_ms);
  auto topics = load_topics(a.topics);
  auto corpus = load_corpus(a.corpus);
  std::map<std::string, const Document*> docs;
  for (const auto& d : corpus) docs.emplace(d.doc_id, &d);
  std::vector<JudgeTask> tasks;
  auto runs = load_run(a.candidates);
  auto run_of = index_by_query(runs);
  for (const auto& t : topics) {
    auto c = run_of.find(t.query_id);
    if (c == run_of.end()) continue;
    const auto& items = c->second->items;
    for (std::size_t i = 0; i < std::min(a.depth, items.size()); ++i) {
      auto d = docs.find(items[i].doc_id);
      if (d == docs.end()) throw DataError("candidate '" + items[i].doc_id + "' not in corpus");
      for (const auto& sq : t.sub_questions) {
        tasks.push_back({t.query_id, items[i].doc_id, sq.sq_id, sq.text, d->second->full_text()});
      }
    }
  }
  auto sets = judge_all(ep, tasks, a.in_flight > 0 ? a.in_flight : g.threads);
  emit(a.out, out, [&](auto& o) { serialize_nugget_judgments(sets, o); });
}

// ---------------------------------------------------------------- cov-curve

struct CurveArgs {
  std::string topics, judgments, candidates, out;
  int tau = 4;
  std::size_t kmax = 20;
};

void cmd_cov_curve(const CurveArgs& a, std::ostream& out) {
  auto topics = load_topics(a.topics);
  auto judgments = load_judgments(a.judgments);
  auto runs = load_run(a.candidates);
  auto j_of = index_by_query(judgments);
  auto r_of = index_by_query(runs);
  std::vector<double> mean(a.kmax, 0.0);
  std::size_t n = 0;
  std::ostringstream rows;
  const NuggetJudgmentSet none;
  for (const auto& t : topics) {
    if (t.sub_questions.empty()) continue;
    auto r = r_of.find(t.query_id);
    if (r == r_of.end()) continue;
    auto j = j_of.find(t.query_id);
    std::vector<std::string> docs;
    for (const auto& item : r->second->items) docs.push_back(item.doc_id);
    auto curve = accumulated_coverage_curve(j == j_of.end() ? none : *j->second, t, docs, a.tau, a.kmax);
    for (const auto& [k, c] : curve) {
      rows << fmt::format("{}\t{}\t{:.6f}\n", t.query_id, k, c);
      mean[k - 1] += c;
    }
    ++n;
  }
  emit(a.out, out, [&](auto& o) {
    o << "query_id\tk\tcoverage\n" << rows.str();
    for (std::size_t k = 0; k < a.kmax; ++k) {
      o << fmt::format("all\t{}\t{:.6f}\n", k + 1, n ? mean[k] / static_cast<double>(n) : 0.0);
    }
  });
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  std::string pairs, corpus, out, init, trace;
  std::size_t hidden = 32;
  std::size_t dim = 16;
  TrainingConfig cfg = PipelineConfig::toy_training_defaults();
};

void cmd_train(const TrainArgs& a, const Global& g) {
  auto corpus = load_corpus(a.corpus);
  auto records = parse_file(a.pairs, [](auto& in) { return parse_training_pairs(in); });
  Encoder init;
  if (!a.init.empty()) {
    init = load_encoder(a.init);
  } else {
    std::vector<std::string> texts;
    for (const auto& d : corpus) texts.push_back(d.full_text());
    init = make_encoder(Vocabulary::build(texts), g.seed, a.hidden, a.dim);
  }
  auto cfg = a.cfg;
  cfg.seed = g.seed;
  cfg.workers = g.threads;
  auto data = resolve_training_pairs(records, corpus, cfg.docs_per_query);
  auto result = train(data, init, cfg);
  Encoder trained{init.vocab, std::move(result.params)};
  emit_binary(a.out, [&](auto& o) { write_params(trained, o); });
  if (!a.trace.empty()) {
    emit(a.trace, std::cout, [&](auto& o) {
      o << "batch\tloss\n";
      for (std::size_t i = 0; i < result.batch_losses.size(); ++i) {
        o << fmt::format("{}\t{:.9g}\n", i, result.batch_losses[i]);
      }
    });
  }
  spdlog::info("trained on {} queries, final epoch loss {:.6f}", data.size(), result.epoch_losses.back());
}

// ---------------------------------------------------------------- index / search

struct IndexArgs {
  std::string params, corpus, vectors;
};

void cmd_index(const IndexArgs& a, const Global& g) {
  auto enc = load_encoder(a.params);
  auto corpus = load_corpus(a.corpus);
  std::vector<std::string> ids, texts;
  for (const auto& d : corpus) {
    ids.push_back(d.doc_id);
    texts.push_back(d.full_text());
  }
  auto m = enc.encode_all(ids, texts, EncodeMode::Document, g.threads);
  emit_binary(a.vectors, [&](auto& o) { write_vectors(m, o); });
}

struct SearchArgs {
  std::string params, vectors, topics, out, tag = "dense";
  std::size_t k = 100;
};

void cmd_search(const SearchArgs& a, const Global& g, std::ostream& out) {
  auto enc = load_encoder(a.params);
  auto docs = load_vectors(a.vectors);
  auto topics = load_topics(a.topics);
  std::vector<std::string> ids, texts;
  for (const auto& t : topics) {
    ids.push_back(t.query_id);
    texts.push_back(t.query_text);
  }
  auto queries = enc.encode_all(ids, texts, EncodeMode::Query, g.threads);
  auto results = knn_search(queries, docs, a.k, g.threads);
  for (auto& r : results) r.tag = a.tag;
  emit(a.out, out, [&](auto& o) { serialize_trec_run(results, o); });
}

// ---------------------------------------------------------------- bm25

struct Bm25Args {
  std::string corpus, topics, out;
  double k1 = 0.9;
  double b = 0.4;
  std::size_t k = 100;
};

void cmd_bm25(const Bm25Args& a, const Global& g, std::ostream& out) {
  Bm25Index index(load_corpus(a.corpus), a.k1, a.b);
  auto topics = load_topics(a.topics);
  std::vector<RankedList> results(topics.size());
  parallel_for(topics.size(), g.threads, [&](std::size_t i) {
    results[i] = index.search(topics[i].query_id, topics[i].query_text, a.k);
  });
  emit(a.out, out, [&](auto& o) { serialize_trec_run(results, o); });
}

// ---------------------------------------------------------------- mmr

struct MmrArgs {
  std::string run, params, vectors, topics, out;
  double lambda = 0.99;
  std::size_t k = 10;
};

void cmd_mmr(const MmrArgs& a, const Global& g, std::ostream& out) {
  auto enc = load_encoder(a.params);
  auto docs = load_vectors(a.vectors);
  auto topics = load_topics(a.topics);
  auto base = load_run(a.run);
  std::map<std::string, const Topic*> topic_of;
  for (const auto& t : topics) topic_of.emplace(t.query_id, &t);
  std::vector<RankedList> results(base.size());
  parallel_for(base.size(), g.threads, [&](std::size_t i) {
    auto t = topic_of.find(base[i].query_id);
    if (t == topic_of.end()) throw DataError("run query '" + base[i].query_id + "' not in topics");
    auto qv = enc.encode(t->second->query_text, EncodeMode::Query);
    results[i] = mmr_rerank(base[i], docs, qv, a.lambda, a.k);
  });
  emit(a.out, out, [&](auto& o) { serialize_trec_run(results, o); });
}

// ---------------------------------------------------------------- multiq

struct MultiqArgs {
  std::string subqueries, oracle, retriever = "bm25", corpus, params, vectors, out;
  std::string fuse = "rrf";
  double rrf_k = 60.0;
  std::size_t depth = 100;
  std::size_t k = 100;
  double k1 = 0.9;
  double b = 0.4;
};

void cmd_multiq(const MultiqArgs& a, const Global& g, std::ostream& out) {
  if (a.subqueries.empty() == a.oracle.empty()) {
    throw UsageError("multiq needs exactly one of --subqueries or --oracle-subquestions");
  }
  auto topics = load_topics(a.oracle.empty() ? a.subqueries : a.oracle);
  FusionConfig fusion{parse_fusion_method(a.fuse), a.rrf_k, a.depth};

  Retriever retriever;
  std::unique_ptr<Bm25Index> bm25;
  std::unique_ptr<Encoder> enc;
  std::unique_ptr<EmbeddingMatrix> docs;
  if (a.retriever == "bm25") {
    if (a.corpus.empty()) throw UsageError("--retriever bm25 needs --corpus");
    bm25 = std::make_unique<Bm25Index>(load_corpus(a.corpus), a.k1, a.b);
    retriever = [&](const std::string& text, std::size_t depth) { return bm25->search("", text, depth); };
  } else if (a.retriever == "dense") {
    if (a.params.empty() || a.vectors.empty()) throw UsageError("--retriever dense needs --params and --vectors");
    enc = std::make_unique<Encoder>(load_encoder(a.params));
    docs = std::make_unique<EmbeddingMatrix>(load_vectors(a.vectors));
    retriever = [&](const std::string& text, std::size_t depth) {
      auto q = enc->encode(text, EncodeMode::Query);
      auto qm = EmbeddingMatrix::from_unit_rows(docs->dim(), {"q"}, q);
      return knn_search(qm, *docs, depth).front();
    };
  } else {
    throw UsageError("unknown retriever '" + a.retriever + "' (expected bm25 or dense)");
  }

  std::vector<RankedList> results;
  for (const auto& t : topics) {
    if (t.sub_questions.empty()) {
      spdlog::warn("topic {} has no sub-questions; skipped", t.query_id);
      continue;
    }
    std::vector<std::string> subs;
    for (const auto& sq : t.sub_questions) subs.push_back(sq.text);
    auto fused = multi_query_retrieve(t.query_id, subs, retriever, fusion, a.k, g.threads);
    fused.tag = (a.oracle.empty() ? "multiq-" : "oracleq-") + to_string(fusion.method);
    results.push_back(std::move(fused));
  }
  emit(a.out, out, [&](auto& o) { serialize_trec_run(results, o); });
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
  std::string run, qrels, nuggets, topics, sig_against, tsv, out;
  EvalConfig cfg;
  std::string ideal = "greedy";
};

void cmd_eval(EvalArgs a, const Global& g, std::ostream& out) {
  if (a.ideal == "greedy") {
    a.cfg.ideal_mode = IdealMode::Greedy;
  } else if (a.ideal == "exhaustive") {
    a.cfg.ideal_mode = IdealMode::Exhaustive;
  } else {
    throw UsageError("--ideal must be greedy or exhaustive");
  }
  auto qrels = a.qrels.empty() ? std::vector<Qrels>{} : load_qrels(a.qrels);
  auto judgments = a.nuggets.empty() ? std::vector<NuggetJudgmentSet>{} : load_judgments(a.nuggets);
  auto topics = load_topics(a.topics);
  auto table = evaluate_run(load_run(a.run), qrels, judgments, topics, a.cfg, g.threads);
  std::vector<MetricComparison> comparisons;
  if (!a.sig_against.empty()) {
    auto baseline = evaluate_run(load_run(a.sig_against), qrels, judgments, topics, a.cfg, g.threads);
    comparisons = compare_runs(table, baseline);
  }
  emit(a.out, out, [&](auto& o) { write_eval_table(table, a.cfg.k, o, comparisons); });
  if (!a.tsv.empty()) emit(a.tsv, out, [&](auto& o) { write_eval_tsv(table, a.cfg.k, o); });
}

// ---------------------------------------------------------------- ablation

struct AblationArgs {
  std::string out;
  std::size_t queries = 60, heldout = 10, docs = 500, nuggets = 5;
  std::vector<std::string> variants;
  std::vector<double> lambda_grid;
  std::size_t epochs = PipelineConfig::toy_training_defaults().epochs;
  double lr = PipelineConfig::toy_training_defaults().learning_rate;
};

void cmd_ablation(const AblationArgs& a, const Global& g, std::ostream& out) {
  PipelineConfig cfg;
  cfg.data.seed = g.seed;
  cfg.data.n_queries = a.queries;
  cfg.data.n_docs = a.docs;
  cfg.data.n_nuggets = a.nuggets;
  cfg.heldout = a.heldout;
  cfg.init_seed = g.seed;
  cfg.training.seed = g.seed;
  cfg.training.epochs = a.epochs;
  cfg.training.learning_rate = a.lr;
  cfg.workers = g.threads;

  auto grid = default_ablation_grid();
  if (!a.variants.empty()) {
    std::vector<AblationVariant> picked;
    for (const auto& name : a.variants) {
      auto it = std::find_if(grid.begin(), grid.end(), [&](const auto& v) { return v.name == name; });
      if (it == grid.end()) throw UsageError("unknown ablation variant '" + name + "'");
      picked.push_back(*it);
    }
    grid = picked;
  }
  if (!a.lambda_grid.empty()) {
    std::vector<AblationVariant> sweep;
    for (const auto& v : grid) {
      if (v.name.rfind("lambda=", 0) == 0) continue;
      for (double l : a.lambda_grid) {
        auto copy = v;
        copy.lambda_cd = l;
        copy.name = v.name + fmt::format("@{:g}", l);
        sweep.push_back(copy);
      }
    }
    grid = sweep;
  }
  auto rows = experiment_ablation(cfg, grid);
  emit(a.out, out, [&](auto& o) { write_ablation_table(rows, o); });
}

}  // namespace

int run_cli(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"covr: coverage-aware retrieval toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  Global g;
  app.add_option("--seed", g.seed, "Seed for every stochastic component");
  app.add_option("--threads", g.threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--log-level", g.log_level, "trace, debug, info, warn, error, off");
  app.add_option("--config", g.config, "key=value config file (flags take precedence)");

  SynthArgs synth;
  auto* c_synth = app.add_subcommand("synth", "Generate a planted-nugget synthetic dataset");
  c_synth->add_option("--out", synth.out_dir, "Output directory")->required();
  c_synth->add_option("--queries", synth.data.n_queries);
  c_synth->add_option("--heldout", synth.heldout);
  c_synth->add_option("--nuggets", synth.data.n_nuggets);
  c_synth->add_option("--docs", synth.data.n_docs);
  c_synth->add_option("--tokens-per-nugget", synth.data.tokens_per_nugget);
  c_synth->add_option("--nugget-pool", synth.data.nugget_pool, "Nugget groups shared by all topics");
  c_synth->add_option("--topic-tokens", synth.data.topic_tokens);
  c_synth->add_option("--noise-vocab", synth.data.noise_vocab);
  c_synth->add_option("--min-noise", synth.data.min_noise_tokens);
  c_synth->add_option("--max-noise", synth.data.max_noise_tokens);
  c_synth->add_option("--distractor-rate", synth.data.distractor_rate);
  c_synth->add_option("--nugget-rate", synth.data.nugget_rate);
  c_synth->add_option("--depth", synth.data.candidate_depth, "Candidate list depth");

  SampleArgs sample;
  auto* c_sample = app.add_subcommand("sample", "Build coverage-sampled training pairs");
  c_sample->add_option("--topics", sample.topics)->required();
  c_sample->add_option("--judgments", sample.judgments)->required();
  c_sample->add_option("--candidates", sample.candidates, "Candidate lists (TREC run)")->required();
  c_sample->add_option("--out", sample.out);
  c_sample->add_option("--eta", sample.eta)->check(CLI::Range(0, 5));
  c_sample->add_option("--pos-range", sample.pos_range);
  c_sample->add_option("--neg-range", sample.neg_range);
  c_sample->add_option("--negatives", sample.negatives)->check(CLI::PositiveNumber);
  c_sample->add_option("--rank-floor", sample.rank_floor);

  JudgeArgs judge;
  auto* c_judge = app.add_subcommand("judge", "Grade (document, sub-question) pairs with a remote judge");
  c_judge->add_option("--topics", judge.topics)->required();
  c_judge->add_option("--corpus", judge.corpus)->required();
  c_judge->add_option("--candidates", judge.candidates)->required();
  c_judge->add_option("--out", judge.out);
  c_judge->add_option("--endpoint", judge.endpoint, "Defaults to $COVR_JUDGE_ENDPOINT");
  c_judge->add_option("--model", judge.model, "Defaults to $COVR_JUDGE_MODEL");
  c_judge->add_option("--depth", judge.depth, "Judge the top-N candidates per query");
  c_judge->add_option("--attempts", judge.attempts)->check(CLI::PositiveNumber);
  c_judge->add_option("--backoff-ms", judge.backoff_ms);
  c_judge->add_option("--in-flight", judge.in_flight, "Concurrent requests (default: --threads)");

  CurveArgs curve;
  auto* c_curve = app.add_subcommand("cov-curve", "Accumulated coverage of the top-k candidates");
  c_curve->add_option("--topics", curve.topics)->required();
  c_curve->add_option("--judgments", curve.judgments)->required();
  c_curve->add_option("--candidates", curve.candidates)->required();
  c_curve->add_option("--out", curve.out);
  c_curve->add_option("--tau", curve.tau)->check(CLI::Range(0, 5));
  c_curve->add_option("--kmax", curve.kmax);

  TrainArgs tr;
  auto* c_train = app.add_subcommand("train", "Train the toy bi-encoder with CovCon + CovDistil");
  c_train->add_option("--pairs", tr.pairs)->required();
  c_train->add_option("--corpus", tr.corpus)->required();
  c_train->add_option("--out", tr.out, "Output parameter file")->required();
  c_train->add_option("--init", tr.init, "Start from an existing parameter file");
  c_train->add_option("--trace", tr.trace, "Write the per-batch loss trace (TSV)");
  c_train->add_option("--hidden", tr.hidden)->check(CLI::PositiveNumber);
  c_train->add_option("--dim", tr.dim)->check(CLI::PositiveNumber);
  c_train->add_option("--temperature", tr.cfg.temperature);
  c_train->add_option("--lambda-cd", tr.cfg.lambda_cd);
  c_train->add_option("--learning-rate,--lr", tr.cfg.learning_rate);
  c_train->add_option("--epochs", tr.cfg.epochs)->check(CLI::PositiveNumber);
  c_train->add_option("--queries-per-batch", tr.cfg.queries_per_batch)->check(CLI::PositiveNumber);
  c_train->add_option("--docs-per-query", tr.cfg.docs_per_query);
  c_train->add_option("--teacher-stop-gradient", tr.cfg.teacher_stop_gradient);

  IndexArgs idx;
  auto* c_index = app.add_subcommand("index", "Encode a corpus into a COVR vector file");
  c_index->add_option("--params", idx.params)->required();
  c_index->add_option("--corpus", idx.corpus)->required();
  c_index->add_option("--vectors", idx.vectors, "Output vector file")->required();

  SearchArgs search;
  auto* c_search = app.add_subcommand("search", "Exhaustive dense search for topics");
  c_search->add_option("--params", search.params)->required();
  c_search->add_option("--vectors", search.vectors)->required();
  c_search->add_option("--topics", search.topics)->required();
  c_search->add_option("--k", search.k)->check(CLI::PositiveNumber);
  c_search->add_option("--tag", search.tag);
  c_search->add_option("--out", search.out);

  Bm25Args bm;
  auto* c_bm25 = app.add_subcommand("bm25", "BM25 retrieval");
  c_bm25->add_option("--corpus", bm.corpus)->required();
  c_bm25->add_option("--topics", bm.topics)->required();
  c_bm25->add_option("--k1", bm.k1);
  c_bm25->add_option("--b", bm.b);
  c_bm25->add_option("--k", bm.k)->check(CLI::PositiveNumber);
  c_bm25->add_option("--out", bm.out);

  MmrArgs mmr;
  auto* c_mmr = app.add_subcommand("mmr", "Maximal marginal relevance reranking of a run");
  c_mmr->add_option("--run", mmr.run)->required();
  c_mmr->add_option("--params", mmr.params)->required();
  c_mmr->add_option("--vectors", mmr.vectors)->required();
  c_mmr->add_option("--topics", mmr.topics)->required();
  c_mmr->add_option("--lambda", mmr.lambda)->check(CLI::Range(0.0, 1.0));
  c_mmr->add_option("--k", mmr.k)->check(CLI::PositiveNumber);
  c_mmr->add_option("--out", mmr.out);

  MultiqArgs mq;
  auto* c_multiq = app.add_subcommand("multiq", "Multi-query retrieval with rank fusion");
  c_multiq->add_option("--subqueries", mq.subqueries, "Topics file whose sub_questions are the generated sub-queries");
  c_multiq->add_option("--oracle-subquestions", mq.oracle, "Topics file with golden sub-questions (OracleQ)");
  c_multiq->add_option("--retriever", mq.retriever, "bm25 or dense");
  c_multiq->add_option("--corpus", mq.corpus);
  c_multiq->add_option("--params", mq.params);
  c_multiq->add_option("--vectors", mq.vectors);
  c_multiq->add_option("--fuse", mq.fuse, "rrf, simsum or rrb");
  c_multiq->add_option("--rrf-k", mq.rrf_k);
  c_multiq->add_option("--depth", mq.depth, "Results per sub-query")->check(CLI::PositiveNumber);
  c_multiq->add_option("--k", mq.k)->check(CLI::PositiveNumber);
  c_multiq->add_option("--k1", mq.k1);
  c_multiq->add_option("--b", mq.b);
  c_multiq->add_option("--out", mq.out);

  EvalArgs ev;
  auto* c_eval = app.add_subcommand("eval", "P, nDCG, alpha-nDCG and Cov at k");
  c_eval->add_option("--run", ev.run)->required();
  c_eval->add_option("--qrels", ev.qrels);
  c_eval->add_option("--nuggets", ev.nuggets, "Nugget judgments (JSONL)");
  c_eval->add_option("--topics", ev.topics)->required();
  c_eval->add_option("--k", ev.cfg.k)->check(CLI::PositiveNumber);
  c_eval->add_option("--alpha", ev.cfg.alpha)->check(CLI::Range(0.0, 1.0));
  c_eval->add_option("--threshold", ev.cfg.answerability_threshold, "Nugget containment grade");
  c_eval->add_option("--rel-threshold", ev.cfg.relevance_threshold, "Relevance grade for P@k");
  c_eval->add_flag("--linear-gain", ev.cfg.linear_gain, "nDCG gain = grade");
  c_eval->add_option("--ideal", ev.ideal, "greedy or exhaustive");
  c_eval->add_option("--sig-against", ev.sig_against, "Baseline run for paired t-tests");
  c_eval->add_option("--tsv", ev.tsv, "Per-query TSV output");
  c_eval->add_option("--out", ev.out);

  AblationArgs abl;
  auto* c_abl = app.add_subcommand("ablation", "Sampling-range and distillation-weight ablation on synthetic data");
  c_abl->add_option("--queries", abl.queries);
  c_abl->add_option("--heldout", abl.heldout);
  c_abl->add_option("--docs", abl.docs);
  c_abl->add_option("--nuggets", abl.nuggets);
  c_abl->add_option("--variants", abl.variants)->delimiter(',');
  c_abl->add_option("--lambda-grid", abl.lambda_grid)->delimiter(',');
  c_abl->add_option("--epochs", abl.epochs)->check(CLI::PositiveNumber);
  c_abl->add_option("--lr", abl.lr);
  c_abl->add_option("--out", abl.out);

  std::vector<std::string> args = raw_args;
  try {
    for (std::size_t i = 0; i + 1 < args.size(); ++i) {
      if (args[i] == "--config") args = merge_config(args, read_config_file(args[i + 1]));
    }
    for (const auto& a : raw_args) {
      if (a.rfind("--config=", 0) == 0) args = merge_config(args, read_config_file(a.substr(9)));
    }
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    auto* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << sub->help();
    return 1;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    configure_logging(g.log_level);
    if (c_synth->parsed()) cmd_synth(synth, g);
    else if (c_sample->parsed()) cmd_sample(sample, g, out);
    else if (c_judge->parsed()) cmd_judge(judge, g, out);
    else if (c_curve->parsed()) cmd_cov_curve(curve, out);
    else if (c_train->parsed()) cmd_train(tr, g);
    else if (c_index->parsed()) cmd_index(idx, g);
    else if (c_search->parsed()) cmd_search(search, g, out);
    else if (c_bm25->parsed()) cmd_bm25(bm, g, out);
    else if (c_mmr->parsed()) cmd_mmr(mmr, g, out);
    else if (c_multiq->parsed()) cmd_multiq(mq, g, out);
    else if (c_eval->parsed()) cmd_eval(ev, g, out);
    else if (c_abl->parsed()) cmd_ablation(abl, g, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace covr
