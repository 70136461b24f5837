#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <cmath>
#include <ostream>

#include "covr/experiment.hpp"

namespace covr {

TrainingConfig PipelineConfig::toy_training_defaults() {
  TrainingConfig t;
  t.temperature = 0.02;
  t.lambda_cd = 0.1;
  t.learning_rate = 0.002;
  t.epochs = 50;
  t.queries_per_batch = 10;
  t.docs_per_query = 8;
  return t;
}

SplitTopics split_topics(const std::vector<Topic>& topics, std::size_t heldout) {
  SplitTopics s;
  const std::size_t n_train = topics.size() > heldout ? topics.size() - heldout : 0;
  s.train.assign(topics.begin(), topics.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.heldout.assign(topics.begin() + static_cast<std::ptrdiff_t>(n_train), topics.end());
  return s;
}

std::vector<RankedList> dense_run(const Encoder& encoder, const std::vector<Document>& corpus,
                                  const std::vector<Topic>& topics, std::size_t depth,
                                  std::size_t workers) {
  std::vector<std::string> doc_ids, doc_texts, q_ids, q_texts;
  for (const auto& d : corpus) {
    doc_ids.push_back(d.doc_id);
    doc_texts.push_back(d.full_text());
  }
  for (const auto& t : topics) {
    q_ids.push_back(t.query_id);
    q_texts.push_back(t.query_text);
  }
  auto docs = encoder.encode_all(doc_ids, doc_texts, EncodeMode::Document, workers);
  auto queries = encoder.encode_all(q_ids, q_texts, EncodeMode::Query, workers);
  return knn_search(queries, docs, depth, workers);
}

namespace {

std::vector<std::string> corpus_texts(const std::vector<Document>& corpus) {
  std::vector<std::string> texts;
  texts.reserve(corpus.size());
  for (const auto& d : corpus) texts.push_back(d.full_text());
  return texts;
}

struct Prepared {
  SyntheticDataset data;
  SplitTopics split;
  Encoder init;
  EvalTable untrained;
};

Prepared prepare(const PipelineConfig& cfg) {
  Prepared p;
  p.data = make_synthetic_dataset(cfg.data);
  p.split = split_topics(p.data.topics, cfg.heldout);
  p.init = make_encoder(Vocabulary::build(corpus_texts(p.data.corpus)), cfg.init_seed, cfg.hidden, cfg.dim);
  auto run = dense_run(p.init, p.data.corpus, p.split.heldout, cfg.search_depth, cfg.workers);
  p.untrained = evaluate_run(run, p.data.qrels, p.data.judgments, p.split.heldout, cfg.eval, cfg.workers);
  return p;
}

struct Trained {
  Encoder encoder;
  EvalTable table;
  std::size_t pairs = 0;
  std::vector<double> losses;
};

Trained train_variant(const Prepared& p, const PipelineConfig& cfg, const CoverageConfig& coverage,
                      const TrainingConfig& training) {
  auto report = build_training_pairs(p.split.train, p.data.judgments, p.data.candidates, coverage,
                                     cfg.data.seed ^ 0x5CA1AB1EULL);
  Trained t;
  t.pairs = report.pairs.size();
  t.encoder = p.init;
  if (!report.pairs.empty()) {
    auto queries = resolve_training_pairs(report.pairs, p.data.corpus, training.docs_per_query);
    auto result = train(queries, p.init, training);
    t.encoder.params = std::move(result.params);
    t.losses = std::move(result.batch_losses);
  } else {
    spdlog::warn("no training pairs under the requested sampling ranges; encoder left untrained");
  }
  auto run = dense_run(t.encoder, p.data.corpus, p.split.heldout, cfg.search_depth, cfg.workers);
  t.table = evaluate_run(run, p.data.qrels, p.data.judgments, p.split.heldout, cfg.eval, cfg.workers);
  return t;
}

TrainingConfig with_workers(TrainingConfig t, std::size_t workers) {
  t.workers = workers;
  return t;
}

}  // namespace

PipelineResult run_coverage_pipeline(const PipelineConfig& cfg) {
  auto p = prepare(cfg);
  auto t = train_variant(p, cfg, cfg.coverage, with_workers(cfg.training, cfg.workers));
  PipelineResult r;
  r.untrained = std::move(p.untrained);
  r.trained = std::move(t.table);
  r.training_pairs = t.pairs;
  r.batch_losses = std::move(t.losses);
  r.encoder = std::move(t.encoder);
  return r;
}

std::string format_range(const CoverageRange& r) {
  auto bound = [](double x) {
    if (std::isinf(x)) return std::string(x < 0 ? "-inf" : "inf");
    return fmt::format("{:g}", std::round(x * 1e6) / 1e6);
  };
  const bool closed_hi = !std::isinf(r.hi) && std::abs(r.hi - std::round(r.hi * 1e6) / 1e6) > 0.0;
  return fmt::format("{}{}, {}{}", std::isinf(r.lo) ? "(" : "[", bound(r.lo), bound(r.hi), closed_hi ? "]" : ")");
}

std::vector<AblationVariant> default_ablation_grid() {
  std::vector<AblationVariant> grid;
  CoverageConfig def;
  grid.push_back({"default", def, 0.1});

  CoverageConfig mid = def;
  mid.pos_range = CoverageRange::parse("0.5:0.75)");
  grid.push_back({"pos[50,75)", mid, 0.1});

  CoverageConfig top = def;
  top.pos_range = CoverageRange::parse("0.75:1.0");
  grid.push_back({"pos[75,100]", top, 0.1});

  grid.push_back({"reversed", CoverageConfig::reversed(), 0.1});

  grid.push_back({"lambda=0", def, 0.0});
  grid.push_back({"lambda=0.25", def, 0.25});
  return grid;
}

std::vector<AblationRow> experiment_ablation(const PipelineConfig& base,
                                             const std::vector<AblationVariant>& grid) {
  auto p = prepare(base);
  std::vector<AblationRow> rows;
  for (const auto& v : grid) {
    auto training = with_workers(base.training, base.workers);
    training.lambda_cd = v.lambda_cd;
    auto t = train_variant(p, base, v.coverage, training);
    AblationRow row;
    row.name = v.name;
    row.pos_range = format_range(v.coverage.pos_range);
    row.neg_range = format_range(v.coverage.neg_range);
    row.lambda_cd = v.lambda_cd;
    row.training_pairs = t.pairs;
    row.base_cov = p.untrained.mean.coverage;
    row.cov = t.table.mean.coverage;
    row.base_alpha_ndcg = p.untrained.mean.alpha_ndcg;
    row.alpha_ndcg = t.table.mean.alpha_ndcg;
    row.base_ndcg = p.untrained.mean.ndcg;
    row.ndcg = t.table.mean.ndcg;
    rows.push_back(row);
  }
  return rows;
}

void write_ablation_table(const std::vector<AblationRow>& rows, std::ostream& out) {
  out << fmt::format("{:<14} {:<14} {:<14} {:>7} {:>6} {:>9} {:>9} {:>14} {:>9}\n", "variant", "positives",
                     "negatives", "lambda", "pairs", "Cov@10", "dCov@10", "d alpha-nDCG", "nDCG@10");
  for (const auto& r : rows) {
    out << fmt::format("{:<14} {:<14} {:<14} {:>7.2f} {:>6} {:>9.4f} {:>+9.4f} {:>+14.4f} {:>9.4f}\n", r.name,
                       r.pos_range, r.neg_range, r.lambda_cd, r.training_pairs, r.cov, r.delta_cov(),
                       r.delta_alpha_ndcg(), r.ndcg);
  }
}

}  // namespace covr
