#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "covr/metrics.hpp"
#include "covr/stats.hpp"
#include "covr/types.hpp"

namespace covr {

struct QueryMetrics {
  std::string query_id;
  double precision = 0.0;
  double ndcg = 0.0;
  double alpha_ndcg = 0.0;
  double coverage = 0.0;
};

struct EvalTable {
  std::vector<QueryMetrics> per_query;  // topic order
  QueryMetrics mean{"all"};
  std::vector<std::string> warnings;
};

/// Scores every judged topic (a topic with qrels or nugget judgments). Topics
/// missing from the run score 0; run queries that aren't judged are skipped
/// with a warning. Topics without sub-questions get 0 for the nugget metrics.
EvalTable evaluate_run(const std::vector<RankedList>& run, const std::vector<Qrels>& qrels,
                       const std::vector<NuggetJudgmentSet>& judgments, const std::vector<Topic>& topics,
                       const EvalConfig& cfg, std::size_t workers = 1);

struct MetricComparison {
  std::string metric;
  double mean_a = 0.0;
  double mean_b = 0.0;
  TTestResult test;
};

/// Paired t-tests per metric over the queries both tables share.
std::vector<MetricComparison> compare_runs(const EvalTable& a, const EvalTable& b);

/// Aligned human-readable table; comparisons (if any) mark significant
/// differences at p < 0.05 with '*'.
void write_eval_table(const EvalTable& table, std::size_t k, std::ostream& out,
                      const std::vector<MetricComparison>& comparisons = {});

/// query_id, P@k, nDCG@k, alpha-nDCG@k, Cov@k per row plus a final "all" row.
void write_eval_tsv(const EvalTable& table, std::size_t k, std::ostream& out);

}  // namespace covr
