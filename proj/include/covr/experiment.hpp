#pragma once

// Synthetic end-to-end runs: synthesize -> sample coverage pairs -> train ->
// dense search -> evaluate on held-out topics, plus the sampling-range and
// distillation-weight ablation grid built on top of it.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "covr/coverage.hpp"
#include "covr/encoder.hpp"
#include "covr/evaluate.hpp"
#include "covr/objectives.hpp"
#include "covr/synthetic.hpp"

namespace covr {

struct PipelineConfig {
  SyntheticConfig data;
  std::size_t heldout = 10;  // last topics are held out from training
  CoverageConfig coverage;
  TrainingConfig training = toy_training_defaults();
  std::size_t hidden = 32;
  std::size_t dim = 16;
  std::uint64_t init_seed = 0;
  EvalConfig eval;
  std::size_t search_depth = 100;
  std::size_t workers = 1;

  /// t = 0.02 and lambda = 0.1 with batch size, step size and epoch count
  /// sized for the synthetic toy setting.
  static TrainingConfig toy_training_defaults();
};

struct SplitTopics {
  std::vector<Topic> train;
  std::vector<Topic> heldout;
};

SplitTopics split_topics(const std::vector<Topic>& topics, std::size_t heldout);

/// Dense top-`depth` run for `topics` over the whole corpus.
std::vector<RankedList> dense_run(const Encoder& encoder, const std::vector<Document>& corpus,
                                  const std::vector<Topic>& topics, std::size_t depth,
                                  std::size_t workers = 1);

struct PipelineResult {
  EvalTable untrained;
  EvalTable trained;
  std::size_t training_pairs = 0;
  std::vector<double> batch_losses;
  Encoder encoder;  // trained
};

PipelineResult run_coverage_pipeline(const PipelineConfig& cfg);

struct AblationVariant {
  std::string name;
  CoverageConfig coverage;
  double lambda_cd = 0.1;
};

/// Sampling ranges (default, bounded high range, top range, reversed) at
/// lambda_cd 0.1, plus the distillation-weight sweep {0, 0.1, 0.25} under
/// default sampling.
std::vector<AblationVariant> default_ablation_grid();

struct AblationRow {
  std::string name;
  std::string pos_range;
  std::string neg_range;
  double lambda_cd = 0.0;
  std::size_t training_pairs = 0;
  double base_cov = 0.0;
  double cov = 0.0;
  double base_alpha_ndcg = 0.0;
  double alpha_ndcg = 0.0;
  double base_ndcg = 0.0;
  double ndcg = 0.0;

  double delta_cov() const { return cov - base_cov; }
  double delta_alpha_ndcg() const { return alpha_ndcg - base_alpha_ndcg; }
};

/// Trains every variant from the same initialization on the same data and
/// reports held-out deltas against the untrained encoder.
std::vector<AblationRow> experiment_ablation(const PipelineConfig& base,
                                             const std::vector<AblationVariant>& grid);

void write_ablation_table(const std::vector<AblationRow>& rows, std::ostream& out);

std::string format_range(const CoverageRange& r);

}  // namespace covr
