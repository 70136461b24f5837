#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "covr/formats.hpp"
#include "covr/types.hpp"

namespace covr {

/// Half-open interval [lo, hi). lo may be -infinity.
struct CoverageRange {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double x) const { return x >= lo && x < hi; }
  bool overlaps(const CoverageRange& o) const { return lo < o.hi && o.lo < hi; }

  /// Parses "a:b" with either side optional. The upper bound is inclusive as
  /// written ("0.5:1.0" admits 1.0, ":0" admits exactly 0), which is stored as
  /// hi = b + kRangeEpsilon. An empty upper bound means +infinity and an empty
  /// lower bound -infinity.
  static CoverageRange parse(const std::string& spec);
};

inline constexpr double kRangeEpsilon = 1e-9;

struct CoverageConfig {
  int eta = 4;
  CoverageRange pos_range{0.5, 1.0 + kRangeEpsilon};
  CoverageRange neg_range{-std::numeric_limits<double>::infinity(), 0.0 + kRangeEpsilon};
  std::size_t negatives_per_query = 16;
  std::size_t supplement_rank_floor = 50;

  /// Positives from zero-coverage documents, negatives from coverage >= 0.75.
  static CoverageConfig reversed();
  void validate() const;
};

struct CandidateList {
  std::string query_id;
  std::vector<std::string> doc_ids;  // doc_ids[i] has candidate rank i + 1

  static CandidateList from_ranked(const RankedList& list);
};

struct CoverageScoreTable {
  std::string query_id;
  std::map<std::string, double> coverage;
};

/// #{sq : J(d, sq) >= eta} / |SQ|, unjudged pairs counting as grade 0.
double coverage_score(const NuggetJudgmentSet& judgments, const Topic& topic,
                      const std::string& doc_id, int eta);

/// Coverage of every candidate document.
CoverageScoreTable coverage_table(const NuggetJudgmentSet& judgments, const Topic& topic,
                                  const CandidateList& candidates, int eta);

struct PairSample {
  std::string query_id;
  std::optional<std::string> positive;  // unset when the query was skipped
  std::vector<std::string> negatives;
  std::size_t supplemented = 0;         // negatives taken from below the rank floor
  std::string skip_reason;
};

/// Draws one positive from D_HC and up to negatives_per_query negatives from
/// D_LC (uniformly, seeded), then tops the negatives up with candidates ranked
/// below supplement_rank_floor in rank order. Documents in D_HC are never used
/// as negatives. An empty D_HC yields a skip record, not an error.
PairSample sample_pairs(const CoverageScoreTable& table, const CandidateList& candidates,
                        const CoverageConfig& cfg, std::uint64_t seed);

/// Coverage of the union of sub-questions answered (grade >= tau) by the top-k
/// candidates, for k = 1..k_max. Candidates run out -> the curve stays flat.
std::vector<std::pair<std::size_t, double>> accumulated_coverage_curve(
    const NuggetJudgmentSet& judgments, const Topic& topic, const std::vector<std::string>& ranked_docs,
    int tau, std::size_t k_max);

/// Runs sample_pairs over all topics that have judgments and candidates and
/// emits training-pair records for the objectives module. Per-query seeds are
/// derived from `seed` and the topic position.
struct SamplingReport {
  std::vector<TrainingPairRecord> pairs;
  std::vector<PairSample> skipped;
};

SamplingReport build_training_pairs(const std::vector<Topic>& topics,
                                    const std::vector<NuggetJudgmentSet>& judgments,
                                    const std::vector<RankedList>& candidates,
                                    const CoverageConfig& cfg, std::uint64_t seed);

}  // namespace covr
