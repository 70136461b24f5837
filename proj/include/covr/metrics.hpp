#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "covr/types.hpp"

namespace covr {

enum class IdealMode { Greedy, Exhaustive };

struct EvalConfig {
  std::size_t k = 10;
  double alpha = 0.5;
  int answerability_threshold = 4;  // grade >= threshold: document contains the nugget
  int relevance_threshold = 1;      // grade >= threshold: relevant for P@k
  IdealMode ideal_mode = IdealMode::Greedy;
  bool linear_gain = false;         // nDCG gain = grade instead of 2^grade - 1

  void validate() const;
};

/// Binary document x nugget containment for one query. Nuggets are the
/// topic's sub-questions in topic order; `docs` holds every judged document,
/// including ones that contain nothing.
struct NuggetMatrix {
  std::string query_id;
  std::vector<std::string> nuggets;
  std::map<std::string, std::vector<bool>> docs;

  std::size_t nugget_count() const { return nuggets.size(); }
  /// Row for a document; unjudged documents contain nothing.
  const std::vector<bool>* row(const std::string& doc_id) const;
};

NuggetMatrix make_nugget_matrix(const NuggetJudgmentSet& judgments, const Topic& topic, int threshold);

double precision_at_k(const RankedList& list, const Qrels& qrels, const EvalConfig& cfg);
double ndcg_at_k(const RankedList& list, const Qrels& qrels, const EvalConfig& cfg);

/// |union of nuggets in the top k| / nugget count. DataError without nuggets.
double cov_at_k(const RankedList& list, const NuggetMatrix& nuggets, const EvalConfig& cfg);

/// Novelty-discounted DCG divided by the ideal (greedy or exhaustive over the
/// judged documents). Exhaustive with more than 8 judged documents raises
/// DataError.
double alpha_ndcg_at_k(const RankedList& list, const NuggetMatrix& nuggets, const EvalConfig& cfg);

/// alpha-DCG@k of an explicit document order.
double alpha_dcg(const std::vector<std::string>& order, const NuggetMatrix& nuggets, double alpha,
                 std::size_t k);

/// Ideal alpha-DCG@k under the given mode.
double alpha_dcg_ideal(const NuggetMatrix& nuggets, double alpha, std::size_t k, IdealMode mode);

/// Document order chosen by the greedy ideal (ties by ascending doc id).
std::vector<std::string> greedy_ideal_order(const NuggetMatrix& nuggets, double alpha, std::size_t k);

inline constexpr std::size_t kMaxExhaustiveDocs = 8;

}  // namespace covr
