#include "covr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "covr/error.hpp"

namespace covr {

void EvalConfig::validate() const {
  if (k == 0) throw UsageError("metric cutoff k must be positive");
  if (alpha < 0.0 || alpha > 1.0) throw UsageError("alpha must be in [0, 1]");
}

const std::vector<bool>* NuggetMatrix::row(const std::string& doc_id) const {
  auto it = docs.find(doc_id);
  return it == docs.end() ? nullptr : &it->second;
}

NuggetMatrix make_nugget_matrix(const NuggetJudgmentSet& judgments, const Topic& topic, int threshold) {
  NuggetMatrix m;
  m.query_id = topic.query_id;
  std::map<std::string, std::size_t> column;
  for (std::size_t j = 0; j < topic.sub_questions.size(); ++j) {
    m.nuggets.push_back(topic.sub_questions[j].sq_id);
    column.emplace(topic.sub_questions[j].sq_id, j);
  }
  for (const auto& [key, grade] : judgments.entries) {
    auto col = column.find(key.second);
    if (col == column.end()) continue;  // judgment for a sub-question the topic doesn't list
    auto& row = m.docs[key.first];
    if (row.empty()) row.assign(m.nuggets.size(), false);
    if (grade >= threshold) row[col->second] = true;
  }
  return m;
}

namespace {

double discount(std::size_t rank) { return 1.0 / std::log2(static_cast<double>(rank) + 1.0); }

double gain(int grade, bool linear) {
  if (grade <= 0) return 0.0;
  return linear ? static_cast<double>(grade) : std::exp2(static_cast<double>(grade)) - 1.0;
}

// Gain of a document given how often each nugget was already seen.
double novelty_gain(const std::vector<bool>& row, const std::vector<std::size_t>& seen, double alpha) {
  double g = 0.0;
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (row[j]) g += std::pow(1.0 - alpha, static_cast<double>(seen[j]));
  }
  return g;
}

}  // namespace

double precision_at_k(const RankedList& list, const Qrels& qrels, const EvalConfig& cfg) {
  cfg.validate();
  std::size_t hits = 0;
  const std::size_t n = std::min(cfg.k, list.items.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (qrels.grade(list.items[i].doc_id) >= cfg.relevance_threshold) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(cfg.k);
}

double ndcg_at_k(const RankedList& list, const Qrels& qrels, const EvalConfig& cfg) {
  cfg.validate();
  double dcg = 0.0;
  const std::size_t n = std::min(cfg.k, list.items.size());
  for (std::size_t i = 0; i < n; ++i) {
    dcg += gain(qrels.grade(list.items[i].doc_id), cfg.linear_gain) * discount(i + 1);
  }
  std::vector<int> grades;
  for (const auto& [doc, g] : qrels.entries) grades.push_back(g);
  std::sort(grades.begin(), grades.end(), std::greater<>());
  double ideal = 0.0;
  for (std::size_t i = 0; i < std::min(cfg.k, grades.size()); ++i) {
    ideal += gain(grades[i], cfg.linear_gain) * discount(i + 1);
  }
  return ideal > 0.0 ? dcg / ideal : 0.0;
}

double cov_at_k(const RankedList& list, const NuggetMatrix& nuggets, const EvalConfig& cfg) {
  cfg.validate();
  if (nuggets.nugget_count() == 0) throw DataError("query '" + nuggets.query_id + "' has no nuggets");
  std::vector<bool> covered(nuggets.nugget_count(), false);
  const std::size_t n = std::min(cfg.k, list.items.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (const auto* row = nuggets.row(list.items[i].doc_id)) {
      for (std::size_t j = 0; j < row->size(); ++j) covered[j] = covered[j] || (*row)[j];
    }
  }
  const auto count = std::count(covered.begin(), covered.end(), true);
  return static_cast<double>(count) / static_cast<double>(nuggets.nugget_count());
}

double alpha_dcg(const std::vector<std::string>& order, const NuggetMatrix& nuggets, double alpha,
                 std::size_t k) {
  std::vector<std::size_t> seen(nuggets.nugget_count(), 0);
  double dcg = 0.0;
  const std::size_t n = std::min(k, order.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto* row = nuggets.row(order[i]);
    if (!row) continue;
    dcg += novelty_gain(*row, seen, alpha) * discount(i + 1);
    for (std::size_t j = 0; j < row->size(); ++j) seen[j] += (*row)[j] ? 1 : 0;
  }
  return dcg;
}

std::vector<std::string> greedy_ideal_order(const NuggetMatrix& nuggets, double alpha, std::size_t k) {
  std::vector<std::string> remaining;
  for (const auto& [doc, row] : nuggets.docs) remaining.push_back(doc);  // ascending doc id
  std::vector<std::size_t> seen(nuggets.nugget_count(), 0);
  std::vector<std::string> order;
  while (order.size() < k && !remaining.empty()) {
    std::size_t best = 0;
    double best_gain = -1.0;
    for (std::size_t i = 0; i < remaining.size(); ++i) {
      const double g = novelty_gain(nuggets.docs.at(remaining[i]), seen, alpha);
      if (g > best_gain) {  // strict: earlier (smaller) doc id wins ties
        best = i;
        best_gain = g;
      }
    }
    const auto& row = nuggets.docs.at(remaining[best]);
    for (std::size_t j = 0; j < row.size(); ++j) seen[j] += row[j] ? 1 : 0;
    order.push_back(remaining[best]);
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best));
  }
  return order;
}

double alpha_dcg_ideal(const NuggetMatrix& nuggets, double alpha, std::size_t k, IdealMode mode) {
  if (mode == IdealMode::Greedy) {
    return alpha_dcg(greedy_ideal_order(nuggets, alpha, k), nuggets, alpha, k);
  }
  if (nuggets.docs.size() > kMaxExhaustiveDocs) {
    throw DataError("exhaustive ideal supports at most " + std::to_string(kMaxExhaustiveDocs) +
                    " judged documents, query '" + nuggets.query_id + "' has " +
                    std::to_string(nuggets.docs.size()));
  }
  std::vector<std::string> order;
  for (const auto& [doc, row] : nuggets.docs) order.push_back(doc);
  double best = 0.0;
  do {
    best = std::max(best, alpha_dcg(order, nuggets, alpha, k));
  } while (std::next_permutation(order.begin(), order.end()));
  return best;
}

double alpha_ndcg_at_k(const RankedList& list, const NuggetMatrix& nuggets, const EvalConfig& cfg) {
  cfg.validate();
  if (nuggets.nugget_count() == 0) throw DataError("query '" + nuggets.query_id + "' has no nuggets");
  std::vector<std::string> order;
  order.reserve(list.items.size());
  for (const auto& item : list.items) order.push_back(item.doc_id);
  const double ideal = alpha_dcg_ideal(nuggets, cfg.alpha, cfg.k, cfg.ideal_mode);
  if (!(ideal > 0.0)) return 0.0;
  return alpha_dcg(order, nuggets, cfg.alpha, cfg.k) / ideal;
}

}  // namespace covr
