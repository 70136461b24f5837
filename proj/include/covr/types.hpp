#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace covr {

struct Document {
  std::string doc_id;
  std::string title;
  std::string text;

  /// Title and body joined the way the encoders and BM25 consume them.
  std::string full_text() const;
};

struct SubQuestion {
  std::string sq_id;
  std::string text;
};

struct Topic {
  std::string query_id;
  std::string query_text;
  std::vector<SubQuestion> sub_questions;
};

/// Graded answerability judgments J(d, sq) in [0, 5] for one query.
struct NuggetJudgmentSet {
  std::string query_id;
  std::map<std::pair<std::string, std::string>, int> entries;  // (doc_id, sq_id) -> grade

  /// Unjudged pairs read as grade 0.
  int grade(const std::string& doc_id, const std::string& sq_id) const;
  void set(const std::string& doc_id, const std::string& sq_id, int grade);
};

struct Qrels {
  std::string query_id;
  std::map<std::string, int> entries;  // doc_id -> grade

  int grade(const std::string& doc_id) const;
};

struct ScoredDoc {
  std::string doc_id;
  double score = 0.0;

  bool operator==(const ScoredDoc&) const = default;
};

/// The global ordering rule: descending score, then ascending doc_id.
bool ranks_before(const ScoredDoc& a, const ScoredDoc& b);

struct RankedList {
  std::string query_id;
  std::vector<ScoredDoc> items;
  std::string tag;

  /// Sorts with the global tie-break. Throws DataError on duplicate doc ids.
  void normalize();
  void truncate(std::size_t k);
  std::optional<std::size_t> rank_of(const std::string& doc_id) const;  // 1-based
};

template <typename T>
std::map<std::string, const T*> index_by_query(const std::vector<T>& records) {
  std::map<std::string, const T*> out;
  for (const auto& r : records) out.emplace(r.query_id, &r);
  return out;
}

}  // namespace covr
