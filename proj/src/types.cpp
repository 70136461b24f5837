#include "covr/types.hpp"

#include <algorithm>
#include <unordered_set>

#include "covr/error.hpp"

namespace covr {

std::string Document::full_text() const {
  if (title.empty()) return text;
  return title + " " + text;
}

int NuggetJudgmentSet::grade(const std::string& doc_id, const std::string& sq_id) const {
  auto it = entries.find({doc_id, sq_id});
  return it == entries.end() ? 0 : it->second;
}

void NuggetJudgmentSet::set(const std::string& doc_id, const std::string& sq_id, int grade) {
  if (grade < 0 || grade > 5) {
    throw DataError("grade " + std::to_string(grade) + " outside [0, 5]");
  }
  entries[{doc_id, sq_id}] = grade;
}

int Qrels::grade(const std::string& doc_id) const {
  auto it = entries.find(doc_id);
  return it == entries.end() ? 0 : it->second;
}

bool ranks_before(const ScoredDoc& a, const ScoredDoc& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.doc_id < b.doc_id;
}

void RankedList::normalize() {
  std::unordered_set<std::string> seen;
  for (const auto& item : items) {
    if (!seen.insert(item.doc_id).second) {
      throw DataError("duplicate doc_id '" + item.doc_id + "' in ranked list for query '" +
                      query_id + "'");
    }
  }
  std::sort(items.begin(), items.end(), ranks_before);
}

void RankedList::truncate(std::size_t k) {
  if (items.size() > k) items.resize(k);
}

std::optional<std::size_t> RankedList::rank_of(const std::string& doc_id) const {
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i].doc_id == doc_id) return i + 1;
  }
  return std::nullopt;
}

}  // namespace covr
