#include <algorithm>
#include <cmath>
#include <set>

#include "covr/error.hpp"
#include "covr/rankers.hpp"
#include "covr/text.hpp"

namespace covr {

Bm25Index::Bm25Index(const std::vector<Document>& corpus, double k1, double b) : k1_(k1), b_(b) {
  if (k1 < 0.0 || b < 0.0 || b > 1.0) throw UsageError("BM25 needs k1 >= 0 and b in [0, 1]");
  double total = 0.0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& doc = corpus[i];
    if (!doc_index_.emplace(doc.doc_id, static_cast<std::uint32_t>(i)).second) {
      throw DataError("duplicate doc_id '" + doc.doc_id + "'");
    }
    doc_ids_.push_back(doc.doc_id);
    auto tokens = tokenize(doc.full_text());
    doc_len_.push_back(static_cast<std::uint32_t>(tokens.size()));
    total += static_cast<double>(tokens.size());
    std::unordered_map<std::string, std::uint32_t> tf;
    for (auto& t : tokens) ++tf[t];
    for (auto& [term, count] : tf) {
      postings_[term].push_back({static_cast<std::uint32_t>(i), count});
    }
  }
  avg_len_ = corpus.empty() ? 0.0 : total / static_cast<double>(corpus.size());
}

std::vector<std::string> Bm25Index::query_terms(const std::string& query) const {
  auto tokens = tokenize(query);
  std::set<std::string> unique(tokens.begin(), tokens.end());
  return {unique.begin(), unique.end()};
}

double Bm25Index::idf(const std::string& term) const {
  const double n = static_cast<double>(doc_ids_.size());
  auto it = postings_.find(term);
  const double df = it == postings_.end() ? 0.0 : static_cast<double>(it->second.size());
  return std::log((n - df + 0.5) / (df + 0.5) + 1.0);
}

double Bm25Index::term_weight(double idf, std::uint32_t tf, std::uint32_t len) const {
  const double f = static_cast<double>(tf);
  const double norm = avg_len_ > 0.0 ? static_cast<double>(len) / avg_len_ : 0.0;
  return idf * f * (k1_ + 1.0) / (f + k1_ * (1.0 - b_ + b_ * norm));
}

RankedList Bm25Index::search(const std::string& query_id, const std::string& query, std::size_t k) const {
  RankedList out{query_id, {}, "bm25"};
  std::unordered_map<std::uint32_t, double> acc;
  for (const auto& term : query_terms(query)) {
    auto it = postings_.find(term);
    if (it == postings_.end()) continue;
    const double w = idf(term);
    for (const auto& p : it->second) acc[p.doc] += term_weight(w, p.tf, doc_len_[p.doc]);
  }
  out.items.reserve(acc.size());
  for (const auto& [doc, s] : acc) out.items.push_back({doc_ids_[doc], s});
  std::sort(out.items.begin(), out.items.end(), ranks_before);
  out.truncate(k);
  return out;
}

double Bm25Index::score(const std::string& query, const std::string& doc_id) const {
  auto d = doc_index_.find(doc_id);
  if (d == doc_index_.end()) throw DataError("unknown doc_id '" + doc_id + "'");
  double s = 0.0;
  for (const auto& term : query_terms(query)) {
    auto it = postings_.find(term);
    if (it == postings_.end()) continue;
    auto p = std::lower_bound(it->second.begin(), it->second.end(), d->second,
                              [](const Posting& a, std::uint32_t doc) { return a.doc < doc; });
    if (p != it->second.end() && p->doc == d->second) s += term_weight(idf(term), p->tf, doc_len_[p->doc]);
  }
  return s;
}

}  // namespace covr
