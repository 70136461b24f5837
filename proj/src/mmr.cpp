#include <algorithm>
#include <limits>

#include "covr/error.hpp"
#include "covr/rankers.hpp"

namespace covr {

RankedList mmr_rerank(const RankedList& base, const EmbeddingMatrix& doc_vectors,
                      std::span<const double> query_vector, double lambda, std::size_t k) {
  if (lambda < 0.0 || lambda > 1.0) throw UsageError("MMR lambda must be in [0, 1]");
  const std::size_t n = base.items.size();
  std::vector<std::span<const double>> vecs;
  std::vector<double> relevance;
  vecs.reserve(n);
  for (const auto& item : base.items) {
    auto idx = doc_vectors.find(item.doc_id);
    if (!idx) throw DataError("no vector for doc '" + item.doc_id + "'");
    vecs.push_back(doc_vectors.row(*idx));
    relevance.push_back(cosine(query_vector, vecs.back()));
  }

  RankedList out{base.query_id, {}, "mmr"};
  std::vector<bool> taken(n, false);
  // max similarity of each candidate to anything selected so far
  std::vector<double> redundancy(n, -std::numeric_limits<double>::infinity());
  const std::size_t steps = std::min(k, n);
  for (std::size_t step = 0; step < steps; ++step) {
    std::size_t best = n;
    double best_value = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (taken[i]) continue;
      const double penalty = step == 0 ? 0.0 : redundancy[i];
      const double value = lambda * relevance[i] - (1.0 - lambda) * penalty;
      if (best == n || value > best_value ||
          (value == best_value && base.items[i].doc_id < base.items[best].doc_id)) {
        best = i;
        best_value = value;
      }
    }
    taken[best] = true;
    out.items.push_back({base.items[best].doc_id, best_value});
    for (std::size_t i = 0; i < n; ++i) {
      if (!taken[i]) redundancy[i] = std::max(redundancy[i], cosine(vecs[i], vecs[best]));
    }
  }
  return out;
}

}  // namespace covr
