#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "covr/embedding.hpp"
#include "covr/types.hpp"

namespace covr {

struct Posting {
  std::uint32_t doc;  // index into the corpus order
  std::uint32_t tf;
};

/// Inverted index with Robertson BM25 scoring:
///   idf(t)   = ln((N - df + 0.5) / (df + 0.5) + 1)
///   score(d) = sum_t idf(t) * tf (k1 + 1) / (tf + k1 (1 - b + b len / avglen))
/// Repeated query terms are scored once.
class Bm25Index {
 public:
  Bm25Index(const std::vector<Document>& corpus, double k1 = 0.9, double b = 0.4);

  RankedList search(const std::string& query_id, const std::string& query, std::size_t k) const;

  /// Score of one document for a query; 0 when no term matches.
  double score(const std::string& query, const std::string& doc_id) const;

  double idf(const std::string& term) const;
  std::size_t doc_count() const noexcept { return doc_ids_.size(); }
  double average_length() const noexcept { return avg_len_; }

 private:
  double k1_;
  double b_;
  std::vector<std::string> doc_ids_;
  std::vector<std::uint32_t> doc_len_;
  double avg_len_ = 0.0;
  std::unordered_map<std::string, std::vector<Posting>> postings_;  // sorted by doc id
  std::unordered_map<std::string, std::uint32_t> doc_index_;

  std::vector<std::string> query_terms(const std::string& query) const;
  double term_weight(double idf, std::uint32_t tf, std::uint32_t len) const;
};

/// Greedy maximal marginal relevance over the candidates in `base`:
///   argmax_d lambda cos(q, d) - (1 - lambda) max_{s in selected} cos(d, s)
/// Scores in the result are the marginal values at selection time. Missing
/// vectors raise DataError naming the doc id.
RankedList mmr_rerank(const RankedList& base, const EmbeddingMatrix& doc_vectors,
                      std::span<const double> query_vector, double lambda, std::size_t k);

enum class FusionMethod { RRF, SimSum, RoundRobin };

FusionMethod parse_fusion_method(const std::string& name);
std::string to_string(FusionMethod m);

struct FusionConfig {
  FusionMethod method = FusionMethod::RRF;
  double rrf_k = 60.0;
  std::size_t per_list_depth = 100;
};

/// sum over lists of 1 / (rrf_k + rank), ranks 1-based.
RankedList fuse_rrf(const std::vector<RankedList>& lists, double rrf_k, std::size_t k);

/// sum over lists of the raw score, absent documents contributing 0.
RankedList fuse_simsum(const std::vector<RankedList>& lists, std::size_t k);

/// Rank-1 of every list in list order, then rank-2, ... skipping documents
/// already emitted. Scores are 1 / output position.
RankedList fuse_round_robin(const std::vector<RankedList>& lists, std::size_t k);

RankedList fuse(const std::vector<RankedList>& lists, const FusionConfig& cfg, std::size_t k);

/// (query text, depth) -> ranked list for that text.
using Retriever = std::function<RankedList(const std::string& text, std::size_t depth)>;

/// Retrieves per_list_depth results for each sub-query and fuses them. Feeding
/// the golden sub-questions of a topic gives the oracle multi-query setting.
RankedList multi_query_retrieve(const std::string& query_id, const std::vector<std::string>& sub_queries,
                                const Retriever& retriever, const FusionConfig& fusion, std::size_t k,
                                std::size_t workers = 1);

}  // namespace covr
