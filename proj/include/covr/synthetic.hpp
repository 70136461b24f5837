#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "covr/types.hpp"

namespace covr {

/// Planted-nugget corpus generator. Every topic owns a topic token and draws
/// n_nuggets token groups from a pool shared by all topics. Documents are
/// assigned round-robin to topics and composed from a seeded subset of their
/// topic's nugget groups plus noise words from a small shared pool. Judgments
/// follow from the composition (grade 5 if the document carries the nugget's
/// tokens, else 0), so true coverage is known by construction.
struct SyntheticConfig {
  std::uint64_t seed = 0;
  std::size_t n_queries = 60;
  std::size_t n_nuggets = 5;
  std::size_t n_docs = 500;
  std::size_t tokens_per_nugget = 2;
  std::size_t nugget_pool = 60;  // distinct nugget groups shared by all topics
  bool topic_tokens = true;      // per-topic token in queries and on-topic docs
  std::size_t noise_vocab = 10;  // small, stopword-like pool
  std::size_t min_noise_tokens = 20;
  std::size_t max_noise_tokens = 40;
  double distractor_rate = 0.25;  // on-topic documents without any nugget
  double nugget_rate = 0.6;       // inclusion probability of each nugget
  std::size_t candidate_depth = 100;
};

struct SyntheticDataset {
  std::vector<Document> corpus;
  std::vector<Topic> topics;
  std::vector<NuggetJudgmentSet> judgments;
  std::vector<Qrels> qrels;
  std::vector<RankedList> candidates;
  /// doc_id -> indices of the nuggets planted in it.
  std::map<std::string, std::vector<std::size_t>> composition;
  /// doc_id -> owning topic index.
  std::map<std::string, std::size_t> owner;
};

SyntheticDataset make_synthetic_dataset(const SyntheticConfig& cfg);

}  // namespace covr
