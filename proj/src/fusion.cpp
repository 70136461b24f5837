#include <algorithm>
#include <map>
#include <unordered_set>

#include "covr/error.hpp"
#include "covr/parallel.hpp"
#include "covr/rankers.hpp"

namespace covr {

namespace {

RankedList finish(std::string query_id, const std::map<std::string, double>& scores,
                  std::string tag, std::size_t k) {
  RankedList out{std::move(query_id), {}, std::move(tag)};
  out.items.reserve(scores.size());
  for (const auto& [doc, s] : scores) out.items.push_back({doc, s});
  std::sort(out.items.begin(), out.items.end(), ranks_before);
  out.truncate(k);
  return out;
}

std::string common_query_id(const std::vector<RankedList>& lists) {
  return lists.empty() ? std::string() : lists.front().query_id;
}

}  // namespace

FusionMethod parse_fusion_method(const std::string& name) {
  if (name == "rrf") return FusionMethod::RRF;
  if (name == "simsum") return FusionMethod::SimSum;
  if (name == "rrb" || name == "round-robin") return FusionMethod::RoundRobin;
  throw UsageError("unknown fusion method '" + name + "' (expected rrf, simsum or rrb)");
}

std::string to_string(FusionMethod m) {
  switch (m) {
    case FusionMethod::RRF:
      return "rrf";
    case FusionMethod::SimSum:
      return "simsum";
    case FusionMethod::RoundRobin:
      return "rrb";
  }
  return "unknown";
}

RankedList fuse_rrf(const std::vector<RankedList>& lists, double rrf_k, std::size_t k) {
  if (!(rrf_k > 0.0)) throw UsageError("rrf_k must be positive");
  std::map<std::string, double> scores;
  for (const auto& list : lists) {
    for (std::size_t i = 0; i < list.items.size(); ++i) {
      scores[list.items[i].doc_id] += 1.0 / (rrf_k + static_cast<double>(i + 1));
    }
  }
  return finish(common_query_id(lists), scores, "rrf", k);
}

RankedList fuse_simsum(const std::vector<RankedList>& lists, std::size_t k) {
  std::map<std::string, double> scores;
  for (const auto& list : lists) {
    for (const auto& item : list.items) scores[item.doc_id] += item.score;
  }
  return finish(common_query_id(lists), scores, "simsum", k);
}

RankedList fuse_round_robin(const std::vector<RankedList>& lists, std::size_t k) {
  RankedList out{common_query_id(lists), {}, "rrb"};
  std::unordered_set<std::string> emitted;
  std::size_t longest = 0;
  for (const auto& l : lists) longest = std::max(longest, l.items.size());
  for (std::size_t r = 0; r < longest && out.items.size() < k; ++r) {
    for (const auto& list : lists) {
      if (out.items.size() >= k) break;
      if (r >= list.items.size()) continue;
      const auto& doc = list.items[r].doc_id;
      if (!emitted.insert(doc).second) continue;
      out.items.push_back({doc, 1.0 / static_cast<double>(out.items.size() + 1)});
    }
  }
  return out;
}

RankedList fuse(const std::vector<RankedList>& lists, const FusionConfig& cfg, std::size_t k) {
  switch (cfg.method) {
    case FusionMethod::RRF:
      return fuse_rrf(lists, cfg.rrf_k, k);
    case FusionMethod::SimSum:
      return fuse_simsum(lists, k);
    case FusionMethod::RoundRobin:
      return fuse_round_robin(lists, k);
  }
  throw UsageError("unknown fusion method");
}

RankedList multi_query_retrieve(const std::string& query_id, const std::vector<std::string>& sub_queries,
                                const Retriever& retriever, const FusionConfig& fusion, std::size_t k,
                                std::size_t workers) {
  if (sub_queries.empty()) throw DataError("multi-query retrieval for '" + query_id + "' has no sub-queries");
  std::vector<RankedList> lists(sub_queries.size());
  parallel_for(sub_queries.size(), workers, [&](std::size_t i) {
    lists[i] = retriever(sub_queries[i], fusion.per_list_depth);
    lists[i].truncate(fusion.per_list_depth);
  });
  auto fused = fuse(lists, fusion, k);
  fused.query_id = query_id;
  return fused;
}

}  // namespace covr
