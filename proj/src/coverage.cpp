#include "covr/coverage.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <charconv>
#include <random>
#include <set>
#include <unordered_set>

#include "covr/error.hpp"

namespace covr {

namespace {

double parse_bound(const std::string& s, const std::string& spec) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw UsageError("invalid coverage range '" + spec + "'");
  }
  return v;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

CoverageRange CoverageRange::parse(const std::string& spec) {
  auto colon = spec.find(':');
  if (colon == std::string::npos) throw UsageError("coverage range '" + spec + "' must look like a:b");
  std::string lo = spec.substr(0, colon);
  std::string hi = spec.substr(colon + 1);
  bool exclusive = false;
  if (!hi.empty() && hi.back() == ')') {
    exclusive = true;
    hi.pop_back();
  }
  CoverageRange r;
  r.lo = lo.empty() ? -std::numeric_limits<double>::infinity() : parse_bound(lo, spec);
  if (hi.empty()) {
    r.hi = std::numeric_limits<double>::infinity();
  } else {
    r.hi = parse_bound(hi, spec) + (exclusive ? 0.0 : kRangeEpsilon);
  }
  if (!(r.lo < r.hi)) throw UsageError("empty coverage range '" + spec + "'");
  return r;
}

CoverageConfig CoverageConfig::reversed() {
  CoverageConfig cfg;
  cfg.pos_range = CoverageRange::parse(":0");
  cfg.neg_range = CoverageRange::parse("0.75:1.0");
  return cfg;
}

void CoverageConfig::validate() const {
  if (eta < 0 || eta > 5) throw UsageError("eta must be in [0, 5]");
  if (pos_range.overlaps(neg_range)) throw UsageError("positive and negative coverage ranges overlap");
  if (negatives_per_query == 0) throw UsageError("negatives_per_query must be positive");
}

CandidateList CandidateList::from_ranked(const RankedList& list) {
  CandidateList c{list.query_id, {}};
  for (const auto& item : list.items) c.doc_ids.push_back(item.doc_id);
  return c;
}

double coverage_score(const NuggetJudgmentSet& judgments, const Topic& topic,
                      const std::string& doc_id, int eta) {
  if (topic.sub_questions.empty()) {
    throw DataError("topic '" + topic.query_id + "' has no sub-questions");
  }
  std::size_t answered = 0;
  for (const auto& sq : topic.sub_questions) {
    if (judgments.grade(doc_id, sq.sq_id) >= eta) ++answered;
  }
  return static_cast<double>(answered) / static_cast<double>(topic.sub_questions.size());
}

CoverageScoreTable coverage_table(const NuggetJudgmentSet& judgments, const Topic& topic,
                                  const CandidateList& candidates, int eta) {
  CoverageScoreTable table{topic.query_id, {}};
  for (const auto& doc : candidates.doc_ids) {
    table.coverage[doc] = coverage_score(judgments, topic, doc, eta);
  }
  return table;
}

PairSample sample_pairs(const CoverageScoreTable& table, const CandidateList& candidates,
                        const CoverageConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  PairSample out;
  out.query_id = table.query_id;

  std::vector<std::string> high, low;
  for (const auto& [doc, cov] : table.coverage) {
    if (cfg.pos_range.contains(cov)) {
      high.push_back(doc);
    } else if (cfg.neg_range.contains(cov)) {
      low.push_back(doc);
    }
  }
  if (high.empty()) {
    out.skip_reason = "no document with coverage in the positive range";
    spdlog::info("query {}: skipped, {}", table.query_id, out.skip_reason);
    return out;
  }

  std::mt19937_64 rng(seed);
  out.positive = high[static_cast<std::size_t>(rng() % high.size())];

  const std::size_t want = cfg.negatives_per_query;
  if (low.size() > want) {
    // partial Fisher-Yates: the first `want` slots become a uniform sample
    for (std::size_t i = 0; i < want; ++i) {
      const auto j = i + static_cast<std::size_t>(rng() % (low.size() - i));
      std::swap(low[i], low[j]);
    }
    low.resize(want);
  }
  out.negatives = low;

  if (out.negatives.size() < want) {
    std::unordered_set<std::string> used(out.negatives.begin(), out.negatives.end());
    used.insert(*out.positive);
    std::unordered_set<std::string> high_set(high.begin(), high.end());
    for (std::size_t i = cfg.supplement_rank_floor; i < candidates.doc_ids.size(); ++i) {
      if (out.negatives.size() >= want) break;
      const auto& doc = candidates.doc_ids[i];
      if (used.count(doc) || high_set.count(doc)) continue;
      out.negatives.push_back(doc);
      used.insert(doc);
      ++out.supplemented;
    }
  }
  return out;
}

std::vector<std::pair<std::size_t, double>> accumulated_coverage_curve(
    const NuggetJudgmentSet& judgments, const Topic& topic, const std::vector<std::string>& ranked_docs,
    int tau, std::size_t k_max) {
  if (topic.sub_questions.empty()) {
    throw DataError("topic '" + topic.query_id + "' has no sub-questions");
  }
  std::vector<std::pair<std::size_t, double>> curve;
  std::vector<bool> covered(topic.sub_questions.size(), false);
  std::size_t n_covered = 0;
  const double total = static_cast<double>(topic.sub_questions.size());
  for (std::size_t k = 1; k <= k_max; ++k) {
    if (k <= ranked_docs.size()) {
      for (std::size_t j = 0; j < topic.sub_questions.size(); ++j) {
        if (!covered[j] && judgments.grade(ranked_docs[k - 1], topic.sub_questions[j].sq_id) >= tau) {
          covered[j] = true;
          ++n_covered;
        }
      }
    }
    curve.emplace_back(k, static_cast<double>(n_covered) / total);
  }
  return curve;
}

SamplingReport build_training_pairs(const std::vector<Topic>& topics,
                                    const std::vector<NuggetJudgmentSet>& judgments,
                                    const std::vector<RankedList>& candidates,
                                    const CoverageConfig& cfg, std::uint64_t seed) {
  auto judgment_of = index_by_query(judgments);
  auto candidates_of = index_by_query(candidates);
  SamplingReport report;
  for (std::size_t i = 0; i < topics.size(); ++i) {
    const auto& topic = topics[i];
    PairSample skip;
    skip.query_id = topic.query_id;
    auto j = judgment_of.find(topic.query_id);
    auto c = candidates_of.find(topic.query_id);
    if (topic.sub_questions.empty()) {
      skip.skip_reason = "topic has no sub-questions";
    } else if (c == candidates_of.end()) {
      skip.skip_reason = "no candidate list";
    }
    if (!skip.skip_reason.empty()) {
      spdlog::info("query {}: skipped, {}", topic.query_id, skip.skip_reason);
      report.skipped.push_back(std::move(skip));
      continue;
    }
    static const NuggetJudgmentSet kNoJudgments;
    const auto& js = j == judgment_of.end() ? kNoJudgments : *j->second;
    auto cands = CandidateList::from_ranked(*c->second);
    auto table = coverage_table(js, topic, cands, cfg.eta);
    auto sample = sample_pairs(table, cands, cfg, splitmix64(seed + i));
    if (!sample.positive) {
      report.skipped.push_back(std::move(sample));
      continue;
    }
    TrainingPairRecord rec;
    rec.query_id = topic.query_id;
    rec.query = topic.query_text;
    for (const auto& sq : topic.sub_questions) rec.sub_questions.push_back(sq.text);
    rec.positive_doc_id = *sample.positive;
    rec.negative_doc_ids = std::move(sample.negatives);
    report.pairs.push_back(std::move(rec));
  }
  return report;
}

}  // namespace covr
