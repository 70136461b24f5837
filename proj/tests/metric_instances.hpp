#pragma once

// Random small evaluation instances, in both the oracle's raw form and the
// library's data types.

#include <random>
#include <string>

#include "covr/metrics.hpp"
#include "oracles.hpp"

namespace covr::testing {

struct MetricCase {
  oracle::Instance raw;
  RankedList run;
  Qrels qrels;
  NuggetMatrix nuggets;
};

/// Up to `max_docs` judged documents over 1..max_nuggets nuggets; the run
/// ranks a random subset of them plus occasional unjudged documents.
inline MetricCase random_metric_case(std::mt19937_64& rng, std::size_t max_docs, std::size_t max_nuggets) {
  MetricCase c;
  const std::size_t n_docs = 1 + rng() % max_docs;
  const std::size_t n_nuggets = 1 + rng() % max_nuggets;
  c.raw.n_nuggets = n_nuggets;
  c.qrels.query_id = "q";
  c.nuggets.query_id = "q";
  for (std::size_t j = 0; j < n_nuggets; ++j) c.nuggets.nuggets.push_back("n" + std::to_string(j));
  std::vector<std::string> docs;
  for (std::size_t d = 0; d < n_docs; ++d) {
    const std::string id = "d" + std::to_string(d);
    docs.push_back(id);
    const int grade = static_cast<int>(rng() % 4);
    if (rng() % 4 != 0) {
      c.qrels.entries[id] = grade;
      c.raw.grades[id] = grade;
    }
    std::vector<bool> row(n_nuggets, false);
    std::set<std::size_t> holds;
    for (std::size_t j = 0; j < n_nuggets; ++j) {
      if (rng() % 2) {
        row[j] = true;
        holds.insert(j);
      }
    }
    c.nuggets.docs[id] = row;
    c.raw.holds[id] = holds;
  }
  std::shuffle(docs.begin(), docs.end(), rng);
  docs.resize(rng() % (docs.size() + 1));
  if (rng() % 3 == 0) docs.insert(docs.begin() + static_cast<std::ptrdiff_t>(rng() % (docs.size() + 1)), "unjudged");
  c.run.query_id = "q";
  for (std::size_t i = 0; i < docs.size(); ++i) {
    c.run.items.push_back({docs[i], static_cast<double>(docs.size() - i)});
  }
  c.raw.ranking = docs;
  return c;
}

}  // namespace covr::testing
