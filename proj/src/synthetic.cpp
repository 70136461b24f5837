#include "covr/synthetic.hpp"

#include <algorithm>
#include <random>

#include "covr/error.hpp"

namespace covr {

namespace {

std::string padded(const char* prefix, std::size_t i, std::size_t width) {
  std::string digits = std::to_string(i);
  if (digits.size() < width) digits.insert(0, width - digits.size(), '0');
  return prefix + digits;
}

std::size_t width_for(std::size_t n) { return std::to_string(n > 0 ? n - 1 : 0).size(); }

std::string topic_token(std::size_t q) { return "t" + std::to_string(q); }

// Uniform integer in [0, n) from the raw engine output; stable across
// standard library implementations.
std::size_t draw_index(std::mt19937_64& rng, std::size_t n) {
  return static_cast<std::size_t>(rng() % n);
}

double draw_unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

SyntheticDataset make_synthetic_dataset(const SyntheticConfig& cfg) {
  if (cfg.n_queries == 0 || cfg.n_nuggets == 0 || cfg.n_docs == 0 || cfg.tokens_per_nugget == 0 ||
      cfg.noise_vocab == 0) {
    throw DataError("synthetic dataset sizes must be positive");
  }
  if (cfg.min_noise_tokens > cfg.max_noise_tokens) throw DataError("min_noise_tokens > max_noise_tokens");
  if (cfg.nugget_pool < cfg.n_nuggets) throw DataError("nugget_pool must hold n_nuggets distinct groups");

  std::mt19937_64 rng(cfg.seed);
  SyntheticDataset ds;
  const auto qwidth = width_for(cfg.n_queries);
  const auto dwidth = width_for(cfg.n_docs);

  // Nugget token groups live in a pool shared by all topics; each topic draws
  // n_nuggets distinct groups from it.
  std::vector<std::vector<std::string>> groups(cfg.nugget_pool);
  for (std::size_t g = 0; g < cfg.nugget_pool; ++g) {
    for (std::size_t w = 0; w < cfg.tokens_per_nugget; ++w) {
      groups[g].push_back("f" + std::to_string(g) + static_cast<char>('a' + w % 26) +
                          (w >= 26 ? std::to_string(w / 26) : std::string()));
    }
  }
  std::vector<std::vector<std::vector<std::string>>> nugget_words(cfg.n_queries);
  std::vector<std::size_t> pool(cfg.nugget_pool);
  for (std::size_t q = 0; q < cfg.n_queries; ++q) {
    for (std::size_t k = 0; k < pool.size(); ++k) pool[k] = k;
    for (std::size_t j = 0; j < cfg.n_nuggets; ++j) {
      std::swap(pool[j], pool[j + draw_index(rng, pool.size() - j)]);
      nugget_words[q].push_back(groups[pool[j]]);
    }
  }

  for (std::size_t q = 0; q < cfg.n_queries; ++q) {
    Topic t;
    t.query_id = padded("q", q, qwidth);
    const std::string topic = cfg.topic_tokens ? topic_token(q) : std::string();
    std::string query = topic;
    for (std::size_t j = 0; j < cfg.n_nuggets; ++j) {
      if (!query.empty()) query += ' ';
      query += nugget_words[q][j][0];
      std::string sq = topic;
      for (const auto& w : nugget_words[q][j]) sq += (sq.empty() ? "" : " ") + w;
      t.sub_questions.push_back({padded("s", j, width_for(cfg.n_nuggets)), sq});
    }
    t.query_text = query;
    ds.topics.push_back(std::move(t));
    ds.judgments.push_back(NuggetJudgmentSet{ds.topics.back().query_id, {}});
    ds.qrels.push_back(Qrels{ds.topics.back().query_id, {}});
  }

  std::vector<std::vector<std::size_t>> topic_docs(cfg.n_queries);
  for (std::size_t i = 0; i < cfg.n_docs; ++i) {
    const std::size_t q = i % cfg.n_queries;
    Document doc;
    doc.doc_id = padded("d", i, dwidth);

    std::vector<std::size_t> nuggets;
    if (draw_unit(rng) >= cfg.distractor_rate) {
      for (std::size_t j = 0; j < cfg.n_nuggets; ++j) {
        if (draw_unit(rng) < cfg.nugget_rate) nuggets.push_back(j);
      }
      if (nuggets.empty()) nuggets.push_back(draw_index(rng, cfg.n_nuggets));
    }

    std::vector<std::string> words;
    if (cfg.topic_tokens) words.push_back(topic_token(q));
    for (auto j : nuggets) {
      for (const auto& w : nugget_words[q][j]) words.push_back(w);
    }
    const std::size_t n_noise =
        cfg.min_noise_tokens + draw_index(rng, cfg.max_noise_tokens - cfg.min_noise_tokens + 1);
    for (std::size_t k = 0; k < n_noise; ++k) words.push_back("w" + std::to_string(draw_index(rng, cfg.noise_vocab)));
    for (std::size_t k = words.size(); k > 1; --k) std::swap(words[k - 1], words[draw_index(rng, k)]);
    for (std::size_t k = 0; k < words.size(); ++k) {
      if (k > 0) doc.text += ' ';
      doc.text += words[k];
    }

    auto& js = ds.judgments[q];
    for (std::size_t j = 0; j < cfg.n_nuggets; ++j) {
      const bool has = std::find(nuggets.begin(), nuggets.end(), j) != nuggets.end();
      js.set(doc.doc_id, ds.topics[q].sub_questions[j].sq_id, has ? 5 : 0);
    }
    ds.qrels[q].entries[doc.doc_id] = nuggets.empty() ? 1 : 2;
    ds.composition[doc.doc_id] = nuggets;
    ds.owner[doc.doc_id] = q;
    topic_docs[q].push_back(i);
    ds.corpus.push_back(std::move(doc));
  }

  // Candidate lists mimic a reranked first stage: on-topic documents first,
  // most nuggets first, then off-topic filler down to candidate_depth.
  for (std::size_t q = 0; q < cfg.n_queries; ++q) {
    auto on_topic = topic_docs[q];
    std::stable_sort(on_topic.begin(), on_topic.end(), [&](std::size_t a, std::size_t b) {
      return ds.composition[ds.corpus[a].doc_id].size() > ds.composition[ds.corpus[b].doc_id].size();
    });
    std::vector<std::size_t> off_topic;
    for (std::size_t i = 0; i < cfg.n_docs; ++i) {
      if (i % cfg.n_queries != q) off_topic.push_back(i);
    }
    for (std::size_t k = off_topic.size(); k > 1; --k) std::swap(off_topic[k - 1], off_topic[draw_index(rng, k)]);

    RankedList list{ds.topics[q].query_id, {}, "synthetic"};
    auto push = [&](std::size_t i) {
      const double score = static_cast<double>(cfg.candidate_depth - list.items.size());
      list.items.push_back({ds.corpus[i].doc_id, score});
    };
    for (auto i : on_topic) {
      if (list.items.size() >= cfg.candidate_depth) break;
      push(i);
    }
    for (auto i : off_topic) {
      if (list.items.size() >= cfg.candidate_depth) break;
      push(i);
    }
    ds.candidates.push_back(std::move(list));
  }
  return ds;
}

}  // namespace covr
