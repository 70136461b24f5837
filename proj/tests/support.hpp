#pragma once

// Shared fixtures: small random encoders and batches, finite differences.

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "covr/encoder.hpp"
#include "covr/objectives.hpp"

namespace covr::testing {

inline std::string random_text(std::mt19937_64& rng, std::size_t vocab, std::size_t min_len,
                               std::size_t max_len) {
  std::uniform_int_distribution<std::size_t> len(min_len, max_len);
  std::uniform_int_distribution<std::size_t> tok(0, vocab - 1);
  std::string s;
  const auto n = len(rng);
  for (std::size_t i = 0; i < n; ++i) s += "a" + std::to_string(tok(rng)) + " ";
  return s;
}

inline Vocabulary toy_vocab(std::size_t v) {
  std::vector<std::string> tokens;
  for (std::size_t i = 0; i < v; ++i) tokens.push_back("a" + std::to_string(i));
  return Vocabulary(tokens);
}

/// Encoder whose parameters are scaled up from the default init so that
/// scores span a useful range.
inline Encoder toy_encoder(std::uint64_t seed, std::size_t v, std::size_t hidden, std::size_t dim,
                           double scale = 5.0) {
  Encoder e{toy_vocab(v), init_params(seed, v, hidden, dim)};
  for (auto block : e.params.blocks()) {
    for (double& x : block) x *= scale;
  }
  return e;
}

inline TrainingBatch toy_batch(std::mt19937_64& rng, std::size_t v, std::size_t queries,
                               std::size_t negatives, std::size_t sub_questions) {
  TrainingBatch batch;
  std::size_t doc = 0;
  for (std::size_t q = 0; q < queries; ++q) {
    TrainingQuery tq;
    tq.query_id = "q" + std::to_string(q);
    tq.query = random_text(rng, v, 2, 5);
    for (std::size_t s = 0; s < sub_questions; ++s) tq.sub_questions.push_back(random_text(rng, v, 2, 5));
    tq.positive_id = "d" + std::to_string(doc++);
    tq.positive_text = random_text(rng, v, 3, 10);
    for (std::size_t n = 0; n < negatives; ++n) {
      tq.negative_ids.push_back("d" + std::to_string(doc++));
      tq.negative_texts.push_back(random_text(rng, v, 3, 10));
    }
    batch.push_back(std::move(tq));
  }
  return batch;
}

/// |a - n| / max(|a|, |n|, 1): relative where the gradient is large, absolute
/// where it is small.
inline double grad_error(double analytic, double numeric) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), 1.0});
  return std::abs(analytic - numeric) / scale;
}

/// Max error between an analytic gradient and central differences of `f`
/// over every parameter.
inline double max_fd_error(EncoderParams params, const EncoderParams& analytic,
                           const std::function<double(const EncoderParams&)>& f, double h = 1e-5) {
  double worst = 0.0;
  auto blocks = params.blocks();
  auto grads = analytic.blocks();
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    for (std::size_t i = 0; i < blocks[b].size(); ++i) {
      const double orig = blocks[b][i];
      blocks[b][i] = orig + h;
      const double up = f(params);
      blocks[b][i] = orig - h;
      const double down = f(params);
      blocks[b][i] = orig;
      worst = std::max(worst, grad_error(grads[b][i], (up - down) / (2.0 * h)));
    }
  }
  return worst;
}

}  // namespace covr::testing
