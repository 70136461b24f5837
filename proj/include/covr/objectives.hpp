#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "covr/encoder.hpp"
#include "covr/formats.hpp"

namespace covr {

struct TrainingConfig {
  double temperature = 0.02;
  double lambda_cd = 0.1;
  double learning_rate = 1e-4;
  std::size_t epochs = 3;
  std::size_t queries_per_batch = 64;
  std::size_t docs_per_query = 8;  // 1 positive + 7 negatives
  bool teacher_stop_gradient = true;
  std::uint64_t seed = 0;
  std::size_t workers = 1;

  /// Throws DataError on t <= 0, lambda_cd < 0, lr < 0 or zero sizes.
  void validate() const;
};

/// One query of a training batch with its texts resolved.
struct TrainingQuery {
  std::string query_id;
  std::string query;
  std::vector<std::string> sub_questions;  // may be empty: CovCon only
  std::string positive_id;
  std::string positive_text;
  std::vector<std::string> negative_ids;
  std::vector<std::string> negative_texts;
};

using TrainingBatch = std::vector<TrainingQuery>;

struct LossWithGrad {
  double loss = 0.0;
  std::vector<double> grad;
};

/// -log softmax(scores / t)[positive] and its gradient
/// (softmax(scores / t) - onehot(positive)) / t.
LossWithGrad covcon_loss(std::span<const double> scores, std::size_t positive, double t);

/// softmax over documents of (mean over sub-questions of cosine(sq, d)) / t.
/// Throws DataError for an empty sub-question set.
std::vector<double> teacher_distribution(const std::vector<std::vector<double>>& sub_questions,
                                         const std::vector<std::vector<double>>& docs, double t);

/// lambda * KL(student || teacher), with 0 * ln(0 / x) = 0. Throws DataError
/// when the teacher is zero where the student is positive.
double covdistil_loss(std::span<const double> student, std::span<const double> teacher,
                      double lambda);

std::vector<double> softmax(std::span<const double> logits);
std::vector<double> log_softmax(std::span<const double> logits);

struct BatchLoss {
  double loss = 0.0;      // mean over queries of covcon + covdistil
  double covcon = 0.0;    // mean covcon part
  double covdistil = 0.0; // mean covdistil part
  EncoderGrad grad;
  std::vector<std::vector<double>> scores;  // query x candidate cosines
  std::vector<std::string> candidate_ids;   // deduplicated in-batch documents
};

/// Combined loss over a batch. Every query is scored against every document
/// in the batch (own positive, own negatives and the other queries'
/// documents; duplicates by id are merged). Queries with sub-questions add
/// the distillation term; with teacher_stop_gradient the sub-question
/// encodings receive no gradient.
BatchLoss batch_loss(const TrainingBatch& batch, const Encoder& encoder, const TrainingConfig& cfg);

struct TrainResult {
  EncoderParams params;
  std::vector<double> batch_losses;
  std::vector<double> epoch_losses;  // mean batch loss per epoch
};

/// Plain SGD over seeded per-epoch shuffles of `data`. Bit-reproducible for a
/// fixed config. Throws TrainingError on a non-finite loss.
TrainResult train(const std::vector<TrainingQuery>& data, const Encoder& init,
                  const TrainingConfig& cfg);

/// Resolves pair records against a corpus. Negatives beyond
/// docs_per_query - 1 are dropped. Unknown doc ids raise DataError.
std::vector<TrainingQuery> resolve_training_pairs(const std::vector<TrainingPairRecord>& pairs,
                                                  const std::vector<Document>& corpus,
                                                  std::size_t docs_per_query);

/// Fisher-Yates with an explicit index draw, stable across standard libraries.
std::vector<std::size_t> seeded_permutation(std::size_t n, std::mt19937_64& rng);

}  // namespace covr
