#include "covr/objectives.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "covr/error.hpp"
#include "covr/parallel.hpp"

namespace covr {

void TrainingConfig::validate() const {
  if (!(temperature > 0.0)) throw DataError("temperature must be positive");
  if (!(lambda_cd >= 0.0)) throw DataError("lambda_cd must be non-negative");
  if (!(learning_rate >= 0.0)) throw DataError("learning rate must be non-negative");
  if (epochs == 0) throw DataError("epochs must be positive");
  if (queries_per_batch == 0) throw DataError("queries_per_batch must be positive");
  if (docs_per_query < 2) throw DataError("docs_per_query must be at least 2");
}

std::vector<double> log_softmax(std::span<const double> logits) {
  if (logits.empty()) return {};
  const auto top = static_cast<std::size_t>(std::max_element(logits.begin(), logits.end()) - logits.begin());
  const double mx = logits[top];
  // log1p keeps the tail when one logit dominates
  double rest = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (i != top) rest += std::exp(logits[i] - mx);
  }
  const double log_sum = std::log1p(rest);
  std::vector<double> out(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] = (logits[i] - mx) - log_sum;
  return out;
}

std::vector<double> softmax(std::span<const double> logits) {
  if (logits.empty()) return {};
  const double mx = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) sum += out[i] = std::exp(logits[i] - mx);
  for (double& x : out) x /= sum;
  return out;
}

namespace {

std::vector<double> scaled(std::span<const double> v, double t) {
  std::vector<double> out(v.begin(), v.end());
  for (double& x : out) x /= t;
  return out;
}

}  // namespace

LossWithGrad covcon_loss(std::span<const double> scores, std::size_t positive, double t) {
  if (!(t > 0.0)) throw DataError("temperature must be positive");
  if (scores.empty()) throw DataError("covcon_loss needs at least one score");
  if (positive >= scores.size()) throw DataError("positive index out of range");
  auto lp = log_softmax(scaled(scores, t));
  LossWithGrad out;
  out.loss = -lp[positive];
  out.grad.resize(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out.grad[i] = (std::exp(lp[i]) - (i == positive ? 1.0 : 0.0)) / t;
  }
  return out;
}

std::vector<double> teacher_distribution(const std::vector<std::vector<double>>& sub_questions,
                                         const std::vector<std::vector<double>>& docs, double t) {
  if (!(t > 0.0)) throw DataError("temperature must be positive");
  if (sub_questions.empty()) throw DataError("teacher distribution needs at least one sub-question");
  if (docs.empty()) throw DataError("teacher distribution needs at least one document");
  std::vector<double> mean(docs.size(), 0.0);
  for (std::size_t d = 0; d < docs.size(); ++d) {
    for (const auto& sq : sub_questions) mean[d] += cosine(sq, docs[d]);
    mean[d] /= static_cast<double>(sub_questions.size());
  }
  return softmax(scaled(mean, t));
}

double covdistil_loss(std::span<const double> student, std::span<const double> teacher,
                      double lambda) {
  if (student.size() != teacher.size()) throw DataError("student and teacher differ in length");
  double kl = 0.0;
  for (std::size_t i = 0; i < student.size(); ++i) {
    if (student[i] <= 0.0) continue;
    if (teacher[i] <= 0.0) {
      throw DataError("teacher probability is zero where the student is positive (index " +
                      std::to_string(i) + ")");
    }
    kl += student[i] * std::log(student[i] / teacher[i]);
  }
  return lambda * kl;
}

namespace {

struct EncodedText {
  TokenIds tokens;
  EncodeMode mode = EncodeMode::Query;
  EncodeTrace trace;
};

}  // namespace

BatchLoss batch_loss(const TrainingBatch& batch, const Encoder& encoder, const TrainingConfig& cfg) {
  if (!(cfg.temperature > 0.0)) throw DataError("temperature must be positive");
  if (batch.empty()) throw DataError("empty training batch");
  const double t = cfg.temperature;
  const auto& params = encoder.params;
  const std::size_t nq = batch.size();
  const bool distil = cfg.lambda_cd > 0.0;

  BatchLoss out;
  out.grad = EncoderGrad(params);

  // In-batch candidate set, deduplicated by doc id in first-seen order.
  std::vector<std::string> cand_texts;
  std::unordered_map<std::string, std::size_t> cand_index;
  auto add_candidate = [&](const std::string& id, const std::string& text) {
    auto [it, inserted] = cand_index.emplace(id, out.candidate_ids.size());
    if (inserted) {
      out.candidate_ids.push_back(id);
      cand_texts.push_back(text);
    }
    return it->second;
  };
  std::vector<std::size_t> positive(nq);
  for (std::size_t q = 0; q < nq; ++q) {
    const auto& tq = batch[q];
    if (tq.negative_ids.size() != tq.negative_texts.size()) {
      throw DataError("negative ids and texts differ in length for query '" + tq.query_id + "'");
    }
    positive[q] = add_candidate(tq.positive_id, tq.positive_text);
    for (std::size_t n = 0; n < tq.negative_ids.size(); ++n) {
      add_candidate(tq.negative_ids[n], tq.negative_texts[n]);
    }
  }
  for (std::size_t q = 0; q < nq; ++q) {
    const auto& negs = batch[q].negative_ids;
    if (std::find(negs.begin(), negs.end(), batch[q].positive_id) != negs.end()) {
      throw DataError("query '" + batch[q].query_id + "' lists its positive as a negative");
    }
  }
  const std::size_t nd = out.candidate_ids.size();

  // All texts to encode: queries, then candidates, then sub-questions.
  std::vector<EncodedText> enc;
  enc.reserve(nq + nd);
  for (const auto& tq : batch) enc.push_back({encoder.vocab.token_ids(tq.query, EncodeMode::Query), EncodeMode::Query, {}});
  for (const auto& text : cand_texts) enc.push_back({encoder.vocab.token_ids(text, EncodeMode::Document), EncodeMode::Document, {}});
  std::vector<std::size_t> sq_begin(nq + 1, enc.size());
  for (std::size_t q = 0; q < nq; ++q) {
    sq_begin[q] = enc.size();
    if (distil) {
      for (const auto& sq : batch[q].sub_questions) {
        enc.push_back({encoder.vocab.token_ids(sq, EncodeMode::Query), EncodeMode::Query, {}});
      }
    }
  }
  sq_begin[nq] = enc.size();

  parallel_for(enc.size(), cfg.workers, [&](std::size_t i) {
    enc[i].trace = encode_trace(params, enc[i].tokens, enc[i].mode);
  });
  auto qvec = [&](std::size_t q) -> const std::vector<double>& { return enc[q].trace.output; };
  auto dvec = [&](std::size_t d) -> const std::vector<double>& { return enc[nq + d].trace.output; };

  const std::size_t dim = params.dim;
  std::vector<std::vector<double>> upstream(enc.size(), std::vector<double>(dim, 0.0));
  const double inv_q = 1.0 / static_cast<double>(nq);
  out.scores.assign(nq, std::vector<double>(nd, 0.0));

  for (std::size_t q = 0; q < nq; ++q) {
    auto& s = out.scores[q];
    for (std::size_t d = 0; d < nd; ++d) s[d] = dot(qvec(q), dvec(d));

    auto lp = log_softmax(scaled(s, t));
    std::vector<double> p(nd);
    for (std::size_t d = 0; d < nd; ++d) p[d] = std::exp(lp[d]);

    const double cc = -lp[positive[q]];
    std::vector<double> g_scores(nd);
    for (std::size_t d = 0; d < nd; ++d) g_scores[d] = (p[d] - (d == positive[q] ? 1.0 : 0.0)) / t;

    double cd = 0.0;
    std::vector<double> g_mean;  // gradient w.r.t. mean sub-question scores
    std::vector<double> sq_mean_vec;
    const std::size_t nsq = sq_begin[q + 1] - sq_begin[q];
    if (nsq > 0) {
      std::vector<double> mean(nd, 0.0);
      for (std::size_t k = sq_begin[q]; k < sq_begin[q + 1]; ++k) {
        for (std::size_t d = 0; d < nd; ++d) mean[d] += dot(enc[k].trace.output, dvec(d));
      }
      for (double& m : mean) m /= static_cast<double>(nsq);
      auto lt = log_softmax(scaled(mean, t));

      std::vector<double> r(nd);
      double kl = 0.0;
      for (std::size_t d = 0; d < nd; ++d) {
        r[d] = lp[d] - lt[d];
        kl += p[d] * r[d];
      }
      cd = cfg.lambda_cd * kl;
      // d KL / d s_k = p_k (r_k - KL) / t
      for (std::size_t d = 0; d < nd; ++d) g_scores[d] += cfg.lambda_cd * p[d] * (r[d] - kl) / t;

      if (!cfg.teacher_stop_gradient) {
        // d KL / d mean_k = (teacher_k - p_k) / t
        g_mean.resize(nd);
        for (std::size_t d = 0; d < nd; ++d) {
          g_mean[d] = cfg.lambda_cd * (std::exp(lt[d]) - p[d]) / t * inv_q;
        }
        sq_mean_vec.assign(dim, 0.0);
        for (std::size_t k = sq_begin[q]; k < sq_begin[q + 1]; ++k) {
          for (std::size_t j = 0; j < dim; ++j) sq_mean_vec[j] += enc[k].trace.output[j];
        }
        for (double& x : sq_mean_vec) x /= static_cast<double>(nsq);
      }
    }

    out.covcon += cc * inv_q;
    out.covdistil += cd * inv_q;
    for (double& g : g_scores) g *= inv_q;

    auto& uq = upstream[q];
    const auto& qv = qvec(q);
    for (std::size_t d = 0; d < nd; ++d) {
      const auto& dv = dvec(d);
      auto& ud = upstream[nq + d];
      for (std::size_t j = 0; j < dim; ++j) {
        uq[j] += g_scores[d] * dv[j];
        ud[j] += g_scores[d] * qv[j];
      }
    }
    if (!g_mean.empty()) {
      for (std::size_t d = 0; d < nd; ++d) {
        auto& ud = upstream[nq + d];
        for (std::size_t j = 0; j < dim; ++j) ud[j] += g_mean[d] * sq_mean_vec[j];
      }
      const double inv_nsq = 1.0 / static_cast<double>(nsq);
      for (std::size_t k = sq_begin[q]; k < sq_begin[q + 1]; ++k) {
        auto& us = upstream[k];
        for (std::size_t d = 0; d < nd; ++d) {
          const auto& dv = dvec(d);
          for (std::size_t j = 0; j < dim; ++j) us[j] += g_mean[d] * inv_nsq * dv[j];
        }
      }
    }
  }
  out.loss = out.covcon + out.covdistil;

  const bool sq_grads = distil && !cfg.teacher_stop_gradient;
  const std::size_t n_backprop = sq_grads ? enc.size() : nq + nd;
  std::vector<EncoderGrad> partial(n_backprop, EncoderGrad(params));
  parallel_for(n_backprop, cfg.workers, [&](std::size_t i) {
    encode_grad(params, enc[i].trace, enc[i].tokens, enc[i].mode, upstream[i], partial[i]);
  });
  for (const auto& g : partial) out.grad.add(g);
  return out;
}

std::vector<std::size_t> seeded_permutation(std::size_t n, std::mt19937_64& rng) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng() % i);
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

namespace {

bool finite(const EncoderGrad& g) {
  auto ok = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
  };
  if (!ok(g.mode_vectors) || !ok(g.projection)) return false;
  return std::all_of(g.token_rows.begin(), g.token_rows.end(), [&](const auto& kv) { return ok(kv.second); });
}

}  // namespace

TrainResult train(const std::vector<TrainingQuery>& data, const Encoder& init,
                  const TrainingConfig& cfg) {
  cfg.validate();
  if (data.empty()) throw DataError("training set is empty");
  Encoder enc = init;
  TrainResult result;
  std::mt19937_64 rng(cfg.seed);
  std::size_t batch_index = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    auto order = seeded_permutation(data.size(), rng);
    double epoch_sum = 0.0;
    std::size_t epoch_batches = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.queries_per_batch) {
      const std::size_t end = std::min(order.size(), start + cfg.queries_per_batch);
      TrainingBatch batch;
      for (std::size_t i = start; i < end; ++i) batch.push_back(data[order[i]]);
      auto bl = batch_loss(batch, enc, cfg);
      if (!std::isfinite(bl.loss)) {
        double offending = 0.0;
        for (const auto& row : bl.scores) {
          for (double s : row) {
            if (!std::isfinite(s) || std::abs(s) > std::abs(offending)) offending = s;
            if (!std::isfinite(s)) break;
          }
        }
        throw TrainingError("non-finite loss at batch " + std::to_string(batch_index) + " (epoch " +
                            std::to_string(epoch) + "): loss=" + std::to_string(bl.loss) +
                            ", offending score=" + std::to_string(offending));
      }
      if (!finite(bl.grad)) {
        throw TrainingError("non-finite gradient at batch " + std::to_string(batch_index) + " (epoch " +
                            std::to_string(epoch) + "), loss=" + std::to_string(bl.loss));
      }
      bl.grad.apply(enc.params, cfg.learning_rate);
      result.batch_losses.push_back(bl.loss);
      epoch_sum += bl.loss;
      ++epoch_batches;
      ++batch_index;
    }
    result.epoch_losses.push_back(epoch_sum / static_cast<double>(epoch_batches));
    spdlog::debug("epoch {}: mean loss {:.6f}", epoch, result.epoch_losses.back());
  }
  result.params = std::move(enc.params);
  return result;
}

std::vector<TrainingQuery> resolve_training_pairs(const std::vector<TrainingPairRecord>& pairs,
                                                  const std::vector<Document>& corpus,
                                                  std::size_t docs_per_query) {
  std::unordered_map<std::string, const Document*> by_id;
  for (const auto& d : corpus) by_id.emplace(d.doc_id, &d);
  auto text_of = [&](const std::string& id) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw DataError("training pair references unknown doc '" + id + "'");
    return it->second->full_text();
  };
  std::vector<TrainingQuery> out;
  for (const auto& p : pairs) {
    TrainingQuery q;
    q.query_id = p.query_id;
    q.query = p.query;
    q.sub_questions = p.sub_questions;
    q.positive_id = p.positive_doc_id;
    q.positive_text = text_of(p.positive_doc_id);
    const std::size_t max_neg = docs_per_query > 0 ? docs_per_query - 1 : 0;
    for (const auto& n : p.negative_doc_ids) {
      if (q.negative_ids.size() >= max_neg) break;
      q.negative_ids.push_back(n);
      q.negative_texts.push_back(text_of(n));
    }
    out.push_back(std::move(q));
  }
  return out;
}

}  // namespace covr
