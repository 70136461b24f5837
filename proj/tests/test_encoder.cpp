#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "covr/encoder.hpp"
#include "covr/error.hpp"
#include "covr/text.hpp"
#include "oracles.hpp"
#include "support.hpp"

namespace covr {
namespace {

using testing::toy_encoder;

double norm(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

TEST(Tokenize, LowercaseSplitDropEmpty) {
  EXPECT_EQ(tokenize("Hello, World!  x-1"), (std::vector<std::string>{"hello", "world", "x", "1"}));
  EXPECT_TRUE(tokenize(" ,.; ").empty());
  for (const std::string s : {"Mixed CASE text", "a--b", ""}) {
    std::string joined;
    for (const auto& t : tokenize(s)) joined += t + " ";
    EXPECT_EQ(tokenize(joined), tokenize(s));
  }
}

TEST(Vocabulary, BuildIsOrderIndependent) {
  auto a = Vocabulary::build({"b a", "c"});
  auto b = Vocabulary::build({"c", "a b b"});
  EXPECT_EQ(a.tokens(), b.tokens());
  EXPECT_EQ(a.tokens(), (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_THROW(Vocabulary(std::vector<std::string>{"x", "x"}), DataError);
}

TEST(Vocabulary, TruncatesPerMode) {
  auto v = testing::toy_vocab(3);
  std::string text;
  for (int i = 0; i < 600; ++i) text += "a1 ";
  EXPECT_EQ(v.token_ids(text, EncodeMode::Query).size(), kMaxQueryTokens);
  EXPECT_EQ(v.token_ids(text, EncodeMode::Document).size(), kMaxDocumentTokens);
  EXPECT_EQ(v.token_ids("zz a2 yy", EncodeMode::Query), (TokenIds{2}));
}

TEST(InitParams, DeterministicAndBounded) {
  auto a = init_params(42, 10, 4, 3);
  auto b = init_params(42, 10, 4, 3);
  auto c = init_params(43, 10, 4, 3);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  for (auto block : a.blocks()) {
    for (double x : block) {
      EXPECT_GE(x, -0.1);
      EXPECT_LE(x, 0.1);
    }
  }
  EXPECT_EQ(a.token_table.size(), 40u);
  EXPECT_EQ(a.mode_vectors.size(), 8u);
  EXPECT_EQ(a.projection.size(), 12u);
}

TEST(Encode, MatchesFormulaAndIsUnitNorm) {
  std::mt19937_64 rng(1);
  auto enc = toy_encoder(9, 20, 8, 6);
  for (int i = 0; i < 50; ++i) {
    auto text = testing::random_text(rng, 20, 0, 12);
    for (auto mode : {EncodeMode::Query, EncodeMode::Document}) {
      auto ids = enc.vocab.token_ids(text, mode);
      auto got = encode(enc.params, ids, mode);
      auto want = oracle::encode(enc.params, ids, mode);
      EXPECT_NEAR(norm(got), 1.0, 1e-12);
      for (std::size_t j = 0; j < got.size(); ++j) EXPECT_NEAR(got[j], want[j], 1e-12);
    }
  }
}

TEST(Encode, ModeAsymmetry) {
  auto enc = toy_encoder(2, 5, 4, 3);
  auto q = enc.encode("a1 a2", EncodeMode::Query);
  auto d = enc.encode("a1 a2", EncodeMode::Document);
  EXPECT_NE(q, d);
  for (std::size_t j = 0; j < enc.params.hidden; ++j) {
    enc.params.mode_vectors[enc.params.hidden + j] = enc.params.mode_vectors[j];
  }
  EXPECT_EQ(enc.encode("a1 a2", EncodeMode::Query), enc.encode("a1 a2", EncodeMode::Document));
}

TEST(Encode, OutOfVocabularyFallsBackToMode) {
  auto enc = toy_encoder(3, 5, 4, 3);
  auto got = enc.encode("unknown words only", EncodeMode::Query);
  std::vector<double> u(3, 0.0);
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t j = 0; j < 4; ++j) u[c] += enc.params.projection[j * 3 + c] * enc.params.mode_vectors[j];
  }
  const double n = norm(u);
  for (std::size_t c = 0; c < 3; ++c) EXPECT_NEAR(got[c], u[c] / n, 1e-12);
}

// Pooling is a mean over the multiset {mode, tokens...}, so a repeated token
// weighs twice: "a a" pools (m + 2a) / 3 while "a" pools (m + a) / 2.
TEST(Encode, RepeatedTokensFollowMultisetMean) {
  auto enc = toy_encoder(4, 3, 4, 3);
  auto project = [&](const std::vector<double>& pooled) {
    std::vector<double> u(3, 0.0);
    for (std::size_t c = 0; c < 3; ++c) {
      for (std::size_t j = 0; j < 4; ++j) u[c] += enc.params.projection[j * 3 + c] * pooled[j];
    }
    const double n = norm(u);
    for (double& x : u) x /= n;
    return u;
  };
  std::vector<double> once(4), twice(4);
  for (std::size_t j = 0; j < 4; ++j) {
    const double m = enc.params.mode_vectors[j];
    const double a = enc.params.token_table[1 * 4 + j];
    once[j] = (m + a) / 2.0;
    twice[j] = (m + 2.0 * a) / 3.0;
  }
  auto single = enc.encode("a1", EncodeMode::Query);
  auto doubled = enc.encode("a1 a1", EncodeMode::Query);
  auto want_single = project(once);
  auto want_doubled = project(twice);
  for (std::size_t c = 0; c < 3; ++c) {
    EXPECT_NEAR(single[c], want_single[c], 1e-12);
    EXPECT_NEAR(doubled[c], want_doubled[c], 1e-12);
  }
  EXPECT_GT(std::abs(single[0] - doubled[0]) + std::abs(single[1] - doubled[1]), 1e-6);
}

TEST(Encode, ZeroProjectionIsAnError) {
  auto enc = toy_encoder(5, 3, 2, 2);
  std::fill(enc.params.projection.begin(), enc.params.projection.end(), 0.0);
  EXPECT_THROW(enc.encode("a0", EncodeMode::Query), DataError);
}

TEST(EncodeGrad, ZeroUpstreamGivesZeroGradient) {
  auto enc = toy_encoder(6, 5, 4, 3);
  EncoderGrad g(enc.params);
  encode_grad(enc.params, TokenIds{0, 1}, EncodeMode::Query, std::vector<double>(3, 0.0), g);
  auto dense = g.dense(enc.params);
  for (auto block : dense.blocks()) {
    for (double x : block) EXPECT_EQ(x, 0.0);
  }
}

TEST(EncodeGrad, MatchesFiniteDifferences) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 20; ++trial) {
    auto enc = toy_encoder(100 + trial, 20, 8, 6);
    auto ids = enc.vocab.token_ids(testing::random_text(rng, 20, 1, 8), EncodeMode::Document);
    std::vector<double> upstream(6);
    for (double& x : upstream) x = g(rng);
    EncoderGrad grad(enc.params);
    encode_grad(enc.params, ids, EncodeMode::Document, upstream, grad);
    auto f = [&](const EncoderParams& p) {
      auto v = oracle::encode(p, ids, EncodeMode::Document);
      return oracle::dot(v, upstream);
    };
    EXPECT_LT(testing::max_fd_error(enc.params, grad.dense(enc.params), f), 1e-6);
  }
}

TEST(EncodeGrad, OnlyTouchedTokenRows) {
  auto enc = toy_encoder(8, 10, 4, 3);
  EncoderGrad g(enc.params);
  encode_grad(enc.params, TokenIds{2, 5, 5}, EncodeMode::Query, std::vector<double>{1.0, -1.0, 0.5}, g);
  ASSERT_EQ(g.token_rows.size(), 2u);
  EXPECT_TRUE(g.token_rows.count(2));
  EXPECT_TRUE(g.token_rows.count(5));
  auto dense = g.dense(enc.params);
  for (std::size_t t = 0; t < 10; ++t) {
    if (t == 2 || t == 5) continue;
    for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(dense.token_table[t * 4 + j], 0.0);
  }
}

TEST(EncodeAll, WorkerCountDoesNotMatter) {
  std::mt19937_64 rng(10);
  auto enc = toy_encoder(11, 20, 8, 6);
  std::vector<std::string> ids, texts;
  for (int i = 0; i < 37; ++i) {
    ids.push_back("d" + std::to_string(i));
    texts.push_back(testing::random_text(rng, 20, 1, 10));
  }
  auto one = enc.encode_all(ids, texts, EncodeMode::Document, 1);
  auto four = enc.encode_all(ids, texts, EncodeMode::Document, 4);
  EXPECT_EQ(one.ids(), four.ids());
  EXPECT_EQ(one.data(), four.data());
}

TEST(ParamsFile, RoundTripAtF32) {
  auto enc = make_encoder(Vocabulary::build({"alpha beta gamma", "delta"}), 3, 5, 4);
  std::stringstream ss;
  write_params(enc, ss);
  auto back = read_params(ss);
  EXPECT_EQ(back.vocab.tokens(), enc.vocab.tokens());
  ASSERT_EQ(back.params.hidden, 5u);
  ASSERT_EQ(back.params.dim, 4u);
  auto a = enc.params.blocks();
  auto b = back.params.blocks();
  for (std::size_t k = 0; k < 3; ++k) {
    ASSERT_EQ(a[k].size(), b[k].size());
    for (std::size_t i = 0; i < a[k].size(); ++i) {
      EXPECT_EQ(b[k][i], static_cast<double>(static_cast<float>(a[k][i])));
    }
  }

  std::stringstream again;
  write_params(back, again);
  std::stringstream first;
  write_params(enc, first);
  EXPECT_EQ(again.str(), first.str());
}

TEST(ParamsFile, RejectsVectorFiles) {
  std::stringstream ss;
  write_vectors(normalize_rows(2, {"a"}, {1, 0}), ss);
  EXPECT_THROW(read_params(ss), VectorFileError);
}

}  // namespace
}  // namespace covr
