#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "covr/embedding.hpp"
#include "covr/error.hpp"

namespace covr {
namespace {

EmbeddingMatrix random_matrix(std::mt19937_64& rng, std::size_t n, std::size_t dim, const std::string& prefix) {
  std::normal_distribution<double> g;
  std::vector<std::string> ids;
  std::vector<double> rows;
  for (std::size_t i = 0; i < n; ++i) {
    ids.push_back(prefix + std::to_string(i));
    for (std::size_t j = 0; j < dim; ++j) rows.push_back(g(rng));
  }
  return normalize_rows(dim, ids, rows);
}

TEST(Normalize, ThreeFourFive) {
  auto m = normalize_rows(2, {"a"}, {3.0, 4.0});
  EXPECT_DOUBLE_EQ(m.row(0)[0], 0.6);
  EXPECT_DOUBLE_EQ(m.row(0)[1], 0.8);
}

TEST(Normalize, UnitRowUnchanged) {
  const double s = 1.0 / std::sqrt(2.0);
  auto m = normalize_rows(2, {"a"}, {s, s});
  EXPECT_NEAR(m.row(0)[0], s, 1e-12);
  EXPECT_NEAR(m.row(0)[1], s, 1e-12);
}

TEST(Normalize, ZeroRowNamesId) {
  try {
    normalize_rows(2, {"ok", "bad"}, {1.0, 0.0, 0.0, 0.0});
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("'bad'"), std::string::npos);
  }
}

TEST(Matrix, RejectsNonUnitAndDuplicateRows) {
  EXPECT_THROW(EmbeddingMatrix::from_unit_rows(2, {"a"}, {1.0, 1.0}), DataError);
  EXPECT_THROW(EmbeddingMatrix::from_unit_rows(2, {"a", "a"}, {1.0, 0.0, 0.0, 1.0}), DataError);
  EXPECT_THROW(normalize_rows(2, {"a"}, {1.0}), DataError);
  auto m = normalize_rows(2, {"a"}, {1.0, 0.0});
  EXPECT_THROW(m.row(std::string("missing")), DataError);
}

TEST(Cosine, Cases) {
  std::vector<double> e1{1, 0}, e2{0, 1}, neg{-1, 0};
  EXPECT_DOUBLE_EQ(cosine(e1, e1), 1.0);
  EXPECT_DOUBLE_EQ(cosine(e1, e2), 0.0);
  EXPECT_DOUBLE_EQ(cosine(e1, neg), -1.0);
  EXPECT_THROW(cosine(e1, std::vector<double>{1, 0, 0}), DataError);
}

TEST(Knn, KLargerThanCorpus) {
  auto docs = normalize_rows(2, {"d"}, {1.0, 2.0});
  auto q = normalize_rows(2, {"q"}, {1.0, 0.0});
  auto r = knn_search(q, docs, 5);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].items.size(), 1u);
  EXPECT_THROW(knn_search(q, docs, 0), DataError);
}

TEST(Knn, QueryEqualToDocRanksItFirst) {
  std::mt19937_64 rng(3);
  auto docs = random_matrix(rng, 20, 5, "d");
  std::vector<double> row(docs.row(7).begin(), docs.row(7).end());
  auto q = EmbeddingMatrix::from_unit_rows(5, {"q"}, row);
  auto r = knn_search(q, docs, 3);
  EXPECT_EQ(r[0].items[0].doc_id, "d7");
  EXPECT_NEAR(r[0].items[0].score, 1.0, 1e-12);
}

TEST(Knn, MatchesFullSortOracle) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    auto docs = random_matrix(rng, 20, 4, "d");
    auto queries = random_matrix(rng, 3, 4, "q");
    const std::size_t k = 1 + rng() % 20;
    auto got = knn_search(queries, docs, k);
    for (std::size_t qi = 0; qi < queries.size(); ++qi) {
      std::vector<std::pair<double, std::string>> all;
      for (std::size_t d = 0; d < docs.size(); ++d) {
        double s = 0;
        for (std::size_t j = 0; j < 4; ++j) s += queries.row(qi)[j] * docs.row(d)[j];
        all.push_back({-std::clamp(s, -1.0, 1.0), docs.id(d)});
      }
      std::sort(all.begin(), all.end());
      ASSERT_EQ(got[qi].items.size(), k);
      for (std::size_t i = 0; i < k; ++i) {
        EXPECT_EQ(got[qi].items[i].doc_id, all[i].second);
        EXPECT_EQ(got[qi].items[i].score, -all[i].first);
      }
    }
  }
}

TEST(Knn, TiesUseDocIdAndWorkersAgree) {
  auto docs = normalize_rows(2, {"b", "a", "c"}, {1, 0, 1, 0, 0, 1});
  auto q = normalize_rows(2, {"q"}, {1, 0});
  auto r = knn_search(q, docs, 3);
  EXPECT_EQ(r[0].items[0].doc_id, "a");
  EXPECT_EQ(r[0].items[1].doc_id, "b");

  std::mt19937_64 rng(4);
  auto many_docs = random_matrix(rng, 50, 6, "d");
  auto many_q = random_matrix(rng, 13, 6, "q");
  auto one = knn_search(many_q, many_docs, 10, 1);
  auto four = knn_search(many_q, many_docs, 10, 4);
  ASSERT_EQ(one.size(), four.size());
  for (std::size_t i = 0; i < one.size(); ++i) EXPECT_EQ(one[i].items, four[i].items);
}

TEST(VectorFile, RandomRoundTrip) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t dim = 1 + rng() % 16;
    auto m = random_matrix(rng, rng() % 30, dim, "id-\xc3\xa9-");
    std::stringstream ss;
    write_vectors(m, ss);
    auto back = read_vectors(ss);
    EXPECT_EQ(back.dim(), dim);
    EXPECT_EQ(back.ids(), m.ids());
    for (std::size_t i = 0; i < m.data().size(); ++i) {
      EXPECT_NEAR(back.data()[i], m.data()[i], 1e-6);
      EXPECT_EQ(back.data()[i], static_cast<double>(static_cast<float>(m.data()[i])));
    }
  }
}

TEST(VectorFile, EmptyMatrix) {
  std::stringstream ss;
  write_vectors(EmbeddingMatrix(3), ss);
  auto back = read_vectors(ss);
  EXPECT_TRUE(back.empty());
  EXPECT_EQ(back.dim(), 3u);
}

VectorFileError::Kind read_error(const std::string& bytes) {
  std::istringstream in(bytes);
  try {
    read_vectors(in);
  } catch (const VectorFileError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no VectorFileError";
  return VectorFileError::Kind::Invalid;
}

TEST(VectorFile, DistinctErrors) {
  auto m = normalize_rows(2, {"a", "b"}, {1, 0, 0, 1});
  std::ostringstream out;
  write_vectors(m, out);
  const std::string good = out.str();

  std::string bad_magic = good;
  bad_magic.replace(0, 4, "XXXX");
  EXPECT_EQ(read_error(bad_magic), VectorFileError::Kind::BadMagic);

  std::string version = good;
  version[4] = 9;
  EXPECT_EQ(read_error(version), VectorFileError::Kind::VersionMismatch);

  EXPECT_EQ(read_error(good.substr(0, good.size() - 3)), VectorFileError::Kind::Truncated);
  EXPECT_EQ(read_error(good.substr(0, 10)), VectorFileError::Kind::Truncated);
  EXPECT_EQ(read_error(""), VectorFileError::Kind::Truncated);
}

TEST(VectorFile, LittleEndianHeader) {
  auto m = normalize_rows(3, {"x"}, {1, 0, 0});
  std::ostringstream out;
  write_vectors(m, out);
  const std::string b = out.str();
  ASSERT_GE(b.size(), 17u);
  EXPECT_EQ(b.substr(0, 4), "COVR");
  EXPECT_EQ(b[4], 1);
  EXPECT_EQ(b[5], 3);  // dim, low byte first
  EXPECT_EQ(b[6], 0);
  EXPECT_EQ(b[9], 1);  // count
  EXPECT_EQ(b[17], 1);  // id length
}

}  // namespace
}  // namespace covr
