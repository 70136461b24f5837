#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "covr/error.hpp"
#include "covr/formats.hpp"

namespace covr {
namespace {

template <typename Fn>
std::size_t parse_error_line(const std::string& text, Fn parse) {
  std::istringstream in(text);
  try {
    parse(in);
  } catch (const ParseError& e) {
    return e.line();
  }
  ADD_FAILURE() << "no ParseError for: " << text;
  return 0;
}

std::string random_word(std::mt19937_64& rng) {
  static const std::string alphabet = "abcdefghijklmnopqrstuvwxyz0123456789_-";
  std::uniform_int_distribution<std::size_t> len(1, 8), pick(0, alphabet.size() - 1);
  std::string s;
  for (auto n = len(rng); n > 0; --n) s += alphabet[pick(rng)];
  return s;
}

TEST(TrecRun, SingleLine) {
  std::istringstream in("q1 Q0 dA 1 2.5 run\n");
  auto lists = parse_trec_run(in);
  ASSERT_EQ(lists.size(), 1u);
  EXPECT_EQ(lists[0].query_id, "q1");
  EXPECT_EQ(lists[0].tag, "run");
  ASSERT_EQ(lists[0].items.size(), 1u);
  EXPECT_EQ(lists[0].items[0], (ScoredDoc{"dA", 2.5}));
}

TEST(TrecRun, SortedByScoreRegardlessOfInputOrder) {
  std::istringstream in("q1 Q0 dA 1 1.0 r\nq1 Q0 dB 2 2.0 r\n");
  auto lists = parse_trec_run(in);
  ASSERT_EQ(lists[0].items.size(), 2u);
  EXPECT_EQ(lists[0].items[0].doc_id, "dB");
  EXPECT_EQ(lists[0].items[1].doc_id, "dA");
}

TEST(TrecRun, TiesBreakByDocId) {
  std::istringstream in("q1 Q0 dz 1 1.0 r\nq1 Q0 da 2 1.0 r\n");
  auto lists = parse_trec_run(in);
  EXPECT_EQ(lists[0].items[0].doc_id, "da");
}

TEST(TrecRun, MalformedLinesReportLineNumbers) {
  EXPECT_EQ(parse_error_line("q1 dA 2.5\n", parse_trec_run), 1u);
  EXPECT_EQ(parse_error_line("q1 Q0 dA 1 1.0 r\n\nq1 Q0 dB 2 x r\n", parse_trec_run), 3u);
  EXPECT_EQ(parse_error_line("q1 Q0 dA 1 1.0 r\nq1 Q0 dA 2 0.5 r\n", parse_trec_run), 2u);
  EXPECT_EQ(parse_error_line("q1 Q0 dA one 1.0 r\n", parse_trec_run), 1u);
}

TEST(TrecRun, SerializeNumbersRanks) {
  std::ostringstream out;
  serialize_trec_run({RankedList{"q1", {{"dA", 2.0}, {"dB", 1.0}}, "t"}}, out);
  EXPECT_EQ(out.str(), "q1 Q0 dA 1 2.000000 t\nq1 Q0 dB 2 1.000000 t\n");
}

TEST(TrecRun, EmptyListSetGivesEmptyStream) {
  std::ostringstream out;
  serialize_trec_run({}, out);
  EXPECT_TRUE(out.str().empty());
}

TEST(TrecRun, RandomRoundTrip) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<RankedList> lists;
    const auto nq = 1 + rng() % 4;
    for (std::size_t q = 0; q < nq; ++q) {
      RankedList l{"q" + std::to_string(q), {}, "tag" + std::to_string(trial % 3)};
      const auto n = 1 + rng() % 12;
      for (std::size_t i = 0; i < n; ++i) {
        // six decimals survive the text format exactly
        const double score = static_cast<double>(static_cast<long long>(rng() % 2000001) - 1000000) / 1e6;
        l.items.push_back({"d" + std::to_string(i) + random_word(rng), score});
      }
      l.normalize();
      lists.push_back(l);
    }
    std::stringstream ss;
    serialize_trec_run(lists, ss);
    auto back = parse_trec_run(ss);
    ASSERT_EQ(back.size(), lists.size());
    for (std::size_t q = 0; q < lists.size(); ++q) {
      EXPECT_EQ(back[q].query_id, lists[q].query_id);
      EXPECT_EQ(back[q].tag, lists[q].tag);
      EXPECT_EQ(back[q].items, lists[q].items);
    }
  }
}

TEST(Qrels, RoundTripAndErrors) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Qrels> qrels;
    for (std::size_t q = 0; q < 1 + rng() % 3; ++q) {
      Qrels r{"q" + std::to_string(q), {}};
      for (std::size_t i = 0; i < 1 + rng() % 10; ++i) r.entries[random_word(rng)] = static_cast<int>(rng() % 4);
      qrels.push_back(r);
    }
    std::stringstream ss;
    serialize_qrels(qrels, ss);
    auto back = parse_qrels(ss);
    ASSERT_EQ(back.size(), qrels.size());
    for (std::size_t q = 0; q < qrels.size(); ++q) {
      EXPECT_EQ(back[q].query_id, qrels[q].query_id);
      EXPECT_EQ(back[q].entries, qrels[q].entries);
    }
  }
  EXPECT_EQ(parse_error_line("q1 0 d1\n", parse_qrels), 1u);
  EXPECT_EQ(parse_error_line("q1 0 d1 1\nq1 0 d2 -1\n", parse_qrels), 2u);
  EXPECT_EQ(parse_error_line("q1 0 d1 1\nq1 0 d1 2\n", parse_qrels), 2u);
}

TEST(Topics, SubQuestionCounts) {
  std::istringstream in(
      R"({"query_id":"q1","query":"x","sub_questions":[{"sq_id":"a","text":"1"},{"sq_id":"b","text":"2"},{"sq_id":"c","text":"3"}]})"
      "\n"
      R"({"query_id":"q2","query":"y"})"
      "\n");
  auto topics = parse_topics(in);
  ASSERT_EQ(topics.size(), 2u);
  EXPECT_EQ(topics[0].sub_questions.size(), 3u);
  EXPECT_TRUE(topics[1].sub_questions.empty());
}

TEST(Topics, Errors) {
  EXPECT_EQ(parse_error_line("{\"query_id\":\"q1\",\"query\":\"x\"}\n{\"query_id\":\"q1\",\"query\":\"y\"}\n",
                             parse_topics),
            2u);
  EXPECT_EQ(parse_error_line("{\"query_id\":\"q1\"}\n", parse_topics), 1u);
  EXPECT_EQ(parse_error_line("{\"query_id\":\"q1\",\"query\":\"\"}\n", parse_topics), 1u);
  EXPECT_EQ(parse_error_line("not json\n", parse_topics), 1u);
}

TEST(Topics, RandomRoundTrip) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Topic> topics;
    for (std::size_t q = 0; q < 1 + rng() % 4; ++q) {
      Topic t{"q" + std::to_string(q), "query \"" + random_word(rng) + "\" \\ \xc3\xa9", {}};
      for (std::size_t s = 0; s < rng() % 5; ++s) t.sub_questions.push_back({"s" + std::to_string(s), random_word(rng) + "?"});
      topics.push_back(t);
    }
    std::stringstream ss;
    serialize_topics(topics, ss);
    auto back = parse_topics(ss);
    ASSERT_EQ(back.size(), topics.size());
    for (std::size_t q = 0; q < topics.size(); ++q) {
      EXPECT_EQ(back[q].query_id, topics[q].query_id);
      EXPECT_EQ(back[q].query_text, topics[q].query_text);
      ASSERT_EQ(back[q].sub_questions.size(), topics[q].sub_questions.size());
      for (std::size_t s = 0; s < topics[q].sub_questions.size(); ++s) {
        EXPECT_EQ(back[q].sub_questions[s].sq_id, topics[q].sub_questions[s].sq_id);
        EXPECT_EQ(back[q].sub_questions[s].text, topics[q].sub_questions[s].text);
      }
    }
  }
}

TEST(Judgments, GradesAndErrors) {
  std::istringstream ok(R"({"query_id":"q1","doc_id":"d1","sq_id":"s1","grade":5})"
                        "\n");
  auto sets = parse_nugget_judgments(ok);
  ASSERT_EQ(sets.size(), 1u);
  EXPECT_EQ(sets[0].grade("d1", "s1"), 5);
  EXPECT_EQ(sets[0].grade("d1", "s2"), 0);

  EXPECT_EQ(parse_error_line(R"({"query_id":"q1","doc_id":"d1","sq_id":"s1","grade":7})", parse_nugget_judgments), 1u);
  EXPECT_EQ(parse_error_line(R"({"query_id":"q1","doc_id":"d1","sq_id":"s1","grade":2.5})", parse_nugget_judgments), 1u);
  EXPECT_EQ(parse_error_line(R"({"query_id":"q1","doc_id":"d1","sq_id":"s1","grade":"3"})", parse_nugget_judgments), 1u);
  EXPECT_EQ(parse_error_line("{\"query_id\":\"q1\",\"doc_id\":\"d1\",\"sq_id\":\"s1\",\"grade\":1}\n"
                             "{\"query_id\":\"q1\",\"doc_id\":\"d1\",\"sq_id\":\"s1\",\"grade\":2}\n",
                             parse_nugget_judgments),
            2u);
}

TEST(Judgments, RandomRoundTrip) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<NuggetJudgmentSet> sets;
    for (std::size_t q = 0; q < 1 + rng() % 3; ++q) {
      NuggetJudgmentSet s{"q" + std::to_string(q), {}};
      for (std::size_t i = 0; i < 1 + rng() % 12; ++i) {
        s.set(random_word(rng), "s" + std::to_string(rng() % 4), static_cast<int>(rng() % 6));
      }
      sets.push_back(s);
    }
    std::stringstream ss;
    serialize_nugget_judgments(sets, ss);
    auto back = parse_nugget_judgments(ss);
    ASSERT_EQ(back.size(), sets.size());
    for (std::size_t q = 0; q < sets.size(); ++q) EXPECT_EQ(back[q].entries, sets[q].entries);
  }
}

TEST(Corpus, RoundTripAndDuplicates) {
  std::vector<Document> docs{{"d1", "Title", "some text"}, {"d2", "", "line\nbreak \"quoted\""}};
  std::stringstream ss;
  serialize_corpus(docs, ss);
  auto back = parse_corpus(ss);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].title, "Title");
  EXPECT_EQ(back[1].text, docs[1].text);
  EXPECT_EQ(back[0].full_text(), "Title some text");
  EXPECT_EQ(back[1].full_text(), docs[1].text);
  EXPECT_EQ(parse_error_line("{\"doc_id\":\"d1\",\"text\":\"a\"}\n{\"doc_id\":\"d1\",\"text\":\"b\"}\n", parse_corpus), 2u);
  EXPECT_EQ(parse_error_line("{\"doc_id\":\"d 1\",\"text\":\"a\"}\n", parse_corpus), 1u);
}

TEST(TrainingPairs, RoundTrip) {
  std::vector<TrainingPairRecord> pairs{{"q1", "what", {"a?", "b?"}, "d1", {"d2", "d3"}},
                                        {"q2", "who", {}, "d4", {}}};
  std::stringstream ss;
  serialize_training_pairs(pairs, ss);
  auto back = parse_training_pairs(ss);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].sub_questions, pairs[0].sub_questions);
  EXPECT_EQ(back[0].negative_doc_ids, pairs[0].negative_doc_ids);
  EXPECT_EQ(back[1].positive_doc_id, "d4");
  EXPECT_EQ(parse_error_line("{\"query_id\":\"q\",\"query\":\"x\",\"positive_doc_id\":\"d\"}\n", parse_training_pairs), 1u);
}

TEST(RankedList, NormalizeRejectsDuplicates) {
  RankedList l{"q", {{"a", 1.0}, {"a", 2.0}}, ""};
  EXPECT_THROW(l.normalize(), DataError);
}

TEST(Files, MissingInputNamesPath) {
  try {
    open_input("/nonexistent/covr/file.txt");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/covr/file.txt"), std::string::npos);
  }
}

}  // namespace
}  // namespace covr
