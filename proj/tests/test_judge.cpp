#include <gtest/gtest.h>
#include <httplib.h>

#include <atomic>
#include <mutex>
#include <nlohmann/json.hpp>
#include <thread>

#include "covr/error.hpp"
#include "covr/judge.hpp"
#include "stub_server.hpp"

namespace covr {
namespace {

using testing::StubJudge;

TEST(ParseGrade, BareIntegersOnly) {
  EXPECT_EQ(parse_grade("4"), 4);
  EXPECT_EQ(parse_grade(" 5\n"), 5);
  EXPECT_EQ(parse_grade("0"), 0);
  EXPECT_EQ(parse_grade("I think 4/5"), 0);
  EXPECT_EQ(parse_grade("6"), 0);
  EXPECT_EQ(parse_grade("-1"), 0);
  EXPECT_EQ(parse_grade("4."), 0);
  EXPECT_EQ(parse_grade("45"), 0);
  EXPECT_EQ(parse_grade(""), 0);
  EXPECT_EQ(parse_grade("Rating: 3"), 0);
}

TEST(GradeFromResponse, MalformedBodiesGradeZero) {
  EXPECT_EQ(grade_from_response(StubJudge::completion("3")), 3);
  EXPECT_EQ(grade_from_response("not json"), 0);
  EXPECT_EQ(grade_from_response("{}"), 0);
  EXPECT_EQ(grade_from_response(R"({"choices": []})"), 0);
  EXPECT_EQ(grade_from_response(R"({"choices": [{"message": {"content": 4}}]})"), 0);
}

TEST(Prompt, SubstitutesQuestionAndContext) {
  auto p = judgment_prompt("Who won?", "The home team won.");
  EXPECT_NE(p.find("Question: Who won?\nContext: The home team won.\nRating:"), std::string::npos);
  EXPECT_EQ(p.rfind("Instruction: Determine whether the question can be answered", 0), 0u);
  EXPECT_EQ(p.find("{q}"), std::string::npos);
  EXPECT_NE(judgment_prompt("literal {c}", "ctx").find("Question: literal {c}\n"), std::string::npos);

  JudgeEndpoint e;
  e.model = "m";
  auto body = nlohmann::json::parse(chat_request_body(e, p));
  EXPECT_EQ(body["model"], "m");
  EXPECT_EQ(body["temperature"], 0);
  EXPECT_EQ(body["messages"][0]["role"], "user");
  EXPECT_EQ(body["messages"][0]["content"], p);
}

TEST(JudgeRemote, WellFormedAndMalformedOutputs) {
  StubJudge stub;
  stub.reply = [](const std::string&) { return StubJudge::completion("4"); };
  EXPECT_EQ(judge_remote(stub.endpoint(), "q", "c"), 4);
  stub.reply = [](const std::string&) { return StubJudge::completion("I think 4/5"); };
  EXPECT_EQ(judge_remote(stub.endpoint(), "q", "c"), 0);
  stub.reply = [](const std::string&) { return std::string("garbage"); };
  EXPECT_EQ(judge_remote(stub.endpoint(), "q", "c"), 0);

  // the request carries the rubric prompt verbatim
  auto sent = nlohmann::json::parse(stub.last_body());
  EXPECT_EQ(sent["messages"][0]["content"], judgment_prompt("q", "c"));
}

TEST(JudgeRemote, ServerErrorsExhaustRetries) {
  StubJudge stub;
  stub.status = 500;
  auto e = stub.endpoint();
  e.initial_backoff = std::chrono::milliseconds(1);
  EXPECT_THROW(judge_remote(e, "q", "c"), TransportError);
  EXPECT_EQ(stub.requests.load(), 3);
}

TEST(JudgeRemote, RecoversWithinRetryBudget) {
  StubJudge stub;
  stub.fail_first = 2;
  stub.reply = [](const std::string&) { return StubJudge::completion("2"); };
  auto e = stub.endpoint();
  e.initial_backoff = std::chrono::milliseconds(1);
  EXPECT_EQ(judge_remote(e, "q", "c"), 2);
  EXPECT_EQ(stub.requests.load(), 3);
}

TEST(JudgeRemote, UnreachableEndpointIsTransportError) {
  JudgeEndpoint e;
  e.url = "http://127.0.0.1:1/v1/chat/completions";
  e.initial_backoff = std::chrono::milliseconds(1);
  e.timeout = std::chrono::milliseconds(500);
  EXPECT_THROW(judge_remote(e, "q", "c"), TransportError);
  e.url = "https://example.invalid/";
  EXPECT_THROW(judge_remote(e, "q", "c"), UsageError);
}

TEST(JudgeAll, KeyedByDocAndSubQuestion) {
  StubJudge stub;
  // grade encodes the question so the mapping back to tasks is checkable
  stub.reply = [](const std::string& body) {
    auto prompt = nlohmann::json::parse(body)["messages"][0]["content"].get<std::string>();
    auto pos = prompt.find("Question: g");
    return StubJudge::completion(std::string(1, prompt[pos + 11]));
  };
  std::vector<JudgeTask> tasks;
  for (int d = 0; d < 6; ++d) {
    for (int s = 0; s < 3; ++s) {
      tasks.push_back({d % 2 ? "q2" : "q1", "d" + std::to_string(d), "s" + std::to_string(s),
                       "g" + std::to_string((d + s) % 6), "ctx"});
    }
  }
  auto sets = judge_all(stub.endpoint(), tasks, 4);
  ASSERT_EQ(sets.size(), 2u);
  EXPECT_EQ(sets[0].query_id, "q1");
  for (const auto& t : tasks) {
    const auto& set = t.query_id == "q1" ? sets[0] : sets[1];
    EXPECT_EQ(set.grade(t.doc_id, t.sq_id), t.question[1] - '0');
  }
}

}  // namespace
}  // namespace covr
