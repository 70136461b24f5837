#include "covr/judge.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include <cctype>
#include <cstdlib>
#include <map>
#include <nlohmann/json.hpp>
#include <thread>

#include "covr/error.hpp"
#include "covr/parallel.hpp"

namespace covr {

namespace {

constexpr std::string_view kRubricPrompt =
    "Instruction: Determine whether the question can be answered based on the provided context? "
    "Rate the context with on a scale from 0 to 5 according to the guideline below. "
    "Do not write anything except the rating.\n"
    "\n"
    "Guideline:\n"
    "5: The context is highly relevant, complete, and accurate.\n"
    "4: The context is mostly relevant and complete but may have minor gaps or inaccuracies.\n"
    "3: The context is partially relevant and complete, with noticeable gaps or inaccuracies.\n"
    "2: The context has limited relevance and completeness, with significant gaps or inaccuracies.\n"
    "1: The context is minimally relevant or complete, with substantial shortcomings.\n"
    "0: The context is not relevant or complete at all.\n"
    "\n"
    "Question: {q}\n"
    "Context: {c}\n"
    "Rating:";

struct ParsedUrl {
  std::string scheme_host_port;
  std::string path;
};

ParsedUrl split_url(const std::string& url) {
  std::string rest = url;
  std::string scheme = "http";
  if (auto p = rest.find("://"); p != std::string::npos) {
    scheme = rest.substr(0, p);
    rest = rest.substr(p + 3);
  }
  if (scheme != "http") {
    throw UsageError("judge endpoint scheme '" + scheme + "' is not supported (http only)");
  }
  auto slash = rest.find('/');
  ParsedUrl out;
  out.scheme_host_port = scheme + "://" + rest.substr(0, slash);
  out.path = slash == std::string::npos ? "/" : rest.substr(slash);
  return out;
}

}  // namespace

JudgeEndpoint JudgeEndpoint::from_env() {
  JudgeEndpoint e;
  if (const char* v = std::getenv("COVR_JUDGE_ENDPOINT")) e.url = v;
  if (const char* v = std::getenv("COVR_JUDGE_MODEL")) e.model = v;
  if (const char* v = std::getenv("COVR_JUDGE_TOKEN")) e.token = v;
  return e;
}

std::string judgment_prompt(std::string_view question, std::string_view context) {
  // Substitute {c} first so a literal "{c}" inside the question survives.
  std::string prompt(kRubricPrompt);
  auto c = prompt.find("{c}");
  prompt.replace(c, 3, context);
  auto q = prompt.find("{q}");
  prompt.replace(q, 3, question);
  return prompt;
}

std::string chat_request_body(const JudgeEndpoint& endpoint, std::string_view prompt) {
  nlohmann::ordered_json body;
  body["model"] = endpoint.model;
  body["messages"] = nlohmann::ordered_json::array(
      {nlohmann::ordered_json{{"role", "user"}, {"content", std::string(prompt)}}});
  body["temperature"] = 0;
  return body.dump();
}

int parse_grade(std::string_view out) {
  while (!out.empty() && std::isspace(static_cast<unsigned char>(out.front()))) out.remove_prefix(1);
  while (!out.empty() && std::isspace(static_cast<unsigned char>(out.back()))) out.remove_suffix(1);
  if (out.size() != 1 || out[0] < '0' || out[0] > '5') return 0;
  return out[0] - '0';
}

int grade_from_response(std::string_view body) {
  auto j = nlohmann::json::parse(body, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) return 0;
  auto choices = j.find("choices");
  if (choices == j.end() || !choices->is_array() || choices->empty()) return 0;
  const auto& first = (*choices)[0];
  if (!first.is_object()) return 0;
  auto msg = first.find("message");
  if (msg == first.end() || !msg->is_object()) return 0;
  auto content = msg->find("content");
  if (content == msg->end() || !content->is_string()) return 0;
  return parse_grade(content->get<std::string>());
}

int judge_remote(const JudgeEndpoint& endpoint, std::string_view question, std::string_view context) {
  const auto url = split_url(endpoint.url);
  const auto body = chat_request_body(endpoint, judgment_prompt(question, context));
  httplib::Headers headers;
  if (!endpoint.token.empty()) headers.emplace("Authorization", "Bearer " + endpoint.token);

  const std::size_t attempts = std::max<std::size_t>(1, endpoint.max_attempts);
  auto backoff = endpoint.initial_backoff;
  std::string last_error;
  for (std::size_t attempt = 1; attempt <= attempts; ++attempt) {
    httplib::Client client(url.scheme_host_port);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(endpoint.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(endpoint.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    auto res = client.Post(url.path, headers, body, "application/json");
    if (res && res->status >= 200 && res->status < 300) return grade_from_response(res->body);
    last_error = res ? "HTTP " + std::to_string(res->status) : httplib::to_string(res.error());
    spdlog::warn("judge attempt {}/{} failed: {}", attempt, attempts, last_error);
    if (attempt < attempts) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
  }
  throw TransportError("judge endpoint " + endpoint.url + " failed after " + std::to_string(attempts) +
                       " attempts: " + last_error);
}

std::vector<NuggetJudgmentSet> judge_all(const JudgeEndpoint& endpoint,
                                         const std::vector<JudgeTask>& tasks,
                                         std::size_t max_in_flight) {
  std::vector<int> grades(tasks.size(), 0);
  parallel_for(tasks.size(), std::max<std::size_t>(1, max_in_flight), [&](std::size_t i) {
    grades[i] = judge_remote(endpoint, tasks[i].question, tasks[i].context);
  });
  std::vector<NuggetJudgmentSet> out;
  std::map<std::string, std::size_t> slot;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    auto [it, inserted] = slot.emplace(tasks[i].query_id, out.size());
    if (inserted) out.push_back(NuggetJudgmentSet{tasks[i].query_id, {}});
    out[it->second].set(tasks[i].doc_id, tasks[i].sq_id, grades[i]);
  }
  return out;
}

}  // namespace covr
