#pragma once

// Remote rubric judge. Sends the 0-5 answerability rubric prompt to a
// chat-completion style HTTP endpoint and reads back a bare integer grade.
// Anything that is not a bare integer in [0, 5] counts as grade 0; transport
// failures are retried with exponential backoff and then surface as
// TransportError.

#include <chrono>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "covr/types.hpp"

namespace covr {

struct JudgeEndpoint {
  std::string url = "http://127.0.0.1:8000/v1/chat/completions";
  std::string model;
  std::string token;  // sent as a bearer token when non-empty
  std::size_t max_attempts = 3;
  std::chrono::milliseconds initial_backoff{500};
  std::chrono::milliseconds timeout{60000};

  /// COVR_JUDGE_ENDPOINT, COVR_JUDGE_MODEL, COVR_JUDGE_TOKEN.
  static JudgeEndpoint from_env();
};

/// The rubric prompt with the question and context substituted.
std::string judgment_prompt(std::string_view question, std::string_view context);

/// {"model": ..., "messages": [{"role": "user", "content": prompt}], "temperature": 0}
std::string chat_request_body(const JudgeEndpoint& endpoint, std::string_view prompt);

/// Bare integer 0-5 (surrounding whitespace allowed), otherwise 0.
int parse_grade(std::string_view model_output);

/// Extracts choices[0].message.content from a chat-completion response and
/// grades it. Unparseable bodies grade 0.
int grade_from_response(std::string_view body);

int judge_remote(const JudgeEndpoint& endpoint, std::string_view question, std::string_view context);

struct JudgeTask {
  std::string query_id;
  std::string doc_id;
  std::string sq_id;
  std::string question;
  std::string context;
};

/// Judges every task with at most `max_in_flight` concurrent requests. The
/// result is keyed by (doc_id, sq_id) and independent of completion order.
std::vector<NuggetJudgmentSet> judge_all(const JudgeEndpoint& endpoint,
                                         const std::vector<JudgeTask>& tasks,
                                         std::size_t max_in_flight);

}  // namespace covr
