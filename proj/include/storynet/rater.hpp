#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "storynet/corpus.hpp"

namespace storynet::rater {

struct RaterConfig {
  std::string endpoint_url = "https://api.openai.com/v1/chat/completions";
  std::string model_name = "gpt-3.5-turbo";
  std::optional<double> temperature;  // unset = endpoint default
  std::string api_key_env_var = "OPENAI_API_KEY";
  int max_retries = 3;
  double request_timeout_s = 60;
  int judges = 4;
  int max_in_flight = 4;
  double backoff_initial_s = 1.0;
  double backoff_max_s = 30.0;
  std::uint64_t seed = 0;  // prompt-order shuffling during generation

  void validate() const;
  nlohmann::json to_json() const;
};

struct PromptTemplates {
  std::string generation_instructions;
  std::string comprehension_question;
  std::string practice_trial;
  std::string main_task_intro;  // prefix of the first main-task prompt
  std::string prompt_line;      // "{k}" and "{words}" are substituted
  std::string rating_instructions;

  static PromptTemplates defaults();
  std::string format_prompt(int k, const std::array<std::string, 3>& words, bool first) const;
  void validate() const;
};

struct ChatMessage {
  std::string role;
  std::string content;
};

nlohmann::json request_body(const std::vector<ChatMessage>& messages, const RaterConfig& cfg);

// True when `body` has a model string and a non-empty messages array of
// {role in system/user/assistant, content string} objects.
bool valid_request_body(const nlohmann::json& body);

struct HttpResponse {
  int status = 0;  // 0 = no response (connection failure, timeout)
  std::string body;
};

class ChatTransport {
 public:
  virtual ~ChatTransport() = default;
  virtual HttpResponse post(const nlohmann::json& body) = 0;
};

// HTTP(S) transport for chat-completions endpoints.
class HttpTransport final : public ChatTransport {
 public:
  HttpTransport(const RaterConfig& cfg, std::string api_key);
  HttpResponse post(const nlohmann::json& body) override;

 private:
  std::string base_;
  std::string path_;
  std::string api_key_;
  double timeout_s_;
};

// Reads the API key from the configured environment variable ("" if unset).
std::string api_key_from_env(const RaterConfig& cfg);

class TransportError : public std::runtime_error {
 public:
  TransportError(const std::string& what, int status) : std::runtime_error(what), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

// Thread-safe JSONL request/response log.
class RequestLog {
 public:
  RequestLog() = default;
  explicit RequestLog(const std::string& path);
  void write(const nlohmann::json& record);
  std::vector<nlohmann::json> records() const;  // in-memory copy, in write order

 private:
  mutable std::mutex mu_;
  std::ofstream out_;
  std::vector<nlohmann::json> records_;
};

using Sleeper = std::function<void(std::chrono::duration<double>)>;

// Retries 429, 5xx and connection failures with exponential backoff.
class ChatClient {
 public:
  ChatClient(ChatTransport& transport, RaterConfig cfg, RequestLog* log = nullptr, Sleeper sleeper = {});

  // Returns the assistant message content; throws TransportError when the
  // endpoint keeps failing or answers with a non-retryable status.
  std::string complete(const std::vector<ChatMessage>& messages, const nlohmann::json& tag);

  const RaterConfig& config() const { return cfg_; }

 private:
  ChatTransport& transport_;
  RaterConfig cfg_;
  RequestLog* log_;
  Sleeper sleep_;
};

struct ParsedRating {
  std::optional<int> score;
  bool lenient = false;  // accepted from surrounding prose
};

// Strict: the trimmed reply is one integer 1-5 (optional trailing period).
// Lenient: exactly one integer token in the reply, and it lies in 1-5.
ParsedRating parse_rating(std::string_view reply);

struct RatingOutcome {
  std::string story_id;
  int judge = 0;  // 1-based
  std::optional<int> score;
  int attempts = 0;
  bool lenient_warning = false;
  std::string error;  // non-empty for failure records
};

std::string judge_id(int judge);  // "llm-judge-<k>"

RatingOutcome rate_story(const Story& story, int judge, ChatClient& client, const PromptTemplates& templates);

struct RateReport {
  Corpus corpus;                      // input stories with judge scores appended
  std::vector<RatingOutcome> outcomes;  // sorted by (story_id, judge)
  std::size_t failures = 0;
  std::size_t lenient = 0;
};

RateReport rate_corpus(const Corpus& corpus, ChatClient& client, const PromptTemplates& templates);

using Triplet = std::array<std::string, 3>;

struct GenerationGap {
  int participant = 0;  // 1-based
  int prompt_index = 0;  // 1-based position in the prompt list
  Triplet prompt;
  std::string reason;
};

struct GenerationResult {
  Corpus stories;
  std::vector<GenerationGap> gaps;
};

// Story id of participant p (1-based) and prompt index k (1-based).
std::string generated_story_id(int participant, int prompt_index);

GenerationResult generate_stories(const std::vector<Triplet>& prompts, int participants, ChatClient& client,
                                  const PromptTemplates& templates);

}  // namespace storynet::rater
