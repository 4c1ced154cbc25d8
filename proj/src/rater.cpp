#include "storynet/rater.hpp"

#include "storynet/parallel.hpp"

#include <httplib.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <numeric>
#include <random>
#include <regex>
#include <thread>

namespace storynet::rater {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

bool retryable(int status) { return status == 0 || status == 429 || status >= 500; }

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size()))
    s.replace(pos, from.size(), to);
}

}  // namespace

void RaterConfig::validate() const {
  if (judges < 1) throw std::invalid_argument("judges must be >= 1");
  if (max_retries < 0) throw std::invalid_argument("max_retries must be >= 0");
  if (max_in_flight < 1) throw std::invalid_argument("max_in_flight must be >= 1");
  if (request_timeout_s <= 0) throw std::invalid_argument("request_timeout must be positive");
  if (endpoint_url.empty()) throw std::invalid_argument("endpoint_url is empty");
  if (temperature && (*temperature < 0 || *temperature > 2)) throw std::invalid_argument("temperature must lie in [0, 2]");
  if (backoff_initial_s < 0 || backoff_max_s < 0) throw std::invalid_argument("backoff must be >= 0");
}

nlohmann::json RaterConfig::to_json() const {
  nlohmann::json j = {{"endpoint_url", endpoint_url},
                      {"model_name", model_name},
                      {"temperature", nullptr},
                      {"api_key_env_var", api_key_env_var},
                      {"max_retries", max_retries},
                      {"request_timeout", request_timeout_s},
                      {"judges", judges},
                      {"max_in_flight", max_in_flight},
                      {"backoff_initial", backoff_initial_s},
                      {"backoff_max", backoff_max_s},
                      {"seed", seed}};
  if (temperature) j["temperature"] = *temperature;
  return j;
}

PromptTemplates PromptTemplates::defaults() {
  PromptTemplates t;
  t.generation_instructions =
      "Instruction Script Please read these instructions carefully as we will ask you comprehension questions "
      "about them before you can begin the task. You are required to write seven very short stories. You will be "
      "given 3 words, and you must write a story that is 4 to 6 sentences long and that includes all 3 words. Try "
      "to use your imagination and be creative when writing your story. After you have completed the story, the "
      "next three words will be given to you and you will write a new distinct story. You will also need to write "
      "one practice story before starting the actual task. Are you ready to receive the comprehension questions?";
  t.comprehension_question =
      "Instruction Check Questions What is expected of you as a response to the three words? You will write one "
      "sentence for each creative story: true or false?";
  t.practice_trial = "Practice Trial Now please do a practice run with the following three words: pencil - paper - write";
  t.main_task_intro = "You're ready to begin the main task now. ";
  t.prompt_line = "Prompt {k} - Your three words are: {words}";
  t.rating_instructions =
      "In this task, participants were shown 3 words, and were asked to write a short story that included all 3 "
      "words. They were told to be imaginative and creative when writing their stories.\n\n"
      "When rating the story, try not to focus too much on the length of the story, or how good the English is, "
      "but consider the overall creativity of the story. You may wish to consider how creatively the 3 words were "
      "used, how emotive, descriptive, or humorous the story was, and how much it \"came alive\".\n\n"
      "Scale:\n1: Very Uncreative\n2: Uncreative\n3: Undecided\n4: Creative\n5: Very Creative\n\n"
      "Respond with a single integer from 1 to 5 and nothing else. Do not explain your rating.";
  return t;
}

std::string PromptTemplates::format_prompt(int k, const std::array<std::string, 3>& words, bool first) const {
  std::string line = prompt_line;
  replace_all(line, "{k}", std::to_string(k));
  replace_all(line, "{words}", words[0] + " - " + words[1] + " - " + words[2]);
  return first ? main_task_intro + line : line;
}

void PromptTemplates::validate() const {
  if (generation_instructions.find("distinct") == std::string::npos)
    throw std::invalid_argument("generation instructions must ask for a distinct story per prompt");
  if (rating_instructions.find("single integer") == std::string::npos ||
      rating_instructions.find("1 to 5") == std::string::npos)
    throw std::invalid_argument("rating instructions must demand a single integer from 1 to 5");
}

nlohmann::json request_body(const std::vector<ChatMessage>& messages, const RaterConfig& cfg) {
  nlohmann::json msgs = nlohmann::json::array();
  for (const auto& m : messages) msgs.push_back({{"role", m.role}, {"content", m.content}});
  nlohmann::json body = {{"model", cfg.model_name}, {"messages", msgs}};
  if (cfg.temperature) body["temperature"] = *cfg.temperature;
  return body;
}

bool valid_request_body(const nlohmann::json& body) {
  if (!body.is_object() || !body.contains("model") || !body["model"].is_string()) return false;
  if (!body.contains("messages") || !body["messages"].is_array() || body["messages"].empty()) return false;
  for (const auto& m : body["messages"]) {
    if (!m.is_object() || m.size() != 2 || !m.contains("role") || !m.contains("content")) return false;
    if (!m["content"].is_string() || !m["role"].is_string()) return false;
    const auto role = m["role"].get<std::string>();
    if (role != "system" && role != "user" && role != "assistant") return false;
  }
  if (body.contains("temperature") && !body["temperature"].is_number()) return false;
  return true;
}

HttpTransport::HttpTransport(const RaterConfig& cfg, std::string api_key)
    : api_key_(std::move(api_key)), timeout_s_(cfg.request_timeout_s) {
  static const std::regex url_re(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(cfg.endpoint_url, m, url_re))
    throw std::invalid_argument("endpoint_url must look like http(s)://host[:port]/path");
  base_ = m[1].str();
  path_ = m[2].matched ? m[2].str() : "/v1/chat/completions";
}

HttpResponse HttpTransport::post(const nlohmann::json& body) {
  httplib::Client client(base_);
  const auto secs = static_cast<time_t>(timeout_s_);
  const auto usecs = static_cast<time_t>((timeout_s_ - static_cast<double>(secs)) * 1e6);
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);
  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
  auto res = client.Post(path_, headers, body.dump(), "application/json");
  if (!res) return {0, httplib::to_string(res.error())};
  return {res->status, res->body};
}

std::string api_key_from_env(const RaterConfig& cfg) {
  if (cfg.api_key_env_var.empty()) return {};
  const char* v = std::getenv(cfg.api_key_env_var.c_str());
  return v ? std::string(v) : std::string();
}

RequestLog::RequestLog(const std::string& path) : out_(path, std::ios::app) {
  if (!out_) throw std::runtime_error("cannot open request log '" + path + "'");
}

void RequestLog::write(const nlohmann::json& record) {
  std::lock_guard lock(mu_);
  records_.push_back(record);
  if (out_.is_open()) out_ << record.dump() << '\n' << std::flush;
}

std::vector<nlohmann::json> RequestLog::records() const {
  std::lock_guard lock(mu_);
  return records_;
}

ChatClient::ChatClient(ChatTransport& transport, RaterConfig cfg, RequestLog* log, Sleeper sleeper)
    : transport_(transport), cfg_(std::move(cfg)), log_(log), sleep_(std::move(sleeper)) {
  cfg_.validate();
  if (!sleep_) sleep_ = [](std::chrono::duration<double> d) { std::this_thread::sleep_for(d); };
}

std::string ChatClient::complete(const std::vector<ChatMessage>& messages, const nlohmann::json& tag) {
  const nlohmann::json body = request_body(messages, cfg_);
  if (!valid_request_body(body)) throw std::logic_error("malformed chat request body");
  double delay = cfg_.backoff_initial_s;
  for (int attempt = 0;; ++attempt) {
    const HttpResponse res = transport_.post(body);
    std::string content;
    std::string problem;
    if (res.status >= 200 && res.status < 300) {
      try {
        const auto j = nlohmann::json::parse(res.body);
        content = j.at("choices").at(0).at("message").at("content").get<std::string>();
      } catch (const std::exception& e) {
        problem = std::string("unparseable completion: ") + e.what();
      }
    }
    if (log_) {
      nlohmann::json rec = {{"tag", tag}, {"attempt", attempt + 1}, {"request", body}, {"status", res.status}};
      if (problem.empty() && res.status >= 200 && res.status < 300)
        rec["content"] = content;
      else
        rec["error"] = problem.empty() ? res.body : problem;
      log_->write(rec);
    }
    if (res.status >= 200 && res.status < 300) {
      if (problem.empty()) return content;
      throw TransportError(problem, res.status);
    }
    if (!retryable(res.status))
      throw TransportError("chat endpoint returned HTTP " + std::to_string(res.status) + ": " + res.body,
                           res.status);
    if (attempt >= cfg_.max_retries)
      throw TransportError("chat endpoint failed after " + std::to_string(attempt + 1) + " attempts (last status " +
                               std::to_string(res.status) + ")",
                           res.status);
    sleep_(std::chrono::duration<double>(delay));
    delay = std::min(delay * 2, cfg_.backoff_max_s);
  }
}

ParsedRating parse_rating(std::string_view reply) {
  std::string t = trim(reply);
  if (!t.empty() && t.back() == '.') t.pop_back();
  if (t.size() == 1 && t[0] >= '1' && t[0] <= '5') return {t[0] - '0', false};

  std::vector<std::string> numbers;
  for (std::size_t i = 0; i < reply.size();) {
    if (std::isdigit(static_cast<unsigned char>(reply[i]))) {
      std::size_t j = i;
      while (j < reply.size() && std::isdigit(static_cast<unsigned char>(reply[j]))) ++j;
      numbers.emplace_back(reply.substr(i, j - i));
      i = j;
    } else {
      ++i;
    }
  }
  if (numbers.size() == 1 && numbers[0].size() == 1 && numbers[0][0] >= '1' && numbers[0][0] <= '5')
    return {numbers[0][0] - '0', true};
  return {};
}

std::string judge_id(int judge) { return "llm-judge-" + std::to_string(judge); }

RatingOutcome rate_story(const Story& story, int judge, ChatClient& client, const PromptTemplates& templates) {
  RatingOutcome out;
  out.story_id = story.id;
  out.judge = judge;
  const std::vector<ChatMessage> messages = {
      {"system", templates.rating_instructions},
      {"user", "Three words: " + story.prompt[0] + ", " + story.prompt[1] + ", " + story.prompt[2] +
                   "\n\nStory:\n" + story.text}};
  const nlohmann::json tag = {{"task", "rate"}, {"story_id", story.id}, {"judge", judge}};
  const int budget = client.config().max_retries + 1;
  std::string last_reply;
  for (int attempt = 0; attempt < budget; ++attempt) {
    ++out.attempts;
    try {
      last_reply = client.complete(messages, tag);
    } catch (const TransportError& e) {
      if (e.status() == 401 || e.status() == 403) throw;
      out.error = e.what();
      return out;
    }
    const ParsedRating p = parse_rating(last_reply);
    if (p.score) {
      out.score = p.score;
      out.lenient_warning = p.lenient;
      if (p.lenient)
        std::clog << "warning: story " << story.id << ", judge " << judge << ": rating extracted from prose reply\n";
      return out;
    }
  }
  out.error = "no rating 1-5 in reply after " + std::to_string(budget) + " attempts; last reply: " + last_reply;
  return out;
}

RateReport rate_corpus(const Corpus& corpus, ChatClient& client, const PromptTemplates& templates) {
  templates.validate();
  const int judges = client.config().judges;
  const std::size_t jobs = corpus.size() * static_cast<std::size_t>(judges);
  std::vector<RatingOutcome> outcomes(jobs);
  parallel_for(jobs, client.config().max_in_flight, [&](std::size_t k) {
    const std::size_t story = k / static_cast<std::size_t>(judges);
    const int judge = static_cast<int>(k % static_cast<std::size_t>(judges)) + 1;
    outcomes[k] = rate_story(corpus[story], judge, client, templates);
  });

  RateReport report;
  report.corpus = corpus;
  for (std::size_t k = 0; k < jobs; ++k) {
    const RatingOutcome& o = outcomes[k];
    if (o.score)
      report.corpus[k / static_cast<std::size_t>(judges)].ratings.push_back({judge_id(o.judge), *o.score});
    else
      ++report.failures;
    if (o.lenient_warning) ++report.lenient;
  }
  std::sort(outcomes.begin(), outcomes.end(), [](const RatingOutcome& a, const RatingOutcome& b) {
    return std::tie(a.story_id, a.judge) < std::tie(b.story_id, b.judge);
  });
  report.outcomes = std::move(outcomes);
  return report;
}

std::string generated_story_id(int participant, int prompt_index) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "llm-p%03d-%d", participant, prompt_index);
  return buf;
}

GenerationResult generate_stories(const std::vector<Triplet>& prompts, int participants, ChatClient& client,
                                  const PromptTemplates& templates) {
  templates.validate();
  if (participants < 0) throw std::invalid_argument("participants must be >= 0");
  if (prompts.empty() && participants > 0) throw std::invalid_argument("generation needs at least one prompt");

  struct ParticipantResult {
    std::vector<Story> stories;
    std::vector<GenerationGap> gaps;
  };
  std::vector<ParticipantResult> results(static_cast<std::size_t>(participants));
  const std::uint64_t seed = client.config().seed;

  parallel_for(results.size(), client.config().max_in_flight, [&](std::size_t idx) {
    const int participant = static_cast<int>(idx) + 1;
    std::vector<std::size_t> order(prompts.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed ^ (0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(participant)));
    std::shuffle(order.begin(), order.end(), rng);

    // Fresh conversation for every participant.
    std::vector<ChatMessage> convo;
    const nlohmann::json warmup_tag = {{"task", "generate"}, {"participant", participant}, {"stage", "setup"}};
    for (const std::string* setup :
         {&templates.generation_instructions, &templates.comprehension_question, &templates.practice_trial}) {
      convo.push_back({"user", *setup});
      convo.push_back({"assistant", client.complete(convo, warmup_tag)});
    }

    ParticipantResult& out = results[idx];
    int position = 0;
    for (std::size_t p : order) {
      ++position;
      const Triplet& words = prompts[p];
      const int prompt_index = static_cast<int>(p) + 1;
      convo.push_back({"user", templates.format_prompt(position, words, position == 1)});
      const nlohmann::json tag = {{"task", "generate"},
                                  {"participant", participant},
                                  {"prompt_index", prompt_index},
                                  {"position", position}};
      std::string text;
      std::string reason = "empty completion";
      for (int attempt = 0; attempt <= client.config().max_retries && text.empty(); ++attempt) {
        try {
          text = trim(client.complete(convo, tag));
        } catch (const TransportError& e) {
          if (e.status() == 401 || e.status() == 403) throw;
          reason = e.what();
          break;
        }
      }
      if (text.empty()) {
        convo.pop_back();
        out.gaps.push_back({participant, prompt_index, words, reason});
        continue;
      }
      convo.push_back({"assistant", text});
      Story s;
      s.id = generated_story_id(participant, prompt_index);
      s.author = AuthorKind::Llm;
      s.prompt = words;
      s.text = text;
      out.stories.push_back(std::move(s));
    }
    std::sort(out.stories.begin(), out.stories.end(),
              [](const Story& a, const Story& b) { return a.id < b.id; });
  });

  GenerationResult result;
  for (auto& r : results) {
    for (auto& s : r.stories) result.stories.push_back(std::move(s));
    for (auto& g : r.gaps) result.gaps.push_back(std::move(g));
  }
  return result;
}

}  // namespace storynet::rater
