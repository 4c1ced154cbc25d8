#include <doctest.h>

#include <atomic>
#include <deque>
#include <mutex>
#include <set>
#include <thread>

#include <httplib.h>

#include "storynet/rater.hpp"

using namespace storynet;
using namespace storynet::rater;

namespace {

std::string completion(const std::string& content) {
  return nlohmann::json{{"choices", {{{"message", {{"role", "assistant"}, {"content", content}}}}}}}.dump();
}

// Scripted transport: pops one canned response per call.
class Scripted final : public ChatTransport {
 public:
  explicit Scripted(std::deque<HttpResponse> script) : script_(std::move(script)) {}
  HttpResponse post(const nlohmann::json& body) override {
    std::lock_guard lock(mu_);
    bodies.push_back(body);
    if (script_.empty()) return {200, completion("3")};
    auto r = script_.front();
    script_.pop_front();
    return r;
  }
  std::vector<nlohmann::json> bodies;

 private:
  std::mutex mu_;
  std::deque<HttpResponse> script_;
};

RaterConfig fast_config() {
  RaterConfig c;
  c.max_retries = 2;
  c.backoff_initial_s = 0.0;
  c.api_key_env_var = "";
  return c;
}

Corpus three_stories() {
  Corpus c;
  for (int i = 1; i <= 3; ++i) {
    Story s;
    s.id = "s" + std::to_string(i);
    s.prompt = {"stamp", "letter", "send"};
    s.text = "Story number " + std::to_string(i) + ".";
    c.push_back(s);
  }
  return c;
}

struct MockServer {
  httplib::Server server;
  std::thread thread;
  int port = 0;
  std::atomic<int> hits{0};
  std::atomic<int> fail_first{0};
  std::mutex mu;
  std::vector<std::string> auth;

  MockServer() {
    server.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      {
        std::lock_guard lock(mu);
        auth.push_back(req.get_header_value("Authorization"));
      }
      const int n = ++hits;
      if (n <= fail_first) {
        res.status = 503;
        res.set_content("busy", "text/plain");
        return;
      }
      const auto body = nlohmann::json::parse(req.body);
      const std::string user = body["messages"].back()["content"];
      const std::string score = user.find("number 2") != std::string::npos ? "Score: 5" : "4";
      res.set_content(completion(score), "application/json");
    });
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~MockServer() {
    server.stop();
    thread.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions"; }
};

}  // namespace

TEST_CASE("parse_rating") {
  CHECK(parse_rating("4").score == 4);
  CHECK(parse_rating(" 5.\n").score == 5);
  CHECK_FALSE(parse_rating("5").lenient);
  const auto prose = parse_rating("I would give it a 3");
  CHECK(prose.score == 3);
  CHECK(prose.lenient);
  CHECK_FALSE(parse_rating("3 out of 5").score);
  CHECK_FALSE(parse_rating("6").score);
  CHECK_FALSE(parse_rating("0").score);
  CHECK_FALSE(parse_rating("").score);
  CHECK_FALSE(parse_rating("great story").score);
  CHECK_FALSE(parse_rating("45").score);
}

TEST_CASE("request bodies") {
  RaterConfig c = fast_config();
  auto body = request_body({{"user", "hi"}}, c);
  CHECK(valid_request_body(body));
  CHECK_FALSE(body.contains("temperature"));
  c.temperature = 0.7;
  body = request_body({{"system", "a"}, {"user", "b"}}, c);
  CHECK(body["temperature"] == 0.7);
  CHECK(body["model"] == "gpt-3.5-turbo");
  CHECK_FALSE(valid_request_body(nlohmann::json::object()));
  CHECK_FALSE(valid_request_body({{"model", "m"}, {"messages", nlohmann::json::array()}}));
  CHECK_FALSE(valid_request_body({{"model", "m"}, {"messages", {{{"role", "tool"}, {"content", "x"}}}}}));
}

TEST_CASE("client retries transient failures") {
  Scripted t({{503, "busy"}, {429, "slow"}, {200, completion("2")}});
  RequestLog log;
  std::vector<double> sleeps;
  RaterConfig c = fast_config();
  c.backoff_initial_s = 0.5;
  ChatClient client(t, c, &log, [&](std::chrono::duration<double> d) { sleeps.push_back(d.count()); });
  CHECK(client.complete({{"user", "x"}}, "tag") == "2");
  CHECK(sleeps == std::vector<double>{0.5, 1.0});
  CHECK(log.records().size() == 3);

  Scripted broken({{500, ""}, {500, ""}, {500, ""}, {500, ""}});
  ChatClient failing(broken, c, nullptr, [](auto) {});
  CHECK_THROWS_AS(failing.complete({{"user", "x"}}, "t"), TransportError);
  CHECK(broken.bodies.size() == 3);

  Scripted denied({{401, "no"}});
  ChatClient unauthorised(denied, c, nullptr, [](auto) {});
  CHECK_THROWS_AS(unauthorised.complete({{"user", "x"}}, "t"), TransportError);
  CHECK(denied.bodies.size() == 1);
}

TEST_CASE("unparseable replies are retried then recorded as failures") {
  Scripted t({{200, completion("lovely")}, {200, completion("4")}});
  ChatClient client(t, fast_config(), nullptr, [](auto) {});
  const auto story = three_stories()[0];
  const auto ok = rate_story(story, 1, client, PromptTemplates::defaults());
  CHECK(ok.score == 4);
  CHECK(ok.attempts == 2);

  Scripted never({{200, completion("a")}, {200, completion("b")}, {200, completion("c")}});
  ChatClient c2(never, fast_config(), nullptr, [](auto) {});
  const auto bad = rate_story(story, 2, c2, PromptTemplates::defaults());
  CHECK_FALSE(bad.score);
  CHECK(bad.attempts == 3);
  CHECK_FALSE(bad.error.empty());
}

TEST_CASE("rating a corpus against a local endpoint") {
  MockServer mock;
  mock.fail_first = 2;
  RaterConfig c = fast_config();
  c.endpoint_url = mock.url();
  c.request_timeout_s = 5;
  c.max_in_flight = 3;
  HttpTransport transport(c, "secret");
  RequestLog log;
  ChatClient client(transport, c, &log, [](auto) {});
  const auto report = rate_corpus(three_stories(), client, PromptTemplates::defaults());
  CHECK(report.failures == 0);
  CHECK(report.outcomes.size() == 12);
  std::size_t ratings = 0;
  for (const auto& s : report.corpus) {
    CHECK(s.ratings.size() == 4);
    std::set<std::string> ids;
    for (const auto& r : s.ratings) {
      ids.insert(r.rater_id);
      CHECK(r.score == (s.id == "s2" ? 5 : 4));
    }
    CHECK(ids.size() == 4);
    ratings += s.ratings.size();
  }
  CHECK(ratings == 12);
  CHECK(report.lenient == 4);
  CHECK(mock.hits == 14);
  CHECK(log.records().size() == 14);
  for (const auto& a : mock.auth) CHECK(a == "Bearer secret");
  for (std::size_t k = 1; k < report.outcomes.size(); ++k)
    CHECK(std::tie(report.outcomes[k - 1].story_id, report.outcomes[k - 1].judge) <
          std::tie(report.outcomes[k].story_id, report.outcomes[k].judge));
}

TEST_CASE("unreachable endpoint") {
  RaterConfig c = fast_config();
  c.endpoint_url = "http://127.0.0.1:1/v1/chat/completions";
  c.request_timeout_s = 1;
  c.max_retries = 1;
  HttpTransport transport(c, "");
  ChatClient client(transport, c, nullptr, [](auto) {});
  const auto o = rate_story(three_stories()[0], 1, client, PromptTemplates::defaults());
  CHECK_FALSE(o.score);
  CHECK_FALSE(o.error.empty());
  CHECK_THROWS(HttpTransport([] {
    RaterConfig bad;
    bad.endpoint_url = "ftp://x";
    return bad;
  }(), ""));
}

TEST_CASE("story generation") {
  Scripted t({});
  ChatClient client(t, fast_config(), nullptr, [](auto) {});
  const std::vector<Triplet> prompts = {{{"a", "b", "c"}}, {{"d", "e", "f"}}};
  const auto res = generate_stories(prompts, 2, client, PromptTemplates::defaults());
  CHECK(res.stories.size() == 4);
  CHECK(res.gaps.empty());
  CHECK(res.stories[0].id == generated_story_id(1, 1));
  CHECK(generated_story_id(12, 3) == "llm-p012-3");
  for (const auto& s : res.stories) CHECK(s.author == AuthorKind::Llm);
  // 3 setup turns + 2 prompts per participant.
  CHECK(t.bodies.size() == 10);
  CHECK(judge_id(2) == "llm-judge-2");
}

TEST_CASE("config validation") {
  RaterConfig c;
  CHECK_NOTHROW(c.validate());
  c.judges = 0;
  CHECK_THROWS(c.validate());
  c = RaterConfig{};
  c.temperature = -1;
  CHECK_THROWS(c.validate());
  CHECK(RaterConfig{}.to_json().contains("model_name"));
}
