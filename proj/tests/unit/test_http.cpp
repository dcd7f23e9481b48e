#include <httplib.h>

#include <doctest.h>

#include <atomic>
#include <thread>

#include "contraforge/error.hpp"
#include "contraforge/http_providers.hpp"

using namespace contraforge;
using nlohmann::json;

namespace {

// Local server on an ephemeral port, stopped on scope exit.
class LocalServer {
 public:
  LocalServer() {
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::jthread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~LocalServer() { server_.stop(); }
  httplib::Server& operator*() { return server_; }
  httplib::Server* operator->() { return &server_; }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::jthread thread_;
};

HttpEndpoint endpoint(const LocalServer& s, std::vector<std::chrono::milliseconds>* delays = nullptr) {
  HttpEndpoint e;
  e.base_url = s.url();
  e.model = "m";
  e.api_key = "secret";
  e.timeout = std::chrono::seconds(5);
  e.retry.base_delay = std::chrono::milliseconds(100);
  e.retry.sleep = [delays](std::chrono::milliseconds d) {
    if (delays) delays->push_back(d);
  };
  return e;
}

void reply(httplib::Response& res, const json& body) {
  res.set_content(body.dump(), "application/json");
}

json chat_answer(const std::string& text) {
  return {{"choices", json::array({{{"message", {{"role", "assistant"}, {"content", text}}}}})}};
}

}  // namespace

TEST_CASE("three 429s then success takes four attempts with growing backoff") {
  LocalServer s;
  std::atomic<int> hits{0};
  s->Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
    if (++hits <= 3) {
      res.status = 429;
      return;
    }
    reply(res, chat_answer("hello"));
  });
  std::vector<std::chrono::milliseconds> delays;
  OpenAiChat chat(endpoint(s, &delays));
  ChatRequest r;
  r.user = "hi";
  CHECK(chat.complete(r) == "hello");
  CHECK(JsonTransport::last_attempts() == 4);
  REQUIRE(delays.size() == 3);
  for (std::size_t i = 0; i < delays.size(); ++i) {
    const auto lo = 100LL << i;
    CHECK(delays[i].count() >= lo);
    CHECK(delays[i].count() < lo + lo / 2 + 1);
  }
}

TEST_CASE("5xx is retried until the budget runs out; 4xx fails at once") {
  LocalServer s;
  std::atomic<int> server_hits{0};
  std::atomic<int> client_hits{0};
  s->Post("/v1/embeddings", [&](const httplib::Request&, httplib::Response& res) {
    ++server_hits;
    res.status = 503;
  });
  s->Post("/v1/nli", [&](const httplib::Request&, httplib::Response& res) {
    ++client_hits;
    res.status = 400;
    res.set_content("bad request", "text/plain");
  });
  auto e = endpoint(s);
  e.retry.max_retries = 2;
  OpenAiEmbedder emb(e);
  std::vector<std::string> texts{"x"};
  CHECK_THROWS_AS(emb.embed(texts), ProviderError);
  CHECK(server_hits == 3);

  HttpNli nli(e);
  CHECK_THROWS_AS(nli.classify("a", "b"), ProviderError);
  CHECK(client_hits == 1);
  CHECK(JsonTransport::last_attempts() == 1);
}

TEST_CASE("malformed bodies raise DecodeError naming the field") {
  LocalServer s;
  s->Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
    reply(res, {{"choices", json::array({{{"message", {{"role", "assistant"}}}}})}});
  });
  s->Post("/v1/nli", [&](const httplib::Request&, httplib::Response& res) {
    res.set_content("not json", "application/json");
  });
  OpenAiChat chat(endpoint(s));
  ChatRequest r;
  r.user = "hi";
  try {
    chat.complete(r);
    FAIL("expected DecodeError");
  } catch (const DecodeError& e) {
    CHECK(e.field() == "choices[0].message.content");
  }
  HttpNli nli(endpoint(s));
  CHECK_THROWS_AS(nli.classify("a", "b"), DecodeError);
}

TEST_CASE("requests carry the bearer token and the documented payloads") {
  LocalServer s;
  json seen;
  std::string auth;
  s->Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    seen = json::parse(req.body);
    auth = req.get_header_value("Authorization");
    reply(res, chat_answer("ok"));
  });
  OpenAiChat chat(endpoint(s));
  ChatRequest r;
  r.system = "sys";
  r.user = "usr";
  r.temperature = 0.3;
  chat.complete(r);
  CHECK(auth == "Bearer secret");
  CHECK(seen["model"] == "m");
  REQUIRE(seen["messages"].size() == 2);
  CHECK(seen["messages"][0]["role"] == "system");
  CHECK(seen["messages"][1]["content"] == "usr");
  CHECK(seen["temperature"].get<double>() == doctest::Approx(0.3));
}

TEST_CASE("embeddings are placed by index and normalized") {
  LocalServer s;
  s->Post("/v1/embeddings", [&](const httplib::Request&, httplib::Response& res) {
    reply(res, {{"data", json::array({{{"index", 1}, {"embedding", {0.0, 2.0}}},
                                      {{"index", 0}, {"embedding", {3.0, 4.0}}}})}});
  });
  OpenAiEmbedder emb(endpoint(s));
  std::vector<std::string> texts{"a", "b"};
  const auto v = emb.embed(texts);
  REQUIRE(v.size() == 2);
  CHECK(v[0][0] == doctest::Approx(0.6));
  CHECK(v[0][1] == doctest::Approx(0.8));
  CHECK(v[1][1] == doctest::Approx(1.0));
}

TEST_CASE("echo logprobs skip the leading null") {
  LocalServer s;
  json seen;
  s->Post("/v1/completions", [&](const httplib::Request& req, httplib::Response& res) {
    seen = json::parse(req.body);
    reply(res, {{"choices", json::array({{{"logprobs",
                                           {{"token_logprobs", {nullptr, -1.5, -0.25}}}}}})}});
  });
  CompletionLogprobs lm(endpoint(s), 2000);
  const auto lp = lm.token_logprobs("some text");
  CHECK(lp == std::vector<double>{-1.5, -0.25});
  CHECK(seen["echo"] == true);
  CHECK(seen["max_tokens"] == 0);
}

TEST_CASE("NLI verdicts are decoded and validated") {
  LocalServer s;
  std::atomic<int> n{0};
  s->Post("/v1/nli", [&](const httplib::Request&, httplib::Response& res) {
    if (n++ == 0) {
      reply(res, {{"label", "contradiction"}, {"confidence", 0.91}});
    } else {
      reply(res, {{"label", "contradiction"}, {"confidence", 1.7}});
    }
  });
  HttpNli nli(endpoint(s));
  const auto v = nli.classify("a", "b");
  CHECK(v.label == NliLabel::Contradiction);
  CHECK(v.confidence == doctest::Approx(0.91));
  CHECK_THROWS_AS(nli.classify("a", "b"), DecodeError);
  CHECK_THROWS_AS(nli.classify(" ", "b"), PreconditionError);
}

TEST_CASE("network failures are retried and then reported") {
  HttpEndpoint e;
  e.base_url = "http://127.0.0.1:1/v1";
  e.model = "m";
  e.retry.max_retries = 1;
  e.retry.sleep = [](std::chrono::milliseconds) {};
  OpenAiChat chat(e);
  ChatRequest r;
  r.user = "x";
  CHECK_THROWS_AS(chat.complete(r), ProviderError);
  CHECK(JsonTransport::last_attempts() == 2);
  HttpEndpoint bad;
  bad.base_url = "no-scheme";
  CHECK_THROWS_AS(OpenAiChat{bad}, ConfigError);
}
