#include <doctest.h>

#include <atomic>
#include <chrono>
#include <thread>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "longeval/errors.hpp"
#include "longeval/gateway.hpp"
#include "test_util.hpp"

using namespace longeval;
using json = nlohmann::json;

namespace {

GenerationRequest make_request(const std::string& prompt) {
  GenerationRequest r;
  r.model_id = "test-model";
  r.prompt = prompt;
  r.max_output_tokens = 64;
  r.temperature = 0.0;
  r.seed = 0;
  return r;
}

Gateway::Options fast_options(const std::string& cache_dir = "") {
  Gateway::Options options;
  options.cache_dir = cache_dir;
  options.retry.base_delay = std::chrono::milliseconds(1);
  options.sleeper = [](std::chrono::milliseconds) {};
  return options;
}

}  // namespace

TEST_CASE("cache key changes with any request field") {
  const GenerationRequest base = make_request("hello");
  auto k = cache_key(base);
  CHECK(k == cache_key(base));  // stable
  GenerationRequest r = base;
  r.temperature = 0.7;
  CHECK(cache_key(r) != k);
  r = base;
  r.prompt = "hello!";
  CHECK(cache_key(r) != k);
  r = base;
  r.max_output_tokens = 65;
  CHECK(cache_key(r) != k);
  r = base;
  r.model_id = "other";
  CHECK(cache_key(r) != k);
  r = base;
  r.seed = 1;
  CHECK(cache_key(r) != k);
  r = base;
  r.seed.reset();
  CHECK(cache_key(r) != k);
}

TEST_CASE("mock backend scripting") {
  MockBackend mock("m");
  mock.script_exact("exact prompt", "exact response");
  mock.script_substring("Question:", "Question: Who?\nAnswer: Him.");
  mock.set_default_response("fallback");

  CHECK(mock.complete(make_request("exact prompt")).text == "exact response");
  CHECK(mock.complete(make_request("say Question: now")).text ==
        "Question: Who?\nAnswer: Him.");
  CHECK(mock.complete(make_request("anything else")).text == "fallback");
  CHECK(mock.calls() == 3);

  MockBackend strict("s");
  strict.script_substring("only", "x");
  CHECK_THROWS_AS(strict.complete(make_request("no match")), MockMissError);
}

TEST_CASE("mock responses are a pure function of the request") {
  MockBackend mock("m");
  mock.script_substring("a", "ra");
  mock.script_substring("b", "rb");
  // First matching rule in insertion order wins, repeatably.
  for (int i = 0; i < 3; ++i) {
    CHECK(mock.complete(make_request("a and b")).text == "ra");
    CHECK(mock.complete(make_request("only b")).text == "rb");
  }
}

TEST_CASE("generate serves repeats from the persistent cache") {
  test_util::TempDir dir("cache");
  MockBackend mock("m");
  mock.set_default_response("cached text");
  Gateway gateway(fast_options(dir.str()));

  const GenerationRequest request = make_request("prompt one");
  const GenerationResponse first = gateway.generate(mock, request);
  const GenerationResponse second = gateway.generate(mock, request);
  CHECK(first.text == "cached text");
  CHECK(second.text == first.text);
  CHECK(second.finish_reason == first.finish_reason);
  CHECK(mock.calls() == 1);  // exactly one backend call total
  CHECK(gateway.stats().cache_hits == 1);

  SUBCASE("a fresh gateway over the same directory still hits") {
    Gateway warm(fast_options(dir.str()));
    CHECK(warm.generate(mock, request).text == "cached text");
    CHECK(mock.calls() == 1);
  }

  SUBCASE("different temperature is a separate entry") {
    GenerationRequest hot = request;
    hot.temperature = 1.0;
    gateway.generate(mock, hot);
    CHECK(mock.calls() == 2);
  }

  SUBCASE("regenerate bypasses the cache read but refreshes the entry") {
    gateway.regenerate(mock, request);
    CHECK(mock.calls() == 2);
    gateway.generate(mock, request);
    CHECK(mock.calls() == 2);  // hit again
  }
}

TEST_CASE("empty prompt is rejected") {
  MockBackend mock("m");
  mock.set_default_response("x");
  Gateway gateway(fast_options());
  CHECK_THROWS_AS(gateway.generate(mock, make_request("")), Error);
}

TEST_CASE("retries back off and stop at the configured maximum") {
  std::vector<std::chrono::milliseconds> delays;
  Gateway::Options options;
  options.retry.max_attempts = 5;
  options.retry.base_delay = std::chrono::milliseconds(10);
  options.sleeper = [&](std::chrono::milliseconds d) { delays.push_back(d); };

  SUBCASE("recovers when a late attempt succeeds") {
    MockBackend mock("m");
    mock.set_default_response("ok");
    mock.fail_first(3);
    Gateway gateway(std::move(options));
    CHECK(gateway.generate(mock, make_request("p")).text == "ok");
    CHECK(mock.calls() == 4);
    CHECK(gateway.stats().retries == 3);
    REQUIRE(delays.size() == 3);
    // Exponential, hence non-decreasing.
    CHECK(delays[0] == std::chrono::milliseconds(10));
    CHECK(delays[1] == std::chrono::milliseconds(20));
    CHECK(delays[2] == std::chrono::milliseconds(40));
  }

  SUBCASE("exhausted retries raise BackendUnavailable") {
    MockBackend mock("m");
    mock.set_default_response("ok");
    mock.fail_first(100);
    Gateway gateway(std::move(options));
    CHECK_THROWS_AS(gateway.generate(mock, make_request("p")),
                    BackendUnavailableError);
    CHECK(mock.calls() == 5);  // never more than max_attempts
  }

  SUBCASE("mock scripting misses are not retried") {
    MockBackend mock("m");
    Gateway gateway(std::move(options));
    CHECK_THROWS_AS(gateway.generate(mock, make_request("p")), MockMissError);
    CHECK(mock.calls() == 1);
  }
}

TEST_CASE("rate limiter paces requests through the token bucket") {
  std::vector<std::chrono::milliseconds> waits;
  Gateway::Options options;
  options.rate_limit.requests_per_minute = 60.0;  // one per second
  options.rate_limit.burst = 1.0;
  options.sleeper = [&](std::chrono::milliseconds d) { waits.push_back(d); };
  Gateway gateway(std::move(options));
  MockBackend mock("m");
  mock.set_default_response("ok");
  gateway.generate(mock, make_request("p1"));
  CHECK(waits.empty());  // burst token covers the first call
  gateway.generate(mock, make_request("p2"));
  CHECK(!waits.empty());  // second call had to wait for a refill
}

TEST_CASE("generate_batch returns responses in request order") {
  MockBackend mock("m");
  mock.script_substring("p1", "r1");
  mock.script_substring("p2", "r2");
  mock.script_substring("p3", "r3");
  mock.script_substring("p4", "r4");
  Gateway::Options options = fast_options();
  options.max_in_flight = 4;
  Gateway gateway(std::move(options));
  std::vector<GenerationRequest> requests = {
      make_request("p1"), make_request("p2"), make_request("p3"),
      make_request("p4"), make_request("p2 again")};
  const auto responses = gateway.generate_batch(mock, requests);
  REQUIRE(responses.size() == 5);
  CHECK(responses[0].text == "r1");
  CHECK(responses[1].text == "r2");
  CHECK(responses[2].text == "r3");
  CHECK(responses[3].text == "r4");
  CHECK(responses[4].text == "r2");
}

TEST_CASE("http backend talks to an openai-shaped endpoint") {
  httplib::Server server;
  std::atomic<int> hits{0};
  std::string seen_auth;
  server.Post("/v1/chat/completions",
              [&](const httplib::Request& req, httplib::Response& res) {
                ++hits;
                seen_auth = req.get_header_value("Authorization");
                const json body = json::parse(req.body);
                const std::string prompt =
                    body["messages"][0]["content"].get<std::string>();
                json reply = {
                    {"choices",
                     json::array(
                         {{{"message", {{"content", "echo: " + prompt}}},
                           {"finish_reason", "stop"}}})},
                    {"usage",
                     {{"prompt_tokens", 7}, {"completion_tokens", 3}}}};
                res.set_content(reply.dump(), "application/json");
              });
  server.Post("/flaky", [&](const httplib::Request&, httplib::Response& res) {
    if (++hits < 3) {
      res.status = 500;
      res.set_content("boom", "text/plain");
    } else {
      json reply = {{"choices",
                     json::array({{{"message", {{"content", "recovered"}}},
                                   {"finish_reason", "stop"}}})}};
      res.set_content(reply.dump(), "application/json");
    }
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread server_thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  HttpBackendProfile profile;
  profile.name = "testsvc";
  profile.base_url = "http://127.0.0.1:" + std::to_string(port);
  profile.auth_env = "LONGEVAL_API_KEY_TESTSVC";

  SUBCASE("success path maps text, finish reason and usage") {
    setenv("LONGEVAL_API_KEY_TESTSVC", "sekrit", 1);
    HttpBackend backend(profile);
    Gateway gateway(fast_options());
    const GenerationResponse response =
        gateway.generate(backend, make_request("ping"));
    CHECK(response.text == "echo: ping");
    CHECK(response.finish_reason == FinishReason::complete);
    CHECK(response.usage.input_tokens == 7);
    CHECK(response.usage.output_tokens == 3);
    CHECK(seen_auth == "Bearer sekrit");
    unsetenv("LONGEVAL_API_KEY_TESTSVC");
  }

  SUBCASE("5xx responses are retried until the endpoint recovers") {
    hits = 0;
    HttpBackendProfile flaky = profile;
    flaky.path = "/flaky";
    HttpBackend backend(flaky);
    Gateway gateway(fast_options());
    CHECK(gateway.generate(backend, make_request("ping")).text ==
          "recovered");
    CHECK(hits == 3);
  }

  SUBCASE("persistent non-success surfaces BackendHttpError") {
    HttpBackendProfile broken = profile;
    broken.path = "/missing";
    HttpBackend backend(broken);
    Gateway::Options options = fast_options();
    options.retry.max_attempts = 2;
    Gateway gateway(std::move(options));
    try {
      gateway.generate(backend, make_request("ping"));
      FAIL("expected BackendHttpError");
    } catch (const BackendHttpError& e) {
      CHECK(e.status() == 404);
    }
  }

  server.stop();
  server_thread.join();
}

TEST_CASE("unreachable endpoint raises BackendUnavailable") {
  HttpBackendProfile profile;
  profile.name = "nowhere";
  profile.base_url = "http://127.0.0.1:9";  // nothing listens here
  profile.timeout_seconds = 1;
  HttpBackend backend(profile);
  Gateway::Options options = fast_options();
  options.retry.max_attempts = 2;
  Gateway gateway(std::move(options));
  CHECK_THROWS_AS(gateway.generate(backend, make_request("p")),
                  BackendUnavailableError);
}
