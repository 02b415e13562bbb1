#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "railcom/llm_gateway.hpp"

using namespace railcom;
using nlohmann::json;

namespace {

PromptBundle simple_bundle(const std::string& id = "scn") {
  PromptBundle b;
  b.scenario_id = id;
  b.system_text = "system words here";
  b.user_parts.push_back({PartRole::log, "Perception Log:\nFrame 1: No objects.", ""});
  b.user_parts.push_back({PartRole::question, "Question: q", ""});
  return b;
}

std::filesystem::path write_temp(const std::string& name, const std::string& content) {
  const auto p = std::filesystem::temp_directory_path() / name;
  std::ofstream out(p, std::ios::binary);
  out << content;
  return p;
}

struct TestServer {
  httplib::Server svr;
  int port = 0;
  std::thread th;
  TestServer() = default;
  void start() {
    port = svr.bind_to_any_port("127.0.0.1");
    th = std::thread([this] { svr.listen_after_bind(); });
    svr.wait_until_ready();
  }
  ~TestServer() {
    svr.stop();
    if (th.joinable()) th.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port); }
};

}  // namespace

TEST_CASE("whitespace token count") {
  CHECK(whitespace_token_count("") == 0);
  CHECK(whitespace_token_count("one") == 1);
  CHECK(whitespace_token_count("  a  b\nc\td ") == 4);
}

TEST_CASE("wire body carries system, parts in order and data URIs") {
  auto img = write_temp("railcom_img.png", "PNG");
  PromptBundle b = simple_bundle();
  b.user_parts.insert(b.user_parts.begin(), {PartRole::image, img.string(), "Seq: 3/10"});
  const json body = json::parse(serialize_bundle_wire(b, "model-x"));
  CHECK(body["model"] == "model-x");
  REQUIRE(body["messages"].size() == 2);
  CHECK(body["messages"][0]["role"] == "system");
  CHECK(body["messages"][0]["content"] == "system words here");
  const auto& content = body["messages"][1]["content"];
  REQUIRE(content.size() == 4);  // image + seq label + log + question
  CHECK(content[0]["type"] == "image_url");
  CHECK(content[0]["image_url"]["url"] == "data:image/png;base64,UE5H");
  CHECK(content[1]["text"] == "Seq: 3/10");
  CHECK(content[2]["text"].get<std::string>().rfind("Perception Log:", 0) == 0);
  std::filesystem::remove(img);
  // non-file refs pass through as URLs
  PromptBundle u = simple_bundle();
  u.user_parts.insert(u.user_parts.begin(),
                      {PartRole::image, "https://host/img.jpg", "Seq: 1/2"});
  const json ubody = json::parse(serialize_bundle_wire(u, "m"));
  CHECK(ubody["messages"][1]["content"][0]["image_url"]["url"] == "https://host/img.jpg");
}

TEST_CASE("mock backend replays the script without sleeping") {
  const auto script = write_temp("railcom_mock.json", R"({
    "scn": {"text": "Perceiving: a\nReasoning: b\nPlanning: c\nFinal Answer: d",
            "completion_tokens": 120, "latency_ms": 5000},
    "other": {"text": "three word reply"}
  })");
  BackendConfig cfg;
  cfg.mode = BackendMode::mock;
  cfg.mock_script_path = script.string();
  LlmGateway gw(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  auto r = gw.complete(simple_bundle());
  const auto wall =
      std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0);
  CHECK(r.completion_tokens == 120);
  CHECK(r.latency_ms == 5000);
  CHECK(wall.count() < 1000);  // latency is reported, not slept
  CHECK(r.text.find("Final Answer") != std::string::npos);
  // defaulted token count falls back to whitespace counting
  auto r2 = gw.complete(simple_bundle("other"));
  CHECK(r2.completion_tokens == 3);
  CHECK_THROWS_AS(gw.complete(simple_bundle("unknown")), ProtocolError);
  std::filesystem::remove(script);
}

TEST_CASE("mock script errors") {
  CHECK_THROWS_AS(load_mock_script("/no/such/file.json"), ProtocolError);
  const auto bad = write_temp("railcom_bad.json", "{nope");
  CHECK_THROWS_AS(load_mock_script(bad.string()), ProtocolError);
  std::filesystem::remove(bad);
}

TEST_CASE("remote happy path passes usage through and sends auth") {
  TestServer ts;
  std::string seen_auth;
  ts.svr.Post("/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    seen_auth = req.get_header_value("Authorization");
    json reply = {{"choices", json::array({{{"message", {{"content", "Final words"}}}}})},
                  {"usage", {{"completion_tokens", 42}, {"prompt_tokens", 99}}}};
    res.set_content(reply.dump(), "application/json");
  });
  ts.start();
  BackendConfig cfg;
  cfg.mode = BackendMode::remote;
  cfg.base_url = ts.url();
  cfg.api_key = "sk-test";
  LlmGateway gw(cfg);
  auto r = gw.complete(simple_bundle());
  CHECK(r.text == "Final words");
  CHECK(r.completion_tokens == 42);
  CHECK(r.prompt_tokens == 99);
  CHECK(!r.tokens_estimated);
  CHECK(r.attempt_count == 1);
  CHECK(seen_auth == "Bearer sk-test");
}

TEST_CASE("absent usage falls back to a whitespace estimate") {
  TestServer ts;
  ts.svr.Post("/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
    json reply = {{"choices", json::array({{{"message", {{"content", "four plain word reply"}}}}})}};
    res.set_content(reply.dump(), "application/json");
  });
  ts.start();
  BackendConfig cfg;
  cfg.mode = BackendMode::remote;
  cfg.base_url = ts.url();
  auto r = LlmGateway(cfg).complete(simple_bundle());
  CHECK(r.completion_tokens == 4);
  CHECK(r.tokens_estimated);
}

TEST_CASE("5xx retries with backoff, 4xx does not") {
  TestServer ts;
  std::atomic<int> hits{0};
  ts.svr.Post("/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
    if (++hits == 1) {
      res.status = 503;
      return;
    }
    json reply = {{"choices", json::array({{{"message", {{"content", "ok"}}}}})},
                  {"usage", {{"completion_tokens", 1}}}};
    res.set_content(reply.dump(), "application/json");
  });
  ts.start();
  BackendConfig cfg;
  cfg.mode = BackendMode::remote;
  cfg.base_url = ts.url();
  auto r = LlmGateway(cfg).complete(simple_bundle());
  CHECK(r.attempt_count == 2);
  CHECK(hits == 2);

  std::atomic<int> bad_hits{0};
  TestServer ts2;
  ts2.svr.Post("/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
    ++bad_hits;
    res.status = 401;
    res.set_content("{\"error\":\"no key\"}", "application/json");
  });
  ts2.start();
  BackendConfig cfg2;
  cfg2.mode = BackendMode::remote;
  cfg2.base_url = ts2.url();
  try {
    LlmGateway(cfg2).complete(simple_bundle());
    FAIL("expected RequestError");
  } catch (const RequestError& e) {
    CHECK(e.status == 401);
    CHECK(e.body.find("no key") != std::string::npos);
  }
  CHECK(bad_hits == 1);  // client errors never retry
}

TEST_CASE("persistent 5xx exhausts retries as a transport failure") {
  TestServer ts;
  std::atomic<int> hits{0};
  ts.svr.Post("/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
    ++hits;
    res.status = 500;
  });
  ts.start();
  BackendConfig cfg;
  cfg.mode = BackendMode::remote;
  cfg.base_url = ts.url();
  cfg.max_retries = 2;
  CHECK_THROWS_AS(LlmGateway(cfg).complete(simple_bundle()), TransportError);
  CHECK(hits == 3);
}

TEST_CASE("malformed success bodies are protocol errors") {
  TestServer ts;
  ts.svr.Post("/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
    res.set_content("{\"choices\": []}", "application/json");
  });
  ts.start();
  BackendConfig cfg;
  cfg.mode = BackendMode::remote;
  cfg.base_url = ts.url();
  CHECK_THROWS_AS(LlmGateway(cfg).complete(simple_bundle()), ProtocolError);
}

TEST_CASE("in-flight requests never exceed the configured cap") {
  const auto script = write_temp("railcom_flight.json", R"({"scn": {"text": "x"}})");
  BackendConfig cfg;
  cfg.mode = BackendMode::mock;
  cfg.mock_script_path = script.string();
  cfg.max_in_flight = 3;
  LlmGateway gw(cfg);
  std::vector<std::thread> workers;
  for (int i = 0; i < 16; ++i)
    workers.emplace_back([&] {
      for (int k = 0; k < 50; ++k) gw.complete(simple_bundle());
    });
  for (auto& w : workers) w.join();
  CHECK(gw.peak_in_flight() <= 3);
  CHECK(gw.peak_in_flight() >= 1);
  std::filesystem::remove(script);
}

TEST_CASE("environment overrides fill key and base url") {
  setenv("RAILCOM_API_KEY", "env-key", 1);
  setenv("RAILCOM_BASE_URL", "http://env-host", 1);
  auto cfg = LlmGateway::config_from_env();
  CHECK(cfg.api_key == "env-key");
  CHECK(cfg.base_url == "http://env-host");
  unsetenv("RAILCOM_API_KEY");
  unsetenv("RAILCOM_BASE_URL");
  auto cfg2 = LlmGateway::config_from_env();
  CHECK(cfg2.api_key.empty());
}

TEST_CASE("invalid backend configuration is rejected at construction") {
  BackendConfig cfg;
  cfg.max_in_flight = 0;
  CHECK_THROWS_AS(LlmGateway{cfg}, std::invalid_argument);
}
