#include "railcom/llm_gateway.hpp"

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace railcom {

using nlohmann::json;

namespace {

constexpr char kB64[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::string base64_encode(const std::string& in) {
  std::string out;
  out.reserve((in.size() + 2) / 3 * 4);
  std::size_t i = 0;
  while (i + 2 < in.size()) {
    const unsigned v = (static_cast<unsigned char>(in[i]) << 16) |
                       (static_cast<unsigned char>(in[i + 1]) << 8) |
                       static_cast<unsigned char>(in[i + 2]);
    out += kB64[(v >> 18) & 63];
    out += kB64[(v >> 12) & 63];
    out += kB64[(v >> 6) & 63];
    out += kB64[v & 63];
    i += 3;
  }
  if (i < in.size()) {
    unsigned v = static_cast<unsigned char>(in[i]) << 16;
    if (i + 1 < in.size()) v |= static_cast<unsigned char>(in[i + 1]) << 8;
    out += kB64[(v >> 18) & 63];
    out += kB64[(v >> 12) & 63];
    out += i + 1 < in.size() ? kB64[(v >> 6) & 63] : '=';
    out += '=';
  }
  return out;
}

std::string image_part_url(const std::string& ref) {
  if (std::filesystem::exists(ref)) {
    std::ifstream in(ref, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    std::string mime = "image/jpeg";
    const auto ext = std::filesystem::path(ref).extension().string();
    if (ext == ".png") mime = "image/png";
    return "data:" + mime + ";base64," + base64_encode(ss.str());
  }
  return ref;
}

}  // namespace

std::int64_t whitespace_token_count(const std::string& text) {
  std::istringstream ss(text);
  std::string tok;
  std::int64_t n = 0;
  while (ss >> tok) ++n;
  return n;
}

std::string serialize_bundle_wire(const PromptBundle& b, const std::string& model_name) {
  json body;
  body["model"] = model_name;
  json user_content = json::array();
  for (const auto& p : b.user_parts) {
    if (p.role == PartRole::image) {
      json part;
      part["type"] = "image_url";
      part["image_url"] = {{"url", image_part_url(p.text)}};
      user_content.push_back(std::move(part));
      if (!p.seq_label.empty())
        user_content.push_back({{"type", "text"}, {"text", p.seq_label}});
    } else {
      user_content.push_back({{"type", "text"}, {"text", p.text}});
    }
  }
  body["messages"] = json::array({json{{"role", "system"}, {"content", b.system_text}},
                                  json{{"role", "user"}, {"content", std::move(user_content)}}});
  return body.dump();
}

std::map<std::string, MockScriptEntry> load_mock_script(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ProtocolError("cannot open mock script '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("invalid mock script JSON: ") + e.what());
  }
  std::map<std::string, MockScriptEntry> out;
  for (const auto& [key, v] : j.items()) {
    MockScriptEntry e;
    e.text = v.at("text").get<std::string>();
    e.completion_tokens = v.value("completion_tokens", whitespace_token_count(e.text));
    e.latency_ms = v.value("latency_ms", 0);
    out.emplace(key, std::move(e));
  }
  return out;
}

struct LlmGateway::Impl {
  BackendConfig cfg;
  std::map<std::string, MockScriptEntry> script;
  mutable std::mutex mu;
  mutable std::condition_variable cv;
  mutable std::int64_t in_flight = 0;
  mutable std::int64_t peak = 0;

  struct FlightGuard {
    const Impl& impl;
    explicit FlightGuard(const Impl& i) : impl(i) {
      std::unique_lock lock(impl.mu);
      impl.cv.wait(lock, [&] { return impl.in_flight < impl.cfg.max_in_flight; });
      ++impl.in_flight;
      impl.peak = std::max(impl.peak, impl.in_flight);
    }
    ~FlightGuard() {
      {
        std::lock_guard lock(impl.mu);
        --impl.in_flight;
      }
      impl.cv.notify_one();
    }
  };

  LmmResult complete_mock(const PromptBundle& b) const {
    auto it = script.find(b.scenario_id);
    if (it == script.end())
      throw ProtocolError("mock script has no entry for scenario '" + b.scenario_id + "'");
    LmmResult r;
    r.text = it->second.text;
    r.completion_tokens = it->second.completion_tokens;
    r.prompt_tokens = whitespace_token_count(b.system_text) +
                      whitespace_token_count(serialize_bundle_wire(b, cfg.model_name)) / 8;
    r.latency_ms = it->second.latency_ms;  // injected, not slept
    r.attempt_count = 1;
    return r;
  }

  LmmResult complete_remote(const PromptBundle& b) const {
    const std::string body = serialize_bundle_wire(b, cfg.model_name);
    const auto start = std::chrono::steady_clock::now();
    std::string last_error;
    for (std::int64_t attempt = 1; attempt <= cfg.max_retries + 1; ++attempt) {
      if (attempt > 1)
        std::this_thread::sleep_for(std::chrono::milliseconds(50LL << (attempt - 2)));
      httplib::Client client(cfg.base_url);
      client.set_connection_timeout(0, cfg.timeout_ms * 1000);
      client.set_read_timeout(cfg.timeout_ms / 1000, (cfg.timeout_ms % 1000) * 1000);
      httplib::Headers headers;
      if (!cfg.api_key.empty()) headers.emplace("Authorization", "Bearer " + cfg.api_key);
      auto res = client.Post("/chat/completions", headers, body, "application/json");
      if (!res) {
        last_error = httplib::to_string(res.error());
        continue;
      }
      if (res->status >= 500) {
        last_error = "status " + std::to_string(res->status);
        continue;
      }
      if (res->status >= 400) throw RequestError(res->status, res->body);
      json j;
      try {
        j = json::parse(res->body);
      } catch (const json::exception& e) {
        throw ProtocolError(std::string("unparseable response: ") + e.what());
      }
      LmmResult r;
      try {
        r.text = j.at("choices").at(0).at("message").at("content").get<std::string>();
      } catch (const json::exception&) {
        throw ProtocolError("response missing choices[0].message.content");
      }
      if (j.contains("usage") && j["usage"].contains("completion_tokens")) {
        r.completion_tokens = j["usage"]["completion_tokens"].get<std::int64_t>();
        r.prompt_tokens = j["usage"].value("prompt_tokens", 0);
      } else {
        r.completion_tokens = whitespace_token_count(r.text);
        r.tokens_estimated = true;
      }
      r.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                         std::chrono::steady_clock::now() - start)
                         .count();
      r.attempt_count = attempt;
      return r;
    }
    throw TransportError("exhausted retries: " + last_error);
  }
};

LlmGateway::LlmGateway(BackendConfig cfg) : impl_(std::make_unique<Impl>()) {
  impl_->cfg = std::move(cfg);
  if (impl_->cfg.timeout_ms <= 0 || impl_->cfg.max_retries < 0 || impl_->cfg.max_in_flight < 1)
    throw std::invalid_argument("invalid backend config");
  if (impl_->cfg.mode == BackendMode::mock && !impl_->cfg.mock_script_path.empty())
    impl_->script = load_mock_script(impl_->cfg.mock_script_path);
}

LlmGateway::LlmGateway(LlmGateway&&) noexcept = default;
LlmGateway& LlmGateway::operator=(LlmGateway&&) noexcept = default;
LlmGateway::~LlmGateway() = default;

LmmResult LlmGateway::complete(const PromptBundle& b) const {
  Impl::FlightGuard guard(*impl_);
  return impl_->cfg.mode == BackendMode::mock ? impl_->complete_mock(b)
                                              : impl_->complete_remote(b);
}

std::int64_t LlmGateway::peak_in_flight() const {
  std::lock_guard lock(impl_->mu);
  return impl_->peak;
}

BackendConfig LlmGateway::config_from_env(BackendConfig base) {
  if (const char* key = std::getenv("RAILCOM_API_KEY")) base.api_key = key;
  if (const char* url = std::getenv("RAILCOM_BASE_URL")) base.base_url = url;
  return base;
}

}  // namespace railcom
