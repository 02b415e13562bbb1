#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <string>

#include "railcom/prompting.hpp"

namespace railcom {

enum class BackendMode { remote, mock };

struct BackendConfig {
  std::string base_url;         // remote: OpenAI-compatible endpoint root
  std::string api_key;          // sourced from RAILCOM_API_KEY
  std::string model_name = "railvqa-com";
  std::int64_t timeout_ms = 60000;
  std::int64_t max_retries = 2;
  std::int64_t max_in_flight = 4;
  BackendMode mode = BackendMode::mock;
  std::string mock_script_path;  // mock: scenario-id -> scripted response
};

struct LmmResult {
  std::string text;
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  bool tokens_estimated = false;  // whitespace fallback when usage is absent
  std::int64_t latency_ms = 0;
  std::int64_t attempt_count = 0;
};

struct TransportError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct RequestError : std::runtime_error {  // 4xx, never retried
  int status;
  std::string body;
  RequestError(int status_, std::string body_)
      : std::runtime_error("request failed with status " + std::to_string(status_)),
        status(status_),
        body(std::move(body_)) {}
};
struct ProtocolError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MockScriptEntry {
  std::string text;
  std::int64_t completion_tokens = 0;
  std::int64_t latency_ms = 0;
};

// Shareable across workers; a semaphore bounds in-flight requests.
class LlmGateway {
 public:
  explicit LlmGateway(BackendConfig cfg);
  LlmGateway(LlmGateway&&) noexcept;
  LlmGateway& operator=(LlmGateway&&) noexcept;
  ~LlmGateway();

  LmmResult complete(const PromptBundle& b) const;

  // Mock instrumentation: highest number of requests observed in flight.
  std::int64_t peak_in_flight() const;

  static BackendConfig config_from_env(BackendConfig base = {});

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Chat-completions wire body for a bundle. Local-file image refs travel as
// base64 data URIs, anything else as a plain URL part.
std::string serialize_bundle_wire(const PromptBundle& b, const std::string& model_name);

std::map<std::string, MockScriptEntry> load_mock_script(const std::string& path);

std::int64_t whitespace_token_count(const std::string& text);

}  // namespace railcom
