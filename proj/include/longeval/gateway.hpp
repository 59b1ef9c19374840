#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace longeval {

struct GenerationRequest {
  std::string model_id;
  std::string prompt;
  std::size_t max_output_tokens = 1024;
  double temperature = 0.0;
  std::optional<std::int64_t> seed;
};

enum class FinishReason { complete, length, error };

struct TokenUsage {
  std::size_t input_tokens = 0;
  std::size_t output_tokens = 0;
};

struct GenerationResponse {
  std::string text;
  FinishReason finish_reason = FinishReason::complete;
  TokenUsage usage;
};

std::string finish_reason_name(FinishReason r);
FinishReason finish_reason_from_name(const std::string& name);

// Content address of a request: any field change yields a different key.
std::string cache_key(const GenerationRequest& request);

// A text-generation endpoint. Implementations must be safe to call from
// multiple threads.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string name() const = 0;
  // One raw attempt, no caching or retries; throws on failure.
  virtual GenerationResponse complete(const GenerationRequest& request) = 0;
};

// Scripted deterministic backend. Rules are checked in insertion order:
// exact-prompt entries first, then substring triggers, then the default.
class MockBackend : public Backend {
 public:
  explicit MockBackend(std::string name = "mock");

  void script_exact(std::string prompt, std::string response);
  void script_substring(std::string trigger, std::string response);
  void set_default_response(std::string response);
  // First `failures` calls throw BackendUnavailableError; used to exercise
  // the retry path.
  void fail_first(std::size_t failures);

  std::string name() const override { return name_; }
  GenerationResponse complete(const GenerationRequest& request) override;

  std::uint64_t calls() const;

 private:
  std::string respond(const GenerationRequest& request) const;

  std::string name_;
  std::map<std::string, std::string> exact_;
  std::vector<std::pair<std::string, std::string>> substring_;
  std::optional<std::string> default_response_;
  std::size_t fail_remaining_ = 0;
  mutable std::mutex mu_;
  std::uint64_t calls_ = 0;
};

// HTTP chat/completions endpoint descriptor. The payload mapping covers the
// OpenAI-compatible shape by default and is overridable per profile.
struct HttpBackendProfile {
  std::string name;
  std::string base_url;                 // e.g. http://localhost:8089
  std::string path = "/v1/chat/completions";
  std::string model_id;
  std::string auth_env;                 // defaults to LONGEVAL_API_KEY_<NAME>
  std::string auth_header = "Authorization";
  std::string auth_prefix = "Bearer ";
  // JSON pointers into the response payload.
  std::string text_pointer = "/choices/0/message/content";
  std::string finish_pointer = "/choices/0/finish_reason";
  std::string input_tokens_pointer = "/usage/prompt_tokens";
  std::string output_tokens_pointer = "/usage/completion_tokens";
  // "chat" wraps the prompt in a messages array, "prompt" posts it flat.
  std::string payload_style = "chat";
  int timeout_seconds = 120;
};

class HttpBackend : public Backend {
 public:
  explicit HttpBackend(HttpBackendProfile profile);
  std::string name() const override { return profile_.name; }
  GenerationResponse complete(const GenerationRequest& request) override;
  const HttpBackendProfile& profile() const { return profile_; }

 private:
  HttpBackendProfile profile_;
};

struct RetryPolicy {
  std::size_t max_attempts = 5;
  std::chrono::milliseconds base_delay{250};
  double multiplier = 2.0;
};

struct RateLimit {
  // 0 disables limiting.
  double requests_per_minute = 0.0;
  double burst = 1.0;
};

struct GatewayStats {
  std::uint64_t cache_hits = 0;
  std::uint64_t backend_calls = 0;  // attempts actually sent to a backend
  std::uint64_t retries = 0;
};

// Wraps a backend with a persistent content-addressed response cache,
// bounded retries with exponential backoff, and a token-bucket rate limit.
class Gateway {
 public:
  struct Options {
    std::string cache_dir;  // empty disables the persistent cache
    RetryPolicy retry;
    RateLimit rate_limit;
    std::size_t max_in_flight = 1;
    // Injection point for tests; defaults to a real sleep.
    std::function<void(std::chrono::milliseconds)> sleeper;
  };

  explicit Gateway(Options options);

  // Cache hit returns the stored response without touching the backend.
  GenerationResponse generate(Backend& backend,
                              const GenerationRequest& request);

  // Same as generate() but never reads the cache (the result is still
  // written back). Used for the one re-prompt after a verdict parse failure.
  GenerationResponse regenerate(Backend& backend,
                                const GenerationRequest& request);

  // Runs requests with at most max_in_flight concurrent backend calls;
  // results are returned in request order regardless of completion order.
  // Exceptions are rethrown after all workers finish (first request order).
  std::vector<GenerationResponse> generate_batch(
      Backend& backend, const std::vector<GenerationRequest>& requests);

  GatewayStats stats() const;

 private:
  GenerationResponse generate_impl(Backend& backend,
                                   const GenerationRequest& request,
                                   bool read_cache);
  std::optional<GenerationResponse> cache_read(const std::string& key);
  void cache_write(const std::string& key, const GenerationRequest& request,
                   const GenerationResponse& response);
  void rate_acquire();

  Options options_;
  mutable std::mutex mu_;
  GatewayStats stats_;
  // Token bucket state.
  double bucket_tokens_ = 0.0;
  std::chrono::steady_clock::time_point bucket_refill_at_{};
  bool bucket_initialized_ = false;
};

}  // namespace longeval
