#include "longeval/gateway.hpp"

#include <algorithm>
#include <cmath>
#include <condition_variable>
#include <filesystem>
#include <fstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "longeval/digest.hpp"
#include "longeval/errors.hpp"

namespace longeval {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string finish_reason_name(FinishReason r) {
  switch (r) {
    case FinishReason::complete:
      return "complete";
    case FinishReason::length:
      return "length";
    case FinishReason::error:
      return "error";
  }
  return "error";
}

FinishReason finish_reason_from_name(const std::string& name) {
  if (name == "complete") return FinishReason::complete;
  if (name == "length") return FinishReason::length;
  return FinishReason::error;
}

std::string cache_key(const GenerationRequest& request) {
  // Length-prefixed field serialization; no delimiter collisions.
  json j = {
      {"model_id", request.model_id},
      {"prompt", request.prompt},
      {"max_output_tokens", request.max_output_tokens},
      {"temperature", request.temperature},
  };
  if (request.seed) j["seed"] = *request.seed;
  return digest::sha256_hex(j.dump());
}

// ---------------------------------------------------------------------------
// MockBackend

MockBackend::MockBackend(std::string name) : name_(std::move(name)) {}

void MockBackend::script_exact(std::string prompt, std::string response) {
  std::lock_guard lock(mu_);
  exact_[std::move(prompt)] = std::move(response);
}

void MockBackend::script_substring(std::string trigger, std::string response) {
  std::lock_guard lock(mu_);
  substring_.emplace_back(std::move(trigger), std::move(response));
}

void MockBackend::set_default_response(std::string response) {
  std::lock_guard lock(mu_);
  default_response_ = std::move(response);
}

void MockBackend::fail_first(std::size_t failures) {
  std::lock_guard lock(mu_);
  fail_remaining_ = failures;
}

std::string MockBackend::respond(const GenerationRequest& request) const {
  auto exact = exact_.find(request.prompt);
  if (exact != exact_.end()) return exact->second;
  for (const auto& [trigger, response] : substring_) {
    if (request.prompt.find(trigger) != std::string::npos) return response;
  }
  if (default_response_) return *default_response_;
  throw MockMissError("mock backend '" + name_ +
                      "' has no rule for the request");
}

GenerationResponse MockBackend::complete(const GenerationRequest& request) {
  std::lock_guard lock(mu_);
  ++calls_;
  if (fail_remaining_ > 0) {
    --fail_remaining_;
    throw BackendUnavailableError("mock backend scripted failure");
  }
  GenerationResponse response;
  response.text = respond(request);
  response.finish_reason =
      response.text.empty() ? FinishReason::error : FinishReason::complete;
  response.usage.input_tokens = request.prompt.size() / 4;
  response.usage.output_tokens = response.text.size() / 4;
  return response;
}

std::uint64_t MockBackend::calls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

// ---------------------------------------------------------------------------
// Gateway

Gateway::Gateway(Options options) : options_(std::move(options)) {
  if (!options_.sleeper) {
    options_.sleeper = [](std::chrono::milliseconds d) {
      std::this_thread::sleep_for(d);
    };
  }
  if (!options_.cache_dir.empty()) {
    fs::create_directories(options_.cache_dir);
  }
}

std::optional<GenerationResponse> Gateway::cache_read(const std::string& key) {
  if (options_.cache_dir.empty()) return std::nullopt;
  const fs::path path = fs::path(options_.cache_dir) / (key + ".json");
  std::ifstream in(path);
  if (!in) return std::nullopt;
  json j;
  try {
    in >> j;
  } catch (const json::exception&) {
    return std::nullopt;  // unreadable entry: treat as a miss
  }
  GenerationResponse response;
  response.text = j.at("response").at("text").get<std::string>();
  response.finish_reason = finish_reason_from_name(
      j.at("response").at("finish_reason").get<std::string>());
  response.usage.input_tokens = j.at("response").at("input_tokens");
  response.usage.output_tokens = j.at("response").at("output_tokens");
  return response;
}

void Gateway::cache_write(const std::string& key,
                          const GenerationRequest& request,
                          const GenerationResponse& response) {
  if (options_.cache_dir.empty()) return;
  json j = {
      {"request",
       {{"model_id", request.model_id},
        {"prompt", request.prompt},
        {"max_output_tokens", request.max_output_tokens},
        {"temperature", request.temperature}}},
      {"response",
       {{"text", response.text},
        {"finish_reason", finish_reason_name(response.finish_reason)},
        {"input_tokens", response.usage.input_tokens},
        {"output_tokens", response.usage.output_tokens}}},
  };
  if (request.seed) j["request"]["seed"] = *request.seed;
  const fs::path path = fs::path(options_.cache_dir) / (key + ".json");
  const fs::path tmp = fs::path(options_.cache_dir) / (key + ".tmp");
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << j.dump(2) << '\n';
  }
  fs::rename(tmp, path);  // atomic publish
}

void Gateway::rate_acquire() {
  if (options_.rate_limit.requests_per_minute <= 0.0) return;
  const double per_second = options_.rate_limit.requests_per_minute / 60.0;
  const double burst = std::max(1.0, options_.rate_limit.burst);
  while (true) {
    std::chrono::milliseconds wait{0};
    {
      std::lock_guard lock(mu_);
      const auto now = std::chrono::steady_clock::now();
      if (!bucket_initialized_) {
        bucket_initialized_ = true;
        bucket_tokens_ = burst;
        bucket_refill_at_ = now;
      }
      const double elapsed =
          std::chrono::duration<double>(now - bucket_refill_at_).count();
      bucket_tokens_ = std::min(burst, bucket_tokens_ + elapsed * per_second);
      bucket_refill_at_ = now;
      if (bucket_tokens_ >= 1.0) {
        bucket_tokens_ -= 1.0;
        return;
      }
      const double deficit_seconds = (1.0 - bucket_tokens_) / per_second;
      wait = std::chrono::milliseconds(
          static_cast<long>(std::ceil(deficit_seconds * 1000.0)));
    }
    options_.sleeper(wait);
  }
}

GenerationResponse Gateway::generate(Backend& backend,
                                     const GenerationRequest& request) {
  return generate_impl(backend, request, /*read_cache=*/true);
}

GenerationResponse Gateway::regenerate(Backend& backend,
                                       const GenerationRequest& request) {
  return generate_impl(backend, request, /*read_cache=*/false);
}

GenerationResponse Gateway::generate_impl(Backend& backend,
                                          const GenerationRequest& request,
                                          bool read_cache) {
  if (request.prompt.empty()) {
    throw Error("generate: prompt must be non-empty");
  }
  const std::string key = cache_key(request);
  if (read_cache) {
    if (auto hit = cache_read(key)) {
      std::lock_guard lock(mu_);
      ++stats_.cache_hits;
      return *hit;
    }
  }

  std::exception_ptr last_error;
  bool last_was_http = false;
  int last_status = 0;
  std::string last_message;
  auto delay = options_.retry.base_delay;
  for (std::size_t attempt = 1; attempt <= options_.retry.max_attempts;
       ++attempt) {
    if (attempt > 1) {
      options_.sleeper(delay);
      delay = std::chrono::milliseconds(static_cast<long>(
          std::llround(static_cast<double>(delay.count()) *
                       options_.retry.multiplier)));
      std::lock_guard lock(mu_);
      ++stats_.retries;
    }
    rate_acquire();
    {
      std::lock_guard lock(mu_);
      ++stats_.backend_calls;
    }
    try {
      GenerationResponse response = backend.complete(request);
      cache_write(key, request, response);
      return response;
    } catch (const MockMissError&) {
      throw;  // a scripting bug, not a transient failure
    } catch (const BackendHttpError& e) {
      last_was_http = true;
      last_status = e.status();
      last_message = e.what();
    } catch (const std::exception& e) {
      last_was_http = false;
      last_message = e.what();
    }
  }
  if (last_was_http) {
    throw BackendHttpError(last_status,
                           "retries exhausted; last: " + last_message);
  }
  throw BackendUnavailableError("backend '" + backend.name() +
                                "' unavailable after " +
                                std::to_string(options_.retry.max_attempts) +
                                " attempts: " + last_message);
}

std::vector<GenerationResponse> Gateway::generate_batch(
    Backend& backend, const std::vector<GenerationRequest>& requests) {
  const std::size_t n = requests.size();
  std::vector<GenerationResponse> responses(n);
  std::vector<std::exception_ptr> errors(n);
  const std::size_t workers =
      std::max<std::size_t>(1, std::min(options_.max_in_flight, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) {
      responses[i] = generate(backend, requests[i]);
    }
    return responses;
  }

  std::mutex next_mu;
  std::size_t next = 0;
  auto worker = [&]() {
    while (true) {
      std::size_t i;
      {
        std::lock_guard lock(next_mu);
        if (next >= n) return;
        i = next++;
      }
      try {
        responses[i] = generate(backend, requests[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  for (std::size_t i = 0; i < n; ++i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
  }
  return responses;
}

GatewayStats Gateway::stats() const {
  std::lock_guard lock(mu_);
  return stats_;
}

}  // namespace longeval
