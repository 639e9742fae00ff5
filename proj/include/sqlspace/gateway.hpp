#pragma once

#include <atomic>
#include <condition_variable>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "sqlspace/common.hpp"
#include "sqlspace/jsonl.hpp"

namespace sqlspace::llm {

/// A retryable provider failure (HTTP 429/5xx, connection reset, ...).
struct TransientError : sqlspace::Error {
  using sqlspace::Error::Error;
};

struct ChatRequest {
  std::string model;
  std::string system;  // empty → no system message
  std::string user;
  double temperature = 0.0;
  int max_tokens = 0;  // 0 → provider default
};

/// Canonical request body (OpenAI chat-completions shape, keys sorted).
json request_json(const ChatRequest& req);

/// Cache key: sha256 over the canonical request body.
std::string request_hash(const ChatRequest& req);

struct ChatResponse {
  std::string text;
  json meta;  // finish_reason / usage subset, provider-dependent
};

class Provider {
 public:
  virtual ~Provider() = default;
  virtual ChatResponse send(const ChatRequest& req) = 0;
  virtual std::string name() const = 0;
};

/// OpenAI-compatible chat completions endpoint; `endpoint` is the base URL
/// (e.g. https://api.openai.com/v1) and "/chat/completions" is appended.
std::unique_ptr<Provider> make_http_provider(const std::string& endpoint,
                                             const std::string& api_key, int timeout_sec = 120);

/// Deterministic offline provider (endpoint name "mock"); responses are a
/// pure function of the request, so recorded caches are reproducible.
std::unique_ptr<Provider> make_mock_provider();

enum class Mode { live, record, replay };
Mode parse_mode(const std::string& name);
const char* mode_name(Mode m);

/// Content-addressed response cache: one `<hash>.json` file per request plus
/// an `index.jsonl` of {hash, model}. Entry files are written atomically.
class ResponseCache {
 public:
  explicit ResponseCache(std::string dir);
  std::optional<ChatResponse> get(const std::string& hash) const;
  void put(const std::string& hash, const ChatRequest& req, const ChatResponse& resp);
  const std::string& dir() const { return dir_; }

 private:
  std::string entry_path(const std::string& hash) const;
  std::string dir_;
  mutable std::mutex index_mutex_;
};

struct GatewayOptions {
  Mode mode = Mode::replay;
  std::string cache_dir;    // required for record/replay
  int max_retries = 3;      // retry attempts after the first try
  int retry_base_ms = 250;  // backoff: base * 2^attempt
  int max_in_flight = 8;    // concurrent provider requests
};

/// Front door for all LLM traffic: applies the mode (live / record / replay),
/// the response cache, bounded concurrency, and retry with exponential
/// backoff on transient failures.
class Gateway {
 public:
  Gateway(std::unique_ptr<Provider> provider, GatewayOptions opts);

  ChatResponse complete(const ChatRequest& req);

  std::uint64_t provider_calls() const { return provider_calls_.load(); }
  std::uint64_t cache_hits() const { return cache_hits_.load(); }
  Mode mode() const { return opts_.mode; }

 private:
  ChatResponse call_provider(const ChatRequest& req);

  std::unique_ptr<Provider> provider_;
  GatewayOptions opts_;
  std::unique_ptr<ResponseCache> cache_;
  std::atomic<std::uint64_t> provider_calls_{0};
  std::atomic<std::uint64_t> cache_hits_{0};

  // Bounded-concurrency gate (runtime-sized, unlike std::counting_semaphore).
  std::mutex gate_mutex_;
  std::condition_variable gate_cv_;
  int in_flight_ = 0;
};

}  // namespace sqlspace::llm
