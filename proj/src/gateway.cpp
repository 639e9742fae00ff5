#include "sqlspace/gateway.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <thread>

#include "sqlspace/common.hpp"
#include "sqlspace/sha256.hpp"

namespace sqlspace::llm {

namespace fs = std::filesystem;

json request_json(const ChatRequest& req) {
  json messages = json::array();
  if (!req.system.empty()) {
    messages.push_back({{"role", "system"}, {"content", req.system}});
  }
  messages.push_back({{"role", "user"}, {"content", req.user}});
  json body = {{"model", req.model}, {"messages", messages}, {"temperature", req.temperature}};
  if (req.max_tokens > 0) body["max_tokens"] = req.max_tokens;
  return body;
}

std::string request_hash(const ChatRequest& req) {
  return sha256_hex(canonical_dump(request_json(req)));
}

Mode parse_mode(const std::string& name) {
  if (name == "live") return Mode::live;
  if (name == "record") return Mode::record;
  if (name == "replay") return Mode::replay;
  fail("unknown gateway mode '", name, "' (expected live, record, or replay)");
}

const char* mode_name(Mode m) {
  switch (m) {
    case Mode::live: return "live";
    case Mode::record: return "record";
    case Mode::replay: return "replay";
  }
  return "?";
}

// ── ResponseCache ───────────────────────────────────────────────────────────

ResponseCache::ResponseCache(std::string dir) : dir_(std::move(dir)) {
  if (dir_.empty()) fail("ResponseCache requires a directory");
  ensure_dir(dir_);
}

std::string ResponseCache::entry_path(const std::string& hash) const {
  return dir_ + "/" + hash + ".json";
}

std::optional<ChatResponse> ResponseCache::get(const std::string& hash) const {
  std::string path = entry_path(hash);
  if (!file_exists(path)) return std::nullopt;
  json j = json::parse(read_file(path), nullptr, false);
  if (j.is_discarded()) fail("corrupt cache entry: ", path);
  ChatResponse resp;
  resp.text = j.at("response_text").get<std::string>();
  resp.meta = j.value("meta", json::object());
  return resp;
}

void ResponseCache::put(const std::string& hash, const ChatRequest& req,
                        const ChatResponse& resp) {
  json entry = {{"request_hash", hash},
                {"request", request_json(req)},
                {"response_text", resp.text},
                {"meta", resp.meta}};
  write_file_atomic(entry_path(hash), entry.dump(2) + "\n");
  json line = {{"hash", hash}, {"model", req.model}};
  std::lock_guard<std::mutex> lock(index_mutex_);
  std::ofstream idx(dir_ + "/index.jsonl", std::ios::app);
  idx << line.dump() << "\n";
}

// ── Gateway ─────────────────────────────────────────────────────────────────

Gateway::Gateway(std::unique_ptr<Provider> provider, GatewayOptions opts)
    : provider_(std::move(provider)), opts_(opts) {
  if (opts_.mode != Mode::live || !opts_.cache_dir.empty()) {
    if (opts_.cache_dir.empty()) {
      fail("gateway mode '", mode_name(opts_.mode), "' requires a cache_dir");
    }
    cache_ = std::make_unique<ResponseCache>(opts_.cache_dir);
  }
  if (opts_.mode != Mode::replay && !provider_) {
    fail("gateway mode '", mode_name(opts_.mode), "' requires a provider");
  }
}

ChatResponse Gateway::call_provider(const ChatRequest& req) {
  // Bound the number of in-flight provider requests.
  {
    std::unique_lock<std::mutex> lock(gate_mutex_);
    gate_cv_.wait(lock, [&] { return in_flight_ < opts_.max_in_flight; });
    ++in_flight_;
  }
  struct Release {
    Gateway* g;
    ~Release() {
      {
        std::lock_guard<std::mutex> lock(g->gate_mutex_);
        --g->in_flight_;
      }
      g->gate_cv_.notify_one();
    }
  } release{this};

  int attempt = 0;
  for (;;) {
    try {
      ++provider_calls_;
      return provider_->send(req);
    } catch (const TransientError& e) {
      if (attempt >= opts_.max_retries) {
        fail("provider '", provider_->name(), "' failed after ", attempt + 1,
             " attempts: ", e.what());
      }
      int delay_ms = opts_.retry_base_ms * (1 << attempt);
      log_warn(concat("transient provider error (attempt ", attempt + 1, "/",
                      opts_.max_retries + 1, "), retrying in ", delay_ms, "ms: ", e.what()));
      std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms));
      ++attempt;
    }
  }
}

ChatResponse Gateway::complete(const ChatRequest& req) {
  if (req.model.empty()) fail("ChatRequest.model must be set");
  if (req.user.empty()) fail("ChatRequest.user must be set");

  switch (opts_.mode) {
    case Mode::live:
      return call_provider(req);
    case Mode::record: {
      std::string hash = request_hash(req);
      if (auto hit = cache_->get(hash)) {
        ++cache_hits_;
        return *hit;
      }
      ChatResponse resp = call_provider(req);
      cache_->put(hash, req, resp);
      return resp;
    }
    case Mode::replay: {
      std::string hash = request_hash(req);
      auto hit = cache_->get(hash);
      if (!hit) {
        fail("replay cache miss for request hash ", hash, " (model ", req.model,
             "); run in record mode first");
      }
      ++cache_hits_;
      return *hit;
    }
  }
  fail("unreachable gateway mode");
}

}  // namespace sqlspace::llm
