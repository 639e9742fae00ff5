#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "sqlspace/common.hpp"
#include "sqlspace/gateway.hpp"

namespace sqlspace::llm {

namespace {

/// Splits "https://host:port/base/path" into scheme://host:port and /base/path.
void split_endpoint(const std::string& endpoint, std::string& origin, std::string& base_path) {
  size_t scheme_end = endpoint.find("://");
  if (scheme_end == std::string::npos) {
    fail("provider endpoint must start with http:// or https://, got '", endpoint, "'");
  }
  size_t path_start = endpoint.find('/', scheme_end + 3);
  if (path_start == std::string::npos) {
    origin = endpoint;
    base_path.clear();
  } else {
    origin = endpoint.substr(0, path_start);
    base_path = endpoint.substr(path_start);
    while (!base_path.empty() && base_path.back() == '/') base_path.pop_back();
  }
}

class HttpProvider final : public Provider {
 public:
  HttpProvider(std::string endpoint, std::string api_key, int timeout_sec)
      : endpoint_(std::move(endpoint)), api_key_(std::move(api_key)), timeout_sec_(timeout_sec) {
    split_endpoint(endpoint_, origin_, base_path_);
  }

  std::string name() const override { return endpoint_; }

  ChatResponse send(const ChatRequest& req) override {
    httplib::Client client(origin_);
    client.set_connection_timeout(timeout_sec_, 0);
    client.set_read_timeout(timeout_sec_, 0);
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

    std::string body = request_json(req).dump();
    auto res = client.Post((base_path_ + "/chat/completions").c_str(), headers, body,
                           "application/json");
    if (!res) {
      throw TransientError(concat("connection to ", origin_, " failed: ",
                                  httplib::to_string(res.error())));
    }
    if (res->status == 429 || res->status >= 500) {
      throw TransientError(concat("HTTP ", res->status, " from ", origin_));
    }
    if (res->status != 200) {
      fail("HTTP ", res->status, " from ", origin_, ": ", res->body);
    }

    json j = json::parse(res->body, nullptr, false);
    if (j.is_discarded()) fail("provider returned invalid json: ", res->body);
    if (!j.contains("choices") || !j["choices"].is_array() || j["choices"].empty()) {
      fail("provider response has no choices: ", res->body);
    }
    const json& choice = j["choices"][0];
    ChatResponse out;
    out.text = choice.at("message").at("content").get<std::string>();
    out.meta = json::object();
    if (choice.contains("finish_reason")) out.meta["finish_reason"] = choice["finish_reason"];
    if (j.contains("model")) out.meta["model"] = j["model"];
    if (j.contains("usage")) out.meta["usage"] = j["usage"];
    return out;
  }

 private:
  std::string endpoint_;
  std::string api_key_;
  int timeout_sec_;
  std::string origin_;
  std::string base_path_;
};

}  // namespace

std::unique_ptr<Provider> make_http_provider(const std::string& endpoint,
                                             const std::string& api_key, int timeout_sec) {
  return std::make_unique<HttpProvider>(endpoint, api_key, timeout_sec);
}

}  // namespace sqlspace::llm
