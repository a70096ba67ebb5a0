#include "backend/http_backend.hpp"

#include <chrono>
#include <cstdlib>
#include <thread>

#include "httplib.h"
#include "util/error.hpp"

namespace memaudit {

using nlohmann::json;

HttpConfig HttpConfig::with_env(HttpConfig base) {
  if (base.base_url.empty()) {
    if (const char* v = std::getenv("MEMAUDIT_BASE_URL")) base.base_url = v;
  }
  if (base.auth_token.empty()) {
    if (const char* v = std::getenv("MEMAUDIT_API_TOKEN")) base.auth_token = v;
  }
  if (const char* v = std::getenv("MEMAUDIT_TIMEOUT_S")) {
    char* end = nullptr;
    const double t = std::strtod(v, &end);
    if (end == v || t <= 0) throw Error(ErrorCode::Config, "MEMAUDIT_TIMEOUT_S must be a positive number");
    base.timeout_s = t;
  }
  return base;
}

HttpBackend::HttpBackend(HttpConfig config) : config_(std::move(config)) {
  if (config_.base_url.empty()) throw Error(ErrorCode::Config, "http backend needs a base URL");
  if (config_.max_in_flight == 0 || config_.max_in_flight > 1024) {
    throw Error(ErrorCode::Config, "max_in_flight must lie in [1, 1024]");
  }
  if (config_.timeout_s <= 0) throw Error(ErrorCode::Config, "timeout must be positive");
  const auto scheme_end = config_.base_url.find("://");
  const auto path_start = config_.base_url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
  origin_ = config_.base_url.substr(0, path_start);
  if (path_start != std::string::npos) {
    prefix_ = config_.base_url.substr(path_start);
    while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
  }
  slots_ = std::make_unique<std::counting_semaphore<1024>>(static_cast<std::ptrdiff_t>(config_.max_in_flight));
}

HttpBackend::~HttpBackend() = default;

std::string HttpBackend::identity() const { return "http:" + config_.base_url; }

HttpBackend::Reply HttpBackend::post(const std::string& path, const json& body) {
  slots_->acquire();
  struct Release {
    std::counting_semaphore<1024>& s;
    ~Release() { s.release(); }
  } release{*slots_};

  httplib::Client client(origin_);
  const auto timeout = std::chrono::duration<double>(config_.timeout_s);
  client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_write_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  httplib::Headers headers;
  if (!config_.auth_token.empty()) headers.emplace("Authorization", "Bearer " + config_.auth_token);

  const std::string payload = body.dump();
  double backoff = config_.backoff_initial_s;
  std::string last_error;
  int last_status = 0;
  const int attempts = config_.max_retries + 1;
  for (int attempt = 0; attempt < attempts; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::duration<double>(backoff));
      backoff *= 2.0;
    }
    auto res = client.Post(prefix_ + path, headers, payload, "application/json");
    if (!res) {
      last_error = "request to " + origin_ + prefix_ + path + " failed: " + httplib::to_string(res.error());
      last_status = 0;
      continue;
    }
    last_status = res->status;
    if (res->status == 200) {
      json parsed = json::parse(res->body, nullptr, false);
      if (parsed.is_discarded()) throw Error(ErrorCode::Schema, "response body is not JSON");
      return Reply{std::move(parsed), attempt};
    }
    if (res->status == 429 || res->status >= 500) {
      last_error = "server returned HTTP " + std::to_string(res->status);
      continue;
    }
    std::string message = res->body;
    json err = json::parse(res->body, nullptr, false);
    if (!err.is_discarded() && err.is_object() && err.contains("error") && err["error"].is_string()) {
      message = err["error"].get<std::string>();
    }
    throw Error(ErrorCode::Config, "server rejected request (HTTP " + std::to_string(res->status) + "): " + message);
  }
  throw TransportError(last_error + " after " + std::to_string(attempts) + " attempts", attempts, last_status);
}

GenerationResponse HttpBackend::generate(const GenerationRequest& request) {
  request.validate();
  Reply reply = post("/v1/generate", to_wire(request));
  GenerationResponse response = generation_response_from_wire(reply.body);
  response.retries = reply.retries;
  return response;
}

ActivationVector HttpBackend::extract_activation(const ActivationRequest& request) {
  Reply reply = post("/v1/activations", to_wire(request));
  return activation_from_wire(reply.body);
}

}  // namespace memaudit
