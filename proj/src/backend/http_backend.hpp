#pragma once

#include <memory>
#include <semaphore>
#include <string>

#include "backend/backend.hpp"

namespace memaudit {

struct HttpConfig {
  std::string base_url;  // "http://host:port" with an optional path prefix
  std::string auth_token;
  double timeout_s = 120.0;
  int max_retries = 3;
  double backoff_initial_s = 0.5;  // doubled after each failed attempt
  std::size_t max_in_flight = 4;

  // Overrides unset fields from MEMAUDIT_BASE_URL, MEMAUDIT_API_TOKEN and
  // MEMAUDIT_TIMEOUT_S.
  static HttpConfig with_env(HttpConfig base);
};

// Client for the JSON protocol documented in backend.hpp. Connection failures,
// 5xx and 429 are retried with exponential backoff; other 4xx responses are
// configuration errors (e.g. a temperature the server refuses) and are not
// retried. Responses are schema-checked before conversion.
class HttpBackend final : public Backend {
 public:
  explicit HttpBackend(HttpConfig config);
  ~HttpBackend() override;

  GenerationResponse generate(const GenerationRequest& request) override;
  ActivationVector extract_activation(const ActivationRequest& request) override;
  std::string identity() const override;
  std::size_t max_in_flight() const override { return config_.max_in_flight; }

 private:
  struct Reply {
    nlohmann::json body;
    int retries = 0;
  };
  Reply post(const std::string& path, const nlohmann::json& body);

  HttpConfig config_;
  std::string origin_;
  std::string prefix_;
  std::unique_ptr<std::counting_semaphore<1024>> slots_;
};

}  // namespace memaudit
