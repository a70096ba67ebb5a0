#pragma once

#include <atomic>
#include <filesystem>
#include <memory>

#include "backend/backend.hpp"

namespace memaudit {

// Content-addressed on-disk cache in front of another backend. Entries are
// keyed by SHA-256 of (inner identity, wire request) and stored as JSON files
// under <dir>/generate and <dir>/activations. A hit performs no inner call.
class CachingBackend final : public Backend {
 public:
  CachingBackend(std::shared_ptr<Backend> inner, std::filesystem::path dir);

  GenerationResponse generate(const GenerationRequest& request) override;
  ActivationVector extract_activation(const ActivationRequest& request) override;
  std::string identity() const override { return inner_->identity(); }
  std::size_t max_in_flight() const override { return inner_->max_in_flight(); }

  std::size_t inner_calls() const { return inner_calls_.load(); }
  std::size_t hits() const { return hits_.load(); }

 private:
  std::filesystem::path entry(std::string_view kind, const nlohmann::json& wire_request) const;

  std::shared_ptr<Backend> inner_;
  std::filesystem::path dir_;
  std::atomic<std::size_t> inner_calls_{0};
  std::atomic<std::size_t> hits_{0};
};

}  // namespace memaudit
