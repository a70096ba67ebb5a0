#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "backend/backend.hpp"
#include "util/error.hpp"

namespace memaudit {

// Runs fn(i) for i in [0, n) on up to max_in_flight worker threads. fn must
// not throw.
void parallel_for(std::size_t n, std::size_t max_in_flight, const std::function<void(std::size_t)>& fn);

struct ActivationResult {
  std::optional<ActivationVector> value;
  std::optional<ErrorCode> error_code;
  std::string error;
  bool ok() const { return value.has_value(); }
};

// Result i belongs to request i. A failing item fills its error slot and the
// batch continues. Throws Error(Config) if max_in_flight == 0.
std::vector<ActivationResult> batch_extract(Backend& backend, std::span<const ActivationRequest> requests,
                                            std::size_t max_in_flight);

}  // namespace memaudit
