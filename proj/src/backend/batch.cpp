#include "backend/batch.hpp"

#include <atomic>
#include <thread>

namespace memaudit {

void parallel_for(std::size_t n, std::size_t max_in_flight, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min(max_in_flight, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  }
}

std::vector<ActivationResult> batch_extract(Backend& backend, std::span<const ActivationRequest> requests,
                                            std::size_t max_in_flight) {
  if (max_in_flight == 0) throw Error(ErrorCode::Config, "max_in_flight must be >= 1");
  std::vector<ActivationResult> results(requests.size());
  parallel_for(requests.size(), max_in_flight, [&](std::size_t i) {
    try {
      results[i].value = backend.extract_activation(requests[i]);
    } catch (const Error& e) {
      results[i].error_code = e.code();
      results[i].error = e.what();
    } catch (const std::exception& e) {
      results[i].error_code = ErrorCode::Internal;
      results[i].error = e.what();
    }
  });
  return results;
}

}  // namespace memaudit
