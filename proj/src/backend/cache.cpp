#include "backend/cache.hpp"

#include <fstream>
#include <random>
#include <thread>

#include "util/error.hpp"
#include "util/hash.hpp"
#include "util/text.hpp"

namespace memaudit {

using nlohmann::json;

namespace {

std::optional<json> read_entry(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) return std::nullopt;
  json j = json::parse(read_file(path), nullptr, false);
  if (j.is_discarded()) return std::nullopt;  // torn write; recompute
  return j;
}

void write_entry(const std::filesystem::path& path, const json& value) {
  // Unique temp name per writer, then an atomic rename.
  const auto tid = std::hash<std::thread::id>{}(std::this_thread::get_id());
  auto tmp = path;
  tmp += ".tmp" + std::to_string(tid);
  write_file(tmp, value.dump());
  std::filesystem::rename(tmp, path);
}

}  // namespace

CachingBackend::CachingBackend(std::shared_ptr<Backend> inner, std::filesystem::path dir)
    : inner_(std::move(inner)), dir_(std::move(dir)) {
  if (!inner_) throw Error(ErrorCode::InvalidArgument, "caching backend needs an inner backend");
  std::filesystem::create_directories(dir_ / "generate");
  std::filesystem::create_directories(dir_ / "activations");
}

std::filesystem::path CachingBackend::entry(std::string_view kind, const json& wire_request) const {
  const std::string key = sha256_hex(inner_->identity() + "\n" + wire_request.dump());
  return dir_ / kind / (key + ".json");
}

GenerationResponse CachingBackend::generate(const GenerationRequest& request) {
  request.validate();
  const auto path = entry("generate", to_wire(request));
  if (auto hit = read_entry(path)) {
    ++hits_;
    return generation_response_from_wire(*hit);
  }
  ++inner_calls_;
  GenerationResponse response = inner_->generate(request);
  write_entry(path, to_wire(response));
  return response;
}

ActivationVector CachingBackend::extract_activation(const ActivationRequest& request) {
  const auto path = entry("activations", to_wire(request));
  if (auto hit = read_entry(path)) {
    ++hits_;
    return activation_from_wire(*hit);
  }
  ++inner_calls_;
  ActivationVector v = inner_->extract_activation(request);
  write_entry(path, to_wire(v));
  return v;
}

}  // namespace memaudit
