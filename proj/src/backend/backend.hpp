#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace memaudit {

enum class Role { System, User, Assistant };

std::string_view to_string(Role role);
Role parse_role(std::string_view name);

struct Turn {
  Role role = Role::User;
  std::string content;
  bool operator==(const Turn&) const = default;
};

struct GenerationRequest {
  std::vector<Turn> transcript;
  double temperature = 0.0;
  int max_tokens = 256;
  std::vector<std::string> stop_sequences;
  // Sampling seed forwarded to the server when set.
  std::optional<std::uint64_t> seed;

  // Throws Error(Config) on an empty transcript, a trailing assistant turn,
  // negative temperature or non-positive max_tokens.
  void validate() const;
};

enum class FinishReason { Stop, Length, Error };

std::string_view to_string(FinishReason reason);

struct GenerationResponse {
  std::string text;
  FinishReason finish_reason = FinishReason::Stop;
  // Transport retries spent on this call; a retried generation at
  // temperature > 0 is a fresh sample.
  int retries = 0;
};

enum class TokenPosition { Last };

struct ActivationRequest {
  std::string text;
  int layer_index = -2;  // negative counts from the last layer
  TokenPosition token_position = TokenPosition::Last;
};

struct ActivationVector {
  std::vector<double> values;
  int layer_index = 0;
  std::size_t dim() const { return values.size(); }
};

// A language model seen as (a) a sampler and (b) a source of hidden
// activations. Implementations must be safe to call concurrently.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual GenerationResponse generate(const GenerationRequest& request) = 0;
  virtual ActivationVector extract_activation(const ActivationRequest& request) = 0;
  // Stable description used for cache keys and report metadata.
  virtual std::string identity() const = 0;
  virtual std::size_t max_in_flight() const { return 1; }
};

// Wire schema of the HTTP protocol:
//   POST /v1/generate    {messages:[{role,content}], temperature, max_tokens, stop:[...], seed?}
//                        -> {text, finish_reason}
//   POST /v1/activations {text, layer, token_position} -> {values:[...], dim, layer}
// The parsers throw Error(Schema) on any violation.
nlohmann::json to_wire(const GenerationRequest& request);
GenerationRequest generation_request_from_wire(const nlohmann::json& body);
nlohmann::json to_wire(const GenerationResponse& response);
GenerationResponse generation_response_from_wire(const nlohmann::json& body);
nlohmann::json to_wire(const ActivationRequest& request);
ActivationRequest activation_request_from_wire(const nlohmann::json& body);
nlohmann::json to_wire(const ActivationVector& vector);
ActivationVector activation_from_wire(const nlohmann::json& body);

nlohmann::json transcript_to_messages(const std::vector<Turn>& transcript);

}  // namespace memaudit
