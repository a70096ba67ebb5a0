#include "backend/backend.hpp"

#include <cmath>

#include "util/error.hpp"

namespace memaudit {

using nlohmann::json;

std::string_view to_string(Role role) {
  switch (role) {
    case Role::System: return "system";
    case Role::User: return "user";
    case Role::Assistant: return "assistant";
  }
  return "user";
}

Role parse_role(std::string_view name) {
  if (name == "system") return Role::System;
  if (name == "user") return Role::User;
  if (name == "assistant") return Role::Assistant;
  throw Error(ErrorCode::Schema, "unknown role '" + std::string(name) + "'");
}

std::string_view to_string(FinishReason reason) {
  switch (reason) {
    case FinishReason::Stop: return "stop";
    case FinishReason::Length: return "length";
    case FinishReason::Error: return "error";
  }
  return "error";
}

void GenerationRequest::validate() const {
  if (transcript.empty()) throw Error(ErrorCode::Config, "generation transcript is empty");
  if (transcript.back().role == Role::Assistant) {
    throw Error(ErrorCode::Config, "generation transcript ends with an assistant turn");
  }
  if (!(temperature >= 0.0) || !std::isfinite(temperature)) {
    throw Error(ErrorCode::Config, "temperature must be a finite value >= 0");
  }
  if (max_tokens <= 0) throw Error(ErrorCode::Config, "max_tokens must be positive");
}

namespace {

[[noreturn]] void schema(const std::string& what) { throw Error(ErrorCode::Schema, what); }

const json& field(const json& body, const char* name) {
  if (!body.is_object()) schema("expected a JSON object");
  auto it = body.find(name);
  if (it == body.end()) schema(std::string("missing field '") + name + "'");
  return *it;
}

std::string string_field(const json& body, const char* name) {
  const json& v = field(body, name);
  if (!v.is_string()) schema(std::string("field '") + name + "' must be a string");
  return v.get<std::string>();
}

double number_field(const json& body, const char* name) {
  const json& v = field(body, name);
  if (!v.is_number()) schema(std::string("field '") + name + "' must be a number");
  return v.get<double>();
}

std::int64_t integer_field(const json& body, const char* name) {
  const json& v = field(body, name);
  if (!v.is_number_integer()) schema(std::string("field '") + name + "' must be an integer");
  return v.get<std::int64_t>();
}

}  // namespace

json transcript_to_messages(const std::vector<Turn>& transcript) {
  json messages = json::array();
  for (const auto& t : transcript) messages.push_back({{"role", to_string(t.role)}, {"content", t.content}});
  return messages;
}

json to_wire(const GenerationRequest& request) {
  json body{{"messages", transcript_to_messages(request.transcript)},
            {"temperature", request.temperature},
            {"max_tokens", request.max_tokens},
            {"stop", request.stop_sequences}};
  if (request.seed) body["seed"] = *request.seed;
  return body;
}

GenerationRequest generation_request_from_wire(const json& body) {
  GenerationRequest r;
  const json& messages = field(body, "messages");
  if (!messages.is_array()) schema("field 'messages' must be an array");
  for (const json& m : messages) {
    r.transcript.push_back(Turn{parse_role(string_field(m, "role")), string_field(m, "content")});
  }
  r.temperature = number_field(body, "temperature");
  r.max_tokens = static_cast<int>(integer_field(body, "max_tokens"));
  if (body.contains("stop")) {
    const json& stop = body.at("stop");
    if (!stop.is_array()) schema("field 'stop' must be an array");
    for (const json& s : stop) {
      if (!s.is_string()) schema("stop sequences must be strings");
      r.stop_sequences.push_back(s.get<std::string>());
    }
  }
  if (body.contains("seed")) r.seed = static_cast<std::uint64_t>(integer_field(body, "seed"));
  return r;
}

json to_wire(const GenerationResponse& response) {
  return json{{"text", response.text}, {"finish_reason", to_string(response.finish_reason)}};
}

GenerationResponse generation_response_from_wire(const json& body) {
  GenerationResponse r;
  r.text = string_field(body, "text");
  const std::string reason = string_field(body, "finish_reason");
  if (reason == "stop") {
    r.finish_reason = FinishReason::Stop;
  } else if (reason == "length") {
    r.finish_reason = FinishReason::Length;
  } else if (reason == "error") {
    r.finish_reason = FinishReason::Error;
  } else {
    schema("unknown finish_reason '" + reason + "'");
  }
  if (r.text.empty() && r.finish_reason != FinishReason::Error) {
    schema("empty completion with finish_reason '" + reason + "'");
  }
  return r;
}

json to_wire(const ActivationRequest& request) {
  return json{{"text", request.text}, {"layer", request.layer_index}, {"token_position", "last"}};
}

ActivationRequest activation_request_from_wire(const json& body) {
  ActivationRequest r;
  r.text = string_field(body, "text");
  r.layer_index = static_cast<int>(integer_field(body, "layer"));
  if (body.contains("token_position") && body.at("token_position") != "last") {
    schema("token_position must be 'last'");
  }
  return r;
}

json to_wire(const ActivationVector& vector) {
  return json{{"values", vector.values}, {"dim", vector.dim()}, {"layer", vector.layer_index}};
}

ActivationVector activation_from_wire(const json& body) {
  ActivationVector v;
  const json& values = field(body, "values");
  if (!values.is_array()) schema("field 'values' must be an array");
  v.values.reserve(values.size());
  for (const json& x : values) {
    if (!x.is_number()) schema("activation values must be numbers");
    const double d = x.get<double>();
    if (!std::isfinite(d)) schema("activation values must be finite");
    v.values.push_back(d);
  }
  const std::int64_t dim = integer_field(body, "dim");
  if (dim <= 0 || static_cast<std::size_t>(dim) != v.values.size()) {
    schema("dim " + std::to_string(dim) + " does not match " + std::to_string(v.values.size()) + " values");
  }
  v.layer_index = static_cast<int>(integer_field(body, "layer"));
  return v;
}

}  // namespace memaudit
