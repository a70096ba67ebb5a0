#include "backend/mock_backend.hpp"

#include <cctype>
#include <cmath>

#include "ape/meta_prompts.hpp"
#include "dataset/statements.hpp"
#include "util/error.hpp"
#include "util/hash.hpp"
#include "util/rng.hpp"
#include "util/text.hpp"

namespace memaudit {

namespace {

std::vector<double> unit_direction(std::size_t dim, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(dim);
  double norm = 0.0;
  for (auto& x : v) {
    x = rng.normal();
    norm += x * x;
  }
  norm = std::sqrt(norm);
  for (auto& x : v) x /= norm;
  return v;
}

bool starts_with(std::string_view s, std::string_view prefix) { return s.substr(0, prefix.size()) == prefix; }
bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

std::string_view last_line(std::string_view text) {
  text = trim(text);
  const std::size_t nl = text.rfind('\n');
  return nl == std::string_view::npos ? text : trim(text.substr(nl + 1));
}

struct ParsedStatement {
  std::string entity;
  bool asserted = true;
};

std::optional<ParsedStatement> match_statement(std::string_view tmpl, std::string_view text) {
  // Negation first: "is not" renderings also contain "is".
  for (bool asserted : {false, true}) {
    std::string filled(tmpl);
    const auto pp = filled.find(kPolaritySlot);
    filled.replace(pp, kPolaritySlot.size(), asserted ? kAssertPhrase : kNegatePhrase);
    const auto ep = filled.find(kEntitySlot);
    const std::string_view head = std::string_view(filled).substr(0, ep);
    const std::string_view tail = std::string_view(filled).substr(ep + kEntitySlot.size());
    if (text.size() > head.size() + tail.size() && starts_with(text, head) && ends_with(text, tail)) {
      return ParsedStatement{std::string(text.substr(head.size(), text.size() - head.size() - tail.size())), asserted};
    }
  }
  return std::nullopt;
}

constexpr const char* kSyllables[] = {"zor", "bel", "qua", "nix", "vel", "tor", "mar", "quin",
                                      "dra", "lum", "pex", "sol", "gri", "fen", "ryx", "oth"};

}  // namespace

void MockSpec::validate() const {
  if (dim < 2) throw Error(ErrorCode::Config, "mock dim must be >= 2");
  if (!(noise_scale >= 0.0)) throw Error(ErrorCode::Config, "mock noise_scale must be >= 0");
  if (n_layers < 1) throw Error(ErrorCode::Config, "mock n_layers must be >= 1");
  if (confound && confound->n_clusters < 1) throw Error(ErrorCode::Config, "confound needs >= 1 cluster");
}

std::string record_id(std::string_view line, FieldKind kind) {
  auto [key, rest] = split_key(line, kind);
  key.resize(key.size() - 2);
  return key;
}

MockBackend::MockBackend(MockSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  truth_dir_ = unit_direction(spec_.dim, derive_seed(spec_.truth_direction_seed, "truth"));
  polarity_dir_ = unit_direction(spec_.dim, derive_seed(spec_.truth_direction_seed, "polarity"));
  if (spec_.confound) confound_dir_ = unit_direction(spec_.dim, derive_seed(spec_.confound->direction_seed, "confound"));
  by_key_.reserve(spec_.records.size());
  for (const auto& line : spec_.records) by_key_.emplace(record_id(line, spec_.field_kind), line);
  templates_ = spec_.statement_templates;
  for (FieldKind k : {FieldKind::Item, FieldKind::User, FieldKind::Rating}) templates_.push_back(default_template(k));
  for (const auto& t : templates_) validate_template(t);
}

std::string MockBackend::identity() const {
  std::string desc = "dim=" + std::to_string(spec_.dim) + ";truth_seed=" + std::to_string(spec_.truth_direction_seed) +
                     ";noise_seed=" + std::to_string(spec_.noise_seed) + ";noise=" + std::to_string(spec_.noise_scale) +
                     ";truth=" + std::to_string(spec_.truth_magnitude) +
                     ";polarity=" + std::to_string(spec_.polarity_magnitude) + ";layers=" + std::to_string(spec_.n_layers) +
                     ";kind=" + std::string(to_string(spec_.field_kind));
  if (spec_.confound) {
    desc += ";confound=" + std::to_string(spec_.confound->direction_seed) + "," +
            std::to_string(spec_.confound->magnitude) + "," + std::to_string(spec_.confound->n_clusters);
  }
  std::string knowledge;
  for (const auto& r : spec_.records) knowledge += r + "\n";
  for (const auto& p : spec_.planted_memorized_ids) knowledge += "planted:" + p + "\n";
  desc += ";records=" + sha256_hex(knowledge).substr(0, 16);
  return "mock:" + sha256_hex(desc).substr(0, 16);
}

std::vector<std::string> MockBackend::tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  auto alnum = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; };
  std::size_t i = 0;
  while (i < text.size()) {
    std::string tok;
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) tok.push_back(text[i++]);
    if (i == text.size()) {
      if (!tokens.empty()) {
        tokens.back() += tok;
      } else {
        tokens.push_back(tok);
      }
      break;
    }
    if (alnum(text[i])) {
      while (i < text.size() && alnum(text[i])) tok.push_back(text[i++]);
    } else {
      tok.push_back(text[i++]);
    }
    tokens.push_back(std::move(tok));
  }
  return tokens;
}

std::string MockBackend::fabricate(const std::string& key) const {
  Rng rng(hash64("fabricate/" + std::string(to_string(spec_.field_kind)) + "/" + key));
  std::string out;
  switch (spec_.field_kind) {
    case FieldKind::Item: {
      const auto n = 2 + rng.below(2);
      for (std::uint64_t k = 0; k < n; ++k) out += kSyllables[rng.below(std::size(kSyllables))];
      out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
      out += " (19" + std::to_string(10 + rng.below(90)) + ")::Drama";
      break;
    }
    case FieldKind::User:
      out = std::string(rng.below(2) ? "M" : "F") + "::" + std::to_string(1 + rng.below(56)) +
            "::" + std::to_string(rng.below(21)) + "::" + std::to_string(10000 + rng.below(90000));
      break;
    case FieldKind::Rating:
      out = std::to_string(1 + rng.below(5)) + "::" + std::to_string(956703932 + rng.below(90000000));
      break;
  }
  auto it = by_key_.find(key);
  if (it != by_key_.end()) {
    const std::string gold = split_key(it->second, spec_.field_kind).second;
    if (spec_.field_kind == FieldKind::Item) {
      // Titles alone are matched too, so they must differ on their own.
      const auto cut = out.find(" (");
      if (out.substr(0, out.find("::")) == gold.substr(0, gold.find("::"))) out.insert(cut, "x");
    } else if (out == gold) {
      // Bump the last digit; the row stays well-formed.
      out.back() = out.back() == '9' ? '8' : static_cast<char>(out.back() + 1);
    }
  }
  return out;
}

std::string MockBackend::answer(const GenerationRequest& request) const {
  const std::string_view prompt = request.transcript.back().content;
  auto request_hash_of = [&] { return sha256_hex(to_wire(request).dump()); };

  if (starts_with(trim(prompt), kProposalMetaPrompt)) {
    const std::string request_hash = request_hash_of();
    const auto n = hash64("proposal/" + request_hash) % 100000;
    return "Instruction #" + std::to_string(n) + ": given the key, output the exact " +
           std::string(to_string(spec_.field_kind)) + " record fields that follow it in MovieLens-1M.";
  }
  if (starts_with(trim(prompt), kVariationMetaPrompt)) {
    std::string parent(trim(trim(prompt).substr(kVariationMetaPrompt.size())));
    const std::string request_hash = request_hash_of();
    return parent + " (variant " + request_hash.substr(0, 6) + ")";
  }

  std::string_view line = last_line(prompt);
  const bool lookup_mode = starts_with(line, "Input:");
  if (lookup_mode) line = trim(line.substr(6));

  const std::size_t key_fields = key_field_count(spec_.field_kind);
  auto parts = split(line, "::");
  if (parts.size() <= key_fields) {
    return lookup_mode ? "Unknown" : fabricate(std::string(line));
  }
  std::string key;
  for (std::size_t i = 0; i < key_fields; ++i) {
    if (i) key += "::";
    key += parts[i];
  }
  auto it = by_key_.find(key);
  if (it == by_key_.end()) return lookup_mode ? "Unknown" : fabricate(key);
  const std::string& gold = it->second;
  const bool planted = spec_.planted_memorized_ids.contains(key);
  if (lookup_mode) return planted ? gold : key + "::" + fabricate(key);
  if (planted && starts_with(gold, line)) return gold.substr(line.size());
  return fabricate(key);
}

GenerationResponse MockBackend::generate(const GenerationRequest& request) {
  request.validate();
  std::string text = answer(request);
  GenerationResponse response;
  response.finish_reason = FinishReason::Stop;
  for (const auto& stop : request.stop_sequences) {
    if (stop.empty()) continue;
    const auto pos = text.find(stop);
    if (pos != std::string::npos) text.resize(pos);
  }
  auto tokens = tokenize(text);
  if (tokens.size() > static_cast<std::size_t>(request.max_tokens)) {
    tokens.resize(static_cast<std::size_t>(request.max_tokens));
    text.clear();
    for (const auto& t : tokens) text += t;
    response.finish_reason = FinishReason::Length;
  }
  if (text.empty()) {
    // The wire contract reserves empty text for errors; a stop sequence at
    // position 0 therefore yields a single space.
    text = " ";
  }
  response.text = std::move(text);
  return response;
}

int MockBackend::confound_cluster(std::string_view entity) const {
  if (!spec_.confound || spec_.confound->n_clusters <= 1) return 0;
  return static_cast<int>(hash64("cluster/" + std::string(entity)) % static_cast<std::uint64_t>(spec_.confound->n_clusters));
}

ActivationVector MockBackend::extract_activation(const ActivationRequest& request) {
  const int layers = spec_.n_layers;
  if (request.layer_index >= layers || request.layer_index < -layers) {
    throw Error(ErrorCode::Config, "layer " + std::to_string(request.layer_index) + " outside a " +
                                       std::to_string(layers) + "-layer model");
  }
  const int layer = request.layer_index < 0 ? layers + request.layer_index : request.layer_index;

  std::optional<ParsedStatement> parsed;
  for (const auto& t : templates_) {
    parsed = match_statement(t, request.text);
    if (parsed) break;
  }

  ActivationVector out;
  out.layer_index = request.layer_index;
  out.values.assign(spec_.dim, 0.0);
  if (parsed) {
    const bool genuine = spec_.genuine_entities.contains(parsed->entity);
    const double truth_sign = (genuine == parsed->asserted) ? 1.0 : -1.0;
    const double polarity_sign = parsed->asserted ? 1.0 : -1.0;
    double confound_shift = 0.0;
    if (spec_.confound && spec_.confound->n_clusters > 1) {
      const int c = confound_cluster(parsed->entity);
      const double cluster_sign = -1.0 + 2.0 * c / (spec_.confound->n_clusters - 1);
      confound_shift = polarity_sign * cluster_sign * spec_.confound->magnitude;
    }
    for (std::size_t i = 0; i < spec_.dim; ++i) {
      out.values[i] = spec_.truth_magnitude * truth_sign * truth_dir_[i] +
                      spec_.polarity_magnitude * polarity_sign * polarity_dir_[i];
      if (confound_shift != 0.0) out.values[i] += confound_shift * confound_dir_[i];
    }
  }
  Rng noise(hash64("noise/" + std::to_string(spec_.noise_seed) + "/" + std::to_string(layer) + "/" + request.text));
  for (auto& x : out.values) x += spec_.noise_scale * noise.normal();
  return out;
}

}  // namespace memaudit
