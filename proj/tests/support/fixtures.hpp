#pragma once

#include <memory>
#include <string>
#include <vector>

#include <map>

#include "ape/meta_prompts.hpp"
#include "backend/mock_backend.hpp"
#include "dataset/records.hpp"
#include "util/hash.hpp"
#include "util/text.hpp"

namespace memaudit::testing {

// In-memory dataset with distinct titles "Film <i> (19xx)".
inline Dataset small_dataset(std::size_t n_movies, std::size_t n_users = 20, std::size_t n_ratings = 200) {
  Dataset d;
  for (std::size_t i = 1; i <= n_movies; ++i) {
    d.movies.push_back({static_cast<std::int64_t>(i), "Film " + std::to_string(i) + " (" + std::to_string(1950 + i % 50) + ")",
                        {i % 2 ? "Drama" : "Comedy"}});
  }
  for (std::size_t i = 1; i <= n_users; ++i) {
    d.users.push_back({static_cast<std::int64_t>(i), i % 2 ? 'F' : 'M', 25, static_cast<int>(i % 21),
                       std::to_string(10000 + i)});
  }
  for (std::size_t i = 0; i < n_ratings; ++i) {
    d.ratings.push_back({static_cast<std::int64_t>(i % n_users + 1), static_cast<std::int64_t>(i / n_users + 1),
                         static_cast<int>(i % 5 + 1), static_cast<std::int64_t>(978300000 + i)});
  }
  return d;
}

// Mock that reproduces exactly the first n_planted records of a kind.
inline MockSpec planted_spec(const Dataset& d, FieldKind kind, std::size_t n_planted) {
  MockSpec spec;
  spec.field_kind = kind;
  spec.records = raw_lines(d, kind);
  for (std::size_t i = 0; i < n_planted && i < spec.records.size(); ++i)
    spec.planted_memorized_ids.insert(record_id(spec.records[i], kind));
  return spec;
}

// Generation-only backend whose recall depends on the instruction: a record
// is answered correctly when hash(instruction, key) falls below a per-prompt
// skill level. Meta prompts yield request-dependent instruction texts.
class PromptSensitiveBackend final : public Backend {
 public:
  PromptSensitiveBackend(std::vector<std::string> records, FieldKind kind) : kind_(kind) {
    for (auto& r : records) by_key_.emplace(split_key(r, kind).first, std::move(r));
  }

  GenerationResponse generate(const GenerationRequest& request) override {
    request.validate();
    const std::string& prompt = request.transcript.back().content;
    const std::string h = sha256_hex(to_wire(request).dump());
    GenerationResponse out;
    if (prompt.rfind(kProposalMetaPrompt, 0) == 0) {
      out.text = "Recall records, style " + h.substr(0, 12) + ".";
      return out;
    }
    if (prompt.rfind(kVariationMetaPrompt, 0) == 0) {
      out.text = std::string(trim(prompt.substr(kVariationMetaPrompt.size()))) + " v" + h.substr(0, 6);
      return out;
    }
    const auto nl = prompt.find("\n\n");
    const std::string instruction = prompt.substr(0, nl);
    const std::string key(last_line(prompt));
    const auto it = by_key_.find(key);
    const double skill = static_cast<double>(hash64("skill/" + instruction) % 1000) / 1000.0;
    const double draw = static_cast<double>(hash64("draw/" + instruction + key) % 1000) / 1000.0;
    if (it != by_key_.end() && draw < skill) {
      out.text = split_key(it->second, kind_).second;
    } else {
      out.text = "Nothing::Here";
    }
    return out;
  }
  ActivationVector extract_activation(const ActivationRequest&) override { return {{0.0}, -2}; }
  std::string identity() const override { return "prompt-sensitive-test"; }
  std::size_t max_in_flight() const override { return 4; }

 private:
  static std::string_view last_line(std::string_view s) {
    const auto p = s.rfind('\n');
    return p == std::string_view::npos ? s : s.substr(p + 1);
  }
  FieldKind kind_;
  std::map<std::string, std::string> by_key_;
};

}  // namespace memaudit::testing
