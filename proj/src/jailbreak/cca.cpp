#include "jailbreak/cca.hpp"

#include "util/error.hpp"
#include "util/text.hpp"

namespace memaudit {

std::vector<DemoPair> default_cca_exemplars() {
  return {{"1::", "Toy Story (1995)::"}, {"1::Toy Story (1995)::Animation", "|Children's|Comedy"}};
}

CcaTranscript build_cca_transcript(std::string_view key, std::span<const DemoPair> exemplars) {
  if (key.empty()) throw Error(ErrorCode::InvalidArgument, "CCA transcript needs a non-empty key");
  CcaTranscript t;
  t.turns.push_back({Role::System, std::string(kCcaSystem)});
  t.turns.push_back({Role::User, std::string(kCcaRequest)});
  t.turns.push_back({Role::Assistant, std::string(kCcaAcknowledgment)});
  for (const auto& e : exemplars) {
    t.turns.push_back({Role::User, "Input: " + e.input});
    t.turns.push_back({Role::Assistant, e.input + e.output});
  }
  t.turns.push_back({Role::User, "Input: " + std::string(key)});
  return t;
}

nlohmann::json to_messages(const CcaTranscript& transcript) { return transcript_to_messages(transcript.turns); }

std::string_view to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::Valid: return "valid";
    case Verdict::Duplicate: return "duplicate";
    case Verdict::UnknownToken: return "unknown-token";
    case Verdict::Hallucination: return "hallucination";
    case Verdict::Malformed: return "malformed";
  }
  return "malformed";
}

std::string normalize_reply(std::string_view reply) { return normalize_whitespace(reply); }

ReplyVerdict classify_reply(std::string_view reply, std::string_view gold_line, FieldKind kind,
                            const std::set<std::string>& seen_replies) {
  const std::string r = normalize_reply(reply);
  const auto [key, completion] = split_key(gold_line, kind);
  if (exact_match(r, gold_line) || exact_match(r, completion)) return {Verdict::Valid, std::string(gold_line)};
  if (seen_replies.contains(r)) return {Verdict::Duplicate, std::nullopt};
  if (r == kUnknownToken) return {Verdict::UnknownToken, std::nullopt};
  if (is_well_formed(r, kind) || is_well_formed(key + r, kind)) return {Verdict::Hallucination, std::nullopt};
  return {Verdict::Malformed, std::nullopt};
}

}  // namespace memaudit
