#pragma once

#include <string_view>

namespace memaudit {

// Default APE meta-prompts. Both are overridable through ApeConfig; the mock
// backend recognizes requests by these leading phrases.
inline constexpr std::string_view kProposalMetaPrompt =
    "I gave a friend an instruction and five input-output pairs. Based on the pairs below, write the instruction.";
inline constexpr std::string_view kVariationMetaPrompt =
    "Generate a variation of the following instruction that achieves the same goal:";

}  // namespace memaudit
