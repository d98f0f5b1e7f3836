#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rot/context.hpp"

namespace rot {

/// Plain-text fine-tuning example.
struct PromptCompletion {
  std::string prompt;
  std::string completion;
  friend bool operator==(const PromptCompletion&, const PromptCompletion&) = default;
};

/// Export spelling of a token: word tokens lower-cased ("go", "think", "vs"),
/// digits and symbols as they are.
std::string_view export_word(Token t) noexcept;

/// Each token preceded by one space: " go 4 0 + 3 5 =".
std::string export_text(std::span<const Token> ts);

class ExportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inverse of export_text. Throws ExportError.
TokenSeq parse_export_text(std::string_view text);

/// One record per generated segment of the target. A segment is a run of
/// non-PAD target tokens ending at THINK or STOP; its prompt is the context
/// before it.
std::vector<PromptCompletion> derive_prompt_completions(std::span<const Token> context,
                                                        std::span<const Token> target);

/// {"prompt": "...", "completion": "..."} with that key order and spacing.
std::string jsonl_line(const PromptCompletion& r);
PromptCompletion parse_jsonl_line(std::string_view line);  // throws ExportError

/// Records for every labeled context of p.
std::vector<PromptCompletion> export_problem(const Problem& p, ThoughtType type,
                                             std::size_t max_cot_tokens = 50'000'000);

/// JSON array of {id, text, kind, export}.
std::string vocabulary_json();

/// One dataset line: task, difficulty, index, question and the context and
/// target as arrays of token text forms.
std::string dataset_line(const Problem& p, int difficulty, std::uint64_t index, ThoughtType type,
                         const LabeledContext& lc);

/// Human-readable sampler parameters, for dataset manifests.
std::string sampler_description(Task task);

}  // namespace rot
