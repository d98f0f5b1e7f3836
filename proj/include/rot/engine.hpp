#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "rot/predictor.hpp"
#include "rot/token.hpp"

namespace rot {

struct InferenceLimits {
  std::size_t max_context_tokens = 2048;
  std::size_t max_depth = 256;
  std::size_t max_total_tokens = 10'000'000;

  /// Reuse the answer of a question already solved during this inference
  /// instead of opening a new context. Only sound for deterministic models.
  bool memoize = false;
  std::size_t max_transcripts = 1024;
};

void validate(const InferenceLimits& limits);

class InferenceError : public std::runtime_error {
 public:
  enum class Kind { ContextOverflow, DepthExceeded, BudgetExceeded, ProtocolViolation };
  InferenceError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

const char* kind_name(InferenceError::Kind k) noexcept;

struct ContextTranscript {
  std::size_t id = 0;      // creation order, root = 0
  std::size_t depth = 0;   // root = 0; a tail call keeps its caller's depth
  TokenSeq tokens;         // final state of the context
};

struct RotTrace {
  std::size_t contexts_created = 0;
  std::size_t max_depth = 0;
  std::uint64_t tokens_generated = 0;  // THINK excluded
  std::uint64_t think_count = 0;
  std::uint64_t memo_hits = 0;
  std::vector<ContextTranscript> transcripts;  // by id, at most max_transcripts
};

struct InferenceResult {
  TokenSeq answer;  // ends with STOP
  RotTrace trace;
};

/// Multi-context recursive inference. q must start with GO.
/// Throws InferenceError.
InferenceResult rot_infer(const Predictor& model, const TokenSeq& q,
                          const InferenceLimits& limits = {});

/// Single-context greedy decoding for CoT and WT: generation ends at the
/// STOP that closes the outermost question. Returns the generated tokens.
InferenceResult flat_infer(const Predictor& model, const TokenSeq& q,
                           const InferenceLimits& limits = {});

/// Debug dump of a trace: counters plus per-context transcripts.
std::string trace_json(const RotTrace& trace);

}  // namespace rot
