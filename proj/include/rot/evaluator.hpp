#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "rot/context.hpp"
#include "rot/predictor.hpp"

namespace rot {

/// A unique context to check. Contexts longer than the materialization
/// limit are kept by length only; they can never fit the model.
struct EvalItem {
  LabeledContext labeled;
  Number length;  // rendered length (authoritative even when not materialized)
  bool materialized() const { return !labeled.context.empty(); }
};

struct UniqueContextSet {
  std::vector<EvalItem> items;
  std::vector<std::vector<std::size_t>> membership;  // per problem, ascending item ids
  Number total_contexts;                              // before dedup, fully expanded
};

/// Dedup over the whole test set. For RoT every unique context of every
/// tree; for CoT/WT one context per problem.
UniqueContextSet collect_unique_contexts(std::span<const Problem> problems, ThoughtType type,
                                         std::size_t materialize_limit);

enum class VerdictNote : std::uint8_t { None, Mismatch, ContextOverflow, ModelError };
const char* note_name(VerdictNote n) noexcept;

struct ContextVerdict {
  bool pass = false;
  VerdictNote note = VerdictNote::None;
  std::size_t position = 0;  // first wrong target position on Mismatch
  friend bool operator==(const ContextVerdict&, const ContextVerdict&) = default;
};

/// Teacher forcing: at every non-PAD target position the model's argmax,
/// given the ground-truth prefix, must equal the target.
ContextVerdict evaluate_context(const Predictor& model, const EvalItem& item);
ContextVerdict evaluate_context(const Predictor& model, const LabeledContext& lc);

struct EvalReport {
  std::vector<std::string> context_keys;  // readable text of each unique context
  std::vector<ContextVerdict> context_verdicts;
  std::vector<bool> problem_verdicts;
  double accuracy = 0.0;
  std::size_t unique_contexts = 0;
  Number total_contexts;
  std::size_t overflow_contexts = 0;
};

/// A problem passes iff all of its contexts pass.
EvalReport aggregate(const UniqueContextSet& set, std::vector<ContextVerdict> verdicts);

/// collect + evaluate on `workers` threads + aggregate. The report does not
/// depend on the worker count.
EvalReport evaluate(const Predictor& model, std::span<const Problem> problems, ThoughtType type,
                    std::size_t workers = 1);

/// Reference: every context of every problem re-derived and checked, with no
/// sharing between or within problems.
std::vector<bool> naive_evaluate(const Predictor& model, std::span<const Problem> problems,
                                 ThoughtType type);

std::string report_json(const EvalReport& r, bool with_contexts = true);

/// Run `fn(i)` for i in [0, n) on `workers` threads.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

// ---- length and token statistics ------------------------------------------

/// Power-of-two buckets: bucket k holds values in [2^k, 2^(k+1)); zero goes
/// to bucket 0 with one.
struct Histogram {
  std::vector<std::uint64_t> counts;
  void add(const Number& v);
  std::uint64_t total() const;
};

struct LengthStats {
  Task task;
  int difficulty;
  std::size_t n = 0;
  std::vector<std::size_t> rot_context_lengths;  // one sampled unique context per problem
  std::vector<std::size_t> rot_max_lengths;      // longest context per problem
  std::vector<Number> cot_lengths;
  std::vector<Number> tokens_naive;   // RoT generated tokens, every context solved
  std::vector<Number> tokens_cached;  // each unique context solved once
  Histogram rot_hist, cot_hist;
};

LengthStats length_and_token_stats(Task task, int difficulty, std::size_t n, std::uint64_t seed);

/// bucket,lower,upper,rot,cot
std::string histogram_csv(const LengthStats& s);

}  // namespace rot
