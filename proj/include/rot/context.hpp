#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "rot/problem.hpp"
#include "rot/rng.hpp"
#include "rot/thought.hpp"
#include "rot/token.hpp"

namespace rot {

/// One (Qsub, Asub) pair of a context. For a tail pair the question starts
/// with TAIL, the answer is the single THINK that hands control to the child,
/// and the parent has no answer segment of its own.
struct SubPair {
  TokenSeq question;
  TokenSeq answer;
  RecursionType type = RecursionType::Regular;
  std::size_t child = 0;  // index into ContextTree::nodes
};

/// X = [Q; Qsub1; Asub1; ...; QsubN; AsubN; A]
struct Context {
  TokenSeq question;
  std::vector<SubPair> subs;
  TokenSeq answer;  // empty when the last pair is a tail call

  bool tail_terminated() const noexcept {
    return !subs.empty() && subs.back().type == RecursionType::Tail;
  }
};

TokenSeq render(const Context& c);

/// Y: PAD over Q, Qsub copied, THINK then PADs over each Asub, A copied.
TokenSeq build_target(const Context& c);

struct ContextNode {
  Problem problem;
  Answer answer;
  Context context;
};

/// Ground-truth RoT contexts of one problem. Identical subproblems share one
/// node, so `nodes` holds the unique contexts in the order a memoizing
/// inference creates them (depth-first, first occurrence); nodes[0] is the
/// root.
struct ContextTree {
  std::vector<ContextNode> nodes;
  std::vector<std::size_t> topo_order;  // every parent before its children

  const ContextNode& root() const { return nodes.front(); }
  std::size_t size() const noexcept { return nodes.size(); }

  /// How many times each unique context occurs in the fully expanded
  /// (non-deduplicated) recursion.
  std::vector<Number> multiplicities() const;
};

ContextTree build_rot_tree(const Problem& p, std::size_t max_depth = 10'000);

/// Contexts in the order a non-memoizing inference creates them (with
/// repeats). Throws RecursionError when more than `limit` would be produced.
std::vector<std::size_t> expanded_order(const ContextTree& tree, std::size_t limit);

/// Tokens the model emits in a context, excluding THINK: sub-questions plus
/// the final answer.
std::size_t generated_tokens(const Context& c);

/// Per-problem token accounting over the whole recursion.
struct TokenAccount {
  Number rot_generated_naive;   // every context re-solved, THINK excluded
  Number rot_think_naive;       // THINK tokens emitted
  Number rot_generated_cached;  // each unique context solved once, THINK excluded
  Number contexts_naive;
  std::size_t contexts_unique = 0;
  std::size_t rot_max_context = 0;  // longest rendered RoT context
  Number cot_length;                // |CoT context|
  Number cot_generated;             // |CoT| - |Q|
};

TokenAccount account_tokens(const ContextTree& tree);

/// Single-context chain of thought: each sub-answer is replaced by the
/// child's whole body (its sub-steps and answer), depth first. Tail
/// questions keep their TAIL marker. Throws RecursionError if the result
/// would exceed `max_tokens`.
TokenSeq build_cot_context(const ContextTree& tree, std::size_t max_tokens = 50'000'000);
TokenSeq build_cot_context(const Problem& p, std::size_t max_tokens = 50'000'000);

/// (Q, A) with no intermediate steps.
std::pair<TokenSeq, TokenSeq> build_wt_pair(const Problem& p);

/// The context of p alone, with sub-answers from the reference solvers.
Context build_context(const Problem& p);

enum class ThoughtType : std::uint8_t { Wt, Cot, Rot };

std::string_view thought_name(ThoughtType t) noexcept;
ThoughtType thought_from_name(std::string_view name);  // throws ConfigError

/// A rendered context and its training target (same length).
struct LabeledContext {
  TokenSeq context;
  TokenSeq target;
};

/// RoT: every unique context of the tree. CoT: the single unrolled context.
/// WT: Q followed by A. Targets mask the question with PAD.
std::vector<LabeledContext> labeled_contexts(const Problem& p, ThoughtType type,
                                             std::size_t max_cot_tokens = 50'000'000);

/// One training example: a uniformly chosen unique context of p's tree.
struct TrainingExample {
  TokenSeq context;
  TokenSeq target;
};

TrainingExample sample_training_context(const Problem& p, Rng& rng);

}  // namespace rot
