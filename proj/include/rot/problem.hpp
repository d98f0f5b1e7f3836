#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rot/number.hpp"
#include "rot/rng.hpp"

namespace rot {

/// Problem types. The order matches the alternatives of `Problem`.
enum class Task : std::uint8_t {
  Add,
  Sub,
  Mul,
  Div,
  Compare,
  Equal,
  Lcs,
  Lps,
  Knapsack,
  TernaryAdd,
  TernaryMul,
  Mcm,
  MergeSort,
  Merge,
};

inline constexpr std::size_t kTaskCount = static_cast<std::size_t>(Task::Merge) + 1;

std::string_view task_name(Task t) noexcept;
/// Accepts the canonical names ("add", "lcs", "mergesort", ...) plus "sort".
Task task_from_name(std::string_view name);

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <Task T>
struct BinaryProblem {
  Number left, right;
  friend bool operator==(const BinaryProblem&, const BinaryProblem&) = default;
};

template <Task T>
struct TernaryProblem {
  Number a1, a2, a3;
  friend bool operator==(const TernaryProblem&, const TernaryProblem&) = default;
};

using AddProblem = BinaryProblem<Task::Add>;
using SubProblem = BinaryProblem<Task::Sub>;
using MulProblem = BinaryProblem<Task::Mul>;
using DivProblem = BinaryProblem<Task::Div>;
using CompareProblem = BinaryProblem<Task::Compare>;
using TernaryAddProblem = TernaryProblem<Task::TernaryAdd>;
using TernaryMulProblem = TernaryProblem<Task::TernaryMul>;

/// Two single characters (digits 0-9).
struct EqualProblem {
  int left, right;
  friend bool operator==(const EqualProblem&, const EqualProblem&) = default;
};

/// Digit strings over '0'..'9'; either side may be empty inside the recursion.
struct LcsProblem {
  std::string left, right;
  friend bool operator==(const LcsProblem&, const LcsProblem&) = default;
};

struct LpsProblem {
  std::string seq;
  friend bool operator==(const LpsProblem&, const LpsProblem&) = default;
};

struct KnapsackItem {
  std::int64_t value, weight;
  friend bool operator==(const KnapsackItem&, const KnapsackItem&) = default;
};

struct KnapsackProblem {
  std::vector<KnapsackItem> items;  // non-empty
  std::int64_t capacity;
  friend bool operator==(const KnapsackProblem&, const KnapsackProblem&) = default;
};

struct MatShape {
  std::int64_t rows, cols;
  friend bool operator==(const MatShape&, const MatShape&) = default;
};

/// Binary parenthesization of a matrix chain. Immutable; copies share nodes.
class McmOrder {
 public:
  McmOrder() = default;
  static McmOrder leaf(MatShape m);
  static McmOrder join(McmOrder left, McmOrder right);

  bool empty() const noexcept { return !node_; }
  bool is_leaf() const noexcept;
  MatShape shape() const;  // leaf only
  const McmOrder& left() const;
  const McmOrder& right() const;

  /// Multiplication cost and result shape of the grouping.
  std::int64_t cost() const;
  MatShape result_shape() const;
  std::size_t matrix_count() const;

  friend bool operator==(const McmOrder& a, const McmOrder& b);

 private:
  struct Node;
  std::shared_ptr<const Node> node_;
};

/// Mid-recursion accumulator: the chain is split into mats[0, split) and
/// mats[split, n); best_* carry the cheapest order found so far.
struct McmState {
  std::size_t split;
  McmOrder best_order;
  std::int64_t best_cost;
  friend bool operator==(const McmState&, const McmState&) = default;
};

struct McmProblem {
  std::vector<MatShape> mats;
  std::optional<McmState> state;  // empty for a top-level problem
  friend bool operator==(const McmProblem&, const McmProblem&) = default;
};

struct MergeSortProblem {
  std::vector<std::int64_t> terms;
  friend bool operator==(const MergeSortProblem&, const MergeSortProblem&) = default;
};

/// Both sides sorted ascending.
struct MergeProblem {
  std::vector<std::int64_t> left, right;
  friend bool operator==(const MergeProblem&, const MergeProblem&) = default;
};

using Problem =
    std::variant<AddProblem, SubProblem, MulProblem, DivProblem, CompareProblem, EqualProblem,
                 LcsProblem, LpsProblem, KnapsackProblem, TernaryAddProblem, TernaryMulProblem,
                 McmProblem, MergeSortProblem, MergeProblem>;

inline Task task_of(const Problem& p) noexcept { return static_cast<Task>(p.index()); }

// ---- answers ---------------------------------------------------------------

struct DivAnswer {
  Number quotient, remainder;
  friend bool operator==(const DivAnswer&, const DivAnswer&) = default;
};

enum class Ordering : std::uint8_t { Lt, Eq, Gt };

struct SubseqAnswer {
  std::string seq;
  std::size_t length() const noexcept { return seq.size(); }
  friend bool operator==(const SubseqAnswer&, const SubseqAnswer&) = default;
};

struct KnapsackAnswer {
  std::vector<KnapsackItem> items;
  std::int64_t value;
  friend bool operator==(const KnapsackAnswer&, const KnapsackAnswer&) = default;
};

struct McmAnswer {
  McmOrder order;
  std::int64_t cost;
  friend bool operator==(const McmAnswer&, const McmAnswer&) = default;
};

struct SortedAnswer {
  std::vector<std::int64_t> terms;
  friend bool operator==(const SortedAnswer&, const SortedAnswer&) = default;
};

using Answer = std::variant<Number, DivAnswer, Ordering, bool, SubseqAnswer, KnapsackAnswer,
                            McmAnswer, SortedAnswer>;

Ordering compare_numbers(const Number& a, const Number& b) noexcept;

// ---- sampling --------------------------------------------------------------

/// Extended log-uniform U_log(alpha, beta, delta) over [alpha, beta).
struct LogUniformParams {
  Number alpha;
  Number beta;
  double delta;
};

/// Throws ConfigError for alpha >= beta, negative alpha, or a non-positive
/// offset at alpha == 0.
void validate(const LogUniformParams& p);

/// Draws r ~ Uniform[log(alpha + delta), log(beta + delta)] and returns
/// floor(exp(r) - delta), clamped into [alpha, beta). Past 2^53 the double
/// only carries ~15 significant digits, so the remaining low-order digits are
/// filled uniformly at random.
Number sample_log_uniform(const LogUniformParams& p, Rng& rng);

/// Difficulty is the digit count for arithmetic tasks, sequence length for
/// LCS/LPS, item count for knapsack, matrix count for MCM and the maximum
/// number of terms for sorting.
Problem sample_problem(Task task, int difficulty, Rng& rng);

/// Reproducible i-th problem of a dataset (independent RNG stream per index).
Problem sample_problem_at(Task task, int difficulty, std::uint64_t seed, std::uint64_t index);

// ---- reference solver ------------------------------------------------------

/// Exact answer computed by textbook (non-recursive) algorithms: bignum
/// arithmetic, DP tables for LCS/LPS/knapsack, interval DP for MCM, std::sort.
/// Tie conventions follow the recursive procedures so answers render
/// identically.
Answer direct_answer(const Problem& p);

/// Human-readable form for diagnostics ("Add(408, 351)").
std::string describe(const Problem& p);

}  // namespace rot
