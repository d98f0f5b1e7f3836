#pragma once

#include <span>
#include <vector>

#include "rot/problem.hpp"

namespace rot {

enum class RecursionType : std::uint8_t { Regular, Tail };

/// A direct subproblem of a problem.
struct Thought {
  Problem problem;
  RecursionType type = RecursionType::Regular;
};

/// Direct subproblems of `p` in context order; empty for base cases. At most
/// one tail thought, always last.
std::vector<Thought> thought(const Problem& p);

/// Answer of `p` assembled from the answers of its thoughts (in order), the
/// way a model writes the final answer segment of a context.
Answer combine_answer(const Problem& p, std::span<const Answer> sub_answers);

class RecursionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Answer obtained by expanding thought() recursively and combining
/// sub-answers bottom-up. Runs on an explicit, memoized work stack; throws
/// RecursionError if the stack grows past `max_depth`.
Answer recursive_answer(const Problem& p, std::size_t max_depth = 10'000);

}  // namespace rot
