#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "rot/token.hpp"

namespace rot {

/// Greedy next-token model. Implementations must be safe to call from
/// several threads at once.
class Predictor {
 public:
  virtual ~Predictor() = default;

  virtual Token next_token(std::span<const Token> context) const = 0;

  /// Prediction after every prefix: out[i] is the token that follows
  /// context[0..i]. The default calls next_token once per prefix.
  virtual std::vector<Token> predict_all(std::span<const Token> context) const;

  virtual std::size_t max_context() const = 0;
};

}  // namespace rot
