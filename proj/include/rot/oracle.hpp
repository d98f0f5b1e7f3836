#pragma once

#include <cstddef>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>

#include "rot/context.hpp"
#include "rot/predictor.hpp"

namespace rot {

class OracleParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Ideal model: reads the question at the front of the context, rebuilds
/// the ground-truth context and answers with the next target symbol.
/// Contexts are cached per question.
class OraclePredictor final : public Predictor {
 public:
  explicit OraclePredictor(ThoughtType type, std::size_t max_context = 1u << 30,
                           std::size_t cache_limit = 1u << 20);

  Token next_token(std::span<const Token> context) const override;
  std::vector<Token> predict_all(std::span<const Token> context) const override;
  std::size_t max_context() const override { return max_context_; }

 private:
  std::shared_ptr<const LabeledContext> lookup(std::span<const Token> context) const;
  static Token label(const LabeledContext& gt, std::size_t pos);

  ThoughtType type_;
  std::size_t max_context_;
  std::size_t cache_limit_;
  mutable std::shared_mutex mu_;
  mutable std::unordered_map<std::string, std::shared_ptr<const LabeledContext>> cache_;
};

/// Wraps a model and breaks it on chosen contexts: whenever the context's
/// question is in `broken` and the inner model would say STOP, says GO.
class FaultyPredictor final : public Predictor {
 public:
  FaultyPredictor(const Predictor& inner, std::unordered_set<std::string> broken_questions);

  Token next_token(std::span<const Token> context) const override;
  std::vector<Token> predict_all(std::span<const Token> context) const override;
  std::size_t max_context() const override { return inner_.max_context(); }

 private:
  bool broken(std::span<const Token> context) const;

  const Predictor& inner_;
  std::unordered_set<std::string> broken_;  // seq_key of questions
};

/// The question at the front of a context, through its first '='.
std::span<const Token> leading_question(std::span<const Token> context);

}  // namespace rot
