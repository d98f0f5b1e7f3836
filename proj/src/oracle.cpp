#include "rot/oracle.hpp"

#include <algorithm>

#include "rot/render.hpp"

namespace rot {

std::span<const Token> leading_question(std::span<const Token> context) {
  auto eq = std::find(context.begin(), context.end(), Token::Equals);
  if (eq == context.end()) return {};
  return context.first(static_cast<std::size_t>(eq - context.begin()) + 1);
}

OraclePredictor::OraclePredictor(ThoughtType type, std::size_t max_context, std::size_t cache_limit)
    : type_(type), max_context_(max_context), cache_limit_(cache_limit) {}

std::shared_ptr<const LabeledContext> OraclePredictor::lookup(std::span<const Token> context) const {
  auto q = leading_question(context);
  if (q.empty()) throw OracleParseError("no complete question in '" + to_text(context) + "'");
  auto key = seq_key(q);
  {
    std::shared_lock lock(mu_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  }

  Problem p;
  try {
    p = parse_question(q);
  } catch (const ParseError& e) {
    throw OracleParseError(e.what());
  }
  LabeledContext gt;
  if (type_ == ThoughtType::Rot) {
    auto c = build_context(p);
    gt = {render(c), build_target(c)};
  } else {
    gt = std::move(labeled_contexts(p, type_).front());
  }
  auto entry = std::make_shared<const LabeledContext>(std::move(gt));

  std::unique_lock lock(mu_);
  if (cache_.size() >= cache_limit_) cache_.clear();
  return cache_.emplace(std::move(key), std::move(entry)).first->second;
}

// Token that follows gt.context[0..pos).
Token OraclePredictor::label(const LabeledContext& gt, std::size_t pos) {
  if (pos >= gt.context.size()) return Token::Pad;
  return gt.target[pos] != Token::Pad ? gt.target[pos] : gt.context[pos];
}

Token OraclePredictor::next_token(std::span<const Token> context) const {
  auto gt = lookup(context);
  if (context.size() > gt->context.size() ||
      !std::equal(context.begin(), context.end(), gt->context.begin())) {
    throw OracleParseError("context left the ground truth: '" + to_text(context) + "'");
  }
  return label(*gt, context.size());
}

std::vector<Token> OraclePredictor::predict_all(std::span<const Token> context) const {
  std::vector<Token> out(context.size(), Token::Pad);
  if (leading_question(context).empty()) return out;
  auto gt = lookup(context);
  // Teacher forcing only needs agreement up to each position; past the first
  // divergence there is no ground truth to follow.
  for (std::size_t i = 0; i < context.size(); ++i) {
    if (i >= gt->context.size() || context[i] != gt->context[i]) break;
    out[i] = label(*gt, i + 1);
  }
  return out;
}

FaultyPredictor::FaultyPredictor(const Predictor& inner, std::unordered_set<std::string> broken)
    : inner_(inner), broken_(std::move(broken)) {}

bool FaultyPredictor::broken(std::span<const Token> context) const {
  auto q = leading_question(context);
  if (q.empty()) return false;
  TokenSeq norm(q.begin(), q.end());
  norm.front() = Token::Go;
  return broken_.contains(seq_key(norm));
}

Token FaultyPredictor::next_token(std::span<const Token> context) const {
  Token t = inner_.next_token(context);
  return t == Token::Stop && broken(context) ? Token::Go : t;
}

std::vector<Token> FaultyPredictor::predict_all(std::span<const Token> context) const {
  auto out = inner_.predict_all(context);
  if (broken(context)) std::replace(out.begin(), out.end(), Token::Stop, Token::Go);
  return out;
}

}  // namespace rot
