#include "rot/engine.hpp"

#include <optional>
#include <unordered_map>

#include <json.hpp>

namespace rot {

std::vector<Token> Predictor::predict_all(std::span<const Token> context) const {
  std::vector<Token> out(context.size());
  for (std::size_t i = 0; i < context.size(); ++i) out[i] = next_token(context.first(i + 1));
  return out;
}

void validate(const InferenceLimits& l) {
  if (l.max_context_tokens == 0 || l.max_depth == 0 || l.max_total_tokens == 0) {
    throw std::invalid_argument("inference limits must be positive");
  }
}

const char* kind_name(InferenceError::Kind k) noexcept {
  switch (k) {
    case InferenceError::Kind::ContextOverflow: return "ContextOverflow";
    case InferenceError::Kind::DepthExceeded: return "DepthExceeded";
    case InferenceError::Kind::BudgetExceeded: return "BudgetExceeded";
    case InferenceError::Kind::ProtocolViolation: return "ProtocolViolation";
  }
  return "?";
}

namespace {

using Kind = InferenceError::Kind;

[[noreturn]] void fail(Kind k, const std::string& msg) {
  throw InferenceError(k, std::string(kind_name(k)) + ": " + msg);
}

struct Frame {
  TokenSeq x;
  std::size_t i_ans;               // start of the current answer segment
  std::optional<std::size_t> i_go; // last GO/TAIL emitted in this context
  bool tail = false;
  std::size_t depth = 0;
  std::size_t id = 0;
  std::vector<std::string> keys;   // questions this frame answers (tail chains share one answer)
};

class Runner {
 public:
  Runner(const Predictor& model, const InferenceLimits& limits) : model_(model), lim_(limits) {}

  InferenceResult run(const TokenSeq& q) {
    if (q.empty() || q.front() != Token::Go) fail(Kind::ProtocolViolation, "question must start with GO");
    if (q.size() > lim_.max_context_tokens) fail(Kind::ContextOverflow, "question longer than context limit");
    open(q, 0, {});

    for (;;) {
      Frame& f = stack_.back();
      if (trace_.tokens_generated + trace_.think_count >= lim_.max_total_tokens) {
        fail(Kind::BudgetExceeded, "token budget of " + std::to_string(lim_.max_total_tokens) + " spent");
      }
      const Token t = model_.next_token(f.x);
      if (t == Token::Pad) fail(Kind::ProtocolViolation, "model emitted PAD in " + to_text(f.x));
      append(f, t);

      switch (t) {
        case Token::Think: {
          ++trace_.think_count;
          if (!f.i_go) fail(Kind::ProtocolViolation, "THINK without GO in " + to_text(f.x));
          TokenSeq sub(f.x.begin() + static_cast<std::ptrdiff_t>(*f.i_go), f.x.end() - 1);
          sub.front() = Token::Go;
          const bool tail = f.tail;
          f.i_go.reset();
          f.tail = false;
          if (lim_.memoize) {
            if (auto it = memo_.find(seq_key(sub)); it != memo_.end()) {
              ++trace_.memo_hits;
              if (tail) {
                if (finish(it->second)) return result(it->second);
              } else {
                splice(f, it->second);
              }
              break;
            }
          }
          if (tail) {
            // Trampoline: the child takes over this frame's slot and depth.
            auto keys = std::move(f.keys);
            const auto depth = f.depth;
            record(f);
            stack_.pop_back();
            open(std::move(sub), depth, std::move(keys));
          } else {
            if (f.depth + 1 > lim_.max_depth) {
              fail(Kind::DepthExceeded, "depth " + std::to_string(f.depth + 1) + " > " +
                                            std::to_string(lim_.max_depth));
            }
            open(std::move(sub), f.depth + 1, {});
          }
          break;
        }
        case Token::Stop: {
          ++trace_.tokens_generated;
          TokenSeq answer(f.x.begin() + static_cast<std::ptrdiff_t>(f.i_ans), f.x.end());
          if (finish(answer)) return result(std::move(answer));
          break;
        }
        case Token::Go:
        case Token::Tail:
          ++trace_.tokens_generated;
          f.i_go = f.x.size() - 1;
          f.tail = t == Token::Tail;
          break;
        default:
          ++trace_.tokens_generated;
      }
    }
  }

 private:
  void open(TokenSeq q, std::size_t depth, std::vector<std::string> keys) {
    keys.push_back(seq_key(q));
    Frame f{std::move(q), 0, std::nullopt, false, depth, trace_.contexts_created++, std::move(keys)};
    f.i_ans = f.x.size();
    trace_.max_depth = std::max(trace_.max_depth, depth);
    stack_.push_back(std::move(f));
  }

  void append(Frame& f, Token t) {
    if (f.x.size() + 1 > lim_.max_context_tokens) {
      fail(Kind::ContextOverflow, "context " + std::to_string(f.id) + " exceeds " +
                                      std::to_string(lim_.max_context_tokens) + " tokens");
    }
    f.x.push_back(t);
  }

  // Replace the trailing THINK with the sub-answer.
  void splice(Frame& f, const TokenSeq& answer) {
    f.x.pop_back();
    if (f.x.size() + answer.size() > lim_.max_context_tokens) {
      fail(Kind::ContextOverflow, "sub-answer overflows context " + std::to_string(f.id));
    }
    f.x.insert(f.x.end(), answer.begin(), answer.end());
    f.i_ans = f.x.size();
  }

  // Pops the top frame with `answer`; true when that was the root.
  bool finish(const TokenSeq& answer) {
    Frame& f = stack_.back();
    if (lim_.memoize) {
      for (auto& k : f.keys) memo_.emplace(std::move(k), answer);
    }
    record(f);
    stack_.pop_back();
    if (stack_.empty()) return true;
    splice(stack_.back(), answer);
    return false;
  }

  void record(const Frame& f) {
    if (f.id >= lim_.max_transcripts) return;
    if (transcripts_.size() <= f.id) transcripts_.resize(f.id + 1);
    transcripts_[f.id] = ContextTranscript{f.id, f.depth, f.x};
  }

  InferenceResult result(TokenSeq answer) {
    for (auto& t : transcripts_) {
      if (t) trace_.transcripts.push_back(std::move(*t));
    }
    return {std::move(answer), std::move(trace_)};
  }

  const Predictor& model_;
  const InferenceLimits& lim_;
  std::vector<Frame> stack_;
  RotTrace trace_;
  std::vector<std::optional<ContextTranscript>> transcripts_;
  std::unordered_map<std::string, TokenSeq> memo_;
};

}  // namespace

InferenceResult rot_infer(const Predictor& model, const TokenSeq& q, const InferenceLimits& limits) {
  validate(limits);
  return Runner(model, limits).run(q);
}

InferenceResult flat_infer(const Predictor& model, const TokenSeq& q, const InferenceLimits& limits) {
  validate(limits);
  if (q.empty() || q.front() != Token::Go) fail(Kind::ProtocolViolation, "question must start with GO");
  TokenSeq x = q;
  RotTrace trace;
  trace.contexts_created = 1;
  int open = 1;  // a TAIL question replaces its parent, so only GO nests
  std::size_t answer_start = q.size();
  while (open > 0) {
    if (trace.tokens_generated >= limits.max_total_tokens) fail(Kind::BudgetExceeded, "token budget spent");
    if (x.size() + 1 > limits.max_context_tokens) {
      fail(Kind::ContextOverflow, "context exceeds " + std::to_string(limits.max_context_tokens) + " tokens");
    }
    const Token t = model.next_token(x);
    if (t == Token::Pad || t == Token::Think) {
      fail(Kind::ProtocolViolation, std::string("model emitted ") + std::string(token_text(t)));
    }
    x.push_back(t);
    ++trace.tokens_generated;
    if (t == Token::Go) ++open;
    if (t == Token::Stop && --open == 0) break;
    // The final answer follows the last '=' or STOP.
    if (t == Token::Equals || t == Token::Stop) answer_start = x.size();
  }
  TokenSeq answer(x.begin() + static_cast<std::ptrdiff_t>(answer_start), x.end());
  if (limits.max_transcripts > 0) trace.transcripts.push_back({0, 0, std::move(x)});
  return {std::move(answer), std::move(trace)};
}

std::string trace_json(const RotTrace& trace) {
  nlohmann::ordered_json j;
  j["contexts_created"] = trace.contexts_created;
  j["max_depth"] = trace.max_depth;
  j["tokens_generated"] = trace.tokens_generated;
  j["think_count"] = trace.think_count;
  j["memo_hits"] = trace.memo_hits;
  auto& arr = j["contexts"] = nlohmann::ordered_json::array();
  for (const auto& t : trace.transcripts) {
    arr.push_back({{"id", t.id}, {"depth", t.depth}, {"tokens", to_text(t.tokens)}});
  }
  return j.dump(2);
}

}  // namespace rot
