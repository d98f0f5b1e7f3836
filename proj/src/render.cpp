#include "rot/render.hpp"

#include <string>

namespace rot {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void append_digits(TokenSeq& out, const std::string& s) {
  for (char c : s) out.push_back(digit_token(c - '0'));
}

void append_int(TokenSeq& out, std::int64_t v) { append_number(out, Number(v)); }

void append_terms(TokenSeq& out, const std::vector<std::int64_t>& terms) {
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (i) out.push_back(Token::Comma);
    append_int(out, terms[i]);
  }
}

void append_shape(TokenSeq& out, MatShape m) {
  append_int(out, m.rows);
  out.push_back(Token::Cross);
  append_int(out, m.cols);
}

void append_shapes(TokenSeq& out, const std::vector<MatShape>& mats, std::size_t from,
                   std::size_t to) {
  for (std::size_t i = from; i < to; ++i) {
    if (i > from) out.push_back(Token::Comma);
    append_shape(out, mats[i]);
  }
}

void append_grouped(TokenSeq& out, const McmOrder& o) {
  if (o.is_leaf()) {
    append_shape(out, o.shape());
  } else {
    out.push_back(Token::LParen);
    append_mcm_order(out, o);
    out.push_back(Token::RParen);
  }
}

void append_item(TokenSeq& out, const KnapsackItem& it) {
  append_int(out, it.value);
  out.push_back(Token::Amp);
  append_int(out, it.weight);
}

}  // namespace

void append_mcm_order(TokenSeq& out, const McmOrder& order) {
  if (order.is_leaf()) {
    append_shape(out, order.shape());
    return;
  }
  append_grouped(out, order.left());
  out.push_back(Token::Comma);
  append_grouped(out, order.right());
}

TokenSeq render_question(const Problem& problem) {
  TokenSeq q{Token::Go};
  auto binary = [&q](const Number& a, Token op, const Number& b) {
    append_number(q, a);
    q.push_back(op);
    append_number(q, b);
  };
  std::visit(
      overloaded{
          [&](const AddProblem& p) { binary(p.left, Token::Plus, p.right); },
          [&](const SubProblem& p) { binary(p.left, Token::Minus, p.right); },
          [&](const MulProblem& p) { binary(p.left, Token::Star, p.right); },
          [&](const DivProblem& p) { binary(p.left, Token::Divide, p.right); },
          [&](const CompareProblem& p) { binary(p.left, Token::Vs, p.right); },
          [&](const EqualProblem& p) {
            q.push_back(Token::Equal);
            q.push_back(digit_token(p.left));
            q.push_back(Token::Comma);
            q.push_back(digit_token(p.right));
          },
          [&](const LcsProblem& p) {
            append_digits(q, p.left);
            q.push_back(Token::Lcs);
            append_digits(q, p.right);
          },
          [&](const LpsProblem& p) {
            q.push_back(Token::Lps);
            append_digits(q, p.seq);
          },
          [&](const KnapsackProblem& p) {
            q.push_back(Token::Knapsack);
            for (std::size_t i = 0; i < p.items.size(); ++i) {
              if (i) q.push_back(Token::Comma);
              append_item(q, p.items[i]);
            }
            q.push_back(Token::At);
            append_int(q, p.capacity);
          },
          [&](const TernaryAddProblem& p) {
            binary(p.a1, Token::Plus, p.a2);
            q.push_back(Token::Plus);
            append_number(q, p.a3);
          },
          [&](const TernaryMulProblem& p) {
            binary(p.a1, Token::Star, p.a2);
            q.push_back(Token::Star);
            append_number(q, p.a3);
          },
          [&](const McmProblem& p) {
            q.push_back(Token::Mcm);
            if (!p.state) {
              append_shapes(q, p.mats, 0, p.mats.size());
              return;
            }
            append_shapes(q, p.mats, 0, p.state->split);
            q.push_back(Token::Bar);
            append_shapes(q, p.mats, p.state->split, p.mats.size());
            q.push_back(Token::Acc);
            append_mcm_order(q, p.state->best_order);
            q.push_back(Token::Semicolon);
            append_int(q, p.state->best_cost);
          },
          [&](const MergeSortProblem& p) {
            q.push_back(Token::Sort);
            append_terms(q, p.terms);
          },
          [&](const MergeProblem& p) {
            q.push_back(Token::Merge);
            append_terms(q, p.left);
            q.push_back(Token::Bar);
            append_terms(q, p.right);
          },
      },
      problem);
  q.push_back(Token::Equals);
  return q;
}

TokenSeq render_answer(const Answer& answer) {
  TokenSeq a;
  std::visit(overloaded{
                 [&](const Number& n) { append_number(a, n); },
                 [&](const DivAnswer& d) {
                   append_number(a, d.quotient);
                   a.push_back(Token::R);
                   append_number(a, d.remainder);
                 },
                 [&](Ordering o) {
                   a.push_back(o == Ordering::Lt ? Token::Lt
                               : o == Ordering::Eq ? Token::Eq
                                                   : Token::Gt);
                 },
                 [&](bool b) { a.push_back(b ? Token::True : Token::False); },
                 [&](const SubseqAnswer& s) {
                   append_digits(a, s.seq);
                   a.push_back(Token::Semicolon);
                   append_int(a, static_cast<std::int64_t>(s.length()));
                 },
                 [&](const KnapsackAnswer& k) {
                   for (std::size_t i = 0; i < k.items.size(); ++i) {
                     if (i) a.push_back(Token::Comma);
                     append_item(a, k.items[i]);
                   }
                   a.push_back(Token::Dollar);
                   append_int(a, k.value);
                 },
                 [&](const McmAnswer& m) {
                   append_mcm_order(a, m.order);
                   a.push_back(Token::Semicolon);
                   append_int(a, m.cost);
                 },
                 [&](const SortedAnswer& s) { append_terms(a, s.terms); },
             },
             answer);
  a.push_back(Token::Stop);
  return a;
}

TokenSeq render_answer(const Problem& p) { return render_answer(direct_answer(p)); }

// ---- parsing ---------------------------------------------------------------

namespace {

class Cursor {
 public:
  explicit Cursor(std::span<const Token> ts) : ts_(ts) {}

  bool done() const { return pos_ >= ts_.size(); }
  Token peek() const { return done() ? Token::Pad : ts_[pos_]; }
  bool accept(Token t) {
    if (!done() && ts_[pos_] == t) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(Token t) {
    if (!accept(t)) {
      fail("expected '" + std::string(token_text(t)) + "'");
    }
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(what + " at position " + std::to_string(pos_) + " in '" + to_text(ts_) +
                     "'");
  }

  std::string digit_run() {
    std::string s;
    while (!done() && is_digit(ts_[pos_])) s.push_back(static_cast<char>('0' + digit_value(ts_[pos_++])));
    return s;
  }
  Number number() {
    auto s = digit_run();
    if (s.empty()) fail("expected a number");
    return parse_decimal(s);
  }
  std::int64_t small_int() {
    auto s = digit_run();
    if (s.empty()) fail("expected a number");
    if (s.size() > 18) fail("number too large");
    return std::stoll(s);
  }
  int digit() {
    if (done() || !is_digit(ts_[pos_])) fail("expected a digit");
    return digit_value(ts_[pos_++]);
  }
  std::vector<std::int64_t> terms() {
    std::vector<std::int64_t> v;
    if (!is_digit(peek())) return v;
    v.push_back(small_int());
    while (accept(Token::Comma)) v.push_back(small_int());
    return v;
  }
  MatShape shape() {
    MatShape m{};
    m.rows = small_int();
    expect(Token::Cross);
    m.cols = small_int();
    return m;
  }
  std::vector<MatShape> shapes() {
    std::vector<MatShape> v{shape()};
    while (accept(Token::Comma)) v.push_back(shape());
    return v;
  }
  McmOrder grouped() {
    if (accept(Token::LParen)) {
      auto o = order();
      if (o.is_leaf()) fail("parenthesized single matrix");
      expect(Token::RParen);
      return o;
    }
    return McmOrder::leaf(shape());
  }
  McmOrder order() {
    auto left = grouped();
    if (!accept(Token::Comma)) return left;
    auto right = grouped();
    return McmOrder::join(std::move(left), std::move(right));
  }
  KnapsackItem item() {
    KnapsackItem it{};
    it.value = small_int();
    expect(Token::Amp);
    it.weight = small_int();
    return it;
  }

 private:
  std::span<const Token> ts_;
  std::size_t pos_ = 0;
};

Problem parse_question_body(Cursor& c) {
  switch (c.peek()) {
    case Token::Lcs: {
      c.expect(Token::Lcs);
      return LcsProblem{"", c.digit_run()};
    }
    case Token::Lps:
      c.expect(Token::Lps);
      return LpsProblem{c.digit_run()};
    case Token::Equal: {
      c.expect(Token::Equal);
      EqualProblem e{};
      e.left = c.digit();
      c.expect(Token::Comma);
      e.right = c.digit();
      return e;
    }
    case Token::Knapsack: {
      c.expect(Token::Knapsack);
      KnapsackProblem k;
      k.items.push_back(c.item());
      while (c.accept(Token::Comma)) k.items.push_back(c.item());
      c.expect(Token::At);
      k.capacity = c.small_int();
      return k;
    }
    case Token::Mcm: {
      c.expect(Token::Mcm);
      McmProblem m;
      m.mats = c.shapes();
      if (c.accept(Token::Bar)) {
        McmState st{m.mats.size(), {}, 0};
        auto right = c.shapes();
        m.mats.insert(m.mats.end(), right.begin(), right.end());
        c.expect(Token::Acc);
        st.best_order = c.order();
        c.expect(Token::Semicolon);
        st.best_cost = c.small_int();
        m.state = std::move(st);
      }
      return m;
    }
    case Token::Sort:
      c.expect(Token::Sort);
      return MergeSortProblem{c.terms()};
    case Token::Merge: {
      c.expect(Token::Merge);
      MergeProblem m;
      m.left = c.terms();
      c.expect(Token::Bar);
      m.right = c.terms();
      return m;
    }
    default:
      break;
  }

  const std::string lhs = c.digit_run();
  if (lhs.empty()) c.fail("unrecognized question");
  if (c.accept(Token::Lcs)) return LcsProblem{lhs, c.digit_run()};
  const Number a = parse_decimal(lhs);
  if (c.accept(Token::Plus)) {
    Number b = c.number();
    if (c.accept(Token::Plus)) return TernaryAddProblem{a, b, c.number()};
    return AddProblem{a, b};
  }
  if (c.accept(Token::Star)) {
    Number b = c.number();
    if (c.accept(Token::Star)) return TernaryMulProblem{a, b, c.number()};
    return MulProblem{a, b};
  }
  if (c.accept(Token::Minus)) return SubProblem{a, c.number()};
  if (c.accept(Token::Divide)) return DivProblem{a, c.number()};
  if (c.accept(Token::Vs)) return CompareProblem{a, c.number()};
  c.fail("unknown operator");
}

}  // namespace

Problem parse_question(std::span<const Token> q) {
  Cursor c(q);
  if (!c.accept(Token::Go) && !c.accept(Token::Tail)) c.fail("question must start with GO or TAIL");
  Problem p = parse_question_body(c);
  c.expect(Token::Equals);
  if (!c.done()) c.fail("trailing tokens after '='");
  return p;
}

Answer parse_answer(Task task, std::span<const Token> a) {
  Cursor c(a);
  Answer out;
  switch (task) {
    case Task::Add:
    case Task::Sub:
    case Task::Mul:
    case Task::TernaryAdd:
    case Task::TernaryMul:
      out = c.number();
      break;
    case Task::Div: {
      DivAnswer d;
      d.quotient = c.number();
      c.expect(Token::R);
      d.remainder = c.number();
      out = d;
      break;
    }
    case Task::Compare:
      if (c.accept(Token::Lt)) out = Ordering::Lt;
      else if (c.accept(Token::Eq)) out = Ordering::Eq;
      else if (c.accept(Token::Gt)) out = Ordering::Gt;
      else c.fail("expected LT/EQ/GT");
      break;
    case Task::Equal:
      if (c.accept(Token::True)) out = true;
      else if (c.accept(Token::False)) out = false;
      else c.fail("expected TRUE/FALSE");
      break;
    case Task::Lcs:
    case Task::Lps: {
      SubseqAnswer s{c.digit_run()};
      c.expect(Token::Semicolon);
      if (c.small_int() != static_cast<std::int64_t>(s.length())) c.fail("length mismatch");
      out = s;
      break;
    }
    case Task::Knapsack: {
      KnapsackAnswer k{{}, 0};
      if (is_digit(c.peek())) {
        k.items.push_back(c.item());
        while (c.accept(Token::Comma)) k.items.push_back(c.item());
      }
      c.expect(Token::Dollar);
      k.value = c.small_int();
      out = k;
      break;
    }
    case Task::Mcm: {
      McmAnswer m{c.order(), 0};
      c.expect(Token::Semicolon);
      m.cost = c.small_int();
      out = m;
      break;
    }
    case Task::MergeSort:
    case Task::Merge:
      out = SortedAnswer{c.terms()};
      break;
  }
  c.expect(Token::Stop);
  if (!c.done()) c.fail("trailing tokens after STOP");
  return out;
}

}  // namespace rot
