#include "rot/number.hpp"

namespace rot {

void append_number(TokenSeq& out, const Number& n) {
  if (n < 0) throw TokenError("cannot render a negative number");
  for (char c : n.str()) out.push_back(digit_token(c - '0'));
}

TokenSeq render_number(const Number& n) {
  TokenSeq out;
  append_number(out, n);
  return out;
}

Number parse_number(std::span<const Token> ts) {
  if (ts.empty()) throw TokenError("empty digit run");
  Number n = 0;
  for (Token t : ts) {
    if (!is_digit(t)) {
      throw TokenError("non-digit token in number: " + std::string(token_text(t)));
    }
    n = n * 10 + digit_value(t);
  }
  return n;
}

Number parse_decimal(std::string_view digits) {
  if (digits.empty()) throw TokenError("empty digit string");
  Number n = 0;
  for (char c : digits) {
    if (c < '0' || c > '9') throw TokenError("non-digit character in number: " + std::string(1, c));
    n = n * 10 + (c - '0');
  }
  return n;
}

std::size_t digit_count(const Number& n) { return n.str().size(); }

Number pow10(unsigned k) {
  Number p = 1;
  for (unsigned i = 0; i < k; ++i) p *= 10;
  return p;
}

}  // namespace rot
