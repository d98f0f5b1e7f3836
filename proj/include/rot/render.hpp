#pragma once

#include <span>

#include "rot/problem.hpp"
#include "rot/token.hpp"

namespace rot {

/// Question tokens, always led by GO and closed by '='. Forms:
///   GO a+b=   GO a-b=   GO a*b=   GO a÷b=   GO a VS b=   GO EQUAL x,y=
///   GO l LCS r=   GO LPS s=   GO KNAPSACK v&w,...@cap=   GO a+b+c=   GO a*b*c=
///   GO MCM r×c,...=   GO MCM left | right ACC order;cost=   GO SORT t,...=
///   GO MERGE l,... | r,...=
TokenSeq render_question(const Problem& p);

/// Answer tokens ending in STOP: digits, q R r, LT/EQ/GT, TRUE/FALSE,
/// seq;len, items$value, order;cost, or a comma-separated sorted list.
TokenSeq render_answer(const Answer& a);
TokenSeq render_answer(const Problem& p);

/// MCM grouping without the outer parentheses: "4×2,(2×8,8×3)".
void append_mcm_order(TokenSeq& out, const McmOrder& order);

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inverse of render_question. A leading TAIL is accepted in place of GO.
/// Throws ParseError.
Problem parse_question(std::span<const Token> q);

/// Inverse of render_answer for the given task; the trailing STOP is required.
Answer parse_answer(Task task, std::span<const Token> a);

}  // namespace rot
