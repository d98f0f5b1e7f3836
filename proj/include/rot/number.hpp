#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <span>
#include <string_view>
#include <string>

#include "rot/token.hpp"

namespace rot {

/// Arbitrary-precision non-negative integer. Operands go well past 64 bits
/// (32-digit multiplication has 64-digit products).
using Number = boost::multiprecision::cpp_int;

/// Most-significant digit first, no leading zeros; zero is the single digit 0.
TokenSeq render_number(const Number& n);
void append_number(TokenSeq& out, const Number& n);

/// Inverse of render_number. Leading zeros are accepted. Throws TokenError on
/// an empty run or a non-digit token.
Number parse_number(std::span<const Token> ts);

/// Base-10 digits only; leading zeros are not an octal prefix.
Number parse_decimal(std::string_view digits);

inline std::string to_string(const Number& n) { return n.str(); }

/// Number of decimal digits (1 for zero).
std::size_t digit_count(const Number& n);

/// 10^k.
Number pow10(unsigned k);

}  // namespace rot
