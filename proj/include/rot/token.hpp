#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rot {

/// Vocabulary symbol. The underlying value is the stable integer id used in
/// serialized datasets and model embeddings; never reorder.
enum class Token : std::uint8_t {
  // control
  Pad = 0,
  Go,
  Stop,
  Think,
  Tail,
  // digits
  D0,
  D1,
  D2,
  D3,
  D4,
  D5,
  D6,
  D7,
  D8,
  D9,
  // operators and separators
  Plus,
  Minus,
  Star,
  Divide,
  Equals,
  Vs,
  R,
  Comma,
  Semicolon,
  Amp,
  At,
  Dollar,
  Cross,
  LParen,
  RParen,
  Bar,
  // word markers
  Lcs,
  Lps,
  Knapsack,
  Mcm,
  Sort,
  Merge,
  Acc,
  Equal,
  True,
  False,
  Lt,
  Eq,
  Gt,
};

inline constexpr std::size_t kVocabSize = static_cast<std::size_t>(Token::Gt) + 1;

enum class TokenKind { Digit, Op, Control };

using TokenSeq = std::vector<Token>;

class TokenError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

constexpr int token_id(Token t) noexcept { return static_cast<int>(t); }
Token token_from_id(int id);

TokenKind token_kind(Token t) noexcept;
std::string_view token_text(Token t) noexcept;

/// Looks up a token by its exact text form. Throws TokenError when unknown.
Token token_from_text(std::string_view text);

constexpr bool is_digit(Token t) noexcept { return t >= Token::D0 && t <= Token::D9; }
constexpr int digit_value(Token t) noexcept { return token_id(t) - token_id(Token::D0); }
constexpr Token digit_token(int d) noexcept {
  return static_cast<Token>(token_id(Token::D0) + d);
}

/// Tokenizes compact text such as "GO 408+351=" by greedy longest match over
/// the vocabulary's text forms. Whitespace is ignored.
TokenSeq tokenize(std::string_view text);

/// Space-separated text forms, e.g. "GO 4 0 8 + 3 5 1 =".
std::string to_text(std::span<const Token> ts);

/// Compact form without spaces between digits/symbols; word tokens are
/// padded with spaces so the result re-tokenizes to the same sequence.
std::string to_compact_text(std::span<const Token> ts);

/// Canonical key for hashing/dedup (one byte per token).
std::string seq_key(std::span<const Token> ts);

}  // namespace rot
