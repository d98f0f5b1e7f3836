#include "rot/token.hpp"

#include <array>
#include <cctype>

namespace rot {
namespace {

struct Entry {
  std::string_view text;
  TokenKind kind;
};

constexpr std::array<Entry, kVocabSize> kTable{{
    {"PAD", TokenKind::Control},   {"GO", TokenKind::Control},   {"STOP", TokenKind::Control},
    {"THINK", TokenKind::Control}, {"TAIL", TokenKind::Control}, {"0", TokenKind::Digit},
    {"1", TokenKind::Digit},       {"2", TokenKind::Digit},      {"3", TokenKind::Digit},
    {"4", TokenKind::Digit},       {"5", TokenKind::Digit},      {"6", TokenKind::Digit},
    {"7", TokenKind::Digit},       {"8", TokenKind::Digit},      {"9", TokenKind::Digit},
    {"+", TokenKind::Op},          {"-", TokenKind::Op},         {"*", TokenKind::Op},
    {"÷", TokenKind::Op},          {"=", TokenKind::Op},         {"VS", TokenKind::Op},
    {"R", TokenKind::Op},          {",", TokenKind::Op},         {";", TokenKind::Op},
    {"&", TokenKind::Op},          {"@", TokenKind::Op},         {"$", TokenKind::Op},
    {"×", TokenKind::Op},          {"(", TokenKind::Op},         {")", TokenKind::Op},
    {"|", TokenKind::Op},          {"LCS", TokenKind::Op},       {"LPS", TokenKind::Op},
    {"KNAPSACK", TokenKind::Op},   {"MCM", TokenKind::Op},       {"SORT", TokenKind::Op},
    {"MERGE", TokenKind::Op},      {"ACC", TokenKind::Op},       {"EQUAL", TokenKind::Op},
    {"TRUE", TokenKind::Op},       {"FALSE", TokenKind::Op},     {"LT", TokenKind::Op},
    {"EQ", TokenKind::Op},         {"GT", TokenKind::Op},
}};

bool is_word(std::string_view text) {
  return !text.empty() && std::isalpha(static_cast<unsigned char>(text.front()));
}

}  // namespace

Token token_from_id(int id) {
  if (id < 0 || id >= static_cast<int>(kVocabSize)) {
    throw TokenError("token id out of range: " + std::to_string(id));
  }
  return static_cast<Token>(id);
}

TokenKind token_kind(Token t) noexcept { return kTable[token_id(t)].kind; }

std::string_view token_text(Token t) noexcept { return kTable[token_id(t)].text; }

Token token_from_text(std::string_view text) {
  for (std::size_t i = 0; i < kTable.size(); ++i) {
    if (kTable[i].text == text) return static_cast<Token>(i);
  }
  throw TokenError("unknown token text: '" + std::string(text) + "'");
}

TokenSeq tokenize(std::string_view text) {
  TokenSeq out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    if (std::isspace(static_cast<unsigned char>(text[pos]))) {
      ++pos;
      continue;
    }
    std::size_t best_len = 0;
    int best = -1;
    for (std::size_t i = 0; i < kTable.size(); ++i) {
      auto t = kTable[i].text;
      if (t.size() > best_len && text.substr(pos, t.size()) == t) {
        best_len = t.size();
        best = static_cast<int>(i);
      }
    }
    if (best < 0) {
      throw TokenError("cannot tokenize at offset " + std::to_string(pos) + ": '" +
                       std::string(text.substr(pos, 8)) + "'");
    }
    out.push_back(static_cast<Token>(best));
    pos += best_len;
  }
  return out;
}

std::string to_text(std::span<const Token> ts) {
  std::string s;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (i) s += ' ';
    s += token_text(ts[i]);
  }
  return s;
}

std::string to_compact_text(std::span<const Token> ts) {
  std::string s;
  bool prev_word = false;
  for (Token t : ts) {
    auto text = token_text(t);
    bool word = is_word(text);
    if (!s.empty() && (word || prev_word)) s += ' ';
    s += text;
    prev_word = word;
  }
  return s;
}

std::string seq_key(std::span<const Token> ts) {
  std::string key(ts.size(), '\0');
  for (std::size_t i = 0; i < ts.size(); ++i) key[i] = static_cast<char>(ts[i]);
  return key;
}

}  // namespace rot
