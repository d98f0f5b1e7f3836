#include "rot/exporter.hpp"

#include <cctype>

#include <json.hpp>

#include "rot/render.hpp"

namespace rot {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// Lower-cased spellings, built once. Symbols like "×" are left alone by
// tolower since their bytes are all >= 0x80.
const std::vector<std::string>& words() {
  static const std::vector<std::string> w = [] {
    std::vector<std::string> v;
    for (std::size_t i = 0; i < kVocabSize; ++i) v.push_back(lower(token_text(token_from_id(static_cast<int>(i)))));
    return v;
  }();
  return w;
}

}  // namespace

std::string_view export_word(Token t) noexcept { return words()[static_cast<std::size_t>(token_id(t))]; }

std::string export_text(std::span<const Token> ts) {
  std::string s;
  for (Token t : ts) {
    s += ' ';
    s += export_word(t);
  }
  return s;
}

TokenSeq parse_export_text(std::string_view text) {
  TokenSeq out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] != ' ') throw ExportError("expected a space before each token at byte " + std::to_string(i));
    const auto end = std::min(text.find(' ', i + 1), text.size());
    const auto word = text.substr(i + 1, end - i - 1);
    bool found = false;
    for (std::size_t k = 0; k < kVocabSize && !found; ++k) {
      if (words()[k] == word) {
        out.push_back(token_from_id(static_cast<int>(k)));
        found = true;
      }
    }
    if (!found) throw ExportError("unknown word '" + std::string(word) + "'");
    i = end;
  }
  return out;
}

std::vector<PromptCompletion> derive_prompt_completions(std::span<const Token> context,
                                                        std::span<const Token> target) {
  if (context.size() != target.size()) throw ExportError("context and target lengths differ");
  std::vector<PromptCompletion> out;
  std::size_t start = context.size();  // no open segment
  for (std::size_t i = 0; i < target.size(); ++i) {
    if (target[i] == Token::Pad) continue;
    if (start == context.size()) start = i;
    if (target[i] == Token::Think || target[i] == Token::Stop) {
      out.push_back({export_text(context.first(start)), export_text(target.subspan(start, i + 1 - start))});
      start = context.size();
    }
  }
  if (start != context.size()) throw ExportError("target ends inside a segment");
  return out;
}

std::string jsonl_line(const PromptCompletion& r) {
  return "{\"prompt\": " + nlohmann::json(r.prompt).dump() +
         ", \"completion\": " + nlohmann::json(r.completion).dump() + "}";
}

PromptCompletion parse_jsonl_line(std::string_view line) {
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw ExportError(std::string("bad JSON: ") + e.what());
  }
  if (!j.is_object() || j.size() != 2 || j.begin().key() != "prompt" || !j.contains("completion") ||
      !j["prompt"].is_string() || !j["completion"].is_string()) {
    throw ExportError("expected {\"prompt\": string, \"completion\": string}");
  }
  return {j["prompt"].get<std::string>(), j["completion"].get<std::string>()};
}

std::vector<PromptCompletion> export_problem(const Problem& p, ThoughtType type, std::size_t max_cot_tokens) {
  std::vector<PromptCompletion> out;
  for (const auto& lc : labeled_contexts(p, type, max_cot_tokens)) {
    auto rs = derive_prompt_completions(lc.context, lc.target);
    out.insert(out.end(), rs.begin(), rs.end());
  }
  return out;
}

std::string vocabulary_json() {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < kVocabSize; ++i) {
    const Token t = token_from_id(static_cast<int>(i));
    const char* kind = token_kind(t) == TokenKind::Digit ? "digit" : token_kind(t) == TokenKind::Op ? "op" : "control";
    arr.push_back({{"id", i}, {"text", token_text(t)}, {"kind", kind}, {"export", export_word(t)}});
  }
  return arr.dump(2);
}

std::string dataset_line(const Problem& p, int difficulty, std::uint64_t index, ThoughtType type,
                         const LabeledContext& lc) {
  auto texts = [](const TokenSeq& ts) {
    std::vector<std::string_view> v;
    for (Token t : ts) v.push_back(token_text(t));
    return v;
  };
  nlohmann::ordered_json j{{"task", task_name(task_of(p))},
                           {"difficulty", difficulty},
                           {"index", index},
                           {"thought", thought_name(type)},
                           {"question", to_text(render_question(p))},
                           {"context", texts(lc.context)},
                           {"target", texts(lc.target)}};
  return j.dump();
}

std::string sampler_description(Task task) {
  switch (task) {
    case Task::Add:
    case Task::Compare:
    case Task::TernaryAdd: return "operands ~ U_log(0, 10^N, 3)";
    case Task::Sub: return "operands ~ U_log(0, 10^N, 3), swapped so a >= b";
    case Task::Mul:
    case Task::TernaryMul: return "operands ~ U_log(1, 10^N, 3)";
    case Task::Div: return "b ~ U_log(1, 10^N, 3), c ~ U_log(0, 10^N / b, 3), r ~ U_log(0, b, 3), a = b*c + r";
    case Task::Equal: return "two digits uniform in 0-9";
    case Task::Lcs: return "two length-N strings, digits uniform";
    case Task::Lps: return "one length-N string, digits uniform";
    case Task::Knapsack: return "N items, value and weight uniform in [1, 99], capacity uniform in [1, total weight]";
    case Task::Mcm: return "N matrices, dimensions uniform in [1, 99]";
    case Task::MergeSort: return "term count uniform in [2, N], terms ~ U_log(0, 1000, 5)";
    case Task::Merge: return "term count uniform in [2, max(N, 2)], terms ~ U_log(0, 1000, 5), split in halves and sorted";
  }
  return "";
}

}  // namespace rot
