#include <gtest/gtest.h>

#include <fstream>

#include <json.hpp>

#include "rot/exporter.hpp"
#include "rot/render.hpp"

using namespace rot;

namespace {

std::vector<std::string> read_lines(const std::string& name) {
  std::ifstream is(std::string(ROT_TEST_DATA) + "/" + name);
  std::vector<std::string> out;
  for (std::string line; std::getline(is, line);) out.push_back(line);
  return out;
}

Problem q(const char* text) { return parse_question(tokenize(text)); }

}  // namespace

TEST(Export, ThirdContextOfFortyPlusThirtyFive) {
  const auto want = read_lines("export_rot.jsonl");
  ASSERT_EQ(want.size(), 3u);
  // The root context of 40+35 is X^3 in the worked example.
  const auto lcs = labeled_contexts(q("GO 40+35="), ThoughtType::Rot);
  const auto rs = derive_prompt_completions(lcs.front().context, lcs.front().target);
  ASSERT_EQ(rs.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(jsonl_line(rs[i]), want[i]);
}

TEST(Export, WithoutThoughtLine) {
  const auto want = read_lines("export_wt.jsonl");
  const auto rs = export_problem(q("GO 40+35="), ThoughtType::Wt);
  ASSERT_EQ(rs.size(), 1u);
  EXPECT_EQ(jsonl_line(rs[0]), want.at(0));
}

TEST(Export, BaseCaseIsOneRecord) {
  const auto rs = export_problem(q("GO 8+1="), ThoughtType::Rot);
  ASSERT_EQ(rs.size(), 1u);
  EXPECT_EQ(rs[0].prompt, " go 8 + 1 =");
  EXPECT_EQ(rs[0].completion, " 9 stop");
}

TEST(Export, SymbolsKeptAsIs) {
  EXPECT_EQ(export_word(Token::Go), "go");
  EXPECT_EQ(export_word(Token::Vs), "vs");
  EXPECT_EQ(export_word(Token::Tail), "tail");
  EXPECT_EQ(export_word(Token::Cross), "×");
  EXPECT_EQ(export_text(tokenize("GO 76÷29=")), " go 7 6 ÷ 2 9 =");
}

TEST(Export, RecordsRebuildTheContext) {
  for (std::size_t t = 0; t < kTaskCount; ++t) {
    for (std::uint64_t i = 0; i < 20; ++i) {
      const auto p = sample_problem_at(static_cast<Task>(t), 4, 2, i);
      for (auto type : {ThoughtType::Wt, ThoughtType::Cot, ThoughtType::Rot}) {
        for (const auto& lc : labeled_contexts(p, type)) {
          const auto rs = derive_prompt_completions(lc.context, lc.target);
          ASSERT_FALSE(rs.empty());
          const auto full = export_text(lc.context);
          for (std::size_t k = 0; k < rs.size(); ++k) {
            // Each prompt is a prefix of the context that extends the previous
            // prompt + completion (THINK stands in for the sub-answer).
            ASSERT_EQ(full.rfind(rs[k].prompt, 0), 0u);
            if (k > 0) {
              auto prev = rs[k - 1].prompt + rs[k - 1].completion;
              if (prev.size() >= 6 && prev.compare(prev.size() - 6, 6, " think") == 0) prev.resize(prev.size() - 6);
              EXPECT_EQ(rs[k].prompt.rfind(prev, 0), 0u);
            }
          }
          const auto last = rs.back().prompt + rs.back().completion;
          if (!lc.context.empty() && lc.target.back() == Token::Stop) EXPECT_EQ(last, full);
          // Text and JSON round trips.
          EXPECT_EQ(parse_export_text(full), lc.context);
          for (const auto& r : rs) EXPECT_EQ(parse_jsonl_line(jsonl_line(r)), r);
        }
      }
    }
  }
}

TEST(Export, BadInputRejected) {
  EXPECT_THROW(parse_export_text("go 1"), ExportError);
  EXPECT_THROW(parse_export_text(" go  1"), ExportError);
  EXPECT_THROW(parse_export_text(" go xyz"), ExportError);
  EXPECT_THROW(parse_jsonl_line(R"({"completion": "a", "prompt": "b"})"), ExportError);
  EXPECT_THROW(parse_jsonl_line("{"), ExportError);
}

TEST(Export, VocabularyTable) {
  const auto j = nlohmann::json::parse(vocabulary_json());
  ASSERT_EQ(j.size(), kVocabSize);
  for (std::size_t i = 0; i < kVocabSize; ++i) {
    EXPECT_EQ(j[i]["id"], i);
    EXPECT_EQ(token_from_text(j[i]["text"].get<std::string>()), token_from_id(static_cast<int>(i)));
  }
  EXPECT_EQ(j[0]["kind"], "control");
}

TEST(Export, DatasetLine) {
  const auto p = q("GO 8+1=");
  const auto lc = labeled_contexts(p, ThoughtType::Rot).front();
  EXPECT_EQ(dataset_line(p, 1, 7, ThoughtType::Rot, lc),
            R"({"task":"add","difficulty":1,"index":7,"thought":"rot","question":"GO 8 + 1 =",)"
            R"("context":["GO","8","+","1","=","9","STOP"],"target":["PAD","PAD","PAD","PAD","PAD","9","STOP"]})");
}
