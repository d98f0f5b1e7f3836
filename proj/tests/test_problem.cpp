#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "rot/context.hpp"
#include "rot/render.hpp"
#include "rot/thought.hpp"
#include "support.hpp"

using namespace rot;
using namespace rot::support;

namespace {

Problem q(const char* text) { return parse_question(tokenize(text)); }

std::string answer_text(const Problem& p) { return to_text(render_answer(p)); }

}  // namespace

TEST(Tokens, VocabularyIsStable) {
  EXPECT_EQ(kVocabSize, 44u);
  EXPECT_EQ(token_id(Token::Pad), 0);
  for (std::size_t i = 0; i < kVocabSize; ++i) {
    const Token t = token_from_id(static_cast<int>(i));
    EXPECT_EQ(token_from_text(token_text(t)), t);
  }
  EXPECT_THROW(token_from_id(44), TokenError);
  EXPECT_THROW(tokenize("GO 1 # 2"), TokenError);
}

TEST(Tokens, GreedyWords) {
  EXPECT_EQ(to_text(tokenize("GO 12 LCS 3=")), "GO 1 2 LCS 3 =");
  EXPECT_EQ(to_text(tokenize("GO 3×9,9×4=")), "GO 3 × 9 , 9 × 4 =");
  EXPECT_EQ(to_text(tokenize("GO 76÷29=2R18STOP")), "GO 7 6 ÷ 2 9 = 2 R 1 8 STOP");
}

TEST(Numbers, LeadingZerosAreDecimal) {
  EXPECT_EQ(parse_decimal("010"), Number(10));
  EXPECT_EQ(parse_decimal("08"), Number(8));
  EXPECT_EQ(parse_number(tokenize("0 0 7")), Number(7));
  EXPECT_EQ(q("GO 010 VS 08="), Problem(CompareProblem{10, 8}));
}

TEST(Render, PaperQuestions) {
  EXPECT_EQ(to_compact_text(render_question(q("GO KNAPSACK 5&12,25&15,19&18@40="))),
            to_compact_text(tokenize("GO KNAPSACK 5&12,25&15,19&18@40=")));
  EXPECT_EQ(answer_text(q("GO LPS 12321=")), to_text(tokenize("12321;5 STOP")));
  EXPECT_EQ(answer_text(q("GO MCM 4×2,2×8,8×3=")), to_text(tokenize("4×2,(2×8,8×3);72 STOP")));
  auto sort = q("GO SORT 139,160,434,796,41=");
  EXPECT_EQ(task_of(sort), Task::MergeSort);
  EXPECT_EQ(answer_text(sort), to_text(tokenize("41,139,160,434,796 STOP")));
}

TEST(Render, RoundTripAllTasks) {
  for (std::size_t t = 0; t < kTaskCount; ++t) {
    const auto task = static_cast<Task>(t);
    for (std::uint64_t i = 0; i < 200; ++i) {
      const auto p = sample_problem_at(task, desk_difficulty(task), 11, i);
      const auto qs = render_question(p);
      ASSERT_EQ(qs.front(), Token::Go);
      ASSERT_EQ(qs.back(), Token::Equals);
      EXPECT_EQ(parse_question(qs), p) << describe(p);
      const auto a = direct_answer(p);
      const auto as = render_answer(a);
      ASSERT_EQ(as.back(), Token::Stop);
      EXPECT_EQ(parse_answer(task, as), a) << describe(p);
    }
  }
}

TEST(Render, MidRecursionMcmRoundTrip) {
  for (const auto& node : build_rot_tree(q("GO MCM 3×9,9×4,4×5,5×2=")).nodes) {
    EXPECT_EQ(parse_question(node.context.question), node.problem) << describe(node.problem);
  }
}

TEST(DirectAnswer, PaperValues) {
  EXPECT_EQ(answer_text(q("GO 408+351=")), "7 5 9 STOP");
  EXPECT_EQ(answer_text(q("GO KNAPSACK 3&9,4&2,9&5@10=")),
            to_text(tokenize("4&2,9&5$13 STOP")));
  EXPECT_EQ(answer_text(q("GO 123 LCS 234=")), to_text(tokenize("23;2 STOP")));
  EXPECT_EQ(answer_text(q("GO LPS 1232=")), to_text(tokenize("232;3 STOP")));
  EXPECT_EQ(answer_text(q("GO MCM 3×9,9×4,4×5=")), to_text(tokenize("(3×9,9×4),4×5;168 STOP")));
  EXPECT_EQ(answer_text(q("GO 76÷29=")), to_text(tokenize("2R18 STOP")));
}

TEST(Thoughts, PaperDecompositions) {
  auto thoughts_text = [](const char* text) {
    std::string out;
    for (const auto& t : thought(q(text))) {
      auto qs = render_question(t.problem);
      if (t.type == RecursionType::Tail) qs.front() = Token::Tail;
      out += to_compact_text(qs) + " ";
    }
    return out;
  };
  EXPECT_EQ(thoughts_text("GO 8+1="), "");
  EXPECT_EQ(thoughts_text("GO 408+351="), "GO 8+1= GO 40+35= ");
  EXPECT_EQ(thoughts_text("GO 43*21="), "GO 43*1= GO 43*2= TAIL 860+43= ");
  EXPECT_EQ(thoughts_text("GO 76÷29="), "GO 76 VS 29= GO 76 VS 290= GO 76-29= GO 47÷29= ");
  EXPECT_EQ(thoughts_text("GO 153 VS 159="), "GO 1 VS 1= GO 53 VS 59= ");
}

TEST(Thoughts, TailOnlyLastAndOnlyInTailTasks) {
  for (std::size_t t = 0; t < kTaskCount; ++t) {
    const auto task = static_cast<Task>(t);
    const bool may_tail = task == Task::Mul || task == Task::TernaryAdd ||
                          task == Task::TernaryMul || task == Task::Mcm || task == Task::MergeSort;
    for (std::uint64_t i = 0; i < 100; ++i) {
      const auto p = sample_problem_at(task, desk_difficulty(task), 5, i);
      for (const auto& node : build_rot_tree(p).nodes) {
        const auto ts = thought(node.problem);
        for (std::size_t k = 0; k < ts.size(); ++k) {
          if (ts[k].type != RecursionType::Tail) continue;
          EXPECT_EQ(k + 1, ts.size()) << describe(node.problem);
          const auto parent = task_of(node.problem);
          EXPECT_TRUE(parent == Task::Mul || parent == Task::TernaryAdd ||
                      parent == Task::TernaryMul || parent == Task::Mcm ||
                      parent == Task::MergeSort)
              << describe(node.problem);
        }
      }
      if (!may_tail) {
        for (const auto& t2 : thought(p)) EXPECT_EQ(t2.type, RecursionType::Regular);
      }
    }
  }
}

TEST(Thoughts, MulTailAddendsSumToProduct) {
  for (std::uint64_t i = 0; i < 300; ++i) {
    const auto p = sample_problem_at(Task::Mul, 8, 3, i);
    const auto ts = thought(p);
    if (ts.empty() || ts.back().type != RecursionType::Tail) continue;
    const auto& add = std::get<AddProblem>(ts.back().problem);
    const auto& m = std::get<MulProblem>(p);
    EXPECT_EQ(add.left + add.right, m.left * m.right);
  }
}

TEST(CrossOracle, RecursiveEqualsDirect) {
  for (std::size_t t = 0; t < kTaskCount; ++t) {
    const auto task = static_cast<Task>(t);
    for (std::uint64_t i = 0; i < 200; ++i) {
      const auto p = sample_problem_at(task, desk_difficulty(task), 21, i);
      EXPECT_EQ(recursive_answer(p), direct_answer(p)) << describe(p);
    }
  }
}

TEST(CrossOracle, LcsMatchesEnumeration) {
  for (std::uint64_t i = 0; i < 100; ++i) {
    const int n = 1 + static_cast<int>(i % 10);
    const auto p = std::get<LcsProblem>(sample_problem_at(Task::Lcs, n, 31, i));
    const auto a = std::get<SubseqAnswer>(direct_answer(p));
    EXPECT_EQ(a.length(), brute_lcs(p.left, p.right)) << describe(p);
    EXPECT_TRUE(is_subsequence(a.seq, p.left) && is_subsequence(a.seq, p.right));
  }
}

TEST(CrossOracle, LpsMatchesEnumeration) {
  for (std::uint64_t i = 0; i < 100; ++i) {
    const int n = 1 + static_cast<int>(i % 10);
    const auto p = std::get<LpsProblem>(sample_problem_at(Task::Lps, n, 32, i));
    const auto a = std::get<SubseqAnswer>(direct_answer(p));
    EXPECT_EQ(a.length(), brute_lps(p.seq)) << describe(p);
    EXPECT_TRUE(is_subsequence(a.seq, p.seq));
    EXPECT_TRUE(std::equal(a.seq.begin(), a.seq.end(), a.seq.rbegin()));
  }
}

TEST(CrossOracle, KnapsackMatchesEnumeration) {
  for (std::uint64_t i = 0; i < 100; ++i) {
    const int n = 1 + static_cast<int>(i % 12);
    const auto p = std::get<KnapsackProblem>(sample_problem_at(Task::Knapsack, n, 33, i));
    const auto a = std::get<KnapsackAnswer>(direct_answer(p));
    EXPECT_EQ(a.value, brute_knapsack(p)) << describe(p);
    std::int64_t v = 0, w = 0;
    for (const auto& it : a.items) {
      v += it.value;
      w += it.weight;
    }
    EXPECT_EQ(v, a.value);
    EXPECT_LE(w, p.capacity);
  }
}

TEST(CrossOracle, McmMatchesEnumeration) {
  for (std::uint64_t i = 0; i < 100; ++i) {
    const int n = 1 + static_cast<int>(i % 8);
    const auto p = std::get<McmProblem>(sample_problem_at(Task::Mcm, n, 34, i));
    const auto a = std::get<McmAnswer>(direct_answer(p));
    EXPECT_EQ(a.cost, brute_mcm(p.mats, 0, p.mats.size() - 1)) << describe(p);
    EXPECT_EQ(a.order.cost(), a.cost);
    std::vector<MatShape> leaves;
    collect_leaves(a.order, leaves);
    EXPECT_EQ(leaves, p.mats);
  }
}

TEST(Sampling, RangeContainment) {
  Rng rng(1);
  const LogUniformParams p{1, pow10(6), 3.0};
  for (int i = 0; i < 100'000; ++i) {
    const auto v = sample_log_uniform(p, rng);
    ASSERT_GE(v, 1);
    ASSERT_LT(v, pow10(6));
  }
}

TEST(Sampling, SmallValuesFavoured) {
  Rng rng(2);
  const LogUniformParams p{0, 10, 3.0};
  const int n = 100'000;
  int small = 0;
  for (int i = 0; i < n; ++i) small += sample_log_uniform(p, rng) <= 4;
  // F(4) = (log 8 - log 3) / (log 13 - log 3)
  const double cdf = (std::log(8.0) - std::log(3.0)) / (std::log(13.0) - std::log(3.0));
  const double frac = static_cast<double>(small) / n;
  EXPECT_GT(frac, 0.5);
  EXPECT_NEAR(frac, cdf, 0.01);
}

TEST(Sampling, DigitCountsRoughlyBalanced) {
  Rng rng(3);
  std::vector<int> buckets(7, 0);
  const int n = 100'000;
  for (int i = 0; i < n; ++i) {
    ++buckets[digit_count(sample_log_uniform({0, pow10(6), 3.0}, rng))];
  }
  for (int d = 1; d <= 6; ++d) {
    const double share = static_cast<double>(buckets[d]) / n;
    EXPECT_GE(share, 0.05) << d;
    EXPECT_LE(share, 0.35) << d;
  }
}

TEST(Sampling, InvalidParams) {
  Rng rng(4);
  EXPECT_THROW(sample_log_uniform({5, 5, 3.0}, rng), ConfigError);
  EXPECT_THROW(sample_log_uniform({0, 10, 0.0}, rng), ConfigError);
  EXPECT_THROW(sample_problem(Task::Add, 0, rng), ConfigError);
}

TEST(Sampling, DivisionIdentityAndQuotients) {
  Rng rng(5);
  int zero = 0;
  const int n = 10'000;
  for (int i = 0; i < n; ++i) {
    const auto p = std::get<DivProblem>(sample_problem(Task::Div, 6, rng));
    ASSERT_GE(p.right, 1);
    const auto a = std::get<DivAnswer>(direct_answer(p));
    ASSERT_EQ(a.quotient * p.right + a.remainder, p.left);
    ASSERT_LT(a.remainder, p.right);
    zero += a.quotient == 0;
  }
  EXPECT_LT(zero, n / 2);
}

TEST(Sampling, TaskInvariants) {
  for (std::uint64_t i = 0; i < 1000; ++i) {
    const auto s = std::get<SubProblem>(sample_problem_at(Task::Sub, 8, 9, i));
    EXPECT_GE(s.left, s.right);
    const auto k = std::get<KnapsackProblem>(sample_problem_at(Task::Knapsack, 6, 9, i));
    ASSERT_EQ(k.items.size(), 6u);
    for (const auto& it : k.items) {
      EXPECT_TRUE(it.value >= 1 && it.value <= 99 && it.weight >= 1 && it.weight <= 99);
    }
    const auto m = std::get<McmProblem>(sample_problem_at(Task::Mcm, 4, 9, i));
    ASSERT_EQ(m.mats.size(), 4u);
    for (std::size_t j = 0; j < 4; ++j) {
      EXPECT_TRUE(m.mats[j].rows >= 1 && m.mats[j].rows <= 99);
      if (j) EXPECT_EQ(m.mats[j - 1].cols, m.mats[j].rows);
    }
    const auto srt = std::get<MergeSortProblem>(sample_problem_at(Task::MergeSort, 8, 9, i));
    EXPECT_TRUE(srt.terms.size() >= 2 && srt.terms.size() <= 8);
  }
}

TEST(Sampling, StreamsAreReproducible) {
  for (std::uint64_t i = 0; i < 50; ++i) {
    EXPECT_EQ(sample_problem_at(Task::Lcs, 8, 42, i), sample_problem_at(Task::Lcs, 8, 42, i));
  }
  EXPECT_NE(sample_problem_at(Task::Add, 16, 42, 0), sample_problem_at(Task::Add, 16, 43, 0));
}
