#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "rot/context.hpp"
#include "rot/render.hpp"
#include "support.hpp"

using namespace rot;
using namespace rot::support;

namespace {

TokenSeq question_of(const TokenSeq& x) {
  auto eq = std::find(x.begin(), x.end(), Token::Equals);
  return TokenSeq(x.begin(), eq + 1);
}

}  // namespace

// Listings number contexts either by first creation (repeats skipped) or by
// full expansion; each listing has to agree with one of the two completely.
TEST(ContextTree, MatchesListedContexts) {
  auto listings = load_listings();
  ASSERT_EQ(listings.size(), 11u);
  for (const auto& listing : listings) {
    const auto root_ctx = tokenize(listing.at(1));
    const auto problem = parse_question(question_of(root_ctx));
    const auto tree = build_rot_tree(problem);
    const auto expanded = expanded_order(tree, 100'000);
    std::size_t unique_hits = 0, expanded_hits = 0;
    for (const auto& [k, text] : listing) {
      const auto want = to_text(tokenize(text));
      if (k <= tree.size() && to_text(render(tree.nodes[k - 1].context)) == want) ++unique_hits;
      if (k <= expanded.size() && to_text(render(tree.nodes[expanded[k - 1]].context)) == want) {
        ++expanded_hits;
      }
    }
    EXPECT_TRUE(unique_hits == listing.size() || expanded_hits == listing.size())
        << describe(problem) << ": " << unique_hits << "/" << expanded_hits << " of "
        << listing.size();
  }
}

TEST(ContextTree, CotOfSmallAddition) {
  // Same as the five RoT contexts of 408+351 folded into one.
  auto tree = build_rot_tree(parse_question(tokenize("GO 408+351=")));
  EXPECT_EQ(to_compact_text(build_cot_context(tree)),
            to_compact_text(tokenize("GO 408+351= GO 8+1=9 STOP GO 40+35= GO 0+5=5 STOP "
                                     "GO 4+3=7 STOP 75 STOP 759 STOP")));
}

TEST(ContextTree, CotKeepsTailMarker) {
  auto tree = build_rot_tree(parse_question(tokenize("GO 34*5=")));
  EXPECT_EQ(to_compact_text(build_cot_context(tree)),
            to_compact_text(tokenize("GO 34*5= GO 4*5=20 STOP GO 3*5=15 STOP TAIL 150+20= "
                                     "GO 0+0=0 STOP GO 15+2= GO 5+2=7 STOP 17 STOP 170 STOP")));
}

TEST(ContextTree, TargetLayout) {
  auto tree = build_rot_tree(parse_question(tokenize("GO 408+351=")));
  const auto& c = tree.root().context;
  auto y = build_target(c);
  auto x = render(c);
  ASSERT_EQ(x.size(), y.size());
  EXPECT_EQ(to_text(y), to_text(tokenize("PAD PAD PAD PAD PAD PAD PAD PAD PAD "
                                         "GO 8 + 1 = THINK PAD "
                                         "GO 4 0 + 3 5 = THINK PAD PAD "
                                         "7 5 9 STOP")));
}

TEST(ContextTree, TailContextEndsWithThink) {
  auto tree = build_rot_tree(parse_question(tokenize("GO 34*5=")));
  const auto& c = tree.root().context;
  EXPECT_TRUE(c.tail_terminated());
  EXPECT_EQ(render(c).back(), Token::Think);
  EXPECT_EQ(build_target(c).back(), Token::Think);
  // The tail child is an ordinary GO context.
  EXPECT_EQ(tree.nodes[c.subs.back().child].context.question.front(), Token::Go);
}

TEST(ContextTree, TargetNonPadCount) {
  for (const char* q : {"GO 408+351=", "GO 34*5=", "GO 76÷29=", "GO 123 LCS 234=",
                        "GO LPS 1232=", "GO MCM 3×9,9×4,4×5=", "GO KNAPSACK 3&9,4&2,9&5@10="}) {
    auto tree = build_rot_tree(parse_question(tokenize(q)));
    for (const auto& node : tree.nodes) {
      const auto& c = node.context;
      std::size_t expect = c.answer.size();
      for (const auto& s : c.subs) expect += s.question.size() + 1;
      auto y = build_target(c);
      auto non_pad = std::count_if(y.begin(), y.end(), [](Token t) { return t != Token::Pad; });
      EXPECT_EQ(static_cast<std::size_t>(non_pad), expect) << q;
      EXPECT_EQ(y.size(), render(c).size());
    }
  }
}

TEST(ContextTree, TokenAccountingAgreesWithCot) {
  for (const char* q : {"GO 408+351=", "GO 34*5=", "GO 4321*765=", "GO 76÷29=",
                        "GO 1234 LCS 2413=", "GO LPS 12321=", "GO MCM 3×9,9×4,4×5,5×2="}) {
    auto tree = build_rot_tree(parse_question(tokenize(q)));
    auto acc = account_tokens(tree);
    auto cot = build_cot_context(tree);
    EXPECT_EQ(acc.cot_length, Number(cot.size())) << q;
    EXPECT_EQ(acc.cot_generated, acc.rot_generated_naive) << q;
    auto order = expanded_order(tree, 1'000'000);
    EXPECT_EQ(acc.contexts_naive, Number(order.size())) << q;
    std::size_t think = 0;
    for (auto id : order) think += tree.nodes[id].context.subs.size();
    EXPECT_EQ(acc.rot_think_naive, Number(think));
  }
}

TEST(ContextTree, EveryRotContextIsACotSubsequence) {
  auto tree = build_rot_tree(parse_question(tokenize("GO 34*5=")));
  auto cot = build_cot_context(tree);
  for (const auto& node : tree.nodes) {
    auto x = render(node.context);
    auto it = cot.begin();
    for (Token t : x) {
      if (t == Token::Think) continue;  // RoT-only token
      it = std::find(it, cot.end(), t);
      ASSERT_NE(it, cot.end()) << to_text(x);
      ++it;
    }
  }
}

TEST(ContextTree, CotOverflowIsReported) {
  auto tree = build_rot_tree(parse_question(tokenize("GO 12345678*87654321=")));
  EXPECT_THROW(build_cot_context(tree, 2048), RecursionError);
  EXPECT_GT(account_tokens(tree).cot_length, Number(2048));
}
