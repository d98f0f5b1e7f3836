#include "rot/thought.hpp"

#include <algorithm>
#include <unordered_map>

#include "rot/render.hpp"

namespace rot {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

Thought regular(Problem p) { return {std::move(p), RecursionType::Regular}; }
Thought tail(Problem p) { return {std::move(p), RecursionType::Tail}; }

Number num(std::int64_t v) { return Number(v); }

std::vector<Thought> add_thoughts(const AddProblem& p) {
  if (p.left < 10 && p.right < 10) return {};
  const Number l_last = p.left % 10, r_last = p.right % 10;
  std::vector<Thought> ts{regular(AddProblem{l_last, r_last})};
  Number l_rest = p.left / 10, r_rest = p.right / 10;
  if (l_last + r_last >= 10) {
    ts.push_back(regular(AddProblem{l_rest, 1}));
    l_rest += 1;
  }
  if (l_rest > 0 && r_rest > 0) ts.push_back(regular(AddProblem{l_rest, r_rest}));
  return ts;
}

std::vector<Thought> sub_thoughts(const SubProblem& p) {
  if (p.left <= 19 && p.right <= 9) return {};
  const Number l_last = p.left % 10 + 10;  // always borrow 10
  const Number r_last = p.right % 10;
  std::vector<Thought> ts{regular(SubProblem{l_last, r_last})};
  Number l_rest = p.left / 10, r_rest = p.right / 10;
  if (l_last - r_last < 10) {
    ts.push_back(regular(SubProblem{l_rest, 1}));
    l_rest -= 1;
  }
  if (r_rest > 0) ts.push_back(regular(SubProblem{l_rest, r_rest}));
  return ts;
}

std::vector<Thought> mul_thoughts(const MulProblem& p) {
  if (p.left <= 1 || p.right <= 1) return {};
  if (p.left <= 9 && p.right <= 9) return {};
  std::vector<Thought> ts;
  if (p.right < 10) {
    ts.push_back(regular(MulProblem{p.left % 10, p.right}));
    ts.push_back(regular(MulProblem{p.left / 10, p.right}));
    const Number a1 = (p.left % 10) * p.right;
    const Number a2 = (p.left / 10) * p.right;
    ts.push_back(tail(AddProblem{a2 * 10, a1}));
  } else {
    const Number a1 = p.left * (p.right % 10);
    ts.push_back(regular(MulProblem{p.left, p.right % 10}));
    const Number a2 = p.left * (p.right / 10);
    ts.push_back(regular(MulProblem{p.left, p.right / 10}));
    ts.push_back(tail(AddProblem{a2 * 10, a1}));
  }
  return ts;
}

std::vector<Thought> compare_thoughts(const CompareProblem& p) {
  if (p.left < 10 && p.right < 10) return {};
  const std::string l = p.left.str(), r = p.right.str();
  std::vector<Thought> ts;
  if (l.size() == r.size()) {
    const int l_first = l[0] - '0', r_first = r[0] - '0';
    ts.push_back(regular(CompareProblem{l_first, r_first}));
    if (l_first == r_first) {
      ts.push_back(regular(CompareProblem{parse_decimal(l.substr(1)), parse_decimal(r.substr(1))}));
    }
  }
  return ts;
}

std::vector<Thought> div_thoughts(const DivProblem& p) {
  std::vector<Thought> ts{regular(CompareProblem{p.left, p.right})};
  if (p.left <= p.right) return ts;
  ts.push_back(regular(CompareProblem{p.left, p.right * 10}));
  if (p.left <= p.right * 10) {
    ts.push_back(regular(SubProblem{p.left, p.right}));
    ts.push_back(regular(DivProblem{p.left - p.right, p.right}));
  } else {
    ts.push_back(regular(DivProblem{p.left / 10, p.right}));
    const Number left_remainder = (p.left / 10) % p.right * 10 + p.left % 10;
    ts.push_back(regular(DivProblem{left_remainder, p.right}));
  }
  return ts;
}

std::size_t subseq_length(const Problem& p) {
  return std::get<SubseqAnswer>(direct_answer(p)).length();
}

std::vector<Thought> lcs_thoughts(const LcsProblem& p) {
  const auto& l = p.left;
  const auto& r = p.right;
  if (l.empty() || r.empty()) return {};
  std::vector<Thought> ts{regular(EqualProblem{l.back() - '0', r.back() - '0'})};
  if (l.back() == r.back()) {
    ts.push_back(regular(LcsProblem{l.substr(0, l.size() - 1), r.substr(0, r.size() - 1)}));
    return ts;
  }
  LcsProblem lcs1{l.substr(0, l.size() - 1), r};
  LcsProblem lcs2{l, r.substr(0, r.size() - 1)};
  const auto len1 = subseq_length(lcs1), len2 = subseq_length(lcs2);
  ts.push_back(regular(std::move(lcs1)));
  ts.push_back(regular(std::move(lcs2)));
  ts.push_back(regular(CompareProblem{len1, len2}));
  return ts;
}

std::vector<Thought> lps_thoughts(const LpsProblem& p) {
  const auto& s = p.seq;
  if (s.size() <= 1) return {};
  if (s.size() == 2) return {regular(EqualProblem{s[0] - '0', s[1] - '0'})};
  std::vector<Thought> ts{regular(EqualProblem{s.front() - '0', s.back() - '0'})};
  if (s.front() == s.back()) {
    LpsProblem inner{s.substr(1, s.size() - 2)};
    const auto len = subseq_length(inner);
    ts.push_back(regular(std::move(inner)));
    ts.push_back(regular(AddProblem{len, 2}));
  } else {
    LpsProblem lps1{s.substr(0, s.size() - 1)};
    LpsProblem lps2{s.substr(1)};
    const auto len1 = subseq_length(lps1), len2 = subseq_length(lps2);
    ts.push_back(regular(std::move(lps1)));
    ts.push_back(regular(std::move(lps2)));
    ts.push_back(regular(CompareProblem{len1, len2}));
  }
  return ts;
}

std::vector<Thought> knapsack_thoughts(const KnapsackProblem& p) {
  const auto [value, weight] = p.items.front();
  if (p.items.size() == 1) return {regular(CompareProblem{weight, p.capacity})};

  KnapsackProblem rest{{p.items.begin() + 1, p.items.end()}, p.capacity};
  const auto value_max = std::get<KnapsackAnswer>(direct_answer(rest)).value;
  std::vector<Thought> ts{regular(rest), regular(CompareProblem{weight, p.capacity})};
  if (weight <= p.capacity) {
    KnapsackProblem rest_incl{rest.items, p.capacity - weight};
    const auto value_sub = std::get<KnapsackAnswer>(direct_answer(rest_incl)).value;
    const auto value_incl = value_sub + value;
    ts.push_back(regular(SubProblem{p.capacity, weight}));
    ts.push_back(regular(std::move(rest_incl)));
    ts.push_back(regular(AddProblem{value_sub, value}));
    ts.push_back(regular(CompareProblem{value_incl, value_max}));
  }
  return ts;
}

std::vector<Thought> mcm_thoughts(const McmProblem& p) {
  const auto& mats = p.mats;
  if (mats.size() == 1) return {};
  const std::size_t split = p.state ? p.state->split : 1;
  McmProblem left{{mats.begin(), mats.begin() + static_cast<std::ptrdiff_t>(split)}, std::nullopt};
  McmProblem right{{mats.begin() + static_cast<std::ptrdiff_t>(split), mats.end()}, std::nullopt};
  const auto l_ans = std::get<McmAnswer>(direct_answer(left));
  const auto r_ans = std::get<McmAnswer>(direct_answer(right));
  const auto agg_cost = left.mats[0].rows * right.mats[0].rows * right.mats.back().cols;
  const bool has_more = right.mats.size() > 1;

  std::vector<Thought> ts{
      regular(std::move(left)),
      regular(std::move(right)),
      regular(TernaryMulProblem{num(mats[0].rows), num(mats[split].rows), num(mats.back().cols)}),
      regular(TernaryAddProblem{num(l_ans.cost), num(r_ans.cost), num(agg_cost)}),
  };

  const auto cost = l_ans.cost + r_ans.cost + agg_cost;
  McmOrder best_order;
  std::int64_t best_cost = 0;
  if (p.state) {
    ts.push_back(regular(CompareProblem{cost, p.state->best_cost}));
    best_order = p.state->best_order;
    best_cost = p.state->best_cost;
  }
  if (!p.state || cost < best_cost) {
    best_cost = cost;
    best_order = McmOrder::join(l_ans.order, r_ans.order);
  }
  if (has_more) {
    ts.push_back(tail(McmProblem{mats, McmState{split + 1, best_order, best_cost}}));
  }
  return ts;
}

std::vector<Thought> merge_thoughts(const MergeProblem& p) {
  const auto& l = p.left;
  const auto& r = p.right;
  if (l.empty() || r.empty()) return {};
  std::vector<Thought> ts{regular(CompareProblem{l[0], r[0]})};
  if (l[0] < r[0] && l.size() > 1) {
    ts.push_back(regular(MergeProblem{{l.begin() + 1, l.end()}, r}));
  } else if (l[0] >= r[0] && r.size() > 1) {
    ts.push_back(regular(MergeProblem{l, {r.begin() + 1, r.end()}}));
  }
  return ts;
}

std::vector<Thought> merge_sort_thoughts(const MergeSortProblem& p) {
  const auto& t = p.terms;
  if (t.size() < 2) return {};
  const auto l_len = static_cast<std::ptrdiff_t>((t.size() + 1) / 2);
  std::vector<std::int64_t> l(t.begin(), t.begin() + l_len);
  std::vector<std::int64_t> r(t.begin() + l_len, t.end());
  auto ls = l, rs = r;
  std::sort(ls.begin(), ls.end());
  std::sort(rs.begin(), rs.end());
  return {regular(MergeSortProblem{std::move(l)}), regular(MergeSortProblem{std::move(r)}),
          tail(MergeProblem{std::move(ls), std::move(rs)})};
}

// ---- combination -----------------------------------------------------------

const Number& as_number(const Answer& a) { return std::get<Number>(a); }
Ordering as_ordering(const Answer& a) { return std::get<Ordering>(a); }

Answer combine_add(const AddProblem& p, std::span<const Answer> s) {
  if (s.empty()) return Number(p.left + p.right);
  std::size_t k = 0;
  const Number last = as_number(s[k++]);
  Number l_rest = p.left / 10;
  const Number r_rest = p.right / 10;
  if (last >= 10) l_rest = as_number(s[k++]);
  const Number high = (l_rest > 0 && r_rest > 0) ? as_number(s[k++]) : Number(l_rest + r_rest);
  return Number(high * 10 + last % 10);
}

Answer combine_sub(const SubProblem& p, std::span<const Answer> s) {
  if (s.empty()) return Number(p.left - p.right);
  std::size_t k = 0;
  const Number last = as_number(s[k++]);
  Number l_rest = p.left / 10;
  const Number r_rest = p.right / 10;
  if (last < 10) l_rest = as_number(s[k++]);
  const Number high = r_rest > 0 ? as_number(s[k++]) : l_rest;
  return Number(high * 10 + last % 10);
}

Answer combine_compare(const CompareProblem& p, std::span<const Answer> s) {
  if (s.empty()) return compare_numbers(p.left, p.right);  // base or digit-count decided
  const auto first = as_ordering(s[0]);
  return first != Ordering::Eq ? first : as_ordering(s[1]);
}

Answer combine_div(const DivProblem& p, std::span<const Answer> s) {
  const auto head = as_ordering(s[0]);
  if (head == Ordering::Lt) return DivAnswer{0, p.left};
  if (head == Ordering::Eq) return DivAnswer{1, 0};
  if (as_ordering(s[1]) != Ordering::Gt) {
    const auto& rest = std::get<DivAnswer>(s[3]);
    return DivAnswer{rest.quotient + 1, rest.remainder};
  }
  const auto& high = std::get<DivAnswer>(s[2]);
  const auto& low = std::get<DivAnswer>(s[3]);
  return DivAnswer{high.quotient * 10 + low.quotient, low.remainder};
}

Answer combine_lcs(const LcsProblem& p, std::span<const Answer> s) {
  if (s.empty()) return SubseqAnswer{""};
  if (std::get<bool>(s[0])) {
    return SubseqAnswer{std::get<SubseqAnswer>(s[1]).seq + p.left.back()};
  }
  return as_ordering(s[3]) == Ordering::Lt ? s[2] : s[1];
}

Answer combine_lps(const LpsProblem& p, std::span<const Answer> s) {
  const auto& seq = p.seq;
  if (s.empty()) return SubseqAnswer{seq};
  if (seq.size() == 2) {
    return std::get<bool>(s[0]) ? SubseqAnswer{seq} : SubseqAnswer{seq.substr(0, 1)};
  }
  if (std::get<bool>(s[0])) {
    auto inner = std::get<SubseqAnswer>(s[1]).seq;
    return SubseqAnswer{seq.front() + inner + seq.back()};
  }
  return as_ordering(s[3]) == Ordering::Lt ? s[2] : s[1];
}

Answer combine_knapsack(const KnapsackProblem& p, std::span<const Answer> s) {
  const auto& first = p.items.front();
  if (p.items.size() == 1) {
    if (as_ordering(s[0]) == Ordering::Gt) return KnapsackAnswer{{}, 0};
    return KnapsackAnswer{{first}, first.value};
  }
  const auto& excluded = std::get<KnapsackAnswer>(s[0]);
  if (as_ordering(s[1]) == Ordering::Gt) return excluded;
  if (as_ordering(s[5]) != Ordering::Gt) return excluded;
  KnapsackAnswer included{{first}, as_number(s[4]).convert_to<std::int64_t>()};
  const auto& rest = std::get<KnapsackAnswer>(s[3]).items;
  included.items.insert(included.items.end(), rest.begin(), rest.end());
  return included;
}

Answer combine_mcm(const McmProblem& p, std::span<const Answer> s) {
  if (s.empty()) return McmAnswer{McmOrder::leaf(p.mats.front()), 0};
  const auto& l = std::get<McmAnswer>(s[0]);
  const auto& r = std::get<McmAnswer>(s[1]);
  const auto cost = as_number(s[3]).convert_to<std::int64_t>();
  const bool better = !p.state || as_ordering(s[4]) == Ordering::Lt;
  const std::size_t split = p.state ? p.state->split : 1;
  if (split + 1 < p.mats.size()) return s.back();  // tail continues the scan
  if (better) return McmAnswer{McmOrder::join(l.order, r.order), cost};
  return McmAnswer{p.state->best_order, p.state->best_cost};
}

Answer combine_merge(const MergeProblem& p, std::span<const Answer> s) {
  const auto& l = p.left;
  const auto& r = p.right;
  if (s.empty()) {
    auto out = l;
    out.insert(out.end(), r.begin(), r.end());
    return SortedAnswer{out};
  }
  const bool take_left = as_ordering(s[0]) == Ordering::Lt;
  std::vector<std::int64_t> out{take_left ? l[0] : r[0]};
  if (s.size() > 1) {
    const auto& rest = std::get<SortedAnswer>(s[1]).terms;
    out.insert(out.end(), rest.begin(), rest.end());
  } else {
    const auto& other = take_left ? r : l;
    out.insert(out.end(), other.begin(), other.end());
  }
  return SortedAnswer{out};
}

}  // namespace

std::vector<Thought> thought(const Problem& problem) {
  return std::visit(overloaded{
                        [](const AddProblem& p) { return add_thoughts(p); },
                        [](const SubProblem& p) { return sub_thoughts(p); },
                        [](const MulProblem& p) { return mul_thoughts(p); },
                        [](const DivProblem& p) { return div_thoughts(p); },
                        [](const CompareProblem& p) { return compare_thoughts(p); },
                        [](const EqualProblem&) { return std::vector<Thought>{}; },
                        [](const LcsProblem& p) { return lcs_thoughts(p); },
                        [](const LpsProblem& p) { return lps_thoughts(p); },
                        [](const KnapsackProblem& p) { return knapsack_thoughts(p); },
                        [](const TernaryAddProblem& p) {
                          return std::vector<Thought>{regular(AddProblem{p.a1, p.a2}),
                                                      tail(AddProblem{p.a1 + p.a2, p.a3})};
                        },
                        [](const TernaryMulProblem& p) {
                          return std::vector<Thought>{regular(MulProblem{p.a1, p.a2}),
                                                      tail(MulProblem{p.a1 * p.a2, p.a3})};
                        },
                        [](const McmProblem& p) { return mcm_thoughts(p); },
                        [](const MergeSortProblem& p) { return merge_sort_thoughts(p); },
                        [](const MergeProblem& p) { return merge_thoughts(p); },
                    },
                    problem);
}

Answer combine_answer(const Problem& problem, std::span<const Answer> s) {
  return std::visit(
      overloaded{
          [&](const AddProblem& p) { return combine_add(p, s); },
          [&](const SubProblem& p) { return combine_sub(p, s); },
          [&](const MulProblem& p) -> Answer {
            if (s.empty()) return Number(p.left * p.right);
            return s.back();
          },
          [&](const DivProblem& p) { return combine_div(p, s); },
          [&](const CompareProblem& p) { return combine_compare(p, s); },
          [&](const EqualProblem& p) -> Answer { return p.left == p.right; },
          [&](const LcsProblem& p) { return combine_lcs(p, s); },
          [&](const LpsProblem& p) { return combine_lps(p, s); },
          [&](const KnapsackProblem& p) { return combine_knapsack(p, s); },
          [&](const TernaryAddProblem&) -> Answer { return s.back(); },
          [&](const TernaryMulProblem&) -> Answer { return s.back(); },
          [&](const McmProblem& p) { return combine_mcm(p, s); },
          [&](const MergeSortProblem& p) -> Answer {
            if (s.empty()) return SortedAnswer{p.terms};
            return s.back();
          },
          [&](const MergeProblem& p) { return combine_merge(p, s); },
      },
      problem);
}

Answer recursive_answer(const Problem& root, std::size_t max_depth) {
  struct Frame {
    Problem problem;
    std::string key;
    std::vector<Thought> thoughts;
    std::vector<Answer> answers;
  };
  std::unordered_map<std::string, Answer> memo;
  auto make_frame = [](Problem p) {
    auto key = seq_key(render_question(p));
    auto ts = thought(p);
    return Frame{std::move(p), std::move(key), std::move(ts), {}};
  };

  std::vector<Frame> stack;
  stack.push_back(make_frame(root));
  while (true) {
    Frame& top = stack.back();
    if (top.answers.size() < top.thoughts.size()) {
      const auto& next = top.thoughts[top.answers.size()].problem;
      auto key = seq_key(render_question(next));
      if (auto it = memo.find(key); it != memo.end()) {
        top.answers.push_back(it->second);
        continue;
      }
      if (stack.size() >= max_depth) {
        throw RecursionError("recursion depth exceeded " + std::to_string(max_depth) + " at " +
                             describe(next));
      }
      stack.push_back(make_frame(next));
      continue;
    }
    Answer ans = combine_answer(top.problem, top.answers);
    memo.emplace(top.key, ans);
    stack.pop_back();
    if (stack.empty()) return ans;
    stack.back().answers.push_back(std::move(ans));
  }
}

}  // namespace rot
