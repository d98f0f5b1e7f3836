#include "rot/problem.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

namespace rot {

namespace {

constexpr std::array<std::string_view, kTaskCount> kTaskNames{
    "add",      "sub",         "mul",         "div", "compare",   "equal", "lcs",
    "lps",      "knapsack",    "ternary_add", "ternary_mul", "mcm", "mergesort", "merge",
};

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

std::string_view task_name(Task t) noexcept { return kTaskNames[static_cast<std::size_t>(t)]; }

Task task_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kTaskNames.size(); ++i) {
    if (kTaskNames[i] == name) return static_cast<Task>(i);
  }
  if (name == "sort") return Task::MergeSort;
  throw ConfigError("unknown task '" + std::string(name) + "'");
}

Ordering compare_numbers(const Number& a, const Number& b) noexcept {
  if (a < b) return Ordering::Lt;
  if (a > b) return Ordering::Gt;
  return Ordering::Eq;
}

// ---- McmOrder --------------------------------------------------------------

struct McmOrder::Node {
  MatShape shape{};
  McmOrder left, right;
};

McmOrder McmOrder::leaf(MatShape m) {
  McmOrder o;
  o.node_ = std::make_shared<const Node>(Node{m, {}, {}});
  return o;
}

McmOrder McmOrder::join(McmOrder left, McmOrder right) {
  if (left.empty() || right.empty()) throw std::invalid_argument("McmOrder::join: empty operand");
  McmOrder o;
  MatShape s{left.result_shape().rows, right.result_shape().cols};
  o.node_ = std::make_shared<const Node>(Node{s, std::move(left), std::move(right)});
  return o;
}

bool McmOrder::is_leaf() const noexcept { return node_ && node_->left.empty(); }

MatShape McmOrder::shape() const {
  if (!is_leaf()) throw std::logic_error("McmOrder::shape on a non-leaf");
  return node_->shape;
}

const McmOrder& McmOrder::left() const {
  if (!node_ || is_leaf()) throw std::logic_error("McmOrder::left on a leaf");
  return node_->left;
}

const McmOrder& McmOrder::right() const {
  if (!node_ || is_leaf()) throw std::logic_error("McmOrder::right on a leaf");
  return node_->right;
}

MatShape McmOrder::result_shape() const {
  if (!node_) throw std::logic_error("McmOrder: empty");
  return node_->shape;
}

std::int64_t McmOrder::cost() const {
  if (is_leaf()) return 0;
  const auto l = left().result_shape();
  const auto r = right().result_shape();
  return left().cost() + right().cost() + l.rows * l.cols * r.cols;
}

std::size_t McmOrder::matrix_count() const {
  if (is_leaf()) return 1;
  return left().matrix_count() + right().matrix_count();
}

bool operator==(const McmOrder& a, const McmOrder& b) {
  if (a.node_ == b.node_) return true;
  if (a.empty() || b.empty()) return false;
  if (a.is_leaf() != b.is_leaf()) return false;
  if (a.is_leaf()) return a.shape() == b.shape();
  return a.left() == b.left() && a.right() == b.right();
}

// ---- sampling --------------------------------------------------------------

void validate(const LogUniformParams& p) {
  if (p.alpha < 0) throw ConfigError("log-uniform: alpha must be non-negative");
  if (p.alpha >= p.beta) throw ConfigError("log-uniform: alpha must be < beta");
  if (!(p.delta >= 0.0) || (p.alpha == 0 && p.delta <= 0.0)) {
    throw ConfigError("log-uniform: delta must be > 0 when alpha == 0");
  }
}

Number sample_log_uniform(const LogUniformParams& p, Rng& rng) {
  validate(p);
  const double lo = std::log(p.alpha.convert_to<double>() + p.delta);
  const double hi = std::log(p.beta.convert_to<double>() + p.delta);
  const double x = std::floor(std::exp(rng.uniform_real(lo, hi)) - p.delta);

  Number v;
  if (x < 0x1.0p53) {
    v = static_cast<std::int64_t>(std::max(x, 0.0));
  } else {
    int extra = static_cast<int>(std::floor(std::log10(x))) + 1 - 15;
    auto lead = static_cast<std::int64_t>(std::floor(x / std::pow(10.0, extra)));
    while (lead >= 1'000'000'000'000'000LL) {
      lead /= 10;
      ++extra;
    }
    v = lead;
    for (int i = 0; i < extra; ++i) v = v * 10 + rng.uniform_int(0, 9);
  }
  if (v >= p.beta) v = p.beta - 1;
  if (v < p.alpha) v = p.alpha;
  return v;
}

namespace {

Number log_uniform(const Number& alpha, const Number& beta, double delta, Rng& rng) {
  return sample_log_uniform({alpha, beta, delta}, rng);
}

std::string random_digits(int n, Rng& rng) {
  std::string s(static_cast<std::size_t>(n), '0');
  for (auto& c : s) c = static_cast<char>('0' + rng.uniform_int(0, 9));
  return s;
}

std::vector<std::int64_t> sample_sort_terms(int max_terms, Rng& rng) {
  if (max_terms < 2) throw ConfigError("sort difficulty must be >= 2");
  const auto n = rng.uniform_int(2, max_terms);
  std::vector<std::int64_t> terms(static_cast<std::size_t>(n));
  for (auto& t : terms) t = log_uniform(0, 1000, 5.0, rng).convert_to<std::int64_t>();
  return terms;
}

}  // namespace

Problem sample_problem(Task task, int difficulty, Rng& rng) {
  if (difficulty < 1) throw ConfigError("difficulty must be >= 1");
  const int n = difficulty;
  const Number limit = pow10(static_cast<unsigned>(n));
  switch (task) {
    case Task::Add:
      return AddProblem{log_uniform(0, limit, 3.0, rng), log_uniform(0, limit, 3.0, rng)};
    case Task::Sub: {
      Number a = log_uniform(0, limit, 3.0, rng);
      Number b = log_uniform(0, limit, 3.0, rng);
      if (a < b) std::swap(a, b);
      return SubProblem{a, b};
    }
    case Task::Mul:
      return MulProblem{log_uniform(1, limit, 3.0, rng), log_uniform(1, limit, 3.0, rng)};
    case Task::Div: {
      const Number b = log_uniform(1, limit, 3.0, rng);
      const Number c = log_uniform(0, limit / b, 3.0, rng);
      const Number r = log_uniform(0, b, 3.0, rng);
      return DivProblem{b * c + r, b};
    }
    case Task::Compare:
      return CompareProblem{log_uniform(0, limit, 3.0, rng), log_uniform(0, limit, 3.0, rng)};
    case Task::Equal:
      return EqualProblem{static_cast<int>(rng.uniform_int(0, 9)),
                          static_cast<int>(rng.uniform_int(0, 9))};
    case Task::Lcs: {
      std::string l = random_digits(n, rng);
      std::string r = random_digits(n, rng);
      return LcsProblem{std::move(l), std::move(r)};
    }
    case Task::Lps:
      return LpsProblem{random_digits(n, rng)};
    case Task::Knapsack: {
      KnapsackProblem k;
      std::int64_t total_weight = 0;
      for (int i = 0; i < n; ++i) {
        const auto value = rng.uniform_int(1, 99);
        const auto weight = rng.uniform_int(1, 99);
        k.items.push_back({value, weight});
        total_weight += weight;
      }
      k.capacity = rng.uniform_int(1, total_weight);
      return k;
    }
    case Task::TernaryAdd:
      return TernaryAddProblem{log_uniform(0, limit, 3.0, rng), log_uniform(0, limit, 3.0, rng),
                               log_uniform(0, limit, 3.0, rng)};
    case Task::TernaryMul:
      return TernaryMulProblem{log_uniform(1, limit, 3.0, rng), log_uniform(1, limit, 3.0, rng),
                               log_uniform(1, limit, 3.0, rng)};
    case Task::Mcm: {
      std::vector<std::int64_t> dims(static_cast<std::size_t>(n) + 1);
      for (auto& d : dims) d = rng.uniform_int(1, 99);
      McmProblem m;
      for (int i = 0; i < n; ++i) m.mats.push_back({dims[i], dims[i + 1]});
      return m;
    }
    case Task::MergeSort:
      return MergeSortProblem{sample_sort_terms(n, rng)};
    case Task::Merge: {
      auto terms = sample_sort_terms(std::max(n, 2), rng);
      const auto half = static_cast<std::ptrdiff_t>((terms.size() + 1) / 2);
      std::vector<std::int64_t> l(terms.begin(), terms.begin() + half);
      std::vector<std::int64_t> r(terms.begin() + half, terms.end());
      std::sort(l.begin(), l.end());
      std::sort(r.begin(), r.end());
      return MergeProblem{std::move(l), std::move(r)};
    }
  }
  throw ConfigError("unsupported task");
}

Problem sample_problem_at(Task task, int difficulty, std::uint64_t seed, std::uint64_t index) {
  Rng rng(stream_seed(seed, static_cast<std::uint64_t>(task),
                      static_cast<std::uint64_t>(difficulty), index));
  return sample_problem(task, difficulty, rng);
}

// ---- reference solvers -----------------------------------------------------

namespace {

SubseqAnswer lcs_table(const std::string& l, const std::string& r) {
  const std::size_t n = l.size(), m = r.size();
  std::vector<std::vector<std::size_t>> len(n + 1, std::vector<std::size_t>(m + 1, 0));
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      len[i][j] = l[i - 1] == r[j - 1] ? len[i - 1][j - 1] + 1
                                       : std::max(len[i - 1][j], len[i][j - 1]);
    }
  }
  // Walk back from (n, m). On a length tie the left-shortened branch wins.
  std::string out;
  std::size_t i = n, j = m;
  while (i > 0 && j > 0) {
    if (l[i - 1] == r[j - 1]) {
      out.push_back(l[i - 1]);
      --i;
      --j;
    } else if (len[i - 1][j] >= len[i][j - 1]) {
      --i;
    } else {
      --j;
    }
  }
  std::reverse(out.begin(), out.end());
  return {out};
}

SubseqAnswer lps_table(const std::string& s) {
  const std::size_t n = s.size();
  if (n == 0) return {""};
  std::vector<std::vector<std::size_t>> len(n, std::vector<std::size_t>(n, 0));
  for (std::size_t i = 0; i < n; ++i) len[i][i] = 1;
  for (std::size_t width = 2; width <= n; ++width) {
    for (std::size_t i = 0; i + width <= n; ++i) {
      const std::size_t j = i + width - 1;
      if (s[i] == s[j]) {
        len[i][j] = (width == 2 ? 0 : len[i + 1][j - 1]) + 2;
      } else {
        len[i][j] = std::max(len[i][j - 1], len[i + 1][j]);
      }
    }
  }
  // Reconstruct; on a tie the suffix-dropping branch s[i..j-1] wins.
  std::string front, back;
  std::size_t i = 0, j = n - 1;
  while (true) {
    if (i == j) {
      front.push_back(s[i]);
      break;
    }
    if (s[i] == s[j]) {
      front.push_back(s[i]);
      back.push_back(s[j]);
      if (j == i + 1) break;
      ++i;
      --j;
    } else if (j == i + 1 || len[i][j - 1] >= len[i + 1][j]) {
      if (j == i + 1) {
        front.push_back(s[i]);
        break;
      }
      --j;
    } else {
      ++i;
    }
  }
  std::reverse(back.begin(), back.end());
  return {front + back};
}

KnapsackAnswer knapsack_table(const KnapsackProblem& k) {
  const std::size_t n = k.items.size();
  const auto cap = static_cast<std::size_t>(std::max<std::int64_t>(k.capacity, 0));
  std::vector<std::vector<std::int64_t>> best(n + 1, std::vector<std::int64_t>(cap + 1, 0));
  for (std::size_t i = n; i-- > 0;) {
    const auto [v, w] = k.items[i];
    for (std::size_t c = 0; c <= cap; ++c) {
      best[i][c] = best[i + 1][c];
      if (static_cast<std::size_t>(w) <= c) {
        const auto incl = v + best[i + 1][c - static_cast<std::size_t>(w)];
        if (incl > best[i][c]) best[i][c] = incl;  // ties keep the exclusion
      }
    }
  }
  KnapsackAnswer ans{{}, best[0][cap]};
  std::size_t c = cap;
  for (std::size_t i = 0; i < n; ++i) {
    const auto [v, w] = k.items[i];
    if (static_cast<std::size_t>(w) <= c && v + best[i + 1][c - static_cast<std::size_t>(w)] > best[i + 1][c]) {
      ans.items.push_back(k.items[i]);
      c -= static_cast<std::size_t>(w);
    }
  }
  return ans;
}

struct McmTable {
  std::vector<std::vector<std::int64_t>> cost;
  std::vector<std::vector<std::size_t>> split;  // left group is [i, split]
  const std::vector<MatShape>* mats;

  McmOrder order(std::size_t i, std::size_t j) const {
    if (i == j) return McmOrder::leaf((*mats)[i]);
    const auto k = split[i][j];
    return McmOrder::join(order(i, k), order(k + 1, j));
  }
};

McmTable mcm_table(const std::vector<MatShape>& mats) {
  const std::size_t n = mats.size();
  McmTable t{std::vector<std::vector<std::int64_t>>(n, std::vector<std::int64_t>(n, 0)),
             std::vector<std::vector<std::size_t>>(n, std::vector<std::size_t>(n, 0)), &mats};
  for (std::size_t width = 2; width <= n; ++width) {
    for (std::size_t i = 0; i + width <= n; ++i) {
      const std::size_t j = i + width - 1;
      bool first = true;
      for (std::size_t k = i; k < j; ++k) {
        const auto c =
            t.cost[i][k] + t.cost[k + 1][j] + mats[i].rows * mats[k + 1].rows * mats[j].cols;
        if (first || c < t.cost[i][j]) {  // strict: the earliest split wins ties
          t.cost[i][j] = c;
          t.split[i][j] = k;
          first = false;
        }
      }
    }
  }
  return t;
}

McmAnswer mcm_answer(const McmProblem& m) {
  const std::size_t n = m.mats.size();
  if (n == 0) throw std::invalid_argument("MCM with no matrices");
  const auto t = mcm_table(m.mats);
  if (!m.state) return {t.order(0, n - 1), t.cost[0][n - 1]};

  McmAnswer best{m.state->best_order, m.state->best_cost};
  for (std::size_t k = m.state->split; k < n; ++k) {
    const auto c = t.cost[0][k - 1] + t.cost[k][n - 1] + m.mats[0].rows * m.mats[k].rows * m.mats[n - 1].cols;
    if (c < best.cost) best = {McmOrder::join(t.order(0, k - 1), t.order(k, n - 1)), c};
  }
  return best;
}

}  // namespace

Answer direct_answer(const Problem& problem) {
  return std::visit(
      overloaded{
          [](const AddProblem& p) -> Answer { return Number(p.left + p.right); },
          [](const SubProblem& p) -> Answer {
            if (p.left < p.right) throw std::invalid_argument("Sub with left < right");
            return Number(p.left - p.right);
          },
          [](const MulProblem& p) -> Answer { return Number(p.left * p.right); },
          [](const DivProblem& p) -> Answer {
            if (p.right == 0) throw std::invalid_argument("Div by zero");
            return DivAnswer{p.left / p.right, p.left % p.right};
          },
          [](const CompareProblem& p) -> Answer { return compare_numbers(p.left, p.right); },
          [](const EqualProblem& p) -> Answer { return p.left == p.right; },
          [](const LcsProblem& p) -> Answer { return lcs_table(p.left, p.right); },
          [](const LpsProblem& p) -> Answer { return lps_table(p.seq); },
          [](const KnapsackProblem& p) -> Answer { return knapsack_table(p); },
          [](const TernaryAddProblem& p) -> Answer { return Number(p.a1 + p.a2 + p.a3); },
          [](const TernaryMulProblem& p) -> Answer { return Number(p.a1 * p.a2 * p.a3); },
          [](const McmProblem& p) -> Answer { return mcm_answer(p); },
          [](const MergeSortProblem& p) -> Answer {
            auto t = p.terms;
            std::sort(t.begin(), t.end());
            return SortedAnswer{std::move(t)};
          },
          [](const MergeProblem& p) -> Answer {
            std::vector<std::int64_t> out;
            std::merge(p.left.begin(), p.left.end(), p.right.begin(), p.right.end(),
                       std::back_inserter(out));
            return SortedAnswer{std::move(out)};
          },
      },
      problem);
}

namespace {

std::string join_terms(const std::vector<std::int64_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(v[i]);
  }
  return s;
}

std::string shapes_text(const std::vector<MatShape>& mats, std::size_t from, std::size_t to) {
  std::string s;
  for (std::size_t i = from; i < to; ++i) {
    if (i > from) s += ',';
    s += std::to_string(mats[i].rows) + "x" + std::to_string(mats[i].cols);
  }
  return s;
}

}  // namespace

std::string describe(const Problem& problem) {
  std::ostringstream os;
  std::visit(
      overloaded{
          [&](const EqualProblem& p) { os << "Equal(" << p.left << ", " << p.right << ")"; },
          [&](const LcsProblem& p) { os << "LCS(\"" << p.left << "\", \"" << p.right << "\")"; },
          [&](const LpsProblem& p) { os << "LPS(\"" << p.seq << "\")"; },
          [&](const KnapsackProblem& p) {
            os << "Knapsack([";
            for (std::size_t i = 0; i < p.items.size(); ++i) {
              os << (i ? ", " : "") << p.items[i].value << "&" << p.items[i].weight;
            }
            os << "] @" << p.capacity << ")";
          },
          [&](const McmProblem& p) {
            os << "MCM(";
            if (p.state) {
              os << shapes_text(p.mats, 0, p.state->split) << " | "
                 << shapes_text(p.mats, p.state->split, p.mats.size()) << " best "
                 << p.state->best_cost;
            } else {
              os << shapes_text(p.mats, 0, p.mats.size());
            }
            os << ")";
          },
          [&](const MergeSortProblem& p) { os << "MergeSort(" << join_terms(p.terms) << ")"; },
          [&](const MergeProblem& p) {
            os << "Merge(" << join_terms(p.left) << " | " << join_terms(p.right) << ")";
          },
          [&](const auto& p) {
            if constexpr (requires { p.a3; }) {
              os << task_name(task_of(Problem{p})) << "(" << p.a1 << ", " << p.a2 << ", " << p.a3
                 << ")";
            } else {
              os << task_name(task_of(Problem{p})) << "(" << p.left << ", " << p.right << ")";
            }
          },
      },
      problem);
  return os.str();
}

}  // namespace rot
