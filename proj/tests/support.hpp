#pragma once

// Shared by the unit tests and the acceptance runner: brute-force oracles,
// the transcribed context listings and per-task test difficulties.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "rot/context.hpp"

namespace rot::support {

// Difficulty used for each task in the randomized suites.
inline int desk_difficulty(Task t) {
  switch (t) {
    case Task::Add:
    case Task::Sub: return 16;
    case Task::Mul:
    case Task::Div: return 8;
    case Task::Lcs: return 16;
    case Task::Lps: return 24;
    case Task::Knapsack: return 6;
    case Task::Mcm: return 4;
    case Task::MergeSort:
    case Task::Merge: return 8;
    default: return 6;
  }
}

inline bool is_subsequence(const std::string& sub, const std::string& s) {
  std::size_t i = 0;
  for (char c : s) {
    if (i < sub.size() && sub[i] == c) ++i;
  }
  return i == sub.size();
}

inline std::size_t brute_lcs(const std::string& l, const std::string& r) {
  std::size_t best = 0;
  for (std::uint32_t mask = 0; mask < (1u << l.size()); ++mask) {
    std::string s;
    for (std::size_t i = 0; i < l.size(); ++i) {
      if (mask >> i & 1) s.push_back(l[i]);
    }
    if (s.size() > best && is_subsequence(s, r)) best = s.size();
  }
  return best;
}

inline std::size_t brute_lps(const std::string& x) {
  std::size_t best = 0;
  for (std::uint32_t mask = 1; mask < (1u << x.size()); ++mask) {
    std::string s;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (mask >> i & 1) s.push_back(x[i]);
    }
    if (s.size() > best && std::equal(s.begin(), s.end(), s.rbegin())) best = s.size();
  }
  return best;
}

inline std::int64_t brute_knapsack(const KnapsackProblem& k) {
  std::int64_t best = 0;
  for (std::uint32_t mask = 0; mask < (1u << k.items.size()); ++mask) {
    std::int64_t v = 0, w = 0;
    for (std::size_t i = 0; i < k.items.size(); ++i) {
      if (mask >> i & 1) {
        v += k.items[i].value;
        w += k.items[i].weight;
      }
    }
    if (w <= k.capacity) best = std::max(best, v);
  }
  return best;
}

// Cheapest full parenthesization of mats[i..j], tried every way.
inline std::int64_t brute_mcm(const std::vector<MatShape>& m, std::size_t i, std::size_t j) {
  if (i == j) return 0;
  std::int64_t best = std::numeric_limits<std::int64_t>::max();
  for (std::size_t k = i; k < j; ++k) {
    best = std::min(best, brute_mcm(m, i, k) + brute_mcm(m, k + 1, j) +
                              m[i].rows * m[k].cols * m[j].cols);
  }
  return best;
}

inline void collect_leaves(const McmOrder& o, std::vector<MatShape>& out) {
  if (o.is_leaf()) {
    out.push_back(o.shape());
    return;
  }
  collect_leaves(o.left(), out);
  collect_leaves(o.right(), out);
}


// Listed contexts of one problem, keyed by their creation index (1-based).
using Listing = std::map<std::size_t, std::string>;

inline std::vector<Listing> load_listings() {
  std::ifstream in(std::string(ROT_TEST_DATA) + "/contexts.txt");
  std::vector<Listing> out;
  Listing cur;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
      continue;
    }
    auto tab = line.find('\t');
    cur[std::stoul(line.substr(0, tab))] = line.substr(tab + 1);
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}


}  // namespace rot::support
