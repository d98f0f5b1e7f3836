#include "rot/evaluator.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>
#include <unordered_map>

#include <json.hpp>

#include "rot/oracle.hpp"
#include "rot/render.hpp"

namespace rot {

UniqueContextSet collect_unique_contexts(std::span<const Problem> problems, ThoughtType type,
                                         std::size_t materialize_limit) {
  UniqueContextSet set;
  set.total_contexts = 0;
  std::unordered_map<std::string, std::size_t> ids;
  set.membership.reserve(problems.size());

  // Returns the id for `question`, creating the item with `make` if new.
  auto intern = [&](const TokenSeq& question, auto&& make) {
    auto [it, fresh] = ids.try_emplace(seq_key(question), set.items.size());
    if (fresh) set.items.push_back(make());
    return it->second;
  };

  for (const auto& p : problems) {
    std::vector<std::size_t> mine;
    switch (type) {
      case ThoughtType::Rot: {
        const auto tree = build_rot_tree(p);
        for (const auto& m : tree.multiplicities()) set.total_contexts += m;
        for (const auto& node : tree.nodes) {
          mine.push_back(intern(node.context.question, [&] {
            EvalItem item;
            auto x = render(node.context);
            item.length = x.size();
            if (x.size() <= materialize_limit) item.labeled = {std::move(x), build_target(node.context)};
            return item;
          }));
        }
        break;
      }
      case ThoughtType::Cot: {
        set.total_contexts += 1;
        mine.push_back(intern(render_question(p), [&] {
          const auto tree = build_rot_tree(p);
          EvalItem item;
          item.length = account_tokens(tree).cot_length;
          if (item.length <= materialize_limit) {
            item.labeled = std::move(labeled_contexts(p, ThoughtType::Cot, materialize_limit).front());
          }
          return item;
        }));
        break;
      }
      case ThoughtType::Wt: {
        set.total_contexts += 1;
        mine.push_back(intern(render_question(p), [&] {
          EvalItem item;
          item.labeled = std::move(labeled_contexts(p, ThoughtType::Wt).front());
          item.length = item.labeled.context.size();
          return item;
        }));
        break;
      }
    }
    std::sort(mine.begin(), mine.end());
    mine.erase(std::unique(mine.begin(), mine.end()), mine.end());
    set.membership.push_back(std::move(mine));
  }
  return set;
}

const char* note_name(VerdictNote n) noexcept {
  switch (n) {
    case VerdictNote::None: return "";
    case VerdictNote::Mismatch: return "Mismatch";
    case VerdictNote::ContextOverflow: return "ContextOverflow";
    case VerdictNote::ModelError: return "ModelError";
  }
  return "?";
}

ContextVerdict evaluate_context(const Predictor& model, const LabeledContext& lc) {
  const auto& x = lc.context;
  const auto& y = lc.target;
  if (x.size() != y.size()) throw std::invalid_argument("context and target lengths differ");
  if (x.size() > model.max_context()) return {false, VerdictNote::ContextOverflow, 0};
  std::vector<Token> pred;
  try {
    pred = model.predict_all(x);
  } catch (const std::exception&) {
    return {false, VerdictNote::ModelError, 0};
  }
  for (std::size_t j = 1; j < x.size(); ++j) {
    if (y[j] != Token::Pad && pred[j - 1] != y[j]) return {false, VerdictNote::Mismatch, j};
  }
  return {true, VerdictNote::None, 0};
}

ContextVerdict evaluate_context(const Predictor& model, const EvalItem& item) {
  if (!item.materialized() || item.length > model.max_context()) {
    return {false, VerdictNote::ContextOverflow, 0};
  }
  return evaluate_context(model, item.labeled);
}

EvalReport aggregate(const UniqueContextSet& set, std::vector<ContextVerdict> verdicts) {
  if (verdicts.size() != set.items.size()) throw std::invalid_argument("one verdict per context needed");
  EvalReport r;
  r.unique_contexts = set.items.size();
  r.total_contexts = set.total_contexts;
  r.context_keys.reserve(set.items.size());
  for (std::size_t i = 0; i < set.items.size(); ++i) {
    const auto& it = set.items[i];
    r.context_keys.push_back(it.materialized() ? to_text(leading_question(it.labeled.context))
                                               : std::string("<") + to_string(it.length) + " tokens>");
    r.overflow_contexts += verdicts[i].note == VerdictNote::ContextOverflow;
  }
  std::size_t correct = 0;
  for (const auto& ids : set.membership) {
    const bool ok = std::all_of(ids.begin(), ids.end(), [&](std::size_t i) { return verdicts[i].pass; });
    r.problem_verdicts.push_back(ok);
    correct += ok;
  }
  r.accuracy = set.membership.empty() ? 0.0
                                      : static_cast<double>(correct) / static_cast<double>(set.membership.size());
  r.context_verdicts = std::move(verdicts);
  return r;
}

void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mu);
          if (!error) error = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

EvalReport evaluate(const Predictor& model, std::span<const Problem> problems, ThoughtType type,
                    std::size_t workers) {
  const auto set = collect_unique_contexts(problems, type, model.max_context());
  std::vector<ContextVerdict> verdicts(set.items.size());
  parallel_for(set.items.size(), workers,
               [&](std::size_t i) { verdicts[i] = evaluate_context(model, set.items[i]); });
  return aggregate(set, std::move(verdicts));
}

std::vector<bool> naive_evaluate(const Predictor& model, std::span<const Problem> problems,
                                 ThoughtType type) {
  std::vector<bool> out;
  out.reserve(problems.size());
  for (const auto& root : problems) {
    bool ok = true;
    if (type == ThoughtType::Rot) {
      std::vector<Problem> todo{root};
      while (ok && !todo.empty()) {
        const Problem p = std::move(todo.back());
        todo.pop_back();
        const auto c = build_context(p);
        ok = evaluate_context(model, LabeledContext{render(c), build_target(c)}).pass;
        for (auto& t : thought(p)) todo.push_back(std::move(t.problem));
      }
    } else {
      try {
        const auto lcs = labeled_contexts(root, type, model.max_context());
        ok = evaluate_context(model, lcs.front()).pass;
      } catch (const RecursionError&) {
        ok = false;  // CoT longer than the model can see
      }
    }
    out.push_back(ok);
  }
  return out;
}

std::string report_json(const EvalReport& r, bool with_contexts) {
  nlohmann::ordered_json j;
  j["accuracy"] = r.accuracy;
  j["problems"] = r.problem_verdicts.size();
  j["correct"] = std::count(r.problem_verdicts.begin(), r.problem_verdicts.end(), true);
  j["unique_contexts"] = r.unique_contexts;
  j["total_contexts"] = to_string(r.total_contexts);
  j["overflow_contexts"] = r.overflow_contexts;
  j["problem_verdicts"] = r.problem_verdicts;
  if (with_contexts) {
    auto& arr = j["context_verdicts"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < r.context_verdicts.size(); ++i) {
      const auto& v = r.context_verdicts[i];
      nlohmann::ordered_json e{{"question", r.context_keys[i]}, {"pass", v.pass}};
      if (!v.pass) {
        e["note"] = note_name(v.note);
        if (v.note == VerdictNote::Mismatch) e["position"] = v.position;
      }
      arr.push_back(std::move(e));
    }
  }
  return j.dump(2);
}

// ---- statistics ------------------------------------------------------------

void Histogram::add(const Number& v) {
  const std::size_t k = v <= 1 ? 0 : static_cast<std::size_t>(boost::multiprecision::msb(v));
  if (counts.size() <= k) counts.resize(k + 1, 0);
  ++counts[k];
}

std::uint64_t Histogram::total() const {
  std::uint64_t t = 0;
  for (auto c : counts) t += c;
  return t;
}

LengthStats length_and_token_stats(Task task, int difficulty, std::size_t n, std::uint64_t seed) {
  LengthStats s{task, difficulty, n, {}, {}, {}, {}, {}, {}, {}};
  for (std::size_t i = 0; i < n; ++i) {
    const auto p = sample_problem_at(task, difficulty, seed, i);
    const auto tree = build_rot_tree(p);
    const auto acc = account_tokens(tree);
    Rng rng(stream_seed(seed ^ 0x5eed5eedULL, static_cast<std::uint64_t>(task),
                        static_cast<std::uint64_t>(difficulty), i));
    const auto pick = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(tree.size()) - 1));
    const auto len = render(tree.nodes[pick].context).size();
    s.rot_context_lengths.push_back(len);
    s.rot_max_lengths.push_back(acc.rot_max_context);
    s.cot_lengths.push_back(acc.cot_length);
    s.tokens_naive.push_back(acc.rot_generated_naive);
    s.tokens_cached.push_back(acc.rot_generated_cached);
    s.rot_hist.add(len);
    s.cot_hist.add(acc.cot_length);
  }
  return s;
}

std::string histogram_csv(const LengthStats& s) {
  std::ostringstream os;
  os << "bucket,lower,upper,rot,cot\n";
  const auto n = std::max(s.rot_hist.counts.size(), s.cot_hist.counts.size());
  for (std::size_t k = 0; k < n; ++k) {
    const Number lower = k == 0 ? Number(0) : Number(1) << k;
    const Number upper = (Number(1) << (k + 1)) - 1;
    auto at = [k](const Histogram& h) { return k < h.counts.size() ? h.counts[k] : 0; };
    os << k << ',' << lower << ',' << upper << ',' << at(s.rot_hist) << ',' << at(s.cot_hist) << '\n';
  }
  return os.str();
}

}  // namespace rot
