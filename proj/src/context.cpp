#include "rot/context.hpp"

#include <algorithm>
#include <unordered_map>

#include "rot/render.hpp"

namespace rot {

TokenSeq render(const Context& c) {
  TokenSeq x = c.question;
  for (const auto& s : c.subs) {
    x.insert(x.end(), s.question.begin(), s.question.end());
    x.insert(x.end(), s.answer.begin(), s.answer.end());
  }
  x.insert(x.end(), c.answer.begin(), c.answer.end());
  return x;
}

TokenSeq build_target(const Context& c) {
  TokenSeq y(c.question.size(), Token::Pad);
  for (const auto& s : c.subs) {
    y.insert(y.end(), s.question.begin(), s.question.end());
    y.push_back(Token::Think);
    y.insert(y.end(), s.answer.size() - 1, Token::Pad);
  }
  y.insert(y.end(), c.answer.begin(), c.answer.end());
  return y;
}

std::size_t generated_tokens(const Context& c) {
  std::size_t n = c.answer.size();
  for (const auto& s : c.subs) n += s.question.size();
  return n;
}

ContextTree build_rot_tree(const Problem& root, std::size_t max_depth) {
  ContextTree tree;
  std::unordered_map<std::string, std::size_t> index;
  std::vector<std::vector<Thought>> pending;  // thoughts per node, consumed while building

  auto create = [&](Problem p) {
    auto q = render_question(p);
    index.emplace(seq_key(q), tree.nodes.size());
    pending.push_back(thought(p));
    tree.nodes.push_back(ContextNode{std::move(p), Answer{}, Context{std::move(q), {}, {}}});
    return tree.nodes.size() - 1;
  };

  struct Frame {
    std::size_t node;
    std::size_t next = 0;
  };
  std::vector<Frame> stack{{create(root)}};
  std::vector<std::size_t> post_order;
  post_order.reserve(64);

  while (!stack.empty()) {
    Frame& top = stack.back();
    const std::size_t id = top.node;
    if (top.next < pending[id].size()) {
      const Thought& t = pending[id][top.next++];
      auto key = seq_key(render_question(t.problem));
      std::size_t child;
      if (auto it = index.find(key); it != index.end()) {
        child = it->second;
      } else {
        if (stack.size() >= max_depth) {
          throw RecursionError("context tree deeper than " + std::to_string(max_depth));
        }
        child = create(t.problem);
        stack.push_back({child});
      }
      tree.nodes[id].context.subs.push_back(SubPair{{}, {}, t.type, child});
      continue;
    }

    // All children are complete: fill in sub-pair tokens and this answer.
    auto& node = tree.nodes[id];
    std::vector<Answer> sub_answers;
    sub_answers.reserve(node.context.subs.size());
    for (auto& s : node.context.subs) {
      const auto& child = tree.nodes[s.child];
      sub_answers.push_back(child.answer);
      s.question = child.context.question;
      if (s.type == RecursionType::Tail) {
        s.question.front() = Token::Tail;
        s.answer = {Token::Think};
      } else {
        s.answer = render_answer(child.answer);
      }
    }
    node.answer = combine_answer(node.problem, sub_answers);
    if (!node.context.tail_terminated()) node.context.answer = render_answer(node.answer);
    pending[id].clear();
    post_order.push_back(id);
    stack.pop_back();
  }

  tree.topo_order.assign(post_order.rbegin(), post_order.rend());
  return tree;
}

std::vector<Number> ContextTree::multiplicities() const {
  std::vector<Number> count(nodes.size(), 0);
  count[0] = 1;
  for (std::size_t id : topo_order) {
    for (const auto& s : nodes[id].context.subs) count[s.child] += count[id];
  }
  return count;
}

std::vector<std::size_t> expanded_order(const ContextTree& tree, std::size_t limit) {
  std::vector<std::size_t> order;
  struct Frame {
    std::size_t node;
    std::size_t next;
  };
  std::vector<Frame> stack{{0, 0}};
  order.push_back(0);
  while (!stack.empty()) {
    auto& top = stack.back();
    const auto& subs = tree.nodes[top.node].context.subs;
    if (top.next == subs.size()) {
      stack.pop_back();
      continue;
    }
    const std::size_t child = subs[top.next++].child;
    if (order.size() >= limit) throw RecursionError("expanded recursion exceeds limit");
    order.push_back(child);
    stack.push_back({child, 0});
  }
  return order;
}

TokenAccount account_tokens(const ContextTree& tree) {
  TokenAccount acc;
  const auto count = tree.multiplicities();
  acc.contexts_unique = tree.size();

  // CoT length per node, children first.
  std::vector<Number> cot(tree.size(), 0);
  for (auto it = tree.topo_order.rbegin(); it != tree.topo_order.rend(); ++it) {
    const auto& c = tree.nodes[*it].context;
    Number len = c.question.size() + c.answer.size();
    for (const auto& s : c.subs) {
      const auto& child_q = tree.nodes[s.child].context.question;
      len += s.question.size() + cot[s.child] - child_q.size();
    }
    cot[*it] = len;
  }

  for (std::size_t i = 0; i < tree.size(); ++i) {
    const auto& c = tree.nodes[i].context;
    const auto gen = generated_tokens(c);
    acc.rot_generated_naive += count[i] * gen;
    acc.rot_think_naive += count[i] * c.subs.size();
    acc.rot_generated_cached += gen;
    acc.contexts_naive += count[i];
    acc.rot_max_context = std::max(acc.rot_max_context, render(c).size());
  }
  acc.cot_length = cot[0];
  acc.cot_generated = cot[0] - tree.root().context.question.size();
  return acc;
}

TokenSeq build_cot_context(const ContextTree& tree, std::size_t max_tokens) {
  TokenSeq out;
  auto emit = [&](const TokenSeq& ts) {
    if (out.size() + ts.size() > max_tokens) {
      throw RecursionError("CoT context exceeds " + std::to_string(max_tokens) + " tokens");
    }
    out.insert(out.end(), ts.begin(), ts.end());
  };
  struct Frame {
    std::size_t node;
    std::size_t next;
  };
  emit(tree.root().context.question);
  std::vector<Frame> stack{{0, 0}};
  while (!stack.empty()) {
    auto& top = stack.back();
    const auto& c = tree.nodes[top.node].context;
    if (top.next == c.subs.size()) {
      emit(c.answer);
      stack.pop_back();
      continue;
    }
    const auto& s = c.subs[top.next++];
    emit(s.question);  // the child's body follows its question directly
    stack.push_back({s.child, 0});
  }
  return out;
}

TokenSeq build_cot_context(const Problem& p, std::size_t max_tokens) {
  return build_cot_context(build_rot_tree(p), max_tokens);
}

std::pair<TokenSeq, TokenSeq> build_wt_pair(const Problem& p) {
  return {render_question(p), render_answer(direct_answer(p))};
}

Context build_context(const Problem& p) {
  Context c{render_question(p), {}, {}};
  std::vector<Answer> sub_answers;
  for (const auto& t : thought(p)) {
    sub_answers.push_back(direct_answer(t.problem));
    SubPair s{render_question(t.problem), {}, t.type, 0};
    if (t.type == RecursionType::Tail) {
      s.question.front() = Token::Tail;
      s.answer = {Token::Think};
    } else {
      s.answer = render_answer(sub_answers.back());
    }
    c.subs.push_back(std::move(s));
  }
  if (!c.tail_terminated()) c.answer = render_answer(combine_answer(p, sub_answers));
  return c;
}

std::string_view thought_name(ThoughtType t) noexcept {
  switch (t) {
    case ThoughtType::Wt: return "wt";
    case ThoughtType::Cot: return "cot";
    case ThoughtType::Rot: return "rot";
  }
  return "?";
}

ThoughtType thought_from_name(std::string_view name) {
  for (auto t : {ThoughtType::Wt, ThoughtType::Cot, ThoughtType::Rot}) {
    if (thought_name(t) == name) return t;
  }
  throw ConfigError("unknown thought type '" + std::string(name) + "' (want wt, cot or rot)");
}

namespace {

LabeledContext mask_question(TokenSeq x, std::size_t q_len) {
  TokenSeq y = x;
  std::fill_n(y.begin(), q_len, Token::Pad);
  return {std::move(x), std::move(y)};
}

}  // namespace

std::vector<LabeledContext> labeled_contexts(const Problem& p, ThoughtType type,
                                             std::size_t max_cot_tokens) {
  std::vector<LabeledContext> out;
  switch (type) {
    case ThoughtType::Rot: {
      const auto tree = build_rot_tree(p);
      out.reserve(tree.size());
      for (const auto& n : tree.nodes) out.push_back({render(n.context), build_target(n.context)});
      break;
    }
    case ThoughtType::Cot: {
      auto q_len = render_question(p).size();
      out.push_back(mask_question(build_cot_context(p, max_cot_tokens), q_len));
      break;
    }
    case ThoughtType::Wt: {
      auto [q, a] = build_wt_pair(p);
      auto q_len = q.size();
      q.insert(q.end(), a.begin(), a.end());
      out.push_back(mask_question(std::move(q), q_len));
      break;
    }
  }
  return out;
}

TrainingExample sample_training_context(const Problem& p, Rng& rng) {
  const auto tree = build_rot_tree(p);
  const auto pick = static_cast<std::size_t>(
      rng.uniform_int(0, static_cast<std::int64_t>(tree.size()) - 1));
  const auto& c = tree.nodes[pick].context;
  return {render(c), build_target(c)};
}

}  // namespace rot
