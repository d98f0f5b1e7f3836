#include "rot/config.hpp"

#include <set>
#include <type_traits>

namespace rot {

namespace {

class Reader {
 public:
  Reader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  template <class T>
  void field(const char* key, T& out) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    const auto where = path_ + "." + key;
    if constexpr (std::is_same_v<T, bool>) {
      if (!it->is_boolean()) throw ConfigError(where + ": expected true or false");
    } else if constexpr (std::is_integral_v<T>) {
      if (!it->is_number_integer()) throw ConfigError(where + ": expected an integer");
      if (std::is_unsigned_v<T> && it->template get<std::int64_t>() < 0 && !it->is_number_unsigned()) {
        throw ConfigError(where + ": must not be negative");
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!it->is_number()) throw ConfigError(where + ": expected a number");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!it->is_string()) throw ConfigError(where + ": expected a string");
    }
    out = it->template get<T>();
  }

  const Json* raw(const char* key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  const std::string& path() const { return path_; }

  void done() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) throw ConfigError(path_ + "." + k + ": unknown field");
    }
  }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <class C>
void checked(const C& c, const std::string& path) {
  try {
    validate(c);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

}  // namespace

Json to_json(const ModelConfig& c) {
  return {{"vocab_size", c.vocab_size},   {"d_model", c.d_model},
          {"n_layers", c.n_layers},       {"n_heads", c.n_heads},
          {"ffn_hidden", c.ffn_hidden},   {"max_context", c.max_context},
          {"dropout", c.dropout},         {"tie_embeddings", c.tie_embeddings},
          {"init_std", c.init_std}};
}

ModelConfig model_config_from_json(const Json& j, const std::string& path) {
  ModelConfig c;
  Reader r(j, path);
  r.field("vocab_size", c.vocab_size);
  r.field("d_model", c.d_model);
  r.field("n_layers", c.n_layers);
  r.field("n_heads", c.n_heads);
  r.field("ffn_hidden", c.ffn_hidden);
  r.field("max_context", c.max_context);
  r.field("dropout", c.dropout);
  r.field("tie_embeddings", c.tie_embeddings);
  r.field("init_std", c.init_std);
  r.done();
  checked(c, path);
  return c;
}

Json to_json(const TrainConfig& c) {
  return {{"batch_size", c.batch_size},       {"learning_rate", c.learning_rate},
          {"total_steps", c.total_steps},     {"decay_interval", c.decay_interval},
          {"eval_interval", c.eval_interval}, {"early_stop", c.early_stop},
          {"seed", c.seed},                   {"eval_problems", c.eval_problems},
          {"queue_capacity", c.queue_capacity}, {"workers", c.workers}};
}

TrainConfig train_config_from_json(const Json& j, const std::string& path) {
  TrainConfig c = desk_preset();
  Reader r(j, path);
  if (const auto* p = r.raw("preset")) {
    if (!p->is_string()) throw ConfigError(path + ".preset: expected a string");
    const auto name = p->get<std::string>();
    if (name == "full") c = full_preset();
    else if (name != "desk") throw ConfigError(path + ".preset: expected \"desk\" or \"full\"");
  }
  r.field("batch_size", c.batch_size);
  r.field("learning_rate", c.learning_rate);
  r.field("total_steps", c.total_steps);
  r.field("decay_interval", c.decay_interval);
  r.field("eval_interval", c.eval_interval);
  r.field("early_stop", c.early_stop);
  r.field("seed", c.seed);
  r.field("eval_problems", c.eval_problems);
  r.field("queue_capacity", c.queue_capacity);
  r.field("workers", c.workers);
  r.done();
  checked(c, path);
  return c;
}

Json to_json(const InferenceLimits& c) {
  return {{"max_context_tokens", c.max_context_tokens}, {"max_depth", c.max_depth},
          {"max_total_tokens", c.max_total_tokens},     {"memoize", c.memoize},
          {"max_transcripts", c.max_transcripts}};
}

InferenceLimits limits_from_json(const Json& j, const std::string& path) {
  InferenceLimits c;
  Reader r(j, path);
  r.field("max_context_tokens", c.max_context_tokens);
  r.field("max_depth", c.max_depth);
  r.field("max_total_tokens", c.max_total_tokens);
  r.field("memoize", c.memoize);
  r.field("max_transcripts", c.max_transcripts);
  r.done();
  checked(c, path);
  return c;
}

Json to_json(const TaskSpec& t) {
  return {{"task", std::string(task_name(t.task))}, {"difficulty", t.difficulty}};
}

TaskSpec task_spec_from_json(const Json& j, const std::string& path) {
  Reader r(j, path);
  std::string name;
  TaskSpec t{Task::Add, 0};
  r.field("task", name);
  r.field("difficulty", t.difficulty);
  r.done();
  if (name.empty()) throw ConfigError(path + ".task: required");
  try {
    t.task = task_from_name(name);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ".task: " + e.what());
  }
  if (t.difficulty < 1) throw ConfigError(path + ".difficulty: must be >= 1");
  return t;
}

Json to_json(const RunConfig& c) {
  Json tasks = Json::array();
  for (const auto& t : c.tasks) tasks.push_back(to_json(t));
  return {{"tasks", tasks},
          {"thought", std::string(thought_name(c.thought))},
          {"seeds", c.seeds},
          {"n", c.n},
          {"checkpoint", c.checkpoint},
          {"out", c.out},
          {"workers", c.workers},
          {"model", to_json(c.model)},
          {"train", to_json(c.train)},
          {"limits", to_json(c.limits)}};
}

RunConfig run_config_from_json(const Json& j) {
  RunConfig c;
  Reader r(j, "config");
  if (const auto* ts = r.raw("tasks")) {
    if (!ts->is_array() || ts->empty()) throw ConfigError("config.tasks: expected a non-empty array");
    c.tasks.clear();
    for (std::size_t i = 0; i < ts->size(); ++i) {
      c.tasks.push_back(task_spec_from_json((*ts)[i], "config.tasks[" + std::to_string(i) + "]"));
    }
  }
  std::string thought;
  r.field("thought", thought);
  if (!thought.empty()) {
    try {
      c.thought = thought_from_name(thought);
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("config.thought: ") + e.what());
    }
  }
  if (const auto* s = r.raw("seeds")) {
    if (!s->is_array() || s->empty()) throw ConfigError("config.seeds: expected a non-empty array");
    c.seeds.clear();
    for (const auto& v : *s) {
      if (!v.is_number_unsigned()) throw ConfigError("config.seeds: expected non-negative integers");
      c.seeds.push_back(v.get<std::uint64_t>());
    }
  }
  r.field("n", c.n);
  r.field("checkpoint", c.checkpoint);
  r.field("out", c.out);
  r.field("workers", c.workers);
  if (const auto* m = r.raw("model")) c.model = model_config_from_json(*m, "config.model");
  if (const auto* t = r.raw("train")) c.train = train_config_from_json(*t, "config.train");
  if (const auto* l = r.raw("limits")) c.limits = limits_from_json(*l, "config.limits");
  r.done();
  if (c.n == 0) throw ConfigError("config.n: must be positive");
  if (c.workers == 0) throw ConfigError("config.workers: must be positive");
  return c;
}

}  // namespace rot
