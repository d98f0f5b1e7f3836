#include "rot/train.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <exception>
#include <fstream>
#include <sstream>
#include <thread>

#include "rot/config.hpp"
#include "rot/evaluator.hpp"

namespace rot {

static_assert(std::endian::native == std::endian::little, "checkpoints are written little-endian");

void validate(const TrainConfig& c) {
  if (c.batch_size == 0) throw ConfigError("batch_size must be positive");
  if (!(c.learning_rate > 0) || !std::isfinite(c.learning_rate)) throw ConfigError("learning_rate must be positive");
  if (c.total_steps == 0) throw ConfigError("total_steps must be positive");
  if (c.decay_interval == 0) throw ConfigError("decay_interval must be positive");
  if (c.eval_interval == 0) throw ConfigError("eval_interval must be positive");
  if (c.eval_problems == 0) throw ConfigError("eval_problems must be positive");
  if (c.queue_capacity == 0) throw ConfigError("queue_capacity must be positive");
  if (c.workers == 0) throw ConfigError("workers must be positive");
}

TrainConfig desk_preset() { return TrainConfig{}; }

TrainConfig full_preset() {
  TrainConfig c;
  c.batch_size = 256;
  c.total_steps = 500'000;
  c.decay_interval = 50'000;
  c.eval_interval = 20'000;
  return c;
}

double learning_rate_at(const TrainConfig& c, std::uint64_t step) {
  return std::ldexp(c.learning_rate, -static_cast<int>(step / c.decay_interval));
}

namespace {

constexpr std::uint64_t kBatchSalt = 0xba7c4ULL;
constexpr std::uint64_t kValidationSalt = 0x7a11d47eULL;
constexpr std::uint64_t kDropoutSalt = 0xd809ULL;

LabeledContext training_context(const Problem& p, ThoughtType type, std::size_t max_context, Rng& rng) {
  switch (type) {
    case ThoughtType::Rot: {
      auto ex = sample_training_context(p, rng);
      return {std::move(ex.context), std::move(ex.target)};
    }
    case ThoughtType::Cot:
      try {
        return std::move(labeled_contexts(p, type, max_context).front());
      } catch (const RecursionError&) {
        return {TokenSeq(max_context + 1, Token::Pad), {}};  // reported below
      }
    case ThoughtType::Wt: return std::move(labeled_contexts(p, type).front());
  }
  return {};
}

}  // namespace

Batch make_batch(std::span<const TaskSpec> tasks, ThoughtType type, std::size_t batch_size,
                 std::uint64_t seed, std::uint64_t step, std::size_t max_context) {
  if (tasks.empty()) throw ConfigError("no training tasks");
  Rng rng(stream_seed(seed, kBatchSalt, 0, step));
  Batch b;
  for (std::size_t k = 0; k < batch_size; ++k) {
    const auto& ts = tasks[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(tasks.size()) - 1))];
    const auto p = sample_problem_at(ts.task, ts.difficulty, seed, step * batch_size + k);
    const auto lc = training_context(p, type, max_context, rng);
    if (lc.context.size() > max_context) {
      throw ConfigError("a " + std::string(thought_name(type)) + " training context for " +
                        std::string(task_name(ts.task)) + "-" + std::to_string(ts.difficulty) +
                        " exceeds max_context " + std::to_string(max_context));
    }
    append_example(b, lc.context, lc.target);
  }
  return b;
}

std::vector<Problem> validation_problems(std::span<const TaskSpec> tasks, std::size_t per_task,
                                         std::uint64_t seed) {
  std::vector<Problem> out;
  for (const auto& ts : tasks) {
    for (std::size_t i = 0; i < per_task; ++i) {
      out.push_back(sample_problem_at(ts.task, ts.difficulty, mix64(seed ^ kValidationSalt), i));
    }
  }
  return out;
}

std::string metrics_csv(const std::vector<MetricRow>& rows) {
  std::ostringstream os;
  os.precision(9);
  os << "step,loss,lr,accuracy\n";
  for (const auto& r : rows) {
    os << r.step << ',' << r.loss << ',' << r.lr << ',';
    if (r.accuracy) os << *r.accuracy;
    os << '\n';
  }
  return os.str();
}

TrainState::TrainState(ModelConfig mc, TrainConfig tc, std::vector<TaskSpec> ts, ThoughtType type)
    : model_config(mc),
      train_config(tc),
      tasks(std::move(ts)),
      thought(type),
      model((validate(tc), mc), tc.seed),
      dropout_rng(mix64(tc.seed ^ kDropoutSalt)) {}

TrainResult train_loop(TrainState& s, const std::function<void(const MetricRow&)>& on_row) {
  const auto& tc = s.train_config;
  validate(tc);
  const auto max_ctx = static_cast<std::size_t>(s.model_config.max_context);
  const auto val = validation_problems(s.tasks, tc.eval_problems, tc.seed);

  BoundedQueue<Batch> queue(tc.queue_capacity);
  std::exception_ptr producer_error;
  std::thread producer([&, start = s.step] {
    try {
      for (std::uint64_t step = start; step < tc.total_steps; ++step) {
        if (!queue.push(make_batch(s.tasks, s.thought, tc.batch_size, tc.seed, step, max_ctx))) return;
      }
    } catch (...) {
      producer_error = std::current_exception();
    }
    queue.close();
  });

  TrainResult result;
  try {
    while (s.step < tc.total_steps) {
      auto batch = queue.pop();
      if (!batch) break;
      const double lr = learning_rate_at(tc, s.step);
      double loss;
      try {
        loss = s.model.loss(*batch, true, s.model_config.dropout > 0 ? &s.dropout_rng : nullptr);
      } catch (const std::exception& e) {
        throw std::runtime_error("training aborted at step " + std::to_string(s.step) + ": " + e.what());
      }
      adam_update(s.model.params(), s.model.grads(), s.adam, AdamConfig{}, lr);
      ++s.step;

      MetricRow row{s.step, loss, lr, std::nullopt};
      if (s.step % tc.eval_interval == 0 || s.step == tc.total_steps) {
        const NeuralPredictor net(s.model);
        row.accuracy = evaluate(net, val, s.thought, tc.workers).accuracy;
        result.last_accuracy = row.accuracy;
      }
      result.metrics.push_back(row);
      if (on_row) on_row(row);
      if (tc.early_stop && row.accuracy == 1.0) {
        result.stopped_early = s.step < tc.total_steps;
        break;
      }
    }
  } catch (...) {
    queue.close();
    producer.join();
    throw;
  }
  queue.close();
  producer.join();
  if (producer_error) std::rethrow_exception(producer_error);
  return result;
}

// ---- checkpoints -----------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'R', 'O', 'T', 'C', 'K', 'P', 'T', '1'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& is, const std::string& path) {
  T v;
  if (!is.read(reinterpret_cast<char*>(&v), sizeof v)) throw CheckpointError(path + ": truncated header");
  return v;
}

void put_floats(std::ostream& os, const ParamVec<float>& xs) {
  os.write(reinterpret_cast<const char*>(xs.data()), static_cast<std::streamsize>(xs.size() * sizeof(float)));
}

ParamVec<float> get_floats(std::istream& is, std::size_t n, const std::string& path, const char* what) {
  ParamVec<float> xs(n);
  if (!is.read(reinterpret_cast<char*>(xs.data()), static_cast<std::streamsize>(n * sizeof(float)))) {
    throw CheckpointError(path + ": truncated " + what);
  }
  return xs;
}

}  // namespace

void save_checkpoint(const std::string& path, const TrainState& s) {
  Json tasks = Json::array();
  for (const auto& t : s.tasks) tasks.push_back(to_json(t));
  const Json header{{"model", to_json(s.model_config)},
                    {"train", to_json(s.train_config)},
                    {"tasks", tasks},
                    {"thought", std::string(thought_name(s.thought))},
                    {"step", s.step},
                    {"adam_step", s.adam.step},
                    {"has_moments", !s.adam.m.empty()},
                    {"dropout_rng", s.dropout_rng.state()}};
  const auto text = header.dump();

  const auto tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw CheckpointError(path + ": cannot open for writing");
    os.write(kMagic, sizeof kMagic);
    put(os, kVersion);
    put(os, static_cast<std::uint64_t>(text.size()));
    os.write(text.data(), static_cast<std::streamsize>(text.size()));
    put_floats(os, s.model.params());
    if (!s.adam.m.empty()) {
      put_floats(os, s.adam.m);
      put_floats(os, s.adam.v);
    }
    if (!os.flush()) throw CheckpointError(path + ": write failed");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) throw CheckpointError(path + ": cannot replace file");
}

TrainState load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw CheckpointError(path + ": cannot open");
  char magic[sizeof kMagic];
  if (!is.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw CheckpointError(path + ": not a checkpoint");
  }
  if (const auto v = get<std::uint32_t>(is, path); v != kVersion) {
    throw CheckpointError(path + ": unsupported version " + std::to_string(v));
  }
  const auto len = get<std::uint64_t>(is, path);
  if (len > (1u << 24)) throw CheckpointError(path + ": header too large");
  std::string text(len, '\0');
  if (!is.read(text.data(), static_cast<std::streamsize>(len))) throw CheckpointError(path + ": truncated header");

  try {
    const auto h = Json::parse(text);
    std::vector<TaskSpec> tasks;
    for (const auto& t : h.at("tasks")) tasks.push_back(task_spec_from_json(t));
    TrainState s(model_config_from_json(h.at("model")), train_config_from_json(h.at("train")),
                 std::move(tasks), thought_from_name(h.at("thought").get<std::string>()));
    s.step = h.at("step").get<std::uint64_t>();
    s.adam.step = h.at("adam_step").get<std::uint64_t>();
    s.dropout_rng.set_state(h.at("dropout_rng").get<std::string>());
    const auto n = s.model.params().size();
    s.model.params() = get_floats(is, n, path, "parameters");
    if (h.at("has_moments").get<bool>()) {
      s.adam.m = get_floats(is, n, path, "optimizer state");
      s.adam.v = get_floats(is, n, path, "optimizer state");
    }
    if (is.peek() != std::char_traits<char>::eof()) throw CheckpointError(path + ": trailing bytes");
    return s;
  } catch (const CheckpointError&) {
    throw;
  } catch (const std::exception& e) {
    throw CheckpointError(path + ": " + e.what());
  }
}

}  // namespace rot
