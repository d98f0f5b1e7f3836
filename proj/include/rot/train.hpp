#pragma once

#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rot/context.hpp"
#include "rot/transformer.hpp"

namespace rot {

struct TaskSpec {
  Task task;
  int difficulty;
  friend bool operator==(const TaskSpec&, const TaskSpec&) = default;
};

struct TrainConfig {
  std::size_t batch_size = 64;
  double learning_rate = 1e-3;
  std::size_t total_steps = 20'000;
  std::size_t decay_interval = 5'000;  // LR halves every this many steps
  std::size_t eval_interval = 1'000;
  bool early_stop = true;              // stop once validation accuracy hits 1.0
  std::uint64_t seed = 0;
  std::size_t eval_problems = 1'000;   // validation set size per task
  std::size_t queue_capacity = 4;      // batches prepared ahead of the optimizer
  std::size_t workers = 1;             // evaluation threads
};

void validate(const TrainConfig& c);  // throws ConfigError

/// Small runs on one machine.
TrainConfig desk_preset();
/// Batch 256, 500K steps, halving every 50K, eval every 20K. Long-running.
TrainConfig full_preset();

/// lr * 0.5^floor(step / decay_interval), step counted from 0.
double learning_rate_at(const TrainConfig& c, std::uint64_t step);

/// The batch for optimizer step `step`. Each example draws a task uniformly,
/// a fresh problem, and (for RoT) one of its unique contexts. A pure function
/// of its arguments. Throws ConfigError if a context exceeds max_context.
Batch make_batch(std::span<const TaskSpec> tasks, ThoughtType type, std::size_t batch_size,
                 std::uint64_t seed, std::uint64_t step, std::size_t max_context);

/// Validation problems; drawn from a stream disjoint from training batches.
std::vector<Problem> validation_problems(std::span<const TaskSpec> tasks, std::size_t per_task,
                                         std::uint64_t seed);

/// Bounded single-handoff queue. push blocks while full, pop while empty;
/// after close() push fails and pop drains what is left.
template <class T>
class BoundedQueue {
 public:
  explicit BoundedQueue(std::size_t capacity) : capacity_(capacity ? capacity : 1) {}

  bool push(T v) {
    std::unique_lock lock(mu_);
    not_full_.wait(lock, [&] { return closed_ || q_.size() < capacity_; });
    if (closed_) return false;
    q_.push_back(std::move(v));
    not_empty_.notify_one();
    return true;
  }

  std::optional<T> pop() {
    std::unique_lock lock(mu_);
    not_empty_.wait(lock, [&] { return closed_ || !q_.empty(); });
    if (q_.empty()) return std::nullopt;
    T v = std::move(q_.front());
    q_.pop_front();
    not_full_.notify_one();
    return v;
  }

  void close() {
    std::lock_guard lock(mu_);
    closed_ = true;
    not_full_.notify_all();
    not_empty_.notify_all();
  }

 private:
  std::size_t capacity_;
  std::mutex mu_;
  std::condition_variable not_full_, not_empty_;
  std::deque<T> q_;
  bool closed_ = false;
};

struct MetricRow {
  std::uint64_t step;  // steps completed
  double loss;
  double lr;
  std::optional<double> accuracy;  // validation accuracy, on eval steps only
};

std::string metrics_csv(const std::vector<MetricRow>& rows);

/// Everything needed to resume training.
struct TrainState {
  ModelConfig model_config;
  TrainConfig train_config;
  std::vector<TaskSpec> tasks;
  ThoughtType thought = ThoughtType::Rot;
  Transformer<float> model;
  AdamState adam;
  std::uint64_t step = 0;
  Rng dropout_rng;

  TrainState(ModelConfig mc, TrainConfig tc, std::vector<TaskSpec> ts, ThoughtType type);
};

struct TrainResult {
  std::vector<MetricRow> metrics;
  bool stopped_early = false;
  std::optional<double> last_accuracy;
};

/// Runs from state.step to total_steps. `on_row` sees each metric row as it
/// is produced (for progress output); it may be empty.
TrainResult train_loop(TrainState& state, const std::function<void(const MetricRow&)>& on_row = {});

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// "ROTCKPT1", u32 version, u64 header length, JSON header (configs, tasks,
/// step, RNG state), then params, Adam m and v as little-endian f32.
void save_checkpoint(const std::string& path, const TrainState& s);
TrainState load_checkpoint(const std::string& path);

}  // namespace rot
