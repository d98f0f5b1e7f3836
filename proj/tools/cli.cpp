#include "cli.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "rot/config.hpp"
#include "rot/engine.hpp"
#include "rot/evaluator.hpp"
#include "rot/exporter.hpp"
#include "rot/oracle.hpp"
#include "rot/render.hpp"
#include "rot/train.hpp"

namespace rot::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kOutEnv = "ROT_LAB_OUT";

struct Flags {
  std::string config, task, thought, out, checkpoint, resume, question;
  int difficulty = 0;
  std::vector<std::uint64_t> seeds;
  std::size_t n = 0, workers = 0, steps = 0;
  int max_context = 0;
  double min_accuracy = -1;
  bool contexts = false;
};

struct Resolved {
  RunConfig cfg;
  bool thought_given = false;
};

Resolved resolve(const Flags& f) {
  Resolved r;
  bool workers_given = false;
  if (!f.config.empty()) {
    std::ifstream is(f.config);
    if (!is) throw ConfigError("--config: cannot read " + f.config);
    Json j;
    try {
      j = Json::parse(is);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("--config: " + f.config + " is not valid JSON: " + e.what());
    }
    r.cfg = run_config_from_json(j);
    r.thought_given = j.contains("thought");
    workers_given = j.contains("workers");
  }
  auto& c = r.cfg;
  if (!f.task.empty()) {
    const int d = f.difficulty ? f.difficulty : c.tasks.front().difficulty;
    c.tasks = {{task_from_name(f.task), d}};
  } else if (f.difficulty) {
    for (auto& t : c.tasks) t.difficulty = f.difficulty;
  }
  if (f.difficulty < 0) throw ConfigError("--difficulty: must be >= 1");
  if (!f.thought.empty()) {
    c.thought = thought_from_name(f.thought);
    r.thought_given = true;
  }
  if (!f.seeds.empty()) c.seeds = f.seeds;
  if (f.n) c.n = f.n;
  if (f.workers) {
    c.workers = f.workers;
  } else if (!workers_given) {
    c.workers = std::max(1u, std::thread::hardware_concurrency());
  }
  if (f.max_context) {
    c.model.max_context = f.max_context;
    validate(c.model);
  }
  if (!f.checkpoint.empty()) c.checkpoint = f.checkpoint;
  if (f.steps) c.train.total_steps = f.steps;
  if (!f.out.empty()) {
    c.out = f.out;
  } else if (c.out.empty()) {
    const char* env = std::getenv(kOutEnv);
    c.out = env && *env ? env : "rot_lab_out";
  }
  return r;
}

void write_file(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os.write(text.data(), static_cast<std::streamsize>(text.size())) || !os.flush()) {
    throw std::runtime_error("cannot write " + path.string());
  }
}

std::string stem(const TaskSpec& t) { return std::string(task_name(t.task)) + "-" + std::to_string(t.difficulty); }

std::string stem(const TaskSpec& t, ThoughtType type, std::uint64_t seed) {
  return stem(t) + "-" + std::string(thought_name(type)) + "-s" + std::to_string(seed);
}

std::vector<Problem> dataset(const TaskSpec& t, std::uint64_t seed, std::size_t n) {
  std::vector<Problem> ps;
  ps.reserve(n);
  for (std::size_t i = 0; i < n; ++i) ps.push_back(sample_problem_at(t.task, t.difficulty, seed, i));
  return ps;
}

std::string fixed(double v, int digits = 6) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << v;
  return os.str();
}

// The model under test: the oracle, or a trained checkpoint.
struct Model {
  std::unique_ptr<TrainState> state;
  std::unique_ptr<Predictor> predictor;
  std::string name;
};

Model load_model(Resolved& r) {
  Model m;
  auto& c = r.cfg;
  if (c.checkpoint.empty()) {
    m.predictor = std::make_unique<OraclePredictor>(c.thought, static_cast<std::size_t>(c.model.max_context));
    m.name = "oracle";
  } else {
    m.state = std::make_unique<TrainState>(load_checkpoint(c.checkpoint));
    if (!r.thought_given) c.thought = m.state->thought;
    c.model = m.state->model_config;
    m.predictor = std::make_unique<NeuralPredictor>(m.state->model);
    m.name = c.checkpoint;
  }
  return m;
}

int cmd_generate(Resolved& r, std::ostream& out) {
  const auto& c = r.cfg;
  const auto limit = static_cast<std::size_t>(c.model.max_context);
  for (const auto& t : c.tasks) {
    for (auto seed : c.seeds) {
      std::string lines;
      std::size_t records = 0, skipped = 0;
      for (std::size_t i = 0; i < c.n; ++i) {
        const auto p = sample_problem_at(t.task, t.difficulty, seed, i);
        std::vector<LabeledContext> lcs;
        try {
          lcs = labeled_contexts(p, c.thought, limit);
        } catch (const RecursionError&) {
          ++skipped;  // CoT longer than max_context
          continue;
        }
        for (const auto& lc : lcs) {
          lines += dataset_line(p, t.difficulty, i, c.thought, lc);
          lines += '\n';
          ++records;
        }
      }
      const auto base = fs::path(c.out) / ("dataset-" + stem(t, c.thought, seed));
      write_file(base.string() + ".jsonl", lines);
      Json manifest{{"task", task_name(t.task)},
                    {"difficulty", t.difficulty},
                    {"thought", thought_name(c.thought)},
                    {"seed", seed},
                    {"count", c.n},
                    {"records", records},
                    {"skipped_over_context", skipped},
                    {"max_context", limit},
                    {"sampler", sampler_description(t.task)},
                    {"config", to_json(c)}};
      write_file(base.string() + ".manifest.json", manifest.dump(2) + "\n");
      out << base.string() << ".jsonl: " << records << " records";
      if (skipped) out << ", " << skipped << " problems skipped (context limit exceeded)";
      out << "\n";
    }
  }
  return kOk;
}

int cmd_train(Resolved& r, const Flags& f, std::ostream& out, std::ostream& err) {
  auto& c = r.cfg;
  std::unique_ptr<TrainState> s;
  if (!f.resume.empty()) {
    s = std::make_unique<TrainState>(load_checkpoint(f.resume));
    if (f.steps) s->train_config.total_steps = f.steps;
  } else {
    s = std::make_unique<TrainState>(c.model, c.train, c.tasks, c.thought);
  }
  s->train_config.workers = c.workers;
  const auto res = train_loop(*s, [&](const MetricRow& row) {
    if (row.accuracy) {
      err << "step " << row.step << " loss " << fixed(row.loss) << " lr " << row.lr << " accuracy "
          << fixed(*row.accuracy, 4) << "\n";
    }
  });
  const auto dir = fs::path(c.out);
  fs::create_directories(dir);
  save_checkpoint((dir / "model.ckpt").string(), *s);
  write_file(dir / "metrics.csv", metrics_csv(res.metrics));
  Json summary{{"steps", s->step},
               {"stopped_early", res.stopped_early},
               {"final_loss", res.metrics.empty() ? Json() : Json(res.metrics.back().loss)},
               {"validation_accuracy", res.last_accuracy ? Json(*res.last_accuracy) : Json()},
               {"config", to_json(c)}};
  write_file(dir / "train_summary.json", summary.dump(2) + "\n");
  out << (dir / "model.ckpt").string() << ": " << s->step << " steps";
  if (res.last_accuracy) out << ", validation accuracy " << fixed(*res.last_accuracy, 4);
  out << "\n";
  return kOk;
}

int cmd_eval(Resolved& r, const Flags& f, std::ostream& out) {
  auto model = load_model(r);
  const auto& c = r.cfg;
  std::string csv = "task,difficulty,thought,seeds,accuracy_mean,accuracy_std,overflow_problems\n";
  bool below = false;
  for (const auto& t : c.tasks) {
    std::vector<double> accs;
    std::size_t overflow_problems = 0;
    for (auto seed : c.seeds) {
      const auto ps = dataset(t, seed, c.n);
      const auto set = collect_unique_contexts(ps, c.thought, model.predictor->max_context());
      std::vector<ContextVerdict> verdicts(set.items.size());
      parallel_for(set.items.size(), c.workers,
                   [&](std::size_t i) { verdicts[i] = evaluate_context(*model.predictor, set.items[i]); });
      std::size_t over = 0;
      for (const auto& ids : set.membership) {
        over += std::any_of(ids.begin(), ids.end(),
                            [&](std::size_t i) { return verdicts[i].note == VerdictNote::ContextOverflow; });
      }
      const auto rep = aggregate(set, std::move(verdicts));
      overflow_problems += over;
      accs.push_back(rep.accuracy);

      Json j{{"task", task_name(t.task)},
             {"difficulty", t.difficulty},
             {"thought", thought_name(c.thought)},
             {"seed", seed},
             {"model", model.name},
             {"max_context", model.predictor->max_context()},
             {"context_limit_exceeded", over > 0},
             {"overflow_problems", over},
             {"report", Json::parse(report_json(rep, f.contexts))},
             {"config", to_json(c)}};
      write_file(fs::path(c.out) / ("report-" + stem(t, c.thought, seed) + ".json"), j.dump(2) + "\n");
      if (over) {
        out << stem(t, c.thought, seed) << ": context limit exceeded: " << over << " of " << ps.size()
            << " problems need more than " << model.predictor->max_context() << " tokens\n";
      }
    }
    double mean = 0, var = 0;
    for (double a : accs) mean += a;
    mean /= static_cast<double>(accs.size());
    for (double a : accs) var += (a - mean) * (a - mean);
    const double sd = accs.size() > 1 ? std::sqrt(var / static_cast<double>(accs.size() - 1)) : 0.0;
    csv += std::string(task_name(t.task)) + "," + std::to_string(t.difficulty) + "," +
           std::string(thought_name(c.thought)) + "," + std::to_string(accs.size()) + "," + fixed(mean) + "," +
           fixed(sd) + "," + std::to_string(overflow_problems) + "\n";
    out << stem(t) << " " << thought_name(c.thought) << ": accuracy " << fixed(mean, 4);
    if (accs.size() > 1) out << " +- " << fixed(sd, 4);
    out << "\n";
    if (f.min_accuracy >= 0 && mean < f.min_accuracy) below = true;
  }
  write_file(fs::path(c.out) / ("eval-" + std::string(thought_name(c.thought)) + ".csv"), csv);
  return below ? kFailed : kOk;
}

int cmd_stats(Resolved& r, std::ostream& out) {
  const auto& c = r.cfg;
  std::string csv =
      "task,difficulty,n,rot_len_mean,rot_len_max,rot_max_len_max,cot_len_mean,cot_len_max,"
      "tokens_naive_mean,tokens_cached_mean\n";
  auto mean = [](const auto& xs) {
    double t = 0;
    for (const auto& x : xs) t += static_cast<double>(x);
    return t / static_cast<double>(xs.size());
  };
  auto mean_big = [](const std::vector<Number>& xs) {
    Number t = 0;
    for (const auto& x : xs) t += x;
    return (t / xs.size()).convert_to<double>();
  };
  for (const auto& t : c.tasks) {
    const auto s = length_and_token_stats(t.task, t.difficulty, c.n, c.seeds.front());
    write_file(fs::path(c.out) / ("hist-" + stem(t) + ".csv"), histogram_csv(s));
    const auto cot_max = *std::max_element(s.cot_lengths.begin(), s.cot_lengths.end());
    csv += std::string(task_name(t.task)) + "," + std::to_string(t.difficulty) + "," + std::to_string(c.n) + "," +
           fixed(mean(s.rot_context_lengths), 2) + "," +
           std::to_string(*std::max_element(s.rot_context_lengths.begin(), s.rot_context_lengths.end())) + "," +
           std::to_string(*std::max_element(s.rot_max_lengths.begin(), s.rot_max_lengths.end())) + "," +
           fixed(mean_big(s.cot_lengths), 2) + "," + to_string(cot_max) + "," + fixed(mean_big(s.tokens_naive), 2) +
           "," + fixed(mean_big(s.tokens_cached), 2) + "\n";
  }
  write_file(fs::path(c.out) / "stats.csv", csv);
  write_file(fs::path(c.out) / "stats.config.json", to_json(c).dump(2) + "\n");
  out << csv;
  return kOk;
}

int cmd_export(Resolved& r, std::ostream& out) {
  const auto& c = r.cfg;
  const auto limit = static_cast<std::size_t>(c.model.max_context);
  for (const auto& t : c.tasks) {
    for (auto seed : c.seeds) {
      std::string lines;
      std::size_t records = 0, skipped = 0;
      for (const auto& p : dataset(t, seed, c.n)) {
        std::vector<PromptCompletion> rs;
        try {
          rs = export_problem(p, c.thought, limit);
        } catch (const RecursionError&) {
          ++skipped;
          continue;
        }
        for (const auto& rec : rs) lines += jsonl_line(rec) + "\n";
        records += rs.size();
      }
      const auto path = fs::path(c.out) / ("export-" + stem(t, c.thought, seed) + ".jsonl");
      write_file(path, lines);
      out << path.string() << ": " << records << " records";
      if (skipped) out << ", " << skipped << " problems skipped (context limit exceeded)";
      out << "\n";
    }
  }
  write_file(fs::path(c.out) / "export.config.json", to_json(c).dump(2) + "\n");
  return kOk;
}

int cmd_trace(Resolved& r, const Flags& f, std::ostream& out) {
  auto model = load_model(r);
  const auto q = tokenize(f.question);
  try {
    const auto res = r.cfg.thought == ThoughtType::Rot ? rot_infer(*model.predictor, q, r.cfg.limits)
                                                       : flat_infer(*model.predictor, q, r.cfg.limits);
    Json j{{"question", to_text(q)},
           {"answer", to_text(res.answer)},
           {"trace", Json::parse(trace_json(res.trace))}};
    out << j.dump(2) << "\n";
    return kOk;
  } catch (const InferenceError& e) {
    out << "inference failed (" << kind_name(e.kind()) << "): " << e.what() << "\n";
    return kFailed;
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"rot_lab: recursive reasoning data, models and evaluation"};
  app.require_subcommand(1);
  Flags f;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", f.config, "JSON run config");
    sub->add_option("--task", f.task, "task name (add, sub, mul, div, lcs, lps, knapsack, mcm, sort, ...)");
    sub->add_option("--difficulty", f.difficulty, "digits, length, items or matrices");
    sub->add_option("--thought", f.thought, "wt, cot or rot");
    sub->add_option("--seed", f.seeds, "seed; repeat for several runs");
    sub->add_option("--n", f.n, "problems per task and seed");
    sub->add_option("--out", f.out, std::string("output directory (default $") + kOutEnv + " or ./rot_lab_out)");
    sub->add_option("--workers", f.workers, "threads (default: all cores)");
    sub->add_option("--max-context", f.max_context, "model context limit");
  };

  auto* gen = app.add_subcommand("generate", "write a dataset as JSONL plus a manifest");
  common(gen);
  auto* train = app.add_subcommand("train", "train a transformer, write checkpoint and metrics");
  common(train);
  train->add_option("--steps", f.steps, "total optimizer steps");
  train->add_option("--resume", f.resume, "continue from a checkpoint");
  auto* eval = app.add_subcommand("eval", "evaluate the oracle or a checkpoint");
  common(eval);
  eval->add_option("--checkpoint", f.checkpoint, "trained model (default: oracle)");
  eval->add_option("--min-accuracy", f.min_accuracy, "exit 1 if any task scores lower");
  eval->add_flag("--contexts", f.contexts, "include per-context verdicts in reports");
  auto* stats = app.add_subcommand("stats", "context length and token count statistics");
  common(stats);
  auto* exp = app.add_subcommand("export", "prompt/completion JSONL");
  common(exp);
  auto* trace = app.add_subcommand("trace", "run inference on one question and dump the trace");
  common(trace);
  trace->add_option("--question", f.question, "e.g. \"GO 408+351=\"")->required();
  trace->add_option("--checkpoint", f.checkpoint, "trained model (default: oracle)");
  auto* vocab = app.add_subcommand("vocab", "print the vocabulary table");

  std::vector<std::string> rev(args.rbegin(), args.rend() - 1);
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n" << app.help();
    return kUsage;
  }

  try {
    if (vocab->parsed()) {
      out << vocabulary_json() << "\n";
      return kOk;
    }
    auto r = resolve(f);
    if (gen->parsed()) return cmd_generate(r, out);
    if (train->parsed()) return cmd_train(r, f, out, err);
    if (eval->parsed()) return cmd_eval(r, f, out);
    if (stats->parsed()) return cmd_stats(r, out);
    if (exp->parsed()) return cmd_export(r, out);
    if (trace->parsed()) return cmd_trace(r, f, out);
  } catch (const ConfigError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const TokenError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailed;
  }
  return kUsage;
}

}  // namespace rot::cli
