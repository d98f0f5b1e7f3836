#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/StdVector>

#include "rot/predictor.hpp"
#include "rot/rng.hpp"
#include "rot/token.hpp"

namespace rot {

/// Parameter storage. Eigen's vector kernels peel by address, so a fixed
/// alignment keeps results identical across buffers and runs.
template <class S>
using ParamVec = std::vector<S, Eigen::aligned_allocator<S>>;

struct ModelConfig {
  int vocab_size = static_cast<int>(kVocabSize);
  int d_model = 128;
  int n_layers = 3;
  int n_heads = 4;
  int ffn_hidden = 256;
  int max_context = 1024;
  double dropout = 0.0;
  bool tie_embeddings = false;
  double init_std = 0.02;
};

void validate(const ModelConfig& c);  // throws ConfigError
std::size_t parameter_count(const ModelConfig& c);

/// (input, target) pairs of equal length; PAD targets carry no loss.
struct Batch {
  std::vector<TokenSeq> inputs;
  std::vector<TokenSeq> targets;
};

/// Shift a labeled context into a next-token training pair:
/// input = x[0..n-1), target = y[1..n).
void append_example(Batch& b, std::span<const Token> context, std::span<const Token> target);

/// Decoder-only transformer: learned token and position embeddings,
/// pre-norm blocks (causal multi-head attention, GELU MLP), final norm,
/// linear head. Parameters live in one flat buffer.
template <class S>
class Transformer {
 public:
  using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  Transformer(const ModelConfig& cfg, std::uint64_t seed);

  const ModelConfig& config() const noexcept { return cfg_; }
  ParamVec<S>& params() noexcept { return params_; }
  const ParamVec<S>& params() const noexcept { return params_; }
  const ParamVec<S>& grads() const noexcept { return grads_; }

  /// Logits, one row per input position; sequences are stacked in order.
  Mat forward(const std::vector<TokenSeq>& inputs) const;

  /// Mean cross-entropy over non-PAD targets. With `backward`, grads() is
  /// overwritten with d loss / d params. Dropout applies only when a
  /// generator is given.
  S loss(const Batch& batch, bool backward, Rng* dropout_rng = nullptr);

  struct Layout;

 private:
  struct Pass;
  S run(const Batch& batch, bool backward, Rng* dropout_rng, Mat* logits_out);

  ModelConfig cfg_;
  ParamVec<S> params_;
  ParamVec<S> grads_;
};

extern template class Transformer<float>;
extern template class Transformer<double>;

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  ParamVec<float> m, v;
  std::uint64_t step = 0;
};

/// One bias-corrected Adam step at learning rate `lr`.
void adam_update(ParamVec<float>& params, const ParamVec<float>& grads, AdamState& st,
                 const AdamConfig& cfg, double lr);

/// Greedy predictor over a float model. Holds a reference; the model must
/// not be trained while predictions run.
class NeuralPredictor final : public Predictor {
 public:
  explicit NeuralPredictor(const Transformer<float>& model) : model_(model) {}

  Token next_token(std::span<const Token> context) const override;
  std::vector<Token> predict_all(std::span<const Token> context) const override;
  std::size_t max_context() const override {
    return static_cast<std::size_t>(model_.config().max_context);
  }

 private:
  const Transformer<float>& model_;
};

}  // namespace rot
