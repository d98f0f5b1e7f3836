#include "rot/transformer.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "rot/problem.hpp"

namespace rot {

void validate(const ModelConfig& c) {
  auto need = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("model config: ") + what);
  };
  need(c.vocab_size == static_cast<int>(kVocabSize), "vocab_size must match the token vocabulary");
  need(c.d_model > 0 && c.n_layers > 0 && c.n_heads > 0 && c.ffn_hidden > 0, "sizes must be positive");
  need(c.d_model % c.n_heads == 0, "d_model must be divisible by n_heads");
  need(c.max_context > 1, "max_context must be at least 2");
  need(c.dropout >= 0.0 && c.dropout < 1.0, "dropout must be in [0, 1)");
  need(c.init_std > 0.0, "init_std must be positive");
}

template <class S>
struct Transformer<S>::Layout {
  struct Block {
    std::size_t ln1_g, ln1_b, w_qkv, b_qkv, w_o, b_o, ln2_g, ln2_b, w1, b1, w2, b2;
  };
  std::size_t tok, pos;
  std::vector<Block> blocks;
  std::size_t lnf_g, lnf_b, w_out, b_out;
  std::size_t total;

  explicit Layout(const ModelConfig& c) {
    const std::size_t d = c.d_model, f = c.ffn_hidden, v = c.vocab_size, t = c.max_context;
    std::size_t at = 0;
    auto take = [&at](std::size_t n) {
      const auto here = at;
      at += n;
      return here;
    };
    tok = take(v * d);
    pos = take(t * d);
    for (int l = 0; l < c.n_layers; ++l) {
      Block b;
      b.ln1_g = take(d);
      b.ln1_b = take(d);
      b.w_qkv = take(d * 3 * d);
      b.b_qkv = take(3 * d);
      b.w_o = take(d * d);
      b.b_o = take(d);
      b.ln2_g = take(d);
      b.ln2_b = take(d);
      b.w1 = take(d * f);
      b.b1 = take(f);
      b.w2 = take(f * d);
      b.b2 = take(d);
      blocks.push_back(b);
    }
    lnf_g = take(d);
    lnf_b = take(d);
    w_out = c.tie_embeddings ? tok : take(d * v);
    b_out = take(v);
    total = at;
  }
};

std::size_t parameter_count(const ModelConfig& c) {
  validate(c);
  return Transformer<float>::Layout(c).total;
}

void append_example(Batch& b, std::span<const Token> x, std::span<const Token> y) {
  if (x.size() != y.size()) throw std::invalid_argument("context and target lengths differ");
  if (x.size() < 2) return;
  b.inputs.emplace_back(x.begin(), x.end() - 1);
  b.targets.emplace_back(y.begin() + 1, y.end());
}

namespace {

template <class S>
using RowVec = Eigen::Matrix<S, 1, Eigen::Dynamic>;

constexpr double kLnEps = 1e-5;

// Row-wise layer norm; keeps x-hat and 1/sigma for the backward pass.
template <class Mat, class V>
Mat layer_norm(const Mat& x, const V& gamma, const V& beta, Mat& xhat, RowVec<typename Mat::Scalar>& rstd) {
  using S = typename Mat::Scalar;
  const auto n = x.cols();
  xhat.resize(x.rows(), n);
  rstd.resize(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const S mu = x.row(r).mean();
    const S var = (x.row(r).array() - mu).square().mean();
    const S is = S(1) / std::sqrt(var + S(kLnEps));
    rstd(r) = is;
    xhat.row(r) = (x.row(r).array() - mu) * is;
  }
  Mat y = xhat.array().rowwise() * gamma.array();
  y.array().rowwise() += beta.array();
  return y;
}

template <class Mat, class V, class G>
Mat layer_norm_back(const Mat& dy, const Mat& xhat, const RowVec<typename Mat::Scalar>& rstd,
                    const V& gamma, G dgamma, G dbeta) {
  using S = typename Mat::Scalar;
  dgamma += (dy.array() * xhat.array()).colwise().sum().matrix();
  dbeta += dy.colwise().sum();
  Mat dxhat = dy.array().rowwise() * gamma.array();
  Mat dx(dy.rows(), dy.cols());
  const S n = static_cast<S>(dy.cols());
  for (Eigen::Index r = 0; r < dy.rows(); ++r) {
    const S m1 = dxhat.row(r).sum() / n;
    const S m2 = (dxhat.row(r).array() * xhat.row(r).array()).sum() / n;
    dx.row(r) = rstd(r) * (dxhat.row(r).array() - m1 - xhat.row(r).array() * m2);
  }
  return dx;
}

template <class S>
S gelu(S u) {
  constexpr S c = S(0.7978845608028654);  // sqrt(2/pi)
  return S(0.5) * u * (S(1) + std::tanh(c * (u + S(0.044715) * u * u * u)));
}

template <class S>
S gelu_grad(S u) {
  constexpr S c = S(0.7978845608028654);
  const S t = std::tanh(c * (u + S(0.044715) * u * u * u));
  return S(0.5) * (S(1) + t) + S(0.5) * u * (S(1) - t * t) * c * (S(1) + S(3 * 0.044715) * u * u);
}

}  // namespace

template <class S>
struct Transformer<S>::Pass {
  struct Block {
    Mat xhat1, a, qkv, o, mask1, xhat2, f, u, g, mask2;
    RowVec<S> rstd1, rstd2;
    std::vector<Mat> probs;  // per (sequence, head)
  };
  std::vector<std::size_t> off, len;
  std::vector<int> tok, pos;
  std::vector<Block> blocks;
  Mat xhatf, z;
  RowVec<S> rstdf;
};

template <class S>
Transformer<S>::Transformer(const ModelConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  validate(cfg_);
  const Layout lo(cfg_);
  params_.assign(lo.total, S(0));
  grads_.assign(lo.total, S(0));
  Rng rng(seed);
  auto normal = [&rng](double std) {
    // Box-Muller on the project generator keeps weights identical across platforms.
    const double u1 = 1.0 - rng.uniform01(), u2 = rng.uniform01();
    return std * std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  };
  auto fill = [&](std::size_t at, std::size_t n, double std) {
    for (std::size_t i = 0; i < n; ++i) params_[at + i] = static_cast<S>(normal(std));
  };
  auto ones = [&](std::size_t at, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) params_[at + i] = S(1);
  };
  const std::size_t d = cfg_.d_model, f = cfg_.ffn_hidden, v = cfg_.vocab_size;
  const double std = cfg_.init_std;
  const double proj_std = std / std::sqrt(2.0 * cfg_.n_layers);
  fill(lo.tok, v * d, std);
  fill(lo.pos, static_cast<std::size_t>(cfg_.max_context) * d, std);
  for (const auto& b : lo.blocks) {
    ones(b.ln1_g, d);
    fill(b.w_qkv, d * 3 * d, std);
    fill(b.w_o, d * d, proj_std);
    ones(b.ln2_g, d);
    fill(b.w1, d * f, std);
    fill(b.w2, f * d, proj_std);
  }
  ones(lo.lnf_g, d);
  if (!cfg_.tie_embeddings) fill(lo.w_out, d * v, std);
}

template <class S>
typename Transformer<S>::Mat Transformer<S>::forward(const std::vector<TokenSeq>& inputs) const {
  Batch b;
  b.inputs = inputs;
  Mat logits;
  const_cast<Transformer*>(this)->run(b, false, nullptr, &logits);
  return logits;
}

template <class S>
S Transformer<S>::loss(const Batch& batch, bool backward, Rng* dropout_rng) {
  return run(batch, backward, dropout_rng, nullptr);
}

// Forward pass, optional loss and backward pass. With `logits_out` only the
// forward runs and nothing is written to the model, so concurrent inference
// calls are safe.
template <class S>
S Transformer<S>::run(const Batch& batch, bool backward, Rng* dropout_rng, Mat* logits_out) {
  using MapM = Eigen::Map<const Mat>;
  using MapV = Eigen::Map<const RowVec<S>>;
  const Layout lo(cfg_);
  const Eigen::Index d = cfg_.d_model, F = cfg_.ffn_hidden, V = cfg_.vocab_size;
  const Eigen::Index H = cfg_.n_heads, hd = d / H;
  const S scale = S(1) / std::sqrt(static_cast<S>(hd));
  const S* P = params_.data();
  auto M = [P](std::size_t at, Eigen::Index r, Eigen::Index c) { return MapM(P + at, r, c); };
  auto Vv = [P](std::size_t at, Eigen::Index n) { return MapV(P + at, n); };
  const bool keep = backward;
  const bool drop = dropout_rng != nullptr && cfg_.dropout > 0.0;
  const bool with_loss = logits_out == nullptr;
  if (with_loss && batch.targets.size() != batch.inputs.size()) {
    throw std::invalid_argument("batch needs one target per input");
  }

  Pass pass;
  std::size_t T = 0;
  for (std::size_t s = 0; s < batch.inputs.size(); ++s) {
    const auto n = batch.inputs[s].size();
    if (n == 0) throw std::invalid_argument("empty input sequence");
    if (n > static_cast<std::size_t>(cfg_.max_context)) {
      throw std::length_error("sequence of " + std::to_string(n) + " tokens exceeds max_context " +
                              std::to_string(cfg_.max_context));
    }
    if (with_loss && batch.targets[s].size() != n) throw std::invalid_argument("target length mismatch");
    pass.off.push_back(T);
    pass.len.push_back(n);
    for (std::size_t i = 0; i < n; ++i) {
      pass.tok.push_back(token_id(batch.inputs[s][i]));
      pass.pos.push_back(static_cast<int>(i));
    }
    T += n;
  }
  const auto Ti = static_cast<Eigen::Index>(T);

  Mat h(Ti, d);
  {
    const auto E = M(lo.tok, V, d);
    const auto Pe = M(lo.pos, cfg_.max_context, d);
    for (Eigen::Index r = 0; r < Ti; ++r) h.row(r) = E.row(pass.tok[r]) + Pe.row(pass.pos[r]);
  }
  auto dropout_mask = [&](Eigen::Index rows, Eigen::Index cols) {
    Mat m(rows, cols);
    const S keep_scale = S(1) / S(1 - cfg_.dropout);
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      m.data()[i] = dropout_rng->uniform01() < cfg_.dropout ? S(0) : keep_scale;
    }
    return m;
  };

  pass.blocks.resize(lo.blocks.size());
  for (std::size_t l = 0; l < lo.blocks.size(); ++l) {
    const auto& B = lo.blocks[l];
    auto& st = pass.blocks[l];
    Mat xhat;
    RowVec<S> rstd;
    Mat a = layer_norm(h, Vv(B.ln1_g, d), Vv(B.ln1_b, d), xhat, rstd);
    Mat qkv = a * M(B.w_qkv, d, 3 * d);
    qkv.rowwise() += Vv(B.b_qkv, 3 * d);
    Mat o = Mat::Zero(Ti, d);
    for (std::size_t s = 0; s < pass.off.size(); ++s) {
      const auto off = static_cast<Eigen::Index>(pass.off[s]);
      const auto n = static_cast<Eigen::Index>(pass.len[s]);
      for (Eigen::Index hh = 0; hh < H; ++hh) {
        auto Q = qkv.block(off, hh * hd, n, hd);
        auto K = qkv.block(off, d + hh * hd, n, hd);
        auto Vh = qkv.block(off, 2 * d + hh * hd, n, hd);
        Mat sc = (Q * K.transpose()) * scale;
        for (Eigen::Index i = 0; i < n; ++i) {
          const S mx = sc.row(i).head(i + 1).maxCoeff();
          S sum = 0;
          for (Eigen::Index j = 0; j <= i; ++j) {
            sc(i, j) = std::exp(sc(i, j) - mx);
            sum += sc(i, j);
          }
          sc.row(i).head(i + 1) /= sum;
          if (i + 1 < n) sc.row(i).tail(n - i - 1).setZero();
        }
        o.block(off, hh * hd, n, hd) = sc * Vh;
        if (keep) st.probs.push_back(std::move(sc));
      }
    }
    Mat att = o * M(B.w_o, d, d);
    att.rowwise() += Vv(B.b_o, d);
    if (drop) {
      st.mask1 = dropout_mask(Ti, d);
      att.array() *= st.mask1.array();
    }
    h += att;

    Mat xhat2;
    RowVec<S> rstd2;
    Mat f = layer_norm(h, Vv(B.ln2_g, d), Vv(B.ln2_b, d), xhat2, rstd2);
    Mat u = f * M(B.w1, d, F);
    u.rowwise() += Vv(B.b1, F);
    Mat g = u.unaryExpr([](S x) { return gelu(x); });
    Mat v = g * M(B.w2, F, d);
    v.rowwise() += Vv(B.b2, d);
    if (drop) {
      st.mask2 = dropout_mask(Ti, d);
      v.array() *= st.mask2.array();
    }
    h += v;
    if (keep) {
      st.xhat1 = std::move(xhat);
      st.rstd1 = std::move(rstd);
      st.a = std::move(a);
      st.qkv = std::move(qkv);
      st.o = std::move(o);
      st.xhat2 = std::move(xhat2);
      st.rstd2 = std::move(rstd2);
      st.f = std::move(f);
      st.u = std::move(u);
      st.g = std::move(g);
    }
  }

  Mat z = layer_norm(h, Vv(lo.lnf_g, d), Vv(lo.lnf_b, d), pass.xhatf, pass.rstdf);
  Mat logits = cfg_.tie_embeddings ? Mat(z * M(lo.tok, V, d).transpose()) : Mat(z * M(lo.w_out, d, V));
  logits.rowwise() += Vv(lo.b_out, V);
  if (!with_loss) {
    *logits_out = std::move(logits);
    return S(0);
  }

  // Masked mean cross-entropy; logits become d loss / d logits in place.
  std::size_t counted = 0;
  for (std::size_t s = 0; s < pass.off.size(); ++s) {
    for (auto t : batch.targets[s]) counted += t != Token::Pad;
  }
  if (counted == 0) throw std::invalid_argument("batch has no non-PAD targets");
  const S inv = S(1) / static_cast<S>(counted);
  double total = 0;
  for (std::size_t s = 0; s < pass.off.size(); ++s) {
    for (std::size_t i = 0; i < pass.len[s]; ++i) {
      const auto r = static_cast<Eigen::Index>(pass.off[s] + i);
      const Token y = batch.targets[s][i];
      if (y == Token::Pad) {
        logits.row(r).setZero();
        continue;
      }
      const S mx = logits.row(r).maxCoeff();
      logits.row(r).array() = (logits.row(r).array() - mx).exp();
      const S sum = logits.row(r).sum();
      total -= std::log(static_cast<double>(logits(r, token_id(y)) / sum));
      logits.row(r) *= inv / sum;
      logits(r, token_id(y)) -= inv;
    }
  }
  const S mean_loss = static_cast<S>(total / static_cast<double>(counted));
  if (!std::isfinite(static_cast<double>(mean_loss))) {
    throw std::runtime_error("non-finite loss " + std::to_string(static_cast<double>(mean_loss)));
  }
  if (!backward) return mean_loss;

  // ---- backward ----
  std::fill(grads_.begin(), grads_.end(), S(0));
  S* G = grads_.data();
  using MapGM = Eigen::Map<Mat>;
  using MapGV = Eigen::Map<RowVec<S>>;
  auto GM = [G](std::size_t at, Eigen::Index r, Eigen::Index c) { return MapGM(G + at, r, c); };
  auto GV = [G](std::size_t at, Eigen::Index n) { return MapGV(G + at, n); };
  const Mat& dlogits = logits;

  GV(lo.b_out, V) += dlogits.colwise().sum();
  Mat dz;
  if (cfg_.tie_embeddings) {
    GM(lo.tok, V, d).noalias() += dlogits.transpose() * z;
    dz = dlogits * M(lo.tok, V, d);
  } else {
    GM(lo.w_out, d, V).noalias() += z.transpose() * dlogits;
    dz = dlogits * M(lo.w_out, d, V).transpose();
  }
  Mat dh = layer_norm_back(dz, pass.xhatf, pass.rstdf, Vv(lo.lnf_g, d), GV(lo.lnf_g, d), GV(lo.lnf_b, d));

  for (std::size_t li = lo.blocks.size(); li-- > 0;) {
    const auto& B = lo.blocks[li];
    auto& st = pass.blocks[li];
    // MLP branch.
    Mat dv = dh;
    if (drop) dv.array() *= st.mask2.array();
    GM(B.w2, F, d).noalias() += st.g.transpose() * dv;
    GV(B.b2, d) += dv.colwise().sum();
    Mat du = dv * M(B.w2, F, d).transpose();
    du.array() *= st.u.unaryExpr([](S x) { return gelu_grad(x); }).array();
    GM(B.w1, d, F).noalias() += st.f.transpose() * du;
    GV(B.b1, F) += du.colwise().sum();
    Mat df = du * M(B.w1, d, F).transpose();
    dh += layer_norm_back(df, st.xhat2, st.rstd2, Vv(B.ln2_g, d), GV(B.ln2_g, d), GV(B.ln2_b, d));

    // Attention branch.
    Mat datt = dh;
    if (drop) datt.array() *= st.mask1.array();
    GM(B.w_o, d, d).noalias() += st.o.transpose() * datt;
    GV(B.b_o, d) += datt.colwise().sum();
    Mat dout = datt * M(B.w_o, d, d).transpose();
    Mat dqkv = Mat::Zero(Ti, 3 * d);
    std::size_t k = 0;
    for (std::size_t s = 0; s < pass.off.size(); ++s) {
      const auto off = static_cast<Eigen::Index>(pass.off[s]);
      const auto n = static_cast<Eigen::Index>(pass.len[s]);
      for (Eigen::Index hh = 0; hh < H; ++hh, ++k) {
        const Mat& pr = st.probs[k];
        auto Q = st.qkv.block(off, hh * hd, n, hd);
        auto K = st.qkv.block(off, d + hh * hd, n, hd);
        auto Vh = st.qkv.block(off, 2 * d + hh * hd, n, hd);
        auto dO = dout.block(off, hh * hd, n, hd);
        Mat dP = dO * Vh.transpose();
        dqkv.block(off, 2 * d + hh * hd, n, hd) = pr.transpose() * dO;
        Mat dS = pr.array() * (dP.array().colwise() - (dP.array() * pr.array()).rowwise().sum());
        dqkv.block(off, hh * hd, n, hd) = (dS * K) * scale;
        dqkv.block(off, d + hh * hd, n, hd) = (dS.transpose() * Q) * scale;
      }
    }
    GM(B.w_qkv, d, 3 * d).noalias() += st.a.transpose() * dqkv;
    GV(B.b_qkv, 3 * d) += dqkv.colwise().sum();
    Mat da = dqkv * M(B.w_qkv, d, 3 * d).transpose();
    dh += layer_norm_back(da, st.xhat1, st.rstd1, Vv(B.ln1_g, d), GV(B.ln1_g, d), GV(B.ln1_b, d));
  }

  auto dE = GM(lo.tok, V, d);
  auto dPe = GM(lo.pos, cfg_.max_context, d);
  for (Eigen::Index r = 0; r < Ti; ++r) {
    dE.row(pass.tok[r]) += dh.row(r);
    dPe.row(pass.pos[r]) += dh.row(r);
  }
  return mean_loss;
}

template class Transformer<float>;
template class Transformer<double>;

void adam_update(ParamVec<float>& params, const ParamVec<float>& grads, AdamState& st,
                 const AdamConfig& cfg, double lr) {
  if (st.m.size() != params.size()) {
    st.m.assign(params.size(), 0.0f);
    st.v.assign(params.size(), 0.0f);
  }
  ++st.step;
  const double t = static_cast<double>(st.step);
  const float b1 = static_cast<float>(cfg.beta1), b2 = static_cast<float>(cfg.beta2);
  const float c1 = static_cast<float>(1.0 / (1.0 - std::pow(cfg.beta1, t)));
  const float c2 = static_cast<float>(1.0 / (1.0 - std::pow(cfg.beta2, t)));
  const float step = static_cast<float>(lr), eps = static_cast<float>(cfg.eps);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const float g = grads[i];
    st.m[i] = b1 * st.m[i] + (1.0f - b1) * g;
    st.v[i] = b2 * st.v[i] + (1.0f - b2) * g * g;
    params[i] -= step * (st.m[i] * c1) / (std::sqrt(st.v[i] * c2) + eps);
  }
}

namespace {

Token argmax_token(const Eigen::Ref<const Eigen::Matrix<float, 1, Eigen::Dynamic>>& row) {
  Eigen::Index best;
  row.maxCoeff(&best);
  return token_from_id(static_cast<int>(best));
}

}  // namespace

std::vector<Token> NeuralPredictor::predict_all(std::span<const Token> context) const {
  if (context.empty()) return {};
  const auto logits = model_.forward({TokenSeq(context.begin(), context.end())});
  std::vector<Token> out(context.size());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) out[r] = argmax_token(logits.row(r));
  return out;
}

Token NeuralPredictor::next_token(std::span<const Token> context) const {
  const auto logits = model_.forward({TokenSeq(context.begin(), context.end())});
  return argmax_token(logits.row(logits.rows() - 1));
}

}  // namespace rot
