#include "gamelab/mlm.hpp"

#include <unsupported/Eigen/SpecialFunctions>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "gamelab/errors.hpp"

namespace gamelab::mlm {

namespace {

constexpr double kLnEps = 1e-5;
constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.3989422804014327;

// gelu(x) = x * Phi(x); vectorized over whole activations.
template <typename T>
Mat<T> gelu(const Mat<T>& x) {
  return (x.array() * T(0.5) * (T(1) + (x.array() * static_cast<T>(kInvSqrt2)).erf())).matrix();
}

// gelu'(x) = Phi(x) + x * phi(x)
template <typename T>
Mat<T> gelu_grad(const Mat<T>& x) {
  return (T(0.5) * (T(1) + (x.array() * static_cast<T>(kInvSqrt2)).erf()) +
          x.array() * (T(-0.5) * x.array().square()).exp() * static_cast<T>(kInvSqrt2Pi))
      .matrix();
}

// --- canonical tensor enumeration (init, adam, checkpoint, grad check) ------

template <typename T>
struct TensorRef {
  std::string name;
  T* data;
  long rows;
  long cols;
  long size() const { return rows * cols; }
};

template <typename T>
std::vector<TensorRef<T>> enumerate_tensors(ParamsT<T>& p) {
  std::vector<TensorRef<T>> out;
  auto add_mat = [&](const std::string& name, Mat<T>& m) {
    out.push_back({name, m.data(), m.rows(), m.cols()});
  };
  auto add_vec = [&](const std::string& name, Vec<T>& v) {
    out.push_back({name, v.data(), v.size(), 1});
  };
  add_mat("token_embedding", p.token_embedding);
  add_mat("position_embedding", p.position_embedding);
  add_vec("emb_ln_gain", p.emb_ln_gain);
  add_vec("emb_ln_bias", p.emb_ln_bias);
  for (std::size_t i = 0; i < p.layers.size(); ++i) {
    const std::string prefix = "layer" + std::to_string(i) + ".";
    LayerParamsT<T>& l = p.layers[i];
    add_mat(prefix + "wq", l.wq);
    add_vec(prefix + "bq", l.bq);
    add_mat(prefix + "wk", l.wk);
    add_vec(prefix + "bk", l.bk);
    add_mat(prefix + "wv", l.wv);
    add_vec(prefix + "bv", l.bv);
    add_mat(prefix + "wo", l.wo);
    add_vec(prefix + "bo", l.bo);
    add_vec(prefix + "ln1_gain", l.ln1_gain);
    add_vec(prefix + "ln1_bias", l.ln1_bias);
    add_mat(prefix + "w1", l.w1);
    add_vec(prefix + "b1", l.b1);
    add_mat(prefix + "w2", l.w2);
    add_vec(prefix + "b2", l.b2);
    add_vec(prefix + "ln2_gain", l.ln2_gain);
    add_vec(prefix + "ln2_bias", l.ln2_bias);
  }
  add_vec("output_bias", p.output_bias);
  return out;
}

template <typename T>
ParamsT<T> allocate(const ModelConfig& config) {
  config.validate();
  ParamsT<T> p;
  p.config = config;
  const int h = config.hidden, f = config.ffn;
  p.token_embedding.setZero(config.vocab_size, h);
  p.position_embedding.setZero(config.max_seq, h);
  p.emb_ln_gain = Vec<T>::Ones(h);
  p.emb_ln_bias = Vec<T>::Zero(h);
  p.layers.resize(static_cast<std::size_t>(config.layers));
  for (auto& l : p.layers) {
    l.wq.setZero(h, h);
    l.wk.setZero(h, h);
    l.wv.setZero(h, h);
    l.wo.setZero(h, h);
    l.bq = Vec<T>::Zero(h);
    l.bk = Vec<T>::Zero(h);
    l.bv = Vec<T>::Zero(h);
    l.bo = Vec<T>::Zero(h);
    l.w1.setZero(h, f);
    l.b1 = Vec<T>::Zero(f);
    l.w2.setZero(f, h);
    l.b2 = Vec<T>::Zero(h);
    l.ln1_gain = Vec<T>::Ones(h);
    l.ln1_bias = Vec<T>::Zero(h);
    l.ln2_gain = Vec<T>::Ones(h);
    l.ln2_bias = Vec<T>::Zero(h);
  }
  p.output_bias = Vec<T>::Zero(config.vocab_size);
  return p;
}

template <typename T>
ParamsT<T> init_params_t(const ModelConfig& config, uint64_t seed) {
  ParamsT<T> p = allocate<T>(config);
  Rng rng(Rng::derive(seed, 0x1417));
  constexpr double kInitStd = 0.02;
  for (auto& tensor : enumerate_tensors(p)) {
    // Weight matrices and embeddings get scaled normal noise; layernorm
    // gains stay 1 and every bias stays 0.
    const bool is_weight = tensor.cols > 1;
    if (!is_weight) continue;
    for (long i = 0; i < tensor.size(); ++i)
      tensor.data[i] = static_cast<T>(rng.normal() * kInitStd);
  }
  return p;
}

// --- forward / backward ------------------------------------------------------

template <typename T>
struct LnCache {
  Mat<T> xhat;
  Vec<T> inv_std;
};

// y = gain .* (x - mean) / std + bias, per row
template <typename T>
void layernorm_forward(const Mat<T>& x, const Vec<T>& gain, const Vec<T>& bias, Mat<T>& y,
                       LnCache<T>& cache) {
  const long n = x.rows(), h = x.cols();
  y.resize(n, h);
  cache.xhat.resize(n, h);
  cache.inv_std.resize(n);
  for (long i = 0; i < n; ++i) {
    const T mean = x.row(i).mean();
    const T var = (x.row(i).array() - mean).square().sum() / static_cast<T>(h);
    const T inv_std = T(1) / std::sqrt(var + static_cast<T>(kLnEps));
    cache.inv_std(i) = inv_std;
    cache.xhat.row(i) = (x.row(i).array() - mean) * inv_std;
    y.row(i) = cache.xhat.row(i).cwiseProduct(gain.transpose()) + bias.transpose();
  }
}

template <typename T>
void layernorm_backward(const Mat<T>& dy, const LnCache<T>& cache, const Vec<T>& gain,
                        Mat<T>& dx, Vec<T>& dgain, Vec<T>& dbias) {
  const long n = dy.rows(), h = dy.cols();
  dx.resize(n, h);
  for (long i = 0; i < n; ++i) {
    dgain += dy.row(i).cwiseProduct(cache.xhat.row(i)).transpose();
    dbias += dy.row(i).transpose();
    // dxhat = dy .* gain; dx = (dxhat - mean(dxhat) - xhat * mean(dxhat .* xhat)) / std
    Eigen::Array<T, 1, Eigen::Dynamic> dxhat = dy.row(i).array() * gain.transpose().array();
    const T m1 = dxhat.mean();
    const T m2 = (dxhat * cache.xhat.row(i).array()).mean();
    dx.row(i) = ((dxhat - m1 - cache.xhat.row(i).array() * m2) * cache.inv_std(i)).matrix();
  }
}

template <typename T>
struct LayerCache {
  Mat<T> input;                 // x entering the layer
  Mat<T> q, k, v;               // (B*L) x H
  std::vector<Mat<T>> probs;    // per (batch, head): L x L attention weights
  Mat<T> ctx;                   // concatenated head outputs
  Mat<T> attn_out;              // ctx * wo + bo
  Mat<T> res1;                  // input + attn_out
  LnCache<T> ln1;
  Mat<T> x1;                    // post-LN1
  Mat<T> u;                     // x1 * w1 + b1
  Mat<T> g;                     // gelu(u)
  Mat<T> ff_out;                // g * w2 + b2
  Mat<T> res2;                  // x1 + ff_out
  LnCache<T> ln2;
  Mat<T> x2;                    // layer output
};

template <typename T>
struct TrunkCache {
  int batch = 0;
  int length = 0;
  std::vector<int> ids;          // row-major batch*length
  std::vector<uint8_t> valid;    // 1 for real tokens, 0 for padding
  Mat<T> x0;                     // embedding sum
  LnCache<T> emb_ln;
  Mat<T> e0;                     // post embedding layernorm
  std::vector<LayerCache<T>> layers;
  const Mat<T>& final_hidden() const { return layers.empty() ? e0 : layers.back().x2; }
};

template <typename T>
void trunk_forward(const ParamsT<T>& p, const std::vector<std::vector<int>>& batch,
                   TrunkCache<T>& c) {
  const ModelConfig& cfg = p.config;
  const int B = static_cast<int>(batch.size());
  int L = 0;
  for (const auto& row : batch) {
    if (static_cast<int>(row.size()) > cfg.max_seq)
      throw std::invalid_argument("sequence length " + std::to_string(row.size()) +
                                  " exceeds max_seq " + std::to_string(cfg.max_seq));
    L = std::max(L, static_cast<int>(row.size()));
  }
  if (B == 0 || L == 0) throw std::invalid_argument("empty batch");

  const int H = cfg.hidden;
  const int heads = cfg.heads;
  const int dh = H / heads;
  const T scale = T(1) / std::sqrt(static_cast<T>(dh));
  const T neg_inf = -std::numeric_limits<T>::infinity();

  c.batch = B;
  c.length = L;
  c.ids.assign(static_cast<std::size_t>(B) * L, wordpiece::kPadId);
  c.valid.assign(static_cast<std::size_t>(B) * L, 0);
  for (int b = 0; b < B; ++b)
    for (int t = 0; t < static_cast<int>(batch[b].size()); ++t) {
      const int id = batch[b][t];
      if (id < 0 || id >= cfg.vocab_size)
        throw std::invalid_argument("token id out of range: " + std::to_string(id));
      c.ids[static_cast<std::size_t>(b) * L + t] = id;
      c.valid[static_cast<std::size_t>(b) * L + t] = 1;
    }

  const long n = static_cast<long>(B) * L;
  c.x0.resize(n, H);
  for (long i = 0; i < n; ++i) {
    const int pos = static_cast<int>(i % L);
    c.x0.row(i) = p.token_embedding.row(c.ids[static_cast<std::size_t>(i)]) +
                  p.position_embedding.row(pos);
  }
  layernorm_forward(c.x0, p.emb_ln_gain, p.emb_ln_bias, c.e0, c.emb_ln);

  c.layers.resize(p.layers.size());
  const Mat<T>* x = &c.e0;
  for (std::size_t li = 0; li < p.layers.size(); ++li) {
    const LayerParamsT<T>& lp = p.layers[li];
    LayerCache<T>& lc = c.layers[li];
    lc.input = *x;

    lc.q.noalias() = lc.input * lp.wq;
    lc.q.rowwise() += lp.bq.transpose();
    lc.k.noalias() = lc.input * lp.wk;
    lc.k.rowwise() += lp.bk.transpose();
    lc.v.noalias() = lc.input * lp.wv;
    lc.v.rowwise() += lp.bv.transpose();

    lc.ctx.resize(n, H);
    lc.probs.assign(static_cast<std::size_t>(B) * heads, Mat<T>());
    for (int b = 0; b < B; ++b) {
      for (int h = 0; h < heads; ++h) {
        const auto qb = lc.q.block(static_cast<long>(b) * L, h * dh, L, dh);
        const auto kb = lc.k.block(static_cast<long>(b) * L, h * dh, L, dh);
        const auto vb = lc.v.block(static_cast<long>(b) * L, h * dh, L, dh);
        Mat<T> scores = qb * kb.transpose() * scale;
        for (int j = 0; j < L; ++j)
          if (!c.valid[static_cast<std::size_t>(b) * L + j]) scores.col(j).setConstant(neg_inf);
        Mat<T>& probs = lc.probs[static_cast<std::size_t>(b) * heads + h];
        probs.resize(L, L);
        for (int i = 0; i < L; ++i) {
          const T row_max = scores.row(i).maxCoeff();
          Eigen::Array<T, 1, Eigen::Dynamic> e = (scores.row(i).array() - row_max).exp();
          probs.row(i) = (e / e.sum()).matrix();
        }
        lc.ctx.block(static_cast<long>(b) * L, h * dh, L, dh).noalias() = probs * vb;
      }
    }

    lc.attn_out.noalias() = lc.ctx * lp.wo;
    lc.attn_out.rowwise() += lp.bo.transpose();
    lc.res1 = lc.input + lc.attn_out;
    layernorm_forward(lc.res1, lp.ln1_gain, lp.ln1_bias, lc.x1, lc.ln1);

    lc.u.noalias() = lc.x1 * lp.w1;
    lc.u.rowwise() += lp.b1.transpose();
    lc.g = gelu(lc.u);
    lc.ff_out.noalias() = lc.g * lp.w2;
    lc.ff_out.rowwise() += lp.b2.transpose();
    lc.res2 = lc.x1 + lc.ff_out;
    layernorm_forward(lc.res2, lp.ln2_gain, lp.ln2_bias, lc.x2, lc.ln2);
    x = &lc.x2;
  }
}

// Gradient of the trunk given d(final hidden); accumulates into `grads`.
template <typename T>
void trunk_backward(const ParamsT<T>& p, const TrunkCache<T>& c, Mat<T> dh_final,
                    ParamsT<T>& grads) {
  const ModelConfig& cfg = p.config;
  const int B = c.batch, L = c.length, H = cfg.hidden;
  const int heads = cfg.heads;
  const int dhead = H / heads;
  const T scale = T(1) / std::sqrt(static_cast<T>(dhead));
  const long n = static_cast<long>(B) * L;

  Mat<T> dx = std::move(dh_final);
  for (long li = static_cast<long>(p.layers.size()) - 1; li >= 0; --li) {
    const LayerParamsT<T>& lp = p.layers[static_cast<std::size_t>(li)];
    const LayerCache<T>& lc = c.layers[static_cast<std::size_t>(li)];
    LayerParamsT<T>& lg = grads.layers[static_cast<std::size_t>(li)];

    Mat<T> dres2;
    layernorm_backward(dx, lc.ln2, lp.ln2_gain, dres2, lg.ln2_gain, lg.ln2_bias);

    // res2 = x1 + ff_out
    Mat<T> dx1 = dres2;
    const Mat<T>& dff = dres2;
    lg.w2.noalias() += lc.g.transpose() * dff;
    lg.b2 += dff.colwise().sum().transpose();
    Mat<T> dg = dff * lp.w2.transpose();
    Mat<T> du = dg.cwiseProduct(gelu_grad(lc.u));
    lg.w1.noalias() += lc.x1.transpose() * du;
    lg.b1 += du.colwise().sum().transpose();
    dx1.noalias() += du * lp.w1.transpose();

    Mat<T> dres1;
    layernorm_backward(dx1, lc.ln1, lp.ln1_gain, dres1, lg.ln1_gain, lg.ln1_bias);

    // res1 = input + attn_out
    Mat<T> dinput = dres1;
    const Mat<T>& dattn = dres1;
    lg.wo.noalias() += lc.ctx.transpose() * dattn;
    lg.bo += dattn.colwise().sum().transpose();
    Mat<T> dctx = dattn * lp.wo.transpose();

    Mat<T> dq = Mat<T>::Zero(n, H), dk = Mat<T>::Zero(n, H), dv = Mat<T>::Zero(n, H);
    for (int b = 0; b < B; ++b) {
      for (int h = 0; h < heads; ++h) {
        const Mat<T>& probs = lc.probs[static_cast<std::size_t>(b) * heads + h];
        const auto qb = lc.q.block(static_cast<long>(b) * L, h * dhead, L, dhead);
        const auto kb = lc.k.block(static_cast<long>(b) * L, h * dhead, L, dhead);
        const auto vb = lc.v.block(static_cast<long>(b) * L, h * dhead, L, dhead);
        const auto dctx_b = dctx.block(static_cast<long>(b) * L, h * dhead, L, dhead);

        Mat<T> dprobs = dctx_b * vb.transpose();
        dv.block(static_cast<long>(b) * L, h * dhead, L, dhead).noalias() =
            probs.transpose() * dctx_b;

        Mat<T> dscores(L, L);
        for (int i = 0; i < L; ++i) {
          const T dot = dprobs.row(i).cwiseProduct(probs.row(i)).sum();
          dscores.row(i) =
              (probs.row(i).array() * (dprobs.row(i).array() - dot)).matrix() * scale;
        }
        dq.block(static_cast<long>(b) * L, h * dhead, L, dhead).noalias() = dscores * kb;
        dk.block(static_cast<long>(b) * L, h * dhead, L, dhead).noalias() =
            dscores.transpose() * qb;
      }
    }

    lg.wq.noalias() += lc.input.transpose() * dq;
    lg.bq += dq.colwise().sum().transpose();
    lg.wk.noalias() += lc.input.transpose() * dk;
    lg.bk += dk.colwise().sum().transpose();
    lg.wv.noalias() += lc.input.transpose() * dv;
    lg.bv += dv.colwise().sum().transpose();
    dinput.noalias() += dq * lp.wq.transpose();
    dinput.noalias() += dk * lp.wk.transpose();
    dinput.noalias() += dv * lp.wv.transpose();
    dx = std::move(dinput);
  }

  Mat<T> dx0;
  layernorm_backward(dx, c.emb_ln, p.emb_ln_gain, dx0, grads.emb_ln_gain, grads.emb_ln_bias);
  for (long i = 0; i < n; ++i) {
    grads.token_embedding.row(c.ids[static_cast<std::size_t>(i)]) += dx0.row(i);
    grads.position_embedding.row(i % c.length) += dx0.row(i);
  }
}

// Loss and gradients for one corrupted batch; label logits use the tied head.
template <typename T>
double mlm_loss_and_grads(const ParamsT<T>& p, const std::vector<std::vector<int>>& rows,
                          const std::vector<std::array<int, 3>>& labels, ParamsT<T>* grads) {
  if (labels.empty()) throw std::invalid_argument("mlm loss needs at least one label");
  TrunkCache<T> c;
  trunk_forward(p, rows, c);
  const Mat<T>& hidden = c.final_hidden();
  const long nl = static_cast<long>(labels.size());
  const int V = p.config.vocab_size;

  Mat<T> h_rows(nl, p.config.hidden);
  for (long i = 0; i < nl; ++i)
    h_rows.row(i) = hidden.row(static_cast<long>(labels[i][0]) * c.length + labels[i][1]);

  Mat<T> logits = h_rows * p.token_embedding.transpose();
  logits.rowwise() += p.output_bias.transpose();

  double loss = 0.0;
  Mat<T> dlogits(nl, V);
  for (long i = 0; i < nl; ++i) {
    const T row_max = logits.row(i).maxCoeff();
    Eigen::Array<T, 1, Eigen::Dynamic> e = (logits.row(i).array() - row_max).exp();
    const T denom = e.sum();
    const int target = labels[i][2];
    loss += -static_cast<double>(logits(i, target) - row_max) +
            std::log(static_cast<double>(denom));
    if (grads) {
      dlogits.row(i) = (e / denom).matrix();
      dlogits(i, target) -= T(1);
    }
  }
  loss /= static_cast<double>(nl);
  if (!grads) return loss;

  dlogits *= T(1) / static_cast<T>(nl);
  grads->output_bias += dlogits.colwise().sum().transpose();
  grads->token_embedding.noalias() += dlogits.transpose() * h_rows;
  Mat<T> dh_rows = dlogits * p.token_embedding;

  Mat<T> dh_final = Mat<T>::Zero(static_cast<long>(c.batch) * c.length, p.config.hidden);
  for (long i = 0; i < nl; ++i)
    dh_final.row(static_cast<long>(labels[i][0]) * c.length + labels[i][1]) += dh_rows.row(i);
  trunk_backward(p, c, std::move(dh_final), *grads);
  return loss;
}

}  // namespace

void ModelConfig::validate() const {
  if (layers < 1 || heads < 1 || hidden < 1 || ffn < 1 || max_seq < 3 || vocab_size < 6)
    throw std::invalid_argument("model config out of range");
  if (hidden % heads != 0)
    throw std::invalid_argument("hidden width must be divisible by head count");
  if (dropout < 0.0 || dropout >= 1.0) throw std::invalid_argument("dropout must be in [0, 1)");
}

Params init_params(const ModelConfig& config, uint64_t seed) {
  return init_params_t<float>(config, seed);
}

Logits forward(const Params& params, const std::vector<std::vector<int>>& batch) {
  TrunkCache<float> c;
  trunk_forward(params, batch, c);
  Logits out;
  out.batch = c.batch;
  out.length = c.length;
  out.values.noalias() = c.final_hidden() * params.token_embedding.transpose();
  out.values.rowwise() += params.output_bias.transpose();
  return out;
}

CorruptResult mlm_corrupt(const std::vector<std::vector<int>>& rows, double mask_p,
                          int vocab_size, Rng& rng) {
  if (mask_p < 0.0 || mask_p > 1.0) throw std::invalid_argument("mask probability must be in [0,1]");
  CorruptResult result;
  result.rows = rows;
  for (int r = 0; r < static_cast<int>(rows.size()); ++r) {
    for (int t = 0; t < static_cast<int>(rows[static_cast<std::size_t>(r)].size()); ++t) {
      const int id = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(t)];
      if (id < 5) continue;  // special tokens are never selected
      if (!rng.bernoulli(mask_p)) continue;
      result.labels.push_back({r, t, id});
      const double u = rng.uniform_real();
      int& slot = result.rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(t)];
      if (u < 0.8) {
        slot = wordpiece::kMaskId;
      } else if (u < 0.9) {
        slot = static_cast<int>(rng.uniform_int(0, vocab_size - 1));
      }  // else: left unchanged
    }
  }
  return result;
}

TrainResult train(Params& params, const std::vector<std::string>& lines,
                  const wordpiece::Vocab& vocab, const TrainConfig& config) {
  if (lines.empty()) throw std::invalid_argument("training corpus is empty");
  if (config.mask_p < 0.0 || config.mask_p > 1.0)
    throw std::invalid_argument("mask probability must be in [0,1]");
  if (config.batch_size < 1) throw std::invalid_argument("batch size must be >= 1");

  std::vector<std::vector<int>> tokenized;
  tokenized.reserve(lines.size());
  for (const std::string& line : lines) {
    tokenized.push_back(wordpiece::tokenize(vocab, line));
    if (static_cast<int>(tokenized.back().size()) > params.config.max_seq)
      throw std::invalid_argument("training line exceeds max_seq after tokenization: '" + line + "'");
  }

  const int64_t batches_per_epoch =
      (static_cast<int64_t>(tokenized.size()) + config.batch_size - 1) / config.batch_size;
  const int64_t total_steps =
      config.steps > 0 ? config.steps : batches_per_epoch * std::max(1, config.epochs);
  const int64_t warmup_steps =
      std::max<int64_t>(1, static_cast<int64_t>(config.warmup_frac * static_cast<double>(total_steps)));

  Params grads = allocate<float>(params.config);
  Params m = allocate<float>(params.config);
  Params v = allocate<float>(params.config);
  // LN gains start at one; Adam state must start at zero regardless.
  for (auto& t : enumerate_tensors(m)) std::fill(t.data, t.data + t.size(), 0.0f);
  for (auto& t : enumerate_tensors(v)) std::fill(t.data, t.data + t.size(), 0.0f);

  auto param_refs = enumerate_tensors(params);
  auto grad_refs = enumerate_tensors(grads);
  auto m_refs = enumerate_tensors(m);
  auto v_refs = enumerate_tensors(v);

  constexpr double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;

  Rng rng(Rng::derive(config.seed, 0x3141));
  std::vector<std::size_t> order(tokenized.size());
  std::iota(order.begin(), order.end(), 0);

  TrainResult result;
  int64_t step = 0;
  while (step < total_steps) {
    const int64_t steps_before_epoch = step;
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[rng.uniform_int(0, static_cast<int64_t>(i) - 1)]);

    for (int64_t batch_start = 0;
         batch_start < static_cast<int64_t>(order.size()) && step < total_steps;
         batch_start += config.batch_size) {
      std::vector<std::vector<int>> rows;
      for (int64_t j = batch_start;
           j < std::min<int64_t>(batch_start + config.batch_size,
                                 static_cast<int64_t>(order.size()));
           ++j)
        rows.push_back(tokenized[order[static_cast<std::size_t>(j)]]);

      CorruptResult corrupted = mlm_corrupt(rows, config.mask_p, params.config.vocab_size, rng);
      if (corrupted.labels.empty()) continue;  // nothing to predict in this batch

      for (auto& t : grad_refs) std::fill(t.data, t.data + t.size(), 0.0f);
      const double loss =
          mlm_loss_and_grads<float>(params, corrupted.rows, corrupted.labels, &grads);
      if (!std::isfinite(loss))
        throw TrainingError("training diverged: non-finite loss at step " + std::to_string(step));

      ++step;
      const double lr_scale =
          step <= warmup_steps
              ? static_cast<double>(step) / static_cast<double>(warmup_steps)
              : std::max(0.0, static_cast<double>(total_steps - step) /
                                  std::max<double>(1.0, static_cast<double>(total_steps - warmup_steps)));
      const double lr = config.lr * lr_scale;
      const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
      const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));

      for (std::size_t t = 0; t < param_refs.size(); ++t) {
        const long size = param_refs[t].size();
        Eigen::Map<Eigen::ArrayXf> w(param_refs[t].data, size);
        Eigen::Map<const Eigen::ArrayXf> g(grad_refs[t].data, size);
        Eigen::Map<Eigen::ArrayXf> mb(m_refs[t].data, size);
        Eigen::Map<Eigen::ArrayXf> vb(v_refs[t].data, size);
        mb = static_cast<float>(beta1) * mb + static_cast<float>(1.0 - beta1) * g;
        vb = static_cast<float>(beta2) * vb + static_cast<float>(1.0 - beta2) * g.square();
        w -= static_cast<float>(lr / bc1) * mb /
             ((vb * static_cast<float>(1.0 / bc2)).sqrt() + static_cast<float>(adam_eps));
      }
      result.losses.push_back(loss);
      result.lrs.push_back(lr);
    }
    if (step == steps_before_epoch)
      throw TrainingError("no maskable positions in the whole corpus; cannot train");
  }
  return result;
}

std::vector<Prediction> fill_mask(const Params& params, const wordpiece::Vocab& vocab,
                                  std::string_view text, int top_k) {
  const std::vector<int> ids = wordpiece::tokenize(vocab, text);
  int mask_pos = -1;
  int mask_count = 0;
  for (int i = 0; i < static_cast<int>(ids.size()); ++i) {
    if (ids[static_cast<std::size_t>(i)] == wordpiece::kMaskId) {
      mask_pos = i;
      ++mask_count;
    }
  }
  if (mask_count != 1)
    throw std::invalid_argument("fill_mask input must contain exactly one [MASK], got " +
                                std::to_string(mask_count));

  const Logits logits = forward(params, {ids});
  const int V = params.config.vocab_size;

  // Softmax in double so the returned distribution sums to 1 tightly.
  std::vector<double> probs(static_cast<std::size_t>(V));
  double row_max = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < V; ++j)
    row_max = std::max(row_max, static_cast<double>(logits.values(mask_pos, j)));
  double denom = 0.0;
  for (int j = 0; j < V; ++j) {
    probs[static_cast<std::size_t>(j)] =
        std::exp(static_cast<double>(logits.values(mask_pos, j)) - row_max);
    denom += probs[static_cast<std::size_t>(j)];
  }

  std::vector<Prediction> ranked(static_cast<std::size_t>(V));
  for (int j = 0; j < V; ++j)
    ranked[static_cast<std::size_t>(j)] = {j, vocab.token_of(j),
                                           probs[static_cast<std::size_t>(j)] / denom};
  std::sort(ranked.begin(), ranked.end(), [](const Prediction& a, const Prediction& b) {
    if (a.prob != b.prob) return a.prob > b.prob;
    return a.id < b.id;
  });
  if (top_k > 0 && top_k < V) ranked.resize(static_cast<std::size_t>(top_k));
  return ranked;
}

GradCheckReport gradient_check(const ModelConfig& config, uint64_t seed) {
  ParamsT<double> p = init_params_t<double>(config, seed);

  // Fixed two-row batch with hand-placed mask labels; every id stays in range.
  Rng rng(Rng::derive(seed, 0x6006));
  const int V = config.vocab_size;
  std::vector<std::vector<int>> rows(2);
  const int len0 = std::min(config.max_seq, 6);
  const int len1 = std::min(config.max_seq, 4);  // shorter row exercises padding
  auto fill_row = [&](std::vector<int>& row, int len) {
    row.push_back(wordpiece::kClsId);
    for (int i = 0; i < len - 2; ++i)
      row.push_back(static_cast<int>(rng.uniform_int(5, V - 1)));
    row.push_back(wordpiece::kSepId);
  };
  fill_row(rows[0], len0);
  fill_row(rows[1], len1);
  std::vector<std::array<int, 3>> labels;
  labels.push_back({0, 1, rows[0][1]});
  rows[0][1] = wordpiece::kMaskId;
  labels.push_back({0, len0 - 2, rows[0][static_cast<std::size_t>(len0 - 2)]});
  labels.push_back({1, 1, rows[1][1]});
  rows[1][1] = static_cast<int>(rng.uniform_int(5, V - 1));  // "random token" corruption case

  ParamsT<double> grads = allocate<double>(config);
  for (auto& t : enumerate_tensors(grads)) std::fill(t.data, t.data + t.size(), 0.0);
  mlm_loss_and_grads<double>(p, rows, labels, &grads);

  GradCheckReport report;
  auto param_refs = enumerate_tensors(p);
  auto grad_refs = enumerate_tensors(grads);
  const double h = 1e-5;
  for (std::size_t t = 0; t < param_refs.size(); ++t) {
    double group_max = 0.0;
    for (long k = 0; k < param_refs[t].size(); ++k) {
      double& w = param_refs[t].data[k];
      const double saved = w;
      w = saved + h;
      const double up = mlm_loss_and_grads<double>(p, rows, labels, nullptr);
      w = saved - h;
      const double down = mlm_loss_and_grads<double>(p, rows, labels, nullptr);
      w = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double analytic = grad_refs[t].data[k];
      // The 1e-6 floor keeps exactly-zero gradients (the key bias cancels in
      // the row softmax) from comparing float cancellation noise to itself.
      const double rel =
          std::abs(analytic - numeric) / std::max(1e-6, std::abs(analytic) + std::abs(numeric));
      group_max = std::max(group_max, rel);
    }
    report.max_rel_error = std::max(report.max_rel_error, group_max);
    const std::string& name = param_refs[t].name;
    if (name.find("embedding") != std::string::npos || name.find("emb_ln") != std::string::npos)
      report.embedding_error = std::max(report.embedding_error, group_max);
    else if (name.find("w1") != std::string::npos || name.find("w2") != std::string::npos ||
             name.find("b1") != std::string::npos || name.find("b2") != std::string::npos ||
             name.find("ln2") != std::string::npos)
      report.ffn_error = std::max(report.ffn_error, group_max);
    else if (name == "output_bias")
      report.head_error = std::max(report.head_error, group_max);
    else
      report.attention_error = std::max(report.attention_error, group_max);
  }
  return report;
}

namespace {

nlohmann::json config_to_json(const ModelConfig& c) {
  return {{"layers", c.layers},   {"heads", c.heads},       {"hidden", c.hidden},
          {"ffn", c.ffn},         {"max_seq", c.max_seq},   {"vocab_size", c.vocab_size},
          {"dropout", c.dropout}};
}

ModelConfig config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.layers = j.at("layers").get<int>();
  c.heads = j.at("heads").get<int>();
  c.hidden = j.at("hidden").get<int>();
  c.ffn = j.at("ffn").get<int>();
  c.max_seq = j.at("max_seq").get<int>();
  c.vocab_size = j.at("vocab_size").get<int>();
  c.dropout = j.at("dropout").get<double>();
  return c;
}

}  // namespace

void save_checkpoint(const std::string& path, const Params& params) {
  auto refs = enumerate_tensors(const_cast<Params&>(params));
  nlohmann::json tensors = nlohmann::json::array();
  uint64_t offset = 0;
  for (const auto& t : refs) {
    tensors.push_back({{"name", t.name},
                       {"shape", {t.rows, t.cols}},
                       {"offset", offset},
                       {"floats", t.size()}});
    offset += static_cast<uint64_t>(t.size()) * sizeof(float);
  }
  nlohmann::json header = {{"format", "gamelab-checkpoint-v1"},
                           {"config", config_to_json(params.config)},
                           {"tensors", tensors},
                           {"payload_bytes", offset}};
  const std::string header_text = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open checkpoint for writing: " + path);
  const uint64_t header_len = header_text.size();
  out.write(reinterpret_cast<const char*>(&header_len), sizeof(header_len));
  out.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));
  for (const auto& t : refs)
    out.write(reinterpret_cast<const char*>(t.data),
              static_cast<std::streamsize>(t.size() * sizeof(float)));
  if (!out) throw IoError("write failure on checkpoint: " + path);
}

Params load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path);
  uint64_t header_len = 0;
  in.read(reinterpret_cast<char*>(&header_len), sizeof(header_len));
  if (!in || header_len == 0 || header_len > (1u << 20))
    throw ParseError("checkpoint header length is implausible");
  std::string header_text(header_len, '\0');
  in.read(header_text.data(), static_cast<std::streamsize>(header_len));
  if (!in) throw ParseError("truncated checkpoint header");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("checkpoint header is not valid JSON: " + std::string(e.what()));
  }
  if (header.value("format", "") != "gamelab-checkpoint-v1")
    throw ParseError("unrecognized checkpoint format");

  Params params = allocate<float>(config_from_json(header.at("config")));
  auto refs = enumerate_tensors(params);
  const auto& tensors = header.at("tensors");
  if (tensors.size() != refs.size()) throw ParseError("checkpoint tensor list mismatch");
  for (std::size_t i = 0; i < refs.size(); ++i) {
    const auto& meta = tensors[i];
    if (meta.at("name").get<std::string>() != refs[i].name ||
        meta.at("shape")[0].get<long>() != refs[i].rows ||
        meta.at("shape")[1].get<long>() != refs[i].cols)
      throw ParseError("checkpoint tensor mismatch at '" + refs[i].name + "'");
    in.read(reinterpret_cast<char*>(refs[i].data),
            static_cast<std::streamsize>(refs[i].size() * sizeof(float)));
    if (!in) throw ParseError("truncated checkpoint payload at '" + refs[i].name + "'");
  }
  return params;
}

}  // namespace gamelab::mlm
