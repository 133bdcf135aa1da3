#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "gamelab/rng.hpp"
#include "gamelab/wordpiece.hpp"

namespace gamelab::mlm {

template <typename T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;

struct ModelConfig {
  int layers = 4;
  int heads = 4;
  int hidden = 128;
  int ffn = 512;
  int max_seq = 32;
  int vocab_size = 0;
  double dropout = 0.0;

  void validate() const;  // throws std::invalid_argument
};

template <typename T>
struct LayerParamsT {
  Mat<T> wq, wk, wv, wo;            // hidden x hidden, applied as x * W + b
  Vec<T> bq, bk, bv, bo;
  Mat<T> w1;                        // hidden x ffn
  Vec<T> b1;
  Mat<T> w2;                        // ffn x hidden
  Vec<T> b2;
  Vec<T> ln1_gain, ln1_bias;        // post-attention layernorm
  Vec<T> ln2_gain, ln2_bias;        // post-ffn layernorm
};

// Encoder parameters; the MLM head is tied to the token embedding, so the
// only head-specific tensor is the per-token output bias.
template <typename T>
struct ParamsT {
  ModelConfig config;
  Mat<T> token_embedding;           // vocab x hidden
  Mat<T> position_embedding;        // max_seq x hidden
  Vec<T> emb_ln_gain, emb_ln_bias;
  std::vector<LayerParamsT<T>> layers;
  Vec<T> output_bias;               // vocab
};

using Params = ParamsT<float>;

Params init_params(const ModelConfig& config, uint64_t seed);

struct Logits {
  int batch = 0;
  int length = 0;                   // padded length
  Mat<float> values;                // (batch*length) x vocab, row-major
};

// Bidirectional encoder over right-padded id rows; padded positions are
// excluded from attention exactly (their keys get zero weight).
Logits forward(const Params& params, const std::vector<std::vector<int>>& batch);

struct CorruptResult {
  std::vector<std::vector<int>> rows;
  // (row, position, original id) for every selected position.
  std::vector<std::array<int, 3>> labels;
};

// 15%-style MLM corruption: each non-special position selected independently
// with mask_p; of the selected, 80% -> [MASK], 10% -> random token, 10% kept.
CorruptResult mlm_corrupt(const std::vector<std::vector<int>>& rows, double mask_p,
                          int vocab_size, Rng& rng);

struct TrainConfig {
  double mask_p = 0.15;
  int batch_size = 32;
  int epochs = 10;
  int64_t steps = 0;                // > 0 runs exactly this many steps instead
  double lr = 5e-4;
  double warmup_frac = 0.1;         // linear warmup, then linear decay to zero
  uint64_t seed = 0;
};

struct TrainResult {
  std::vector<double> losses;       // per optimizer step
  std::vector<double> lrs;
};

// Adam on mean masked cross-entropy. Single-threaded and deterministic for a
// given seed. Throws TrainingError when the loss stops being finite.
TrainResult train(Params& params, const std::vector<std::string>& lines,
                  const wordpiece::Vocab& vocab, const TrainConfig& config);

struct Prediction {
  int id = 0;
  std::string token;
  double prob = 0.0;
};

// Ranked mask-fill over the full vocabulary for a text with exactly one
// [MASK]; probabilities are softmax at the mask position and sum to 1.
std::vector<Prediction> fill_mask(const Params& params, const wordpiece::Vocab& vocab,
                                  std::string_view text, int top_k = -1);

struct GradCheckReport {
  double max_rel_error = 0.0;
  double embedding_error = 0.0;
  double attention_error = 0.0;
  double ffn_error = 0.0;
  double head_error = 0.0;
};

// Central finite differences vs analytic gradients in double precision over
// every parameter of a tiny model.
GradCheckReport gradient_check(const ModelConfig& config, uint64_t seed);

void save_checkpoint(const std::string& path, const Params& params);
Params load_checkpoint(const std::string& path);

}  // namespace gamelab::mlm
