#include "gamelab/mlm.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "gamelab/corpus.hpp"
#include "gamelab/errors.hpp"
#include "gamelab/nim.hpp"
#include "gamelab/rng.hpp"

using namespace gamelab;
namespace fs = std::filesystem;

namespace {

mlm::ModelConfig tiny_config(int vocab) {
  mlm::ModelConfig c;
  c.layers = 1;
  c.heads = 2;
  c.hidden = 8;
  c.ffn = 16;
  c.max_seq = 8;
  c.vocab_size = vocab;
  return c;
}

std::vector<std::string> guru_lines(int games, uint64_t seed) {
  std::vector<std::string> lines;
  Rng rng(seed);
  const auto guru = [](const nim::State& s, Rng&) { return nim::guru_move(s); };
  const auto random = [](const nim::State& s, Rng& r) { return nim::random_move(s, r); };
  for (int g = 0; g < games; ++g) {
    const nim::State start = nim::random_start(rng, 10);
    const auto record = g % 2 == 0 ? nim::play_game(guru, 'G', random, 'R', start, 0.0, rng)
                                   : nim::play_game(random, 'R', guru, 'G', start, 0.0, rng);
    for (const auto& ply : record.plies)
      lines.push_back(corpus::encode_nim_record(ply.state, ply.tag, ply.move));
  }
  return lines;
}

wordpiece::Vocab nim_vocab(const std::vector<std::string>& lines) {
  return wordpiece::train_from_lines(lines, {.max_vocab = 200, .min_frequency = 1});
}

}  // namespace

TEST_CASE("init_params: deterministic, shaped, finite") {
  const mlm::ModelConfig config = tiny_config(12);
  const mlm::Params a = mlm::init_params(config, 5);
  const mlm::Params b = mlm::init_params(config, 5);
  CHECK(a.token_embedding == b.token_embedding);
  CHECK(a.layers[0].wq == b.layers[0].wq);

  const mlm::Params c = mlm::init_params(config, 6);
  CHECK(a.token_embedding != c.token_embedding);

  CHECK(a.token_embedding.rows() == 12);
  CHECK(a.token_embedding.cols() == 8);
  CHECK(a.position_embedding.rows() == 8);
  CHECK(a.layers.size() == 1);
  CHECK(a.layers[0].w1.rows() == 8);
  CHECK(a.layers[0].w1.cols() == 16);
  CHECK(a.output_bias.size() == 12);
  CHECK(a.emb_ln_gain.isOnes());
  CHECK(a.token_embedding.allFinite());

  mlm::ModelConfig bad = tiny_config(12);
  bad.heads = 3;  // hidden 8 not divisible
  CHECK_THROWS_AS(mlm::init_params(bad, 1), std::invalid_argument);
}

TEST_CASE("forward: shapes, softmax normalization, batch independence") {
  const mlm::ModelConfig config = tiny_config(12);
  const mlm::Params params = mlm::init_params(config, 5);

  const std::vector<int> row1 = {2, 7, 8, 9, 3};
  const std::vector<int> row2 = {2, 10, 11, 6, 3};
  const mlm::Logits one = mlm::forward(params, {row1});
  CHECK(one.batch == 1);
  CHECK(one.length == 5);
  CHECK(one.values.rows() == 5);
  CHECK(one.values.cols() == 12);

  for (int pos = 0; pos < 5; ++pos) {
    const double row_max = one.values.row(pos).maxCoeff();
    double denom = 0.0;
    for (int v = 0; v < 12; ++v) denom += std::exp(double(one.values(pos, v)) - row_max);
    double total = 0.0;
    for (int v = 0; v < 12; ++v)
      total += std::exp(double(one.values(pos, v)) - row_max) / denom;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
  }

  // Batch order only permutes outputs; the tolerance absorbs GEMM-kernel
  // reassociation in the final vocab projection (~1e-9).
  const mlm::Logits ab = mlm::forward(params, {row1, row2});
  const mlm::Logits ba = mlm::forward(params, {row2, row1});
  CHECK((ab.values.block(0, 0, 5, 12) - ba.values.block(5, 0, 5, 12)).cwiseAbs().maxCoeff() <=
        1e-6f);
  CHECK((ab.values.block(5, 0, 5, 12) - ba.values.block(0, 0, 5, 12)).cwiseAbs().maxCoeff() <=
        1e-6f);

  // Padding a batch with a shorter row must not change the longer row's output.
  const mlm::Logits padded = mlm::forward(params, {row1, {2, 5, 3}});
  CHECK((padded.values.block(0, 0, 5, 12) - one.values).cwiseAbs().maxCoeff() <= 1e-6f);

  CHECK_THROWS_AS(mlm::forward(params, {{2, 7, 8, 9, 7, 8, 9, 7, 8, 3}}),
                  std::invalid_argument);  // longer than max_seq
  CHECK_THROWS_AS(mlm::forward(params, {{2, 99, 3}}), std::invalid_argument);
}

TEST_CASE("mlm_corrupt: selection rules and the 80/10/10 mix") {
  const std::vector<std::vector<int>> rows = {{2, 7, 8, 9, 10, 3}};

  SUBCASE("p=0 leaves the batch alone") {
    Rng rng(3);
    const auto out = mlm::mlm_corrupt(rows, 0.0, 12, rng);
    CHECK(out.rows == rows);
    CHECK(out.labels.empty());
  }

  SUBCASE("specials are never selected") {
    Rng rng(4);
    const auto out = mlm::mlm_corrupt({{0, 1, 2, 3, 4}}, 1.0, 12, rng);
    CHECK(out.labels.empty());
  }

  SUBCASE("p=1 selects everything and mixes 80/10/10") {
    Rng rng(5);
    int64_t masked = 0, kept = 0, randomized = 0, total = 0;
    std::vector<std::vector<int>> batch(2000, std::vector<int>{2, 7, 8, 9, 10, 11, 3});
    const auto out = mlm::mlm_corrupt(batch, 1.0, 12, rng);
    for (const auto& [r, t, orig] : out.labels) {
      ++total;
      const int now = out.rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(t)];
      if (now == wordpiece::kMaskId) ++masked;
      else if (now == orig) ++kept;
      else ++randomized;
    }
    CHECK(total == 10000);
    CHECK(static_cast<double>(masked) / static_cast<double>(total) ==
          doctest::Approx(0.8).epsilon(0.0125));  // 80 +- 1 point
    // The 10% "random token" draw can also land on the original id.
    CHECK(static_cast<double>(kept) / static_cast<double>(total) ==
          doctest::Approx(0.1 + 0.1 / 12.0).epsilon(0.1));
    CHECK(static_cast<double>(randomized) / static_cast<double>(total) ==
          doctest::Approx(0.1 * 11.0 / 12.0).epsilon(0.1));
  }
}

TEST_CASE("gradient check: analytic backprop matches finite differences") {
  const mlm::GradCheckReport report = mlm::gradient_check(tiny_config(12), 2);
  CHECK(report.max_rel_error <= 1e-4);
  CHECK(report.embedding_error <= 1e-4);
  CHECK(report.attention_error <= 1e-4);
  CHECK(report.ffn_error <= 1e-4);
  CHECK(report.head_error <= 1e-4);
  CHECK(report.max_rel_error > 0.0);  // the comparison actually ran
}

TEST_CASE("training reduces the loss and is reproducible") {
  const auto lines = guru_lines(40, 9);
  const auto vocab = nim_vocab(lines);

  mlm::ModelConfig config = tiny_config(vocab.size());
  config.hidden = 32;
  config.ffn = 64;
  config.heads = 4;
  config.max_seq = 16;

  mlm::TrainConfig tc;
  tc.steps = 200;
  tc.batch_size = 16;
  tc.seed = 77;

  mlm::Params params = mlm::init_params(config, 77);
  const auto result = mlm::train(params, lines, vocab, tc);
  REQUIRE(result.losses.size() == 200);
  const double first = result.losses.front();
  const double last10 =
      std::accumulate(result.losses.end() - 10, result.losses.end(), 0.0) / 10.0;
  CHECK(last10 < first);

  SUBCASE("same seed, bit-identical loss curve") {
    mlm::Params params2 = mlm::init_params(config, 77);
    const auto result2 = mlm::train(params2, lines, vocab, tc);
    CHECK(result.losses == result2.losses);
    CHECK(params.token_embedding == params2.token_embedding);
  }
}

TEST_CASE("training memorizes a single repeated line") {
  const std::vector<std::string> lines(64, "a10/b10/c10 G - a10");
  const auto vocab = nim_vocab(lines);
  mlm::ModelConfig config = tiny_config(vocab.size());
  config.hidden = 32;
  config.ffn = 64;
  config.max_seq = 16;

  mlm::TrainConfig tc;
  tc.steps = 800;
  tc.batch_size = 16;
  tc.lr = 1e-3;
  tc.seed = 1;

  mlm::Params params = mlm::init_params(config, 1);
  const auto result = mlm::train(params, lines, vocab, tc);
  const double tail =
      std::accumulate(result.losses.end() - 20, result.losses.end(), 0.0) / 20.0;
  CHECK(tail < 0.1);
}

TEST_CASE("training aborts with diagnostics when it diverges") {
  const auto lines = guru_lines(10, 2);
  const auto vocab = nim_vocab(lines);
  mlm::ModelConfig config = tiny_config(vocab.size());
  config.max_seq = 16;
  mlm::TrainConfig tc;
  tc.steps = 200;
  tc.lr = 1e18;  // guaranteed blow-up
  tc.seed = 3;
  mlm::Params params = mlm::init_params(config, 3);
  CHECK_THROWS_AS(mlm::train(params, lines, vocab, tc), TrainingError);
}

TEST_CASE("fill_mask ranks the vocabulary at the mask slot") {
  const auto lines = guru_lines(30, 10);
  const auto vocab = nim_vocab(lines);
  mlm::ModelConfig config = tiny_config(vocab.size());
  config.max_seq = 16;
  const mlm::Params params = mlm::init_params(config, 4);

  const auto ranked = mlm::fill_mask(params, vocab, "a10/b10/c10 G - [MASK]");
  CHECK(static_cast<int>(ranked.size()) == vocab.size());
  double total = 0.0;
  for (const auto& p : ranked) total += p.prob;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
  for (std::size_t i = 1; i < ranked.size(); ++i) CHECK(ranked[i - 1].prob >= ranked[i].prob);

  CHECK_THROWS_AS(mlm::fill_mask(params, vocab, "a10/b10/c10 G - a10"), std::invalid_argument);
  CHECK_THROWS_AS(mlm::fill_mask(params, vocab, "[MASK] G - [MASK]"), std::invalid_argument);

  SUBCASE("top_k truncates the ranking") {
    const auto top3 = mlm::fill_mask(params, vocab, "a10/b10/c10 G - [MASK]", 3);
    CHECK(top3.size() == 3);
    CHECK(top3.front().token == ranked.front().token);
  }
}

TEST_CASE("checkpoint round trip is bit-identical") {
  const auto lines = guru_lines(20, 12);
  const auto vocab = nim_vocab(lines);
  mlm::ModelConfig config = tiny_config(vocab.size());
  config.max_seq = 16;
  mlm::Params params = mlm::init_params(config, 8);
  mlm::TrainConfig tc;
  tc.steps = 30;
  tc.batch_size = 8;
  tc.seed = 8;
  mlm::train(params, lines, vocab, tc);

  const fs::path dir = fs::temp_directory_path() / "gamelab_mlm_tests";
  fs::create_directories(dir);
  const std::string path = (dir / "model.ckpt").string();
  mlm::save_checkpoint(path, params);
  const mlm::Params loaded = mlm::load_checkpoint(path);

  CHECK(loaded.config.hidden == config.hidden);
  CHECK(loaded.token_embedding == params.token_embedding);
  const std::vector<int> probe = wordpiece::tokenize(vocab, "a5/b3/c1 G - a1");
  const mlm::Logits before = mlm::forward(params, {probe});
  const mlm::Logits after = mlm::forward(loaded, {probe});
  CHECK(before.values == after.values);  // bit-identical

  SUBCASE("corrupt checkpoints are rejected") {
    const std::string bad = (dir / "bad.ckpt").string();
    std::ofstream(bad) << "not a checkpoint";
    CHECK_THROWS_AS(mlm::load_checkpoint(bad), ParseError);
  }
}
