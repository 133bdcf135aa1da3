// Acceptance suite: runs every project-level criterion end to end and prints
// one PASS/FAIL line each. Exits non-zero if any criterion fails.
//
// Criteria list:
//   1  nim-sum oracle, exhaustive over all 1331 states
//   2  minimax equivalence for piles <= 5
//   3  guru-vs-guru first-seat rate matches start enumeration
//   4  Q-learner parity with guru + small-board optimality
//   5  tokenizer vocabulary and round-trip on the 30k-game corpus
//   6  MLM numerics: gradient check, softmax, bit-exact retrain
//   7  few-shot match-size sweep
//   8  noise-robustness orderings
//   9  chess move generator perft + FEN round trip
//   10 chess corpus generation against a live engine
//   11 chess model held-out validity + evaluation outputs
//   12 dataset metrics on the 30k-game corpus

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "gamelab/arena.hpp"
#include "gamelab/corpus.hpp"
#include "gamelab/errors.hpp"
#include "gamelab/mlm.hpp"
#include "gamelab/nim.hpp"
#include "gamelab/report.hpp"
#include "gamelab/rng.hpp"
#include "gamelab/uci.hpp"
#include "gamelab/wordpiece.hpp"
#include "nim_minimax.hpp"

using namespace gamelab;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;
bool g_selected[13] = {};

struct Criterion {
  int id;
  Clock::time_point started = Clock::now();
  bool ok = true;
  std::string detail;

  Criterion(int id_, const char* title) : id(id_) {
    std::printf("criterion %2d: %s\n", id, title);
    std::fflush(stdout);
  }
  void expect(bool condition, const std::string& what) {
    if (!condition) {
      ok = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
  void note(const std::string& text) {
    std::printf("              %s\n", text.c_str());
    std::fflush(stdout);
  }
  ~Criterion() {
    const double secs =
        std::chrono::duration<double>(Clock::now() - started).count();
    std::printf("%s criterion %2d (%.1fs)%s%s\n", ok ? "PASS" : "FAIL", id, secs,
                detail.empty() ? "" : ": ", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failures;
  }
};

fs::path work_dir() {
  const fs::path dir = fs::temp_directory_path() / "gamelab_acceptance";
  fs::create_directories(dir);
  return dir;
}

nim::AgentFn random_fn() {
  return [](const nim::State& s, Rng& r) { return nim::random_move(s, r); };
}

double enumerated_nonzero_start_fraction() {
  int nonzero = 0;
  for (int a = 1; a <= 10; ++a)
    for (int b = 1; b <= 10; ++b)
      for (int c = 1; c <= 10; ++c)
        if (nim::nim_sum({{a, b, c}}) != 0) ++nonzero;
  return nonzero / 1000.0;
}

// Shared across criteria 4, 5 and 12.
struct SharedNim {
  std::unique_ptr<nim::QTable> q;
  std::string corpus30k;
};
SharedNim g_shared;

const nim::QTable& q_table_300k() {
  if (!g_shared.q) {
    g_shared.q = std::make_unique<nim::QTable>(nim::QConfig{});
    Rng rng(2024);
    g_shared.q->train(300000, random_fn(), rng);
  }
  return *g_shared.q;
}

const std::string& corpus_30k() {
  if (g_shared.corpus30k.empty()) {
    corpus::NimGenConfig cfg;
    cfg.games = 30000;
    cfg.seed = 41;
    g_shared.corpus30k = (work_dir() / "nim30k.txt").string();
    corpus::gen_nim_corpus(cfg, g_shared.corpus30k, &q_table_300k());
  }
  return g_shared.corpus30k;
}

// Training recipe pinned for the model-backed criteria (7, 8).
arena::NimTrainRecipe nim_recipe() {
  arena::NimTrainRecipe recipe;           // default 4-layer, 4-head, 128-wide
  recipe.train.epochs = 150;
  recipe.train.lr = 1e-3;
  recipe.train.batch_size = 32;
  return recipe;
}

void criterion_1() {
  Criterion c(1, "guru zeroes the nim-sum on all 1331 states");
  int zeroing = 0, winning = 0;
  for (int a = 0; a <= 10; ++a)
    for (int b = 0; b <= 10; ++b)
      for (int e = 0; e <= 10; ++e) {
        const nim::State s{{a, b, e}};
        if (s.terminal()) continue;
        if (nim::nim_sum(s) == 0) continue;
        ++winning;
        if (nim::nim_sum(nim::apply_move(s, nim::guru_move(s))) == 0) ++zeroing;
      }
  c.expect(winning > 0 && zeroing == winning,
           "zeroing move missed in " + std::to_string(winning - zeroing) + " states");
  c.expect(std::chrono::duration<double>(Clock::now() - c.started).count() < 1.0,
           "runtime over 1 s");
}

void criterion_2() {
  Criterion c(2, "minimax oracle equivalence for piles <= 5");
  testing::NimMinimax oracle(5);
  int winning = 0, preserved = 0;
  bool equivalence = true;
  for (int a = 0; a <= 5; ++a)
    for (int b = 0; b <= 5; ++b)
      for (int e = 0; e <= 5; ++e) {
        const nim::State s{{a, b, e}};
        if (s.terminal()) continue;
        const bool win = oracle.wins(s);
        if (win != (nim::nim_sum(s) != 0)) equivalence = false;
        if (!win) continue;
        ++winning;
        if (oracle.optimal(s, nim::guru_move(s))) ++preserved;
      }
  c.expect(equivalence, "win-iff-nonzero-nim-sum violated");
  c.expect(preserved == winning, "guru dropped the win in " +
                                     std::to_string(winning - preserved) + " states");
  c.expect(std::chrono::duration<double>(Clock::now() - c.started).count() < 10.0,
           "runtime over 10 s");
}

void criterion_3() {
  Criterion c(3, "guru-vs-guru first-seat rate over 10,000 games");
  const double expected = enumerated_nonzero_start_fraction();
  c.note("enumerated nonzero-start fraction: " + std::to_string(expected));
  c.expect(std::abs(expected - 0.95) < 0.03, "enumerated value far from 'roughly 95%'");

  const auto guru = arena::guru_agent();
  const auto outcome = arena::play_nim_match(guru, guru, 10000, 12345);
  const double first_rate =
      static_cast<double>(outcome.wins_a_as_first + outcome.wins_b_as_first) / outcome.games;
  c.note("measured first-seat rate: " + std::to_string(first_rate));
  c.expect(std::abs(first_rate - expected) <= 0.02, "first-seat rate off by more than 0.02");
  c.expect(std::chrono::duration<double>(Clock::now() - c.started).count() < 10.0,
           "runtime over 10 s");
}

void criterion_4() {
  Criterion c(4, "Q-learner parity after 300k episodes + small-board optimality");
  const auto& table = q_table_300k();
  auto q_fn = [&table](const nim::State& s, Rng&) { return table.greedy_move(s); };
  arena::NimAgent q_agent{"qlearner", 'Q', q_fn, false, nullptr};

  const auto q_outcome = arena::play_nim_match(q_agent, arena::random_agent(), 2000, 777);
  const auto g_outcome =
      arena::play_nim_match(arena::guru_agent(), arena::random_agent(), 2000, 777);
  const double q_rate = static_cast<double>(q_outcome.wins_a) / q_outcome.games;
  const double g_rate = static_cast<double>(g_outcome.wins_a) / g_outcome.games;
  c.note("q win rate " + std::to_string(q_rate) + ", guru " + std::to_string(g_rate));
  c.expect(g_rate - q_rate <= 0.05, "Q more than 5 points behind guru");

  nim::QTable small({.max_pile = 3});
  Rng rng(7);
  small.train(50000, random_fn(), rng);
  testing::NimMinimax oracle(3);
  int winning = 0, optimal = 0;
  for (int a = 0; a <= 3; ++a)
    for (int b = 0; b <= 3; ++b)
      for (int e = 0; e <= 3; ++e) {
        const nim::State s{{a, b, e}};
        if (s.terminal() || !oracle.wins(s)) continue;
        ++winning;
        if (oracle.optimal(s, small.greedy_move(s))) ++optimal;
      }
  const double agreement = static_cast<double>(optimal) / winning;
  c.note("small-board optimal-move agreement: " + std::to_string(agreement));
  c.expect(agreement >= 0.95, "below 95% agreement with minimax");
}

void criterion_5() {
  Criterion c(5, "tokenizer vocabulary and 100% round trip on the 30k corpus");
  const auto t0 = Clock::now();
  const wordpiece::Vocab vocab = wordpiece::train({corpus_30k()}, {.max_vocab = 200});
  c.note("vocab size: " + std::to_string(vocab.size()));
  c.expect(vocab.size() >= 55 && vocab.size() <= 70, "vocab size outside [55, 70]");
  for (int i = 0; i < 5; ++i)
    c.expect(vocab.tokens[i] == wordpiece::kSpecialTokens[i], "special id mismatch");

  std::ifstream in(corpus_30k());
  std::string line;
  int64_t lines = 0, round_trips = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++lines;
    const auto result = wordpiece::detokenize(vocab, wordpiece::tokenize(vocab, line));
    if (!result.lossy && result.text == line) ++round_trips;
  }
  c.note(std::to_string(round_trips) + "/" + std::to_string(lines) + " lines round-trip");
  c.expect(lines > 0 && round_trips == lines, "round-trip identity broken");
  c.expect(std::chrono::duration<double>(Clock::now() - t0).count() < 60.0,
           "runtime over 60 s");
}

void criterion_6() {
  Criterion c(6, "MLM numerics: gradient check, softmax, bit-exact retraining");
  mlm::ModelConfig tiny;
  tiny.layers = 1;
  tiny.heads = 2;
  tiny.hidden = 8;
  tiny.ffn = 16;
  tiny.max_seq = 8;
  tiny.vocab_size = 12;
  const auto report = mlm::gradient_check(tiny, 5);
  c.note("max relative gradient error: " + std::to_string(report.max_rel_error));
  c.expect(report.max_rel_error <= 1e-4, "gradient check above 1e-4");

  const mlm::Params probe = mlm::init_params(tiny, 6);
  const auto ranked = mlm::fill_mask(
      probe, wordpiece::Vocab::from_tokens({"[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]", "a",
                                            "b", "c", "d", "e", "f", "g"}),
      "a b [MASK]");
  double total = 0.0;
  for (const auto& p : ranked) total += p.prob;
  c.expect(std::abs(total - 1.0) <= 1e-6, "softmax sum off by more than 1e-6");

  const std::vector<std::string> lines(32, "a3/b2/c1 G - a1");
  const auto vocab = wordpiece::train_from_lines(lines, {.max_vocab = 64, .min_frequency = 1});
  mlm::ModelConfig small = tiny;
  small.vocab_size = vocab.size();
  small.max_seq = 16;
  mlm::TrainConfig tc;
  tc.steps = 40;
  tc.batch_size = 8;
  tc.seed = 99;
  mlm::Params run1 = mlm::init_params(small, 1);
  mlm::Params run2 = mlm::init_params(small, 1);
  const auto r1 = mlm::train(run1, lines, vocab, tc);
  const auto r2 = mlm::train(run2, lines, vocab, tc);
  c.expect(r1.losses == r2.losses, "loss curves not bit-identical");
  c.expect(run1.token_embedding == run2.token_embedding, "weights not bit-identical");
}

void criterion_7() {
  Criterion c(7, "few-shot sweep: win rate grows with match size, >= 0.85 at 300");
  arena::SweepConfig cfg;
  cfg.match_sizes = {10, 50, 100, 300};
  cfg.eval_games = 1000;
  cfg.recipe = nim_recipe();
  cfg.seed = 4242;
  cfg.work_dir = (work_dir() / "sweep").string();
  const auto points = arena::match_size_sweep(cfg);
  report::write_sweep_outputs(points, (work_dir() / "sweep_out").string());

  std::string curve;
  for (const auto& p : points)
    curve += "m=" + std::to_string(p.match_size) + ":" + std::to_string(p.win_rate) + " ";
  c.note(curve);
  for (std::size_t i = 1; i < points.size(); ++i)
    c.expect(points[i].win_rate >= points[i - 1].win_rate - 0.03,
             "win rate dropped by more than 3 points at m=" +
                 std::to_string(points[i].match_size));
  c.expect(points.back().win_rate >= 0.85, "below 0.85 at match size 300");
  c.expect(std::chrono::duration<double>(Clock::now() - c.started).count() < 3600.0,
           "runtime over 60 min");
}

void criterion_8() {
  Criterion c(8, "noise robustness: G-tag model beats random; W/X shows no edge at p=0.9");
  const fs::path dir = work_dir() / "noise";
  fs::create_directories(dir);
  const auto& q = q_table_300k();

  const auto baseline =
      arena::play_nim_match(arena::random_agent(), arena::random_agent(), 2000, 31337);
  const double baseline_rate = static_cast<double>(baseline.wins_a) / baseline.games;
  c.note("random-vs-random baseline: " + std::to_string(baseline_rate));

  const arena::NimTrainRecipe recipe = nim_recipe();
  for (double p : {0.0, 0.3, 0.9}) {
    corpus::NimGenConfig gen;
    gen.games = 2000;
    gen.noise_p = p;
    gen.seed = 1000 + static_cast<uint64_t>(p * 10);
    const std::string path =
        (dir / ("id_p" + std::to_string(static_cast<int>(p * 10)) + ".txt")).string();
    corpus::gen_nim_corpus(gen, path, &q);
    const auto bundle = arena::train_nim_model(path, recipe, 555 + static_cast<uint64_t>(p * 10));
    const auto model = arena::model_nim_agent(bundle.params, bundle.vocab, 'G');
    const auto outcome = arena::play_nim_match(model, arena::random_agent(), 1000,
                                               777 + static_cast<uint64_t>(p * 10));
    const double rate = static_cast<double>(outcome.wins_a) / outcome.games;
    c.note("G model at p=" + std::to_string(p) + ": " + std::to_string(rate));
    c.expect(rate > baseline_rate,
             "G model does not beat the random baseline at p=" + std::to_string(p));
  }

  corpus::NimGenConfig gen;
  gen.games = 2000;
  gen.noise_p = 0.9;
  gen.variant = corpus::NimTagVariant::win_state;
  gen.seed = 2009;
  const std::string path = (dir / "wx_p9.txt").string();
  corpus::gen_nim_corpus(gen, path, &q);
  const auto bundle = arena::train_nim_model(path, recipe, 565);
  const auto model = arena::model_nim_agent(bundle.params, bundle.vocab, 'W');
  const auto outcome = arena::play_nim_match(model, arena::random_agent(), 1000, 787);
  const double rate = static_cast<double>(outcome.wins_a) / outcome.games;
  c.note("W/X model at p=0.9: " + std::to_string(rate));
  c.expect(rate <= baseline_rate + 0.05, "W/X model shows an advantage at p=0.9");
}

void criterion_9() {
  Criterion c(9, "perft 1..4 and FEN round trip on 10,000 positions");
  const chess::Position initial = chess::Position::initial();
  const uint64_t expected[4] = {20, 400, 8902, 197281};
  for (int d = 1; d <= 4; ++d)
    c.expect(chess::perft(initial, d) == expected[d - 1],
             "perft(" + std::to_string(d) + ") mismatch");

  Rng rng(13);
  int64_t round_trips = 0;
  chess::Position pos = initial;
  int plies = 0;
  while (round_trips < 10000) {
    const auto moves = pos.legal_moves();
    if (moves.empty() || plies >= 200) {
      pos = initial;
      plies = 0;
      continue;
    }
    pos = pos.apply_unchecked(moves[rng.uniform_int(0, static_cast<int64_t>(moves.size()) - 1)]);
    ++plies;
    if (chess::Position::from_fen(pos.fen()) == pos) ++round_trips;
    else { c.expect(false, "FEN round trip failed at " + pos.fen()); break; }
  }
  c.expect(round_trips >= 10000, "fewer than 10,000 verified positions");
  c.expect(std::chrono::duration<double>(Clock::now() - c.started).count() < 60.0,
           "runtime over 60 s");
}

std::string engine_path() {
  if (const char* env = std::getenv("GAMELAB_ENGINE")) return env;
  return GAMELAB_ENGINE_PATH;
}

void criterion_10() {
  Criterion c(10, "chess corpus: 100 engine games at depth 1 in under 5 minutes");
  corpus::ChessGenConfig cfg;
  cfg.games = 100;
  cfg.plies_per_game = 6;
  cfg.seed = 99;
  cfg.engine.path = engine_path();
  cfg.engine.depth = 1;
  const std::string path = (work_dir() / "chess100.txt").string();
  const auto stats = corpus::gen_chess_corpus(cfg, path);
  c.expect(stats.games == 100, "generated " + std::to_string(stats.games) + " games");
  c.expect(std::chrono::duration<double>(Clock::now() - c.started).count() < 300.0,
           "runtime over 5 min");

  std::ifstream in(path);
  std::string line;
  int64_t block_lines = 0;
  bool all_legal = true, block_sizes_ok = true;
  while (std::getline(in, line)) {
    if (line.empty()) {
      block_sizes_ok &= block_lines >= 1 && block_lines <= 6;
      block_lines = 0;
      continue;
    }
    ++block_lines;
    try {
      corpus::decode_chess_record(line);  // grammar + legality
    } catch (const ParseError&) {
      all_legal = false;
    }
  }
  block_sizes_ok &= block_lines <= 6;
  c.expect(all_legal, "a line failed grammar or legality");
  c.expect(block_sizes_ok, "a game has more than 6 records");
}

void criterion_11() {
  Criterion c(11, "chess model: held-out top-1 validity >= 0.5 on plies 1-6");
  const fs::path dir = work_dir() / "chess_model";
  fs::create_directories(dir);

  corpus::ChessGenConfig gen;
  gen.games = 5000;
  gen.plies_per_game = 6;
  gen.seed = 4;
  gen.engine.path = engine_path();
  gen.engine.depth = 1;
  const std::string corpus_path = (dir / "chess5k.txt").string();
  const auto stats = corpus::gen_chess_corpus(gen, corpus_path);
  c.note("corpus: " + std::to_string(stats.length) + " records, " +
         std::to_string(stats.unique_states) + " unique states");

  const wordpiece::Vocab vocab =
      wordpiece::train({corpus_path}, {.max_vocab = 16000, .min_frequency = 2});
  c.note("vocab size: " + std::to_string(vocab.size()));

  auto lines = corpus::read_records(corpus_path);
  Rng split_rng(77);
  for (std::size_t i = lines.size(); i > 1; --i)
    std::swap(lines[i - 1], lines[split_rng.uniform_int(0, static_cast<int64_t>(i) - 1)]);
  const std::size_t test_n = lines.size() / 5;
  const std::vector<std::string> test(lines.begin(), lines.begin() + test_n);
  const std::vector<std::string> train(lines.begin() + test_n, lines.end());

  mlm::ModelConfig mc;
  mc.layers = 4;
  mc.heads = 4;
  mc.hidden = 128;
  mc.ffn = 512;
  mc.max_seq = 64;
  mc.vocab_size = vocab.size();
  mlm::TrainConfig tc;
  tc.epochs = 10;
  tc.lr = 1e-3;
  tc.batch_size = 32;
  tc.seed = 11;
  mlm::Params params = mlm::init_params(mc, 11);
  mlm::train(params, train, vocab, tc);

  int64_t checked = 0, valid = 0;
  for (std::size_t i = 0; i < test.size() && checked < 1000; ++i) {
    const auto record = corpus::decode_chess_record(test[i]);
    const auto ranked =
        mlm::fill_mask(params, vocab, record.position.fen() + " [MOVESEP] [MASK]", 1);
    ++checked;
    try {
      if (record.position.is_legal(chess::parse_move(ranked.front().token))) ++valid;
    } catch (const ParseError&) {
    }
  }
  const double rate = static_cast<double>(valid) / static_cast<double>(checked);
  c.note("held-out top-1 validity: " + std::to_string(rate) + " over " +
         std::to_string(checked) + " positions");
  c.expect(rate >= 0.5, "validity below 0.5");

  // Evaluation outputs in the Fig 11/12 shapes.
  arena::ChessEvalConfig ec;
  ec.engine.path = engine_path();
  ec.engine.depth = 1;
  ec.games = 10;
  ec.seed = 12;
  const auto result = arena::play_chess_vs_engine(params, vocab, ec);
  const std::string out = (dir / "eval").string();
  report::write_chess_eval_outputs(result, out);
  for (const char* file : {"chess_validity.csv", "chess_validity.svg", "chess_lengths.csv",
                           "chess_lengths_hist.csv", "chess_lengths.svg"})
    c.expect(fs::exists(fs::path(out) / file), std::string("missing output ") + file);
  double mean_plies = 0;
  for (int plies : result.game_plies) mean_plies += plies;
  if (!result.game_plies.empty()) mean_plies /= result.game_plies.size();
  c.note("mean survival: " + std::to_string(mean_plies) + " plies over " +
         std::to_string(result.game_plies.size()) + " games");
}

void criterion_12() {
  Criterion c(12, "dataset metrics: unique moves = 30, mean line length 15.09 +- 2");
  const auto stats = corpus::dataset_stats(corpus_30k());
  c.note("games=" + std::to_string(stats.games) + " unique_moves=" +
         std::to_string(stats.unique_moves) + " avg_len=" + std::to_string(stats.avg_seq_len));
  c.expect(stats.games == 30000, "not a 30,000-game corpus");
  c.expect(stats.unique_moves == 30, "unique moves != 30");
  c.expect(std::abs(stats.avg_seq_len - 15.09) <= 2.0, "average line length outside 15.09 +- 2");
  c.expect(stats.malformed_lines == 0, "malformed lines present");
}

}  // namespace

int main(int argc, char** argv) {
  bool all = true;
  for (int i = 1; i < argc; ++i) {
    if (std::strncmp(argv[i], "--only=", 7) == 0) {
      all = false;
      const int id = std::atoi(argv[i] + 7);
      if (id >= 1 && id <= 12) g_selected[id] = true;
    }
  }
  if (all)
    for (int i = 1; i <= 12; ++i) g_selected[i] = true;

  if (g_selected[1]) criterion_1();
  if (g_selected[2]) criterion_2();
  if (g_selected[3]) criterion_3();
  if (g_selected[4]) criterion_4();
  if (g_selected[5]) criterion_5();
  if (g_selected[6]) criterion_6();
  if (g_selected[7]) criterion_7();
  if (g_selected[8]) criterion_8();
  if (g_selected[9]) criterion_9();
  if (g_selected[10]) criterion_10();
  if (g_selected[11]) criterion_11();
  if (g_selected[12]) criterion_12();

  if (g_failures > 0) {
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
