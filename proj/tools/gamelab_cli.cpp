// gamelab command line: corpus generation, tokenizer/model training, and the
// evaluation experiments, all through the C API in gamelab.h.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gamelab.h"

namespace {

int fail(gml_status status) {
  std::cerr << "error (" << gml_status_name(status) << "): " << gml_last_error() << "\n";
  return 2;
}

struct EngineArgs {
  std::string path;
  int threads = 1;
  int multipv = 1;
  int depth = 1;
  int elo = 3900;  // above any engine maximum -> runs at full strength
  int64_t movetime_ms = 0;
  int handshake_timeout_ms = 10000;
  int move_timeout_ms = 120000;

  gml_engine_config to_config() const {
    gml_engine_config c{};
    c.path = path.c_str();
    c.threads = threads;
    c.multipv = multipv;
    c.depth = depth;
    c.elo = elo;
    c.movetime_ms = movetime_ms;
    c.handshake_timeout_ms = handshake_timeout_ms;
    c.move_timeout_ms = move_timeout_ms;
    return c;
  }
};

void add_engine_flags(CLI::App* cmd, EngineArgs& args) {
  cmd->add_option("--engine", args.path, "UCI engine executable")
      ->envname("GAMELAB_ENGINE")
      ->required();
  cmd->add_option("--threads", args.threads, "engine Threads option")->capture_default_str();
  cmd->add_option("--multipv", args.multipv, "engine MultiPV option")->capture_default_str();
  cmd->add_option("--depth", args.depth, "engine search depth")->capture_default_str();
  cmd->add_option("--elo", args.elo, "target engine rating; 0 disables limiting")
      ->capture_default_str();
  cmd->add_option("--movetime", args.movetime_ms, "per-move time limit in ms (overrides depth)");
  cmd->add_option("--handshake-timeout", args.handshake_timeout_ms, "handshake timeout in ms")
      ->capture_default_str();
  cmd->add_option("--move-timeout", args.move_timeout_ms, "bestmove timeout in ms")
      ->capture_default_str();
}

struct ModelArgs {
  int layers = 4;
  int heads = 4;
  int hidden = 128;
  int ffn = 512;
  int max_seq = 0;  // 0 -> per-command default (32 nim / 128 chess)
  double dropout = 0.0;

  gml_model_config to_config() const {
    gml_model_config c{};
    c.layers = layers;
    c.heads = heads;
    c.hidden = hidden;
    c.ffn = ffn;
    c.max_seq = max_seq;
    c.dropout = dropout;
    return c;
  }
};

void add_model_flags(CLI::App* cmd, ModelArgs& args, int default_max_seq) {
  args.max_seq = default_max_seq;
  cmd->add_option("--layers", args.layers, "encoder layers")->capture_default_str();
  cmd->add_option("--heads", args.heads, "attention heads")->capture_default_str();
  cmd->add_option("--hidden", args.hidden, "hidden width")->capture_default_str();
  cmd->add_option("--ffn", args.ffn, "feed-forward width")->capture_default_str();
  cmd->add_option("--max-seq", args.max_seq, "max sequence length in tokens")
      ->capture_default_str();
  cmd->add_option("--dropout", args.dropout, "dropout rate")->capture_default_str();
}

struct TrainArgs {
  double mask_p = 0.15;
  int batch = 32;
  int epochs = 10;
  int64_t steps = 0;
  double lr = 5e-4;
  double warmup = 0.1;
  uint64_t seed = 0;

  gml_train_options to_config() const {
    gml_train_options c{};
    c.mask_p = mask_p;
    c.batch_size = batch;
    c.epochs = epochs;
    c.steps = steps;
    c.lr = lr;
    c.warmup_frac = warmup;
    c.seed = seed;
    return c;
  }
};

void add_train_flags(CLI::App* cmd, TrainArgs& args) {
  cmd->add_option("--mask-p", args.mask_p, "MLM mask probability")->capture_default_str();
  cmd->add_option("--batch", args.batch, "batch size")->capture_default_str();
  cmd->add_option("--epochs", args.epochs, "training epochs")->capture_default_str();
  cmd->add_option("--steps", args.steps, "exact optimizer steps (overrides epochs)");
  cmd->add_option("--lr", args.lr, "peak learning rate")->capture_default_str();
  cmd->add_option("--warmup", args.warmup, "warmup fraction of total steps")
      ->capture_default_str();
  cmd->add_option("--seed", args.seed, "training seed")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gamelab: board-game language-model laboratory"};
  app.set_config("--config", "", "key-value config file; flags override file values");
  app.require_subcommand(1);
  int rc = 0;

  // --- nim-gen ---------------------------------------------------------------
  auto* nim_gen = app.add_subcommand("nim-gen", "generate a Nim text corpus");
  struct {
    int64_t games = 30000;
    std::string variant = "player-id";
    double noise = 0.0;
    uint64_t seed = 0;
    bool shuffle_labels = true;
    bool randomized_starts = true;
    std::string schedule = "GR,GQ,QR";
    int64_t q_episodes = 300000;
    int max_pile = 10;
    std::string out, stats;
  } ng;
  nim_gen->add_option("--games", ng.games, "games to play")->capture_default_str();
  nim_gen->add_option("--variant", ng.variant, "tag variant: player-id or win-state")
      ->check(CLI::IsMember({"player-id", "win-state"}))
      ->capture_default_str();
  nim_gen->add_option("--noise", ng.noise, "random-substitution probability per move")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  nim_gen->add_option("--seed", ng.seed, "master seed")->capture_default_str();
  nim_gen->add_flag("--shuffle-labels,!--no-shuffle-labels", ng.shuffle_labels,
                    "per-record random pile relabeling")
      ->capture_default_str();
  nim_gen->add_flag("--randomized-starts,!--fixed-starts", ng.randomized_starts,
                    "uniform starts in [1,max]^3 instead of [max,max,max]")
      ->capture_default_str();
  nim_gen->add_option("--schedule", ng.schedule, "agent pairings, e.g. GR,GQ,QR")
      ->capture_default_str();
  nim_gen->add_option("--q-episodes", ng.q_episodes, "Q-learner pre-training games")
      ->capture_default_str();
  nim_gen->add_option("--max-pile", ng.max_pile, "items per pile at the start cap")
      ->capture_default_str();
  nim_gen->add_option("--out", ng.out, "corpus output path")->required();
  nim_gen->add_option("--stats", ng.stats, "stats JSON path (default <out>.stats.json)");
  nim_gen->callback([&] {
    gml_nim_gen_config c{};
    c.games = ng.games;
    c.win_state_tags = ng.variant == "win-state" ? 1 : 0;
    c.noise = ng.noise;
    c.seed = ng.seed;
    c.randomized_starts = ng.randomized_starts ? 0 : -1;
    c.shuffle_labels = ng.shuffle_labels ? 0 : -1;
    c.schedule = ng.schedule.c_str();
    c.q_episodes = ng.q_episodes;
    c.max_pile = ng.max_pile;
    const std::string stats = ng.stats.empty() ? ng.out + ".stats.json" : ng.stats;
    if (const gml_status s = gml_nim_generate(&c, ng.out.c_str(), stats.c_str()); s != GML_OK)
      rc = fail(s);
    else
      std::cout << "wrote " << ng.out << " and " << stats << "\n";
  });

  // --- chess-gen -------------------------------------------------------------
  auto* chess_gen = app.add_subcommand("chess-gen", "generate a chess corpus by engine self-play");
  struct {
    EngineArgs engine;
    int64_t games = 30000;
    int plies = 6;
    int ply_limit = 200;
    uint64_t seed = 0;
    std::string out, stats;
  } cg;
  add_engine_flags(chess_gen, cg.engine);
  chess_gen->add_option("--games", cg.games, "games to play")->capture_default_str();
  chess_gen->add_option("--plies", cg.plies, "recorded plies per game")->capture_default_str();
  chess_gen->add_option("--ply-limit", cg.ply_limit, "abort threshold in plies")
      ->capture_default_str();
  chess_gen->add_option("--seed", cg.seed, "master seed")->capture_default_str();
  chess_gen->add_option("--out", cg.out, "corpus output path")->required();
  chess_gen->add_option("--stats", cg.stats, "stats JSON path (default <out>.stats.json)");
  chess_gen->callback([&] {
    gml_chess_gen_config c{};
    c.engine = cg.engine.to_config();
    c.games = cg.games;
    c.plies_per_game = cg.plies;
    c.ply_limit = cg.ply_limit;
    c.seed = cg.seed;
    const std::string stats = cg.stats.empty() ? cg.out + ".stats.json" : cg.stats;
    if (const gml_status s = gml_chess_generate(&c, cg.out.c_str(), stats.c_str()); s != GML_OK)
      rc = fail(s);
    else
      std::cout << "wrote " << cg.out << " and " << stats << "\n";
  });

  // --- tok-train ---------------------------------------------------------------
  auto* tok = app.add_subcommand("tok-train", "train a WordPiece vocabulary");
  struct {
    std::vector<std::string> corpus;
    int max_vocab = 200;
    int min_freq = 2;
    std::string out;
  } tk;
  tok->add_option("--corpus", tk.corpus, "corpus file(s)")->required()->expected(-1);
  tok->add_option("--max-vocab", tk.max_vocab, "vocabulary cap")->capture_default_str();
  tok->add_option("--min-freq", tk.min_freq, "minimum merge frequency")->capture_default_str();
  tok->add_option("--out", tk.out, "vocab JSON output")->required();
  tok->callback([&] {
    std::vector<const char*> paths;
    for (const auto& p : tk.corpus) paths.push_back(p.c_str());
    gml_tok_train_config c{};
    c.corpus_paths = paths.data();
    c.corpus_count = paths.size();
    c.max_vocab = tk.max_vocab;
    c.min_frequency = tk.min_freq;
    if (const gml_status s = gml_tok_train(&c, tk.out.c_str()); s != GML_OK)
      rc = fail(s);
    else
      std::cout << "wrote " << tk.out << "\n";
  });

  // --- mlm-train -----------------------------------------------------------------
  auto* mlm = app.add_subcommand("mlm-train", "pretrain the masked language model");
  struct {
    std::string corpus, vocab, out, loss_csv;
    ModelArgs model;
    TrainArgs train;
    double test_fraction = 0.2;
  } mt;
  mlm->add_option("--corpus", mt.corpus, "training corpus")->required();
  mlm->add_option("--vocab", mt.vocab, "trained vocab JSON")->required();
  add_model_flags(mlm, mt.model, 32);
  add_train_flags(mlm, mt.train);
  mlm->add_option("--test-fraction", mt.test_fraction, "held-out fraction")
      ->capture_default_str();
  mlm->add_option("--out", mt.out, "checkpoint output path")->required();
  mlm->add_option("--loss-csv", mt.loss_csv, "loss curve CSV (default <out>.loss.csv)");
  mlm->callback([&] {
    gml_mlm_train_config c{};
    c.corpus_path = mt.corpus.c_str();
    c.vocab_path = mt.vocab.c_str();
    c.model = mt.model.to_config();
    c.train = mt.train.to_config();
    c.test_fraction = mt.test_fraction;
    const std::string loss = mt.loss_csv.empty() ? mt.out + ".loss.csv" : mt.loss_csv;
    if (const gml_status s = gml_mlm_train(&c, mt.out.c_str(), loss.c_str()); s != GML_OK)
      rc = fail(s);
    else
      std::cout << "wrote " << mt.out << " and " << loss << "\n";
  });

  // --- nim-arena --------------------------------------------------------------------
  auto* arena = app.add_subcommand("nim-arena", "noise-partition tournament of agents + models");
  struct {
    std::vector<double> noise = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    int64_t games = 1000;
    int64_t corpus_games = 2000;
    int64_t q_episodes = 300000;
    std::string tags = "GQR";
    bool win_state = true;
    bool base_pairings = true;
    ModelArgs model;
    TrainArgs train;
    int tok_max_vocab = 200;
    int tok_min_freq = 2;
    double test_fraction = 0.2;
    std::string out_dir;
  } na;
  arena->add_option("--noise-levels", na.noise, "noise levels to evaluate")
      ->delimiter(',')
      ->capture_default_str();
  arena->add_option("--games", na.games, "games per pairing")->capture_default_str();
  arena->add_option("--corpus-games", na.corpus_games, "training games per corpus")
      ->capture_default_str();
  arena->add_option("--q-episodes", na.q_episodes, "Q-learner training games")
      ->capture_default_str();
  arena->add_option("--tags", na.tags, "player-id tags the model plays under")
      ->capture_default_str();
  arena->add_flag("--win-state,!--no-win-state", na.win_state, "also train the W/X model")
      ->capture_default_str();
  arena->add_flag("--base-pairings,!--no-base-pairings", na.base_pairings,
                  "include agent-vs-agent baselines")
      ->capture_default_str();
  add_model_flags(arena, na.model, 32);
  add_train_flags(arena, na.train);
  arena->add_option("--tok-max-vocab", na.tok_max_vocab, "tokenizer cap")->capture_default_str();
  arena->add_option("--tok-min-freq", na.tok_min_freq, "tokenizer merge threshold")
      ->capture_default_str();
  arena->add_option("--test-fraction", na.test_fraction, "held-out fraction when training")
      ->capture_default_str();
  arena->add_option("--out-dir", na.out_dir, "output directory")->required();
  arena->callback([&] {
    gml_nim_arena_config c{};
    c.noise_levels = na.noise.data();
    c.noise_level_count = na.noise.size();
    c.games_per_pairing = na.games;
    c.corpus_games = na.corpus_games;
    c.q_episodes = na.q_episodes;
    c.id_model_tags = na.tags.c_str();
    c.include_win_state = na.win_state ? 0 : -1;
    c.include_base_pairings = na.base_pairings ? 0 : -1;
    c.model = na.model.to_config();
    c.train = na.train.to_config();
    c.tok_max_vocab = na.tok_max_vocab;
    c.tok_min_frequency = na.tok_min_freq;
    c.test_fraction = na.test_fraction;
    c.seed = na.train.seed;
    if (const gml_status s = gml_nim_arena(&c, na.out_dir.c_str()); s != GML_OK)
      rc = fail(s);
    else
      std::cout << "tournament outputs in " << na.out_dir << "\n";
  });

  // --- nim-sweep ---------------------------------------------------------------------
  auto* sweep = app.add_subcommand("nim-sweep", "few-shot match-size sweep");
  struct {
    std::vector<int> sizes = {10, 50, 100, 300};
    int64_t eval_games = 1000;
    ModelArgs model;
    TrainArgs train;
    int tok_max_vocab = 200;
    int tok_min_freq = 2;
    double test_fraction = 0.2;
    std::string out_dir;
  } sw;
  sweep->add_option("--match-sizes", sw.sizes, "match sizes (games per seat order)")
      ->delimiter(',')
      ->capture_default_str();
  sweep->add_option("--eval-games", sw.eval_games, "evaluation games vs random")
      ->capture_default_str();
  add_model_flags(sweep, sw.model, 32);
  add_train_flags(sweep, sw.train);
  sweep->add_option("--tok-max-vocab", sw.tok_max_vocab, "tokenizer cap")->capture_default_str();
  sweep->add_option("--tok-min-freq", sw.tok_min_freq, "tokenizer merge threshold")
      ->capture_default_str();
  sweep->add_option("--test-fraction", sw.test_fraction, "held-out fraction when training")
      ->capture_default_str();
  sweep->add_option("--out-dir", sw.out_dir, "output directory")->required();
  sweep->callback([&] {
    std::vector<int32_t> sizes(sw.sizes.begin(), sw.sizes.end());
    gml_nim_sweep_config c{};
    c.match_sizes = sizes.data();
    c.match_size_count = sizes.size();
    c.eval_games = sw.eval_games;
    c.model = sw.model.to_config();
    c.train = sw.train.to_config();
    c.tok_max_vocab = sw.tok_max_vocab;
    c.tok_min_frequency = sw.tok_min_freq;
    c.test_fraction = sw.test_fraction;
    c.seed = sw.train.seed;
    if (const gml_status s = gml_nim_sweep(&c, sw.out_dir.c_str()); s != GML_OK)
      rc = fail(s);
    else
      std::cout << "sweep outputs in " << sw.out_dir << "\n";
  });

  // --- chess-eval -----------------------------------------------------------------------
  auto* ce = app.add_subcommand("chess-eval", "play the chess model against an engine");
  struct {
    EngineArgs engine;
    std::string checkpoint, vocab, out_dir;
    int64_t games = 20;
    int ply_limit = 200;
    bool black = false;
    uint64_t seed = 0;
  } cv;
  add_engine_flags(ce, cv.engine);
  ce->add_option("--model", cv.checkpoint, "model checkpoint")->required();
  ce->add_option("--vocab", cv.vocab, "vocab JSON")->required();
  ce->add_option("--games", cv.games, "games to play")->capture_default_str();
  ce->add_option("--ply-limit", cv.ply_limit, "abort threshold in plies")->capture_default_str();
  ce->add_flag("--black", cv.black, "model plays black (default white)");
  ce->add_option("--seed", cv.seed, "master seed")->capture_default_str();
  ce->add_option("--out-dir", cv.out_dir, "output directory")->required();
  ce->callback([&] {
    gml_chess_eval_config c{};
    c.engine = cv.engine.to_config();
    c.checkpoint_path = cv.checkpoint.c_str();
    c.vocab_path = cv.vocab.c_str();
    c.games = cv.games;
    c.ply_limit = cv.ply_limit;
    c.model_plays_black = cv.black ? 1 : 0;
    c.seed = cv.seed;
    if (const gml_status s = gml_chess_eval(&c, cv.out_dir.c_str()); s != GML_OK)
      rc = fail(s);
    else
      std::cout << "evaluation outputs in " << cv.out_dir << "\n";
  });

  // --- stats -----------------------------------------------------------------------------
  auto* stats = app.add_subcommand("stats", "dataset metrics for a corpus file");
  struct {
    std::string corpus, out;
  } st;
  stats->add_option("--corpus", st.corpus, "corpus file")->required();
  stats->add_option("--out", st.out, "stats JSON path (default <corpus>.stats.json)");
  stats->callback([&] {
    const std::string out = st.out.empty() ? st.corpus + ".stats.json" : st.out;
    std::vector<char> buffer(4096);
    if (const gml_status s =
            gml_dataset_stats(st.corpus.c_str(), out.c_str(), buffer.data(), buffer.size());
        s != GML_OK)
      rc = fail(s);
    else
      std::cout << buffer.data() << "\n";
  });

  // --- report ----------------------------------------------------------------------------
  auto* rep = app.add_subcommand("report", "re-render CSV/SVG outputs from a report JSON");
  struct {
    std::string report, out_dir;
  } rp;
  rep->add_option("--report", rp.report, "*.report.json produced by an experiment")->required();
  rep->add_option("--out-dir", rp.out_dir, "output directory")->required();
  rep->callback([&] {
    if (const gml_status s = gml_report(rp.report.c_str(), rp.out_dir.c_str()); s != GML_OK)
      rc = fail(s);
    else
      std::cout << "report outputs in " << rp.out_dir << "\n";
  });

  // --- split ----------------------------------------------------------------------------
  auto* split = app.add_subcommand("split", "record-level train/test split of a corpus");
  struct {
    std::string corpus, train_out, test_out;
    double fraction = 0.2;
    uint64_t seed = 0;
  } sp;
  split->add_option("--corpus", sp.corpus, "corpus file")->required();
  split->add_option("--test-fraction", sp.fraction, "test fraction")->capture_default_str();
  split->add_option("--seed", sp.seed, "shuffle seed")->capture_default_str();
  split->add_option("--train-out", sp.train_out, "train output")->required();
  split->add_option("--test-out", sp.test_out, "test output")->required();
  split->callback([&] {
    if (const gml_status s = gml_split_corpus(sp.corpus.c_str(), sp.fraction, sp.seed,
                                              sp.train_out.c_str(), sp.test_out.c_str());
        s != GML_OK)
      rc = fail(s);
    else
      std::cout << "wrote " << sp.train_out << " and " << sp.test_out << "\n";
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    std::cerr << app.help() << "\n";
    return 1;
  }
  return rc;
}
