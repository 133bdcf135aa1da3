#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "gamelab/chess.hpp"
#include "gamelab/corpus.hpp"
#include "gamelab/mlm.hpp"
#include "gamelab/nim.hpp"
#include "gamelab/uci.hpp"
#include "gamelab/wordpiece.hpp"

namespace gamelab::arena {

struct ModelCounters {
  int64_t moves = 0;
  int64_t top1_invalid = 0;     // top-ranked token was not a legal move
  int64_t random_fallback = 0;  // no vocab token decoded to a legal move
};

struct NimAgent {
  std::string name;
  char tag = '?';
  nim::AgentFn move;
  bool is_model = false;
  std::shared_ptr<ModelCounters> counters;
};

NimAgent guru_agent();
NimAgent random_agent();
NimAgent q_agent(std::shared_ptr<const nim::QTable> table);

// Mask-fill agent: queries "<state> <tag> - [MASK]" and plays the highest
// ranked token that decodes to a legal move; top-1 misses are counted, and a
// random legal move covers the (rare) case where no token is legal.
NimAgent model_nim_agent(std::shared_ptr<const mlm::Params> params,
                         std::shared_ptr<const wordpiece::Vocab> vocab, char tag);

struct PairingOutcome {
  std::string agent_a, agent_b;
  int64_t games = 0;
  int64_t wins_a = 0, wins_b = 0;
  int64_t wins_a_as_first = 0, wins_b_as_first = 0;
  int64_t invalid_a = 0, invalid_b = 0;  // model top-1 invalid predictions
};

// games/2 with each agent in the first seat, randomized starts in [1,max]^3.
PairingOutcome play_nim_match(const NimAgent& a, const NimAgent& b, int64_t games,
                              uint64_t seed, int max_pile = nim::kDefaultMaxPile);

struct NimModelBundle {
  std::shared_ptr<const wordpiece::Vocab> vocab;
  std::shared_ptr<const mlm::Params> params;
};

struct NimTrainRecipe {
  wordpiece::TrainConfig tokenizer{.max_vocab = 200, .min_frequency = 2};
  mlm::ModelConfig model{.layers = 4, .heads = 4, .hidden = 128, .ffn = 512, .max_seq = 32};
  mlm::TrainConfig train{};
  double test_fraction = 0.2;  // held out before training, not used for play
};

// Tokenizer + fresh model trained on one corpus file (vocab size filled in).
NimModelBundle train_nim_model(const std::string& corpus_path, const NimTrainRecipe& recipe,
                               uint64_t seed);

struct RosterConfig {
  std::vector<double> noise_levels = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  int64_t games_per_pairing = 1000;
  int64_t corpus_games = 2000;
  int64_t q_episodes = 300000;
  std::vector<char> id_model_tags = {'G', 'Q', 'R'};
  bool include_win_state = true;
  bool include_base_pairings = true;
  NimTrainRecipe recipe;
  int max_pile = nim::kDefaultMaxPile;
  uint64_t seed = 0;
  std::string work_dir;  // corpora and checkpoints are written here
};

struct RosterRow {
  double noise = 0.0;
  std::string agent_a, agent_b;
  int64_t games = 0, wins_a = 0, wins_b = 0;
  int64_t invalid_a = 0, invalid_b = 0;
};

struct RosterResult {
  std::vector<RosterRow> rows;
};

// Per noise level: generate corpora, train the player-id (and optionally the
// win-state) model, then round-robin the agents.
RosterResult roster_tournament(const RosterConfig& config);

struct SweepConfig {
  std::vector<int> match_sizes = {10, 50, 100, 300};
  int64_t eval_games = 1000;
  NimTrainRecipe recipe;
  int max_pile = nim::kDefaultMaxPile;
  bool shuffle_labels = true;
  uint64_t seed = 0;
  std::string work_dir;
};

struct SweepPoint {
  int match_size = 0;
  int64_t games = 0;
  double win_rate = 0.0;  // model (tag G) vs the random agent
  int64_t invalid = 0;
  uint64_t seed = 0;
};

// For each match size m: 2m Guru-vs-random games (m per seat order), fresh
// tokenizer + model, then an evaluation match vs the random agent.
std::vector<SweepPoint> match_size_sweep(const SweepConfig& config);

struct ChessEvalConfig {
  uci::EngineConfig engine;
  int64_t games = 20;
  int ply_limit = 200;
  bool model_plays_white = true;
  uint64_t seed = 0;
};

struct ChessEvalResult {
  std::vector<int> game_plies;
  std::vector<chess::GameStatus> statuses;
  // validity[p] = {valid, total} for model predictions at overall ply p+1.
  std::vector<std::array<int64_t, 2>> validity;
  int64_t model_moves = 0;
  int64_t valid_moves = 0;
};

// Model vs engine; invalid predictions get an engine move substituted and the
// game continues, per-ply validity and game lengths are recorded.
ChessEvalResult play_chess_vs_engine(const mlm::Params& params, const wordpiece::Vocab& vocab,
                                     const ChessEvalConfig& config);

}  // namespace gamelab::arena
