#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gamelab/chess.hpp"
#include "gamelab/nim.hpp"
#include "gamelab/uci.hpp"

namespace gamelab::corpus {

enum class NimTagVariant { player_id, win_state };

struct CorpusStats {
  int64_t games = 0;
  int64_t unique_states = 0;
  int64_t unique_moves = 0;
  int64_t length = 0;        // record lines
  double avg_seq_len = 0.0;  // characters per record line
  int64_t bytes = 0;
  int64_t malformed_lines = 0;  // reported, not part of the six stat fields
  int64_t noisy_moves = 0;      // bookkeeping for generation runs

  std::string to_json() const;  // the six dataset metrics, snake_case
};

// --- record grammars -------------------------------------------------------

std::string encode_nim_state(const nim::State& s);
std::string encode_nim_move(const nim::Move& m);
nim::Move decode_nim_move(std::string_view text);  // throws ParseError

// `a<n>/b<n>/c<n> <TAG> - <move>`
std::string encode_nim_record(const nim::State& s, char tag, const nim::Move& m);
struct NimRecord {
  nim::State state;
  char tag;
  nim::Move move;
};
NimRecord decode_nim_record(std::string_view line);  // throws ParseError

// `<FEN> [MOVESEP] <move>`
std::string encode_chess_record(const chess::Position& pos, const chess::Move& m);
struct ChessRecord {
  chess::Position position;
  chess::Move move;
};
ChessRecord decode_chess_record(std::string_view line);  // throws ParseError

// --- generation ------------------------------------------------------------

struct NimGenConfig {
  int64_t games = 30000;
  NimTagVariant variant = NimTagVariant::player_id;
  double noise_p = 0.0;
  uint64_t seed = 0;
  bool randomized_starts = true;
  bool shuffle_labels = true;  // per-record random relabeling of piles a/b/c
  std::vector<std::pair<char, char>> schedule = {{'G', 'R'}, {'G', 'Q'}, {'Q', 'R'}};
  int64_t q_episodes = 300000;  // Q agent pre-training when the schedule uses Q
  int max_pile = nim::kDefaultMaxPile;
};

// Plays the schedule round-robin with both seat orders equally, one record per
// move, blank line between games. A pre-trained Q table skips q_episodes.
CorpusStats gen_nim_corpus(const NimGenConfig& config, const std::string& out_path,
                           const nim::QTable* pretrained_q = nullptr);

struct ChessGenConfig {
  int64_t games = 100;
  int plies_per_game = 6;
  int ply_limit = 200;
  uint64_t seed = 0;
  uci::EngineConfig engine;
};

// Engine self-play from the initial position; records (FEN before move, move)
// per ply up to plies_per_game. Engine failures abort the game, not the run.
CorpusStats gen_chess_corpus(const ChessGenConfig& config, const std::string& out_path);

// --- measurement & split ---------------------------------------------------

CorpusStats dataset_stats(const std::string& path);

// Record-level shuffle and split; blank separators are not preserved.
void split_corpus(const std::string& path, double test_fraction, uint64_t seed,
                  const std::string& train_out, const std::string& test_out);

// All record lines of a corpus file, blank lines skipped.
std::vector<std::string> read_records(const std::string& path);

}  // namespace gamelab::corpus
