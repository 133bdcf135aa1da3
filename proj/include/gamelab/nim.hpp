#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <unordered_map>
#include <vector>

#include "gamelab/rng.hpp"

namespace gamelab::nim {

inline constexpr int kDefaultMaxPile = 10;

// Three-pile position. Normal play: whoever takes the last item wins.
struct State {
  std::array<int, 3> piles{};

  bool terminal() const { return piles[0] == 0 && piles[1] == 0 && piles[2] == 0; }
  bool valid(int max_pile = kDefaultMaxPile) const {
    for (int p : piles)
      if (p < 0 || p > max_pile) return false;
    return true;
  }
  friend bool operator==(const State&, const State&) = default;
};

// Remove `take` items from pile `pile` (0=a, 1=b, 2=c).
struct Move {
  int pile = 0;
  int take = 0;
  friend bool operator==(const Move&, const Move&) = default;
};

int nim_sum(const State& s);
bool is_legal_move(const State& s, const Move& m);

// Ordered by pile index, then take count; the Q tie-break depends on this.
std::vector<Move> legal_moves(const State& s);

// Throws std::invalid_argument on an illegal move.
State apply_move(const State& s, const Move& m);

// Nim-sum zeroing move when one exists, otherwise one item off the
// lowest-index non-empty pile. Throws std::logic_error on a terminal state.
Move guru_move(const State& s);

// Uniform non-empty pile, then uniform take in [1, count].
Move random_move(const State& s, Rng& rng);

// Each pile independently uniform in [1, max_pile].
State random_start(Rng& rng, int max_pile = kDefaultMaxPile);

using AgentFn = std::function<Move(const State&, Rng&)>;

struct QConfig {
  double alpha = 0.1;
  double gamma = 1.0;   // episodic, undiscounted
  double epsilon = 0.2;
  int max_pile = kDefaultMaxPile;
};

// Tabular action values; entries exist only for visited states, and each
// entry is parallel to legal_moves(state).
class QTable {
 public:
  explicit QTable(QConfig config = {}) : config_(config) {}

  const QConfig& config() const { return config_; }
  double value(const State& s, const Move& m) const;
  std::size_t visited_states() const { return table_.size(); }

  // Argmax legal move, ties by lowest pile index then smallest take.
  Move greedy_move(const State& s) const;

  // Self-contained training games vs `opponent` from randomized starts.
  // Terminal reward +1 / -1, zero otherwise. Seats alternate per episode.
  void train(int64_t episodes, const AgentFn& opponent, Rng& rng);

 private:
  int state_key(const State& s) const;
  QConfig config_;
  std::unordered_map<int, std::vector<double>> table_;
};

inline Move q_move(const QTable& table, const State& s) { return table.greedy_move(s); }

enum class Seat { first = 0, second = 1 };

struct Ply {
  State state;  // position before the move
  char tag;     // scheduled agent's tag, unchanged under noise substitution
  Move move;
  bool noisy;   // true when the move was replaced by a random legal move
};

struct GameRecord {
  State start;
  std::vector<Ply> plies;
  Seat winner = Seat::first;
};

// Alternating play from `start`; before each move the scheduled agent's move
// is replaced, with probability noise_p, by a uniformly random legal move.
GameRecord play_game(const AgentFn& first, char first_tag, const AgentFn& second,
                     char second_tag, const State& start, double noise_p, Rng& rng);

}  // namespace gamelab::nim
