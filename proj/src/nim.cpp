#include "gamelab/nim.hpp"

#include <algorithm>
#include <stdexcept>

namespace gamelab::nim {

int nim_sum(const State& s) { return s.piles[0] ^ s.piles[1] ^ s.piles[2]; }

bool is_legal_move(const State& s, const Move& m) {
  if (m.pile < 0 || m.pile > 2) return false;
  return m.take >= 1 && m.take <= s.piles[m.pile];
}

std::vector<Move> legal_moves(const State& s) {
  std::vector<Move> moves;
  moves.reserve(s.piles[0] + s.piles[1] + s.piles[2]);
  for (int pile = 0; pile < 3; ++pile)
    for (int take = 1; take <= s.piles[pile]; ++take) moves.push_back({pile, take});
  return moves;
}

State apply_move(const State& s, const Move& m) {
  if (!is_legal_move(s, m)) throw std::invalid_argument("illegal nim move");
  State next = s;
  next.piles[m.pile] -= m.take;
  return next;
}

Move guru_move(const State& s) {
  if (s.terminal()) throw std::logic_error("guru_move: terminal state has no move");
  const int sum = nim_sum(s);
  if (sum != 0) {
    for (int pile = 0; pile < 3; ++pile) {
      const int target = s.piles[pile] ^ sum;
      if (target < s.piles[pile]) return {pile, s.piles[pile] - target};
    }
  }
  for (int pile = 0; pile < 3; ++pile)
    if (s.piles[pile] > 0) return {pile, 1};
  throw std::logic_error("guru_move: unreachable");
}

Move random_move(const State& s, Rng& rng) {
  if (s.terminal()) throw std::logic_error("random_move: terminal state has no move");
  std::array<int, 3> nonempty{};
  int n = 0;
  for (int pile = 0; pile < 3; ++pile)
    if (s.piles[pile] > 0) nonempty[n++] = pile;
  const int pile = nonempty[rng.uniform_int(0, n - 1)];
  const int take = static_cast<int>(rng.uniform_int(1, s.piles[pile]));
  return {pile, take};
}

State random_start(Rng& rng, int max_pile) {
  State s;
  for (int pile = 0; pile < 3; ++pile)
    s.piles[pile] = static_cast<int>(rng.uniform_int(1, max_pile));
  return s;
}

int QTable::state_key(const State& s) const {
  const int base = config_.max_pile + 1;
  return (s.piles[0] * base + s.piles[1]) * base + s.piles[2];
}

double QTable::value(const State& s, const Move& m) const {
  auto it = table_.find(state_key(s));
  if (it == table_.end()) return 0.0;
  const auto moves = legal_moves(s);
  for (std::size_t i = 0; i < moves.size(); ++i)
    if (moves[i] == m) return it->second[i];
  return 0.0;
}

Move QTable::greedy_move(const State& s) const {
  if (s.terminal()) throw std::logic_error("greedy_move: terminal state has no move");
  const auto moves = legal_moves(s);
  auto it = table_.find(state_key(s));
  if (it == table_.end()) return moves.front();
  std::size_t best = 0;
  for (std::size_t i = 1; i < moves.size(); ++i)
    if (it->second[i] > it->second[best]) best = i;
  return moves[best];
}

namespace {

double max_value(const std::unordered_map<int, std::vector<double>>& table, int key) {
  auto it = table.find(key);
  if (it == table.end() || it->second.empty()) return 0.0;
  return *std::max_element(it->second.begin(), it->second.end());
}

}  // namespace

void QTable::train(int64_t episodes, const AgentFn& opponent, Rng& rng) {
  for (int64_t episode = 0; episode < episodes; ++episode) {
    State s = random_start(rng, config_.max_pile);
    const bool learner_first = (episode % 2 == 0);
    if (!learner_first) {
      s = apply_move(s, opponent(s, rng));
      if (s.terminal()) continue;  // opponent took everything; nothing to credit
    }
    while (true) {
      const auto moves = legal_moves(s);
      auto& values = table_.try_emplace(state_key(s), moves.size(), 0.0).first->second;

      std::size_t chosen;
      if (rng.bernoulli(config_.epsilon)) {
        chosen = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int64_t>(moves.size()) - 1));
      } else {
        // Argmax with uniform tie-breaking; a fixed-index tie-break would
        // starve most actions of visits while the table is still flat.
        double best = values[0];
        for (double v : values) best = std::max(best, v);
        std::size_t ties = 0;
        for (double v : values)
          if (v == best) ++ties;
        int64_t pick = rng.uniform_int(0, static_cast<int64_t>(ties) - 1);
        chosen = 0;
        for (std::size_t i = 0; i < values.size(); ++i) {
          if (values[i] == best && pick-- == 0) {
            chosen = i;
            break;
          }
        }
      }

      const State after_learner = apply_move(s, moves[chosen]);
      double target;
      State next{};
      if (after_learner.terminal()) {
        target = 1.0;  // learner took the last item
      } else {
        const State after_opponent = apply_move(after_learner, opponent(after_learner, rng));
        if (after_opponent.terminal()) {
          target = -1.0;
        } else {
          target = config_.gamma * max_value(table_, state_key(after_opponent));
          next = after_opponent;
        }
      }
      values[chosen] += config_.alpha * (target - values[chosen]);
      if (next.terminal()) break;  // game over; `next` set only when play continues
      s = next;
    }
  }
}

GameRecord play_game(const AgentFn& first, char first_tag, const AgentFn& second,
                     char second_tag, const State& start, double noise_p, Rng& rng) {
  if (start.terminal()) throw std::invalid_argument("play_game: start state is terminal");
  GameRecord record;
  record.start = start;
  State s = start;
  Seat seat = Seat::first;
  while (!s.terminal()) {
    const AgentFn& agent = (seat == Seat::first) ? first : second;
    const char tag = (seat == Seat::first) ? first_tag : second_tag;
    Move move;
    bool noisy = false;
    if (noise_p > 0.0 && rng.bernoulli(noise_p)) {
      const auto moves = legal_moves(s);
      move = moves[rng.uniform_int(0, static_cast<int64_t>(moves.size()) - 1)];
      noisy = true;
    } else {
      move = agent(s, rng);
    }
    record.plies.push_back({s, tag, move, noisy});
    s = apply_move(s, move);
    if (s.terminal()) record.winner = seat;
    seat = (seat == Seat::first) ? Seat::second : Seat::first;
  }
  return record;
}

}  // namespace gamelab::nim
