#pragma once

// Brute-force minimax oracle for Nim under normal play. Independent of the
// nim-sum rule on purpose: it only knows "some move leads to a lost position".

#include <vector>

#include "gamelab/nim.hpp"

namespace gamelab::testing {

class NimMinimax {
 public:
  explicit NimMinimax(int max_pile)
      : max_pile_(max_pile),
        memo_((max_pile + 1) * (max_pile + 1) * (max_pile + 1), -1) {}

  // True when the side to move wins with optimal play.
  bool wins(const nim::State& s) {
    if (s.terminal()) return false;  // previous player took the last item
    int8_t& slot = memo_[index(s)];
    if (slot >= 0) return slot != 0;
    bool win = false;
    for (const nim::Move& m : nim::legal_moves(s)) {
      if (!wins(nim::apply_move(s, m))) {
        win = true;
        break;
      }
    }
    slot = win ? 1 : 0;
    return win;
  }

  // True when the move keeps the win (leads to a position lost for the opponent).
  bool optimal(const nim::State& s, const nim::Move& m) {
    return !wins(nim::apply_move(s, m));
  }

 private:
  int index(const nim::State& s) const {
    const int base = max_pile_ + 1;
    return (s.piles[0] * base + s.piles[1]) * base + s.piles[2];
  }
  int max_pile_;
  std::vector<int8_t> memo_;
};

}  // namespace gamelab::testing
