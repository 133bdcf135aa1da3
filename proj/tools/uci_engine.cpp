// Small UCI engine used as the default self-play opponent and data oracle.
// Depth-limited alpha-beta over a material + centralization evaluation, with
// seeded tie-breaking among near-equal root moves so self-play games vary.
// Strength limiting (UCI_LimitStrength / UCI_Elo) widens the tie margin and
// mixes in random moves.

#include <algorithm>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "gamelab/chess.hpp"
#include "gamelab/errors.hpp"
#include "gamelab/rng.hpp"

namespace {

using namespace gamelab;

constexpr int kEloMin = 1320;
constexpr int kEloMax = 2850;
constexpr int kMateScore = 100000;
constexpr int kMaxDepth = 5;  // requests beyond this are clamped to keep replies fast

int piece_value(chess::PieceType t) {
  switch (t) {
    case chess::PieceType::pawn: return 100;
    case chess::PieceType::knight: return 300;
    case chess::PieceType::bishop: return 310;
    case chess::PieceType::rook: return 500;
    case chess::PieceType::queen: return 900;
    default: return 0;
  }
}

int evaluate(const chess::Position& pos) {
  int score = 0;
  for (chess::Square sq = 0; sq < 64; ++sq) {
    const chess::Piece& p = pos.piece_at(sq);
    if (p.type == chess::PieceType::none) continue;
    int v = piece_value(p.type);
    if (p.type != chess::PieceType::king) {
      const int df = std::min(chess::file_of(sq), 7 - chess::file_of(sq));
      const int dr = std::min(chess::rank_of(sq), 7 - chess::rank_of(sq));
      v += (df + dr) * 3;  // mild pull toward the middle
    }
    score += p.color == pos.side_to_move() ? v : -v;
  }
  return score;
}

int negamax(const chess::Position& pos, int depth, int alpha, int beta, int ply) {
  const auto moves = pos.legal_moves();
  if (moves.empty())
    return pos.in_check(pos.side_to_move()) ? -(kMateScore - ply) : 0;
  if (pos.halfmove_clock() >= 100 || pos.insufficient_material()) return 0;
  if (depth <= 0) return evaluate(pos);
  int best = -kMateScore * 2;
  for (const chess::Move& m : moves) {
    const int score = -negamax(pos.apply_unchecked(m), depth - 1, -beta, -alpha, ply + 1);
    best = std::max(best, score);
    alpha = std::max(alpha, score);
    if (alpha >= beta) break;
  }
  return best;
}

struct Engine {
  chess::Position pos = chess::Position::initial();
  uint64_t seed_option = 0;
  uint64_t game_counter = 0;
  uint64_t move_counter = 0;
  bool limit_strength = false;
  int elo = kEloMax;

  void new_game() {
    ++game_counter;
    move_counter = 0;
  }

  std::string search(int depth) {
    depth = std::clamp(depth, 1, kMaxDepth);
    const auto moves = pos.legal_moves();
    if (moves.empty()) return "(none)";

    Rng rng(Rng::derive(Rng::derive(seed_option, game_counter), ++move_counter));

    if (limit_strength) {
      const double weakness =
          static_cast<double>(kEloMax - std::clamp(elo, kEloMin, kEloMax)) / (kEloMax - kEloMin);
      if (rng.uniform_real() < weakness * 0.6)
        return chess::format_move(moves[rng.uniform_int(0, static_cast<int64_t>(moves.size()) - 1)]);
    }

    std::vector<std::pair<int, chess::Move>> scored;
    scored.reserve(moves.size());
    for (const chess::Move& m : moves)
      scored.emplace_back(-negamax(pos.apply_unchecked(m), depth - 1, -kMateScore * 2,
                                   kMateScore * 2, 1),
                          m);
    const int best = std::max_element(scored.begin(), scored.end(), [](auto& a, auto& b) {
                       return a.first < b.first;
                     })->first;
    int margin = 25;
    if (limit_strength)
      margin += (kEloMax - std::clamp(elo, kEloMin, kEloMax)) / 5;
    std::vector<chess::Move> candidates;
    for (const auto& [score, m] : scored)
      if (score >= best - margin) candidates.push_back(m);
    return chess::format_move(
        candidates[rng.uniform_int(0, static_cast<int64_t>(candidates.size()) - 1)]);
  }
};

std::vector<std::string> tokens_of(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  std::string t;
  while (in >> t) out.push_back(t);
  return out;
}

void handle_position(Engine& engine, const std::vector<std::string>& parts) {
  std::size_t i = 1;
  if (i < parts.size() && parts[i] == "startpos") {
    engine.pos = chess::Position::initial();
    ++i;
  } else if (i < parts.size() && parts[i] == "fen") {
    std::string fen;
    ++i;
    while (i < parts.size() && parts[i] != "moves") {
      if (!fen.empty()) fen += ' ';
      fen += parts[i++];
    }
    engine.pos = chess::Position::from_fen(fen);
  }
  if (i < parts.size() && parts[i] == "moves") {
    ++i;
    for (; i < parts.size(); ++i)
      engine.pos = engine.pos.apply(chess::parse_move(parts[i]));
  }
}

}  // namespace

int main() {
  std::ios::sync_with_stdio(false);
  Engine engine;
  std::string line;
  while (std::getline(std::cin, line)) {
    const auto parts = tokens_of(line);
    if (parts.empty()) continue;
    const std::string& cmd = parts[0];
    try {
      if (cmd == "uci") {
        std::cout << "id name gamelab-engine 0.1\n"
                  << "id author gamelab\n"
                  << "option name Threads type spin default 1 min 1 max 32\n"
                  << "option name MultiPV type spin default 1 min 1 max 8\n"
                  << "option name Hash type spin default 16 min 1 max 1024\n"
                  << "option name UCI_LimitStrength type check default false\n"
                  << "option name UCI_Elo type spin default " << kEloMax << " min " << kEloMin
                  << " max " << kEloMax << "\n"
                  << "option name Seed type spin default 0 min 0 max 2147483647\n"
                  << "uciok" << std::endl;
      } else if (cmd == "isready") {
        std::cout << "readyok" << std::endl;
      } else if (cmd == "setoption" && parts.size() >= 5 && parts[1] == "name") {
        const std::string& name = parts[2];
        const std::string& value = parts[4];
        if (name == "Seed") engine.seed_option = std::strtoull(value.c_str(), nullptr, 10);
        else if (name == "UCI_Elo") engine.elo = std::atoi(value.c_str());
        else if (name == "UCI_LimitStrength") engine.limit_strength = value == "true";
        // Threads/MultiPV/Hash are accepted and ignored.
      } else if (cmd == "ucinewgame") {
        engine.new_game();
      } else if (cmd == "position") {
        handle_position(engine, parts);
      } else if (cmd == "go") {
        int depth = 2;
        for (std::size_t i = 1; i + 1 < parts.size(); ++i) {
          if (parts[i] == "depth") depth = std::atoi(parts[i + 1].c_str());
          if (parts[i] == "movetime") depth = 2;
        }
        std::cout << "bestmove " << engine.search(depth) << std::endl;
      } else if (cmd == "stop") {
        // searches are synchronous; nothing to interrupt
      } else if (cmd == "quit") {
        break;
      }
    } catch (const std::exception& e) {
      std::cout << "info string error: " << e.what() << std::endl;
    }
  }
  return 0;
}
