#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gamelab::chess {

enum class Color : uint8_t { white = 0, black = 1 };
inline Color opponent(Color c) { return c == Color::white ? Color::black : Color::white; }

enum class PieceType : uint8_t { none = 0, pawn, knight, bishop, rook, queen, king };

struct Piece {
  PieceType type = PieceType::none;
  Color color = Color::white;
  friend bool operator==(const Piece&, const Piece&) = default;
};

// Squares 0..63, a1 = 0, h1 = 7, a8 = 56, h8 = 63.
using Square = int;
inline int file_of(Square sq) { return sq & 7; }
inline int rank_of(Square sq) { return sq >> 3; }
inline Square make_square(int file, int rank) { return rank * 8 + file; }

std::string format_square(Square sq);
Square parse_square(std::string_view text);  // throws ParseError

// Coordinate algebraic move: from + to + optional promotion piece.
struct Move {
  Square from = 0;
  Square to = 0;
  PieceType promotion = PieceType::none;
  friend bool operator==(const Move&, const Move&) = default;
};

Move parse_move(std::string_view text);  // "e2e4" / "e7e8q"; throws ParseError
std::string format_move(const Move& m);

enum CastlingRight : uint8_t {
  kWhiteKingside = 1,
  kWhiteQueenside = 2,
  kBlackKingside = 4,
  kBlackQueenside = 8,
};

enum class GameStatus {
  ongoing,
  checkmate,
  stalemate,
  draw_fifty_move,
  draw_insufficient_material,
  aborted_ply_limit,
};

class Position {
 public:
  static Position initial();
  static Position from_fen(std::string_view fen);  // throws ParseError
  std::string fen() const;

  Color side_to_move() const { return stm_; }
  uint8_t castling_rights() const { return castling_; }
  std::optional<Square> en_passant() const {
    return ep_ >= 0 ? std::optional<Square>(ep_) : std::nullopt;
  }
  int halfmove_clock() const { return halfmove_; }
  int fullmove_number() const { return fullmove_; }
  const Piece& piece_at(Square sq) const { return board_[sq]; }

  std::vector<Move> legal_moves() const;
  bool is_legal(const Move& m) const;
  Position apply(const Move& m) const;  // throws std::invalid_argument when illegal
  bool in_check(Color c) const;
  bool insufficient_material() const;

  friend bool operator==(const Position&, const Position&) = default;

  // Legality already verified by the caller; used by perft and legal_moves.
  Position apply_unchecked(const Move& m) const;

 private:
  Position() = default;
  void pseudo_moves(std::vector<Move>& out) const;
  bool square_attacked(Square sq, Color by) const;
  Square king_square(Color c) const;

  std::array<Piece, 64> board_{};
  Color stm_ = Color::white;
  uint8_t castling_ = 0;
  int8_t ep_ = -1;
  int halfmove_ = 0;
  int fullmove_ = 1;
};

GameStatus game_status(const Position& pos, int ply_count, int ply_limit = 200);

uint64_t perft(const Position& pos, int depth);

}  // namespace gamelab::chess
