#include "gamelab/chess.hpp"

#include <doctest.h>

#include <stdexcept>

#include "gamelab/errors.hpp"
#include "gamelab/rng.hpp"

using namespace gamelab;
using chess::Move;
using chess::Position;

namespace {
constexpr const char* kInitialFen = "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1";
constexpr const char* kFoolsMate =
    "rnb1kbnr/pppp1ppp/8/4p3/6Pq/5P2/PPPPP2P/RNBQKBNR w KQkq - 1 3";
}  // namespace

TEST_CASE("move codec") {
  CHECK(chess::format_move(chess::parse_move("f2f4")) == "f2f4");
  const Move promo = chess::parse_move("e7e8q");
  CHECK(promo.promotion == chess::PieceType::queen);
  CHECK(chess::format_move(promo) == "e7e8q");
  CHECK_THROWS_AS(chess::parse_move("e2"), ParseError);
  CHECK_THROWS_AS(chess::parse_move("e2e2"), ParseError);
  CHECK_THROWS_AS(chess::parse_move("i2i4"), ParseError);
  CHECK_THROWS_AS(chess::parse_move("e7e8x"), ParseError);
  CHECK_THROWS_AS(chess::parse_move("e7e8qq"), ParseError);
}

TEST_CASE("FEN parse and format") {
  const Position initial = Position::from_fen(kInitialFen);
  CHECK(initial.fen() == kInitialFen);
  CHECK(initial.side_to_move() == chess::Color::white);
  int pieces = 0;
  for (int sq = 0; sq < 64; ++sq)
    if (initial.piece_at(sq).type != chess::PieceType::none) ++pieces;
  CHECK(pieces == 32);
  CHECK(Position::initial() == initial);

  CHECK_THROWS_AS(Position::from_fen("xyz"), ParseError);
  CHECK_THROWS_AS(Position::from_fen("8/8/8/8/8/8/8/8 w - - 0 1"), ParseError);  // no kings
  // The seven-rank variant (one empty rank dropped) is not a legal FEN.
  CHECK_THROWS_AS(
      Position::from_fen("rnbqkbnr/pppppppp/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1"),
      ParseError);
  CHECK_THROWS_AS(Position::from_fen("rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0"),
                  ParseError);
  CHECK_THROWS_AS(
      Position::from_fen("rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq e3 0 1"),
      ParseError);  // en-passant square inconsistent with side to move
  CHECK_THROWS_AS(
      Position::from_fen("rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq e4 0 1"),
      ParseError);  // en-passant rank must be 3 or 6
  CHECK_THROWS_AS(Position::from_fen("rnbqkbnr/ppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1"),
                  ParseError);  // short rank
}

TEST_CASE("initial position has twenty moves") {
  CHECK(Position::initial().legal_moves().size() == 20);
}

TEST_CASE("perft: initial position") {
  const Position p = Position::initial();
  CHECK(chess::perft(p, 1) == 20);
  CHECK(chess::perft(p, 2) == 400);
  CHECK(chess::perft(p, 3) == 8902);
  CHECK(chess::perft(p, 4) == 197281);
}

TEST_CASE("perft: kiwipete") {
  const Position p =
      Position::from_fen("r3k2r/p1ppqpb1/bn2pnp1/3PN3/1p2P3/2N2Q1p/PPPBBPPP/R3K2R w KQkq - 0 1");
  CHECK(chess::perft(p, 1) == 48);
  CHECK(chess::perft(p, 2) == 2039);
  CHECK(chess::perft(p, 3) == 97862);
}

TEST_CASE("perft: rook endgame with en passant") {
  const Position p = Position::from_fen("8/2p5/3p4/KP5r/1R3p1k/8/4P1P1/8 w - - 0 1");
  CHECK(chess::perft(p, 1) == 14);
  CHECK(chess::perft(p, 2) == 191);
  CHECK(chess::perft(p, 3) == 2812);
  CHECK(chess::perft(p, 4) == 43238);
}

TEST_CASE("perft: promotion-heavy position") {
  const Position p =
      Position::from_fen("r3k2r/Pppp1ppp/1b3nbN/nP6/BBP1P3/q4N2/Pp1P2PP/R2Q1RK1 w kq - 0 1");
  CHECK(chess::perft(p, 1) == 6);
  CHECK(chess::perft(p, 2) == 264);
  CHECK(chess::perft(p, 3) == 9467);
}

TEST_CASE("perft: position five") {
  const Position p =
      Position::from_fen("rnbq1k1r/pp1Pbppp/2p5/8/2B5/8/PPP1NnPP/RNBQK2R w KQ - 1 8");
  CHECK(chess::perft(p, 1) == 44);
  CHECK(chess::perft(p, 2) == 1486);
  CHECK(chess::perft(p, 3) == 62379);
}

TEST_CASE("perft: position six") {
  const Position p = Position::from_fen(
      "r4rk1/1pp1qppp/p1np1n2/2b1p1B1/2B1P1b1/P1NP1N2/1PP1QPPP/R4RK1 w - - 0 10");
  CHECK(chess::perft(p, 1) == 46);
  CHECK(chess::perft(p, 2) == 2079);
  CHECK(chess::perft(p, 3) == 89890);
}

TEST_CASE("fool's mate is checkmate") {
  const Position p = Position::from_fen(kFoolsMate);
  CHECK(p.legal_moves().empty());
  CHECK(p.in_check(chess::Color::white));
  CHECK(chess::game_status(p, 4, 200) == chess::GameStatus::checkmate);
}

TEST_CASE("castling through an attacked transit square is excluded") {
  const Position p = Position::from_fen("4k3/8/8/8/8/7q/8/R3K2R w KQ - 0 1");
  bool has_kingside = false, has_queenside = false;
  for (const Move& m : p.legal_moves()) {
    if (chess::format_move(m) == "e1g1") has_kingside = true;
    if (chess::format_move(m) == "e1c1") has_queenside = true;
  }
  CHECK_FALSE(has_kingside);  // h3 queen covers f1
  CHECK(has_queenside);

  const Position both = Position::from_fen("4k3/8/8/8/8/8/8/R3K2R w KQ - 0 1");
  bool ks = false, qs = false;
  for (const Move& m : both.legal_moves()) {
    if (chess::format_move(m) == "e1g1") ks = true;
    if (chess::format_move(m) == "e1c1") qs = true;
  }
  CHECK(ks);
  CHECK(qs);
}

TEST_CASE("apply: pawn double push sets the en-passant square and clocks") {
  const Position p = Position::initial().apply(chess::parse_move("e2e4"));
  CHECK(p.fen() == "rnbqkbnr/pppppppp/8/8/4P3/8/PPPP1PPP/RNBQKBNR b KQkq e3 0 1");
  const Position p2 = p.apply(chess::parse_move("c7c5"));
  CHECK(p2.fullmove_number() == 2);  // increments after black's move
  CHECK(p2.en_passant().has_value());
  const Position p3 = p2.apply(chess::parse_move("g1f3"));
  CHECK(p3.halfmove_clock() == 1);  // quiet knight move
  CHECK_FALSE(p3.en_passant().has_value());
  CHECK_THROWS_AS(Position::initial().apply(chess::parse_move("e2e5")), std::invalid_argument);
}

TEST_CASE("apply: en passant removes the captured pawn") {
  Position p = Position::initial();
  for (const char* mv : {"e2e4", "a7a6", "e4e5", "d7d5"}) p = p.apply(chess::parse_move(mv));
  CHECK(p.en_passant().has_value());
  const Position after = p.apply(chess::parse_move("e5d6"));
  CHECK(after.piece_at(chess::parse_square("d5")).type == chess::PieceType::none);
  CHECK(after.piece_at(chess::parse_square("d6")).type == chess::PieceType::pawn);
  CHECK(after.halfmove_clock() == 0);
}

TEST_CASE("game status terminals") {
  CHECK(chess::game_status(Position::from_fen("k7/8/1Q6/8/8/8/8/7K b - - 0 1"), 10, 200) ==
        chess::GameStatus::stalemate);
  CHECK(chess::game_status(Position::from_fen("k7/8/8/8/8/8/8/7K w - - 0 1"), 10, 200) ==
        chess::GameStatus::draw_insufficient_material);
  CHECK(chess::game_status(Position::from_fen("k7/8/8/8/8/8/8/6NK w - - 0 1"), 10, 200) ==
        chess::GameStatus::draw_insufficient_material);
  CHECK(chess::game_status(Position::from_fen("k7/8/8/8/8/8/R7/7K w - - 100 60"), 10, 200) ==
        chess::GameStatus::draw_fifty_move);
  CHECK(chess::game_status(Position::initial(), 200, 200) ==
        chess::GameStatus::aborted_ply_limit);
  CHECK(chess::game_status(Position::initial(), 199, 200) == chess::GameStatus::ongoing);
}

TEST_CASE("random playouts: FEN round-trip, one king each, mover never leaves check") {
  Rng rng(42);
  for (int game = 0; game < 60; ++game) {
    Position p = Position::initial();
    for (int ply = 0; ply < 120; ++ply) {
      const auto moves = p.legal_moves();
      if (moves.empty()) break;
      const chess::Color mover = p.side_to_move();
      p = p.apply_unchecked(moves[rng.uniform_int(0, static_cast<int64_t>(moves.size()) - 1)]);

      CHECK(Position::from_fen(p.fen()) == p);
      CHECK_FALSE(p.in_check(mover));  // the side that just moved is never in check
      int kings[2] = {0, 0};
      for (int sq = 0; sq < 64; ++sq)
        if (p.piece_at(sq).type == chess::PieceType::king)
          ++kings[static_cast<int>(p.piece_at(sq).color)];
      CHECK(kings[0] == 1);
      CHECK(kings[1] == 1);
    }
  }
}
