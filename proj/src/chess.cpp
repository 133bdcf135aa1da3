#include "gamelab/chess.hpp"

#include <cctype>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

#include "gamelab/errors.hpp"

namespace gamelab::chess {

namespace {

constexpr char kPieceChars[] = " pnbrqk";

char piece_char(const Piece& p) {
  const char c = kPieceChars[static_cast<int>(p.type)];
  return p.color == Color::white ? static_cast<char>(std::toupper(c)) : c;
}

PieceType piece_type_from_char(char c) {
  switch (std::tolower(c)) {
    case 'p': return PieceType::pawn;
    case 'n': return PieceType::knight;
    case 'b': return PieceType::bishop;
    case 'r': return PieceType::rook;
    case 'q': return PieceType::queen;
    case 'k': return PieceType::king;
    default: return PieceType::none;
  }
}

constexpr int kKnightOffsets[8][2] = {{1, 2},  {2, 1},  {2, -1}, {1, -2},
                                      {-1, -2}, {-2, -1}, {-2, 1}, {-1, 2}};
constexpr int kKingOffsets[8][2] = {{1, 0}, {1, 1},  {0, 1},  {-1, 1},
                                    {-1, 0}, {-1, -1}, {0, -1}, {1, -1}};
constexpr int kBishopDirs[4][2] = {{1, 1}, {1, -1}, {-1, 1}, {-1, -1}};
constexpr int kRookDirs[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};

}  // namespace

std::string format_square(Square sq) {
  std::string s;
  s += static_cast<char>('a' + file_of(sq));
  s += static_cast<char>('1' + rank_of(sq));
  return s;
}

Square parse_square(std::string_view text) {
  if (text.size() != 2 || text[0] < 'a' || text[0] > 'h' || text[1] < '1' || text[1] > '8')
    throw ParseError("invalid square: '" + std::string(text) + "'");
  return make_square(text[0] - 'a', text[1] - '1');
}

Move parse_move(std::string_view text) {
  if (text.size() != 4 && text.size() != 5)
    throw ParseError("invalid move: '" + std::string(text) + "'");
  Move m;
  m.from = parse_square(text.substr(0, 2));
  m.to = parse_square(text.substr(2, 2));
  if (m.from == m.to) throw ParseError("invalid move: '" + std::string(text) + "'");
  if (text.size() == 5) {
    switch (text[4]) {
      case 'q': m.promotion = PieceType::queen; break;
      case 'r': m.promotion = PieceType::rook; break;
      case 'b': m.promotion = PieceType::bishop; break;
      case 'n': m.promotion = PieceType::knight; break;
      default: throw ParseError("invalid promotion letter: '" + std::string(text) + "'");
    }
  }
  return m;
}

std::string format_move(const Move& m) {
  std::string s = format_square(m.from) + format_square(m.to);
  switch (m.promotion) {
    case PieceType::queen: s += 'q'; break;
    case PieceType::rook: s += 'r'; break;
    case PieceType::bishop: s += 'b'; break;
    case PieceType::knight: s += 'n'; break;
    default: break;
  }
  return s;
}

Position Position::initial() {
  return from_fen("rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1");
}

Position Position::from_fen(std::string_view fen) {
  std::istringstream in{std::string(fen)};
  std::string placement, active, castling, ep, halfmove, fullmove;
  if (!(in >> placement >> active >> castling >> ep >> halfmove >> fullmove))
    throw ParseError("FEN needs 6 space-separated fields: '" + std::string(fen) + "'");
  std::string extra;
  if (in >> extra) throw ParseError("FEN has trailing fields: '" + std::string(fen) + "'");

  Position pos;
  int rank = 7, file = 0;
  for (char c : placement) {
    if (c == '/') {
      if (file != 8) throw ParseError("FEN rank has wrong length");
      --rank;
      file = 0;
      if (rank < 0) throw ParseError("FEN has too many ranks");
    } else if (c >= '1' && c <= '8') {
      file += c - '0';
      if (file > 8) throw ParseError("FEN rank overflows 8 files");
    } else {
      const PieceType type = piece_type_from_char(c);
      if (type == PieceType::none || file >= 8)
        throw ParseError(std::string("bad FEN placement char '") + c + "'");
      pos.board_[make_square(file, rank)] = {type, std::isupper(c) ? Color::white : Color::black};
      ++file;
    }
  }
  if (rank != 0 || file != 8) throw ParseError("FEN placement must cover 8 ranks of 8 files");

  if (active == "w") pos.stm_ = Color::white;
  else if (active == "b") pos.stm_ = Color::black;
  else throw ParseError("FEN active color must be 'w' or 'b'");

  if (castling != "-") {
    for (char c : castling) {
      uint8_t right;
      switch (c) {
        case 'K': right = kWhiteKingside; break;
        case 'Q': right = kWhiteQueenside; break;
        case 'k': right = kBlackKingside; break;
        case 'q': right = kBlackQueenside; break;
        default: throw ParseError("bad FEN castling field");
      }
      if (pos.castling_ & right) throw ParseError("duplicate FEN castling right");
      pos.castling_ |= right;
    }
  }

  if (ep != "-") {
    const Square sq = parse_square(ep);
    if (rank_of(sq) != 2 && rank_of(sq) != 5)
      throw ParseError("FEN en-passant square must be on rank 3 or 6");
    if ((rank_of(sq) == 2) != (pos.stm_ == Color::black))
      throw ParseError("FEN en-passant square inconsistent with active color");
    pos.ep_ = static_cast<int8_t>(sq);
  }

  char* end = nullptr;
  pos.halfmove_ = static_cast<int>(std::strtol(halfmove.c_str(), &end, 10));
  if (*end != '\0' || pos.halfmove_ < 0) throw ParseError("bad FEN half-move clock");
  pos.fullmove_ = static_cast<int>(std::strtol(fullmove.c_str(), &end, 10));
  if (*end != '\0' || pos.fullmove_ < 1) throw ParseError("bad FEN full-move number");

  int kings[2] = {0, 0};
  for (Square sq = 0; sq < 64; ++sq) {
    const Piece& p = pos.board_[sq];
    if (p.type == PieceType::king) ++kings[static_cast<int>(p.color)];
    if (p.type == PieceType::pawn && (rank_of(sq) == 0 || rank_of(sq) == 7))
      throw ParseError("FEN places a pawn on a back rank");
  }
  if (kings[0] != 1 || kings[1] != 1)
    throw ParseError("FEN must have exactly one king per color");
  return pos;
}

std::string Position::fen() const {
  std::string out;
  for (int rank = 7; rank >= 0; --rank) {
    int empty = 0;
    for (int file = 0; file < 8; ++file) {
      const Piece& p = board_[make_square(file, rank)];
      if (p.type == PieceType::none) {
        ++empty;
      } else {
        if (empty > 0) out += static_cast<char>('0' + empty);
        empty = 0;
        out += piece_char(p);
      }
    }
    if (empty > 0) out += static_cast<char>('0' + empty);
    if (rank > 0) out += '/';
  }
  out += stm_ == Color::white ? " w " : " b ";
  if (castling_ == 0) {
    out += '-';
  } else {
    if (castling_ & kWhiteKingside) out += 'K';
    if (castling_ & kWhiteQueenside) out += 'Q';
    if (castling_ & kBlackKingside) out += 'k';
    if (castling_ & kBlackQueenside) out += 'q';
  }
  out += ' ';
  out += ep_ >= 0 ? format_square(ep_) : "-";
  out += ' ' + std::to_string(halfmove_) + ' ' + std::to_string(fullmove_);
  return out;
}

Square Position::king_square(Color c) const {
  for (Square sq = 0; sq < 64; ++sq)
    if (board_[sq].type == PieceType::king && board_[sq].color == c) return sq;
  return -1;
}

bool Position::square_attacked(Square sq, Color by) const {
  const int f = file_of(sq), r = rank_of(sq);
  // Pawns: a `by`-colored pawn attacks sq from one rank behind it.
  const int pr = by == Color::white ? r - 1 : r + 1;
  if (pr >= 0 && pr < 8) {
    for (int df : {-1, 1}) {
      const int pf = f + df;
      if (pf < 0 || pf > 7) continue;
      const Piece& p = board_[make_square(pf, pr)];
      if (p.type == PieceType::pawn && p.color == by) return true;
    }
  }
  for (const auto& d : kKnightOffsets) {
    const int nf = f + d[0], nr = r + d[1];
    if (nf < 0 || nf > 7 || nr < 0 || nr > 7) continue;
    const Piece& p = board_[make_square(nf, nr)];
    if (p.type == PieceType::knight && p.color == by) return true;
  }
  for (const auto& d : kKingOffsets) {
    const int nf = f + d[0], nr = r + d[1];
    if (nf < 0 || nf > 7 || nr < 0 || nr > 7) continue;
    const Piece& p = board_[make_square(nf, nr)];
    if (p.type == PieceType::king && p.color == by) return true;
  }
  for (const auto& d : kBishopDirs) {
    int nf = f + d[0], nr = r + d[1];
    while (nf >= 0 && nf < 8 && nr >= 0 && nr < 8) {
      const Piece& p = board_[make_square(nf, nr)];
      if (p.type != PieceType::none) {
        if (p.color == by && (p.type == PieceType::bishop || p.type == PieceType::queen))
          return true;
        break;
      }
      nf += d[0];
      nr += d[1];
    }
  }
  for (const auto& d : kRookDirs) {
    int nf = f + d[0], nr = r + d[1];
    while (nf >= 0 && nf < 8 && nr >= 0 && nr < 8) {
      const Piece& p = board_[make_square(nf, nr)];
      if (p.type != PieceType::none) {
        if (p.color == by && (p.type == PieceType::rook || p.type == PieceType::queen))
          return true;
        break;
      }
      nf += d[0];
      nr += d[1];
    }
  }
  return false;
}

bool Position::in_check(Color c) const {
  return square_attacked(king_square(c), opponent(c));
}

void Position::pseudo_moves(std::vector<Move>& out) const {
  const Color us = stm_;
  const Color them = opponent(us);
  const int forward = us == Color::white ? 8 : -8;
  const int start_rank = us == Color::white ? 1 : 6;
  const int promo_rank = us == Color::white ? 7 : 0;

  auto push_pawn_move = [&](Square from, Square to) {
    if (rank_of(to) == promo_rank) {
      for (PieceType promo : {PieceType::queen, PieceType::rook, PieceType::bishop, PieceType::knight})
        out.push_back({from, to, promo});
    } else {
      out.push_back({from, to});
    }
  };

  for (Square from = 0; from < 64; ++from) {
    const Piece& p = board_[from];
    if (p.type == PieceType::none || p.color != us) continue;
    const int f = file_of(from), r = rank_of(from);
    switch (p.type) {
      case PieceType::pawn: {
        const Square one = from + forward;
        if (board_[one].type == PieceType::none) {
          push_pawn_move(from, one);
          const Square two = one + forward;
          if (r == start_rank && board_[two].type == PieceType::none) out.push_back({from, two});
        }
        for (int df : {-1, 1}) {
          const int cf = f + df;
          if (cf < 0 || cf > 7) continue;
          const Square to = one - f + cf;
          const Piece& target = board_[to];
          if (target.type != PieceType::none && target.color == them) push_pawn_move(from, to);
          else if (to == ep_) out.push_back({from, to});
        }
        break;
      }
      case PieceType::knight:
        for (const auto& d : kKnightOffsets) {
          const int nf = f + d[0], nr = r + d[1];
          if (nf < 0 || nf > 7 || nr < 0 || nr > 7) continue;
          const Square to = make_square(nf, nr);
          if (board_[to].type == PieceType::none || board_[to].color == them)
            out.push_back({from, to});
        }
        break;
      case PieceType::bishop:
      case PieceType::rook:
      case PieceType::queen: {
        auto scan = [&](const int (*dirs)[2], int n) {
          for (int i = 0; i < n; ++i) {
            int nf = f + dirs[i][0], nr = r + dirs[i][1];
            while (nf >= 0 && nf < 8 && nr >= 0 && nr < 8) {
              const Square to = make_square(nf, nr);
              if (board_[to].type == PieceType::none) {
                out.push_back({from, to});
              } else {
                if (board_[to].color == them) out.push_back({from, to});
                break;
              }
              nf += dirs[i][0];
              nr += dirs[i][1];
            }
          }
        };
        if (p.type != PieceType::rook) scan(kBishopDirs, 4);
        if (p.type != PieceType::bishop) scan(kRookDirs, 4);
        break;
      }
      case PieceType::king: {
        for (const auto& d : kKingOffsets) {
          const int nf = f + d[0], nr = r + d[1];
          if (nf < 0 || nf > 7 || nr < 0 || nr > 7) continue;
          const Square to = make_square(nf, nr);
          if (board_[to].type == PieceType::none || board_[to].color == them)
            out.push_back({from, to});
        }
        // Castling: rights intact, rook in place, path empty, and neither the
        // king square nor the transit/destination squares attacked.
        const int home = us == Color::white ? 0 : 7;
        if (from == make_square(4, home) && !square_attacked(from, them)) {
          const uint8_t ks = us == Color::white ? kWhiteKingside : kBlackKingside;
          const uint8_t qs = us == Color::white ? kWhiteQueenside : kBlackQueenside;
          if ((castling_ & ks) && board_[make_square(7, home)] == Piece{PieceType::rook, us} &&
              board_[make_square(5, home)].type == PieceType::none &&
              board_[make_square(6, home)].type == PieceType::none &&
              !square_attacked(make_square(5, home), them) &&
              !square_attacked(make_square(6, home), them))
            out.push_back({from, make_square(6, home)});
          if ((castling_ & qs) && board_[make_square(0, home)] == Piece{PieceType::rook, us} &&
              board_[make_square(1, home)].type == PieceType::none &&
              board_[make_square(2, home)].type == PieceType::none &&
              board_[make_square(3, home)].type == PieceType::none &&
              !square_attacked(make_square(3, home), them) &&
              !square_attacked(make_square(2, home), them))
            out.push_back({from, make_square(2, home)});
        }
        break;
      }
      default:
        break;
    }
  }
}

Position Position::apply_unchecked(const Move& m) const {
  Position next = *this;
  const Piece moving = board_[m.from];
  const Color us = moving.color;
  const bool was_capture = board_[m.to].type != PieceType::none;

  next.board_[m.from] = Piece{};
  next.board_[m.to] = moving;

  bool pawn_move = moving.type == PieceType::pawn;
  bool ep_capture = false;
  if (pawn_move && m.to == ep_) {
    const Square victim = m.to + (us == Color::white ? -8 : 8);
    next.board_[victim] = Piece{};
    ep_capture = true;
  }
  if (m.promotion != PieceType::none) next.board_[m.to] = {m.promotion, us};

  if (moving.type == PieceType::king && std::abs(file_of(m.to) - file_of(m.from)) == 2) {
    const int home = rank_of(m.from);
    if (file_of(m.to) == 6) {  // kingside: rook h -> f
      next.board_[make_square(5, home)] = next.board_[make_square(7, home)];
      next.board_[make_square(7, home)] = Piece{};
    } else {  // queenside: rook a -> d
      next.board_[make_square(3, home)] = next.board_[make_square(0, home)];
      next.board_[make_square(0, home)] = Piece{};
    }
  }

  auto clear_right_at = [&](Square sq) {
    switch (sq) {
      case 0: next.castling_ &= ~kWhiteQueenside; break;
      case 7: next.castling_ &= ~kWhiteKingside; break;
      case 56: next.castling_ &= ~kBlackQueenside; break;
      case 63: next.castling_ &= ~kBlackKingside; break;
      default: break;
    }
  };
  if (moving.type == PieceType::king)
    next.castling_ &= us == Color::white ? ~(kWhiteKingside | kWhiteQueenside)
                                         : ~(kBlackKingside | kBlackQueenside);
  clear_right_at(m.from);
  clear_right_at(m.to);

  next.ep_ = -1;
  if (pawn_move && std::abs(rank_of(m.to) - rank_of(m.from)) == 2)
    next.ep_ = static_cast<int8_t>((m.from + m.to) / 2);

  next.halfmove_ = (pawn_move || was_capture || ep_capture) ? 0 : halfmove_ + 1;
  if (us == Color::black) ++next.fullmove_;
  next.stm_ = opponent(us);
  return next;
}

std::vector<Move> Position::legal_moves() const {
  std::vector<Move> pseudo;
  pseudo.reserve(64);
  pseudo_moves(pseudo);
  std::vector<Move> legal;
  legal.reserve(pseudo.size());
  for (const Move& m : pseudo) {
    const Position next = apply_unchecked(m);
    if (!next.square_attacked(next.king_square(stm_), next.stm_)) legal.push_back(m);
  }
  return legal;
}

bool Position::is_legal(const Move& m) const {
  for (const Move& lm : legal_moves())
    if (lm == m) return true;
  return false;
}

Position Position::apply(const Move& m) const {
  if (!is_legal(m))
    throw std::invalid_argument("illegal move " + format_move(m) + " in position " + fen());
  return apply_unchecked(m);
}

bool Position::insufficient_material() const {
  int minor_count = 0;
  bool bishop_square_color[2] = {false, false};
  bool any_bishop = false, any_knight = false;
  for (Square sq = 0; sq < 64; ++sq) {
    switch (board_[sq].type) {
      case PieceType::none:
      case PieceType::king:
        break;
      case PieceType::pawn:
      case PieceType::rook:
      case PieceType::queen:
        return false;
      case PieceType::knight:
        any_knight = true;
        ++minor_count;
        break;
      case PieceType::bishop:
        any_bishop = true;
        ++minor_count;
        bishop_square_color[(file_of(sq) + rank_of(sq)) & 1] = true;
        break;
      default:
        break;
    }
  }
  if (minor_count == 0) return true;                      // bare kings
  if (minor_count == 1) return true;                      // K+minor vs K
  if (!any_knight && any_bishop)                          // bishops on one square color only
    return !(bishop_square_color[0] && bishop_square_color[1]);
  return false;
}

GameStatus game_status(const Position& pos, int ply_count, int ply_limit) {
  if (pos.legal_moves().empty())
    return pos.in_check(pos.side_to_move()) ? GameStatus::checkmate : GameStatus::stalemate;
  if (pos.halfmove_clock() >= 100) return GameStatus::draw_fifty_move;
  if (pos.insufficient_material()) return GameStatus::draw_insufficient_material;
  if (ply_count >= ply_limit) return GameStatus::aborted_ply_limit;
  return GameStatus::ongoing;
}

uint64_t perft(const Position& pos, int depth) {
  if (depth <= 0) return 1;
  uint64_t nodes = 0;
  for (const Move& m : pos.legal_moves()) {
    if (depth == 1) {
      ++nodes;
    } else {
      nodes += perft(pos.apply_unchecked(m), depth - 1);
    }
  }
  return nodes;
}

}  // namespace gamelab::chess
