#include "gamelab/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "gamelab/errors.hpp"
#include "gamelab/rng.hpp"

namespace gamelab::corpus {

namespace {

constexpr std::string_view kMoveSep = " [MOVESEP] ";

bool valid_tag(char tag) {
  return tag == 'G' || tag == 'Q' || tag == 'R' || tag == 'W' || tag == 'X';
}

int parse_pile_count(std::string_view text, std::string_view line) {
  if (text.empty() || text.size() > 2 ||
      !std::all_of(text.begin(), text.end(), [](char c) { return c >= '0' && c <= '9'; }))
    throw ParseError("bad pile count in nim record: '" + std::string(line) + "'");
  const int n = std::stoi(std::string(text));
  if (n > 10) throw ParseError("pile count out of range in nim record: '" + std::string(line) + "'");
  return n;
}

}  // namespace

std::string CorpusStats::to_json() const {
  nlohmann::ordered_json j;
  j["number_of_games"] = games;
  j["total_unique_game_states"] = unique_states;
  j["total_unique_moves"] = unique_moves;
  j["dataset_length"] = length;
  j["average_sequence_length"] = avg_seq_len;
  j["dataset_size_bytes"] = bytes;
  return j.dump(2);
}

std::string encode_nim_state(const nim::State& s) {
  return "a" + std::to_string(s.piles[0]) + "/b" + std::to_string(s.piles[1]) + "/c" +
         std::to_string(s.piles[2]);
}

std::string encode_nim_move(const nim::Move& m) {
  return std::string(1, static_cast<char>('a' + m.pile)) + std::to_string(m.take);
}

nim::Move decode_nim_move(std::string_view text) {
  if (text.size() < 2 || text[0] < 'a' || text[0] > 'c')
    throw ParseError("bad nim move: '" + std::string(text) + "'");
  const int take = parse_pile_count(text.substr(1), text);
  if (take < 1) throw ParseError("nim move must take at least one item: '" + std::string(text) + "'");
  return {text[0] - 'a', take};
}

std::string encode_nim_record(const nim::State& s, char tag, const nim::Move& m) {
  return encode_nim_state(s) + " " + std::string(1, tag) + " - " + encode_nim_move(m);
}

NimRecord decode_nim_record(std::string_view line) {
  std::istringstream in{std::string(line)};
  std::string state_text, tag_text, sep_text, move_text, extra;
  if (!(in >> state_text >> tag_text >> sep_text >> move_text) || (in >> extra))
    throw ParseError("nim record needs 4 space-separated fields: '" + std::string(line) + "'");
  if (sep_text != "-") throw ParseError("nim record separator must be '-': '" + std::string(line) + "'");
  if (tag_text.size() != 1 || !valid_tag(tag_text[0]))
    throw ParseError("bad nim record tag: '" + std::string(line) + "'");

  NimRecord record{};
  record.tag = tag_text[0];
  std::size_t pos = 0;
  for (int pile = 0; pile < 3; ++pile) {
    const char label = static_cast<char>('a' + pile);
    if (pos >= state_text.size() || state_text[pos] != label)
      throw ParseError("nim state must list piles a/b/c in order: '" + std::string(line) + "'");
    ++pos;
    std::size_t end = pos;
    while (end < state_text.size() && state_text[end] != '/') ++end;
    record.state.piles[pile] = parse_pile_count(
        std::string_view(state_text).substr(pos, end - pos), line);
    pos = end;
    if (pile < 2) {
      if (pos >= state_text.size() || state_text[pos] != '/')
        throw ParseError("nim state needs '/' separators: '" + std::string(line) + "'");
      ++pos;
    }
  }
  if (pos != state_text.size())
    throw ParseError("trailing characters in nim state: '" + std::string(line) + "'");

  record.move = decode_nim_move(move_text);
  if (!nim::is_legal_move(record.state, record.move))
    throw ParseError("nim record move is illegal in its state: '" + std::string(line) + "'");
  return record;
}

std::string encode_chess_record(const chess::Position& pos, const chess::Move& m) {
  return pos.fen() + std::string(kMoveSep) + chess::format_move(m);
}

ChessRecord decode_chess_record(std::string_view line) {
  const auto at = line.find(kMoveSep);
  if (at == std::string_view::npos)
    throw ParseError("chess record needs ' [MOVESEP] ': '" + std::string(line) + "'");
  ChessRecord record{chess::Position::from_fen(line.substr(0, at)),
                     chess::parse_move(line.substr(at + kMoveSep.size()))};
  if (!record.position.is_legal(record.move))
    throw ParseError("chess record move is illegal in its position: '" + std::string(line) + "'");
  return record;
}

namespace {

struct StatsAccumulator {
  std::unordered_set<std::string> states, moves;
  int64_t lines = 0;
  int64_t chars = 0;
  int64_t games = 0;
  int64_t malformed = 0;

  void record(const std::string& state_text, const std::string& move_text, std::size_t line_len) {
    states.insert(state_text);
    moves.insert(move_text);
    ++lines;
    chars += static_cast<int64_t>(line_len);
  }

  CorpusStats finish(int64_t bytes) const {
    CorpusStats s;
    s.games = games;
    s.unique_states = static_cast<int64_t>(states.size());
    s.unique_moves = static_cast<int64_t>(moves.size());
    s.length = lines;
    s.avg_seq_len = lines > 0 ? static_cast<double>(chars) / static_cast<double>(lines) : 0.0;
    s.bytes = bytes;
    s.malformed_lines = malformed;
    return s;
  }
};

nim::AgentFn make_agent(char tag, const nim::QTable* q) {
  switch (tag) {
    case 'G':
      return [](const nim::State& s, Rng&) { return nim::guru_move(s); };
    case 'R':
      return [](const nim::State& s, Rng& rng) { return nim::random_move(s, rng); };
    case 'Q':
      return [q](const nim::State& s, Rng&) { return q->greedy_move(s); };
    default:
      throw std::invalid_argument(std::string("unknown nim agent tag '") + tag + "'");
  }
}

}  // namespace

CorpusStats gen_nim_corpus(const NimGenConfig& config, const std::string& out_path,
                           const nim::QTable* pretrained_q) {
  if (config.games < 0 || config.noise_p < 0.0 || config.noise_p > 1.0 ||
      config.schedule.empty() || config.max_pile < 1)
    throw std::invalid_argument("invalid nim generation config");

  bool needs_q = false;
  for (const auto& [a, b] : config.schedule) needs_q |= a == 'Q' || b == 'Q';
  nim::QTable local_q({.max_pile = config.max_pile});
  const nim::QTable* q = pretrained_q;
  if (needs_q && q == nullptr) {
    Rng q_rng(Rng::derive(config.seed, 0x71));
    local_q.train(config.q_episodes,
                  [](const nim::State& s, Rng& rng) { return nim::random_move(s, rng); }, q_rng);
    q = &local_q;
  }

  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw IoError("cannot open corpus output file: " + out_path);

  StatsAccumulator acc;
  int64_t noisy = 0;
  const std::size_t pairings = config.schedule.size();
  for (int64_t game = 0; game < config.games; ++game) {
    const auto& pairing = config.schedule[static_cast<std::size_t>(game) % pairings];
    const bool swapped = (static_cast<std::size_t>(game) / pairings) % 2 == 1;
    const char first_tag = swapped ? pairing.second : pairing.first;
    const char second_tag = swapped ? pairing.first : pairing.second;

    Rng rng(Rng::derive(config.seed, 0x1000 + static_cast<uint64_t>(game)));
    const nim::State start = config.randomized_starts
                                 ? nim::random_start(rng, config.max_pile)
                                 : nim::State{{config.max_pile, config.max_pile, config.max_pile}};
    const nim::GameRecord record = nim::play_game(make_agent(first_tag, q), first_tag,
                                                  make_agent(second_tag, q), second_tag, start,
                                                  config.noise_p, rng);

    if (game > 0) out << '\n';
    for (std::size_t i = 0; i < record.plies.size(); ++i) {
      const nim::Ply& ply = record.plies[i];
      char tag = ply.tag;
      if (config.variant == NimTagVariant::win_state) {
        const nim::Seat seat = i % 2 == 0 ? nim::Seat::first : nim::Seat::second;
        tag = seat == record.winner ? 'W' : 'X';
      }
      nim::State state = ply.state;
      nim::Move move = ply.move;
      if (config.shuffle_labels) {
        // Random relabeling of the pile letters; move letter remapped with it.
        std::array<int, 3> perm{0, 1, 2};
        for (int k = 2; k > 0; --k)
          std::swap(perm[k], perm[rng.uniform_int(0, k)]);
        nim::State shuffled{};
        for (int pile = 0; pile < 3; ++pile) shuffled.piles[perm[pile]] = state.piles[pile];
        state = shuffled;
        move.pile = perm[move.pile];
      }
      if (ply.noisy) ++noisy;
      const std::string line = encode_nim_record(state, tag, move);
      acc.record(encode_nim_state(state), encode_nim_move(move), line.size());
      out << line << '\n';
    }
    ++acc.games;
  }
  out.flush();
  if (!out) throw IoError("write failure on corpus output file: " + out_path);
  out.close();

  CorpusStats stats = acc.finish(static_cast<int64_t>(std::filesystem::file_size(out_path)));
  stats.noisy_moves = noisy;
  return stats;
}

CorpusStats gen_chess_corpus(const ChessGenConfig& config, const std::string& out_path) {
  if (config.games < 0 || config.plies_per_game < 1)
    throw std::invalid_argument("invalid chess generation config");

  uci::EngineSession session = uci::EngineSession::connect(config.engine);

  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw IoError("cannot open corpus output file: " + out_path);

  StatsAccumulator acc;
  for (int64_t game = 0; game < config.games; ++game) {
    session.set_seed(Rng::derive(config.seed, static_cast<uint64_t>(game)));
    session.new_game();

    std::vector<std::string> lines;
    std::vector<std::pair<std::string, std::string>> fields;
    chess::Position pos = chess::Position::initial();
    bool aborted = false;
    for (int ply = 0; ply < config.plies_per_game; ++ply) {
      if (chess::game_status(pos, ply, config.ply_limit) != chess::GameStatus::ongoing) break;
      chess::Move move;
      try {
        move = session.best_move(pos);
      } catch (const EngineError& e) {
        std::cerr << "chess-gen: game " << game << " aborted: " << e.what() << "\n";
        aborted = true;
        break;
      }
      lines.push_back(encode_chess_record(pos, move));
      fields.emplace_back(pos.fen(), chess::format_move(move));
      pos = pos.apply_unchecked(move);
    }
    if (aborted && !session.connected()) {
      // One reconnect attempt keeps a single engine crash from ending the run.
      session = uci::EngineSession::connect(config.engine);
    }
    if (lines.empty()) continue;
    if (acc.games > 0) out << '\n';
    for (std::size_t i = 0; i < lines.size(); ++i) {
      acc.record(fields[i].first, fields[i].second, lines[i].size());
      out << lines[i] << '\n';
    }
    ++acc.games;
  }
  out.flush();
  if (!out) throw IoError("write failure on corpus output file: " + out_path);
  out.close();
  session.close();

  return acc.finish(static_cast<int64_t>(std::filesystem::file_size(out_path)));
}

CorpusStats dataset_stats(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open corpus file: " + path);

  StatsAccumulator acc;
  std::string line;
  bool in_game = false;
  while (std::getline(in, line)) {
    if (line.empty()) {
      in_game = false;
      continue;
    }
    if (!in_game) {
      ++acc.games;
      in_game = true;
    }
    const auto at = line.find(kMoveSep);
    if (at != std::string::npos) {
      try {
        decode_chess_record(line);
        acc.record(line.substr(0, at), line.substr(at + kMoveSep.size()), line.size());
      } catch (const ParseError&) {
        ++acc.malformed;
      }
    } else {
      try {
        const NimRecord r = decode_nim_record(line);
        acc.record(encode_nim_state(r.state), encode_nim_move(r.move), line.size());
      } catch (const ParseError&) {
        ++acc.malformed;
      }
    }
  }
  if (acc.malformed > 0)
    std::cerr << "stats: " << acc.malformed << " malformed line(s) in " << path << "\n";
  return acc.finish(static_cast<int64_t>(std::filesystem::file_size(path)));
}

std::vector<std::string> read_records(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open corpus file: " + path);
  std::vector<std::string> records;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) records.push_back(line);
  return records;
}

void split_corpus(const std::string& path, double test_fraction, uint64_t seed,
                  const std::string& train_out, const std::string& test_out) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw std::invalid_argument("test fraction must be in (0, 1)");
  std::vector<std::string> records = read_records(path);

  Rng rng(Rng::derive(seed, 0x5151));
  for (std::size_t i = records.size(); i > 1; --i)
    std::swap(records[i - 1], records[rng.uniform_int(0, static_cast<int64_t>(i) - 1)]);

  const auto test_n = static_cast<std::size_t>(
      std::llround(test_fraction * static_cast<double>(records.size())));

  std::ofstream test_file(test_out, std::ios::binary);
  std::ofstream train_file(train_out, std::ios::binary);
  if (!test_file || !train_file) throw IoError("cannot open split output files");
  for (std::size_t i = 0; i < records.size(); ++i)
    (i < test_n ? test_file : train_file) << records[i] << '\n';
}

}  // namespace gamelab::corpus
