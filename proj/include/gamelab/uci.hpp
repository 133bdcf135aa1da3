#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gamelab/chess.hpp"

namespace gamelab::uci {

struct OptionSpec {
  std::string type;         // spin / check / string / button / combo
  std::string default_str;
  long long min = 0;
  long long max = 0;
  bool has_range = false;
};

struct EngineInfo {
  std::string name;
  std::map<std::string, OptionSpec> options;
  std::vector<std::string> warnings;  // non-fatal setup notes (Elo clamping etc.)
};

struct EngineConfig {
  std::string path;
  int threads = 1;
  int multipv = 1;
  int depth = 1;                    // used by best_move when movetime is unset
  std::optional<int> elo;
  std::optional<int> movetime_ms;
  std::optional<uint64_t> seed;     // forwarded when the engine advertises "Seed"
  int handshake_timeout_ms = 10000;
  int move_timeout_ms = 120000;
};

// Single-owner UCI session over stdin/stdout pipes. Strict request/response;
// never share one session across threads.
class EngineSession {
 public:
  EngineSession();
  ~EngineSession();
  EngineSession(EngineSession&&) noexcept;
  EngineSession& operator=(EngineSession&&) noexcept;
  EngineSession(const EngineSession&) = delete;
  EngineSession& operator=(const EngineSession&) = delete;

  // Spawns the engine and runs uci/isready handshake plus setoption setup.
  // Throws EngineError on spawn failure, handshake timeout, or protocol error.
  static EngineSession connect(const EngineConfig& config);

  bool connected() const;
  const EngineInfo& info() const;
  const EngineConfig& config() const;

  void new_game();                     // ucinewgame + readyok sync
  void set_seed(uint64_t seed);        // no-op when the engine lacks a Seed option

  // position fen ... / go depth|movetime ... / bestmove. The reply is checked
  // for legality; "bestmove (none)" raises an EngineError (terminal position).
  chess::Move best_move(const chess::Position& pos);
  chess::Move best_move(const chess::Position& pos, int depth);

  // Sends quit, reaps within 5 s, kills on timeout. Safe to call twice.
  void close();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace gamelab::uci
