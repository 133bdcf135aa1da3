#include "gamelab/uci.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <sstream>
#include <thread>

#include "gamelab/errors.hpp"

namespace gamelab::uci {

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> parts;
  std::string p;
  while (in >> p) parts.push_back(p);
  return parts;
}

}  // namespace

struct EngineSession::Impl {
  pid_t pid = -1;
  int to_engine = -1;
  int from_engine = -1;
  std::string buffer;
  EngineInfo info;
  EngineConfig config;
  bool handshake_complete = false;

  ~Impl() { close_now(); }

  void write_line(const std::string& line) {
    std::string data = line + "\n";
    std::size_t off = 0;
    while (off < data.size()) {
      const ssize_t n = ::write(to_engine, data.data() + off, data.size() - off);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw EngineError("write to engine failed: " + std::string(std::strerror(errno)));
      }
      off += static_cast<std::size_t>(n);
    }
  }

  // One LF-terminated line, or nullopt on timeout. EOF raises EngineError.
  std::optional<std::string> read_line(int timeout_ms) {
    const auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
    while (true) {
      const auto nl = buffer.find('\n');
      if (nl != std::string::npos) {
        std::string line = buffer.substr(0, nl);
        buffer.erase(0, nl + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
      }
      const auto now = std::chrono::steady_clock::now();
      if (now >= deadline) return std::nullopt;
      const int wait_ms = static_cast<int>(
          std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count());
      pollfd pfd{from_engine, POLLIN, 0};
      const int pr = ::poll(&pfd, 1, std::min(wait_ms, 200));
      if (pr < 0) {
        if (errno == EINTR) continue;
        throw EngineError("poll on engine pipe failed");
      }
      if (pr == 0) continue;
      char chunk[4096];
      const ssize_t n = ::read(from_engine, chunk, sizeof(chunk));
      if (n < 0) {
        if (errno == EINTR) continue;
        throw EngineError("read from engine failed: " + std::string(std::strerror(errno)));
      }
      if (n == 0) throw EngineError("engine process closed its output (died?)");
      buffer.append(chunk, static_cast<std::size_t>(n));
    }
  }

  // Reads until a line whose first token matches `token`; returns that line.
  std::string wait_for(const std::string& token, int timeout_ms) {
    const auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
    while (true) {
      const auto now = std::chrono::steady_clock::now();
      const int left = static_cast<int>(
          std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count());
      if (left <= 0) throw EngineError("timeout waiting for '" + token + "' from engine");
      auto line = read_line(left);
      if (!line) throw EngineError("timeout waiting for '" + token + "' from engine");
      const auto parts = split_ws(*line);
      if (!parts.empty() && parts[0] == token) return *line;
      if (!parts.empty() && parts[0] == "id" && parts.size() >= 3 && parts[1] == "name") {
        info.name = line->substr(line->find("name") + 5);
      } else if (!parts.empty() && parts[0] == "option") {
        parse_option_line(parts);
      }
    }
  }

  void parse_option_line(const std::vector<std::string>& parts) {
    // option name <N possibly multiword> type <t> [default d] [min m] [max M]
    std::string name;
    OptionSpec spec;
    std::size_t i = 1;
    if (i < parts.size() && parts[i] == "name") ++i;
    while (i < parts.size() && parts[i] != "type") {
      if (!name.empty()) name += ' ';
      name += parts[i++];
    }
    bool has_min = false, has_max = false;
    while (i < parts.size()) {
      if (parts[i] == "type" && i + 1 < parts.size()) {
        spec.type = parts[i + 1];
        i += 2;
      } else if (parts[i] == "default" && i + 1 < parts.size()) {
        spec.default_str = parts[i + 1];
        i += 2;
      } else if (parts[i] == "min" && i + 1 < parts.size()) {
        spec.min = std::atoll(parts[i + 1].c_str());
        has_min = true;
        i += 2;
      } else if (parts[i] == "max" && i + 1 < parts.size()) {
        spec.max = std::atoll(parts[i + 1].c_str());
        has_max = true;
        i += 2;
      } else {
        ++i;
      }
    }
    spec.has_range = has_min && has_max;
    if (!name.empty()) info.options[name] = spec;
  }

  void sync_ready(int timeout_ms) {
    write_line("isready");
    wait_for("readyok", timeout_ms);
  }

  // Advertised options are sent; unknown names are surfaced as warnings.
  void set_option_checked(const std::string& name, const std::string& value) {
    if (info.options.count(name) == 0) {
      info.warnings.push_back("engine does not advertise option '" + name + "'; skipped");
      return;
    }
    write_line("setoption name " + name + " value " + value);
  }

  void close_now() {
    if (pid < 0) {
      if (to_engine >= 0) ::close(to_engine), to_engine = -1;
      if (from_engine >= 0) ::close(from_engine), from_engine = -1;
      return;
    }
    if (to_engine >= 0) {
      const std::string quit = "quit\n";
      ssize_t ignored = ::write(to_engine, quit.data(), quit.size());
      (void)ignored;
      ::close(to_engine);
      to_engine = -1;
    }
    const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(5);
    bool reaped = false;
    while (std::chrono::steady_clock::now() < deadline) {
      int status = 0;
      const pid_t r = ::waitpid(pid, &status, WNOHANG);
      if (r == pid || r < 0) {
        reaped = true;
        break;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    if (!reaped) {
      ::kill(pid, SIGKILL);
      int status = 0;
      ::waitpid(pid, &status, 0);
    }
    if (from_engine >= 0) ::close(from_engine), from_engine = -1;
    pid = -1;
  }
};

EngineSession::EngineSession() = default;
EngineSession::~EngineSession() = default;
EngineSession::EngineSession(EngineSession&&) noexcept = default;
EngineSession& EngineSession::operator=(EngineSession&&) noexcept = default;

bool EngineSession::connected() const { return impl_ && impl_->handshake_complete; }

const EngineInfo& EngineSession::info() const {
  if (!impl_) throw EngineError("session not connected");
  return impl_->info;
}

const EngineConfig& EngineSession::config() const {
  if (!impl_) throw EngineError("session not connected");
  return impl_->config;
}

EngineSession EngineSession::connect(const EngineConfig& config) {
  if (config.threads < 1 || config.multipv < 1)
    throw EngineError("engine config: threads and multipv must be >= 1");
  if (::access(config.path.c_str(), X_OK) != 0)
    throw EngineError("engine executable not found or not executable: " + config.path);

  int to_pipe[2], from_pipe[2];
  if (::pipe(to_pipe) != 0 || ::pipe(from_pipe) != 0)
    throw EngineError("failed to create engine pipes");

  const pid_t pid = ::fork();
  if (pid < 0) throw EngineError("fork failed");
  if (pid == 0) {
    ::dup2(to_pipe[0], STDIN_FILENO);
    ::dup2(from_pipe[1], STDOUT_FILENO);
    ::close(to_pipe[0]);
    ::close(to_pipe[1]);
    ::close(from_pipe[0]);
    ::close(from_pipe[1]);
    ::execlp(config.path.c_str(), config.path.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  ::close(to_pipe[0]);
  ::close(from_pipe[1]);

  EngineSession session;
  session.impl_ = std::make_unique<Impl>();
  session.impl_->pid = pid;
  session.impl_->to_engine = to_pipe[1];
  session.impl_->from_engine = from_pipe[0];
  session.impl_->config = config;

  Impl& impl = *session.impl_;
  impl.write_line("uci");
  impl.wait_for("uciok", config.handshake_timeout_ms);

  impl.set_option_checked("Threads", std::to_string(config.threads));
  impl.set_option_checked("MultiPV", std::to_string(config.multipv));

  if (config.elo) {
    const auto it = impl.info.options.find("UCI_Elo");
    if (it == impl.info.options.end()) {
      impl.info.warnings.push_back("engine does not advertise UCI_Elo; strength limiting unavailable");
    } else if (it->second.has_range && *config.elo > it->second.max) {
      impl.info.warnings.push_back(
          "requested Elo " + std::to_string(*config.elo) + " exceeds engine maximum " +
          std::to_string(it->second.max) + "; running at full strength");
    } else {
      long long elo = *config.elo;
      if (it->second.has_range && elo < it->second.min) {
        impl.info.warnings.push_back("requested Elo " + std::to_string(elo) +
                                     " below engine minimum " + std::to_string(it->second.min) +
                                     "; clamped");
        elo = it->second.min;
      }
      impl.set_option_checked("UCI_LimitStrength", "true");
      impl.set_option_checked("UCI_Elo", std::to_string(elo));
    }
  }
  if (config.seed && impl.info.options.count("Seed"))
    impl.write_line("setoption name Seed value " + std::to_string(*config.seed));

  impl.sync_ready(config.handshake_timeout_ms);
  impl.handshake_complete = true;
  return session;
}

void EngineSession::new_game() {
  if (!connected()) throw EngineError("session not connected");
  impl_->write_line("ucinewgame");
  impl_->sync_ready(impl_->config.handshake_timeout_ms);
}

void EngineSession::set_seed(uint64_t seed) {
  if (!connected()) throw EngineError("session not connected");
  if (impl_->info.options.count("Seed")) {
    impl_->write_line("setoption name Seed value " + std::to_string(seed));
    impl_->sync_ready(impl_->config.handshake_timeout_ms);
  }
}

chess::Move EngineSession::best_move(const chess::Position& pos) {
  return best_move(pos, impl_ ? impl_->config.depth : 1);
}

chess::Move EngineSession::best_move(const chess::Position& pos, int depth) {
  if (!connected()) throw EngineError("session not connected; handshake required before search");
  Impl& impl = *impl_;
  impl.write_line("position fen " + pos.fen());
  if (impl.config.movetime_ms)
    impl.write_line("go movetime " + std::to_string(*impl.config.movetime_ms));
  else
    impl.write_line("go depth " + std::to_string(depth));

  const std::string line = impl.wait_for("bestmove", impl.config.move_timeout_ms);
  const auto parts = split_ws(line);
  if (parts.size() < 2) throw EngineError("malformed bestmove reply: '" + line + "'");
  if (parts[1] == "(none)")
    throw EngineError("engine reports terminal position (bestmove (none)) for " + pos.fen());

  chess::Move move;
  try {
    move = chess::parse_move(parts[1]);
  } catch (const ParseError& e) {
    throw EngineError("unparseable bestmove '" + parts[1] + "': " + e.what());
  }
  if (!pos.is_legal(move))
    throw EngineError("engine returned illegal move " + parts[1] + " for " + pos.fen());
  return move;
}

void EngineSession::close() {
  if (impl_) {
    impl_->close_now();
    impl_->handshake_complete = false;
  }
}

}  // namespace gamelab::uci
