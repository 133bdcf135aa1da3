#include "gamelab.h"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gamelab/arena.hpp"
#include "gamelab/chess.hpp"
#include "gamelab/corpus.hpp"
#include "gamelab/errors.hpp"
#include "gamelab/manifest.hpp"
#include "gamelab/mlm.hpp"
#include "gamelab/nim.hpp"
#include "gamelab/report.hpp"
#include "gamelab/rng.hpp"
#include "gamelab/uci.hpp"
#include "gamelab/wordpiece.hpp"

namespace {

namespace fs = std::filesystem;
using namespace gamelab;

thread_local std::string g_last_error;

void set_error(const std::string& message) { g_last_error = message; }

template <typename F>
gml_status wrap(F&& f) {
  try {
    f();
    g_last_error.clear();
    return GML_OK;
  } catch (const ParseError& e) {
    set_error(e.what());
    return GML_ERR_PARSE;
  } catch (const IoError& e) {
    set_error(e.what());
    return GML_ERR_IO;
  } catch (const EngineError& e) {
    set_error(e.what());
    return GML_ERR_ENGINE;
  } catch (const TrainingError& e) {
    set_error(e.what());
    return GML_ERR_TRAINING;
  } catch (const std::invalid_argument& e) {
    set_error(e.what());
    return GML_ERR_ARGUMENT;
  } catch (const std::logic_error& e) {
    set_error(e.what());
    return GML_ERR_STATE;
  } catch (const std::exception& e) {
    set_error(e.what());
    return GML_ERR_INTERNAL;
  }
}

gml_status require(bool condition, const char* message) {
  if (condition) return GML_OK;
  set_error(message);
  return GML_ERR_ARGUMENT;
}

void copy_out(const std::string& text, char* buffer, size_t capacity) {
  if (buffer == nullptr) return;
  if (capacity <= text.size())
    throw std::invalid_argument("output buffer too small; need " +
                                std::to_string(text.size() + 1) + " bytes");
  std::memcpy(buffer, text.data(), text.size());
  buffer[text.size()] = '\0';
}

bool toggled_on(int32_t tristate) { return tristate >= 0; }  // 0 = default ON, -1 = off

uci::EngineConfig resolve_engine(const gml_engine_config& c) {
  uci::EngineConfig out;
  out.path = c.path ? c.path : "";
  out.threads = c.threads > 0 ? c.threads : 1;
  out.multipv = c.multipv > 0 ? c.multipv : 1;
  out.depth = c.depth > 0 ? c.depth : 1;
  if (c.elo > 0) out.elo = c.elo;
  if (c.movetime_ms > 0) out.movetime_ms = static_cast<int>(c.movetime_ms);
  if (c.handshake_timeout_ms > 0) out.handshake_timeout_ms = c.handshake_timeout_ms;
  if (c.move_timeout_ms > 0) out.move_timeout_ms = c.move_timeout_ms;
  return out;
}

mlm::ModelConfig resolve_model(const gml_model_config& c, int default_max_seq) {
  mlm::ModelConfig out;
  out.layers = c.layers > 0 ? c.layers : 4;
  out.heads = c.heads > 0 ? c.heads : 4;
  out.hidden = c.hidden > 0 ? c.hidden : 128;
  out.ffn = c.ffn > 0 ? c.ffn : 512;
  out.max_seq = c.max_seq > 0 ? c.max_seq : default_max_seq;
  out.dropout = c.dropout > 0 ? c.dropout : 0.0;
  return out;
}

mlm::TrainConfig resolve_train(const gml_train_options& c) {
  mlm::TrainConfig out;
  out.mask_p = c.mask_p > 0 ? c.mask_p : 0.15;
  out.batch_size = c.batch_size > 0 ? c.batch_size : 32;
  out.epochs = c.epochs > 0 ? c.epochs : 10;
  out.steps = c.steps > 0 ? c.steps : 0;
  out.lr = c.lr > 0 ? c.lr : 5e-4;
  out.warmup_frac = c.warmup_frac >= 0 ? c.warmup_frac : 0.1;
  out.seed = c.seed;
  return out;
}

nlohmann::json engine_json(const uci::EngineConfig& e) {
  nlohmann::json j = {{"path", e.path},   {"threads", e.threads}, {"multipv", e.multipv},
                      {"depth", e.depth}};
  if (e.elo) j["elo"] = *e.elo;
  if (e.movetime_ms) j["movetime_ms"] = *e.movetime_ms;
  return j;
}

nlohmann::json model_json(const mlm::ModelConfig& m) {
  return {{"layers", m.layers}, {"heads", m.heads},     {"hidden", m.hidden},
          {"ffn", m.ffn},       {"max_seq", m.max_seq}, {"dropout", m.dropout}};
}

nlohmann::json train_json(const mlm::TrainConfig& t) {
  return {{"mask_p", t.mask_p}, {"batch_size", t.batch_size}, {"epochs", t.epochs},
          {"steps", t.steps},   {"lr", t.lr},                 {"warmup_frac", t.warmup_frac},
          {"seed", t.seed}};
}

void write_run_manifest(const std::string& path, const std::string& subcommand,
                        const nlohmann::json& config, uint64_t seed,
                        const std::vector<std::string>& inputs,
                        const std::vector<std::string>& outputs) {
  manifest::RunManifest m;
  m.subcommand = subcommand;
  m.config_json = config.dump();
  m.seed = seed;
  m.inputs = inputs;
  m.outputs = outputs;
  manifest::write(path, m);
}

std::vector<std::pair<char, char>> parse_schedule(const char* text) {
  if (text == nullptr) return {{'G', 'R'}, {'G', 'Q'}, {'Q', 'R'}};
  std::vector<std::pair<char, char>> schedule;
  std::string s(text);
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t comma = s.find(',', start);
    const std::string part = s.substr(start, comma == std::string::npos ? comma : comma - start);
    if (part.size() != 2 || std::string("GQR").find(part[0]) == std::string::npos ||
        std::string("GQR").find(part[1]) == std::string::npos)
      throw std::invalid_argument("bad pairing '" + part + "'; schedule looks like GR,GQ,QR");
    schedule.emplace_back(part[0], part[1]);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (schedule.empty()) throw std::invalid_argument("empty pairing schedule");
  return schedule;
}

}  // namespace

struct gml_position {
  chess::Position value;
};

struct gml_model {
  mlm::Params params;
  wordpiece::Vocab vocab;
};

extern "C" {

const char* gml_status_name(gml_status status) {
  switch (status) {
    case GML_OK: return "ok";
    case GML_ERR_ARGUMENT: return "invalid argument";
    case GML_ERR_IO: return "i/o error";
    case GML_ERR_PARSE: return "parse error";
    case GML_ERR_ENGINE: return "engine error";
    case GML_ERR_TRAINING: return "training error";
    case GML_ERR_STATE: return "state error";
    case GML_ERR_INTERNAL: return "internal error";
  }
  return "unknown";
}

const char* gml_last_error(void) { return g_last_error.c_str(); }

const char* gml_version(void) { return kVersion; }

/* --- nim ------------------------------------------------------------------ */

int32_t gml_nim_sum(const gml_nim_state* state) {
  if (state == nullptr) return -1;
  return state->piles[0] ^ state->piles[1] ^ state->piles[2];
}

gml_status gml_nim_guru_move(const gml_nim_state* state, gml_nim_move* out_move) {
  if (gml_status s = require(state && out_move, "state and out_move are required"); s != GML_OK)
    return s;
  return wrap([&] {
    const nim::State ns{{state->piles[0], state->piles[1], state->piles[2]}};
    if (!ns.valid(std::max({ns.piles[0], ns.piles[1], ns.piles[2], nim::kDefaultMaxPile})))
      throw std::invalid_argument("pile counts must be non-negative");
    const nim::Move m = nim::guru_move(ns);
    out_move->pile = m.pile;
    out_move->take = m.take;
  });
}

gml_status gml_nim_apply(const gml_nim_state* state, const gml_nim_move* move,
                         gml_nim_state* out_state) {
  if (gml_status s = require(state && move && out_state, "all arguments are required");
      s != GML_OK)
    return s;
  return wrap([&] {
    const nim::State ns{{state->piles[0], state->piles[1], state->piles[2]}};
    const nim::State next = nim::apply_move(ns, {move->pile, move->take});
    for (int i = 0; i < 3; ++i) out_state->piles[i] = next.piles[i];
  });
}

/* --- chess ----------------------------------------------------------------- */

gml_status gml_position_from_fen(const char* fen, gml_position** out_position) {
  if (gml_status s = require(fen && out_position, "fen and out_position are required");
      s != GML_OK)
    return s;
  return wrap([&] { *out_position = new gml_position{chess::Position::from_fen(fen)}; });
}

gml_status gml_position_start(gml_position** out_position) {
  if (gml_status s = require(out_position != nullptr, "out_position is required"); s != GML_OK)
    return s;
  return wrap([&] { *out_position = new gml_position{chess::Position::initial()}; });
}

gml_status gml_position_fen(const gml_position* position, char* buffer, size_t capacity) {
  if (gml_status s = require(position && buffer, "position and buffer are required");
      s != GML_OK)
    return s;
  return wrap([&] { copy_out(position->value.fen(), buffer, capacity); });
}

gml_status gml_position_legal_moves(const gml_position* position, char* buffer,
                                    size_t capacity) {
  if (gml_status s = require(position && buffer, "position and buffer are required");
      s != GML_OK)
    return s;
  return wrap([&] {
    std::string joined;
    for (const chess::Move& m : position->value.legal_moves()) {
      if (!joined.empty()) joined += ' ';
      joined += chess::format_move(m);
    }
    copy_out(joined, buffer, capacity);
  });
}

gml_status gml_position_apply(gml_position* position, const char* move) {
  if (gml_status s = require(position && move, "position and move are required"); s != GML_OK)
    return s;
  return wrap([&] { position->value = position->value.apply(chess::parse_move(move)); });
}

gml_status gml_position_perft(const gml_position* position, int32_t depth, uint64_t* out_nodes) {
  if (gml_status s = require(position && out_nodes && depth >= 0,
                             "position, out_nodes and depth >= 0 are required");
      s != GML_OK)
    return s;
  return wrap([&] { *out_nodes = chess::perft(position->value, depth); });
}

void gml_position_free(gml_position* position) { delete position; }

/* --- corpus ----------------------------------------------------------------- */

gml_status gml_nim_generate(const gml_nim_gen_config* config, const char* out_corpus,
                            const char* out_stats_json) {
  if (gml_status s = require(config && out_corpus, "config and out_corpus are required");
      s != GML_OK)
    return s;
  return wrap([&] {
    corpus::NimGenConfig gen;
    gen.games = config->games > 0 ? config->games : 30000;
    gen.variant = config->win_state_tags ? corpus::NimTagVariant::win_state
                                         : corpus::NimTagVariant::player_id;
    gen.noise_p = config->noise;
    gen.seed = config->seed;
    gen.randomized_starts = toggled_on(config->randomized_starts);
    gen.shuffle_labels = toggled_on(config->shuffle_labels);
    gen.schedule = parse_schedule(config->schedule);
    gen.q_episodes = config->q_episodes > 0 ? config->q_episodes : 300000;
    gen.max_pile = config->max_pile > 0 ? config->max_pile : nim::kDefaultMaxPile;

    const corpus::CorpusStats stats = corpus::gen_nim_corpus(gen, out_corpus);

    std::vector<std::string> outputs = {out_corpus};
    if (out_stats_json) {
      std::ofstream out(out_stats_json, std::ios::binary);
      if (!out) throw IoError("cannot open stats output: " + std::string(out_stats_json));
      out << stats.to_json() << '\n';
      outputs.push_back(out_stats_json);
    }
    std::string schedule_text;
    for (const auto& [a, b] : gen.schedule) {
      if (!schedule_text.empty()) schedule_text += ',';
      schedule_text += a;
      schedule_text += b;
    }
    write_run_manifest(std::string(out_corpus) + ".manifest.json", "nim-gen",
                       {{"games", gen.games},
                        {"variant", gen.variant == corpus::NimTagVariant::win_state
                                        ? "win-state" : "player-id"},
                        {"noise", gen.noise_p},
                        {"randomized_starts", gen.randomized_starts},
                        {"shuffle_labels", gen.shuffle_labels},
                        {"schedule", schedule_text},
                        {"q_episodes", gen.q_episodes},
                        {"max_pile", gen.max_pile}},
                       gen.seed, {}, outputs);
  });
}

gml_status gml_chess_generate(const gml_chess_gen_config* config, const char* out_corpus,
                              const char* out_stats_json) {
  if (gml_status s = require(config && out_corpus && config->engine.path,
                             "config, engine path and out_corpus are required");
      s != GML_OK)
    return s;
  return wrap([&] {
    corpus::ChessGenConfig gen;
    gen.games = config->games > 0 ? config->games : 100;
    gen.plies_per_game = config->plies_per_game > 0 ? config->plies_per_game : 6;
    gen.ply_limit = config->ply_limit > 0 ? config->ply_limit : 200;
    gen.seed = config->seed;
    gen.engine = resolve_engine(config->engine);

    const corpus::CorpusStats stats = corpus::gen_chess_corpus(gen, out_corpus);

    std::vector<std::string> outputs = {out_corpus};
    if (out_stats_json) {
      std::ofstream out(out_stats_json, std::ios::binary);
      if (!out) throw IoError("cannot open stats output: " + std::string(out_stats_json));
      out << stats.to_json() << '\n';
      outputs.push_back(out_stats_json);
    }
    write_run_manifest(std::string(out_corpus) + ".manifest.json", "chess-gen",
                       {{"games", gen.games},
                        {"plies_per_game", gen.plies_per_game},
                        {"ply_limit", gen.ply_limit},
                        {"engine", engine_json(gen.engine)}},
                       gen.seed, {}, outputs);
  });
}

gml_status gml_dataset_stats(const char* corpus_path, const char* out_stats_json, char* buffer,
                             size_t capacity) {
  if (gml_status s = require(corpus_path != nullptr, "corpus_path is required"); s != GML_OK)
    return s;
  return wrap([&] {
    const corpus::CorpusStats stats = corpus::dataset_stats(corpus_path);
    const std::string json = stats.to_json();
    if (out_stats_json) {
      std::ofstream out(out_stats_json, std::ios::binary);
      if (!out) throw IoError("cannot open stats output: " + std::string(out_stats_json));
      out << json << '\n';
    }
    copy_out(json, buffer, capacity);
  });
}

gml_status gml_split_corpus(const char* corpus_path, double test_fraction, uint64_t seed,
                            const char* out_train, const char* out_test) {
  if (gml_status s = require(corpus_path && out_train && out_test,
                             "corpus_path, out_train and out_test are required");
      s != GML_OK)
    return s;
  return wrap([&] {
    corpus::split_corpus(corpus_path, test_fraction, seed, out_train, out_test);
    write_run_manifest(std::string(out_train) + ".manifest.json", "split",
                       {{"test_fraction", test_fraction}}, seed, {corpus_path},
                       {out_train, out_test});
  });
}

/* --- tokenizer --------------------------------------------------------------- */

gml_status gml_tok_train(const gml_tok_train_config* config, const char* out_vocab_json) {
  if (gml_status s = require(config && out_vocab_json && config->corpus_paths &&
                                 config->corpus_count > 0,
                             "config with corpus paths and out_vocab_json are required");
      s != GML_OK)
    return s;
  return wrap([&] {
    std::vector<std::string> paths;
    for (size_t i = 0; i < config->corpus_count; ++i) {
      if (config->corpus_paths[i] == nullptr)
        throw std::invalid_argument("corpus path " + std::to_string(i) + " is null");
      paths.emplace_back(config->corpus_paths[i]);
    }
    wordpiece::TrainConfig tc;
    tc.max_vocab = config->max_vocab > 0 ? config->max_vocab : 200;
    tc.min_frequency = config->min_frequency > 0 ? config->min_frequency : 2;

    const wordpiece::Vocab vocab = wordpiece::train(paths, tc);
    vocab.save(out_vocab_json);
    write_run_manifest(std::string(out_vocab_json) + ".manifest.json", "tok-train",
                       {{"max_vocab", tc.max_vocab},
                        {"min_frequency", tc.min_frequency},
                        {"vocab_size", vocab.size()}},
                       0, paths, {out_vocab_json});
  });
}

/* --- mlm ------------------------------------------------------------------------ */

gml_status gml_mlm_train(const gml_mlm_train_config* config, const char* out_checkpoint,
                         const char* out_loss_csv) {
  if (gml_status s = require(config && out_checkpoint && config->corpus_path &&
                                 config->vocab_path,
                             "config with corpus/vocab paths and out_checkpoint are required");
      s != GML_OK)
    return s;
  return wrap([&] {
    const wordpiece::Vocab vocab = wordpiece::Vocab::load(config->vocab_path);
    std::vector<std::string> lines = corpus::read_records(config->corpus_path);
    if (lines.empty()) throw std::invalid_argument("training corpus is empty");

    const double test_fraction = config->test_fraction == 0 ? 0.2 : config->test_fraction;
    std::vector<std::string> heldout;
    if (test_fraction > 0) {
      if (test_fraction >= 1.0) throw std::invalid_argument("test fraction must be < 1");
      Rng rng(Rng::derive(config->train.seed, 0x5151));
      for (std::size_t i = lines.size(); i > 1; --i)
        std::swap(lines[i - 1], lines[rng.uniform_int(0, static_cast<int64_t>(i) - 1)]);
      const auto test_n = static_cast<std::size_t>(
          std::llround(test_fraction * static_cast<double>(lines.size())));
      heldout.assign(lines.begin(), lines.begin() + static_cast<long>(test_n));
      lines.erase(lines.begin(), lines.begin() + static_cast<long>(test_n));
    }
    if (lines.empty()) throw std::invalid_argument("nothing left to train on after the split");

    mlm::ModelConfig model_config = resolve_model(config->model, 32);
    model_config.vocab_size = vocab.size();
    const mlm::TrainConfig train_config = resolve_train(config->train);

    mlm::Params params = mlm::init_params(model_config, train_config.seed);
    const mlm::TrainResult result = mlm::train(params, lines, vocab, train_config);
    mlm::save_checkpoint(out_checkpoint, params);

    std::vector<std::string> outputs = {out_checkpoint};
    if (!heldout.empty()) {
      const std::string heldout_path = std::string(out_checkpoint) + ".heldout.txt";
      std::ofstream out(heldout_path, std::ios::binary);
      if (!out) throw IoError("cannot open held-out output: " + heldout_path);
      for (const std::string& line : heldout) out << line << '\n';
      outputs.push_back(heldout_path);
    }
    if (out_loss_csv) {
      std::ofstream out(out_loss_csv, std::ios::binary);
      if (!out) throw IoError("cannot open loss CSV: " + std::string(out_loss_csv));
      out << "step,loss,lr\n";
      for (std::size_t i = 0; i < result.losses.size(); ++i)
        out << (i + 1) << ',' << result.losses[i] << ',' << result.lrs[i] << '\n';
      outputs.push_back(out_loss_csv);
    }
    write_run_manifest(std::string(out_checkpoint) + ".manifest.json", "mlm-train",
                       {{"model", model_json(model_config)},
                        {"train", train_json(train_config)},
                        {"test_fraction", test_fraction},
                        {"train_lines", lines.size()},
                        {"heldout_lines", heldout.size()}},
                       train_config.seed, {config->corpus_path, config->vocab_path}, outputs);
  });
}

gml_status gml_model_load(const char* checkpoint_path, const char* vocab_path,
                          gml_model** out_model) {
  if (gml_status s = require(checkpoint_path && vocab_path && out_model,
                             "checkpoint_path, vocab_path and out_model are required");
      s != GML_OK)
    return s;
  return wrap([&] {
    auto model = std::make_unique<gml_model>();
    model->params = mlm::load_checkpoint(checkpoint_path);
    model->vocab = wordpiece::Vocab::load(vocab_path);
    if (model->params.config.vocab_size != model->vocab.size())
      throw std::invalid_argument("checkpoint vocab size " +
                                  std::to_string(model->params.config.vocab_size) +
                                  " does not match vocab file size " +
                                  std::to_string(model->vocab.size()));
    *out_model = model.release();
  });
}

void gml_model_free(gml_model* model) { delete model; }

gml_status gml_model_fill_mask(const gml_model* model, const char* text, char* token_buffer,
                               size_t capacity, double* out_probability) {
  if (gml_status s = require(model && text && token_buffer, "model, text and buffer required");
      s != GML_OK)
    return s;
  return wrap([&] {
    const auto ranked = mlm::fill_mask(model->params, model->vocab, text, 1);
    copy_out(ranked.front().token, token_buffer, capacity);
    if (out_probability) *out_probability = ranked.front().prob;
  });
}

gml_status gml_mlm_gradient_check(const gml_model_config* config, int32_t vocab_size,
                                  uint64_t seed, double* out_max_rel_error) {
  if (gml_status s = require(config && out_max_rel_error && vocab_size >= 6,
                             "config, out value and vocab_size >= 6 are required");
      s != GML_OK)
    return s;
  return wrap([&] {
    mlm::ModelConfig mc = resolve_model(*config, 16);
    mc.vocab_size = vocab_size;
    *out_max_rel_error = mlm::gradient_check(mc, seed).max_rel_error;
  });
}

/* --- arena ------------------------------------------------------------------------ */

gml_status gml_nim_arena(const gml_nim_arena_config* config, const char* out_dir) {
  if (gml_status s = require(config && out_dir, "config and out_dir are required"); s != GML_OK)
    return s;
  return wrap([&] {
    arena::RosterConfig rc;
    if (config->noise_levels && config->noise_level_count > 0)
      rc.noise_levels.assign(config->noise_levels,
                             config->noise_levels + config->noise_level_count);
    rc.games_per_pairing = config->games_per_pairing > 0 ? config->games_per_pairing : 1000;
    rc.corpus_games = config->corpus_games > 0 ? config->corpus_games : 2000;
    rc.q_episodes = config->q_episodes > 0 ? config->q_episodes : 300000;
    if (config->id_model_tags) {
      rc.id_model_tags.clear();
      for (const char* c = config->id_model_tags; *c; ++c) {
        if (std::string("GQR").find(*c) == std::string::npos)
          throw std::invalid_argument("id model tags must be drawn from GQR");
        rc.id_model_tags.push_back(*c);
      }
    }
    rc.include_win_state = toggled_on(config->include_win_state);
    rc.include_base_pairings = toggled_on(config->include_base_pairings);
    rc.recipe.model = resolve_model(config->model, 32);
    rc.recipe.train = resolve_train(config->train);
    if (config->tok_max_vocab > 0) rc.recipe.tokenizer.max_vocab = config->tok_max_vocab;
    if (config->tok_min_frequency > 0)
      rc.recipe.tokenizer.min_frequency = config->tok_min_frequency;
    if (config->test_fraction > 0 && config->test_fraction < 1)
      rc.recipe.test_fraction = config->test_fraction;
    else if (config->test_fraction < 0)
      rc.recipe.test_fraction = 0;
    rc.seed = config->seed;
    rc.work_dir = (fs::path(out_dir) / "work").string();

    const arena::RosterResult result = arena::roster_tournament(rc);
    report::write_roster_outputs(result, out_dir);

    nlohmann::json levels = nlohmann::json::array();
    for (double p : rc.noise_levels) levels.push_back(p);
    write_run_manifest((fs::path(out_dir) / "nim_arena.manifest.json").string(), "nim-arena",
                       {{"noise_levels", levels},
                        {"games_per_pairing", rc.games_per_pairing},
                        {"corpus_games", rc.corpus_games},
                        {"q_episodes", rc.q_episodes},
                        {"id_model_tags", std::string(rc.id_model_tags.begin(),
                                                      rc.id_model_tags.end())},
                        {"include_win_state", rc.include_win_state},
                        {"model", model_json(rc.recipe.model)},
                        {"train", train_json(rc.recipe.train)}},
                       rc.seed, {},
                       {(fs::path(out_dir) / "nim_roster.csv").string(),
                        (fs::path(out_dir) / "nim_roster.report.json").string()});
  });
}

gml_status gml_nim_sweep(const gml_nim_sweep_config* config, const char* out_dir) {
  if (gml_status s = require(config && out_dir, "config and out_dir are required"); s != GML_OK)
    return s;
  return wrap([&] {
    arena::SweepConfig sc;
    if (config->match_sizes && config->match_size_count > 0)
      sc.match_sizes.assign(config->match_sizes,
                            config->match_sizes + config->match_size_count);
    sc.eval_games = config->eval_games > 0 ? config->eval_games : 1000;
    sc.recipe.model = resolve_model(config->model, 32);
    sc.recipe.train = resolve_train(config->train);
    if (config->tok_max_vocab > 0) sc.recipe.tokenizer.max_vocab = config->tok_max_vocab;
    if (config->tok_min_frequency > 0)
      sc.recipe.tokenizer.min_frequency = config->tok_min_frequency;
    if (config->test_fraction > 0 && config->test_fraction < 1)
      sc.recipe.test_fraction = config->test_fraction;
    else if (config->test_fraction < 0)
      sc.recipe.test_fraction = 0;
    sc.seed = config->seed;
    sc.work_dir = (fs::path(out_dir) / "work").string();

    const auto points = arena::match_size_sweep(sc);
    report::write_sweep_outputs(points, out_dir);

    nlohmann::json sizes = nlohmann::json::array();
    for (int m : sc.match_sizes) sizes.push_back(m);
    write_run_manifest((fs::path(out_dir) / "nim_sweep.manifest.json").string(), "nim-sweep",
                       {{"match_sizes", sizes},
                        {"eval_games", sc.eval_games},
                        {"model", model_json(sc.recipe.model)},
                        {"train", train_json(sc.recipe.train)}},
                       sc.seed, {},
                       {(fs::path(out_dir) / "nim_sweep.csv").string(),
                        (fs::path(out_dir) / "nim_sweep.report.json").string()});
  });
}

gml_status gml_chess_eval(const gml_chess_eval_config* config, const char* out_dir) {
  if (gml_status s = require(config && out_dir && config->checkpoint_path &&
                                 config->vocab_path && config->engine.path,
                             "config with engine, checkpoint and vocab paths is required");
      s != GML_OK)
    return s;
  return wrap([&] {
    const mlm::Params params = mlm::load_checkpoint(config->checkpoint_path);
    const wordpiece::Vocab vocab = wordpiece::Vocab::load(config->vocab_path);
    if (params.config.vocab_size != vocab.size())
      throw std::invalid_argument("checkpoint and vocab sizes do not match");

    arena::ChessEvalConfig ec;
    ec.engine = resolve_engine(config->engine);
    ec.games = config->games > 0 ? config->games : 20;
    ec.ply_limit = config->ply_limit > 0 ? config->ply_limit : 200;
    ec.model_plays_white = config->model_plays_black == 0;
    ec.seed = config->seed;

    const arena::ChessEvalResult result = arena::play_chess_vs_engine(params, vocab, ec);
    report::write_chess_eval_outputs(result, out_dir);

    write_run_manifest((fs::path(out_dir) / "chess_eval.manifest.json").string(), "chess-eval",
                       {{"games", ec.games},
                        {"ply_limit", ec.ply_limit},
                        {"model_plays_white", ec.model_plays_white},
                        {"engine", engine_json(ec.engine)}},
                       ec.seed, {config->checkpoint_path, config->vocab_path},
                       {(fs::path(out_dir) / "chess_eval.report.json").string()});
  });
}

gml_status gml_report(const char* report_json_path, const char* out_dir) {
  if (gml_status s = require(report_json_path && out_dir,
                             "report_json_path and out_dir are required");
      s != GML_OK)
    return s;
  return wrap([&] { report::regenerate(report_json_path, out_dir); });
}

} /* extern "C" */
