#include "gamelab/arena.hpp"

#include <filesystem>
#include <iostream>
#include <stdexcept>

#include "gamelab/errors.hpp"
#include "gamelab/rng.hpp"

namespace gamelab::arena {

NimAgent guru_agent() {
  return {"guru", 'G', [](const nim::State& s, Rng&) { return nim::guru_move(s); }, false, nullptr};
}

NimAgent random_agent() {
  return {"random", 'R', [](const nim::State& s, Rng& rng) { return nim::random_move(s, rng); },
          false, nullptr};
}

NimAgent q_agent(std::shared_ptr<const nim::QTable> table) {
  return {"qlearner", 'Q',
          [table](const nim::State& s, Rng&) { return table->greedy_move(s); }, false, nullptr};
}

NimAgent model_nim_agent(std::shared_ptr<const mlm::Params> params,
                         std::shared_ptr<const wordpiece::Vocab> vocab, char tag) {
  auto counters = std::make_shared<ModelCounters>();
  NimAgent agent;
  agent.name = std::string("bert-") + tag;
  agent.tag = tag;
  agent.is_model = true;
  agent.counters = counters;
  agent.move = [params, vocab, tag, counters](const nim::State& s, Rng& rng) -> nim::Move {
    const std::string query = corpus::encode_nim_state(s) + " " + std::string(1, tag) + " - [MASK]";
    const auto ranked = mlm::fill_mask(*params, *vocab, query);
    ++counters->moves;
    for (std::size_t i = 0; i < ranked.size(); ++i) {
      nim::Move move;
      try {
        move = corpus::decode_nim_move(ranked[i].token);
      } catch (const ParseError&) {
        continue;
      }
      if (!nim::is_legal_move(s, move)) continue;
      if (i != 0) ++counters->top1_invalid;
      return move;
    }
    ++counters->top1_invalid;
    ++counters->random_fallback;
    const auto moves = nim::legal_moves(s);
    return moves[rng.uniform_int(0, static_cast<int64_t>(moves.size()) - 1)];
  };
  return agent;
}

PairingOutcome play_nim_match(const NimAgent& a, const NimAgent& b, int64_t games,
                              uint64_t seed, int max_pile) {
  if (games < 2 || games % 2 != 0)
    throw std::invalid_argument("match games must be even so both agents take the first seat");

  const int64_t invalid_a0 = a.counters ? a.counters->top1_invalid : 0;
  const int64_t invalid_b0 = b.counters ? b.counters->top1_invalid : 0;

  PairingOutcome out;
  out.agent_a = a.name;
  out.agent_b = b.name;
  out.games = games;
  for (int64_t g = 0; g < games; ++g) {
    Rng rng(Rng::derive(seed, static_cast<uint64_t>(g)));
    const nim::State start = nim::random_start(rng, max_pile);
    const bool a_first = g % 2 == 0;
    const NimAgent& first = a_first ? a : b;
    const NimAgent& second = a_first ? b : a;
    const nim::GameRecord record =
        nim::play_game(first.move, first.tag, second.move, second.tag, start, 0.0, rng);
    const bool first_won = record.winner == nim::Seat::first;
    const bool a_won = a_first == first_won;
    if (a_won) {
      ++out.wins_a;
      if (a_first) ++out.wins_a_as_first;
    } else {
      ++out.wins_b;
      if (!a_first) ++out.wins_b_as_first;
    }
  }
  out.invalid_a = (a.counters ? a.counters->top1_invalid : 0) - invalid_a0;
  out.invalid_b = (b.counters ? b.counters->top1_invalid : 0) - invalid_b0;
  return out;
}

NimModelBundle train_nim_model(const std::string& corpus_path, const NimTrainRecipe& recipe,
                               uint64_t seed) {
  auto vocab = std::make_shared<wordpiece::Vocab>(
      wordpiece::train({corpus_path}, recipe.tokenizer));

  mlm::ModelConfig model_config = recipe.model;
  model_config.vocab_size = vocab->size();

  auto params = std::make_shared<mlm::Params>(mlm::init_params(model_config, seed));
  mlm::TrainConfig train_config = recipe.train;
  train_config.seed = Rng::derive(seed, 0x7a11);
  std::vector<std::string> lines = corpus::read_records(corpus_path);
  if (recipe.test_fraction > 0 && recipe.test_fraction < 1 && lines.size() > 4) {
    Rng rng(Rng::derive(train_config.seed, 0x5151));
    for (std::size_t i = lines.size(); i > 1; --i)
      std::swap(lines[i - 1], lines[rng.uniform_int(0, static_cast<int64_t>(i) - 1)]);
    const auto test_n = static_cast<std::size_t>(
        recipe.test_fraction * static_cast<double>(lines.size()));
    lines.erase(lines.begin(), lines.begin() + static_cast<long>(test_n));
  }
  mlm::train(*params, lines, *vocab, train_config);
  return {vocab, params};
}

RosterResult roster_tournament(const RosterConfig& config) {
  namespace fs = std::filesystem;
  if (config.work_dir.empty()) throw std::invalid_argument("roster requires a work directory");
  fs::create_directories(config.work_dir);

  auto q_table = std::make_shared<nim::QTable>(nim::QConfig{.max_pile = config.max_pile});
  {
    Rng q_rng(Rng::derive(config.seed, 0x71));
    q_table->train(config.q_episodes,
                   [](const nim::State& s, Rng& rng) { return nim::random_move(s, rng); }, q_rng);
  }

  RosterResult result;
  for (std::size_t li = 0; li < config.noise_levels.size(); ++li) {
    const double noise = config.noise_levels[li];
    std::string level_name = std::to_string(noise);
    level_name.erase(level_name.find_last_not_of('0') + 1);
    if (!level_name.empty() && level_name.back() == '.') level_name.pop_back();
    for (char& c : level_name)
      if (c == '.') c = '_';

    const uint64_t level_seed = Rng::derive(config.seed, 0xA000 + li);

    corpus::NimGenConfig gen;
    gen.games = config.corpus_games;
    gen.noise_p = noise;
    gen.seed = Rng::derive(level_seed, 1);
    gen.max_pile = config.max_pile;
    gen.variant = corpus::NimTagVariant::player_id;
    const std::string id_corpus =
        (fs::path(config.work_dir) / ("nim_id_p" + level_name + ".txt")).string();
    corpus::gen_nim_corpus(gen, id_corpus, q_table.get());
    const NimModelBundle id_model =
        train_nim_model(id_corpus, config.recipe, Rng::derive(level_seed, 2));

    NimModelBundle wx_model;
    if (config.include_win_state) {
      gen.variant = corpus::NimTagVariant::win_state;
      gen.seed = Rng::derive(level_seed, 3);
      const std::string wx_corpus =
          (fs::path(config.work_dir) / ("nim_wx_p" + level_name + ".txt")).string();
      corpus::gen_nim_corpus(gen, wx_corpus, q_table.get());
      wx_model = train_nim_model(wx_corpus, config.recipe, Rng::derive(level_seed, 4));
    }

    std::vector<NimAgent> base = {guru_agent(), random_agent(), q_agent(q_table)};
    std::vector<NimAgent> models;
    for (char tag : config.id_model_tags)
      models.push_back(model_nim_agent(id_model.params, id_model.vocab, tag));
    if (config.include_win_state)
      models.push_back(model_nim_agent(wx_model.params, wx_model.vocab, 'W'));

    std::vector<std::pair<const NimAgent*, const NimAgent*>> pairings;
    for (const NimAgent& m : models)
      for (const NimAgent& b : base) pairings.emplace_back(&m, &b);
    if (config.include_base_pairings)
      for (std::size_t i = 0; i < base.size(); ++i)
        for (std::size_t j = i + 1; j < base.size(); ++j)
          pairings.emplace_back(&base[i], &base[j]);

    for (std::size_t pi = 0; pi < pairings.size(); ++pi) {
      const PairingOutcome outcome =
          play_nim_match(*pairings[pi].first, *pairings[pi].second, config.games_per_pairing,
                         Rng::derive(level_seed, 0x100 + pi), config.max_pile);
      result.rows.push_back({noise, outcome.agent_a, outcome.agent_b, outcome.games,
                             outcome.wins_a, outcome.wins_b, outcome.invalid_a,
                             outcome.invalid_b});
      std::cerr << "roster p=" << noise << " " << outcome.agent_a << " vs " << outcome.agent_b
                << ": " << outcome.wins_a << "/" << outcome.wins_b << "\n";
    }
  }
  return result;
}

std::vector<SweepPoint> match_size_sweep(const SweepConfig& config) {
  namespace fs = std::filesystem;
  if (config.work_dir.empty()) throw std::invalid_argument("sweep requires a work directory");
  fs::create_directories(config.work_dir);

  std::vector<SweepPoint> points;
  for (std::size_t mi = 0; mi < config.match_sizes.size(); ++mi) {
    const int m = config.match_sizes[mi];
    if (m < 1) throw std::invalid_argument("match sizes must be >= 1");
    const uint64_t point_seed = Rng::derive(config.seed, 0xB000 + mi);

    corpus::NimGenConfig gen;
    gen.games = 2 * static_cast<int64_t>(m);  // m Guru-first + m random-first
    gen.variant = corpus::NimTagVariant::player_id;
    gen.noise_p = 0.0;
    gen.schedule = {{'G', 'R'}};
    gen.shuffle_labels = config.shuffle_labels;
    gen.max_pile = config.max_pile;
    gen.seed = Rng::derive(point_seed, 1);
    const std::string corpus_path =
        (fs::path(config.work_dir) / ("nim_sweep_m" + std::to_string(m) + ".txt")).string();
    corpus::gen_nim_corpus(gen, corpus_path);

    const NimModelBundle bundle =
        train_nim_model(corpus_path, config.recipe, Rng::derive(point_seed, 2));
    const NimAgent model = model_nim_agent(bundle.params, bundle.vocab, 'G');
    const NimAgent rnd = random_agent();
    const PairingOutcome outcome =
        play_nim_match(model, rnd, config.eval_games, Rng::derive(point_seed, 3), config.max_pile);

    SweepPoint point;
    point.match_size = m;
    point.games = outcome.games;
    point.win_rate = static_cast<double>(outcome.wins_a) / static_cast<double>(outcome.games);
    point.invalid = outcome.invalid_a;
    point.seed = point_seed;
    points.push_back(point);
    std::cerr << "sweep m=" << m << ": win rate " << point.win_rate << "\n";
  }
  return points;
}

ChessEvalResult play_chess_vs_engine(const mlm::Params& params, const wordpiece::Vocab& vocab,
                                     const ChessEvalConfig& config) {
  ChessEvalResult result;
  result.validity.assign(static_cast<std::size_t>(config.ply_limit), {0, 0});

  uci::EngineSession session = uci::EngineSession::connect(config.engine);
  const chess::Color model_color =
      config.model_plays_white ? chess::Color::white : chess::Color::black;

  for (int64_t game = 0; game < config.games; ++game) {
    session.set_seed(Rng::derive(config.seed, static_cast<uint64_t>(game)));
    try {
      session.new_game();
    } catch (const EngineError& e) {
      std::cerr << "chess-eval: game " << game << " aborted at setup: " << e.what() << "\n";
      session.close();
      session = uci::EngineSession::connect(config.engine);
      continue;
    }

    chess::Position pos = chess::Position::initial();
    int plies = 0;
    bool aborted = false;
    chess::GameStatus status = chess::GameStatus::ongoing;
    while ((status = chess::game_status(pos, plies, config.ply_limit)) ==
           chess::GameStatus::ongoing) {
      chess::Move move;
      try {
        if (pos.side_to_move() == model_color) {
          const auto ranked = mlm::fill_mask(params, vocab, pos.fen() + " [MOVESEP] [MASK]", 1);
          ++result.model_moves;
          auto& bucket = result.validity[static_cast<std::size_t>(plies)];
          ++bucket[1];
          bool valid = false;
          chess::Move predicted;
          try {
            predicted = chess::parse_move(ranked.front().token);
            valid = pos.is_legal(predicted);
          } catch (const ParseError&) {
            valid = false;
          }
          if (valid) {
            ++bucket[0];
            ++result.valid_moves;
            move = predicted;
          } else {
            move = session.best_move(pos);  // engine move substituted
          }
        } else {
          move = session.best_move(pos);
        }
      } catch (const EngineError& e) {
        std::cerr << "chess-eval: game " << game << " aborted: " << e.what() << "\n";
        aborted = true;
        break;
      }
      pos = pos.apply_unchecked(move);
      ++plies;
    }
    if (aborted) {
      if (!session.connected()) session = uci::EngineSession::connect(config.engine);
      continue;
    }
    result.game_plies.push_back(plies);
    result.statuses.push_back(status);
  }
  session.close();
  return result;
}

}  // namespace gamelab::arena
