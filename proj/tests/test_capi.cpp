#include "gamelab.h"

#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

namespace fs = std::filesystem;

namespace {

std::string temp_path(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "gamelab_capi_tests";
  fs::create_directories(dir);
  return (dir / name).string();
}

}  // namespace

TEST_CASE("version and status strings") {
  CHECK(std::string(gml_version()) == "0.1.0");
  CHECK(std::string(gml_status_name(GML_OK)) == "ok");
  CHECK(std::string(gml_status_name(GML_ERR_PARSE)) == "parse error");
}

TEST_CASE("nim primitives over the C ABI") {
  const gml_nim_state state{{10, 10, 10}};
  CHECK(gml_nim_sum(&state) == 10);

  gml_nim_move move{};
  REQUIRE(gml_nim_guru_move(&state, &move) == GML_OK);
  CHECK(move.pile == 0);
  CHECK(move.take == 10);

  gml_nim_state next{};
  REQUIRE(gml_nim_apply(&state, &move, &next) == GML_OK);
  CHECK(next.piles[0] == 0);
  CHECK(next.piles[1] == 10);

  const gml_nim_state empty{{0, 0, 0}};
  CHECK(gml_nim_guru_move(&empty, &move) == GML_ERR_STATE);
  CHECK(std::string(gml_last_error()).find("terminal") != std::string::npos);

  const gml_nim_move illegal{0, 99};
  CHECK(gml_nim_apply(&state, &illegal, &next) == GML_ERR_ARGUMENT);
  CHECK(gml_nim_guru_move(nullptr, &move) == GML_ERR_ARGUMENT);
}

TEST_CASE("chess positions over the C ABI") {
  gml_position* pos = nullptr;
  REQUIRE(gml_position_start(&pos) == GML_OK);

  char fen[128];
  REQUIRE(gml_position_fen(pos, fen, sizeof(fen)) == GML_OK);
  CHECK(std::string(fen) == "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1");

  uint64_t nodes = 0;
  REQUIRE(gml_position_perft(pos, 3, &nodes) == GML_OK);
  CHECK(nodes == 8902);

  char moves[2048];
  REQUIRE(gml_position_legal_moves(pos, moves, sizeof(moves)) == GML_OK);
  CHECK(std::string(moves).find("e2e4") != std::string::npos);

  REQUIRE(gml_position_apply(pos, "e2e4") == GML_OK);
  REQUIRE(gml_position_fen(pos, fen, sizeof(fen)) == GML_OK);
  CHECK(std::string(fen).find(" b KQkq e3") != std::string::npos);
  CHECK(gml_position_apply(pos, "e2e4") == GML_ERR_ARGUMENT);  // no pawn there now

  char tiny[4];
  CHECK(gml_position_fen(pos, tiny, sizeof(tiny)) == GML_ERR_ARGUMENT);
  gml_position_free(pos);

  gml_position* bad = nullptr;
  CHECK(gml_position_from_fen("xyz", &bad) == GML_ERR_PARSE);
  CHECK(std::string(gml_last_error()).find("FEN") != std::string::npos);
}

TEST_CASE("nim pipeline through the C ABI: gen -> stats -> split -> tok -> mlm -> fill") {
  const std::string corpus = temp_path("nim.txt");
  const std::string stats_json = temp_path("nim.stats.json");

  gml_nim_gen_config gen{};
  gen.games = 300;
  gen.noise = 0.0;
  gen.seed = 11;
  gen.schedule = "GR";
  REQUIRE(gml_nim_generate(&gen, corpus.c_str(), stats_json.c_str()) == GML_OK);
  CHECK(fs::exists(corpus));
  CHECK(fs::exists(stats_json));
  CHECK(fs::exists(corpus + ".manifest.json"));

  char buffer[1024];
  REQUIRE(gml_dataset_stats(corpus.c_str(), nullptr, buffer, sizeof(buffer)) == GML_OK);
  CHECK(std::string(buffer).find("\"number_of_games\": 300") != std::string::npos);

  const std::string train_part = temp_path("train.txt"), test_part = temp_path("test.txt");
  REQUIRE(gml_split_corpus(corpus.c_str(), 0.2, 1, train_part.c_str(), test_part.c_str()) ==
          GML_OK);
  CHECK(fs::exists(train_part));
  CHECK(fs::exists(test_part));
  CHECK(gml_split_corpus(corpus.c_str(), 1.5, 1, train_part.c_str(), test_part.c_str()) ==
        GML_ERR_ARGUMENT);

  const std::string vocab = temp_path("vocab.json");
  const char* corpora[] = {corpus.c_str()};
  gml_tok_train_config tok{};
  tok.corpus_paths = corpora;
  tok.corpus_count = 1;
  REQUIRE(gml_tok_train(&tok, vocab.c_str()) == GML_OK);
  CHECK(fs::exists(vocab));

  const std::string ckpt = temp_path("model.ckpt");
  const std::string loss_csv = temp_path("loss.csv");
  gml_mlm_train_config mt{};
  mt.corpus_path = corpus.c_str();
  mt.vocab_path = vocab.c_str();
  mt.model.layers = 1;
  mt.model.heads = 2;
  mt.model.hidden = 16;
  mt.model.ffn = 32;
  mt.train.steps = 40;
  mt.train.batch_size = 16;
  mt.train.seed = 5;
  REQUIRE(gml_mlm_train(&mt, ckpt.c_str(), loss_csv.c_str()) == GML_OK);
  CHECK(fs::exists(ckpt));
  CHECK(fs::exists(loss_csv));
  CHECK(fs::exists(ckpt + ".heldout.txt"));
  CHECK(fs::exists(ckpt + ".manifest.json"));
  {
    std::ifstream loss(loss_csv);
    std::string header;
    std::getline(loss, header);
    CHECK(header == "step,loss,lr");
  }

  gml_model* model = nullptr;
  REQUIRE(gml_model_load(ckpt.c_str(), vocab.c_str(), &model) == GML_OK);
  char token[64];
  double prob = 0.0;
  REQUIRE(gml_model_fill_mask(model, "a5/b5/c5 G - [MASK]", token, sizeof(token), &prob) ==
          GML_OK);
  CHECK(std::strlen(token) > 0);
  CHECK(prob > 0.0);
  CHECK(prob <= 1.0);
  CHECK(gml_model_fill_mask(model, "a5/b5/c5 G - a1", token, sizeof(token), &prob) ==
        GML_ERR_ARGUMENT);
  gml_model_free(model);

  CHECK(gml_model_load("/does/not/exist.ckpt", vocab.c_str(), &model) == GML_ERR_IO);
}

TEST_CASE("gradient check through the C ABI") {
  gml_model_config config{};
  config.layers = 1;
  config.heads = 2;
  config.hidden = 8;
  config.ffn = 16;
  config.max_seq = 8;
  double err = 1.0;
  REQUIRE(gml_mlm_gradient_check(&config, 12, 3, &err) == GML_OK);
  CHECK(err <= 1e-4);
}

TEST_CASE("chess generation through the C ABI") {
  gml_chess_gen_config cfg{};
  cfg.engine.path = GAMELAB_ENGINE_PATH;
  cfg.engine.depth = 1;
  cfg.games = 2;
  cfg.plies_per_game = 6;
  cfg.seed = 9;
  const std::string corpus = temp_path("chess.txt");
  REQUIRE(gml_chess_generate(&cfg, corpus.c_str(), nullptr) == GML_OK);
  CHECK(fs::exists(corpus));
  CHECK(fs::exists(corpus + ".manifest.json"));

  char buffer[1024];
  REQUIRE(gml_dataset_stats(corpus.c_str(), nullptr, buffer, sizeof(buffer)) == GML_OK);
  CHECK(std::string(buffer).find("\"number_of_games\": 2") != std::string::npos);

  gml_chess_gen_config bad = cfg;
  bad.engine.path = "/nonexistent/engine";
  CHECK(gml_chess_generate(&bad, corpus.c_str(), nullptr) == GML_ERR_ENGINE);
}

TEST_CASE("argument validation reports through gml_last_error") {
  CHECK(gml_nim_generate(nullptr, "x", nullptr) == GML_ERR_ARGUMENT);
  CHECK(std::string(gml_last_error()).find("required") != std::string::npos);
  CHECK(gml_report("/missing/report.json", temp_path("out").c_str()) == GML_ERR_IO);
}
