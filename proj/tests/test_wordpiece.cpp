#include "gamelab/wordpiece.hpp"

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "gamelab/corpus.hpp"
#include "gamelab/errors.hpp"

using namespace gamelab;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "gamelab_wordpiece_tests";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("pretokenize splits whitespace and punctuation") {
  CHECK(wordpiece::pretokenize("a10/b10/c10 G - a10") ==
        std::vector<std::string>{"a10", "/", "b10", "/", "c10", "G", "-", "a10"});
  CHECK(wordpiece::pretokenize("1 [MOVESEP] f2f4", /*keep_specials=*/false) ==
        std::vector<std::string>{"1", "[", "MOVESEP", "]", "f2f4"});
  CHECK(wordpiece::pretokenize("G - [MASK]") ==
        std::vector<std::string>{"G", "-", "[MASK]"});
  CHECK(wordpiece::pretokenize("  ") == std::vector<std::string>{});
}

// The spec's one-line trainer oracle, merge by merge:
//   words: a10 x2, / x2, b10, c10, G, -
//   merge 1: (##1,##0) -> ##10   (score tie at 0.25; smallest merged token)
//   merge 2: (a,##10)  -> a10
//   merge 3: (b,##10)  -> b10    (score 0.5 tie with c10)
//   merge 4: (c,##10)  -> c10
TEST_CASE("single-line training reproduces the hand-run merge sequence") {
  const wordpiece::Vocab vocab =
      wordpiece::train_from_lines({"a10/b10/c10 G - a10"}, {.max_vocab = 50, .min_frequency = 1});
  const std::vector<std::string> expected = {
      "[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]",            // specials
      "-", "/", "0", "1", "G", "a", "b", "c",                  // observed chars
      "##0", "##1",                                            // continuation forms
      "##10", "a10", "b10", "c10"};                            // merges, in order
  CHECK(vocab.tokens == expected);
}

TEST_CASE("min_frequency gates merges") {
  const wordpiece::Vocab vocab =
      wordpiece::train_from_lines({"a10/b10/c10 G - a10"}, {.max_vocab = 50, .min_frequency = 2});
  // Only the pieces of "a10" (frequency 2) can merge.
  CHECK(vocab.id_of("a10") >= 0);
  CHECK(vocab.id_of("b10") == -1);
  CHECK(vocab.id_of("c10") == -1);
}

TEST_CASE("special token ids are pinned") {
  const wordpiece::Vocab vocab = wordpiece::train_from_lines({"a1/b1/c1 G - a1"}, {.max_vocab = 64});
  CHECK(vocab.tokens[0] == "[PAD]");
  CHECK(vocab.tokens[1] == "[UNK]");
  CHECK(vocab.tokens[2] == "[CLS]");
  CHECK(vocab.tokens[3] == "[SEP]");
  CHECK(vocab.tokens[4] == "[MASK]");
}

TEST_CASE("training on a generated nim corpus converges to whole-word pieces") {
  corpus::NimGenConfig cfg;
  cfg.games = 400;
  cfg.schedule = {{'G', 'R'}};
  cfg.seed = 17;
  const auto path = temp_file("nim.txt");
  corpus::gen_nim_corpus(cfg, path.string());

  const wordpiece::Vocab vocab = wordpiece::train({path.string()}, {.max_vocab = 200});
  // 5 specials + 17 chars + 10 continuations + 33 whole words = 65.
  CHECK(vocab.size() >= 55);
  CHECK(vocab.size() <= 70);
  for (const char* token : {"a10", "b10", "c10", "a0", "c7", "##0", "##9", "G", "R", "/", "-"})
    CHECK(vocab.id_of(token) >= 0);

  SUBCASE("training is deterministic") {
    const wordpiece::Vocab again = wordpiece::train({path.string()}, {.max_vocab = 200});
    CHECK(again.tokens == vocab.tokens);
  }

  SUBCASE("round-trip identity on every corpus line") {
    std::ifstream in(path);
    std::string line;
    int checked = 0;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto ids = wordpiece::tokenize(vocab, line);
      CHECK(ids.front() == wordpiece::kClsId);
      CHECK(ids.back() == wordpiece::kSepId);
      for (int id : ids) CHECK(id < vocab.size());
      const auto round = wordpiece::detokenize(vocab, ids);
      CHECK_FALSE(round.lossy);
      CHECK(round.text == line);
      ++checked;
    }
    CHECK(checked > 1000);
  }
}

TEST_CASE("tokenize basics") {
  const wordpiece::Vocab vocab =
      wordpiece::train_from_lines({"a10/b10/c10 G - a10"}, {.max_vocab = 50, .min_frequency = 1});

  SUBCASE("empty text is just the frame") {
    CHECK(wordpiece::tokenize(vocab, "") ==
          std::vector<int>{wordpiece::kClsId, wordpiece::kSepId});
    CHECK(wordpiece::detokenize(vocab, wordpiece::tokenize(vocab, "")).text == "");
  }

  SUBCASE("each unit maps to its own whole piece") {
    const auto ids = wordpiece::tokenize(vocab, "a10/b10/c10 G - a10");
    std::vector<std::string> tokens;
    for (int id : ids) tokens.push_back(vocab.token_of(id));
    CHECK(tokens == std::vector<std::string>{"[CLS]", "a10", "/", "b10", "/", "c10", "G", "-",
                                             "a10", "[SEP]"});
  }

  SUBCASE("unknown characters collapse to [UNK] and flag the round trip") {
    const auto ids = wordpiece::tokenize(vocab, "xyz");
    CHECK(ids == std::vector<int>{wordpiece::kClsId, wordpiece::kUnkId, wordpiece::kSepId});
    const auto round = wordpiece::detokenize(vocab, ids);
    CHECK(round.lossy);
    CHECK(round.text == "[UNK]");
  }

  SUBCASE("[MASK] passes through whole") {
    const auto ids = wordpiece::tokenize(vocab, "a10/b10/c10 G - [MASK]");
    CHECK(std::count(ids.begin(), ids.end(), wordpiece::kMaskId) == 1);
    CHECK(wordpiece::detokenize(vocab, ids).text == "a10/b10/c10 G - [MASK]");
  }

  SUBCASE("greedy segmentation uses continuations for unmerged words") {
    // "a1" exists only via pieces: 'a' + '##1' in the min-frequency-2 vocab.
    const wordpiece::Vocab small =
        wordpiece::train_from_lines({"a10/b10/c10 G - a10"}, {.max_vocab = 50, .min_frequency = 2});
    const auto ids = wordpiece::tokenize(small, "b10");
    std::vector<std::string> tokens;
    for (int id : ids) tokens.push_back(small.token_of(id));
    CHECK(tokens == std::vector<std::string>{"[CLS]", "b", "##10", "[SEP]"});
  }
}

TEST_CASE("chess lines round-trip through a chess vocab") {
  const std::vector<std::string> lines = {
      "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1 [MOVESEP] f2f4",
      "rnbqkbnr/pppppppp/8/8/5P2/8/PPPPP1PP/RNBQKBNR b KQkq f3 0 1 [MOVESEP] e7e5",
      "rnbqkbnr/pppp1ppp/8/4p3/5P2/8/PPPPP1PP/RNBQKBNR w KQkq e6 0 2 [MOVESEP] f4e5",
  };
  const wordpiece::Vocab vocab =
      wordpiece::train_from_lines(lines, {.max_vocab = 400, .min_frequency = 1});
  for (const auto& line : lines) {
    const auto round = wordpiece::detokenize(vocab, wordpiece::tokenize(vocab, line));
    CHECK_FALSE(round.lossy);
    CHECK(round.text == line);
  }
}

TEST_CASE("vocab save/load") {
  const wordpiece::Vocab vocab =
      wordpiece::train_from_lines({"a10/b10/c10 G - a10"}, {.max_vocab = 50, .min_frequency = 1});
  const auto path = temp_file("vocab.json");
  vocab.save(path.string());
  const wordpiece::Vocab loaded = wordpiece::Vocab::load(path.string());
  CHECK(loaded.tokens == vocab.tokens);

  SUBCASE("load validates the special-token layout") {
    const auto bad = temp_file("bad_vocab.json");
    std::ofstream(bad) << R"({"[PAD]":0,"[UNK]":1,"[CLS]":2,"[SEP]":3,"a":4})";
    CHECK_THROWS_AS(wordpiece::Vocab::load(bad.string()), std::invalid_argument);
    const auto sparse = temp_file("sparse_vocab.json");
    std::ofstream(sparse) << R"({"[PAD]":0,"[UNK]":1,"[CLS]":2,"[SEP]":3,"[MASK]":7})";
    CHECK_THROWS_AS(wordpiece::Vocab::load(sparse.string()), ParseError);
  }
}

TEST_CASE("trainer error cases") {
  CHECK_THROWS_AS(wordpiece::train_from_lines({}, {.max_vocab = 50}), std::invalid_argument);
  CHECK_THROWS_AS(wordpiece::train_from_lines({"ab"}, {.max_vocab = 6}), std::invalid_argument);
  CHECK_THROWS_AS(wordpiece::detokenize(
                      wordpiece::train_from_lines({"ab"}, {.max_vocab = 64}),
                      std::vector<int>{999}),
                  std::invalid_argument);
}
