#pragma once

#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace gamelab::wordpiece {

inline constexpr const char* kSpecialTokens[5] = {"[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"};
inline constexpr int kPadId = 0;
inline constexpr int kUnkId = 1;
inline constexpr int kClsId = 2;
inline constexpr int kSepId = 3;
inline constexpr int kMaskId = 4;
inline constexpr const char* kContinuationPrefix = "##";

struct Vocab {
  std::vector<std::string> tokens;  // id -> token, dense from 0
  std::unordered_map<std::string, int> ids;

  int size() const { return static_cast<int>(tokens.size()); }
  int id_of(const std::string& token) const {
    auto it = ids.find(token);
    return it == ids.end() ? -1 : it->second;
  }
  const std::string& token_of(int id) const;  // throws std::out_of_range

  void save(const std::string& path) const;       // JSON map token -> id
  static Vocab load(const std::string& path);     // validates special ids 0..4
  static Vocab from_tokens(std::vector<std::string> tokens);
};

struct TrainConfig {
  int max_vocab = 200;
  int min_frequency = 2;
};

// Case-sensitive WordPiece training: whitespace + punctuation pre-tokenization,
// full observed alphabet (plain and "##" continuation forms), then iterative
// pair merges scored freq(ab) / (freq(a) * freq(b)).
Vocab train(const std::vector<std::string>& corpus_paths, const TrainConfig& config);
Vocab train_from_lines(const std::vector<std::string>& lines, const TrainConfig& config);

// Pre-tokenization units for a text: whitespace split, then each ASCII
// punctuation character becomes its own unit. Special tokens pass through
// whole when `keep_specials` is set.
std::vector<std::string> pretokenize(std::string_view text, bool keep_specials = true);

// Greedy longest-match-first segmentation per unit, [CLS] ... [SEP] wrapped;
// any unsegmentable unit becomes a single [UNK].
std::vector<int> tokenize(const Vocab& vocab, std::string_view text);

struct DetokenizeResult {
  std::string text;
  bool lossy = false;  // set when [UNK] appears; round-trip not guaranteed
};

// Inverse of tokenize on fully-covered text: strips specials, joins "##"
// pieces, restores single spaces with the corpus punctuation binding ('/'
// binds both sides, '[' binds right, ']' binds left).
DetokenizeResult detokenize(const Vocab& vocab, std::span<const int> ids);

}  // namespace gamelab::wordpiece
