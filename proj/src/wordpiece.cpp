#include "gamelab/wordpiece.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "gamelab/errors.hpp"

namespace gamelab::wordpiece {

namespace {

bool is_special(const std::string& token) {
  for (const char* s : kSpecialTokens)
    if (token == s) return true;
  return false;
}

bool is_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }

}  // namespace

const std::string& Vocab::token_of(int id) const {
  if (id < 0 || id >= size()) throw std::invalid_argument("token id out of range: " + std::to_string(id));
  return tokens[static_cast<std::size_t>(id)];
}

Vocab Vocab::from_tokens(std::vector<std::string> token_list) {
  Vocab v;
  v.tokens = std::move(token_list);
  for (int i = 0; i < v.size(); ++i) {
    if (!v.ids.emplace(v.tokens[static_cast<std::size_t>(i)], i).second)
      throw std::invalid_argument("duplicate token in vocab: " + v.tokens[static_cast<std::size_t>(i)]);
  }
  for (int i = 0; i < 5; ++i) {
    if (v.size() <= i || v.tokens[static_cast<std::size_t>(i)] != kSpecialTokens[i])
      throw std::invalid_argument("vocab special tokens must be [PAD],[UNK],[CLS],[SEP],[MASK] at ids 0..4");
  }
  return v;
}

void Vocab::save(const std::string& path) const {
  nlohmann::json j = nlohmann::json::object();
  for (int i = 0; i < size(); ++i) j[tokens[static_cast<std::size_t>(i)]] = i;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open vocab file for writing: " + path);
  out << j.dump(2) << '\n';
}

Vocab Vocab::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open vocab file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("vocab file is not valid JSON: " + std::string(e.what()));
  }
  if (!j.is_object()) throw ParseError("vocab file must be a JSON object of token -> id");
  std::vector<std::string> tokens(j.size());
  for (const auto& [token, id] : j.items()) {
    if (!id.is_number_integer()) throw ParseError("vocab ids must be integers");
    const int i = id.get<int>();
    if (i < 0 || i >= static_cast<int>(tokens.size()) || !tokens[static_cast<std::size_t>(i)].empty())
      throw ParseError("vocab ids must be dense and unique");
    tokens[static_cast<std::size_t>(i)] = token;
  }
  return from_tokens(std::move(tokens));
}

std::vector<std::string> pretokenize(std::string_view text, bool keep_specials) {
  std::vector<std::string> units;
  std::size_t i = 0;
  while (i < text.size()) {
    if (std::isspace(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    std::size_t end = i;
    while (end < text.size() && !std::isspace(static_cast<unsigned char>(text[end]))) ++end;
    const std::string_view chunk = text.substr(i, end - i);
    i = end;

    if (keep_specials && is_special(std::string(chunk))) {
      units.emplace_back(chunk);
      continue;
    }
    std::size_t start = 0;
    for (std::size_t k = 0; k < chunk.size(); ++k) {
      if (is_punct(chunk[k])) {
        if (k > start) units.emplace_back(chunk.substr(start, k - start));
        units.emplace_back(1, chunk[k]);
        start = k + 1;
      }
    }
    if (start < chunk.size()) units.emplace_back(chunk.substr(start));
  }
  return units;
}

namespace {

struct Trainer {
  std::vector<std::string> pieces;              // piece id -> text
  std::unordered_map<std::string, int> piece_ids;
  std::vector<int64_t> piece_freq;

  struct Word {
    std::vector<int> rep;
    int64_t freq = 0;
  };
  std::vector<Word> words;

  using PairKey = uint64_t;
  static PairKey key(int a, int b) {
    return (static_cast<uint64_t>(static_cast<uint32_t>(a)) << 32) | static_cast<uint32_t>(b);
  }
  std::unordered_map<PairKey, int64_t> pair_counts;
  std::unordered_map<PairKey, std::set<int>> pair_words;

  int intern(const std::string& piece) {
    auto it = piece_ids.find(piece);
    if (it != piece_ids.end()) return it->second;
    const int id = static_cast<int>(pieces.size());
    pieces.push_back(piece);
    piece_ids.emplace(piece, id);
    piece_freq.push_back(0);
    return id;
  }

  void add_word_contributions(int w, int sign) {
    const Word& word = words[static_cast<std::size_t>(w)];
    for (int p : word.rep) piece_freq[static_cast<std::size_t>(p)] += sign * word.freq;
    for (std::size_t i = 0; i + 1 < word.rep.size(); ++i) {
      const PairKey k = key(word.rep[i], word.rep[i + 1]);
      pair_counts[k] += sign * word.freq;
      if (sign > 0) {
        pair_words[k].insert(w);
      } else if (pair_counts[k] <= 0) {
        pair_counts.erase(k);
        pair_words.erase(k);
      }
    }
  }
};

}  // namespace

Vocab train_from_lines(const std::vector<std::string>& lines, const TrainConfig& config) {
  std::map<std::string, int64_t> word_freq;
  for (const std::string& line : lines)
    for (std::string& unit : pretokenize(line, /*keep_specials=*/false))
      ++word_freq[std::move(unit)];
  if (word_freq.empty()) throw std::invalid_argument("wordpiece training corpus is empty");

  // Observed alphabet: every char as a word-initial piece, plus continuation
  // forms for chars seen past the first position of a unit.
  std::set<std::string> plain_alphabet, cont_alphabet;
  for (const auto& [word, freq] : word_freq) {
    for (std::size_t i = 0; i < word.size(); ++i) {
      plain_alphabet.insert(std::string(1, word[i]));
      if (i > 0) cont_alphabet.insert(kContinuationPrefix + std::string(1, word[i]));
    }
  }

  std::vector<std::string> tokens(kSpecialTokens, kSpecialTokens + 5);
  tokens.insert(tokens.end(), plain_alphabet.begin(), plain_alphabet.end());
  tokens.insert(tokens.end(), cont_alphabet.begin(), cont_alphabet.end());
  if (static_cast<int>(tokens.size()) >= config.max_vocab)
    throw std::invalid_argument("max_vocab must exceed specials + alphabet size (" +
                                std::to_string(tokens.size()) + ")");

  Trainer t;
  for (const std::string& token : tokens) t.intern(token);

  for (const auto& [word, freq] : word_freq) {
    Trainer::Word w;
    w.freq = freq;
    for (std::size_t i = 0; i < word.size(); ++i) {
      const std::string piece =
          i == 0 ? std::string(1, word[i]) : kContinuationPrefix + std::string(1, word[i]);
      w.rep.push_back(t.intern(piece));
    }
    t.words.push_back(std::move(w));
  }
  for (int w = 0; w < static_cast<int>(t.words.size()); ++w) t.add_word_contributions(w, +1);

  int vocab_size = static_cast<int>(tokens.size());
  while (vocab_size < config.max_vocab) {
    // Best pair by WordPiece likelihood score; ties resolved lexicographically
    // on (merged token, left piece) so training is order-independent.
    double best_score = -1.0;
    int best_a = -1, best_b = -1;
    std::string best_merged;
    for (const auto& [k, count] : t.pair_counts) {
      if (count < config.min_frequency) continue;
      const int a = static_cast<int>(k >> 32);
      const int b = static_cast<int>(k & 0xffffffffu);
      const double score =
          static_cast<double>(count) /
          (static_cast<double>(t.piece_freq[static_cast<std::size_t>(a)]) *
           static_cast<double>(t.piece_freq[static_cast<std::size_t>(b)]));
      std::string merged = t.pieces[static_cast<std::size_t>(a)];
      const std::string& right = t.pieces[static_cast<std::size_t>(b)];
      merged += right.substr(right.rfind(kContinuationPrefix, 0) == 0 ? 2 : 0);
      if (best_a < 0 || score > best_score ||
          (score == best_score &&
           (merged < best_merged ||
            (merged == best_merged &&
             t.pieces[static_cast<std::size_t>(a)] < t.pieces[static_cast<std::size_t>(best_a)])))) {
        best_score = score;
        best_a = a;
        best_b = b;
        best_merged = std::move(merged);
      }
    }
    if (best_a < 0) break;

    const bool is_new = t.piece_ids.find(best_merged) == t.piece_ids.end();
    const int merged_id = t.intern(best_merged);
    if (is_new) {
      tokens.push_back(best_merged);
      ++vocab_size;
    }

    const auto affected_it = t.pair_words.find(Trainer::key(best_a, best_b));
    if (affected_it == t.pair_words.end()) continue;
    const std::vector<int> affected(affected_it->second.begin(), affected_it->second.end());
    for (int w : affected) {
      t.add_word_contributions(w, -1);
      auto& rep = t.words[static_cast<std::size_t>(w)].rep;
      std::vector<int> next;
      next.reserve(rep.size());
      for (std::size_t i = 0; i < rep.size(); ++i) {
        if (i + 1 < rep.size() && rep[i] == best_a && rep[i + 1] == best_b) {
          next.push_back(merged_id);
          ++i;
        } else {
          next.push_back(rep[i]);
        }
      }
      rep = std::move(next);
      t.add_word_contributions(w, +1);
    }
  }

  return Vocab::from_tokens(std::move(tokens));
}

Vocab train(const std::vector<std::string>& corpus_paths, const TrainConfig& config) {
  std::vector<std::string> lines;
  for (const std::string& path : corpus_paths) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open corpus file: " + path);
    std::string line;
    while (std::getline(in, line))
      if (!line.empty()) lines.push_back(line);
  }
  if (lines.empty()) throw std::invalid_argument("wordpiece training corpus is empty");
  return train_from_lines(lines, config);
}

std::vector<int> tokenize(const Vocab& vocab, std::string_view text) {
  std::vector<int> ids;
  ids.push_back(kClsId);
  for (const std::string& unit : pretokenize(text, /*keep_specials=*/true)) {
    if (is_special(unit)) {
      ids.push_back(vocab.id_of(unit));
      continue;
    }
    std::vector<int> pieces;
    std::size_t pos = 0;
    bool ok = true;
    while (pos < unit.size()) {
      int match = -1;
      std::size_t match_len = 0;
      for (std::size_t len = unit.size() - pos; len >= 1; --len) {
        std::string cand = pos == 0 ? "" : kContinuationPrefix;
        cand += unit.substr(pos, len);
        const int id = vocab.id_of(cand);
        if (id >= 0) {
          match = id;
          match_len = len;
          break;
        }
      }
      if (match < 0) {
        ok = false;
        break;
      }
      pieces.push_back(match);
      pos += match_len;
    }
    if (ok) {
      ids.insert(ids.end(), pieces.begin(), pieces.end());
    } else {
      ids.push_back(kUnkId);
    }
  }
  ids.push_back(kSepId);
  return ids;
}

DetokenizeResult detokenize(const Vocab& vocab, std::span<const int> ids) {
  DetokenizeResult result;
  std::vector<std::string> units;
  for (int id : ids) {
    const std::string& token = vocab.token_of(id);
    if (token == kSpecialTokens[kPadId] || token == kSpecialTokens[kClsId] ||
        token == kSpecialTokens[kSepId])
      continue;
    if (token == kSpecialTokens[kUnkId]) {
      result.lossy = true;
      units.push_back(token);
      continue;
    }
    if (token == kSpecialTokens[kMaskId]) {
      units.push_back(token);
      continue;
    }
    if (token.rfind(kContinuationPrefix, 0) == 0 && !units.empty()) {
      units.back() += token.substr(2);
    } else {
      units.push_back(token.rfind(kContinuationPrefix, 0) == 0 ? token.substr(2) : token);
    }
  }
  for (std::size_t i = 0; i < units.size(); ++i) {
    if (i > 0) {
      const std::string& prev = units[i - 1];
      const std::string& cur = units[i];
      const bool glue = prev == "/" || prev == "[" || cur == "/" || cur == "]";
      if (!glue) result.text += ' ';
    }
    result.text += units[i];
  }
  return result;
}

}  // namespace gamelab::wordpiece
