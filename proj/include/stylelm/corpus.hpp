#pragma once

// Text ingestion: character vocabulary, encoding, training windows, word lists,
// and the vocabulary-extension helpers (missing words, stop words, neutral chunks).
//
// A "character" is one byte of the (UTF-8) input. Multi-byte sequences therefore
// occupy several vocabulary slots; encode/decode stay exact inverses either way.

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "stylelm/errors.hpp"

namespace stylelm {

using CharId = int;

// ------------------------------------------------------------------ hashing

/// 64-bit FNV-1a over the raw bytes. Chunk ids and corpus fingerprints use this.
constexpr std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string to_hex(std::uint64_t v) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[v & 0xF];
    v >>= 4;
  }
  return out;
}

inline std::uint64_t parse_hex64(std::string_view s) {
  if (s.empty() || s.size() > 16) throw DataError("bad hex id '" + std::string(s) + "'");
  std::uint64_t v = 0;
  for (char c : s) {
    v <<= 4;
    if (c >= '0' && c <= '9') v |= static_cast<std::uint64_t>(c - '0');
    else if (c >= 'a' && c <= 'f') v |= static_cast<std::uint64_t>(c - 'a' + 10);
    else if (c >= 'A' && c <= 'F') v |= static_cast<std::uint64_t>(c - 'A' + 10);
    else throw DataError("bad hex id '" + std::string(s) + "'");
  }
  return v;
}

// ------------------------------------------------------------------ files

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ------------------------------------------------------------------ normalization

struct NormalizeOptions {
  bool lowercase = true;
  bool collapse_whitespace = true;
  bool strip_nonprintable = true;
};

inline bool is_space_byte(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

/// Lowercases ASCII, folds whitespace runs to one space, drops control bytes.
/// Bytes >= 0x80 pass through untouched.
inline std::string normalize_text(std::string_view text, const NormalizeOptions& opt = {}) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (unsigned char c : text) {
    if (opt.collapse_whitespace && is_space_byte(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (opt.strip_nonprintable && (c < 0x20 || c == 0x7f) && !is_space_byte(c)) continue;
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    if (opt.lowercase && c >= 'A' && c <= 'Z') c = static_cast<unsigned char>(c - 'A' + 'a');
    out.push_back(static_cast<char>(c));
  }
  return out;
}

/// Splits on blank lines. Paragraph text keeps its internal newlines.
inline std::vector<std::string> split_paragraphs(std::string_view text) {
  std::vector<std::string> paras;
  std::string current;
  std::size_t pos = 0;
  auto flush = [&] {
    if (!current.empty()) paras.push_back(std::move(current));
    current.clear();
  };
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    bool blank = std::all_of(line.begin(), line.end(), [](char c) { return is_space_byte(static_cast<unsigned char>(c)); });
    if (blank) {
      flush();
    } else {
      if (!current.empty()) current.push_back('\n');
      current.append(line);
    }
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  flush();
  return paras;
}

// ------------------------------------------------------------------ vocabulary

class Vocabulary {
 public:
  Vocabulary() { index_.fill(-1); }

  /// First-appearance order over `text`.
  static Vocabulary build(std::string_view text) {
    if (text.empty()) throw DataError("empty corpus");
    Vocabulary v;
    for (char c : text) v.add(c);
    return v;
  }

  /// Rebuilds from an explicit ordered character list (checkpoint load).
  static Vocabulary from_chars(std::string_view chars) {
    if (chars.empty()) throw DataError("empty vocabulary");
    Vocabulary v;
    for (char c : chars) {
      if (v.contains(c)) throw DataError("duplicate character in vocabulary");
      v.add(c);
    }
    return v;
  }

  std::size_t size() const noexcept { return chars_.size(); }
  const std::string& chars() const noexcept { return chars_; }
  bool contains(char c) const noexcept { return index_[static_cast<unsigned char>(c)] >= 0; }
  CharId index_of(char c) const noexcept { return index_[static_cast<unsigned char>(c)]; }
  char char_at(CharId id) const { return chars_.at(static_cast<std::size_t>(id)); }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.chars_ == b.chars_; }

 private:
  void add(char c) {
    auto& slot = index_[static_cast<unsigned char>(c)];
    if (slot >= 0) return;
    slot = static_cast<CharId>(chars_.size());
    chars_.push_back(c);
  }

  std::string chars_;
  std::array<CharId, 256> index_{};
};

inline Vocabulary build_vocab(std::string_view text) { return Vocabulary::build(text); }

inline std::string describe_byte(char c) {
  auto u = static_cast<unsigned char>(c);
  if (u >= 0x20 && u < 0x7f) return std::string("'") + c + "'";
  static constexpr char digits[] = "0123456789abcdef";
  return std::string("0x") + digits[u >> 4] + digits[u & 0xF];
}

inline std::vector<CharId> encode(std::string_view text, const Vocabulary& vocab) {
  std::vector<CharId> ids;
  ids.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    CharId id = vocab.index_of(text[i]);
    if (id < 0)
      throw DataError("character " + describe_byte(text[i]) + " at byte offset " + std::to_string(i) +
                      " is not in the vocabulary");
    ids.push_back(id);
  }
  return ids;
}

inline std::string decode(std::span<const CharId> ids, const Vocabulary& vocab) {
  std::string out;
  out.reserve(ids.size());
  for (CharId id : ids) out.push_back(vocab.char_at(id));
  return out;
}

inline std::vector<double> one_hot(CharId id, std::size_t vocab_size) {
  if (id < 0 || static_cast<std::size_t>(id) >= vocab_size)
    throw DataError("one_hot id " + std::to_string(id) + " outside [0, " + std::to_string(vocab_size) + ")");
  std::vector<double> v(vocab_size, 0.0);
  v[static_cast<std::size_t>(id)] = 1.0;
  return v;
}

/// Most frequent byte; ties go to the one appearing first.
inline char most_frequent_char(std::string_view text) {
  if (text.empty()) throw DataError("empty corpus");
  std::array<std::size_t, 256> counts{};
  for (unsigned char c : text) ++counts[c];
  char best = text.front();
  for (char c : text) {
    if (counts[static_cast<unsigned char>(c)] > counts[static_cast<unsigned char>(best)]) best = c;
  }
  return best;
}

// ------------------------------------------------------------------ training windows

struct TrainingPair {
  std::vector<CharId> window;
  CharId target = 0;
};

inline std::size_t training_pair_count(std::size_t text_len, std::size_t seq_len, std::size_t stride) {
  if (text_len < seq_len + 1) return 0;
  return (text_len - seq_len - 1) / stride + 1;
}

inline std::vector<TrainingPair> make_training_pairs(std::string_view text, const Vocabulary& vocab,
                                                     std::size_t seq_len, std::size_t stride = 1) {
  if (seq_len == 0) throw ConfigError("seq_len must be positive");
  if (stride == 0) throw ConfigError("stride must be positive");
  if (text.size() < seq_len + 1) throw DataError("chunk too short");
  const auto ids = encode(text, vocab);
  std::vector<TrainingPair> pairs;
  pairs.reserve(training_pair_count(ids.size(), seq_len, stride));
  for (std::size_t i = 0; i + seq_len < ids.size(); i += stride) {
    pairs.push_back({std::vector<CharId>(ids.begin() + static_cast<std::ptrdiff_t>(i),
                                         ids.begin() + static_cast<std::ptrdiff_t>(i + seq_len)),
                     ids[i + seq_len]});
  }
  return pairs;
}

// ------------------------------------------------------------------ words

struct WordToken {
  std::string word;
  std::size_t begin = 0;  // byte offsets into the source text
  std::size_t end = 0;
};

inline bool is_alpha_byte(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

/// Maximal runs of ASCII letters, joined across apostrophes that sit between two letters.
inline std::vector<WordToken> tokenize_words_with_offsets(std::string_view text) {
  std::vector<WordToken> tokens;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    if (!is_alpha_byte(text[i])) {
      ++i;
      continue;
    }
    std::size_t start = i;
    while (i < n) {
      if (is_alpha_byte(text[i])) {
        ++i;
      } else if (text[i] == '\'' && i + 1 < n && is_alpha_byte(text[i + 1])) {
        i += 2;
      } else {
        break;
      }
    }
    std::string w(text.substr(start, i - start));
    for (char& c : w)
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    tokens.push_back({std::move(w), start, i});
  }
  return tokens;
}

inline std::vector<std::string> tokenize_words(std::string_view text) {
  std::vector<std::string> words;
  for (auto& t : tokenize_words_with_offsets(text)) words.push_back(std::move(t.word));
  return words;
}

enum class WordListKind { dictionary, stopwords };

struct WordList {
  std::set<std::string> words;
  WordListKind kind = WordListKind::dictionary;

  bool contains(const std::string& w) const { return words.count(w) != 0; }
  std::size_t size() const { return words.size(); }
  bool empty() const { return words.empty(); }
};

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && is_space_byte(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && is_space_byte(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

/// One word per line; blank lines and lines starting with '#' are skipped.
inline WordList parse_word_list(std::string_view body, WordListKind kind) {
  WordList list{{}, kind};
  std::size_t pos = 0;
  while (pos < body.size()) {
    std::size_t nl = body.find('\n', pos);
    if (nl == std::string_view::npos) nl = body.size();
    std::string line = trim(body.substr(pos, nl - pos));
    pos = nl + 1;
    if (line.empty() || line.front() == '#') continue;
    for (char& c : line)
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    list.words.insert(std::move(line));
  }
  return list;
}

inline WordList load_word_list(const std::string& path, WordListKind kind) {
  return parse_word_list(read_text_file(path), kind);
}

inline WordList missing_words(const WordList& dictionary, std::string_view author_text) {
  if (dictionary.empty()) throw DataError("dictionary is empty");
  std::set<std::string> seen;
  for (auto& w : tokenize_words(author_text)) seen.insert(std::move(w));
  WordList out{{}, WordListKind::dictionary};
  std::set_difference(dictionary.words.begin(), dictionary.words.end(), seen.begin(), seen.end(),
                      std::inserter(out.words, out.words.end()));
  return out;
}

/// Stop words the author never used.
inline WordList candidate_extension_words(const WordList& missing, const WordList& stopwords) {
  WordList out{{}, WordListKind::stopwords};
  std::set_intersection(missing.words.begin(), missing.words.end(), stopwords.words.begin(),
                        stopwords.words.end(), std::inserter(out.words, out.words.end()));
  return out;
}

// ------------------------------------------------------------------ chunks

enum class ChunkSource { author, ground_truth, neutral };

inline const char* to_string(ChunkSource s) {
  switch (s) {
    case ChunkSource::author: return "author";
    case ChunkSource::ground_truth: return "ground_truth";
    case ChunkSource::neutral: return "neutral";
  }
  return "?";
}

struct TextChunk {
  std::string text;
  ChunkSource source = ChunkSource::author;
  std::uint64_t id = 0;
};

inline TextChunk make_chunk(std::string text, ChunkSource source) {
  const auto id = fnv1a64(text);
  return {std::move(text), source, id};
}

/// Normalizes each paragraph and packs consecutive paragraphs (space-joined)
/// until a chunk reaches `min_len` bytes. A short tail merges into the previous chunk.
inline std::vector<TextChunk> chunk_corpus(std::string_view raw, std::size_t min_len, ChunkSource source,
                                           const NormalizeOptions& norm = {}) {
  std::vector<std::string> groups;
  std::string current;
  for (const auto& para : split_paragraphs(raw)) {
    std::string p = normalize_text(para, norm);
    if (p.empty()) continue;
    if (!current.empty()) current.push_back(' ');
    current += p;
    if (current.size() >= min_len) {
      groups.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) {
    if (!groups.empty() && current.size() < min_len) {
      groups.back().push_back(' ');
      groups.back() += current;
    } else {
      groups.push_back(std::move(current));
    }
  }
  std::vector<TextChunk> chunks;
  chunks.reserve(groups.size());
  for (auto& g : groups) chunks.push_back(make_chunk(std::move(g), source));
  return chunks;
}

struct NeutralSelection {
  std::vector<TextChunk> chunks;
  std::vector<std::string> not_found;  // targets with no occurrence in the neutral text
};

/// For each target word (sorted order), takes up to `max_per_word` windows of
/// `chunk_len` bytes centred on its first non-overlapping occurrences.
inline NeutralSelection select_neutral_chunks(std::string_view neutral_text, const WordList& targets,
                                              std::size_t chunk_len, std::size_t max_per_word) {
  if (chunk_len == 0) throw ConfigError("chunk_len must be positive");
  NeutralSelection sel;
  const auto tokens = tokenize_words_with_offsets(neutral_text);
  std::map<std::string, std::vector<const WordToken*>> where;
  for (const auto& t : tokens)
    if (targets.contains(t.word)) where[t.word].push_back(&t);

  const std::size_t n = neutral_text.size();
  for (const auto& word : targets.words) {
    auto it = where.find(word);
    if (it == where.end()) {
      sel.not_found.push_back(word);
      continue;
    }
    std::size_t taken = 0;
    std::size_t prev_end = 0;
    for (const WordToken* tok : it->second) {
      if (taken >= max_per_word) break;
      if (taken > 0 && tok->begin < prev_end) continue;
      if (tok->end - tok->begin > chunk_len) break;
      std::size_t begin = 0, len = n;
      if (n > chunk_len) {
        const std::size_t mid = (tok->begin + tok->end) / 2;
        begin = mid > chunk_len / 2 ? mid - chunk_len / 2 : 0;
        begin = std::min(begin, n - chunk_len);
        begin = std::min(begin, tok->begin);
        begin = std::max(begin, tok->end > chunk_len ? tok->end - chunk_len : std::size_t{0});
        len = chunk_len;
      }
      sel.chunks.push_back(make_chunk(std::string(neutral_text.substr(begin, len)), ChunkSource::neutral));
      prev_end = begin + len;
      ++taken;
    }
  }
  return sel;
}

}  // namespace stylelm
