#pragma once

// Contradiction filter for ground-truth chunks.
//
// A ground chunk is checked against the author's chunks one at a time with an
// NLI provider (premise = author chunk, hypothesis = ground chunk). The first
// verdict whose contradiction probability reaches the threshold rejects the
// chunk and records its id in the bin; a chunk already in the bin is rejected
// without asking the provider again.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "stylelm/corpus.hpp"
#include "stylelm/errors.hpp"

namespace stylelm {

enum class NliLabel { contradiction, neutral, entailment };

inline const char* to_string(NliLabel l) {
  switch (l) {
    case NliLabel::contradiction: return "contradiction";
    case NliLabel::neutral: return "neutral";
    case NliLabel::entailment: return "entailment";
  }
  return "?";
}

struct NliVerdict {
  double contradiction = 0.0;
  double neutral = 0.0;
  double entailment = 0.0;

  double sum() const noexcept { return contradiction + neutral + entailment; }

  /// Ties resolve in the order contradiction, neutral, entailment.
  NliLabel argmax() const noexcept {
    if (contradiction >= neutral && contradiction >= entailment) return NliLabel::contradiction;
    if (neutral >= entailment) return NliLabel::neutral;
    return NliLabel::entailment;
  }

  bool is_simplex(double tol) const noexcept {
    for (double p : {contradiction, neutral, entailment})
      if (!std::isfinite(p) || p < 0.0 || p > 1.0) return false;
    return std::abs(sum() - 1.0) <= tol;
  }

  friend bool operator==(const NliVerdict&, const NliVerdict&) = default;
};

class NliProvider {
 public:
  virtual ~NliProvider() = default;

  /// Must be safe to call from several threads at once.
  virtual NliVerdict classify(const std::string& premise, const std::string& hypothesis) = 0;

  virtual std::vector<NliVerdict> classify_batch(const std::vector<std::pair<std::string, std::string>>& pairs) {
    std::vector<NliVerdict> out;
    out.reserve(pairs.size());
    for (const auto& [p, h] : pairs) out.push_back(classify(p, h));
    return out;
  }

  virtual std::string name() const = 0;
};

// ------------------------------------------------------------------ heuristic provider

/// Offline lexical stand-in for an MNLI model.
///
/// Content words are tokens outside a small function-word list. Two texts
/// contradict when at least 30% of the smaller content set is shared and
/// exactly one side has a negation marker (not, never, no, *n't) within one
/// token before or two tokens after a shared content word. Otherwise one token
/// set containing the other is entailment, and anything else is neutral.
///   contradiction -> (0.8, 0.1, 0.1)
///   entailment    -> (0.1, 0.1, 0.8)
///   neutral       -> (0.1, 0.8, 0.1)
class HeuristicProvider final : public NliProvider {
 public:
  static constexpr NliVerdict kContradiction{0.8, 0.1, 0.1};
  static constexpr NliVerdict kNeutral{0.1, 0.8, 0.1};
  static constexpr NliVerdict kEntailment{0.1, 0.1, 0.8};
  static constexpr double kMinOverlap = 0.3;

  NliVerdict classify(const std::string& premise, const std::string& hypothesis) override {
    if (premise.empty() || hypothesis.empty()) throw DataError("heuristic_classify needs non-empty texts");
    const auto a = tokenize_words(premise);
    const auto b = tokenize_words(hypothesis);
    const auto ca = content_words(a);
    const auto cb = content_words(b);
    std::set<std::string> shared;
    std::set_intersection(ca.begin(), ca.end(), cb.begin(), cb.end(), std::inserter(shared, shared.end()));
    const std::size_t smaller = std::min(ca.size(), cb.size());
    const double overlap = smaller == 0 ? 0.0 : static_cast<double>(shared.size()) / static_cast<double>(smaller);
    if (overlap >= kMinOverlap && negates_shared(a, shared) != negates_shared(b, shared)) return kContradiction;

    const std::set<std::string> sa(a.begin(), a.end()), sb(b.begin(), b.end());
    if (std::includes(sa.begin(), sa.end(), sb.begin(), sb.end()) ||
        std::includes(sb.begin(), sb.end(), sa.begin(), sa.end()))
      return kEntailment;
    return kNeutral;
  }

  std::string name() const override { return "heuristic"; }

  static bool is_negation(const std::string& w) {
    return w == "not" || w == "never" || w == "no" || (w.size() > 3 && w.compare(w.size() - 3, 3, "n't") == 0);
  }

  static bool is_function_word(const std::string& w) {
    static const std::set<std::string> words = {
        "a", "an", "the", "and", "or", "but", "if", "of", "at", "by", "for", "with", "about", "to", "from", "in",
        "on", "into", "onto", "over", "under", "up", "down", "out", "off", "as", "than", "then", "so", "too",
        "very", "is", "are", "was", "were", "be", "been", "being", "am", "has", "have", "had", "do", "does", "did",
        "will", "would", "can", "could", "shall", "should", "may", "might", "must", "it", "its", "this", "that",
        "these", "those", "there", "here", "i", "me", "my", "we", "our", "you", "your", "he", "him", "his", "she",
        "her", "they", "them", "their", "who", "whom", "which", "what", "when", "where", "how", "why", "all",
        "any", "some", "each", "every", "also", "only", "just", "own", "same", "such"};
    return words.count(w) != 0;
  }

 private:
  static std::set<std::string> content_words(const std::vector<std::string>& tokens) {
    std::set<std::string> out;
    for (const auto& t : tokens)
      if (!is_function_word(t) && !is_negation(t)) out.insert(t);
    return out;
  }

  static bool negates_shared(const std::vector<std::string>& tokens, const std::set<std::string>& shared) {
    for (std::size_t p = 0; p < tokens.size(); ++p) {
      if (!is_negation(tokens[p])) continue;
      for (std::ptrdiff_t off : {-1, 1, 2}) {
        const auto q = static_cast<std::ptrdiff_t>(p) + off;
        if (q >= 0 && q < static_cast<std::ptrdiff_t>(tokens.size()) && shared.count(tokens[static_cast<std::size_t>(q)]))
          return true;
      }
    }
    return false;
  }
};

inline NliVerdict heuristic_classify(const std::string& premise, const std::string& hypothesis) {
  HeuristicProvider p;
  return p.classify(premise, hypothesis);
}

// ------------------------------------------------------------------ bin

/// Ids of ground chunks judged contradictory. Text form: one 16-digit hex id per
/// line, sorted, '#' comment lines allowed.
class ChunkBin {
 public:
  bool contains(std::uint64_t id) const { return ids_.count(id) != 0; }
  bool insert(std::uint64_t id) { return ids_.insert(id).second; }
  std::size_t size() const noexcept { return ids_.size(); }
  const std::set<std::uint64_t>& ids() const noexcept { return ids_; }

  static ChunkBin parse(std::string_view body) {
    ChunkBin bin;
    std::size_t pos = 0;
    while (pos < body.size()) {
      std::size_t nl = body.find('\n', pos);
      if (nl == std::string_view::npos) nl = body.size();
      std::string line = trim(body.substr(pos, nl - pos));
      pos = nl + 1;
      if (line.empty() || line.front() == '#') continue;
      bin.ids_.insert(parse_hex64(line));
    }
    return bin;
  }

  std::string serialize() const {
    std::string out = "# contradiction bin: rejected ground-truth chunk ids (fnv1a64)\n";
    for (auto id : ids_) out += to_hex(id) + "\n";
    return out;
  }

  /// Missing file loads as an empty bin.
  static ChunkBin load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return {};
    return parse(read_text_file(path));
  }

  void save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write bin file: " + path);
    out << serialize();
  }

  friend bool operator==(const ChunkBin&, const ChunkBin&) = default;

 private:
  std::set<std::uint64_t> ids_;
};

// ------------------------------------------------------------------ filtering

struct FilterConfig {
  double threshold = 0.5;
  std::size_t max_author_chunks = 0;  // 0 = scan every author chunk
  std::size_t max_retries = 2;        // extra attempts per provider call
  std::size_t max_in_flight = 4;      // ground chunks judged concurrently
  std::string bin_path;

  void validate() const {
    if (!(threshold > 0.0 && threshold < 1.0)) throw ConfigError("threshold must lie in (0, 1)");
    if (max_in_flight == 0) throw ConfigError("max_in_flight must be >= 1");
  }
};

enum class ChunkDecision { accepted, rejected, undecided };

inline const char* to_string(ChunkDecision d) {
  switch (d) {
    case ChunkDecision::accepted: return "accepted";
    case ChunkDecision::rejected: return "rejected";
    case ChunkDecision::undecided: return "undecided";
  }
  return "?";
}

struct TrailEntry {
  std::size_t author_index = 0;
  NliVerdict verdict;
};

/// Everything that happened while judging one ground chunk.
struct ChunkJudgement {
  std::uint64_t chunk_id = 0;
  ChunkDecision decision = ChunkDecision::accepted;
  bool bin_hit = false;
  std::size_t provider_calls = 0;  // including failed attempts
  std::vector<TrailEntry> trail;
  std::string error;
};

namespace detail {

inline std::size_t author_scan_length(std::size_t n_author, const FilterConfig& cfg) {
  return cfg.max_author_chunks == 0 ? n_author : std::min(n_author, cfg.max_author_chunks);
}

/// Scans author chunks without touching the bin. Returns the index of the first
/// author chunk that contradicts, nullopt when none does; throws ProviderError
/// once retries are exhausted.
inline std::optional<std::size_t> scan_authors(const TextChunk& chunk, const std::vector<TextChunk>& author_chunks,
                                               NliProvider& provider, const FilterConfig& cfg, ChunkJudgement& j) {
  const std::size_t n = author_scan_length(author_chunks.size(), cfg);
  for (std::size_t a = 0; a < n; ++a) {
    NliVerdict v;
    for (std::size_t attempt = 0;; ++attempt) {
      ++j.provider_calls;
      try {
        v = provider.classify(author_chunks[a].text, chunk.text);
        break;
      } catch (const ProtocolError&) {
        throw;
      } catch (const ProviderError&) {
        if (attempt >= cfg.max_retries) throw;
      }
    }
    j.trail.push_back({a, v});
    if (v.contradiction >= cfg.threshold) return a;
  }
  return std::nullopt;
}

}  // namespace detail

/// Judges one ground chunk. `bin_mutex`, when given, guards the bin.
inline ChunkJudgement judge_chunk(const TextChunk& chunk, const std::vector<TextChunk>& author_chunks,
                                  NliProvider& provider, const FilterConfig& cfg, ChunkBin& bin,
                                  std::mutex* bin_mutex = nullptr) {
  ChunkJudgement j;
  j.chunk_id = chunk.id;
  {
    std::unique_lock lock = bin_mutex ? std::unique_lock(*bin_mutex) : std::unique_lock<std::mutex>();
    if (bin.contains(chunk.id)) {
      j.decision = ChunkDecision::rejected;
      j.bin_hit = true;
      return j;
    }
  }
  try {
    if (detail::scan_authors(chunk, author_chunks, provider, cfg, j)) {
      std::unique_lock lock = bin_mutex ? std::unique_lock(*bin_mutex) : std::unique_lock<std::mutex>();
      bin.insert(chunk.id);
      j.decision = ChunkDecision::rejected;
    } else {
      j.decision = ChunkDecision::accepted;
    }
  } catch (const ProviderError& e) {
    j.decision = ChunkDecision::undecided;
    j.error = e.what();
  }
  return j;
}

/// True when the chunk contradicts the author corpus (or is already binned).
/// Throws ProviderError when the provider keeps failing.
inline bool is_contradicted(const TextChunk& chunk, const std::vector<TextChunk>& author_chunks, NliProvider& provider,
                            const FilterConfig& cfg, ChunkBin& bin) {
  if (chunk.source != ChunkSource::ground_truth) throw DataError("is_contradicted expects a ground-truth chunk");
  if (author_chunks.empty()) throw DataError("no author chunks to compare against");
  cfg.validate();
  auto j = judge_chunk(chunk, author_chunks, provider, cfg, bin);
  if (j.decision == ChunkDecision::undecided) throw ProviderError(j.error);
  return j.decision == ChunkDecision::rejected;
}

struct FilterResult {
  std::vector<TextChunk> accepted;
  std::vector<TextChunk> rejected;
  std::vector<TextChunk> undecided;
  std::vector<ChunkJudgement> judgements;  // input order
  std::size_t provider_calls = 0;
};

/// Partitions ground chunks, preserving input order within each part. Up to
/// `cfg.max_in_flight` chunks are judged concurrently; each chunk's scan is sequential.
inline FilterResult filter_corpus(const std::vector<TextChunk>& ground_chunks, const std::vector<TextChunk>& author_chunks,
                                  NliProvider& provider, const FilterConfig& cfg, ChunkBin& bin) {
  cfg.validate();
  FilterResult result;
  if (ground_chunks.empty()) return result;
  if (author_chunks.empty()) throw DataError("no author chunks to compare against");

  std::vector<ChunkJudgement> judgements(ground_chunks.size());
  std::mutex bin_mutex;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < ground_chunks.size();)
      judgements[i] = judge_chunk(ground_chunks[i], author_chunks, provider, cfg, bin, &bin_mutex);
  };
  const std::size_t n_threads = std::min(cfg.max_in_flight, ground_chunks.size());
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }

  for (std::size_t i = 0; i < ground_chunks.size(); ++i) {
    result.provider_calls += judgements[i].provider_calls;
    switch (judgements[i].decision) {
      case ChunkDecision::accepted: result.accepted.push_back(ground_chunks[i]); break;
      case ChunkDecision::rejected: result.rejected.push_back(ground_chunks[i]); break;
      case ChunkDecision::undecided: result.undecided.push_back(ground_chunks[i]); break;
    }
  }
  result.judgements = std::move(judgements);
  return result;
}

}  // namespace stylelm
