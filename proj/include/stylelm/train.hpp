#pragma once

// Training loop and the three-phase pipeline: author corpus, contradiction-
// filtered ground truth, then neutral vocabulary-extension chunks.

#include <cmath>
#include <cstdio>
#include <functional>
#include <future>
#include <span>
#include <string>
#include <vector>

#include "stylelm/checkpoint.hpp"
#include "stylelm/config.hpp"
#include "stylelm/corpus.hpp"
#include "stylelm/errors.hpp"
#include "stylelm/filter.hpp"
#include "stylelm/nn.hpp"
#include "stylelm/optim.hpp"

namespace stylelm {

// ------------------------------------------------------------------ log

struct LogRow {
  std::size_t window = 0;      // global, strictly increasing
  std::string phase;
  std::size_t first_step = 0;  // global step of the first loss in the window
  std::size_t steps = 0;       // losses averaged (log_window, or fewer at a phase end)
  double mean_loss = 0.0;
  double mean_perplexity = 0.0;
};

struct StepLoss {
  std::size_t step = 0;
  std::string phase;
  double loss = 0.0;
};

inline std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

struct TrainingLog {
  std::vector<LogRow> rows;
  std::vector<StepLoss> losses;
  std::vector<std::string> warnings;

  std::size_t total_steps() const noexcept { return losses.size(); }

  std::vector<LogRow> phase_rows(std::string_view phase) const {
    std::vector<LogRow> out;
    for (const auto& r : rows)
      if (r.phase == phase) out.push_back(r);
    return out;
  }

  /// Mean of the window means over the first (or last) `n` rows of a phase.
  double window_mean(std::string_view phase, std::size_t n, bool from_end) const {
    const auto pr = phase_rows(phase);
    if (pr.empty()) throw DataError("no log rows for phase " + std::string(phase));
    n = std::min(n, pr.size());
    double sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) sum += pr[from_end ? pr.size() - n + k : k].mean_loss;
    return sum / static_cast<double>(n);
  }

  std::string to_csv() const {
    std::string out = "window,mean_loss,mean_perplexity\n";
    for (const auto& r : rows)
      out += std::to_string(r.window) + "," + format_double(r.mean_loss) + "," + format_double(r.mean_perplexity) + "\n";
    return out;
  }

  std::string losses_csv() const {
    std::string out = "step,phase,loss\n";
    for (const auto& s : losses) out += std::to_string(s.step) + "," + s.phase + "," + format_double(s.loss) + "\n";
    return out;
  }

  Json windows_json() const {
    Json arr = Json::array();
    for (const auto& r : rows)
      arr.push_back({{"window", r.window}, {"phase", r.phase}, {"first_step", r.first_step}, {"steps", r.steps},
                     {"mean_loss", r.mean_loss}, {"mean_perplexity", r.mean_perplexity}});
    return arr;
  }
};

// ------------------------------------------------------------------ steps

/// Forward, loss, BPTT, clip, optimizer step. Returns the pre-update loss.
/// On DivergenceError the parameters and optimizer state are left as they were.
inline double train_step(ModelParams& params, std::span<const CharId> window, CharId target, OptimState& state,
                         const OptimConfig& cfg) {
  auto lg = loss_and_gradients(params, window, target);
  if (!std::isfinite(lg.loss)) throw DivergenceError("non-finite loss at update " + std::to_string(state.t + 1));
  const double norm = global_norm(lg.grads);
  if (!std::isfinite(norm)) {
    detail::require_finite(lg.grads.tensors(), "gradient");
    throw DivergenceError("non-finite gradient norm");
  }
  ModelParams next = params;
  OptimState next_state = state;
  optimizer_step(next, clip_gradients(std::move(lg.grads), cfg.clip_norm), next_state, cfg);
  params = std::move(next);
  state = std::move(next_state);
  return lg.loss;
}

inline double train_step(ModelParams& params, const TrainingPair& pair, OptimState& state, const OptimConfig& cfg) {
  return train_step(params, pair.window, pair.target, state, cfg);
}

/// Cycles through the windows of a chunk list in order, never crossing chunk boundaries.
class PairCursor {
 public:
  PairCursor(const std::vector<TextChunk>& chunks, const Vocabulary& vocab, std::size_t seq_len, std::size_t stride,
             std::vector<std::string>& warnings)
      : seq_len_(seq_len), stride_(stride) {
    for (const auto& c : chunks) {
      if (c.text.size() < seq_len + 1) {
        warnings.push_back("skipped " + std::string(to_string(c.source)) + " chunk " + to_hex(c.id) + ": chunk too short");
        continue;
      }
      try {
        encoded_.push_back(encode(c.text, vocab));
      } catch (const DataError& e) {
        warnings.push_back("skipped " + std::string(to_string(c.source)) + " chunk " + to_hex(c.id) + ": " + e.what());
      }
    }
  }

  bool empty() const noexcept { return encoded_.empty(); }

  std::size_t pair_count() const {
    std::size_t n = 0;
    for (const auto& ids : encoded_) n += training_pair_count(ids.size(), seq_len_, stride_);
    return n;
  }

  /// Current window; advance() moves to the next one.
  std::span<const CharId> window() const { return {encoded_[chunk_].data() + pos_, seq_len_}; }
  CharId target() const { return encoded_[chunk_][pos_ + seq_len_]; }

  void advance() {
    pos_ += stride_;
    if (pos_ + seq_len_ >= encoded_[chunk_].size()) {
      pos_ = 0;
      chunk_ = (chunk_ + 1) % encoded_.size();
    }
  }

 private:
  std::size_t seq_len_;
  std::size_t stride_;
  std::vector<std::vector<CharId>> encoded_;
  std::size_t chunk_ = 0;
  std::size_t pos_ = 0;
};

using RowCallback = std::function<void(const LogRow&)>;

/// Runs `steps` updates over the chunks' windows, cycling when steps exceed pairs.
/// Appends per-step losses and one row per log window; a partial final window is
/// flushed at the end of the phase.
inline void run_phase(ModelParams& params, OptimState& state, const std::vector<TextChunk>& chunks,
                      const Vocabulary& vocab, const TrainConfig& cfg, std::string_view phase, std::size_t steps,
                      double lr_scale, TrainingLog& log, const RowCallback& on_row = {}) {
  if (steps == 0) return;
  PairCursor cursor(chunks, vocab, cfg.seq_len, cfg.stride, log.warnings);
  if (cursor.empty()) {
    log.warnings.push_back("phase " + std::string(phase) + " skipped: no trainable chunks");
    return;
  }
  OptimConfig opt = cfg.optim;
  opt.learning_rate *= lr_scale;

  double sum = 0.0;
  std::size_t count = 0;
  std::size_t first = log.total_steps();
  auto flush = [&] {
    LogRow row;
    row.window = log.rows.size();
    row.phase = std::string(phase);
    row.first_step = first;
    row.steps = count;
    row.mean_loss = sum / static_cast<double>(count);
    row.mean_perplexity = std::exp(row.mean_loss);
    log.rows.push_back(row);
    if (on_row) on_row(row);
    sum = 0.0;
    count = 0;
    first = log.total_steps();
  };

  for (std::size_t s = 0; s < steps; ++s) {
    const double loss = train_step(params, cursor.window(), cursor.target(), state, opt);
    log.losses.push_back({log.total_steps(), std::string(phase), loss});
    sum += loss;
    ++count;
    if (count == cfg.log_window) flush();
    cursor.advance();
  }
  if (count > 0) flush();
}

// ------------------------------------------------------------------ pipeline

struct PipelineInputs {
  std::string author_text;
  std::string ground_text;   // may be empty: Phase B is skipped
  std::string neutral_text;  // may be empty: Phase C is skipped
  WordList dictionary{{}, WordListKind::dictionary};
  WordList stopwords{{}, WordListKind::stopwords};
};

struct PipelineOptions {
  std::string last_good_path;  // written when training diverges
  RowCallback on_row;
};

struct PipelineResult {
  Checkpoint checkpoint;
  TrainingLog log;
  FilterResult filter;
  std::vector<TextChunk> author_chunks;
  std::vector<TextChunk> ground_chunks;
  std::size_t extension_words = 0;
  NeutralSelection neutral;
};

/// Author, ground and neutral chunks as the pipeline would see them.
struct PreparedCorpora {
  std::vector<TextChunk> author;
  std::vector<TextChunk> ground;
  WordList extension_words{{}, WordListKind::stopwords};
  NeutralSelection neutral;
  Vocabulary vocab;
  char pad_char = ' ';
  std::vector<std::string> warnings;
};

inline PreparedCorpora prepare_corpora(const PipelineInputs& in, const TrainConfig& cfg) {
  PreparedCorpora p;
  p.author = chunk_corpus(in.author_text, cfg.author_chunk_len, ChunkSource::author, cfg.normalize);
  if (p.author.empty()) throw DataError("empty corpus: author text has no content");
  if (!in.ground_text.empty())
    p.ground = chunk_corpus(in.ground_text, cfg.effective_ground_chunk_len(), ChunkSource::ground_truth, cfg.normalize);

  std::string author_all;
  for (const auto& c : p.author) author_all += c.text + " ";
  if (!in.neutral_text.empty() && !in.dictionary.words.empty()) {
    const auto missing = missing_words(in.dictionary, author_all);
    p.extension_words = candidate_extension_words(missing, in.stopwords);
    p.neutral = select_neutral_chunks(normalize_text(in.neutral_text, cfg.normalize), p.extension_words,
                                      cfg.effective_neutral_chunk_len(), cfg.neutral_max_per_word);
    if (!p.neutral.not_found.empty())
      p.warnings.push_back(std::to_string(p.neutral.not_found.size()) + " extension words not found in neutral text");
  } else if (!in.neutral_text.empty()) {
    p.warnings.push_back("no dictionary given: vocabulary extension skipped");
  }

  // Vocabulary over every chunk (ground chunks before filtering), so no phase meets an unknown character.
  std::string all = author_all;
  for (const auto& c : p.ground) all += c.text;
  for (const auto& c : p.neutral.chunks) all += c.text;
  p.vocab = build_vocab(all);
  p.pad_char = most_frequent_char(author_all);
  return p;
}

inline Json corpus_provenance(const PipelineInputs& in, const std::string& provider_name, const FilterConfig& fc) {
  return {{"corpus_hashes",
           {{"author", to_hex(fnv1a64(in.author_text))},
            {"ground", to_hex(fnv1a64(in.ground_text))},
            {"neutral", to_hex(fnv1a64(in.neutral_text))}}},
          {"provider", provider_name},
          {"filter", to_json(fc)}};
}

inline PipelineResult train_full_pipeline(const PipelineInputs& in, NliProvider& provider, const TrainConfig& cfg,
                                          const FilterConfig& fcfg, ChunkBin& bin, const PipelineOptions& opts = {}) {
  cfg.validate();
  fcfg.validate();
  PreparedCorpora prep = prepare_corpora(in, cfg);

  PipelineResult res;
  res.log.warnings = prep.warnings;
  res.author_chunks = prep.author;
  res.ground_chunks = prep.ground;
  res.extension_words = prep.extension_words.words.size();
  res.neutral = prep.neutral;

  // Filtering only reads chunks and the bin, so it overlaps with Phase A.
  std::future<FilterResult> filtered =
      std::async(std::launch::async, [&] { return filter_corpus(prep.ground, prep.author, provider, fcfg, bin); });

  const ModelShape shape{cfg.architecture, cfg.hidden, prep.vocab.size(), cfg.seq_len};
  Checkpoint& ck = res.checkpoint;
  ck.config = cfg;
  ck.vocab = prep.vocab;
  ck.pad_char = prep.pad_char;
  ck.params = ModelParams::initialized(shape, cfg.seed);
  ck.optim = OptimState::for_params(ck.params);
  ck.provenance = corpus_provenance(in, provider.name(), fcfg);

  auto phase = [&](const std::vector<TextChunk>& chunks, std::string_view name, std::size_t steps, double scale) {
    try {
      run_phase(ck.params, ck.optim, chunks, ck.vocab, cfg, name, steps, scale, res.log, opts.on_row);
    } catch (const DivergenceError&) {
      ck.step = res.log.total_steps();
      if (!opts.last_good_path.empty()) save_checkpoint(ck, opts.last_good_path);
      if (filtered.valid()) filtered.wait();
      throw;
    }
  };

  phase(prep.author, "author", cfg.steps.author, 1.0);
  res.filter = filtered.get();
  if (!res.filter.undecided.empty())
    res.log.warnings.push_back(std::to_string(res.filter.undecided.size()) + " ground chunks undecided and excluded");
  if (res.filter.accepted.empty() && cfg.steps.ground > 0)
    res.log.warnings.push_back("phase ground skipped: no accepted ground-truth chunks");
  else
    phase(res.filter.accepted, "ground", cfg.steps.ground, cfg.ground_lr_scale);
  if (prep.neutral.chunks.empty() && cfg.steps.neutral > 0)
    res.log.warnings.push_back("phase neutral skipped: no neutral chunks");
  else
    phase(prep.neutral.chunks, "neutral", cfg.steps.neutral, cfg.neutral_lr_scale);

  ck.step = res.log.total_steps();
  ck.provenance["phase_steps"] = {{"author", res.log.phase_rows("author").empty() ? 0 : cfg.steps.author},
                                  {"ground", res.log.phase_rows("ground").empty() ? 0 : cfg.steps.ground},
                                  {"neutral", res.log.phase_rows("neutral").empty() ? 0 : cfg.steps.neutral}};
  ck.provenance["filter_counts"] = {{"accepted", res.filter.accepted.size()},
                                    {"rejected", res.filter.rejected.size()},
                                    {"undecided", res.filter.undecided.size()}};
  return res;
}

}  // namespace stylelm
