#pragma once

// Perplexity, same-vs-other author comparison, non-dictionary rate and the
// architecture comparison.

#include <cmath>
#include <string>
#include <vector>

#include "stylelm/checkpoint.hpp"
#include "stylelm/corpus.hpp"
#include "stylelm/errors.hpp"
#include "stylelm/generate.hpp"
#include "stylelm/nn.hpp"
#include "stylelm/train.hpp"

namespace stylelm {

// ------------------------------------------------------------------ perplexity

struct PositionProb {
  std::size_t position = 0;  // index of the predicted character in the text
  char c = 0;
  double prob = 0.0;
};

struct PerplexityResult {
  double loss = 0.0;  // mean NLL in nats
  double pp = 0.0;    // exp(loss)
  std::size_t n = 0;  // predicted positions
};

/// Slides a seq_len window with stride 1 and predicts every following character.
inline PerplexityResult perplexity(const ModelParams& params, const Vocabulary& vocab, std::string_view text,
                                   std::vector<PositionProb>* dump = nullptr) {
  const std::size_t L = params.shape.seq_len;
  if (text.size() < L + 1) throw DataError("chunk too short: perplexity needs at least seq_len + 1 characters");
  const auto ids = encode(text, vocab);
  double sum = 0.0;
  for (std::size_t i = L; i < ids.size(); ++i) {
    const Vector probs = predict(std::span<const CharId>(ids.data() + i - L, L), params);
    sum += cross_entropy(probs, ids[i]);
    if (dump) dump->push_back({i, text[i], probs[static_cast<std::size_t>(ids[i])]});
  }
  PerplexityResult r;
  r.n = ids.size() - L;
  r.loss = sum / static_cast<double>(r.n);
  r.pp = std::exp(r.loss);
  return r;
}

inline PerplexityResult perplexity(const Checkpoint& ck, std::string_view text, std::vector<PositionProb>* dump = nullptr) {
  return perplexity(ck.params, ck.vocab, text, dump);
}

/// Perplexity in the product domain: (prod p_i)^(-1/n). Underflows on long texts.
inline double product_perplexity(std::span<const double> probs) {
  double prod = 1.0;
  for (double p : probs) prod *= p;
  return std::pow(prod, -1.0 / static_cast<double>(probs.size()));
}

inline std::string prob_dump_csv(const std::vector<PositionProb>& dump) {
  std::string out = "position,char,prob\n";
  for (const auto& d : dump) {
    std::string c = d.c == '"' ? "\"\"\"\"" : (d.c == ',' || d.c == ' ' ? "\"" + std::string(1, d.c) + "\"" : std::string(1, d.c));
    out += std::to_string(d.position) + "," + c + "," + format_double(d.prob) + "\n";
  }
  return out;
}

// ------------------------------------------------------------------ words

/// 100 * |tokens not in dictionary| / |tokens|; 0 for a text without tokens.
inline double non_dictionary_rate(std::string_view text, const WordList& dictionary) {
  if (dictionary.empty()) throw DataError("dictionary is empty");
  const auto tokens = tokenize_words(text);
  if (tokens.empty()) return 0.0;
  std::size_t miss = 0;
  for (const auto& t : tokens)
    if (!dictionary.contains(t)) ++miss;
  return 100.0 * static_cast<double>(miss) / static_cast<double>(tokens.size());
}

// ------------------------------------------------------------------ reports

struct ExperimentRow {
  std::size_t experiment = 0;
  std::string corpus;  // "same_author", "other_author", "generated", "test"
  double loss = 0.0;
  double perplexity = 0.0;
  double non_dictionary_rate = -1.0;  // -1 when not measured
};

struct ExperimentReport {
  std::vector<ExperimentRow> rows;
  std::size_t wins = 0;  // experiments where same-author pp < other-author pp
  std::size_t ties = 0;
  Json metadata = Json::object();

  std::string to_csv() const {
    std::string out = "experiment,corpus,loss,perplexity,non_dictionary_rate\n";
    for (const auto& r : rows)
      out += std::to_string(r.experiment) + "," + r.corpus + "," + format_double(r.loss) + "," +
             format_double(r.perplexity) + "," + (r.non_dictionary_rate < 0 ? "" : format_double(r.non_dictionary_rate)) +
             "\n";
    return out;
  }

  Json to_json() const {
    Json arr = Json::array();
    for (const auto& r : rows) {
      Json j = {{"experiment", r.experiment}, {"corpus", r.corpus}, {"loss", r.loss}, {"perplexity", r.perplexity}};
      j["non_dictionary_rate"] = r.non_dictionary_rate < 0 ? Json(nullptr) : Json(r.non_dictionary_rate);
      arr.push_back(j);
    }
    return {{"rows", arr}, {"wins", wins}, {"ties", ties}, {"metadata", metadata}};
  }
};

/// Disjoint consecutive chunks of `chunk_len` characters.
inline std::vector<std::string> consecutive_chunks(std::string_view text, std::size_t chunk_len, std::size_t count) {
  if (chunk_len == 0) throw ConfigError("chunk length must be positive");
  if (text.size() / chunk_len < count)
    throw DataError("text of " + std::to_string(text.size()) + " characters holds fewer than " + std::to_string(count) +
                    " chunks of " + std::to_string(chunk_len));
  std::vector<std::string> out;
  for (std::size_t i = 0; i < count; ++i) out.emplace_back(text.substr(i * chunk_len, chunk_len));
  return out;
}

inline ExperimentReport author_comparison(const Checkpoint& ck, const std::vector<std::string>& same_chunks,
                                          const std::vector<std::string>& other_chunks, std::size_t n_experiments) {
  if (same_chunks.size() < n_experiments || other_chunks.size() < n_experiments)
    throw DataError("author comparison needs " + std::to_string(n_experiments) + " chunks per side");
  ExperimentReport rep;
  for (std::size_t i = 0; i < n_experiments; ++i) {
    const auto s = perplexity(ck, same_chunks[i]);
    const auto o = perplexity(ck, other_chunks[i]);
    rep.rows.push_back({i + 1, "same_author", s.loss, s.pp});
    rep.rows.push_back({i + 1, "other_author", o.loss, o.pp});
    if (s.pp < o.pp) ++rep.wins;
    else if (s.pp == o.pp) ++rep.ties;
  }
  rep.metadata["n_experiments"] = n_experiments;
  rep.metadata["pad_char"] = std::string(1, ck.pad_char);
  return rep;
}

/// One generated continuation per experiment, prompted with the start of each chunk.
inline std::vector<ExperimentRow> generation_experiments(const Checkpoint& ck, const std::vector<std::string>& prompts_from,
                                                         const WordList& dictionary, std::size_t prompt_len,
                                                         const SamplingConfig& base) {
  std::vector<ExperimentRow> rows;
  for (std::size_t i = 0; i < prompts_from.size(); ++i) {
    SamplingConfig cfg = base;
    cfg.seed = base.seed + i;
    const std::string prompt = prompts_from[i].substr(0, prompt_len);
    const auto g = generate_traced(ck.params, ck.vocab, ck.pad_char, prompt, cfg);
    double nll = 0.0;
    for (const auto& t : g.trace) nll -= std::log(t.model_prob + kLogFloor);
    const double loss = g.trace.empty() ? 0.0 : nll / static_cast<double>(g.trace.size());
    rows.push_back({i + 1, "generated", loss, std::exp(loss), non_dictionary_rate(g.text.substr(prompt.size()), dictionary)});
  }
  return rows;
}

// ------------------------------------------------------------------ architectures

struct ComparisonRow {
  std::uint64_t seed = 0;
  Architecture arch = Architecture::bilstm;
  double train_loss = 0.0;  // mean of the final log windows
  double loss = 0.0;        // held-out
  double perplexity = 0.0;
};

struct ComparisonTable {
  std::vector<ComparisonRow> rows;

  /// pp(bilstm) <= pp(lstm_uni) <= pp(rnn) for this seed.
  bool ordered(std::uint64_t seed) const {
    double pb = NAN, pu = NAN, pr = NAN;
    for (const auto& r : rows) {
      if (r.seed != seed) continue;
      if (r.arch == Architecture::bilstm) pb = r.perplexity;
      if (r.arch == Architecture::lstm_uni) pu = r.perplexity;
      if (r.arch == Architecture::rnn) pr = r.perplexity;
    }
    return pb <= pu && pu <= pr;
  }

  std::vector<std::uint64_t> seeds() const {
    std::vector<std::uint64_t> s;
    for (const auto& r : rows)
      if (std::find(s.begin(), s.end(), r.seed) == s.end()) s.push_back(r.seed);
    return s;
  }

  std::string to_csv() const {
    std::string out = "seed,architecture,train_loss,loss,perplexity\n";
    for (const auto& r : rows)
      out += std::to_string(r.seed) + "," + std::string(to_string(r.arch)) + "," + format_double(r.train_loss) + "," +
             format_double(r.loss) + "," + format_double(r.perplexity) + "\n";
    return out;
  }

  Json to_json() const {
    Json arr = Json::array();
    for (const auto& r : rows)
      arr.push_back({{"seed", r.seed}, {"architecture", std::string(to_string(r.arch))}, {"train_loss", r.train_loss},
                     {"loss", r.loss}, {"perplexity", r.perplexity}});
    Json ord = Json::object();
    for (auto s : seeds()) ord[std::to_string(s)] = ordered(s);
    return {{"rows", arr}, {"ordered_by_seed", ord}};
  }
};

/// Trains each architecture on the author corpus under the same budget, seed
/// and data order, then scores the held-out text. A zero budget reports the
/// untrained uniform model.
inline ComparisonTable compare_architectures(const std::string& author_text, const std::string& test_text,
                                             const TrainConfig& base, const std::vector<Architecture>& archs,
                                             const std::vector<std::uint64_t>& seeds, const RowCallback& on_row = {}) {
  base.validate();
  const auto chunks = chunk_corpus(author_text, base.author_chunk_len, ChunkSource::author, base.normalize);
  if (chunks.empty()) throw DataError("empty corpus: author text has no content");
  const std::string test = normalize_text(test_text, base.normalize);
  std::string all;
  for (const auto& c : chunks) all += c.text + " ";
  const Vocabulary vocab = build_vocab(all + test);

  ComparisonTable table;
  for (auto seed : seeds)
    for (auto arch : archs) {
      TrainConfig cfg = base;
      cfg.architecture = arch;
      cfg.seed = seed;
      const ModelShape shape{arch, cfg.hidden, vocab.size(), cfg.seq_len};
      ModelParams params = cfg.steps.author == 0 ? ModelParams::zeros(shape) : ModelParams::initialized(shape, seed);
      OptimState state = OptimState::for_params(params);
      TrainingLog log;
      run_phase(params, state, chunks, vocab, cfg, "author", cfg.steps.author, 1.0, log, on_row);
      ComparisonRow row;
      row.seed = seed;
      row.arch = arch;
      row.train_loss = log.rows.empty() ? std::log(static_cast<double>(vocab.size())) : log.window_mean("author", 10, true);
      const auto r = perplexity(params, vocab, test);
      row.loss = r.loss;
      row.perplexity = r.pp;
      table.rows.push_back(row);
    }
  return table;
}

}  // namespace stylelm
