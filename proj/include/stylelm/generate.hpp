#pragma once

// Prompt-conditioned character generation: predict, sample, slide the window.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "stylelm/checkpoint.hpp"
#include "stylelm/corpus.hpp"
#include "stylelm/errors.hpp"
#include "stylelm/nn.hpp"
#include "stylelm/random.hpp"

namespace stylelm {

enum class SamplingMode { greedy, temperature, top_k };

inline std::string_view to_string(SamplingMode m) {
  switch (m) {
    case SamplingMode::greedy: return "greedy";
    case SamplingMode::temperature: return "temperature";
    case SamplingMode::top_k: return "top_k";
  }
  return "?";
}

inline SamplingMode parse_sampling_mode(std::string_view s) {
  if (s == "greedy") return SamplingMode::greedy;
  if (s == "temperature") return SamplingMode::temperature;
  if (s == "top_k" || s == "top-k") return SamplingMode::top_k;
  throw ConfigError("unknown sampling mode '" + std::string(s) + "' (expected greedy, temperature or top_k)");
}

struct SamplingConfig {
  SamplingMode mode = SamplingMode::temperature;
  double temperature = 0.8;
  std::size_t k = 5;
  std::uint64_t seed = 0;
  std::size_t length = 200;

  void validate() const {
    if (!(temperature > 0.0) || !std::isfinite(temperature)) throw ConfigError("temperature must be > 0");
    if (k == 0) throw ConfigError("k must be >= 1");
  }
};

/// Ties go to the lowest id.
inline CharId argmax(std::span<const double> p) {
  return static_cast<CharId>(std::max_element(p.begin(), p.end()) - p.begin());
}

/// Distribution actually sampled from: p^(1/tau), restricted to the k most
/// probable ids in top_k mode, renormalized. Computed in the log domain.
inline Vector sampling_distribution(std::span<const double> probs, const SamplingConfig& cfg) {
  const std::size_t n = probs.size();
  std::vector<bool> keep(n, true);
  if (cfg.mode == SamplingMode::top_k && cfg.k < n) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return probs[a] > probs[b]; });
    std::fill(keep.begin(), keep.end(), false);
    for (std::size_t i = 0; i < cfg.k; ++i) keep[order[i]] = true;
  }
  Vector z(n, -std::numeric_limits<double>::infinity());
  double zmax = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i)
    if (keep[i] && probs[i] > 0.0) {
      z[i] = std::log(probs[i]) / cfg.temperature;
      zmax = std::max(zmax, z[i]);
    }
  Vector q(n, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    if (std::isfinite(z[i])) total += q[i] = std::exp(z[i] - zmax);
  for (double& x : q) x /= total;
  return q;
}

inline CharId sample_next(std::span<const double> probs, const SamplingConfig& cfg, Rng& rng) {
  if (cfg.mode == SamplingMode::greedy) return argmax(probs);
  const Vector q = sampling_distribution(probs, cfg);
  const double u = rng.uniform();
  double acc = 0.0;
  CharId last = 0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q[i] <= 0.0) continue;
    last = static_cast<CharId>(i);
    acc += q[i];
    if (u < acc) return last;
  }
  return last;
}

/// Throws DataError listing every prompt character outside the vocabulary.
inline std::vector<CharId> encode_prompt(std::string_view prompt, const Vocabulary& vocab) {
  std::string bad;
  for (std::size_t i = 0; i < prompt.size(); ++i)
    if (!vocab.contains(prompt[i])) {
      if (!bad.empty()) bad += ", ";
      bad += describe_byte(prompt[i]) + " at " + std::to_string(i);
    }
  if (!bad.empty()) throw DataError("prompt characters not in the vocabulary: " + bad);
  return encode(prompt, vocab);
}

/// First window: the prompt left-padded with `pad` or cut to its last seq_len characters.
inline std::vector<CharId> initial_window(std::span<const CharId> prompt, CharId pad, std::size_t seq_len) {
  std::vector<CharId> w;
  if (prompt.size() >= seq_len) {
    w.assign(prompt.end() - static_cast<std::ptrdiff_t>(seq_len), prompt.end());
  } else {
    w.assign(seq_len - prompt.size(), pad);
    w.insert(w.end(), prompt.begin(), prompt.end());
  }
  return w;
}

struct GeneratedChar {
  CharId id = 0;
  double model_prob = 0.0;
};

struct Generation {
  std::string text;  // prompt + continuation
  std::vector<GeneratedChar> trace;
};

inline Generation generate_traced(const ModelParams& params, const Vocabulary& vocab, char pad_char,
                                  std::string_view prompt, const SamplingConfig& cfg) {
  cfg.validate();
  if (prompt.empty()) throw DataError("prompt must contain at least one character");
  if (!vocab.contains(pad_char)) throw DataError("pad character is not in the vocabulary");
  const auto ids = encode_prompt(prompt, vocab);
  auto window = initial_window(ids, vocab.index_of(pad_char), params.shape.seq_len);
  Rng rng(cfg.seed);
  Generation g;
  g.text = std::string(prompt);
  g.trace.reserve(cfg.length);
  for (std::size_t n = 0; n < cfg.length; ++n) {
    const Vector probs = predict(window, params);
    const CharId next = sample_next(probs, cfg, rng);
    g.trace.push_back({next, probs[static_cast<std::size_t>(next)]});
    g.text.push_back(vocab.char_at(next));
    std::rotate(window.begin(), window.begin() + 1, window.end());
    window.back() = next;
  }
  return g;
}

inline std::string generate(const Checkpoint& ck, std::string_view prompt, const SamplingConfig& cfg) {
  return generate_traced(ck.params, ck.vocab, ck.pad_char, prompt, cfg).text;
}

}  // namespace stylelm
