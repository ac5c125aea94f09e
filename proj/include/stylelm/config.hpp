#pragma once

// Training and run configuration, with JSON mapping. Every field has a default;
// a config file only needs the fields it changes.

#include <cstdint>
#include <json.hpp>
#include <set>
#include <string>

#include "stylelm/corpus.hpp"
#include "stylelm/errors.hpp"
#include "stylelm/filter.hpp"
#include "stylelm/nn.hpp"
#include "stylelm/optim.hpp"

namespace stylelm {

using Json = nlohmann::json;

/// Update steps per pipeline phase (one step = one window, batch size 1).
struct PhaseSteps {
  std::size_t author = 25000;
  std::size_t ground = 2000;
  std::size_t neutral = 1000;
  friend bool operator==(const PhaseSteps&, const PhaseSteps&) = default;
};

struct TrainConfig {
  Architecture architecture = Architecture::bilstm;
  std::size_t hidden = 100;
  std::size_t seq_len = 100;
  std::size_t stride = 1;
  std::size_t author_chunk_len = 1000;
  std::size_t ground_chunk_len = 0;   // 0: seq_len + 1, i.e. one chunk per paragraph
  std::size_t neutral_chunk_len = 0;  // 0: 2 * seq_len
  std::size_t neutral_max_per_word = 2;
  PhaseSteps steps;
  std::size_t log_window = 100;
  OptimConfig optim;
  double ground_lr_scale = 1.0;
  double neutral_lr_scale = 1.0;
  std::uint64_t seed = 42;
  NormalizeOptions normalize;

  std::size_t effective_ground_chunk_len() const { return ground_chunk_len ? ground_chunk_len : seq_len + 1; }
  std::size_t effective_neutral_chunk_len() const { return neutral_chunk_len ? neutral_chunk_len : 2 * seq_len; }

  void validate() const {
    if (hidden == 0 || seq_len == 0) throw ConfigError("hidden and seq_len must be positive");
    if (stride == 0) throw ConfigError("stride must be positive");
    if (log_window == 0) throw ConfigError("log_window must be positive");
    if (effective_neutral_chunk_len() < seq_len + 1) throw ConfigError("neutral_chunk_len must be >= seq_len + 1");
    if (!(ground_lr_scale > 0.0) || !(neutral_lr_scale > 0.0)) throw ConfigError("lr scales must be > 0");
    optim.validate();
  }
};

/// Everything a `train`, `filter`, `eval` or `compare` run reads from its config file.
struct RunConfig {
  TrainConfig train;
  FilterConfig filter;
  std::string provider = "heuristic";  // "heuristic" or "remote:<url>"
  std::string author_path;
  std::string ground_path;
  std::string neutral_path;
  std::string dictionary_path;
  std::string stopwords_path;
  std::string test_path;
  std::string other_author_path;
  std::string output_dir = "out";
};

// ------------------------------------------------------------------ JSON

namespace detail {

template <class T>
void read_field(const Json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("config field '") + key + "': " + e.what());
  }
}

inline void reject_unknown(const Json& j, const std::set<std::string>& known, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [k, v] : j.items())
    if (!known.count(k)) throw ConfigError("unknown config field '" + where + "." + k + "'");
}

}  // namespace detail

inline Json to_json(const OptimConfig& c) {
  return {{"algorithm", std::string(to_string(c.algorithm))}, {"learning_rate", c.learning_rate},
          {"beta1", c.beta1}, {"beta2", c.beta2}, {"eps", c.eps}, {"clip_norm", c.clip_norm}};
}

inline OptimConfig optim_config_from_json(const Json& j) {
  detail::reject_unknown(j, {"algorithm", "learning_rate", "beta1", "beta2", "eps", "clip_norm"}, "optim");
  OptimConfig c;
  std::string algo(to_string(c.algorithm));
  detail::read_field(j, "algorithm", algo);
  c.algorithm = parse_optim_algorithm(algo);
  detail::read_field(j, "learning_rate", c.learning_rate);
  detail::read_field(j, "beta1", c.beta1);
  detail::read_field(j, "beta2", c.beta2);
  detail::read_field(j, "eps", c.eps);
  detail::read_field(j, "clip_norm", c.clip_norm);
  return c;
}

inline Json to_json(const TrainConfig& c) {
  return {{"architecture", std::string(to_string(c.architecture))},
          {"hidden", c.hidden},
          {"seq_len", c.seq_len},
          {"stride", c.stride},
          {"author_chunk_len", c.author_chunk_len},
          {"ground_chunk_len", c.ground_chunk_len},
          {"neutral_chunk_len", c.neutral_chunk_len},
          {"neutral_max_per_word", c.neutral_max_per_word},
          {"steps", {{"author", c.steps.author}, {"ground", c.steps.ground}, {"neutral", c.steps.neutral}}},
          {"log_window", c.log_window},
          {"optim", to_json(c.optim)},
          {"ground_lr_scale", c.ground_lr_scale},
          {"neutral_lr_scale", c.neutral_lr_scale},
          {"seed", c.seed},
          {"normalize",
           {{"lowercase", c.normalize.lowercase},
            {"collapse_whitespace", c.normalize.collapse_whitespace},
            {"strip_nonprintable", c.normalize.strip_nonprintable}}}};
}

inline TrainConfig train_config_from_json(const Json& j) {
  detail::reject_unknown(j,
                         {"architecture", "hidden", "seq_len", "stride", "author_chunk_len", "ground_chunk_len",
                          "neutral_chunk_len", "neutral_max_per_word", "steps", "log_window", "optim",
                          "ground_lr_scale", "neutral_lr_scale", "seed", "normalize"},
                         "train");
  TrainConfig c;
  std::string arch(to_string(c.architecture));
  detail::read_field(j, "architecture", arch);
  c.architecture = parse_architecture(arch);
  detail::read_field(j, "hidden", c.hidden);
  detail::read_field(j, "seq_len", c.seq_len);
  detail::read_field(j, "stride", c.stride);
  detail::read_field(j, "author_chunk_len", c.author_chunk_len);
  detail::read_field(j, "ground_chunk_len", c.ground_chunk_len);
  detail::read_field(j, "neutral_chunk_len", c.neutral_chunk_len);
  detail::read_field(j, "neutral_max_per_word", c.neutral_max_per_word);
  if (j.contains("steps")) {
    const auto& s = j["steps"];
    detail::reject_unknown(s, {"author", "ground", "neutral"}, "train.steps");
    detail::read_field(s, "author", c.steps.author);
    detail::read_field(s, "ground", c.steps.ground);
    detail::read_field(s, "neutral", c.steps.neutral);
  }
  detail::read_field(j, "log_window", c.log_window);
  if (j.contains("optim")) c.optim = optim_config_from_json(j["optim"]);
  detail::read_field(j, "ground_lr_scale", c.ground_lr_scale);
  detail::read_field(j, "neutral_lr_scale", c.neutral_lr_scale);
  detail::read_field(j, "seed", c.seed);
  if (j.contains("normalize")) {
    const auto& n = j["normalize"];
    detail::reject_unknown(n, {"lowercase", "collapse_whitespace", "strip_nonprintable"}, "train.normalize");
    detail::read_field(n, "lowercase", c.normalize.lowercase);
    detail::read_field(n, "collapse_whitespace", c.normalize.collapse_whitespace);
    detail::read_field(n, "strip_nonprintable", c.normalize.strip_nonprintable);
  }
  c.validate();
  return c;
}

inline Json to_json(const FilterConfig& c) {
  return {{"threshold", c.threshold},       {"premise_role", "author"},
          {"max_author_chunks", c.max_author_chunks}, {"max_retries", c.max_retries},
          {"max_in_flight", c.max_in_flight}, {"bin_path", c.bin_path}};
}

inline FilterConfig filter_config_from_json(const Json& j) {
  detail::reject_unknown(j, {"threshold", "premise_role", "max_author_chunks", "max_retries", "max_in_flight", "bin_path"},
                         "filter");
  FilterConfig c;
  detail::read_field(j, "threshold", c.threshold);
  std::string role = "author";
  detail::read_field(j, "premise_role", role);
  if (role != "author") throw ConfigError("filter.premise_role is fixed to \"author\"");
  detail::read_field(j, "max_author_chunks", c.max_author_chunks);
  detail::read_field(j, "max_retries", c.max_retries);
  detail::read_field(j, "max_in_flight", c.max_in_flight);
  detail::read_field(j, "bin_path", c.bin_path);
  c.validate();
  return c;
}

inline Json to_json(const RunConfig& c) {
  return {{"train", to_json(c.train)},
          {"filter", to_json(c.filter)},
          {"provider", c.provider},
          {"corpora",
           {{"author", c.author_path},
            {"ground", c.ground_path},
            {"neutral", c.neutral_path},
            {"dictionary", c.dictionary_path},
            {"stopwords", c.stopwords_path},
            {"test", c.test_path},
            {"other_author", c.other_author_path}}},
          {"output_dir", c.output_dir}};
}

/// Relative corpus paths resolve against `base_dir` (the config file's directory).
inline RunConfig run_config_from_json(const Json& j, const std::string& base_dir = "") {
  detail::reject_unknown(j, {"train", "filter", "provider", "corpora", "output_dir", "$schema"}, "config");
  RunConfig c;
  if (j.contains("train")) c.train = train_config_from_json(j["train"]);
  if (j.contains("filter")) c.filter = filter_config_from_json(j["filter"]);
  detail::read_field(j, "provider", c.provider);
  if (c.provider != "heuristic" && c.provider != "remote" && c.provider.rfind("remote:", 0) != 0)
    throw ConfigError("provider must be \"heuristic\", \"remote\" or \"remote:<url>\"");
  auto resolve = [&](std::string& p) {
    if (!p.empty() && p.front() != '/' && !base_dir.empty()) p = base_dir + "/" + p;
  };
  if (j.contains("corpora")) {
    const auto& k = j["corpora"];
    detail::reject_unknown(k, {"author", "ground", "neutral", "dictionary", "stopwords", "test", "other_author"},
                           "corpora");
    detail::read_field(k, "author", c.author_path);
    detail::read_field(k, "ground", c.ground_path);
    detail::read_field(k, "neutral", c.neutral_path);
    detail::read_field(k, "dictionary", c.dictionary_path);
    detail::read_field(k, "stopwords", c.stopwords_path);
    detail::read_field(k, "test", c.test_path);
    detail::read_field(k, "other_author", c.other_author_path);
  }
  for (auto* p : {&c.author_path, &c.ground_path, &c.neutral_path, &c.dictionary_path, &c.stopwords_path, &c.test_path,
                  &c.other_author_path})
    resolve(*p);
  detail::read_field(j, "output_dir", c.output_dir);
  if (!c.filter.bin_path.empty()) resolve(c.filter.bin_path);
  return c;
}

inline RunConfig load_run_config(const std::string& path) {
  std::string body;
  try {
    body = read_text_file(path);
  } catch (const DataError&) {
    throw ConfigError("cannot read config file: " + path);
  }
  Json j;
  try {
    j = Json::parse(body);
  } catch (const Json::parse_error& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
  const auto slash = path.find_last_of('/');
  return run_config_from_json(j, slash == std::string::npos ? "" : path.substr(0, slash));
}

}  // namespace stylelm
