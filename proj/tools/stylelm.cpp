// stylelm command-line tool: prep, train, generate, filter, eval, compare.
//
// Exit codes: 0 ok, 1 config, 2 data, 3 numeric divergence, 4 NLI provider.
// Failures print one line to stderr:
//   stylelm: error kind=<config|data|numeric|provider> exit=<n> message=<text>

#include <fcntl.h>
#include <unistd.h>

#include <CLI11.hpp>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "stylelm/stylelm.hpp"

namespace fs = std::filesystem;
using namespace stylelm;

namespace {

const char* kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::config: return "config";
    case ErrorKind::data: return "data";
    case ErrorKind::numeric: return "numeric";
    case ErrorKind::provider: return "provider";
  }
  return "unknown";
}

std::string one_line(std::string s) {
  for (char& c : s)
    if (c == '\n' || c == '\r') c = ' ';
  return s;
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_file(const fs::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << body;
  if (!out) throw DataError("failed writing " + path.string());
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create output directory " + dir.string() + ": " + ec.message());
}

/// Exclusive lock held for the lifetime of the object.
class LockFile {
 public:
  explicit LockFile(std::string path) : path_(std::move(path)) {
    fd_ = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd_ < 0)
      throw DataError("lock file " + path_ + " exists: another stylelm process is using it (remove it if stale)");
    const std::string pid = std::to_string(::getpid()) + "\n";
    [[maybe_unused]] auto n = ::write(fd_, pid.data(), pid.size());
  }
  ~LockFile() {
    if (fd_ >= 0) {
      ::close(fd_);
      ::unlink(path_.c_str());
    }
  }
  LockFile(const LockFile&) = delete;
  LockFile& operator=(const LockFile&) = delete;

 private:
  std::string path_;
  int fd_ = -1;
};

std::unique_ptr<NliProvider> make_provider(const std::string& spec) {
  if (spec == "heuristic") return std::make_unique<HeuristicProvider>();
  if (spec == "remote" || spec.rfind("remote:", 0) == 0) {
    std::string url = spec.size() > 7 ? spec.substr(7) : "";
    if (const char* env = std::getenv("STYLELM_NLI_ENDPOINT"); env && *env) url = env;
    if (url.empty()) throw ConfigError("remote provider needs a URL (remote:<url> or STYLELM_NLI_ENDPOINT)");
    return std::make_unique<RemoteProvider>(url);
  }
  throw ConfigError("provider must be \"heuristic\" or \"remote:<url>\", got '" + spec + "'");
}

std::string hash_file(const std::string& path) { return to_hex(fnv1a64(read_text_file(path))); }

std::string read_optional(const std::string& path) { return path.empty() ? std::string() : read_text_file(path); }

Json manifest_json(const std::string& command, const Json& config, const std::vector<std::string>& inputs,
                   const std::vector<std::string>& outputs, std::uint64_t seed, const std::string& started) {
  Json hashes = Json::object();
  for (const auto& p : inputs)
    if (!p.empty()) hashes[p] = hash_file(p);
  return {{"command", command},     {"tool_version", STYLELM_VERSION}, {"config", config},
          {"input_hashes", hashes}, {"seed", seed},                    {"started_at", started},
          {"finished_at", utc_now()}, {"outputs", outputs}};
}

std::string chunk_list(const std::vector<TextChunk>& chunks) {
  std::string out;
  for (const auto& c : chunks) out += to_hex(c.id) + "\t" + c.text + "\n";
  return out;
}

Json filter_report(const FilterResult& r, const std::vector<TextChunk>& ground, const std::vector<TextChunk>& author,
                   const FilterConfig& cfg, const std::string& provider) {
  Json chunks = Json::array();
  for (std::size_t i = 0; i < r.judgements.size(); ++i) {
    const auto& j = r.judgements[i];
    Json trail = Json::array();
    for (const auto& t : j.trail)
      trail.push_back({{"author_index", t.author_index},
                       {"author_chunk", to_hex(author[t.author_index].id)},
                       {"contradiction", t.verdict.contradiction},
                       {"neutral", t.verdict.neutral},
                       {"entailment", t.verdict.entailment}});
    Json c = {{"index", i},           {"chunk", to_hex(j.chunk_id)}, {"decision", to_string(j.decision)},
              {"bin_hit", j.bin_hit}, {"provider_calls", j.provider_calls}, {"trail", trail}};
    if (!j.error.empty()) c["error"] = j.error;
    (void)ground;
    chunks.push_back(c);
  }
  Json cfg_json = to_json(cfg);
  cfg_json.erase("bin_path");
  return {{"provider", provider},
          {"premise_role", "author"},
          {"filter", cfg_json},
          {"counts",
           {{"ground", ground.size()},
            {"author", author.size()},
            {"accepted", r.accepted.size()},
            {"rejected", r.rejected.size()},
            {"undecided", r.undecided.size()}}},
          {"provider_calls", r.provider_calls},
          {"chunks", chunks}};
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');)
    if (!trim(item).empty()) out.push_back(trim(item));
  return out;
}

// ------------------------------------------------------------------ train

struct TrainArgs {
  std::string config;
  std::string output;
  std::string provider;
  std::string bin;
  std::string architecture;
  std::int64_t seed = -1;
  std::int64_t steps_author = -1, steps_ground = -1, steps_neutral = -1;
  bool dump_losses = false;
  bool quiet = false;
};

int cmd_train(const TrainArgs& a) {
  const std::string started = utc_now();
  RunConfig rc = load_run_config(a.config);
  if (!a.output.empty()) rc.output_dir = a.output;
  if (!a.provider.empty()) rc.provider = a.provider;
  if (!a.bin.empty()) rc.filter.bin_path = a.bin;
  if (!a.architecture.empty()) rc.train.architecture = parse_architecture(a.architecture);
  if (a.seed >= 0) rc.train.seed = static_cast<std::uint64_t>(a.seed);
  if (a.steps_author >= 0) rc.train.steps.author = static_cast<std::size_t>(a.steps_author);
  if (a.steps_ground >= 0) rc.train.steps.ground = static_cast<std::size_t>(a.steps_ground);
  if (a.steps_neutral >= 0) rc.train.steps.neutral = static_cast<std::size_t>(a.steps_neutral);
  rc.train.validate();
  if (rc.author_path.empty()) throw ConfigError("corpora.author is required");

  PipelineInputs in;
  in.author_text = read_text_file(rc.author_path);
  in.ground_text = read_optional(rc.ground_path);
  in.neutral_text = read_optional(rc.neutral_path);
  if (!rc.dictionary_path.empty()) in.dictionary = load_word_list(rc.dictionary_path, WordListKind::dictionary);
  if (!rc.stopwords_path.empty()) in.stopwords = load_word_list(rc.stopwords_path, WordListKind::stopwords);

  const fs::path out = rc.output_dir;
  ensure_dir(out);
  LockFile out_lock((out / ".lock").string());
  std::unique_ptr<LockFile> bin_lock;
  if (!rc.filter.bin_path.empty()) bin_lock = std::make_unique<LockFile>(rc.filter.bin_path + ".lock");

  auto provider = make_provider(rc.provider);
  ChunkBin bin = rc.filter.bin_path.empty() ? ChunkBin() : ChunkBin::load(rc.filter.bin_path);

  PipelineOptions opts;
  opts.last_good_path = (out / "last_good.ckpt").string();
  if (!a.quiet)
    opts.on_row = [](const LogRow& r) {
      if ((r.window + 1) % 10 == 0 || r.steps < 100)
        std::cerr << "progress phase=" << r.phase << " window=" << r.window << " loss=" << r.mean_loss
                  << " pp=" << r.mean_perplexity << "\n";
    };
  PipelineResult res = train_full_pipeline(in, *provider, rc.train, rc.filter, bin, opts);
  if (!rc.filter.bin_path.empty()) bin.save(rc.filter.bin_path);

  std::vector<std::string> outputs = {"model.ckpt", "train_log.csv", "windows.json", "filter_report.json",
                                      "manifest.json"};
  save_checkpoint(res.checkpoint, (out / "model.ckpt").string());
  write_file(out / "train_log.csv", res.log.to_csv());
  write_file(out / "windows.json", res.log.windows_json().dump(1) + "\n");
  if (a.dump_losses) {
    write_file(out / "losses.csv", res.log.losses_csv());
    outputs.push_back("losses.csv");
  }
  Json report = filter_report(res.filter, res.ground_chunks, res.author_chunks, rc.filter, provider->name());
  report["extension_words"] = res.extension_words;
  report["neutral_chunks"] = res.neutral.chunks.size();
  report["warnings"] = res.log.warnings;
  write_file(out / "filter_report.json", report.dump(1) + "\n");

  Json cfg = to_json(rc);
  write_file(out / "manifest.json",
             manifest_json("train", cfg,
                           {rc.author_path, rc.ground_path, rc.neutral_path, rc.dictionary_path, rc.stopwords_path},
                           outputs, rc.train.seed, started)
                     .dump(1) +
                 "\n");
  for (const auto& w : res.log.warnings) std::cerr << "warning: " << w << "\n";
  const auto author_rows = res.log.phase_rows("author");
  std::cout << "checkpoint " << (out / "model.ckpt").string() << "\n";
  std::cout << "steps " << res.log.total_steps() << "\n";
  if (!author_rows.empty())
    std::cout << "author_training_perplexity " << std::exp(res.log.window_mean("author", 10, true)) << "\n";
  std::cout << "ground accepted=" << res.filter.accepted.size() << " rejected=" << res.filter.rejected.size()
            << " undecided=" << res.filter.undecided.size() << "\n";
  return 0;
}

// ------------------------------------------------------------------ generate

struct GenerateArgs {
  std::string checkpoint;
  std::string prompt;
  std::size_t length = 200;
  std::string mode = "temperature";
  double temperature = 0.8;
  std::size_t k = 5;
  std::uint64_t seed = 0;
};

int cmd_generate(const GenerateArgs& a) {
  const Checkpoint ck = load_checkpoint(a.checkpoint);
  SamplingConfig cfg;
  cfg.mode = parse_sampling_mode(a.mode);
  cfg.temperature = a.temperature;
  cfg.k = a.k;
  cfg.seed = a.seed;
  cfg.length = a.length;
  std::cout << generate(ck, a.prompt, cfg) << "\n";
  return 0;
}

// ------------------------------------------------------------------ filter

struct FilterArgs {
  std::string config;
  std::string ground;
  std::string author;
  std::string provider;
  std::string bin;
  std::string output = "filter_out";
  double threshold = -1.0;
  std::int64_t max_author_chunks = -1;
  std::size_t author_chunk_len = 0;
  std::size_t ground_chunk_len = 0;
};

int cmd_filter(const FilterArgs& a) {
  const std::string started = utc_now();
  RunConfig rc = a.config.empty() ? RunConfig{} : load_run_config(a.config);
  if (!a.ground.empty()) rc.ground_path = a.ground;
  if (!a.author.empty()) rc.author_path = a.author;
  if (!a.provider.empty()) rc.provider = a.provider;
  if (!a.bin.empty()) rc.filter.bin_path = a.bin;
  if (a.threshold >= 0.0) rc.filter.threshold = a.threshold;
  if (a.max_author_chunks >= 0) rc.filter.max_author_chunks = static_cast<std::size_t>(a.max_author_chunks);
  if (a.author_chunk_len) rc.train.author_chunk_len = a.author_chunk_len;
  if (a.ground_chunk_len) rc.train.ground_chunk_len = a.ground_chunk_len;
  rc.filter.validate();
  if (rc.ground_path.empty() || rc.author_path.empty()) throw ConfigError("filter needs --ground and --author");

  const auto author =
      chunk_corpus(read_text_file(rc.author_path), rc.train.author_chunk_len, ChunkSource::author, rc.train.normalize);
  const auto ground = chunk_corpus(read_text_file(rc.ground_path), rc.train.effective_ground_chunk_len(),
                                   ChunkSource::ground_truth, rc.train.normalize);

  const fs::path out = a.output;
  ensure_dir(out);
  LockFile out_lock((out / ".lock").string());
  std::unique_ptr<LockFile> bin_lock;
  if (!rc.filter.bin_path.empty()) bin_lock = std::make_unique<LockFile>(rc.filter.bin_path + ".lock");

  auto provider = make_provider(rc.provider);
  ChunkBin bin = rc.filter.bin_path.empty() ? ChunkBin() : ChunkBin::load(rc.filter.bin_path);
  const FilterResult r = filter_corpus(ground, author, *provider, rc.filter, bin);
  if (!rc.filter.bin_path.empty()) bin.save(rc.filter.bin_path);

  write_file(out / "accepted.tsv", chunk_list(r.accepted));
  write_file(out / "rejected.tsv", chunk_list(r.rejected));
  write_file(out / "undecided.tsv", chunk_list(r.undecided));
  write_file(out / "filter_report.json", filter_report(r, ground, author, rc.filter, provider->name()).dump(1) + "\n");
  Json cfg = {{"filter", to_json(rc.filter)},
              {"provider", rc.provider},
              {"author_chunk_len", rc.train.author_chunk_len},
              {"ground_chunk_len", rc.train.effective_ground_chunk_len()}};
  write_file(out / "manifest.json",
             manifest_json("filter", cfg, {rc.ground_path, rc.author_path},
                           {"accepted.tsv", "rejected.tsv", "undecided.tsv", "filter_report.json", "manifest.json"}, 0,
                           started)
                     .dump(1) +
                 "\n");
  std::cout << "accepted " << r.accepted.size() << "\nrejected " << r.rejected.size() << "\nundecided "
            << r.undecided.size() << "\nprovider_calls " << r.provider_calls << "\n";
  if (!r.undecided.empty())
    throw ProviderError(std::to_string(r.undecided.size()) + " chunks undecided: " + r.judgements[0].error);
  return 0;
}

// ------------------------------------------------------------------ eval

struct EvalArgs {
  std::string checkpoint;
  std::string test;
  std::string other_author;
  std::string dictionary;
  std::string output = "eval_out";
  std::string prob_dump;
  bool zero_init = false;
  std::size_t experiments = 5;
  std::size_t chunk_len = 1000;
  std::size_t max_chars = 0;
  std::size_t gen_length = 500;
  std::size_t prompt_len = 40;
  double temperature = 0.8;
  std::uint64_t seed = 0;
};

int cmd_eval(const EvalArgs& a) {
  const std::string started = utc_now();
  Checkpoint ck = load_checkpoint(a.checkpoint);
  if (a.zero_init) ck.params = ModelParams::zeros(ck.params.shape);
  const auto& norm = ck.config.normalize;

  ExperimentReport rep;
  rep.metadata["checkpoint"] = a.checkpoint;
  rep.metadata["checkpoint_hash"] = hash_file(a.checkpoint);
  rep.metadata["config"] = to_json(ck.config);
  rep.metadata["zero_init"] = a.zero_init;
  rep.metadata["pad_char"] = std::string(1, ck.pad_char);
  rep.metadata["vocab_size"] = ck.vocab.size();

  const std::string test = normalize_text(read_text_file(a.test), norm);
  const std::string scored = a.max_chars && test.size() > a.max_chars ? test.substr(0, a.max_chars) : test;
  std::vector<PositionProb> dump;
  const auto t = perplexity(ck, scored, a.prob_dump.empty() ? nullptr : &dump);
  rep.rows.push_back({0, "test", t.loss, t.pp});
  if (!a.prob_dump.empty()) write_file(a.prob_dump, prob_dump_csv(dump));

  std::vector<std::string> same;
  if (!a.other_author.empty()) {
    same = consecutive_chunks(test, a.chunk_len, a.experiments);
    const std::string other_text = normalize_text(read_text_file(a.other_author), norm);
    const auto other = consecutive_chunks(other_text, a.chunk_len, a.experiments);
    auto cmp = author_comparison(ck, same, other, a.experiments);
    rep.rows.insert(rep.rows.end(), cmp.rows.begin(), cmp.rows.end());
    rep.wins = cmp.wins;
    rep.ties = cmp.ties;
  }
  if (!a.dictionary.empty()) {
    const auto dict = load_word_list(a.dictionary, WordListKind::dictionary);
    if (same.empty()) same = consecutive_chunks(test, std::min(a.chunk_len, test.size() / a.experiments), a.experiments);
    SamplingConfig sc;
    sc.temperature = a.temperature;
    sc.seed = a.seed;
    sc.length = a.gen_length;
    auto gen = generation_experiments(ck, same, dict, a.prompt_len, sc);
    rep.rows.insert(rep.rows.end(), gen.begin(), gen.end());
    rep.metadata["sampling"] = {{"mode", "temperature"}, {"temperature", a.temperature}, {"seed", a.seed},
                                {"length", a.gen_length}, {"prompt_len", a.prompt_len}};
  }

  const fs::path out = a.output;
  ensure_dir(out);
  write_file(out / "report.csv", rep.to_csv());
  write_file(out / "report.json", rep.to_json().dump(1) + "\n");
  write_file(out / "manifest.json",
             manifest_json("eval", rep.metadata, {a.checkpoint, a.test, a.other_author, a.dictionary},
                           {"report.csv", "report.json", "manifest.json"}, a.seed, started)
                     .dump(1) +
                 "\n");
  std::cout << rep.to_csv();
  if (!a.other_author.empty()) std::cout << "same_author_wins " << rep.wins << "/" << a.experiments << "\n";
  return 0;
}

// ------------------------------------------------------------------ compare

struct CompareArgs {
  std::string config;
  std::string architectures = "bilstm,lstm_uni,rnn";
  std::string seeds;
  std::int64_t steps = -1;
  std::size_t test_chars = 0;
  std::string output;
};

int cmd_compare(const CompareArgs& a) {
  const std::string started = utc_now();
  RunConfig rc = load_run_config(a.config);
  if (a.steps >= 0) rc.train.steps.author = static_cast<std::size_t>(a.steps);
  if (rc.author_path.empty() || rc.test_path.empty()) throw ConfigError("compare needs corpora.author and corpora.test");
  std::vector<Architecture> archs;
  for (const auto& s : split_csv(a.architectures)) archs.push_back(parse_architecture(s));
  std::vector<std::uint64_t> seeds;
  for (const auto& s : split_csv(a.seeds)) {
    try {
      seeds.push_back(std::stoull(s));
    } catch (const std::exception&) {
      throw ConfigError("bad seed '" + s + "'");
    }
  }
  if (seeds.empty()) seeds.push_back(rc.train.seed);

  std::string test = read_text_file(rc.test_path);
  if (a.test_chars && test.size() > a.test_chars) test.resize(a.test_chars);
  const auto table = compare_architectures(read_text_file(rc.author_path), test, rc.train, archs, seeds);

  const fs::path out = a.output.empty() ? fs::path(rc.output_dir) / "compare" : fs::path(a.output);
  ensure_dir(out);
  write_file(out / "comparison.csv", table.to_csv());
  write_file(out / "comparison.json", table.to_json().dump(1) + "\n");
  write_file(out / "manifest.json",
             manifest_json("compare", to_json(rc), {rc.author_path, rc.test_path},
                           {"comparison.csv", "comparison.json", "manifest.json"}, rc.train.seed, started)
                     .dump(1) +
                 "\n");
  std::cout << table.to_csv();
  return 0;
}

// ------------------------------------------------------------------ prep

int cmd_prep(const std::string& config_path) {
  RunConfig rc = load_run_config(config_path);
  PipelineInputs in;
  in.author_text = read_text_file(rc.author_path);
  in.ground_text = read_optional(rc.ground_path);
  in.neutral_text = read_optional(rc.neutral_path);
  if (!rc.dictionary_path.empty()) in.dictionary = load_word_list(rc.dictionary_path, WordListKind::dictionary);
  if (!rc.stopwords_path.empty()) in.stopwords = load_word_list(rc.stopwords_path, WordListKind::stopwords);
  const auto p = prepare_corpora(in, rc.train);
  std::cout << "author_chunks " << p.author.size() << "\nground_chunks " << p.ground.size() << "\nvocab_size "
            << p.vocab.size() << "\npad_char " << describe_byte(p.pad_char) << "\nextension_words "
            << p.extension_words.size() << "\nneutral_chunks " << p.neutral.chunks.size() << "\nnot_found "
            << p.neutral.not_found.size() << "\n";
  for (const auto& w : p.warnings) std::cerr << "warning: " << w << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Character-level author-style language model"};
  app.set_version_flag("--version", std::string(STYLELM_VERSION));
  app.require_subcommand(1);

  std::string prep_config;
  auto* prep = app.add_subcommand("prep", "Report chunk counts, vocabulary and extension words for a config");
  prep->add_option("--config", prep_config, "Run config JSON")->required();

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "Run the three-phase training pipeline");
  train->add_option("--config", ta.config, "Run config JSON")->required();
  train->add_option("--output", ta.output, "Output directory (overrides output_dir)");
  train->add_option("--provider", ta.provider, "heuristic | remote:<url>");
  train->add_option("--bin", ta.bin, "Contradiction bin file");
  train->add_option("--architecture", ta.architecture, "bilstm | lstm_uni | rnn");
  train->add_option("--seed", ta.seed, "Initialization seed");
  train->add_option("--steps-author", ta.steps_author, "Phase A steps");
  train->add_option("--steps-ground", ta.steps_ground, "Phase B steps");
  train->add_option("--steps-neutral", ta.steps_neutral, "Phase C steps");
  train->add_flag("--dump-losses", ta.dump_losses, "Also write per-step losses to losses.csv");
  train->add_flag("--quiet", ta.quiet, "No progress lines on stderr");

  GenerateArgs ga;
  auto* gen = app.add_subcommand("generate", "Continue a prompt from a checkpoint");
  gen->add_option("--checkpoint", ga.checkpoint, "Checkpoint file")->required();
  gen->add_option("--prompt", ga.prompt, "Prompt text")->required();
  gen->add_option("--length", ga.length, "Characters to generate")->capture_default_str();
  gen->add_option("--mode", ga.mode, "greedy | temperature | top_k")->capture_default_str();
  gen->add_option("--temperature", ga.temperature, "Sampling temperature")->capture_default_str();
  gen->add_option("--top-k", ga.k, "k for top_k mode")->capture_default_str();
  gen->add_option("--seed", ga.seed, "Sampling seed")->capture_default_str();

  FilterArgs fa;
  auto* filter = app.add_subcommand("filter", "Partition ground-truth chunks by contradiction with the author");
  filter->add_option("--config", fa.config, "Run config JSON (optional)");
  filter->add_option("--ground", fa.ground, "Ground-truth corpus");
  filter->add_option("--author", fa.author, "Author corpus");
  filter->add_option("--provider", fa.provider, "heuristic | remote:<url>");
  filter->add_option("--threshold", fa.threshold, "Contradiction threshold t in (0, 1)");
  filter->add_option("--bin", fa.bin, "Contradiction bin file");
  filter->add_option("--max-author-chunks", fa.max_author_chunks, "Cap on author chunks scanned (0 = all)");
  filter->add_option("--author-chunk-len", fa.author_chunk_len, "Author chunk size in characters");
  filter->add_option("--ground-chunk-len", fa.ground_chunk_len, "Ground chunk size in characters");
  filter->add_option("--output", fa.output, "Output directory")->capture_default_str();

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "Perplexity, author comparison and non-dictionary rate");
  eval->add_option("--checkpoint", ea.checkpoint, "Checkpoint file")->required();
  eval->add_option("--test", ea.test, "Held-out text by the same author")->required();
  eval->add_option("--other-author", ea.other_author, "Text by a different author");
  eval->add_option("--dictionary", ea.dictionary, "Word list for the non-dictionary rate");
  eval->add_option("--output", ea.output, "Output directory")->capture_default_str();
  eval->add_option("--prob-dump", ea.prob_dump, "Write position,char,prob for the test text");
  eval->add_flag("--zero-init", ea.zero_init, "Replace parameters by zeros (uniform model)");
  eval->add_option("--experiments", ea.experiments, "Number of experiments")->capture_default_str();
  eval->add_option("--chunk-len", ea.chunk_len, "Characters per experiment chunk")->capture_default_str();
  eval->add_option("--max-chars", ea.max_chars, "Score at most this many test characters (0 = all)");
  eval->add_option("--gen-length", ea.gen_length, "Generated characters per experiment")->capture_default_str();
  eval->add_option("--prompt-len", ea.prompt_len, "Prompt characters per experiment")->capture_default_str();
  eval->add_option("--temperature", ea.temperature, "Sampling temperature")->capture_default_str();
  eval->add_option("--seed", ea.seed, "Sampling seed")->capture_default_str();

  CompareArgs ca;
  auto* compare = app.add_subcommand("compare", "Train and score several architectures under one budget");
  compare->add_option("--config", ca.config, "Run config JSON")->required();
  compare->add_option("--architectures", ca.architectures, "Comma-separated list")->capture_default_str();
  compare->add_option("--seeds", ca.seeds, "Comma-separated seeds (default: config seed)");
  compare->add_option("--steps", ca.steps, "Author steps per model (overrides config)");
  compare->add_option("--test-chars", ca.test_chars, "Score at most this many test characters (0 = all)");
  compare->add_option("--output", ca.output, "Output directory (default <output_dir>/compare)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(ErrorKind::config);
  }

  try {
    if (*prep) return cmd_prep(prep_config);
    if (*train) return cmd_train(ta);
    if (*gen) return cmd_generate(ga);
    if (*filter) return cmd_filter(fa);
    if (*eval) return cmd_eval(ea);
    if (*compare) return cmd_compare(ca);
  } catch (const Error& e) {
    std::cerr << "stylelm: error kind=" << kind_name(e.kind()) << " exit=" << static_cast<int>(e.kind())
              << " message=" << one_line(e.what()) << "\n";
    return static_cast<int>(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "stylelm: error kind=data exit=2 message=" << one_line(e.what()) << "\n";
    return 2;
  }
  return 0;
}
