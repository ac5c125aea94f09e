// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits non-zero when any fails.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <set>

#include "reference_model.hpp"
#include "stylelm/stylelm.hpp"

using namespace stylelm;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(bool ok, const std::string& name, const std::string& detail) {
  std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  failures += ok ? 0 : 1;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string data(const std::string& name) { return std::string(STYLELM_TEST_DATA) + "/" + name; }

PipelineInputs inputs_for(const RunConfig& rc) {
  PipelineInputs in;
  in.author_text = read_text_file(rc.author_path);
  in.ground_text = read_text_file(rc.ground_path);
  in.neutral_text = read_text_file(rc.neutral_path);
  in.dictionary = load_word_list(rc.dictionary_path, WordListKind::dictionary);
  in.stopwords = load_word_list(rc.stopwords_path, WordListKind::stopwords);
  return in;
}

// ------------------------------------------------------------------ gradients

void gradient_correctness() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  std::size_t cases = 0;
  for (auto arch : {Architecture::bilstm, Architecture::lstm_uni, Architecture::rnn}) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      Rng rng(seed * 7919 + static_cast<std::uint64_t>(arch));
      const std::size_t hidden = 1 + rng.index(4), vocab = 2 + rng.index(4), seq_len = 1 + rng.index(4);
      ModelParams p = ModelParams::zeros({arch, hidden, vocab, seq_len});
      for (auto& t : p.tensors())
        for (double& x : t.data) x = rng.uniform(-0.5, 0.5);
      std::vector<CharId> window(seq_len);
      for (auto& c : window) c = static_cast<CharId>(rng.index(vocab));
      const auto target = static_cast<CharId>(rng.index(vocab));
      const auto lg = loss_and_gradients(p, window, target);
      auto loss = [&](const ModelParams& q) { return reference::loss<long double>(q, window, target); };
      worst = std::max(worst, gradient_check(loss, p, lg.grads, p.parameter_count(), seed, 1e-5));
      ++cases;
    }
  }
  const double secs = seconds_since(t0);
  report(worst < 1e-5 && secs < 60.0, "gradient_correctness",
         fmt("max relative error %.3e over %zu cases (3 architectures x 20 seeds), %.1f s", worst, cases, secs));
}

// ------------------------------------------------------------------ perplexity identities

void uniform_identity() {
  const std::string text = normalize_text(read_text_file(data("author_a_test.txt"))).substr(0, 3000);
  const auto vocab = build_vocab(text);
  const double V = static_cast<double>(vocab.size());
  double worst_loss = 0.0, worst_pp = 0.0;
  for (auto arch : {Architecture::bilstm, Architecture::lstm_uni, Architecture::rnn}) {
    for (std::size_t seq_len : {1u, 10u, 100u}) {
      const auto r = perplexity(ModelParams::zeros({arch, 8, vocab.size(), seq_len}), vocab, text);
      worst_loss = std::max(worst_loss, std::abs(r.loss - std::log(V)));
      worst_pp = std::max(worst_pp, std::abs(r.pp - V));
    }
  }
  report(worst_loss <= 1e-9 && worst_pp <= 1e-6, "uniform_model_identity",
         fmt("V=%zu, max |loss-ln V|=%.2e, max |pp-V|=%.2e", vocab.size(), worst_loss, worst_pp));
}

void perplexity_definition(const Checkpoint& ck) {
  const std::string text = normalize_text(read_text_file(data("author_a_test.txt")), ck.config.normalize);
  const std::size_t L = ck.config.seq_len + 200;
  double worst = 0.0;
  std::size_t n = 0;
  for (std::size_t off = 0; off + L <= text.size() && n < 20; off += 997, ++n) {
    std::vector<PositionProb> dump;
    const auto r = perplexity(ck, text.substr(off, L), &dump);
    std::vector<double> probs;
    for (const auto& d : dump) probs.push_back(d.prob);
    worst = std::max(worst, std::abs(product_perplexity(probs) - r.pp));
  }
  report(worst <= 1e-9, "perplexity_definition",
         fmt("exp(mean NLL) vs product form on %zu texts of 200 scored chars, max diff %.2e", n, worst));
}

// ------------------------------------------------------------------ desk run

struct DeskRun {
  PipelineResult result;
  double seconds;
};

DeskRun desk_training() {
  const RunConfig rc = load_run_config(std::string(STYLELM_CONFIGS) + "/desk.json");
  HeuristicProvider provider;
  ChunkBin bin;
  PipelineOptions opts;
  opts.on_row = [](const LogRow& r) {
    if (r.phase == "author" && (r.window + 1) % 25 == 0)
      std::fprintf(stderr, "  desk window %zu loss %.4f pp %.4f\n", r.window, r.mean_loss, r.mean_perplexity);
  };
  const auto t0 = Clock::now();
  auto res = train_full_pipeline(inputs_for(rc), provider, rc.train, rc.filter, bin, opts);
  const double secs = seconds_since(t0);

  const auto rows = res.log.phase_rows("author");
  const double pp = std::exp(res.log.window_mean("author", 10, true));
  const std::size_t steps = rows.empty() ? 0 : rows.back().first_step + rows.back().steps;
  report(pp < 4.0 && steps <= 25000, "desk_training",
         fmt("bilstm hidden %zu seq_len %zu, %zu author steps, training PP %.4f (< 4), %.0f s for the full pipeline",
             rc.train.hidden, rc.train.seq_len, steps, pp, secs));
  return {std::move(res), secs};
}

void loss_perplexity_log(const TrainingLog& log) {
  std::size_t exact = 0;
  for (const auto& r : log.rows) exact += r.mean_perplexity == std::exp(r.mean_loss);
  const double first = log.window_mean("author", 10, false);
  const double last = log.window_mean("author", 10, true);
  report(exact == log.rows.size() && last < first, "loss_perplexity_log",
         fmt("%zu/%zu rows with pp == exp(loss); mean loss first 10 windows %.4f, last 10 %.4f", exact,
             log.rows.size(), first, last));
}

void author_comparison_check(const Checkpoint& ck) {
  const auto& norm = ck.config.normalize;
  const auto same = consecutive_chunks(normalize_text(read_text_file(data("author_a_test.txt")), norm), 1000, 5);
  const auto other = consecutive_chunks(normalize_text(read_text_file(data("author_b.txt")), norm), 1000, 5);
  const auto rep = author_comparison(ck, same, other, 5);
  std::string detail = fmt("same author lower in %zu/5:", rep.wins);
  for (std::size_t e = 0; e < 5; ++e)
    detail += fmt(" %.3f<%.3f", rep.rows[2 * e].perplexity, rep.rows[2 * e + 1].perplexity);
  report(rep.wins >= 4, "author_comparison", detail);
}

void non_dictionary_check(const Checkpoint& ck) {
  const WordList dict{{"the", "cat", "sat", "on", "mat"}, WordListKind::dictionary};
  struct Case {
    const char* text;
    double expect;
  };
  const Case cases[] = {{"the qzx cat", 100.0 / 3.0},
                        {"the cat sat on the mat", 0.0},
                        {"qq zz", 100.0},
                        {"the cat, blorp; sat!", 25.0},
                        {"The CAT sat... on xyzzy mat", 100.0 / 6.0}};
  bool exact = true;
  for (const auto& c : cases) exact &= std::abs(non_dictionary_rate(c.text, dict) - c.expect) <= 0.01;

  const auto full_dict = load_word_list(data("dictionary.txt"), WordListKind::dictionary);
  const auto prompts =
      consecutive_chunks(normalize_text(read_text_file(data("author_a_test.txt")), ck.config.normalize), 1000, 5);
  SamplingConfig sc;
  sc.length = 500;
  sc.temperature = 0.8;
  sc.seed = 1;
  const auto rows = generation_experiments(ck, prompts, full_dict, 40, sc);
  double mean = 0.0;
  for (const auto& r : rows) mean += r.non_dictionary_rate / static_cast<double>(rows.size());
  report(exact, "non_dictionary_rate",
         fmt("fixture fractions exact to 0.01; desk generated text (5 x 500 chars, T=0.8) non-dictionary rate %.2f%% "
             "(reference only)",
             mean));
}

// ------------------------------------------------------------------ architecture ordering

void architecture_ordering() {
  const RunConfig rc = load_run_config(std::string(STYLELM_CONFIGS) + "/compare.json");
  const TrainConfig& cfg = rc.train;
  const std::string author = read_text_file(rc.author_path);
  const std::string test = normalize_text(read_text_file(rc.test_path), cfg.normalize);
  const auto t0 = Clock::now();
  const auto table = compare_architectures(author, test, cfg, {Architecture::bilstm, Architecture::lstm_uni, Architecture::rnn},
                                           {1, 2, 3});
  std::size_t ordered = 0;
  std::string detail;
  for (std::uint64_t s : {1, 2, 3}) {
    ordered += table.ordered(s);
    detail += fmt(" seed %llu:", static_cast<unsigned long long>(s));
    for (const auto& r : table.rows)
      if (r.seed == s) detail += fmt(" %s=%.3f", std::string(to_string(r.arch)).c_str(), r.perplexity);
  }
  report(ordered >= 2, "architecture_ordering",
         fmt("bilstm <= lstm_uni <= rnn in %zu/3 seeds (hidden %zu, seq_len %zu, lr %g, %zu steps, %.0f s);", ordered,
             cfg.hidden, cfg.seq_len, cfg.optim.learning_rate, cfg.steps.author, seconds_since(t0)) +
             detail);
}

// ------------------------------------------------------------------ filter semantics

class MarkerProvider final : public NliProvider {
 public:
  std::atomic<std::size_t> calls{0};
  NliVerdict classify(const std::string&, const std::string& hypothesis) override {
    ++calls;
    return hypothesis.find("XMARKERX") != std::string::npos ? NliVerdict{0.9, 0.05, 0.05} : NliVerdict{0.05, 0.05, 0.9};
  }
  std::string name() const override { return "marker"; }
};

class PairHashProvider final : public NliProvider {
 public:
  NliVerdict classify(const std::string& premise, const std::string& hypothesis) override {
    Rng rng(fnv1a64(premise + '\x1f' + hypothesis));
    const double c = rng.uniform(), n = rng.uniform() * (1 - c);
    return {c, n, 1 - c - n};
  }
  std::string name() const override { return "pair-hash"; }
};

void contradiction_filter() {
  std::vector<TextChunk> authors, ground;
  for (int i = 0; i < 6; ++i) authors.push_back(make_chunk("author passage number " + std::to_string(i), ChunkSource::author));
  std::set<std::string> marked;
  for (int i = 0; i < 40; ++i) {
    std::string t = "ground passage " + std::to_string(i);
    if (i % 3 == 1) {
      t += " XMARKERX";
      marked.insert(t);
    }
    ground.push_back(make_chunk(t, ChunkSource::ground_truth));
  }
  FilterConfig fc;
  ChunkBin bin;
  MarkerProvider cold;
  const auto r1 = filter_corpus(ground, authors, cold, fc, bin);
  std::set<std::string> rejected;
  for (const auto& c : r1.rejected) rejected.insert(c.text);
  const bool exact = rejected == marked && r1.undecided.empty();

  MarkerProvider warm;
  const auto r2 = filter_corpus(ground, authors, warm, fc, bin);
  std::size_t calls_on_binned = 0;
  for (std::size_t i = 0; i < ground.size(); ++i)
    if (marked.count(ground[i].text)) calls_on_binned += r2.judgements[i].provider_calls;

  PairHashProvider hash;
  std::vector<std::set<std::string>> by_t;
  for (double t : {0.01, 0.5, 0.99}) {
    FilterConfig c;
    c.threshold = t;
    ChunkBin fresh;
    std::set<std::string> s;
    for (const auto& x : filter_corpus(ground, authors, hash, c, fresh).rejected) s.insert(x.text);
    by_t.push_back(s);
  }
  const bool monotone = std::includes(by_t[0].begin(), by_t[0].end(), by_t[1].begin(), by_t[1].end()) &&
                        std::includes(by_t[1].begin(), by_t[1].end(), by_t[2].begin(), by_t[2].end());
  report(exact && calls_on_binned == 0 && monotone, "contradiction_filter",
         fmt("marked %zu rejected %zu (exact=%d); warm rerun calls on binned chunks %zu; rejected at t=0.01/0.5/0.99: "
             "%zu/%zu/%zu",
             marked.size(), rejected.size(), exact, calls_on_binned, by_t[0].size(), by_t[1].size(), by_t[2].size()));
}

// ------------------------------------------------------------------ determinism

void determinism(const Checkpoint& desk) {
  const RunConfig rc = load_run_config(std::string(STYLELM_CONFIGS) + "/smoke.json");
  auto run = [&] {
    HeuristicProvider provider;
    ChunkBin bin;
    return serialize_checkpoint(train_full_pipeline(inputs_for(rc), provider, rc.train, rc.filter, bin).checkpoint);
  };
  const std::string a = run(), b = run();

  const auto path = (std::filesystem::temp_directory_path() / "stylelm_acceptance.ckpt").string();
  save_checkpoint(desk, path);
  const auto loaded = load_checkpoint(path);
  std::filesystem::remove(path);
  bool same_generation = true;
  for (auto mode : {SamplingMode::greedy, SamplingMode::temperature, SamplingMode::top_k}) {
    SamplingConfig sc;
    sc.mode = mode;
    sc.seed = 11;
    sc.length = 300;
    same_generation &= generate(desk, "the keeper", sc) == generate(loaded, "the keeper", sc);
  }
  report(a == b && same_generation, "determinism_persistence",
         fmt("two full pipeline runs: %zu vs %zu bytes, identical=%d (crc %08x); save->load->generate identical in 3 "
             "modes=%d",
             a.size(), b.size(), a == b, detail::crc32_of(a), same_generation));
}

}  // namespace

int main() {
  try {
    gradient_correctness();
    uniform_identity();
    contradiction_filter();
    const auto desk = desk_training();
    const Checkpoint& ck = desk.result.checkpoint;
    perplexity_definition(ck);
    loss_perplexity_log(desk.result.log);
    author_comparison_check(ck);
    non_dictionary_check(ck);
    architecture_ordering();
    determinism(ck);
  } catch (const std::exception& e) {
    std::printf("FAIL acceptance aborted: %s\n", e.what());
    return 1;
  }
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
