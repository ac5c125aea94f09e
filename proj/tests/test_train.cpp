#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "stylelm/train.hpp"

using namespace stylelm;

namespace {

const std::string kText =
    "the lamp is lit and the sea is quiet. the keeper writes notes by the lamp. "
    "the fog is kind to those who wait, and the boat comes home before the dark.";

TrainConfig small_config() {
  TrainConfig cfg;
  cfg.hidden = 8;
  cfg.seq_len = 10;
  cfg.stride = 3;
  cfg.log_window = 7;
  cfg.author_chunk_len = 60;
  return cfg;
}

class NamedConstant : public NliProvider {
 public:
  explicit NamedConstant(NliVerdict v) : v_(v) {}
  NliVerdict classify(const std::string&, const std::string&) override { return v_; }
  std::string name() const override { return "constant"; }

 private:
  NliVerdict v_;
};

PipelineInputs sample_inputs() {
  PipelineInputs in;
  in.author_text = "the lamp is lit and the sea is quiet.\n\nthe keeper writes notes by the lamp.\n\n"
                   "the fog is kind to those who wait.\n\nthe boat comes home before the dark.\n";
  in.ground_text = "the sea is not quiet at night.\n\nboats are built from wood and steel.\n\n"
                   "fog forms when warm air meets cold water.\n";
  in.neutral_text = "whom shall we ask, and why would yourselves go there? she said it was hers to keep.";
  in.dictionary = {{"the", "whom", "yourselves", "hers", "lamp", "sea", "why"}, WordListKind::dictionary};
  in.stopwords = {{"whom", "yourselves", "hers", "why", "the"}, WordListKind::stopwords};
  return in;
}

}  // namespace

TEST(TrainStep, ZeroModelLossIsLogV) {
  const auto v = build_vocab(kText);
  const auto pairs = make_training_pairs(kText, v, 10, 5);
  for (auto arch : {Architecture::bilstm, Architecture::lstm_uni, Architecture::rnn}) {
    auto p = ModelParams::zeros({arch, 8, v.size(), 10});
    auto st = OptimState::for_params(p);
    EXPECT_NEAR(train_step(p, pairs[3], st, OptimConfig{}), std::log(static_cast<double>(v.size())), 1e-9);
    EXPECT_EQ(st.t, 1u);
  }
}

TEST(TrainStep, MemorizesOnePair) {
  const auto v = build_vocab(kText);
  const auto pair = make_training_pairs(kText, v, 100, 1)[17];
  auto p = ModelParams::initialized({Architecture::bilstm, 100, v.size(), 100}, 42);
  auto st = OptimState::for_params(p);
  double loss = 0;
  for (int i = 0; i < 200; ++i) loss = train_step(p, pair, st, OptimConfig{});
  EXPECT_LT(cross_entropy(predict(pair.window, p), pair.target), 0.05);
  EXPECT_LT(loss, 0.05);
}

TEST(TrainStep, LossSequenceIsBitwiseReproducible) {
  auto run = [] {
    const auto v = build_vocab(kText);
    auto p = ModelParams::initialized({Architecture::bilstm, 8, v.size(), 10}, 3);
    auto st = OptimState::for_params(p);
    std::vector<double> losses;
    for (const auto& pair : make_training_pairs(kText, v, 10, 2)) losses.push_back(train_step(p, pair, st, OptimConfig{}));
    return std::make_pair(losses, p);
  };
  const auto a = run();
  const auto b = run();
  EXPECT_EQ(a.first, b.first);
  EXPECT_EQ(a.second, b.second);
}

TEST(TrainStep, NonFiniteLossLeavesStateUntouched) {
  const auto v = build_vocab(kText);
  const auto pair = make_training_pairs(kText, v, 10, 1)[0];
  auto p = ModelParams::initialized({Architecture::lstm_uni, 8, v.size(), 10}, 3);
  p.fwd.forget.w(0, 0) = std::numeric_limits<double>::quiet_NaN();
  const auto before = p;
  auto st = OptimState::for_params(p);
  EXPECT_THROW(train_step(p, pair, st, OptimConfig{}), DivergenceError);
  EXPECT_EQ(st.t, 0u);
  EXPECT_EQ(p.fwd.forget.w(0, 1), before.fwd.forget.w(0, 1));
}

TEST(TrainStep, OverflowingUpdateIsNotCommitted) {
  const auto v = build_vocab(kText);
  const auto pair = make_training_pairs(kText, v, 10, 1)[0];
  auto p = ModelParams::initialized({Architecture::rnn, 8, v.size(), 10}, 3);
  const auto before = p;
  auto st = OptimState::for_params(p);
  OptimConfig cfg;
  cfg.algorithm = OptimAlgorithm::sgd;
  cfg.learning_rate = std::numeric_limits<double>::infinity();
  EXPECT_THROW(train_step(p, pair, st, cfg), DivergenceError);
  EXPECT_EQ(p, before);
  EXPECT_EQ(st.t, 0u);
}

TEST(RunPhase, ZeroStepsIsNoOp) {
  const auto cfg = small_config();
  const auto v = build_vocab(kText);
  auto p = ModelParams::initialized({cfg.architecture, cfg.hidden, v.size(), cfg.seq_len}, 1);
  const auto before = p;
  auto st = OptimState::for_params(p);
  TrainingLog log;
  run_phase(p, st, {make_chunk(kText, ChunkSource::author)}, v, cfg, "author", 0, 1.0, log);
  EXPECT_EQ(p, before);
  EXPECT_TRUE(log.rows.empty());
  EXPECT_TRUE(log.losses.empty());
}

TEST(RunPhase, LogIdentityAndWindowMeansFromDump) {
  const auto cfg = small_config();
  const auto v = build_vocab(kText);
  auto p = ModelParams::initialized({cfg.architecture, cfg.hidden, v.size(), cfg.seq_len}, 1);
  auto st = OptimState::for_params(p);
  TrainingLog log;
  const auto chunks = chunk_corpus(kText, cfg.author_chunk_len, ChunkSource::author);
  run_phase(p, st, chunks, v, cfg, "author", 100, 1.0, log);
  ASSERT_EQ(log.rows.size(), 15u);  // 14 full windows of 7, one partial of 2
  EXPECT_EQ(log.rows.back().steps, 2u);

  // Recompute the window means from the dumped per-step losses.
  std::istringstream dump(log.losses_csv());
  std::string line;
  std::getline(dump, line);
  EXPECT_EQ(line, "step,phase,loss");
  std::vector<double> losses;
  while (std::getline(dump, line)) losses.push_back(std::stod(line.substr(line.rfind(',') + 1)));
  ASSERT_EQ(losses.size(), 100u);
  for (std::size_t w = 0; w < log.rows.size(); ++w) {
    const auto& r = log.rows[w];
    EXPECT_EQ(r.window, w);
    double sum = 0;
    for (std::size_t s = r.first_step; s < r.first_step + r.steps; ++s) sum += losses[s];
    EXPECT_NEAR(r.mean_loss, sum / static_cast<double>(r.steps), 1e-12);
    EXPECT_EQ(r.mean_perplexity, std::exp(r.mean_loss));
  }
  EXPECT_EQ(log.to_csv().substr(0, 32), "window,mean_loss,mean_perplexity");
}

TEST(RunPhase, CyclesWhenStepsExceedPairs) {
  auto cfg = small_config();
  cfg.stride = 1;
  const std::string text = "abcdefghijklmn";  // 4 pairs at seq_len 10
  const auto v = build_vocab(text);
  std::vector<std::string> warnings;
  PairCursor cur({make_chunk(text, ChunkSource::author)}, v, cfg.seq_len, cfg.stride, warnings);
  EXPECT_EQ(cur.pair_count(), 4u);
  std::vector<CharId> targets;
  for (int i = 0; i < 9; ++i, cur.advance()) targets.push_back(cur.target());
  EXPECT_EQ(decode(targets, v), "klmnklmnk");
}

TEST(RunPhase, WindowsStayInsideChunks) {
  const auto chunks = std::vector<TextChunk>{make_chunk("aaaaaaaaaaaab", ChunkSource::author),
                                             make_chunk("cccccccccccd", ChunkSource::author)};
  const auto v = build_vocab("abcd");
  std::vector<std::string> warnings;
  PairCursor cur(chunks, v, 10, 1, warnings);
  for (int i = 0; i < 10; ++i, cur.advance()) {
    const std::string w = decode(cur.window(), v);
    EXPECT_TRUE(w.find_first_of("ab") == std::string::npos || w.find_first_of("cd") == std::string::npos) << w;
  }
}

TEST(RunPhase, UnencodableChunkSkippedWithWarning) {
  const auto cfg = small_config();
  const auto v = build_vocab(kText);
  auto p = ModelParams::initialized({cfg.architecture, cfg.hidden, v.size(), cfg.seq_len}, 1);
  auto st = OptimState::for_params(p);
  TrainingLog log;
  run_phase(p, st, {make_chunk("QQQQQQQQQQQQQQQQ", ChunkSource::ground_truth), make_chunk(kText, ChunkSource::ground_truth)},
            v, cfg, "ground", 5, 1.0, log);
  ASSERT_EQ(log.warnings.size(), 1u);
  EXPECT_NE(log.warnings[0].find("not in the vocabulary"), std::string::npos);
  EXPECT_EQ(log.total_steps(), 5u);
}

TEST(Pipeline, AllContradictionSkipsGroundPhase) {
  auto cfg = small_config();
  cfg.steps = {40, 30, 20};
  cfg.neutral_chunk_len = 30;
  NamedConstant contra({0.9, 0.05, 0.05});
  ChunkBin bin;
  const auto in = sample_inputs();
  const auto res = train_full_pipeline(in, contra, cfg, FilterConfig{}, bin);
  EXPECT_TRUE(res.filter.accepted.empty());
  EXPECT_EQ(res.filter.rejected.size(), res.ground_chunks.size());
  EXPECT_TRUE(res.log.phase_rows("ground").empty());
  EXPECT_EQ(res.log.total_steps(), 60u);
  EXPECT_EQ(bin.size(), res.ground_chunks.size());

  // Same parameters as running Phase A then Phase C by hand.
  const auto prep = prepare_corpora(in, cfg);
  auto p = ModelParams::initialized({cfg.architecture, cfg.hidden, prep.vocab.size(), cfg.seq_len}, cfg.seed);
  auto st = OptimState::for_params(p);
  TrainingLog log;
  run_phase(p, st, prep.author, prep.vocab, cfg, "author", 40, 1.0, log);
  run_phase(p, st, prep.neutral.chunks, prep.vocab, cfg, "neutral", 20, 1.0, log);
  EXPECT_EQ(res.checkpoint.params, p);
}

TEST(Pipeline, AllEntailmentTrainsOnEveryGroundChunk) {
  auto cfg = small_config();
  cfg.steps = {20, 30, 10};
  cfg.neutral_chunk_len = 30;
  NamedConstant ent({0.05, 0.05, 0.9});
  ChunkBin bin;
  const auto res = train_full_pipeline(sample_inputs(), ent, cfg, FilterConfig{}, bin);
  EXPECT_EQ(res.filter.accepted.size(), res.ground_chunks.size());
  EXPECT_FALSE(res.ground_chunks.empty());
  EXPECT_FALSE(res.log.phase_rows("ground").empty());
  EXPECT_EQ(res.log.total_steps(), 60u);
  EXPECT_EQ(res.checkpoint.step, 60u);
}

TEST(Pipeline, HeuristicRejectsNegatedAuthorClaim) {
  auto cfg = small_config();
  cfg.steps = {10, 10, 10};
  cfg.neutral_chunk_len = 30;
  HeuristicProvider h;
  ChunkBin bin;
  const auto res = train_full_pipeline(sample_inputs(), h, cfg, FilterConfig{}, bin);
  ASSERT_EQ(res.filter.rejected.size(), 1u);
  EXPECT_EQ(res.filter.rejected[0].text, "the sea is not quiet at night.");
  for (const auto& c : res.filter.accepted) EXPECT_EQ(bin.contains(c.id), false);
}

TEST(Pipeline, VocabularyCoversEveryPhase) {
  auto cfg = small_config();
  cfg.neutral_chunk_len = 30;
  const auto prep = prepare_corpora(sample_inputs(), cfg);
  for (const auto* list : {&prep.author, &prep.ground, &prep.neutral.chunks})
    for (const auto& c : *list) EXPECT_NO_THROW(encode(c.text, prep.vocab));
  EXPECT_EQ(prep.pad_char, ' ');
  EXPECT_FALSE(prep.neutral.chunks.empty());
  EXPECT_EQ(prep.extension_words.words, (std::set<std::string>{"hers", "whom", "why", "yourselves"}));
}

TEST(Pipeline, DeterministicCheckpointBytes) {
  auto cfg = small_config();
  cfg.steps = {30, 10, 10};
  cfg.neutral_chunk_len = 30;
  auto run = [&] {
    HeuristicProvider h;
    ChunkBin bin;
    return serialize_checkpoint(train_full_pipeline(sample_inputs(), h, cfg, FilterConfig{}, bin).checkpoint);
  };
  EXPECT_EQ(run(), run());
}

TEST(Pipeline, DivergenceWritesLastGoodCheckpoint) {
  auto cfg = small_config();
  cfg.steps = {200, 0, 0};
  cfg.optim.algorithm = OptimAlgorithm::sgd;
  cfg.optim.learning_rate = 1e308;
  HeuristicProvider h;
  ChunkBin bin;
  PipelineOptions opts;
  opts.last_good_path = (std::filesystem::temp_directory_path() / "stylelm_last_good.ckpt").string();
  std::filesystem::remove(opts.last_good_path);
  EXPECT_THROW(train_full_pipeline(sample_inputs(), h, cfg, FilterConfig{}, bin, opts), DivergenceError);
  const auto ck = load_checkpoint(opts.last_good_path);
  for (const auto& t : ck.params.tensors()) EXPECT_TRUE(all_finite(t.data));
  std::filesystem::remove(opts.last_good_path);
}

TEST(Pipeline, EmptyAuthorIsDataError) {
  HeuristicProvider h;
  ChunkBin bin;
  PipelineInputs in;
  in.author_text = "\n\n  \n";
  EXPECT_THROW(train_full_pipeline(in, h, small_config(), FilterConfig{}, bin), DataError);
}

TEST(Config, JsonRoundTripAndUnknownField) {
  RunConfig rc;
  rc.train.hidden = 33;
  rc.train.steps.ground = 7;
  rc.filter.threshold = 0.7;
  rc.author_path = "/a.txt";
  const auto back = run_config_from_json(to_json(rc));
  EXPECT_EQ(to_json(back), to_json(rc));
  EXPECT_THROW(run_config_from_json(Json{{"trian", Json::object()}}), ConfigError);
  EXPECT_THROW(run_config_from_json(Json{{"train", {{"hidden", "many"}}}}), ConfigError);
  EXPECT_THROW(run_config_from_json(Json{{"provider", "magic"}}), ConfigError);
  EXPECT_THROW(run_config_from_json(Json{{"filter", {{"threshold", 1.5}}}}), ConfigError);
  EXPECT_EQ(run_config_from_json(Json{{"corpora", {{"author", "x.txt"}}}}, "/base").author_path, "/base/x.txt");
}
