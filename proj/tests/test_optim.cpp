#include <gtest/gtest.h>

#include "stylelm/optim.hpp"
#include "stylelm/random.hpp"

using namespace stylelm;

namespace {

ModelShape tiny() { return {Architecture::bilstm, 2, 3, 2}; }

GradientSet random_grads(std::uint64_t seed, double scale) {
  GradientSet g = ModelParams::zeros(tiny());
  Rng rng(seed);
  for (auto& t : g.tensors())
    for (double& x : t.data) x = rng.uniform(-scale, scale);
  return g;
}

double independent_norm(const GradientSet& g) {
  long double sq = 0;
  for (const auto& t : g.tensors())
    for (double x : t.data) sq += static_cast<long double>(x) * x;
  return static_cast<double>(std::sqrt(sq));
}

void scale_to_norm(GradientSet& g, double target) {
  const double n = independent_norm(g);
  for (auto& t : g.tensors())
    for (double& x : t.data) x *= target / n;
}

}  // namespace

TEST(Clip, ScalesDownToThreshold) {
  auto g = random_grads(1, 1.0);
  scale_to_norm(g, 10.0);
  const auto c = clip_gradients(g, 5.0);
  EXPECT_NEAR(global_norm(c), 5.0, 1e-12);
  auto gt = g.tensors();
  auto ct = c.tensors();
  for (std::size_t k = 0; k < gt.size(); ++k)
    for (std::size_t i = 0; i < gt[k].data.size(); ++i) EXPECT_NEAR(ct[k].data[i], 0.5 * gt[k].data[i], 1e-15);
}

TEST(Clip, NoOpBelowThreshold) {
  auto g = random_grads(2, 1.0);
  scale_to_norm(g, 1.0);
  EXPECT_EQ(clip_gradients(g, 5.0), g);
}

TEST(Clip, RandomNormsBoundedAndIdempotent) {
  for (std::uint64_t s = 0; s < 50; ++s) {
    const auto g = random_grads(s, 1.0 + static_cast<double>(s));
    const auto c = clip_gradients(g, 5.0);
    EXPECT_LE(independent_norm(c), 5.0 + 1e-12);
    const auto cc = clip_gradients(c, 5.0);
    const auto a = c.tensors();
    const auto b = cc.tensors();
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t j = 0; j < a[i].data.size(); ++j) EXPECT_NEAR(b[i].data[j], a[i].data[j], 1e-15);
  }
}

TEST(Adam, ZeroGradientIsFixedPoint) {
  auto p = ModelParams::initialized(tiny(), 5);
  const auto before = p;
  auto st = OptimState::for_params(p);
  const GradientSet zero = ModelParams::zeros(tiny());
  for (int i = 0; i < 10; ++i) adam_step(p, zero, st, OptimConfig{});
  EXPECT_EQ(p, before);
  EXPECT_EQ(st.t, 10u);
}

TEST(Adam, MatchesHandRecurrenceOnScalar) {
  // Expected values from the textbook recurrence, evaluated separately.
  auto p = ModelParams::zeros(tiny());
  p.proj_b[0] = 0.5;
  auto st = OptimState::for_params(p);
  GradientSet g = ModelParams::zeros(tiny());
  g.proj_b[0] = 0.3;
  adam_step(p, g, st, OptimConfig{});
  EXPECT_NEAR(p.proj_b[0], 0.49900000003333334, 1e-12);
  EXPECT_NEAR(st.m.proj_b[0], 0.029999999999999992, 1e-15);
  EXPECT_NEAR(st.v.proj_b[0], 9.000000000000007e-05, 1e-17);
  g.proj_b[0] = -0.7;
  adam_step(p, g, st, OptimConfig{});
  EXPECT_NEAR(p.proj_b[0], 0.499420185420395, 1e-12);
  EXPECT_NEAR(st.m.proj_b[0], -0.04299999999999998, 1e-15);
  EXPECT_NEAR(st.v.proj_b[0], 0.0005799100000000004, 1e-17);
  EXPECT_EQ(st.t, 2u);
  EXPECT_EQ(p.proj_b[1], 0.0);
}

TEST(Adam, ConstantGradientStepApproachesLearningRate) {
  auto p = ModelParams::zeros(tiny());
  auto st = OptimState::for_params(p);
  GradientSet g = ModelParams::zeros(tiny());
  g.proj_b[0] = 0.25;
  double prev = 0.0, step = 0.0;
  for (int i = 0; i < 5000; ++i) {
    adam_step(p, g, st, OptimConfig{});
    step = prev - p.proj_b[0];
    prev = p.proj_b[0];
  }
  EXPECT_NEAR(step, 1e-3, 1e-6);
}

TEST(Adam, NonFiniteGradientNamesTensor) {
  auto p = ModelParams::zeros(tiny());
  auto st = OptimState::for_params(p);
  GradientSet g = ModelParams::zeros(tiny());
  g.fwd.cell.b[1] = std::numeric_limits<double>::quiet_NaN();
  try {
    adam_step(p, g, st, OptimConfig{});
    FAIL();
  } catch (const DivergenceError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("divergence detected"), std::string::npos);
    EXPECT_NE(msg.find("fwd.cell.b"), std::string::npos) << msg;
  }
  EXPECT_EQ(st.t, 0u);
}

TEST(Sgd, PlainStep) {
  auto p = ModelParams::zeros(tiny());
  auto st = OptimState::for_params(p);
  GradientSet g = ModelParams::zeros(tiny());
  g.proj_b[2] = 2.0;
  OptimConfig cfg;
  cfg.algorithm = OptimAlgorithm::sgd;
  cfg.learning_rate = 0.1;
  sgd_step(p, g, st, cfg);
  EXPECT_DOUBLE_EQ(p.proj_b[2], -0.2);
}

TEST(Optim, UpdatesAreDeterministic) {
  auto a = ModelParams::initialized(tiny(), 9);
  auto b = a;
  auto sa = OptimState::for_params(a), sb = OptimState::for_params(b);
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto g = random_grads(s, 1.0);
    optimizer_step(a, g, sa, OptimConfig{});
    optimizer_step(b, g, sb, OptimConfig{});
  }
  EXPECT_EQ(a, b);
  EXPECT_EQ(sa, sb);
}

TEST(OptimConfig, Validation) {
  OptimConfig c;
  c.beta1 = 1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.learning_rate = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_THROW(parse_optim_algorithm("rmsprop"), ConfigError);
}

TEST(GradientCheck, Quadratic) {
  std::vector<double> w{3.0};
  std::vector<double> analytic{6.0};
  const double err = gradient_check([&] { return w[0] * w[0]; }, w, analytic, 1);
  EXPECT_LT(err * 6.0, 1e-7);
  EXPECT_EQ(w[0], 3.0);
}

TEST(GradientCheck, LinearIsExact) {
  std::vector<double> w{0.25, -1.5, 2.0};
  std::vector<double> analytic{2.0, -3.0, 0.5};
  const double err = gradient_check([&] { return 2.0 * w[0] - 3.0 * w[1] + 0.5 * w[2]; }, w, analytic, 10);
  EXPECT_LT(err, 1e-9);
}

TEST(GradientCheck, DetectsWrongGradient) {
  std::vector<double> w{1.0};
  std::vector<double> wrong{3.0};
  EXPECT_GT(gradient_check([&] { return w[0] * w[0]; }, w, wrong, 1), 0.3);
}

TEST(GradientCheck, RelativeErrorFloor) {
  EXPECT_DOUBLE_EQ(relative_error(0.0, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(relative_error(1e-9, 0.0), 1e-9 / 1e-8);
  EXPECT_DOUBLE_EQ(relative_error(2.0, 1.0), 0.5);
}
