#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "stylelm/errors.hpp"
#include "stylelm/nn.hpp"
#include "stylelm/random.hpp"

namespace stylelm {

enum class OptimAlgorithm { sgd, adam };

inline std::string_view to_string(OptimAlgorithm a) { return a == OptimAlgorithm::sgd ? "sgd" : "adam"; }

inline OptimAlgorithm parse_optim_algorithm(std::string_view s) {
  if (s == "sgd") return OptimAlgorithm::sgd;
  if (s == "adam") return OptimAlgorithm::adam;
  throw ConfigError("unknown optimizer '" + std::string(s) + "'");
}

struct OptimConfig {
  OptimAlgorithm algorithm = OptimAlgorithm::adam;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double clip_norm = 5.0;

  void validate() const {
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
    if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) throw ConfigError("betas must lie in (0, 1)");
    if (!(eps > 0.0)) throw ConfigError("eps must be > 0");
    if (!(clip_norm > 0.0)) throw ConfigError("clip_norm must be > 0");
  }
};

/// Adam moments (unused by SGD) and the update counter.
struct OptimState {
  ModelParams m;
  ModelParams v;
  std::uint64_t t = 0;

  static OptimState for_params(const ModelParams& p) {
    return {ModelParams::zeros(p.shape), ModelParams::zeros(p.shape), 0};
  }
  friend bool operator==(const OptimState&, const OptimState&) = default;
};

inline double global_norm(const GradientSet& g) {
  double sq = 0.0;
  for (const auto& t : g.tensors())
    for (double x : t.data) sq += x * x;
  return std::sqrt(sq);
}

/// Rescales so the global L2 norm is at most `clip_norm`.
inline GradientSet clip_gradients(GradientSet g, double clip_norm) {
  if (!(clip_norm > 0.0)) throw ConfigError("clip_norm must be > 0");
  const double norm = global_norm(g);
  if (norm > clip_norm) {
    const double scale = clip_norm / norm;
    for (auto& t : g.tensors())
      for (double& x : t.data) x *= scale;
  }
  return g;
}

namespace detail {

template <class Views>
void require_finite(const Views& tensors, const char* what) {
  for (const auto& t : tensors)
    if (!all_finite(t.data)) throw DivergenceError(std::string(what) + " tensor " + t.name + " is not finite");
}

inline void require_congruent(const ModelParams& a, const ModelParams& b) {
  require_shape(a.shape == b.shape, "gradient/state shape differs from parameters");
}

}  // namespace detail

inline void sgd_step(ModelParams& params, const GradientSet& grads, OptimState& state, const OptimConfig& cfg) {
  detail::require_congruent(params, grads);
  detail::require_finite(grads.tensors(), "gradient");
  auto pt = params.tensors();
  auto gt = grads.tensors();
  for (std::size_t k = 0; k < pt.size(); ++k)
    for (std::size_t i = 0; i < pt[k].data.size(); ++i) pt[k].data[i] -= cfg.learning_rate * gt[k].data[i];
  ++state.t;
  detail::require_finite(pt, "parameter");
}

/// Bias-corrected Adam.
inline void adam_step(ModelParams& params, const GradientSet& grads, OptimState& state, const OptimConfig& cfg) {
  detail::require_congruent(params, grads);
  detail::require_congruent(params, state.m);
  detail::require_congruent(params, state.v);
  detail::require_finite(grads.tensors(), "gradient");
  ++state.t;
  const double t = static_cast<double>(state.t);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  auto pt = params.tensors();
  auto gt = grads.tensors();
  auto mt = state.m.tensors();
  auto vt = state.v.tensors();
  for (std::size_t k = 0; k < pt.size(); ++k) {
    auto p = pt[k].data;
    auto g = gt[k].data;
    auto m = mt[k].data;
    auto v = vt[k].data;
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      p[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.eps);
    }
  }
  detail::require_finite(pt, "parameter");
}

inline void optimizer_step(ModelParams& params, const GradientSet& grads, OptimState& state, const OptimConfig& cfg) {
  if (cfg.algorithm == OptimAlgorithm::adam) adam_step(params, grads, state, cfg);
  else sgd_step(params, grads, state, cfg);
}

// ------------------------------------------------------------------ gradient checking

inline double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-8});
}

/// Central differences on `probe_count` random coordinates of `w` (all of them
/// when probe_count >= w.size()). `loss()` must read `w` in place and may return
/// any floating type. Returns the max relative error |a - n| / max(|a|, |n|, 1e-8).
template <class LossFn>
double gradient_check(LossFn&& loss, std::span<double> w, std::span<const double> analytic, std::size_t probe_count,
                      std::uint64_t seed = 0, double step = 1e-5) {
  require_shape(w.size() == analytic.size(), "analytic gradient size differs from parameter size");
  std::vector<std::size_t> coords(w.size());
  std::iota(coords.begin(), coords.end(), std::size_t{0});
  if (probe_count < coords.size()) {
    Rng rng(seed);
    for (std::size_t i = 0; i < probe_count; ++i) std::swap(coords[i], coords[i + rng.index(coords.size() - i)]);
    coords.resize(probe_count);
  }
  double worst = 0.0;
  for (std::size_t idx : coords) {
    const double saved = w[idx];
    const double plus = saved + step;
    const double minus = saved - step;
    w[idx] = plus;
    const auto up = loss();
    w[idx] = minus;
    const auto down = loss();
    w[idx] = saved;
    // The loss may be evaluated in a wider type; keep the difference in that type.
    using Wide = decltype(up - down);
    const double numeric = static_cast<double>((up - down) / static_cast<Wide>(plus - minus));
    worst = std::max(worst, relative_error(analytic[idx], numeric));
  }
  return worst;
}

/// Model-level check: compares `analytic` against central differences of
/// `loss(params)` over randomly chosen coordinates across all tensors.
template <class ModelLossFn>
double gradient_check(ModelLossFn&& loss, ModelParams params, const GradientSet& analytic, std::size_t probe_count,
                      std::uint64_t seed = 0, double step = 1e-5) {
  detail::require_congruent(params, analytic);
  // Flatten into one parameter vector so coordinates are drawn uniformly across tensors.
  std::vector<double> flat, flat_grad;
  for (const auto& t : params.tensors()) flat.insert(flat.end(), t.data.begin(), t.data.end());
  for (const auto& t : analytic.tensors()) flat_grad.insert(flat_grad.end(), t.data.begin(), t.data.end());
  auto views = params.tensors();
  auto scatter = [&] {
    std::size_t off = 0;
    for (auto& t : views) {
      std::copy(flat.begin() + static_cast<std::ptrdiff_t>(off),
                flat.begin() + static_cast<std::ptrdiff_t>(off + t.data.size()), t.data.begin());
      off += t.data.size();
    }
  };
  return gradient_check(
      [&] {
        scatter();
        return loss(std::as_const(params));
      },
      std::span<double>(flat), std::span<const double>(flat_grad), probe_count, seed, step);
}

}  // namespace stylelm
