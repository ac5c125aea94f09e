#pragma once

// Recurrent language-model core: parameters, LSTM and tanh-RNN cells, the
// sequence-to-one encoders (bidirectional LSTM, unidirectional LSTM, RNN), the
// softmax projection, cross-entropy, and backpropagation through time.
//
// Every architecture reads a window of `seq_len` character ids and predicts the
// single character that follows it. Inputs are one-hot, so W * [h, x] is computed
// as W_h * h plus one column of W_x.

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stylelm/corpus.hpp"
#include "stylelm/errors.hpp"
#include "stylelm/random.hpp"
#include "stylelm/tensor.hpp"

namespace stylelm {

enum class Architecture { bilstm, lstm_uni, rnn };

inline std::string_view to_string(Architecture a) {
  switch (a) {
    case Architecture::bilstm: return "bilstm";
    case Architecture::lstm_uni: return "lstm_uni";
    case Architecture::rnn: return "rnn";
  }
  return "?";
}

inline Architecture parse_architecture(std::string_view s) {
  if (s == "bilstm") return Architecture::bilstm;
  if (s == "lstm_uni") return Architecture::lstm_uni;
  if (s == "rnn") return Architecture::rnn;
  throw ConfigError("unknown architecture '" + std::string(s) + "'");
}

struct ModelShape {
  Architecture arch = Architecture::bilstm;
  std::size_t hidden = 100;
  std::size_t vocab = 0;
  std::size_t seq_len = 100;

  /// Width of the projection input: 2*hidden for the bidirectional encoder.
  std::size_t feature_size() const noexcept { return arch == Architecture::bilstm ? 2 * hidden : hidden; }
  friend bool operator==(const ModelShape&, const ModelShape&) = default;
};

/// One affine map over the concatenation [h_prev, x]: columns [0, hidden) see h_prev.
struct GateParams {
  Matrix w;
  Vector b;

  GateParams() = default;
  GateParams(std::size_t hidden, std::size_t vocab) : w(hidden, hidden + vocab), b(hidden, 0.0) {}
  friend bool operator==(const GateParams&, const GateParams&) = default;
};

struct DirectionParams {
  GateParams forget, input, output, cell;

  DirectionParams() = default;
  DirectionParams(std::size_t hidden, std::size_t vocab)
      : forget(hidden, vocab), input(hidden, vocab), output(hidden, vocab), cell(hidden, vocab) {}
  std::size_t hidden() const noexcept { return forget.b.size(); }
  friend bool operator==(const DirectionParams&, const DirectionParams&) = default;
};

/// Named view of one parameter tensor; biases are hidden x 1.
struct TensorView {
  std::string name;
  std::span<double> data;
  std::size_t rows = 0;
  std::size_t cols = 0;
};

struct ConstTensorView {
  std::string name;
  std::span<const double> data;
  std::size_t rows = 0;
  std::size_t cols = 0;
};

/// Parameters for any of the three architectures. Only the members that the
/// architecture uses are allocated; `tensors()` lists exactly those.
/// A GradientSet is a ModelParams of the same shape.
struct ModelParams {
  ModelShape shape;
  DirectionParams fwd;  // lstm_uni, bilstm
  DirectionParams bwd;  // bilstm
  GateParams rnn;       // rnn
  Matrix proj_w;        // vocab x feature_size
  Vector proj_b;        // vocab

  static ModelParams zeros(const ModelShape& s) {
    if (s.hidden == 0 || s.vocab == 0 || s.seq_len == 0) throw ConfigError("hidden, vocab and seq_len must be positive");
    ModelParams p;
    p.shape = s;
    if (s.arch == Architecture::rnn) {
      p.rnn = GateParams(s.hidden, s.vocab);
    } else {
      p.fwd = DirectionParams(s.hidden, s.vocab);
      if (s.arch == Architecture::bilstm) p.bwd = DirectionParams(s.hidden, s.vocab);
    }
    p.proj_w = Matrix(s.vocab, s.feature_size());
    p.proj_b = Vector(s.vocab, 0.0);
    return p;
  }

  /// Weights uniform(-k, k) with k = 1/sqrt(hidden + vocab); biases 0 except forget = 1.
  static ModelParams initialized(const ModelShape& s, std::uint64_t seed) {
    ModelParams p = zeros(s);
    Rng rng(seed);
    const double k = 1.0 / std::sqrt(static_cast<double>(s.hidden + s.vocab));
    for (auto& t : p.tensors()) {
      if (t.cols == 1) continue;
      for (double& x : t.data) x = rng.uniform(-k, k);
    }
    for (double& x : p.fwd.forget.b) x = 1.0;
    for (double& x : p.bwd.forget.b) x = 1.0;
    return p;
  }

  std::vector<TensorView> tensors() {
    std::vector<TensorView> out;
    auto gate = [&](const std::string& prefix, GateParams& g) {
      out.push_back({prefix + ".w", g.w.flat(), g.w.rows(), g.w.cols()});
      out.push_back({prefix + ".b", g.b, g.b.size(), 1});
    };
    auto dir = [&](const std::string& prefix, DirectionParams& d) {
      gate(prefix + ".forget", d.forget);
      gate(prefix + ".input", d.input);
      gate(prefix + ".output", d.output);
      gate(prefix + ".cell", d.cell);
    };
    if (shape.arch == Architecture::rnn) {
      gate("rnn", rnn);
    } else {
      dir("fwd", fwd);
      if (shape.arch == Architecture::bilstm) dir("bwd", bwd);
    }
    out.push_back({"proj.w", proj_w.flat(), proj_w.rows(), proj_w.cols()});
    out.push_back({"proj.b", proj_b, proj_b.size(), 1});
    return out;
  }

  std::vector<ConstTensorView> tensors() const {
    std::vector<ConstTensorView> out;
    for (auto& t : const_cast<ModelParams*>(this)->tensors()) out.push_back({t.name, t.data, t.rows, t.cols});
    return out;
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& t : tensors()) n += t.data.size();
    return n;
  }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

using GradientSet = ModelParams;

// ------------------------------------------------------------------ cells

struct CellState {
  Vector h;
  Vector c;

  static CellState zeros(std::size_t hidden) { return {Vector(hidden, 0.0), Vector(hidden, 0.0)}; }
};

/// Gate activations of one LSTM step plus the resulting state.
struct LstmStep {
  Vector f, i, o, g;  // g is the candidate cell state
  Vector c, h;
};

namespace detail {

inline Vector gate_preactivation(const GateParams& p, std::span<const double> h_prev, CharId x) {
  const std::size_t hidden = p.b.size();
  Vector z = p.b;
  gemv_acc(p.w, 0, h_prev, z);
  const std::size_t col = hidden + static_cast<std::size_t>(x);
  for (std::size_t r = 0; r < hidden; ++r) z[r] += p.w(r, col);
  return z;
}

inline Vector gate_preactivation_dense(const GateParams& p, std::span<const double> h_prev, std::span<const double> x) {
  Vector z = p.b;
  gemv_acc(p.w, 0, h_prev, z);
  gemv_acc(p.w, p.b.size(), x, z);
  return z;
}

inline LstmStep lstm_finish(Vector zf, Vector zi, Vector zo, Vector zg, std::span<const double> c_prev) {
  LstmStep s;
  s.f = sigmoid(zf);
  s.i = sigmoid(zi);
  s.o = sigmoid(zo);
  s.g = tanh(zg);
  const std::size_t n = c_prev.size();
  s.c.resize(n);
  s.h.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    s.c[k] = s.f[k] * c_prev[k] + s.i[k] * s.g[k];
    s.h[k] = s.o[k] * std::tanh(s.c[k]);
  }
  return s;
}

inline LstmStep lstm_step(const DirectionParams& p, std::span<const double> h_prev, std::span<const double> c_prev, CharId x) {
  return lstm_finish(gate_preactivation(p.forget, h_prev, x), gate_preactivation(p.input, h_prev, x),
                     gate_preactivation(p.output, h_prev, x), gate_preactivation(p.cell, h_prev, x), c_prev);
}

}  // namespace detail

/// One LSTM step on a dense input vector:
///   f = sig(W_f[h,x]+b_f), i = sig(W_i[h,x]+b_i), o = sig(W_o[h,x]+b_o),
///   g = tanh(W_c[h,x]+b_c), c = f*c_prev + i*g, h = o*tanh(c).
inline LstmStep lstm_cell_forward(std::span<const double> x, const CellState& prev, const DirectionParams& p) {
  const std::size_t hidden = p.hidden();
  require_shape(prev.h.size() == hidden && prev.c.size() == hidden, "previous state does not match hidden size");
  require_shape(p.forget.w.cols() == hidden + x.size(), "input length does not match vocabulary size");
  using detail::gate_preactivation_dense;
  return detail::lstm_finish(gate_preactivation_dense(p.forget, prev.h, x), gate_preactivation_dense(p.input, prev.h, x),
                             gate_preactivation_dense(p.output, prev.h, x), gate_preactivation_dense(p.cell, prev.h, x),
                             prev.c);
}

/// h = tanh(W[h_prev, x] + b) on a dense input vector.
inline Vector rnn_cell_forward(std::span<const double> x, std::span<const double> h_prev, const GateParams& p) {
  require_shape(h_prev.size() == p.b.size(), "previous state does not match hidden size");
  require_shape(p.w.cols() == p.b.size() + x.size(), "input length does not match vocabulary size");
  return tanh(detail::gate_preactivation_dense(p, h_prev, x));
}

// ------------------------------------------------------------------ sequence encoders

struct ForwardTrace {
  Architecture arch = Architecture::bilstm;
  std::vector<CharId> window;
  std::vector<LstmStep> fwd;  // t = 1..T over window
  std::vector<LstmStep> bwd;  // t = 1..T over the reversed window (bilstm only)
  std::vector<Vector> rnn_h;  // rnn hidden states, t = 1..T
  Vector features;            // projection input
  Vector logits;
  Vector probs;
};

namespace detail {

inline std::vector<LstmStep> run_direction(const DirectionParams& p, std::span<const CharId> ids, bool reversed) {
  const std::size_t hidden = p.hidden();
  std::vector<LstmStep> steps;
  steps.reserve(ids.size());
  const Vector zeros(hidden, 0.0);
  for (std::size_t t = 0; t < ids.size(); ++t) {
    const CharId x = reversed ? ids[ids.size() - 1 - t] : ids[t];
    const Vector& h_prev = steps.empty() ? zeros : steps.back().h;
    const Vector& c_prev = steps.empty() ? zeros : steps.back().c;
    steps.push_back(lstm_step(p, h_prev, c_prev, x));
  }
  return steps;
}

inline void check_window(const ModelParams& p, std::span<const CharId> window) {
  require_shape(window.size() == p.shape.seq_len, "window length " + std::to_string(window.size()) +
                                                      " != seq_len " + std::to_string(p.shape.seq_len));
  for (CharId id : window)
    require_shape(id >= 0 && static_cast<std::size_t>(id) < p.shape.vocab, "character id outside vocabulary");
}

inline void project(const ModelParams& p, ForwardTrace& tr) {
  tr.logits = p.proj_b;
  gemv_acc(p.proj_w, 0, tr.features, tr.logits);
  tr.probs = softmax(tr.logits);
}

}  // namespace detail

/// Forward scan left to right, backward scan right to left, projection over
/// [h_fwd_final, h_bwd_final].
inline ForwardTrace bilstm_forward(std::span<const CharId> window, const ModelParams& p) {
  require_shape(p.shape.arch == Architecture::bilstm, "bilstm_forward needs bilstm parameters");
  detail::check_window(p, window);
  ForwardTrace tr;
  tr.arch = Architecture::bilstm;
  tr.window.assign(window.begin(), window.end());
  tr.fwd = detail::run_direction(p.fwd, window, false);
  tr.bwd = detail::run_direction(p.bwd, window, true);
  tr.features = tr.fwd.back().h;
  tr.features.insert(tr.features.end(), tr.bwd.back().h.begin(), tr.bwd.back().h.end());
  detail::project(p, tr);
  return tr;
}

inline ForwardTrace uni_lstm_forward(std::span<const CharId> window, const ModelParams& p) {
  require_shape(p.shape.arch == Architecture::lstm_uni, "uni_lstm_forward needs lstm_uni parameters");
  detail::check_window(p, window);
  ForwardTrace tr;
  tr.arch = Architecture::lstm_uni;
  tr.window.assign(window.begin(), window.end());
  tr.fwd = detail::run_direction(p.fwd, window, false);
  tr.features = tr.fwd.back().h;
  detail::project(p, tr);
  return tr;
}

inline ForwardTrace rnn_forward(std::span<const CharId> window, const ModelParams& p) {
  require_shape(p.shape.arch == Architecture::rnn, "rnn_forward needs rnn parameters");
  detail::check_window(p, window);
  ForwardTrace tr;
  tr.arch = Architecture::rnn;
  tr.window.assign(window.begin(), window.end());
  const Vector zeros(p.shape.hidden, 0.0);
  for (CharId x : window) {
    const Vector& h_prev = tr.rnn_h.empty() ? zeros : tr.rnn_h.back();
    tr.rnn_h.push_back(tanh(detail::gate_preactivation(p.rnn, h_prev, x)));
  }
  tr.features = tr.rnn_h.back();
  detail::project(p, tr);
  return tr;
}

inline ForwardTrace forward(std::span<const CharId> window, const ModelParams& p) {
  switch (p.shape.arch) {
    case Architecture::bilstm: return bilstm_forward(window, p);
    case Architecture::lstm_uni: return uni_lstm_forward(window, p);
    case Architecture::rnn: return rnn_forward(window, p);
  }
  throw ConfigError("unknown architecture");
}

// ------------------------------------------------------------------ loss

inline constexpr double kLogFloor = 1e-12;

/// -log(p[target] + 1e-12).
inline double cross_entropy(std::span<const double> pred, CharId target) {
  if (target < 0 || static_cast<std::size_t>(target) >= pred.size())
    throw DataError("target id " + std::to_string(target) + " outside [0, " + std::to_string(pred.size()) + ")");
  return -std::log(pred[static_cast<std::size_t>(target)] + kLogFloor);
}

// ------------------------------------------------------------------ BPTT

namespace detail {

inline void gate_backward(const GateParams& p, GateParams& g, std::span<const double> dz, std::span<const double> h_prev,
                          CharId x, std::span<double> dh_prev) {
  const std::size_t hidden = p.b.size();
  outer_acc(g.w, 0, dz, h_prev);
  const std::size_t col = hidden + static_cast<std::size_t>(x);
  for (std::size_t r = 0; r < hidden; ++r) {
    g.w(r, col) += dz[r];
    g.b[r] += dz[r];
  }
  gemv_t_acc(p.w, 0, dz, dh_prev);
}

/// Backpropagates dL/dh_T through one LSTM scan, accumulating into `grad`.
inline void direction_backward(const DirectionParams& p, DirectionParams& grad, const std::vector<LstmStep>& steps,
                               std::span<const CharId> ids, bool reversed, Vector dh) {
  const std::size_t hidden = p.hidden();
  const std::size_t T = steps.size();
  const Vector zeros(hidden, 0.0);
  Vector dc(hidden, 0.0);
  Vector dzf(hidden), dzi(hidden), dzo(hidden), dzg(hidden);
  for (std::size_t t = T; t-- > 0;) {
    const LstmStep& s = steps[t];
    const Vector& h_prev = t == 0 ? zeros : steps[t - 1].h;
    const Vector& c_prev = t == 0 ? zeros : steps[t - 1].c;
    const CharId x = reversed ? ids[T - 1 - t] : ids[t];
    for (std::size_t k = 0; k < hidden; ++k) {
      const double tc = std::tanh(s.c[k]);
      const double d_o = dh[k] * tc;
      dc[k] += dh[k] * s.o[k] * (1.0 - tc * tc);
      const double d_f = dc[k] * c_prev[k];
      const double d_i = dc[k] * s.g[k];
      const double d_g = dc[k] * s.i[k];
      dzf[k] = d_f * s.f[k] * (1.0 - s.f[k]);
      dzi[k] = d_i * s.i[k] * (1.0 - s.i[k]);
      dzo[k] = d_o * s.o[k] * (1.0 - s.o[k]);
      dzg[k] = d_g * (1.0 - s.g[k] * s.g[k]);
      dc[k] *= s.f[k];  // becomes dL/dc_{t-1}
    }
    Vector dh_prev(hidden, 0.0);
    gate_backward(p.forget, grad.forget, dzf, h_prev, x, dh_prev);
    gate_backward(p.input, grad.input, dzi, h_prev, x, dh_prev);
    gate_backward(p.output, grad.output, dzo, h_prev, x, dh_prev);
    gate_backward(p.cell, grad.cell, dzg, h_prev, x, dh_prev);
    dh = std::move(dh_prev);
  }
}

inline void rnn_backward(const GateParams& p, GateParams& grad, const std::vector<Vector>& hs, std::span<const CharId> ids,
                         Vector dh) {
  const std::size_t hidden = p.b.size();
  const Vector zeros(hidden, 0.0);
  Vector dz(hidden);
  for (std::size_t t = hs.size(); t-- > 0;) {
    const Vector& h_prev = t == 0 ? zeros : hs[t - 1];
    for (std::size_t k = 0; k < hidden; ++k) dz[k] = dh[k] * (1.0 - hs[t][k] * hs[t][k]);
    Vector dh_prev(hidden, 0.0);
    gate_backward(p, grad, dz, h_prev, ids[t], dh_prev);
    dh = std::move(dh_prev);
  }
}

}  // namespace detail

/// Exact gradient of cross_entropy(trace.probs, target) (without the log floor)
/// with respect to every parameter.
inline GradientSet bptt_backward(const ForwardTrace& trace, CharId target, const ModelParams& p) {
  require_shape(trace.arch == p.shape.arch, "trace architecture differs from parameters");
  require_shape(trace.probs.size() == p.shape.vocab, "trace vocabulary differs from parameters");
  if (target < 0 || static_cast<std::size_t>(target) >= p.shape.vocab) throw DataError("target id outside vocabulary");

  GradientSet g = ModelParams::zeros(p.shape);
  Vector dlogits = trace.probs;
  dlogits[static_cast<std::size_t>(target)] -= 1.0;
  outer_acc(g.proj_w, 0, dlogits, trace.features);
  g.proj_b = dlogits;
  Vector dfeat(trace.features.size(), 0.0);
  gemv_t_acc(p.proj_w, 0, dlogits, dfeat);

  const std::size_t hidden = p.shape.hidden;
  switch (p.shape.arch) {
    case Architecture::bilstm:
      detail::direction_backward(p.fwd, g.fwd, trace.fwd, trace.window, false, Vector(dfeat.begin(), dfeat.begin() + static_cast<std::ptrdiff_t>(hidden)));
      detail::direction_backward(p.bwd, g.bwd, trace.bwd, trace.window, true, Vector(dfeat.begin() + static_cast<std::ptrdiff_t>(hidden), dfeat.end()));
      break;
    case Architecture::lstm_uni:
      detail::direction_backward(p.fwd, g.fwd, trace.fwd, trace.window, false, dfeat);
      break;
    case Architecture::rnn:
      detail::rnn_backward(p.rnn, g.rnn, trace.rnn_h, trace.window, dfeat);
      break;
  }
  return g;
}

struct LossAndGradients {
  double loss = 0.0;
  GradientSet grads;
};

inline LossAndGradients loss_and_gradients(const ModelParams& p, std::span<const CharId> window, CharId target) {
  ForwardTrace tr = forward(window, p);
  const double loss = cross_entropy(tr.probs, target);
  return {loss, bptt_backward(tr, target, p)};
}

/// Probability of the next character given a window; no trace kept beyond the call.
inline Vector predict(std::span<const CharId> window, const ModelParams& p) { return forward(window, p).probs; }

}  // namespace stylelm
