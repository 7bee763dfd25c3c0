#include "pbrnn/recurrent_nets.hpp"

#include "pbrnn/errors.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>
#include <string>

namespace pbrnn {

namespace {

void check_shape(const Matrix &m, std::size_t rows, std::size_t cols, const char *name) {
  if (m.rows() != rows || m.cols() != cols) {
    throw ShapeError(std::string(name) + ": expected " + std::to_string(rows) + "x" +
                     std::to_string(cols) + ", got " + std::to_string(m.rows()) + "x" +
                     std::to_string(m.cols()));
  }
}

void check_len(const Vector &v, std::size_t n, const char *name) {
  if (v.size() != n) {
    throw ShapeError(std::string(name) + ": expected length " + std::to_string(n) + ", got " +
                     std::to_string(v.size()));
  }
}

void init_uniform(Matrix &m, Rng &rng) {
  const double s = 1.0 / std::sqrt(static_cast<double>(m.cols()));
  Vector draws = rng_uniform(rng, -s, s, m.size());
  std::copy(draws.begin(), draws.end(), m.span().begin());
}

template <class Fn> void for_each_field(LstmParams &p, Fn &&fn) {
  for (std::size_t k = 0; k < kGateCount; ++k) {
    fn(p.input_weights[k].span());
    fn(p.recurrent_weights[k].span());
    fn(p.gate_bias[k].span());
  }
  fn(p.output_weights.span());
  fn(p.output_bias.span());
}

template <class Fn> void for_each_field(const LstmParams &p, Fn &&fn) {
  for (std::size_t k = 0; k < kGateCount; ++k) {
    fn(p.input_weights[k].span());
    fn(p.recurrent_weights[k].span());
    fn(p.gate_bias[k].span());
  }
  fn(p.output_weights.span());
  fn(p.output_bias.span());
}

} // namespace

LstmParams LstmParams::zeros(std::size_t input_dim, std::size_t hidden_dim,
                             std::size_t num_classes, bool use_bias) {
  if (input_dim == 0 || hidden_dim == 0 || num_classes == 0)
    throw ArgumentError("LstmParams: dimensions must be positive");
  LstmParams p;
  p.input_dim = input_dim;
  p.hidden_dim = hidden_dim;
  p.num_classes = num_classes;
  p.use_bias = use_bias;
  for (std::size_t k = 0; k < kGateCount; ++k) {
    p.input_weights[k] = Matrix(hidden_dim, input_dim);
    p.recurrent_weights[k] = Matrix(hidden_dim, hidden_dim);
    p.gate_bias[k] = Vector(hidden_dim);
  }
  p.output_weights = Matrix(num_classes, hidden_dim);
  p.output_bias = Vector(num_classes);
  return p;
}

LstmParams LstmParams::random(std::size_t input_dim, std::size_t hidden_dim,
                              std::size_t num_classes, const LstmInit &init) {
  LstmParams p = zeros(input_dim, hidden_dim, num_classes, init.use_bias);
  Rng rng(init.seed);
  for (std::size_t k = 0; k < kGateCount; ++k) {
    init_uniform(p.input_weights[k], rng);
    init_uniform(p.recurrent_weights[k], rng);
  }
  init_uniform(p.output_weights, rng);
  if (init.use_bias && init.forget_bias_offset) p.gate_bias[ForgetGate].fill(1.0);
  return p;
}

std::size_t LstmParams::parameter_count() const {
  std::size_t n = 0;
  for_each_field(*this, [&](std::span<const double> s) { n += s.size(); });
  return n;
}

std::vector<double> LstmParams::flatten() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  for_each_field(*this,
                 [&](std::span<const double> s) { flat.insert(flat.end(), s.begin(), s.end()); });
  return flat;
}

void LstmParams::assign_flat(std::span<const double> flat) {
  if (flat.size() != parameter_count())
    throw ShapeError("LstmParams::assign_flat: expected " + std::to_string(parameter_count()) +
                     " values, got " + std::to_string(flat.size()));
  std::size_t offset = 0;
  for_each_field(*this, [&](std::span<double> s) {
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(offset), s.size(), s.begin());
    offset += s.size();
  });
}

void LstmParams::validate() const {
  for (std::size_t k = 0; k < kGateCount; ++k) {
    check_shape(input_weights[k], hidden_dim, input_dim, "input_weights");
    check_shape(recurrent_weights[k], hidden_dim, hidden_dim, "recurrent_weights");
    check_len(gate_bias[k], hidden_dim, "gate_bias");
  }
  check_shape(output_weights, num_classes, hidden_dim, "output_weights");
  check_len(output_bias, num_classes, "output_bias");
}

LstmGradients zeros_like(const LstmParams &p) {
  return LstmParams::zeros(p.input_dim, p.hidden_dim, p.num_classes, p.use_bias);
}

std::array<Vector, kGateCount> gate_preactivations(const LstmParams &params,
                                                   std::span<const double> x,
                                                   std::span<const double> h_prev) {
  if (x.size() != params.input_dim)
    throw ShapeError("lstm input: expected length " + std::to_string(params.input_dim) +
                     ", got " + std::to_string(x.size()));
  if (h_prev.size() != params.hidden_dim)
    throw ShapeError("lstm hidden state: expected length " + std::to_string(params.hidden_dim) +
                     ", got " + std::to_string(h_prev.size()));
  std::array<Vector, kGateCount> pre;
  for (std::size_t k = 0; k < kGateCount; ++k) {
    pre[k] = params.use_bias ? params.gate_bias[k] : Vector(params.hidden_dim);
    matvec_accumulate(params.input_weights[k], x, pre[k].span());
    matvec_accumulate(params.recurrent_weights[k], h_prev, pre[k].span());
  }
  return pre;
}

std::pair<LstmState, StepRecord> lstm_step(const LstmParams &params,
                                           std::span<const double> x,
                                           const LstmState &prev) {
  if (prev.c.size() != params.hidden_dim)
    throw ShapeError("lstm cell state: expected length " + std::to_string(params.hidden_dim));
  auto pre = gate_preactivations(params, x, prev.h);

  StepRecord rec;
  rec.x = Vector(x);
  rec.input_gate = sigmoid(pre[InputGate]);
  rec.forget_gate = sigmoid(pre[ForgetGate]);
  rec.output_gate = sigmoid(pre[OutputGate]);
  rec.candidate = tanh_vec(pre[CandidateGate]);

  const std::size_t n = params.hidden_dim;
  rec.cell = Vector(n);
  rec.hidden = Vector(n);
  for (std::size_t j = 0; j < n; ++j) {
    assert(rec.input_gate[j] >= 0.0 && rec.input_gate[j] <= 1.0);
    assert(rec.forget_gate[j] >= 0.0 && rec.forget_gate[j] <= 1.0);
    assert(rec.output_gate[j] >= 0.0 && rec.output_gate[j] <= 1.0);
    assert(rec.candidate[j] >= -1.0 && rec.candidate[j] <= 1.0);
    rec.cell[j] = rec.forget_gate[j] * prev.c[j] + rec.input_gate[j] * rec.candidate[j];
    rec.hidden[j] = rec.output_gate[j] * std::tanh(rec.cell[j]);
  }
  LstmState next{rec.hidden, rec.cell};
  return {std::move(next), std::move(rec)};
}

ForwardTrace forward_sequence(const LstmParams &params, std::span<const Vector> steps) {
  if (steps.empty()) throw ShapeError("forward_sequence: empty sequence");
  ForwardTrace trace;
  trace.steps.reserve(steps.size());
  LstmState state = LstmState::zero(params.hidden_dim);
  for (const Vector &x : steps) {
    auto [next, rec] = lstm_step(params, x, state);
    state = std::move(next);
    trace.steps.push_back(std::move(rec));
  }
  trace.logits = params.output_bias;
  matvec_accumulate(params.output_weights, state.h, trace.logits.span());
  trace.probabilities = softmax(trace.logits);
  return trace;
}

ForwardTrace forward_sequence(const LstmParams &params, const SampleSequence &sample) {
  return forward_sequence(params, std::span<const Vector>(sample.vectors));
}

double cross_entropy_loss(std::span<const double> probabilities, ClassId label) {
  if (label >= probabilities.size())
    throw ArgumentError("cross_entropy_loss: label " + std::to_string(label) +
                        " out of range for " + std::to_string(probabilities.size()) +
                        " classes");
  const double total = std::accumulate(probabilities.begin(), probabilities.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-9)
    throw ArgumentError("cross_entropy_loss: probabilities do not sum to 1");
  return -std::log(std::max(probabilities[label], 1e-300));
}

void accumulate_backward(const LstmParams &params, const ForwardTrace &trace, ClassId label,
                         LstmGradients &grads) {
  if (trace.steps.empty()) throw ShapeError("backward_sequence: empty trace");
  if (label >= params.num_classes)
    throw ArgumentError("backward_sequence: label out of range");
  const std::size_t n = params.hidden_dim;

  // Softmax + cross-entropy: dL/dlogits = p - onehot(label).
  Vector dlogits = trace.probabilities;
  dlogits[label] -= 1.0;
  const Vector &h_last = trace.steps.back().hidden;
  outer_accumulate(grads.output_weights, dlogits, h_last);
  for (std::size_t k = 0; k < params.num_classes; ++k) grads.output_bias[k] += dlogits[k];

  Vector dh(n);
  matvec_transposed_accumulate(params.output_weights, dlogits, dh.span());
  Vector dc(n);
  const Vector zero(n);
  std::array<Vector, kGateCount> da;
  for (auto &v : da) v = Vector(n);

  for (std::size_t t = trace.steps.size(); t-- > 0;) {
    const StepRecord &s = trace.steps[t];
    const Vector &c_prev = t > 0 ? trace.steps[t - 1].cell : zero;
    const Vector &h_prev = t > 0 ? trace.steps[t - 1].hidden : zero;

    for (std::size_t j = 0; j < n; ++j) {
      const double tc = std::tanh(s.cell[j]);
      const double i = s.input_gate[j], f = s.forget_gate[j], o = s.output_gate[j];
      const double g = s.candidate[j];
      const double d_out = dh[j] * tc;
      dc[j] += dh[j] * o * (1.0 - tc * tc);
      da[InputGate][j] = dc[j] * g * i * (1.0 - i);
      da[ForgetGate][j] = dc[j] * c_prev[j] * f * (1.0 - f);
      da[OutputGate][j] = d_out * o * (1.0 - o);
      da[CandidateGate][j] = dc[j] * i * (1.0 - g * g);
      dc[j] *= f; // carried to step t-1
    }

    dh.fill(0.0);
    for (std::size_t k = 0; k < kGateCount; ++k) {
      outer_accumulate(grads.input_weights[k], da[k], s.x);
      outer_accumulate(grads.recurrent_weights[k], da[k], h_prev);
      if (params.use_bias)
        for (std::size_t j = 0; j < n; ++j) grads.gate_bias[k][j] += da[k][j];
      matvec_transposed_accumulate(params.recurrent_weights[k], da[k], dh.span());
    }
  }
}

LstmGradients backward_sequence(const LstmParams &params, const ForwardTrace &trace,
                                ClassId label) {
  LstmGradients grads = zeros_like(params);
  accumulate_backward(params, trace, label, grads);
  return grads;
}

double accumulate_loss_gradient(const LstmParams &params, const SampleSequence &sample,
                                LstmGradients &grads) {
  if (!sample.label) throw LabelError("training sample has no label");
  ForwardTrace trace = forward_sequence(params, sample);
  accumulate_backward(params, trace, *sample.label, grads);
  return cross_entropy_loss(trace.probabilities, *sample.label);
}

Classification classify(const LstmParams &params, const SampleSequence &sample) {
  ForwardTrace trace = forward_sequence(params, sample);
  return {argmax(trace.probabilities), std::move(trace.probabilities)};
}

SimpleRnnParams SimpleRnnParams::zeros(std::size_t input_dim, std::size_t hidden_dim,
                                       std::size_t num_classes) {
  return {Matrix(hidden_dim, input_dim), Matrix(hidden_dim, hidden_dim), Vector(hidden_dim),
          Matrix(num_classes, hidden_dim), Vector(num_classes)};
}

void SimpleRnnParams::validate() const {
  const std::size_t n = input_weights.rows();
  check_shape(recurrent_weights, n, n, "recurrent_weights");
  check_len(hidden_bias, n, "hidden_bias");
  check_shape(output_weights, output_weights.rows(), n, "output_weights");
  check_len(output_bias, output_weights.rows(), "output_bias");
}

Vector simple_rnn_step(const SimpleRnnParams &params, std::span<const double> x,
                       std::span<const double> h_prev) {
  params.validate();
  Vector pre = params.hidden_bias;
  matvec_accumulate(params.input_weights, x, pre.span());
  matvec_accumulate(params.recurrent_weights, h_prev, pre.span());
  return tanh_vec(pre);
}

Vector simple_rnn_forward(const SimpleRnnParams &params, std::span<const Vector> steps) {
  if (steps.empty()) throw ShapeError("simple_rnn_forward: empty sequence");
  Vector h(params.recurrent_weights.rows());
  for (const Vector &x : steps) h = simple_rnn_step(params, x, h);
  Vector logits = params.output_bias;
  matvec_accumulate(params.output_weights, h, logits.span());
  return softmax(logits);
}

} // namespace pbrnn
