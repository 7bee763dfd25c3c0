#pragma once

#include "pbrnn/core_math.hpp"
#include "pbrnn/sample.hpp"

#include <array>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace pbrnn {

/// Gate order used everywhere: parameter arrays, flat layout, traces.
enum Gate : std::size_t { InputGate = 0, ForgetGate = 1, OutputGate = 2, CandidateGate = 3 };
inline constexpr std::size_t kGateCount = 4;

struct LstmInit {
  std::uint64_t seed = 1;
  bool use_bias = true;
  /// Adds +1 to the forget-gate bias after initialization. Off by default.
  bool forget_bias_offset = false;
};

/// Learnable parameters of the sequence-to-one LSTM classifier.
///
/// Flat layout (checkpoints, optimizer): for each gate k in order
/// input, forget, output, candidate: input_weights[k], recurrent_weights[k],
/// gate_bias[k]; then output_weights, output_bias. Matrices are row-major.
struct LstmParams {
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
  std::size_t num_classes = 0;
  /// When false the gate biases are neither applied nor trained.
  bool use_bias = true;

  std::array<Matrix, kGateCount> input_weights;     // hidden × input
  std::array<Matrix, kGateCount> recurrent_weights; // hidden × hidden
  std::array<Vector, kGateCount> gate_bias;         // hidden
  Matrix output_weights;                            // classes × hidden
  Vector output_bias;                               // classes

  static LstmParams zeros(std::size_t input_dim, std::size_t hidden_dim,
                          std::size_t num_classes, bool use_bias = true);
  /// Uniform(-s, s) with s = 1/sqrt(fan_in) per matrix; biases start at zero.
  static LstmParams random(std::size_t input_dim, std::size_t hidden_dim,
                           std::size_t num_classes, const LstmInit &init);

  std::size_t parameter_count() const;
  std::vector<double> flatten() const;
  void assign_flat(std::span<const double> flat);
  /// Throws ShapeError on inconsistent dimensions.
  void validate() const;

  friend bool operator==(const LstmParams &, const LstmParams &) = default;
};

/// Gradients mirror the parameter layout exactly.
using LstmGradients = LstmParams;

LstmGradients zeros_like(const LstmParams &p);

struct LstmState {
  Vector h;
  Vector c;

  static LstmState zero(std::size_t hidden_dim) {
    return {Vector(hidden_dim), Vector(hidden_dim)};
  }
};

/// Everything one timestep produced, kept for backpropagation.
struct StepRecord {
  Vector x;
  Vector input_gate;
  Vector forget_gate;
  Vector output_gate;
  Vector candidate;
  Vector cell;
  Vector hidden;
};

struct ForwardTrace {
  std::vector<StepRecord> steps;
  Vector logits;
  Vector probabilities;
};

/// Gate pre-activations Wx_k·x + Wh_k·h_prev (+ b_k), in gate order.
std::array<Vector, kGateCount> gate_preactivations(const LstmParams &params,
                                                   std::span<const double> x,
                                                   std::span<const double> h_prev);

std::pair<LstmState, StepRecord> lstm_step(const LstmParams &params,
                                           std::span<const double> x,
                                           const LstmState &prev);

/// Runs the sequence from a zero state and applies the softmax output layer
/// to the final hidden state.
ForwardTrace forward_sequence(const LstmParams &params, std::span<const Vector> steps);
ForwardTrace forward_sequence(const LstmParams &params, const SampleSequence &sample);

/// -ln p[label], with p[label] clamped below at 1e-300.
double cross_entropy_loss(std::span<const double> probabilities, ClassId label);

/// Exact backpropagation through time of the cross-entropy loss.
LstmGradients backward_sequence(const LstmParams &params, const ForwardTrace &trace,
                                ClassId label);
/// Adds this trace's gradient into `grads`.
void accumulate_backward(const LstmParams &params, const ForwardTrace &trace, ClassId label,
                         LstmGradients &grads);

/// Forward + backward for one labeled sample; returns the loss.
double accumulate_loss_gradient(const LstmParams &params, const SampleSequence &sample,
                                LstmGradients &grads);

struct Classification {
  ClassId class_id = 0;
  Vector probabilities;
};

Classification classify(const LstmParams &params, const SampleSequence &sample);

/// Elman recurrence h = tanh(Wx·x + Wh·h_prev + bh) with a softmax readout.
struct SimpleRnnParams {
  Matrix input_weights;
  Matrix recurrent_weights;
  Vector hidden_bias;
  Matrix output_weights;
  Vector output_bias;

  static SimpleRnnParams zeros(std::size_t input_dim, std::size_t hidden_dim,
                               std::size_t num_classes);
  void validate() const;
};

Vector simple_rnn_step(const SimpleRnnParams &params, std::span<const double> x,
                       std::span<const double> h_prev);
/// Softmax output y = softmax(Wy·h + by) after the last step from h(0) = 0.
Vector simple_rnn_forward(const SimpleRnnParams &params, std::span<const Vector> steps);

} // namespace pbrnn
