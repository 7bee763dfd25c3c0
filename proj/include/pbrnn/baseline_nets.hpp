#pragma once

#include "pbrnn/core_math.hpp"
#include "pbrnn/recurrent_nets.hpp"
#include "pbrnn/sample.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace pbrnn {

inline constexpr std::size_t kFfnHiddenWidth = 200;
inline constexpr std::size_t kFusionDates = 4;

enum class HiddenActivation : std::uint8_t { Sigmoid = 0, Tanh = 1 };

/// Single-hidden-layer feedforward classifier used by the single-date and
/// multi-date baselines. Flat layout: hidden_weights, hidden_bias,
/// output_weights, output_bias.
struct FfnParams {
  std::size_t input_dim = 0;
  std::size_t hidden_dim = kFfnHiddenWidth;
  std::size_t num_classes = 0;
  HiddenActivation activation = HiddenActivation::Sigmoid;

  Matrix hidden_weights; // hidden × input
  Vector hidden_bias;
  Matrix output_weights; // classes × hidden
  Vector output_bias;

  static FfnParams zeros(std::size_t input_dim, std::size_t num_classes,
                         HiddenActivation act = HiddenActivation::Sigmoid,
                         std::size_t hidden_dim = kFfnHiddenWidth);
  static FfnParams random(std::size_t input_dim, std::size_t num_classes, std::uint64_t seed,
                          HiddenActivation act = HiddenActivation::Sigmoid,
                          std::size_t hidden_dim = kFfnHiddenWidth);

  std::size_t parameter_count() const;
  std::vector<double> flatten() const;
  void assign_flat(std::span<const double> flat);
  void validate() const;

  friend bool operator==(const FfnParams &, const FfnParams &) = default;
};

using FfnGradients = FfnParams;
FfnGradients zeros_like(const FfnParams &p);

/// softmax(W2·act(W1·x + b1) + b2)
Vector ffn_forward(const FfnParams &params, std::span<const double> x);

/// Adds d(-ln p[label])/dθ for input x into `grads`; returns the loss.
double ffn_accumulate_gradient(const FfnParams &params, std::span<const double> x,
                               ClassId label, FfnGradients &grads);

/// Single-date samples carry exactly one vector.
double accumulate_loss_gradient(const FfnParams &params, const SampleSequence &sample,
                                FfnGradients &grads);
Classification classify(const FfnParams &params, const SampleSequence &sample);

/// Per-date classifiers combined through the joint class probability.
struct FusionEnsemble {
  std::vector<FfnParams> members;
  /// Scene index each member was trained on.
  std::vector<std::size_t> date_ids;

  void validate() const;

  friend bool operator==(const FusionEnsemble &, const FusionEnsemble &) = default;
};

/// Renormalized product of per-date posteriors, computed in the log domain
/// with each log-probability floored at ln(1e-300).
Vector fuse_probabilities(std::span<const Vector> distributions);

/// One input vector per member, in member order.
Classification fuse_classify(const FusionEnsemble &ensemble, std::span<const Vector> inputs);
/// Sample whose timestep d is the input for member d. Dates flagged invalid in
/// the sample's mask are left out of the product unless every date is.
Classification classify(const FusionEnsemble &ensemble, const SampleSequence &sample);

/// The recurrent classifier applied to center-pixel sequences; the model must
/// take `bands`-wide inputs.
ClassId pixel_rnn_classify(const LstmParams &params, const SampleSequence &sample,
                           std::size_t bands = 8);

} // namespace pbrnn
