#include "pbrnn/baseline_nets.hpp"

#include "pbrnn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pbrnn {

namespace {

double activate(HiddenActivation act, double x) {
  return act == HiddenActivation::Sigmoid ? sigmoid(x) : std::tanh(x);
}

/// Derivative expressed through the activation's output value.
double activate_slope(HiddenActivation act, double y) {
  return act == HiddenActivation::Sigmoid ? y * (1.0 - y) : 1.0 - y * y;
}

Vector hidden_layer(const FfnParams &p, std::span<const double> x) {
  if (x.size() != p.input_dim)
    throw ShapeError("ffn input: expected length " + std::to_string(p.input_dim) + ", got " +
                     std::to_string(x.size()));
  Vector hidden = p.hidden_bias;
  matvec_accumulate(p.hidden_weights, x, hidden.span());
  for (double &v : hidden) v = activate(p.activation, v);
  return hidden;
}

template <class P, class Fn> void for_each_field(P &p, Fn &&fn) {
  fn(p.hidden_weights.span());
  fn(p.hidden_bias.span());
  fn(p.output_weights.span());
  fn(p.output_bias.span());
}

const double kLogFloor = std::log(1e-300);

} // namespace

FfnParams FfnParams::zeros(std::size_t input_dim, std::size_t num_classes,
                           HiddenActivation act, std::size_t hidden_dim) {
  if (input_dim == 0 || num_classes == 0 || hidden_dim == 0)
    throw ArgumentError("FfnParams: dimensions must be positive");
  FfnParams p;
  p.input_dim = input_dim;
  p.hidden_dim = hidden_dim;
  p.num_classes = num_classes;
  p.activation = act;
  p.hidden_weights = Matrix(hidden_dim, input_dim);
  p.hidden_bias = Vector(hidden_dim);
  p.output_weights = Matrix(num_classes, hidden_dim);
  p.output_bias = Vector(num_classes);
  return p;
}

FfnParams FfnParams::random(std::size_t input_dim, std::size_t num_classes, std::uint64_t seed,
                            HiddenActivation act, std::size_t hidden_dim) {
  FfnParams p = zeros(input_dim, num_classes, act, hidden_dim);
  Rng rng(seed);
  for (Matrix *m : {&p.hidden_weights, &p.output_weights}) {
    const double s = 1.0 / std::sqrt(static_cast<double>(m->cols()));
    Vector draws = rng_uniform(rng, -s, s, m->size());
    std::copy(draws.begin(), draws.end(), m->span().begin());
  }
  return p;
}

std::size_t FfnParams::parameter_count() const {
  return hidden_weights.size() + hidden_bias.size() + output_weights.size() +
         output_bias.size();
}

std::vector<double> FfnParams::flatten() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  for_each_field(*this,
                 [&](std::span<const double> s) { flat.insert(flat.end(), s.begin(), s.end()); });
  return flat;
}

void FfnParams::assign_flat(std::span<const double> flat) {
  if (flat.size() != parameter_count())
    throw ShapeError("FfnParams::assign_flat: expected " + std::to_string(parameter_count()) +
                     " values, got " + std::to_string(flat.size()));
  std::size_t offset = 0;
  for_each_field(*this, [&](std::span<double> s) {
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(offset), s.size(), s.begin());
    offset += s.size();
  });
}

void FfnParams::validate() const {
  if (hidden_weights.rows() != hidden_dim || hidden_weights.cols() != input_dim ||
      hidden_bias.size() != hidden_dim || output_weights.rows() != num_classes ||
      output_weights.cols() != hidden_dim || output_bias.size() != num_classes)
    throw ShapeError("FfnParams: inconsistent dimensions");
}

FfnGradients zeros_like(const FfnParams &p) {
  return FfnParams::zeros(p.input_dim, p.num_classes, p.activation, p.hidden_dim);
}

Vector ffn_forward(const FfnParams &params, std::span<const double> x) {
  Vector hidden = hidden_layer(params, x);
  Vector logits = params.output_bias;
  matvec_accumulate(params.output_weights, hidden, logits.span());
  return softmax(logits);
}

double ffn_accumulate_gradient(const FfnParams &params, std::span<const double> x,
                               ClassId label, FfnGradients &grads) {
  if (label >= params.num_classes) throw ArgumentError("ffn: label out of range");
  Vector hidden = hidden_layer(params, x);
  Vector logits = params.output_bias;
  matvec_accumulate(params.output_weights, hidden, logits.span());
  Vector probs = softmax(logits);
  const double loss = cross_entropy_loss(probs, label);

  Vector dlogits = probs;
  dlogits[label] -= 1.0;
  outer_accumulate(grads.output_weights, dlogits, hidden);
  for (std::size_t k = 0; k < params.num_classes; ++k) grads.output_bias[k] += dlogits[k];

  Vector dhidden(params.hidden_dim);
  matvec_transposed_accumulate(params.output_weights, dlogits, dhidden.span());
  for (std::size_t j = 0; j < params.hidden_dim; ++j) {
    dhidden[j] *= activate_slope(params.activation, hidden[j]);
    grads.hidden_bias[j] += dhidden[j];
  }
  outer_accumulate(grads.hidden_weights, dhidden, x);
  return loss;
}

double accumulate_loss_gradient(const FfnParams &params, const SampleSequence &sample,
                                FfnGradients &grads) {
  if (sample.length() != 1)
    throw ShapeError("ffn sample: expected a single-date sample, got length " +
                     std::to_string(sample.length()));
  if (!sample.label) throw LabelError("training sample has no label");
  return ffn_accumulate_gradient(params, sample.vectors.front(), *sample.label, grads);
}

Classification classify(const FfnParams &params, const SampleSequence &sample) {
  if (sample.length() != 1)
    throw ShapeError("ffn sample: expected a single-date sample, got length " +
                     std::to_string(sample.length()));
  Vector probs = ffn_forward(params, sample.vectors.front());
  return {argmax(probs), std::move(probs)};
}

void FusionEnsemble::validate() const {
  if (members.empty()) throw ArgumentError("FusionEnsemble: no members");
  if (date_ids.size() != members.size())
    throw ArgumentError("FusionEnsemble: one date id per member required");
  for (const FfnParams &m : members) {
    m.validate();
    if (m.input_dim != members.front().input_dim || m.num_classes != members.front().num_classes)
      throw ShapeError("FusionEnsemble: members disagree on input width or class count");
  }
}

Vector fuse_probabilities(std::span<const Vector> distributions) {
  if (distributions.empty()) throw ArgumentError("fuse_probabilities: no distributions");
  const std::size_t k = distributions.front().size();
  Vector log_joint(k);
  for (const Vector &d : distributions) {
    if (d.size() != k) throw ShapeError("fuse_probabilities: class counts differ");
    for (std::size_t c = 0; c < k; ++c)
      log_joint[c] += d[c] > 0.0 ? std::max(std::log(d[c]), kLogFloor) : kLogFloor;
  }
  Vector fused = softmax(log_joint);
  // A class any member rules out stays ruled out.
  for (std::size_t c = 0; c < k; ++c)
    for (const Vector &d : distributions)
      if (d[c] == 0.0) fused[c] = 0.0;
  double total = 0.0;
  for (double p : fused) total += p;
  if (total > 0.0)
    for (double &p : fused) p /= total;
  return fused;
}

Classification fuse_classify(const FusionEnsemble &ensemble, std::span<const Vector> inputs) {
  if (inputs.size() != ensemble.members.size())
    throw ArgumentError("fuse_classify: expected " + std::to_string(ensemble.members.size()) +
                        " per-date inputs, got " + std::to_string(inputs.size()));
  std::vector<Vector> posteriors;
  posteriors.reserve(inputs.size());
  for (std::size_t d = 0; d < inputs.size(); ++d)
    posteriors.push_back(ffn_forward(ensemble.members[d], inputs[d]));
  Vector fused = fuse_probabilities(posteriors);
  return {argmax(fused), std::move(fused)};
}

Classification classify(const FusionEnsemble &ensemble, const SampleSequence &sample) {
  if (sample.length() != ensemble.members.size())
    throw ArgumentError("classify: expected " + std::to_string(ensemble.members.size()) +
                        " dates, sample has " + std::to_string(sample.length()));
  std::vector<Vector> posteriors;
  for (std::size_t d = 0; d < sample.length(); ++d)
    if (sample.valid_mask.empty() || sample.valid_mask[d])
      posteriors.push_back(ffn_forward(ensemble.members[d], sample.vectors[d]));
  if (posteriors.empty()) return fuse_classify(ensemble, sample.vectors);
  Vector fused = fuse_probabilities(posteriors);
  return {argmax(fused), std::move(fused)};
}

ClassId pixel_rnn_classify(const LstmParams &params, const SampleSequence &sample,
                           std::size_t bands) {
  if (params.input_dim != bands)
    throw ShapeError("pixel_rnn_classify: model input width " + std::to_string(params.input_dim) +
                     " is not the pixel width " + std::to_string(bands));
  if (sample.input_dim() != bands)
    throw ShapeError("pixel_rnn_classify: sample width " + std::to_string(sample.input_dim()) +
                     " is not the pixel width " + std::to_string(bands));
  return classify(params, sample).class_id;
}

} // namespace pbrnn
