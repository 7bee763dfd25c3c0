#include "pbrnn/optimizer.hpp"

#include <cmath>
#include <cstdio>
#include <string>

namespace pbrnn {

void adam_update(AdamState &state, std::span<double> params, std::span<const double> grads) {
  if (params.size() != grads.size() || state.m.size() != params.size() ||
      state.v.size() != params.size()) {
    throw ShapeError("adam_update: parameter/gradient/moment lengths differ (" +
                     std::to_string(params.size()) + ", " + std::to_string(grads.size()) +
                     ", " + std::to_string(state.m.size()) + ")");
  }
  const AdamConfig &c = state.config;
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(c.beta1, t);
  const double correction2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    state.m[i] = c.beta1 * state.m[i] + (1.0 - c.beta1) * g;
    state.v[i] = c.beta2 * state.v[i] + (1.0 - c.beta2) * g * g;
    const double m_hat = state.m[i] / correction1;
    const double v_hat = state.v[i] / correction2;
    params[i] -= c.alpha * m_hat / (std::sqrt(v_hat) + c.epsilon);
  }
}

void TrainConfig::validate() const {
  if (batch_size < 1) throw ArgumentError("batch_size must be at least 1");
  if (epochs < 1) throw ArgumentError("epochs must be at least 1");
  if (!(holdout_fraction >= 0.0 && holdout_fraction < 1.0))
    throw ArgumentError("holdout_fraction must lie in [0, 1)");
}

void write_loss_history(std::ostream &out, const TrainResult &result) {
  char line[64];
  for (const EpochStats &e : result.history) {
    std::snprintf(line, sizeof line, "%zu %.17g\n", e.epoch, e.mean_loss);
    out << line;
  }
}

void log_epoch(const EpochStats &stats, std::size_t epochs) {
  std::fprintf(stderr, "epoch %zu/%zu  loss %.6f", stats.epoch, epochs, stats.mean_loss);
  if (stats.holdout_accuracy > 0.0) std::fprintf(stderr, "  holdout %.4f", stats.holdout_accuracy);
  std::fputc('\n', stderr);
}

} // namespace pbrnn
