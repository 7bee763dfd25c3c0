#include "pbrnn/core_math.hpp"

#include "pbrnn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace pbrnn {

namespace {

void require_len(std::size_t got, std::size_t want, const char *what) {
  if (got != want) {
    throw ShapeError(std::string(what) + ": expected length " + std::to_string(want) +
                     ", got " + std::to_string(got));
  }
}

} // namespace

void Vector::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0) {
  data_.reserve(rows_ * cols_);
  for (const auto &r : rows) {
    if (r.size() != cols_) throw ShapeError("Matrix: ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

void Matrix::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

double dot(std::span<const double> a, std::span<const double> b) {
  require_len(b.size(), a.size(), "dot");
  // Four independent partial sums; fixed order keeps results reproducible.
  const std::size_t n = a.size();
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return (s0 + s1) + (s2 + s3);
}

Vector matvec(const Matrix &m, std::span<const double> v) {
  require_len(v.size(), m.cols(), "matvec");
  Vector out(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) out[r] = dot(m.row(r), v);
  return out;
}

void matvec_accumulate(const Matrix &m, std::span<const double> v, std::span<double> out) {
  require_len(v.size(), m.cols(), "matvec_accumulate");
  require_len(out.size(), m.rows(), "matvec_accumulate output");
  for (std::size_t r = 0; r < m.rows(); ++r) out[r] += dot(m.row(r), v);
}

void matvec_transposed_accumulate(const Matrix &m, std::span<const double> v,
                                  std::span<double> out) {
  require_len(v.size(), m.rows(), "matvec_transposed_accumulate");
  require_len(out.size(), m.cols(), "matvec_transposed_accumulate output");
  const std::size_t cols = m.cols();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const double s = v[r];
    if (s == 0.0) continue;
    const double *row = m.row(r).data();
    for (std::size_t c = 0; c < cols; ++c) out[c] += row[c] * s;
  }
}

void outer_accumulate(Matrix &m, std::span<const double> a, std::span<const double> b) {
  require_len(a.size(), m.rows(), "outer_accumulate rows");
  require_len(b.size(), m.cols(), "outer_accumulate cols");
  const std::size_t cols = m.cols();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const double s = a[r];
    if (s == 0.0) continue;
    double *row = m.row(r).data();
    for (std::size_t c = 0; c < cols; ++c) row[c] += s * b[c];
  }
}

double sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Vector sigmoid(const Vector &v) {
  Vector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = sigmoid(v[i]);
  return out;
}

Vector tanh_vec(const Vector &v) {
  Vector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::tanh(v[i]);
  return out;
}

Vector softmax(std::span<const double> v) {
  if (v.empty()) throw ShapeError("softmax: empty vector");
  const double mx = *std::max_element(v.begin(), v.end());
  Vector out(v.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = std::exp(v[i] - mx);
    sum += out[i];
  }
  for (double &x : out) x /= sum;
  return out;
}

Vector elementwise(const Vector &a, const Vector &b, ElementwiseOp op) {
  require_len(b.size(), a.size(), "elementwise");
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    out[i] = op == ElementwiseOp::Add ? a[i] + b[i] : a[i] * b[i];
  return out;
}

std::size_t argmax(std::span<const double> v) {
  if (v.empty()) throw ShapeError("argmax: empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) throw ArgumentError("Rng::below: n must be positive");
  // Rejection sampling on the top of the range to avoid modulo bias.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_normal_;
  }
  double u1;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_normal_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

Vector rng_uniform(Rng &rng, double lo, double hi, std::size_t n) {
  if (!(lo < hi)) throw ArgumentError("rng_uniform: require lo < hi");
  Vector out(n);
  for (double &x : out) {
    x = rng.uniform(lo, hi);
    if (x >= hi) x = std::nextafter(hi, lo);
  }
  return out;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

} // namespace pbrnn
