#pragma once

#include "pbrnn/raster_data.hpp"
#include "pbrnn/sample.hpp"

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace pbrnn {

inline constexpr std::uint8_t kNoDataLabel = 255;

/// Per-pixel class ids, row-major; kNoDataLabel marks unlabeled pixels.
struct LabelMap {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> ids;

  LabelMap() = default;
  LabelMap(std::size_t w, std::size_t h, std::uint8_t fill = kNoDataLabel)
      : width(w), height(h), ids(w * h, fill) {}

  std::uint8_t at(std::size_t row, std::size_t col) const { return ids[row * width + col]; }
  std::uint8_t &at(std::size_t row, std::size_t col) { return ids[row * width + col]; }
  std::optional<ClassId> label(std::size_t row, std::size_t col) const {
    const std::uint8_t v = at(row, col);
    return v == kNoDataLabel ? std::nullopt : std::optional<ClassId>(v);
  }

  friend bool operator==(const LabelMap &, const LabelMap &) = default;
};

/// How a sample is cut out of a series.
///
/// Patch vectors are flattened window rows top to bottom, columns left to
/// right, bands innermost.
struct SamplerConfig {
  std::size_t patch_x = 3; // window width (columns)
  std::size_t patch_y = 3; // window height (rows)
  std::size_t bands = 8;
  std::size_t seq_len = 23;
  /// Scene whose window must be clear for a location to be a training candidate.
  std::size_t reference_scene = 0;
  double train_fraction = 0.8;
  std::uint64_t seed = 1;
  /// Explicit scene indices, one per timestep. Empty means 0..seq_len-1.
  std::vector<std::size_t> timesteps;
  /// Window for the candidate constraint and boundary exclusion; 0 uses the
  /// patch size. Lets pixel-width samples share patch-based locations.
  std::size_t selection_x = 0;
  std::size_t selection_y = 0;
  /// false: a window with any contaminated pixel becomes the zero vector.
  /// true: only the contaminated pixels inside the window are zero.
  bool zero_masked_pixels_only = false;

  std::size_t input_dim() const noexcept { return patch_x * patch_y * bands; }
  std::vector<std::size_t> scene_indices() const;
  std::size_t window_x() const noexcept { return std::max(patch_x, selection_x); }
  std::size_t window_y() const noexcept { return std::max(patch_y, selection_y); }
  /// Throws ConfigError; checks series compatibility when given.
  void validate(const SceneSeries *series = nullptr) const;

  friend bool operator==(const SamplerConfig &, const SamplerConfig &) = default;
};

enum class SampleMode { Training, Inference };

/// True when the selection window centered at (row, col) lies inside the raster.
bool is_interior(const SamplerConfig &cfg, std::size_t width, std::size_t height,
                 std::size_t row, std::size_t col);

Vector extract_patch(const SceneSeries &series, const SamplerConfig &cfg, std::size_t t,
                     std::size_t row, std::size_t col);

SampleSequence build_sample(const SceneSeries &series, const SamplerConfig &cfg, std::size_t row,
                            std::size_t col, const LabelMap *labels,
                            SampleMode mode = SampleMode::Training);

/// Center-pixel slice of every patch vector in `sample`.
SampleSequence center_pixel_sequence(const SampleSequence &sample, const SamplerConfig &cfg);

struct Location {
  std::size_t row = 0;
  std::size_t col = 0;
  friend auto operator<=>(const Location &, const Location &) = default;
};

struct ClassSelection {
  std::size_t candidates = 0;
  std::size_t selected = 0;
};

struct LocationSplit {
  std::vector<Location> train;
  std::vector<Location> holdout;
  std::vector<ClassSelection> per_class;
  std::vector<std::string> warnings;
};

/// Candidates: interior labeled pixels whose reference-scene window holds no
/// contaminated pixel. Per class, a seeded floor(train_fraction * n) subset
/// is selected; the remainder is the holdout pool.
LocationSplit select_training_locations(const SceneSeries &series, const SamplerConfig &cfg,
                                        const LabelMap &labels, std::size_t num_classes);

std::vector<SampleSequence> build_samples(const SceneSeries &series, const SamplerConfig &cfg,
                                          const LabelMap &labels,
                                          const std::vector<Location> &locations);

struct TrainingSet {
  std::vector<SampleSequence> train;
  std::vector<SampleSequence> holdout;
  LocationSplit split;
};

TrainingSet extract_training_set(const SceneSeries &series, const SamplerConfig &cfg,
                                 const LabelMap &labels, std::size_t num_classes);

using SampleClassifier = std::function<ClassId(const SampleSequence &)>;

/// Classifies every interior pixel; border pixels are kNoDataLabel.
LabelMap classify_map(const SceneSeries &series, const SamplerConfig &cfg,
                      const SampleClassifier &classifier);

// Training-set cache: "PBSM", version, N, input_dim, count, then records.
void write_sample_cache(const std::filesystem::path &path, const std::vector<SampleSequence> &samples);
std::vector<SampleSequence> read_sample_cache(const std::filesystem::path &path);

// Label maps: raw 8-bit ids plus "<path>.txt" naming dimensions and scheme.
void write_label_map(const std::filesystem::path &path, const LabelMap &map, const ClassScheme &scheme);
LabelMap read_label_map(const std::filesystem::path &path);

} // namespace pbrnn
