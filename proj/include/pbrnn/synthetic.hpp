#pragma once

#include "pbrnn/raster_data.hpp"
#include "pbrnn/sampling.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace pbrnn {

/// Parameters of a synthetic multi-temporal site.
///
/// Each class has a seasonal reflectance profile (seq_len × bands). Some
/// classes come in pairs built on a shared base curve:
///  - temporal pairs differ only in a mid-season window that is zero at the
///    first, last and reference scenes, so single dates cannot separate them;
///  - near pairs differ by a small constant offset, so separating them takes
///    averaging over many noisy values (a patch, a sequence, or both).
struct SyntheticSpec {
  std::size_t width = 128;
  std::size_t height = 128;
  std::size_t num_classes = 8;
  std::size_t seq_len = 23;
  std::size_t bands = 8;
  /// Per class, seq_len × bands TOA values. Empty selects default_profiles().
  std::vector<Matrix> profiles;
  double noise_sigma = 0.08;
  /// Fraction of each scene covered by cloud and cloud shadow.
  double cloud_fraction = 0.1;
  /// Share of the contaminated area written as shadow rather than cloud.
  double shadow_share = 0.3;
  /// Mean spacing of the region seeds, in pixels.
  std::size_t region_blob_scale = 24;
  /// Single-date scene; validate() checks the pair bump vanishes there.
  std::size_t reference_scene = 3;
  /// Temporal pairs take classes 0/1, 2/3, ...; near pairs follow.
  std::size_t temporal_pairs = 2;
  /// Per-band difference of a temporal pair inside its window.
  double temporal_separation = 0.08;
  std::size_t near_pairs = 2;
  /// Per-band offset between the members of a near pair.
  double near_separation = 0.02;
  /// Amplitude of the per-band level pattern that separates class groups.
  double level_contrast = 0.12;
  std::uint64_t seed = 1;
  std::string first_date = "2014-02-10";
  int cadence_days = 16;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// Smooth seasonal curves with per-class level, amplitude and phase.
std::vector<Matrix> default_profiles(const SyntheticSpec &spec);

/// Weight in [0, 1] of the temporal-pair difference at timestep t: a
/// flat-topped window over the middle of the series, zero for
/// t <= seq_len / 5 and for t >= seq_len - 1.
double pair_window(std::size_t t, std::size_t seq_len);

/// Temporal pairs (a, a+1): equal at the reference scene.
std::vector<std::pair<std::size_t, std::size_t>> confusable_class_pairs(const SyntheticSpec &spec);
std::vector<std::pair<std::size_t, std::size_t>> near_class_pairs(const SyntheticSpec &spec);

struct SyntheticSite {
  SyntheticSpec spec; // with profiles filled in
  std::vector<Scene> scenes;
  LabelMap truth;
};

/// Deterministic in spec.seed. Labels, noise and clouds use separate seed
/// streams, so changing cloud_fraction leaves labels and clear-pixel values
/// unchanged.
SyntheticSite generate(const SyntheticSpec &spec);

/// Converts the generated DNs to a masked reflectance series.
SceneSeries site_series(const SyntheticSite &site, const MaskPolicy &policy = {});

/// Writes <dir>/scenes/<id>/..., <dir>/manifest.txt and <dir>/truth.lbl (+ .txt).
/// Returns the manifest path.
std::filesystem::path write_site(const std::filesystem::path &dir, const SyntheticSite &site);

/// Class whose profile is nearest in squared distance over `timesteps`,
/// skipping masked scenes. Used as an oracle in tests.
ClassId nearest_profile(const SyntheticSite &site, const SceneSeries &series,
                        const std::vector<std::size_t> &timesteps, std::size_t row,
                        std::size_t col);

// Flat key=value spec files. Unknown keys are an error.
SyntheticSpec parse_synthetic_spec(const std::string &text);
SyntheticSpec load_synthetic_spec(const std::filesystem::path &path);

} // namespace pbrnn
