#pragma once

#include "pbrnn/core_math.hpp"

#include <array>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace pbrnn {

/// Fmask output codes.
namespace mask_code {
inline constexpr std::uint8_t ClearLand = 0;
inline constexpr std::uint8_t ClearWater = 1;
inline constexpr std::uint8_t CloudShadow = 2;
inline constexpr std::uint8_t Snow = 3;
inline constexpr std::uint8_t Cloud = 4;
inline constexpr std::uint8_t NoData = 255;
} // namespace mask_code

struct MaskPolicy {
  bool snow_is_clear = true;

  /// Cloud, cloud shadow and no-data are contaminated; snow per the flag.
  bool contaminated(std::uint8_t code) const noexcept {
    return code == mask_code::Cloud || code == mask_code::CloudShadow ||
           code == mask_code::NoData || (!snow_is_clear && code == mask_code::Snow);
  }
};

struct SceneMeta {
  std::string scene_id;
  std::chrono::year_month_day acquisition_date{};
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t band_count = 0;
  std::vector<double> reflectance_mult; // per band
  std::vector<double> reflectance_add;  // per band
  double sun_elevation_deg = 90.0;

  std::size_t pixel_count() const noexcept { return width * height; }
  /// Throws ArgumentError naming the bad field.
  void validate() const;

  friend bool operator==(const SceneMeta &, const SceneMeta &) = default;
};

/// A raw scene: band-sequential 16-bit DNs (row-major within each band) and
/// one mask code per pixel.
struct Scene {
  SceneMeta meta;
  std::vector<std::uint16_t> dn;
  std::vector<std::uint8_t> mask;

  std::uint16_t dn_at(std::size_t band, std::size_t row, std::size_t col) const {
    return dn[(band * meta.height + row) * meta.width + col];
  }
  void validate() const;

  friend bool operator==(const Scene &, const Scene &) = default;
};

/// TOA reflectance in the scene's band-sequential layout. Contaminated pixels
/// are zero in every band and flagged in `masked`.
struct ReflectanceStack {
  SceneMeta meta;
  std::vector<double> toa;
  std::vector<std::uint8_t> masked; // 1 = contaminated

  double value(std::size_t band, std::size_t row, std::size_t col) const {
    return toa[(band * meta.height + row) * meta.width + col];
  }
  bool is_masked(std::size_t row, std::size_t col) const {
    return masked[row * meta.width + col] != 0;
  }

  friend bool operator==(const ReflectanceStack &, const ReflectanceStack &) = default;
};

/// Co-registered stacks in acquisition order.
struct SceneSeries {
  std::vector<ReflectanceStack> scenes;

  std::size_t size() const noexcept { return scenes.size(); }
  std::size_t width() const { return scenes.front().meta.width; }
  std::size_t height() const { return scenes.front().meta.height; }
  std::size_t bands() const { return scenes.front().meta.band_count; }
  /// Days between consecutive acquisitions (nominally 16; not enforced).
  std::vector<int> day_gaps() const;
  /// Non-empty, shared dimensions, strictly increasing dates.
  void validate() const;
};

struct ImportLog {
  /// Clear pixels with reflectance below -0.2 (kept, but worth a look).
  std::size_t strongly_negative = 0;
  /// Clear pixels above 1.6.
  std::size_t above_range = 0;
  std::vector<std::string> messages;
};

/// ρ = (M·Q + A) / sin(sun elevation), then contaminated pixels zeroed.
ReflectanceStack dn_to_toa(const Scene &scene, const MaskPolicy &policy = {},
                           ImportLog *log = nullptr);

/// Zeroes every band of contaminated pixels. Clear pixels are untouched.
ReflectanceStack apply_mask(ReflectanceStack stack, const std::vector<std::uint8_t> &mask,
                            const MaskPolicy &policy = {});

/// The band values of one pixel at scene t.
Vector pixel_vector(const SceneSeries &series, std::size_t t, std::size_t row, std::size_t col);

struct ClassEntry {
  std::size_t id = 0;
  std::string name;
  std::string description;
  std::array<std::uint8_t, 3> rgb{};
};

struct ClassScheme {
  std::string name;
  std::vector<ClassEntry> classes;

  std::size_t size() const noexcept { return classes.size(); }
  /// ids must run 0..n-1 in order.
  void validate() const;

  /// Eight-class mixed Anderson level 1/2 legend for the Everglades site.
  static ClassScheme land_cover8();
  /// Generic scheme with `n` numbered classes (synthetic sites of other sizes).
  static ClassScheme numbered(std::size_t n);
};

// Scene container: <dir>/meta.json, <dir>/bands.raw, <dir>/mask.raw.
std::chrono::year_month_day parse_date(const std::string &text);
std::string format_date(std::chrono::year_month_day date);

void write_scene(const std::filesystem::path &dir, const Scene &scene);
Scene read_scene(const std::filesystem::path &dir);
/// Optional cache of computed reflectance as little-endian doubles in toa.raw.
void write_toa_cache(const std::filesystem::path &dir, const ReflectanceStack &stack);

/// One scene directory per line, relative to the manifest's directory.
void write_manifest(const std::filesystem::path &path,
                    const std::vector<std::filesystem::path> &scene_dirs);
std::vector<std::filesystem::path> read_manifest(const std::filesystem::path &path);

struct SeriesLoadOptions {
  MaskPolicy policy;
  /// Use toa.raw when present instead of recomputing from DNs.
  bool use_toa_cache = false;
};

SceneSeries load_series(const std::filesystem::path &manifest, const SeriesLoadOptions &opts = {},
                        ImportLog *log = nullptr);

} // namespace pbrnn
