#include "pbrnn/synthetic.hpp"

#include "pbrnn/binary_io.hpp"
#include "pbrnn/errors.hpp"
#include "pbrnn/key_value.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace pbrnn {

namespace fs = std::filesystem;

namespace {

constexpr double kReflectanceMult = 2.0e-5;
constexpr double kReflectanceAdd = -0.1;
constexpr double kCloudReflectance = 0.65;
constexpr double kShadowReflectance = 0.03;
constexpr double kMinClearReflectance = 0.01;

// Seed streams. Each scene gets its own sub-seed within a stream.
constexpr std::uint64_t kLabelStream = 1;
constexpr std::uint64_t kNoiseStream = 1000;
constexpr std::uint64_t kCloudStream = 2000;

double sun_elevation(std::size_t t, std::size_t seq_len) {
  const double phase = 2.0 * std::numbers::pi * static_cast<double>(t) / static_cast<double>(seq_len);
  return 50.0 - 15.0 * std::cos(phase);
}

std::uint16_t to_dn(double rho, double sun_elev_deg) {
  const double q = (rho * std::sin(sun_elev_deg * std::numbers::pi / 180.0) - kReflectanceAdd) /
                   kReflectanceMult;
  return static_cast<std::uint16_t>(std::clamp(std::llround(q), 1LL, 65535LL));
}

LabelMap voronoi_labels(const SyntheticSpec &spec) {
  Rng rng(derive_seed(spec.seed, kLabelStream));
  const double area = static_cast<double>(spec.width * spec.height);
  const double cell = static_cast<double>(spec.region_blob_scale * spec.region_blob_scale);
  const auto n = std::max<std::size_t>(spec.num_classes, static_cast<std::size_t>(std::llround(area / cell)));
  std::vector<double> sx(n), sy(n);
  for (std::size_t i = 0; i < n; ++i) {
    sx[i] = rng.uniform(0.0, static_cast<double>(spec.width));
    sy[i] = rng.uniform(0.0, static_cast<double>(spec.height));
  }
  LabelMap map(spec.width, spec.height);
  for (std::size_t r = 0; r < spec.height; ++r) {
    for (std::size_t c = 0; c < spec.width; ++c) {
      const double px = static_cast<double>(c) + 0.5, py = static_cast<double>(r) + 0.5;
      std::size_t best = 0;
      double best_d = INFINITY;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = (sx[i] - px) * (sx[i] - px) + (sy[i] - py) * (sy[i] - py);
        if (d < best_d) {
          best_d = d;
          best = i;
        }
      }
      map.at(r, c) = static_cast<std::uint8_t>(best % spec.num_classes);
    }
  }
  return map;
}

// Axis-aligned ellipses until the covered share reaches the target.
std::vector<std::uint8_t> cloud_mask(const SyntheticSpec &spec, std::size_t t) {
  std::vector<std::uint8_t> mask(spec.width * spec.height, mask_code::ClearLand);
  if (spec.cloud_fraction <= 0.0) return mask;
  Rng rng(derive_seed(spec.seed, kCloudStream + t));
  const auto target = static_cast<std::size_t>(std::ceil(spec.cloud_fraction * static_cast<double>(mask.size())));
  const double max_axis = std::max(3.0, static_cast<double>(std::min(spec.width, spec.height)) / 10.0);
  std::size_t covered = 0;
  while (covered < target) {
    const double cx = rng.uniform(0.0, static_cast<double>(spec.width));
    const double cy = rng.uniform(0.0, static_cast<double>(spec.height));
    const double ax = rng.uniform(1.5, max_axis);
    const double ay = rng.uniform(1.5, max_axis);
    const std::uint8_t code = rng.uniform() < spec.shadow_share ? mask_code::CloudShadow : mask_code::Cloud;
    const auto r0 = static_cast<std::size_t>(std::max(0.0, std::floor(cy - ay)));
    const auto r1 = static_cast<std::size_t>(std::min(static_cast<double>(spec.height), std::ceil(cy + ay)));
    const auto c0 = static_cast<std::size_t>(std::max(0.0, std::floor(cx - ax)));
    const auto c1 = static_cast<std::size_t>(std::min(static_cast<double>(spec.width), std::ceil(cx + ax)));
    for (std::size_t r = r0; r < r1 && covered < target; ++r) {
      for (std::size_t c = c0; c < c1 && covered < target; ++c) {
        const double dx = (static_cast<double>(c) + 0.5 - cx) / ax;
        const double dy = (static_cast<double>(r) + 0.5 - cy) / ay;
        auto &m = mask[r * spec.width + c];
        if (dx * dx + dy * dy <= 1.0 && m == mask_code::ClearLand) {
          m = code;
          ++covered;
        }
      }
    }
  }
  return mask;
}

} // namespace

void SyntheticSpec::validate() const {
  if (width < 3) throw ConfigError("width", "must be at least 3");
  if (height < 3) throw ConfigError("height", "must be at least 3");
  if (num_classes < 2 || num_classes > 254) throw ConfigError("num_classes", "must be in [2, 254]");
  if (seq_len == 0) throw ConfigError("seq_len", "must be positive");
  if (bands == 0) throw ConfigError("bands", "must be positive");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) throw ConfigError("noise_sigma", "must be >= 0");
  if (!(cloud_fraction >= 0.0 && cloud_fraction < 1.0))
    throw ConfigError("cloud_fraction", "must be in [0, 1)");
  if (!(shadow_share >= 0.0 && shadow_share <= 1.0)) throw ConfigError("shadow_share", "must be in [0, 1]");
  if (region_blob_scale == 0) throw ConfigError("region_blob_scale", "must be positive");
  if (reference_scene >= seq_len) throw ConfigError("reference_scene", "must be below seq_len");
  if (2 * (temporal_pairs + near_pairs) > num_classes)
    throw ConfigError("near_pairs", "temporal and near pairs need two classes each");
  if (temporal_pairs > 0 && pair_window(reference_scene, seq_len) != 0.0)
    throw ConfigError("reference_scene", "temporal pairs would differ at the reference scene");
  if (!std::isfinite(temporal_separation)) throw ConfigError("temporal_separation", "must be finite");
  if (!std::isfinite(near_separation)) throw ConfigError("near_separation", "must be finite");
  if (!std::isfinite(level_contrast)) throw ConfigError("level_contrast", "must be finite");
  if (cadence_days <= 0) throw ConfigError("cadence_days", "must be positive");
  try {
    parse_date(first_date);
  } catch (const FormatError &e) {
    throw ConfigError("first_date", e.what());
  }
  if (!profiles.empty()) {
    if (profiles.size() != num_classes) throw ConfigError("profiles", "need one profile per class");
    for (const Matrix &p : profiles) {
      if (p.rows() != seq_len || p.cols() != bands)
        throw ConfigError("profiles", "each profile must be seq_len x bands");
      for (double v : p.span())
        if (!std::isfinite(v)) throw ConfigError("profiles", "values must be finite");
    }
  }
}

double pair_window(std::size_t t, std::size_t seq_len) {
  const double lo = 0.2 * static_cast<double>(seq_len);
  const double hi = static_cast<double>(seq_len) - 1.0;
  const double x = (static_cast<double>(t) - lo) / (hi - lo);
  if (x <= 0.0 || x >= 1.0) return 0.0;
  return std::min(1.0, 2.0 * std::sin(std::numbers::pi * x));
}

std::vector<std::pair<std::size_t, std::size_t>> confusable_class_pairs(const SyntheticSpec &spec) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t p = 0; p < spec.temporal_pairs; ++p) out.emplace_back(2 * p, 2 * p + 1);
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> near_class_pairs(const SyntheticSpec &spec) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t p = spec.temporal_pairs; p < spec.temporal_pairs + spec.near_pairs; ++p)
    out.emplace_back(2 * p, 2 * p + 1);
  return out;
}

std::vector<Matrix> default_profiles(const SyntheticSpec &spec) {
  const std::size_t paired = 2 * (spec.temporal_pairs + spec.near_pairs);
  const std::size_t groups = spec.num_classes - paired / 2;
  const double two_pi = 2.0 * std::numbers::pi;
  std::vector<Matrix> base;
  for (std::size_t g = 0; g < groups; ++g) {
    Matrix m(spec.seq_len, spec.bands);
    const double theta = two_pi * static_cast<double>(g) / static_cast<double>(groups);
    const double amp = 0.05 + 0.02 * static_cast<double>(g % 3);
    const double psi = two_pi * static_cast<double>((3 * g) % groups) / static_cast<double>(groups);
    for (std::size_t t = 0; t < spec.seq_len; ++t) {
      const double season = std::sin(two_pi * static_cast<double>(t) / static_cast<double>(spec.seq_len) + psi);
      for (std::size_t b = 0; b < spec.bands; ++b) {
        const double band_pos = spec.bands > 1 ? static_cast<double>(b) / static_cast<double>(spec.bands - 1) : 0.0;
        const double level = 0.35 + spec.level_contrast * std::sin(two_pi * band_pos + theta);
        m(t, b) = level + amp * (0.5 + band_pos) * season;
      }
    }
    base.push_back(std::move(m));
  }
  std::vector<Matrix> out;
  for (std::size_t k = 0; k < spec.num_classes; ++k) {
    const std::size_t g = k < paired ? k / 2 : k - paired / 2;
    Matrix m = base[g];
    const bool second = k < paired && k % 2 == 1;
    const bool temporal = k < 2 * spec.temporal_pairs;
    if (second) {
      for (std::size_t t = 0; t < spec.seq_len; ++t) {
        const double w = temporal ? spec.temporal_separation * pair_window(t, spec.seq_len) : spec.near_separation;
        for (std::size_t b = 0; b < spec.bands; ++b) m(t, b) += (temporal && b % 2 == 1) ? -w : w;
      }
    }
    out.push_back(std::move(m));
  }
  return out;
}

SyntheticSite generate(const SyntheticSpec &input) {
  input.validate();
  SyntheticSite site;
  site.spec = input;
  SyntheticSpec &spec = site.spec;
  if (spec.profiles.empty()) spec.profiles = default_profiles(spec);
  site.truth = voronoi_labels(spec);

  const auto first = std::chrono::sys_days(parse_date(spec.first_date));
  const std::size_t pixels = spec.width * spec.height;
  for (std::size_t t = 0; t < spec.seq_len; ++t) {
    Scene scene;
    SceneMeta &meta = scene.meta;
    char id[32];
    std::snprintf(id, sizeof id, "synthetic_t%02zu", t);
    meta.scene_id = id;
    meta.acquisition_date = std::chrono::year_month_day(first + std::chrono::days(spec.cadence_days * static_cast<int>(t)));
    meta.width = spec.width;
    meta.height = spec.height;
    meta.band_count = spec.bands;
    meta.reflectance_mult.assign(spec.bands, kReflectanceMult);
    meta.reflectance_add.assign(spec.bands, kReflectanceAdd);
    meta.sun_elevation_deg = sun_elevation(t, spec.seq_len);
    scene.mask = cloud_mask(spec, t);
    scene.dn.resize(pixels * spec.bands);

    // Noise is drawn for every pixel, clouded or not, so the clear-pixel
    // values do not depend on the cloud layout.
    Rng noise(derive_seed(spec.seed, kNoiseStream + t));
    for (std::size_t b = 0; b < spec.bands; ++b) {
      for (std::size_t p = 0; p < pixels; ++p) {
        const double eps = spec.noise_sigma * noise.normal();
        double rho;
        switch (scene.mask[p]) {
        case mask_code::Cloud: rho = kCloudReflectance + 0.5 * eps; break;
        case mask_code::CloudShadow: rho = kShadowReflectance; break;
        default: {
          const std::size_t k = site.truth.ids[p];
          rho = std::max(kMinClearReflectance, spec.profiles[k](t, b) + eps);
        }
        }
        scene.dn[b * pixels + p] = to_dn(rho, meta.sun_elevation_deg);
      }
    }
    site.scenes.push_back(std::move(scene));
  }
  return site;
}

SceneSeries site_series(const SyntheticSite &site, const MaskPolicy &policy) {
  SceneSeries series;
  for (const Scene &s : site.scenes) series.scenes.push_back(dn_to_toa(s, policy));
  series.validate();
  return series;
}

fs::path write_site(const fs::path &dir, const SyntheticSite &site) {
  std::vector<fs::path> rel;
  for (const Scene &s : site.scenes) {
    const fs::path sub = fs::path("scenes") / s.meta.scene_id;
    write_scene(dir / sub, s);
    rel.push_back(sub);
  }
  const fs::path manifest = dir / "manifest.txt";
  write_manifest(manifest, rel);
  write_label_map(dir / "truth.lbl", site.truth, ClassScheme::numbered(site.spec.num_classes));
  return manifest;
}

ClassId nearest_profile(const SyntheticSite &site, const SceneSeries &series,
                        const std::vector<std::size_t> &timesteps, std::size_t row, std::size_t col) {
  std::vector<double> dist(site.spec.profiles.size(), 0.0);
  for (std::size_t t : timesteps) {
    if (series.scenes.at(t).is_masked(row, col)) continue;
    for (std::size_t k = 0; k < dist.size(); ++k) {
      for (std::size_t b = 0; b < site.spec.bands; ++b) {
        const double d = series.scenes[t].value(b, row, col) - site.spec.profiles[k](t, b);
        dist[k] += d * d;
      }
    }
  }
  return static_cast<ClassId>(std::min_element(dist.begin(), dist.end()) - dist.begin());
}

SyntheticSpec parse_synthetic_spec(const std::string &text) {
  KeyValues kv = KeyValues::parse(text);
  SyntheticSpec s;
  s.width = kv.get_size("width", s.width);
  s.height = kv.get_size("height", s.height);
  s.num_classes = kv.get_size("num_classes", s.num_classes);
  s.seq_len = kv.get_size("seq_len", s.seq_len);
  s.bands = kv.get_size("bands", s.bands);
  s.noise_sigma = kv.get_double("noise_sigma", s.noise_sigma);
  s.cloud_fraction = kv.get_double("cloud_fraction", s.cloud_fraction);
  s.shadow_share = kv.get_double("shadow_share", s.shadow_share);
  s.region_blob_scale = kv.get_size("region_blob_scale", s.region_blob_scale);
  s.reference_scene = kv.get_size("reference_scene", s.reference_scene);
  s.temporal_pairs = kv.get_size("temporal_pairs", s.temporal_pairs);
  s.temporal_separation = kv.get_double("temporal_separation", s.temporal_separation);
  s.near_pairs = kv.get_size("near_pairs", s.near_pairs);
  s.near_separation = kv.get_double("near_separation", s.near_separation);
  s.level_contrast = kv.get_double("level_contrast", s.level_contrast);
  s.seed = kv.get_u64("seed", s.seed);
  s.first_date = kv.get_string("first_date", s.first_date);
  s.cadence_days = kv.get_int("cadence_days", s.cadence_days);
  kv.reject_unused();
  s.validate();
  return s;
}

SyntheticSpec load_synthetic_spec(const fs::path &path) {
  if (!fs::exists(path)) throw ConfigError("", "spec file not found: " + path.string());
  return parse_synthetic_spec(read_file(path));
}

} // namespace pbrnn
