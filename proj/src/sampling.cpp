#include "pbrnn/sampling.hpp"

#include "pbrnn/binary_io.hpp"
#include "pbrnn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace pbrnn {

namespace fs = std::filesystem;

namespace {

constexpr char kSampleMagic[4] = {'P', 'B', 'S', 'M'};
constexpr std::uint32_t kSampleVersion = 1;
constexpr std::uint16_t kNoLabel16 = 0xFFFF;

bool window_has_masked(const ReflectanceStack &s, std::size_t row, std::size_t col,
                       std::size_t wx, std::size_t wy) {
  const std::size_t r0 = row - wy / 2, c0 = col - wx / 2;
  for (std::size_t r = r0; r < r0 + wy; ++r)
    for (std::size_t c = c0; c < c0 + wx; ++c)
      if (s.is_masked(r, c)) return true;
  return false;
}

bool window_fully_masked(const ReflectanceStack &s, std::size_t row, std::size_t col,
                         std::size_t wx, std::size_t wy) {
  const std::size_t r0 = row - wy / 2, c0 = col - wx / 2;
  for (std::size_t r = r0; r < r0 + wy; ++r)
    for (std::size_t c = c0; c < c0 + wx; ++c)
      if (!s.is_masked(r, c)) return false;
  return true;
}

} // namespace

std::vector<std::size_t> SamplerConfig::scene_indices() const {
  if (!timesteps.empty()) return timesteps;
  std::vector<std::size_t> idx(seq_len);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return idx;
}

void SamplerConfig::validate(const SceneSeries *series) const {
  if (patch_x == 0 || patch_x % 2 == 0) throw ConfigError("patch_x", "must be a positive odd number");
  if (patch_y == 0 || patch_y % 2 == 0) throw ConfigError("patch_y", "must be a positive odd number");
  if (selection_x % 2 == 0 && selection_x != 0) throw ConfigError("selection_x", "must be odd or 0");
  if (selection_y % 2 == 0 && selection_y != 0) throw ConfigError("selection_y", "must be odd or 0");
  if (bands == 0) throw ConfigError("bands", "must be positive");
  if (seq_len == 0) throw ConfigError("seq_len", "must be positive");
  if (!timesteps.empty() && timesteps.size() != seq_len)
    throw ConfigError("timesteps", "must list exactly seq_len scene indices");
  if (!(train_fraction > 0.0 && train_fraction <= 1.0))
    throw ConfigError("train_fraction", "must lie in (0, 1]");
  if (!series) return;
  if (series->bands() != bands)
    throw ConfigError("bands", "series has " + std::to_string(series->bands()) + " bands, config says " +
                                   std::to_string(bands));
  if (seq_len > series->size())
    throw ConfigError("seq_len", "exceeds the series length " + std::to_string(series->size()));
  if (reference_scene >= series->size())
    throw ConfigError("reference_scene", "out of range for a series of " + std::to_string(series->size()));
  for (std::size_t t : scene_indices())
    if (t >= series->size()) throw ConfigError("timesteps", "scene index " + std::to_string(t) + " out of range");
}

bool is_interior(const SamplerConfig &cfg, std::size_t width, std::size_t height, std::size_t row,
                 std::size_t col) {
  const std::size_t hx = cfg.window_x() / 2, hy = cfg.window_y() / 2;
  return row >= hy && col >= hx && row + hy < height && col + hx < width;
}

Vector extract_patch(const SceneSeries &series, const SamplerConfig &cfg, std::size_t t,
                     std::size_t row, std::size_t col) {
  if (t >= series.size()) throw IndexError("extract_patch: scene index " + std::to_string(t) + " out of range");
  const ReflectanceStack &s = series.scenes[t];
  const std::size_t hx = cfg.patch_x / 2, hy = cfg.patch_y / 2;
  if (row < hy || col < hx || row + hy >= s.meta.height || col + hx >= s.meta.width)
    throw BoundaryError("extract_patch: " + std::to_string(cfg.patch_y) + "x" + std::to_string(cfg.patch_x) +
                        " window at (" + std::to_string(row) + ", " + std::to_string(col) +
                        ") leaves the raster");
  if (s.meta.band_count != cfg.bands) throw ShapeError("extract_patch: band count differs from config");
  Vector out(cfg.input_dim());
  std::size_t k = 0;
  for (std::size_t r = row - hy; r <= row + hy; ++r)
    for (std::size_t c = col - hx; c <= col + hx; ++c)
      for (std::size_t b = 0; b < cfg.bands; ++b) out[k++] = s.value(b, r, c);
  return out;
}

SampleSequence build_sample(const SceneSeries &series, const SamplerConfig &cfg, std::size_t row,
                            std::size_t col, const LabelMap *labels, SampleMode mode) {
  if (!is_interior(cfg, series.width(), series.height(), row, col))
    throw BoundaryError("build_sample: (" + std::to_string(row) + ", " + std::to_string(col) +
                        ") is in the boundary region");
  SampleSequence sample;
  sample.row = row;
  sample.col = col;
  if (labels) {
    if (labels->width != series.width() || labels->height != series.height())
      throw ShapeError("build_sample: label map dimensions differ from the series");
    sample.label = labels->label(row, col);
    if (!sample.label && mode == SampleMode::Training)
      throw LabelError("build_sample: no reference label at (" + std::to_string(row) + ", " +
                       std::to_string(col) + ")");
  }
  const auto scenes = cfg.scene_indices();
  sample.vectors.reserve(scenes.size());
  sample.valid_mask.reserve(scenes.size());
  for (std::size_t t : scenes) {
    const ReflectanceStack &s = series.scenes.at(t);
    bool valid;
    if (cfg.zero_masked_pixels_only) {
      valid = !window_fully_masked(s, row, col, cfg.patch_x, cfg.patch_y);
    } else {
      valid = !window_has_masked(s, row, col, cfg.patch_x, cfg.patch_y);
    }
    sample.vectors.push_back(valid ? extract_patch(series, cfg, t, row, col) : Vector(cfg.input_dim()));
    sample.valid_mask.push_back(valid ? 1 : 0);
  }
  return sample;
}

SampleSequence center_pixel_sequence(const SampleSequence &sample, const SamplerConfig &cfg) {
  if (sample.input_dim() != cfg.input_dim())
    throw ShapeError("center_pixel_sequence: sample width " + std::to_string(sample.input_dim()) +
                     " does not match the config's " + std::to_string(cfg.input_dim()));
  const std::size_t offset = ((cfg.patch_y / 2) * cfg.patch_x + cfg.patch_x / 2) * cfg.bands;
  SampleSequence out;
  out.label = sample.label;
  out.row = sample.row;
  out.col = sample.col;
  out.valid_mask = sample.valid_mask;
  for (const Vector &v : sample.vectors)
    out.vectors.emplace_back(std::span<const double>(v.data() + offset, cfg.bands));
  return out;
}

LocationSplit select_training_locations(const SceneSeries &series, const SamplerConfig &cfg,
                                        const LabelMap &labels, std::size_t num_classes) {
  cfg.validate(&series);
  if (labels.width != series.width() || labels.height != series.height())
    throw ShapeError("label map is " + std::to_string(labels.height) + "x" + std::to_string(labels.width) +
                     ", series is " + std::to_string(series.height()) + "x" + std::to_string(series.width()));
  const ReflectanceStack &ref = series.scenes[cfg.reference_scene];
  std::vector<std::vector<Location>> candidates(num_classes);
  for (std::size_t r = 0; r < series.height(); ++r)
    for (std::size_t c = 0; c < series.width(); ++c) {
      if (!is_interior(cfg, series.width(), series.height(), r, c)) continue;
      const auto label = labels.label(r, c);
      if (!label) continue;
      if (*label >= num_classes)
        throw ArgumentError("label map holds class " + std::to_string(*label) + " beyond " +
                            std::to_string(num_classes) + " classes");
      if (window_has_masked(ref, r, c, cfg.window_x(), cfg.window_y())) continue;
      candidates[*label].push_back({r, c});
    }

  LocationSplit split;
  split.per_class.resize(num_classes);
  for (std::size_t k = 0; k < num_classes; ++k) {
    auto &pool = candidates[k];
    const std::size_t take = static_cast<std::size_t>(
        std::floor(cfg.train_fraction * static_cast<double>(pool.size()) + 1e-9));
    split.per_class[k] = {pool.size(), take};
    if (pool.empty()) {
      split.warnings.push_back("class " + std::to_string(k) + " has no training candidates");
      continue;
    }
    Rng rng(derive_seed(cfg.seed, k));
    rng.shuffle(pool);
    split.train.insert(split.train.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(take));
    split.holdout.insert(split.holdout.end(), pool.begin() + static_cast<std::ptrdiff_t>(take), pool.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.holdout.begin(), split.holdout.end());
  return split;
}

std::vector<SampleSequence> build_samples(const SceneSeries &series, const SamplerConfig &cfg,
                                          const LabelMap &labels,
                                          const std::vector<Location> &locations) {
  cfg.validate(&series);
  std::vector<SampleSequence> out;
  out.reserve(locations.size());
  for (const Location &loc : locations)
    out.push_back(build_sample(series, cfg, loc.row, loc.col, &labels, SampleMode::Training));
  return out;
}

TrainingSet extract_training_set(const SceneSeries &series, const SamplerConfig &cfg,
                                 const LabelMap &labels, std::size_t num_classes) {
  TrainingSet set;
  set.split = select_training_locations(series, cfg, labels, num_classes);
  set.train = build_samples(series, cfg, labels, set.split.train);
  set.holdout = build_samples(series, cfg, labels, set.split.holdout);
  return set;
}

LabelMap classify_map(const SceneSeries &series, const SamplerConfig &cfg,
                      const SampleClassifier &classifier) {
  cfg.validate(&series);
  LabelMap map(series.width(), series.height());
  for (std::size_t r = 0; r < series.height(); ++r)
    for (std::size_t c = 0; c < series.width(); ++c) {
      if (!is_interior(cfg, series.width(), series.height(), r, c)) continue;
      SampleSequence s = build_sample(series, cfg, r, c, nullptr, SampleMode::Inference);
      const ClassId k = classifier(s);
      if (k >= kNoDataLabel) throw ArgumentError("classify_map: class id does not fit the map");
      map.at(r, c) = static_cast<std::uint8_t>(k);
    }
  return map;
}

void write_sample_cache(const fs::path &path, const std::vector<SampleSequence> &samples) {
  const std::size_t n = samples.empty() ? 0 : samples.front().length();
  const std::size_t dim = samples.empty() ? 0 : samples.front().input_dim();
  ByteWriter w;
  w.put_bytes(std::string_view(kSampleMagic, 4));
  w.put(kSampleVersion);
  w.put(static_cast<std::uint32_t>(n));
  w.put(static_cast<std::uint32_t>(dim));
  w.put(static_cast<std::uint64_t>(samples.size()));
  for (const SampleSequence &s : samples) {
    if (s.length() != n || s.input_dim() != dim || s.valid_mask.size() != n)
      throw ShapeError("write_sample_cache: samples differ in shape");
    if (s.label && *s.label >= kNoLabel16) throw ArgumentError("write_sample_cache: label too large");
    w.put(s.label ? static_cast<std::uint16_t>(*s.label) : kNoLabel16);
    w.put(static_cast<std::uint32_t>(s.row));
    w.put(static_cast<std::uint32_t>(s.col));
    for (std::uint8_t v : s.valid_mask) w.put(v);
    for (const Vector &v : s.vectors)
      for (double x : v) w.put(x);
  }
  write_file_atomic(path, w.bytes());
}

std::vector<SampleSequence> read_sample_cache(const fs::path &path) {
  const std::string bytes = read_file(path);
  ByteReader r(bytes, path.string());
  if (r.get_bytes(4) != std::string_view(kSampleMagic, 4))
    throw FormatError(path.string() + ": not a sample cache (bad magic)");
  const auto version = r.get<std::uint32_t>();
  if (version != kSampleVersion)
    throw FormatError(path.string() + ": unsupported sample cache version " + std::to_string(version));
  const std::size_t n = r.get<std::uint32_t>();
  const std::size_t dim = r.get<std::uint32_t>();
  const auto count = r.get<std::uint64_t>();
  const std::size_t record = 2 + 4 + 4 + n + n * dim * 8;
  if (count > r.remaining() / std::max<std::size_t>(record, 1))
    throw FormatError(path.string() + ": record count exceeds file size");
  std::vector<SampleSequence> samples(count);
  for (SampleSequence &s : samples) {
    const auto label = r.get<std::uint16_t>();
    if (label != kNoLabel16) s.label = label;
    s.row = r.get<std::uint32_t>();
    s.col = r.get<std::uint32_t>();
    s.valid_mask.resize(n);
    for (auto &v : s.valid_mask) v = r.get<std::uint8_t>();
    s.vectors.assign(n, Vector(dim));
    for (Vector &v : s.vectors)
      for (double &x : v) x = r.get<double>();
  }
  if (r.remaining() != 0) throw FormatError(path.string() + ": trailing bytes after the last record");
  return samples;
}

void write_label_map(const fs::path &path, const LabelMap &map, const ClassScheme &scheme) {
  if (map.ids.size() != map.width * map.height) throw ShapeError("write_label_map: inconsistent map");
  write_file_atomic(path, std::string_view(reinterpret_cast<const char *>(map.ids.data()), map.ids.size()));
  std::ostringstream side;
  side << "width " << map.width << "\nheight " << map.height << "\nnodata " << int(kNoDataLabel)
       << "\nscheme " << scheme.name << '\n';
  for (const ClassEntry &c : scheme.classes) side << "class " << c.id << ' ' << c.name << '\n';
  fs::path sidecar = path;
  sidecar += ".txt";
  write_file_atomic(sidecar, side.str());
}

LabelMap read_label_map(const fs::path &path) {
  fs::path sidecar = path;
  sidecar += ".txt";
  std::istringstream side(read_file(sidecar));
  std::size_t width = 0, height = 0;
  std::string key;
  while (side >> key) {
    if (key == "width") side >> width;
    else if (key == "height") side >> height;
    std::string rest;
    std::getline(side, rest);
  }
  if (width == 0 || height == 0) throw FormatError(sidecar.string() + ": missing width/height");
  const std::string raw = read_file(path);
  if (raw.size() != width * height)
    throw FormatError(path.string() + ": expected " + std::to_string(width * height) + " bytes, found " +
                      std::to_string(raw.size()));
  LabelMap map(width, height);
  map.ids.assign(raw.begin(), raw.end());
  return map;
}

} // namespace pbrnn
