#include "pbrnn/raster_data.hpp"

#include "pbrnn/binary_io.hpp"
#include "pbrnn/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

namespace pbrnn {

namespace fs = std::filesystem;
using json = nlohmann::json;

void SceneMeta::validate() const {
  if (width == 0 || height == 0) throw ArgumentError("scene " + scene_id + ": width/height must be positive");
  if (band_count == 0) throw ArgumentError("scene " + scene_id + ": band_count must be positive");
  if (reflectance_mult.size() != band_count || reflectance_add.size() != band_count)
    throw ArgumentError("scene " + scene_id + ": need one reflectance_mult/add per band");
  if (!(sun_elevation_deg > 0.0 && sun_elevation_deg <= 90.0))
    throw ArgumentError("scene " + scene_id + ": sun_elevation_deg must lie in (0, 90]");
  if (!acquisition_date.ok()) throw ArgumentError("scene " + scene_id + ": invalid acquisition_date");
}

void Scene::validate() const {
  meta.validate();
  if (dn.size() != meta.pixel_count() * meta.band_count)
    throw ShapeError("scene " + meta.scene_id + ": DN count does not match width*height*bands");
  if (mask.size() != meta.pixel_count())
    throw ShapeError("scene " + meta.scene_id + ": mask size does not match width*height");
}

std::vector<int> SceneSeries::day_gaps() const {
  std::vector<int> gaps;
  for (std::size_t t = 1; t < scenes.size(); ++t) {
    auto a = std::chrono::sys_days(scenes[t - 1].meta.acquisition_date);
    auto b = std::chrono::sys_days(scenes[t].meta.acquisition_date);
    gaps.push_back(static_cast<int>((b - a).count()));
  }
  return gaps;
}

void SceneSeries::validate() const {
  if (scenes.empty()) throw ArgumentError("scene series is empty");
  const SceneMeta &first = scenes.front().meta;
  for (std::size_t t = 0; t < scenes.size(); ++t) {
    const SceneMeta &m = scenes[t].meta;
    if (m.width != first.width || m.height != first.height || m.band_count != first.band_count)
      throw ShapeError("scene " + m.scene_id + " is not co-registered with " + first.scene_id);
    if (t > 0 && !(std::chrono::sys_days(scenes[t - 1].meta.acquisition_date) <
                   std::chrono::sys_days(m.acquisition_date)))
      throw ArgumentError("scene dates must be strictly increasing (" + m.scene_id + ")");
  }
}

ReflectanceStack dn_to_toa(const Scene &scene, const MaskPolicy &policy, ImportLog *log) {
  scene.validate();
  const SceneMeta &m = scene.meta;
  const double sin_elev = std::sin(m.sun_elevation_deg * std::numbers::pi / 180.0);
  ReflectanceStack stack{m, std::vector<double>(scene.dn.size()), {}};
  const std::size_t pixels = m.pixel_count();
  for (std::size_t b = 0; b < m.band_count; ++b) {
    const double mult = m.reflectance_mult[b], add = m.reflectance_add[b];
    for (std::size_t p = 0; p < pixels; ++p) {
      const std::size_t i = b * pixels + p;
      stack.toa[i] = (mult * static_cast<double>(scene.dn[i]) + add) / sin_elev;
    }
  }
  stack = apply_mask(std::move(stack), scene.mask, policy);
  if (log) {
    std::size_t negative = 0, high = 0;
    for (std::size_t b = 0; b < m.band_count; ++b)
      for (std::size_t p = 0; p < pixels; ++p) {
        if (stack.masked[p]) continue;
        const double v = stack.toa[b * pixels + p];
        if (v < -0.2) ++negative;
        if (v > 1.6) ++high;
      }
    log->strongly_negative += negative;
    log->above_range += high;
    if (negative || high) {
      log->messages.push_back(m.scene_id + ": " + std::to_string(negative) +
                              " values below -0.2, " + std::to_string(high) +
                              " values above 1.6 (kept)");
    }
  }
  return stack;
}

ReflectanceStack apply_mask(ReflectanceStack stack, const std::vector<std::uint8_t> &mask,
                            const MaskPolicy &policy) {
  const std::size_t pixels = stack.meta.pixel_count();
  if (mask.size() != pixels)
    throw ShapeError("apply_mask: mask has " + std::to_string(mask.size()) + " pixels, stack has " +
                     std::to_string(pixels));
  if (stack.masked.size() != pixels) stack.masked.assign(pixels, 0);
  for (std::size_t p = 0; p < pixels; ++p) {
    if (!policy.contaminated(mask[p])) continue;
    stack.masked[p] = 1;
    for (std::size_t b = 0; b < stack.meta.band_count; ++b) stack.toa[b * pixels + p] = 0.0;
  }
  return stack;
}

Vector pixel_vector(const SceneSeries &series, std::size_t t, std::size_t row, std::size_t col) {
  if (t >= series.size()) throw IndexError("pixel_vector: scene index " + std::to_string(t) + " out of range");
  const ReflectanceStack &s = series.scenes[t];
  if (row >= s.meta.height || col >= s.meta.width)
    throw IndexError("pixel_vector: (" + std::to_string(row) + ", " + std::to_string(col) +
                     ") outside " + std::to_string(s.meta.height) + "x" + std::to_string(s.meta.width));
  Vector v(s.meta.band_count);
  for (std::size_t b = 0; b < s.meta.band_count; ++b) v[b] = s.value(b, row, col);
  return v;
}

void ClassScheme::validate() const {
  if (classes.empty()) throw ArgumentError("class scheme is empty");
  for (std::size_t i = 0; i < classes.size(); ++i)
    if (classes[i].id != i) throw ArgumentError("class ids must be contiguous from 0");
}

ClassScheme ClassScheme::land_cover8() {
  return {"land-cover-8",
          {{0, "High Intensity Urban",
            "Commercial, industrial and institutional construction; large transport facilities; "
            "residential areas with over half impervious cover.",
            {230, 0, 0}},
           {1, "Low Intensity Urban",
            "Residential areas with under half impervious cover, small service buildings, "
            "state highways.",
            {255, 160, 160}},
           {2, "Barren Land", "Bare soil, beaches, lightly built areas with low impervious cover.",
            {180, 170, 150}},
           {3, "Forest", "Herbaceous cover and evergreen trees, some wetland evergreen forest.",
            {30, 110, 40}},
           {4, "Cropland", "Crops and pastures mixed with bushes and some fallow land.",
            {230, 210, 80}},
           {5, "Woody Wetland",
            "Cypress/tupelo, strand swamp, coniferous and mixed hardwood wetland, mangrove.",
            {110, 160, 180}},
           {6, "Emergent Herbaceous Wetland",
            "Freshwater non-forested wetland, prairies, marshes, saltwater marsh.",
            {160, 200, 230}},
           {7, "Water", "Streams, canals, lakes, ponds, bays.", {40, 80, 200}}}};
}

ClassScheme ClassScheme::numbered(std::size_t n) {
  if (n == 8) return land_cover8();
  ClassScheme s{"numbered-" + std::to_string(n), {}};
  for (std::size_t i = 0; i < n; ++i) {
    const auto shade = static_cast<std::uint8_t>(n > 1 ? 40 + (200 * i) / (n - 1) : 128);
    s.classes.push_back({i, "Class " + std::to_string(i), "", {shade, shade, shade}});
  }
  return s;
}

std::chrono::year_month_day parse_date(const std::string &text) {
  int y = 0;
  unsigned m = 0, d = 0;
  char tail = 0;
  if (std::sscanf(text.c_str(), "%d-%u-%u%c", &y, &m, &d, &tail) != 3)
    throw FormatError("invalid date '" + text + "' (expected YYYY-MM-DD)");
  std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!ymd.ok()) throw FormatError("invalid calendar date '" + text + "'");
  return ymd;
}

std::string format_date(std::chrono::year_month_day date) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(date.year()),
                static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
  return buf;
}

void write_scene(const fs::path &dir, const Scene &scene) {
  scene.validate();
  fs::create_directories(dir);
  const SceneMeta &m = scene.meta;
  json meta = {{"scene_id", m.scene_id},
               {"acquisition_date", format_date(m.acquisition_date)},
               {"width", m.width},
               {"height", m.height},
               {"band_count", m.band_count},
               {"reflectance_mult", m.reflectance_mult},
               {"reflectance_add", m.reflectance_add},
               {"sun_elevation_deg", m.sun_elevation_deg}};
  write_file_atomic(dir / "meta.json", meta.dump(2) + "\n");

  ByteWriter bands;
  for (std::uint16_t v : scene.dn) bands.put(v);
  write_file_atomic(dir / "bands.raw", bands.bytes());
  write_file_atomic(dir / "mask.raw",
                    std::string_view(reinterpret_cast<const char *>(scene.mask.data()), scene.mask.size()));
}

Scene read_scene(const fs::path &dir) {
  Scene scene;
  const fs::path meta_path = dir / "meta.json";
  try {
    json meta = json::parse(read_file(meta_path));
    SceneMeta &m = scene.meta;
    m.scene_id = meta.at("scene_id").get<std::string>();
    m.acquisition_date = parse_date(meta.at("acquisition_date").get<std::string>());
    m.width = meta.at("width").get<std::size_t>();
    m.height = meta.at("height").get<std::size_t>();
    m.band_count = meta.at("band_count").get<std::size_t>();
    m.reflectance_mult = meta.at("reflectance_mult").get<std::vector<double>>();
    m.reflectance_add = meta.at("reflectance_add").get<std::vector<double>>();
    m.sun_elevation_deg = meta.at("sun_elevation_deg").get<double>();
  } catch (const json::exception &e) {
    throw FormatError(meta_path.string() + ": " + e.what());
  }
  scene.meta.validate();

  const std::string bands = read_file(dir / "bands.raw");
  const std::size_t expected = scene.meta.pixel_count() * scene.meta.band_count;
  if (bands.size() != expected * 2)
    throw FormatError((dir / "bands.raw").string() + ": expected " + std::to_string(expected * 2) +
                      " bytes, found " + std::to_string(bands.size()));
  ByteReader reader(bands, (dir / "bands.raw").string());
  scene.dn.resize(expected);
  for (auto &v : scene.dn) v = reader.get<std::uint16_t>();

  const std::string mask = read_file(dir / "mask.raw");
  if (mask.size() != scene.meta.pixel_count())
    throw FormatError((dir / "mask.raw").string() + ": expected " +
                      std::to_string(scene.meta.pixel_count()) + " bytes, found " +
                      std::to_string(mask.size()));
  scene.mask.assign(mask.begin(), mask.end());
  return scene;
}

void write_toa_cache(const fs::path &dir, const ReflectanceStack &stack) {
  ByteWriter w;
  for (double v : stack.toa) w.put(v);
  write_file_atomic(dir / "toa.raw", w.bytes());
}

void write_manifest(const fs::path &path, const std::vector<fs::path> &scene_dirs) {
  std::ostringstream out;
  for (const fs::path &d : scene_dirs) out << d.generic_string() << '\n';
  write_file_atomic(path, out.str());
}

std::vector<fs::path> read_manifest(const fs::path &path) {
  std::istringstream in(read_file(path));
  std::vector<fs::path> dirs;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    fs::path p(line);
    dirs.push_back(p.is_absolute() ? p : path.parent_path() / p);
  }
  if (dirs.empty()) throw FormatError(path.string() + ": manifest lists no scenes");
  return dirs;
}

SceneSeries load_series(const fs::path &manifest, const SeriesLoadOptions &opts, ImportLog *log) {
  SceneSeries series;
  for (const fs::path &dir : read_manifest(manifest)) {
    Scene scene = read_scene(dir);
    const fs::path cache = dir / "toa.raw";
    if (opts.use_toa_cache && fs::exists(cache)) {
      const std::string bytes = read_file(cache);
      if (bytes.size() != scene.dn.size() * 8)
        throw FormatError(cache.string() + ": size does not match the scene");
      ReflectanceStack stack{scene.meta, std::vector<double>(scene.dn.size()), {}};
      ByteReader r(bytes, cache.string());
      for (double &v : stack.toa) v = r.get<double>();
      series.scenes.push_back(apply_mask(std::move(stack), scene.mask, opts.policy));
    } else {
      series.scenes.push_back(dn_to_toa(scene, opts.policy, log));
    }
  }
  series.validate();
  return series;
}

} // namespace pbrnn
