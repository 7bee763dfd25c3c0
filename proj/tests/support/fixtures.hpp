#pragma once

#include "pbrnn/raster_data.hpp"
#include "pbrnn/sampling.hpp"

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <string>

namespace pbrnn::testing {

/// Fresh per-test directory under PBRNN_TEST_SCRATCH (set by ctest) or the
/// system temp directory.
inline std::filesystem::path scratch_dir(const std::string &name) {
  std::filesystem::path root;
  if (const char *env = std::getenv("PBRNN_TEST_SCRATCH")) root = env;
  else root = std::filesystem::temp_directory_path() / "pbrnn_tests";
  const auto dir = root / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline SceneMeta make_meta(std::size_t w, std::size_t h, std::size_t bands, std::size_t t) {
  using namespace std::chrono;
  SceneMeta m;
  m.scene_id = "t" + std::to_string(t);
  m.acquisition_date = year_month_day{sys_days{2014y / February / 10} + days{16 * static_cast<int>(t)}};
  m.width = w;
  m.height = h;
  m.band_count = bands;
  m.reflectance_mult.assign(bands, 2.0e-5);
  m.reflectance_add.assign(bands, -0.1);
  m.sun_elevation_deg = 60.0;
  return m;
}

using ValueFn = std::function<double(std::size_t t, std::size_t band, std::size_t row, std::size_t col)>;
using MaskFn = std::function<bool(std::size_t t, std::size_t row, std::size_t col)>;

/// Series built directly from a value function; masked pixels are zeroed.
inline SceneSeries make_series(std::size_t w, std::size_t h, std::size_t bands, std::size_t n,
                               const ValueFn &value, const MaskFn &masked = nullptr) {
  SceneSeries s;
  for (std::size_t t = 0; t < n; ++t) {
    ReflectanceStack st;
    st.meta = make_meta(w, h, bands, t);
    st.toa.assign(w * h * bands, 0.0);
    st.masked.assign(w * h, 0);
    for (std::size_t r = 0; r < h; ++r)
      for (std::size_t c = 0; c < w; ++c) {
        const bool m = masked && masked(t, r, c);
        st.masked[r * w + c] = m;
        for (std::size_t b = 0; b < bands; ++b)
          st.toa[(b * h + r) * w + c] = m ? 0.0 : value(t, b, r, c);
      }
    s.scenes.push_back(std::move(st));
  }
  return s;
}

/// Raw scene with DNs from a function and per-pixel mask codes.
inline Scene make_scene(std::size_t w, std::size_t h, std::size_t bands, std::size_t t,
                        const std::function<std::uint16_t(std::size_t, std::size_t, std::size_t)> &dn,
                        const std::function<std::uint8_t(std::size_t, std::size_t)> &code = nullptr) {
  Scene s;
  s.meta = make_meta(w, h, bands, t);
  s.dn.resize(w * h * bands);
  s.mask.assign(w * h, mask_code::ClearLand);
  for (std::size_t b = 0; b < bands; ++b)
    for (std::size_t r = 0; r < h; ++r)
      for (std::size_t c = 0; c < w; ++c) s.dn[(b * h + r) * w + c] = dn(b, r, c);
  if (code)
    for (std::size_t r = 0; r < h; ++r)
      for (std::size_t c = 0; c < w; ++c) s.mask[r * w + c] = code(r, c);
  return s;
}

} // namespace pbrnn::testing
