#include "doctest.h"

#include "fixtures.hpp"
#include "pbrnn/binary_io.hpp"
#include "pbrnn/errors.hpp"
#include "pbrnn/sampling.hpp"

#include <cmath>
#include <map>
#include <set>

using namespace pbrnn;

namespace {

double index_value(std::size_t t, std::size_t b, std::size_t r, std::size_t c) {
  return 1000.0 * static_cast<double>(r) + 10.0 * static_cast<double>(c) + static_cast<double>(b) +
         0.001 * static_cast<double>(t);
}

// Independent indexer: reads the raw band-sequential layout directly.
Vector brute_force_patch(const SceneSeries &s, std::size_t t, std::size_t row, std::size_t col,
                         std::size_t px, std::size_t py) {
  const auto &st = s.scenes[t];
  const std::size_t w = st.meta.width, h = st.meta.height, z = st.meta.band_count;
  Vector out(px * py * z);
  std::size_t k = 0;
  for (std::size_t dy = 0; dy < py; ++dy)
    for (std::size_t dx = 0; dx < px; ++dx)
      for (std::size_t b = 0; b < z; ++b) {
        const std::size_t r = row + dy - py / 2, c = col + dx - px / 2;
        out[k++] = st.toa[b * w * h + r * w + c];
      }
  return out;
}

LabelMap stripes(std::size_t w, std::size_t h, std::size_t classes) {
  LabelMap m(w, h);
  for (std::size_t r = 0; r < h; ++r)
    for (std::size_t c = 0; c < w; ++c) m.at(r, c) = static_cast<std::uint8_t>((c / 3 + r / 5) % classes);
  return m;
}

SamplerConfig small_cfg(std::size_t seq_len, std::size_t ref) {
  SamplerConfig cfg;
  cfg.bands = 3;
  cfg.seq_len = seq_len;
  cfg.reference_scene = ref;
  return cfg;
}

} // namespace

TEST_SUITE("sampling") {

TEST_CASE("constant band gives nine repetitions per band") {
  auto s = testing::make_series(5, 5, 3, 1, [](auto, auto b, auto, auto) { return 0.1 * (b + 1); });
  Vector v = extract_patch(s, small_cfg(1, 0), 0, 2, 2);
  REQUIRE(v.size() == 27);
  for (std::size_t p = 0; p < 9; ++p)
    for (std::size_t b = 0; b < 3; ++b) CHECK(v[p * 3 + b] == 0.1 * (b + 1));
}

TEST_CASE("flattening matches the brute-force indexer") {
  auto s = testing::make_series(20, 16, 8, 4, index_value);
  SamplerConfig cfg;
  cfg.seq_len = 4;
  Vector v = extract_patch(s, cfg, 0, 5, 7);
  REQUIRE(v.size() == 72);
  std::size_t k = 0;
  for (std::size_t r = 4; r <= 6; ++r)
    for (std::size_t c = 6; c <= 8; ++c)
      for (std::size_t b = 0; b < 8; ++b) CHECK(v[k++] == 1000.0 * r + 10.0 * c + b);

  Rng rng(99);
  auto rnd = testing::make_series(23, 19, 4, 5, [&rng](auto...) { return rng.uniform(-1, 2); });
  for (int probe = 0; probe < 1000; ++probe) {
    SamplerConfig pc;
    pc.bands = 4;
    pc.seq_len = 5;
    pc.patch_x = 1 + 2 * rng.below(3);
    pc.patch_y = 1 + 2 * rng.below(3);
    const std::size_t t = rng.below(5);
    const std::size_t row = pc.patch_y / 2 + rng.below(19 - pc.patch_y + 1);
    const std::size_t col = pc.patch_x / 2 + rng.below(23 - pc.patch_x + 1);
    CHECK(extract_patch(rnd, pc, t, row, col) == brute_force_patch(rnd, t, row, col, pc.patch_x, pc.patch_y));
  }
}

TEST_CASE("windows leaving the raster are rejected") {
  auto s = testing::make_series(6, 6, 3, 1, index_value);
  SamplerConfig cfg = small_cfg(1, 0);
  CHECK_THROWS_AS(extract_patch(s, cfg, 0, 0, 3), BoundaryError);
  CHECK_THROWS_AS(extract_patch(s, cfg, 0, 3, 5), BoundaryError);
  CHECK_NOTHROW(extract_patch(s, cfg, 0, 1, 4));
  CHECK_THROWS_AS(build_sample(s, cfg, 5, 2, nullptr, SampleMode::Inference), BoundaryError);
  CHECK(is_interior(cfg, 6, 6, 1, 1));
  CHECK_FALSE(is_interior(cfg, 6, 6, 0, 1));
  cfg.selection_x = 5;
  CHECK_FALSE(is_interior(cfg, 6, 6, 1, 1));
  CHECK(is_interior(cfg, 6, 6, 1, 2));
}

TEST_CASE("build_sample masking") {
  auto s = testing::make_series(8, 8, 3, 4, index_value, [](auto t, auto r, auto c) {
    return t == 1 || (t == 2 && r == 3 && c == 5);
  });
  LabelMap labels(8, 8, 2);
  SamplerConfig cfg = small_cfg(4, 0);

  SampleSequence clear = build_sample(s, cfg, 5, 2, &labels);
  CHECK(clear.label == ClassId{2});
  CHECK(clear.valid_mask == std::vector<std::uint8_t>{1, 0, 1, 1});
  CHECK(clear.vectors[1] == Vector(27));
  CHECK(clear.vectors[0] != Vector(27));

  SampleSequence edge = build_sample(s, cfg, 4, 4, &labels);
  CHECK(edge.valid_mask == std::vector<std::uint8_t>{1, 0, 0, 1});
  CHECK(edge.vectors[2] == Vector(27));

  SamplerConfig partial = cfg;
  partial.zero_masked_pixels_only = true;
  SampleSequence p = build_sample(s, partial, 4, 4, &labels);
  // A partially masked window stays valid; only a fully masked one is not.
  CHECK(p.valid_mask == std::vector<std::uint8_t>{1, 0, 1, 1});
  // Only the masked pixel (row 3, col 5: top-right of the window) is zero.
  for (std::size_t b = 0; b < 3; ++b) CHECK(p.vectors[2][2 * 3 + b] == 0.0);
  CHECK(p.vectors[2][0] != 0.0);

  auto clear_series = testing::make_series(8, 8, 3, 4, index_value);
  SampleSequence all = build_sample(clear_series, cfg, 3, 3, &labels);
  for (std::size_t t = 0; t < 4; ++t) {
    CHECK(all.valid_mask[t] == 1);
    CHECK(all.vectors[t] != Vector(27));
  }

  LabelMap holes(8, 8);
  CHECK_THROWS_AS(build_sample(s, cfg, 3, 3, &holes), LabelError);
  SampleSequence unlabeled = build_sample(s, cfg, 3, 3, &holes, SampleMode::Inference);
  CHECK_FALSE(unlabeled.label.has_value());
}

TEST_CASE("explicit timesteps pick scenes in order") {
  auto s = testing::make_series(5, 5, 3, 6, index_value);
  SamplerConfig cfg = small_cfg(3, 2);
  cfg.timesteps = {0, 2, 5};
  SampleSequence seq = build_sample(s, cfg, 2, 2, nullptr, SampleMode::Inference);
  REQUIRE(seq.length() == 3);
  CHECK(seq.vectors[2] == extract_patch(s, cfg, 5, 2, 2));
  CHECK(seq.vectors[1] == extract_patch(s, cfg, 2, 2, 2));
}

TEST_CASE("pixel-mode samples are the centers of patch samples") {
  Rng rng(4);
  auto s = testing::make_series(12, 10, 8, 5, [&rng](auto...) { return rng.uniform(0, 1); },
                                [](auto t, auto r, auto c) { return (t * 7 + r * 3 + c) % 11 == 0; });
  SamplerConfig patch;
  patch.seq_len = 5;
  patch.zero_masked_pixels_only = true;
  SamplerConfig pixel = patch;
  pixel.patch_x = pixel.patch_y = 1;
  for (std::size_t r = 1; r + 1 < 10; ++r)
    for (std::size_t c = 1; c + 1 < 12; ++c) {
      SampleSequence ps = build_sample(s, patch, r, c, nullptr, SampleMode::Inference);
      SampleSequence px = build_sample(s, pixel, r, c, nullptr, SampleMode::Inference);
      SampleSequence centre = center_pixel_sequence(ps, patch);
      CHECK(centre.vectors == px.vectors);
      for (std::size_t t = 0; t < 5; ++t) CHECK(px.vectors[t] == pixel_vector(s, t, r, c));
    }
}

TEST_CASE("training selection respects the reference scene and the floor rule") {
  const std::size_t w = 30, h = 24, classes = 4;
  auto s = testing::make_series(w, h, 3, 3, index_value, [](auto t, auto r, auto c) {
    return (t == 1 && r >= 5 && r < 12 && c >= 4 && c < 15) || (t == 0 && r == 20 && c > 20);
  });
  LabelMap labels = stripes(w, h, classes);
  labels.at(10, 20) = kNoDataLabel;
  SamplerConfig cfg = small_cfg(3, 1);
  LocationSplit split = select_training_locations(s, cfg, labels, classes);

  std::vector<std::size_t> candidates(classes, 0);
  for (std::size_t r = 1; r + 1 < h; ++r)
    for (std::size_t c = 1; c + 1 < w; ++c) {
      if (labels.at(r, c) == kNoDataLabel) continue;
      bool dirty = false;
      for (std::size_t dr = r - 1; dr <= r + 1; ++dr)
        for (std::size_t dc = c - 1; dc <= c + 1; ++dc) dirty = dirty || s.scenes[1].is_masked(dr, dc);
      if (!dirty) ++candidates[labels.at(r, c)];
    }

  std::map<std::size_t, std::size_t> per_class;
  std::set<Location> seen;
  for (const Location &loc : split.train) {
    CHECK(seen.insert(loc).second);
    ++per_class[labels.at(loc.row, loc.col)];
    for (std::size_t dr = loc.row - 1; dr <= loc.row + 1; ++dr)
      for (std::size_t dc = loc.col - 1; dc <= loc.col + 1; ++dc) CHECK_FALSE(s.scenes[1].is_masked(dr, dc));
    CHECK(loc.row >= 1);
    CHECK(loc.col >= 1);
    CHECK(loc.row + 1 < h);
    CHECK(loc.col + 1 < w);
  }
  for (const Location &loc : split.holdout) CHECK(seen.insert(loc).second);
  for (std::size_t k = 0; k < classes; ++k) {
    CHECK(split.per_class[k].candidates == candidates[k]);
    CHECK(split.per_class[k].selected == static_cast<std::size_t>(std::floor(0.8 * candidates[k])));
    CHECK(per_class[k] == split.per_class[k].selected);
  }
  CHECK(split.train.size() + split.holdout.size() ==
        candidates[0] + candidates[1] + candidates[2] + candidates[3]);
  // Clouds at other dates do not exclude a center.
  CHECK(seen.count(Location{20, 25}) == 1);

  CHECK(select_training_locations(s, cfg, labels, classes).train == split.train);
  cfg.seed = 2;
  CHECK(select_training_locations(s, cfg, labels, classes).train != split.train);
}

TEST_CASE("100 candidates select 80") {
  auto s = testing::make_series(12, 12, 3, 1, index_value);
  LabelMap labels(12, 12);
  for (std::size_t r = 1; r <= 10; ++r)
    for (std::size_t c = 1; c <= 10; ++c) labels.at(r, c) = 0;
  LocationSplit split = select_training_locations(s, small_cfg(1, 0), labels, 2);
  CHECK(split.per_class[0].candidates == 100);
  CHECK(split.per_class[0].selected == 80);
  CHECK(split.train.size() == 80);
  CHECK(split.holdout.size() == 20);
  CHECK(split.warnings.size() == 1);
}

TEST_CASE("extract_training_set builds labeled samples") {
  auto s = testing::make_series(10, 10, 3, 2, index_value);
  LabelMap labels = stripes(10, 10, 2);
  TrainingSet ts = extract_training_set(s, small_cfg(2, 0), labels, 2);
  REQUIRE(ts.train.size() == ts.split.train.size());
  REQUIRE(ts.holdout.size() == ts.split.holdout.size());
  for (std::size_t i = 0; i < ts.train.size(); ++i) {
    CHECK(ts.train[i].row == ts.split.train[i].row);
    CHECK(ts.train[i].label == ClassId{labels.at(ts.train[i].row, ts.train[i].col)});
    CHECK(ts.train[i].length() == 2);
  }
}

TEST_CASE("config validation") {
  auto s = testing::make_series(5, 5, 3, 4, index_value);
  SamplerConfig cfg = small_cfg(4, 0);
  CHECK_NOTHROW(cfg.validate(&s));
  auto expect_field = [&](SamplerConfig c, const std::string &field) {
    try {
      c.validate(&s);
      FAIL("accepted bad " << field);
    } catch (const ConfigError &e) {
      CHECK(e.field() == field);
    }
  };
  SamplerConfig c = cfg;
  c.patch_x = 2;
  expect_field(c, "patch_x");
  c = cfg;
  c.patch_y = 0;
  expect_field(c, "patch_y");
  c = cfg;
  c.seq_len = 5;
  expect_field(c, "seq_len");
  c = cfg;
  c.bands = 8;
  expect_field(c, "bands");
  c = cfg;
  c.reference_scene = 4;
  expect_field(c, "reference_scene");
  c = cfg;
  c.train_fraction = 0.0;
  expect_field(c, "train_fraction");
  c = cfg;
  c.timesteps = {0, 1};
  expect_field(c, "timesteps");
  c = cfg;
  c.selection_x = 4;
  expect_field(c, "selection_x");
}

TEST_CASE("classify_map") {
  auto s = testing::make_series(9, 7, 3, 2, index_value);
  SamplerConfig cfg = small_cfg(2, 0);
  auto classifier = [](const SampleSequence &q) { return static_cast<ClassId>((q.row + q.col) % 3); };
  LabelMap a = classify_map(s, cfg, classifier);
  CHECK(a.width == 9);
  CHECK(a.height == 7);
  CHECK(a.at(0, 4) == kNoDataLabel);
  CHECK(a.at(3, 8) == kNoDataLabel);
  CHECK(a.at(3, 4) == 1);
  CHECK(classify_map(s, cfg, classifier) == a);
}

TEST_CASE("sample cache round trip is bit exact") {
  const auto dir = testing::scratch_dir("sample_cache");
  Rng rng(12);
  std::vector<SampleSequence> samples;
  for (int i = 0; i < 25; ++i) {
    SampleSequence s;
    for (int t = 0; t < 4; ++t) s.vectors.push_back(rng_uniform(rng, -1e3, 1e3, 9));
    s.vectors[1][3] = -0.0;
    s.vectors[2][0] = 4.9e-324;
    s.valid_mask = {1, 0, 1, 1};
    s.vectors[1] = Vector(9);
    s.label = i % 3 == 0 ? std::nullopt : std::optional<ClassId>(i % 7);
    s.row = 1000 + i;
    s.col = 70000 + i;
    samples.push_back(s);
  }
  write_sample_cache(dir / "s.bin", samples);
  CHECK(read_sample_cache(dir / "s.bin") == samples);
  const std::string a = read_file(dir / "s.bin");
  write_sample_cache(dir / "t.bin", read_sample_cache(dir / "s.bin"));
  CHECK(read_file(dir / "t.bin") == a);
  CHECK(a.substr(0, 4) == "PBSM");

  std::string bad = a;
  bad[0] = 'X';
  write_file_atomic(dir / "bad.bin", bad);
  CHECK_THROWS_AS(read_sample_cache(dir / "bad.bin"), FormatError);
  write_file_atomic(dir / "short.bin", a.substr(0, a.size() - 1));
  CHECK_THROWS_AS(read_sample_cache(dir / "short.bin"), FormatError);
  write_file_atomic(dir / "long.bin", a + "x");
  CHECK_THROWS_AS(read_sample_cache(dir / "long.bin"), FormatError);
}

TEST_CASE("label map files") {
  const auto dir = testing::scratch_dir("label_map");
  LabelMap m = stripes(11, 6, 8);
  m.at(0, 0) = kNoDataLabel;
  write_label_map(dir / "m.lbl", m, ClassScheme::land_cover8());
  CHECK(read_label_map(dir / "m.lbl") == m);
  CHECK(std::filesystem::file_size(dir / "m.lbl") == 66);
  write_file_atomic(dir / "m.lbl", std::string(65, '\0'));
  CHECK_THROWS_AS(read_label_map(dir / "m.lbl"), FormatError);
}

}
