#include "pbrnn/app.hpp"

#include "pbrnn/binary_io.hpp"
#include "pbrnn/errors.hpp"
#include "pbrnn/published_tables.hpp"
#include "pbrnn/synthetic.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

namespace pbrnn {

namespace fs = std::filesystem;

namespace {

constexpr char kCheckpointMagic[4] = {'P', 'B', 'R', 'N'};
constexpr std::uint32_t kCheckpointVersion = 1;
constexpr std::uint8_t kModelLstm = 0;
constexpr std::uint8_t kModelFfn = 1;

struct ModeInfo {
  SystemMode mode;
  std::string_view name;
  std::string_view label;
};

constexpr ModeInfo kModes[] = {
    {SystemMode::PbRnn, "pb-rnn", "PB-RNN"},
    {SystemMode::PixelRnn, "pixel-rnn", "Pixel RNN"},
    {SystemMode::PixelNnSingle, "pixel-nn-single", "Pixel NN (single)"},
    {SystemMode::PixelNnMulti, "pixel-nn-multi", "Pixel NN (multi)"},
    {SystemMode::PatchNnSingle, "patch-nn-single", "Patch NN (single)"},
    {SystemMode::PatchNnMulti, "patch-nn-multi", "Patch NN (multi)"},
};

const ModeInfo &info(SystemMode mode) {
  for (const ModeInfo &m : kModes)
    if (m.mode == mode) return m;
  throw ArgumentError("unknown system mode");
}

std::uint32_t u32(std::size_t v, const char *what) {
  if (v > 0xFFFFFFFFu) throw ArgumentError(std::string("checkpoint: ") + what + " too large");
  return static_cast<std::uint32_t>(v);
}

void put_doubles(ByteWriter &w, const std::vector<double> &values) {
  w.put(static_cast<std::uint64_t>(values.size()));
  for (double v : values) w.put(v);
}

std::vector<double> get_doubles(ByteReader &r, std::size_t expected) {
  const auto n = r.get<std::uint64_t>();
  if (n != expected)
    throw FormatError("checkpoint: parameter array has " + std::to_string(n) + " values, dimensions imply " +
                      std::to_string(expected));
  std::vector<double> out(n);
  for (double &v : out) v = r.get<double>();
  return out;
}

void require_file(const fs::path &path, const char *field) {
  if (path.empty()) throw ConfigError(field, "not set");
  if (!fs::exists(path)) throw ConfigError(field, "file not found: " + path.string());
}

std::vector<SampleSequence> date_slice(const std::vector<SampleSequence> &samples, std::size_t d) {
  std::vector<SampleSequence> out;
  out.reserve(samples.size());
  for (const SampleSequence &s : samples) {
    if (!s.valid_mask.empty() && !s.valid_mask[d]) continue;
    SampleSequence one;
    one.vectors.push_back(s.vectors[d]);
    one.valid_mask.push_back(1);
    one.label = s.label;
    one.row = s.row;
    one.col = s.col;
    out.push_back(std::move(one));
  }
  return out;
}

std::string format_loss_log(const SystemRun &run) {
  std::ostringstream out;
  for (std::size_t m = 0; m < run.training.size(); ++m) {
    if (run.training.size() > 1) out << "# member " << m << " date " << run.checkpoint.ffn.date_ids[m] << '\n';
    write_loss_history(out, run.training[m]);
  }
  return out.str();
}

std::vector<std::string> scheme_names(std::size_t k) {
  std::vector<std::string> names;
  for (const ClassEntry &c : ClassScheme::numbered(k).classes) names.push_back(c.name);
  return names;
}

} // namespace

std::string_view mode_name(SystemMode mode) { return info(mode).name; }
std::string_view mode_label(SystemMode mode) { return info(mode).label; }

SystemMode parse_mode(std::string_view name) {
  for (const ModeInfo &m : kModes)
    if (m.name == name) return m.mode;
  throw ConfigError("mode", "unknown mode '" + std::string(name) +
                                "' (expected pb-rnn, pixel-rnn, pixel-nn-single, pixel-nn-multi, "
                                "patch-nn-single or patch-nn-multi)");
}

bool is_recurrent(SystemMode mode) { return mode == SystemMode::PbRnn || mode == SystemMode::PixelRnn; }

bool is_pixel(SystemMode mode) {
  return mode == SystemMode::PixelRnn || mode == SystemMode::PixelNnSingle || mode == SystemMode::PixelNnMulti;
}

bool is_multi_date(SystemMode mode) {
  return mode == SystemMode::PixelNnMulti || mode == SystemMode::PatchNnMulti;
}

void RunConfig::validate(const SceneSeries *series) const {
  info(mode);
  if (num_classes < 2 || num_classes >= kNoDataLabel) throw ConfigError("num_classes", "must be in [2, 254]");
  if (!sampler.timesteps.empty()) throw ConfigError("timesteps", "derived from the mode; leave unset");
  if (sampler.selection_x != 0 || sampler.selection_y != 0)
    throw ConfigError("selection_x", "derived from the mode; leave unset");
  sampler.validate();
  if (sampler.reference_scene >= sampler.seq_len)
    throw ConfigError("reference_scene", "must be below seq_len (" + std::to_string(sampler.seq_len) + ")");
  if (hidden_dim == 0) throw ConfigError("hidden_dim", "must be positive");
  if (train.batch_size == 0) throw ConfigError("batch_size", "must be positive");
  if (train.epochs == 0) throw ConfigError("epochs", "must be positive");
  if (!(train.holdout_fraction >= 0.0 && train.holdout_fraction < 1.0))
    throw ConfigError("holdout_fraction", "must lie in [0, 1)");
  if (!(adam.alpha > 0.0)) throw ConfigError("learning_rate", "must be positive");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0)) throw ConfigError("beta1", "must lie in [0, 1)");
  if (!(adam.beta2 >= 0.0 && adam.beta2 < 1.0)) throw ConfigError("beta2", "must lie in [0, 1)");
  if (!(adam.epsilon > 0.0)) throw ConfigError("epsilon", "must be positive");
  if (fusion_dates.size() != kFusionDates)
    throw ConfigError("fusion_dates", "expected " + std::to_string(kFusionDates) + " scene indices, got " +
                                          std::to_string(fusion_dates.size()));
  if (std::set<std::size_t>(fusion_dates.begin(), fusion_dates.end()).size() != fusion_dates.size())
    throw ConfigError("fusion_dates", "scene indices must be distinct");
  for (std::size_t d : fusion_dates)
    if (d >= sampler.seq_len)
      throw ConfigError("fusion_dates", "scene index " + std::to_string(d) + " is not below seq_len " +
                                            std::to_string(sampler.seq_len));
  if (series) {
    if (series->size() < sampler.seq_len)
      throw ConfigError("seq_len", std::to_string(sampler.seq_len) + " exceeds the series length " +
                                       std::to_string(series->size()));
    mode_sampler(*this, mode).validate(series);
  }
}

SamplerConfig mode_sampler(const RunConfig &cfg, SystemMode mode) {
  SamplerConfig s = cfg.sampler;
  s.timesteps.clear();
  s.selection_x = s.selection_y = 0;
  if (is_pixel(mode)) {
    s.selection_x = cfg.sampler.patch_x;
    s.selection_y = cfg.sampler.patch_y;
    s.patch_x = s.patch_y = 1;
  }
  if (mode == SystemMode::PixelNnSingle || mode == SystemMode::PatchNnSingle) {
    s.timesteps = {cfg.sampler.reference_scene};
    s.seq_len = 1;
  } else if (is_multi_date(mode)) {
    s.timesteps = cfg.fusion_dates;
    s.seq_len = cfg.fusion_dates.size();
  }
  return s;
}

RunConfig parse_run_config(const std::string &text) {
  KeyValues kv = KeyValues::parse(text);
  RunConfig c;
  c.mode = parse_mode(kv.get_string("mode", std::string(mode_name(c.mode))));
  c.manifest = kv.get_string("manifest", "");
  c.labels = kv.get_string("labels", "");
  c.output_dir = kv.get_string("output_dir", c.output_dir.string());
  c.num_classes = kv.get_size("num_classes", c.num_classes);

  SamplerConfig &s = c.sampler;
  s.patch_x = kv.get_size("patch_x", s.patch_x);
  s.patch_y = kv.get_size("patch_y", s.patch_y);
  s.bands = kv.get_size("bands", s.bands);
  s.seq_len = kv.get_size("seq_len", s.seq_len);
  s.reference_scene = kv.get_size("reference_scene", s.reference_scene);
  s.train_fraction = kv.get_double("train_fraction", s.train_fraction);
  s.seed = kv.get_u64("sample_seed", s.seed);
  s.zero_masked_pixels_only = kv.get_bool("zero_masked_pixels_only", s.zero_masked_pixels_only);

  c.hidden_dim = kv.get_size("hidden_dim", c.hidden_dim);
  c.lstm_bias = kv.get_bool("lstm_bias", c.lstm_bias);
  c.forget_bias_offset = kv.get_bool("forget_bias_offset", c.forget_bias_offset);
  c.init_seed = kv.get_u64("init_seed", c.init_seed);
  const std::string act = kv.get_string("ffn_activation", "sigmoid");
  if (act == "sigmoid") c.ffn_activation = HiddenActivation::Sigmoid;
  else if (act == "tanh") c.ffn_activation = HiddenActivation::Tanh;
  else throw ConfigError("ffn_activation", "expected sigmoid or tanh, got '" + act + "'");
  c.ffn_epochs = kv.get_size("ffn_epochs", c.ffn_epochs);
  c.fusion_dates = kv.get_size_list("fusion_dates", c.fusion_dates);

  c.train.batch_size = kv.get_size("batch_size", c.train.batch_size);
  c.train.epochs = kv.get_size("epochs", c.train.epochs);
  c.train.shuffle_seed = kv.get_u64("shuffle_seed", c.train.shuffle_seed);
  c.train.holdout_fraction = kv.get_double("holdout_fraction", c.train.holdout_fraction);
  c.train.log_every = kv.get_size("log_every", c.train.log_every);
  c.adam.alpha = kv.get_double("learning_rate", c.adam.alpha);
  c.adam.beta1 = kv.get_double("beta1", c.adam.beta1);
  c.adam.beta2 = kv.get_double("beta2", c.adam.beta2);
  c.adam.epsilon = kv.get_double("epsilon", c.adam.epsilon);
  c.mask_policy.snow_is_clear = kv.get_bool("snow_is_clear", c.mask_policy.snow_is_clear);
  kv.reject_unused();
  c.validate();
  return c;
}

RunConfig load_run_config(const fs::path &path) {
  if (!fs::exists(path)) throw ConfigError("", "config file not found: " + path.string());
  RunConfig c = parse_run_config(read_file(path));
  // Relative data paths are taken from the config file's directory.
  const fs::path base = path.parent_path();
  for (fs::path *p : {&c.manifest, &c.labels, &c.output_dir})
    if (!p->empty() && p->is_relative()) *p = base / *p;
  return c;
}

std::string format_run_config(const RunConfig &c) {
  std::ostringstream out;
  out.precision(17);
  auto list = [](const std::vector<std::size_t> &v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
  };
  out << "mode = " << mode_name(c.mode) << '\n'
      << "manifest = " << c.manifest.string() << '\n'
      << "labels = " << c.labels.string() << '\n'
      << "output_dir = " << c.output_dir.string() << '\n'
      << "num_classes = " << c.num_classes << '\n'
      << "patch_x = " << c.sampler.patch_x << '\n'
      << "patch_y = " << c.sampler.patch_y << '\n'
      << "bands = " << c.sampler.bands << '\n'
      << "seq_len = " << c.sampler.seq_len << '\n'
      << "reference_scene = " << c.sampler.reference_scene << '\n'
      << "train_fraction = " << c.sampler.train_fraction << '\n'
      << "sample_seed = " << c.sampler.seed << '\n'
      << "zero_masked_pixels_only = " << (c.sampler.zero_masked_pixels_only ? "true" : "false") << '\n'
      << "hidden_dim = " << c.hidden_dim << '\n'
      << "lstm_bias = " << (c.lstm_bias ? "true" : "false") << '\n'
      << "forget_bias_offset = " << (c.forget_bias_offset ? "true" : "false") << '\n'
      << "init_seed = " << c.init_seed << '\n'
      << "ffn_activation = " << (c.ffn_activation == HiddenActivation::Tanh ? "tanh" : "sigmoid") << '\n'
      << "ffn_epochs = " << c.ffn_epochs << '\n'
      << "fusion_dates = " << list(c.fusion_dates) << '\n'
      << "batch_size = " << c.train.batch_size << '\n'
      << "epochs = " << c.train.epochs << '\n'
      << "shuffle_seed = " << c.train.shuffle_seed << '\n'
      << "holdout_fraction = " << c.train.holdout_fraction << '\n'
      << "log_every = " << c.train.log_every << '\n'
      << "learning_rate = " << c.adam.alpha << '\n'
      << "beta1 = " << c.adam.beta1 << '\n'
      << "beta2 = " << c.adam.beta2 << '\n'
      << "epsilon = " << c.adam.epsilon << '\n'
      << "snow_is_clear = " << (c.mask_policy.snow_is_clear ? "true" : "false") << '\n';
  return out.str();
}

std::string serialize_checkpoint(const Checkpoint &ck) {
  ByteWriter w;
  w.put_bytes(std::string_view(kCheckpointMagic, 4));
  w.put(kCheckpointVersion);
  w.put(static_cast<std::uint8_t>(ck.mode));
  const SamplerConfig &s = ck.sampler;
  w.put(u32(s.patch_x, "patch_x"));
  w.put(u32(s.patch_y, "patch_y"));
  w.put(u32(s.bands, "bands"));
  w.put(u32(s.seq_len, "seq_len"));
  w.put(u32(s.reference_scene, "reference_scene"));
  w.put(u32(s.selection_x, "selection_x"));
  w.put(u32(s.selection_y, "selection_y"));
  w.put(u32(s.timesteps.size(), "timesteps"));
  for (std::size_t t : s.timesteps) w.put(u32(t, "timestep"));
  w.put(s.train_fraction);
  w.put(s.seed);
  w.put(static_cast<std::uint8_t>(s.zero_masked_pixels_only ? 1 : 0));
  w.put(u32(ck.num_classes, "num_classes"));
  w.put(ck.init_seed);
  w.put(ck.shuffle_seed);
  w.put(static_cast<std::uint16_t>(ck.rng_algorithm.size()));
  w.put_bytes(ck.rng_algorithm);
  if (ck.lstm) {
    const LstmParams &p = *ck.lstm;
    w.put(kModelLstm);
    w.put(u32(p.input_dim, "input_dim"));
    w.put(u32(p.hidden_dim, "hidden_dim"));
    w.put(u32(p.num_classes, "num_classes"));
    w.put(static_cast<std::uint8_t>(p.use_bias ? 1 : 0));
    put_doubles(w, p.flatten());
  } else {
    w.put(kModelFfn);
    w.put(u32(ck.ffn.members.size(), "members"));
    for (std::size_t m = 0; m < ck.ffn.members.size(); ++m) {
      const FfnParams &p = ck.ffn.members[m];
      w.put(u32(ck.ffn.date_ids.at(m), "date id"));
      w.put(u32(p.input_dim, "input_dim"));
      w.put(u32(p.hidden_dim, "hidden_dim"));
      w.put(u32(p.num_classes, "num_classes"));
      w.put(static_cast<std::uint8_t>(p.activation));
      put_doubles(w, p.flatten());
    }
  }
  w.put(ck.epochs_run);
  w.put(ck.final_loss);
  return w.take();
}

Checkpoint deserialize_checkpoint(std::string_view bytes) {
  ByteReader r(bytes, "checkpoint");
  if (r.remaining() < 4 || r.get_bytes(4) != std::string_view(kCheckpointMagic, 4))
    throw FormatError("checkpoint: bad magic (not a PBRN file)");
  if (const auto v = r.get<std::uint32_t>(); v != kCheckpointVersion)
    throw FormatError("checkpoint: unsupported version " + std::to_string(v));
  Checkpoint ck;
  const auto mode = r.get<std::uint8_t>();
  if (mode > static_cast<std::uint8_t>(SystemMode::PatchNnMulti))
    throw FormatError("checkpoint: unknown mode " + std::to_string(mode));
  ck.mode = static_cast<SystemMode>(mode);
  SamplerConfig &s = ck.sampler;
  s.patch_x = r.get<std::uint32_t>();
  s.patch_y = r.get<std::uint32_t>();
  s.bands = r.get<std::uint32_t>();
  s.seq_len = r.get<std::uint32_t>();
  s.reference_scene = r.get<std::uint32_t>();
  s.selection_x = r.get<std::uint32_t>();
  s.selection_y = r.get<std::uint32_t>();
  s.timesteps.resize(r.get<std::uint32_t>());
  for (std::size_t &t : s.timesteps) t = r.get<std::uint32_t>();
  s.train_fraction = r.get<double>();
  s.seed = r.get<std::uint64_t>();
  s.zero_masked_pixels_only = r.get<std::uint8_t>() != 0;
  ck.num_classes = r.get<std::uint32_t>();
  ck.init_seed = r.get<std::uint64_t>();
  ck.shuffle_seed = r.get<std::uint64_t>();
  ck.rng_algorithm = std::string(r.get_bytes(r.get<std::uint16_t>()));
  const auto kind = r.get<std::uint8_t>();
  if (kind == kModelLstm) {
    const std::size_t in = r.get<std::uint32_t>();
    const std::size_t hidden = r.get<std::uint32_t>();
    const std::size_t classes = r.get<std::uint32_t>();
    const bool bias = r.get<std::uint8_t>() != 0;
    LstmParams p = LstmParams::zeros(in, hidden, classes, bias);
    p.assign_flat(get_doubles(r, p.parameter_count()));
    ck.lstm = std::move(p);
  } else if (kind == kModelFfn) {
    const std::size_t members = r.get<std::uint32_t>();
    for (std::size_t m = 0; m < members; ++m) {
      ck.ffn.date_ids.push_back(r.get<std::uint32_t>());
      const std::size_t in = r.get<std::uint32_t>();
      const std::size_t hidden = r.get<std::uint32_t>();
      const std::size_t classes = r.get<std::uint32_t>();
      const auto act = r.get<std::uint8_t>();
      if (act > static_cast<std::uint8_t>(HiddenActivation::Tanh))
        throw FormatError("checkpoint: unknown activation " + std::to_string(act));
      FfnParams p = FfnParams::zeros(in, classes, static_cast<HiddenActivation>(act), hidden);
      p.assign_flat(get_doubles(r, p.parameter_count()));
      ck.ffn.members.push_back(std::move(p));
    }
  } else {
    throw FormatError("checkpoint: unknown model kind " + std::to_string(kind));
  }
  ck.epochs_run = r.get<std::uint32_t>();
  ck.final_loss = r.get<double>();
  if (r.remaining() != 0) throw FormatError("checkpoint: " + std::to_string(r.remaining()) + " trailing bytes");

  if (is_recurrent(ck.mode) != ck.lstm.has_value())
    throw FormatError("checkpoint: model kind does not match mode " + std::string(mode_name(ck.mode)));
  const std::size_t dim = ck.sampler.input_dim();
  if (ck.lstm && (ck.lstm->input_dim != dim || ck.lstm->num_classes != ck.num_classes))
    throw FormatError("checkpoint: LSTM dimensions disagree with the sampler header");
  for (const FfnParams &p : ck.ffn.members)
    if (p.input_dim != dim || p.num_classes != ck.num_classes)
      throw FormatError("checkpoint: network dimensions disagree with the sampler header");
  if (!ck.lstm && ck.ffn.members.size() != ck.sampler.seq_len)
    throw FormatError("checkpoint: expected one network per date");
  return ck;
}

void save_checkpoint(const fs::path &path, const Checkpoint &ck) {
  write_file_atomic(path, serialize_checkpoint(ck));
}

Checkpoint load_checkpoint(const fs::path &path) {
  try {
    return deserialize_checkpoint(read_file(path));
  } catch (const FormatError &e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

Classification classify_sample(const Checkpoint &ck, const SampleSequence &sample) {
  if (ck.lstm) return classify(*ck.lstm, sample);
  return classify(ck.ffn, sample);
}

LabelMap classify_series(const Checkpoint &ck, const SceneSeries &series) {
  if (series.bands() != ck.sampler.bands)
    throw ShapeError("checkpoint expects " + std::to_string(ck.sampler.bands) + " bands, series has " +
                     std::to_string(series.bands()));
  for (std::size_t t : ck.sampler.scene_indices())
    if (t >= series.size())
      throw ShapeError("checkpoint reads scene " + std::to_string(t) + ", series has " +
                       std::to_string(series.size()) + " scenes");
  return classify_map(series, ck.sampler,
                      [&](const SampleSequence &s) { return classify_sample(ck, s).class_id; });
}

ErrorMatrix evaluate_samples(const Checkpoint &ck, const std::vector<SampleSequence> &samples) {
  ErrorMatrix m(ck.num_classes, scheme_names(ck.num_classes));
  for (const SampleSequence &s : samples) {
    if (!s.label) throw LabelError("evaluate_samples: unlabeled sample");
    m.at(classify_sample(ck, s).class_id, *s.label) += 1;
  }
  return m;
}

SystemRun run_system(const RunConfig &cfg, SystemMode mode, const SceneSeries &series, const LabelMap &labels) {
  RunConfig local = cfg;
  local.mode = mode;
  local.validate(&series);
  const SamplerConfig sampler = mode_sampler(local, mode);
  TrainingSet set = extract_training_set(series, sampler, labels, cfg.num_classes);
  if (set.train.empty()) throw ArgumentError("run_system: no training samples");

  SystemRun run;
  run.split = std::move(set.split);
  Checkpoint &ck = run.checkpoint;
  ck.mode = mode;
  ck.sampler = sampler;
  ck.num_classes = cfg.num_classes;
  ck.init_seed = cfg.init_seed;
  ck.shuffle_seed = cfg.train.shuffle_seed;

  TrainConfig tc = cfg.train;
  if (is_recurrent(mode)) {
    LstmParams p = LstmParams::random(sampler.input_dim(), cfg.hidden_dim, cfg.num_classes,
                                      {cfg.init_seed, cfg.lstm_bias, cfg.forget_bias_offset});
    run.training.push_back(train(p, std::span<const SampleSequence>(set.train), tc, cfg.adam));
    ck.lstm = std::move(p);
  } else {
    if (cfg.ffn_epochs != 0) tc.epochs = cfg.ffn_epochs;
    const auto dates = sampler.scene_indices();
    for (std::size_t d = 0; d < dates.size(); ++d) {
      const std::vector<SampleSequence> data = date_slice(set.train, d);
      if (data.empty()) throw ArgumentError("run_system: no clear training samples at scene " + std::to_string(dates[d]));
      FfnParams p = FfnParams::random(sampler.input_dim(), cfg.num_classes, derive_seed(cfg.init_seed, d),
                                      cfg.ffn_activation);
      TrainConfig member_tc = tc;
      member_tc.shuffle_seed = derive_seed(tc.shuffle_seed, d);
      run.training.push_back(train(p, std::span<const SampleSequence>(data), member_tc, cfg.adam));
      ck.ffn.members.push_back(std::move(p));
      ck.ffn.date_ids.push_back(dates[d]);
    }
  }
  ck.epochs_run = static_cast<std::uint32_t>(tc.epochs);
  double loss = 0.0;
  for (const TrainResult &r : run.training) loss += r.final_loss();
  ck.final_loss = loss / static_cast<double>(run.training.size());

  run.holdout_matrix = evaluate_samples(ck, set.holdout);
  run.holdout_accuracy = run.holdout_matrix.total() > 0 ? overall_accuracy(run.holdout_matrix) : 0.0;
  return run;
}

void write_preview_ppm(const fs::path &path, const LabelMap &map, const ClassScheme &scheme) {
  std::string out = "P6\n" + std::to_string(map.width) + " " + std::to_string(map.height) + "\n255\n";
  out.reserve(out.size() + map.ids.size() * 3);
  for (std::uint8_t id : map.ids) {
    std::array<std::uint8_t, 3> rgb{0, 0, 0};
    if (id != kNoDataLabel && id < scheme.size()) rgb = scheme.classes[id].rgb;
    for (std::uint8_t v : rgb) out.push_back(static_cast<char>(v));
  }
  write_file_atomic(path, out);
}

int report_failure(const std::exception &e) {
  std::cerr << "error: " << e.what() << '\n';
  if (dynamic_cast<const ConfigError *>(&e)) return kExitConfig;
  return kExitData;
}

int cmd_synth(const fs::path &spec_file, const fs::path &out_dir) {
  const SyntheticSpec spec = spec_file.empty() ? SyntheticSpec{} : load_synthetic_spec(spec_file);
  const SyntheticSite site = generate(spec);
  const fs::path manifest = write_site(out_dir, site);
  std::cout << "wrote " << site.scenes.size() << " scenes of " << spec.width << "x" << spec.height << " to "
            << out_dir.string() << "\nmanifest: " << manifest.string()
            << "\nground truth: " << (out_dir / "truth.lbl").string() << '\n';
  return kExitOk;
}

int cmd_import(const fs::path &manifest, bool write_cache) {
  ImportLog log;
  const SceneSeries series = load_series(manifest, {}, &log);
  std::cout << "scenes: " << series.size() << "  size: " << series.width() << "x" << series.height()
            << "  bands: " << series.bands() << '\n';
  const auto gaps = series.day_gaps();
  std::cout << "day gaps:";
  for (int g : gaps) std::cout << ' ' << g;
  std::cout << '\n';
  for (std::size_t t = 0; t < series.size(); ++t) {
    const auto &m = series.scenes[t].masked;
    const auto masked = static_cast<std::size_t>(std::count(m.begin(), m.end(), std::uint8_t{1}));
    std::printf("  %s %s  contaminated %.2f%%\n", series.scenes[t].meta.scene_id.c_str(),
                format_date(series.scenes[t].meta.acquisition_date).c_str(),
                100.0 * static_cast<double>(masked) / static_cast<double>(m.size()));
  }
  std::cout << "reflectance below -0.2: " << log.strongly_negative << "  above 1.6: " << log.above_range << '\n';
  for (const auto &msg : log.messages) std::cout << "note: " << msg << '\n';
  if (write_cache) {
    const auto dirs = read_manifest(manifest);
    for (std::size_t t = 0; t < dirs.size(); ++t) write_toa_cache(dirs[t], series.scenes[t]);
    std::cout << "wrote reflectance caches for " << dirs.size() << " scenes\n";
  }
  return kExitOk;
}

int cmd_make_samples(const fs::path &config_file) {
  const RunConfig cfg = load_run_config(config_file);
  require_file(cfg.manifest, "manifest");
  require_file(cfg.labels, "labels");
  const SceneSeries series = load_series(cfg.manifest, {cfg.mask_policy, false});
  const LabelMap labels = read_label_map(cfg.labels);
  cfg.validate(&series);
  const TrainingSet set = extract_training_set(series, mode_sampler(cfg, cfg.mode), labels, cfg.num_classes);
  fs::create_directories(cfg.output_dir);
  const std::string stem(mode_name(cfg.mode));
  write_sample_cache(cfg.output_dir / (stem + "_train.bin"), set.train);
  write_sample_cache(cfg.output_dir / (stem + "_holdout.bin"), set.holdout);
  std::cout << "class  candidates  selected\n";
  for (std::size_t k = 0; k < set.split.per_class.size(); ++k)
    std::printf("%5zu  %10zu  %8zu\n", k, set.split.per_class[k].candidates, set.split.per_class[k].selected);
  for (const auto &w : set.split.warnings) std::cerr << "warning: " << w << '\n';
  std::cout << "train " << set.train.size() << ", holdout " << set.holdout.size() << " samples written to "
            << cfg.output_dir.string() << '\n';
  return kExitOk;
}

int cmd_train(const fs::path &config_file) {
  const RunConfig cfg = load_run_config(config_file);
  require_file(cfg.manifest, "manifest");
  require_file(cfg.labels, "labels");
  const SceneSeries series = load_series(cfg.manifest, {cfg.mask_policy, false});
  const LabelMap labels = read_label_map(cfg.labels);
  const SystemRun run = run_system(cfg, cfg.mode, series, labels);
  fs::create_directories(cfg.output_dir);
  const std::string stem(mode_name(cfg.mode));
  save_checkpoint(cfg.output_dir / (stem + ".ckpt"), run.checkpoint);
  write_file_atomic(cfg.output_dir / (stem + "_loss.txt"), format_loss_log(run));
  const std::string report = format_report(run.holdout_matrix, full_report(run.holdout_matrix));
  write_file_atomic(cfg.output_dir / (stem + "_holdout.txt"), report);
  std::printf("%s: final loss %.6f, holdout accuracy %.2f%% over %lld samples\n", stem.c_str(),
              run.checkpoint.final_loss, 100.0 * run.holdout_accuracy,
              static_cast<long long>(run.holdout_matrix.total()));
  return kExitOk;
}

int cmd_classify(const fs::path &checkpoint, const fs::path &manifest, const fs::path &out_map) {
  const Checkpoint ck = load_checkpoint(checkpoint);
  const SceneSeries series = load_series(manifest);
  const LabelMap map = classify_series(ck, series);
  if (out_map.has_parent_path()) fs::create_directories(out_map.parent_path());
  const ClassScheme scheme = ClassScheme::numbered(ck.num_classes);
  write_label_map(out_map, map, scheme);
  fs::path preview = out_map;
  preview.replace_extension(".ppm");
  write_preview_ppm(preview, map, scheme);
  std::cout << "wrote " << out_map.string() << " and " << preview.string() << '\n';
  return kExitOk;
}

int cmd_assess(const AssessOptions &opts) {
  ErrorMatrix matrix;
  std::vector<std::string> warnings;
  if (!opts.matrix.empty()) {
    matrix = load_error_matrix(opts.matrix);
  } else {
    if (opts.classified.empty() || opts.reference.empty())
      throw ConfigError("classified", "give --classified and --reference, or --matrix");
    const LabelMap classified = read_label_map(opts.classified);
    const LabelMap reference = read_label_map(opts.reference);
    if (classified.width != reference.width || classified.height != reference.height)
      throw ShapeError("classified map is " + std::to_string(classified.height) + "x" +
                       std::to_string(classified.width) + ", reference map is " +
                       std::to_string(reference.height) + "x" + std::to_string(reference.width));
    std::size_t k = 2;
    for (const LabelMap *m : {&classified, &reference})
      for (std::uint8_t id : m->ids)
        if (id != kNoDataLabel) k = std::max<std::size_t>(k, std::size_t{id} + 1);
    const StratifiedDesign design =
        area_weighted_design(classified, reference, k, opts.total_samples, opts.min_per_stratum, opts.seed);
    SampledErrorMatrix sampled = build_error_matrix(classified, reference, design, scheme_names(k));
    matrix = std::move(sampled.matrix);
    warnings = std::move(sampled.warnings);
  }
  const AssessmentReport report = full_report(matrix);
  const std::string text = format_report(matrix, report);
  fs::create_directories(opts.out_dir);
  save_error_matrix(opts.out_dir / "error_matrix.csv", matrix);
  write_file_atomic(opts.out_dir / "report.txt", text);
  for (const auto &w : warnings) std::cerr << "warning: " << w << '\n';
  std::cout << text;
  return kExitOk;
}

int cmd_verify_tables() {
  bool all_ok = true;
  for (const PublishedTable &t : published_tables()) {
    const TableCheck check = verify_table(t);
    std::printf("%-16s %-18s %2zu values  %s\n", t.id.c_str(), t.system.c_str(), check.values_checked,
                check.ok() ? "OK" : "MISMATCH");
    for (const auto &m : check.mismatches) std::printf("    %s\n", m.c_str());
    all_ok = all_ok && check.ok();
  }
  return all_ok ? kExitOk : kExitVerification;
}

int cmd_compare_all(const fs::path &config_file) {
  const RunConfig cfg = load_run_config(config_file);
  require_file(cfg.manifest, "manifest");
  require_file(cfg.labels, "labels");
  const SceneSeries series = load_series(cfg.manifest, {cfg.mask_policy, false});
  const LabelMap labels = read_label_map(cfg.labels);
  fs::create_directories(cfg.output_dir);
  std::vector<SystemSummary> summaries;
  for (SystemMode mode : kAllModes) {
    const SystemRun run = run_system(cfg, mode, series, labels);
    const std::string stem(mode_name(mode));
    save_checkpoint(cfg.output_dir / (stem + ".ckpt"), run.checkpoint);
    write_file_atomic(cfg.output_dir / (stem + "_loss.txt"), format_loss_log(run));
    const AssessmentReport report = full_report(run.holdout_matrix);
    write_file_atomic(cfg.output_dir / (stem + "_holdout.txt"), format_report(run.holdout_matrix, report));
    std::printf("%-16s holdout accuracy %.2f%%\n", stem.c_str(), 100.0 * run.holdout_accuracy);
    std::fflush(stdout);
    summaries.push_back({std::string(mode_label(mode)), report});
  }
  const std::string table = format_comparison(summaries, scheme_names(cfg.num_classes));
  write_file_atomic(cfg.output_dir / "comparison.txt", table);
  std::cout << '\n' << table;
  return kExitOk;
}

} // namespace pbrnn
