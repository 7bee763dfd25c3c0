#pragma once

#include "pbrnn/assessment.hpp"
#include "pbrnn/baseline_nets.hpp"
#include "pbrnn/key_value.hpp"
#include "pbrnn/optimizer.hpp"
#include "pbrnn/recurrent_nets.hpp"
#include "pbrnn/sampling.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pbrnn {

/// The six classification systems.
enum class SystemMode : std::uint8_t {
  PbRnn = 0,
  PixelRnn = 1,
  PixelNnSingle = 2,
  PixelNnMulti = 3,
  PatchNnSingle = 4,
  PatchNnMulti = 5,
};

inline constexpr SystemMode kAllModes[] = {SystemMode::PbRnn,         SystemMode::PixelRnn,
                                           SystemMode::PixelNnSingle, SystemMode::PixelNnMulti,
                                           SystemMode::PatchNnSingle, SystemMode::PatchNnMulti};

std::string_view mode_name(SystemMode mode);
/// Display name used in comparison tables ("PB-RNN", "Pixel NN (multi)", ...).
std::string_view mode_label(SystemMode mode);
/// Throws ConfigError("mode") for unknown names.
SystemMode parse_mode(std::string_view name);
bool is_recurrent(SystemMode mode);
bool is_pixel(SystemMode mode);
bool is_multi_date(SystemMode mode);

/// Everything a train/classify run needs. Patch geometry describes the
/// patch-based systems; pixel systems use 1×1 inputs at the same locations.
struct RunConfig {
  SystemMode mode = SystemMode::PbRnn;
  SamplerConfig sampler;
  TrainConfig train;
  AdamConfig adam;
  std::size_t num_classes = 8;
  std::size_t hidden_dim = 128;
  bool lstm_bias = true;
  bool forget_bias_offset = false;
  std::uint64_t init_seed = 1;
  HiddenActivation ffn_activation = HiddenActivation::Sigmoid;
  /// Epochs for the feedforward systems; 0 uses train.epochs.
  std::size_t ffn_epochs = 0;
  std::vector<std::size_t> fusion_dates{0, 2, 3, 22};
  MaskPolicy mask_policy;
  std::filesystem::path manifest;
  std::filesystem::path labels;
  std::filesystem::path output_dir = "out";

  /// Throws ConfigError naming the field. With a series, also checks that
  /// the geometry fits it.
  void validate(const SceneSeries *series = nullptr) const;
};

RunConfig parse_run_config(const std::string &text);
RunConfig load_run_config(const std::filesystem::path &path);
/// Writes every key with its current value (round-trips through parse).
std::string format_run_config(const RunConfig &cfg);

/// The sampler a mode actually uses: 1×1 for pixel systems (selection window
/// kept at the patch size), one step at the reference scene for single-date
/// systems, the fusion dates for multi-date systems.
SamplerConfig mode_sampler(const RunConfig &cfg, SystemMode mode);

/// Trained model plus what is needed to rebuild its inputs.
struct Checkpoint {
  SystemMode mode = SystemMode::PbRnn;
  SamplerConfig sampler;
  std::size_t num_classes = 0;
  std::uint64_t init_seed = 0;
  std::uint64_t shuffle_seed = 0;
  std::string rng_algorithm{Rng::algorithm};
  /// Recurrent systems.
  std::optional<LstmParams> lstm;
  /// Feedforward systems; single-date systems have one member.
  FusionEnsemble ffn;
  std::uint32_t epochs_run = 0;
  double final_loss = 0.0;

  std::size_t input_dim() const { return sampler.input_dim(); }

  friend bool operator==(const Checkpoint &, const Checkpoint &) = default;
};

// Binary: "PBRN", u32 version 1, header fields, then 64-bit float parameter
// arrays in each model's flat order. Little-endian throughout.
std::string serialize_checkpoint(const Checkpoint &ckpt);
Checkpoint deserialize_checkpoint(std::string_view bytes);
void save_checkpoint(const std::filesystem::path &path, const Checkpoint &ckpt);
Checkpoint load_checkpoint(const std::filesystem::path &path);

Classification classify_sample(const Checkpoint &ckpt, const SampleSequence &sample);

/// Per-pixel map; border pixels and pixels the sampler cannot reach are no-data.
LabelMap classify_series(const Checkpoint &ckpt, const SceneSeries &series);

struct SystemRun {
  Checkpoint checkpoint;
  /// One entry per trained network (four for multi-date systems).
  std::vector<TrainResult> training;
  LocationSplit split;
  /// Census of the held-out pool.
  ErrorMatrix holdout_matrix;
  double holdout_accuracy = 0.0;
};

/// Selects locations, trains `mode` on the training pool and scores every
/// held-out sample.
SystemRun run_system(const RunConfig &cfg, SystemMode mode, const SceneSeries &series,
                     const LabelMap &labels);

/// Error matrix of `ckpt` over labeled samples.
ErrorMatrix evaluate_samples(const Checkpoint &ckpt, const std::vector<SampleSequence> &samples);

/// Writes a binary PPM colored with the scheme; no-data is black.
void write_preview_ppm(const std::filesystem::path &path, const LabelMap &map, const ClassScheme &scheme);

// Command-line exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitVerification = 3;

/// Maps an in-flight exception to an exit code and prints it.
int report_failure(const std::exception &e);

// Subcommands. Each returns an exit code.
int cmd_synth(const std::filesystem::path &spec_file, const std::filesystem::path &out_dir);
int cmd_import(const std::filesystem::path &manifest, bool write_cache);
int cmd_make_samples(const std::filesystem::path &config_file);
int cmd_train(const std::filesystem::path &config_file);
int cmd_classify(const std::filesystem::path &checkpoint, const std::filesystem::path &manifest,
                 const std::filesystem::path &out_map);
struct AssessOptions {
  std::filesystem::path classified;
  std::filesystem::path reference;
  /// Bypass: assess this error matrix file directly.
  std::filesystem::path matrix;
  std::filesystem::path out_dir = "assessment";
  std::size_t total_samples = 1000;
  std::size_t min_per_stratum = 50;
  std::uint64_t seed = 1;
};
int cmd_assess(const AssessOptions &opts);
int cmd_verify_tables();
int cmd_compare_all(const std::filesystem::path &config_file);

} // namespace pbrnn
