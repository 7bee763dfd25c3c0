// Command-line driver: synthetic data, import, sampling, training,
// classification and accuracy assessment.

#include "pbrnn/app.hpp"
#include "pbrnn/errors.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <string>

namespace fs = std::filesystem;

int main(int argc, char **argv) {
  CLI::App app{"Patch-based recurrent land cover classification"};
  app.require_subcommand(1);

  std::string spec_file, synth_out = "site";
  auto *synth = app.add_subcommand("synth", "Generate a synthetic site (scenes, manifest, truth map)");
  synth->add_option("--spec", spec_file, "Key=value spec file; defaults apply when omitted");
  synth->add_option("-o,--out", synth_out, "Output directory")->capture_default_str();

  std::string import_manifest;
  bool import_cache = false;
  auto *import = app.add_subcommand("import", "Load a scene series and report reflectance and masking");
  import->add_option("manifest", import_manifest, "Series manifest")->required();
  import->add_flag("--write-cache", import_cache, "Write toa.raw next to every scene");

  std::string samples_config;
  auto *make_samples = app.add_subcommand("make-samples", "Select locations and write the sample caches");
  make_samples->add_option("config", samples_config, "Run config file")->required();

  std::string train_config;
  auto *train = app.add_subcommand("train", "Train the configured system and write its checkpoint");
  train->add_option("config", train_config, "Run config file")->required();

  std::string ckpt, classify_manifest, out_map = "classified.lbl";
  auto *classify = app.add_subcommand("classify", "Classify every pixel of a series");
  classify->add_option("checkpoint", ckpt, "Checkpoint file")->required();
  classify->add_option("manifest", classify_manifest, "Series manifest")->required();
  classify->add_option("-o,--out", out_map, "Label map path; a .ppm preview is written beside it")
      ->capture_default_str();

  pbrnn::AssessOptions assess_opts;
  std::string classified, reference, matrix, assess_out = "assessment";
  auto *assess = app.add_subcommand("assess", "Stratified accuracy assessment of a classified map");
  assess->add_option("--classified", classified, "Classified label map");
  assess->add_option("--reference", reference, "Reference label map");
  assess->add_option("--matrix", matrix, "Assess this error matrix file instead of two maps");
  assess->add_option("--samples", assess_opts.total_samples, "Total sample target")->capture_default_str();
  assess->add_option("--min-per-stratum", assess_opts.min_per_stratum, "Minimum per stratum")
      ->capture_default_str();
  assess->add_option("--seed", assess_opts.seed, "Sampling seed")->capture_default_str();
  assess->add_option("-o,--out", assess_out, "Output directory")->capture_default_str();

  auto *verify = app.add_subcommand("verify-tables", "Recompute the bundled published error matrices");

  std::string compare_config;
  auto *compare = app.add_subcommand("compare-all", "Train and score all six systems");
  compare->add_option("config", compare_config, "Run config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? pbrnn::kExitOk : pbrnn::kExitConfig;
  }

  try {
    if (*synth) return pbrnn::cmd_synth(spec_file, synth_out);
    if (*import) return pbrnn::cmd_import(import_manifest, import_cache);
    if (*make_samples) return pbrnn::cmd_make_samples(samples_config);
    if (*train) return pbrnn::cmd_train(train_config);
    if (*classify) return pbrnn::cmd_classify(ckpt, classify_manifest, out_map);
    if (*assess) {
      assess_opts.classified = classified;
      assess_opts.reference = reference;
      assess_opts.matrix = matrix;
      assess_opts.out_dir = assess_out;
      return pbrnn::cmd_assess(assess_opts);
    }
    if (*verify) return pbrnn::cmd_verify_tables();
    if (*compare) return pbrnn::cmd_compare_all(compare_config);
  } catch (const std::exception &e) {
    return pbrnn::report_failure(e);
  }
  return pbrnn::kExitConfig;
}
