#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gcn/corpus.hpp"
#include "gcn/keyvalue.hpp"
#include "gcn/metaloop.hpp"

namespace gcn {

// Everything a training run needs, read from a key-value file. `options.mode` and
// `options.seed` are filled per run from `modes` and `options.meta.seeds`.
struct RunConfig {
  TaskKind task = TaskKind::IntentDetection;
  std::string manifest = "builtin:intent";  // manifest path, or builtin:<task> for the fixture
  std::string dataset_name;                 // empty: derived from the manifest
  double sample_percent = 100.0;
  std::optional<std::uint64_t> sample_seed;  // empty: each run samples with its own seed
  bool subsample_validation = true;
  std::vector<RunMode> modes{RunMode::GcnPlusRl};
  std::filesystem::path output_dir = "runs/latest";
  RunOptions options;
};

struct ConfigKey {
  std::string name;
  std::string help;
};

const std::vector<ConfigKey>& config_keys();

// Defaults for a task: paper-scale MetaConfig, task learning rates.
RunConfig default_run_config(TaskKind task);

// Applies key-value pairs on top of `base`. Unknown keys and bad values throw ConfigError.
RunConfig apply_config(RunConfig base, const std::map<std::string, std::string>& values);

// Reads a config file; `overrides` win over the file. The task comes from `task` if set,
// else from the manifest.
RunConfig load_run_config(const std::filesystem::path& path, const std::map<std::string, std::string>& overrides = {});
RunConfig parse_run_config(const std::map<std::string, std::string>& values);

// Every key with its effective value; feeding it back reproduces the configuration.
std::string echo_config(const RunConfig& config);

struct Datasets {
  std::string name;
  TaskKind task = TaskKind::IntentDetection;
  Corpus full_train;
  Corpus seed;
  Corpus validation;
  Corpus test;
  SampleResult sample;
};

Datasets prepare_datasets(const RunConfig& config, std::uint64_t run_seed);

}  // namespace gcn
