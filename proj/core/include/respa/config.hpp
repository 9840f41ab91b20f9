#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "respa/attack.hpp"
#include "respa/model.hpp"
#include "respa/train.hpp"
#include "respa/vec.hpp"

namespace respa {

struct SyntheticDataConfig {
  int dim = 64;
  int classes = 4;
  int train_per_class = 250;
  int eval_per_class = 100;
  double noise_sigma = 0.045;
  double mean_radius = 0.35;                 // used when explicit means are absent
  std::optional<std::vector<Vec>> means;
};

struct IdxDataConfig {
  std::string train_images;
  std::string train_labels;
  std::string eval_images;
  std::string eval_labels;
};

// Exactly one of synthetic / idx is set.
struct DataConfig {
  std::optional<SyntheticDataConfig> synthetic;
  std::optional<IdxDataConfig> idx;
};

struct ModelEntry {
  std::string id;
  std::vector<int> hidden;
  Activation activation = Activation::relu;
  TrainConfig train;  // seed filled in from the run seed at build time
};

struct SurfaceConfig {
  double extent = 0.1;
  int steps = 41;
  int samples = 8;
};

struct EvaluationConfig {
  std::vector<std::string> surrogates;
  std::vector<std::string> targets;
  std::vector<std::uint64_t> seeds;  // defaults to {run seed}
  SurfaceConfig surface;
};

// Parsed run configuration. Parsing is strict: unknown keys anywhere are
// errors, and every referenced id must resolve.
struct RunConfig {
  std::uint64_t seed = 0;
  std::string output_dir;
  DataConfig data;
  std::vector<ModelEntry> models;
  std::vector<AttackSpec> attacks;
  EvaluationConfig evaluation;

  const ModelEntry& model_entry(const std::string& id) const;
  const AttackSpec& attack_spec(const std::string& id) const;
};

RunConfig parse_run_config(const std::string& json_text);

// Reads and parses the file; the RESPA_OUTPUT_DIR environment variable, when
// set, overrides output_dir.
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace respa
