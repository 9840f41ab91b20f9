#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "respa/config.hpp"
#include "respa/data.hpp"
#include "respa/evaluation.hpp"
#include "respa/model.hpp"

namespace respa {

struct PipelineOptions {
  bool force = false;
  bool quiet = false;
};

struct Datasets {
  std::vector<LabeledSample> train;
  std::vector<LabeledSample> eval;
  int dim = 0;
  int classes = 0;
};

// Materializes the data section: synthetic generation (means derived from
// the run seed unless given explicitly) or IDX ingestion.
Datasets build_datasets(const RunConfig& cfg);

struct NamedModel {
  std::string id;
  MlpClassifier model;
  double train_accuracy = 0.0;
};

Architecture resolve_architecture(const ModelEntry& entry, int dim, int classes);
std::uint64_t model_train_seed(const RunConfig& cfg, const std::string& model_id);

// Deterministic training of every model entry; bit-identical to what the
// train command persists.
std::vector<NamedModel> train_models_in_memory(const RunConfig& cfg, const Datasets& data);

// Loads every model entry from its checkpoint; DependencyError when one is
// missing.
std::vector<NamedModel> load_models_from_checkpoints(const RunConfig& cfg);

const NamedModel& find_model(const std::vector<NamedModel>& models, const std::string& id);
std::vector<ModelRef> model_refs(const std::vector<NamedModel>& models,
                                 const std::vector<std::string>& ids);

// Output layout helpers.
std::filesystem::path models_dir(const RunConfig& cfg);
std::filesystem::path checkpoint_path(const RunConfig& cfg, const std::string& model_id);
std::filesystem::path manifest_path(const RunConfig& cfg);
std::filesystem::path adversarial_dir(const RunConfig& cfg, const std::string& surrogate,
                                      const std::string& attack, std::uint64_t seed);
std::filesystem::path eval_dir(const RunConfig& cfg);
std::filesystem::path sweep_table_path(const RunConfig& cfg, const std::string& param);
std::filesystem::path surface_dir(const RunConfig& cfg, const std::string& surrogate,
                                  const std::string& attack);

struct AdversarialSet {
  std::string surrogate;
  std::string attack;
  std::uint64_t seed = 0;
  double epsilon = 0.0;
  std::vector<std::size_t> indices;  // positions in the evaluation set
  std::vector<int> labels;
  std::vector<Vec> examples;
};

std::string serialize_adversarial_set(const AdversarialSet& set, int dim);
AdversarialSet parse_adversarial_set(const std::string& text);

// Subcommands. Each is idempotent for identical inputs and refuses to
// silently replace differing outputs unless options.force is set.
void cmd_train(const RunConfig& cfg, const PipelineOptions& options);
void cmd_attack(const RunConfig& cfg, const std::string& surrogate_id,
                const std::string& attack_id, const PipelineOptions& options);
void cmd_eval(const RunConfig& cfg, const PipelineOptions& options);
void cmd_sweep(const RunConfig& cfg, const std::string& param, const std::vector<double>& values,
               const PipelineOptions& options);
void cmd_surface(const RunConfig& cfg, const std::vector<std::string>& attack_ids, int samples,
                 const std::string& surrogate_id, const PipelineOptions& options);

}  // namespace respa
