#include "respa/pipeline.hpp"

#include <algorithm>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "respa/checkpoint.hpp"
#include "respa/error.hpp"
#include "respa/rng.hpp"
#include "respa/text_io.hpp"
#include "respa/train.hpp"

namespace respa {

namespace {

void say(const PipelineOptions& options, const std::string& line) {
  if (!options.quiet) std::cout << line << '\n';
}

std::vector<LabeledSample> reencode_classes(std::vector<LabeledSample> samples, int classes) {
  std::vector<LabeledSample> out;
  out.reserve(samples.size());
  for (LabeledSample& s : samples) {
    const int label = s.label();
    out.emplace_back(std::move(s.x), vec::one_hot(label, classes));
  }
  return out;
}

}  // namespace

Datasets build_datasets(const RunConfig& cfg) {
  Datasets data;
  if (cfg.data.synthetic.has_value()) {
    const SyntheticDataConfig& s = *cfg.data.synthetic;
    std::vector<Vec> means = s.means.has_value()
                                 ? *s.means
                                 : orthogonal_class_means(s.dim, s.classes, s.mean_radius,
                                                          derive_seed(cfg.seed, "data:means"));
    SyntheticSpec train_spec{s.dim, s.classes, means, s.noise_sigma, s.train_per_class,
                             derive_seed(cfg.seed, "data:train")};
    SyntheticSpec eval_spec{s.dim, s.classes, std::move(means), s.noise_sigma, s.eval_per_class,
                            derive_seed(cfg.seed, "data:eval")};
    data.train = generate_synthetic(train_spec);
    data.eval = generate_synthetic(eval_spec);
    data.dim = s.dim;
    data.classes = s.classes;
    return data;
  }

  const IdxDataConfig& idx = *cfg.data.idx;
  data.train = load_idx(idx.train_images, idx.train_labels);
  data.eval = load_idx(idx.eval_images, idx.eval_labels);
  if (data.train.empty() || data.eval.empty()) {
    throw ParseError("IDX: train and eval sets must be non-empty");
  }
  data.dim = static_cast<int>(data.train.front().x.size());
  const int classes = std::max(data.train.front().classes(), data.eval.front().classes());
  data.train = reencode_classes(std::move(data.train), classes);
  data.eval = reencode_classes(std::move(data.eval), classes);
  data.classes = classes;
  for (const LabeledSample& s : data.eval) {
    if (static_cast<int>(s.x.size()) != data.dim) {
      throw ParseError("IDX: train and eval image dimensions disagree");
    }
  }
  return data;
}

Architecture resolve_architecture(const ModelEntry& entry, int dim, int classes) {
  Architecture arch;
  arch.input_dim = dim;
  arch.hidden = entry.hidden;
  arch.classes = classes;
  arch.activation = entry.activation;
  arch.validate();
  return arch;
}

std::uint64_t model_train_seed(const RunConfig& cfg, const std::string& model_id) {
  return derive_seed(cfg.seed, "model:" + model_id);
}

std::vector<NamedModel> train_models_in_memory(const RunConfig& cfg, const Datasets& data) {
  std::vector<NamedModel> out;
  out.reserve(cfg.models.size());
  for (const ModelEntry& entry : cfg.models) {
    TrainConfig train_cfg = entry.train;
    train_cfg.seed = model_train_seed(cfg, entry.id);
    TrainResult result =
        train_classifier(resolve_architecture(entry, data.dim, data.classes), data.train, train_cfg);
    out.push_back(NamedModel{entry.id, std::move(result.model), result.train_accuracy});
  }
  return out;
}

std::vector<NamedModel> load_models_from_checkpoints(const RunConfig& cfg) {
  std::vector<NamedModel> out;
  out.reserve(cfg.models.size());
  for (const ModelEntry& entry : cfg.models) {
    const std::filesystem::path path = checkpoint_path(cfg, entry.id);
    if (!std::filesystem::exists(path)) {
      throw DependencyError("checkpoint for model '" + entry.id + "' not found at " +
                            path.string() + "; run the train command first");
    }
    Checkpoint ckpt = load_model(path);
    out.push_back(NamedModel{entry.id, std::move(ckpt.model), 0.0});
  }
  return out;
}

const NamedModel& find_model(const std::vector<NamedModel>& models, const std::string& id) {
  for (const NamedModel& m : models) {
    if (m.id == id) return m;
  }
  throw ConfigError("model id '" + id + "' does not resolve");
}

std::vector<ModelRef> model_refs(const std::vector<NamedModel>& models,
                                 const std::vector<std::string>& ids) {
  std::vector<ModelRef> refs;
  refs.reserve(ids.size());
  for (const std::string& id : ids) refs.push_back(ModelRef{id, &find_model(models, id).model});
  return refs;
}

std::filesystem::path models_dir(const RunConfig& cfg) {
  return std::filesystem::path(cfg.output_dir) / "models";
}

std::filesystem::path checkpoint_path(const RunConfig& cfg, const std::string& model_id) {
  return models_dir(cfg) / (model_id + ".ckpt");
}

std::filesystem::path manifest_path(const RunConfig& cfg) {
  return models_dir(cfg) / "MANIFEST.tsv";
}

std::filesystem::path adversarial_dir(const RunConfig& cfg, const std::string& surrogate,
                                      const std::string& attack, std::uint64_t seed) {
  return std::filesystem::path(cfg.output_dir) / "adv" / surrogate / attack /
         ("seed_" + std::to_string(seed));
}

std::filesystem::path eval_dir(const RunConfig& cfg) {
  return std::filesystem::path(cfg.output_dir) / "eval";
}

std::filesystem::path sweep_table_path(const RunConfig& cfg, const std::string& param) {
  return std::filesystem::path(cfg.output_dir) / "sweep" / ("sweep_" + param + ".tsv");
}

std::filesystem::path surface_dir(const RunConfig& cfg, const std::string& surrogate,
                                  const std::string& attack) {
  return std::filesystem::path(cfg.output_dir) / "surface" / surrogate / attack;
}

std::string serialize_adversarial_set(const AdversarialSet& set, int dim) {
  std::ostringstream out;
  out << "# respa adversarial set v1\n";
  out << "# surrogate " << set.surrogate << '\n';
  out << "# attack " << set.attack << '\n';
  out << "# seed " << set.seed << '\n';
  out << "# epsilon " << format_double(set.epsilon) << '\n';
  out << "# count " << set.examples.size() << " dim " << dim << '\n';
  for (std::size_t i = 0; i < set.examples.size(); ++i) {
    out << set.indices[i] << '\t' << set.labels[i];
    for (double x : set.examples[i]) out << '\t' << format_double(x);
    out << '\n';
  }
  return out.str();
}

AdversarialSet parse_adversarial_set(const std::string& text) {
  AdversarialSet set;
  std::size_t expected_count = 0;
  std::size_t dim = 0;
  bool header_seen = false;

  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::vector<std::string> f;
      for (std::string& s : split(line, ' ')) {
        if (!s.empty()) f.push_back(std::move(s));
      }
      if (f.size() >= 4 && f[1] == "respa" && f[2] == "adversarial" && f[3] == "set") {
        header_seen = true;
      } else if (f.size() >= 3 && f[1] == "surrogate") {
        set.surrogate = f[2];
      } else if (f.size() >= 3 && f[1] == "attack") {
        set.attack = f[2];
      } else if (f.size() >= 3 && f[1] == "seed") {
        set.seed = parse_u64(f[2], "adversarial set seed");
      } else if (f.size() >= 3 && f[1] == "epsilon") {
        set.epsilon = parse_double(f[2], "adversarial set epsilon");
      } else if (f.size() >= 5 && f[1] == "count") {
        expected_count = static_cast<std::size_t>(parse_int(f[2], "adversarial set count"));
        dim = static_cast<std::size_t>(parse_int(f[4], "adversarial set dim"));
      }
      continue;
    }
    const std::vector<std::string> cols = split(line, '\t');
    if (dim == 0 || cols.size() != dim + 2) {
      throw ParseError("adversarial set: line " + std::to_string(line_no) + " has " +
                       std::to_string(cols.size()) + " columns, expected " +
                       std::to_string(dim + 2));
    }
    set.indices.push_back(static_cast<std::size_t>(parse_int(cols[0], "adversarial set index")));
    set.labels.push_back(static_cast<int>(parse_int(cols[1], "adversarial set label")));
    Vec x(dim);
    for (std::size_t j = 0; j < dim; ++j) x[j] = parse_double(cols[j + 2], "adversarial coordinate");
    set.examples.push_back(std::move(x));
  }
  if (!header_seen) throw ParseError("adversarial set: missing format header");
  if (set.examples.size() != expected_count) {
    throw ParseError("adversarial set: header promises " + std::to_string(expected_count) +
                     " rows, found " + std::to_string(set.examples.size()));
  }
  return set;
}

void cmd_train(const RunConfig& cfg, const PipelineOptions& options) {
  const Datasets data = build_datasets(cfg);
  std::vector<NamedModel> models = train_models_in_memory(cfg, data);

  // Serialize everything first so a failure writes nothing.
  std::vector<std::pair<std::filesystem::path, std::string>> files;
  std::ostringstream manifest;
  manifest << "# model checkpoints: id, file, fnv1a64, train_accuracy, eval_accuracy\n";
  for (const NamedModel& m : models) {
    const std::string payload = serialize_checkpoint(m.model, model_train_seed(cfg, m.id));
    const std::filesystem::path path = checkpoint_path(cfg, m.id);
    const double eval_acc = classification_accuracy(m.model, data.eval);
    manifest << m.id << '\t' << path.filename().string() << '\t' << to_hex(fnv1a64(payload))
             << '\t' << format_double(m.train_accuracy) << '\t' << format_double(eval_acc) << '\n';
    files.emplace_back(path, payload);
    say(options, "trained " + m.id + ": train_accuracy=" + format_double(m.train_accuracy) +
                     " eval_accuracy=" + format_double(eval_acc));
  }
  files.emplace_back(manifest_path(cfg), manifest.str());
  for (const auto& [path, payload] : files) write_text_file(path, payload, options.force);
  say(options, "wrote " + std::to_string(models.size()) + " checkpoints and manifest under " +
                   models_dir(cfg).string());
}

void cmd_attack(const RunConfig& cfg, const std::string& surrogate_id,
                const std::string& attack_id, const PipelineOptions& options) {
  const AttackSpec& spec = cfg.attack_spec(attack_id);
  cfg.model_entry(surrogate_id);  // must resolve

  const Datasets data = build_datasets(cfg);
  const std::vector<NamedModel> models = load_models_from_checkpoints(cfg);
  std::vector<std::string> all_ids;
  for (const ModelEntry& m : cfg.models) all_ids.push_back(m.id);
  const std::vector<LabeledSample> eval_set =
      select_evaluation_set(model_refs(models, all_ids), data.eval);
  if (eval_set.empty()) {
    throw DependencyError("attack: no evaluation samples are classified correctly by every model");
  }
  const MlpClassifier& surrogate = find_model(models, surrogate_id).model;

  // Everything is generated and budget-verified before the first write, so
  // a violation leaves no partial output behind.
  std::vector<std::pair<std::filesystem::path, std::string>> files;
  std::vector<std::string> notes;
  for (std::uint64_t run_seed : cfg.evaluation.seeds) {
    AdversarialSet set;
    set.surrogate = surrogate_id;
    set.attack = attack_id;
    set.seed = run_seed;
    set.epsilon = spec.config.epsilon;

    const std::filesystem::path dir = adversarial_dir(cfg, surrogate_id, attack_id, run_seed);
    for (std::size_t i = 0; i < eval_set.size(); ++i) {
      AttackConfig attack_cfg = spec.config;
      attack_cfg.seed = attack_sample_seed(run_seed, surrogate_id, attack_id, i);
      AttackResult result =
          run_attack(spec.algorithm, surrogate, eval_set[i].x, eval_set[i].y, attack_cfg);
      set.indices.push_back(i);
      set.labels.push_back(eval_set[i].label());
      set.examples.push_back(std::move(result.x_adv));
      files.emplace_back(dir / ("trace_" + std::to_string(i) + ".tsv"),
                         serialize_trace(result.trace));
    }
    for (std::size_t i = 0; i < set.examples.size(); ++i) {
      check_budget(set.examples[i], eval_set[i].x, spec.config.epsilon);
    }

    std::vector<std::pair<Vec, Vec>> pairs;
    pairs.reserve(eval_set.size());
    for (std::size_t i = 0; i < eval_set.size(); ++i) {
      pairs.emplace_back(eval_set[i].x, set.examples[i]);
    }
    notes.push_back("attack " + attack_id + " on " + surrogate_id + " seed " +
                    std::to_string(run_seed) + ": " + std::to_string(eval_set.size()) +
                    " examples, white-box asr=" +
                    format_double(attack_success_rate(surrogate, pairs)));
    files.emplace_back(dir / "adversarial.tsv", serialize_adversarial_set(set, data.dim));
  }

  for (const auto& [path, payload] : files) write_text_file(path, payload, options.force);
  for (const std::string& note : notes) say(options, note);
}

namespace {

struct EvalContext {
  Datasets data;
  std::vector<NamedModel> models;
  std::vector<LabeledSample> eval_set;
};

EvalContext make_eval_context(const RunConfig& cfg, std::vector<NamedModel> models) {
  EvalContext ctx{build_datasets(cfg), std::move(models), {}};
  std::vector<std::string> all_ids;
  for (const ModelEntry& m : cfg.models) all_ids.push_back(m.id);
  ctx.eval_set = select_evaluation_set(model_refs(ctx.models, all_ids), ctx.data.eval);
  if (ctx.eval_set.empty()) {
    throw DependencyError("eval: no evaluation samples are classified correctly by every model");
  }
  return ctx;
}

std::string transfer_table(const std::vector<TransferReport>& reports,
                           const std::vector<std::string>& targets, const std::string& title) {
  std::ostringstream out;
  out << "# " << title << '\n';
  out << "surrogate\tattack";
  for (const std::string& t : targets) out << '\t' << t;
  out << '\n';
  for (const TransferReport& r : reports) {
    out << r.surrogate << '\t' << r.attack;
    for (const std::string& t : targets) {
      const auto it = std::find_if(r.cells.begin(), r.cells.end(),
                                   [&](const TransferCell& c) { return c.target == t; });
      out << '\t' << format_double(it->asr) << (it->white_box ? "*" : "");
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace

void cmd_eval(const RunConfig& cfg, const PipelineOptions& options) {
  EvalContext ctx = make_eval_context(cfg, load_models_from_checkpoints(cfg));
  const std::vector<std::string>& targets = cfg.evaluation.targets;
  const std::vector<ModelRef> target_refs = model_refs(ctx.models, targets);

  // mean ASR accumulator keyed by (surrogate, attack, target)
  std::map<std::pair<std::string, std::string>, std::map<std::string, double>> sums;
  std::vector<std::pair<std::filesystem::path, std::string>> files;

  for (std::uint64_t run_seed : cfg.evaluation.seeds) {
    std::vector<TransferReport> reports;
    for (const std::string& surrogate_id : cfg.evaluation.surrogates) {
      for (const AttackSpec& attack : cfg.attacks) {
        const std::filesystem::path path =
            adversarial_dir(cfg, surrogate_id, attack.id, run_seed) / "adversarial.tsv";
        if (!std::filesystem::exists(path)) {
          throw DependencyError("adversarial set missing at " + path.string() +
                                "; run: attack --surrogate " + surrogate_id + " --attack " +
                                attack.id + " first");
        }
        const AdversarialSet set = parse_adversarial_set(read_text_file(path));
        if (set.examples.size() != ctx.eval_set.size()) {
          throw DependencyError("adversarial set at " + path.string() + " holds " +
                                std::to_string(set.examples.size()) + " rows but the evaluation set has " +
                                std::to_string(ctx.eval_set.size()) + "; regenerate it");
        }

        std::vector<std::pair<Vec, Vec>> pairs;
        pairs.reserve(set.examples.size());
        for (std::size_t i = 0; i < set.examples.size(); ++i) {
          const std::size_t idx = set.indices[i];
          if (idx >= ctx.eval_set.size()) {
            throw ParseError("adversarial set row " + std::to_string(i) +
                             " points at sample " + std::to_string(idx) + ", out of range");
          }
          check_budget(set.examples[i], ctx.eval_set[idx].x, set.epsilon);
          pairs.emplace_back(ctx.eval_set[idx].x, set.examples[i]);
        }

        TransferReport report;
        report.surrogate = surrogate_id;
        report.attack = attack.id;
        report.seed = run_seed;
        report.sample_count = static_cast<int>(pairs.size());
        for (const ModelRef& target : target_refs) {
          TransferCell cell;
          cell.target = target.id;
          cell.asr = attack_success_rate(*target.model, pairs);
          cell.white_box = target.id == surrogate_id;
          sums[{surrogate_id, attack.id}][target.id] += cell.asr;
          report.cells.push_back(std::move(cell));
        }
        reports.push_back(std::move(report));
      }
    }
    files.emplace_back(eval_dir(cfg) / ("transfer_seed_" + std::to_string(run_seed) + ".tsv"),
                       transfer_table(reports, targets,
                                      "transfer asr, seed " + std::to_string(run_seed) +
                                          ", samples " + std::to_string(ctx.eval_set.size()) +
                                          ", * marks the white-box cell"));
  }

  const double seed_count = static_cast<double>(cfg.evaluation.seeds.size());
  std::ostringstream summary;
  summary << "# transfer asr averaged over " << cfg.evaluation.seeds.size()
          << " seeds, samples " << ctx.eval_set.size() << ", * marks the white-box cell\n";
  summary << "surrogate\tattack";
  for (const std::string& t : targets) summary << '\t' << t;
  summary << "\tmean_transfer\n";

  nlohmann::json json_summary;
  json_summary["seeds"] = cfg.evaluation.seeds;
  json_summary["sample_count"] = ctx.eval_set.size();
  auto& json_entries = json_summary["entries"] = nlohmann::json::array();

  for (const std::string& surrogate_id : cfg.evaluation.surrogates) {
    for (const AttackSpec& attack : cfg.attacks) {
      summary << surrogate_id << '\t' << attack.id;
      const auto& by_target = sums.at({surrogate_id, attack.id});
      double transfer_sum = 0.0;
      int transfer_n = 0;
      nlohmann::json entry;
      entry["surrogate"] = surrogate_id;
      entry["attack"] = attack.id;
      for (const std::string& t : targets) {
        const double mean = by_target.at(t) / seed_count;
        const bool white_box = t == surrogate_id;
        summary << '\t' << format_double(mean) << (white_box ? "*" : "");
        entry["asr"][t] = mean;
        if (white_box) {
          entry["white_box_asr"] = mean;
        } else {
          transfer_sum += mean;
          ++transfer_n;
        }
      }
      const double mean_transfer = transfer_n == 0 ? 0.0 : transfer_sum / transfer_n;
      summary << '\t' << format_double(mean_transfer) << '\n';
      entry["mean_transfer_asr"] = mean_transfer;
      json_entries.push_back(std::move(entry));
    }
  }
  files.emplace_back(eval_dir(cfg) / "transfer_summary.tsv", summary.str());
  files.emplace_back(eval_dir(cfg) / "summary.json", json_summary.dump(2) + "\n");

  for (const auto& [path, payload] : files) write_text_file(path, payload, options.force);
  say(options, "wrote " + std::to_string(files.size()) + " evaluation tables under " +
                   eval_dir(cfg).string());
}

void cmd_sweep(const RunConfig& cfg, const std::string& param, const std::vector<double>& values,
               const PipelineOptions& options) {
  static const std::set<std::string> kParams = {"beta", "N", "theta", "gamma", "rho"};
  if (!kParams.contains(param)) {
    throw ConfigError("sweep: unknown parameter name '" + param +
                      "' (expected beta, N, theta, gamma or rho)");
  }
  if (values.empty()) throw ConfigError("sweep: needs at least one value");

  std::vector<AttackSpec> affected;
  for (const AttackSpec& a : cfg.attacks) {
    if (a.algorithm == AttackAlgorithm::respa || a.algorithm == AttackAlgorithm::flat_current_grad) {
      affected.push_back(a);
    }
  }
  if (affected.empty()) {
    throw ConfigError("sweep: no attack in the config samples a neighborhood (respa or "
                      "flat_current_grad)");
  }

  const Datasets data = build_datasets(cfg);
  const std::vector<NamedModel> models = train_models_in_memory(cfg, data);
  std::vector<std::string> all_ids;
  for (const ModelEntry& m : cfg.models) all_ids.push_back(m.id);
  const std::vector<LabeledSample> eval_set =
      select_evaluation_set(model_refs(models, all_ids), data.eval);
  if (eval_set.empty()) {
    throw DependencyError("sweep: no evaluation samples are classified correctly by every model");
  }
  const std::vector<ModelRef> surrogate_refs = model_refs(models, cfg.evaluation.surrogates);
  const std::vector<ModelRef> target_refs = model_refs(models, cfg.evaluation.targets);

  std::ostringstream table;
  table << "# sweep of " << param << " averaged over " << cfg.evaluation.seeds.size()
        << " seeds, samples " << eval_set.size() << ", * marks the white-box cell\n";
  table << param << "\tsurrogate\tattack";
  for (const std::string& t : cfg.evaluation.targets) table << '\t' << t;
  table << "\tmean_transfer\n";

  for (double value : values) {
    std::vector<AttackSpec> attacks = affected;
    for (AttackSpec& a : attacks) {
      if (param == "beta") a.config.beta = value;
      else if (param == "N") a.config.samples = static_cast<int>(value);
      else if (param == "theta") a.config.theta = value;
      else if (param == "gamma") a.config.gamma = value;
      else a.config.rho = value;
      a.config.validate();
    }

    // (surrogate, attack) -> target -> summed asr
    std::map<std::pair<std::string, std::string>, std::map<std::string, double>> sums;
    for (std::uint64_t run_seed : cfg.evaluation.seeds) {
      for (const TransferReport& r :
           transfer_matrix(surrogate_refs, target_refs, attacks, eval_set, run_seed)) {
        for (const TransferCell& c : r.cells) sums[{r.surrogate, r.attack}][c.target] += c.asr;
      }
    }
    const double seed_count = static_cast<double>(cfg.evaluation.seeds.size());
    for (const ModelRef& surrogate : surrogate_refs) {
      for (const AttackSpec& a : attacks) {
        table << format_double(value) << '\t' << surrogate.id << '\t' << a.id;
        double transfer_sum = 0.0;
        int transfer_n = 0;
        for (const std::string& t : cfg.evaluation.targets) {
          const double mean = sums.at({surrogate.id, a.id}).at(t) / seed_count;
          const bool white_box = t == surrogate.id;
          table << '\t' << format_double(mean) << (white_box ? "*" : "");
          if (!white_box) {
            transfer_sum += mean;
            ++transfer_n;
          }
        }
        table << '\t' << format_double(transfer_n == 0 ? 0.0 : transfer_sum / transfer_n) << '\n';
      }
    }
    say(options, "sweep " + param + "=" + format_double(value) + " done");
  }

  write_text_file(sweep_table_path(cfg, param), table.str(), options.force);
  say(options, "wrote " + sweep_table_path(cfg, param).string());
}

void cmd_surface(const RunConfig& cfg, const std::vector<std::string>& attack_ids, int samples,
                 const std::string& surrogate_id, const PipelineOptions& options) {
  if (samples < 1) throw ConfigError("surface: samples must be >= 1");
  const std::string surrogate =
      surrogate_id.empty() ? cfg.evaluation.surrogates.front() : surrogate_id;
  cfg.model_entry(surrogate);  // must resolve

  std::vector<std::string> attacks = attack_ids;
  if (attacks.empty()) {
    for (const AttackSpec& a : cfg.attacks) attacks.push_back(a.id);
  } else {
    for (const std::string& id : attacks) cfg.attack_spec(id);
  }

  EvalContext ctx = make_eval_context(cfg, load_models_from_checkpoints(cfg));
  const MlpClassifier& model = find_model(ctx.models, surrogate).model;
  const std::uint64_t run_seed = cfg.evaluation.seeds.front();
  const SurfaceConfig& sc = cfg.evaluation.surface;

  // Check every dependency up front so a missing set writes nothing.
  for (const std::string& attack : attacks) {
    const std::filesystem::path adv_path =
        adversarial_dir(cfg, surrogate, attack, run_seed) / "adversarial.tsv";
    if (!std::filesystem::exists(adv_path)) {
      throw DependencyError("adversarial set missing at " + adv_path.string() +
                            "; run: attack --surrogate " + surrogate + " --attack " + attack +
                            " first");
    }
  }

  for (const std::string& attack : attacks) {
    const std::filesystem::path adv_path =
        adversarial_dir(cfg, surrogate, attack, run_seed) / "adversarial.tsv";
    const AdversarialSet set = parse_adversarial_set(read_text_file(adv_path));
    int k = samples;
    if (k > static_cast<int>(set.examples.size())) {
      k = static_cast<int>(set.examples.size());
      say(options, "surface: clamped samples to the " + std::to_string(k) +
                       " available adversarial examples");
    }

    double sharpness_sum = 0.0;
    double gap_sum = 0.0;
    std::vector<std::pair<std::filesystem::path, std::string>> files;
    for (int i = 0; i < k; ++i) {
      const std::size_t idx = set.indices[static_cast<std::size_t>(i)];
      if (idx >= ctx.eval_set.size()) {
        throw ParseError("adversarial set row " + std::to_string(i) + " points at sample " +
                         std::to_string(idx) + ", out of range");
      }
      std::uint64_t s = derive_seed(run_seed, "surface:" + surrogate);
      s = derive_seed(s, "attack:" + attack);
      s = derive_seed(s, "sample:" + std::to_string(i));
      SeededRng rng(s);
      const SurfaceGrid grid = loss_surface(model, set.examples[static_cast<std::size_t>(i)],
                                            ctx.eval_set[idx].y, sc.extent, sc.steps, rng);
      sharpness_sum += sharpness_score(grid);
      gap_sum += mean_gap(grid);
      files.emplace_back(surface_dir(cfg, surrogate, attack) / ("grid_" + std::to_string(i) + ".tsv"),
                         serialize_surface(grid));
    }

    std::ostringstream sharp;
    sharp << "# sharpness over the probed grids: max loss rise above the center (lower = flatter)\n";
    sharp << "attack\tsamples\tmean_sharpness\tmean_gap\n";
    sharp << attack << '\t' << k << '\t' << format_double(sharpness_sum / k) << '\t'
          << format_double(gap_sum / k) << '\n';
    files.emplace_back(surface_dir(cfg, surrogate, attack) / "sharpness.tsv", sharp.str());

    for (const auto& [path, payload] : files) write_text_file(path, payload, options.force);
    say(options, "wrote " + std::to_string(k) + " surface grids for " + attack + " under " +
                     surface_dir(cfg, surrogate, attack).string());
  }
}

}  // namespace respa
