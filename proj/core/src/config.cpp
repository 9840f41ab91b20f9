#include "respa/config.hpp"

#include <cstdlib>
#include <set>

#include <json.hpp>

#include "respa/error.hpp"
#include "respa/text_io.hpp"

namespace respa {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& where, const std::string& detail) {
  throw ConfigError("config: " + where + ": " + detail);
}

// Strict object access: every key must be consumed exactly once.
class ObjectView {
 public:
  ObjectView(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) bad(where_, "expected an object");
  }

  ~ObjectView() = default;

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  const json& require(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) bad(where_, "missing required key '" + key + "'");
    return j_.at(key);
  }

  const json* optional(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  // Call after consuming all keys.
  void reject_unknown() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.contains(it.key())) {
        bad(where_, "unknown key '" + it.key() + "'");
      }
    }
  }

  const std::string& where() const { return where_; }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

double as_double(const json& j, const std::string& where) {
  if (!j.is_number()) bad(where, "expected a number");
  return j.get<double>();
}

int as_int(const json& j, const std::string& where) {
  if (!j.is_number_integer()) bad(where, "expected an integer");
  return j.get<int>();
}

std::uint64_t as_u64(const json& j, const std::string& where) {
  if (!j.is_number_unsigned() && !j.is_number_integer()) bad(where, "expected an unsigned integer");
  if (j.is_number_integer() && j.get<std::int64_t>() < 0) bad(where, "expected a non-negative integer");
  return j.get<std::uint64_t>();
}

std::string as_string(const json& j, const std::string& where) {
  if (!j.is_string()) bad(where, "expected a string");
  return j.get<std::string>();
}

SyntheticDataConfig parse_synthetic(const json& j, const std::string& where) {
  ObjectView o(j, where);
  SyntheticDataConfig c;
  if (const json* v = o.optional("dim")) c.dim = as_int(*v, where + ".dim");
  if (const json* v = o.optional("classes")) c.classes = as_int(*v, where + ".classes");
  if (const json* v = o.optional("train_per_class")) c.train_per_class = as_int(*v, where + ".train_per_class");
  if (const json* v = o.optional("eval_per_class")) c.eval_per_class = as_int(*v, where + ".eval_per_class");
  if (const json* v = o.optional("noise_sigma")) c.noise_sigma = as_double(*v, where + ".noise_sigma");
  if (const json* v = o.optional("mean_radius")) c.mean_radius = as_double(*v, where + ".mean_radius");
  if (const json* v = o.optional("means")) {
    if (!v->is_array()) bad(where + ".means", "expected an array of arrays");
    std::vector<Vec> means;
    for (const json& row : *v) {
      if (!row.is_array()) bad(where + ".means", "expected an array of arrays");
      Vec m;
      for (const json& x : row) m.push_back(as_double(x, where + ".means"));
      means.push_back(std::move(m));
    }
    c.means = std::move(means);
  }
  o.reject_unknown();
  if (c.dim < 1) bad(where + ".dim", "must be >= 1");
  if (c.classes < 2) bad(where + ".classes", "must be >= 2");
  if (c.train_per_class < 1) bad(where + ".train_per_class", "must be >= 1");
  if (c.eval_per_class < 1) bad(where + ".eval_per_class", "must be >= 1");
  if (!(c.noise_sigma > 0.0)) bad(where + ".noise_sigma", "must be > 0");
  if (!(c.mean_radius > 0.0)) bad(where + ".mean_radius", "must be > 0");
  return c;
}

IdxDataConfig parse_idx(const json& j, const std::string& where) {
  ObjectView o(j, where);
  IdxDataConfig c;
  c.train_images = as_string(o.require("train_images"), where + ".train_images");
  c.train_labels = as_string(o.require("train_labels"), where + ".train_labels");
  c.eval_images = as_string(o.require("eval_images"), where + ".eval_images");
  c.eval_labels = as_string(o.require("eval_labels"), where + ".eval_labels");
  o.reject_unknown();
  return c;
}

DataConfig parse_data(const json& j) {
  ObjectView o(j, "data");
  DataConfig c;
  if (const json* v = o.optional("synthetic")) c.synthetic = parse_synthetic(*v, "data.synthetic");
  if (const json* v = o.optional("idx")) c.idx = parse_idx(*v, "data.idx");
  o.reject_unknown();
  if (c.synthetic.has_value() == c.idx.has_value()) {
    bad("data", "exactly one of 'synthetic' or 'idx' must be present");
  }
  return c;
}

ModelEntry parse_model(const json& j, std::size_t index) {
  const std::string where = "models[" + std::to_string(index) + "]";
  ObjectView o(j, where);
  ModelEntry m;
  m.id = as_string(o.require("id"), where + ".id");
  if (const json* v = o.optional("hidden")) {
    if (!v->is_array()) bad(where + ".hidden", "expected an array of integers");
    for (const json& h : *v) m.hidden.push_back(as_int(h, where + ".hidden"));
  }
  if (const json* v = o.optional("activation")) {
    m.activation = activation_from_name(as_string(*v, where + ".activation"));
  }
  if (const json* v = o.optional("train")) {
    ObjectView t(*v, where + ".train");
    if (const json* w = t.optional("learning_rate")) m.train.learning_rate = as_double(*w, where + ".train.learning_rate");
    if (const json* w = t.optional("epochs")) m.train.epochs = as_int(*w, where + ".train.epochs");
    if (const json* w = t.optional("batch_size")) m.train.batch_size = as_int(*w, where + ".train.batch_size");
    t.reject_unknown();
  }
  o.reject_unknown();
  if (m.id.empty()) bad(where + ".id", "must be non-empty");
  return m;
}

AttackSpec parse_attack(const json& j, std::size_t index) {
  const std::string where = "attacks[" + std::to_string(index) + "]";
  ObjectView o(j, where);
  AttackSpec a;
  a.id = as_string(o.require("id"), where + ".id");
  a.algorithm = attack_algorithm_from_name(as_string(o.require("algorithm"), where + ".algorithm"));
  AttackConfig& c = a.config;
  if (const json* v = o.optional("epsilon")) c.epsilon = as_double(*v, where + ".epsilon");
  if (const json* v = o.optional("alpha")) c.alpha = as_double(*v, where + ".alpha");
  if (const json* v = o.optional("iterations")) c.iterations = as_int(*v, where + ".iterations");
  if (const json* v = o.optional("mu")) c.mu = as_double(*v, where + ".mu");
  if (const json* v = o.optional("samples")) c.samples = as_int(*v, where + ".samples");
  if (const json* v = o.optional("theta")) c.theta = as_double(*v, where + ".theta");
  if (const json* v = o.optional("gamma")) c.gamma = as_double(*v, where + ".gamma");
  if (const json* v = o.optional("beta")) c.beta = as_double(*v, where + ".beta");
  if (const json* v = o.optional("rho")) c.rho = as_double(*v, where + ".rho");
  if (const json* v = o.optional("residual_norm")) {
    const std::string n = as_string(*v, where + ".residual_norm");
    if (n == "l2") c.residual_norm = ResidualNorm::l2;
    else if (n == "l1") c.residual_norm = ResidualNorm::l1;
    else bad(where + ".residual_norm", "expected 'l2' or 'l1'");
  }
  if (const json* v = o.optional("reference_point")) {
    const std::string n = as_string(*v, where + ".reference_point");
    if (n == "per_sample") c.reference_point = ReferencePoint::per_sample;
    else if (n == "center") c.reference_point = ReferencePoint::center;
    else bad(where + ".reference_point", "expected 'per_sample' or 'center'");
  }
  o.reject_unknown();
  if (a.id.empty()) bad(where + ".id", "must be non-empty");
  try {
    c.validate();
  } catch (const ConfigError& e) {
    bad(where, e.what());
  }
  return a;
}

EvaluationConfig parse_evaluation(const json& j, std::uint64_t run_seed) {
  ObjectView o(j, "evaluation");
  EvaluationConfig e;
  const json& surrogates = o.require("surrogates");
  if (!surrogates.is_array()) bad("evaluation.surrogates", "expected an array of model ids");
  for (const json& s : surrogates) e.surrogates.push_back(as_string(s, "evaluation.surrogates"));
  const json& targets = o.require("targets");
  if (!targets.is_array()) bad("evaluation.targets", "expected an array of model ids");
  for (const json& t : targets) e.targets.push_back(as_string(t, "evaluation.targets"));
  if (const json* v = o.optional("seeds")) {
    if (!v->is_array() || v->empty()) bad("evaluation.seeds", "expected a non-empty array");
    for (const json& s : *v) e.seeds.push_back(as_u64(s, "evaluation.seeds"));
  } else {
    e.seeds = {run_seed};
  }
  if (const json* v = o.optional("surface")) {
    ObjectView s(*v, "evaluation.surface");
    if (const json* w = s.optional("extent")) e.surface.extent = as_double(*w, "evaluation.surface.extent");
    if (const json* w = s.optional("steps")) e.surface.steps = as_int(*w, "evaluation.surface.steps");
    if (const json* w = s.optional("samples")) e.surface.samples = as_int(*w, "evaluation.surface.samples");
    s.reject_unknown();
  }
  o.reject_unknown();
  if (e.surrogates.empty()) bad("evaluation.surrogates", "must list at least one model id");
  if (e.targets.empty()) bad("evaluation.targets", "must list at least one model id");
  if (e.surface.steps < 3 || e.surface.steps % 2 == 0) bad("evaluation.surface.steps", "must be odd and >= 3");
  if (!(e.surface.extent >= 0.0)) bad("evaluation.surface.extent", "must be >= 0");
  if (e.surface.samples < 1) bad("evaluation.surface.samples", "must be >= 1");
  return e;
}

}  // namespace

const ModelEntry& RunConfig::model_entry(const std::string& id) const {
  for (const ModelEntry& m : models) {
    if (m.id == id) return m;
  }
  throw ConfigError("config: model id '" + id + "' does not resolve");
}

const AttackSpec& RunConfig::attack_spec(const std::string& id) const {
  for (const AttackSpec& a : attacks) {
    if (a.id == id) return a;
  }
  throw ConfigError("config: attack id '" + id + "' does not resolve");
}

RunConfig parse_run_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError("config: invalid JSON: " + std::string(e.what()));
  }

  ObjectView o(j, "top level");
  RunConfig cfg;
  cfg.seed = as_u64(o.require("seed"), "seed");
  cfg.output_dir = as_string(o.require("output_dir"), "output_dir");
  cfg.data = parse_data(o.require("data"));

  const json& models = o.require("models");
  if (!models.is_array() || models.empty()) bad("models", "expected a non-empty array");
  for (std::size_t i = 0; i < models.size(); ++i) cfg.models.push_back(parse_model(models[i], i));

  const json& attacks = o.require("attacks");
  if (!attacks.is_array() || attacks.empty()) bad("attacks", "expected a non-empty array");
  for (std::size_t i = 0; i < attacks.size(); ++i) cfg.attacks.push_back(parse_attack(attacks[i], i));

  cfg.evaluation = parse_evaluation(o.require("evaluation"), cfg.seed);
  o.reject_unknown();

  // Uniqueness and reference resolution.
  std::set<std::string> model_ids;
  for (const ModelEntry& m : cfg.models) {
    if (!model_ids.insert(m.id).second) bad("models", "duplicate model id '" + m.id + "'");
  }
  std::set<std::string> attack_ids;
  for (const AttackSpec& a : cfg.attacks) {
    if (!attack_ids.insert(a.id).second) bad("attacks", "duplicate attack id '" + a.id + "'");
  }
  for (const std::string& id : cfg.evaluation.surrogates) {
    if (!model_ids.contains(id)) bad("evaluation.surrogates", "model id '" + id + "' does not resolve");
  }
  for (const std::string& id : cfg.evaluation.targets) {
    if (!model_ids.contains(id)) bad("evaluation.targets", "model id '" + id + "' does not resolve");
  }
  if (cfg.output_dir.empty()) bad("output_dir", "must be non-empty");
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  RunConfig cfg = parse_run_config(read_text_file(path));
  if (const char* env = std::getenv("RESPA_OUTPUT_DIR"); env != nullptr && *env != '\0') {
    cfg.output_dir = env;
  }
  return cfg;
}

}  // namespace respa
