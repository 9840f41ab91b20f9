#include "respa/evaluation.hpp"

#include <algorithm>
#include <sstream>

#include "respa/error.hpp"
#include "respa/text_io.hpp"

namespace respa {

double attack_success_rate(const MlpClassifier& target,
                           const std::vector<std::pair<Vec, Vec>>& pairs) {
  if (pairs.empty()) throw ConfigError("attack_success_rate: empty pair list");
  std::size_t flipped = 0;
  for (const auto& [clean, adversarial] : pairs) {
    if (target.predict(clean) != target.predict(adversarial)) ++flipped;
  }
  return static_cast<double>(flipped) / static_cast<double>(pairs.size());
}

double TransferReport::mean_transfer_asr() const {
  double sum = 0.0;
  int n = 0;
  for (const TransferCell& c : cells) {
    if (!c.white_box) {
      sum += c.asr;
      ++n;
    }
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

std::vector<LabeledSample> select_evaluation_set(const std::vector<ModelRef>& models,
                                                 const std::vector<LabeledSample>& candidates) {
  std::vector<LabeledSample> out;
  for (const LabeledSample& s : candidates) {
    bool keep = true;
    for (const ModelRef& m : models) {
      if (m.model->predict(s.x) != s.label()) {
        keep = false;
        break;
      }
    }
    if (keep) out.push_back(s);
  }
  return out;
}

std::uint64_t attack_sample_seed(std::uint64_t run_seed, const std::string& surrogate_id,
                                 const std::string& attack_id, std::size_t sample_index) {
  std::uint64_t s = derive_seed(run_seed, "surrogate:" + surrogate_id);
  s = derive_seed(s, "attack:" + attack_id);
  return derive_seed(s, "sample:" + std::to_string(sample_index));
}

std::vector<TransferReport> transfer_matrix(const std::vector<ModelRef>& surrogates,
                                            const std::vector<ModelRef>& targets,
                                            const std::vector<AttackSpec>& attacks,
                                            const std::vector<LabeledSample>& dataset,
                                            std::uint64_t run_seed) {
  if (surrogates.empty() || targets.empty() || attacks.empty()) {
    throw ConfigError("transfer_matrix: surrogates, targets and attacks must be non-empty");
  }
  if (dataset.empty()) throw ConfigError("transfer_matrix: dataset is empty");

  const int dim = surrogates.front().model->input_dim();
  const int classes = surrogates.front().model->classes();
  auto check_model = [&](const ModelRef& m) {
    if (m.model->input_dim() != dim || m.model->classes() != classes) {
      throw DimensionError("transfer_matrix: model '" + m.id +
                           "' disagrees on input dimension or class count");
    }
  };
  for (const ModelRef& m : surrogates) check_model(m);
  for (const ModelRef& m : targets) check_model(m);

  std::vector<TransferReport> reports;
  for (const ModelRef& surrogate : surrogates) {
    for (const AttackSpec& attack : attacks) {
      std::vector<std::pair<Vec, Vec>> pairs;
      pairs.reserve(dataset.size());
      for (std::size_t i = 0; i < dataset.size(); ++i) {
        AttackConfig cfg = attack.config;
        cfg.seed = attack_sample_seed(run_seed, surrogate.id, attack.id, i);
        AttackResult res = run_attack(attack.algorithm, *surrogate.model, dataset[i].x,
                                      dataset[i].y, cfg);
        pairs.emplace_back(dataset[i].x, std::move(res.x_adv));
      }

      TransferReport report;
      report.surrogate = surrogate.id;
      report.attack = attack.id;
      report.seed = run_seed;
      report.sample_count = static_cast<int>(pairs.size());
      for (const ModelRef& target : targets) {
        TransferCell cell;
        cell.target = target.id;
        cell.asr = attack_success_rate(*target.model, pairs);
        cell.white_box = target.id == surrogate.id;
        report.cells.push_back(std::move(cell));
      }
      reports.push_back(std::move(report));
    }
  }
  return reports;
}

SurfaceGrid loss_surface(const LossOracle& oracle, const Vec& x_adv, const Vec& y, double extent,
                         int steps, SeededRng& rng) {
  if (steps < 3 || steps % 2 == 0) {
    throw ConfigError("loss_surface: steps must be odd and >= 3");
  }
  if (extent < 0.0) throw ConfigError("loss_surface: extent must be >= 0");
  const std::size_t d = x_adv.size();
  if (d < 2) throw ConfigError("loss_surface: needs at least 2 input dimensions");

  // Two random directions, Gram-Schmidt orthonormalized; near-parallel
  // draws are redrawn a bounded number of times.
  Vec u;
  for (int attempt = 0;; ++attempt) {
    if (attempt >= 16) throw InvariantError("loss_surface: could not draw a usable direction");
    u = sample_uniform_box(rng, d, 1.0);
    const double n = vec::l2_norm(u);
    if (n > 1e-8) {
      vec::scale_in_place(u, 1.0 / n);
      break;
    }
  }
  Vec v;
  for (int attempt = 0;; ++attempt) {
    if (attempt >= 16) throw InvariantError("loss_surface: could not draw an independent direction");
    v = sample_uniform_box(rng, d, 1.0);
    vec::add_scaled_in_place(v, -vec::dot(v, u), u);
    const double n = vec::l2_norm(v);
    if (n > 1e-8) {
      vec::scale_in_place(v, 1.0 / n);
      break;
    }
  }

  SurfaceGrid grid;
  grid.u = std::move(u);
  grid.v = std::move(v);
  grid.extent_a = extent;
  grid.extent_b = extent;
  grid.steps_a = steps;
  grid.steps_b = steps;
  grid.losses.resize(static_cast<std::size_t>(steps) * static_cast<std::size_t>(steps));
  grid.center_loss = oracle.loss(x_adv, y);

  const int center = steps / 2;
  for (int ia = 0; ia < steps; ++ia) {
    // 2*ia/(steps-1) - 1 hits -1, 0, +1 exactly at the ends and center.
    const double a = extent * (2.0 * ia / static_cast<double>(steps - 1) - 1.0);
    for (int ib = 0; ib < steps; ++ib) {
      const double b = extent * (2.0 * ib / static_cast<double>(steps - 1) - 1.0);
      double value;
      if (ia == center && ib == center) {
        value = grid.center_loss;
      } else {
        Vec point = x_adv;
        vec::add_scaled_in_place(point, a, grid.u);
        vec::add_scaled_in_place(point, b, grid.v);
        value = oracle.loss(point, y);
      }
      grid.losses[static_cast<std::size_t>(ia) * static_cast<std::size_t>(steps) + static_cast<std::size_t>(ib)] = value;
    }
  }
  return grid;
}

double sharpness_score(const SurfaceGrid& grid) {
  double worst = 0.0;
  for (double c : grid.losses) worst = std::max(worst, c - grid.center_loss);
  return worst;
}

double mean_gap(const SurfaceGrid& grid) {
  double sum = 0.0;
  for (double c : grid.losses) sum += c - grid.center_loss;
  return sum / static_cast<double>(grid.losses.size());
}

std::string serialize_surface(const SurfaceGrid& grid) {
  std::ostringstream out;
  out << "# loss surface grid " << grid.steps_a << "x" << grid.steps_b << " extent "
      << format_double(grid.extent_a) << ' ' << format_double(grid.extent_b) << '\n';
  out << "# center_loss " << format_double(grid.center_loss) << '\n';
  auto direction_line = [&](const char* name, const Vec& dir) {
    out << "# " << name;
    for (double x : dir) out << ' ' << format_double(x);
    out << '\n';
  };
  direction_line("u", grid.u);
  direction_line("v", grid.v);
  for (int ia = 0; ia < grid.steps_a; ++ia) {
    for (int ib = 0; ib < grid.steps_b; ++ib) {
      if (ib > 0) out << '\t';
      out << format_double(grid.at(ia, ib));
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace respa
