#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "respa/attack.hpp"
#include "respa/data.hpp"
#include "respa/model.hpp"

namespace respa {

// Fraction of (clean, adversarial) pairs whose argmax class under the
// target model differs. Compares the target's own predictions on both
// inputs, not predictions against ground truth.
double attack_success_rate(const MlpClassifier& target,
                           const std::vector<std::pair<Vec, Vec>>& pairs);

struct TransferCell {
  std::string target;
  double asr = 0.0;
  bool white_box = false;  // target == surrogate
};

struct TransferReport {
  std::string surrogate;
  std::string attack;
  std::uint64_t seed = 0;
  int sample_count = 0;
  std::vector<TransferCell> cells;

  // Mean ASR over the non-white-box cells.
  double mean_transfer_asr() const;
};

struct ModelRef {
  std::string id;
  const MlpClassifier* model = nullptr;
};

// Samples every listed model classifies correctly; the set attacks are
// scored on. Preserves input order.
std::vector<LabeledSample> select_evaluation_set(const std::vector<ModelRef>& models,
                                                 const std::vector<LabeledSample>& candidates);

// Per-sample attack seed, stable under adding models, attacks or samples.
std::uint64_t attack_sample_seed(std::uint64_t run_seed, const std::string& surrogate_id,
                                 const std::string& attack_id, std::size_t sample_index);

// For each (surrogate, attack): generates adversarial examples once over the
// dataset, then scores them against every target. The surrogate's own cell
// is the white-box one. All models must share input dimension and classes.
std::vector<TransferReport> transfer_matrix(const std::vector<ModelRef>& surrogates,
                                            const std::vector<ModelRef>& targets,
                                            const std::vector<AttackSpec>& attacks,
                                            const std::vector<LabeledSample>& dataset,
                                            std::uint64_t run_seed);

// Loss values on a plane through x_adv spanned by two random orthonormal
// directions: cell (ia, ib) holds J(x_adv + a*u + b*v) with a, b on a
// uniform grid over [-extent, +extent]. steps must be odd and >= 3 so the
// center cell is exactly x_adv.
struct SurfaceGrid {
  Vec u;
  Vec v;
  double extent_a = 0.0;
  double extent_b = 0.0;
  int steps_a = 0;
  int steps_b = 0;
  std::vector<double> losses;  // row-major, losses[ia*steps_b + ib]
  double center_loss = 0.0;

  double at(int ia, int ib) const { return losses[static_cast<std::size_t>(ia) * static_cast<std::size_t>(steps_b) + static_cast<std::size_t>(ib)]; }
};

SurfaceGrid loss_surface(const LossOracle& oracle, const Vec& x_adv, const Vec& y, double extent,
                         int steps, SeededRng& rng);

// Worst loss rise over the probed grid: max over cells of J(cell) minus
// J(center). Lower means flatter. The companion mean_gap averages the same
// differences.
double sharpness_score(const SurfaceGrid& grid);
double mean_gap(const SurfaceGrid& grid);

// Tab-separated matrix with '#'-prefixed metadata lines.
std::string serialize_surface(const SurfaceGrid& grid);

}  // namespace respa
