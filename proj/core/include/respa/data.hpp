#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "respa/vec.hpp"

namespace respa {

// A sample x in [0,1]^d with its one-hot label. Both invariants are checked
// at construction.
struct LabeledSample {
  Vec x;
  Vec y;

  LabeledSample(Vec x_in, Vec y_in);
  int label() const;
  int classes() const { return static_cast<int>(y.size()); }
};

// Gaussian blob layout: one mean per class, isotropic noise, coordinates
// clamped to [0,1].
struct SyntheticSpec {
  int dim = 0;
  int classes = 0;
  std::vector<Vec> means;
  double noise_sigma = 0.0;
  int per_class = 0;
  std::uint64_t seed = 0;

  void validate() const;
};

// Mutually orthogonal unit directions scaled by `radius` around the box
// center (0.5, ..., 0.5). Means stay inside [0,1] whenever radius <= 0.5.
std::vector<Vec> orthogonal_class_means(int dim, int classes, double radius, std::uint64_t seed);

// Class-major generation: per_class draws around each mean in class order.
// A pure function of the spec.
std::vector<LabeledSample> generate_synthetic(const SyntheticSpec& spec);

// IDX image/label pair (big-endian, magic 0x00000803 / 0x00000801). Pixels
// are scaled to [0,1] by /255 and labels one-hot encoded over max(label)+1
// classes. Malformed files raise ParseError naming the failing byte offset.
std::vector<LabeledSample> load_idx(const std::filesystem::path& images_path,
                                    const std::filesystem::path& labels_path);

}  // namespace respa
