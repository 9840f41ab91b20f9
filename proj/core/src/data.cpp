#include "respa/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>

#include "respa/error.hpp"
#include "respa/rng.hpp"
#include "respa/text_io.hpp"

namespace respa {

LabeledSample::LabeledSample(Vec x_in, Vec y_in) : x(std::move(x_in)), y(std::move(y_in)) {
  if (!vec::all_finite(x)) throw InvariantError("sample: non-finite input coordinate");
  if (!vec::in_box(x, 0.0, 1.0)) throw InvariantError("sample: input coordinate outside [0,1]");
  vec::one_hot_index(y);
}

int LabeledSample::label() const { return vec::one_hot_index(y); }

void SyntheticSpec::validate() const {
  if (dim < 1) throw ConfigError("synthetic spec: dim must be >= 1");
  if (classes < 2) throw ConfigError("synthetic spec: classes must be >= 2");
  if (static_cast<int>(means.size()) != classes) {
    throw ConfigError("synthetic spec: expected " + std::to_string(classes) + " class means, got " +
                      std::to_string(means.size()));
  }
  for (const Vec& m : means) {
    if (static_cast<int>(m.size()) != dim) throw ConfigError("synthetic spec: mean length != dim");
  }
  for (std::size_t i = 0; i < means.size(); ++i) {
    for (std::size_t j = i + 1; j < means.size(); ++j) {
      if (means[i] == means[j]) {
        throw ConfigError("synthetic spec: class means " + std::to_string(i) + " and " +
                          std::to_string(j) + " coincide");
      }
    }
  }
  if (!(noise_sigma > 0.0)) throw ConfigError("synthetic spec: noise_sigma must be > 0");
  if (per_class < 1) throw ConfigError("synthetic spec: per_class must be >= 1");
}

std::vector<Vec> orthogonal_class_means(int dim, int classes, double radius, std::uint64_t seed) {
  if (classes > dim) throw ConfigError("orthogonal_class_means: classes must not exceed dim");
  if (!(radius > 0.0)) throw ConfigError("orthogonal_class_means: radius must be > 0");
  SeededRng rng(seed);
  std::vector<Vec> dirs;
  int attempts = 0;
  while (static_cast<int>(dirs.size()) < classes) {
    if (++attempts > 64 * classes) {
      throw InvariantError("orthogonal_class_means: could not find independent directions");
    }
    Vec d(static_cast<std::size_t>(dim));
    for (double& v : d) v = rng.uniform(-1.0, 1.0);
    for (const Vec& u : dirs) vec::add_scaled_in_place(d, -vec::dot(d, u), u);
    const double n = vec::l2_norm(d);
    if (n < 1e-8) continue;
    vec::scale_in_place(d, 1.0 / n);
    dirs.push_back(std::move(d));
  }
  std::vector<Vec> means;
  means.reserve(static_cast<std::size_t>(classes));
  for (const Vec& d : dirs) {
    Vec m(static_cast<std::size_t>(dim));
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = 0.5 + radius * d[i];
    means.push_back(std::move(m));
  }
  return means;
}

std::vector<LabeledSample> generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  SeededRng rng(spec.seed);
  std::vector<LabeledSample> out;
  out.reserve(static_cast<std::size_t>(spec.classes) * static_cast<std::size_t>(spec.per_class));
  for (int k = 0; k < spec.classes; ++k) {
    const Vec& mean = spec.means[static_cast<std::size_t>(k)];
    for (int i = 0; i < spec.per_class; ++i) {
      Vec x(static_cast<std::size_t>(spec.dim));
      for (std::size_t j = 0; j < x.size(); ++j) {
        x[j] = std::clamp(mean[j] + spec.noise_sigma * rng.normal(), 0.0, 1.0);
      }
      out.emplace_back(std::move(x), vec::one_hot(k, spec.classes));
    }
  }
  return out;
}

namespace {

constexpr std::uint32_t kImagesMagic = 0x00000803;
constexpr std::uint32_t kLabelsMagic = 0x00000801;

struct IdxReader {
  std::ifstream in;
  std::string name;
  std::size_t offset = 0;

  IdxReader(const std::filesystem::path& path, std::string what) : in(path, std::ios::binary), name(std::move(what)) {
    if (!in) throw ParseError(name + ": cannot open " + path.string());
  }

  std::uint8_t read_byte() {
    int c = in.get();
    if (c == EOF) {
      throw ParseError(name + ": truncated file at byte offset " + std::to_string(offset));
    }
    ++offset;
    return static_cast<std::uint8_t>(c);
  }

  std::uint32_t read_u32_be() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | read_byte();
    return v;
  }

  void expect_eof() {
    if (in.get() != EOF) {
      throw ParseError(name + ": trailing data at byte offset " + std::to_string(offset));
    }
  }
};

}  // namespace

std::vector<LabeledSample> load_idx(const std::filesystem::path& images_path,
                                    const std::filesystem::path& labels_path) {
  IdxReader images(images_path, "IDX images");
  const std::uint32_t image_magic = images.read_u32_be();
  if (image_magic != kImagesMagic) {
    throw ParseError("IDX images: bad magic 0x" + to_hex(image_magic).substr(8) +
                     " at byte offset 0 (expected 0x00000803)");
  }
  const std::uint32_t count = images.read_u32_be();
  const std::uint32_t rows = images.read_u32_be();
  const std::uint32_t cols = images.read_u32_be();
  const std::size_t dim = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
  if (dim == 0) throw ParseError("IDX images: zero-sized image shape at byte offset 8");

  IdxReader labels(labels_path, "IDX labels");
  const std::uint32_t label_magic = labels.read_u32_be();
  if (label_magic != kLabelsMagic) {
    throw ParseError("IDX labels: bad magic 0x" + to_hex(label_magic).substr(8) +
                     " at byte offset 0 (expected 0x00000801)");
  }
  const std::uint32_t label_count = labels.read_u32_be();
  if (label_count != count) {
    throw ParseError("IDX: count mismatch, " + std::to_string(count) + " images vs " +
                     std::to_string(label_count) + " labels");
  }

  std::vector<Vec> xs;
  xs.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    Vec x(dim);
    for (std::size_t j = 0; j < dim; ++j) x[j] = static_cast<double>(images.read_byte()) / 255.0;
    xs.push_back(std::move(x));
  }
  images.expect_eof();

  std::vector<int> raw_labels;
  raw_labels.reserve(count);
  int max_label = 0;
  for (std::uint32_t i = 0; i < count; ++i) {
    const int l = labels.read_byte();
    max_label = std::max(max_label, l);
    raw_labels.push_back(l);
  }
  labels.expect_eof();

  const int classes = std::max(max_label + 1, 2);
  std::vector<LabeledSample> out;
  out.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    out.emplace_back(std::move(xs[i]), vec::one_hot(raw_labels[i], classes));
  }
  return out;
}

}  // namespace respa
