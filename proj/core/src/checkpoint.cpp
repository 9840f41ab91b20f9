#include "respa/checkpoint.hpp"

#include <sstream>
#include <vector>

#include "respa/error.hpp"
#include "respa/text_io.hpp"

namespace respa {

namespace {

constexpr const char* kFormatTag = "respa-checkpoint";
constexpr const char* kVersion = "v1";

class LineReader {
 public:
  explicit LineReader(const std::string& text) : text_(text) {}

  // Next line, or throws naming what was expected.
  std::string next(const std::string& expected) {
    if (pos_ >= text_.size()) {
      throw ParseError("checkpoint: unexpected end of file at line " + std::to_string(line_) +
                       " while reading " + expected);
    }
    std::size_t end = text_.find('\n', pos_);
    if (end == std::string::npos) end = text_.size();
    std::string line = text_.substr(pos_, end - pos_);
    pos_ = end + 1;
    ++line_;
    return line;
  }

  int line() const { return line_; }
  bool at_end() const { return pos_ >= text_.size(); }

 private:
  const std::string& text_;
  std::size_t pos_ = 0;
  int line_ = 0;
};

std::vector<std::string> fields_of(const std::string& line) {
  std::vector<std::string> out;
  for (std::string& f : split(line, ' ')) {
    if (!f.empty()) out.push_back(std::move(f));
  }
  return out;
}

[[noreturn]] void fail(const LineReader& r, const std::string& field, const std::string& detail) {
  throw ParseError("checkpoint: bad field '" + field + "' at line " + std::to_string(r.line()) +
                   ": " + detail);
}

}  // namespace

std::string serialize_checkpoint(const MlpClassifier& model, std::uint64_t seed) {
  std::ostringstream out;
  out << kFormatTag << ' ' << kVersion << '\n';
  out << "seed " << seed << '\n';
  out << "activation " << activation_name(model.architecture().activation) << '\n';
  out << "widths";
  for (int w : model.architecture().widths()) out << ' ' << w;
  out << '\n';
  for (std::size_t l = 0; l < model.layer_count(); ++l) {
    const Matrix& w = model.weights()[l];
    out << "layer " << l << " weight " << w.rows << ' ' << w.cols << '\n';
    for (int r = 0; r < w.rows; ++r) {
      for (int c = 0; c < w.cols; ++c) {
        if (c > 0) out << ' ';
        out << format_double(w.at(r, c));
      }
      out << '\n';
    }
    const Vec& b = model.biases()[l];
    out << "layer " << l << " bias " << b.size() << '\n';
    for (std::size_t i = 0; i < b.size(); ++i) {
      if (i > 0) out << ' ';
      out << format_double(b[i]);
    }
    out << '\n';
  }
  out << "end\n";
  return out.str();
}

Checkpoint parse_checkpoint(const std::string& text) {
  LineReader r(text);

  const auto header = fields_of(r.next("format header"));
  if (header.size() != 2 || header[0] != kFormatTag) {
    throw ParseError("checkpoint: bad field 'format header' at line 1: expected '" +
                     std::string(kFormatTag) + " <version>'");
  }
  if (header[1] != kVersion) {
    throw ParseError("checkpoint: unsupported version '" + header[1] + "' (this build reads " +
                     kVersion + ")");
  }

  const auto seed_line = fields_of(r.next("seed"));
  if (seed_line.size() != 2 || seed_line[0] != "seed") fail(r, "seed", "expected 'seed <u64>'");
  const std::uint64_t seed = parse_u64(seed_line[1], "seed");

  const auto act_line = fields_of(r.next("activation"));
  if (act_line.size() != 2 || act_line[0] != "activation") {
    fail(r, "activation", "expected 'activation relu|tanh'");
  }
  const Activation activation = activation_from_name(act_line[1]);

  const auto width_line = fields_of(r.next("widths"));
  if (width_line.size() < 3 || width_line[0] != "widths") {
    fail(r, "widths", "expected 'widths <input> [hidden...] <classes>'");
  }
  std::vector<int> widths;
  for (std::size_t i = 1; i < width_line.size(); ++i) {
    widths.push_back(static_cast<int>(parse_int(width_line[i], "widths")));
  }

  Architecture arch;
  arch.input_dim = widths.front();
  arch.classes = widths.back();
  arch.hidden.assign(widths.begin() + 1, widths.end() - 1);
  arch.activation = activation;
  arch.validate();

  std::vector<Matrix> weights;
  std::vector<Vec> biases;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const auto w_head = fields_of(r.next("layer " + std::to_string(l) + " weight header"));
    if (w_head.size() != 5 || w_head[0] != "layer" || w_head[2] != "weight" ||
        parse_int(w_head[1], "layer index") != static_cast<std::int64_t>(l)) {
      fail(r, "layer weight header", "expected 'layer " + std::to_string(l) + " weight <rows> <cols>'");
    }
    const int rows = static_cast<int>(parse_int(w_head[3], "weight rows"));
    const int cols = static_cast<int>(parse_int(w_head[4], "weight cols"));
    if (rows != widths[l + 1] || cols != widths[l]) {
      fail(r, "layer weight header", "shape disagrees with the widths line");
    }
    Matrix w(rows, cols);
    for (int row = 0; row < rows; ++row) {
      const auto values = fields_of(r.next("layer " + std::to_string(l) + " weight row " + std::to_string(row)));
      if (static_cast<int>(values.size()) != cols) {
        fail(r, "weight row", "expected " + std::to_string(cols) + " values, got " +
                                  std::to_string(values.size()));
      }
      for (int c = 0; c < cols; ++c) w.at(row, c) = parse_double(values[static_cast<std::size_t>(c)], "weight value");
    }
    weights.push_back(std::move(w));

    const auto b_head = fields_of(r.next("layer " + std::to_string(l) + " bias header"));
    if (b_head.size() != 4 || b_head[0] != "layer" || b_head[2] != "bias" ||
        parse_int(b_head[1], "layer index") != static_cast<std::int64_t>(l)) {
      fail(r, "layer bias header", "expected 'layer " + std::to_string(l) + " bias <len>'");
    }
    const int len = static_cast<int>(parse_int(b_head[3], "bias length"));
    if (len != widths[l + 1]) fail(r, "layer bias header", "length disagrees with the widths line");
    const auto values = fields_of(r.next("layer " + std::to_string(l) + " bias values"));
    if (static_cast<int>(values.size()) != len) {
      fail(r, "bias values", "expected " + std::to_string(len) + " values, got " +
                                 std::to_string(values.size()));
    }
    Vec b(static_cast<std::size_t>(len));
    for (int i = 0; i < len; ++i) b[static_cast<std::size_t>(i)] = parse_double(values[static_cast<std::size_t>(i)], "bias value");
    biases.push_back(std::move(b));
  }

  const auto tail = fields_of(r.next("end marker"));
  if (tail.size() != 1 || tail[0] != "end") fail(r, "end marker", "expected 'end'");

  return Checkpoint{MlpClassifier(arch, std::move(weights), std::move(biases)), seed};
}

void save_model(const MlpClassifier& model, std::uint64_t seed, const std::filesystem::path& path,
                bool force) {
  write_text_file(path, serialize_checkpoint(model, seed), force);
}

Checkpoint load_model(const std::filesystem::path& path) {
  return parse_checkpoint(read_text_file(path));
}

}  // namespace respa
