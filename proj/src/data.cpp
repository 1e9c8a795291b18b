#include "mrboost/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <locale>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace mrb {

LabeledDataset two_moons(std::size_t n, double noise, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("two_moons: n must be >= 2");
  if (!(noise >= 0.0)) throw std::invalid_argument("two_moons: noise must be >= 0");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
  std::normal_distribution<double> jitter(0.0, 1.0);
  std::vector<Vector> features;
  std::vector<int> labels;
  const std::size_t outer = (n + 1) / 2;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = angle(rng);
    const int label = i < outer ? 0 : 1;
    Vector x = label == 0 ? Vector{std::cos(t), std::sin(t)}
                          : Vector{1.0 - std::cos(t), 0.5 - std::sin(t)};
    for (double& v : x) v += noise * jitter(rng);
    features.push_back(std::move(x));
    labels.push_back(label);
  }
  return LabeledDataset(std::move(features), std::move(labels), 2);
}

LabeledDataset blobs(std::size_t n, int num_classes, double noise, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("blobs: n must be >= 1");
  if (num_classes < 2) throw std::invalid_argument("blobs: num_classes must be >= 2");
  if (!(noise >= 0.0)) throw std::invalid_argument("blobs: noise must be >= 0");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> jitter(0.0, 1.0);
  std::vector<Vector> features;
  std::vector<int> labels;
  for (std::size_t i = 0; i < n; ++i) {
    const int label = static_cast<int>(i % static_cast<std::size_t>(num_classes));
    const double a = 2.0 * std::numbers::pi * label / num_classes;
    features.push_back({3.0 * std::cos(a) + noise * jitter(rng),
                        3.0 * std::sin(a) + noise * jitter(rng)});
    labels.push_back(label);
  }
  return LabeledDataset(std::move(features), std::move(labels), num_classes);
}

LabeledDataset xor_grid(std::size_t n, double noise, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("xor_grid: n must be >= 1");
  if (!(noise >= 0.0)) throw std::invalid_argument("xor_grid: noise must be >= 0");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  std::normal_distribution<double> jitter(0.0, 1.0);
  std::vector<Vector> features;
  std::vector<int> labels;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = coord(rng);
    const double b = coord(rng);
    labels.push_back((a > 0.0) != (b > 0.0) ? 1 : 0);
    features.push_back({a + noise * jitter(rng), b + noise * jitter(rng)});
  }
  return LabeledDataset(std::move(features), std::move(labels), 2);
}

LabeledDataset generate_dataset(std::string_view generator, std::size_t n, double noise,
                                int num_classes, std::uint64_t seed) {
  if (generator == "two_moons") return two_moons(n, noise, seed);
  if (generator == "blobs") return blobs(n, num_classes, noise, seed);
  if (generator == "xor_grid") return xor_grid(n, noise, seed);
  throw std::invalid_argument("unknown generator '" + std::string(generator) + "'");
}

void write_csv(std::ostream& out, const LabeledDataset& data) {
  std::ostringstream buf;
  buf.imbue(std::locale::classic());
  buf.precision(17);
  for (std::size_t j = 0; j < data.dim(); ++j) buf << 'x' << j << ',';
  buf << "label\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (double v : data.x(i)) buf << v << ',';
    buf << data.y(i) << '\n';
  }
  out << buf.str();
}

void write_csv(const std::string& path, const LabeledDataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_csv(out, data);
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

template <typename T>
T parse_cell(const std::string& cell, std::size_t row) {
  T value{};
  const char* end = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(cell.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw std::runtime_error("csv row " + std::to_string(row) + ": bad value '" + cell + "'");
  }
  return value;
}

}  // namespace

LabeledDataset read_csv(std::istream& in, int num_classes) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("csv: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split(line);
  if (header.size() < 2 || header.back() != "label") {
    throw std::runtime_error("csv: header must be x0,...,label");
  }
  for (std::size_t j = 0; j + 1 < header.size(); ++j) {
    if (header[j] != "x" + std::to_string(j)) {
      throw std::runtime_error("csv: unexpected column '" + header[j] + "'");
    }
  }
  std::vector<Vector> features;
  std::vector<int> labels;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      throw std::runtime_error("csv row " + std::to_string(row) + ": wrong column count");
    }
    Vector x;
    for (std::size_t j = 0; j + 1 < cells.size(); ++j) x.push_back(parse_cell<double>(cells[j], row));
    features.push_back(std::move(x));
    labels.push_back(parse_cell<int>(cells.back(), row));
  }
  if (labels.empty()) throw std::runtime_error("csv: no rows");
  if (num_classes <= 0) {
    int max_label = 0;
    for (int y : labels) max_label = std::max(max_label, y);
    num_classes = std::max(2, max_label + 1);
  }
  return LabeledDataset(std::move(features), std::move(labels), num_classes);
}

LabeledDataset read_csv(const std::string& path, int num_classes) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return read_csv(in, num_classes);
}

}  // namespace mrb
