#include "mrboost/instances.hpp"

#include <random>
#include <stdexcept>

namespace mrb {

TableInstance random_table_instance(std::size_t n, int num_classes, std::size_t hypotheses,
                                    std::size_t grid, std::uint64_t seed) {
  if (n < 1 || num_classes < 2 || hypotheses < 1 || grid < 1) {
    throw std::invalid_argument("random instance: sizes must be positive and K >= 2");
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> label(0, num_classes - 1);

  std::vector<Vector> features;
  std::vector<int> labels;
  for (std::size_t i = 0; i < n; ++i) {
    features.push_back({static_cast<double>(i)});
    labels.push_back(label(rng));
  }
  std::vector<Vector> points{{0.0}};
  for (std::size_t g = 1; g < grid; ++g) {
    const double magnitude = static_cast<double>((g + 1) / 2) / static_cast<double>(grid);
    points.push_back({g % 2 == 1 ? magnitude : -magnitude});
  }
  std::vector<std::vector<int>> rows(hypotheses, std::vector<int>(n * grid));
  for (auto& row : rows) {
    for (int& v : row) v = label(rng);
  }
  return {FiniteHypothesisClass::table(num_classes, std::move(rows)),
          LabeledDataset(std::move(features), std::move(labels), num_classes),
          PerturbationModel::grid(1.0, std::move(points))};
}

}  // namespace mrb
