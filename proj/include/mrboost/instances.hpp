#pragma once

#include <cstdint>

#include "mrboost/core.hpp"

namespace mrb {

/// A finite margin-game instance with tabulated hypotheses.
struct TableInstance {
  FiniteHypothesisClass hypotheses;
  LabeledDataset dataset;
  PerturbationModel perturbations;
};

/// n samples with uniform labels in {0..K-1}, a 1-d grid of `grid` points
/// (zero first) inside the unit ball, and `hypotheses` tables whose entries
/// are uniform labels.
TableInstance random_table_instance(std::size_t n, int num_classes, std::size_t hypotheses,
                                    std::size_t grid, std::uint64_t seed);

}  // namespace mrb
