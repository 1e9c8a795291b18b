#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>

#include "mrboost/core.hpp"

namespace mrb {

/// Two interleaved half circles; class sizes differ by at most one.
LabeledDataset two_moons(std::size_t n, double noise, std::uint64_t seed);
/// Isotropic Gaussian blobs with centers evenly spaced on a circle of radius 3.
LabeledDataset blobs(std::size_t n, int num_classes, double noise, std::uint64_t seed);
/// Uniform points in [-1, 1]^2 labelled by the sign quadrant parity, then
/// jittered by Gaussian noise.
LabeledDataset xor_grid(std::size_t n, double noise, std::uint64_t seed);

LabeledDataset generate_dataset(std::string_view generator, std::size_t n, double noise,
                                int num_classes, std::uint64_t seed);

/// Header x0,...,x{d-1},label; 17 significant digits, classic locale.
void write_csv(std::ostream& out, const LabeledDataset& data);
void write_csv(const std::string& path, const LabeledDataset& data);
/// num_classes <= 0 infers max label + 1.
LabeledDataset read_csv(std::istream& in, int num_classes = 0);
LabeledDataset read_csv(const std::string& path, int num_classes = 0);

}  // namespace mrb
