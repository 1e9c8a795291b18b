#include "mrboost/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>

namespace mrb {

namespace {

// Interval endpoints are compared with this slack so grid points built as
// -1 + k * step land inside intervals built the same way.
constexpr double kIntervalSlack = 1e-9;

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument(message);
}

}  // namespace

LabeledDataset::LabeledDataset(std::vector<Vector> features,
                               std::vector<int> labels, int num_classes)
    : features_(std::move(features)),
      labels_(std::move(labels)),
      num_classes_(num_classes) {
  require(num_classes_ >= 2, "dataset: num_classes must be >= 2");
  require(!labels_.empty(), "dataset: at least one sample required");
  require(features_.size() == labels_.size(),
          "dataset: features and labels differ in length");
  const std::size_t d = features_.front().size();
  require(d >= 1, "dataset: feature dimension must be >= 1");
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    require(features_[i].size() == d, "dataset: ragged feature vectors");
    require(labels_[i] >= 0 && labels_[i] < num_classes_,
            "dataset: label out of range at row " + std::to_string(i));
  }
}

PerturbationModel::PerturbationModel(double epsilon, PerturbationMode mode,
                                     std::vector<Vector> points)
    : epsilon_(epsilon), mode_(mode), points_(std::move(points)) {}

PerturbationModel PerturbationModel::continuous(double epsilon) {
  require(epsilon >= 0.0 && std::isfinite(epsilon),
          "perturbation: epsilon must be finite and >= 0");
  return PerturbationModel(epsilon, PerturbationMode::continuous, {});
}

PerturbationModel PerturbationModel::grid(double epsilon,
                                          std::vector<Vector> points) {
  require(epsilon >= 0.0 && std::isfinite(epsilon),
          "perturbation: epsilon must be finite and >= 0");
  require(!points.empty(), "perturbation: grid must be non-empty");
  const std::size_t d = points.front().size();
  std::set<Vector> seen;
  for (const auto& p : points) {
    require(p.size() == d, "perturbation: ragged grid points");
    for (double v : p) {
      require(std::abs(v) <= epsilon, "perturbation: grid point outside the ball");
    }
    require(seen.insert(p).second, "perturbation: duplicate grid point");
  }
  return PerturbationModel(epsilon, PerturbationMode::grid, std::move(points));
}

PerturbationModel PerturbationModel::sign_grid(double epsilon, std::size_t dim,
                                               std::size_t max_points) {
  require(dim >= 1, "perturbation: dimension must be >= 1");
  require(max_points >= 1, "perturbation: max_points must be >= 1");
  if (epsilon == 0.0) return grid(0.0, {Vector(dim, 0.0)});

  std::vector<Vector> points{Vector(dim, 0.0)};
  // Corners: bit j of the mask selects +eps on coordinate j.
  if (dim < 63) {
    const std::uint64_t corners = std::uint64_t{1} << dim;
    for (std::uint64_t mask = 0; mask < corners && points.size() < max_points;
         ++mask) {
      Vector p(dim);
      for (std::size_t j = 0; j < dim; ++j) {
        p[j] = (mask >> j & 1u) ? epsilon : -epsilon;
      }
      points.push_back(std::move(p));
    }
  }
  // Remaining mixed points, base-3 digits {0: -eps, 1: 0, 2: +eps}.
  if (points.size() < max_points) {
    std::vector<int> digits(dim, 0);
    while (points.size() < max_points) {
      bool has_zero = false, has_nonzero = false;
      for (int v : digits) (v == 1 ? has_zero : has_nonzero) = true;
      if (has_zero && has_nonzero) {
        Vector p(dim);
        for (std::size_t j = 0; j < dim; ++j) p[j] = (digits[j] - 1) * epsilon;
        points.push_back(std::move(p));
      }
      std::size_t j = 0;
      while (j < dim && digits[j] == 2) digits[j++] = 0;
      if (j == dim) break;
      ++digits[j];
    }
  }
  if (points.size() > max_points) points.resize(max_points);
  return grid(epsilon, std::move(points));
}

PerturbationModel PerturbationModel::uniform_grid_1d(double epsilon, double step) {
  require(step > 0.0, "perturbation: step must be > 0");
  if (epsilon == 0.0) return grid(0.0, {Vector{0.0}});
  std::vector<Vector> points;
  for (std::size_t k = 0;; ++k) {
    double v = -epsilon + static_cast<double>(k) * step;
    if (v > epsilon + 1e-9 * std::max(1.0, epsilon)) break;
    v = std::min(v, epsilon);
    if (std::abs(v) < 1e-12) v = 0.0;
    points.push_back(Vector{v});
  }
  if (points.back()[0] < epsilon - 1e-9 * std::max(1.0, epsilon)) {
    points.push_back(Vector{epsilon});
  }
  return grid(epsilon, std::move(points));
}

std::size_t PerturbationModel::zero_index() const {
  for (std::size_t g = 0; g < points_.size(); ++g) {
    if (std::all_of(points_[g].begin(), points_[g].end(),
                    [](double v) { return v == 0.0; })) {
      return g;
    }
  }
  return points_.size();
}

AugmentedSpace build_augmented_space(const LabeledDataset& dataset,
                                     const PerturbationModel& perturbations) {
  require(perturbations.is_grid(),
          "augmented space: exact mode requires a finite perturbation grid");
  AugmentedSpace space;
  space.num_samples = dataset.size();
  space.num_classes = dataset.num_classes();
  space.num_perturbations = perturbations.size();
  space.entries.reserve(dataset.size() * (dataset.num_classes() - 1) *
                        perturbations.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const int y = dataset.y(i);
    for (int yp = 0; yp < dataset.num_classes(); ++yp) {
      if (yp == y) continue;
      for (std::size_t g = 0; g < perturbations.size(); ++g) {
        space.entries.push_back({i, y, yp, g});
      }
    }
  }
  return space;
}

FiniteHypothesisClass FiniteHypothesisClass::table(
    int num_classes, std::vector<std::vector<int>> rows) {
  require(num_classes >= 2, "hypotheses: num_classes must be >= 2");
  require(!rows.empty(), "hypotheses: class must be non-empty");
  for (const auto& row : rows) {
    require(row.size() == rows.front().size(), "hypotheses: ragged table");
    for (int v : row) {
      require(v >= 0 && v < num_classes, "hypotheses: prediction out of range");
    }
  }
  FiniteHypothesisClass c;
  c.kind_ = HypothesisKind::table;
  c.num_classes_ = num_classes;
  c.rows_ = std::move(rows);
  return c;
}

FiniteHypothesisClass FiniteHypothesisClass::stumps(int num_classes,
                                                    std::vector<Stump> stumps) {
  require(num_classes >= 2, "hypotheses: num_classes must be >= 2");
  require(!stumps.empty(), "hypotheses: class must be non-empty");
  for (const auto& s : stumps) {
    require(s.label_below >= 0 && s.label_below < num_classes &&
                s.label_above >= 0 && s.label_above < num_classes,
            "hypotheses: stump label out of range");
  }
  FiniteHypothesisClass c;
  c.kind_ = HypothesisKind::stump;
  c.num_classes_ = num_classes;
  c.stumps_ = std::move(stumps);
  return c;
}

FiniteHypothesisClass FiniteHypothesisClass::intervals(
    int num_classes, std::vector<IntervalClassifier> intervals) {
  require(num_classes >= 2, "hypotheses: num_classes must be >= 2");
  require(!intervals.empty(), "hypotheses: class must be non-empty");
  for (const auto& iv : intervals) {
    require(iv.width >= 0.0, "hypotheses: interval width must be >= 0");
    require(iv.inside_label >= 0 && iv.inside_label < num_classes &&
                iv.outside_label >= 0 && iv.outside_label < num_classes,
            "hypotheses: interval label out of range");
  }
  FiniteHypothesisClass c;
  c.kind_ = HypothesisKind::interval;
  c.num_classes_ = num_classes;
  c.intervals_ = std::move(intervals);
  return c;
}

FiniteHypothesisClass FiniteHypothesisClass::all_stumps(
    const LabeledDataset& dataset, const PerturbationModel& perturbations) {
  require(perturbations.is_grid(), "hypotheses: stump enumeration needs a grid");
  require(perturbations.point(0).size() == dataset.dim(),
          "hypotheses: grid dimension differs from data dimension");
  const int k = dataset.num_classes();
  std::vector<Stump> list;
  for (std::size_t c = 0; c < dataset.dim(); ++c) {
    std::vector<double> values;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      for (const auto& p : perturbations.points()) {
        values.push_back(dataset.x(i)[c] + p[c]);
      }
    }
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    std::vector<double> thresholds{values.front() - 1.0};
    for (std::size_t j = 0; j + 1 < values.size(); ++j) {
      thresholds.push_back(0.5 * (values[j] + values[j + 1]));
    }
    for (double t : thresholds) {
      for (int a = 0; a < k; ++a) {
        for (int b = 0; b < k; ++b) {
          if (a != b) list.push_back({c, t, a, b});
        }
      }
    }
  }
  return stumps(k, std::move(list));
}

std::size_t FiniteHypothesisClass::size() const {
  switch (kind_) {
    case HypothesisKind::table: return rows_.size();
    case HypothesisKind::stump: return stumps_.size();
    case HypothesisKind::interval: return intervals_.size();
  }
  return 0;
}

int FiniteHypothesisClass::predict(std::size_t h, std::span<const double> x) const {
  require(h < size(), "hypotheses: index out of range");
  switch (kind_) {
    case HypothesisKind::table:
      throw std::logic_error("hypotheses: table kind has no pointwise predict");
    case HypothesisKind::stump: {
      const Stump& s = stumps_[h];
      require(s.coordinate < x.size(), "hypotheses: stump coordinate out of range");
      return x[s.coordinate] <= s.threshold ? s.label_below : s.label_above;
    }
    case HypothesisKind::interval: {
      const IntervalClassifier& iv = intervals_[h];
      const double v = x[0];
      const bool inside = v >= iv.theta - kIntervalSlack &&
                          v <= iv.theta + iv.width + kIntervalSlack;
      return inside ? iv.inside_label : iv.outside_label;
    }
  }
  return 0;
}

PredictionTable::PredictionTable(std::size_t num_hypotheses,
                                 std::size_t num_samples,
                                 std::size_t num_perturbations, int num_classes,
                                 std::vector<int> predictions)
    : num_hypotheses_(num_hypotheses),
      num_samples_(num_samples),
      num_perturbations_(num_perturbations),
      num_classes_(num_classes),
      predictions_(std::move(predictions)) {
  require(num_hypotheses_ >= 1 && num_samples_ >= 1 && num_perturbations_ >= 1,
          "prediction table: empty dimension");
  require(predictions_.size() ==
              num_hypotheses_ * num_samples_ * num_perturbations_,
          "prediction table: size mismatch");
  for (int v : predictions_) {
    require(v >= 0 && v < num_classes_, "prediction table: invalid label");
  }
}

PredictionTable tabulate(const FiniteHypothesisClass& hypotheses,
                         const LabeledDataset& dataset,
                         const PerturbationModel& perturbations) {
  require(perturbations.is_grid(), "tabulate: exact mode requires a grid");
  require(hypotheses.num_classes() == dataset.num_classes(),
          "tabulate: class count differs between hypotheses and data");
  const std::size_t n = dataset.size();
  const std::size_t grid = perturbations.size();
  const std::size_t hs = hypotheses.size();
  std::vector<int> predictions;
  predictions.reserve(hs * n * grid);
  if (hypotheses.kind() == HypothesisKind::table) {
    for (const auto& row : hypotheses.table_rows()) {
      require(row.size() == n * grid,
              "tabulate: table width must equal n * |grid|");
      predictions.insert(predictions.end(), row.begin(), row.end());
    }
  } else {
    require(perturbations.point(0).size() == dataset.dim(),
            "tabulate: grid dimension differs from data dimension");
    Vector shifted(dataset.dim());
    for (std::size_t h = 0; h < hs; ++h) {
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t g = 0; g < grid; ++g) {
          const Vector& delta = perturbations.point(g);
          for (std::size_t j = 0; j < shifted.size(); ++j) {
            shifted[j] = dataset.x(i)[j] + delta[j];
          }
          predictions.push_back(hypotheses.predict(h, shifted));
        }
      }
    }
  }
  return PredictionTable(hs, n, grid, dataset.num_classes(), std::move(predictions));
}

EnsembleWeights::EnsembleWeights(Vector weights) : weights_(std::move(weights)) {
  require(!weights_.empty(), "ensemble weights: must be non-empty");
  double total = 0.0;
  for (double w : weights_) {
    require(w >= 0.0 && std::isfinite(w), "ensemble weights: negative or non-finite");
    total += w;
  }
  require(std::abs(total - 1.0) <= 1e-12, "ensemble weights: must sum to 1");
}

EnsembleWeights EnsembleWeights::uniform(std::size_t size) {
  require(size >= 1, "ensemble weights: size must be >= 1");
  Vector w(size, 1.0 / static_cast<double>(size));
  // Absorb rounding so the sum check holds for any size.
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  w.back() += 1.0 - total;
  return EnsembleWeights(std::move(w));
}

EnsembleWeights EnsembleWeights::point_mass(std::size_t size, std::size_t index) {
  require(index < size, "ensemble weights: index out of range");
  Vector w(size, 0.0);
  w[index] = 1.0;
  return EnsembleWeights(std::move(w));
}

EnsembleWeights EnsembleWeights::from_choices(std::size_t size,
                                              std::span<const std::size_t> chosen) {
  require(!chosen.empty(), "ensemble weights: no hypotheses chosen");
  std::vector<std::size_t> counts(size, 0);
  for (std::size_t h : chosen) {
    require(h < size, "ensemble weights: chosen index out of range");
    ++counts[h];
  }
  Vector w(size);
  const double total = static_cast<double>(chosen.size());
  for (std::size_t h = 0; h < size; ++h) w[h] = counts[h] / total;
  const double sum = std::accumulate(w.begin(), w.end(), 0.0);
  if (sum != 1.0) {
    const auto largest = std::max_element(w.begin(), w.end()) - w.begin();
    w[largest] += 1.0 - sum;
  }
  return EnsembleWeights(std::move(w));
}

Vector ensemble_score(const PredictionTable& table, const EnsembleWeights& q,
                      std::size_t sample, std::size_t perturbation) {
  require(q.size() == table.num_hypotheses(),
          "ensemble score: weight length differs from hypothesis count");
  require(sample < table.num_samples() && perturbation < table.num_perturbations(),
          "ensemble score: index out of range");
  Vector score(table.num_classes(), 0.0);
  for (std::size_t h = 0; h < q.size(); ++h) {
    if (q[h] != 0.0) score[table.at(h, sample, perturbation)] += q[h];
  }
  return score;
}

int argmax_classify(std::span<const double> score) {
  require(!score.empty(), "argmax: empty score vector");
  std::size_t best = 0;
  for (std::size_t j = 1; j < score.size(); ++j) {
    if (score[j] > score[best]) best = j;
  }
  return static_cast<int>(best);
}

}  // namespace mrb
