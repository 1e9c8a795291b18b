#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace mrb {

using Vector = std::vector<double>;

/// Feature vectors with integer class labels in {0..K-1}.
class LabeledDataset {
 public:
  LabeledDataset(std::vector<Vector> features, std::vector<int> labels,
                 int num_classes);

  std::size_t size() const { return labels_.size(); }
  std::size_t dim() const { return features_.front().size(); }
  int num_classes() const { return num_classes_; }

  const Vector& x(std::size_t i) const { return features_[i]; }
  int y(std::size_t i) const { return labels_[i]; }
  const std::vector<Vector>& features() const { return features_; }
  const std::vector<int>& labels() const { return labels_; }

  bool operator==(const LabeledDataset&) const = default;

 private:
  std::vector<Vector> features_;
  std::vector<int> labels_;
  int num_classes_;
};

enum class PerturbationMode { continuous, grid };

/// An l-infinity ball of radius epsilon, either continuous or represented
/// by a finite set of perturbation vectors.
class PerturbationModel {
 public:
  static PerturbationModel continuous(double epsilon);
  /// Rejects points outside the ball and duplicate points.
  static PerturbationModel grid(double epsilon, std::vector<Vector> points);
  /// Zero vector first, then the 2^d corners, then the remaining points of
  /// {-eps, 0, +eps}^d, truncated to max_points.
  static PerturbationModel sign_grid(double epsilon, std::size_t dim,
                                     std::size_t max_points);
  /// 1-d grid -eps, -eps + step, ..., always ending at +eps.
  static PerturbationModel uniform_grid_1d(double epsilon, double step);

  double epsilon() const { return epsilon_; }
  PerturbationMode mode() const { return mode_; }
  bool is_grid() const { return mode_ == PerturbationMode::grid; }
  std::size_t size() const { return points_.size(); }
  const Vector& point(std::size_t g) const { return points_[g]; }
  const std::vector<Vector>& points() const { return points_; }
  /// Index of the zero perturbation, or size() when absent.
  std::size_t zero_index() const;

 private:
  PerturbationModel(double epsilon, PerturbationMode mode,
                    std::vector<Vector> points);

  double epsilon_;
  PerturbationMode mode_;
  std::vector<Vector> points_;
};

struct AugmentedEntry {
  std::size_t sample;
  int true_label;
  int false_label;
  std::size_t perturbation;

  bool operator==(const AugmentedEntry&) const = default;
};

/// Enumeration of S_aug: sample-major, then false label, then perturbation.
struct AugmentedSpace {
  std::vector<AugmentedEntry> entries;
  std::size_t num_samples = 0;
  int num_classes = 0;
  std::size_t num_perturbations = 0;

  std::size_t size() const { return entries.size(); }
};

AugmentedSpace build_augmented_space(const LabeledDataset& dataset,
                                     const PerturbationModel& perturbations);

/// x[coordinate] <= threshold predicts label_below, otherwise label_above.
struct Stump {
  std::size_t coordinate;
  double threshold;
  int label_below;
  int label_above;
};

/// Predicts inside_label on [theta, theta + width] of coordinate 0.
struct IntervalClassifier {
  double theta;
  double width;
  int inside_label;
  int outside_label;
};

enum class HypothesisKind { table, stump, interval };

/// A finite set H of base classifiers.
class FiniteHypothesisClass {
 public:
  /// Rows are hypotheses, columns are perturbed points i * |grid| + g.
  static FiniteHypothesisClass table(int num_classes,
                                     std::vector<std::vector<int>> rows);
  static FiniteHypothesisClass stumps(int num_classes, std::vector<Stump> stumps);
  static FiniteHypothesisClass intervals(int num_classes,
                                         std::vector<IntervalClassifier> intervals);

  /// Every stump over each coordinate, with thresholds at midpoints between
  /// consecutive distinct perturbed coordinate values and every ordered
  /// label pair (a, b), a != b.
  static FiniteHypothesisClass all_stumps(const LabeledDataset& dataset,
                                          const PerturbationModel& perturbations);

  HypothesisKind kind() const { return kind_; }
  int num_classes() const { return num_classes_; }
  std::size_t size() const;

  /// Prediction of hypothesis h at an arbitrary input; not available for
  /// the table kind.
  int predict(std::size_t h, std::span<const double> x) const;

  const std::vector<std::vector<int>>& table_rows() const { return rows_; }
  const std::vector<Stump>& stump_list() const { return stumps_; }
  const std::vector<IntervalClassifier>& interval_list() const { return intervals_; }

 private:
  HypothesisKind kind_ = HypothesisKind::table;
  int num_classes_ = 2;
  std::vector<std::vector<int>> rows_;
  std::vector<Stump> stumps_;
  std::vector<IntervalClassifier> intervals_;
};

/// Cached predictions of every hypothesis at every perturbed training point.
class PredictionTable {
 public:
  PredictionTable(std::size_t num_hypotheses, std::size_t num_samples,
                  std::size_t num_perturbations, int num_classes,
                  std::vector<int> predictions);

  std::size_t num_hypotheses() const { return num_hypotheses_; }
  std::size_t num_samples() const { return num_samples_; }
  std::size_t num_perturbations() const { return num_perturbations_; }
  int num_classes() const { return num_classes_; }

  int at(std::size_t h, std::size_t sample, std::size_t perturbation) const {
    return predictions_[(h * num_samples_ + sample) * num_perturbations_ +
                        perturbation];
  }
  std::span<const int> row(std::size_t h) const {
    return {predictions_.data() + h * num_samples_ * num_perturbations_,
            num_samples_ * num_perturbations_};
  }

 private:
  std::size_t num_hypotheses_;
  std::size_t num_samples_;
  std::size_t num_perturbations_;
  int num_classes_;
  std::vector<int> predictions_;
};

PredictionTable tabulate(const FiniteHypothesisClass& hypotheses,
                         const LabeledDataset& dataset,
                         const PerturbationModel& perturbations);

/// A probability distribution Q over a finite hypothesis class.
class EnsembleWeights {
 public:
  explicit EnsembleWeights(Vector weights);

  static EnsembleWeights uniform(std::size_t size);
  static EnsembleWeights point_mass(std::size_t size, std::size_t index);
  /// Uniform over a multiset of hypothesis indices.
  static EnsembleWeights from_choices(std::size_t size,
                                     std::span<const std::size_t> chosen);

  std::size_t size() const { return weights_.size(); }
  double operator[](std::size_t h) const { return weights_[h]; }
  const Vector& weights() const { return weights_; }

 private:
  Vector weights_;
};

/// Entry j is the Q-weighted fraction of hypotheses predicting j at the
/// perturbed point (sample, perturbation).
Vector ensemble_score(const PredictionTable& table, const EnsembleWeights& q,
                      std::size_t sample, std::size_t perturbation);

/// Index of the maximum; ties go to the lowest index.
int argmax_classify(std::span<const double> score);

}  // namespace mrb
