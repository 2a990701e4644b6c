#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "pcg/feature_assembly.hpp"
#include "pcg/mlp.hpp"
#include "pcg/types.hpp"

namespace pcg {

// Fixed decision threshold published with the method.
inline constexpr double kPublishedThreshold = -0.52;

struct HistogramConfig {
  double lo{-2.0};
  double hi{2.0};
  double bin_width{0.05};
  int smooth_bins{5};
};

// Location between the two smoothed density modes where the normal-class
// density first falls below the abnormal-class one (linear interpolation
// between bin centres). A zero-density gap before the crossing resolves to
// the gap midpoint. Both populations need at least 30 values; throws
// Errc::NoCrossing when the curves do not cross between the modes.
double cross_point(std::span<const double> outputs_normal, std::span<const double> outputs_abnormal,
                   const HistogramConfig& hist = {});

struct CalibrationResult {
  std::vector<double> fractions;
  std::vector<double> cross_points;
  std::vector<double> skipped_fractions;  // NoCrossing
  double threshold{0.0};
};

inline const std::vector<double> kDefaultCalibrationFractions{0.5, 0.6, 0.7, 0.8, 0.9, 1.0};

struct Dataset {
  std::vector<FeatureVector> vectors;
  std::vector<Label> labels;

  std::size_t size() const { return vectors.size(); }
};

// Pairs feature vectors with reference labels by record id; vectors without
// a label are dropped. Order follows the vectors.
Dataset join_labels(const std::vector<FeatureVector>& vectors, const std::vector<ReferenceLabel>& labels);

// Imputer and scaler fitted on these rows, then the network trained on
// the scaled rows with targets -1 (normal) and +1 (abnormal).
TrainResult train_classifier(const Dataset& train, const TrainConfig& cfg);

// Network outputs for raw (unimputed, unscaled) feature vectors.
std::vector<double> model_outputs(const MlpModel& model, std::span<const FeatureVector> vectors);

// For each fraction, a seeded random subset of that size is passed through
// the model and the cross point of its class-conditional outputs recorded;
// the threshold is their mean. With retrain set, a fresh model is fitted
// on each subset instead of using the given one.
CalibrationResult calibrate(const MlpModel& model, const Dataset& data, std::span<const double> fractions,
                            std::uint64_t seed, const std::optional<TrainConfig>& retrain = std::nullopt);

// Abnormal iff output > threshold.
Label classify_output(double output, double threshold);
Label classify(const MlpModel& model, double threshold, const FeatureVector& x);

struct Confusion {
  std::size_t tp{0};
  std::size_t fn{0};
  std::size_t tn{0};
  std::size_t fp{0};

  std::size_t total() const { return tp + fn + tn + fp; }
};

struct EvalReport {
  double sensitivity{0.0};
  double specificity{0.0};
  double overall{0.0};
  Confusion confusion;
  double train_frac{0.0};
  double test_frac{0.0};
  std::uint64_t seed{0};
};

// Abnormal is the positive class.
EvalReport metrics(std::span<const Label> predictions, std::span<const Label> truths);

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

SplitIndices split_indices(std::span<const Label> labels, double train_frac, std::uint64_t seed, bool stratify);

struct ExperimentOptions {
  TrainConfig train;
  std::vector<double> calibration_fractions{kDefaultCalibrationFractions};
  bool stratify{true};
  bool recalibrate_retrain{false};
};

// Everything fitted from a training split: imputer, scaler, network and
// threshold. Nothing here may depend on held-out rows.
struct FittedPipeline {
  MlpModel model;
  TrainReport report;
  CalibrationResult calibration;
};

FittedPipeline fit_pipeline(const Dataset& train, const ExperimentOptions& opts, std::uint64_t seed);

struct SplitOutcome {
  EvalReport report;
  FittedPipeline fitted;
};

SplitOutcome run_split(const Dataset& data, double train_frac, std::uint64_t seed, const ExperimentOptions& opts);

std::vector<EvalReport> split_experiment(const Dataset& data, std::span<const double> train_fracs,
                                         std::uint64_t seed, const ExperimentOptions& opts);

}  // namespace pcg
