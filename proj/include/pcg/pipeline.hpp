#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pcg/calibration_eval.hpp"
#include "pcg/feature_assembly.hpp"
#include "pcg/features_higher.hpp"
#include "pcg/features_time.hpp"
#include "pcg/mlp.hpp"
#include "pcg/preprocess.hpp"
#include "pcg/segmentation.hpp"
#include "pcg/types.hpp"

namespace pcg {

struct PipelineConfig {
  PreprocessConfig preprocess;
  SegmentationConfig segmentation;
  HeartRateConfig heart_rate;
  CycloConfig cyclo;
  TrainConfig train;
  std::vector<double> calibration_fractions{kDefaultCalibrationFractions};
  bool stratify{true};
  bool recalibrate_retrain{false};
  std::uint64_t seed{0};

  void validate() const;
};

std::string config_to_json(const PipelineConfig& cfg);
// Missing keys keep their defaults; unknown keys are rejected.
PipelineConfig config_from_json(const std::string& text, PipelineConfig base = {});

// Per-group extraction failures, e.g. "energy: DegenerateEnergy: ...".
struct RecordResult {
  FeatureVector features;
  StateSequence states;
  std::vector<std::string> notes;
};

// Features of an already preprocessed recording under a given state
// sequence. Groups whose extractor fails are left to the imputer.
FeatureVector extract_features(const PcgRecording& rec, const StateSequence& seq, const PipelineConfig& cfg,
                               std::vector<std::string>* notes = nullptr);

// Preprocess, segment (or expand the annotation, whose indices are at the
// working rate) and extract. Preprocessing and segmentation errors
// propagate.
RecordResult process_recording(const PcgRecording& raw, const PipelineConfig& cfg,
                               const std::optional<StateAnnotation>& annotation = std::nullopt);

ExperimentOptions experiment_options(const PipelineConfig& cfg);

}  // namespace pcg
