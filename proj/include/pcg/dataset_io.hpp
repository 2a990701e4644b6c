#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pcg/calibration_eval.hpp"
#include "pcg/feature_assembly.hpp"
#include "pcg/mlp.hpp"
#include "pcg/types.hpp"

namespace pcg {

namespace fs = std::filesystem;

inline constexpr int kSchemaVersion = 1;

// 16-bit PCM mono RIFF/WAVE. Samples are scaled by 1/32768. The record id
// is the file stem.
PcgRecording load_recording(const fs::path& path);

// Writes 16-bit PCM mono; values are rounded to the nearest code and
// clipped to [-32768, 32767].
void save_recording(const PcgRecording& rec, const fs::path& path);

// Headerless `record_id,label` rows with label in {-1, 1}.
std::vector<ReferenceLabel> load_reference(const fs::path& path);
std::vector<ReferenceLabel> parse_reference(const std::string& text);

// Checks that indices strictly increase and states follow
// S1 -> Sys -> S2 -> Dia -> S1.
void validate_annotation_events(std::span<const StateEvent> events);

// CSV with header `sample_index,state`. Lines starting with '#' are
// comments.
StateAnnotation load_annotation(const fs::path& path);
StateAnnotation parse_annotation(const std::string& text, std::string record_id);
void save_annotation(const StateAnnotation& ann, const fs::path& path, const std::string& comment = {});

// Model and calibration files are JSON with a schema_version field.
// Doubles are written in shortest round-trip form, so reloading is exact.
void save_model(const MlpModel& model, const fs::path& path, const std::string& config_json = {});
MlpModel load_model(const fs::path& path);
std::string model_to_json(const MlpModel& model, const std::string& config_json = {});
MlpModel model_from_json(const std::string& text);

void save_calibration(const CalibrationResult& cal, const fs::path& path, const std::string& config_json = {});
CalibrationResult load_calibration(const fs::path& path);

// Feature table: header `record_id,<324 names>`, one row per recording,
// values at 17 significant digits, imputed slots left empty.
void write_feature_table(std::span<const FeatureVector> rows, const fs::path& path,
                         const std::string& comment = {});
std::vector<FeatureVector> read_feature_table(const fs::path& path);

std::string read_text_file(const fs::path& path);

}  // namespace pcg
