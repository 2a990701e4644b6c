#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pcg/feature_block.hpp"

namespace pcg {

inline constexpr std::size_t kFeatureCount = 324;

struct FeatureGroup {
  std::string_view name;
  std::size_t offset{0};
  std::size_t count{0};
};

// Group layout of the catalog, in order: interval, energy, frequency
// spectrum, heart rate, heart-rate-sequence spectrum, kurtosis,
// cyclostationarity, power spectral density, heart-rate-sequence PSD.
const std::array<FeatureGroup, 9>& feature_groups();

// The 324 canonical feature names in vector order.
const std::vector<std::string>& feature_catalog();

struct FeatureVector {
  std::string record_id;
  std::vector<double> values;      // kFeatureCount, finite
  std::vector<bool> imputed_mask;  // kFeatureCount

  std::size_t imputed_count() const;
};

// Outputs of the feature extractors; nullopt marks a group whose extractor
// failed, and every slot of that group is then imputed.
struct FeatureParts {
  std::optional<FeatureBlock> interval;
  std::optional<FeatureBlock> energy;
  std::optional<FeatureBlock> spectrum;
  std::optional<FeatureBlock> heart_rate;
  std::optional<FeatureBlock> sequence_spectrum;
  std::optional<FeatureBlock> kurtosis;
  std::optional<FeatureBlock> cyclostationarity;
  std::optional<FeatureBlock> psd;
  std::optional<FeatureBlock> sequence_psd;
};

// Places each group at its catalog offset. Missing or non-finite slots hold
// 0 and are flagged in imputed_mask.
FeatureVector assemble(std::string record_id, const FeatureParts& parts);

// Per-slot medians of the non-imputed training values (0 when a slot was
// never observed).
struct Imputer {
  std::vector<double> median;
};

Imputer fit_imputer(std::span<const FeatureVector> train);

// Values with flagged slots replaced by the stored medians.
std::vector<double> impute(const FeatureVector& v, const Imputer& imputer);

struct Scaler {
  std::vector<double> mean;
  std::vector<double> std;  // floored at kStdFloor
};

inline constexpr double kStdFloor = 1e-8;

// Z-score statistics with the sample SD. Throws Errc::TooFewVectors for
// fewer than two rows.
Scaler fit_scaler(std::span<const std::vector<double>> rows);

std::vector<double> apply_scaler(std::span<const double> v, const Scaler& scaler);

}  // namespace pcg
