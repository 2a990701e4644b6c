#include "pcg/feature_assembly.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "pcg/error.hpp"
#include "pcg/stats.hpp"

namespace pcg {

namespace {

std::string hz_label(double f) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", f);
  return buf;
}

void add_mean_sd(std::vector<std::string>& out, const std::string& stem) {
  out.push_back("m_" + stem);
  out.push_back("sd_" + stem);
}

std::vector<std::string> build_catalog() {
  std::vector<std::string> n;
  n.reserve(kFeatureCount);

  for (const char* stem : {"RR", "IntS1", "IntS2", "IntSys", "IntDia", "Ratio_SysRR", "Ratio_DiaRR", "Ratio_SysDia",
                           "Amp_SysS1", "Amp_DiaS2", "Ratio_IntS1S2"}) {
    add_mean_sd(n, stem);
  }

  for (const char* name : {"Ratio_energy_HSTotal", "Ratio_magnitude_HSTotal", "Ratio_energy_HSRemain",
                           "Ratio_magnitude_HSRemain", "m_Ratio_energy_SysCycle", "sd_energy_SysCycle",
                           "m_Ratio_energy_DiaCycle", "sd_energy_DiaCycle", "m_Ratio_HSCycle", "sd_energy_HSCycle"}) {
    n.emplace_back(name);
  }

  const auto segment_grid = [&n](const std::string& prefix) {
    for (const char* state : {"S1", "S2"}) {
      for (int f = 10; f <= 120; f += 10) n.push_back(prefix + state + "_" + std::to_string(f));
    }
    for (const char* state : {"Sys", "Dia"}) {
      for (int f = 10; f <= 290; f += 10) n.push_back(prefix + state + "_" + std::to_string(f));
    }
  };
  const auto sequence_grid = [&n](const std::string& prefix) {
    for (const char* seq : {"HR", "Sys", "Dia"}) {
      for (int k = 1; k <= 19; ++k) n.push_back(prefix + seq + "_seq_" + hz_label(k * 0.05));
    }
  };

  segment_grid("m_Fre_Spec_");
  n.emplace_back("m_HR");
  n.emplace_back("sd_HR");
  sequence_grid("spec_");
  for (const char* state : {"S1", "S2", "Sys", "Dia"}) add_mean_sd(n, std::string(state) + "_kurtosis");
  add_mean_sd(n, "cyclostationarity_1");
  add_mean_sd(n, "cyclostationarity_2");
  segment_grid("m_Pow_Spec_");
  sequence_grid("Pow_spec_");
  return n;
}

}  // namespace

const std::array<FeatureGroup, 9>& feature_groups() {
  static const std::array<FeatureGroup, 9> groups = [] {
    std::array<FeatureGroup, 9> g{{{"interval", 0, 22},
                                   {"energy", 0, 10},
                                   {"spectrum", 0, 82},
                                   {"heart_rate", 0, 2},
                                   {"sequence_spectrum", 0, 57},
                                   {"kurtosis", 0, 8},
                                   {"cyclostationarity", 0, 4},
                                   {"psd", 0, 82},
                                   {"sequence_psd", 0, 57}}};
    std::size_t offset = 0;
    for (FeatureGroup& group : g) {
      group.offset = offset;
      offset += group.count;
    }
    return g;
  }();
  return groups;
}

const std::vector<std::string>& feature_catalog() {
  static const std::vector<std::string> catalog = build_catalog();
  return catalog;
}

std::size_t FeatureVector::imputed_count() const {
  return static_cast<std::size_t>(std::count(imputed_mask.begin(), imputed_mask.end(), true));
}

FeatureVector assemble(std::string record_id, const FeatureParts& parts) {
  FeatureVector v;
  v.record_id = std::move(record_id);
  v.values.assign(kFeatureCount, 0.0);
  v.imputed_mask.assign(kFeatureCount, true);

  const std::array<const std::optional<FeatureBlock>*, 9> blocks{
      &parts.interval, &parts.energy,         &parts.spectrum, &parts.heart_rate,  &parts.sequence_spectrum,
      &parts.kurtosis, &parts.cyclostationarity, &parts.psd,   &parts.sequence_psd};
  const auto& groups = feature_groups();
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto& block = *blocks[g];
    if (!block) continue;
    if (block->size() != groups[g].count) {
      throw Error(Errc::InvalidArgument, std::string(groups[g].name) + " block has " +
                                             std::to_string(block->size()) + " values, expected " +
                                             std::to_string(groups[g].count));
    }
    for (std::size_t i = 0; i < block->size(); ++i) {
      const double x = block->values[i];
      if (block->missing[i] || !std::isfinite(x)) continue;
      v.values[groups[g].offset + i] = x;
      v.imputed_mask[groups[g].offset + i] = false;
    }
  }
  return v;
}

Imputer fit_imputer(std::span<const FeatureVector> train) {
  Imputer imp;
  imp.median.assign(kFeatureCount, 0.0);
  std::vector<double> column;
  column.reserve(train.size());
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    column.clear();
    for (const FeatureVector& v : train) {
      if (!v.imputed_mask[i]) column.push_back(v.values[i]);
    }
    if (!column.empty()) imp.median[i] = stats::median(column);
  }
  return imp;
}

std::vector<double> impute(const FeatureVector& v, const Imputer& imputer) {
  if (imputer.median.size() != v.values.size()) {
    throw Error(Errc::SchemaMismatch, "imputer size does not match feature vector");
  }
  std::vector<double> out = v.values;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (v.imputed_mask[i]) out[i] = imputer.median[i];
  }
  return out;
}

Scaler fit_scaler(std::span<const std::vector<double>> rows) {
  if (rows.size() < 2) throw Error(Errc::TooFewVectors, "scaler needs at least two vectors");
  const std::size_t d = rows.front().size();
  Scaler s;
  s.mean.assign(d, 0.0);
  s.std.assign(d, 0.0);
  std::vector<double> column(rows.size());
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != d) throw Error(Errc::InvalidArgument, "ragged rows passed to fit_scaler");
      column[r] = rows[r][i];
    }
    const stats::MeanSd ms = stats::summarize(column);
    // A constant column must scale to exactly 0, whatever rounding the mean picked up.
    s.mean[i] = ms.sd == 0.0 ? column.front() : ms.mean;
    s.std[i] = std::max(ms.sd, kStdFloor);
  }
  return s;
}

std::vector<double> apply_scaler(std::span<const double> v, const Scaler& scaler) {
  if (v.size() != scaler.mean.size()) throw Error(Errc::SchemaMismatch, "scaler size does not match input");
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = (v[i] - scaler.mean[i]) / scaler.std[i];
  return out;
}

}  // namespace pcg
