#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace pcg {

// Values produced by one feature extractor, in catalog order. Slots that
// could not be measured carry a provisional 0 and missing = true; they are
// filled from training-set medians before the network sees them.
struct FeatureBlock {
  std::vector<double> values;
  std::vector<bool> missing;

  explicit FeatureBlock(std::size_t n = 0) : values(n, 0.0), missing(n, false) {}

  std::size_t size() const { return values.size(); }

  void set(std::size_t i, double v) {
    if (std::isfinite(v)) {
      values[i] = v;
      missing[i] = false;
    } else {
      mark_missing(i);
    }
  }

  void mark_missing(std::size_t i) {
    values[i] = 0.0;
    missing[i] = true;
  }

  void append(const FeatureBlock& other) {
    values.insert(values.end(), other.values.begin(), other.values.end());
    missing.insert(missing.end(), other.missing.begin(), other.missing.end());
  }
};

}  // namespace pcg
