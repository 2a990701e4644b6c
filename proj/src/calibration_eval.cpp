#include "pcg/calibration_eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <unordered_map>

#include "pcg/error.hpp"
#include "pcg/rng.hpp"
#include "pcg/stats.hpp"

namespace pcg {

namespace {

constexpr std::size_t kMinClassOutputs = 30;

std::vector<double> smoothed_density(std::span<const double> v, const HistogramConfig& h, std::size_t bins) {
  std::vector<double> counts(bins, 0.0);
  for (double x : v) {
    // Values off the histogram range are counted in n but fall in no bin.
    if (!(x >= h.lo && x < h.hi)) continue;
    const auto k = std::min(static_cast<std::size_t>((x - h.lo) / h.bin_width), bins - 1);
    counts[k] += 1.0;
  }
  const double scale = 1.0 / (static_cast<double>(v.size()) * h.bin_width);
  const int half = h.smooth_bins / 2;
  std::vector<double> out(bins, 0.0);
  for (std::size_t k = 0; k < bins; ++k) {
    double s = 0.0;
    for (int o = -half; o <= half; ++o) {
      const auto j = static_cast<std::ptrdiff_t>(k) + o;
      if (j >= 0 && j < static_cast<std::ptrdiff_t>(bins)) s += counts[static_cast<std::size_t>(j)];
    }
    out[k] = s * scale / static_cast<double>(h.smooth_bins);
  }
  return out;
}

Dataset subset(const Dataset& data, std::span<const std::size_t> idx) {
  Dataset out;
  for (std::size_t i : idx) {
    out.vectors.push_back(data.vectors[i]);
    out.labels.push_back(data.labels[i]);
  }
  return out;
}

}  // namespace

TrainResult train_classifier(const Dataset& train, const TrainConfig& cfg) {
  const Imputer imputer = fit_imputer(train.vectors);
  std::vector<std::vector<double>> rows;
  rows.reserve(train.size());
  for (const FeatureVector& v : train.vectors) rows.push_back(impute(v, imputer));
  const Scaler scaler = fit_scaler(rows);

  Eigen::MatrixXd X(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(kFeatureCount));
  Eigen::VectorXd t(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const std::vector<double> z = apply_scaler(rows[r], scaler);
    for (std::size_t c = 0; c < z.size(); ++c) X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = z[c];
    t(static_cast<Eigen::Index>(r)) = train.labels[r] == Label::Abnormal ? 1.0 : -1.0;
  }
  TrainResult res = train_lm(X, t, cfg);
  res.model.scaler = scaler;
  res.model.imputer = imputer;
  return res;
}

double cross_point(std::span<const double> outputs_normal, std::span<const double> outputs_abnormal,
                   const HistogramConfig& hist) {
  if (outputs_normal.size() < kMinClassOutputs || outputs_abnormal.size() < kMinClassOutputs) {
    throw Error(Errc::InvalidArgument, "cross point needs at least 30 outputs per class");
  }
  if (!(hist.hi > hist.lo && hist.bin_width > 0.0 && hist.smooth_bins >= 1)) {
    throw Error(Errc::InvalidArgument, "bad histogram configuration");
  }
  const auto bins = static_cast<std::size_t>(std::llround((hist.hi - hist.lo) / hist.bin_width));
  const std::vector<double> dn = smoothed_density(outputs_normal, hist, bins);
  const std::vector<double> da = smoothed_density(outputs_abnormal, hist, bins);
  const auto centre = [&](std::size_t k) { return hist.lo + (static_cast<double>(k) + 0.5) * hist.bin_width; };

  const auto mode_n = static_cast<std::size_t>(std::max_element(dn.begin(), dn.end()) - dn.begin());
  const auto mode_a = static_cast<std::size_t>(std::max_element(da.begin(), da.end()) - da.begin());
  if (mode_n >= mode_a) throw Error(Errc::NoCrossing, "normal-class mode is not left of the abnormal mode");

  std::optional<double> x;
  for (std::size_t k = mode_n + 1; k <= mode_a && !x; ++k) {
    if (!(dn[k] < da[k])) continue;
    const std::size_t prev = k - 1;
    if (dn[prev] == 0.0 && da[prev] == 0.0) {
      std::size_t gap_begin = prev;
      while (gap_begin > mode_n && dn[gap_begin - 1] == 0.0 && da[gap_begin - 1] == 0.0) --gap_begin;
      x = 0.5 * (centre(gap_begin) + centre(prev));
    } else {
      const double d0 = dn[prev] - da[prev];
      const double d1 = dn[k] - da[k];
      x = centre(prev) + hist.bin_width * d0 / (d0 - d1);
    }
  }
  const double mean_n = stats::mean(outputs_normal);
  const double mean_a = stats::mean(outputs_abnormal);
  if (!x || !(*x > mean_n && *x < mean_a)) {
    throw Error(Errc::NoCrossing, "densities do not cross between the class means");
  }
  return *x;
}

Dataset join_labels(const std::vector<FeatureVector>& vectors, const std::vector<ReferenceLabel>& labels) {
  std::unordered_map<std::string, Label> by_id;
  for (const ReferenceLabel& l : labels) by_id.emplace(l.record_id, l.label);
  Dataset out;
  for (const FeatureVector& v : vectors) {
    const auto it = by_id.find(v.record_id);
    if (it == by_id.end()) continue;
    out.vectors.push_back(v);
    out.labels.push_back(it->second);
  }
  return out;
}

std::vector<double> model_outputs(const MlpModel& model, std::span<const FeatureVector> vectors) {
  std::vector<double> out;
  out.reserve(vectors.size());
  for (const FeatureVector& v : vectors) {
    out.push_back(forward(model, apply_scaler(impute(v, model.imputer), model.scaler)));
  }
  return out;
}

CalibrationResult calibrate(const MlpModel& model, const Dataset& data, std::span<const double> fractions,
                            std::uint64_t seed, const std::optional<TrainConfig>& retrain) {
  if (data.size() == 0) throw Error(Errc::InvalidArgument, "calibration needs data");
  CalibrationResult res;
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> order(data.size());
  for (double f : fractions) {
    if (!(f > 0.0 && f <= 1.0)) throw Error(Errc::InvalidArgument, "calibration fractions must lie in (0, 1]");
    std::iota(order.begin(), order.end(), 0);
    shuffle(order, rng);
    const auto m = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(f * static_cast<double>(data.size()))));
    std::vector<std::size_t> pick(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(m));
    std::sort(pick.begin(), pick.end());
    const Dataset sub = subset(data, pick);

    try {
      const std::vector<double> outputs =
          retrain ? model_outputs(train_classifier(sub, *retrain).model, sub.vectors) : model_outputs(model, sub.vectors);
      std::vector<double> normal, abnormal;
      for (std::size_t i = 0; i < outputs.size(); ++i) {
        (sub.labels[i] == Label::Abnormal ? abnormal : normal).push_back(outputs[i]);
      }
      const double cp = cross_point(normal, abnormal);
      res.fractions.push_back(f);
      res.cross_points.push_back(cp);
    } catch (const Error& e) {
      if (e.code() != Errc::NoCrossing && e.code() != Errc::InvalidArgument && e.code() != Errc::DegenerateData &&
          e.code() != Errc::TooFewVectors) {
        throw;
      }
      res.skipped_fractions.push_back(f);
    }
  }
  if (res.cross_points.empty()) throw Error(Errc::NoCrossing, "no calibration fraction produced a cross point");
  res.threshold = stats::mean(res.cross_points);
  return res;
}

Label classify_output(double output, double threshold) { return output > threshold ? Label::Abnormal : Label::Normal; }

Label classify(const MlpModel& model, double threshold, const FeatureVector& x) {
  return classify_output(model_outputs(model, std::span<const FeatureVector>(&x, 1)).front(), threshold);
}

EvalReport metrics(std::span<const Label> predictions, std::span<const Label> truths) {
  if (predictions.size() != truths.size() || truths.empty()) {
    throw Error(Errc::InvalidArgument, "predictions and truths must be equal-length and nonempty");
  }
  EvalReport r;
  for (std::size_t i = 0; i < truths.size(); ++i) {
    const bool pos = predictions[i] == Label::Abnormal;
    if (truths[i] == Label::Abnormal) {
      ++(pos ? r.confusion.tp : r.confusion.fn);
    } else {
      ++(pos ? r.confusion.fp : r.confusion.tn);
    }
  }
  if (r.confusion.tp + r.confusion.fn == 0) throw Error(Errc::NoPositives, "no abnormal records among truths");
  if (r.confusion.tn + r.confusion.fp == 0) throw Error(Errc::NoNegatives, "no normal records among truths");
  r.sensitivity = static_cast<double>(r.confusion.tp) / static_cast<double>(r.confusion.tp + r.confusion.fn);
  r.specificity = static_cast<double>(r.confusion.tn) / static_cast<double>(r.confusion.tn + r.confusion.fp);
  r.overall = (r.sensitivity + r.specificity) / 2.0;
  return r;
}

SplitIndices split_indices(std::span<const Label> labels, double train_frac, std::uint64_t seed, bool stratify) {
  if (!(train_frac > 0.0 && train_frac < 1.0)) throw Error(Errc::InvalidArgument, "train fraction must be in (0, 1)");
  std::mt19937_64 rng(seed);
  SplitIndices out;
  const auto take = [&](std::vector<std::size_t> idx) {
    shuffle(idx, rng);
    const auto m = static_cast<std::size_t>(std::llround(train_frac * static_cast<double>(idx.size())));
    out.train.insert(out.train.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(m));
    out.test.insert(out.test.end(), idx.begin() + static_cast<std::ptrdiff_t>(m), idx.end());
  };
  if (stratify) {
    std::vector<std::size_t> normal, abnormal;
    for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] == Label::Abnormal ? abnormal : normal).push_back(i);
    take(std::move(normal));
    take(std::move(abnormal));
  } else {
    std::vector<std::size_t> all(labels.size());
    std::iota(all.begin(), all.end(), 0);
    take(std::move(all));
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

FittedPipeline fit_pipeline(const Dataset& train, const ExperimentOptions& opts, std::uint64_t seed) {
  TrainConfig cfg = opts.train;
  cfg.seed = seed;
  TrainResult f = train_classifier(train, cfg);
  FittedPipeline out;
  out.calibration = calibrate(f.model, train, opts.calibration_fractions, seed,
                              opts.recalibrate_retrain ? std::optional<TrainConfig>(cfg) : std::nullopt);
  out.model = std::move(f.model);
  out.report = std::move(f.report);
  return out;
}

SplitOutcome run_split(const Dataset& data, double train_frac, std::uint64_t seed, const ExperimentOptions& opts) {
  const SplitIndices split = split_indices(data.labels, train_frac, seed, opts.stratify);
  if (split.test.empty()) throw Error(Errc::InvalidArgument, "split leaves no test records");
  const Dataset train = subset(data, split.train);
  const Dataset test = subset(data, split.test);

  SplitOutcome out;
  out.fitted = fit_pipeline(train, opts, seed);
  const std::vector<double> outputs = model_outputs(out.fitted.model, test.vectors);
  std::vector<Label> predicted;
  for (double y : outputs) predicted.push_back(classify_output(y, out.fitted.calibration.threshold));
  out.report = metrics(predicted, test.labels);
  out.report.train_frac = train_frac;
  out.report.test_frac = 1.0 - train_frac;
  out.report.seed = seed;
  return out;
}

std::vector<EvalReport> split_experiment(const Dataset& data, std::span<const double> train_fracs,
                                         std::uint64_t seed, const ExperimentOptions& opts) {
  std::vector<EvalReport> out;
  for (double f : train_fracs) out.push_back(run_split(data, f, seed, opts).report);
  return out;
}

}  // namespace pcg
