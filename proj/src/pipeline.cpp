#include "pcg/pipeline.hpp"

#include <json.hpp>

#include <set>

#include "pcg/error.hpp"
#include "pcg/features_sequence.hpp"
#include "pcg/features_spectral.hpp"

namespace pcg {

using json = nlohmann::json;

namespace {

// Reads known keys of one JSON object into fields, rejecting any others.
class Reader {
 public:
  Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw Error(Errc::InvalidArgument, where_ + ": expected an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw Error(Errc::InvalidArgument, where_ + "." + key + ": " + e.what());
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw Error(Errc::InvalidArgument, where_ + ": unknown key '" + key + "'");
    }
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

std::string note(const char* group, const Error& e) { return std::string(group) + ": " + e.what(); }

}  // namespace

void PipelineConfig::validate() const {
  preprocess.validate();
  segmentation.validate();
  cyclo.validate();
  train.validate();
  if (!(heart_rate.window_s > 0.0 && heart_rate.overlap >= 0.0 && heart_rate.overlap < 1.0 &&
        heart_rate.min_period_s > 0.0 && heart_rate.max_period_s > heart_rate.min_period_s)) {
    throw Error(Errc::InvalidArgument, "heart-rate configuration out of range");
  }
  if (calibration_fractions.empty()) throw Error(Errc::InvalidArgument, "no calibration fractions");
  for (double f : calibration_fractions) {
    if (!(f > 0.0 && f <= 1.0)) throw Error(Errc::InvalidArgument, "calibration fractions must lie in (0, 1]");
  }
  if (preprocess.working_rate_hz / 2.0 <= 290.0) {
    throw Error(Errc::InvalidArgument, "working rate must exceed twice the 290 Hz top spectral grid frequency");
  }
}

std::string config_to_json(const PipelineConfig& c) {
  json j;
  j["preprocess"] = {{"working_rate_hz", c.preprocess.working_rate_hz},
                     {"band_low_hz", c.preprocess.band_low_hz},
                     {"band_high_hz", c.preprocess.band_high_hz},
                     {"filter_order", c.preprocess.filter_order},
                     {"edge_pad_s", c.preprocess.edge_pad_s}};
  json bounds = json::object();
  for (std::size_t s = 0; s < kNumStates; ++s) {
    const DurationBounds& b = c.segmentation.state_duration_bounds[s];
    bounds[std::string(state_name(static_cast<HeartState>(s)))] = {b.min_s, b.max_s};
  }
  j["segmentation"] = {{"envelope_lowpass_hz", c.segmentation.envelope_lowpass_hz},
                       {"state_duration_bounds", bounds},
                       {"hr_low_bpm", c.segmentation.hr_low_bpm},
                       {"hr_high_bpm", c.segmentation.hr_high_bpm},
                       {"frame_rate_hz", c.segmentation.frame_rate_hz},
                       {"emission_iterations", c.segmentation.emission_iterations}};
  j["heart_rate"] = {{"window_s", c.heart_rate.window_s},
                     {"overlap", c.heart_rate.overlap},
                     {"min_period_s", c.heart_rate.min_period_s},
                     {"max_period_s", c.heart_rate.max_period_s},
                     {"envelope_lowpass_hz", c.heart_rate.envelope_lowpass_hz},
                     {"min_peak_correlation", c.heart_rate.min_peak_correlation}};
  j["cyclo"] = {{"subsequence_len_s", c.cyclo.subsequence_len_s},
                {"max_cycle_freq_hz", c.cyclo.max_cycle_freq_hz},
                {"envelope_cutoff_hz", c.cyclo.envelope_cutoff_hz},
                {"min_cycle_freq_hz", c.cyclo.min_cycle_freq_hz}};
  j["train"] = {{"max_epochs", c.train.max_epochs},   {"mse_goal", c.train.mse_goal},
                {"lambda_init", c.train.lambda_init}, {"lambda_up", c.train.lambda_up},
                {"lambda_down", c.train.lambda_down}, {"lambda_max", c.train.lambda_max},
                {"val_fraction", c.train.val_fraction}, {"patience", c.train.patience},
                {"early_stopping", c.train.early_stopping}};
  j["calibration_fractions"] = c.calibration_fractions;
  j["stratify"] = c.stratify;
  j["recalibrate_retrain"] = c.recalibrate_retrain;
  j["seed"] = c.seed;
  return j.dump();
}

PipelineConfig config_from_json(const std::string& text, PipelineConfig c) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(Errc::InvalidArgument, std::string("config: ") + e.what());
  }
  Reader top(j, "config");
  if (const json* p = top.child("preprocess")) {
    Reader r(*p, "preprocess");
    r.get("working_rate_hz", c.preprocess.working_rate_hz);
    r.get("band_low_hz", c.preprocess.band_low_hz);
    r.get("band_high_hz", c.preprocess.band_high_hz);
    r.get("filter_order", c.preprocess.filter_order);
    r.get("edge_pad_s", c.preprocess.edge_pad_s);
    r.finish();
  }
  if (const json* p = top.child("segmentation")) {
    Reader r(*p, "segmentation");
    r.get("envelope_lowpass_hz", c.segmentation.envelope_lowpass_hz);
    r.get("hr_low_bpm", c.segmentation.hr_low_bpm);
    r.get("hr_high_bpm", c.segmentation.hr_high_bpm);
    r.get("frame_rate_hz", c.segmentation.frame_rate_hz);
    r.get("emission_iterations", c.segmentation.emission_iterations);
    if (const json* b = r.child("state_duration_bounds")) {
      Reader rb(*b, "state_duration_bounds");
      for (std::size_t s = 0; s < kNumStates; ++s) {
        const std::string name(state_name(static_cast<HeartState>(s)));
        std::array<double, 2> pair{c.segmentation.state_duration_bounds[s].min_s,
                                   c.segmentation.state_duration_bounds[s].max_s};
        rb.get(name.c_str(), pair);
        c.segmentation.state_duration_bounds[s] = {pair[0], pair[1]};
      }
      rb.finish();
    }
    r.finish();
  }
  if (const json* p = top.child("heart_rate")) {
    Reader r(*p, "heart_rate");
    r.get("window_s", c.heart_rate.window_s);
    r.get("overlap", c.heart_rate.overlap);
    r.get("min_period_s", c.heart_rate.min_period_s);
    r.get("max_period_s", c.heart_rate.max_period_s);
    r.get("envelope_lowpass_hz", c.heart_rate.envelope_lowpass_hz);
    r.get("min_peak_correlation", c.heart_rate.min_peak_correlation);
    r.finish();
  }
  if (const json* p = top.child("cyclo")) {
    Reader r(*p, "cyclo");
    r.get("subsequence_len_s", c.cyclo.subsequence_len_s);
    r.get("max_cycle_freq_hz", c.cyclo.max_cycle_freq_hz);
    r.get("envelope_cutoff_hz", c.cyclo.envelope_cutoff_hz);
    r.get("min_cycle_freq_hz", c.cyclo.min_cycle_freq_hz);
    r.finish();
  }
  if (const json* p = top.child("train")) {
    Reader r(*p, "train");
    r.get("max_epochs", c.train.max_epochs);
    r.get("mse_goal", c.train.mse_goal);
    r.get("lambda_init", c.train.lambda_init);
    r.get("lambda_up", c.train.lambda_up);
    r.get("lambda_down", c.train.lambda_down);
    r.get("lambda_max", c.train.lambda_max);
    r.get("val_fraction", c.train.val_fraction);
    r.get("patience", c.train.patience);
    r.get("early_stopping", c.train.early_stopping);
    r.finish();
  }
  top.get("calibration_fractions", c.calibration_fractions);
  top.get("stratify", c.stratify);
  top.get("recalibrate_retrain", c.recalibrate_retrain);
  top.get("seed", c.seed);
  top.finish();
  c.train.seed = c.seed;
  return c;
}

FeatureVector extract_features(const PcgRecording& rec, const StateSequence& seq, const PipelineConfig& cfg,
                               std::vector<std::string>* notes) {
  std::vector<std::string> local;
  std::vector<std::string>& log = notes ? *notes : local;
  FeatureParts parts;

  BeatTable beats;
  try {
    beats = to_beats(seq);
  } catch (const Error& e) {
    log.push_back(note("beats", e));
  }

  // Runs one extractor; a pcg::Error leaves its group to the imputer.
  const auto attempt = [&log](const char* group, std::optional<FeatureBlock>& slot, auto&& fn) {
    try {
      slot = fn();
    } catch (const Error& e) {
      log.push_back(note(group, e));
    }
  };

  attempt("interval", parts.interval, [&] { return interval_features(beats, rec); });
  attempt("energy", parts.energy, [&] { return energy_features(seq, rec); });
  attempt("spectrum", parts.spectrum, [&] { return spectrum_features(beats, rec); });
  attempt("psd", parts.psd, [&] { return psd_features(beats, rec); });
  attempt("heart_rate", parts.heart_rate, [&] {
    const HeartRateEstimate hr = heart_rate_features(rec, cfg.heart_rate);
    FeatureBlock b(kHeartRateFeatureCount);
    b.set(0, hr.m_hr);
    if (hr.windows >= 2) {
      b.set(1, hr.sd_hr);
    } else {
      b.mark_missing(1);
    }
    return b;
  });
  std::optional<SequenceFeatures> seqf;
  try {
    seqf = sequence_features(beats, rec.sample_rate_hz);
  } catch (const Error& e) {
    log.push_back(note("sequence", e));
  }
  if (seqf) {
    parts.sequence_spectrum = seqf->spectrum;
    parts.sequence_psd = seqf->psd;
  }
  attempt("kurtosis", parts.kurtosis, [&] { return kurtosis_features(beats, rec); });
  attempt("cyclostationarity", parts.cyclostationarity, [&] { return cyclostationarity_features(rec, cfg.cyclo); });

  return assemble(rec.record_id, parts);
}

RecordResult process_recording(const PcgRecording& raw, const PipelineConfig& cfg,
                               const std::optional<StateAnnotation>& annotation) {
  const PcgRecording rec = preprocess(raw, cfg.preprocess);
  RecordResult out;
  out.states = annotation ? from_annotation(*annotation, rec.samples.size(), rec.sample_rate_hz)
                          : segment(rec, cfg.segmentation);
  out.states.record_id = rec.record_id;
  out.features = extract_features(rec, out.states, cfg, &out.notes);
  return out;
}

ExperimentOptions experiment_options(const PipelineConfig& cfg) {
  ExperimentOptions o;
  o.train = cfg.train;
  o.train.seed = cfg.seed;
  o.calibration_fractions = cfg.calibration_fractions;
  o.stratify = cfg.stratify;
  o.recalibrate_retrain = cfg.recalibrate_retrain;
  return o;
}

}  // namespace pcg
