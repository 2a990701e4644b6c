// Batch driver: segment, features, train, calibrate, classify, evaluate.
//
// Exit codes: 0 success (for per-record commands, at least one record
// went through), 1 total failure, 2 bad arguments or configuration.

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "pcg/calibration_eval.hpp"
#include "pcg/dataset_io.hpp"
#include "pcg/error.hpp"
#include "pcg/pipeline.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;

// Thrown for anything the user should fix on the command line.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::mutex log_mutex;

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

// One line per event: time, record, stage, outcome, optional detail.
void log_line(const std::string& record, const std::string& stage, const std::string& outcome,
              const std::string& detail = {}) {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream line;
  line << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ") << " record=" << (record.empty() ? "-" : record)
       << " stage=" << stage << " outcome=" << outcome;
  if (!detail.empty()) line << " detail=" << quoted(detail);
  std::lock_guard<std::mutex> lock(log_mutex);
  std::cerr << line.str() << '\n';
}

// Options shared by every subcommand. Unset flags leave the config file
// (or the defaults) alone.
struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  int jobs{1};
  std::optional<double> band_low, band_high, working_rate;
  std::optional<int> filter_order;
  std::optional<double> cyclo_subseq_len, cyclo_beta;
  std::optional<int> max_epochs;
  bool no_early_stop{false};
  bool no_stratify{false};
  bool recalibrate_retrain{false};
  std::vector<double> calibration_fractions;
};

void add_common(CLI::App& app, CommonFlags& f) {
  app.add_option("--config", f.config_path, "JSON pipeline configuration")->check(CLI::ExistingFile);
  app.add_option("--seed", f.seed, "seed for every random draw");
  app.add_option("--jobs", f.jobs, "worker threads for per-record work")->check(CLI::PositiveNumber);
  app.add_option("--band-low", f.band_low, "band-pass low edge (Hz)");
  app.add_option("--band-high", f.band_high, "band-pass high edge (Hz)");
  app.add_option("--working-rate", f.working_rate, "working sample rate (Hz)");
  app.add_option("--filter-order", f.filter_order, "Butterworth order per pass");
  app.add_option("--cyclo-subseq-len", f.cyclo_subseq_len, "cyclostationarity subsequence length (s)");
  app.add_option("--cyclo-beta", f.cyclo_beta, "largest cycle frequency (Hz)");
}

void add_training(CLI::App& app, CommonFlags& f) {
  app.add_option("--max-epochs", f.max_epochs, "Levenberg-Marquardt epoch limit");
  app.add_flag("--no-early-stop", f.no_early_stop, "disable validation early stopping");
}

void add_calibration(CLI::App& app, CommonFlags& f) {
  app.add_option("--calibration-fractions", f.calibration_fractions, "input fractions for the cross points");
  app.add_flag("--recalibrate-retrain", f.recalibrate_retrain, "retrain on each calibration subset");
}

pcg::PipelineConfig build_config(const CommonFlags& f) {
  try {
    pcg::PipelineConfig c;
    if (!f.config_path.empty()) c = pcg::config_from_json(pcg::read_text_file(f.config_path));
    if (f.seed) c.seed = *f.seed;
    if (f.band_low) c.preprocess.band_low_hz = *f.band_low;
    if (f.band_high) c.preprocess.band_high_hz = *f.band_high;
    if (f.working_rate) c.preprocess.working_rate_hz = *f.working_rate;
    if (f.filter_order) c.preprocess.filter_order = *f.filter_order;
    if (f.cyclo_subseq_len) c.cyclo.subsequence_len_s = *f.cyclo_subseq_len;
    if (f.cyclo_beta) c.cyclo.max_cycle_freq_hz = *f.cyclo_beta;
    if (f.max_epochs) c.train.max_epochs = *f.max_epochs;
    if (f.no_early_stop) c.train.early_stopping = false;
    if (f.no_stratify) c.stratify = false;
    if (f.recalibrate_retrain) c.recalibrate_retrain = true;
    if (!f.calibration_fractions.empty()) c.calibration_fractions = f.calibration_fractions;
    c.train.seed = c.seed;
    c.validate();
    return c;
  } catch (const pcg::Error& e) {
    throw ConfigError(e.what());
  }
}

std::string config_header(const pcg::PipelineConfig& c) { return "config: " + pcg::config_to_json(c); }

std::vector<fs::path> wav_inputs(const fs::path& in) {
  if (!fs::exists(in)) throw ConfigError("input does not exist: " + in.string());
  if (!fs::is_directory(in)) return {in};
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(in)) {
    std::string ext = e.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
    if (e.is_regular_file() && ext == ".wav") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Runs fn(i) for i in [0, n) on `jobs` threads.
template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn fn) {
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) fn(i);
  };
  const auto extra = static_cast<std::size_t>(std::max(1, jobs)) - 1;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < std::min(extra, n); ++t) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();
}

std::optional<pcg::StateAnnotation> annotation_for(const std::string& use_annotation, const fs::path& wav,
                                                    bool single_input) {
  if (use_annotation.empty()) return std::nullopt;
  const fs::path p = single_input ? fs::path(use_annotation) : fs::path(use_annotation) / (wav.stem().string() + ".csv");
  pcg::StateAnnotation ann = pcg::load_annotation(p);
  ann.record_id = wav.stem().string();
  return ann;
}

// Processes every WAV under `in`; failures are logged and skipped.
std::vector<pcg::RecordResult> process_inputs(const fs::path& in, const pcg::PipelineConfig& cfg, int jobs,
                                              const std::string& use_annotation, const char* stage) {
  const std::vector<fs::path> files = wav_inputs(in);
  const bool single = !fs::is_directory(in);
  std::vector<std::optional<pcg::RecordResult>> slots(files.size());
  parallel_for(files.size(), jobs, [&](std::size_t i) {
    const std::string id = files[i].stem().string();
    try {
      const pcg::PcgRecording rec = pcg::load_recording(files[i]);
      pcg::RecordResult r = pcg::process_recording(rec, cfg, annotation_for(use_annotation, files[i], single));
      for (const std::string& n : r.notes) log_line(id, stage, "imputed", n);
      log_line(id, stage, "ok", std::to_string(r.features.imputed_count()) + " imputed slots");
      slots[i] = std::move(r);
    } catch (const pcg::Error& e) {
      log_line(id, stage, "skip", e.what());
    }
  });
  std::vector<pcg::RecordResult> out;
  for (auto& s : slots) {
    if (s) out.push_back(std::move(*s));
  }
  std::sort(out.begin(), out.end(),
            [](const pcg::RecordResult& a, const pcg::RecordResult& b) { return a.features.record_id < b.features.record_id; });
  log_line("", stage, "summary",
           std::to_string(out.size()) + " of " + std::to_string(files.size()) + " records processed");
  return out;
}

pcg::Dataset load_dataset(const fs::path& features, const fs::path& labels) {
  pcg::Dataset d = pcg::join_labels(pcg::read_feature_table(features), pcg::load_reference(labels));
  log_line("", "load", "ok", std::to_string(d.size()) + " labelled feature rows");
  return d;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw pcg::Error(pcg::Errc::Io, "cannot write " + path.string());
  out << std::setprecision(17);
  return out;
}

const char* label_name(pcg::Label l) { return l == pcg::Label::Abnormal ? "abnormal" : "normal"; }

std::string pct(double f) { return std::to_string(static_cast<int>(std::lround(f * 100.0))); }

// ---- subcommands ----

int cmd_segment(const CommonFlags& f, const fs::path& in, const fs::path& out) {
  const pcg::PipelineConfig cfg = build_config(f);
  const std::vector<fs::path> files = wav_inputs(in);
  const bool single = !fs::is_directory(in);
  const fs::path out_dir = single ? out.parent_path() : out;
  if (!out_dir.empty()) fs::create_directories(out_dir);
  std::atomic<std::size_t> ok{0};
  parallel_for(files.size(), f.jobs, [&](std::size_t i) {
    const std::string id = files[i].stem().string();
    try {
      const pcg::PcgRecording rec = pcg::preprocess(pcg::load_recording(files[i]), cfg.preprocess);
      pcg::StateAnnotation ann = pcg::to_annotation(pcg::segment(rec, cfg.segmentation));
      ann.record_id = id;
      pcg::save_annotation(ann, single ? out : out / (id + ".csv"), config_header(cfg));
      log_line(id, "segment", "ok", std::to_string(ann.events.size()) + " state onsets");
      ++ok;
    } catch (const pcg::Error& e) {
      log_line(id, "segment", "skip", e.what());
    }
  });
  log_line("", "segment", "summary", std::to_string(ok.load()) + " of " + std::to_string(files.size()) + " records");
  return ok > 0 ? kExitOk : kExitFailure;
}

int cmd_features(const CommonFlags& f, const fs::path& in, const fs::path& out, const std::string& use_annotation) {
  const pcg::PipelineConfig cfg = build_config(f);
  const std::vector<pcg::RecordResult> results = process_inputs(in, cfg, f.jobs, use_annotation, "features");
  if (results.empty()) return kExitFailure;
  std::vector<pcg::FeatureVector> rows;
  for (const pcg::RecordResult& r : results) rows.push_back(r.features);
  pcg::write_feature_table(rows, out, config_header(cfg));
  return kExitOk;
}

int cmd_train(const CommonFlags& f, const fs::path& features, const fs::path& labels, const fs::path& out) {
  const pcg::PipelineConfig cfg = build_config(f);
  const pcg::Dataset data = load_dataset(features, labels);
  const pcg::TrainResult r = pcg::train_classifier(data, cfg.train);
  for (const pcg::EpochRecord& e : r.report.epochs) {
    std::ostringstream d;
    d << std::setprecision(6) << "epoch " << e.epoch << " train_mse " << e.train_mse << " val_mse " << e.val_mse
      << " lambda " << e.lambda;
    log_line("", "train", "epoch", d.str());
  }
  pcg::MlpModel model = r.model;
  model.rng_seed = cfg.seed;
  pcg::save_model(model, out, pcg::config_to_json(cfg));
  log_line("", "train", "ok", "stopped on " + pcg::stop_reason_name(r.report.stop));
  return kExitOk;
}

int cmd_calibrate(const CommonFlags& f, const fs::path& model_path, const fs::path& features, const fs::path& labels,
                  const fs::path& out) {
  const pcg::PipelineConfig cfg = build_config(f);
  const pcg::MlpModel model = pcg::load_model(model_path);
  const pcg::Dataset data = load_dataset(features, labels);
  const pcg::CalibrationResult cal =
      pcg::calibrate(model, data, cfg.calibration_fractions, cfg.seed,
                     cfg.recalibrate_retrain ? std::optional<pcg::TrainConfig>(cfg.train) : std::nullopt);
  for (double s : cal.skipped_fractions) log_line("", "calibrate", "skip", "fraction " + pct(s) + "% has no cross point");
  for (std::size_t i = 0; i < cal.fractions.size(); ++i) {
    std::ostringstream d;
    d << "fraction " << pct(cal.fractions[i]) << "% cross point " << cal.cross_points[i];
    log_line("", "calibrate", "ok", d.str());
  }
  pcg::save_calibration(cal, out, pcg::config_to_json(cfg));
  std::cout << std::setprecision(17) << cal.threshold << '\n';
  return kExitOk;
}

double resolve_threshold(const std::string& threshold, const std::string& calibration) {
  if (!threshold.empty() && !calibration.empty()) throw ConfigError("give --threshold or --calibration, not both");
  if (!calibration.empty()) return pcg::load_calibration(calibration).threshold;
  if (threshold.empty()) throw ConfigError("classify needs --threshold or --calibration");
  if (threshold == "paper") return pcg::kPublishedThreshold;
  try {
    std::size_t used = 0;
    const double v = std::stod(threshold, &used);
    if (used == threshold.size() && std::isfinite(v)) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError("--threshold must be a number or 'paper'");
}

int cmd_classify(const CommonFlags& f, const fs::path& model_path, const std::string& threshold_arg,
                 const std::string& calibration, const std::string& in, const std::string& features,
                 const std::string& use_annotation, const std::string& out_path) {
  const pcg::PipelineConfig cfg = build_config(f);
  const double threshold = resolve_threshold(threshold_arg, calibration);
  if (in.empty() == features.empty()) throw ConfigError("classify needs exactly one of --in or --features");
  const pcg::MlpModel model = pcg::load_model(model_path);

  std::vector<pcg::FeatureVector> rows;
  if (!features.empty()) {
    rows = pcg::read_feature_table(features);
  } else {
    for (pcg::RecordResult& r : process_inputs(in, cfg, f.jobs, use_annotation, "classify")) {
      rows.push_back(std::move(r.features));
    }
  }
  if (rows.empty()) return kExitFailure;
  const std::vector<double> outputs = pcg::model_outputs(model, rows);

  std::ofstream file;
  if (!out_path.empty()) file = open_out(out_path);
  std::ostream& out = out_path.empty() ? std::cout : file;
  out << std::setprecision(17) << "# threshold: " << threshold << "\n# " << config_header(cfg) << '\n'
      << "record_id,output,label\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out << rows[i].record_id << ',' << outputs[i] << ',' << label_name(pcg::classify_output(outputs[i], threshold))
        << '\n';
  }
  return kExitOk;
}

int cmd_evaluate(const CommonFlags& f, const fs::path& features, const fs::path& labels,
                 std::vector<double> train_fracs, const fs::path& out, fs::path cross_out) {
  const pcg::PipelineConfig cfg = build_config(f);
  if (train_fracs.empty()) train_fracs = {0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  for (double t : train_fracs) {
    if (!(t > 0.0 && t < 1.0)) throw ConfigError("--train-frac values must lie in (0, 1)");
  }
  if (cross_out.empty()) cross_out = out.parent_path() / (out.stem().string() + "_cross_points.csv");
  const pcg::Dataset data = load_dataset(features, labels);
  const pcg::ExperimentOptions opts = pcg::experiment_options(cfg);

  std::ofstream report = open_out(out);
  std::ofstream cross = open_out(cross_out);
  report << "# " << config_header(cfg) << '\n'
         << "train_pct,test_pct,sensitivity,specificity,overall,tp,fn,tn,fp,threshold,seed\n";
  cross << "# " << config_header(cfg) << '\n' << "train_pct,input_pct,cross_point,threshold\n";
  std::size_t done = 0;
  for (double t : train_fracs) {
    try {
      const pcg::SplitOutcome s = pcg::run_split(data, t, cfg.seed, opts);
      const pcg::EvalReport& r = s.report;
      const pcg::CalibrationResult& cal = s.fitted.calibration;
      report << pct(r.train_frac) << ',' << pct(r.test_frac) << ',' << r.sensitivity << ',' << r.specificity << ','
             << r.overall << ',' << r.confusion.tp << ',' << r.confusion.fn << ',' << r.confusion.tn << ','
             << r.confusion.fp << ',' << cal.threshold << ',' << r.seed << '\n';
      for (std::size_t i = 0; i < cal.fractions.size(); ++i) {
        cross << pct(t) << ',' << pct(cal.fractions[i]) << ',' << cal.cross_points[i] << ',' << cal.threshold << '\n';
      }
      for (double sk : cal.skipped_fractions) cross << pct(t) << ',' << pct(sk) << ",," << cal.threshold << '\n';
      std::ostringstream d;
      d << std::setprecision(4) << "Se " << r.sensitivity << " Sp " << r.specificity << " overall " << r.overall;
      log_line("", "evaluate", "ok", "train " + pct(t) + "%: " + d.str());
      ++done;
    } catch (const pcg::Error& e) {
      log_line("", "evaluate", "fail", "train " + pct(t) + "%: " + e.what());
    }
  }
  return done > 0 ? kExitOk : kExitFailure;
}

int run(int argc, char** argv) {
  CLI::App app{"Phonocardiogram normal/abnormal classification pipeline"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);
  CommonFlags flags;
  std::string in, out, features, labels, model, threshold, calibration, use_annotation, cross_out;
  std::vector<double> train_fracs;

  CLI::App* segment = app.add_subcommand("segment", "write state annotations for WAV recordings");
  add_common(*segment, flags);
  segment->add_option("--in", in, "WAV file or directory")->required();
  segment->add_option("--out", out, "annotation CSV (or directory for a directory input)")->required();

  CLI::App* feat = app.add_subcommand("features", "extract the 324-feature table");
  add_common(*feat, flags);
  feat->add_option("--in", in, "WAV file or directory")->required();
  feat->add_option("--out", out, "feature table CSV")->required();
  feat->add_option("--use-annotation", use_annotation, "annotation CSV (or directory of <id>.csv) instead of segmenting");

  CLI::App* train = app.add_subcommand("train", "fit imputer, scaler and network");
  add_common(*train, flags);
  add_training(*train, flags);
  train->add_option("--features", features, "feature table CSV")->required()->check(CLI::ExistingFile);
  train->add_option("--labels", labels, "reference CSV")->required()->check(CLI::ExistingFile);
  train->add_option("--out", out, "model JSON")->required();

  CLI::App* calib = app.add_subcommand("calibrate", "compute the cross-point threshold");
  add_common(*calib, flags);
  add_training(*calib, flags);
  add_calibration(*calib, flags);
  calib->add_option("--model", model, "model JSON")->required()->check(CLI::ExistingFile);
  calib->add_option("--features", features, "feature table CSV")->required()->check(CLI::ExistingFile);
  calib->add_option("--labels", labels, "reference CSV")->required()->check(CLI::ExistingFile);
  calib->add_option("--out", out, "calibration JSON")->required();

  CLI::App* cls = app.add_subcommand("classify", "label recordings or feature rows");
  add_common(*cls, flags);
  cls->add_option("--model", model, "model JSON")->required()->check(CLI::ExistingFile);
  cls->add_option("--threshold", threshold, "decision threshold, or 'paper' for the published value");
  cls->add_option("--calibration", calibration, "calibration JSON providing the threshold")->check(CLI::ExistingFile);
  cls->add_option("--in", in, "WAV file or directory");
  cls->add_option("--features", features, "feature table CSV")->check(CLI::ExistingFile);
  cls->add_option("--use-annotation", use_annotation, "annotation CSV (or directory of <id>.csv)");
  cls->add_option("--out", out, "predictions CSV (default stdout)");

  CLI::App* eval = app.add_subcommand("evaluate", "split experiments with per-split calibration");
  add_common(*eval, flags);
  add_training(*eval, flags);
  add_calibration(*eval, flags);
  eval->add_flag("--no-stratify", flags.no_stratify, "split without stratifying by label");
  eval->add_option("--features", features, "feature table CSV")->required()->check(CLI::ExistingFile);
  eval->add_option("--labels", labels, "reference CSV")->required()->check(CLI::ExistingFile);
  eval->add_option("--train-frac", train_fracs, "training fractions (default 0.3 to 0.9)");
  eval->add_option("--out", out, "split report CSV")->required();
  eval->add_option("--cross-points", cross_out, "cross-point table CSV (default <out>_cross_points.csv)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*segment) return cmd_segment(flags, in, out);
    if (*feat) return cmd_features(flags, in, out, use_annotation);
    if (*train) return cmd_train(flags, features, labels, out);
    if (*calib) return cmd_calibrate(flags, model, features, labels, out);
    if (*cls) return cmd_classify(flags, model, threshold, calibration, in, features, use_annotation, out);
    if (*eval) return cmd_evaluate(flags, features, labels, train_fracs, out, cross_out);
  } catch (const ConfigError& e) {
    log_line("", "config", "error", e.what());
    return kExitConfig;
  } catch (const pcg::Error& e) {
    log_line("", "run", "error", e.what());
    return kExitFailure;
  } catch (const std::exception& e) {
    log_line("", "run", "error", e.what());
    return kExitFailure;
  }
  return kExitConfig;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
