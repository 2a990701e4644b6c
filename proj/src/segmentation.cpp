#include "pcg/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <string>

#include "pcg/dataset_io.hpp"
#include "pcg/error.hpp"
#include "pcg/features_time.hpp"
#include "pcg/iir.hpp"
#include "pcg/preprocess.hpp"
#include "pcg/signal.hpp"
#include "pcg/stats.hpp"

namespace pcg {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

int idx(HeartState s) { return static_cast<int>(s); }

HeartState prev_state(HeartState s) {
  return static_cast<HeartState>((static_cast<int>(s) + kNumStates - 1) % kNumStates);
}

// Discrete duration model over [min_frames, max_frames], Gaussian shaped.
struct DurationModel {
  int min_frames{1};
  int max_frames{1};
  std::vector<double> log_pmf;       // index d - min_frames
  std::vector<double> log_survival;  // index d - 1, for d in [1, max_frames]: log P(D >= d)

  double pmf(int d) const { return log_pmf[static_cast<std::size_t>(d - min_frames)]; }
  double survival(int d) const { return log_survival[static_cast<std::size_t>(d - 1)]; }
};

DurationModel make_duration_model(int min_frames, int max_frames, double mean_frames, double sd_frames) {
  DurationModel m;
  m.min_frames = min_frames;
  m.max_frames = max_frames;
  mean_frames = std::clamp(mean_frames, static_cast<double>(min_frames), static_cast<double>(max_frames));
  std::vector<double> w;
  double total = 0.0;
  for (int d = min_frames; d <= max_frames; ++d) {
    const double z = (d - mean_frames) / sd_frames;
    // Floor keeps far tails finite so long recordings stay feasible.
    const double p = std::max(std::exp(-0.5 * z * z), 1e-30);
    w.push_back(p);
    total += p;
  }
  for (double p : w) m.log_pmf.push_back(std::log(p / total));
  m.log_survival.assign(static_cast<std::size_t>(max_frames), 0.0);
  double tail = 0.0;
  for (int d = max_frames; d >= 1; --d) {
    if (d >= min_frames) tail += w[static_cast<std::size_t>(d - min_frames)] / total;
    m.log_survival[static_cast<std::size_t>(d - 1)] = std::log(std::max(tail, 1e-300));
  }
  return m;
}

struct Gaussian2 {
  double mean[2]{0.0, 0.0};
  double var[2]{1.0, 1.0};

  double log_pdf(double a, double b) const {
    const double za = a - mean[0];
    const double zb = b - mean[1];
    return -0.5 * (za * za / var[0] + zb * zb / var[1] + std::log(var[0]) + std::log(var[1])) -
           std::log(2.0 * std::numbers::pi);
  }
};

constexpr double kVarFloor = 0.05;

Gaussian2 fit_gaussian(const std::vector<double>& a, const std::vector<double>& b,
                       const std::vector<std::size_t>& members, const Gaussian2& fallback) {
  if (members.size() < 2) return fallback;
  Gaussian2 g;
  const std::vector<double>* cols[2] = {&a, &b};
  for (int c = 0; c < 2; ++c) {
    double s = 0.0;
    for (std::size_t i : members) s += (*cols[c])[i];
    const double m = s / static_cast<double>(members.size());
    double ss = 0.0;
    for (std::size_t i : members) ss += ((*cols[c])[i] - m) * ((*cols[c])[i] - m);
    g.mean[c] = m;
    g.var[c] = std::max(ss / static_cast<double>(members.size() - 1), kVarFloor);
  }
  return g;
}

struct Lattice {
  std::vector<double> env;    // standardized envelope per frame
  std::vector<double> slope;  // standardized derivative per frame
};

void standardize(std::vector<double>& v) {
  const double m = stats::mean(v);
  double sd = stats::sample_sd(v);
  if (!(sd > 0.0)) sd = 1.0;
  for (double& x : v) x = (x - m) / sd;
}

Lattice build_lattice(const std::vector<double>& envelope, double rate_hz, double frame_rate_hz) {
  PcgRecording tmp;
  tmp.samples = envelope;
  tmp.sample_rate_hz = rate_hz;
  Lattice lat;
  lat.env = resample(tmp, frame_rate_hz).samples;
  const std::size_t t = lat.env.size();
  lat.slope.assign(t, 0.0);
  for (std::size_t i = 0; i < t; ++i) {
    const double lo = lat.env[i == 0 ? 0 : i - 1];
    const double hi = lat.env[i + 1 < t ? i + 1 : t - 1];
    lat.slope[i] = 0.5 * (hi - lo);
  }
  standardize(lat.env);
  standardize(lat.slope);
  return lat;
}

// Explicit-duration Viterbi over the cyclic grammar. The first and last
// runs may be cut by the recording edges and are scored with the duration
// survival function instead of the pmf.
std::vector<HeartState> viterbi(const Lattice& lat, const std::array<Gaussian2, kNumStates>& emit,
                                const std::array<DurationModel, kNumStates>& dur) {
  const int frames = static_cast<int>(lat.env.size());
  // cum[j][t] = sum of log emissions of state j over frames [0, t).
  std::array<std::vector<double>, kNumStates> cum;
  for (int j = 0; j < kNumStates; ++j) {
    cum[j].assign(static_cast<std::size_t>(frames + 1), 0.0);
    for (int t = 0; t < frames; ++t) {
      cum[j][t + 1] = cum[j][t] + emit[j].log_pdf(lat.env[t], lat.slope[t]);
    }
  }
  const auto seg = [&](int j, int a, int b) { return cum[j][b] - cum[j][a]; };

  // delta[j][t]: best score with a run of state j ending exactly at frame t.
  // back[j][t]: length of that run; negative marks the leading run.
  std::array<std::vector<double>, kNumStates> delta;
  std::array<std::vector<int>, kNumStates> back;
  for (int j = 0; j < kNumStates; ++j) {
    delta[j].assign(static_cast<std::size_t>(frames + 1), kNegInf);
    back[j].assign(static_cast<std::size_t>(frames + 1), 0);
  }
  for (int t = 1; t <= frames; ++t) {
    for (int j = 0; j < kNumStates; ++j) {
      const DurationModel& dm = dur[j];
      double best = kNegInf;
      int best_d = 0;
      if (t <= dm.max_frames) {
        best = seg(j, 0, t) + dm.survival(t);
        best_d = -t;
      }
      if (t < frames) {
        const int p = idx(prev_state(static_cast<HeartState>(j)));
        const int d_hi = std::min(dm.max_frames, t - 1);
        for (int d = dm.min_frames; d <= d_hi; ++d) {
          const double prior = delta[p][t - d];
          if (prior == kNegInf) continue;
          const double score = prior + seg(j, t - d, t) + dm.pmf(d);
          if (score > best) {
            best = score;
            best_d = d;
          }
        }
      } else {
        // Trailing run: any length up to the maximum.
        const int p = idx(prev_state(static_cast<HeartState>(j)));
        const int d_hi = std::min(dm.max_frames, t - 1);
        for (int d = 1; d <= d_hi; ++d) {
          const double prior = delta[p][t - d];
          if (prior == kNegInf) continue;
          const double score = prior + seg(j, t - d, t) + dm.survival(d);
          if (score > best) {
            best = score;
            best_d = d;
          }
        }
      }
      delta[j][t] = best;
      back[j][t] = best_d;
    }
  }

  int last = -1;
  for (int j = 0; j < kNumStates; ++j) {
    const double s = delta[j][frames];
    if (s == kNegInf) continue;
    if (last < 0 || s > delta[last][frames] ||
        (s == delta[last][frames] && dur[j].min_frames > dur[last].min_frames)) {
      last = j;
    }
  }
  if (last < 0) throw Error(Errc::NoFeasiblePath, "duration bounds cannot tile the recording");

  std::vector<HeartState> labels(static_cast<std::size_t>(frames));
  int t = frames;
  int j = last;
  while (t > 0) {
    const int d = back[j][t];
    const int len = d < 0 ? -d : d;
    for (int u = t - len; u < t; ++u) labels[static_cast<std::size_t>(u)] = static_cast<HeartState>(j);
    t -= len;
    if (d < 0) break;
    j = idx(prev_state(static_cast<HeartState>(j)));
  }
  return labels;
}

// Lag of the S1-onset to S2-onset autocorrelation peak, searched between
// 0.2 s and half the cycle.
double systolic_interval(const std::vector<double>& envelope, double rate_hz, double period_s) {
  const auto lo = static_cast<std::size_t>(std::ceil(0.2 * rate_hz));
  const auto hi = static_cast<std::size_t>(std::floor(0.5 * period_s * rate_hz));
  if (hi <= lo || hi + 1 >= envelope.size()) return 0.4 * period_s;
  const std::vector<double> ac = unbiased_autocorrelation(envelope, hi);
  std::size_t best = lo;
  for (std::size_t k = lo; k <= hi; ++k) {
    if (ac[k] > ac[best]) best = k;
  }
  return static_cast<double>(best) / rate_hz;
}

// Moves each S1/S2 edge, at sample resolution, to where a lightly smoothed
// Hilbert magnitude walking outward from the sound's peak falls below a
// level between the local quiet floor and that peak. The frame lattice
// alone quantizes edges to a frame and the 20 Hz envelope widens sounds.
void refine_sound_edges(std::vector<HeartState>& labels, std::span<const double> magnitude, double fs,
                        const std::array<DurationBounds, kNumStates>& bounds, double search_s) {
  std::vector<StateRun> runs = run_lengths(labels);
  if (runs.size() < 3) return;
  std::vector<double> mag(magnitude.size());
  const std::size_t half = static_cast<std::size_t>(std::llround(0.0025 * fs));
  for (std::size_t i = 0; i < mag.size(); ++i) {
    const std::size_t a = i >= half ? i - half : 0;
    const std::size_t b = std::min(mag.size(), i + half + 1);
    double s = 0.0;
    for (std::size_t k = a; k < b; ++k) s += magnitude[k];
    mag[i] = s / static_cast<double>(b - a);
  }
  const auto min_len = [&](HeartState s) {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(bounds[idx(s)].min_s * fs)));
  };
  const auto search = static_cast<std::size_t>(std::llround(search_s * fs));

  for (std::size_t k = 1; k + 1 < runs.size(); ++k) {
    StateRun& run = runs[k];
    if (run.state != HeartState::S1 && run.state != HeartState::S2) continue;
    StateRun& before = runs[k - 1];
    StateRun& after = runs[k + 1];

    std::vector<double> quiet(mag.begin() + static_cast<std::ptrdiff_t>(before.begin),
                              mag.begin() + static_cast<std::ptrdiff_t>(before.end));
    quiet.insert(quiet.end(), mag.begin() + static_cast<std::ptrdiff_t>(after.begin),
                 mag.begin() + static_cast<std::ptrdiff_t>(after.end));
    const double floor = stats::median(quiet);
    const auto peak_it = std::max_element(mag.begin() + static_cast<std::ptrdiff_t>(run.begin),
                                          mag.begin() + static_cast<std::ptrdiff_t>(run.end));
    const auto peak = static_cast<std::size_t>(peak_it - mag.begin());
    if (!(*peak_it > floor)) continue;
    const double level = std::max(floor + 0.08 * (*peak_it - floor), 3.0 * floor);

    // Each edge stays within the search radius and leaves every run at
    // least its minimum duration.
    const std::size_t lo_begin = std::max({before.begin + min_len(before.state), run.begin > search ? run.begin - search : 0});
    const std::size_t hi_end = std::min(after.end - std::min(after.end, min_len(after.state)), run.end + search);
    std::size_t b = peak;
    while (b > lo_begin && mag[b - 1] >= level) --b;
    std::size_t e = peak + 1;
    while (e < hi_end && mag[e] >= level) ++e;
    if (e <= b || e - b < min_len(run.state)) continue;
    b = std::min(b, run.begin + search);
    e = std::max(e, run.end > search ? run.end - search : 0);
    if (e <= b) continue;
    run.begin = b;
    run.end = e;
    before.end = b;
    after.begin = e;
  }
  for (const StateRun& r : runs) std::fill(labels.begin() + static_cast<std::ptrdiff_t>(r.begin), labels.begin() + static_cast<std::ptrdiff_t>(r.end), r.state);
}

}  // namespace

void SegmentationConfig::validate() const {
  if (!(envelope_lowpass_hz > 0.0)) throw Error(Errc::InvalidArgument, "envelope low-pass must be positive");
  for (const DurationBounds& b : state_duration_bounds) {
    if (!(b.min_s > 0.0 && b.min_s < b.max_s)) {
      throw Error(Errc::InvalidArgument, "state duration bounds need 0 < min < max");
    }
  }
  if (!(hr_low_bpm > 0.0 && hr_low_bpm < hr_high_bpm)) throw Error(Errc::InvalidArgument, "bad heart-rate range");
  if (!(frame_rate_hz / 2.0 > envelope_lowpass_hz)) {
    throw Error(Errc::InvalidArgument, "frame rate too low for the envelope bandwidth");
  }
  if (emission_iterations < 0) throw Error(Errc::InvalidArgument, "emission_iterations must be >= 0");
}

std::vector<double> compute_envelope(const PcgRecording& rec, double lowpass_hz) {
  std::vector<double> env = signal::hilbert_magnitude(rec.samples);
  if (env.empty()) return env;
  if (lowpass_hz < rec.sample_rate_hz / 2.0) {
    const iir::Sos lp = iir::butter_lowpass(2, lowpass_hz, rec.sample_rate_hz);
    env = iir::filtfilt(lp, env, static_cast<std::size_t>(std::llround(rec.sample_rate_hz)));
  }
  for (double& v : env) v = std::max(v, 0.0);
  return env;
}

StateSequence segment(const PcgRecording& rec, const SegmentationConfig& cfg) {
  cfg.validate();
  const double fs = rec.sample_rate_hz;
  const double min_cycle_s = 60.0 / cfg.hr_high_bpm;
  if (rec.duration_s() < 2.0 * min_cycle_s) {
    throw Error(Errc::TooShort, "recording shorter than two cardiac cycles");
  }

  const std::vector<double> envelope = compute_envelope(rec, cfg.envelope_lowpass_hz);
  double period = dominant_period(envelope, fs, 60.0 / cfg.hr_high_bpm, 60.0 / cfg.hr_low_bpm, 0.0)
                      .value_or(0.8);
  if (rec.duration_s() < 2.0 * period) throw Error(Errc::TooShort, "recording shorter than two cardiac cycles");
  const double sti = systolic_interval(envelope, fs, period);

  const double fr = cfg.frame_rate_hz;
  const Lattice lat = build_lattice(envelope, fs, fr);

  // Duration distributions (seconds) centred on the estimated timing.
  struct Shape {
    double mean, sd;
  };
  const double s1_mean = 0.122, s2_mean = 0.094;
  const double dia_mean = std::max(period - sti - s2_mean, 0.0);
  const std::array<Shape, kNumStates> shapes{{
      {s1_mean, 0.022},
      {std::max(sti - s1_mean, 0.0), 0.025},
      {s2_mean, 0.022},
      {dia_mean, 0.07 * dia_mean + 0.006},
  }};
  std::array<DurationModel, kNumStates> dur;
  for (int j = 0; j < kNumStates; ++j) {
    const DurationBounds& b = cfg.state_duration_bounds[static_cast<std::size_t>(j)];
    const int lo = std::max(1, static_cast<int>(std::ceil(b.min_s * fr - 1e-9)));
    const int hi = static_cast<int>(std::floor(b.max_s * fr + 1e-9));
    if (hi < lo) throw Error(Errc::NoFeasiblePath, "duration bounds empty at the frame rate");
    dur[j] = make_duration_model(lo, hi, shapes[j].mean * fr, std::max(shapes[j].sd * fr, 0.5));
  }

  // Initial emissions: loud frames for S1/S2, quiet frames for Sys/Dia.
  std::vector<double> sorted = lat.env;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t frames = sorted.size();
  const auto tail_stats = [&](std::size_t a, std::size_t b) {
    std::vector<double> part(sorted.begin() + static_cast<std::ptrdiff_t>(a),
                             sorted.begin() + static_cast<std::ptrdiff_t>(b));
    return stats::MeanSd{stats::mean(part), std::max(stats::sample_sd(part), std::sqrt(kVarFloor)), part.size()};
  };
  const stats::MeanSd loud = tail_stats(frames - std::max<std::size_t>(frames / 5, 1), frames);
  const stats::MeanSd quiet = tail_stats(0, std::max<std::size_t>(frames * 3 / 5, 1));
  std::array<Gaussian2, kNumStates> emit;
  for (int j = 0; j < kNumStates; ++j) {
    const bool sound = (j == idx(HeartState::S1) || j == idx(HeartState::S2));
    const stats::MeanSd& src = sound ? loud : quiet;
    emit[j].mean[0] = src.mean;
    emit[j].var[0] = src.sd * src.sd;
    emit[j].mean[1] = 0.0;
    emit[j].var[1] = 1.0;
  }

  std::vector<HeartState> frame_labels = viterbi(lat, emit, dur);
  for (int it = 0; it < cfg.emission_iterations; ++it) {
    std::array<std::vector<std::size_t>, kNumStates> members;
    for (std::size_t t = 0; t < frame_labels.size(); ++t) members[idx(frame_labels[t])].push_back(t);
    std::array<Gaussian2, kNumStates> refit;
    for (int j = 0; j < kNumStates; ++j) refit[j] = fit_gaussian(lat.env, lat.slope, members[j], emit[j]);
    emit = refit;
    frame_labels = viterbi(lat, emit, dur);
  }

  StateSequence out;
  out.record_id = rec.record_id;
  out.sample_rate_hz = fs;
  out.leading_run_partial = true;
  out.labels.resize(rec.samples.size());
  // Frame t is centred on time t / fr.
  const double ratio = fr / fs;
  for (std::size_t i = 0; i < out.labels.size(); ++i) {
    const auto t = static_cast<std::size_t>(std::llround(static_cast<double>(i) * ratio));
    out.labels[i] = frame_labels[std::min(t, frame_labels.size() - 1)];
  }
  refine_sound_edges(out.labels, signal::hilbert_magnitude(rec.samples), fs, cfg.state_duration_bounds, 1.5 / fr);
  return out;
}

StateSequence from_annotation(const StateAnnotation& ann, std::size_t n_samples, double rate_hz) {
  validate_annotation_events(ann.events);
  for (const StateEvent& e : ann.events) {
    if (e.sample_index >= n_samples) {
      throw Error(Errc::IndexOutOfRange, "annotation index " + std::to_string(e.sample_index) +
                                             " beyond " + std::to_string(n_samples) + " samples");
    }
  }
  StateSequence seq;
  seq.record_id = ann.record_id;
  seq.sample_rate_hz = rate_hz;
  seq.labels.resize(n_samples);
  const StateEvent& first = ann.events.front();
  seq.leading_run_partial = first.sample_index > 0;
  std::fill(seq.labels.begin(), seq.labels.begin() + static_cast<std::ptrdiff_t>(first.sample_index),
            prev_state(first.state));
  for (std::size_t k = 0; k < ann.events.size(); ++k) {
    const std::size_t begin = ann.events[k].sample_index;
    const std::size_t end = k + 1 < ann.events.size() ? ann.events[k + 1].sample_index : n_samples;
    std::fill(seq.labels.begin() + static_cast<std::ptrdiff_t>(begin),
              seq.labels.begin() + static_cast<std::ptrdiff_t>(end), ann.events[k].state);
  }
  return seq;
}

std::vector<StateRun> run_lengths(const std::vector<HeartState>& labels) {
  std::vector<StateRun> runs;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (runs.empty() || runs.back().state != labels[i]) {
      runs.push_back({labels[i], i, i + 1});
    } else {
      runs.back().end = i + 1;
    }
  }
  return runs;
}

StateAnnotation to_annotation(const StateSequence& seq) {
  StateAnnotation ann;
  ann.record_id = seq.record_id;
  for (const StateRun& r : run_lengths(seq.labels)) ann.events.push_back({r.begin, r.state});
  return ann;
}

BeatTable to_beats(const StateSequence& seq) {
  const std::vector<StateRun> runs = run_lengths(seq.labels);
  BeatTable beats;
  for (std::size_t k = 0; k + 4 < runs.size(); ++k) {
    if (runs[k].state != HeartState::S1) continue;
    if (k == 0 && seq.leading_run_partial) continue;
    if (runs[k + 1].state != HeartState::Sys || runs[k + 2].state != HeartState::S2 ||
        runs[k + 3].state != HeartState::Dia || runs[k + 4].state != HeartState::S1) {
      continue;
    }
    beats.push_back({runs[k].begin, runs[k].end, runs[k + 1].end, runs[k + 2].end, runs[k + 3].end});
  }
  if (beats.empty()) throw Error(Errc::NoCompleteBeat, "no complete S1-Sys-S2-Dia cycle");
  return beats;
}

}  // namespace pcg
