#include "pcg/dataset_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>
#include <unordered_set>

#include "pcg/error.hpp"

namespace pcg {

using json = nlohmann::json;

namespace {

std::uint32_t read_u32(const std::string& b, std::size_t off) {
  return static_cast<std::uint32_t>(static_cast<unsigned char>(b[off])) |
         (static_cast<std::uint32_t>(static_cast<unsigned char>(b[off + 1])) << 8) |
         (static_cast<std::uint32_t>(static_cast<unsigned char>(b[off + 2])) << 16) |
         (static_cast<std::uint32_t>(static_cast<unsigned char>(b[off + 3])) << 24);
}

std::uint16_t read_u16(const std::string& b, std::size_t off) {
  return static_cast<std::uint16_t>(static_cast<unsigned char>(b[off]) |
                                    (static_cast<unsigned char>(b[off + 1]) << 8));
}

void put_u32(std::string& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u16(std::string& b, std::uint16_t v) {
  b.push_back(static_cast<char>(v & 0xFF));
  b.push_back(static_cast<char>((v >> 8) & 0xFF));
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

// Non-blank, non-comment lines with their 1-based line numbers.
std::vector<std::pair<std::size_t, std::string_view>> content_lines(const std::string& text) {
  std::vector<std::pair<std::size_t, std::string_view>> out;
  std::string_view rest(text);
  std::size_t number = 0;
  while (!rest.empty()) {
    const std::size_t nl = rest.find('\n');
    std::string_view line = rest.substr(0, nl);
    rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
    ++number;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    out.emplace_back(number, line);
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc{} && res.ptr == s.data() + s.size();
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::Io, "cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw Error(Errc::Io, "write failed for " + path.string());
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(Errc::SchemaMismatch, what + ": " + e.what());
  }
}

std::vector<double> double_array(const json& j, std::size_t expected, const std::string& what) {
  if (!j.is_array() || j.size() != expected) {
    throw Error(Errc::SchemaMismatch, what + ": expected array of " + std::to_string(expected));
  }
  std::vector<double> out;
  out.reserve(expected);
  for (const json& v : j) {
    if (!v.is_number()) throw Error(Errc::SchemaMismatch, what + ": non-numeric entry");
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

PcgRecording load_recording(const fs::path& path) {
  const std::string b = read_text_file(path);
  if (b.size() < 12 || b.compare(0, 4, "RIFF") != 0 || b.compare(8, 4, "WAVE") != 0) {
    throw Error(Errc::MalformedWav, path.string() + ": not a RIFF/WAVE file");
  }
  bool have_fmt = false;
  std::uint32_t rate = 0;
  std::size_t off = 12;
  while (off + 8 <= b.size()) {
    const std::string id = b.substr(off, 4);
    const std::uint32_t size = read_u32(b, off + 4);
    const std::size_t body = off + 8;
    if (id == "fmt ") {
      if (size < 16 || body + size > b.size()) throw Error(Errc::MalformedWav, path.string() + ": bad fmt chunk");
      std::uint16_t tag = read_u16(b, body);
      const std::uint16_t channels = read_u16(b, body + 2);
      rate = read_u32(b, body + 4);
      const std::uint16_t bits = read_u16(b, body + 14);
      if (tag == 0xFFFE) {  // WAVE_FORMAT_EXTENSIBLE carries the real tag in its sub-format GUID
        if (size < 26) throw Error(Errc::MalformedWav, path.string() + ": short extensible fmt chunk");
        tag = read_u16(b, body + 24);
      }
      if (tag != 1) throw Error(Errc::UnsupportedFormat, path.string() + ": not PCM");
      if (channels != 1) throw Error(Errc::UnsupportedFormat, path.string() + ": expected mono");
      if (bits != 16) throw Error(Errc::UnsupportedFormat, path.string() + ": expected 16-bit samples");
      if (rate == 0) throw Error(Errc::MalformedWav, path.string() + ": zero sample rate");
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw Error(Errc::MalformedWav, path.string() + ": data before fmt");
      if (body + size > b.size()) throw Error(Errc::MalformedWav, path.string() + ": truncated data chunk");
      if (size % 2 != 0) throw Error(Errc::MalformedWav, path.string() + ": odd data payload");
      if (size == 0) throw Error(Errc::MalformedWav, path.string() + ": no samples");
      PcgRecording rec;
      rec.record_id = path.stem().string();
      rec.sample_rate_hz = static_cast<double>(rate);
      rec.samples.resize(size / 2);
      for (std::size_t i = 0; i < rec.samples.size(); ++i) {
        const auto code = static_cast<std::int16_t>(read_u16(b, body + 2 * i));
        rec.samples[i] = static_cast<double>(code) / 32768.0;
      }
      return rec;
    }
    off = body + size + (size % 2);
  }
  throw Error(Errc::MalformedWav, path.string() + (have_fmt ? ": missing data chunk" : ": missing fmt chunk"));
}

void save_recording(const PcgRecording& rec, const fs::path& path) {
  if (rec.samples.empty() || !(rec.sample_rate_hz > 0.0)) {
    throw Error(Errc::InvalidArgument, "cannot save an empty recording");
  }
  const auto rate = static_cast<std::uint32_t>(std::llround(rec.sample_rate_hz));
  const auto data_bytes = static_cast<std::uint32_t>(rec.samples.size() * 2);
  std::string b;
  b.reserve(44 + data_bytes);
  b += "RIFF";
  put_u32(b, 36 + data_bytes);
  b += "WAVE";
  b += "fmt ";
  put_u32(b, 16);
  put_u16(b, 1);
  put_u16(b, 1);
  put_u32(b, rate);
  put_u32(b, rate * 2);
  put_u16(b, 2);
  put_u16(b, 16);
  b += "data";
  put_u32(b, data_bytes);
  for (double v : rec.samples) {
    const double code = std::clamp(std::round(v * 32768.0), -32768.0, 32767.0);
    put_u16(b, static_cast<std::uint16_t>(static_cast<std::int16_t>(code)));
  }
  write_text_file(path, b);
}

std::vector<ReferenceLabel> parse_reference(const std::string& text) {
  std::vector<ReferenceLabel> out;
  std::unordered_set<std::string> seen;
  for (const auto& [number, line] : content_lines(text)) {
    const auto fields = split_fields(line);
    const std::string where = "line " + std::to_string(number);
    if (fields.size() != 2 || fields[0].empty()) {
      throw Error(Errc::BadLabel, where + ": expected `record_id,label`");
    }
    int value = 0;
    if (!parse_number(fields[1], value) || (value != -1 && value != 1)) {
      throw Error(Errc::BadLabel, where + ": label must be -1 or 1, got '" + std::string(fields[1]) + "'");
    }
    std::string id(fields[0]);
    if (!seen.insert(id).second) throw Error(Errc::DuplicateRecordId, where + ": duplicate record " + id);
    out.push_back({std::move(id), value == 1 ? Label::Abnormal : Label::Normal});
  }
  return out;
}

std::vector<ReferenceLabel> load_reference(const fs::path& path) { return parse_reference(read_text_file(path)); }

void validate_annotation_events(std::span<const StateEvent> events) {
  if (events.empty()) throw Error(Errc::BrokenStateCycle, "annotation has no events");
  for (std::size_t k = 1; k < events.size(); ++k) {
    if (events[k].sample_index <= events[k - 1].sample_index) {
      throw Error(Errc::NonMonotonicIndex, "sample_index " + std::to_string(events[k].sample_index) +
                                               " does not increase on " + std::to_string(events[k - 1].sample_index));
    }
    if (events[k].state != next_state(events[k - 1].state)) {
      throw Error(Errc::BrokenStateCycle, std::string(state_name(events[k - 1].state)) + " followed by " +
                                              std::string(state_name(events[k].state)));
    }
  }
}

StateAnnotation parse_annotation(const std::string& text, std::string record_id) {
  const auto lines = content_lines(text);
  if (lines.empty()) throw Error(Errc::BrokenStateCycle, "empty annotation");
  const auto header = split_fields(lines.front().second);
  if (header.size() != 2 || header[0] != "sample_index" || header[1] != "state") {
    throw Error(Errc::SchemaMismatch, "annotation header must be `sample_index,state`");
  }
  StateAnnotation ann;
  ann.record_id = std::move(record_id);
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto& [number, line] = lines[k];
    const auto fields = split_fields(line);
    const std::string where = "line " + std::to_string(number);
    std::size_t index = 0;
    if (fields.size() != 2 || !parse_number(fields[0], index)) {
      throw Error(Errc::SchemaMismatch, where + ": expected `sample_index,state`");
    }
    const auto state = parse_state(fields[1]);
    if (!state) throw Error(Errc::BrokenStateCycle, where + ": unknown state '" + std::string(fields[1]) + "'");
    ann.events.push_back({index, *state});
  }
  validate_annotation_events(ann.events);
  return ann;
}

StateAnnotation load_annotation(const fs::path& path) {
  return parse_annotation(read_text_file(path), path.stem().string());
}

void save_annotation(const StateAnnotation& ann, const fs::path& path, const std::string& comment) {
  std::string out;
  if (!comment.empty()) out += "# " + comment + "\n";
  out += "sample_index,state\n";
  for (const StateEvent& e : ann.events) {
    out += std::to_string(e.sample_index) + "," + std::string(state_name(e.state)) + "\n";
  }
  write_text_file(path, out);
}

std::string model_to_json(const MlpModel& model, const std::string& config_json) {
  if (model.scaler.mean.size() != kFeatureCount || model.scaler.std.size() != kFeatureCount) {
    throw Error(Errc::SchemaMismatch, "model has no fitted scaler");
  }
  if (model.input_size() != kFeatureCount) throw Error(Errc::SchemaMismatch, "model input size is not 324");
  json j;
  j["schema_version"] = kSchemaVersion;
  j["rng_seed"] = model.rng_seed;
  if (!config_json.empty()) j["config"] = parse_json(config_json, "config");
  j["scaler"] = {{"mean", model.scaler.mean}, {"std", model.scaler.std}};
  j["imputation"] = {{"median", model.imputer.median}};
  json layers = json::array();
  for (const DenseLayer& layer : model.layers) {
    json w = json::array();
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      json row = json::array();
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) row.push_back(layer.weights(r, c));
      w.push_back(std::move(row));
    }
    json biases = json::array();
    for (Eigen::Index r = 0; r < layer.biases.size(); ++r) biases.push_back(layer.biases(r));
    layers.push_back({{"activation", activation_name(layer.activation)}, {"weights", w}, {"biases", biases}});
  }
  j["layers"] = std::move(layers);
  return j.dump(1) + "\n";
}

MlpModel model_from_json(const std::string& text) {
  const json j = parse_json(text, "model");
  if (!j.is_object() || !j.contains("schema_version") || j["schema_version"] != kSchemaVersion) {
    throw Error(Errc::SchemaMismatch, "model: unsupported or missing schema_version");
  }
  if (!j.contains("layers") || !j["layers"].is_array() || j["layers"].size() != 3) {
    throw Error(Errc::SchemaMismatch, "model: expected three layers");
  }
  const std::size_t shapes[3][2] = {{kHidden1, kFeatureCount}, {kHidden2, kHidden1}, {1, kHidden2}};
  const Activation acts[3] = {Activation::Logistic, Activation::Linear, Activation::Linear};

  MlpModel model;
  for (std::size_t l = 0; l < 3; ++l) {
    const json& lj = j["layers"][l];
    const std::string where = "model layer " + std::to_string(l + 1);
    if (!lj.is_object() || !lj.contains("weights") || !lj.contains("biases") || !lj.contains("activation")) {
      throw Error(Errc::SchemaMismatch, where + ": missing fields");
    }
    const auto act = lj["activation"].is_string() ? parse_activation(lj["activation"].get<std::string>())
                                                  : std::nullopt;
    if (!act || *act != acts[l]) throw Error(Errc::SchemaMismatch, where + ": unexpected activation");
    const json& w = lj["weights"];
    const std::size_t rows = shapes[l][0];
    const std::size_t cols = shapes[l][1];
    if (!w.is_array() || w.size() != rows) {
      throw Error(Errc::SchemaMismatch, where + ": expected " + std::to_string(rows) + " weight rows");
    }
    DenseLayer layer;
    layer.activation = *act;
    layer.weights.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows; ++r) {
      const std::vector<double> row = double_array(w[r], cols, where + " weights row");
      for (std::size_t c = 0; c < cols; ++c) {
        layer.weights(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c];
      }
    }
    const std::vector<double> b = double_array(lj["biases"], rows, where + " biases");
    layer.biases = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(rows));
    if (!layer.weights.allFinite() || !layer.biases.allFinite()) {
      throw Error(Errc::SchemaMismatch, where + ": non-finite parameter");
    }
    model.layers[l] = std::move(layer);
  }

  if (!j.contains("scaler") || !j["scaler"].is_object() || !j["scaler"].contains("mean") ||
      !j["scaler"].contains("std")) {
    throw Error(Errc::SchemaMismatch, "model: missing scaler");
  }
  model.scaler.mean = double_array(j["scaler"]["mean"], kFeatureCount, "scaler mean");
  model.scaler.std = double_array(j["scaler"]["std"], kFeatureCount, "scaler std");
  if (std::any_of(model.scaler.std.begin(), model.scaler.std.end(), [](double s) { return !(s > 0.0); })) {
    throw Error(Errc::SchemaMismatch, "scaler std must be positive");
  }
  if (j.contains("imputation")) {
    if (!j["imputation"].is_object() || !j["imputation"].contains("median")) {
      throw Error(Errc::SchemaMismatch, "model: malformed imputation block");
    }
    model.imputer.median = double_array(j["imputation"]["median"], kFeatureCount, "imputation median");
  } else {
    // Imputing to the scaler mean maps missing slots to 0 after scaling.
    model.imputer.median = model.scaler.mean;
  }
  if (j.contains("rng_seed") && j["rng_seed"].is_number_unsigned()) {
    model.rng_seed = j["rng_seed"].get<std::uint64_t>();
  }
  return model;
}

void save_model(const MlpModel& model, const fs::path& path, const std::string& config_json) {
  write_text_file(path, model_to_json(model, config_json));
}

MlpModel load_model(const fs::path& path) { return model_from_json(read_text_file(path)); }

void save_calibration(const CalibrationResult& cal, const fs::path& path, const std::string& config_json) {
  json j;
  j["schema_version"] = kSchemaVersion;
  if (!config_json.empty()) j["config"] = parse_json(config_json, "config");
  j["fractions"] = cal.fractions;
  j["cross_points"] = cal.cross_points;
  j["skipped_fractions"] = cal.skipped_fractions;
  j["threshold"] = cal.threshold;
  write_text_file(path, j.dump(1) + "\n");
}

CalibrationResult load_calibration(const fs::path& path) {
  const json j = parse_json(read_text_file(path), "calibration");
  if (!j.is_object() || !j.contains("schema_version") || j["schema_version"] != kSchemaVersion ||
      !j.contains("fractions") || !j.contains("cross_points") || !j.contains("threshold") ||
      !j["threshold"].is_number()) {
    throw Error(Errc::SchemaMismatch, "calibration: missing fields");
  }
  CalibrationResult cal;
  const std::size_t n = j["fractions"].is_array() ? j["fractions"].size() : 0;
  cal.fractions = double_array(j["fractions"], n, "fractions");
  cal.cross_points = double_array(j["cross_points"], n, "cross_points");
  if (j.contains("skipped_fractions")) {
    const std::size_t m = j["skipped_fractions"].is_array() ? j["skipped_fractions"].size() : 0;
    cal.skipped_fractions = double_array(j["skipped_fractions"], m, "skipped_fractions");
  }
  cal.threshold = j["threshold"].get<double>();
  return cal;
}

void write_feature_table(std::span<const FeatureVector> rows, const fs::path& path, const std::string& comment) {
  std::string out;
  if (!comment.empty()) out += "# " + comment + "\n";
  out += "record_id";
  for (const std::string& name : feature_catalog()) out += "," + name;
  out += "\n";
  for (const FeatureVector& v : rows) {
    if (v.values.size() != kFeatureCount || v.imputed_mask.size() != kFeatureCount) {
      throw Error(Errc::SchemaMismatch, "feature vector " + v.record_id + " does not have 324 slots");
    }
    out += v.record_id;
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
      out += ",";
      if (!v.imputed_mask[i]) out += format_double(v.values[i]);
    }
    out += "\n";
  }
  write_text_file(path, out);
}

std::vector<FeatureVector> read_feature_table(const fs::path& path) {
  const std::string text = read_text_file(path);
  const auto lines = content_lines(text);
  if (lines.empty()) throw Error(Errc::SchemaMismatch, path.string() + ": empty feature table");
  const auto header = split_fields(lines.front().second);
  const auto& names = feature_catalog();
  bool header_ok = header.size() == kFeatureCount + 1 && header[0] == "record_id";
  for (std::size_t i = 0; header_ok && i < kFeatureCount; ++i) header_ok = header[i + 1] == names[i];
  if (!header_ok) throw Error(Errc::SchemaMismatch, path.string() + ": header does not match the feature catalog");

  std::vector<FeatureVector> out;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto& [number, line] = lines[k];
    const auto fields = split_fields(line);
    const std::string where = path.string() + " line " + std::to_string(number);
    if (fields.size() != kFeatureCount + 1 || fields[0].empty()) {
      throw Error(Errc::SchemaMismatch, where + ": expected 325 fields");
    }
    FeatureVector v;
    v.record_id = std::string(fields[0]);
    v.values.assign(kFeatureCount, 0.0);
    v.imputed_mask.assign(kFeatureCount, false);
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
      const std::string_view f = fields[i + 1];
      if (f.empty()) {
        v.imputed_mask[i] = true;
        continue;
      }
      double value = 0.0;
      if (!parse_number(f, value) || !std::isfinite(value)) {
        throw Error(Errc::SchemaMismatch, where + ": bad value for " + names[i]);
      }
      v.values[i] = value;
    }
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace pcg
