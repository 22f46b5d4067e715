#include "symm/io.hpp"

#include "symm/error.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <ostream>
#include <span>

namespace symm::io {
namespace {

using nlohmann::json;

[[noreturn]] void schema_error(const std::string& what) { throw Error(ErrorCode::SchemaError, what); }

std::string quoted(const std::string& s) { return json(s).dump(); }

void append_array(std::string& out, std::span<const double> v) {
  out += '[';
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += format_number(v[i]);
  }
  out += ']';
}

void append_plane(std::string& out, const PlaneRecord& r) {
  out += "{\"normal\": ";
  append_array(out, r.normal);
  out += ", \"offset\": " + format_number(r.offset);
  out += ", \"confidence\": " + format_number(r.confidence);
  if (r.residual) out += ", \"residual\": " + format_number(*r.residual);
  out += '}';
}

void append_plane_list(std::string& out, const std::vector<PlaneRecord>& planes) {
  if (planes.empty()) {
    out += "[]";
    return;
  }
  out += "[\n";
  for (std::size_t i = 0; i < planes.size(); ++i) {
    out += "    ";
    append_plane(out, planes[i]);
    out += i + 1 < planes.size() ? ",\n" : "\n";
  }
  out += "  ]";
}

template <class Rows>
void append_rows(std::string& out, const Rows& rows) {
  if (rows.empty()) {
    out += "[]";
    return;
  }
  out += "[\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out += "    ";
    append_array(out, rows[i]);
    out += i + 1 < rows.size() ? ",\n" : "\n";
  }
  out += "  ]";
}

json parse_root(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, std::string("invalid JSON at byte ") + std::to_string(e.byte) + ": " + e.what());
  }
  if (!j.is_object()) schema_error("document root must be an object");
  return j;
}

void check_version(const json& j) {
  if (!j.contains("schema_version") || !j["schema_version"].is_string()) schema_error("missing schema_version");
  const auto v = j["schema_version"].get<std::string>();
  if (v.rfind("1.", 0) != 0) schema_error("unsupported schema_version '" + v + "'");
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) schema_error(where + " must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) schema_error(where + " must be finite");
  return v;
}

const json& field(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) schema_error(where + " is missing '" + key + "'");
  return obj[key];
}

std::vector<double> number_array(const json& j, const std::string& where) {
  if (!j.is_array()) schema_error(where + " must be an array");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

PlaneRecord parse_plane(const json& j, const std::string& where, std::vector<std::string>* warnings) {
  if (!j.is_object()) schema_error(where + " must be an object");
  PlaneRecord r;
  const auto n = number_array(field(j, "normal", where), where + ".normal");
  if (n.size() != 3) schema_error(where + ".normal must have 3 components");
  const double len = std::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
  const double dev = std::abs(len - 1.0);
  if (dev > 1e-3) schema_error(where + ".normal is not unit length (|n| = " + format_number(len) + ")");
  if (dev > 1e-6) {
    for (int k = 0; k < 3; ++k) r.normal[k] = n[k] / len;
    if (warnings) warnings->push_back(where + ".normal re-normalized (|n| = " + format_number(len) + ")");
  } else {
    r.normal = {n[0], n[1], n[2]};
  }
  r.offset = number(field(j, "offset", where), where + ".offset");
  r.confidence = number(field(j, "confidence", where), where + ".confidence");
  if (j.contains("residual") && !j["residual"].is_null()) r.residual = number(j["residual"], where + ".residual");
  return r;
}

std::vector<PlaneRecord> parse_plane_list(const json& j, const std::string& where, std::vector<std::string>* warnings) {
  if (!j.is_array()) schema_error(where + " must be an array");
  std::vector<PlaneRecord> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(parse_plane(j[i], where + "[" + std::to_string(i) + "]", warnings));
  return out;
}

} // namespace

std::string format_number(double v) {
  if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "cannot serialize a non-finite number");
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string format_plane_set(const PlaneSetDocument& doc) {
  std::string out = "{\n";
  out += "  \"schema_version\": " + quoted(doc.schema_version) + ",\n";
  out += "  \"frame\": " + quoted(doc.frame) + ",\n";
  out += "  \"planes\": ";
  append_plane_list(out, doc.planes);
  out += ",\n";
  out += std::string("  \"flags\": {\"ubiquitous\": ") + (doc.ubiquitous ? "true" : "false") + "}\n";
  out += "}\n";
  return out;
}

PlaneSetDocument parse_plane_set(std::string_view text, std::vector<std::string>* warnings) {
  const json j = parse_root(text);
  check_version(j);
  PlaneSetDocument doc;
  doc.schema_version = j["schema_version"].get<std::string>();
  const json& frame = field(j, "frame", "document");
  if (!frame.is_string()) schema_error("frame must be a string");
  doc.frame = frame.get<std::string>();
  doc.planes = parse_plane_list(field(j, "planes", "document"), "planes", warnings);
  if (j.contains("flags")) {
    const json& f = j["flags"];
    if (!f.is_object()) schema_error("flags must be an object");
    if (f.contains("ubiquitous")) {
      if (!f["ubiquitous"].is_boolean()) schema_error("flags.ubiquitous must be a boolean");
      doc.ubiquitous = f["ubiquitous"].get<bool>();
    }
  }
  return doc;
}

std::string format_view_predictions(const ViewPredictionDocument& doc) {
  std::string out = "{\n";
  out += "  \"schema_version\": " + quoted(std::string(kSchemaVersion)) + ",\n";
  out += "  \"pose\": {\"azimuth_deg\": " + format_number(doc.pose.azimuth_deg) +
         ", \"elevation_deg\": " + format_number(doc.pose.elevation_deg) + "},\n";
  out += "  \"predictions\": ";
  append_plane_list(out, doc.predictions);
  if (doc.probabilities && doc.residual_quaternions) {
    const std::size_t n = doc.n_hypotheses.value_or(doc.probabilities->size());
    out += ",\n  \"n_hypotheses\": " + std::to_string(n) + ",\n";
    out += "  \"probabilities\": ";
    append_array(out, *doc.probabilities);
    out += ",\n  \"residual_quaternions\": ";
    append_rows(out, *doc.residual_quaternions);
  } else if (doc.n_hypotheses) {
    out += ",\n  \"n_hypotheses\": " + std::to_string(*doc.n_hypotheses);
  }
  out += "\n}\n";
  return out;
}

ViewPredictionDocument parse_view_predictions(std::string_view text, std::vector<std::string>* warnings) {
  const json j = parse_root(text);
  check_version(j);
  ViewPredictionDocument doc;
  if (j.contains("pose")) {
    const json& p = j["pose"];
    if (!p.is_object()) schema_error("pose must be an object");
    doc.pose.azimuth_deg = number(field(p, "azimuth_deg", "pose"), "pose.azimuth_deg");
    doc.pose.elevation_deg = number(field(p, "elevation_deg", "pose"), "pose.elevation_deg");
  }
  if (j.contains("predictions")) doc.predictions = parse_plane_list(j["predictions"], "predictions", warnings);
  if (j.contains("n_hypotheses")) {
    const json& n = j["n_hypotheses"];
    if (!n.is_number_unsigned() || n.get<std::size_t>() == 0) schema_error("n_hypotheses must be a positive integer");
    doc.n_hypotheses = n.get<std::size_t>();
  }
  const bool has_p = j.contains("probabilities");
  const bool has_q = j.contains("residual_quaternions");
  if (has_p != has_q) schema_error("probabilities and residual_quaternions must be given together");
  if (has_p) {
    doc.probabilities = number_array(j["probabilities"], "probabilities");
    const json& q = j["residual_quaternions"];
    if (!q.is_array()) schema_error("residual_quaternions must be an array");
    std::vector<std::array<double, 4>> quats;
    for (std::size_t i = 0; i < q.size(); ++i) {
      const std::string where = "residual_quaternions[" + std::to_string(i) + "]";
      const auto v = number_array(q[i], where);
      if (v.size() != 4) schema_error(where + " must have 4 components");
      quats.push_back({v[0], v[1], v[2], v[3]});
    }
    doc.residual_quaternions = std::move(quats);
    const std::size_t n = doc.n_hypotheses.value_or(doc.probabilities->size());
    if (doc.probabilities->size() != n || doc.residual_quaternions->size() != n) {
      schema_error("per-hypothesis arrays must have n_hypotheses = " + std::to_string(n) + " entries");
    }
  }
  return doc;
}

PlaneSetDocument load_plane_set(const std::filesystem::path& path, std::vector<std::string>* warnings) {
  try {
    return parse_plane_set(read_file(path), warnings);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::IoError) throw;
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

ViewPredictionDocument load_view_predictions(const std::filesystem::path& path, std::vector<std::string>* warnings) {
  try {
    return parse_view_predictions(read_file(path), warnings);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::IoError) throw;
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

PlaneRecord to_record(const SymmetryPlane& plane, double confidence, std::optional<double> residual) {
  const UnitVector3& n = plane.normal();
  return {{n.x(), n.y(), n.z()}, plane.offset(), confidence, residual};
}

SymmetryPlane to_plane(const PlaneRecord& r) {
  return SymmetryPlane(UnitVector3(r.normal[0], r.normal[1], r.normal[2]), r.offset);
}

PlaneSetDocument to_document(const DetectedPlaneSet& set, std::string frame) {
  PlaneSetDocument doc;
  doc.frame = std::move(frame);
  doc.ubiquitous = set.ubiquitous;
  for (const auto& p : set.planes) doc.planes.push_back(to_record(p.plane, p.score, p.residual));
  return doc;
}

PlaneSetDocument to_document(const std::vector<ClusteredPrediction>& clusters, std::string frame) {
  PlaneSetDocument doc;
  doc.frame = std::move(frame);
  for (const auto& c : clusters) doc.planes.push_back(to_record(c.plane, c.mean_confidence));
  return doc;
}

PredictionSet to_predictions(const std::vector<PlaneRecord>& records) {
  PredictionSet out;
  for (const auto& r : records) out.push_back({to_plane(r), r.confidence});
  return out;
}

std::vector<UnitVector3> normals_of(const PlaneSetDocument& doc) {
  std::vector<UnitVector3> out;
  for (const auto& r : doc.planes) out.emplace_back(r.normal[0], r.normal[1], r.normal[2]);
  return out;
}

ViewPredictions to_view_predictions(const ViewPredictionDocument& doc, double prob_threshold) {
  if (!doc.probabilities) return {to_predictions(doc.predictions), doc.pose};
  const HypothesisBank bank(doc.probabilities->size());
  std::vector<UnitQuaternion> q;
  for (const auto& r : *doc.residual_quaternions) q.emplace_back(r[0], r[1], r[2], r[3]);
  return {reconstruct_predictions(bank, *doc.probabilities, q, prob_threshold), doc.pose};
}

std::string format_training_targets(const HypothesisBank& bank, const TrainingTargets& t) {
  std::vector<std::array<double, 3>> hyp;
  std::vector<double> prob;
  std::vector<std::array<double, 4>> quats;
  for (std::size_t h = 0; h < bank.size(); ++h) {
    hyp.push_back({bank[h].x(), bank[h].y(), bank[h].z()});
    prob.push_back(t.positive[h] ? 1.0 : 0.0);
    const UnitQuaternion q = t.residual[h].value_or(UnitQuaternion::identity());
    quats.push_back({q.w(), q.x(), q.y(), q.z()});
  }
  std::string out = "{\n";
  out += "  \"schema_version\": " + quoted(std::string(kSchemaVersion)) + ",\n";
  out += "  \"n_hypotheses\": " + std::to_string(bank.size()) + ",\n";
  out += "  \"hypotheses\": ";
  append_rows(out, hyp);
  out += ",\n  \"probabilities\": ";
  append_array(out, prob);
  out += ",\n  \"residual_quaternions\": ";
  append_rows(out, quats);
  out += ",\n  \"assignment\": [";
  for (std::size_t i = 0; i < t.assignment.size(); ++i) out += (i ? ", " : "") + std::to_string(t.assignment[i]);
  out += "],\n  \"warnings\": [";
  for (std::size_t i = 0; i < t.warnings.size(); ++i) {
    const auto& w = t.warnings[i];
    out += (i ? ", " : "") + std::string("{\"hypothesis\": ") + std::to_string(w.hypothesis) +
           ", \"kept_gt\": " + std::to_string(w.kept_gt) + ", \"dropped_gt\": " + std::to_string(w.dropped_gt) + "}";
  }
  out += "]\n}\n";
  return out;
}

void write_metrics_csv(std::ostream& os, const std::vector<MetricsRow>& rows, const std::vector<double>& thresholds) {
  os << "id,n_pred,n_gt";
  for (double t : thresholds) {
    const std::string s = format_number(t);
    os << ",P@" << s << ",R@" << s << ",F@" << s;
  }
  os << ",theta_p,theta_r,gd\n";
  for (const auto& row : rows) {
    os << row.id << ',' << row.report.n_pred << ',' << row.report.n_gt;
    for (double t : thresholds) {
      const auto& s = row.report.at(t);
      os << ',' << format_number(s.precision) << ',' << format_number(s.recall) << ',' << format_number(s.f);
    }
    os << ',' << format_number(row.report.theta_p_deg) << ',' << format_number(row.report.theta_r_deg) << ','
       << format_number(row.report.gd_deg) << '\n';
  }
}

} // namespace symm::io
