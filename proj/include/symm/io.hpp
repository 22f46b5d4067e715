#pragma once

#include "symm/aggregate.hpp"
#include "symm/detector.hpp"
#include "symm/hypothesis.hpp"
#include "symm/metrics.hpp"
#include "symm/pointcloud.hpp"
#include "symm/prediction.hpp"

#include <array>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace symm::io {

inline constexpr std::string_view kSchemaVersion = "1.0";

// --- meshes and clouds ---------------------------------------------------------

// OBJ or PLY (ascii / binary_little_endian), chosen by extension. Polygons are
// fan-triangulated; normals, UVs and other attributes are ignored.
TriMesh load_mesh(const std::filesystem::path& path);
TriMesh parse_obj(std::string_view text);
TriMesh parse_ply(std::string_view bytes);

// Vertices of an OBJ/PLY file as a cloud (faces, if any, are ignored).
PointCloud load_cloud(const std::filesystem::path& path);

// binary_little_endian PLY with double x, y, z.
std::string format_ply(const PointCloud& cloud);
void save_cloud(const std::filesystem::path& path, const PointCloud& cloud);

// --- plane documents -----------------------------------------------------------

struct PlaneRecord {
  std::array<double, 3> normal{0, 0, 1};
  double offset = 0.0;
  double confidence = 1.0;
  std::optional<double> residual;
};

struct PlaneSetDocument {
  std::string schema_version{kSchemaVersion};
  std::string frame = "input";
  std::vector<PlaneRecord> planes;
  bool ubiquitous = false;
};

struct ViewPredictionDocument {
  ViewPose pose;
  std::vector<PlaneRecord> predictions;
  std::optional<std::size_t> n_hypotheses;
  std::optional<std::vector<double>> probabilities;
  std::optional<std::vector<std::array<double, 4>>> residual_quaternions;  // w, x, y, z
};

// Canonical text: fixed field order, numbers at 9 significant digits, so that
// format(parse(format(doc))) == format(doc) byte for byte.
std::string format_plane_set(const PlaneSetDocument& doc);
std::string format_view_predictions(const ViewPredictionDocument& doc);

// Normals within 1e-6 of unit length are kept verbatim; up to 1e-3 they are
// renormalized and a warning is appended; beyond that the load fails.
PlaneSetDocument parse_plane_set(std::string_view text, std::vector<std::string>* warnings = nullptr);
ViewPredictionDocument parse_view_predictions(std::string_view text, std::vector<std::string>* warnings = nullptr);

PlaneSetDocument load_plane_set(const std::filesystem::path& path, std::vector<std::string>* warnings = nullptr);
ViewPredictionDocument load_view_predictions(const std::filesystem::path& path,
                                             std::vector<std::string>* warnings = nullptr);

PlaneRecord to_record(const SymmetryPlane& plane, double confidence, std::optional<double> residual = {});
SymmetryPlane to_plane(const PlaneRecord& record);

PlaneSetDocument to_document(const DetectedPlaneSet& set, std::string frame = "input");
PlaneSetDocument to_document(const std::vector<ClusteredPrediction>& clusters, std::string frame = "reference");
PredictionSet to_predictions(const std::vector<PlaneRecord>& records);
std::vector<UnitVector3> normals_of(const PlaneSetDocument& doc);

// Per-view predictions: the per-hypothesis arrays, when present, are decoded
// through the hypothesis bank; otherwise the explicit predictions are used.
ViewPredictions to_view_predictions(const ViewPredictionDocument& doc,
                                    double prob_threshold = kDefaultProbThreshold);

std::string format_training_targets(const HypothesisBank& bank, const TrainingTargets& targets);

// --- reports -------------------------------------------------------------------

struct MetricsRow {
  std::string id;
  MetricsReport report;
};

void write_metrics_csv(std::ostream& os, const std::vector<MetricsRow>& rows, const std::vector<double>& thresholds);

// printf("%.9g"); throws on non-finite values.
std::string format_number(double v);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

} // namespace symm::io
