#include "symm/cli.hpp"

#include "symm/aggregate.hpp"
#include "symm/detector.hpp"
#include "symm/error.hpp"
#include "symm/hypothesis.hpp"
#include "symm/io.hpp"
#include "symm/metrics.hpp"
#include "symm/symmetrize.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <iostream>
#include <sstream>
#include <thread>

namespace symm::cli {
namespace {

namespace fs = std::filesystem;

struct DetectFlags {
  std::size_t points = DetectorConfig{}.n_points;
  std::size_t candidates = DetectorConfig{}.n_candidates;
  double gate = DetectorConfig{}.chamfer_gate;
  double scan_gate = DetectorConfig{}.scan_gate;
  double merge_deg = DetectorConfig{}.merge_threshold_deg;
  std::uint64_t seed = 0;
  std::size_t threads = 1;

  DetectorConfig config() const {
    DetectorConfig cfg;
    cfg.n_points = points;
    cfg.n_candidates = candidates;
    cfg.chamfer_gate = gate;
    cfg.scan_gate = scan_gate;
    cfg.merge_threshold_deg = merge_deg;
    cfg.threads = threads;
    cfg.validate();
    return cfg;
  }
};

void add_detect_flags(CLI::App* app, DetectFlags& f) {
  app->add_option("--points", f.points, "Surface samples")->capture_default_str();
  app->add_option("--candidates", f.candidates, "Hemisphere candidate normals")->capture_default_str();
  app->add_option("--gate", f.gate, "Reflective Chamfer acceptance gate")->capture_default_str();
  app->add_option("--scan-gate", f.scan_gate, "Coarse-scan gate for sending candidates to refinement")
      ->capture_default_str();
  app->add_option("--merge-deg", f.merge_deg, "Merge planes closer than this (degrees)")->capture_default_str();
  app->add_option("--seed", f.seed, "Sampling seed")->capture_default_str();
  app->add_option("--threads", f.threads, "Worker threads per object")->capture_default_str();
}

void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
  } else {
    io::write_file(path, text);
  }
}

void report_warnings(const std::vector<std::string>& warnings, std::ostream& err) {
  for (const auto& w : warnings) err << "warning: " << w << '\n';
}

PointCloud load_points(const fs::path& path, std::size_t n_points, std::uint64_t seed) {
  const TriMesh mesh = io::load_mesh(path);
  if (mesh.faces.empty()) return PointCloud{mesh.vertices};
  return sample_surface(mesh, n_points, seed);
}

struct BatchResult {
  std::string id;
  std::optional<DetectedPlaneSet> planes;
  std::string error_code;
  std::string error;
};

BatchResult run_one(const fs::path& path, const DetectorConfig& cfg, std::uint64_t seed) {
  BatchResult r;
  r.id = path.stem().string();
  try {
    r.planes = detect_planes(io::load_mesh(path), cfg, seed);
  } catch (const Error& e) {
    r.error_code = std::string(to_string(e.code()));
    r.error = e.what();
  } catch (const std::exception& e) {
    r.error_code = "InternalError";
    r.error = e.what();
  }
  return r;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + '"';
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Reflection symmetry plane detection, aggregation and evaluation"};
  app.name("symm");
  app.require_subcommand(1);
  bool json_errors = false;
  app.add_flag("--json-errors", json_errors, "Report errors as JSON on stderr");

  // detect
  auto* detect = app.add_subcommand("detect", "Detect symmetry planes on a mesh");
  std::string detect_in, detect_out;
  DetectFlags detect_flags;
  detect->add_option("mesh", detect_in, "OBJ or PLY mesh")->required();
  add_detect_flags(detect, detect_flags);
  detect->add_option("-o,--output", detect_out, "Output plane set (default stdout)");

  // aggregate
  auto* aggregate = app.add_subcommand("aggregate", "Cluster per-view predictions into consensus planes");
  std::vector<std::string> view_files;
  std::string aggregate_out;
  AggregationConfig agg_cfg;
  double prob_threshold = kDefaultProbThreshold;
  aggregate->add_option("views", view_files, "Per-view prediction files")->required();
  aggregate->add_option("--threshold-deg", agg_cfg.cluster_threshold_deg, "Clustering threshold")
      ->capture_default_str();
  aggregate->add_option("--min-support", agg_cfg.min_cluster_size, "Minimum cluster size")->capture_default_str();
  aggregate->add_option("--confidence-floor", agg_cfg.confidence_floor, "Drop predictions below this confidence")
      ->capture_default_str();
  aggregate->add_option("--prob-threshold", prob_threshold, "Hypothesis probability threshold")
      ->capture_default_str();
  aggregate->add_option("-o,--output", aggregate_out, "Output plane set (default stdout)");

  // evaluate
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Score predicted planes against ground truth");
  std::string pred_file, gt_file, eval_out;
  std::vector<double> thresholds = kDefaultThresholdsDeg;
  bool one_to_one = false;
  evaluate_cmd->add_option("--pred", pred_file, "Predicted plane set")->required();
  evaluate_cmd->add_option("--gt", gt_file, "Ground-truth plane set")->required();
  evaluate_cmd->add_option("--thresholds", thresholds, "Angular thresholds in degrees")->delimiter(',');
  evaluate_cmd->add_flag("--one-to-one", one_to_one, "Use one-to-one (Hungarian) matching");
  evaluate_cmd->add_option("-o,--output", eval_out, "Output CSV (default stdout)");

  // align
  auto* align = app.add_subcommand("align", "Fit a symmetry plane near a given normal direction");
  std::string align_in, align_out;
  std::vector<double> direction;
  std::size_t align_points = 10000;
  std::uint64_t align_seed = 0;
  align->add_option("input", align_in, "Cloud or mesh (meshes are surface-sampled)")->required();
  align->add_option("--direction", direction, "Initial normal x,y,z")->required()->delimiter(',')->expected(3);
  align->add_option("--points", align_points, "Surface samples for mesh input")->capture_default_str();
  align->add_option("--seed", align_seed, "Sampling seed")->capture_default_str();
  align->add_option("-o,--output", align_out, "Output plane set (default stdout)");

  // densify
  auto* densify_cmd = app.add_subcommand("densify", "Append reflected points across a plane");
  std::string densify_in, densify_plane, densify_out;
  double fraction = kDefaultDensifyFraction;
  std::uint64_t densify_seed = 0;
  densify_cmd->add_option("cloud", densify_in, "Input cloud (PLY or OBJ vertices)")->required();
  densify_cmd->add_option("--plane", densify_plane, "Plane set; its first plane is used")->required();
  densify_cmd->add_option("--fraction", fraction, "Fraction of points to reflect")->capture_default_str();
  densify_cmd->add_option("--seed", densify_seed, "Selection seed")->capture_default_str();
  densify_cmd->add_option("-o,--output", densify_out, "Output PLY")->required();

  // gt-gen
  auto* gtgen = app.add_subcommand("gt-gen", "Detect planes for every mesh in a directory");
  std::string gt_dir, gt_out = "gt";
  DetectFlags gt_flags;
  std::size_t jobs = 1;
  gtgen->add_option("dir", gt_dir, "Directory of OBJ/PLY meshes")->required();
  add_detect_flags(gtgen, gt_flags);
  gtgen->add_option("--jobs", jobs, "Objects processed in parallel")->capture_default_str();
  gtgen->add_option("-o,--output", gt_out, "Output directory")->capture_default_str();

  // hypo-targets
  auto* hypo = app.add_subcommand("hypo-targets", "Per-hypothesis training targets for a plane set");
  std::string hypo_gt, hypo_out;
  std::size_t n_hyp = kDefaultHypotheses;
  hypo->add_option("--gt", hypo_gt, "Ground-truth plane set")->required();
  hypo->add_option("--n", n_hyp, "Number of hypotheses")->capture_default_str();
  hypo->add_option("-o,--output", hypo_out, "Output targets (default stdout)");

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
      return 0;
    }
    if (json_errors || std::find(args.begin(), args.end(), "--json-errors") != args.end()) {
      err << nlohmann::json{{"error", "UsageError"}, {"message", e.what()}}.dump() << '\n';
    } else {
      err << "error: " << e.what() << '\n';
    }
    return 2;
  }

  try {
    if (*detect) {
      const DetectorConfig cfg = detect_flags.config();
      const DetectedPlaneSet set = detect_planes(io::load_mesh(detect_in), cfg, detect_flags.seed);
      emit(detect_out, io::format_plane_set(io::to_document(set)), out);
    } else if (*aggregate) {
      agg_cfg.validate();
      std::vector<ViewPredictions> views;
      for (const auto& f : view_files) {
        std::vector<std::string> warnings;
        views.push_back(io::to_view_predictions(io::load_view_predictions(f, &warnings), prob_threshold));
        report_warnings(warnings, err);
      }
      emit(aggregate_out, io::format_plane_set(io::to_document(aggregate_views(views, agg_cfg))), out);
    } else if (*evaluate_cmd) {
      std::vector<std::string> warnings;
      const auto pred = io::load_plane_set(pred_file, &warnings);
      const auto gt = io::load_plane_set(gt_file, &warnings);
      report_warnings(warnings, err);
      const auto pn = io::normals_of(pred);
      const auto gn = io::normals_of(gt);
      io::MetricsRow row{fs::path(pred_file).stem().string(),
                         symm::evaluate(pn, gn, thresholds, one_to_one ? MatchMode::OneToOne : MatchMode::Nearest)};
      std::ostringstream csv;
      io::write_metrics_csv(csv, {row}, thresholds);
      emit(eval_out, csv.str(), out);
    } else if (*align) {
      const PointCloud cloud = load_points(align_in, align_points, align_seed);
      const AlignmentResult a = align_plane(cloud, UnitVector3(direction[0], direction[1], direction[2]));
      io::PlaneSetDocument doc;
      doc.planes.push_back(io::to_record(a.plane, 1.0, a.residual));
      emit(align_out, io::format_plane_set(doc), out);
    } else if (*densify_cmd) {
      std::vector<std::string> warnings;
      const auto doc = io::load_plane_set(densify_plane, &warnings);
      report_warnings(warnings, err);
      if (doc.planes.empty()) throw Error(ErrorCode::SchemaError, densify_plane + ": plane set is empty");
      const PointCloud cloud = io::load_cloud(densify_in);
      io::save_cloud(densify_out, densify(cloud, io::to_plane(doc.planes.front()), fraction, densify_seed));
    } else if (*gtgen) {
      const DetectorConfig cfg = gt_flags.config();
      if (jobs == 0) throw Error(ErrorCode::InvalidArgument, "--jobs must be at least 1");
      if (!fs::is_directory(gt_dir)) throw Error(ErrorCode::IoError, gt_dir + " is not a directory");
      std::vector<fs::path> files;
      for (const auto& e : fs::directory_iterator(gt_dir)) {
        std::string ext = e.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
        if (e.is_regular_file() && (ext == ".obj" || ext == ".ply")) files.push_back(e.path());
      }
      std::sort(files.begin(), files.end());
      fs::create_directories(gt_out);

      std::vector<BatchResult> results(files.size());
      std::atomic<std::size_t> next{0};
      auto worker = [&] {
        for (std::size_t i = next++; i < files.size(); i = next++) results[i] = run_one(files[i], cfg, gt_flags.seed);
      };
      std::vector<std::thread> pool;
      for (std::size_t t = 1; t < std::min(jobs, files.size()); ++t) pool.emplace_back(worker);
      worker();
      for (auto& t : pool) t.join();

      std::string summary = "id,status,n_planes,min_residual,error\n";
      std::size_t failed = 0;
      for (const auto& r : results) {
        if (r.planes) {
          io::write_file(fs::path(gt_out) / (r.id + ".json"), io::format_plane_set(io::to_document(*r.planes)));
          const auto& planes = r.planes->planes;
          summary += csv_field(r.id) + ",ok," + std::to_string(planes.size()) + "," +
                     (planes.empty() ? "" : io::format_number(planes.front().residual)) + ",\n";
        } else {
          ++failed;
          summary += csv_field(r.id) + ",failed,,," + csv_field(r.error_code + ": " + r.error) + "\n";
          err << "error: " << r.id << ": " << r.error << '\n';
        }
      }
      io::write_file(fs::path(gt_out) / "summary.csv", summary);
      if (failed) {
        throw Error(ErrorCode::IoError,
                    std::to_string(failed) + " of " + std::to_string(results.size()) + " objects failed");
      }
    } else if (*hypo) {
      std::vector<std::string> warnings;
      const auto doc = io::load_plane_set(hypo_gt, &warnings);
      report_warnings(warnings, err);
      const HypothesisBank bank(n_hyp);
      const auto gt = io::normals_of(doc);
      const TrainingTargets t = assign_ground_truth(bank, gt);
      for (const auto& w : t.warnings) {
        err << "warning: ground truth " << w.dropped_gt << " collides with " << w.kept_gt << " on hypothesis "
            << w.hypothesis << "\n";
      }
      emit(hypo_out, io::format_training_targets(bank, t), out);
    }
  } catch (const Error& e) {
    if (json_errors) {
      err << nlohmann::json{{"error", std::string(to_string(e.code()))}, {"message", e.what()}}.dump() << '\n';
    } else {
      err << "error: " << e.what() << '\n';
    }
    return 1;
  } catch (const std::exception& e) {
    if (json_errors) {
      err << nlohmann::json{{"error", "InternalError"}, {"message", e.what()}}.dump() << '\n';
    } else {
      err << "error: " << e.what() << '\n';
    }
    return 1;
  }
  return 0;
}

} // namespace symm::cli
