#include "cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>

#include <CLI11.hpp>

#include "lgc/config.hpp"
#include "lgc/corrector.hpp"
#include "lgc/distortion.hpp"
#include "lgc/error.hpp"
#include "lgc/fileutil.hpp"
#include "lgc/gradcheck.hpp"
#include "lgc/io.hpp"
#include "lgc/metrics.hpp"
#include "lgc/parallel.hpp"
#include "lgc/posegraph.hpp"
#include "lgc/sim.hpp"
#include "lgc/svo.hpp"
#include "lgc/textio.hpp"

namespace lgc::cli {
namespace {

namespace fs = std::filesystem;

struct Globals {
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  std::string config;
};

KeyValueConfig load_config_or_empty(const Globals& g) {
  return g.config.empty() ? KeyValueConfig{} : KeyValueConfig::load(g.config);
}

StereoCamera load_camera(const std::string& path) {
  const KeyValueConfig cfg = KeyValueConfig::load(path);
  StereoCamera cam = StereoCamera::from_config(cfg);
  cfg.require_all_used();
  return cam;
}

// "100 200 300" or "100..800" (step = first value) or "100..800:50".
std::vector<double> parse_segments(const std::vector<std::string>& tokens) {
  std::vector<double> out;
  for (const auto& tok : tokens) {
    const auto dots = tok.find("..");
    if (dots == std::string::npos) {
      out.push_back(text::parse_double(tok, "--segments"));
      continue;
    }
    const auto colon = tok.find(':', dots);
    const double lo = text::parse_double(tok.substr(0, dots), "--segments");
    const double hi = text::parse_double(
        tok.substr(dots + 2, colon == std::string::npos ? std::string::npos : colon - dots - 2),
        "--segments");
    const double step =
        colon == std::string::npos ? lo : text::parse_double(tok.substr(colon + 1), "--segments");
    if (!(step > 0.0) || hi < lo) fail(Errc::kInvalidArgument, "--segments: bad range " + tok);
    for (int k = 0; lo + k * step <= hi + 1e-9; ++k) out.push_back(lo + k * step);
  }
  return out;
}

void write_text(const fs::path& path, const std::string& content) {
  write_file_atomic(path, content);
}

// --- Subcommands -----------------------------------------------------------

struct SimulateArgs {
  std::string out_dir;
};

void cmd_simulate(const Globals& g, const SimulateArgs& a, std::ostream& out) {
  if (g.config.empty()) fail(Errc::kInvalidArgument, "simulate: --config <file> is required");
  KeyValueConfig cfg = KeyValueConfig::load(g.config);
  if (g.seed) cfg.set("seed", std::to_string(*g.seed));
  const SimulationConfig sim = SimulationConfig::from_config(cfg);
  const World world = generate_world(sim.world, sim.camera);
  const Observations obs = observe(world, sim.camera, sim.observe);

  // Everything is computed before the first file is written.
  const std::string gt = format_poses(world.gt);
  const std::string tracks = format_tracks(obs.tracks);
  const std::string labels = format_labels(obs.labels);
  const std::string camera = sim.camera.to_config().to_text();
  fs::create_directories(a.out_dir);
  write_text(fs::path(a.out_dir) / "gt.txt", gt);
  write_text(fs::path(a.out_dir) / "tracks.txt", tracks);
  write_text(fs::path(a.out_dir) / "labels.txt", labels);
  write_text(fs::path(a.out_dir) / "camera.cfg", camera);
  std::size_t n_tracks = 0;
  for (const auto& f : obs.tracks) n_tracks += f.size();
  out << "simulate: " << world.gt.size() << " poses, " << n_tracks << " tracks -> " << a.out_dir
      << "\n";
}

struct VoArgs {
  std::string cam, tracks, out, cov;
  std::vector<double> bias;
  int ransac_iterations = RansacOptions{}.iterations;
  double inlier_threshold = RansacOptions{}.inlier_threshold_px;
};

void cmd_vo(const Globals& g, const VoArgs& a, std::ostream& out) {
  const StereoCamera cam = load_camera(a.cam);
  const auto frames = read_tracks(a.tracks);
  PipelineOptions opt;
  opt.ransac.seed = g.seed.value_or(0);
  opt.ransac.iterations = a.ransac_iterations;
  opt.ransac.inlier_threshold_px = a.inlier_threshold;
  PipelineResult result = run_pipeline(cam, frames, opt);
  Trajectory traj = std::move(result.trajectory);
  if (!a.bias.empty()) {
    if (a.bias.size() != 6) fail(Errc::kInvalidArgument, "--bias needs 6 values");
    traj = inject_bias(traj, Twist(Eigen::Map<const Vec6>(a.bias.data())));
  }
  const std::string poses = format_poses(traj);
  const std::string covs = a.cov.empty() ? "" : format_edge_covariances(result.edge_covariances);
  write_text(a.out, poses);
  if (!a.cov.empty()) write_text(a.cov, covs);
  out << "vo: " << traj.size() << " poses -> " << a.out << "\n";
}

struct FitArgs {
  std::string gt, est, out, variant = "se3";
  std::vector<int> dp{3, 4, 5};
};

void cmd_correct_fit(const FitArgs& a, std::ostream& out) {
  const Trajectory gt = read_pose_file(a.gt);
  const Trajectory est = read_pose_file(a.est);
  const auto samples = build_correction_samples(gt, est, a.dp);
  const BiasCorrectorModel model = fit_bias(samples, parse_variant(a.variant));
  save_model(a.out, model);
  out << "correct fit: " << samples.size() << " samples, " << model.entries.size()
      << " window lengths -> " << a.out << "\n";
}

struct ApplyArgs {
  std::string model, odometry, out;
  int dp = 4;
};

void cmd_correct_apply(const ApplyArgs& a, std::ostream& out) {
  const BiasCorrectorModel model = load_model(a.model);
  const Trajectory odo = read_pose_file(a.odometry);
  const auto records = predict_corrections(model, odo, a.dp);
  save_corrections(a.out, records);
  out << "correct apply: " << records.size() << " corrections -> " << a.out << "\n";
}

struct OracleArgs {
  std::string gt, est, out;
  int dp = 4;
  double noise = 0.0;
};

void cmd_correct_oracle(const Globals& g, const OracleArgs& a, std::ostream& out) {
  const Trajectory gt = read_pose_file(a.gt);
  const Trajectory est = read_pose_file(a.est);
  const auto records = oracle_corrections(gt, est, a.dp, a.noise, g.seed.value_or(0));
  save_corrections(a.out, records);
  out << "correct oracle: " << records.size() << " corrections -> " << a.out << "\n";
}

struct FuseArgs {
  std::string odometry, corrections, out, cov, model;
  int dp = 0;
  double sigma_t = 0.05;
  double sigma_r = 0.01;
};

void cmd_fuse(const FuseArgs& a, std::ostream& out) {
  const Trajectory odo = read_pose_file(a.odometry);
  const auto records = load_corrections(a.corrections);
  for (std::size_t k = 0; k < records.size(); ++k) {
    if (records[k].frame_end - records[k].frame_start != a.dp) {
      fail(Errc::kInvalidArgument, a.corrections + ": correction " + std::to_string(k) +
                                       " spans " +
                                       std::to_string(records[k].frame_end -
                                                      records[k].frame_start) +
                                       " frames, expected --dp " + std::to_string(a.dp));
    }
  }
  FuseOptions opt;
  opt.odometry_cov = isotropic_covariance(a.sigma_t, a.sigma_r);
  if (!a.cov.empty()) opt.edge_covariances = read_edge_covariances(a.cov);
  opt.correction_cov = a.model.empty() ? opt.odometry_cov * a.dp
                                       : predict(load_model(a.model), a.dp).covariance;
  const Trajectory fused = fuse_trajectory(odo, records, opt);
  write_pose_file(a.out, fused);
  out << "fuse: " << records.size() << " windows relaxed -> " << a.out << "\n";
}

struct DistortArgs {
  std::string image, out;
  std::vector<double> kappa;
  bool crop = false;
  std::optional<double> fu, fv, cu, cv;
};

void cmd_distort(const Globals& g, const DistortArgs& a, std::ostream& out) {
  const Image img = read_pnm(a.image);
  const KeyValueConfig cfg = load_config_or_empty(g);
  // Defaults: principal point at the centre, focal length in the proportion
  // of a wide automotive camera.
  Intrinsics k;
  k.fu = a.fu.value_or(cfg.get_double("fu", 0.58 * img.width));
  k.fv = a.fv.value_or(cfg.get_double("fv", k.fu));
  k.cu = a.cu.value_or(cfg.get_double("cu", (img.width - 1) / 2.0));
  k.cv = a.cv.value_or(cfg.get_double("cv", (img.height - 1) / 2.0));
  const DistortionModel model(a.kappa.at(0), a.kappa.at(1), a.kappa.at(2));
  Image warped = warp_image(img, k, model);
  if (a.crop) {
    CropResult c = crop_valid(warped);
    const Intrinsics shifted = c.shift(k);
    write_pnm(a.out, c.image);
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "distort: crop %dx%d at (%d, %d); intrinsics fu=%.6f fv=%.6f cu=%.6f cv=%.6f\n",
                  c.image.width, c.image.height, c.offset_x, c.offset_y, shifted.fu, shifted.fv,
                  shifted.cu, shifted.cv);
    out << buf;
  } else {
    write_pnm(a.out, warped);
    out << "distort: " << warped.width << "x" << warped.height << " -> " << a.out << "\n";
  }
}

struct EvaluateArgs {
  std::string est, gt, csv, sequence = "seq", estimator = "est", corr_type = "---";
  std::vector<std::string> segments;
};

void cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
  const Trajectory est = read_pose_file(a.est);
  const Trajectory gt = read_pose_file(a.gt);
  SegmentSpec spec;
  if (!a.segments.empty()) spec.lengths = parse_segments(a.segments);
  spec.validate();
  // Arclength comes from the ground-truth positions.
  const ReportRow row = make_report_row(a.sequence, a.estimator, a.corr_type, est, gt, spec);
  const auto seg = segment_errors(est, gt, spec);
  if (!a.csv.empty()) write_text(a.csv, render_segment_csv(seg));
  out << render_report(std::span(&row, 1));
  for (const auto& s : seg) {
    if (!s.admissible()) out << "note: no segment of length " << s.length << " m fits\n";
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Lie-group pose-correction toolkit"};
  app.name("lgcorr");
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--seed", g.seed, "Random seed");
  app.add_option("--threads", g.threads, "Worker thread cap (0 = all cores)");
  app.add_option("--config", g.config, "key = value configuration file");

  std::function<int()> action;

  SimulateArgs sim;
  auto* s_sim = app.add_subcommand("simulate", "Generate a synthetic dataset");
  s_sim->add_option("--out", sim.out_dir, "Output directory")->required();
  s_sim->callback([&] { action = [&] { cmd_simulate(g, sim, out); return 0; }; });

  VoArgs vo;
  auto* s_vo = app.add_subcommand("vo", "Stereo visual odometry on keypoint tracks");
  s_vo->add_option("--cam", vo.cam, "Camera file")->required();
  s_vo->add_option("--tracks", vo.tracks, "Tracks file")->required();
  s_vo->add_option("--out", vo.out, "Output pose file")->required();
  s_vo->add_option("--cov", vo.cov, "Per-edge covariance CSV");
  s_vo->add_option("--bias", vo.bias, "Twist applied on the left of every edge")->expected(6);
  s_vo->add_option("--ransac-iterations", vo.ransac_iterations);
  s_vo->add_option("--inlier-threshold", vo.inlier_threshold, "Pixels");
  s_vo->callback([&] { action = [&] { cmd_vo(g, vo, out); return 0; }; });

  auto* s_corr = app.add_subcommand("correct", "Fit or apply correction models");
  s_corr->require_subcommand(1);
  FitArgs fit;
  auto* s_fit = s_corr->add_subcommand("fit", "Fit a constant-bias corrector");
  s_fit->add_option("--gt", fit.gt)->required();
  s_fit->add_option("--est", fit.est)->required();
  s_fit->add_option("--dp", fit.dp, "Window lengths");
  s_fit->add_option("--variant", fit.variant, "se3, so3 or yaw");
  s_fit->add_option("--out", fit.out, "Model file")->required();
  s_fit->callback([&] { action = [&] { cmd_correct_fit(fit, out); return 0; }; });
  ApplyArgs apply;
  auto* s_apply = s_corr->add_subcommand("apply", "Predict corrections for an odometry run");
  s_apply->add_option("--model", apply.model)->required();
  s_apply->add_option("--odometry", apply.odometry)->required();
  s_apply->add_option("--dp", apply.dp);
  s_apply->add_option("--out", apply.out, "Corrections file")->required();
  s_apply->callback([&] { action = [&] { cmd_correct_apply(apply, out); return 0; }; });
  OracleArgs oracle;
  auto* s_oracle = s_corr->add_subcommand("oracle", "Ground-truth corrections");
  s_oracle->add_option("--gt", oracle.gt)->required();
  s_oracle->add_option("--est", oracle.est)->required();
  s_oracle->add_option("--dp", oracle.dp);
  s_oracle->add_option("--noise", oracle.noise, "Twist noise standard deviation");
  s_oracle->add_option("--out", oracle.out)->required();
  s_oracle->callback([&] { action = [&] { cmd_correct_oracle(g, oracle, out); return 0; }; });

  FuseArgs fuse;
  auto* s_fuse = app.add_subcommand("fuse", "Fuse corrections into odometry");
  s_fuse->add_option("--odometry", fuse.odometry)->required();
  s_fuse->add_option("--corrections", fuse.corrections)->required();
  s_fuse->add_option("--dp", fuse.dp)->required();
  s_fuse->add_option("--out", fuse.out)->required();
  s_fuse->add_option("--cov", fuse.cov, "Per-edge covariance CSV from vo");
  s_fuse->add_option("--model", fuse.model, "Model supplying the correction covariance");
  s_fuse->add_option("--sigma-t", fuse.sigma_t, "Edge translation sigma (m)");
  s_fuse->add_option("--sigma-r", fuse.sigma_r, "Edge rotation sigma (rad)");
  s_fuse->callback([&] { action = [&] { cmd_fuse(fuse, out); return 0; }; });

  DistortArgs dist;
  auto* s_dist = app.add_subcommand("distort", "Apply radial distortion to a PGM/PPM image");
  s_dist->add_option("--image", dist.image)->required();
  s_dist->add_option("--kappa", dist.kappa)->expected(3)->required();
  s_dist->add_flag("--crop", dist.crop, "Crop to the largest valid rectangle");
  s_dist->add_option("--out", dist.out)->required();
  s_dist->add_option("--fu", dist.fu);
  s_dist->add_option("--fv", dist.fv);
  s_dist->add_option("--cu", dist.cu);
  s_dist->add_option("--cv", dist.cv);
  s_dist->callback([&] { action = [&] { cmd_distort(g, dist, out); return 0; }; });

  EvaluateArgs ev;
  auto* s_ev = app.add_subcommand("evaluate", "Trajectory error metrics");
  s_ev->add_option("--est", ev.est)->required();
  s_ev->add_option("--gt", ev.gt)->required();
  s_ev->add_option("--segments", ev.segments, "Lengths, or a range such as 100..800");
  s_ev->add_option("--csv", ev.csv, "Per-length segment errors");
  s_ev->add_option("--sequence", ev.sequence);
  s_ev->add_option("--estimator", ev.estimator);
  s_ev->add_option("--corr-type", ev.corr_type);
  s_ev->callback([&] { action = [&] { cmd_evaluate(ev, out); return 0; }; });

  GradcheckOptions gc;
  auto* s_gc = app.add_subcommand("gradcheck", "Finite-difference checks of analytic Jacobians");
  s_gc->add_option("--n", gc.n, "Random draws per suite");
  s_gc->add_flag("--corrupt-jacobian", gc.corrupt_jacobian)->group("");
  s_gc->callback([&] {
    action = [&] {
      gc.seed = g.seed.value_or(0);
      const GradcheckReport r = run_gradcheck(gc);
      out << r.to_text();
      return r.passed() ? 0 : 1;
    };
  });

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    err << "lgcorr: " << e.what() << "\n";
    return 2;
  }

  try {
    set_max_threads(g.threads);
    const int code = action ? action() : 0;
    set_max_threads(0);
    return code;
  } catch (const std::exception& e) {
    set_max_threads(0);
    err << "lgcorr: error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace lgc::cli
