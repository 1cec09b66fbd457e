#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "lanekeep/compare.hpp"
#include "lanekeep/config.hpp"
#include "lanekeep/episode.hpp"
#include "lanekeep/homography.hpp"
#include "lanekeep/pnm.hpp"
#include "lanekeep/stats.hpp"

namespace fs = std::filesystem;
using namespace lanekeep;

namespace
{

void write_text(const fs::path &path, const std::string &text)
{
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error("cannot write " + path.string());
  out << text;
}

std::string summary_text(const EpisodeLog &log)
{
  std::ostringstream out;
  char buf[128];
  out << "status " << to_string(log.status);
  if (!log.reason.empty())
    out << " (" << log.reason << ")";
  std::snprintf(buf, sizeof buf, "\nsteps %zu  laps %.3f  detector failures %zu\n", log.rows.size(), log.laps,
                log.failures());
  out << buf;
  if (log.rows.empty())
    return out.str();
  std::snprintf(buf, sizeof buf, "%-12s %12s %12s %12s\n", "", "deflection", "steering", "offset");
  out << buf;
  const auto d = stat_values(describe(log.column(&EpisodeRow::deflection)));
  const auto s = stat_values(describe(log.column(&EpisodeRow::steering)));
  const auto o = stat_values(describe(log.column(&EpisodeRow::lateral_offset), 0.01));
  for (std::size_t i = 0; i < stat_rows.size(); ++i)
  {
    std::snprintf(buf, sizeof buf, "%-12s %12.2f %12.2f %12.4f\n", stat_rows[i], d[i], s[i], o[i]);
    out << buf;
  }
  return out.str();
}

int cmd_simulate(const std::string &config_path, const std::string &out_dir)
{
  const RunConfig cfg = read_config_file(config_path);
  fs::create_directories(out_dir);
  StepHooks hooks;
  if (cfg.sim.dump_frames)
    hooks.frame_dir = (fs::path(out_dir) / "frames").string();
  const EpisodeLog log = run_episode(cfg, std::nullopt, hooks);
  write_log_file((fs::path(out_dir) / "log.csv").string(), log);
  const std::string summary = summary_text(log);
  write_text(fs::path(out_dir) / "summary.txt", summary);
  std::cout << summary;
  return log.status == TerminalStatus::completed ? 0 : 2;
}

int cmd_detect(const std::string &image_path, const std::string &method, const std::string &params_path,
               const std::string &warped_out)
{
  RunConfig cfg;
  if (!params_path.empty())
    cfg = read_config_file(params_path);
  cfg.detector.type = parse_detector_type(method);
  const GrayImage img = read_pnm_file(image_path);
  const RectRoi roi = bottom_roi(img.width(), img.height(), cfg.detector.roi_fraction);
  const double axis = 0.5 * (img.width() - 1);
  std::optional<LaneEstimate> est;
  char buf[160];
  if (cfg.detector.type == DetectorType::blob)
  {
    BlobParams p = cfg.detector.blob;
    p.axis_x = axis;
    const auto det = detect_blobs(apply_roi(threshold(img, cfg.detector.threshold, cfg.detector.invert), roi), p);
    std::cout << "label     area        cx        cy  xmin  ymin  xmax  ymax  orientation\n";
    for (const auto &b : det.blobs)
    {
      std::snprintf(buf, sizeof buf, "%5d %8ld %9.2f %9.2f %5d %5d %5d %5d %12.4f\n", b.label, b.area, b.centroid.x,
                    b.centroid.y, b.bbox.xmin, b.bbox.ymin, b.bbox.xmax, b.bbox.ymax, b.orientation);
      std::cout << buf;
    }
    est = det.estimate;
  }
  else if (cfg.detector.type == DetectorType::hough)
  {
    const auto det =
        detect_hough(apply_roi(threshold(img, cfg.detector.threshold, cfg.detector.invert), roi), roi,
                     cfg.detector.hough, axis);
    std::cout << "     rho   theta(deg)  votes\n";
    for (const auto &l : det.peaks)
    {
      std::snprintf(buf, sizeof buf, "%8.1f %12.2f %6d\n", l.rho, l.theta * 180.0 / std::numbers::pi, l.votes);
      std::cout << buf;
    }
    est = det.estimate;
  }
  else
  {
    const Homography h = cfg.detector.homography_file.empty() ? analytic_homography(cfg.vehicle.cam)
                                                              : read_homography_file(cfg.detector.homography_file);
    const auto det = detect_birdseye(img, h, cfg.detector.birdseye, cfg.detector.threshold, cfg.detector.invert,
                                     cfg.detector.k_offset);
    if (!warped_out.empty())
    {
      write_pnm_file(warped_out, det.warped);
      std::cout << "warped view written to " << warped_out << "\n";
    }
    est = det.estimate;
  }
  if (!est)
  {
    std::cout << "lane not found\n";
    return 2;
  }
  std::snprintf(buf, sizeof buf, "bottom (%.2f, %.2f) top (%.2f, %.2f)\ndeflection %.2f\n", est->bottom.x,
                est->bottom.y, est->top.x, est->top.y, est->deflection);
  std::cout << buf;
  return 0;
}

int cmd_calibrate(const std::string &pairs_path, const std::string &out_path)
{
  const auto est = estimate_homography(read_correspondences_file(pairs_path));
  const std::string text = format_homography(est.h);
  std::cout << text;
  std::printf("mean reprojection error %.3e px\n", est.mean_reprojection_error);
  if (!out_path.empty())
    write_text(out_path, text);
  return 0;
}

int cmd_train(const std::string &config_path, int episodes, double sigma, const std::string &out_path)
{
  const RunConfig cfg = read_config_file(config_path);
  const TrainingOutcome t = train_policy(cfg, episodes, sigma);
  write_policy_file(out_path, t.result.policy);
  std::printf("samples %zu (train %zu, held-out %zu)\nbest epoch %d\ntrain rmse %.4f deg\nheld-out rmse %.4f deg\n",
              t.samples, t.result.train_size, t.result.heldout_size, t.result.best_epoch, t.result.train_rmse,
              t.result.heldout_rmse);
  return 0;
}

int cmd_compare(const std::string &config_path, const std::string &out_dir)
{
  const RunConfig cfg = read_config_file(config_path);
  const CompareOutcome c = run_compare(cfg);
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  const std::array<const char *, 3> names{"normal", "pid", "neural"};
  for (std::size_t i = 0; i < names.size(); ++i)
    write_log_file((dir / (std::string("log_") + names[i] + ".csv")).string(), c.logs[i]);
  if (c.training)
  {
    write_policy_file((dir / "policy.txt").string(), c.policy);
    std::printf("trained policy on %zu samples, held-out rmse %.4f deg\n", c.training->samples,
                c.training->result.heldout_rmse);
  }
  const std::string table = format_report_text(c.report);
  write_text(dir / "report.txt", table);
  write_text(dir / "report.csv", format_report_csv(c.report));
  write_text(dir / "plot.svg", compare_svg(c));
  std::cout << table;
  for (std::size_t i = 0; i < names.size(); ++i)
    std::printf("%-7s %-9s laps %.2f\n", names[i], to_string(c.logs[i].status).c_str(), c.logs[i].laps);
  return 0;
}

} // namespace

int main(int argc, char **argv)
{
  CLI::App app{"lanekeep: camera lane-keeping simulator and controller comparison"};
  app.require_subcommand(1);

  std::string config, out, image, method, params, warped, pairs;
  int episodes = 0;
  double sigma = 0;

  auto *sim = app.add_subcommand("simulate", "run one episode and write its log");
  sim->add_option("config", config, "run configuration (JSON)")->required()->check(CLI::ExistingFile);
  sim->add_option("--out", out, "output directory")->default_val("out");

  auto *det = app.add_subcommand("detect", "run a lane detector on one PGM/PPM frame");
  det->add_option("image", image, "input frame")->required()->check(CLI::ExistingFile);
  det->add_option("--method", method, "blob | hough | birdseye")->required();
  det->add_option("--params", params, "run configuration supplying detector parameters")->check(CLI::ExistingFile);
  det->add_option("--warped", warped, "where to write the bird's-eye view");

  auto *cal = app.add_subcommand("calibrate", "estimate a ground-to-image homography");
  cal->add_option("pairs", pairs, "correspondence file: u v X Y per line")->required()->check(CLI::ExistingFile);
  cal->add_option("--out", out, "write the matrix here");

  auto *train = app.add_subcommand("train-nn", "clone the PID expert into an MLP policy");
  train->add_option("config", config, "run configuration (JSON)")->required()->check(CLI::ExistingFile);
  train->add_option("--episodes", episodes, "demonstration episodes")->required();
  train->add_option("--sigma", sigma, "steering perturbation (servo degrees)")->required();
  train->add_option("--out", out, "policy file")->required();

  auto *cmp = app.add_subcommand("compare", "run normal, pid and neural on the same world");
  cmp->add_option("config", config, "run configuration (JSON)")->required()->check(CLI::ExistingFile);
  cmp->add_option("--out", out, "output directory")->default_val("out");

  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::ParseError &e)
  {
    return app.exit(e) == 0 ? 0 : 64;
  }

  try
  {
    if (*sim)
      return cmd_simulate(config, out);
    if (*det)
      return cmd_detect(image, method, params, warped);
    if (*cal)
      return cmd_calibrate(pairs, out);
    if (*train)
      return cmd_train(config, episodes, sigma, out);
    if (*cmp)
      return cmd_compare(config, out);
  }
  catch (const std::exception &e)
  {
    std::cerr << "lanekeep: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
