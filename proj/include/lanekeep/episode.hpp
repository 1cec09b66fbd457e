#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lanekeep/birdseye.hpp"
#include "lanekeep/blob.hpp"
#include "lanekeep/config.hpp"
#include "lanekeep/control.hpp"
#include "lanekeep/error.hpp"
#include "lanekeep/homography.hpp"
#include "lanekeep/hough.hpp"
#include "lanekeep/image.hpp"
#include "lanekeep/mlp.hpp"
#include "lanekeep/pnm.hpp"
#include "lanekeep/render.hpp"
#include "lanekeep/track.hpp"
#include "lanekeep/vehicle.hpp"

namespace lanekeep
{

// Turns a camera frame into a deflection, or nothing when the lane is not found.
class Perception
{
public:
  Perception(const DetectorConfig &cfg, const VehicleParams &vehicle, int width, int height)
      : cfg_(cfg), roi_(bottom_roi(width, height, cfg.roi_fraction)), ground_to_image_(analytic_homography(vehicle.cam))
  {
    if (cfg.type == DetectorType::birdseye && !cfg.homography_file.empty())
      ground_to_image_ = Homography(read_homography_file(cfg.homography_file));
    if (cfg_.blob.axis_x < 0)
      cfg_.blob.axis_x = vehicle.cam.cx;
    axis_x_ = vehicle.cam.cx;
  }

  std::optional<double> operator()(const GrayImage &frame) const
  {
    std::optional<LaneEstimate> est;
    switch (cfg_.type)
    {
    case DetectorType::blob:
      est = detect_blobs(apply_roi(threshold(frame, cfg_.threshold, cfg_.invert), roi_), cfg_.blob).estimate;
      break;
    case DetectorType::hough:
      est = detect_hough(apply_roi(threshold(frame, cfg_.threshold, cfg_.invert), roi_), roi_, cfg_.hough, axis_x_)
                .estimate;
      break;
    case DetectorType::birdseye:
      est = detect_birdseye(frame, ground_to_image_, cfg_.birdseye, cfg_.threshold, cfg_.invert, cfg_.k_offset)
                .estimate;
      break;
    }
    if (!est)
      return std::nullopt;
    return est->deflection;
  }

private:
  DetectorConfig cfg_;
  RectRoi roi_;
  Homography ground_to_image_;
  double axis_x_ = 0.0;
};

// Any of the three steering laws behind one interface.
class Controller
{
public:
  Controller(const ControllerConfig &cfg, double dt, std::optional<MlpPolicy> policy = std::nullopt)
      : cfg_(cfg), dt_(dt), policy_(std::move(policy))
  {
    if (cfg_.type == ControllerType::nn && !policy_)
    {
      if (cfg_.policy_file.empty())
        throw ConfigError("nn controller needs controller.policy_file");
      policy_ = read_policy_file(cfg_.policy_file);
    }
    if (policy_)
      policy_->validate();
  }

  SteeringCmd step(double deflection)
  {
    switch (cfg_.type)
    {
    case ControllerType::normal:
      if (!std::isfinite(deflection))
        throw ControllerFault("non-finite deflection");
      return openloop_step(deflection, cfg_.dead_band);
    case ControllerType::pid: {
      auto [cmd, next] = pid_step(state_, deflection, dt_, cfg_.pid);
      state_ = next;
      return cmd;
    }
    case ControllerType::nn: {
      auto [features, next] = advance_error_state(state_, deflection, dt_, cfg_.pid.integral_clamp);
      state_ = next;
      const SteeringCmd cmd = mlp_forward(*policy_, features.scaled());
      if (!std::isfinite(cmd.servo))
        throw ControllerFault("network produced a non-finite command");
      return cmd;
    }
    }
    return {servo_center};
  }

  const PidState &error_state() const { return state_; }

private:
  ControllerConfig cfg_;
  double dt_;
  std::optional<MlpPolicy> policy_;
  PidState state_{};
};

enum class TerminalStatus
{
  completed,
  off_track,
  fault
};

inline std::string to_string(TerminalStatus s)
{
  switch (s)
  {
  case TerminalStatus::completed:
    return "completed";
  case TerminalStatus::off_track:
    return "off-track";
  case TerminalStatus::fault:
    return "fault";
  }
  return "?";
}

inline TerminalStatus parse_terminal_status(const std::string &s)
{
  if (s == "completed")
    return TerminalStatus::completed;
  if (s == "off-track")
    return TerminalStatus::off_track;
  if (s == "fault")
    return TerminalStatus::fault;
  throw FormatError("unknown terminal status '" + s + "'");
}

struct EpisodeRow
{
  double t = 0, x = 0, y = 0, psi = 0, v = 0;
  double deflection = 0, steering = servo_center, speed_cmd = 0;
  double lateral_offset = 0, heading_error = 0;
  bool detector_failure = false;

  bool operator==(const EpisodeRow &) const = default;
};

struct EpisodeMeta
{
  std::string track_id;
  std::string detector;
  std::string controller;
  std::uint64_t seed = 0;
  double dt = 0.05;
  double duration = 0;

  bool operator==(const EpisodeMeta &) const = default;
};

struct EpisodeLog
{
  EpisodeMeta meta;
  std::vector<EpisodeRow> rows;
  TerminalStatus status = TerminalStatus::completed;
  std::string reason;
  double laps = 0; // centreline progress divided by track length

  std::vector<double> column(double EpisodeRow::*field) const
  {
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto &r : rows)
      out.push_back(r.*field);
    return out;
  }
  std::size_t failures() const
  {
    std::size_t n = 0;
    for (const auto &r : rows)
      n += r.detector_failure;
    return n;
  }
};

// Six significant digits, the precision written to the log.
inline double quantize(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return std::strtod(buf, nullptr);
}

inline std::size_t step_count(double duration, double dt) { return static_cast<std::size_t>(std::llround(duration / dt)); }

// Initial pose: start of the track with seeded jitter on offset and heading.
inline VehicleState initial_state(const Track &track, const SimConfig &sim)
{
  std::mt19937_64 rng(mix_seed(sim.seed, 0x5eedull));
  std::normal_distribution<double> unit(0.0, 1.0);
  const double offset = sim.initial_offset_sigma * unit(rng);
  const double heading = sim.initial_heading_sigma * unit(rng);
  return state_on_track(track, 0.0, offset, heading);
}

struct StepHooks
{
  // Replaces the executed steering after the controller ran (expert perturbation).
  std::function<double(std::size_t step, double servo)> perturb;
  // Observes each successful control step: error state before the step and chosen command.
  std::function<void(const ErrorFeatures &, double servo)> observe;
  std::string frame_dir;
};

inline EpisodeLog run_episode(const RunConfig &cfg, const std::optional<MlpPolicy> &policy = std::nullopt,
                              const StepHooks &hooks = {})
{
  cfg.validate();
  const Track track(cfg.track);
  RenderSpec render = cfg.render;
  render.seed = cfg.sim.seed;
  const Perception perceive(cfg.detector, cfg.vehicle, render.width, render.height);
  Controller controller(cfg.controller, cfg.sim.dt, policy);

  EpisodeLog log;
  log.meta = {track_id(cfg.track), to_string(cfg.detector.type), to_string(cfg.controller.type),
              cfg.sim.seed,         cfg.sim.dt,                    cfg.sim.duration};
  if (!hooks.frame_dir.empty())
    std::filesystem::create_directories(hooks.frame_dir);

  const std::size_t n = step_count(cfg.sim.duration, cfg.sim.dt);
  log.rows.reserve(n);
  VehicleState state = initial_state(track, cfg.sim);
  double last_servo = servo_center;
  double last_deflection = 0.0;
  double prev_s = 0.0, unwrapped = 0.0;
  const double length = track.length();

  for (std::size_t k = 0; k < n; ++k)
  {
    LateralError err;
    try
    {
      err = lateral_error(track, state);
    }
    catch (const OffTrack &e)
    {
      log.status = TerminalStatus::off_track;
      log.reason = e.what();
      break;
    }
    if (k == 0)
      prev_s = err.arclength;
    double ds = err.arclength - prev_s;
    if (cfg.track.closed)
      ds -= length * std::round(ds / length);
    unwrapped += ds;
    prev_s = err.arclength;
    log.laps = unwrapped / length;

    const GrayImage frame = render_frame(track, state, cfg.vehicle, render, k);
    if (!hooks.frame_dir.empty())
    {
      char name[32];
      std::snprintf(name, sizeof name, "frame_%06zu.pgm", k + 1);
      write_pnm_file((std::filesystem::path(hooks.frame_dir) / name).string(), frame);
    }

    EpisodeRow row;
    row.t = static_cast<double>(k) * cfg.sim.dt;
    row.x = state.x;
    row.y = state.y;
    row.psi = state.psi;
    row.v = state.v;
    row.lateral_offset = err.offset;
    row.heading_error = err.heading_error;

    double servo = last_servo;
    double speed = 0.0;
    try
    {
      const std::optional<double> deflection = perceive(frame);
      if (deflection)
      {
        const ErrorFeatures before = advance_error_state(controller.error_state(), *deflection, cfg.sim.dt,
                                                         cfg.controller.pid.integral_clamp)
                                         .first;
        servo = controller.step(*deflection).servo;
        if (hooks.observe)
          hooks.observe(before, servo);
        if (hooks.perturb)
          servo = std::clamp(hooks.perturb(k, servo), servo_min, servo_max);
        speed = speed_law(*deflection, cfg.controller.v_floor, cfg.controller.v_ceil);
        last_deflection = *deflection;
      }
      else
      {
        row.detector_failure = true;
        speed = 0.5 * speed_law(last_deflection, cfg.controller.v_floor, cfg.controller.v_ceil);
      }
    }
    catch (const ControllerFault &e)
    {
      log.status = TerminalStatus::fault;
      log.reason = e.what();
      break;
    }
    row.deflection = last_deflection;
    row.steering = servo;
    row.speed_cmd = speed;
    last_servo = servo;

    for (double *f : {&row.t, &row.x, &row.y, &row.psi, &row.v, &row.deflection, &row.steering, &row.speed_cmd,
                      &row.lateral_offset, &row.heading_error})
      *f = quantize(*f);
    log.rows.push_back(row);

    state = step_vehicle(state, cfg.vehicle, servo, speed, cfg.sim.dt);
  }
  log.laps = quantize(log.laps);
  return log;
}

inline const char *log_header = "t,x,y,psi,v,deflection,steering,speed_cmd,lateral_offset,heading_error,detector_failure";

inline std::string format_log(const EpisodeLog &log)
{
  std::ostringstream out;
  char buf[64];
  out << "# track=" << log.meta.track_id << "\n";
  out << "# detector=" << log.meta.detector << "\n";
  out << "# controller=" << log.meta.controller << "\n";
  out << "# seed=" << log.meta.seed << "\n";
  std::snprintf(buf, sizeof buf, "%.17g", log.meta.dt);
  out << "# dt=" << buf << "\n";
  std::snprintf(buf, sizeof buf, "%.17g", log.meta.duration);
  out << "# duration=" << buf << "\n";
  out << "# status=" << to_string(log.status) << "\n";
  if (!log.reason.empty())
    out << "# reason=" << log.reason << "\n";
  std::snprintf(buf, sizeof buf, "%.6g", log.laps);
  out << "# laps=" << buf << "\n";
  out << log_header << "\n";
  for (const auto &r : log.rows)
  {
    for (double v : {r.t, r.x, r.y, r.psi, r.v, r.deflection, r.steering, r.speed_cmd, r.lateral_offset,
                     r.heading_error})
    {
      std::snprintf(buf, sizeof buf, "%.6g,", v);
      out << buf;
    }
    out << (r.detector_failure ? 1 : 0) << "\n";
  }
  return out.str();
}

inline EpisodeLog parse_log(std::istream &in)
{
  EpisodeLog log;
  std::string line;
  bool header = false;
  std::size_t lineno = 0;
  while (std::getline(in, line))
  {
    ++lineno;
    if (line.empty())
      continue;
    if (line[0] == '#')
    {
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        continue;
      const std::string key = line.substr(2, eq - 2), value = line.substr(eq + 1);
      if (key == "track")
        log.meta.track_id = value;
      else if (key == "detector")
        log.meta.detector = value;
      else if (key == "controller")
        log.meta.controller = value;
      else if (key == "seed")
        log.meta.seed = std::stoull(value);
      else if (key == "dt")
        log.meta.dt = std::stod(value);
      else if (key == "duration")
        log.meta.duration = std::stod(value);
      else if (key == "status")
        log.status = parse_terminal_status(value);
      else if (key == "reason")
        log.reason = value;
      else if (key == "laps")
        log.laps = std::stod(value);
      continue;
    }
    if (!header)
    {
      if (line != log_header)
        throw FormatError("log header mismatch on line " + std::to_string(lineno));
      header = true;
      continue;
    }
    std::vector<double> v;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ','))
    {
      try
      {
        v.push_back(std::stod(cell));
      }
      catch (const std::exception &)
      {
        throw FormatError("bad number '" + cell + "' on line " + std::to_string(lineno));
      }
    }
    if (v.size() != 11)
      throw FormatError("expected 11 columns on line " + std::to_string(lineno));
    log.rows.push_back({v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8], v[9], v[10] != 0.0});
  }
  if (!header)
    throw FormatError("log has no header row");
  return log;
}

inline void write_log_file(const std::string &path, const EpisodeLog &log)
{
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error("cannot write " + path);
  out << format_log(log);
}

inline EpisodeLog read_log_file(const std::string &path)
{
  std::ifstream in(path);
  if (!in)
    throw Error("cannot open " + path);
  return parse_log(in);
}

struct DemonstrationSet
{
  std::vector<Sample> samples;
  std::vector<EpisodeLog> episodes;
};

// PID expert with Gaussian noise on the executed command; labels stay unperturbed.
inline DemonstrationSet collect_demonstrations(const RunConfig &base, int episodes, const PidGains &expert, double sigma)
{
  if (episodes < 1)
    throw ArityError("need at least one demonstration episode");
  DemonstrationSet out;
  for (int e = 0; e < episodes; ++e)
  {
    RunConfig cfg = base;
    cfg.controller.type = ControllerType::pid;
    cfg.controller.pid = expert;
    cfg.sim.duration = base.training.episode_duration;
    cfg.sim.seed = mix_seed(base.training.train.seed, static_cast<std::uint64_t>(e) + 1000);
    std::mt19937_64 rng(mix_seed(cfg.sim.seed, 0xd3e0ull));
    std::normal_distribution<double> noise(0.0, 1.0);
    StepHooks hooks;
    hooks.observe = [&](const ErrorFeatures &f, double servo) { out.samples.push_back({f.scaled(), servo}); };
    hooks.perturb = [&](std::size_t, double servo) { return servo + sigma * noise(rng); };
    out.episodes.push_back(run_episode(cfg, std::nullopt, hooks));
  }
  if (out.samples.empty())
    throw ArityError("demonstrations produced no samples");
  return out;
}

} // namespace lanekeep
