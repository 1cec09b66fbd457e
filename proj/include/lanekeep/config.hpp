#pragma once

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "lanekeep/birdseye.hpp"
#include "lanekeep/blob.hpp"
#include "lanekeep/control.hpp"
#include "lanekeep/error.hpp"
#include "lanekeep/hough.hpp"
#include "lanekeep/image.hpp"
#include "lanekeep/mlp.hpp"
#include "lanekeep/render.hpp"
#include "lanekeep/track.hpp"
#include "lanekeep/vehicle.hpp"

namespace lanekeep
{

enum class DetectorType
{
  blob,
  hough,
  birdseye
};

enum class ControllerType
{
  normal,
  pid,
  nn
};

inline std::string to_string(DetectorType t)
{
  switch (t)
  {
  case DetectorType::blob:
    return "blob";
  case DetectorType::hough:
    return "hough";
  case DetectorType::birdseye:
    return "birdseye";
  }
  return "?";
}

inline std::string to_string(ControllerType t)
{
  switch (t)
  {
  case ControllerType::normal:
    return "normal";
  case ControllerType::pid:
    return "pid";
  case ControllerType::nn:
    return "nn";
  }
  return "?";
}

inline DetectorType parse_detector_type(const std::string &s)
{
  if (s == "blob")
    return DetectorType::blob;
  if (s == "hough")
    return DetectorType::hough;
  if (s == "birdseye")
    return DetectorType::birdseye;
  throw ConfigError("unknown detector type '" + s + "' (expected blob, hough or birdseye)");
}

inline ControllerType parse_controller_type(const std::string &s)
{
  if (s == "normal")
    return ControllerType::normal;
  if (s == "pid")
    return ControllerType::pid;
  if (s == "nn")
    return ControllerType::nn;
  throw ConfigError("unknown controller type '" + s + "' (expected normal, pid or nn)");
}

struct DetectorConfig
{
  DetectorType type = DetectorType::blob;
  int threshold = default_threshold;
  bool invert = default_invert;
  double roi_fraction = default_roi_fraction;
  BlobParams blob{};
  HoughParams hough{};
  BirdsEyeSpec birdseye{};
  double k_offset = default_k_offset;
  std::string homography_file; // empty: exact homography of the simulated camera
};

struct ControllerConfig
{
  ControllerType type = ControllerType::pid;
  PidGains pid{};
  double dead_band = default_dead_band;
  std::string policy_file;
  double v_floor = 0.3;
  double v_ceil = 0.7;
};

struct SimConfig
{
  double dt = 0.05;
  double duration = 165.0;
  std::uint64_t seed = 1;
  bool dump_frames = false;
  double initial_offset_sigma = 0.02;  // metres
  double initial_heading_sigma = 0.02; // radians
};

struct TrainingConfig
{
  TrainConfig train{};
  PidGains expert{0.3, 0.01, 0.0, 2000.0}; // demonstration PID
  int episodes = 4;
  double sigma = 5.0; // servo degrees
  double episode_duration = 45.0;
};

struct RunConfig
{
  TrackSpec track = default_track();
  RenderSpec render{};
  VehicleParams vehicle{};
  DetectorConfig detector{};
  ControllerConfig controller{};
  SimConfig sim{};
  TrainingConfig training{};

  void validate() const
  {
    Track checked(track);
    render.validate();
    vehicle.validate();
    if (detector.threshold < 0 || detector.threshold > 256)
      throw ConfigError("detector threshold must lie in [0, 256]");
    if (!(detector.roi_fraction > 0 && detector.roi_fraction <= 1))
      throw ConfigError("detector roi_fraction must lie in (0, 1]");
    if (detector.blob.connectivity != 4 && detector.blob.connectivity != 8)
      throw ConfigError("detector blob connectivity must be 4 or 8");
    detector.hough.validate();
    detector.birdseye.validate();
    controller.pid.validate();
    if (!(0.0 <= controller.v_floor && controller.v_floor <= controller.v_ceil && controller.v_ceil <= 1.0))
      throw ConfigError("controller speed needs 0 <= v_floor <= v_ceil <= 1");
    if (!(controller.dead_band >= 0))
      throw ConfigError("controller dead_band must be >= 0");
    if (!(sim.dt > 0))
      throw ConfigError("sim dt must be positive");
    if (!(sim.duration > 0))
      throw ConfigError("sim duration must be positive");
    if (!(sim.initial_offset_sigma >= 0 && sim.initial_heading_sigma >= 0))
      throw ConfigError("sim initial pose sigmas must be >= 0");
    training.train.validate();
    training.expert.validate();
    if (training.episodes < 0 || !(training.sigma >= 0) || !(training.episode_duration > 0))
      throw ConfigError("training needs episodes >= 0, sigma >= 0, episode_duration > 0");
    auto must_exist = [](const std::string &path, const char *what) {
      if (!path.empty() && !std::ifstream(path))
        throw ConfigError(std::string(what) + " '" + path + "' does not exist");
    };
    must_exist(detector.homography_file, "detector homography_file");
    must_exist(controller.policy_file, "controller policy_file");
  }
};

namespace detail
{
using nlohmann::json;

inline constexpr double deg = std::numbers::pi / 180.0;

// Reads known keys from an object and rejects anything else.
class ObjectReader
{
public:
  ObjectReader(const json &j, std::string path) : j_(j), path_(std::move(path))
  {
    if (!j_.is_object())
      throw ConfigError(path_ + " must be an object");
  }
  ~ObjectReader() noexcept(false)
  {
    if (std::uncaught_exceptions() > 0)
      return;
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key()))
        throw ConfigError("unknown key " + path_ + "." + it.key());
  }

  template <typename T> void get(const char *key, T &out)
  {
    seen_.insert(key);
    if (!j_.contains(key))
      return;
    try
    {
      out = j_.at(key).get<T>();
    }
    catch (const json::exception &)
    {
      throw ConfigError(path_ + "." + key + " has the wrong type");
    }
  }
  void get_deg(const char *key, double &radians)
  {
    double d = radians / deg;
    get(key, d);
    radians = d * deg;
  }
  const json *child(const char *key)
  {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }
  std::string sub(const char *key) const { return path_ + "." + key; }

private:
  const json &j_;
  std::string path_;
  std::set<std::string> seen_;
};

inline TrackSpec track_from_json(const json &j)
{
  TrackSpec t = default_track();
  ObjectReader r(j, "track");
  r.get("lane_width", t.lane_width);
  r.get("tape_width", t.tape_width);
  r.get("closed", t.closed);
  if (const json *segs = r.child("segments"))
  {
    if (!segs->is_array())
      throw ConfigError("track.segments must be an array");
    t.segments.clear();
    for (std::size_t i = 0; i < segs->size(); ++i)
    {
      const json &sj = (*segs)[i];
      const std::string where = "track.segments[" + std::to_string(i) + "]";
      ObjectReader sr(sj, where);
      std::string type;
      sr.get("type", type);
      if (type == "straight")
      {
        Straight s;
        sr.get("length", s.length);
        t.segments.emplace_back(s);
      }
      else if (type == "arc")
      {
        Arc a;
        std::string dir = "right";
        sr.get("radius", a.radius);
        sr.get_deg("sweep_deg", a.sweep);
        sr.get("direction", dir);
        if (dir != "left" && dir != "right")
          throw ConfigError(where + ".direction must be left or right");
        a.direction = dir == "left" ? TurnDirection::left : TurnDirection::right;
        t.segments.emplace_back(a);
      }
      else
        throw ConfigError(where + ".type must be straight or arc");
    }
  }
  return t;
}

inline json track_to_json(const TrackSpec &t)
{
  json segs = json::array();
  for (const auto &seg : t.segments)
  {
    if (const auto *s = std::get_if<Straight>(&seg))
      segs.push_back({{"type", "straight"}, {"length", s->length}});
    else
    {
      const auto &a = std::get<Arc>(seg);
      segs.push_back({{"type", "arc"},
                      {"radius", a.radius},
                      {"sweep_deg", a.sweep / deg},
                      {"direction", a.direction == TurnDirection::left ? "left" : "right"}});
    }
  }
  return {{"segments", segs}, {"lane_width", t.lane_width}, {"tape_width", t.tape_width}, {"closed", t.closed}};
}
} // namespace detail

inline RunConfig config_from_json(const nlohmann::json &j)
{
  using detail::ObjectReader;
  RunConfig c;
  ObjectReader root(j, "config");
  if (const auto *t = root.child("track"))
    c.track = detail::track_from_json(*t);
  if (const auto *rj = root.child("render"))
  {
    ObjectReader r(*rj, "render");
    r.get("width", c.render.width);
    r.get("height", c.render.height);
    r.get("tape_intensity", c.render.tape_intensity);
    r.get("ground_intensity", c.render.ground_intensity);
    r.get("noise_sigma", c.render.noise_sigma);
  }
  if (const auto *vj = root.child("vehicle"))
  {
    ObjectReader r(*vj, "vehicle");
    r.get("wheelbase", c.vehicle.wheelbase);
    r.get_deg("delta_max_deg", c.vehicle.delta_max);
    r.get("v_max", c.vehicle.v_max);
    r.get("mount_offset", c.vehicle.mount_offset);
    if (const auto *cj = r.child("camera"))
    {
      ObjectReader cr(*cj, "vehicle.camera");
      cr.get("fx", c.vehicle.cam.fx);
      cr.get("fy", c.vehicle.cam.fy);
      cr.get("cx", c.vehicle.cam.cx);
      cr.get("cy", c.vehicle.cam.cy);
      cr.get("height", c.vehicle.cam.height);
      cr.get_deg("pitch_deg", c.vehicle.cam.pitch);
    }
  }
  if (const auto *dj = root.child("detector"))
  {
    ObjectReader r(*dj, "detector");
    std::string type = to_string(c.detector.type);
    r.get("type", type);
    c.detector.type = parse_detector_type(type);
    r.get("threshold", c.detector.threshold);
    r.get("invert", c.detector.invert);
    r.get("roi_fraction", c.detector.roi_fraction);
    if (const auto *bj = r.child("blob"))
    {
      ObjectReader br(*bj, "detector.blob");
      br.get("connectivity", c.detector.blob.connectivity);
      br.get("min_area", c.detector.blob.min_area);
    }
    if (const auto *hj = r.child("hough"))
    {
      ObjectReader hr(*hj, "detector.hough");
      hr.get("theta_bins", c.detector.hough.theta_bins);
      hr.get("rho_resolution", c.detector.hough.rho_resolution);
      hr.get("peak_threshold", c.detector.hough.peak_threshold);
      hr.get("nms_radius", c.detector.hough.nms_radius);
      hr.get("max_peaks", c.detector.hough.max_peaks);
    }
    if (const auto *ej = r.child("birdseye"))
    {
      ObjectReader er(*ej, "detector.birdseye");
      er.get("out_width", c.detector.birdseye.out_width);
      er.get("out_height", c.detector.birdseye.out_height);
      er.get("meters_per_pixel", c.detector.birdseye.meters_per_pixel);
      er.get("origin_x", c.detector.birdseye.origin.x);
      er.get("origin_y", c.detector.birdseye.origin.y);
      er.get("k_offset", c.detector.k_offset);
      er.get("homography_file", c.detector.homography_file);
    }
  }
  if (const auto *cj = root.child("controller"))
  {
    ObjectReader r(*cj, "controller");
    std::string type = to_string(c.controller.type);
    r.get("type", type);
    c.controller.type = parse_controller_type(type);
    if (const auto *pj = r.child("pid"))
    {
      ObjectReader pr(*pj, "controller.pid");
      pr.get("kp", c.controller.pid.kp);
      pr.get("ki", c.controller.pid.ki);
      pr.get("kd", c.controller.pid.kd);
      pr.get("integral_clamp", c.controller.pid.integral_clamp);
    }
    r.get("dead_band", c.controller.dead_band);
    r.get("policy_file", c.controller.policy_file);
    r.get("v_floor", c.controller.v_floor);
    r.get("v_ceil", c.controller.v_ceil);
  }
  if (const auto *sj = root.child("sim"))
  {
    ObjectReader r(*sj, "sim");
    r.get("dt", c.sim.dt);
    r.get("duration", c.sim.duration);
    r.get("seed", c.sim.seed);
    r.get("dump_frames", c.sim.dump_frames);
    r.get("initial_offset_sigma", c.sim.initial_offset_sigma);
    r.get("initial_heading_sigma", c.sim.initial_heading_sigma);
  }
  if (const auto *tj = root.child("training"))
  {
    ObjectReader r(*tj, "training");
    r.get("hidden", c.training.train.hidden);
    r.get("learning_rate", c.training.train.learning_rate);
    r.get("epochs", c.training.train.epochs);
    r.get("batch_size", c.training.train.batch_size);
    r.get("seed", c.training.train.seed);
    r.get("episodes", c.training.episodes);
    r.get("sigma", c.training.sigma);
    r.get("episode_duration", c.training.episode_duration);
    if (const auto *ej = r.child("expert"))
    {
      ObjectReader er(*ej, "training.expert");
      er.get("kp", c.training.expert.kp);
      er.get("ki", c.training.expert.ki);
      er.get("kd", c.training.expert.kd);
      er.get("integral_clamp", c.training.expert.integral_clamp);
    }
  }
  return c;
}

inline nlohmann::json config_to_json(const RunConfig &c)
{
  using detail::deg;
  nlohmann::json j;
  j["track"] = detail::track_to_json(c.track);
  j["render"] = {{"width", c.render.width},
                 {"height", c.render.height},
                 {"tape_intensity", c.render.tape_intensity},
                 {"ground_intensity", c.render.ground_intensity},
                 {"noise_sigma", c.render.noise_sigma}};
  j["vehicle"] = {{"wheelbase", c.vehicle.wheelbase},
                  {"delta_max_deg", c.vehicle.delta_max / deg},
                  {"v_max", c.vehicle.v_max},
                  {"mount_offset", c.vehicle.mount_offset},
                  {"camera",
                   {{"fx", c.vehicle.cam.fx},
                    {"fy", c.vehicle.cam.fy},
                    {"cx", c.vehicle.cam.cx},
                    {"cy", c.vehicle.cam.cy},
                    {"height", c.vehicle.cam.height},
                    {"pitch_deg", c.vehicle.cam.pitch / deg}}}};
  j["detector"] = {{"type", to_string(c.detector.type)},
                   {"threshold", c.detector.threshold},
                   {"invert", c.detector.invert},
                   {"roi_fraction", c.detector.roi_fraction},
                   {"blob", {{"connectivity", c.detector.blob.connectivity}, {"min_area", c.detector.blob.min_area}}},
                   {"hough",
                    {{"theta_bins", c.detector.hough.theta_bins},
                     {"rho_resolution", c.detector.hough.rho_resolution},
                     {"peak_threshold", c.detector.hough.peak_threshold},
                     {"nms_radius", c.detector.hough.nms_radius},
                     {"max_peaks", c.detector.hough.max_peaks}}},
                   {"birdseye",
                    {{"out_width", c.detector.birdseye.out_width},
                     {"out_height", c.detector.birdseye.out_height},
                     {"meters_per_pixel", c.detector.birdseye.meters_per_pixel},
                     {"origin_x", c.detector.birdseye.origin.x},
                     {"origin_y", c.detector.birdseye.origin.y},
                     {"k_offset", c.detector.k_offset},
                     {"homography_file", c.detector.homography_file}}}};
  j["controller"] = {{"type", to_string(c.controller.type)},
                     {"pid",
                      {{"kp", c.controller.pid.kp},
                       {"ki", c.controller.pid.ki},
                       {"kd", c.controller.pid.kd},
                       {"integral_clamp", c.controller.pid.integral_clamp}}},
                     {"dead_band", c.controller.dead_band},
                     {"policy_file", c.controller.policy_file},
                     {"v_floor", c.controller.v_floor},
                     {"v_ceil", c.controller.v_ceil}};
  j["sim"] = {{"dt", c.sim.dt},
              {"duration", c.sim.duration},
              {"seed", c.sim.seed},
              {"dump_frames", c.sim.dump_frames},
              {"initial_offset_sigma", c.sim.initial_offset_sigma},
              {"initial_heading_sigma", c.sim.initial_heading_sigma}};
  j["training"] = {{"hidden", c.training.train.hidden},
                   {"learning_rate", c.training.train.learning_rate},
                   {"epochs", c.training.train.epochs},
                   {"batch_size", c.training.train.batch_size},
                   {"seed", c.training.train.seed},
                   {"episodes", c.training.episodes},
                   {"sigma", c.training.sigma},
                   {"episode_duration", c.training.episode_duration},
                   {"expert",
                    {{"kp", c.training.expert.kp},
                     {"ki", c.training.expert.ki},
                     {"kd", c.training.expert.kd},
                     {"integral_clamp", c.training.expert.integral_clamp}}}};
  return j;
}

inline RunConfig parse_config(const std::string &text)
{
  nlohmann::json j;
  try
  {
    j = nlohmann::json::parse(text);
  }
  catch (const nlohmann::json::parse_error &e)
  {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig c = config_from_json(j);
  c.validate();
  return c;
}

inline RunConfig read_config_file(const std::string &path)
{
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

// Short stable fingerprint of the track geometry (FNV-1a over its JSON).
inline std::string track_id(const TrackSpec &t)
{
  const std::string text = detail::track_to_json(t).dump();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text)
  {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  std::ostringstream out;
  out << "trk-" << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

} // namespace lanekeep
