#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <iostream>
#include <numbers>
#include <string>

#include "lanekeep/error.hpp"
#include "lanekeep/homography.hpp"
#include "lanekeep/track.hpp"

namespace lanekeep
{

// Receives non-fatal warnings (servo/throttle saturation and the like). Defaults to stderr.
using WarningSink = std::function<void(const std::string &)>;

inline WarningSink &warning_sink()
{
  static WarningSink sink = [](const std::string &msg) { std::cerr << "warning: " << msg << '\n'; };
  return sink;
}

inline void warn(const std::string &msg)
{
  if (warning_sink())
    warning_sink()(msg);
}

// Rear-axle reference point, heading, speed.
struct VehicleState
{
  double x = 0.0;
  double y = 0.0;
  double psi = 0.0;
  double v = 0.0;

  bool operator==(const VehicleState &) const = default;
};

struct VehicleParams
{
  double wheelbase = 0.26;
  double delta_max = 30.0 * std::numbers::pi / 180.0; // road-wheel angle at servo 0 / 90
  double v_max = 1.0;
  CameraModel cam{};
  double mount_offset = 0.26; // camera ahead of the rear axle

  void validate() const
  {
    if (!(wheelbase > 0))
      throw ConfigError("vehicle wheelbase must be positive");
    if (!(delta_max > 0 && delta_max < std::numbers::pi / 2))
      throw ConfigError("vehicle delta_max must lie in (0, pi/2)");
    if (!(v_max > 0))
      throw ConfigError("vehicle v_max must be positive");
    cam.validate();
  }
};

inline constexpr double servo_center = 45.0;
inline constexpr double servo_min = 0.0;
inline constexpr double servo_max = 90.0;

inline double servo_to_wheel_angle(double servo, double delta_max)
{
  return (servo - servo_center) / servo_center * delta_max;
}

// Kinematic bicycle model, one classical RK4 step with steering and speed held constant.
inline VehicleState step_vehicle(const VehicleState &state, const VehicleParams &params, double steer_servo,
                                 double speed_cmd, double dt)
{
  if (!(dt > 0))
    throw DomainError("step_vehicle needs dt > 0");
  if (!(steer_servo >= servo_min && steer_servo <= servo_max))
  {
    warn("steering servo " + std::to_string(steer_servo) + " clamped to [0, 90]");
    steer_servo = std::isnan(steer_servo) ? servo_center : std::clamp(steer_servo, servo_min, servo_max);
  }
  if (!(speed_cmd >= 0.0 && speed_cmd <= 1.0))
  {
    warn("speed command " + std::to_string(speed_cmd) + " clamped to [0, 1]");
    speed_cmd = std::isnan(speed_cmd) ? 0.0 : std::clamp(speed_cmd, 0.0, 1.0);
  }
  const double delta = servo_to_wheel_angle(steer_servo, params.delta_max);
  const double v = speed_cmd * params.v_max;
  const double yaw_rate = v / params.wheelbase * std::tan(delta);

  struct Deriv
  {
    double dx, dy, dpsi;
  };
  auto f = [&](double psi) { return Deriv{v * std::cos(psi), v * std::sin(psi), yaw_rate}; };
  const Deriv k1 = f(state.psi);
  const Deriv k2 = f(state.psi + 0.5 * dt * k1.dpsi);
  const Deriv k3 = f(state.psi + 0.5 * dt * k2.dpsi);
  const Deriv k4 = f(state.psi + dt * k3.dpsi);

  VehicleState next;
  next.x = state.x + dt / 6.0 * (k1.dx + 2 * k2.dx + 2 * k3.dx + k4.dx);
  next.y = state.y + dt / 6.0 * (k1.dy + 2 * k2.dy + 2 * k3.dy + k4.dy);
  next.psi = state.psi + dt / 6.0 * (k1.dpsi + 2 * k2.dpsi + 2 * k3.dpsi + k4.dpsi);
  next.v = v;
  return next;
}

// Vehicle placed on the centreline at arclength s, shifted `offset` metres to the right.
inline VehicleState state_on_track(const Track &track, double s, double offset = 0.0, double heading_offset = 0.0)
{
  const Pose2 c = track.centerline_at(s);
  const Point2 n = right_normal(c.heading);
  return {c.p.x + offset * n.x, c.p.y + offset * n.y, c.heading + heading_offset, 0.0};
}

// Offset/heading error against the track; OffTrack beyond 2 lane widths.
inline LateralError lateral_error(const Track &track, const VehicleState &state)
{
  const LateralError err = track.lateral_error({state.x, state.y}, state.psi);
  if (std::abs(err.offset) > 2.0 * track.spec().lane_width)
    throw OffTrack("vehicle is " + std::to_string(err.offset) + " m from the centreline");
  return err;
}

} // namespace lanekeep
