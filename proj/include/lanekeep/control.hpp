#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <utility>

#include "lanekeep/error.hpp"
#include "lanekeep/lane.hpp"
#include "lanekeep/vehicle.hpp"

namespace lanekeep
{

// Actuator-space steering, degrees; 45 is straight ahead.
struct SteeringCmd
{
  double servo = servo_center;

  static SteeringCmd clamped(double servo) { return {std::clamp(servo, servo_min, servo_max)}; }
  bool operator==(const SteeringCmd &) const = default;
};

inline constexpr double default_dead_band = 50.0;

// Bang-bang on the deflection sign with a centred dead band.
inline SteeringCmd openloop_step(double deflection, double dead_band = default_dead_band)
{
  if (deflection > dead_band)
    return {servo_max};
  if (deflection < -dead_band)
    return {servo_min};
  return {servo_center};
}

struct PidGains
{
  double kp = 0.03;
  double ki = 0.0;
  double kd = 0.008;
  double integral_clamp = 2000.0; // deflection * s

  void validate() const
  {
    if (!std::isfinite(kp) || !std::isfinite(ki) || !std::isfinite(kd))
      throw ConfigError("pid gains must be finite");
    if (!(integral_clamp > 0))
      throw ConfigError("pid integral_clamp must be positive");
  }
};

struct PidState
{
  double integral = 0.0;
  double previous = 0.0;
  bool initialized = false;

  bool operator==(const PidState &) const = default;
};

// Inputs shared by the PID law and the network: current error, previous error (equal to the
// current one on the first step) and the clamped running integral, all in deflection units.
struct ErrorFeatures
{
  double error = 0.0;
  double previous = 0.0;
  double integral = 0.0;

  std::array<double, 3> scaled() const
  {
    return {error / deflection_limit, previous / deflection_limit, integral / deflection_limit};
  }
};

inline std::pair<ErrorFeatures, PidState> advance_error_state(const PidState &state, double deflection, double dt,
                                                              double integral_clamp)
{
  if (!std::isfinite(deflection))
    throw ControllerFault("non-finite deflection");
  if (!(dt > 0))
    throw DomainError("controller dt must be positive");
  ErrorFeatures f;
  f.error = deflection;
  f.previous = state.initialized ? state.previous : deflection;
  f.integral = std::clamp(state.integral + deflection * dt, -integral_clamp, integral_clamp);
  return {f, PidState{f.integral, deflection, true}};
}

inline SteeringCmd pid_law(const ErrorFeatures &f, const PidGains &gains, double dt)
{
  const double derivative = (f.error - f.previous) / dt;
  return SteeringCmd::clamped(servo_center + gains.kp * f.error + gains.ki * f.integral + gains.kd * derivative);
}

// Setpoint is zero deflection, so the error is the deflection itself.
inline std::pair<SteeringCmd, PidState> pid_step(const PidState &state, double deflection, double dt,
                                                 const PidGains &gains = {})
{
  const auto [features, next] = advance_error_state(state, deflection, dt, gains.integral_clamp);
  return {pid_law(features, gains, dt), next};
}

// Throttle falls linearly from v_ceil at zero deflection to v_floor at full scale.
inline double speed_law(double deflection, double v_floor, double v_ceil)
{
  if (!(0.0 <= v_floor && v_floor <= v_ceil && v_ceil <= 1.0))
    throw DomainError("speed law needs 0 <= v_floor <= v_ceil <= 1");
  const double mag = std::min(std::abs(deflection), deflection_limit) / deflection_limit;
  return v_ceil - (v_ceil - v_floor) * mag;
}

} // namespace lanekeep
