#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "lanekeep/error.hpp"

namespace lanekeep
{

struct Point2
{
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Point2 &) const = default;
};

inline constexpr double deflection_limit = 1000.0;

// Detected midline in image coordinates (y grows downward) and the control error it implies.
struct LaneEstimate
{
  Point2 bottom;
  Point2 top;
  double deflection = 0.0;
};

inline double clamp_deflection(double d) { return std::clamp(d, -deflection_limit, deflection_limit); }

// 1000 x (horizontal run per unit of upward rise); positive when the line leans right going up.
inline double deflection_from_line(Point2 bottom, Point2 top)
{
  if (!(bottom.y > top.y))
    throw DomainError("deflection needs bottom.y > top.y, got bottom.y=" + std::to_string(bottom.y) +
                      " top.y=" + std::to_string(top.y));
  return clamp_deflection(deflection_limit * (top.x - bottom.x) / (bottom.y - top.y));
}

inline LaneEstimate make_lane_estimate(Point2 bottom, Point2 top)
{
  return LaneEstimate{bottom, top, deflection_from_line(bottom, top)};
}

} // namespace lanekeep
