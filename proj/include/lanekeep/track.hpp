#pragma once

#include <algorithm>
#include <limits>
#include <cmath>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

#include "lanekeep/error.hpp"
#include "lanekeep/lane.hpp"

namespace lanekeep
{

// World frame: heading psi points along (cos psi, sin psi); the y axis lies to the right of
// heading 0, so increasing psi turns right.

inline double wrap_angle(double a)
{
  a = std::remainder(a, 2.0 * std::numbers::pi);
  if (a <= -std::numbers::pi)
    a += 2.0 * std::numbers::pi;
  return a;
}

inline Point2 heading_vector(double psi) { return {std::cos(psi), std::sin(psi)}; }
inline Point2 right_normal(double psi) { return {-std::sin(psi), std::cos(psi)}; }

struct Straight
{
  double length = 0.0;
};

enum class TurnDirection
{
  left,
  right
};

struct Arc
{
  double radius = 0.0;
  double sweep = 0.0; // radians
  TurnDirection direction = TurnDirection::right;
};

using Segment = std::variant<Straight, Arc>;

inline double segment_length(const Segment &seg)
{
  if (const auto *s = std::get_if<Straight>(&seg))
    return s->length;
  const auto &a = std::get<Arc>(seg);
  return a.radius * a.sweep;
}

// Signed curvature: positive for right turns.
inline double segment_curvature(const Segment &seg)
{
  if (std::holds_alternative<Straight>(seg))
    return 0.0;
  const auto &a = std::get<Arc>(seg);
  return (a.direction == TurnDirection::right ? 1.0 : -1.0) / a.radius;
}

struct TrackSpec
{
  std::vector<Segment> segments;
  double lane_width = 0.40;  // boundary centre to boundary centre
  double tape_width = 0.019;
  bool closed = false;
};

struct Pose2
{
  Point2 p;
  double heading = 0.0;
};

// Desk-scale taped circuit: an S-bend (straight, right, straight, left, straight) closed by
// a clockwise return loop.
inline TrackSpec default_track()
{
  const double q = std::numbers::pi / 2;
  TrackSpec t;
  t.segments = {Straight{3.0}, Arc{1.0, q, TurnDirection::right}, Straight{2.0},
                Arc{1.0, q, TurnDirection::left}, Straight{3.0}, Arc{1.0, q, TurnDirection::right},
                Straight{0.5}, Arc{1.0, q, TurnDirection::right}, Straight{8.0},
                Arc{1.0, q, TurnDirection::right}, Straight{4.5}, Arc{1.0, q, TurnDirection::right}};
  t.lane_width = 0.40;
  t.tape_width = 0.019;
  t.closed = true;
  return t;
}

struct LateralError
{
  double offset = 0.0;        // metres, positive right of the path
  double heading_error = 0.0; // radians in (-pi, pi]
  double arclength = 0.0;     // of the nearest centreline point
};

// Validated track with cached segment start poses and a 1 cm centreline sampling.
class Track
{
public:
  explicit Track(TrackSpec spec) : spec_(std::move(spec))
  {
    if (spec_.segments.empty())
      throw ConfigError("track needs at least one segment");
    if (!(spec_.lane_width > 0) || !(spec_.tape_width > 0))
      throw ConfigError("track lane_width and tape_width must be positive");
    Pose2 pose{};
    double s = 0;
    for (std::size_t i = 0; i < spec_.segments.size(); ++i)
    {
      const auto &seg = spec_.segments[i];
      if (const auto *st = std::get_if<Straight>(&seg))
      {
        if (!(st->length > 0))
          throw ConfigError("segment " + std::to_string(i) + ": straight length must be positive");
      }
      else
      {
        const auto &a = std::get<Arc>(seg);
        if (!(a.radius > 0) || !(a.sweep > 0))
          throw ConfigError("segment " + std::to_string(i) + ": arc radius and sweep must be positive");
        if (!(a.radius > spec_.lane_width / 2))
          throw ConfigError("segment " + std::to_string(i) + ": arc radius must exceed lane_width/2");
      }
      starts_.push_back(pose);
      offsets_.push_back(s);
      pose = evaluate(i, segment_length(seg));
      s += segment_length(seg);
    }
    length_ = s;
    end_ = pose;
    build_geometry();
    if (spec_.closed)
    {
      const double gap = std::hypot(end_.p.x, end_.p.y);
      const double turn = std::abs(wrap_angle(end_.heading));
      if (gap > 1e-6 || turn > 1e-6)
        throw ConfigError("closed track does not return to its start pose (gap " + std::to_string(gap) +
                          " m, heading " + std::to_string(turn) + " rad)");
    }
    const auto n = static_cast<std::size_t>(std::ceil(length_ / sample_step));
    samples_.reserve(n + 1);
    for (std::size_t k = 0; k <= n; ++k)
      samples_.push_back(centerline_at(std::min(k * sample_step, length_)).p);
  }

  static constexpr double sample_step = 0.01;

  const TrackSpec &spec() const noexcept { return spec_; }
  double length() const noexcept { return length_; }
  bool closed() const noexcept { return spec_.closed; }
  std::size_t segment_count() const noexcept { return spec_.segments.size(); }
  const Segment &segment(std::size_t i) const { return spec_.segments[i]; }
  const Pose2 &segment_start(std::size_t i) const { return starts_[i]; }
  double segment_offset(std::size_t i) const { return offsets_[i]; }

  Pose2 centerline_at(double s) const
  {
    if (spec_.closed)
    {
      s = std::fmod(s, length_);
      if (s < 0)
        s += length_;
    }
    else if (s < -1e-9 || s > length_ + 1e-9)
      throw DomainError("arclength " + std::to_string(s) + " outside open track [0, " + std::to_string(length_) +
                        "]");
    s = std::clamp(s, 0.0, length_);
    const auto it = std::upper_bound(offsets_.begin(), offsets_.end(), s);
    const std::size_t i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, (it - offsets_.begin()) - 1));
    return evaluate(i, s - offsets_[i]);
  }

  LateralError lateral_error(Point2 p, double heading) const
  {
    auto dist2 = [p](Point2 q) { return (q.x - p.x) * (q.x - p.x) + (q.y - p.y) * (q.y - p.y); };
    std::size_t best = 0;
    double best_d = dist2(samples_[0]);
    for (std::size_t k = 1; k < samples_.size(); ++k)
      if (const double d = dist2(samples_[k]); d < best_d)
      {
        best_d = d;
        best = k;
      }
    double lo = best * sample_step - sample_step;
    double hi = best * sample_step + sample_step;
    if (!spec_.closed)
    {
      lo = std::max(lo, 0.0);
      hi = std::min(hi, length_);
    }
    auto f = [&](double s) { return dist2(centerline_at(s).p); };
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - invphi * (b - a), d = a + invphi * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > 1e-9)
    {
      if (fc < fd)
      {
        b = d;
        d = c;
        fd = fc;
        c = b - invphi * (b - a);
        fc = f(c);
      }
      else
      {
        a = c;
        c = d;
        fc = fd;
        d = a + invphi * (b - a);
        fd = f(d);
      }
    }
    double s = 0.5 * (a + b);
    if (spec_.closed)
    {
      s = std::fmod(s, length_);
      if (s < 0)
        s += length_;
    }
    const Pose2 c0 = centerline_at(s);
    const Point2 n = right_normal(c0.heading);
    const double offset = (p.x - c0.p.x) * n.x + (p.y - c0.p.y) * n.y;
    return {offset, wrap_angle(heading - c0.heading), s};
  }

  // Distance from p to the nearer lane boundary curve (centreline offset by +-lane_width/2).
  // Exact whenever it is <= reach (reach <= lane_width); otherwise may be +infinity.
  double boundary_distance(Point2 p, double reach) const;

private:
  Pose2 evaluate(std::size_t i, double ds) const
  {
    const Pose2 &st = starts_[i];
    const auto &seg = spec_.segments[i];
    if (std::holds_alternative<Straight>(seg))
    {
      const Point2 d = heading_vector(st.heading);
      return {{st.p.x + ds * d.x, st.p.y + ds * d.y}, st.heading};
    }
    const auto &a = std::get<Arc>(seg);
    const double sign = a.direction == TurnDirection::right ? 1.0 : -1.0;
    const Point2 n0 = right_normal(st.heading);
    const Point2 centre{st.p.x + sign * a.radius * n0.x, st.p.y + sign * a.radius * n0.y};
    const double heading = st.heading + sign * ds / a.radius;
    const Point2 n = right_normal(heading);
    return {{centre.x - sign * a.radius * n.x, centre.y - sign * a.radius * n.y}, heading};
  }

  struct SegmentGeometry
  {
    bool is_arc = false;
    Point2 origin, dir;   // straight
    double length = 0.0;
    Point2 centre;        // arc
    double radius = 0.0, mid_angle = 0.0, half_sweep = 0.0;
    Point2 box_min, box_max; // boundary bounding box grown by the query reach
  };

  void build_geometry()
  {
    // Queries use reach <= lane_width; boxes are grown by a full lane width for margin.
    const double grow = 1.5 * spec_.lane_width;
    for (std::size_t i = 0; i < spec_.segments.size(); ++i)
    {
      SegmentGeometry g;
      const Pose2 &st = starts_[i];
      if (const auto *s = std::get_if<Straight>(&spec_.segments[i]))
      {
        g.origin = st.p;
        g.dir = heading_vector(st.heading);
        g.length = s->length;
        const Point2 end{st.p.x + s->length * g.dir.x, st.p.y + s->length * g.dir.y};
        g.box_min = {std::min(st.p.x, end.x) - grow, std::min(st.p.y, end.y) - grow};
        g.box_max = {std::max(st.p.x, end.x) + grow, std::max(st.p.y, end.y) + grow};
      }
      else
      {
        const auto &arc = std::get<Arc>(spec_.segments[i]);
        const double sign = arc.direction == TurnDirection::right ? 1.0 : -1.0;
        const Point2 n0 = right_normal(st.heading);
        g.is_arc = true;
        g.centre = {st.p.x + sign * arc.radius * n0.x, st.p.y + sign * arc.radius * n0.y};
        g.radius = arc.radius;
        g.half_sweep = 0.5 * arc.sweep;
        g.mid_angle = std::atan2(st.p.y - g.centre.y, st.p.x - g.centre.x) + sign * g.half_sweep;
        const double extent = arc.radius + grow;
        g.box_min = {g.centre.x - extent, g.centre.y - extent};
        g.box_max = {g.centre.x + extent, g.centre.y + extent};
      }
      geometry_.push_back(g);
    }
  }

  TrackSpec spec_;
  std::vector<SegmentGeometry> geometry_;
  std::vector<Pose2> starts_;
  std::vector<double> offsets_;
  std::vector<Point2> samples_;
  double length_ = 0.0;
  Pose2 end_{};
};

inline double Track::boundary_distance(Point2 p, double reach) const
{
  const double half = 0.5 * spec_.lane_width;
  const double margin = half + reach;
  double best = std::numeric_limits<double>::infinity();
  auto dist = [](double dx, double dy) { return std::sqrt(dx * dx + dy * dy); };
  for (const auto &g : geometry_)
  {
    if (p.x < g.box_min.x || p.y < g.box_min.y || p.x > g.box_max.x || p.y > g.box_max.y)
      continue;
    if (!g.is_arc)
    {
      const double rx = p.x - g.origin.x, ry = p.y - g.origin.y;
      const double along = rx * g.dir.x + ry * g.dir.y;
      if (along < -margin || along > g.length + margin)
        continue;
      const double lateral = -rx * g.dir.y + ry * g.dir.x;
      if (std::abs(lateral) > margin)
        continue;
      const double a = std::clamp(along, 0.0, g.length) - along;
      best = std::min({best, dist(a, lateral - half), dist(a, lateral + half)});
      continue;
    }
    const double rx = p.x - g.centre.x, ry = p.y - g.centre.y;
    const double r2 = rx * rx + ry * ry;
    const double outer = g.radius + margin;
    const double inner = g.radius - margin;
    if (r2 > outer * outer || (inner > 0 && r2 < inner * inner))
      continue;
    const double r = std::sqrt(r2);
    const double delta = wrap_angle(std::atan2(ry, rx) - g.mid_angle);
    for (double radius : {g.radius - half, g.radius + half})
    {
      if (std::abs(delta) <= g.half_sweep)
        best = std::min(best, std::abs(r - radius));
      else
        for (double end : {g.mid_angle - g.half_sweep, g.mid_angle + g.half_sweep})
          best = std::min(best, dist(p.x - (g.centre.x + radius * std::cos(end)),
                                     p.y - (g.centre.y + radius * std::sin(end))));
    }
  }
  return best;
}

} // namespace lanekeep
