#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "lanekeep/error.hpp"
#include "lanekeep/homography.hpp"
#include "lanekeep/image.hpp"
#include "lanekeep/lane.hpp"

namespace lanekeep
{

// Top-down output grid. Row 0 is farthest ahead; `origin` (ground X forward, Y right) maps to
// the bottom-centre pixel.
struct BirdsEyeSpec
{
  int out_width = 64;
  int out_height = 100;
  double meters_per_pixel = 0.01;
  Point2 origin{0.30, 0.0};

  void validate() const
  {
    if (out_width <= 0 || out_height <= 0)
      throw ConfigError("bird's-eye output dimensions must be positive");
    if (!(meters_per_pixel > 0))
      throw ConfigError("bird's-eye meters_per_pixel must be positive");
  }

  Point2 ground_of(int col, int row) const
  {
    return {origin.x + (out_height - 1 - row) * meters_per_pixel,
            origin.y + (col - 0.5 * (out_width - 1)) * meters_per_pixel};
  }
};

namespace detail
{
inline std::optional<Point2> source_of(const Mat3 &h, Point2 ground, int src_width, int src_height)
{
  const double w = h[2][0] * ground.x + h[2][1] * ground.y + h[2][2];
  if (w <= horizon_epsilon)
    return std::nullopt;
  const double u = (h[0][0] * ground.x + h[0][1] * ground.y + h[0][2]) / w;
  const double v = (h[1][0] * ground.x + h[1][1] * ground.y + h[1][2]) / w;
  if (!(u >= 0.0 && v >= 0.0 && u <= src_width - 1 && v <= src_height - 1))
    return std::nullopt;
  return Point2{u, v};
}

inline double sample_bilinear(const GrayImage &img, Point2 p)
{
  const int x0 = std::min(static_cast<int>(p.x), img.width() - 1);
  const int y0 = std::min(static_cast<int>(p.y), img.height() - 1);
  const int x1 = std::min(x0 + 1, img.width() - 1);
  const int y1 = std::min(y0 + 1, img.height() - 1);
  const double fx = p.x - x0;
  const double fy = p.y - y0;
  const double top = (1 - fx) * img.at(x0, y0) + fx * img.at(x1, y0);
  const double bottom = (1 - fx) * img.at(x0, y1) + fx * img.at(x1, y1);
  return (1 - fy) * top + fy * bottom;
}
} // namespace detail

// Inverse mapping with bilinear sampling; output pixels whose source falls outside the
// frame (or beyond the horizon) are 0.
inline GrayImage warp_birdseye(const GrayImage &img, const Homography &ground_to_image, const BirdsEyeSpec &spec)
{
  spec.validate();
  GrayImage out(spec.out_width, spec.out_height, 0);
  const Mat3 &h = ground_to_image.matrix();
  for (int row = 0; row < spec.out_height; ++row)
    for (int col = 0; col < spec.out_width; ++col)
      if (const auto src = detail::source_of(h, spec.ground_of(col, row), img.width(), img.height()))
        out.at(col, row) = static_cast<std::uint8_t>(std::lround(detail::sample_bilinear(img, *src)));
  return out;
}

// Output pixels that receive image content under warp_birdseye.
inline BinaryImage birdseye_coverage(const Homography &ground_to_image, const BirdsEyeSpec &spec, int src_width,
                                     int src_height)
{
  spec.validate();
  BinaryImage out(spec.out_width, spec.out_height);
  for (int row = 0; row < spec.out_height; ++row)
    for (int col = 0; col < spec.out_width; ++col)
      out.set(col, row,
              detail::source_of(ground_to_image.matrix(), spec.ground_of(col, row), src_width, src_height)
                  .has_value());
  return out;
}

// x = slope * y + intercept, with y counted in rows upward from the bottom row.
struct ColumnFit
{
  double slope = 0.0;
  double intercept = 0.0;
  long count = 0;
};

inline std::optional<ColumnFit> fit_columns(const BinaryImage &mask, int col_begin, int col_end,
                                            long min_pixels = 10)
{
  long n = 0;
  double sy = 0, sx = 0, syy = 0, sxy = 0;
  for (int row = 0; row < mask.height(); ++row)
    for (int col = col_begin; col < col_end; ++col)
      if (mask.at(col, row))
      {
        const double y = mask.height() - 1 - row;
        ++n;
        sy += y;
        sx += col;
        syy += y * y;
        sxy += y * col;
      }
  if (n < min_pixels)
    return std::nullopt;
  const double var = n * syy - sy * sy;
  if (!(var > 0))
    return std::nullopt;
  ColumnFit fit;
  fit.slope = (n * sxy - sy * sx) / var;
  fit.intercept = (sx - fit.slope * sy) / n;
  fit.count = n;
  return fit;
}

inline constexpr double default_k_offset = 300.0;

// Midline given by slope and bottom-row intercept in a warped frame `width` pixels wide.
inline double birdseye_deflection(double slope, double intercept, int width, double k_offset = default_k_offset)
{
  const double centre = 0.5 * (width - 1);
  return clamp_deflection(deflection_limit * slope + k_offset * (intercept - centre) / (0.5 * width));
}

// Midline of the left/right half fits; deflection mixes its lean with its lateral offset at
// the bottom row.
inline std::optional<LaneEstimate> lane_estimate_birdseye(const BinaryImage &warped,
                                                          double k_offset = default_k_offset)
{
  const int w = warped.width();
  const int half = w / 2;
  const auto left = fit_columns(warped, 0, half);
  const auto right = fit_columns(warped, half, w);
  if (!left || !right)
    return std::nullopt;
  const double slope = 0.5 * (left->slope + right->slope);
  const double intercept = 0.5 * (left->intercept + right->intercept);
  const double rows = warped.height() - 1;
  LaneEstimate est;
  est.bottom = {intercept, rows};
  est.top = {intercept + slope * rows, 0.0};
  est.deflection = birdseye_deflection(slope, intercept, w, k_offset);
  return est;
}

struct BirdsEyeDetection
{
  GrayImage warped;
  BinaryImage mask;
  std::optional<LaneEstimate> estimate;
};

inline BirdsEyeDetection detect_birdseye(const GrayImage &frame, const Homography &ground_to_image,
                                         const BirdsEyeSpec &spec, int threshold_value, bool invert,
                                         double k_offset = default_k_offset)
{
  BirdsEyeDetection out;
  out.warped = warp_birdseye(frame, ground_to_image, spec);
  const auto coverage = birdseye_coverage(ground_to_image, spec, frame.width(), frame.height());
  out.mask = threshold(out.warped, threshold_value, invert);
  for (int row = 0; row < spec.out_height; ++row)
    for (int col = 0; col < spec.out_width; ++col)
      if (!coverage.at(col, row))
        out.mask.set(col, row, false);
  out.estimate = lane_estimate_birdseye(out.mask, k_offset);
  return out;
}

} // namespace lanekeep
