#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "lanekeep/error.hpp"
#include "lanekeep/image.hpp"
#include "lanekeep/lane.hpp"

namespace lanekeep
{

struct HoughParams
{
  int theta_bins = 180;       // spans [-90deg, +90deg)
  double rho_resolution = 1.0; // pixels per bin
  int peak_threshold = 0;     // 0 selects 30% of the ROI height
  int nms_radius = 2;
  int max_peaks = 8;

  void validate() const
  {
    if (theta_bins < 2)
      throw ConfigError("hough theta_bins must be >= 2, got " + std::to_string(theta_bins));
    if (!(rho_resolution > 0.0))
      throw ConfigError("hough rho_resolution must be > 0");
    if (peak_threshold < 0)
      throw ConfigError("hough peak_threshold must be >= 1 (or 0 for the ROI default)");
    if (nms_radius < 0 || max_peaks < 1)
      throw ConfigError("hough nms_radius must be >= 0 and max_peaks >= 1");
  }
};

inline int default_peak_threshold(int roi_rows)
{
  return std::max(1, static_cast<int>(std::lround(0.3 * roi_rows)));
}

struct HoughLine
{
  double rho = 0.0;   // pixels
  double theta = 0.0; // radians in [-pi/2, pi/2)
  int votes = 0;
  int theta_bin = 0;
  int rho_bin = 0;

  bool operator==(const HoughLine &) const = default;
};

// Vote grid indexed [theta_bin][rho_bin]. Alongside each count it keeps the summed distance
// (in bins) between the voters' exact rho and the bin centre, used to rank equal-vote cells.
class Accumulator
{
public:
  Accumulator(int theta_bins, double rho_resolution, int width, int height)
      : theta_bins_(theta_bins), rho_resolution_(rho_resolution)
  {
    const double diag = std::hypot(double(width), double(height));
    rho_offset_ = static_cast<int>(std::ceil(diag / rho_resolution));
    rho_bins_ = 2 * rho_offset_ + 1;
    votes_.assign(static_cast<std::size_t>(theta_bins_) * rho_bins_, 0);
    residual_.assign(votes_.size(), 0.0);
  }

  int theta_bins() const noexcept { return theta_bins_; }
  int rho_bins() const noexcept { return rho_bins_; }
  double rho_resolution() const noexcept { return rho_resolution_; }

  double theta_of(int theta_bin) const noexcept
  {
    return -std::numbers::pi / 2 + theta_bin * (std::numbers::pi / theta_bins_);
  }
  double rho_of(int rho_bin) const noexcept { return (rho_bin - rho_offset_) * rho_resolution_; }
  int rho_bin_of(long rounded_rho) const noexcept { return static_cast<int>(rounded_rho) + rho_offset_; }

  int votes(int theta_bin, int rho_bin) const { return votes_[index(theta_bin, rho_bin)]; }
  double residual(int theta_bin, int rho_bin) const { return residual_[index(theta_bin, rho_bin)]; }

  void vote(int theta_bin, int rho_bin, double residual)
  {
    const auto i = index(theta_bin, rho_bin);
    ++votes_[i];
    residual_[i] += residual;
  }

  long total_votes() const
  {
    long total = 0;
    for (int v : votes_)
      total += v;
    return total;
  }

  bool operator==(const Accumulator &) const = default;

private:
  std::size_t index(int t, int r) const noexcept { return static_cast<std::size_t>(t) * rho_bins_ + r; }

  int theta_bins_;
  double rho_resolution_;
  int rho_offset_ = 0;
  int rho_bins_ = 0;
  std::vector<int> votes_;
  std::vector<double> residual_;
};

inline Accumulator hough_accumulate(const BinaryImage &bin, const HoughParams &params = {})
{
  params.validate();
  Accumulator acc(params.theta_bins, params.rho_resolution, bin.width(), bin.height());
  std::vector<double> cos_table(params.theta_bins), sin_table(params.theta_bins);
  for (int t = 0; t < params.theta_bins; ++t)
  {
    cos_table[t] = std::cos(acc.theta_of(t));
    sin_table[t] = std::sin(acc.theta_of(t));
  }
  for (int y = 0; y < bin.height(); ++y)
    for (int x = 0; x < bin.width(); ++x)
    {
      if (!bin.at(x, y))
        continue;
      for (int t = 0; t < params.theta_bins; ++t)
      {
        const double r = (x * cos_table[t] + y * sin_table[t]) / params.rho_resolution;
        const long rounded = std::lround(r);
        acc.vote(t, acc.rho_bin_of(rounded), std::abs(r - double(rounded)));
      }
    }
  return acc;
}

namespace detail
{
// a outranks b: more votes, or equal votes with the smaller summed residual.
inline bool cell_outranks(const Accumulator &acc, int ta, int ra, int tb, int rb)
{
  const int va = acc.votes(ta, ra);
  const int vb = acc.votes(tb, rb);
  if (va != vb)
    return va > vb;
  return acc.residual(ta, ra) < acc.residual(tb, rb);
}
} // namespace detail

// Local maxima over a (2r+1)^2 window: a cell survives when no neighbour outranks it.
// Output order is votes descending, then theta bin, then rho bin.
inline std::vector<HoughLine> find_peaks(const Accumulator &acc, const HoughParams &params = {},
                                         int peak_threshold = -1)
{
  const int threshold = std::max(1, peak_threshold >= 0 ? peak_threshold : params.peak_threshold);
  const int radius = params.nms_radius;
  std::vector<HoughLine> peaks;
  for (int t = 0; t < acc.theta_bins(); ++t)
    for (int r = 0; r < acc.rho_bins(); ++r)
    {
      const int v = acc.votes(t, r);
      if (v < threshold)
        continue;
      bool is_peak = true;
      for (int dt = -radius; dt <= radius && is_peak; ++dt)
        for (int dr = -radius; dr <= radius; ++dr)
        {
          const int nt = t + dt;
          const int nr = r + dr;
          if ((dt == 0 && dr == 0) || nt < 0 || nr < 0 || nt >= acc.theta_bins() || nr >= acc.rho_bins())
            continue;
          if (detail::cell_outranks(acc, nt, nr, t, r))
          {
            is_peak = false;
            break;
          }
        }
      if (is_peak)
        peaks.push_back(HoughLine{acc.rho_of(r), acc.theta_of(t), v, t, r});
    }
  std::stable_sort(peaks.begin(), peaks.end(),
                   [](const HoughLine &a, const HoughLine &b) { return a.votes > b.votes; });
  if (peaks.size() > static_cast<std::size_t>(params.max_peaks))
    peaks.resize(static_cast<std::size_t>(params.max_peaks));
  return peaks;
}

// x where the line rho = x cos(theta) + y sin(theta) meets row y; nullopt for near-horizontal lines.
inline std::optional<double> line_x_at_row(double rho, double theta, double y)
{
  const double c = std::cos(theta);
  if (std::abs(c) < 1e-9)
    return std::nullopt;
  return (rho - y * std::sin(theta)) / c;
}

// Splits lines into left/right by where they cross the bottom row and averages each side
// (vote-weighted in rho/theta). The midline runs from the camera axis column on the bottom
// row to the mean of the two side lines on the top row.
inline std::optional<LaneEstimate> average_boundary_lines(const std::vector<HoughLine> &lines, int width,
                                                          int top_row, int bottom_row, double axis_x)
{
  if (!(bottom_row > top_row))
    throw DomainError("average_boundary_lines needs bottom_row > top_row");
  struct Side
  {
    double weight = 0, rho = 0, theta = 0;
  } left, right;
  for (const auto &line : lines)
  {
    const auto x = line_x_at_row(line.rho, line.theta, bottom_row);
    if (!x)
      continue;
    Side &side = *x < width / 2.0 ? left : right;
    side.weight += line.votes;
    side.rho += line.votes * line.rho;
    side.theta += line.votes * line.theta;
  }
  if (left.weight <= 0 || right.weight <= 0)
    return std::nullopt;
  const auto xl = line_x_at_row(left.rho / left.weight, left.theta / left.weight, top_row);
  const auto xr = line_x_at_row(right.rho / right.weight, right.theta / right.weight, top_row);
  if (!xl || !xr)
    return std::nullopt;
  return make_lane_estimate({axis_x, double(bottom_row)}, {0.5 * (*xl + *xr), double(top_row)});
}

// Keeps the centre pixel of each horizontal run. Thick boundary bands otherwise vote a
// ridge of near-duplicate peaks whose spread depends on which side of the origin they sit.
inline BinaryImage row_run_centres(const BinaryImage &bin)
{
  BinaryImage out(bin.width(), bin.height());
  for (int y = 0; y < bin.height(); ++y)
    for (int x = 0; x < bin.width();)
    {
      if (!bin.at(x, y))
      {
        ++x;
        continue;
      }
      const int start = x;
      while (x < bin.width() && bin.at(x, y))
        ++x;
      out.set((start + x - 1) / 2, y, true);
    }
  return out;
}

struct HoughDetection
{
  std::vector<HoughLine> peaks;
  std::optional<LaneEstimate> estimate;
};

inline HoughDetection detect_hough(const BinaryImage &bin, const RectRoi &roi, const HoughParams &params = {},
                                   double axis_x = -1.0)
{
  HoughDetection out;
  const auto acc = hough_accumulate(row_run_centres(bin), params);
  const int threshold =
      params.peak_threshold > 0 ? params.peak_threshold : default_peak_threshold(roi.y1 - roi.y0 + 1);
  out.peaks = find_peaks(acc, params, threshold);
  if (roi.y1 > roi.y0)
    out.estimate = average_boundary_lines(out.peaks, bin.width(), roi.y0, roi.y1,
                                          axis_x >= 0 ? axis_x : 0.5 * (bin.width() - 1));
  return out;
}

} // namespace lanekeep
