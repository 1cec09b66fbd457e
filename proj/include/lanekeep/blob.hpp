#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

#include "lanekeep/error.hpp"
#include "lanekeep/image.hpp"
#include "lanekeep/lane.hpp"

namespace lanekeep
{

struct BoundingBox
{
  int xmin = 0;
  int ymin = 0;
  int xmax = 0;
  int ymax = 0;

  bool operator==(const BoundingBox &) const = default;
};

struct Blob
{
  int label = 0;
  long area = 0;
  Point2 centroid;
  BoundingBox bbox;
  double orientation = 0.0; // (-pi/2, pi/2], image axes
};

namespace detail
{

class DisjointSet
{
public:
  int make()
  {
    parent_.push_back(static_cast<int>(parent_.size()));
    return parent_.back();
  }
  int find(int a)
  {
    while (parent_[a] != a)
    {
      parent_[a] = parent_[parent_[a]];
      a = parent_[a];
    }
    return a;
  }
  void unite(int a, int b)
  {
    a = find(a);
    b = find(b);
    if (a == b)
      return;
    if (a < b)
      parent_[b] = a;
    else
      parent_[a] = b;
  }

private:
  std::vector<int> parent_;
};

struct MomentSums
{
  long n = 0;
  std::int64_t sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  BoundingBox box{};
};

} // namespace detail

// Two-pass union-find labelling. Labels follow the row-major order in which each component
// is first touched.
inline std::vector<Blob> label_components(const BinaryImage &bin, int connectivity = 8)
{
  if (connectivity != 4 && connectivity != 8)
    throw DomainError("connectivity must be 4 or 8, got " + std::to_string(connectivity));

  const int w = bin.width();
  const int h = bin.height();
  std::vector<int> provisional(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), -1);
  detail::DisjointSet sets;
  auto idx = [w](int x, int y) { return static_cast<std::size_t>(y) * w + x; };

  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
    {
      if (!bin.at(x, y))
        continue;
      int assigned = -1;
      auto join = [&](int nx, int ny) {
        if (!bin.in_bounds(nx, ny))
          return;
        const int other = provisional[idx(nx, ny)];
        if (other < 0)
          return;
        if (assigned < 0)
          assigned = other;
        else
          sets.unite(assigned, other);
      };
      join(x - 1, y);
      join(x, y - 1);
      if (connectivity == 8)
      {
        join(x - 1, y - 1);
        join(x + 1, y - 1);
      }
      provisional[idx(x, y)] = assigned < 0 ? sets.make() : assigned;
    }

  // Roots are the smallest provisional id of each set, and provisional ids grow in scan
  // order, so ordering roots by first appearance reproduces first-encounter labelling.
  std::vector<int> label_of_root;
  std::vector<detail::MomentSums> sums;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
    {
      const int p = provisional[idx(x, y)];
      if (p < 0)
        continue;
      const int root = sets.find(p);
      if (static_cast<std::size_t>(root) >= label_of_root.size())
        label_of_root.resize(static_cast<std::size_t>(root) + 1, -1);
      if (label_of_root[root] < 0)
      {
        label_of_root[root] = static_cast<int>(sums.size());
        detail::MomentSums fresh;
        fresh.box = BoundingBox{x, y, x, y};
        sums.push_back(fresh);
      }
      auto &m = sums[label_of_root[root]];
      ++m.n;
      m.sx += x;
      m.sy += y;
      m.sxx += static_cast<std::int64_t>(x) * x;
      m.syy += static_cast<std::int64_t>(y) * y;
      m.sxy += static_cast<std::int64_t>(x) * y;
      m.box.xmin = std::min(m.box.xmin, x);
      m.box.xmax = std::max(m.box.xmax, x);
      m.box.ymin = std::min(m.box.ymin, y);
      m.box.ymax = std::max(m.box.ymax, y);
    }

  std::vector<Blob> blobs;
  blobs.reserve(sums.size());
  for (std::size_t i = 0; i < sums.size(); ++i)
  {
    const auto &m = sums[i];
    Blob b;
    b.label = static_cast<int>(i) + 1;
    b.area = m.n;
    b.centroid = {static_cast<double>(m.sx) / m.n, static_cast<double>(m.sy) / m.n};
    b.bbox = m.box;
    // n^2-scaled central moments, exact in integers.
    const std::int64_t mu11 = m.n * m.sxy - m.sx * m.sy;
    const std::int64_t mu20 = m.n * m.sxx - m.sx * m.sx;
    const std::int64_t mu02 = m.n * m.syy - m.sy * m.sy;
    if (mu11 == 0 && mu20 == mu02)
      b.orientation = 0.0;
    else
      b.orientation = 0.5 * std::atan2(2.0 * static_cast<double>(mu11), static_cast<double>(mu20 - mu02));
    if (b.orientation <= -std::numbers::pi / 2)
      b.orientation += std::numbers::pi;
    blobs.push_back(b);
  }
  return blobs;
}

inline long default_min_area(int width, int height)
{
  return std::max(1L, std::lround(0.001 * width * height));
}

// Two largest blobs with area >= min_area, returned left then right; nullopt when fewer exist.
inline std::optional<std::pair<Blob, Blob>> select_lane_blobs(const std::vector<Blob> &blobs,
                                                              long min_area)
{
  const Blob *first = nullptr;
  const Blob *second = nullptr;
  auto larger = [](const Blob *a, const Blob *b) {
    return a->area > b->area || (a->area == b->area && a->label < b->label);
  };
  for (const auto &b : blobs)
  {
    if (b.area < min_area)
      continue;
    if (!first || larger(&b, first))
    {
      second = first;
      first = &b;
    }
    else if (!second || larger(&b, second))
      second = &b;
  }
  if (!first || !second)
    return std::nullopt;
  if (second->centroid.x < first->centroid.x)
    return std::pair{*second, *first};
  return std::pair{*first, *second};
}

// Midline from the vehicle axis to the lane centre ahead. The top point averages the
// boundary-facing top corners (left xmax, right xmin); the bottom point sits on the camera
// axis column at the blobs' mean lowest row.
inline std::optional<LaneEstimate> midline_from_blobs(const Blob &left, const Blob &right, double axis_x)
{
  const Point2 top{0.5 * (left.bbox.xmax + right.bbox.xmin), 0.5 * (left.bbox.ymin + right.bbox.ymin)};
  const Point2 bottom{axis_x, 0.5 * (left.bbox.ymax + right.bbox.ymax)};
  if (!(bottom.y > top.y))
    return std::nullopt;
  return make_lane_estimate(bottom, top);
}

struct BlobParams
{
  int connectivity = 8;
  long min_area = 0; // 0 selects default_min_area for the mask size
  double axis_x = -1.0; // negative selects the centre column
};

struct BlobDetection
{
  std::vector<Blob> blobs;
  std::optional<std::pair<Blob, Blob>> lanes;
  std::optional<LaneEstimate> estimate;
};

inline BlobDetection detect_blobs(const BinaryImage &bin, const BlobParams &params = {})
{
  BlobDetection out;
  out.blobs = label_components(bin, params.connectivity);
  const long min_area = params.min_area > 0 ? params.min_area : default_min_area(bin.width(), bin.height());
  out.lanes = select_lane_blobs(out.blobs, min_area);
  if (out.lanes)
    out.estimate = midline_from_blobs(out.lanes->first, out.lanes->second,
                                      params.axis_x >= 0 ? params.axis_x : 0.5 * (bin.width() - 1));
  return out;
}

} // namespace lanekeep
