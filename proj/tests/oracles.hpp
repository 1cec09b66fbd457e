// Slow reference implementations used to cross-check the library.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <numbers>
#include <random>
#include <tuple>
#include <vector>

namespace oracle
{

struct Mask
{
  int w = 0, h = 0;
  std::vector<std::uint8_t> px;
  bool at(int x, int y) const { return px[static_cast<std::size_t>(y) * w + x] != 0; }
};

inline Mask random_mask(std::mt19937_64 &rng, int max_side, double density)
{
  std::uniform_int_distribution<int> side(1, max_side);
  std::bernoulli_distribution on(density);
  Mask m;
  m.w = side(rng);
  m.h = side(rng);
  m.px.resize(static_cast<std::size_t>(m.w) * m.h);
  for (auto &p : m.px)
    p = on(rng);
  return m;
}

struct Component
{
  long area = 0;
  double cx = 0, cy = 0;
  int xmin = 0, ymin = 0, xmax = 0, ymax = 0;
  double orientation = 0;
};

// Breadth-first flood fill started from each unvisited pixel in raster order.
inline std::vector<Component> flood_fill(const Mask &m, int connectivity)
{
  std::vector<int> seen(m.px.size(), 0);
  std::vector<Component> out;
  for (int y0 = 0; y0 < m.h; ++y0)
    for (int x0 = 0; x0 < m.w; ++x0)
    {
      if (!m.at(x0, y0) || seen[y0 * m.w + x0])
        continue;
      std::vector<std::pair<int, int>> members;
      std::deque<std::pair<int, int>> q{{x0, y0}};
      seen[y0 * m.w + x0] = 1;
      while (!q.empty())
      {
        auto [x, y] = q.front();
        q.pop_front();
        members.emplace_back(x, y);
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx)
          {
            if ((dx == 0 && dy == 0) || (connectivity == 4 && dx != 0 && dy != 0))
              continue;
            const int nx = x + dx, ny = y + dy;
            if (nx < 0 || ny < 0 || nx >= m.w || ny >= m.h || !m.at(nx, ny) || seen[ny * m.w + nx])
              continue;
            seen[ny * m.w + nx] = 1;
            q.emplace_back(nx, ny);
          }
      }
      // Per-pixel scan over the member list.
      Component c;
      c.xmin = c.xmax = x0;
      c.ymin = c.ymax = y0;
      long long sx = 0, sy = 0;
      for (auto [x, y] : members)
      {
        ++c.area;
        sx += x;
        sy += y;
        c.xmin = std::min(c.xmin, x);
        c.xmax = std::max(c.xmax, x);
        c.ymin = std::min(c.ymin, y);
        c.ymax = std::max(c.ymax, y);
      }
      c.cx = double(sx) / double(c.area);
      c.cy = double(sy) / double(c.area);
      double mu20 = 0, mu02 = 0, mu11 = 0;
      for (auto [x, y] : members)
      {
        mu20 += (x - c.cx) * (x - c.cx);
        mu02 += (y - c.cy) * (y - c.cy);
        mu11 += (x - c.cx) * (y - c.cy);
      }
      const bool flat = std::abs(mu11) < 1e-12 && std::abs(mu20 - mu02) < 1e-12;
      c.orientation = flat ? 0.0 : 0.5 * std::atan2(2 * mu11, mu20 - mu02);
      if (c.orientation <= -std::numbers::pi / 2)
        c.orientation += std::numbers::pi;
      out.push_back(c);
    }
  return out;
}

struct HoughCell
{
  int votes = 0;
  double residual = 0;
};

struct HoughGrid
{
  int theta_bins = 0, rho_bins = 0, offset = 0;
  std::vector<HoughCell> cells; // [t][r]
  const HoughCell &at(int t, int r) const { return cells[static_cast<std::size_t>(t) * rho_bins + r]; }
};

// One pass per (theta, pixel) with the trigonometry evaluated inline.
inline HoughGrid hough(const Mask &m, int theta_bins, double res)
{
  HoughGrid g;
  g.theta_bins = theta_bins;
  g.offset = static_cast<int>(std::ceil(std::sqrt(double(m.w) * m.w + double(m.h) * m.h) / res));
  g.rho_bins = 2 * g.offset + 1;
  g.cells.resize(static_cast<std::size_t>(theta_bins) * g.rho_bins);
  for (int t = 0; t < theta_bins; ++t)
  {
    const double theta = -std::numbers::pi / 2 + t * (std::numbers::pi / theta_bins);
    const double c = std::cos(theta), s = std::sin(theta);
    for (int y = 0; y < m.h; ++y)
      for (int x = 0; x < m.w; ++x)
        if (m.at(x, y))
        {
          const double r = (x * c + y * s) / res;
          const double k = std::round(r);
          auto &cell = g.cells[static_cast<std::size_t>(t) * g.rho_bins + static_cast<int>(k) + g.offset];
          cell.votes += 1;
          cell.residual += std::abs(r - k);
        }
  }
  return g;
}

struct Peak
{
  int t, r, votes;
};

inline std::vector<Peak> hough_peaks(const HoughGrid &g, int threshold, int radius, int max_peaks)
{
  auto rank = [&](int t, int r) { return std::make_tuple(g.at(t, r).votes, -g.at(t, r).residual); };
  std::vector<Peak> out;
  for (int t = 0; t < g.theta_bins; ++t)
    for (int r = 0; r < g.rho_bins; ++r)
    {
      if (g.at(t, r).votes < std::max(1, threshold))
        continue;
      bool keep = true;
      for (int t2 = std::max(0, t - radius); t2 <= std::min(g.theta_bins - 1, t + radius); ++t2)
        for (int r2 = std::max(0, r - radius); r2 <= std::min(g.rho_bins - 1, r + radius); ++r2)
          if ((t2 != t || r2 != r) && rank(t2, r2) > rank(t, r))
            keep = false;
      if (keep)
        out.push_back({t, r, g.at(t, r).votes});
    }
  std::sort(out.begin(), out.end(), [](const Peak &a, const Peak &b) {
    return std::make_tuple(-a.votes, a.t, a.r) < std::make_tuple(-b.votes, b.t, b.r);
  });
  if (out.size() > static_cast<std::size_t>(max_peaks))
    out.resize(static_cast<std::size_t>(max_peaks));
  return out;
}

struct Stats
{
  double min, max, mean, median, mode, sd, range;
};

// Textbook statistics; the mode counts with an explicit sorted sweep.
inline Stats describe(std::vector<double> v, double bin)
{
  std::sort(v.begin(), v.end());
  Stats s{};
  const std::size_t n = v.size();
  s.min = v.front();
  s.max = v.back();
  s.range = s.max - s.min;
  long double sum = 0;
  for (double x : v)
    sum += x;
  s.mean = static_cast<double>(sum / n);
  long double ss = 0;
  for (double x : v)
    ss += (x - s.mean) * (x - s.mean);
  s.sd = std::sqrt(static_cast<double>(ss / n));
  s.median = n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2;
  long long best_k = 0;
  std::size_t best_c = 0, i = 0;
  while (i < n)
  {
    const long long k = static_cast<long long>(std::floor(v[i] / bin));
    std::size_t j = i;
    while (j < n && static_cast<long long>(std::floor(v[j] / bin)) == k)
      ++j;
    if (j - i > best_c)
    {
      best_c = j - i;
      best_k = k;
    }
    i = j;
  }
  s.mode = std::clamp((best_k + 0.5) * bin, s.min, s.max);
  return s;
}

template <class P> double fit_circle_radius(const std::vector<P> &pts)
{
  // Kasa fit: x^2 + y^2 + D x + E y + F = 0 by normal equations.
  double a[3][4] = {};
  for (const auto &p : pts)
  {
    const double row[3] = {p.x, p.y, 1.0};
    const double rhs = -(p.x * p.x + p.y * p.y);
    for (int i = 0; i < 3; ++i)
    {
      for (int j = 0; j < 3; ++j)
        a[i][j] += row[i] * row[j];
      a[i][3] += row[i] * rhs;
    }
  }
  for (int i = 0; i < 3; ++i)
    for (int k = i + 1; k < 3; ++k)
    {
      const double f = a[k][i] / a[i][i];
      for (int j = i; j < 4; ++j)
        a[k][j] -= f * a[i][j];
    }
  double sol[3];
  for (int i = 2; i >= 0; --i)
  {
    double s = a[i][3];
    for (int j = i + 1; j < 3; ++j)
      s -= a[i][j] * sol[j];
    sol[i] = s / a[i][i];
  }
  const double cx = -sol[0] / 2, cy = -sol[1] / 2;
  return std::sqrt(cx * cx + cy * cy - sol[2]);
}

} // namespace oracle
