#pragma once

#include <algorithm>
#include <array>
#include <cstdio>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "lanekeep/episode.hpp"
#include "lanekeep/error.hpp"

namespace lanekeep
{

struct PlotSeries
{
  std::string name;
  const EpisodeLog *log = nullptr;
};

namespace detail
{
inline std::string fmt2(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}
} // namespace detail

// Deflection (top) and steering (bottom) against time, one polyline per series.
inline std::string emit_svg_plot(const std::vector<PlotSeries> &series)
{
  if (series.empty())
    throw ArityError("svg plot needs at least one log");
  for (const auto &s : series)
    if (!s.log || s.log->rows.empty())
      throw ArityError("svg plot needs non-empty logs");

  static const std::array<const char *, 6> colours{"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  constexpr double left = 70, right = 780, panel_h = 230;
  constexpr std::array<double, 2> tops{40, 320};
  const std::array<double EpisodeRow::*, 2> fields{&EpisodeRow::deflection, &EpisodeRow::steering};
  const std::array<const char *, 2> titles{"deflection", "steering (deg)"};

  double t0 = std::numeric_limits<double>::infinity(), t1 = -t0;
  for (const auto &s : series)
    for (const auto &r : s.log->rows)
    {
      t0 = std::min(t0, r.t);
      t1 = std::max(t1, r.t);
    }
  if (t1 <= t0)
    t1 = t0 + 1;

  using detail::fmt2;
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 600\" width=\"800\" height=\"600\">\n";
  out << "<rect width=\"800\" height=\"600\" fill=\"white\"/>\n";
  for (int p = 0; p < 2; ++p)
  {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto &s : series)
      for (const auto &r : s.log->rows)
      {
        lo = std::min(lo, r.*fields[p]);
        hi = std::max(hi, r.*fields[p]);
      }
    const double vlo = lo, vhi = hi;
    if (hi <= lo)
    {
      lo -= 1;
      hi += 1;
    }
    const double top = tops[p], bottom = top + panel_h;
    auto px = [&](double t) { return left + (t - t0) / (t1 - t0) * (right - left); };
    auto py = [&](double v) { return bottom - (v - lo) / (hi - lo) * panel_h; };

    out << "<g class=\"panel\" id=\"" << (p == 0 ? "deflection" : "steering") << "\">\n";
    out << "<rect x=\"" << fmt2(left) << "\" y=\"" << fmt2(top) << "\" width=\"" << fmt2(right - left)
        << "\" height=\"" << fmt2(panel_h) << "\" fill=\"none\" stroke=\"black\"/>\n";
    out << "<text x=\"" << fmt2(left) << "\" y=\"" << fmt2(top - 8) << "\" font-size=\"13\">" << titles[p]
        << "</text>\n";
    out << "<text x=\"" << fmt2(left - 6) << "\" y=\"" << fmt2(py(vhi) + 4) << "\" font-size=\"11\" text-anchor=\"end\">"
        << fmt2(vhi) << "</text>\n";
    out << "<text x=\"" << fmt2(left - 6) << "\" y=\"" << fmt2(py(vlo) + 4) << "\" font-size=\"11\" text-anchor=\"end\">"
        << fmt2(vlo) << "</text>\n";
    out << "<text x=\"" << fmt2(left) << "\" y=\"" << fmt2(bottom + 16) << "\" font-size=\"11\">" << fmt2(t0)
        << "</text>\n";
    out << "<text x=\"" << fmt2(right) << "\" y=\"" << fmt2(bottom + 16) << "\" font-size=\"11\" text-anchor=\"end\">"
        << fmt2(t1) << " s</text>\n";
    for (std::size_t i = 0; i < series.size(); ++i)
    {
      out << "<polyline fill=\"none\" stroke-width=\"1\" stroke=\"" << colours[i % colours.size()] << "\" points=\"";
      bool first = true;
      for (const auto &r : series[i].log->rows)
      {
        out << (first ? "" : " ") << fmt2(px(r.t)) << "," << fmt2(py(r.*fields[p]));
        first = false;
      }
      out << "\"/>\n";
    }
    out << "</g>\n";
  }
  out << "<g class=\"legend\">\n";
  for (std::size_t i = 0; i < series.size(); ++i)
  {
    const double x = left + 10 + 120.0 * static_cast<double>(i);
    out << "<line x1=\"" << fmt2(x) << "\" y1=\"585\" x2=\"" << fmt2(x + 20) << "\" y2=\"585\" stroke=\""
        << colours[i % colours.size()] << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << fmt2(x + 26) << "\" y=\"589\" font-size=\"12\">" << series[i].name << "</text>\n";
  }
  out << "</g>\n</svg>\n";
  return out.str();
}

} // namespace lanekeep
