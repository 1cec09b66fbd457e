#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "lanekeep/episode.hpp"
#include "lanekeep/error.hpp"

namespace lanekeep
{

struct SeriesStats
{
  double min = 0, max = 0, mean = 0, median = 0, mode = 0, std_dev = 0, range = 0;
  bool operator==(const SeriesStats &) const = default;
};

// Mode is the centre of the fullest [k*b, (k+1)*b) bin (smallest k on ties), pulled into [min, max]
// so a run of saturated samples reports the saturation value.
inline SeriesStats describe(const std::vector<double> &series, double mode_bin = 1.0)
{
  if (series.empty())
    throw ArityError("describe needs a non-empty series");
  if (!(mode_bin > 0))
    throw DomainError("mode_bin must be positive");
  SeriesStats s;
  const auto [lo, hi] = std::minmax_element(series.begin(), series.end());
  s.min = *lo;
  s.max = *hi;
  s.range = s.max - s.min;
  const double n = static_cast<double>(series.size());
  s.mean = std::accumulate(series.begin(), series.end(), 0.0) / n;
  double ss = 0;
  for (double v : series)
    ss += (v - s.mean) * (v - s.mean);
  s.std_dev = std::sqrt(ss / n);

  std::vector<double> sorted = series;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t m = sorted.size() / 2;
  s.median = sorted.size() % 2 ? sorted[m] : 0.5 * (sorted[m - 1] + sorted[m]);

  std::map<long long, std::size_t> bins;
  for (double v : series)
    ++bins[static_cast<long long>(std::floor(v / mode_bin))];
  long long best = bins.begin()->first;
  std::size_t count = 0;
  for (const auto &[k, c] : bins)
    if (c > count)
    {
      best = k;
      count = c;
    }
  s.mode = std::clamp((static_cast<double>(best) + 0.5) * mode_bin, s.min, s.max);
  return s;
}

inline const std::array<const char *, 3> controller_columns{"normal", "pid", "neural"};
inline const std::array<const char *, 2> signal_names{"deflection", "steering"};
inline const std::array<const char *, 7> stat_rows{"Min", "Max", "Mean", "Median", "Mode", "Std. dev.", "Range"};

inline std::array<double, 7> stat_values(const SeriesStats &s)
{
  return {s.min, s.max, s.mean, s.median, s.mode, s.std_dev, s.range};
}

struct ComparisonReport
{
  EpisodeMeta meta; // controller field left empty
  // stats[controller][signal]
  std::array<std::array<SeriesStats, 2>, 3> stats{};

  // Sum over both signals of each controller's std dev relative to the three-way mean.
  std::array<double, 3> scores() const
  {
    std::array<double, 3> out{};
    for (int sig = 0; sig < 2; ++sig)
    {
      double mean = 0;
      for (int c = 0; c < 3; ++c)
        mean += stats[c][sig].std_dev / 3.0;
      for (int c = 0; c < 3; ++c)
        out[c] += mean > 0 ? stats[c][sig].std_dev / mean : 1.0;
    }
    return out;
  }
  int best() const
  {
    const auto s = scores();
    return static_cast<int>(std::min_element(s.begin(), s.end()) - s.begin());
  }
};

inline ComparisonReport compare_report(const EpisodeLog &normal, const EpisodeLog &pid, const EpisodeLog &neural)
{
  const std::array<const EpisodeLog *, 3> logs{&normal, &pid, &neural};
  for (const EpisodeLog *l : logs)
  {
    const auto &a = l->meta, &b = normal.meta;
    if (a.track_id != b.track_id || a.detector != b.detector || a.seed != b.seed || a.duration != b.duration ||
        a.dt != b.dt)
      throw ComparabilityError("logs differ in track, detector, seed, dt or duration");
  }
  ComparisonReport r;
  r.meta = normal.meta;
  r.meta.controller.clear();
  for (int c = 0; c < 3; ++c)
  {
    r.stats[c][0] = describe(logs[c]->column(&EpisodeRow::deflection), 1.0);
    r.stats[c][1] = describe(logs[c]->column(&EpisodeRow::steering), 1.0);
  }
  return r;
}

inline std::string format_ranking(const ComparisonReport &r)
{
  const auto s = r.scores();
  char buf[160];
  std::snprintf(buf, sizeof buf, "best by standard deviation: %s (scores normal %.4f, pid %.4f, neural %.4f)",
                controller_columns[r.best()], s[0], s[1], s[2]);
  return buf;
}

inline std::string format_report_text(const ComparisonReport &r)
{
  std::ostringstream out;
  char buf[128];
  out << "track " << r.meta.track_id << "  detector " << r.meta.detector << "  seed " << r.meta.seed;
  std::snprintf(buf, sizeof buf, "  duration %g s  dt %g s\n\n", r.meta.duration, r.meta.dt);
  out << buf;
  std::snprintf(buf, sizeof buf, "%-12s %-10s %12s %12s %12s\n", "Parameter", "", "Normal", "PID", "Neural");
  out << buf;
  for (int sig = 0; sig < 2; ++sig)
  {
    out << (sig == 0 ? "Deflection\n" : "Steering\n");
    for (std::size_t row = 0; row < stat_rows.size(); ++row)
    {
      std::snprintf(buf, sizeof buf, "  %-21s", stat_rows[row]);
      out << buf;
      for (int c = 0; c < 3; ++c)
      {
        std::snprintf(buf, sizeof buf, " %12.2f", stat_values(r.stats[c][sig])[row]);
        out << buf;
      }
      out << "\n";
    }
  }
  out << "\n" << format_ranking(r) << "\n";
  return out.str();
}

inline std::string format_report_csv(const ComparisonReport &r)
{
  std::ostringstream out;
  char buf[64];
  out << "param,signal,normal,pid,neural\n";
  for (int sig = 0; sig < 2; ++sig)
    for (std::size_t row = 0; row < stat_rows.size(); ++row)
    {
      out << stat_rows[row] << "," << signal_names[sig];
      for (int c = 0; c < 3; ++c)
      {
        std::snprintf(buf, sizeof buf, ",%.6g", stat_values(r.stats[c][sig])[row]);
        out << buf;
      }
      out << "\n";
    }
  return out.str();
}

} // namespace lanekeep
