#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "lanekeep/error.hpp"
#include "lanekeep/lane.hpp"

namespace lanekeep
{

using Mat3 = std::array<std::array<double, 3>, 3>;

inline Mat3 identity3() { return Mat3{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}}; }

inline Mat3 operator*(const Mat3 &a, const Mat3 &b)
{
  Mat3 c{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        c[i][j] += a[i][k] * b[k][j];
  return c;
}

inline double determinant(const Mat3 &m)
{
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
         m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

inline Mat3 inverse(const Mat3 &m)
{
  const double det = determinant(m);
  if (std::abs(det) < std::numeric_limits<double>::min())
    throw DegeneracyError("matrix is singular");
  Mat3 inv{};
  inv[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) / det;
  inv[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) / det;
  inv[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) / det;
  inv[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) / det;
  inv[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) / det;
  inv[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) / det;
  inv[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) / det;
  inv[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) / det;
  inv[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / det;
  return inv;
}

inline double frobenius_norm(const Mat3 &m)
{
  double s = 0;
  for (const auto &row : m)
    for (double v : row)
      s += v * v;
  return std::sqrt(s);
}

// Scaled to unit Frobenius norm with a non-negative bottom-right entry.
inline Mat3 normalized(const Mat3 &m)
{
  const double norm = frobenius_norm(m);
  if (!(norm > 0.0))
    throw DegeneracyError("zero matrix cannot be normalized");
  const double s = (m[2][2] < 0.0 ? -1.0 : 1.0) / norm;
  Mat3 out = m;
  for (auto &row : out)
    for (double &v : row)
      v *= s;
  return out;
}

// Projective map of the plane, stored normalized.
class Homography
{
public:
  Homography() : h_(normalized(identity3())) {}
  explicit Homography(const Mat3 &m) : h_(normalized(m))
  {
    if (std::abs(determinant(h_)) <= 1e-12)
      throw DegeneracyError("homography is rank deficient");
  }

  const Mat3 &matrix() const noexcept { return h_; }
  double operator()(int r, int c) const { return h_[r][c]; }
  Homography inverse() const { return Homography(lanekeep::inverse(h_)); }

  friend Homography operator*(const Homography &a, const Homography &b) { return Homography(a.h_ * b.h_); }

private:
  Mat3 h_;
};

inline constexpr double horizon_epsilon = 1e-12;

inline Point2 apply_homography(const Mat3 &h, Point2 p)
{
  const double a = h[0][0] * p.x + h[0][1] * p.y + h[0][2];
  const double b = h[1][0] * p.x + h[1][1] * p.y + h[1][2];
  const double w = h[2][0] * p.x + h[2][1] * p.y + h[2][2];
  if (std::abs(w) <= horizon_epsilon)
    throw HorizonError("point maps to infinity (|w| <= 1e-12)");
  return {a / w, b / w};
}

inline Point2 apply_homography(const Homography &h, Point2 p) { return apply_homography(h.matrix(), p); }

// Pinhole camera looking forward and pitched down over flat ground. Ground coordinates are
// (X forward, Y right) in metres, measured from the point directly beneath the camera.
struct CameraModel
{
  double fx = 60.0;
  double fy = 60.0;
  double cx = 79.5;
  double cy = 59.5;
  double height = 0.20;
  double pitch = 25.0 * std::numbers::pi / 180.0;

  void validate() const
  {
    if (!(fx > 0 && fy > 0))
      throw ConfigError("camera focal lengths must be positive");
    if (!(height > 0))
      throw ConfigError("camera height must be positive");
    if (!(pitch > 0 && pitch < std::numbers::pi / 2))
      throw ConfigError("camera pitch must lie in (0, pi/2)");
  }
};

// Exact ground-plane to image map: K * [r1 r2 t] for the pitched camera.
inline Homography analytic_homography(const CameraModel &cam)
{
  cam.validate();
  const double s = std::sin(cam.pitch);
  const double c = std::cos(cam.pitch);
  // Camera axes: x right, y down, z along the optical axis.
  const Mat3 extrinsic{{{0.0, 1.0, 0.0}, {-s, 0.0, cam.height * c}, {c, 0.0, cam.height * s}}};
  const Mat3 intrinsic{{{cam.fx, 0.0, cam.cx}, {0.0, cam.fy, cam.cy}, {0.0, 0.0, 1.0}}};
  return Homography(intrinsic * extrinsic);
}

struct Correspondence
{
  Point2 image;  // (u, v) pixels
  Point2 ground; // (X, Y) metres
};

struct HomographyEstimate
{
  Homography h; // ground -> image
  double mean_reprojection_error = 0.0; // pixels
};

using Mat9 = std::array<std::array<double, 9>, 9>;

struct SymmetricEigen
{
  std::array<double, 9> values{};
  Mat9 vectors{}; // column k pairs with values[k]
  int sweeps = 0;
};

// Cyclic Jacobi rotations until the off-diagonal Frobenius norm drops below tol.
inline SymmetricEigen jacobi_eigen(Mat9 a, double tol = 1e-12, int max_sweeps = 100)
{
  SymmetricEigen out;
  for (int i = 0; i < 9; ++i)
    out.vectors[i][i] = 1.0;
  auto off_norm = [&a] {
    double s = 0;
    for (int i = 0; i < 9; ++i)
      for (int j = 0; j < 9; ++j)
        if (i != j)
          s += a[i][j] * a[i][j];
    return std::sqrt(s);
  };
  while (off_norm() >= tol && out.sweeps < max_sweeps)
  {
    ++out.sweeps;
    for (int p = 0; p < 8; ++p)
      for (int q = p + 1; q < 9; ++q)
      {
        if (a[p][q] == 0.0)
          continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < 9; ++k)
        {
          const double akp = a[k][p];
          const double akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (int k = 0; k < 9; ++k)
        {
          const double apk = a[p][k];
          const double aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (int k = 0; k < 9; ++k)
        {
          const double vkp = out.vectors[k][p];
          const double vkq = out.vectors[k][q];
          out.vectors[k][p] = c * vkp - s * vkq;
          out.vectors[k][q] = s * vkp + c * vkq;
        }
      }
  }
  for (int i = 0; i < 9; ++i)
    out.values[i] = a[i][i];
  return out;
}

namespace detail
{
// Similarity moving the centroid to the origin with mean distance sqrt(2).
inline Mat3 hartley_transform(const std::vector<Point2> &pts)
{
  double mx = 0, my = 0;
  for (const auto &p : pts)
  {
    mx += p.x;
    my += p.y;
  }
  mx /= double(pts.size());
  my /= double(pts.size());
  double mean_dist = 0;
  for (const auto &p : pts)
    mean_dist += std::hypot(p.x - mx, p.y - my);
  mean_dist /= double(pts.size());
  if (!(mean_dist > 0))
    throw DegeneracyError("all correspondence points coincide");
  const double s = std::sqrt(2.0) / mean_dist;
  return Mat3{{{s, 0, -s * mx}, {0, s, -s * my}, {0, 0, 1}}};
}
} // namespace detail

inline double mean_reprojection_error(const Homography &h, const std::vector<Correspondence> &pairs)
{
  double total = 0;
  for (const auto &c : pairs)
  {
    const Point2 p = apply_homography(h, c.ground);
    total += std::hypot(p.x - c.image.x, p.y - c.image.y);
  }
  return total / double(pairs.size());
}

// Normalised DLT for the ground -> image homography.
inline HomographyEstimate estimate_homography(const std::vector<Correspondence> &pairs)
{
  if (pairs.size() < 4)
    throw ArityError("homography estimation needs at least 4 correspondences, got " +
                     std::to_string(pairs.size()));
  for (const auto &c : pairs)
    if (!std::isfinite(c.image.x) || !std::isfinite(c.image.y) || !std::isfinite(c.ground.x) ||
        !std::isfinite(c.ground.y))
      throw DomainError("correspondence coordinates must be finite");

  std::vector<Point2> src, dst;
  for (const auto &c : pairs)
  {
    src.push_back(c.ground);
    dst.push_back(c.image);
  }
  const Mat3 ts = detail::hartley_transform(src);
  const Mat3 td = detail::hartley_transform(dst);

  Mat9 normal{};
  auto accumulate_row = [&normal](const std::array<double, 9> &row) {
    for (int i = 0; i < 9; ++i)
      for (int j = 0; j < 9; ++j)
        normal[i][j] += row[i] * row[j];
  };
  for (std::size_t k = 0; k < pairs.size(); ++k)
  {
    const Point2 g = apply_homography(ts, src[k]);
    const Point2 m = apply_homography(td, dst[k]);
    accumulate_row({-g.x, -g.y, -1, 0, 0, 0, m.x * g.x, m.x * g.y, m.x});
    accumulate_row({0, 0, 0, -g.x, -g.y, -1, m.y * g.x, m.y * g.y, m.y});
  }

  const auto eig = jacobi_eigen(normal);
  std::array<int, 9> order{};
  for (int i = 0; i < 9; ++i)
    order[i] = i;
  std::sort(order.begin(), order.end(), [&eig](int a, int b) { return eig.values[a] < eig.values[b]; });
  const double largest = std::max(eig.values[order[8]], 1.0);
  // Eigenvalues of the normal matrix are squared singular values of the design matrix.
  if (eig.values[order[1]] - eig.values[order[0]] <= 1e-9 * largest)
    throw DegeneracyError("correspondences do not determine a unique homography");

  Mat3 hn{};
  for (int i = 0; i < 9; ++i)
    hn[i / 3][i % 3] = eig.vectors[i][order[0]];
  const Mat3 raw = lanekeep::inverse(td) * hn * ts;
  const Mat3 unit = normalized(raw);
  if (std::abs(determinant(unit)) <= 1e-12)
    throw DegeneracyError("correspondences are degenerate (estimated homography is singular)");
  HomographyEstimate out{Homography(unit), 0.0};
  out.mean_reprojection_error = mean_reprojection_error(out.h, pairs);
  return out;
}

// "u v X Y" per line; '#' starts a comment.
inline std::vector<Correspondence> parse_correspondences(std::istream &in)
{
  std::vector<Correspondence> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line))
  {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    std::istringstream fields(line);
    std::vector<double> values;
    std::string token;
    while (fields >> token)
    {
      try
      {
        std::size_t used = 0;
        values.push_back(std::stod(token, &used));
        if (used != token.size())
          throw std::invalid_argument(token);
      }
      catch (const std::exception &)
      {
        throw FormatError("correspondence line " + std::to_string(line_no) + ": bad number '" + token + "'");
      }
    }
    if (values.empty())
      continue;
    if (values.size() != 4)
      throw FormatError("correspondence line " + std::to_string(line_no) + ": expected 4 values, got " +
                        std::to_string(values.size()));
    out.push_back({{values[0], values[1]}, {values[2], values[3]}});
  }
  return out;
}

inline std::vector<Correspondence> read_correspondences_file(const std::string &path)
{
  std::ifstream in(path);
  if (!in)
    throw Error("cannot open " + path);
  return parse_correspondences(in);
}

// Three rows of three decimals, round-trippable.
inline std::string format_homography(const Homography &h)
{
  std::ostringstream out;
  out << std::setprecision(17);
  for (int r = 0; r < 3; ++r)
    out << h(r, 0) << ' ' << h(r, 1) << ' ' << h(r, 2) << '\n';
  return out.str();
}

inline Homography parse_homography(std::istream &in)
{
  Mat3 m{};
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c)
      if (!(in >> m[r][c]))
        throw FormatError("homography file must hold 9 decimals (3 rows of 3)");
  return Homography(m);
}

inline Homography read_homography_file(const std::string &path)
{
  std::ifstream in(path);
  if (!in)
    throw Error("cannot open " + path);
  return parse_homography(in);
}

} // namespace lanekeep
