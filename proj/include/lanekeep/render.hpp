#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "lanekeep/error.hpp"
#include "lanekeep/homography.hpp"
#include "lanekeep/image.hpp"
#include "lanekeep/track.hpp"
#include "lanekeep/vehicle.hpp"

namespace lanekeep
{

struct RenderSpec
{
  int width = 160;
  int height = 120;
  int tape_intensity = 40;
  int ground_intensity = 200;
  double noise_sigma = 15.0;
  std::uint64_t seed = 1;

  void validate() const
  {
    if (width <= 0 || height <= 0)
      throw ConfigError("render dimensions must be positive");
    if (tape_intensity < 0 || ground_intensity > 255 || !(tape_intensity < ground_intensity))
      throw ConfigError("render needs 0 <= tape_intensity < ground_intensity <= 255");
    if (!(noise_sigma >= 0))
      throw ConfigError("render noise_sigma must be >= 0");
  }
};

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream)
{
  // splitmix64 finaliser over the combined words.
  std::uint64_t z = seed * 0x9E3779B97F4A7C15ull + stream + 0x632BE59BD9B4E019ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Ray-casts every pixel onto the ground plane; tape where the hit lies within tape_width/2 of
// a lane boundary. Noise is drawn from (seed, frame_index) only.
inline GrayImage render_frame(const Track &track, const VehicleState &state, const VehicleParams &params,
                              const RenderSpec &spec, std::uint64_t frame_index = 0)
{
  spec.validate();
  CameraModel cam = params.cam;
  const Mat3 image_to_ground = lanekeep::inverse(analytic_homography(cam).matrix());
  const Point2 fwd = heading_vector(state.psi);
  const Point2 right = right_normal(state.psi);
  const Point2 cam_pos{state.x + params.mount_offset * fwd.x, state.y + params.mount_offset * fwd.y};
  const double half_tape = 0.5 * track.spec().tape_width;
  const auto tape = static_cast<std::uint8_t>(spec.tape_intensity);
  const auto ground = static_cast<std::uint8_t>(spec.ground_intensity);

  GrayImage img(spec.width, spec.height, ground);
  for (int v = 0; v < spec.height; ++v)
    for (int u = 0; u < spec.width; ++u)
    {
      const double w = image_to_ground[2][0] * u + image_to_ground[2][1] * v + image_to_ground[2][2];
      if (w <= horizon_epsilon)
        continue; // at or above the horizon
      const double gx = (image_to_ground[0][0] * u + image_to_ground[0][1] * v + image_to_ground[0][2]) / w;
      const double gy = (image_to_ground[1][0] * u + image_to_ground[1][1] * v + image_to_ground[1][2]) / w;
      const Point2 world{cam_pos.x + gx * fwd.x + gy * right.x, cam_pos.y + gx * fwd.y + gy * right.y};
      if (track.boundary_distance(world, half_tape) <= half_tape)
        img.at(u, v) = tape;
    }

  if (spec.noise_sigma > 0)
  {
    std::mt19937_64 rng(mix_seed(spec.seed, frame_index));
    std::normal_distribution<double> noise(0.0, spec.noise_sigma);
    for (auto &px : img.pixels())
      px = static_cast<std::uint8_t>(std::clamp(std::lround(px + noise(rng)), 0L, 255L));
  }
  return img;
}

} // namespace lanekeep
