#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lanekeep/error.hpp"

namespace lanekeep
{

// Row-major 8-bit intensity raster.
class GrayImage
{
public:
  GrayImage() = default;
  GrayImage(int width, int height, std::uint8_t fill = 0)
      : width_(width), height_(height)
  {
    if (width <= 0 || height <= 0)
      throw FormatError("image dimensions must be positive, got " + std::to_string(width) +
                        "x" + std::to_string(height));
    pixels_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
  }
  GrayImage(int width, int height, std::vector<std::uint8_t> pixels)
      : GrayImage(width, height)
  {
    if (pixels.size() != pixels_.size())
      throw FormatError("pixel buffer holds " + std::to_string(pixels.size()) +
                        " values, expected " + std::to_string(pixels_.size()));
    pixels_ = std::move(pixels);
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return pixels_.size(); }
  bool empty() const noexcept { return pixels_.empty(); }

  std::uint8_t at(int x, int y) const { return pixels_[index(x, y)]; }
  std::uint8_t &at(int x, int y) { return pixels_[index(x, y)]; }

  std::span<const std::uint8_t> pixels() const noexcept { return pixels_; }
  std::span<std::uint8_t> pixels() noexcept { return pixels_; }

  bool operator==(const GrayImage &) const = default;

private:
  std::size_t index(int x, int y) const noexcept
  {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> pixels_;
};

// Row-major foreground mask; true marks lane pixels.
class BinaryImage
{
public:
  BinaryImage() = default;
  BinaryImage(int width, int height, bool fill = false) : width_(width), height_(height)
  {
    if (width <= 0 || height <= 0)
      throw FormatError("mask dimensions must be positive, got " + std::to_string(width) +
                        "x" + std::to_string(height));
    mask_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height),
                 fill ? 1 : 0);
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return mask_.size(); }

  bool at(int x, int y) const { return mask_[index(x, y)] != 0; }
  void set(int x, int y, bool value) { mask_[index(x, y)] = value ? 1 : 0; }

  bool in_bounds(int x, int y) const noexcept
  {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  std::size_t count() const noexcept
  {
    return static_cast<std::size_t>(std::count(mask_.begin(), mask_.end(), std::uint8_t{1}));
  }

  BinaryImage flipped_horizontally() const
  {
    BinaryImage out(width_, height_);
    for (int y = 0; y < height_; ++y)
      for (int x = 0; x < width_; ++x)
        out.set(width_ - 1 - x, y, at(x, y));
    return out;
  }

  bool operator==(const BinaryImage &) const = default;

private:
  std::size_t index(int x, int y) const noexcept
  {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> mask_;
};

// Inclusive pixel rectangle.
struct RectRoi
{
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;

  bool operator==(const RectRoi &) const = default;
};

inline constexpr int default_threshold = 128;
inline constexpr bool default_invert = true;
inline constexpr double default_roi_fraction = 0.4;

// Bottom `fraction` of the frame, full width.
inline RectRoi bottom_roi(int width, int height, double fraction = default_roi_fraction)
{
  const int rows = std::clamp(static_cast<int>(std::lround(fraction * height)), 1, height);
  return RectRoi{0, height - rows, width - 1, height - 1};
}

// BT.601 luma of an interleaved RGB raster of width*height triplets.
inline GrayImage rgb_to_gray(int width, int height, std::span<const std::uint8_t> rgb)
{
  const std::size_t expected =
      3u * static_cast<std::size_t>(std::max(width, 0)) * static_cast<std::size_t>(std::max(height, 0));
  if (rgb.size() != expected)
    throw FormatError("rgb raster holds " + std::to_string(rgb.size()) + " channel values, expected " +
                      std::to_string(expected));
  GrayImage out(width, height);
  auto dst = out.pixels();
  for (std::size_t i = 0; i < dst.size(); ++i)
  {
    const double luma = 0.299 * rgb[3 * i] + 0.587 * rgb[3 * i + 1] + 0.114 * rgb[3 * i + 2];
    dst[i] = static_cast<std::uint8_t>(std::clamp(std::lround(luma), 0L, 255L));
  }
  return out;
}

inline BinaryImage threshold(const GrayImage &img, int t = default_threshold,
                             bool invert = default_invert)
{
  BinaryImage out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
    {
      const int v = img.at(x, y);
      out.set(x, y, invert ? v < t : v >= t);
    }
  return out;
}

inline void validate_roi(const RectRoi &roi, int width, int height)
{
  auto fail = [](const char *name, int value, const std::string &bound) {
    throw BoundsError("roi " + std::string(name) + "=" + std::to_string(value) + " violates " + bound);
  };
  if (roi.x0 < 0)
    fail("x0", roi.x0, "x0 >= 0");
  if (roi.y0 < 0)
    fail("y0", roi.y0, "y0 >= 0");
  if (roi.x1 >= width)
    fail("x1", roi.x1, "x1 < width " + std::to_string(width));
  if (roi.y1 >= height)
    fail("y1", roi.y1, "y1 < height " + std::to_string(height));
  if (roi.x0 > roi.x1)
    fail("x0", roi.x0, "x0 <= x1 " + std::to_string(roi.x1));
  if (roi.y0 > roi.y1)
    fail("y0", roi.y0, "y0 <= y1 " + std::to_string(roi.y1));
}

inline BinaryImage apply_roi(const BinaryImage &bin, const RectRoi &roi)
{
  validate_roi(roi, bin.width(), bin.height());
  BinaryImage out(bin.width(), bin.height());
  for (int y = roi.y0; y <= roi.y1; ++y)
    for (int x = roi.x0; x <= roi.x1; ++x)
      out.set(x, y, bin.at(x, y));
  return out;
}

} // namespace lanekeep
