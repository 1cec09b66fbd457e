#pragma once

#include <cctype>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include "lanekeep/error.hpp"
#include "lanekeep/image.hpp"

namespace lanekeep
{

namespace detail
{

class PnmHeaderReader
{
public:
  explicit PnmHeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  // Skips whitespace and '#' comments, then reads a decimal token.
  long read_int(const char *field)
  {
    skip_separators();
    const std::size_t start = pos_;
    token_start_ = start;
    long value = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_]))
    {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > 1'000'000'000L)
        throw ParseError(ParseError::Kind::bad_header, start, std::string(field) + " too large");
      ++pos_;
    }
    if (pos_ == start)
    {
      if (pos_ >= bytes_.size())
        throw ParseError(ParseError::Kind::truncated, pos_, std::string("header ends before ") + field);
      throw ParseError(ParseError::Kind::bad_header, pos_, std::string("expected decimal ") + field);
    }
    return value;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  void read_single_whitespace()
  {
    if (pos_ >= bytes_.size())
      throw ParseError(ParseError::Kind::truncated, pos_, "header ends before raster");
    if (!std::isspace(bytes_[pos_]))
      throw ParseError(ParseError::Kind::bad_header, pos_, "expected whitespace after maxval");
    ++pos_;
  }

  std::size_t position() const noexcept { return pos_; }
  std::size_t token_start() const noexcept { return token_start_; }
  void advance(std::size_t n) noexcept { pos_ += n; }

private:
  void skip_separators()
  {
    while (pos_ < bytes_.size())
    {
      if (std::isspace(bytes_[pos_]))
        ++pos_;
      else if (bytes_[pos_] == '#')
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n')
          ++pos_;
      else
        break;
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
  std::size_t token_start_ = 0;
};

} // namespace detail

// Decodes binary PGM (P5) or PPM (P6, converted to luma), maxval 255 only.
inline GrayImage read_pnm(std::span<const std::uint8_t> bytes)
{
  if (bytes.size() < 2)
    throw ParseError(ParseError::Kind::truncated, bytes.size(), "missing magic number");
  if (bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6'))
    throw ParseError(ParseError::Kind::bad_magic, 0, "magic must be P5 or P6");
  const bool color = bytes[1] == '6';

  detail::PnmHeaderReader reader(bytes);
  reader.advance(2);
  const long width = reader.read_int("width");
  const long height = reader.read_int("height");
  if (width <= 0 || height <= 0)
    throw ParseError(ParseError::Kind::bad_header, reader.position(), "dimensions must be positive");
  const long maxval = reader.read_int("maxval");
  if (maxval != 255)
    throw ParseError(ParseError::Kind::bad_maxval, reader.token_start(),
                     "maxval must be 255, got " + std::to_string(maxval));
  reader.read_single_whitespace();

  const std::size_t start = reader.position();
  const std::size_t channels = color ? 3 : 1;
  const std::size_t needed = static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * channels;
  if (bytes.size() - start < needed)
    throw ParseError(ParseError::Kind::truncated, bytes.size(),
                     "raster needs " + std::to_string(needed) + " bytes, " +
                         std::to_string(bytes.size() - start) + " present");

  const auto raster = bytes.subspan(start, needed);
  if (color)
    return rgb_to_gray(static_cast<int>(width), static_cast<int>(height), raster);
  return GrayImage(static_cast<int>(width), static_cast<int>(height),
                   std::vector<std::uint8_t>(raster.begin(), raster.end()));
}

inline std::vector<std::uint8_t> write_pnm(const GrayImage &img)
{
  const std::string header =
      "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), img.pixels().begin(), img.pixels().end());
  return out;
}

inline std::vector<std::uint8_t> read_file_bytes(const std::string &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file_bytes(const std::string &path, std::span<const std::uint8_t> bytes)
{
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error("cannot write " + path);
  out.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

inline GrayImage read_pnm_file(const std::string &path) { return read_pnm(read_file_bytes(path)); }

inline void write_pnm_file(const std::string &path, const GrayImage &img)
{
  write_file_bytes(path, write_pnm(img));
}

} // namespace lanekeep
