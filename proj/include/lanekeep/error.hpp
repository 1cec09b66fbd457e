#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lanekeep
{

// Base of every error thrown by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

class FormatError : public Error
{
public:
  using Error::Error;
};

// PNM decoding failure. offset points at the first byte that could not be consumed.
class ParseError : public FormatError
{
public:
  enum class Kind
  {
    bad_magic,
    bad_header,
    bad_maxval,
    truncated
  };

  ParseError(Kind kind, std::size_t offset, const std::string &what)
      : FormatError(what + " (byte offset " + std::to_string(offset) + ")"),
        kind_(kind), offset_(offset)
  {
  }

  Kind kind() const noexcept { return kind_; }
  std::size_t offset() const noexcept { return offset_; }

private:
  Kind kind_;
  std::size_t offset_;
};

class BoundsError : public Error
{
public:
  using Error::Error;
};

class DomainError : public Error
{
public:
  using Error::Error;
};

class ArityError : public Error
{
public:
  using Error::Error;
};

class DegeneracyError : public Error
{
public:
  using Error::Error;
};

class HorizonError : public Error
{
public:
  using Error::Error;
};

class ConfigError : public Error
{
public:
  using Error::Error;
};

class ControllerFault : public Error
{
public:
  using Error::Error;
};

class DivergenceError : public Error
{
public:
  DivergenceError(int epoch, const std::string &what)
      : Error(what + " at epoch " + std::to_string(epoch)), epoch_(epoch)
  {
  }
  int epoch() const noexcept { return epoch_; }

private:
  int epoch_;
};

class ComparabilityError : public Error
{
public:
  using Error::Error;
};

class OffTrack : public Error
{
public:
  using Error::Error;
};

} // namespace lanekeep
