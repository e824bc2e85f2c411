#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mflab {

class Error : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

// Kernel evaluated at the origin.
class SingularityError : public Error
{
  public:
    using Error::Error;
};

// Inputs outside the regime where a quantity is defined (eta > r_i, bad s, ...).
class RegimeError : public Error
{
  public:
    using Error::Error;
};

class CollisionError : public Error
{
  public:
    CollisionError(std::size_t i, std::size_t j, double distance);

    std::size_t first() const { return first_; }
    std::size_t second() const { return second_; }
    double distance() const { return distance_; }

  private:
    std::size_t first_;
    std::size_t second_;
    double distance_;
};

// Step failure during a run; carries the simulated time at which it happened.
class IntegratorError : public Error
{
  public:
    IntegratorError(const std::string& what, double time);
    double time() const { return time_; }

  private:
    double time_;
};

class CflError : public Error
{
  public:
    CflError(double requested_dt, double allowed_dt);
    double requested_dt() const { return requested_; }
    double allowed_dt() const { return allowed_; }

  private:
    double requested_;
    double allowed_;
};

class ShockError : public Error
{
  public:
    ShockError(const std::string& what, double time);
    double time() const { return time_; }

  private:
    double time_;
};

// Query point outside the region covered by a gridded field.
class ExtrapolationError : public Error
{
  public:
    using Error::Error;
};

// Bad configuration value; `path()` is the dotted key.
class ConfigError : public Error
{
  public:
    ConfigError(std::string path, const std::string& what);
    const std::string& path() const { return path_; }

  private:
    std::string path_;
};

// Malformed input file; `line()` is 1-based, 0 when unknown.
class SchemaError : public Error
{
  public:
    SchemaError(const std::string& what, std::size_t line, const std::string& file = "");
    std::size_t line() const { return line_; }
    // the description without file and line
    const std::string& message() const { return message_; }

  private:
    std::string message_;
    std::size_t line_;
};

} // namespace mflab
