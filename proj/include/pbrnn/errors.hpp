#pragma once

#include <stdexcept>
#include <string>

namespace pbrnn {

/// Operand dimensions disagree (matrix/vector sizes, sample widths, map sizes).
class ShapeError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// An argument is outside its documented domain.
class ArgumentError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

class IndexError : public std::out_of_range {
public:
  using std::out_of_range::out_of_range;
};

/// A patch window leaves the raster.
class BoundaryError : public std::out_of_range {
public:
  using std::out_of_range::out_of_range;
};

/// A labeled sample was requested at a pixel without a reference label.
class LabelError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A statistic is undefined for the given matrix (zero denominator).
class UndefinedStatistic : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Malformed file contents (bad magic, truncated payload, unparsable text).
class FormatError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Invalid or inconsistent configuration. `field()` names the offending key.
class ConfigError : public std::runtime_error {
public:
  ConfigError(std::string field, const std::string &what)
      : std::runtime_error(field.empty() ? what : field + ": " + what),
        field_(std::move(field)) {}

  const std::string &field() const noexcept { return field_; }

private:
  std::string field_;
};

} // namespace pbrnn
