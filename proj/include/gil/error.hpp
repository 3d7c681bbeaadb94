#pragma once

#include <stdexcept>
#include <string>

namespace gil {

/// Failure categories. The numeric values double as CLI exit codes.
enum class ErrorKind : int {
  Generic = 1,
  Config = 2,
  Io = 3,
  Dimension = 4,
  InsufficientData = 5,
  Index = 6,
  Contract = 7,
  MeasurementFailed = 8,
  DegenerateInput = 9,
  NonFinite = 10,
};

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string &what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

private:
  ErrorKind kind_;
};

#define GIL_DEFINE_ERROR(Name, Kind)                                                               \
  struct Name : Error {                                                                            \
    explicit Name(const std::string &what) : Error(ErrorKind::Kind, what) {}                       \
  }

GIL_DEFINE_ERROR(ConfigError, Config);
GIL_DEFINE_ERROR(IoError, Io);
GIL_DEFINE_ERROR(DimensionError, Dimension);
GIL_DEFINE_ERROR(InsufficientDataError, InsufficientData);
GIL_DEFINE_ERROR(IndexError, Index);
GIL_DEFINE_ERROR(ContractError, Contract);
GIL_DEFINE_ERROR(MeasurementFailedError, MeasurementFailed);
GIL_DEFINE_ERROR(DegenerateInputError, DegenerateInput);
GIL_DEFINE_ERROR(NonFiniteError, NonFinite);

#undef GIL_DEFINE_ERROR

} // namespace gil
