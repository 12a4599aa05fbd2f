#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace plsel {

enum class ErrorKind {
  InvalidArgument,
  GridEmpty,
  DomainError,
  RankDeficient,
  MissingParameter,
  AllCandidatesRankDeficient,
  DegenerateDoF,
  DimensionMismatch,
  InvalidSpec,
  ParseError,
};

const char* to_string(ErrorKind kind) noexcept;

/// Base class for every error raised by the library. Carries a machine
/// readable kind so the CLI can map failures onto exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

#define PLSEL_DEFINE_ERROR(Name)                                     \
  class Name : public Error {                                        \
   public:                                                           \
    explicit Name(const std::string& what)                           \
        : Error(ErrorKind::Name, what) {}                            \
  };

PLSEL_DEFINE_ERROR(InvalidArgument)
PLSEL_DEFINE_ERROR(GridEmpty)
PLSEL_DEFINE_ERROR(RankDeficient)
PLSEL_DEFINE_ERROR(MissingParameter)
PLSEL_DEFINE_ERROR(AllCandidatesRankDeficient)
PLSEL_DEFINE_ERROR(DegenerateDoF)
PLSEL_DEFINE_ERROR(DimensionMismatch)
PLSEL_DEFINE_ERROR(InvalidSpec)

#undef PLSEL_DEFINE_ERROR

/// Value outside its admissible domain. `index()` names the offending
/// row (or element) when there is one.
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what,
                       std::optional<std::size_t> index = std::nullopt)
      : Error(ErrorKind::DomainError, what), index_(index) {}

  std::optional<std::size_t> index() const noexcept { return index_; }

 private:
  std::optional<std::size_t> index_;
};

/// Malformed input file. Line and column are 1-based; 0 means unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : Error(ErrorKind::ParseError, what + " (line " + std::to_string(line) + ", column " +
                                         std::to_string(column) + ")"),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace plsel
