#pragma once

#include <stdexcept>
#include <string>

namespace feddense {

/// Base of every error raised by the library. `category()` is a short
/// machine-readable tag used by the CLI when reporting failures.
class Error : public std::runtime_error {
 public:
  Error(std::string category, const std::string& what)
      : std::runtime_error(what), category_(std::move(category)) {}

  const std::string& category() const noexcept { return category_; }

 private:
  std::string category_;
};

#define FEDDENSE_DEFINE_ERROR(Name, tag)                                  \
  class Name : public Error {                                             \
   public:                                                                \
    explicit Name(const std::string& what) : Error(tag, what) {}          \
  }

FEDDENSE_DEFINE_ERROR(InvalidArgument, "invalid-argument");
FEDDENSE_DEFINE_ERROR(IndexError, "index");
FEDDENSE_DEFINE_ERROR(ShapeError, "shape");
FEDDENSE_DEFINE_ERROR(IngestionError, "ingestion");
FEDDENSE_DEFINE_ERROR(MalformedDataset, "malformed-dataset");
FEDDENSE_DEFINE_ERROR(ConfigError, "config");
FEDDENSE_DEFINE_ERROR(AggregationError, "aggregation");
FEDDENSE_DEFINE_ERROR(AnalysisError, "analysis");
FEDDENSE_DEFINE_ERROR(UnsupportedVariant, "unsupported-variant");
FEDDENSE_DEFINE_ERROR(CheckpointError, "checkpoint");

#undef FEDDENSE_DEFINE_ERROR

/// Parse failure at a specific (1-based) line of a text file.
class ParseError : public Error {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& what)
      : Error("parse", file + ":" + std::to_string(line) + ": " + what),
        file_(file),
        line_(line) {}

  const std::string& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

}  // namespace feddense
