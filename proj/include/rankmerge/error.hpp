#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rankmerge {

/// Broad failure categories. The CLI maps each one to a process exit code.
enum class ErrorKind {
  invalid_argument,   ///< precondition violated by the caller
  parse,              ///< malformed input file
  annotation,         ///< probe annotation could not be applied
  score_state,        ///< dataset already scored (or not scored when required)
  no_common_features, ///< empty intersection of row names
  degenerate,         ///< test or grouping has no information (all ties, empty side, ...)
  unknown_feature,    ///< requested symbol not present
  empty_universe,     ///< enrichment universe is empty
  io,                 ///< filesystem failure
  format,             ///< persisted dataset is unreadable (bad manifest, bad TSV)
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Specific reasons a text parse can fail.
enum class ParseErrorCode {
  missing_table_begin,
  missing_table_end,
  missing_header,
  ragged_row,
  duplicate_sample,
  duplicate_probe,
  bad_number,
};

const char* to_string(ParseErrorCode code);

/// A parse failure tied to a 1-based line number of the input.
class ParseError : public Error {
 public:
  ParseError(ParseErrorCode code, std::size_t line, const std::string& detail)
      : Error(ErrorKind::parse, "line " + std::to_string(line) + ": " + to_string(code) + ": " + detail),
        code_(code),
        line_(line) {}

  ParseErrorCode code() const noexcept { return code_; }
  std::size_t line() const noexcept { return line_; }

 private:
  ParseErrorCode code_;
  std::size_t line_;
};

}  // namespace rankmerge
