#pragma once

#include <stdexcept>
#include <string>

namespace lcs {

// Parse failure with a 1-based source position.
class ParseError : public std::runtime_error {
public:
  ParseError(int line, int col, const std::string& what)
      : std::runtime_error(std::to_string(line) + ":" + std::to_string(col) +
                           ": " + what),
        line(line), col(col), message(what) {}
  int line;
  int col;
  std::string message;
};

// Objective kinds the toolkit refuses to solve (parity and friends).
class UnsupportedObjectiveError : public std::runtime_error {
public:
  UnsupportedObjectiveError(int line, int col, const std::string& keyword)
      : std::runtime_error("objective kind '" + keyword +
                           "' is not supported: weak parity objectives are "
                           "undecidable for lossy channel games under "
                           "incomplete information"),
        line(line), col(col), keyword(keyword) {}
  int line;
  int col;
  std::string keyword;
};

// A configured resource cap was hit. For the solvers this signals an
// implementation bug, not an expected outcome; callers translate it into a
// distinct exit code.
class BudgetExceededError : public std::runtime_error {
public:
  explicit BudgetExceededError(const std::string& what)
      : std::runtime_error(what) {}
};

// Safety strategy extraction found no safe choice at some reachable
// knowledge. Possible because the extraction widens knowledge sets.
class ExtractionIncompleteError : public std::runtime_error {
public:
  explicit ExtractionIncompleteError(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace lcs
