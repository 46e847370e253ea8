#ifndef MULTIREF_ERRORS_HPP
#define MULTIREF_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace multiref {

// Base class for all toolkit failures. The CLI maps these to exit code 1.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Bad flags, unknown config keys, out-of-range parameters. Exit code 2.
class UsageError : public Error {
 public:
  using Error::Error;
};

// Malformed input data; carries the 1-based source line when known.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what, std::size_t line = 0)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Scorer failures propagate through sim_p with group/ref context attached.
class ScorerError : public Error {
 public:
  using Error::Error;
};

// No token of the text is in the embedding vocabulary.
class NoKnownTokensError : public ScorerError {
 public:
  using ScorerError::ScorerError;
};

// An averaged embedding has zero norm; cosine is undefined.
class ZeroVectorError : public ScorerError {
 public:
  using ScorerError::ScorerError;
};

// sim_p needs at least two references.
class FewerThanTwoReferencesError : public Error {
 public:
  using Error::Error;
};

// Imported pairwise scores do not cover all C(n,2) pairs of a group.
class IncompletePairSetError : public Error {
 public:
  using Error::Error;
};

// A prompt-line export field contains the record delimiter.
class DelimiterCollisionError : public Error {
 public:
  using Error::Error;
};

}  // namespace multiref

#endif  // MULTIREF_ERRORS_HPP
