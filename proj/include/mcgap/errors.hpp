#pragma once

#include <stdexcept>
#include <string>

namespace mcgap {

// Base class for every failure the library reports.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Symbolic algebra ------------------------------------------------------

// Input polynomial is not a total x-derivative.
class NotExact : public Error {
 public:
  explicit NotExact(const std::string& what) : Error(what) {}
};

class JetTooShort : public Error {
 public:
  explicit JetTooShort(const std::string& what) : Error(what) {}
};

class IndexOutOfRange : public Error {
 public:
  explicit IndexOutOfRange(const std::string& what) : Error(what) {}
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what) : Error(what) {}
};

// Numerics ---------------------------------------------------------------

class NoConvergence : public Error {
 public:
  explicit NoConvergence(const std::string& what) : Error(what) {}
};

class PoleDetected : public Error {
 public:
  explicit PoleDetected(const std::string& what) : Error(what) {}
};

class MatchingWindowViolated : public Error {
 public:
  explicit MatchingWindowViolated(const std::string& what) : Error(what) {}
};

class CrossCheckFailed : public Error {
 public:
  explicit CrossCheckFailed(const std::string& what) : Error(what) {}
};

class DomainExceeded : public Error {
 public:
  explicit DomainExceeded(const std::string& what) : Error(what) {}
};

class NodeCountTooSmall : public Error {
 public:
  explicit NodeCountTooSmall(const std::string& what) : Error(what) {}
};

class NegativeRadicand : public Error {
 public:
  explicit NegativeRadicand(const std::string& what) : Error(what) {}
};

class PoleOfW : public Error {
 public:
  explicit PoleOfW(const std::string& what) : Error(what) {}
};

class PrecisionExhausted : public Error {
 public:
  explicit PrecisionExhausted(const std::string& what) : Error(what) {}
};

class NonIntegrableWeight : public Error {
 public:
  explicit NonIntegrableWeight(const std::string& what) : Error(what) {}
};

class NotConverged : public Error {
 public:
  explicit NotConverged(const std::string& what) : Error(what) {}
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error(what) {}
};

}  // namespace mcgap
