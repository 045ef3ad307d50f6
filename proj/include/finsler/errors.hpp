#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace finsler {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonPositiveF : public Error {
 public:
  explicit NonPositiveF(const std::string& what) : Error("NonPositiveF: " + what) {}
};

class NotPositiveDefinite : public Error {
 public:
  static constexpr std::size_t kNoNode = static_cast<std::size_t>(-1);

  NotPositiveDefinite(const std::string& what, double eigenvalue, std::size_t node = kNoNode)
      : Error("NotPositiveDefinite: " + what + " (min eigenvalue " + std::to_string(eigenvalue) + ")"),
        eigenvalue_(eigenvalue),
        node_(node) {}
  double eigenvalue() const { return eigenvalue_; }
  /// Grid node index when raised by a field computation, kNoNode otherwise.
  std::size_t node() const { return node_; }

 private:
  double eigenvalue_;
  std::size_t node_;
};

class SingularMetric : public Error {
 public:
  explicit SingularMetric(const std::string& what) : Error("SingularMetric: " + what) {}
};

class BadResolution : public Error {
 public:
  explicit BadResolution(const std::string& what) : Error("BadResolution: " + what) {}
};

class DegreeMismatch : public Error {
 public:
  explicit DegreeMismatch(const std::string& what) : Error("DegreeMismatch: " + what) {}
};

class BlowUp : public Error {
 public:
  BlowUp(const std::string& what, std::size_t node, double time)
      : Error("BlowUp: " + what + " at node " + std::to_string(node) + ", t=" + std::to_string(time)),
        node_(node),
        time_(time) {}
  std::size_t node() const { return node_; }
  double time() const { return time_; }

 private:
  std::size_t node_;
  double time_;
};

class CFLViolation : public Error {
 public:
  explicit CFLViolation(const std::string& what) : Error("CFLViolation: " + what) {}
};

class DisplacementTooLarge : public Error {
 public:
  explicit DisplacementTooLarge(const std::string& what) : Error("DisplacementTooLarge: " + what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error("ConfigError: " + what) {}
};

class ConvexityViolated : public Error {
 public:
  explicit ConvexityViolated(const std::string& what) : Error("ConvexityViolated: " + what) {}
};

}  // namespace finsler
