#pragma once

#include <stdexcept>
#include <string>

namespace mfabc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// All weights are zero; the ensemble has collapsed.
class ZeroTotalMass : public Error {
 public:
  explicit ZeroTotalMass(const std::string& where) : Error(where + ": total weight is zero") {}
};

/// The proportion-active target rounds to zero particles.
class NoActiveParticles : public Error {
 public:
  using Error::Error;
};

class ZeroProposalDensity : public Error {
 public:
  using Error::Error;
};

class LengthMismatch : public Error {
 public:
  using Error::Error;
};

class NonPositiveScale : public Error {
 public:
  using Error::Error;
};

class NoAcceptedSamples : public Error {
 public:
  using Error::Error;
};

class EmptyReference : public Error {
 public:
  using Error::Error;
};

class AssumptionViolated : public Error {
 public:
  using Error::Error;
};

/// A sampler did not reach its target tolerance within the iteration cap.
class IterationCap : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class MetricUnavailable : public Error {
 public:
  using Error::Error;
};

}  // namespace mfabc
