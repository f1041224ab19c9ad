#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace uvnet {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Slack allowed on every inequality when testing membership, inclusion and
/// emptiness. Set equality is double inclusion under this tolerance.
inline constexpr double kFeasTol = 1e-9;

/// Samples drawn by the sampled (non-exact) inclusion and emptiness paths.
inline constexpr std::size_t kDefaultSampleCount = 100000;

/// Outcome of a test that is decided exactly on polytopic inputs and by
/// sampling otherwise. `SampledTrue` means no counterexample was found
/// among the samples drawn; a `False` from a sampled path is always backed by
/// a concrete witness point.
enum class Verdict { False, True, SampledTrue };

inline bool holds(Verdict v) { return v != Verdict::False; }

inline Verdict verdict_from(bool b) { return b ? Verdict::True : Verdict::False; }

/// Conjunction: False dominates, then SampledTrue.
inline Verdict operator&&(Verdict a, Verdict b) {
  if (a == Verdict::False || b == Verdict::False) return Verdict::False;
  if (a == Verdict::SampledTrue || b == Verdict::SampledTrue) return Verdict::SampledTrue;
  return Verdict::True;
}

std::string to_string(Verdict v);

struct SampleOptions {
  std::uint64_t seed = 0;
  std::size_t count = kDefaultSampleCount;
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// Raised when an operation has no implementation for a representation,
/// e.g. a linear program over a membership oracle.
class UnsupportedRepresentation : public Error {
 public:
  using Error::Error;
};

}  // namespace uvnet
