#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace curvibc {

using real = double;
using cplx = std::complex<double>;

// Domain errors carry a stable kind tag so the CLI can map them to exit
// codes and print the typed name without RTTI games.
class Error : public std::runtime_error {
public:
  Error(std::string kind, const std::string& msg)
      : std::runtime_error(kind + ": " + msg), kind_(std::move(kind)) {}
  const std::string& kind() const { return kind_; }

private:
  std::string kind_;
};

[[noreturn]] inline void fail(const char* kind, const std::string& msg) {
  throw Error(kind, msg);
}

inline void require(bool ok, const char* kind, const std::string& msg) {
  if (!ok) fail(kind, msg);
}

// splitmix64: the project-wide seeded generator. Chosen over
// std::mt19937 + distributions because the output stream is specified
// bit-for-bit, so seeded suites reproduce across compilers.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1), 53-bit resolution
  real uniform() { return static_cast<real>(next_u64() >> 11) * 0x1.0p-53; }

  real uniform(real lo, real hi) { return lo + (hi - lo) * uniform(); }

private:
  std::uint64_t state_;
};

inline bool rel_close(real a, real b, real tol, real floor = 1.0) {
  return std::abs(a - b) <= tol * std::max({std::abs(a), std::abs(b), floor});
}

inline bool rel_close(cplx a, cplx b, real tol, real floor = 1.0) {
  return std::abs(a - b) <= tol * std::max({std::abs(a), std::abs(b), floor});
}

inline real sq(real x) { return x * x; }
inline cplx sq(cplx x) { return x * x; }

}  // namespace curvibc
