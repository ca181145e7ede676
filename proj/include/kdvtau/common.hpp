#pragma once
// Shared numeric utilities: complex aliases, branch geometry, deterministic
// formatting and hashing used across the library.

#include <complex>
#include <cstdint>
#include <cstdio>
#include <cmath>
#include <string>
#include <vector>
#include <algorithm>

namespace kdvtau {

using cplx = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846;
inline const cplx iu{0.0, 1.0};

inline cplx sq(cplx z) { return z * z; }

// Odd square root of z^2 + r^2: w(z) = z * sqrt(1 + r^2/z^2) with the
// principal branch. w ~ z at infinity in every direction; its only branch
// cut is the imaginary segment i[-r, r]. w maps the exterior of the cross
// [-r,r] u i[-r,r] onto the exterior of the real segment [-sqrt2 r, sqrt2 r].
inline cplx w_of_z(cplx z, double r) {
  if (r == 0.0) return z;
  return z * std::sqrt(1.0 + (r * r) / (z * z));
}

// Distance from z to the segment [-a, a] on the real axis.
inline double dist_to_real_segment(cplx z, double a) {
  double x = std::abs(z.real()), y = std::abs(z.imag());
  if (x <= a) return y;
  return std::hypot(x - a, y);
}

// Distance from z to the cross [-r,r] u i[-r,r].
inline double dist_to_cross(cplx z, double r) {
  return std::min(dist_to_real_segment(z, r),
                  dist_to_real_segment(cplx(z.imag(), -z.real()), r));
}

// 17-significant-digit formatting, locale independent: round-trips doubles
// and keeps output byte-stable across runs.
inline std::string fmt17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return std::string(buf);
}

inline std::string fmt17(cplx z) {
  return fmt17(z.real()) + (z.imag() < 0 ? "-" : "+") +
         fmt17(std::abs(z.imag())) + "i";
}

// FNV-1a, used to hash configs into provenance records.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline bool close(double a, double b, double tol) { return std::abs(a - b) <= tol; }
inline bool close(cplx a, cplx b, double tol) { return std::abs(a - b) <= tol; }

// Relative gap used when comparing two independently computed values.
inline double rel_err(cplx a, cplx b) {
  return std::abs(a - b) / (1.0 + std::min(std::abs(a), std::abs(b)));
}

}  // namespace kdvtau
