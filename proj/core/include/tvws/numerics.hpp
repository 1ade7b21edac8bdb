#pragma once

#include <cmath>
#include <cstdlib>

namespace tvws {

/// Kahan-Babuska compensated accumulator; used for the 2^N state sums so the
/// accumulated error stays far below the asserted tolerances.
class KahanSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }

  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// True when |a-b| <= tol * max(|a|,|b|). Exact equality (including 0 vs 0
/// and inf vs inf) always passes.
inline bool rel_close(double a, double b, double tol) noexcept {
  if (a == b) return true;
  const double scale = std::max(std::abs(a), std::abs(b));
  return std::abs(a - b) <= tol * scale;
}

/// Sign of x with values below tol*scale treated as zero, so that -0.0 and
/// round-off residue both map to 0.
inline int sign_with_tol(double x, double scale, double tol) noexcept {
  if (std::abs(x) <= tol * scale) return 0;
  return x > 0.0 ? 1 : -1;
}

inline double dbm_to_watts(double dbm) noexcept {
  return std::pow(10.0, dbm / 10.0) * 1e-3;
}

inline double watts_to_dbm(double watts) noexcept {
  return 10.0 * std::log10(watts * 1e3);
}

}  // namespace tvws
