#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

namespace fedqol {

// Row-major 2x2 real matrix: the carrier for MORE keys and ciphertexts.
struct Mat2 {
  double m00 = 0.0, m01 = 0.0, m10 = 0.0, m11 = 0.0;

  static constexpr Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
  static constexpr Mat2 diagonal(double x, double y) { return {x, 0.0, 0.0, y}; }
  static constexpr Mat2 scalar(double s) { return {s, 0.0, 0.0, s}; }

  double det() const { return m00 * m11 - m01 * m10; }
  double trace() const { return m00 + m11; }

  // Caller guarantees det() != 0.
  Mat2 inverse() const {
    double d = det();
    return {m11 / d, -m01 / d, -m10 / d, m00 / d};
  }

  double max_abs() const {
    return std::max(std::max(std::abs(m00), std::abs(m01)),
                    std::max(std::abs(m10), std::abs(m11)));
  }

  // Spectral condition number from the closed-form singular values.
  double cond() const {
    double p = m00 * m00 + m10 * m10;
    double q = m01 * m01 + m11 * m11;
    double r = m00 * m01 + m10 * m11;
    double mean = 0.5 * (p + q);
    double span = std::sqrt(0.25 * (p - q) * (p - q) + r * r);
    double lo = mean - span;
    if (lo <= 0.0) return std::numeric_limits<double>::infinity();
    return std::sqrt((mean + span) / lo);
  }

  bool operator==(const Mat2&) const = default;
};

inline Mat2 operator+(const Mat2& a, const Mat2& b) {
  return {a.m00 + b.m00, a.m01 + b.m01, a.m10 + b.m10, a.m11 + b.m11};
}

inline Mat2 operator-(const Mat2& a, const Mat2& b) {
  return {a.m00 - b.m00, a.m01 - b.m01, a.m10 - b.m10, a.m11 - b.m11};
}

inline Mat2 operator*(const Mat2& a, const Mat2& b) {
  return {a.m00 * b.m00 + a.m01 * b.m10, a.m00 * b.m01 + a.m01 * b.m11,
          a.m10 * b.m00 + a.m11 * b.m10, a.m10 * b.m01 + a.m11 * b.m11};
}

inline Mat2 operator*(double s, const Mat2& a) {
  return {s * a.m00, s * a.m01, s * a.m10, s * a.m11};
}

}  // namespace fedqol
