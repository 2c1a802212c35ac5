#pragma once

#include <array>
#include <cmath>

namespace sulab {

using Vec2 = std::array<double, 2>;
using Vec3 = std::array<double, 3>;

inline constexpr double kPi = 3.14159265358979323846;

inline Vec3 operator+(const Vec3& a, const Vec3& b) {
  return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}
inline Vec3 operator-(const Vec3& a, const Vec3& b) {
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}
inline Vec3 operator*(double s, const Vec3& a) {
  return {s * a[0], s * a[1], s * a[2]};
}
inline Vec3& operator+=(Vec3& a, const Vec3& b) {
  a[0] += b[0]; a[1] += b[1]; a[2] += b[2];
  return a;
}

inline double dot(const Vec3& a, const Vec3& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}
inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1],
          a[2] * b[0] - a[0] * b[2],
          a[0] * b[1] - a[1] * b[0]};
}
inline double norm2(const Vec3& a) { return dot(a, a); }
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

inline Vec3 normalized(const Vec3& a) {
  double n = norm(a);
  return {a[0] / n, a[1] / n, a[2] / n};
}

inline double dist(const Vec3& a, const Vec3& b) { return norm(a - b); }

// C1 cubic ramp: 0 below e0, 1 above e1.
inline double smoothstep(double e0, double e1, double x) {
  if (x <= e0) return 0.0;
  if (x >= e1) return 1.0;
  double t = (x - e0) / (e1 - e0);
  return t * t * (3.0 - 2.0 * t);
}

}  // namespace sulab
