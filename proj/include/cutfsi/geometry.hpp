// Circle level set, point classification and exact segment/circle crossings.
#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace cutfsi {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2& operator+=(Vec2 o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr Vec2& operator-=(Vec2 o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  constexpr Vec2& operator*=(double s) {
    x *= s;
    y *= s;
    return *this;
  }
  friend constexpr bool operator==(Vec2, Vec2) = default;
};

constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
constexpr Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
constexpr Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
constexpr Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
constexpr double norm_squared(Vec2 a) { return dot(a, a); }

/// Fluid occupies {phi > 0}, solid {phi < 0}.
enum class Side { Fluid = 0, Solid = 1 };

constexpr const char* to_string(Side s) { return s == Side::Fluid ? "fluid" : "solid"; }

enum class PointClass { Fluid, Solid, Interface };

/// phi(x) = |x - c|^2 - r^2. The solid is the open disk, the fluid its exterior.
class CircleLevelSet {
 public:
  CircleLevelSet(Vec2 center, double radius_squared)
      : center_(center), radius_squared_(radius_squared) {
    if (!(radius_squared > 0.0) || !std::isfinite(radius_squared)) {
      throw std::invalid_argument("CircleLevelSet: radius_squared must be positive");
    }
  }

  double operator()(Vec2 x) const { return norm_squared(x - center_) - radius_squared_; }
  Vec2 gradient(Vec2 x) const { return 2.0 * (x - center_); }

  Vec2 center() const { return center_; }
  double radius_squared() const { return radius_squared_; }
  double radius() const { return std::sqrt(radius_squared_); }

  Vec2 point_at(double theta) const {
    const double r = radius();
    return {center_.x + r * std::cos(theta), center_.y + r * std::sin(theta)};
  }

  /// Outward unit normal of the fluid on the interface; points into the solid.
  Vec2 fluid_normal(Vec2 x) const {
    const Vec2 d = x - center_;
    return (-1.0 / norm(d)) * d;
  }

 private:
  Vec2 center_;
  double radius_squared_;
};

inline double level_set_eval(const CircleLevelSet& ls, Vec2 x) { return ls(x); }

inline double interface_tolerance(Vec2 x) { return 1e-12 * (1.0 + norm_squared(x)); }

inline PointClass classify_point(const CircleLevelSet& ls, Vec2 x) {
  const double phi = ls(x);
  if (std::abs(phi) <= interface_tolerance(x)) return PointClass::Interface;
  return phi < 0.0 ? PointClass::Solid : PointClass::Fluid;
}

/// Points of the closed segment [a, b] on the zero set, ordered by the segment
/// parameter. A tangential touch is reported once.
inline std::vector<Vec2> edge_zero_crossings(const CircleLevelSet& ls, Vec2 a, Vec2 b) {
  if (a == b) throw std::invalid_argument("edge_zero_crossings: degenerate segment");
  const Vec2 d = b - a;
  const Vec2 e = a - ls.center();
  // phi(a + s d) = A s^2 + 2 B s + C
  const double A = dot(d, d);
  const double B = dot(e, d);
  const double C = dot(e, e) - ls.radius_squared();
  const double disc = B * B - A * C;
  std::vector<double> roots;
  if (disc < 0.0) return {};
  if (disc == 0.0) {
    roots.push_back(-B / A);
  } else {
    const double q = -(B + std::copysign(std::sqrt(disc), B));
    double s1 = q / A;
    double s2 = q != 0.0 ? C / q : -s1;
    if (s1 > s2) std::swap(s1, s2);
    roots = {s1, s2};
  }

  constexpr double slack = 1e-14;
  std::vector<Vec2> out;
  for (double s : roots) {
    if (s < -slack || s > 1.0 + slack) continue;
    s = std::clamp(s, 0.0, 1.0);
    // One Newton polish on the quadratic keeps |phi| at round-off level.
    const double f = (A * s + 2.0 * B) * s + C;
    const double df = 2.0 * (A * s + B);
    if (df != 0.0) s = std::clamp(s - f / df, 0.0, 1.0);
    out.push_back(a + s * d);
  }
  return out;
}

/// Portion of the interface inside one cell, parametrized by the polar angle
/// about the circle center.
struct InterfaceSegment {
  double theta_begin = 0.0;
  double theta_end = 0.0;
  Vec2 begin;
  Vec2 end;
  int cell = -1;

  double angle() const { return theta_end - theta_begin; }
};

}  // namespace cutfsi
