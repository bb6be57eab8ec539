#pragma once

#include <cmath>

namespace edghdg {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

// Component tangential to a unit normal n: v - (v.n) n.
inline Vec2 tangential(Vec2 v, Vec2 n) {
  const double vn = dot(v, n);
  return {v.x - vn * n.x, v.y - vn * n.y};
}

}  // namespace edghdg
