#pragma once

#include <cmath>

namespace fharm {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator/(double s) const { return {x / s, y / s}; }
    Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
};

inline Vec2 operator*(double s, const Vec2& v) { return {s * v.x, s * v.y}; }
inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm2(const Vec2& a) { return a.x * a.x + a.y * a.y; }
inline double norm(const Vec2& a) { return std::hypot(a.x, a.y); }
inline double dist(const Vec2& a, const Vec2& b) { return norm(a - b); }

// symmetric 2x2 matrix, used for Hessians
struct Sym2 {
    double xx = 0.0;
    double xy = 0.0;
    double yy = 0.0;

    Vec2 apply(const Vec2& v) const { return {xx * v.x + xy * v.y, xy * v.x + yy * v.y}; }
    Sym2 operator+(const Sym2& o) const { return {xx + o.xx, xy + o.xy, yy + o.yy}; }
    Sym2 operator*(double s) const { return {xx * s, xy * s, yy * s}; }
    double quad(const Vec2& v) const { return xx * v.x * v.x + 2.0 * xy * v.x * v.y + yy * v.y * v.y; }
};

inline Sym2 operator*(double s, const Sym2& m) { return m * s; }

} // namespace fharm
