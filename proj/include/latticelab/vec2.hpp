// vec2.hpp -- integer lattice sites of Z^2.
#pragma once

#include <cmath>
#include <cstdint>
#include <string>

namespace latticelab {

struct Vec2 {
    std::int64_t x = 0;
    std::int64_t y = 0;

    friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
    friend Vec2 operator*(std::int64_t k, Vec2 a) { return {k * a.x, k * a.y}; }
    friend bool operator==(Vec2 a, Vec2 b) { return a.x == b.x && a.y == b.y; }
    friend bool operator!=(Vec2 a, Vec2 b) { return !(a == b); }
    friend bool operator<(Vec2 a, Vec2 b) { return a.x != b.x ? a.x < b.x : a.y < b.y; }

    bool is_zero() const { return x == 0 && y == 0; }
    std::int64_t norm1() const { return std::llabs(x) + std::llabs(y); }
    std::int64_t norm_inf() const { return std::max(std::llabs(x), std::llabs(y)); }
    double norm() const { return std::sqrt(static_cast<double>(x * x + y * y)); }

    std::string str() const { return "(" + std::to_string(x) + "," + std::to_string(y) + ")"; }
};

} // namespace latticelab
