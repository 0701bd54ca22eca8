#pragma once

#include <cmath>

namespace ril {

/// First-order dual number a + b*s with s^2 = 0. The s slot carries the
/// Ricci-flow variation of every quantity it passes through.
struct Dual {
    double re = 0.0;
    double du = 0.0;

    constexpr Dual() = default;
    constexpr Dual(double r) : re(r) {}
    constexpr Dual(double r, double d) : re(r), du(d) {}

    constexpr Dual operator-() const { return {-re, -du}; }
    constexpr Dual operator+(Dual o) const { return {re + o.re, du + o.du}; }
    constexpr Dual operator-(Dual o) const { return {re - o.re, du - o.du}; }
    constexpr Dual operator*(Dual o) const { return {re * o.re, re * o.du + du * o.re}; }
    constexpr Dual operator/(Dual o) const {
        double inv = 1.0 / o.re;
        return {re * inv, (du - re * o.du * inv) * inv};
    }
    constexpr Dual& operator+=(Dual o) { re += o.re; du += o.du; return *this; }
    constexpr Dual& operator-=(Dual o) { re -= o.re; du -= o.du; return *this; }
    constexpr Dual& operator*=(Dual o) { *this = *this * o; return *this; }
    constexpr bool operator==(const Dual&) const = default;
};

constexpr Dual operator*(double a, Dual b) { return {a * b.re, a * b.du}; }
constexpr Dual operator*(Dual a, double b) { return {a.re * b, a.du * b}; }
constexpr Dual operator+(double a, Dual b) { return {a + b.re, b.du}; }
constexpr Dual operator-(double a, Dual b) { return {a - b.re, -b.du}; }

}  // namespace ril
