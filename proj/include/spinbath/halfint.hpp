#pragma once

#include <compare>
#include <string>

namespace spinbath {

/// Exact half-integer, stored as twice its value.
class HalfInt {
public:
    constexpr HalfInt() = default;

    static constexpr HalfInt from_twice(int twice) { return HalfInt(twice); }

    /// Throws std::invalid_argument unless 2*value is an integer (to 1e-9).
    static HalfInt from_double(double value);

    constexpr int twice() const { return twice_; }
    constexpr double value() const { return 0.5 * twice_; }
    constexpr bool is_integer() const { return twice_ % 2 == 0; }

    constexpr HalfInt operator-() const { return HalfInt(-twice_); }
    constexpr HalfInt operator+(HalfInt o) const { return HalfInt(twice_ + o.twice_); }
    constexpr HalfInt operator-(HalfInt o) const { return HalfInt(twice_ - o.twice_); }
    constexpr auto operator<=>(const HalfInt&) const = default;

    std::string str() const;

private:
    explicit constexpr HalfInt(int twice) : twice_(twice) {}
    int twice_ = 0;
};

constexpr HalfInt abs(HalfInt h) { return h.twice() < 0 ? -h : h; }
constexpr HalfInt min(HalfInt a, HalfInt b) { return a < b ? a : b; }

/// True when a-b is an integer.
constexpr bool same_parity(HalfInt a, HalfInt b) { return ((a.twice() - b.twice()) % 2) == 0; }

} // namespace spinbath
