#pragma once

#include <compare>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>

namespace role::analytics {

// Exact non-negative fraction used for tallies and percentages.
class Rational {
public:
    constexpr Rational() = default;
    Rational(std::int64_t num, std::int64_t den = 1);

    std::int64_t num() const noexcept { return num_; }
    std::int64_t den() const noexcept { return den_; }

    Rational& operator+=(const Rational& o);
    friend Rational operator+(Rational a, const Rational& b) { return a += b; }
    friend Rational operator/(const Rational& a, const Rational& b);
    friend bool operator==(const Rational&, const Rational&) = default;
    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b);

    bool is_zero() const noexcept { return num_ == 0; }
    std::string str() const;  // "num/den"

private:
    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

// Tenths of a percent of num/den, rounded half-up; nullopt if den == 0.
std::optional<std::int64_t> percent_tenths(std::int64_t num, std::int64_t den);
std::optional<std::int64_t> percent_tenths(const Rational& part, const Rational& whole);

// value rounded half-up to one decimal, in tenths.
std::int64_t tenths_half_up(const Rational& value);

}  // namespace role::analytics
