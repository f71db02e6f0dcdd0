#include "role/analytics/rational.hpp"

#include <stdexcept>

namespace role::analytics {

namespace {

using wide = __int128;

std::int64_t narrow(wide v) {
    if (v > INT64_MAX || v < INT64_MIN) throw std::overflow_error("rational overflow");
    return static_cast<std::int64_t>(v);
}

}  // namespace

Rational::Rational(std::int64_t num, std::int64_t den) {
    if (den == 0) throw std::domain_error("zero denominator");
    if (den < 0) {
        num = -num;
        den = -den;
    }
    const auto g = std::gcd(num, den);
    num_ = g ? num / g : 0;
    den_ = g ? den / g : 1;
}

Rational& Rational::operator+=(const Rational& o) {
    const auto g = std::gcd(den_, o.den_);
    const wide num = static_cast<wide>(num_) * (o.den_ / g) + static_cast<wide>(o.num_) * (den_ / g);
    const wide den = static_cast<wide>(den_) * (o.den_ / g);
    const wide r = [&] {
        wide a = num < 0 ? -num : num, b = den;
        while (b) {
            wide t = a % b;
            a = b;
            b = t;
        }
        return a;
    }();
    *this = r ? Rational(narrow(num / r), narrow(den / r)) : Rational(0, 1);
    return *this;
}

Rational operator/(const Rational& a, const Rational& b) {
    if (b.num_ == 0) throw std::domain_error("division by zero");
    const auto g1 = std::gcd(a.num_, b.num_);
    const auto g2 = std::gcd(a.den_, b.den_);
    const wide num = static_cast<wide>(a.num_ / (g1 ? g1 : 1)) * (b.den_ / g2);
    const wide den = static_cast<wide>(a.den_ / g2) * (b.num_ / (g1 ? g1 : 1));
    return Rational(narrow(num), narrow(den));
}

std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    const wide l = static_cast<wide>(a.num_) * b.den_;
    const wide r = static_cast<wide>(b.num_) * a.den_;
    return l < r ? std::strong_ordering::less : l > r ? std::strong_ordering::greater : std::strong_ordering::equal;
}

std::string Rational::str() const { return std::to_string(num_) + "/" + std::to_string(den_); }

std::optional<std::int64_t> percent_tenths(std::int64_t num, std::int64_t den) {
    if (den == 0) return std::nullopt;
    return percent_tenths(Rational(num), Rational(den));
}

std::optional<std::int64_t> percent_tenths(const Rational& part, const Rational& whole) {
    if (whole.is_zero()) return std::nullopt;
    const Rational ratio = part / whole;
    return tenths_half_up(Rational(ratio.num() * 100, ratio.den()));
}

std::int64_t tenths_half_up(const Rational& value) {
    // floor((2 * 10 * num + den) / (2 * den)) for non-negative values
    const wide n = static_cast<wide>(value.num()) * 20 + value.den();
    const wide d = static_cast<wide>(value.den()) * 2;
    wide q = n / d;
    if (n % d != 0 && ((n < 0) != (d < 0))) --q;
    return narrow(q);
}

}  // namespace role::analytics
