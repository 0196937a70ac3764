#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace kslab {

// Exact fraction over int64. Admissibility windows in the exponent calculus are
// half-open with rational endpoints; deciding membership at the endpoints needs
// exact arithmetic, not epsilon-padded doubles. Intermediates run through
// __int128, and anything that would overflow int64 throws range_violation
// (inputs here are user-scale exponents, so that is a bug trap, not a limit
// that real scenarios hit).
class Rational {
  public:
    constexpr Rational() = default;
    Rational(long long value);               // NOLINT: implicit by design
    Rational(long long num, long long den);  // reduces, den > 0 after

    // Exact binary expansion of a finite double.
    static Rational from_double(double x);

    // Accepts "3", "-7/2", "0.25", "2.5e-1". Decimal text converts exactly.
    static std::optional<Rational> parse(std::string_view text);

    long long num() const noexcept { return num_; }
    long long den() const noexcept { return den_; }
    double value() const noexcept { return static_cast<double>(num_) / static_cast<double>(den_); }
    bool is_integer() const noexcept { return den_ == 1; }
    bool positive() const noexcept { return num_ > 0; }
    bool negative() const noexcept { return num_ < 0; }
    bool zero() const noexcept { return num_ == 0; }

    std::string str() const;  // "n" or "n/d"

    Rational operator-() const;
    friend Rational operator+(const Rational& a, const Rational& b);
    friend Rational operator-(const Rational& a, const Rational& b);
    friend Rational operator*(const Rational& a, const Rational& b);
    friend Rational operator/(const Rational& a, const Rational& b);  // throws on b == 0

    friend bool operator==(const Rational& a, const Rational& b) noexcept;
    friend bool operator!=(const Rational& a, const Rational& b) noexcept;
    friend bool operator<(const Rational& a, const Rational& b) noexcept;
    friend bool operator<=(const Rational& a, const Rational& b) noexcept;
    friend bool operator>(const Rational& a, const Rational& b) noexcept;
    friend bool operator>=(const Rational& a, const Rational& b) noexcept;

  private:
    long long num_ = 0;
    long long den_ = 1;
};

inline Rational max(const Rational& a, const Rational& b) { return a < b ? b : a; }
inline Rational min(const Rational& a, const Rational& b) { return b < a ? b : a; }

} // namespace kslab
