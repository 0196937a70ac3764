#include "kslab/rational.hpp"

#include <cctype>
#include <cmath>
#include <numeric>

#include "kslab/errors.hpp"

namespace kslab {

namespace {

using i128 = __int128;

long long narrow(i128 v, const char* what) {
    if (v > i128(INT64_MAX) || v < i128(INT64_MIN))
        fail(errc::range_violation, std::string("rational overflow in ") + what);
    return static_cast<long long>(v);
}

i128 gcd128(i128 a, i128 b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
        i128 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

} // namespace

Rational::Rational(long long value) : num_(value), den_(1) {}

Rational::Rational(long long num, long long den) {
    if (den == 0) fail(errc::degenerate_denominator, "rational with zero denominator");
    if (den < 0) {
        num = narrow(-i128(num), "sign flip");
        den = narrow(-i128(den), "sign flip");
    }
    long long g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
        num /= g;
        den /= g;
    }
    num_ = num;
    den_ = den;
}

Rational Rational::from_double(double x) {
    if (!std::isfinite(x)) fail(errc::range_violation, "non-finite value has no rational form");
    if (x == 0.0) return Rational(0);
    int exp = 0;
    double mant = std::frexp(x, &exp);  // x = mant * 2^exp, |mant| in [0.5, 1)
    long long num = static_cast<long long>(std::ldexp(mant, 53));
    int e2 = exp - 53;
    while (num != 0 && (num % 2) == 0 && e2 < 0) {
        num /= 2;
        ++e2;
    }
    if (e2 >= 0) {
        if (e2 > 62) fail(errc::range_violation, "double too large for int64 rational");
        i128 scaled = i128(num) << e2;
        return Rational(narrow(scaled, "from_double"));
    }
    if (-e2 > 62) fail(errc::range_violation, "double too small for int64 rational");
    return Rational(num, 1LL << -e2);
}

std::optional<Rational> Rational::parse(std::string_view text) {
    auto trim = [](std::string_view s) {
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
        return s;
    };
    text = trim(text);
    if (text.empty()) return std::nullopt;

    auto slash = text.find('/');
    if (slash != std::string_view::npos) {
        auto lhs = parse(text.substr(0, slash));
        auto rhs = parse(text.substr(slash + 1));
        if (!lhs || !rhs || rhs->zero()) return std::nullopt;
        return *lhs / *rhs;
    }

    bool neg = false;
    size_t i = 0;
    if (i < text.size() && (text[i] == '+' || text[i] == '-')) {
        neg = text[i] == '-';
        ++i;
    }

    i128 mantissa = 0;
    long long frac_digits = 0;
    bool seen_digit = false, seen_dot = false;
    for (; i < text.size(); ++i) {
        char c = text[i];
        if (c >= '0' && c <= '9') {
            mantissa = mantissa * 10 + (c - '0');
            if (mantissa > (i128(INT64_MAX) << 10)) return std::nullopt;
            if (seen_dot) ++frac_digits;
            seen_digit = true;
        } else if (c == '.' && !seen_dot) {
            seen_dot = true;
        } else if ((c == 'e' || c == 'E') && seen_digit) {
            break;
        } else {
            return std::nullopt;
        }
    }
    if (!seen_digit) return std::nullopt;

    long long exp10 = 0;
    if (i < text.size()) {  // exponent part
        ++i;
        bool eneg = false;
        if (i < text.size() && (text[i] == '+' || text[i] == '-')) {
            eneg = text[i] == '-';
            ++i;
        }
        if (i >= text.size()) return std::nullopt;
        for (; i < text.size(); ++i) {
            char c = text[i];
            if (c < '0' || c > '9') return std::nullopt;
            exp10 = exp10 * 10 + (c - '0');
            if (exp10 > 40) return std::nullopt;
        }
        if (eneg) exp10 = -exp10;
    }

    i128 num = neg ? -mantissa : mantissa;
    i128 den = 1;
    long long net = exp10 - frac_digits;
    for (long long k = 0; k < (net < 0 ? -net : net); ++k) {
        if (net > 0)
            num *= 10;
        else
            den *= 10;
        if (num > i128(INT64_MAX) || num < i128(INT64_MIN) || den > i128(INT64_MAX))
            return std::nullopt;
    }
    i128 g = gcd128(num, den);
    if (g > 1) {
        num /= g;
        den /= g;
    }
    if (num > i128(INT64_MAX) || num < i128(INT64_MIN) || den > i128(INT64_MAX)) return std::nullopt;
    return Rational(static_cast<long long>(num), static_cast<long long>(den));
}

std::string Rational::str() const {
    if (den_ == 1) return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
}

Rational Rational::operator-() const { return Rational(narrow(-i128(num_), "negate"), den_); }

Rational operator+(const Rational& a, const Rational& b) {
    i128 num = i128(a.num_) * b.den_ + i128(b.num_) * a.den_;
    i128 den = i128(a.den_) * b.den_;
    i128 g = gcd128(num, den);
    if (g > 1) {
        num /= g;
        den /= g;
    }
    return Rational(narrow(num, "add"), narrow(den, "add"));
}

Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }

Rational operator*(const Rational& a, const Rational& b) {
    i128 num = i128(a.num_) * b.num_;
    i128 den = i128(a.den_) * b.den_;
    i128 g = gcd128(num, den);
    if (g > 1) {
        num /= g;
        den /= g;
    }
    return Rational(narrow(num, "mul"), narrow(den, "mul"));
}

Rational operator/(const Rational& a, const Rational& b) {
    if (b.zero()) fail(errc::degenerate_denominator, "rational division by zero");
    i128 num = i128(a.num_) * b.den_;
    i128 den = i128(a.den_) * b.num_;
    if (den < 0) {
        num = -num;
        den = -den;
    }
    i128 g = gcd128(num, den);
    if (g > 1) {
        num /= g;
        den /= g;
    }
    return Rational(narrow(num, "div"), narrow(den, "div"));
}

bool operator==(const Rational& a, const Rational& b) noexcept {
    return a.num_ == b.num_ && a.den_ == b.den_;
}
bool operator!=(const Rational& a, const Rational& b) noexcept { return !(a == b); }
bool operator<(const Rational& a, const Rational& b) noexcept {
    return i128(a.num_) * b.den_ < i128(b.num_) * a.den_;
}
bool operator<=(const Rational& a, const Rational& b) noexcept { return !(b < a); }
bool operator>(const Rational& a, const Rational& b) noexcept { return b < a; }
bool operator>=(const Rational& a, const Rational& b) noexcept { return !(a < b); }

const char* errc_name(errc c) noexcept {
    switch (c) {
        case errc::degenerate_denominator: return "DegenerateDenominator";
        case errc::nonpositive_denominator: return "NonpositiveDenominator";
        case errc::range_violation: return "RangeViolation";
        case errc::inadmissible_params: return "InadmissibleParams";
        case errc::shape_mismatch: return "ShapeMismatch";
        case errc::nonzero_boundary_flux: return "NonzeroBoundaryFlux";
        case errc::linear_solve_failure: return "LinearSolveFailure";
        case errc::positivity_violation: return "PositivityViolation";
        case errc::non_finite_state: return "NonFiniteState";
        case errc::wrong_verdict: return "WrongVerdict";
        case errc::not_cauchy: return "NotCauchy";
        case errc::empty_annulus: return "EmptyAnnulus";
        case errc::nonpositive_profile: return "NonpositiveProfile";
        case errc::parse_error: return "ParseError";
        case errc::validation_error: return "ValidationError";
    }
    return "UnknownError";
}

} // namespace kslab
