#pragma once

#include <gmpxx.h>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>

namespace pmart {

// Error taxonomy shared by every module.
struct InvalidInput : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// An index or size outside the range where a formula is defined.
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// A structural requirement on the population (e.g. centering) is not met.
struct PreconditionError : std::logic_error {
    using std::logic_error::logic_error;
};

// Exhaustive enumeration refused because n exceeds the configured cutoff.
struct CutoffExceeded : std::length_error {
    using std::length_error::length_error;
};

using Rational = mpq_class;

enum class Arithmetic { exact, floating };

template <typename T>
struct ScalarTraits;

template <>
struct ScalarTraits<Rational> {
    static constexpr bool exact = true;
    static constexpr Arithmetic mode = Arithmetic::exact;

    static std::string to_string(const Rational& x) { return x.get_str(); }
    static Rational from_rational(const Rational& x) { return x; }
};

template <>
struct ScalarTraits<double> {
    static constexpr bool exact = false;
    static constexpr Arithmetic mode = Arithmetic::floating;

    // Shortest decimal that round-trips.
    static std::string to_string(double x)
    {
        char buf[64];
        auto res = std::to_chars(buf, buf + sizeof(buf), x);
        return std::string(buf, res.ptr);
    }
    static double from_rational(const Rational& x) { return x.get_d(); }
};

template <typename T>
std::string to_string(const T& x)
{
    return ScalarTraits<T>::to_string(x);
}

namespace detail {

inline std::string_view trim(std::string_view s)
{
    const auto* ws = " \t\r\n\f\v";
    auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos)
        return {};
    auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

inline bool is_integer_literal(std::string_view s)
{
    if (!s.empty() && (s.front() == '+' || s.front() == '-'))
        s.remove_prefix(1);
    if (s.empty())
        return false;
    for (char c : s)
        if (c < '0' || c > '9')
            return false;
    return true;
}

} // namespace detail

// Accepts "p", "p/q" with integer p and nonzero integer q. Decimal and
// exponent forms are rejected.
inline Rational parse_rational(std::string_view text)
{
    auto s = detail::trim(text);
    auto slash = s.find('/');
    auto num = s.substr(0, slash);
    auto den = slash == std::string_view::npos ? std::string_view{"1"} : s.substr(slash + 1);
    if (!detail::is_integer_literal(num) || !detail::is_integer_literal(den))
        throw InvalidInput("not an exact rational: '" + std::string(s) + "'");
    auto strip_plus = [](std::string_view v) {
        return std::string(!v.empty() && v.front() == '+' ? v.substr(1) : v);
    };
    mpz_class p(strip_plus(num), 10);
    mpz_class q(strip_plus(den), 10);
    if (q == 0)
        throw InvalidInput("zero denominator: '" + std::string(s) + "'");
    Rational r(p, q);
    r.canonicalize();
    return r;
}

// Floating mode accepts everything parse_rational does plus decimal literals.
inline double parse_double(std::string_view text)
{
    auto s = detail::trim(text);
    if (s.find('/') != std::string_view::npos)
        return parse_rational(s).get_d();
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size() || !std::isfinite(v))
        throw InvalidInput("not a number: '" + std::string(s) + "'");
    return v;
}

template <typename T>
T parse_scalar(std::string_view text)
{
    if constexpr (std::is_same_v<T, Rational>)
        return parse_rational(text);
    else
        return parse_double(text);
}

} // namespace pmart
