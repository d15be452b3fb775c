#pragma once

// Exact moment formulas for sampling without replacement from a centered
// population, and a brute-force oracle that averages over ordered draws.

#include "pmart/enumerate.hpp"
#include "pmart/population.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pmart {

namespace detail {

inline void require_centered(const Population& pop, const char* what)
{
    if (!pop.centered())
        throw PreconditionError(std::string(what) + " requires a centered population (M = 0)");
}

inline Rational q(std::size_t v) { return Rational(static_cast<long>(v)); }

} // namespace detail

// Exponent patterns of the joint moments of distinct draws:
// p1111 = E X1X2X3X4, p211 = E X1^2X2X3, p22 = E X1^2X2^2, p31 = E X1^3X2, p4 = E X1^4.
enum class MomentPattern { p1111, p211, p22, p31, p4 };

inline constexpr MomentPattern all_moment_patterns[] = {
    MomentPattern::p1111, MomentPattern::p211, MomentPattern::p22, MomentPattern::p31,
    MomentPattern::p4};

inline std::string to_string(MomentPattern p)
{
    switch (p) {
    case MomentPattern::p1111: return "1111";
    case MomentPattern::p211: return "211";
    case MomentPattern::p22: return "22";
    case MomentPattern::p31: return "31";
    case MomentPattern::p4: return "4";
    }
    return "?";
}

inline std::vector<int> exponents(MomentPattern p)
{
    switch (p) {
    case MomentPattern::p1111: return {1, 1, 1, 1};
    case MomentPattern::p211: return {2, 1, 1};
    case MomentPattern::p22: return {2, 2};
    case MomentPattern::p31: return {3, 1};
    case MomentPattern::p4: return {4};
    }
    return {};
}

inline Rational isserlis_moment(const Population& pop, MomentPattern p)
{
    detail::require_centered(pop, "isserlis_moment");
    const std::size_t n = pop.size();
    const std::size_t draws = exponents(p).size();
    if (n < draws)
        throw DomainError("pattern " + to_string(p) + " needs n >= " + std::to_string(draws));
    const Rational& b = pop.sum_squares();
    const Rational& qq = pop.sum_fourth();
    const Rational nn = detail::q(n);
    switch (p) {
    case MomentPattern::p1111:
        return (3 * b * b - 6 * qq) / (nn * (nn - 1) * (nn - 2) * (nn - 3));
    case MomentPattern::p211:
        return (2 * qq - b * b) / (nn * (nn - 1) * (nn - 2));
    case MomentPattern::p22:
        return (b * b - qq) / (nn * (nn - 1));
    case MomentPattern::p31:
        return -qq / (nn * (nn - 1));
    case MomentPattern::p4:
        return qq / nn;
    }
    return 0;
}

// E S_m^2 = m(n-m)B/(n(n-1)).
inline Rational second_moment_partial_sum(const Population& pop, std::size_t m)
{
    detail::require_centered(pop, "second_moment_partial_sum");
    const std::size_t n = pop.size();
    if (m < 1 || m > n)
        throw DomainError("second_moment_partial_sum: need 1 <= m <= n");
    return detail::q(m) * detail::q(n - m) * pop.sum_squares() / (detail::q(n) * detail::q(n - 1));
}

// E S_m^4 assembled from the five joint moments with multinomial counts.
inline Rational fourth_moment_partial_sum(const Population& pop, std::size_t m)
{
    const std::size_t n = pop.size();
    if (m < 1 || m > n)
        throw DomainError("fourth_moment_partial_sum: need 1 <= m <= n");
    const Rational mm = detail::q(m);
    Rational total = mm * isserlis_moment(pop, MomentPattern::p4);
    if (m >= 2) {
        total += 4 * mm * (mm - 1) * isserlis_moment(pop, MomentPattern::p31);
        total += 3 * mm * (mm - 1) * isserlis_moment(pop, MomentPattern::p22);
    }
    if (m >= 3)
        total += 6 * mm * (mm - 1) * (mm - 2) * isserlis_moment(pop, MomentPattern::p211);
    if (m >= 4)
        total += mm * (mm - 1) * (mm - 2) * (mm - 3) * isserlis_moment(pop, MomentPattern::p1111);
    return total;
}

// E S_m^4 at the midpoint of the bridge of m ones and m minus-ones.
inline Rational bridge_fourth_moment(std::size_t m)
{
    if (m < 1)
        throw DomainError("bridge_fourth_moment needs m >= 1");
    const Rational mm = detail::q(m);
    return (3 * mm * mm * mm * mm - 4 * mm * mm * mm) / (4 * mm * mm - 8 * mm + 3);
}

// E S_m^2 at the bridge midpoint, m^2/(2m-1).
inline Rational bridge_second_moment(std::size_t m)
{
    if (m < 1)
        throw DomainError("bridge_second_moment needs m >= 1");
    const Rational mm = detail::q(m);
    return mm * mm / (2 * mm - 1);
}

// Coefficients c_B(n) = (4n^2-8n+6)/(n(n-1)) and c_Q(n) = (4n^2-2n)/(n(n-1)).
inline Rational mtilde_b2_coefficient(std::size_t n)
{
    const Rational nn = detail::q(n);
    return (4 * nn * nn - 8 * nn + 6) / (nn * (nn - 1));
}

inline Rational mtilde_q_coefficient(std::size_t n)
{
    const Rational nn = detail::q(n);
    return (4 * nn * nn - 2 * nn) / (nn * (nn - 1));
}

// 4 E[Mtilde_{n-2}^2] = c_B(n) B^2 - c_Q(n) Q.
inline Rational mtilde_terminal_second_moment(const Population& pop)
{
    detail::require_centered(pop, "mtilde_terminal_second_moment");
    const std::size_t n = pop.size();
    if (n < 4)
        throw DomainError("mtilde_terminal_second_moment needs n >= 4");
    const Rational& b = pop.sum_squares();
    return mtilde_b2_coefficient(n) * b * b - mtilde_q_coefficient(n) * pop.sum_fourth();
}

/// Second moments of the weighted martingale M_k = W_k + alpha_1(k) S_k/(n-k)
/// with fixed multipliers, including the intermediate expectations.
struct WeightedMoments {
    Rational alpha1, alpha2;
    Rational w_squared;    // E W_k^2
    Rational w_times_s;    // E W_k S_k
    Rational s_squared;    // E S_k^2
    Rational martingale;   // E M_k^2
};

inline WeightedMoments weighted_second_moment(const Population& pop, std::span<const Rational> a,
                                              std::size_t k)
{
    detail::require_centered(pop, "weighted_second_moment");
    const std::size_t n = pop.size();
    if (a.size() != n)
        throw InvalidInput("weights must have length n");
    if (k < 1 || k > n - 1)
        throw DomainError("weighted_second_moment: need 1 <= k <= n-1");
    WeightedMoments r;
    r.alpha1 = 0;
    r.alpha2 = 0;
    for (std::size_t i = 0; i < k; ++i) {
        r.alpha1 += a[i];
        r.alpha2 += a[i] * a[i];
    }
    const Rational& b = pop.sum_squares();
    const Rational nn = detail::q(n);
    const Rational nk = detail::q(n - k);
    r.w_squared = r.alpha2 * b / (nn - 1) - r.alpha1 * r.alpha1 * b / (nn * (nn - 1));
    r.w_times_s = r.alpha1 * nk * b / (nn * (nn - 1));
    r.s_squared = second_moment_partial_sum(pop, k);
    r.martingale = r.alpha2 * b / (nn - 1) + r.alpha1 * r.alpha1 * b / ((nn - 1) * nk);
    return r;
}

namespace oracle {

/// Average of f over all ordered k-tuples of distinct labeled draws.
/// f receives the drawn values in order.
template <typename T, typename F>
T expect_over_draws(const BasicPopulation<T>& pop, std::size_t k, F&& f)
{
    const std::size_t n = pop.size();
    if (k > n)
        throw DomainError("cannot draw more than n values");
    std::vector<T> buf(k);
    std::vector<char> used(n, 0);
    T total = T(0);
    std::uint64_t count = 0;
    std::function<void(std::size_t)> rec = [&](std::size_t depth) {
        if (depth == k) {
            total += f(std::span<const T>(buf));
            ++count;
            return;
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (used[i])
                continue;
            used[i] = 1;
            buf[depth] = pop[i];
            rec(depth + 1);
            used[i] = 0;
        }
    };
    rec(0);
    return total / T(static_cast<long>(count));
}

inline Rational power(const Rational& x, int e)
{
    Rational r = 1;
    for (int i = 0; i < e; ++i)
        r *= x;
    return r;
}

inline Rational joint_moment(const Population& pop, MomentPattern p)
{
    auto ex = exponents(p);
    return expect_over_draws(pop, ex.size(), [&](std::span<const Rational> x) {
        Rational r = 1;
        for (std::size_t i = 0; i < ex.size(); ++i)
            r *= power(x[i], ex[i]);
        return r;
    });
}

inline Rational partial_sum_moment(const Population& pop, std::size_t m, int e)
{
    return expect_over_draws(pop, m, [&](std::span<const Rational> x) {
        Rational s = 0;
        for (const auto& v : x)
            s += v;
        return power(s, e);
    });
}

// 4 E[Mtilde_{n-2}^2] by averaging the square of the n-2 draw value.
inline Rational mtilde_terminal_second_moment(const Population& pop)
{
    const std::size_t n = pop.size();
    const Rational nn = detail::q(n);
    const Rational& b = pop.sum_squares();
    Rational e = expect_over_draws(pop, n - 2, [&](std::span<const Rational> x) {
        Rational s = 0, t = 0;
        for (const auto& v : x) {
            s += v;
            t += v * v;
        }
        Rational mt = ((nn - 1) * s * s - (b - t) * (nn - 2)) / 2;
        return Rational(mt * mt);
    });
    return 4 * e;
}

inline Rational weighted_martingale_second_moment(const Population& pop,
                                                  std::span<const Rational> a, std::size_t k)
{
    const Rational nk = detail::q(pop.size() - k);
    return expect_over_draws(pop, k, [&](std::span<const Rational> x) {
        Rational w = 0, s = 0, alpha = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            w += a[i] * x[i];
            s += x[i];
            alpha += a[i];
        }
        Rational m = w + alpha * s / nk;
        return Rational(m * m);
    });
}

} // namespace oracle

struct MomentReport {
    std::string id;
    Rational formula;
    Rational oracle;
    bool equal() const { return formula == oracle; }
};

/// Formula-versus-oracle table for the moments that apply to `pop`.
inline std::vector<MomentReport> moment_report(const Population& pop)
{
    detail::require_centered(pop, "moment report");
    const std::size_t n = pop.size();
    std::vector<MomentReport> out;
    for (auto p : all_moment_patterns) {
        if (exponents(p).size() > n)
            continue;
        out.push_back({"E[X^" + to_string(p) + "]", isserlis_moment(pop, p),
                       oracle::joint_moment(pop, p)});
    }
    for (std::size_t m = 1; m <= n; ++m)
        out.push_back({"E[S_" + std::to_string(m) + "^2]", second_moment_partial_sum(pop, m),
                       oracle::partial_sum_moment(pop, m, 2)});
    for (std::size_t m = 1; m <= n; ++m)
        out.push_back({"E[S_" + std::to_string(m) + "^4]", fourth_moment_partial_sum(pop, m),
                       oracle::partial_sum_moment(pop, m, 4)});
    if (n >= 4)
        out.push_back({"4E[Mtilde_{n-2}^2]", mtilde_terminal_second_moment(pop),
                       oracle::mtilde_terminal_second_moment(pop)});
    if (std::size_t m = bridge_order(pop); m > 0) {
        out.push_back({"bridge E[S_m^2]", bridge_second_moment(m),
                       oracle::partial_sum_moment(pop, m, 2)});
        out.push_back({"bridge E[S_m^4]", bridge_fourth_moment(m),
                       oracle::partial_sum_moment(pop, m, 4)});
    }
    return out;
}

} // namespace pmart
