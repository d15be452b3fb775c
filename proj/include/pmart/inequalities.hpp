#pragma once

#include "pmart/enumerate.hpp"
#include "pmart/population.hpp"

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pmart {

enum class InequalityId {
    max_averages,    // E max_k (S_k/k)^2 <= 4B/n
    garsia,          // E max_k S_k^2 <= (41/5) B
    quadratic,       // E max_{2<=k<=n} |(S_k^2 - (n-k)/(n-1) T_k)/(k(k-1))|^2 <= 4(B^2-Q)/(n-1)^2
    bridge,          // E max_{k<2m} |S_k^2 - k(2m-k)/(2m-1)|^2 <= 128 m^2
    alternating,     // E max_k |sum (-1)^i X_i|^2 <= (17 + 16/17) B
    vna_weighted,    // E max_k W_k^2 <= 16/(n-1) (1 + 2 V_n(a)) alpha_2(n) B
    garsia_weighted, // E max_k W_k^2 <= (80 + 4/205) alpha_2(n) B/(n-1)
    hardy,           // max_sigma sum_k (S_k/k)^2 <= 4B
};

inline constexpr InequalityId all_inequalities[] = {
    InequalityId::max_averages, InequalityId::garsia,       InequalityId::quadratic,
    InequalityId::bridge,       InequalityId::alternating,  InequalityId::vna_weighted,
    InequalityId::garsia_weighted, InequalityId::hardy};

inline std::string to_string(InequalityId id)
{
    switch (id) {
    case InequalityId::max_averages: return "max-averages";
    case InequalityId::garsia: return "garsia";
    case InequalityId::quadratic: return "quadratic";
    case InequalityId::bridge: return "bridge";
    case InequalityId::alternating: return "alternating";
    case InequalityId::vna_weighted: return "vna-weighted";
    case InequalityId::garsia_weighted: return "garsia-weighted";
    case InequalityId::hardy: return "hardy";
    }
    return "?";
}

inline InequalityId parse_inequality_id(std::string_view s)
{
    for (auto id : all_inequalities)
        if (s == to_string(id))
            return id;
    throw InvalidInput("unknown inequality id '" + std::string(s) + "'");
}

inline bool uses_weights(InequalityId id)
{
    return id == InequalityId::vna_weighted || id == InequalityId::garsia_weighted;
}

struct InequalityParams {
    std::optional<std::vector<Rational>> weights; // vna-weighted, garsia-weighted
    std::optional<std::size_t> bridge_m;          // bridge
    // Multiplies the right-hand side. Anything but 1 is a deliberately
    // corrupted bound, used to test that the harness can detect violations.
    Rational rhs_scale = 1;
};

// alpha_1(k) = a_1 + ... + a_k, alpha_2(k) = a_1^2 + ... + a_k^2.
template <typename T>
T alpha1(std::span<const T> a, std::size_t k)
{
    T s = T(0);
    for (std::size_t i = 0; i < k; ++i)
        s += a[i];
    return s;
}

template <typename T>
T alpha2(std::span<const T> a, std::size_t k)
{
    T s = T(0);
    for (std::size_t i = 0; i < k; ++i)
        s += a[i] * a[i];
    return s;
}

// V_n(a) = max_{1<=k<=n-1} alpha_1(k)^2 / alpha_2(n).
template <typename T>
T vna(std::span<const T> a)
{
    const std::size_t n = a.size();
    if (n < 2)
        throw DomainError("V_n(a) needs at least 2 weights");
    T a2 = alpha2(a, n);
    if (a2 == 0)
        throw DomainError("V_n(a) is undefined for all-zero weights");
    T best = T(0), run = T(0);
    for (std::size_t k = 1; k <= n - 1; ++k) {
        run += a[k - 1];
        T sq = run * run;
        if (sq > best)
            best = sq;
    }
    return best / a2;
}

inline std::vector<Rational> alternating_weights(std::size_t n)
{
    std::vector<Rational> a(n);
    for (std::size_t i = 0; i < n; ++i)
        a[i] = (i % 2 == 0) ? -1 : 1; // (-1)^i for i = 1..n
    return a;
}

template <typename T>
std::vector<T> convert_weights(const std::vector<Rational>& a)
{
    std::vector<T> out;
    out.reserve(a.size());
    for (const auto& x : a)
        out.push_back(ScalarTraits<T>::from_rational(x));
    return out;
}

/// Per-path statistic of one inequality. term(k, S_k, T_k, W_k) is combined
/// over k in [k_lo, k_hi] by max, or by sum for Hardy.
template <typename T>
class PathStatistic {
public:
    PathStatistic(InequalityId id, const BasicPopulation<T>& pop, const InequalityParams& params)
        : id_(id), n_(pop.size())
    {
        validate(id, pop, params);
        k_lo_ = 1;
        k_hi_ = n_;
        coef_a_.assign(n_ + 1, T(0));
        coef_b_.assign(n_ + 1, T(0));
        const T nn = T(static_cast<long>(n_));
        switch (id_) {
        case InequalityId::max_averages:
        case InequalityId::hardy:
            for (std::size_t k = 1; k <= n_; ++k)
                coef_a_[k] = T(1) / T(static_cast<long>(k * k));
            break;
        case InequalityId::quadratic:
            k_lo_ = 2;
            for (std::size_t k = 2; k <= n_; ++k) {
                T kk1 = T(static_cast<long>(k * (k - 1)));
                coef_a_[k] = T(1) / kk1;
                coef_b_[k] = -T(static_cast<long>(n_ - k)) / ((nn - 1) * kk1);
            }
            break;
        case InequalityId::bridge: {
            k_hi_ = n_ - 1;
            const long two_m = static_cast<long>(n_);
            for (std::size_t k = 1; k < n_; ++k) {
                long kk = static_cast<long>(k);
                coef_a_[k] = T(kk * (two_m - kk)) / T(two_m - 1);
            }
            break;
        }
        case InequalityId::alternating:
            weights_ = convert_weights<T>(alternating_weights(n_));
            break;
        case InequalityId::vna_weighted:
        case InequalityId::garsia_weighted:
            weights_ = convert_weights<T>(*params.weights);
            break;
        case InequalityId::garsia:
            break;
        }
    }

    static void validate(InequalityId id, const BasicPopulation<T>& pop,
                         const InequalityParams& params)
    {
        const std::size_t n = pop.size();
        if (id != InequalityId::hardy && !pop.centered())
            throw PreconditionError(to_string(id) + " requires a centered population (M = 0)");
        if (uses_weights(id)) {
            if (!params.weights)
                throw InvalidInput(to_string(id) + " needs weights");
            if (params.weights->size() != n)
                throw InvalidInput("weights have length " + std::to_string(params.weights->size()) +
                                   ", population has " + std::to_string(n));
        } else if (params.weights) {
            throw InvalidInput(to_string(id) + " does not take weights");
        }
        if (id == InequalityId::bridge) {
            std::size_t m = bridge_order(pop);
            if (m == 0)
                throw InvalidInput("bridge inequality needs m ones and m minus-ones");
            if (params.bridge_m && *params.bridge_m != m)
                throw InvalidInput("bridge m = " + std::to_string(*params.bridge_m) +
                                   " does not match a population of size " + std::to_string(n));
        } else if (params.bridge_m) {
            throw InvalidInput(to_string(id) + " does not take a bridge m");
        }
    }

    InequalityId id() const { return id_; }
    std::size_t n() const { return n_; }
    std::size_t k_lo() const { return k_lo_; }
    std::size_t k_hi() const { return k_hi_; }
    bool summed() const { return id_ == InequalityId::hardy; }
    bool weighted() const { return !weights_.empty(); }
    const T& weight(std::size_t i) const { return weights_[i - 1]; } // 1-based

    T term(std::size_t k, const T& s, const T& t, const T& w) const
    {
        switch (id_) {
        case InequalityId::max_averages:
        case InequalityId::hardy:
            return coef_a_[k] * s * s;
        case InequalityId::garsia:
            return s * s;
        case InequalityId::quadratic: {
            T u = coef_a_[k] * s * s + coef_b_[k] * t;
            return u * u;
        }
        case InequalityId::bridge: {
            T u = s * s - coef_a_[k];
            return u * u;
        }
        case InequalityId::alternating:
        case InequalityId::vna_weighted:
        case InequalityId::garsia_weighted:
            return w * w;
        }
        return T(0);
    }

    T combine(const T& acc, const T& t) const
    {
        if (summed())
            return acc + t;
        return t > acc ? t : acc;
    }

    // Statistic of one full ordering.
    T evaluate(const BasicPopulation<T>& pop, const Permutation& perm) const
    {
        T s = T(0), t = T(0), w = T(0), acc = T(0);
        for (std::size_t k = 1; k <= n_; ++k) {
            const T& x = pop[perm[k - 1]];
            s += x;
            t += x * x;
            if (weighted())
                w += weight(k) * x;
            if (k < k_lo_ || k > k_hi_)
                continue;
            T v = term(k, s, t, w);
            acc = k == k_lo_ ? v : combine(acc, v);
        }
        return acc;
    }

private:
    InequalityId id_;
    std::size_t n_;
    std::size_t k_lo_ = 1, k_hi_ = 1;
    std::vector<T> coef_a_, coef_b_;
    std::vector<T> weights_;
};

template <typename T>
T lhs_statistic(InequalityId id, const BasicPopulation<T>& pop, const Permutation& perm,
                const InequalityParams& params = {})
{
    validate_permutation(perm, pop.size());
    return PathStatistic<T>(id, pop, params).evaluate(pop, perm);
}

template <typename T>
T rhs_value(InequalityId id, const BasicPopulation<T>& pop, const InequalityParams& params = {})
{
    PathStatistic<T>::validate(id, pop, params);
    const std::size_t n = pop.size();
    const T nn = T(static_cast<long>(n));
    const T& b = pop.sum_squares();
    T r = T(0);
    switch (id) {
    case InequalityId::max_averages:
        r = T(4) * b / nn;
        break;
    case InequalityId::garsia:
        r = T(41) / T(5) * b;
        break;
    case InequalityId::quadratic:
        r = T(4) / ((nn - 1) * (nn - 1)) * (b * b - pop.sum_fourth());
        break;
    case InequalityId::bridge: {
        T m = T(static_cast<long>(n / 2));
        r = T(128) * m * m;
        break;
    }
    case InequalityId::alternating:
        r = T(305) / T(17) * b;
        break;
    case InequalityId::vna_weighted: {
        auto a = convert_weights<T>(*params.weights);
        std::span<const T> as(a);
        r = T(16) / (nn - 1) * (T(1) + T(2) * vna(as)) * alpha2(as, n) * b;
        break;
    }
    case InequalityId::garsia_weighted: {
        auto a = convert_weights<T>(*params.weights);
        r = T(16404) / T(205) * alpha2(std::span<const T>(a), n) * b / (nn - 1);
        break;
    }
    case InequalityId::hardy:
        r = T(4) * b;
        break;
    }
    return r * ScalarTraits<T>::from_rational(params.rhs_scale);
}

// ---- folding constants ---------------------------------------------------

enum class FoldingPath { garsia, alternating, garsia_weighted };

// garsia:          4 (m/(n-m) + (n-m)/m)
// alternating:     16n/(n-1) + 18/n   (m is not used)
// garsia_weighted: 16 (2 + m/(n-m) + (n-m)/m + m^2/(n(n-m)) + (n-m)^2/(nm))
inline Rational folding_constant(FoldingPath path, std::size_t n, std::size_t m)
{
    const Rational nn = static_cast<long>(n);
    if (path == FoldingPath::alternating) {
        if (n < 2)
            throw DomainError("alternating constant needs n >= 2");
        return 16 * nn / (nn - 1) + Rational(18) / nn;
    }
    if (m < 1 || m >= n)
        throw DomainError("folding constant needs 1 <= m < n");
    const Rational mm = static_cast<long>(m);
    const Rational r = nn - mm;
    if (path == FoldingPath::garsia)
        return 4 * (mm / r + r / mm);
    return 16 * (2 + mm / r + r / mm + mm * mm / (nn * r) + r * r / (nn * mm));
}

// ---- verification --------------------------------------------------------

enum class VerifyMode { exact, monte_carlo };

inline std::string to_string(VerifyMode m)
{
    return m == VerifyMode::exact ? "exact" : "mc";
}

struct MonteCarloConfig {
    std::uint64_t samples = 0;
    std::uint64_t seed = 0;
    unsigned workers = 0;
    std::uint64_t chunk = 1u << 16; // samples per independent seed stream
};

struct InequalityReport {
    InequalityId id{};
    VerifyMode mode = VerifyMode::exact;
    std::size_t n = 0;
    std::string lhs; // exact "p/q" or shortest round-trip decimal
    std::string rhs;
    double lhs_value = 0.0;
    double rhs_value = 0.0;
    std::optional<Rational> lhs_exact;
    std::optional<Rational> rhs_exact;
    std::optional<double> standard_error;
    bool holds = false;
    // exact: "holds" | "fails"; mc: "consistent" | "violation-suspected"
    std::string status;
    std::uint64_t permutations = 0; // orderings enumerated (exact)
    std::uint64_t samples = 0;      // orderings sampled (mc)
    std::optional<std::uint64_t> seed;
    InequalityParams params;
};

namespace detail {

template <typename T>
struct EnumerationTotals {
    T sum = T(0);
    T max = T(0);
    std::uint64_t count = 0;
};

template <typename T>
struct StatisticWalker {
    const PathStatistic<T>& st;
    const BasicPopulation<T>& pop;
    std::vector<T> s, t, w, acc;
    std::vector<char> used;
    EnumerationTotals<T> totals;

    StatisticWalker(const PathStatistic<T>& st_, const BasicPopulation<T>& pop_)
        : st(st_), pop(pop_), s(pop_.size() + 1, T(0)), t(pop_.size() + 1, T(0)),
          w(pop_.size() + 1, T(0)), acc(pop_.size() + 1, T(0)), used(pop_.size(), 0)
    {
    }

    void step(std::size_t depth, std::size_t idx)
    {
        const T& x = pop[idx];
        const std::size_t k = depth + 1;
        s[k] = s[depth] + x;
        t[k] = t[depth] + x * x;
        if (st.weighted())
            w[k] = w[depth] + st.weight(k) * x;
        if (k < st.k_lo() || k > st.k_hi()) {
            acc[k] = acc[depth];
        } else {
            T v = st.term(k, s[k], t[k], w[k]);
            acc[k] = k == st.k_lo() ? v : st.combine(acc[depth], v);
        }
    }

    void visit(std::size_t depth)
    {
        const std::size_t n = pop.size();
        if (depth == n) {
            const T& v = acc[n];
            if (totals.count == 0 || v > totals.max)
                totals.max = v;
            totals.sum += v;
            ++totals.count;
            return;
        }
        for (std::size_t idx = 0; idx < n; ++idx) {
            if (used[idx])
                continue;
            used[idx] = 1;
            step(depth, idx);
            visit(depth + 1);
            used[idx] = 0;
        }
    }
};

} // namespace detail

/// Average (max for Hardy) of the statistic over all n! orderings.
template <typename T>
detail::EnumerationTotals<T> enumerate_statistic(const PathStatistic<T>& st,
                                                 const BasicPopulation<T>& pop,
                                                 const EnumerationConfig& cfg = {})
{
    require_enumerable(pop.size(), cfg);
    auto blocks = run_blocks(pop.size(), cfg.workers, [&](std::size_t first) {
        detail::StatisticWalker<T> walker(st, pop);
        walker.used[first] = 1;
        walker.step(0, first);
        walker.visit(1);
        return walker.totals;
    });
    detail::EnumerationTotals<T> out;
    for (const auto& b : blocks) {
        if (out.count == 0 || b.max > out.max)
            out.max = b.max;
        out.sum += b.sum;
        out.count += b.count;
    }
    return out;
}

inline InequalityReport verify_exact(InequalityId id, const Population& pop,
                                     const InequalityParams& params = {},
                                     const EnumerationConfig& cfg = {})
{
    PathStatistic<Rational> st(id, pop, params);
    require_enumerable(pop.size(), cfg);
    auto totals = enumerate_statistic(st, pop, cfg);
    InequalityReport r;
    r.id = id;
    r.mode = VerifyMode::exact;
    r.n = pop.size();
    r.params = params;
    r.permutations = totals.count;
    Rational lhs = st.summed() ? totals.max : Rational(totals.sum / Rational(static_cast<long>(totals.count)));
    Rational rhs = rhs_value(id, pop, params);
    r.holds = lhs <= rhs;
    r.status = r.holds ? "holds" : "fails";
    r.lhs = to_string(lhs);
    r.rhs = to_string(rhs);
    r.lhs_value = lhs.get_d();
    r.rhs_value = rhs.get_d();
    r.lhs_exact = lhs;
    r.rhs_exact = rhs;
    return r;
}

namespace detail {

struct ChunkMoments {
    std::uint64_t count = 0;
    double mean = 0.0;
    double m2 = 0.0; // sum of squared deviations
    double max = -INFINITY;
};

inline void merge(ChunkMoments& a, const ChunkMoments& b)
{
    if (b.count == 0)
        return;
    if (a.count == 0) {
        a = b;
        return;
    }
    const double na = static_cast<double>(a.count), nb = static_cast<double>(b.count);
    const double delta = b.mean - a.mean;
    const double n = na + nb;
    a.mean += delta * nb / n;
    a.m2 += b.m2 + delta * delta * na * nb / n;
    a.count += b.count;
    a.max = std::max(a.max, b.max);
}

} // namespace detail

/// Seeded Monte Carlo estimate of the left-hand side. Samples are split into
/// fixed-size chunks, each with its own stream derived from the master seed,
/// and merged in chunk order: the result does not depend on the worker count.
template <typename T>
InequalityReport verify_monte_carlo(InequalityId id, const BasicPopulation<T>& pop,
                                    const InequalityParams& params, const MonteCarloConfig& mc)
{
    if (mc.samples == 0)
        throw InvalidInput("Monte Carlo mode needs a positive sample count");
    if (mc.chunk == 0)
        throw InvalidInput("Monte Carlo chunk size must be positive");
    const FloatPopulation fpop = [&] {
        if constexpr (std::is_same_v<T, Rational>)
            return to_float(pop);
        else
            return pop;
    }();
    PathStatistic<double> st(id, fpop, params);
    const std::size_t n = fpop.size();
    const std::uint64_t chunks = (mc.samples + mc.chunk - 1) / mc.chunk;
    auto parts = run_blocks(chunks, mc.workers, [&](std::size_t c) {
        Rng rng = seed_stream(mc.seed, c);
        std::uint64_t begin = c * mc.chunk;
        std::uint64_t end = std::min<std::uint64_t>(mc.samples, begin + mc.chunk);
        detail::ChunkMoments cm;
        Permutation perm(n);
        for (std::uint64_t i = begin; i < end; ++i) {
            std::iota(perm.begin(), perm.end(), std::size_t{0});
            shuffle_in_place(perm, rng);
            double v = st.evaluate(fpop, perm);
            ++cm.count;
            double delta = v - cm.mean;
            cm.mean += delta / static_cast<double>(cm.count);
            cm.m2 += delta * (v - cm.mean);
            cm.max = std::max(cm.max, v);
        }
        return cm;
    });
    detail::ChunkMoments all;
    for (const auto& p : parts)
        detail::merge(all, p);

    InequalityReport r;
    r.id = id;
    r.mode = VerifyMode::monte_carlo;
    r.n = n;
    r.params = params;
    r.samples = all.count;
    r.seed = mc.seed;
    T rhs = rhs_value(id, pop, params);
    r.rhs = to_string(rhs);
    if constexpr (std::is_same_v<T, Rational>) {
        r.rhs_exact = rhs;
        r.rhs_value = rhs.get_d();
    } else {
        r.rhs_value = rhs;
    }
    double se = 0.0;
    double estimate = all.mean;
    if (st.summed()) {
        // Summed statistic: the estimate is the largest sampled value.
        estimate = all.max;
    } else if (all.count > 1) {
        se = std::sqrt(all.m2 / static_cast<double>(all.count - 1) / static_cast<double>(all.count));
    }
    r.lhs_value = estimate;
    r.lhs = to_string(estimate);
    r.standard_error = se;
    r.holds = !(estimate - 4.0 * se > r.rhs_value);
    r.status = r.holds ? "consistent" : "violation-suspected";
    return r;
}

template <typename T>
InequalityReport verify(InequalityId id, const BasicPopulation<T>& pop,
                        const InequalityParams& params, VerifyMode mode,
                        const MonteCarloConfig& mc = {}, const EnumerationConfig& cfg = {})
{
    if (mode == VerifyMode::exact) {
        if constexpr (std::is_same_v<T, Rational>)
            return verify_exact(id, pop, params, cfg);
        else
            throw InvalidInput("exact mode requires exact rational input");
    }
    return verify_monte_carlo(id, pop, params, mc);
}

} // namespace pmart
