#pragma once

#include "pmart/construction.hpp"
#include "pmart/enumerate.hpp"
#include "pmart/population.hpp"

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace pmart {

enum class MartingaleKind { m2, m3, mtilde, weighted, chain_quadratic };

inline std::string to_string(MartingaleKind k)
{
    switch (k) {
    case MartingaleKind::m2: return "m2";
    case MartingaleKind::m3: return "m3";
    case MartingaleKind::mtilde: return "mtilde";
    case MartingaleKind::weighted: return "weighted";
    case MartingaleKind::chain_quadratic: return "chain-quadratic";
    }
    return "?";
}

inline MartingaleKind parse_martingale_kind(std::string_view s)
{
    if (s == "m2") return MartingaleKind::m2;
    if (s == "m3") return MartingaleKind::m3;
    if (s == "mtilde") return MartingaleKind::mtilde;
    if (s == "weighted") return MartingaleKind::weighted;
    if (s == "chain-quadratic" || s == "chain") return MartingaleKind::chain_quadratic;
    throw InvalidInput("unknown martingale kind '" + std::string(s) + "'");
}

/// Closed-form evaluator for one of the explicit scalar martingales, with
/// the k-dependent coefficients precomputed.
template <typename T>
class Martingale {
public:
    Martingale(MartingaleKind kind, const BasicPopulation<T>& pop,
               std::optional<Multipliers<T>> multipliers = std::nullopt)
        : kind_(kind), pop_(&pop), n_(pop.size())
    {
        switch (kind_) {
        case MartingaleKind::m2:
        case MartingaleKind::m3:
            k_hi_ = n_ - 1;
            break;
        case MartingaleKind::mtilde:
            if (!pop.centered())
                throw PreconditionError("mtilde requires a centered population (M = 0)");
            if (n_ < 3)
                throw DomainError("mtilde needs n >= 3 (range 1 <= k <= n-2)");
            k_hi_ = n_ - 2;
            break;
        case MartingaleKind::weighted:
            if (!multipliers)
                throw InvalidInput("weighted martingale needs multipliers");
            [[fallthrough]];
        case MartingaleKind::chain_quadratic:
            if (!pop.centered())
                throw PreconditionError(to_string(kind_) + " requires a centered population (M = 0)");
            k_hi_ = n_ - 1;
            break;
        }
        multipliers_ = kind_ == MartingaleKind::chain_quadratic
                           ? Multipliers<T>::previous_draw()
                           : multipliers.value_or(Multipliers<T>::previous_draw());
        if (kind_ == MartingaleKind::weighted)
            multipliers_.check_length(n_);
        build_coefficients();
    }

    MartingaleKind kind() const { return kind_; }
    std::size_t k_min() const { return 1; }
    std::size_t k_max() const { return k_hi_; }
    const BasicPopulation<T>& population() const { return *pop_; }

    T eval(const PathState<T>& h) const
    {
        std::size_t k = h.k();
        detail::require_range(k, 1, k_hi_, to_string(kind_).c_str());
        const auto& c = coef_[k];
        switch (kind_) {
        case MartingaleKind::m2:
            // (n S_k - k M)/(n-k)
            return c[0] * h.sum() + c[1];
        case MartingaleKind::m3:
            // (n T_k - k B)/(n-k)
            return c[0] * h.sum_sq() + c[1];
        case MartingaleKind::mtilde: {
            // ((n-1) S_k^2 - (B - T_k) k) / ((n-k)(n-k-1))
            const T& s = h.sum();
            return c[0] * s * s + c[1] * h.sum_sq() + c[2];
        }
        case MartingaleKind::weighted: {
            // W_k + alpha_1(k) S_k/(n-k)
            if (multipliers_.is_fixed()) {
                const auto& a = multipliers_.fixed();
                T w = T(0);
                for (std::size_t i = 1; i <= k; ++i)
                    w += a[i - 1] * h.draw(i);
                return w + c[1] * h.sum();
            }
            auto [w, alpha] = multipliers_.weighted_and_alpha(h);
            return w + alpha * h.sum() * c[0];
        }
        case MartingaleKind::chain_quadratic: {
            // X1X2 + ... + X_{k-1}X_k + S_{k-1} S_k/(n-k)
            T chain = T(0);
            for (std::size_t i = 2; i <= k; ++i)
                chain += h.draw(i - 1) * h.draw(i);
            return chain + h.sum_at(k - 1) * h.sum() * c[0];
        }
        }
        return T(0);
    }

    // Values M_k for k in [k_min, k_max] along one full ordering.
    std::vector<T> trajectory(const Permutation& perm) const
    {
        validate_permutation(perm, n_);
        PathState<T> h(*pop_);
        std::vector<T> out;
        for (std::size_t idx : perm) {
            h.push(idx);
            if (h.k() >= k_min() && h.k() <= k_max())
                out.push_back(eval(h));
        }
        return out;
    }

private:
    void build_coefficients()
    {
        coef_.assign(k_hi_ + 1, {T(0), T(0), T(0)});
        T n = T(static_cast<long>(n_));
        for (std::size_t k = 1; k <= k_hi_; ++k) {
            T kk = T(static_cast<long>(k));
            T d = T(static_cast<long>(n_ - k));
            auto& c = coef_[k];
            switch (kind_) {
            case MartingaleKind::m2:
                c[0] = n / d;
                c[1] = -kk * pop_->total() / d;
                break;
            case MartingaleKind::m3:
                c[0] = n / d;
                c[1] = -kk * pop_->sum_squares() / d;
                break;
            case MartingaleKind::mtilde: {
                T dd = d * T(static_cast<long>(n_ - k - 1));
                c[0] = (n - 1) / dd;
                c[1] = kk / dd;
                c[2] = -kk * pop_->sum_squares() / dd;
                break;
            }
            case MartingaleKind::weighted:
            case MartingaleKind::chain_quadratic:
                c[0] = T(1) / d;
                if (multipliers_.is_fixed()) {
                    T alpha = T(0);
                    for (std::size_t i = 0; i < k; ++i)
                        alpha += multipliers_.fixed()[i];
                    c[1] = alpha / d;
                }
                break;
            }
        }
    }

    MartingaleKind kind_;
    const BasicPopulation<T>* pop_;
    std::size_t n_;
    std::size_t k_hi_ = 0;
    Multipliers<T> multipliers_;
    std::vector<std::array<T, 3>> coef_;
};

struct MartingaleCheck {
    bool holds = true;
    std::uint64_t histories_checked = 0;
    std::optional<Permutation> witness; // first violating prefix, 0-based indices
};

namespace detail {

template <typename T>
void accumulate(T& acc, const T& v)
{
    acc += v;
}

template <typename T, std::size_t N>
void accumulate(std::array<T, N>& acc, const std::array<T, N>& v)
{
    for (std::size_t i = 0; i < N; ++i)
        acc[i] += v[i];
}

template <typename T>
void set_zero(T& v)
{
    v = 0;
}

template <typename T, std::size_t N>
void set_zero(std::array<T, N>& v)
{
    for (auto& x : v)
        x = 0;
}

// sum == count * value, coordinatewise.
template <typename T>
bool equals_scaled(const T& sum, const T& value, long count)
{
    return sum == value * count;
}

template <typename T, std::size_t N>
bool equals_scaled(const std::array<T, N>& sum, const std::array<T, N>& value, long count)
{
    for (std::size_t i = 0; i < N; ++i)
        if (!(sum[i] == value[i] * count))
            return false;
    return true;
}

template <typename T, typename Eval, typename V>
struct MartingaleWalker {
    PathState<T>& h;
    const Eval& eval;
    std::size_t k_lo, k_hi;
    MartingaleCheck result{};

    // `here` is eval(h) when h.k() >= k_lo.
    void visit(const V* here)
    {
        std::size_t k = h.k();
        if (k >= k_hi)
            return;
        const bool check = k >= k_lo;
        V acc;
        if (check)
            set_zero(acc);
        const std::size_t n = h.n();
        for (std::size_t idx = 0; idx < n && result.holds; ++idx) {
            if (h.is_drawn(idx))
                continue;
            h.push(idx);
            if (k + 1 >= k_lo) {
                V child = eval(h);
                if (check)
                    accumulate(acc, child);
                visit(&child);
            } else {
                visit(nullptr);
            }
            h.pop();
        }
        if (!check || !result.holds)
            return;
        ++result.histories_checked;
        if (!equals_scaled(acc, *here, static_cast<long>(n - k))) {
            result.holds = false;
            result.witness = Permutation(h.drawn().begin(), h.drawn().end());
        }
    }
};

} // namespace detail

/// Exhaustively checks E[V_{k+1} | first k draws] == V_k for every history
/// with k, k+1 in [k_lo, k_hi]. V may be a scalar or a std::array of
/// scalars. Exact only for exact scalars.
template <typename T, typename Eval>
MartingaleCheck check_martingale_property(const BasicPopulation<T>& pop, std::size_t k_lo,
                                          std::size_t k_hi, const Eval& eval,
                                          const EnumerationConfig& cfg = {})
{
    require_enumerable(pop.size(), cfg);
    if (k_lo == 0)
        throw DomainError("martingale ranges start at k = 1");
    using V = std::decay_t<decltype(eval(std::declval<const PathState<T>&>()))>;
    const std::size_t n = pop.size();
    auto blocks = run_blocks(n, cfg.workers, [&](std::size_t first) {
        PathState<T> h(pop);
        h.push(first);
        detail::MartingaleWalker<T, Eval, V> walker{h, eval, k_lo, k_hi};
        if (k_lo <= 1) {
            V v = eval(h);
            walker.visit(&v);
        } else {
            walker.visit(nullptr);
        }
        return walker.result;
    });
    MartingaleCheck total;
    for (auto& b : blocks) {
        total.histories_checked += b.histories_checked;
        if (total.holds && !b.holds) {
            total.holds = false;
            total.witness = b.witness;
        }
    }
    return total;
}

template <typename T>
MartingaleCheck check_martingale(const Martingale<T>& m, const EnumerationConfig& cfg = {})
{
    return check_martingale_property(
        m.population(), m.k_min(), m.k_max(),
        [&m](const PathState<T>& h) { return m.eval(h); }, cfg);
}

template <typename T>
MartingaleCheck check_vector_martingale(const BasicPopulation<T>& pop, const QuadraticSystem<T>& sys,
                                        const EnumerationConfig& cfg = {})
{
    return check_martingale_property(
        pop, sys.k_min(), sys.k_max(), [&sys](const PathState<T>& h) { return sys.value(h); }, cfg);
}

template <typename T>
MartingaleCheck check_vector_martingale(const BasicPopulation<T>& pop, const WeightedSystem<T>& sys,
                                        const EnumerationConfig& cfg = {})
{
    return check_martingale_property(
        pop, sys.k_min(), sys.k_max(), [&sys](const PathState<T>& h) { return sys.value(h); }, cfg);
}

struct ControlResult {
    std::string name;
    bool expected_holds = false;
    MartingaleCheck check;
    bool as_expected() const { return check.holds == expected_holds; }
};

/// Near-miss sequences that must fail the exhaustive check, plus the
/// positive control S_k/(n-k). Intended for a non-degenerate centered
/// population such as {1,-1,2,-2}.
inline std::vector<ControlResult> check_not_martingale_counterexamples(
    const Population& pop, const EnumerationConfig& cfg = {})
{
    using Eval = std::function<Rational(const PathState<Rational>&)>;
    const std::size_t n = pop.size();
    const Rational b = pop.sum_squares();
    const Rational nn = static_cast<long>(n);
    struct Entry {
        std::string name;
        bool expected;
        std::size_t hi;
        Eval f;
    };
    std::vector<Entry> library = {
        {"partial-sum", false, n - 1, [](const PathState<Rational>& h) { return h.sum(); }},
        {"shifted-average", false, n - 1,
         [n](const PathState<Rational>& h) {
             return Rational(h.sum() / Rational(static_cast<long>(n - h.k() + 1)));
         }},
        {"uncompensated-squares", false, n - 1,
         [b, nn](const PathState<Rational>& h) {
             return Rational(h.sum_sq() - Rational(static_cast<long>(h.k())) * b / nn);
         }},
        {"average-of-remaining", true, n - 1,
         [n](const PathState<Rational>& h) {
             return Rational(h.sum() / Rational(static_cast<long>(n - h.k())));
         }},
    };
    std::vector<ControlResult> out;
    for (const auto& e : library)
        out.push_back({e.name, e.expected, check_martingale_property(pop, 1, e.hi, e.f, cfg)});
    if (pop.centered() && n >= 4) {
        Martingale<Rational> mt(MartingaleKind::mtilde, pop);
        Eval perturbed = [&mt](const PathState<Rational>& h) {
            return Rational(mt.eval(h) + static_cast<long>(h.k()));
        };
        out.push_back({"perturbed-mtilde", false,
                       check_martingale_property(pop, 1, mt.k_max(), perturbed, cfg)});
    }
    return out;
}

} // namespace pmart
