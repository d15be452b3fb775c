#pragma once

// Linearized one-step conditional expectations E[xi_{k+1} | F_k] = A_{k+1} xi_k
// and the vector martingales Pi_k xi_k with Pi_k = A_1^{-1} ... A_k^{-1}.
//
// Indexing: transition(k) is the matrix that maps the state after k draws to
// the expected state after k+1 draws, i.e. A_{k+1}. inverse_product(k) is the
// accumulated product over A_1..A_k.

#include "pmart/matrix.hpp"
#include "pmart/population.hpp"

#include <array>
#include <cstddef>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace pmart {

enum class Basis { quadratic, weighted };

inline std::string to_string(Basis b)
{
    return b == Basis::quadratic ? "quadratic" : "weighted";
}

namespace detail {

inline void require_range(std::size_t k, std::size_t lo, std::size_t hi, const char* what)
{
    if (k < lo || k > hi)
        throw DomainError(std::string(what) + ": k = " + std::to_string(k) +
                          " outside the valid range [" + std::to_string(lo) + ", " +
                          std::to_string(hi) + "]");
}

} // namespace detail

/// State (S_k^2, S_k, T_k, 1) with deterministic 4x4 transitions.
template <typename T>
class QuadraticSystem {
public:
    using Mat = Matrix<T, 4>;
    using Vec = std::array<T, 4>;

    QuadraticSystem(std::size_t n, T total, T sum_squares)
        : n_(n), m_(std::move(total)), b_(std::move(sum_squares))
    {
        if (n_ < 3)
            throw DomainError("quadratic system needs n >= 3");
        cache_.reserve(n_ - 2);
        for (std::size_t k = 1; k <= n_ - 2; ++k)
            cache_.push_back(closed_form(k));
    }

    explicit QuadraticSystem(const BasicPopulation<T>& pop)
        : QuadraticSystem(pop.size(), pop.total(), pop.sum_squares())
    {
    }

    std::size_t n() const { return n_; }
    std::size_t k_min() const { return 1; }
    std::size_t k_max() const { return n_ - 2; }

    // A_{k+1}, for 0 <= k <= n-3. At k = n-2 the (1,1) entry (n-k-2)/(n-k)
    // vanishes and the matrix is singular.
    Mat transition(std::size_t k) const
    {
        detail::require_range(k, 0, n_ - 3, "quadratic transition (A_{k+1} singular at k = n-2)");
        T d = T(static_cast<long>(n_ - k));
        Mat a = Mat::zero();
        a(0, 0) = T(static_cast<long>(n_ - k - 2)) / d;
        a(0, 1) = T(2) * m_ / d;
        a(0, 2) = T(-1) / d;
        a(0, 3) = b_ / d;
        a(1, 1) = T(static_cast<long>(n_ - k - 1)) / d;
        a(1, 3) = m_ / d;
        a(2, 2) = T(static_cast<long>(n_ - k - 1)) / d;
        a(2, 3) = b_ / d;
        a(3, 3) = T(1);
        return a;
    }

    // Closed form of A_1^{-1} ... A_k^{-1}, 1 <= k <= n-2.
    const Mat& inverse_product(std::size_t k) const
    {
        detail::require_range(k, 1, n_ - 2, "quadratic inverse product");
        return cache_[k - 1];
    }

    // Same product accumulated from explicit inverses of each A_j.
    Mat iterative_inverse_product(std::size_t k) const
    {
        detail::require_range(k, 1, n_ - 2, "quadratic inverse product");
        Mat p = Mat::identity();
        for (std::size_t j = 0; j < k; ++j)
            p = p * inverse(transition(j));
        return p;
    }

    static Vec state(const PathState<T>& h)
    {
        const T& s = h.sum();
        return {s * s, s, h.sum_sq(), T(1)};
    }

    Vec value(const PathState<T>& h) const { return inverse_product(h.k()) * state(h); }

private:
    Mat closed_form(std::size_t k) const
    {
        T n = T(static_cast<long>(n_));
        T kk = T(static_cast<long>(k));
        T d1 = T(static_cast<long>(n_ - k));
        T d2 = T(static_cast<long>(n_ - k - 1));
        T dd = d1 * d2;
        Mat p = Mat::zero();
        p(0, 0) = n * (n - 1) / dd;
        p(0, 1) = -T(2) * kk * n * m_ / dd;
        p(0, 2) = kk * n / dd;
        p(0, 3) = (kk * (kk + 1) * m_ * m_ - kk * n * b_) / dd;
        p(1, 1) = n / d1;
        p(1, 3) = -kk * m_ / d1;
        p(2, 2) = n / d1;
        p(2, 3) = -kk * b_ / d1;
        p(3, 3) = T(1);
        return p;
    }

    std::size_t n_;
    T m_, b_;
    std::vector<Mat> cache_;
};

/// Non-anticipating multipliers a_1..a_n: either fixed scalars, or the rule
/// a_1 = 0, a_k = X_{k-1}.
template <typename T>
class Multipliers {
public:
    struct PreviousDraw {};

    Multipliers() : rule_(PreviousDraw{}) {}
    explicit Multipliers(std::vector<T> fixed) : rule_(std::move(fixed)) {}

    static Multipliers previous_draw() { return Multipliers(); }

    bool is_fixed() const { return std::holds_alternative<std::vector<T>>(rule_); }
    const std::vector<T>& fixed() const { return std::get<std::vector<T>>(rule_); }

    // a_k (1-based); needs the first k-1 draws of h.
    T at(std::size_t k, const PathState<T>& h) const
    {
        if (is_fixed()) {
            const auto& a = fixed();
            if (k == 0 || k > a.size())
                throw DomainError("multiplier index " + std::to_string(k) + " out of range");
            return a[k - 1];
        }
        if (k <= 1)
            return T(0);
        return h.draw(k - 1);
    }

    // W_k = sum_{i<=k} a_i X_i and alpha_1(k) = sum_{i<=k} a_i at h.k().
    std::pair<T, T> weighted_and_alpha(const PathState<T>& h) const
    {
        T w = T(0), alpha = T(0);
        for (std::size_t i = 1; i <= h.k(); ++i) {
            T a = at(i, h);
            w += a * h.draw(i);
            alpha += a;
        }
        return {w, alpha};
    }

    void check_length(std::size_t n) const
    {
        if (is_fixed() && fixed().size() != n)
            throw InvalidInput("multiplier list has length " + std::to_string(fixed().size()) +
                               ", expected " + std::to_string(n));
    }

private:
    std::variant<PreviousDraw, std::vector<T>> rule_;
};

/// State (W_k, S_k) for a centered population; 2x2 transitions depending on
/// a_{k+1}.
template <typename T>
class WeightedSystem {
public:
    using Mat = Matrix<T, 2>;
    using Vec = std::array<T, 2>;

    WeightedSystem(std::size_t n, Multipliers<T> a) : n_(n), a_(std::move(a))
    {
        if (n_ < 2)
            throw DomainError("weighted system needs n >= 2");
        a_.check_length(n_);
    }

    WeightedSystem(const BasicPopulation<T>& pop, Multipliers<T> a)
        : WeightedSystem(pop.size(), std::move(a))
    {
        if (!pop.centered())
            throw PreconditionError("weighted construction requires a centered population");
    }

    std::size_t n() const { return n_; }
    std::size_t k_min() const { return 1; }
    std::size_t k_max() const { return n_ - 1; }
    const Multipliers<T>& multipliers() const { return a_; }

    // A_{k+1} given a_{k+1}, for 0 <= k <= n-2.
    Mat transition(std::size_t k, const T& next_multiplier) const
    {
        detail::require_range(k, 0, n_ - 2, "weighted transition (A_{k+1} singular at k = n-1)");
        T d = T(static_cast<long>(n_ - k));
        Mat a = Mat::zero();
        a(0, 0) = T(1);
        a(0, 1) = -next_multiplier / d;
        a(1, 1) = T(static_cast<long>(n_ - k - 1)) / d;
        return a;
    }

    // Closed form [[1, alpha_1(k)/(n-k)], [0, n/(n-k)]], 1 <= k <= n-1.
    Mat inverse_product(std::size_t k, const T& alpha1) const
    {
        detail::require_range(k, 1, n_ - 1, "weighted inverse product");
        T d = T(static_cast<long>(n_ - k));
        Mat p = Mat::zero();
        p(0, 0) = T(1);
        p(0, 1) = alpha1 / d;
        p(1, 1) = T(static_cast<long>(n_)) / d;
        return p;
    }

    Mat inverse_product(std::size_t k) const
    {
        if (!a_.is_fixed())
            throw InvalidInput("closed form without a path needs fixed multipliers");
        detail::require_range(k, 1, n_ - 1, "weighted inverse product");
        T alpha = T(0);
        for (std::size_t i = 0; i < k; ++i)
            alpha += a_.fixed()[i];
        return inverse_product(k, alpha);
    }

    Mat iterative_inverse_product(std::size_t k) const
    {
        if (!a_.is_fixed())
            throw InvalidInput("iterative product without a path needs fixed multipliers");
        detail::require_range(k, 1, n_ - 1, "weighted inverse product");
        Mat p = Mat::identity();
        for (std::size_t j = 0; j < k; ++j)
            p = p * inverse(transition(j, a_.fixed()[j]));
        return p;
    }

    Vec state(const PathState<T>& h) const
    {
        return {a_.weighted_and_alpha(h).first, h.sum()};
    }

    Vec value(const PathState<T>& h) const
    {
        auto [w, alpha] = a_.weighted_and_alpha(h);
        return inverse_product(h.k(), alpha) * Vec{w, h.sum()};
    }

private:
    std::size_t n_;
    Multipliers<T> a_;
};

} // namespace pmart
