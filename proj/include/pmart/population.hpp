#pragma once

#include "pmart/scalar.hpp"

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace pmart {

// Draw order over population indices, 0-based. Serialized 1-based.
using Permutation = std::vector<std::size_t>;

/// The fixed multiset sampled without replacement, with its power sums
/// P_r = sum x_i^r cached for r = 1..4. Duplicates are kept as distinct
/// labeled items.
template <typename T>
class BasicPopulation {
public:
    explicit BasicPopulation(std::vector<T> values) : values_(std::move(values))
    {
        if (values_.size() < 2)
            throw InvalidInput("population needs at least 2 values, got " +
                               std::to_string(values_.size()));
        for (auto& p : power_)
            p = T(0);
        T abs_total = T(0);
        for (const T& x : values_) {
            T sq = x * x;
            abs_total += x < 0 ? T(-x) : x;
            power_[0] += x;
            power_[1] += sq;
            power_[2] += sq * x;
            power_[3] += sq * sq;
        }
        if constexpr (ScalarTraits<T>::exact) {
            centered_ = power_[0] == 0;
        } else {
            // Rounding in the inputs and the sum; relative to sum |x_i|.
            const T tol = T(4) * T(values_.size()) * std::numeric_limits<T>::epsilon() * abs_total;
            centered_ = (power_[0] < 0 ? T(-power_[0]) : power_[0]) <= tol;
        }
    }

    std::size_t size() const { return values_.size(); }
    const std::vector<T>& values() const { return values_; }
    const T& operator[](std::size_t i) const { return values_[i]; }

    // P_r for r in 1..4.
    const T& power_sum(int r) const
    {
        if (r < 1 || r > 4)
            throw DomainError("power sums are cached for r = 1..4 only");
        return power_[static_cast<std::size_t>(r - 1)];
    }
    const T& total() const { return power_[0]; }       // M
    const T& sum_squares() const { return power_[1]; } // B
    const T& sum_cubes() const { return power_[2]; }
    const T& sum_fourth() const { return power_[3]; }  // Q

    bool centered() const { return centered_; }

    // The population of squares {x_i^2}, in the same label order.
    BasicPopulation squares() const
    {
        std::vector<T> sq;
        sq.reserve(values_.size());
        for (const T& x : values_)
            sq.push_back(x * x);
        return BasicPopulation(std::move(sq));
    }

private:
    std::vector<T> values_;
    std::array<T, 4> power_;
    bool centered_ = false;
};

using Population = BasicPopulation<Rational>;
using FloatPopulation = BasicPopulation<double>;

inline Population make_population(std::vector<Rational> values)
{
    return Population(std::move(values));
}

// m ones followed by m minus-ones.
template <typename T = Rational>
BasicPopulation<T> make_bridge_population(std::size_t m)
{
    if (m == 0)
        throw InvalidInput("bridge population needs m >= 1");
    std::vector<T> v(2 * m, T(1));
    std::fill(v.begin() + static_cast<std::ptrdiff_t>(m), v.end(), T(-1));
    return BasicPopulation<T>(std::move(v));
}

// Returns m when the population is m ones and m minus-ones (any order).
template <typename T>
std::size_t bridge_order(const BasicPopulation<T>& pop)
{
    std::size_t ones = 0, minus = 0;
    for (const T& x : pop.values()) {
        if (x == 1)
            ++ones;
        else if (x == -1)
            ++minus;
        else
            return 0;
    }
    return ones == minus ? ones : 0;
}

inline FloatPopulation to_float(const Population& pop)
{
    std::vector<double> v;
    v.reserve(pop.size());
    for (const auto& x : pop.values())
        v.push_back(x.get_d());
    return FloatPopulation(std::move(v));
}

// One value per line; '#' starts a comment; blank lines are skipped.
template <typename T = Rational>
std::vector<T> parse_values(std::istream& in, const std::string& origin = "<input>")
{
    std::vector<T> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        auto body = detail::trim(line);
        if (body.empty())
            continue;
        try {
            out.push_back(parse_scalar<T>(body));
        } catch (const InvalidInput& e) {
            throw InvalidInput(origin + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

template <typename T = Rational>
std::vector<T> read_values_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw InvalidInput("cannot read file '" + path + "'");
    return parse_values<T>(in, path);
}

template <typename T = Rational>
BasicPopulation<T> read_population_file(const std::string& path)
{
    return BasicPopulation<T>(read_values_file<T>(path));
}

inline void validate_permutation(const Permutation& perm, std::size_t n)
{
    if (perm.size() != n)
        throw InvalidInput("permutation has length " + std::to_string(perm.size()) +
                           ", expected " + std::to_string(n));
    std::vector<char> seen(n, 0);
    for (std::size_t i : perm) {
        if (i >= n || seen[i])
            throw InvalidInput("permutation is not a bijection on 1.." + std::to_string(n));
        seen[i] = 1;
    }
}

inline Permutation from_one_based(std::span<const std::size_t> one_based)
{
    Permutation p;
    p.reserve(one_based.size());
    for (std::size_t i : one_based) {
        if (i == 0)
            throw InvalidInput("1-based permutation contains 0");
        p.push_back(i - 1);
    }
    return p;
}

inline std::vector<std::size_t> to_one_based(std::span<const std::size_t> perm)
{
    std::vector<std::size_t> out(perm.begin(), perm.end());
    for (auto& i : out)
        ++i;
    return out;
}

/// A sampled prefix X_1..X_k together with the running sums S_k and T_k.
/// push/pop make it usable as the cursor of a depth-first walk over all
/// histories; the sums for every depth are kept so pop is O(1).
template <typename T>
class PathState {
public:
    explicit PathState(const BasicPopulation<T>& pop)
        : pop_(&pop), used_(pop.size(), 0), s_(pop.size() + 1, T(0)),
          t_(pop.size() + 1, T(0))
    {
        drawn_.reserve(pop.size());
    }

    const BasicPopulation<T>& population() const { return *pop_; }
    std::size_t n() const { return pop_->size(); }
    std::size_t k() const { return drawn_.size(); }

    const T& sum() const { return s_[k()]; }
    const T& sum_sq() const { return t_[k()]; }
    T sum_cube() const
    {
        T u = T(0);
        for (std::size_t i : drawn_)
            u += (*pop_)[i] * (*pop_)[i] * (*pop_)[i];
        return u;
    }
    const T& sum_at(std::size_t j) const { return s_[j]; }
    const T& sum_sq_at(std::size_t j) const { return t_[j]; }

    // Value of the i-th draw, 1-based.
    const T& draw(std::size_t i) const { return (*pop_)[drawn_[i - 1]]; }

    std::span<const std::size_t> drawn() const { return drawn_; }
    bool is_drawn(std::size_t index) const { return used_[index] != 0; }

    std::vector<std::size_t> remaining() const
    {
        std::vector<std::size_t> r;
        for (std::size_t i = 0; i < n(); ++i)
            if (!used_[i])
                r.push_back(i);
        return r;
    }

    void push(std::size_t index)
    {
        if (index >= n() || used_[index])
            throw InvalidInput("index " + std::to_string(index) + " is not available to draw");
        const T& x = (*pop_)[index];
        std::size_t j = k();
        s_[j + 1] = s_[j] + x;
        t_[j + 1] = t_[j] + x * x;
        used_[index] = 1;
        drawn_.push_back(index);
    }

    void pop()
    {
        used_[drawn_.back()] = 0;
        drawn_.pop_back();
    }

private:
    const BasicPopulation<T>* pop_;
    std::vector<std::size_t> drawn_;
    std::vector<char> used_;
    std::vector<T> s_, t_;
};

// S_k and T_k for k = 0..n along one full ordering.
template <typename T>
struct Trajectory {
    std::vector<T> x; // x[i] is the value drawn at step i+1
    std::vector<T> sums;    // S_k
    std::vector<T> sum_sqs; // T_k
};

template <typename T>
Trajectory<T> path_for(const BasicPopulation<T>& pop, const Permutation& perm)
{
    validate_permutation(perm, pop.size());
    Trajectory<T> tr;
    tr.sums.assign(1, T(0));
    tr.sum_sqs.assign(1, T(0));
    for (std::size_t idx : perm) {
        const T& v = pop[idx];
        tr.x.push_back(v);
        tr.sums.push_back(tr.sums.back() + v);
        tr.sum_sqs.push_back(tr.sum_sqs.back() + v * v);
    }
    return tr;
}

/// Lexicographic walk over all n! orderings of {0..n-1}.
class PermutationIter {
public:
    explicit PermutationIter(std::size_t n) : perm_(n)
    {
        std::iota(perm_.begin(), perm_.end(), std::size_t{0});
    }

    const Permutation& current() const { return perm_; }
    bool done() const { return done_; }

    void advance()
    {
        if (!std::next_permutation(perm_.begin(), perm_.end()))
            done_ = true;
    }

private:
    Permutation perm_;
    bool done_ = false;
};

inline std::uint64_t factorial(std::size_t n)
{
    std::uint64_t f = 1;
    for (std::size_t i = 2; i <= n; ++i)
        f *= i;
    return f;
}

// ---- seeded randomness ---------------------------------------------------

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Independent generator for stream `stream` of master seed `seed`.
inline Rng seed_stream(std::uint64_t seed, std::uint64_t stream)
{
    return Rng(splitmix64(seed ^ splitmix64(stream + 1)));
}

// Uniform on [0, bound) by rejection; does not depend on the standard
// library's distribution implementations, so streams are portable.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t bound)
{
    std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
        std::uint64_t x = rng();
        if (x >= threshold)
            return x % bound;
    }
}

inline void shuffle_in_place(Permutation& perm, Rng& rng)
{
    for (std::size_t i = perm.size(); i > 1; --i)
        std::swap(perm[i - 1], perm[uniform_below(rng, i)]);
}

inline Permutation random_permutation(std::size_t n, Rng& rng)
{
    Permutation p(n);
    std::iota(p.begin(), p.end(), std::size_t{0});
    shuffle_in_place(p, rng);
    return p;
}

struct RandomPopulationShape {
    long max_numerator = 5;
    long max_denominator = 4;
};

// n-1 small rationals drawn from the generator, then the negated sum of
// those as the last value.
inline Population random_centered_population(std::size_t n, Rng& rng,
                                             RandomPopulationShape shape = {})
{
    if (n < 2)
        throw InvalidInput("population needs at least 2 values");
    auto span = static_cast<std::uint64_t>(2 * shape.max_numerator + 1);
    for (;;) {
        std::vector<Rational> v;
        Rational sum = 0;
        bool any_nonzero = false;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            long num = static_cast<long>(uniform_below(rng, span)) - shape.max_numerator;
            long den = 1 + static_cast<long>(uniform_below(
                               rng, static_cast<std::uint64_t>(shape.max_denominator)));
            Rational x(num, den);
            x.canonicalize();
            any_nonzero = any_nonzero || x != 0;
            sum += x;
            v.push_back(x);
        }
        if (!any_nonzero)
            continue;
        v.push_back(-sum);
        return Population(std::move(v));
    }
}

// Small nonzero-somewhere rational weights.
inline std::vector<Rational> random_weights(std::size_t n, Rng& rng,
                                            RandomPopulationShape shape = {})
{
    auto span = static_cast<std::uint64_t>(2 * shape.max_numerator + 1);
    for (;;) {
        std::vector<Rational> a;
        bool any = false;
        for (std::size_t i = 0; i < n; ++i) {
            long num = static_cast<long>(uniform_below(rng, span)) - shape.max_numerator;
            long den = 1 + static_cast<long>(uniform_below(
                               rng, static_cast<std::uint64_t>(shape.max_denominator)));
            Rational x(num, den);
            x.canonicalize();
            any = any || x != 0;
            a.push_back(x);
        }
        if (any)
            return a;
    }
}

} // namespace pmart
