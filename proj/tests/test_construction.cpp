#include "oracles.hpp"

#include "pmart/construction.hpp"
#include "pmart/martingales.hpp"

#include <gtest/gtest.h>

#include <functional>

using namespace pmart;
using pmart::testing::test_rng;

namespace {

using Q4 = Matrix<Rational, 4>;
using Q2 = Matrix<Rational, 2>;

// Not centered in general.
Population random_population(std::size_t n, Rng& rng)
{
    return Population(random_weights(n, rng));
}

// Visits every history h with h.k() in [0, max_depth].
void for_each_history(PathState<Rational>& h, std::size_t max_depth,
                      const std::function<void(PathState<Rational>&)>& f)
{
    f(h);
    if (h.k() == max_depth)
        return;
    for (std::size_t i = 0; i < h.n(); ++i) {
        if (h.is_drawn(i))
            continue;
        h.push(i);
        for_each_history(h, max_depth, f);
        h.pop();
    }
}

template <std::size_t N, typename StateFn>
std::array<Rational, N> average_next_state(PathState<Rational>& h, StateFn state)
{
    std::array<Rational, N> acc;
    acc.fill(0);
    long count = 0;
    for (std::size_t i = 0; i < h.n(); ++i) {
        if (h.is_drawn(i))
            continue;
        h.push(i);
        auto s = state(h);
        for (std::size_t c = 0; c < N; ++c)
            acc[c] += s[c];
        h.pop();
        ++count;
    }
    for (auto& x : acc)
        x /= count;
    return acc;
}

} // namespace

TEST(QuadraticTransition, MatchesDisplayedEntries)
{
    QuadraticSystem<Rational> sys(3, 0, 6);
    auto a1 = sys.transition(0);
    EXPECT_EQ(a1(0, 0), Rational(1, 3));
    EXPECT_EQ(a1(0, 1), 0);
    EXPECT_EQ(a1(0, 2), Rational(-1, 3));
    EXPECT_EQ(a1(0, 3), 2);
    EXPECT_TRUE(a1.upper_triangular());
}

TEST(QuadraticTransition, SecondRowIsConditionalMeanOfPartialSum)
{
    QuadraticSystem<Rational> sys(7, Rational(3, 2), 11);
    for (std::size_t k = 0; k <= 4; ++k) {
        auto a = sys.transition(k);
        Rational d = static_cast<long>(7 - k);
        EXPECT_EQ(a(1, 1), Rational(static_cast<long>(6 - k)) / d);
        EXPECT_EQ(a(1, 3), Rational(3, 2) / d);
        EXPECT_EQ(a(1, 0), 0);
        EXPECT_EQ(a(1, 2), 0);
        EXPECT_EQ(a(3, 3), 1);
        EXPECT_EQ(a(3, 0), 0);
        EXPECT_EQ(a(3, 1), 0);
        EXPECT_EQ(a(3, 2), 0);
    }
}

TEST(QuadraticTransition, SingularIndexIsRefused)
{
    QuadraticSystem<Rational> sys(6, 0, 10);
    EXPECT_NO_THROW(sys.transition(3));
    EXPECT_THROW(sys.transition(4), DomainError); // k = n-2
    EXPECT_THROW(sys.inverse_product(0), DomainError);
    EXPECT_THROW(sys.inverse_product(5), DomainError);
    EXPECT_THROW(QuadraticSystem<Rational>(2, 0, 2), DomainError);
}

TEST(QuadraticInverseProduct, CornerEntries)
{
    const long n = 9;
    QuadraticSystem<Rational> sys(n, 2, 17);
    for (long k = 1; k <= n - 2; ++k) {
        const auto& p = sys.inverse_product(static_cast<std::size_t>(k));
        EXPECT_EQ(p(0, 0), Rational(n * (n - 1)) / Rational((n - k) * (n - k - 1)));
        EXPECT_EQ(p(3, 3), 1);
        EXPECT_TRUE(p.upper_triangular());
    }
}

TEST(QuadraticInverseProduct, ClosedFormEqualsIterativeProduct)
{
    auto rng = test_rng(10);
    for (std::size_t n = 3; n <= 12; ++n) {
        for (int rep = 0; rep < 3; ++rep) {
            auto w = random_weights(2, rng);
            Rational m = w[0], b = w[1] * w[1] + 1;
            QuadraticSystem<Rational> sys(n, m, b);
            Q4 forward = Q4::identity();
            for (std::size_t k = 1; k <= n - 2; ++k) {
                forward = sys.transition(k - 1) * forward;
                EXPECT_EQ(sys.inverse_product(k), sys.iterative_inverse_product(k))
                    << "n=" << n << " k=" << k;
                EXPECT_EQ(sys.inverse_product(k) * forward, Q4::identity());
            }
        }
    }
}

TEST(WeightedConstruction, ZeroMultipliers)
{
    WeightedSystem<Rational> sys(5, Multipliers<Rational>(std::vector<Rational>(5, 0)));
    for (std::size_t k = 1; k <= 4; ++k) {
        auto p = sys.inverse_product(k);
        EXPECT_EQ(p(0, 0), 1);
        EXPECT_EQ(p(0, 1), 0);
        EXPECT_EQ(p(1, 0), 0);
        EXPECT_EQ(p(1, 1), Rational(5) / Rational(static_cast<long>(5 - k)));
    }
}

TEST(WeightedConstruction, SubstitutedClosedForm)
{
    WeightedSystem<Rational> sys(4, Multipliers<Rational>({1, 1, 0, 0}));
    Q2 expected = Q2::zero();
    expected(0, 0) = 1;
    expected(0, 1) = 1;
    expected(1, 1) = 2;
    EXPECT_EQ(sys.inverse_product(2), expected);
}

TEST(WeightedConstruction, ClosedFormEqualsIterativeProduct)
{
    auto rng = test_rng(11);
    for (std::size_t n = 2; n <= 12; ++n) {
        for (int rep = 0; rep < 3; ++rep) {
            WeightedSystem<Rational> sys(n, Multipliers<Rational>(random_weights(n, rng)));
            Q2 forward = Q2::identity();
            for (std::size_t k = 1; k <= n - 1; ++k) {
                forward = sys.transition(k - 1, sys.multipliers().fixed()[k - 1]) * forward;
                EXPECT_EQ(sys.inverse_product(k), sys.iterative_inverse_product(k));
                EXPECT_EQ(sys.inverse_product(k) * forward, Q2::identity());
            }
        }
    }
}

TEST(WeightedConstruction, RangeAndPreconditions)
{
    WeightedSystem<Rational> sys(4, Multipliers<Rational>({1, 2, 3, 4}));
    EXPECT_THROW(sys.transition(3, 1), DomainError);
    EXPECT_THROW(sys.inverse_product(0), DomainError);
    EXPECT_THROW(sys.inverse_product(4), DomainError);
    EXPECT_THROW(WeightedSystem<Rational>(4, Multipliers<Rational>({1, 2})), InvalidInput);
    Population uncentered({1, 2, 3});
    EXPECT_THROW(WeightedSystem<Rational>(uncentered, Multipliers<Rational>({1, 1, 1})),
                 PreconditionError);
}

// E[xi_{k+1} | h] = A_{k+1} xi_k(h) on every history, centered or not.
TEST(OneStepIdentity, QuadraticStateOnAllHistories)
{
    auto rng = test_rng(12);
    for (std::size_t n = 3; n <= 7; ++n) {
        for (int rep = 0; rep < 2; ++rep) {
            Population pop = rep == 0 ? random_population(n, rng) : random_centered_population(n, rng);
            QuadraticSystem<Rational> sys(pop);
            PathState<Rational> h(pop);
            for_each_history(h, n - 3, [&](PathState<Rational>& st) {
                auto avg = average_next_state<4>(st, [](const PathState<Rational>& x) {
                    return QuadraticSystem<Rational>::state(x);
                });
                EXPECT_EQ(avg, sys.transition(st.k()) * QuadraticSystem<Rational>::state(st));
            });
        }
    }
}

TEST(OneStepIdentity, WeightedStateOnAllHistories)
{
    auto rng = test_rng(13);
    for (std::size_t n = 2; n <= 7; ++n) {
        auto pop = random_centered_population(n, rng);
        for (auto mult : {Multipliers<Rational>(random_weights(n, rng)),
                          Multipliers<Rational>::previous_draw()}) {
            WeightedSystem<Rational> sys(pop, mult);
            PathState<Rational> h(pop);
            for_each_history(h, n - 2, [&](PathState<Rational>& st) {
                auto avg = average_next_state<2>(
                    st, [&](const PathState<Rational>& x) { return sys.state(x); });
                // a_{k+1} is known from the first k draws.
                Rational next = mult.at(st.k() + 1, st);
                EXPECT_EQ(avg, sys.transition(st.k(), next) * sys.state(st));
            });
        }
    }
}

TEST(VectorMartingale, QuadraticCoordinates)
{
    auto rng = test_rng(14);
    for (std::size_t n = 4; n <= 7; ++n) {
        auto centered = random_centered_population(n, rng);
        auto general = random_population(n, rng);
        for (const Population* pop : {&centered, &general}) {
            QuadraticSystem<Rational> sys(*pop);
            Martingale<Rational> m2(MartingaleKind::m2, *pop), m3(MartingaleKind::m3, *pop);
            PathState<Rational> h(*pop);
            for (auto idx : random_permutation(n, rng)) {
                h.push(idx);
                if (h.k() > sys.k_max())
                    break;
                auto v = sys.value(h);
                EXPECT_EQ(v[3], 1);
                EXPECT_EQ(v[1], m2.eval(h));
                EXPECT_EQ(v[2], m3.eval(h));
                if (pop->centered()) {
                    Martingale<Rational> mt(MartingaleKind::mtilde, *pop);
                    EXPECT_EQ(v[0], Rational(static_cast<long>(n)) * mt.eval(h));
                }
            }
        }
    }
}

TEST(VectorMartingale, WeightedFirstCoordinate)
{
    auto rng = test_rng(15);
    auto pop = random_centered_population(6, rng);
    auto a = random_weights(6, rng);
    WeightedSystem<Rational> sys(pop, Multipliers<Rational>(a));
    auto perm = random_permutation(6, rng);
    PathState<Rational> h(pop);
    for (std::size_t k = 1; k <= 5; ++k) {
        h.push(perm[k - 1]);
        Rational w = 0, alpha = 0;
        for (std::size_t i = 1; i <= k; ++i) {
            w += a[i - 1] * h.draw(i);
            alpha += a[i - 1];
        }
        auto v = sys.value(h);
        EXPECT_EQ(v[0], w + alpha * h.sum() / Rational(static_cast<long>(6 - k)));
        EXPECT_EQ(v[1], Rational(6) * h.sum() / Rational(static_cast<long>(6 - k)));
    }
}

TEST(VectorMartingale, ExhaustiveCheckHoldsForBothBases)
{
    auto rng = test_rng(16);
    for (std::size_t n = 3; n <= 6; ++n) {
        auto general = random_population(n, rng);
        EXPECT_TRUE(check_vector_martingale(general, QuadraticSystem<Rational>(general)).holds);
        auto centered = random_centered_population(n, rng);
        WeightedSystem<Rational> fixed(centered, Multipliers<Rational>(random_weights(n, rng)));
        WeightedSystem<Rational> chain(centered, Multipliers<Rational>::previous_draw());
        EXPECT_TRUE(check_vector_martingale(centered, fixed).holds);
        EXPECT_TRUE(check_vector_martingale(centered, chain).holds);
    }
}

TEST(MatrixInverse, SingularMatrixThrows)
{
    Q2 m = Q2::zero();
    m(0, 0) = 1;
    m(0, 1) = 2;
    EXPECT_THROW(inverse(m), DomainError);
}
