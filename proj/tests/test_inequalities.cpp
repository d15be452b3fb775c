#include "oracles.hpp"

#include "pmart/inequalities.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace pmart;
using pmart::testing::average_over_permutations;
using pmart::testing::max_over_permutations;
using pmart::testing::prefix_sum;
using pmart::testing::prefix_sum_sq;
using pmart::testing::sq;
using pmart::testing::test_rng;

namespace {

Population pop_of(std::initializer_list<long> v)
{
    std::vector<Rational> r;
    for (long x : v)
        r.emplace_back(x);
    return Population(std::move(r));
}

Rational frac(long p, long q) { return Rational(p) / Rational(q); }

Rational max_of(const std::vector<Rational>& v)
{
    Rational best = v.front();
    for (const auto& x : v)
        if (x > best)
            best = x;
    return best;
}

// The per-ordering statistics written out term by term.
Rational statistic(InequalityId id, const std::vector<Rational>& x, const std::vector<Rational>& a)
{
    const std::size_t n = x.size();
    const Rational nn = static_cast<long>(n);
    std::vector<Rational> terms;
    switch (id) {
    case InequalityId::max_averages:
        for (std::size_t k = 1; k <= n; ++k)
            terms.push_back(sq(prefix_sum(x, k) / Rational(static_cast<long>(k))));
        return max_of(terms);
    case InequalityId::garsia:
        for (std::size_t k = 1; k <= n; ++k)
            terms.push_back(sq(prefix_sum(x, k)));
        return max_of(terms);
    case InequalityId::quadratic:
        for (std::size_t k = 2; k <= n; ++k) {
            Rational kk = static_cast<long>(k);
            terms.push_back(sq((sq(prefix_sum(x, k)) - (nn - kk) / (nn - 1) * prefix_sum_sq(x, k)) /
                               (kk * (kk - 1))));
        }
        return max_of(terms);
    case InequalityId::bridge:
        for (std::size_t k = 1; k < n; ++k) {
            Rational kk = static_cast<long>(k);
            terms.push_back(sq(sq(prefix_sum(x, k)) - kk * (nn - kk) / (nn - 1)));
        }
        return max_of(terms);
    case InequalityId::alternating:
    case InequalityId::vna_weighted:
    case InequalityId::garsia_weighted: {
        Rational w = 0;
        for (std::size_t i = 1; i <= n; ++i) {
            Rational ai = id == InequalityId::alternating ? Rational(i % 2 == 1 ? -1 : 1) : a[i - 1];
            w += ai * x[i - 1];
            terms.push_back(sq(w));
        }
        return max_of(terms);
    }
    case InequalityId::hardy: {
        Rational total = 0;
        for (std::size_t k = 1; k <= n; ++k)
            total += sq(prefix_sum(x, k) / Rational(static_cast<long>(k)));
        return total;
    }
    }
    return 0;
}

InequalityParams params_for(InequalityId id, std::size_t n, Rng& rng)
{
    InequalityParams p;
    if (uses_weights(id))
        p.weights = random_weights(n, rng);
    return p;
}

} // namespace

TEST(LhsStatistic, HandEvaluatedExamples)
{
    auto pair = pop_of({1, -1});
    EXPECT_EQ(lhs_statistic(InequalityId::max_averages, pair, {0, 1}), 1);
    EXPECT_EQ(lhs_statistic(InequalityId::max_averages, pair, {1, 0}), 1);
    EXPECT_EQ(lhs_statistic(InequalityId::alternating, pair, {0, 1}), 4);

    auto bridge = make_bridge_population(2); // {1, 1, -1, -1}
    EXPECT_EQ(lhs_statistic(InequalityId::bridge, bridge, {0, 1, 2, 3}), frac(64, 9));
    EXPECT_EQ(lhs_statistic(InequalityId::bridge, bridge, {0, 2, 1, 3}), frac(16, 9));
}

TEST(RhsValue, DirectSubstitution)
{
    auto pair = pop_of({1, -1});
    EXPECT_EQ(rhs_value(InequalityId::max_averages, pair), 4);
    EXPECT_EQ(rhs_value(InequalityId::garsia, pair), frac(82, 5));
    EXPECT_EQ(rhs_value(InequalityId::hardy, pair), 8);
    EXPECT_EQ(rhs_value(InequalityId::bridge, make_bridge_population(2)), 512);
    EXPECT_EQ(rhs_value(InequalityId::alternating, pair), Rational(305, 17) * 2);

    auto four = pop_of({1, -1, 2, -2});
    EXPECT_EQ(rhs_value(InequalityId::quadratic, four), frac(4, 9) * (100 - 34));

    for (std::size_t n = 2; n <= 9; ++n) {
        auto rng = test_rng(40 + n);
        auto pop = random_centered_population(n, rng);
        InequalityParams p;
        p.weights = alternating_weights(n);
        const Rational nn = static_cast<long>(n);
        EXPECT_EQ(rhs_value(InequalityId::vna_weighted, pop, p),
                  Rational(16) / (nn - 1) * (1 + 2 / nn) * nn * pop.sum_squares());
        EXPECT_EQ(rhs_value(InequalityId::garsia_weighted, pop, p),
                  (80 + frac(4, 205)) * nn * pop.sum_squares() / (nn - 1));
    }
}

TEST(RhsValue, ScaleMultipliesTheBound)
{
    auto pop = pop_of({1, 2, -3});
    InequalityParams p;
    p.rhs_scale = frac(1, 4);
    EXPECT_EQ(rhs_value(InequalityId::max_averages, pop, p), frac(14, 3));
}

TEST(Verify, PinnedExactExamples)
{
    auto pair = pop_of({1, -1});
    auto r1 = verify_exact(InequalityId::max_averages, pair);
    EXPECT_EQ(*r1.lhs_exact, 1);
    EXPECT_EQ(*r1.rhs_exact, 4);
    EXPECT_TRUE(r1.holds);
    EXPECT_EQ(r1.status, "holds");
    EXPECT_EQ(r1.permutations, 2u);

    InequalityParams bp;
    bp.bridge_m = 2;
    auto r4 = verify_exact(InequalityId::bridge, make_bridge_population(2), bp);
    EXPECT_EQ(r4.lhs, "32/9");
    EXPECT_EQ(r4.rhs, "512");
    EXPECT_TRUE(r4.holds);

    auto r2 = verify_exact(InequalityId::garsia, pair);
    EXPECT_EQ(*r2.lhs_exact, 1);
    EXPECT_EQ(*r2.rhs_exact, frac(82, 5));
}

TEST(Verify, ExactLhsEqualsPermutationAverage)
{
    auto rng = test_rng(41);
    for (std::size_t n = 2; n <= 6; ++n) {
        auto pop = random_centered_population(n, rng);
        for (auto id : all_inequalities) {
            if (id == InequalityId::bridge)
                continue;
            auto p = params_for(id, n, rng);
            std::vector<Rational> a = p.weights.value_or(std::vector<Rational>{});
            auto r = verify_exact(id, pop, p);
            auto f = [&](const std::vector<Rational>& x) { return statistic(id, x, a); };
            Rational expected =
                id == InequalityId::hardy ? max_over_permutations(pop, f) : average_over_permutations(pop, f);
            EXPECT_EQ(*r.lhs_exact, expected) << to_string(id) << " n=" << n;
            EXPECT_TRUE(r.holds) << to_string(id) << " n=" << n;
        }
    }
    for (std::size_t m = 1; m <= 3; ++m) {
        auto pop = make_bridge_population(m);
        auto r = verify_exact(InequalityId::bridge, pop);
        EXPECT_EQ(*r.lhs_exact, average_over_permutations(pop, [](const std::vector<Rational>& x) {
                      return statistic(InequalityId::bridge, x, {});
                  }));
    }
}

TEST(Verify, HoldsOnRandomPopulations)
{
    auto rng = test_rng(42);
    for (int rep = 0; rep < 12; ++rep) {
        std::size_t n = 2 + rep % 5;
        auto pop = random_centered_population(n, rng);
        for (auto id : all_inequalities) {
            if (id == InequalityId::bridge)
                continue;
            EXPECT_TRUE(verify_exact(id, pop, params_for(id, n, rng)).holds) << to_string(id);
        }
    }
}

TEST(Verify, HardyNeedsNoCentering)
{
    auto pop = pop_of({1, 2, 3});
    EXPECT_THROW(verify_exact(InequalityId::max_averages, pop), PreconditionError);
    auto r = verify_exact(InequalityId::hardy, pop);
    EXPECT_TRUE(r.holds);
    EXPECT_EQ(*r.lhs_exact, max_over_permutations(pop, [](const std::vector<Rational>& x) {
                  return statistic(InequalityId::hardy, x, {});
              }));
}

TEST(Verify, CorruptedBoundIsDetected)
{
    auto pop = pop_of({1, 2, -3});
    InequalityParams p;
    p.rhs_scale = frac(1, 4);
    auto r = verify_exact(InequalityId::max_averages, pop, p);
    EXPECT_FALSE(r.holds);
    EXPECT_EQ(r.status, "fails");
    EXPECT_GT(*r.lhs_exact, *r.rhs_exact);
}

TEST(Vna, Examples)
{
    for (std::size_t n = 2; n <= 12; ++n) {
        auto alt = alternating_weights(n);
        EXPECT_EQ(vna(std::span<const Rational>(alt)), Rational(1) / Rational(static_cast<long>(n)));
        std::vector<Rational> ones(n, 1);
        EXPECT_EQ(vna(std::span<const Rational>(ones)),
                  Rational(static_cast<long>((n - 1) * (n - 1))) / Rational(static_cast<long>(n)));
    }
    std::vector<Rational> a{1, -1};
    EXPECT_EQ(vna(std::span<const Rational>(a)), frac(1, 2));
    std::vector<Rational> zero(4, 0);
    EXPECT_THROW(vna(std::span<const Rational>(zero)), DomainError);
}

TEST(FoldingConstant, NamedValues)
{
    EXPECT_EQ(folding_constant(FoldingPath::garsia, 9, 4), frac(41, 5));
    EXPECT_EQ(folding_constant(FoldingPath::alternating, 18, 0), frac(305, 17));
    EXPECT_EQ(frac(305, 17), 17 + frac(16, 17));
    EXPECT_EQ(folding_constant(FoldingPath::garsia_weighted, 81, 40), 80 + frac(4, 205));
    for (std::size_t n = 2; n <= 200; n += 2)
        EXPECT_EQ(folding_constant(FoldingPath::garsia_weighted, n, n / 2), 80) << n;
}

TEST(FoldingConstant, GarsiaWorstCaseIsNineAndFour)
{
    const Rational worst = frac(41, 5);
    for (std::size_t n = 8; n <= 2000; ++n) {
        Rational c = folding_constant(FoldingPath::garsia, n, n / 2);
        EXPECT_LE(c, worst) << n;
        if (n != 9)
            EXPECT_LT(c, worst) << n;
    }
    EXPECT_GT(folding_constant(FoldingPath::garsia, 7, 3), worst);
}

TEST(FoldingConstant, GarsiaWeightedWorstCaseIsEightyOne)
{
    const Rational worst = 80 + frac(4, 205);
    for (std::size_t n = 81; n <= 2001; ++n)
        EXPECT_LE(folding_constant(FoldingPath::garsia_weighted, n, n / 2), worst) << n;
}

TEST(FoldingConstant, AlternatingDecreasesAndCrossesAtEighteen)
{
    const Rational target = frac(305, 17);
    Rational prev = folding_constant(FoldingPath::alternating, 5, 0);
    for (std::size_t n = 6; n <= 10000; ++n) {
        Rational c = folding_constant(FoldingPath::alternating, n, 0);
        ASSERT_LT(c, prev) << n;
        prev = c;
    }
    for (std::size_t n = 2; n <= 10000; ++n) {
        Rational c = folding_constant(FoldingPath::alternating, n, 0);
        if (n < 18)
            EXPECT_GT(c, target) << n;
        else
            EXPECT_LE(c, target) << n;
    }
}

TEST(FoldingConstant, RangeErrors)
{
    EXPECT_THROW(folding_constant(FoldingPath::garsia, 5, 0), DomainError);
    EXPECT_THROW(folding_constant(FoldingPath::garsia, 5, 5), DomainError);
    EXPECT_THROW(folding_constant(FoldingPath::garsia_weighted, 5, 7), DomainError);
    EXPECT_THROW(folding_constant(FoldingPath::alternating, 1, 0), DomainError);
}

// E max_k (S_k/(n-k))^2 = E max_k (S_k/k)^2 by reversal of the ordering.
TEST(Properties, ReversalIdentity)
{
    auto rng = test_rng(43);
    for (std::size_t n = 2; n <= 8; ++n) {
        auto pop = random_centered_population(n, rng);
        Rational backward = average_over_permutations(pop, [n](const std::vector<Rational>& x) {
            std::vector<Rational> terms;
            for (std::size_t k = 1; k < n; ++k)
                terms.push_back(sq(prefix_sum(x, k) / Rational(static_cast<long>(n - k))));
            return max_of(terms);
        });
        EXPECT_EQ(backward, *verify_exact(InequalityId::max_averages, pop).lhs_exact) << n;
    }
}

TEST(Properties, CrudeFoldingIsSound)
{
    auto rng = test_rng(44);
    for (std::size_t n = 2; n <= 7; ++n) {
        auto pop = random_centered_population(n, rng);
        auto block_max = [](std::size_t lo, std::size_t hi) {
            return [lo, hi](const std::vector<Rational>& x) {
                Rational best = 0;
                for (std::size_t k = lo; k <= hi; ++k)
                    best = std::max(best, sq(prefix_sum(x, k)));
                return best;
            };
        };
        Rational whole = average_over_permutations(pop, block_max(1, n));
        for (std::size_t m = 1; m < n; ++m) {
            Rational split = average_over_permutations(pop, block_max(1, m)) +
                             average_over_permutations(pop, block_max(m + 1, n));
            EXPECT_LE(whole, split) << "n=" << n << " m=" << m;
        }
    }
}

// S_k^2 <= kB and W_k^2 <= alpha_2(n) B on every ordering.
TEST(Properties, CauchyFallbackPathwise)
{
    auto rng = test_rng(45);
    for (std::size_t n = 2; n <= 8; ++n) {
        auto pop = random_centered_population(n, rng);
        InequalityParams p;
        p.weights = random_weights(n, rng);
        const Rational nb = Rational(static_cast<long>(n)) * pop.sum_squares();
        const Rational ab = alpha2(std::span<const Rational>(*p.weights), n) * pop.sum_squares();
        PathStatistic<Rational> garsia(InequalityId::garsia, pop, {});
        PathStatistic<Rational> weighted(InequalityId::garsia_weighted, pop, p);
        for (PermutationIter it(n); !it.done(); it.advance()) {
            EXPECT_LE(garsia.evaluate(pop, it.current()), nb);
            EXPECT_LE(weighted.evaluate(pop, it.current()), ab);
        }
    }
}

TEST(MonteCarlo, DeterministicAndWorkerIndependent)
{
    auto rng = test_rng(46);
    auto pop = random_centered_population(7, rng);
    MonteCarloConfig mc{150000, 1234, 1};
    auto a = verify_monte_carlo(InequalityId::garsia, pop, {}, mc);
    auto b = verify_monte_carlo(InequalityId::garsia, pop, {}, mc);
    mc.workers = 3;
    auto c = verify_monte_carlo(InequalityId::garsia, pop, {}, mc);
    EXPECT_EQ(a.lhs, b.lhs);
    EXPECT_EQ(a.lhs, c.lhs);
    EXPECT_EQ(a.lhs_value, c.lhs_value);
    EXPECT_EQ(*a.standard_error, *c.standard_error);
    EXPECT_EQ(a.samples, 150000u);
    EXPECT_EQ(a.status, "consistent");

    mc.seed = 1235;
    EXPECT_NE(verify_monte_carlo(InequalityId::garsia, pop, {}, mc).lhs, a.lhs);
}

TEST(MonteCarlo, EstimateWithinFiveStandardErrorsOfExact)
{
    auto rng = test_rng(47);
    for (auto id : {InequalityId::max_averages, InequalityId::garsia, InequalityId::quadratic}) {
        auto pop = random_centered_population(6, rng);
        auto exact = verify_exact(id, pop);
        auto mc = verify_monte_carlo(id, pop, {}, MonteCarloConfig{200000, 99, 0});
        EXPECT_LE(std::abs(mc.lhs_value - exact.lhs_value), 5 * *mc.standard_error) << to_string(id);
        EXPECT_GT(*mc.standard_error, 0.0);
    }
}

TEST(MonteCarlo, ViolationSuspectedUnderCorruptedBound)
{
    auto pop = pop_of({1, 2, -3});
    InequalityParams p;
    p.rhs_scale = frac(1, 4);
    auto r = verify_monte_carlo(InequalityId::max_averages, pop, p, MonteCarloConfig{100000, 5, 0});
    EXPECT_FALSE(r.holds);
    EXPECT_EQ(r.status, "violation-suspected");
}

TEST(MonteCarlo, FloatPopulationInput)
{
    FloatPopulation pop(std::vector<double>{0.5, -1.25, 0.75});
    auto r = verify(InequalityId::garsia, pop, {}, VerifyMode::monte_carlo, MonteCarloConfig{20000, 3, 0});
    EXPECT_TRUE(r.holds);
    EXPECT_THROW(verify(InequalityId::garsia, pop, {}, VerifyMode::exact), InvalidInput);
}

TEST(Inequalities, ErrorPaths)
{
    auto four = pop_of({1, -1, 2, -2});
    InequalityParams none;
    EXPECT_THROW(verify_exact(InequalityId::vna_weighted, four, none), InvalidInput);
    InequalityParams short_w;
    short_w.weights = std::vector<Rational>{1, 2};
    EXPECT_THROW(verify_exact(InequalityId::garsia_weighted, four, short_w), InvalidInput);
    InequalityParams stray;
    stray.weights = std::vector<Rational>{1, 2, 3, 4};
    EXPECT_THROW(verify_exact(InequalityId::garsia, four, stray), InvalidInput);
    EXPECT_THROW(verify_exact(InequalityId::bridge, four), InvalidInput);
    InequalityParams wrong_m;
    wrong_m.bridge_m = 3;
    EXPECT_THROW(verify_exact(InequalityId::bridge, make_bridge_population(2), wrong_m), InvalidInput);
    EXPECT_THROW(verify_exact(InequalityId::garsia, pop_of({1, 2})), PreconditionError);
    EXPECT_THROW(lhs_statistic(InequalityId::garsia, four, {0, 1, 2}), InvalidInput);

    Population eleven(std::vector<Rational>(11, 0));
    EXPECT_THROW(verify_exact(InequalityId::garsia, eleven), CutoffExceeded);
    EXPECT_THROW(verify_monte_carlo(InequalityId::garsia, four, none, MonteCarloConfig{0, 1, 0}),
                 InvalidInput);
    EXPECT_THROW(parse_inequality_id("prop9"), InvalidInput);
    EXPECT_EQ(parse_inequality_id("garsia-weighted"), InequalityId::garsia_weighted);
}
