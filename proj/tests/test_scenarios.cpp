#include <scod/scenarios.hpp>

#include <gtest/gtest.h>

using namespace scod;

TEST(WorkedExamples, EveryNameBuildsAndMatchesItsExpectation)
{
    for (const auto& name : worked_example_names()) {
        const auto sc = build_worked_example<Rational>(name);
        ASSERT_TRUE(sc.expected) << name;
        EXPECT_EQ(sc.initial.dim(), sc.set.dim()) << name;
        EXPECT_FALSE(sc.provenance.empty());
        const auto t = simulate(sc.initial, sc.set, sc.roster, sc.limits);
        EXPECT_TRUE(sc.expected->matches(t.outcome)) << name << ": got " << to_string(kind_of(t.outcome));
    }
    EXPECT_THROW(build_worked_example<Rational>("ex9"), CatalogError);
    EXPECT_THROW(build_builtin<Rational>("nope"), CatalogError);
}

TEST(WorkedExamples, PeriodThreeCycleOfTheMiddleAgent)
{
    const auto sc = build_worked_example<Rational>("ex2_period3_scalar");
    const auto t = simulate(sc.initial, sc.set, sc.roster);
    std::vector<Rational> xs;
    for (const auto& st : t.states)
        xs.push_back(st[1][0]);
    EXPECT_EQ(xs, (std::vector<Rational>{6, 3, 5, 6}));
}

TEST(WorkedExamples, StubbornVariantsShareTheOrbit)
{
    const auto a = simulate(build_worked_example<Rational>("ex4_stubborn_oscillation_1d").initial,
                            build_worked_example<Rational>("ex4_stubborn_oscillation_1d").set,
                            build_worked_example<Rational>("ex4_stubborn_oscillation_1d").roster);
    const auto b = build_worked_example<Rational>("ex2_period3_scalar");
    const auto tb = simulate(b.initial, b.set, b.roster);
    ASSERT_EQ(a.states.size(), tb.states.size());
    for (std::size_t t = 0; t < a.states.size(); ++t)
        EXPECT_EQ(a.states[t].rows, tb.states[t].rows);
}

TEST(ExpectedOutcome, ComparesKindAndCycleData)
{
    const Outcome<Rational> p = Periodic<Rational>{0, 3, {}};
    EXPECT_TRUE((ExpectedOutcome{OutcomeKind::Periodic, 0, 3}.matches(p)));
    EXPECT_TRUE((ExpectedOutcome{OutcomeKind::Periodic, {}, {}}.matches(p)));
    EXPECT_FALSE((ExpectedOutcome{OutcomeKind::Periodic, 0, 2}.matches(p)));
    EXPECT_FALSE((ExpectedOutcome{OutcomeKind::Periodic, 1, 3}.matches(p)));
    EXPECT_FALSE((ExpectedOutcome{OutcomeKind::Terminated, {}, {}}.matches(p)));
}

TEST(BuildRandom, ReproducibleForAFixedSeed)
{
    const auto spec = stubborn_n100_spec(1, 123);
    const auto a = build_random<Rational>(spec);
    const auto b = build_random<Rational>(spec);
    EXPECT_EQ(a.initial.rows, b.initial.rows);
    EXPECT_EQ(a.roster.stubborn(), (std::vector<std::size_t>{0}));
    EXPECT_EQ(a.initial[0], (Vec<Rational>{0, 0}));
    const auto c = build_random<Rational>(stubborn_n100_spec(1, 124));
    EXPECT_NE(a.initial.rows, c.initial.rows);
    for (std::size_t i = 1; i < a.initial.n(); ++i)
        for (std::size_t k = 0; k < 2; ++k) {
            EXPECT_GE(a.initial[i][k], -1);
            EXPECT_LT(a.initial[i][k], 1);
        }
}

TEST(BuildRandom, DrawsFollowTheDocumentedFormula)
{
    // independent recomputation: low + (high - low) * (next() >> 32) / 2^32
    RandomSpec spec = stubborn_n100_spec(0, 77);
    spec.n = 3;
    const auto sc = build_random<Rational>(spec);
    std::uint64_t state = 77;
    auto next = [&state] {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    };
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t k = 0; k < 2; ++k) {
            const Rational u(Integer(next() >> 32), Integer(1) << 32);
            EXPECT_EQ(sc.initial[i][k], Rational(-1) + 2 * u);
        }
    EXPECT_TRUE(sc.roster.stubborn().empty());
    const auto fl = build_random<double>(spec);
    for (std::size_t i = 0; i < 3; ++i)
        EXPECT_EQ(fl.initial[i][0], to_double(sc.initial[i][0]));
}

TEST(BuildRandom, InvalidInputs)
{
    auto spec = stubborn_n100_spec(1, 1);
    spec.box_low = {1, -1};
    EXPECT_THROW(build_random<Rational>(spec), DomainError);
    spec = stubborn_n100_spec(101, 1);
    EXPECT_THROW(build_random<Rational>(spec), DomainError);
    spec = stubborn_n100_spec(1, 1);
    spec.stubborn_opinion = {0};
    EXPECT_THROW(build_random<Rational>(spec), DimensionError);
    spec = stubborn_n100_spec(1, 1);
    spec.d = 3;
    spec.box_low = {-1, -1, -1};
    spec.box_high = {1, 1, 1};
    spec.stubborn_opinion = {0, 0, 0};
    EXPECT_THROW(build_random<Rational>(spec), DimensionError);
}

TEST(Builtins, LargeExperimentsUseTheDocumentedSetup)
{
    const auto one = build_builtin<double>("one_stubborn_n100");
    EXPECT_EQ(one.initial.n(), 100u);
    EXPECT_EQ(one.roster.stubborn().size(), 1u);
    const auto fifty = build_builtin<double>("fifty_stubborn_n100");
    EXPECT_EQ(fifty.roster.stubborn().size(), 50u);
    for (std::size_t i : fifty.roster.stubborn())
        EXPECT_EQ(fifty.initial[i], (Vec<double>{0.0, 0.0}));
}
