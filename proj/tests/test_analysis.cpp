#include <scod/scenarios.hpp>

#include <gtest/gtest.h>

using namespace scod;

namespace {

Rational q(long p, long r = 1)
{
    return Rational(p, r);
}

OpinionState<Rational> scalars(std::initializer_list<long> xs)
{
    std::vector<Vec<Rational>> rows;
    for (long x : xs)
        rows.push_back(Vec<Rational>{Rational(x)});
    return OpinionState<Rational>(std::move(rows));
}

} // namespace

TEST(Clustered, BasicCases)
{
    const auto ball = lp_ball<Rational>(1, Exponent::of(2), 1);
    EXPECT_TRUE(is_clustered(scalars({4, 4, 4}), ball));
    EXPECT_TRUE(is_clustered(scalars({0, 2}), ball));
    EXPECT_FALSE(is_clustered(scalars({0, 1}), ball));
    const auto sc = build_worked_example<Rational>("ex2_period3_scalar");
    // -6 lies in the set: agent 2 trusts agent 1 while their opinions differ
    EXPECT_FALSE(is_clustered(sc.initial, sc.set));
    EXPECT_FALSE(is_equilibrium(sc.initial, sc.set, sc.roster));
}

TEST(Equilibrium, ClusteredStatesAreFixed)
{
    const auto ball = lp_ball<Rational>(1, Exponent::of(2), 1);
    EXPECT_TRUE(is_equilibrium(scalars({0, 0, 5, 5, 9}), ball, AgentRoster(5)));
}

TEST(Equilibrium, DerivedTriangleInstance)
{
    const auto sc = build_worked_example<Rational>("ex1_nonclustered_equilibrium");
    EXPECT_TRUE(is_equilibrium(sc.initial, sc.set, sc.roster));
    EXPECT_FALSE(is_clustered(sc.initial, sc.set));
    const auto g = confidence_graph(sc.initial, sc.set, sc.roster);
    EXPECT_FALSE(g.is_disjoint_cliques());
    EXPECT_TRUE(g.has_all_self_loops());
    // agent 1 trusts everyone, nobody trusts agent 1 back
    EXPECT_EQ(g.out[0], (NeighborSet{0, 1, 2, 3}));
    const auto comps = g.strongly_connected_components();
    EXPECT_EQ(comps.size(), 4u);
    // the construction scales with the radius and works in floats too
    EXPECT_NO_THROW(derive_triangle_equilibrium<Rational>(q(5, 2)));
    EXPECT_NO_THROW(derive_triangle_equilibrium<double>(q(1)));
}

TEST(Clusters, PartitionByEquality)
{
    const auto p = clusters(scalars({0, 0, 7, 7}), Rational(0));
    ASSERT_EQ(p.size(), 2u);
    EXPECT_EQ(p.blocks[0], (std::vector<std::size_t>{0, 1}));
    EXPECT_EQ(p.blocks[1], (std::vector<std::size_t>{2, 3}));
    EXPECT_EQ(p.assignment(4), (std::vector<std::size_t>{0, 0, 1, 1}));
    EXPECT_EQ(clusters(scalars({3}), Rational(0)).size(), 1u);
    EXPECT_THROW(clusters(scalars({0, 1}), Rational(1, 2)), DomainError);
}

TEST(Clusters, FloatToleranceChainsNearbyOpinions)
{
    const OpinionState<double> st({Vec<double>{0.0}, Vec<double>{1e-9}, Vec<double>{2e-9}, Vec<double>{1.0}});
    EXPECT_EQ(clusters(st, 1.5e-9).size(), 2u);
    EXPECT_EQ(clusters(st, 0.0).size(), 4u);
    EXPECT_THROW(clusters(st, -1.0), DomainError);
}

TEST(Graph, CliquesAndStubbornNodes)
{
    const auto ball = lp_ball<Rational>(1, Exponent::of(2), 1);
    const auto g = confidence_graph(scalars({0, 0, 5, 5}), ball, AgentRoster(4));
    EXPECT_TRUE(g.is_disjoint_cliques());
    EXPECT_EQ(g.strongly_connected_components().size(), 2u);
    const auto gs = confidence_graph(scalars({0, 0, 5, 5}), ball, AgentRoster(4, {1}));
    EXPECT_EQ(gs.out[1], (NeighborSet{1}));
    EXPECT_FALSE(gs.is_symmetric());

    const auto sc = build_worked_example<Rational>("ex2_period3_scalar");
    const auto g2 = confidence_graph(sc.initial, sc.set, sc.roster);
    EXPECT_FALSE(g2.is_disjoint_cliques());
}

TEST(Graph, DotExport)
{
    const auto ball = lp_ball<Rational>(1, Exponent::of(2), 1);
    const auto dot = to_dot(confidence_graph(scalars({0, 0, 5, 5}), ball, AgentRoster(4, {3})), "g");
    EXPECT_EQ(dot.rfind("digraph g {", 0), 0u);
    EXPECT_NE(dot.find("1 -> 2;"), std::string::npos);
    EXPECT_NE(dot.find("2 -> 1;"), std::string::npos);
    EXPECT_EQ(dot.find("1 -> 3;"), std::string::npos);
    EXPECT_NE(dot.find("4 [label=\"4\", shape=box"), std::string::npos);
    EXPECT_EQ(dot.find("4 -> 3;"), std::string::npos);

    const auto single = to_dot(confidence_graph(scalars({1}), ball, AgentRoster(1)));
    EXPECT_NE(single.find("1 -> 1;"), std::string::npos);
    EXPECT_EQ(single.find("->"), single.rfind("->"));
}

TEST(Hypotheses, FlagsFollowTheSet)
{
    {
        const auto set = lp_ball<Rational>(2, Exponent::of(1), 1);
        const auto init = state_of<Rational>({{0, 0}, {q(1, 2), 0}, {q(3, 2), q(1, 4)}, {3, 3}});
        const auto t = simulate(init, set, AgentRoster(4));
        const auto rep = check_hypotheses(set, init, AgentRoster(4), t);
        EXPECT_TRUE(rep.assumption1);
        EXPECT_TRUE(rep.assumption2_symmetry);
        EXPECT_TRUE(rep.assumption3_zero_neighborhood);
        EXPECT_TRUE(rep.assumption4_homogeneous_stubborn);
        ASSERT_TRUE(rep.type_symmetry_K);
        EXPECT_LE(*rep.type_symmetry_K, 4);
        EXPECT_GE(*rep.type_symmetry_K, 1);
        EXPECT_GE(rep.diagonal_delta, q(1, 4));
        EXPECT_LE(rep.diagonal_delta, 1);
    }
    {
        const auto sc = build_worked_example<Rational>("ex3_period2_star");
        const auto t = simulate(sc.initial, sc.set, sc.roster);
        EXPECT_FALSE(check_hypotheses(sc.set, sc.initial, sc.roster, t).assumption2_symmetry);
    }
    {
        const auto sc = build_worked_example<Rational>("ex5_cross_infinite");
        const auto t = simulate(sc.initial, sc.set, sc.roster);
        const auto rep = check_hypotheses(sc.set, sc.initial, sc.roster, t);
        EXPECT_TRUE(rep.assumption2_symmetry);
        EXPECT_FALSE(rep.assumption3_zero_neighborhood);
    }
}

TEST(Claims, NoClaimAssertedWhenHypothesesFail)
{
    for (const auto* name : {"ex4_stubborn_oscillation_2d", "ex4_stubborn_oscillation_1d", "ex2_period3_scalar"}) {
        const auto sc = build_worked_example<Rational>(name);
        const auto t = simulate(sc.initial, sc.set, sc.roster);
        const auto rep = check_hypotheses(sc.set, sc.initial, sc.roster, t);
        for (const auto& c : verify_convergence_claims(t, rep, sc.set, sc.roster)) {
            EXPECT_FALSE(c.applicable) << name << ": " << c.claim;
            EXPECT_FALSE(c.violated());
        }
    }
}

TEST(Claims, TerminationOnLinfBall)
{
    SplitMix64 rng(31);
    const auto set = lp_ball<Rational>(2, Exponent::inf(), q(1, 2));
    std::vector<Vec<Rational>> rows;
    for (int i = 0; i < 10; ++i)
        rows.push_back(Vec<Rational>{Rational(rng.between(-16, 16), 8), Rational(rng.between(-16, 16), 8)});
    const OpinionState<Rational> init(rows);
    const auto t = simulate(init, set, AgentRoster(10));
    ASSERT_TRUE(std::holds_alternative<Terminated<Rational>>(t.outcome));
    EXPECT_TRUE(is_clustered(t.final_state(), set));
    const auto claims = verify_convergence_claims(t, check_hypotheses(set, init, AgentRoster(10), t), set, AgentRoster(10));
    for (const auto& c : claims) {
        if (c.claim.rfind("D: each", 0) == 0)
            EXPECT_FALSE(c.applicable);
        else
            EXPECT_TRUE(c.applicable && c.holds) << c.claim << " " << c.detail;
    }
}

TEST(Claims, StubbornAgentAtZeroFloat)
{
    auto spec = stubborn_n100_spec(1, 5);
    spec.n = 30;
    const auto sc = build_random<double>(spec);
    const auto t = simulate(sc.initial, sc.set, sc.roster, sc.limits);
    const auto rep = check_hypotheses(sc.set, sc.initial, sc.roster, t);
    const auto claims = verify_convergence_claims(t, rep, sc.set, sc.roster);
    ASSERT_EQ(claims.size(), 6u);
    EXPECT_TRUE(claims[5].applicable);
    EXPECT_TRUE(claims[5].holds) << claims[5].detail;
}

// ---------------------------------------------------------------------------
// Properties.

TEST(Property, SymmetricSetsGiveUndirectedGraphs)
{
    SplitMix64 rng(41);
    const std::vector<ConfidenceSet<Rational>> sets = {
        lp_ball<Rational>(2, Exponent::of(2), 1), min_coordinate<Rational>(2, q(1, 4)), cross_lines<Rational>(2),
        lines_ball<Rational>(q(1, 5), q(1, 2))};
    for (int trial = 0; trial < 40; ++trial) {
        const auto& set = sets[rng.below(sets.size())];
        std::vector<Vec<Rational>> rows;
        for (int i = 0; i < 6; ++i)
            rows.push_back(Vec<Rational>{Rational(rng.between(-8, 8), 4), Rational(rng.between(-8, 8), 4)});
        Limits lim;
        lim.max_steps = 30;
        const auto t = simulate(OpinionState<Rational>(rows), set, AgentRoster(6), lim);
        for (const auto& st : t.states)
            EXPECT_TRUE(confidence_graph(st, set, AgentRoster(6)).is_symmetric());
    }
}

TEST(Property, TwoAgentsUnderStarShapedSetsFreezeOrMeet)
{
    // star-shaped sets, symmetric or not
    SplitMix64 rng(43);
    const std::vector<ConfidenceSet<Rational>> sets = {
        star_rays<Rational>(q(1, 5), 1), triangle<Rational>(1), lp_ball<Rational>(2, Exponent::of(1), 1),
        cross_lines<Rational>(2), min_coordinate<Rational>(2, q(1, 3))};
    for (int trial = 0; trial < 400; ++trial) {
        const auto& set = sets[rng.below(sets.size())];
        ASSERT_TRUE(is_star_shaped_certified(set, 50, 5, 1));
        auto coord = [&] { return Rational(rng.between(-12, 12), 4); };
        const OpinionState<Rational> init({Vec<Rational>{coord(), coord()}, Vec<Rational>{coord(), coord()}});
        Limits lim;
        lim.max_steps = 200;
        const auto t = simulate(init, set, AgentRoster(2), lim);
        const bool frozen = t.final_state().same_opinions(init);
        const bool met = t.final_state()[0] == t.final_state()[1];
        const bool approaching = std::holds_alternative<ConvergentNonTerminating<Rational>>(t.outcome);
        EXPECT_TRUE(frozen || met || approaching) << to_string(kind_of(t.outcome));
        EXPECT_FALSE(std::holds_alternative<Periodic<Rational>>(t.outcome));
    }
}

TEST(Property, EquilibriumIffClusteredOnRandomStates)
{
    SplitMix64 rng(47);
    const std::vector<ConfidenceSet<Rational>> sets = {
        lp_ball<Rational>(2, Exponent::of(2), 1), lp_ball<Rational>(2, Exponent::inf(), 1),
        min_coordinate<Rational>(2, q(1, 2)), punctured_interval<Rational>(-3, 3, {1, -1})};
    for (int trial = 0; trial < 400; ++trial) {
        const auto& set = sets[rng.below(sets.size())];
        const std::size_t n = 2 + rng.below(5);
        std::vector<Vec<Rational>> rows;
        for (std::size_t i = 0; i < n; ++i) {
            Vec<Rational> v(set.dim());
            for (std::size_t k = 0; k < set.dim(); ++k)
                v[k] = Rational(rng.between(-3, 3));
            rows.push_back(std::move(v));
        }
        const OpinionState<Rational> st(rows);
        EXPECT_EQ(is_equilibrium(st, set, AgentRoster(n)), is_clustered(st, set));
    }
}

TEST(Search, PreconditionsAndControl)
{
    EXPECT_THROW(search_period2(punctured_interval_family(), 0, 1), DomainError);
    EXPECT_THROW(search_period2_n3(star_rays_control_family(), 10, 1), DomainError);
    EXPECT_THROW(search_family_by_name("nope"), CatalogError);
    const auto res = search_period2(star_rays_control_family(), 200, 1);
    ASSERT_FALSE(res.period2.empty());
    bool found_known = false;
    for (const auto& hit : res.period2)
        for (const auto& st : hit.cycle_states)
            if (st[0] == Vec<Rational>{2, 0})
                found_known = true;
    EXPECT_TRUE(found_known);
}

TEST(Search, ThreeAgentPeriodTwoUnderAsymmetricPunctures)
{
    // Agent 3 alternates between trusting {2} (offset 4) and {1, 2} (offsets -8, 2);
    // offsets 6, 8, 10, -2, -4, -10 are untrusted, so agents 1 and 2 never move.
    const auto set = punctured_interval<Rational>(-9, 9, {-7, -6, -5, -4, -2, -1, 1, 3, 5, 6, 7, 8});
    const OpinionState<Rational> init({Vec<Rational>{-10}, Vec<Rational>{4}, Vec<Rational>{-4}});
    const auto traj = simulate(init, set, AgentRoster(3));
    const auto* p = std::get_if<Periodic<Rational>>(&traj.outcome);
    ASSERT_NE(p, nullptr);
    EXPECT_EQ(p->offset, 1u);
    EXPECT_EQ(p->period, 2u);
    EXPECT_EQ(traj.states[1][2], Vec<Rational>{-4});
    EXPECT_EQ(traj.states[2][2], Vec<Rational>{-2});
    EXPECT_EQ(traj.states[1][1], Vec<Rational>{0});

    const auto hits = search_period2_n3(punctured_interval_family(), 10000, 1);
    ASSERT_FALSE(hits.period2.empty());
    for (const auto& hit : hits.period2) {
        const auto s = catalog_build<Rational>(hit.set);
        EXPECT_FALSE(is_symmetric_certified(s, 500, 1)) << "trial " << hit.trial;
    }
}
