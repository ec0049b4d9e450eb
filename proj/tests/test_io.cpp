#include <scod/io.hpp>

#include <gtest/gtest.h>

#include <sstream>

using namespace scod;

namespace {

const char* kMinimal = R"({
  "name": "pair",
  "set": {"name": "lp_ball", "params": {"d": 1, "p": 2, "R": "1/2"}},
  "agents": {"n": 2, "d": 1, "opinions": [["0"], ["1/3"]]},
  "limits": {"backend": "exact", "max_steps": 50},
  "expected": {"outcome": "terminated"}
})";

std::string parse_error_of(const std::string& text)
{
    try {
        parse_scenario_text(text);
    } catch (const ParseError& e) {
        return e.what();
    }
    return "";
}

} // namespace

TEST(ScenarioFile, MinimalDocument)
{
    const auto doc = parse_scenario_text(kMinimal);
    EXPECT_EQ(doc.name, "pair");
    EXPECT_EQ(doc.backend, Backend::Exact);
    EXPECT_EQ(doc.limits.max_steps, 50u);
    const auto sc = instantiate<Rational>(doc);
    EXPECT_EQ(sc.initial[1][0], Rational(1, 3));
    const auto t = simulate(sc.initial, sc.set, sc.roster, sc.limits);
    EXPECT_TRUE(sc.expected->matches(t.outcome));
    EXPECT_EQ(t.final_state()[0][0], Rational(1, 6));
}

TEST(ScenarioFile, DecimalLiteralsAreExact)
{
    std::string text = kMinimal;
    text.replace(text.find("\"1/3\""), 5, "0.1");
    const auto sc = instantiate<Rational>(parse_scenario_text(text));
    EXPECT_EQ(sc.initial[1][0], Rational(1, 10));
}

TEST(ScenarioFile, SyntaxErrorsReportLineAndColumn)
{
    const std::string err = parse_error_of("{\n  \"name\": \"x\",\n  oops\n}");
    EXPECT_NE(err.find("line 3"), std::string::npos) << err;
    EXPECT_NE(err.find("column"), std::string::npos) << err;
}

TEST(ScenarioFile, SchemaErrorsReportTheKeyPath)
{
    std::string text = kMinimal;
    text.replace(text.find("\"1/3\""), 5, "\"x\"");
    EXPECT_THROW(instantiate<Rational>(parse_scenario_text(text)), ParseError);
    try {
        instantiate<Rational>(parse_scenario_text(text));
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("agents.opinions[1][0]"), std::string::npos) << e.what();
    }
    EXPECT_NE(parse_error_of(R"({"set": {"name": "lp_ball"}})").find("missing key 'agents'"), std::string::npos);
    EXPECT_NE(parse_error_of(R"({"set": {"name": "lp_ball", "params": {"R": true}},
                                 "agents": {"n": 1, "d": 1, "opinions": [[0]]}})")
                  .find("set.params.R"),
              std::string::npos);
    EXPECT_NE(parse_error_of(R"({"set": {"name": "lp_ball"}, "agents": {"n": 2, "d": 1, "opinions": [[0]]}})")
                  .find("agents.opinions"),
              std::string::npos);
    EXPECT_NE(parse_error_of(R"({"set": {"name": "lp_ball"}, "agents": {"n": 1, "d": 1, "opinions": [[0]]},
                                 "stubborn": [2]})")
                  .find("stubborn[0]"),
              std::string::npos);
    EXPECT_NE(parse_error_of(R"({"set": {"name": "lp_ball"}, "agents": {"n": 1, "d": 1, "opinions": [[0]]},
                                 "limits": {"backend": "quad"}})")
                  .find("limits.backend"),
              std::string::npos);
    EXPECT_NE(parse_error_of(R"({"set": {"name": "lp_ball"}, "agents": {"n": 1, "d": 1, "opinions": [[0]]},
                                 "outputs": {"movie": "a.mp4"}})")
                  .find("outputs.movie"),
              std::string::npos);
}

TEST(ScenarioFile, SetDimensionMustMatchAgents)
{
    std::string text = kMinimal;
    text.replace(text.find("\"d\": 1,"), 7, "\"d\": 2,");
    EXPECT_THROW(instantiate<Rational>(parse_scenario_text(text)), DimensionError);
}

TEST(ScenarioFile, BackendIncompatibilityBeforeSimulation)
{
    const std::string text = R"({"set": {"name": "lp_ball", "params": {"p": "1/2"}},
                                 "agents": {"n": 1, "d": 2, "opinions": [[0, 0]]}})";
    EXPECT_THROW(instantiate<Rational>(parse_scenario_text(text)), BackendError);
    EXPECT_NO_THROW(instantiate<double>(parse_scenario_text(text)));
}

TEST(ScenarioFile, RandomAgentsAndOneBasedStubbornList)
{
    const std::string text = R"({
      "set": {"name": "min_coordinate", "params": {"d": 2, "eps": "0.1"}},
      "agents": {"n": 5, "d": 2, "random": {"seed": 9, "box": {"low": [-1, -1], "high": [1, 1]},
                 "stubborn_count": 2, "stubborn_opinion": [0, 0]}},
      "stubborn": [1, 2]
    })";
    const auto sc = instantiate<Rational>(parse_scenario_text(text));
    EXPECT_EQ(sc.roster.stubborn(), (std::vector<std::size_t>{0, 1}));
    auto spec = stubborn_n100_spec(2, 9);
    spec.n = 5;
    EXPECT_EQ(sc.initial.rows, build_random<Rational>(spec).initial.rows);

    std::string bad = text;
    bad.replace(bad.find("[1, 2]"), 6, "[4, 5]");
    EXPECT_THROW(parse_scenario_text(bad), ParseError);
}

TEST(Property, DescribeRoundTripReproducesTheTrajectory)
{
    for (const auto& name : worked_example_names()) {
        const auto sc = build_builtin<Rational>(name);
        const auto text = scenario_to_json(sc).dump(2);
        const auto again = instantiate<Rational>(parse_scenario_text(text));
        EXPECT_EQ(again.roster.stubborn(), sc.roster.stubborn());
        const auto a = simulate(sc.initial, sc.set, sc.roster, sc.limits);
        const auto b = simulate(again.initial, again.set, again.roster, again.limits);
        ASSERT_EQ(a.states.size(), b.states.size()) << name;
        for (std::size_t t = 0; t < a.states.size(); ++t)
            EXPECT_EQ(a.states[t].rows, b.states[t].rows) << name;
        EXPECT_EQ(outcome_to_json(a.outcome), outcome_to_json(b.outcome));
        EXPECT_EQ(scenario_to_json(again).dump(2), text);
    }
}

TEST(Property, DescribeRoundTripRandomFloatScenario)
{
    const auto sc = build_builtin<double>("fifty_stubborn_n100");
    const auto doc = parse_scenario_text(scenario_to_json(sc).dump());
    EXPECT_EQ(doc.backend, Backend::Float);
    const auto again = instantiate<double>(doc);
    EXPECT_EQ(again.initial.rows, sc.initial.rows);
    EXPECT_FALSE(again.limits.record_neighbors);
}

TEST(TrajectoryCsv, HeaderAndPeriodThreeRows)
{
    const auto sc = build_worked_example<Rational>("ex2_period3_scalar");
    const auto t = simulate(sc.initial, sc.set, sc.roster);
    std::ostringstream os;
    write_trajectory_csv(os, t, sc.roster);
    std::istringstream lines(os.str());
    std::string line;
    std::vector<std::string> rows;
    while (std::getline(lines, line))
        rows.push_back(line);
    ASSERT_EQ(rows.size(), 1u + 3 * 4);
    EXPECT_EQ(rows[0], "t,agent,coord_0,stubborn,float_0");
    EXPECT_EQ(rows[1], "0,1,0,0,0");
    EXPECT_EQ(rows[2], "0,2,6,0,6");
    EXPECT_EQ(rows[3], "0,3,7,0,7");
    EXPECT_EQ(rows[5], "1,2,3,0,3");
}

TEST(TrajectoryCsv, ExactValuesSurviveTheRoundTrip)
{
    const auto sc = build_worked_example<Rational>("ex5_cross_infinite");
    const auto t = simulate(sc.initial, sc.set, sc.roster);
    std::stringstream ss;
    write_trajectory_csv(ss, t, sc.roster);
    EXPECT_NE(ss.str().find("1/3"), std::string::npos);
    const auto back = read_trajectory_csv<Rational>(ss);
    ASSERT_EQ(back.size(), t.states.size());
    for (std::size_t i = 0; i < back.size(); ++i)
        EXPECT_EQ(back[i].rows, t.states[i].rows);
}

TEST(TrajectoryCsv, StubbornColumnAndFloatColumns)
{
    auto spec = stubborn_n100_spec(1, 3);
    spec.n = 10;
    const auto sc = build_random<double>(spec);
    const auto t = simulate(sc.initial, sc.set, sc.roster, sc.limits);
    std::stringstream ss;
    write_trajectory_csv(ss, t, sc.roster);
    std::string header, first;
    std::getline(ss, header);
    std::getline(ss, first);
    EXPECT_EQ(header, "t,agent,coord_0,coord_1,stubborn,float_0,float_1");
    EXPECT_EQ(first, "0,1,0,0,1,0,0");
    std::size_t rows = 0;
    for (std::string l; std::getline(ss, l);)
        ++rows;
    EXPECT_EQ(rows + 1, 10 * t.states.size());
}

TEST(TrajectoryCsv, EmptyTrajectoryRejected)
{
    Trajectory<Rational> empty;
    std::ostringstream os;
    EXPECT_THROW(write_trajectory_csv(os, empty, AgentRoster(1)), DomainError);
}

TEST(Plotdata, SeriesCycleAndClusters)
{
    const auto sc = build_worked_example<Rational>("ex2_period3_scalar");
    const auto t = simulate(sc.initial, sc.set, sc.roster);
    const auto j = plotdata_json(sc.name, t, sc.roster, clusters(t.final_state(), Rational(0)));
    EXPECT_EQ(j["schema"], kPlotdataSchema);
    EXPECT_EQ(j["agents"].size(), 3u);
    EXPECT_EQ(j["agents"][1]["agent"], 2);
    EXPECT_EQ(j["agents"][1]["series"][0], json::parse("[6.0, 3.0, 5.0, 6.0]"));
    EXPECT_EQ(j["cycle"]["period"], 3);
    EXPECT_EQ(j["cycle"]["offset"], 0);
    EXPECT_EQ(j["clusters"]["count"], 3);

    const auto ball = lp_ball<Rational>(1, Exponent::of(2), 1);
    const auto term = simulate(state_of<Rational>({{0}, {Rational(1, 2)}}), ball, AgentRoster(2));
    const auto jt = plotdata_json("t", term, AgentRoster(2), clusters(term.final_state(), Rational(0)));
    EXPECT_FALSE(jt.contains("cycle"));
    EXPECT_EQ(jt["clusters"]["assignment"], json::parse("[0, 0]"));
}

TEST(Report, SchemaVersionedDocument)
{
    const auto sc = build_worked_example<Rational>("ex3_period2_star");
    const auto t = simulate(sc.initial, sc.set, sc.roster);
    const auto hyp = check_hypotheses(sc.set, sc.initial, sc.roster, t);
    const auto claims = verify_convergence_claims(t, hyp, sc.set, sc.roster);
    const auto j = report_json(sc, t, hyp, claims, clusters(t.final_state(), Rational(0)), RunTiming{1.0, 2.0});
    EXPECT_EQ(j["schema"], kReportSchema);
    EXPECT_EQ(j["outcome"]["kind"], "periodic");
    EXPECT_EQ(j["outcome"]["period"], 2);
    EXPECT_EQ(j["hypotheses"]["assumption2_symmetry"], false);
    EXPECT_EQ(j["expected_matches"], true);
    EXPECT_EQ(j["claims"].size(), claims.size());
    EXPECT_TRUE(j["timing_ms"].contains("simulate"));
}

TEST(Counterexample, ReplayableFromTheDump)
{
    const auto sc = build_worked_example<Rational>("ex2_period3_scalar");
    const auto t = simulate(sc.initial, sc.set, sc.roster);
    std::vector<ClaimCheck> claims = {{"made-up claim", true, false, "forced"}};
    const auto j = counterexample_json(sc, t, claims);
    EXPECT_EQ(j["schema"], kCounterexampleSchema);
    EXPECT_EQ(j["violations"].size(), 1u);
    EXPECT_EQ(j["final_state"], json::parse(R"([["0"], ["6"], ["7"]])"));
    const auto replay = instantiate<Rational>(parse_scenario(j["scenario"]));
    EXPECT_EQ(replay.initial.rows, sc.initial.rows);
}

TEST(AtomicWrite, ReplacesTheTarget)
{
    const auto dir = std::filesystem::temp_directory_path() / "scod_io_test";
    std::filesystem::remove_all(dir);
    const auto path = dir / "nested" / "out.txt";
    write_file_atomic(path, "first");
    write_file_atomic(path, "second");
    std::ifstream in(path);
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    EXPECT_EQ(content, "second");
    std::size_t files = 0;
    for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(path.parent_path()))
        ++files;
    EXPECT_EQ(files, 1u);
    std::filesystem::remove_all(dir);
}
