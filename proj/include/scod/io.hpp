#pragma once

// Serialization: scenario files (JSON), trajectory CSV, plot data, run
// reports and counterexample dumps. Agent identifiers in every serialized
// form are 1-based; the library API is 0-based.

#include "scenarios.hpp"

#include <nlohmann/json.hpp>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>

namespace scod {

using json = nlohmann::json;

inline constexpr const char* kScenarioSchema = "scod-scenario/1";
inline constexpr const char* kReportSchema = "scod-report/1";
inline constexpr const char* kPlotdataSchema = "scod-plotdata/1";
inline constexpr const char* kCounterexampleSchema = "scod-counterexample/1";

/// Backend-independent contents of a scenario file. Numeric literals are
/// kept as text until the backend is known.
struct ScenarioDoc
{
    std::string name = "scenario";
    std::string provenance;
    SetSpec set;
    std::size_t n = 0;
    std::size_t d = 0;
    std::optional<std::vector<std::vector<std::string>>> opinions;
    std::optional<RandomSpec> random;
    std::vector<std::size_t> stubborn; // 0-based
    Backend backend = Backend::Exact;
    Limits limits;
    std::map<std::string, std::string> outputs;
    std::optional<ExpectedOutcome> expected;
};

namespace detail {

[[noreturn]] inline void fail_at(const std::string& path, const std::string& what)
{
    throw ParseError(path + ": " + what);
}

inline const json& require_key(const json& obj, const std::string& key, const std::string& path)
{
    if (!obj.is_object())
        fail_at(path, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end())
        fail_at(path, "missing key '" + key + "'");
    return *it;
}

/// Numbers are read from their decimal text so no binary rounding sneaks in.
inline std::string number_text(const json& v, const std::string& path)
{
    if (v.is_string())
        return v.get<std::string>();
    if (v.is_number())
        return v.dump();
    fail_at(path, "expected a number or a numeric string");
}

inline Rational rational_at(const json& v, const std::string& path)
{
    try {
        return parse_rational(number_text(v, path));
    } catch (const ParseError& e) {
        fail_at(path, e.what());
    }
}

inline std::size_t count_at(const json& v, const std::string& path)
{
    if (!v.is_number_integer() || v.get<long long>() < 0)
        fail_at(path, "expected a non-negative integer");
    return v.get<std::size_t>();
}

inline std::vector<Rational> rational_list(const json& v, const std::string& path)
{
    if (!v.is_array())
        fail_at(path, "expected an array");
    std::vector<Rational> out;
    for (std::size_t i = 0; i < v.size(); ++i)
        out.push_back(rational_at(v[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

inline SetSpec parse_set_spec(const json& j, const std::string& path)
{
    SetSpec spec;
    const json& name = require_key(j, "name", path);
    if (!name.is_string())
        fail_at(path + ".name", "expected a string");
    spec.name = name.get<std::string>();
    if (auto it = j.find("params"); it != j.end()) {
        if (!it->is_object())
            fail_at(path + ".params", "expected an object");
        for (const auto& [key, value] : it->items()) {
            const std::string p = path + ".params." + key;
            if (value.is_array()) {
                spec.params[key] = rational_list(value, p);
            } else if (value.is_number()) {
                spec.params[key] = rational_at(value, p);
            } else if (value.is_string()) {
                try {
                    spec.params[key] = parse_rational(value.get<std::string>());
                } catch (const ParseError&) {
                    spec.params[key] = value.get<std::string>();
                }
            } else {
                fail_at(p, "expected a number, string or array");
            }
        }
    }
    if (auto it = j.find("parts"); it != j.end()) {
        if (!it->is_array())
            fail_at(path + ".parts", "expected an array");
        for (std::size_t i = 0; i < it->size(); ++i)
            spec.parts.push_back(parse_set_spec((*it)[i], path + ".parts[" + std::to_string(i) + "]"));
    }
    return spec;
}

inline json param_to_json(const ParamValue& v)
{
    if (const auto* q = std::get_if<Rational>(&v))
        return to_string(*q);
    if (const auto* s = std::get_if<std::string>(&v))
        return *s;
    json arr = json::array();
    for (const auto& q : std::get<std::vector<Rational>>(v))
        arr.push_back(to_string(q));
    return arr;
}

inline json set_spec_to_json(const SetSpec& spec)
{
    json j;
    j["name"] = spec.name;
    json params = json::object();
    for (const auto& [k, v] : spec.params)
        params[k] = param_to_json(v);
    j["params"] = params;
    if (!spec.parts.empty()) {
        json parts = json::array();
        for (const auto& p : spec.parts)
            parts.push_back(set_spec_to_json(p));
        j["parts"] = parts;
    }
    return j;
}

inline std::vector<std::string> rational_strings(const std::vector<Rational>& v)
{
    std::vector<std::string> out;
    for (const auto& q : v)
        out.push_back(to_string(q));
    return out;
}

inline std::pair<std::size_t, std::size_t> line_col(const std::string& text, std::size_t byte)
{
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

} // namespace detail

inline ScenarioDoc parse_scenario(const json& j)
{
    using namespace detail;
    ScenarioDoc doc;
    if (!j.is_object())
        fail_at("$", "scenario must be a JSON object");
    if (auto it = j.find("schema"); it != j.end() && *it != kScenarioSchema)
        fail_at("schema", "unsupported schema " + it->dump());
    if (auto it = j.find("name"); it != j.end())
        doc.name = it->get<std::string>();
    if (auto it = j.find("provenance"); it != j.end())
        doc.provenance = it->get<std::string>();
    doc.set = parse_set_spec(require_key(j, "set", "$"), "set");

    const json& agents = require_key(j, "agents", "$");
    doc.n = count_at(require_key(agents, "n", "agents"), "agents.n");
    doc.d = count_at(require_key(agents, "d", "agents"), "agents.d");
    if (doc.n == 0 || doc.d == 0)
        fail_at("agents", "n and d must be positive");
    const bool has_ops = agents.contains("opinions");
    const bool has_rand = agents.contains("random");
    if (has_ops == has_rand)
        fail_at("agents", "exactly one of 'opinions' or 'random' is required");
    if (has_ops) {
        const json& ops = agents["opinions"];
        if (!ops.is_array() || ops.size() != doc.n)
            fail_at("agents.opinions", "expected an array of " + std::to_string(doc.n) + " rows");
        std::vector<std::vector<std::string>> rows;
        for (std::size_t i = 0; i < ops.size(); ++i) {
            const std::string p = "agents.opinions[" + std::to_string(i) + "]";
            if (!ops[i].is_array() || ops[i].size() != doc.d)
                fail_at(p, "expected " + std::to_string(doc.d) + " coordinates");
            std::vector<std::string> row;
            for (std::size_t k = 0; k < doc.d; ++k)
                row.push_back(number_text(ops[i][k], p + "[" + std::to_string(k) + "]"));
            rows.push_back(std::move(row));
        }
        doc.opinions = std::move(rows);
    } else {
        const json& r = agents["random"];
        RandomSpec rs;
        rs.n = doc.n;
        rs.d = doc.d;
        rs.set = doc.set;
        rs.seed = require_key(r, "seed", "agents.random").get<std::uint64_t>();
        const json& box = require_key(r, "box", "agents.random");
        rs.box_low = rational_list(require_key(box, "low", "agents.random.box"), "agents.random.box.low");
        rs.box_high = rational_list(require_key(box, "high", "agents.random.box"), "agents.random.box.high");
        if (auto it = r.find("stubborn_count"); it != r.end())
            rs.stubborn_count = count_at(*it, "agents.random.stubborn_count");
        if (auto it = r.find("stubborn_opinion"); it != r.end())
            rs.stubborn_opinion = rational_list(*it, "agents.random.stubborn_opinion");
        if (auto it = r.find("grid_bits"); it != r.end())
            rs.grid_bits = static_cast<unsigned>(count_at(*it, "agents.random.grid_bits"));
        doc.random = std::move(rs);
    }

    if (auto it = j.find("stubborn"); it != j.end()) {
        if (!it->is_array())
            fail_at("stubborn", "expected an array of 1-based agent indices");
        for (std::size_t i = 0; i < it->size(); ++i) {
            const std::size_t a = count_at((*it)[i], "stubborn[" + std::to_string(i) + "]");
            if (a < 1 || a > doc.n)
                fail_at("stubborn[" + std::to_string(i) + "]", "agent index out of range 1.." + std::to_string(doc.n));
            doc.stubborn.push_back(a - 1);
        }
    }
    if (doc.random) {
        std::vector<std::size_t> implied;
        for (std::size_t i = 0; i < doc.random->stubborn_count; ++i)
            implied.push_back(i);
        if (!doc.stubborn.empty() && doc.stubborn != implied)
            fail_at("stubborn", "random scenarios place stubborn agents at 1..stubborn_count");
        doc.stubborn = implied;
    }

    if (auto it = j.find("limits"); it != j.end()) {
        const json& l = *it;
        if (!l.is_object())
            fail_at("limits", "expected an object");
        if (auto b = l.find("backend"); b != l.end()) {
            try {
                doc.backend = parse_backend(b->get<std::string>());
            } catch (const ParseError& e) {
                fail_at("limits.backend", e.what());
            }
        }
        if (auto m = l.find("max_steps"); m != l.end())
            doc.limits.max_steps = count_at(*m, "limits.max_steps");
        if (auto t = l.find("tolerance"); t != l.end())
            doc.limits.float_tolerance = to_double(rational_at(*t, "limits.tolerance"));
        if (auto c = l.find("cycle_check"); c != l.end())
            doc.limits.cycle_check = c->get<bool>();
        if (auto w = l.find("convergence_window"); w != l.end())
            doc.limits.convergence_window = count_at(*w, "limits.convergence_window");
        if (auto w = l.find("float_window"); w != l.end())
            doc.limits.float_window = count_at(*w, "limits.float_window");
        if (auto r = l.find("record_neighbors"); r != l.end())
            doc.limits.record_neighbors = r->get<bool>();
    }
    if (auto it = j.find("outputs"); it != j.end()) {
        for (const auto& [key, value] : it->items()) {
            if (key != "trajectory" && key != "graph" && key != "report" && key != "plotdata")
                fail_at("outputs." + key, "unknown output kind");
            doc.outputs[key] = value.get<std::string>();
        }
    }
    if (auto it = j.find("expected"); it != j.end()) {
        ExpectedOutcome e;
        try {
            e.kind = parse_outcome_kind(require_key(*it, "outcome", "expected").get<std::string>());
        } catch (const ParseError& err) {
            fail_at("expected.outcome", err.what());
        }
        if (auto o = it->find("offset"); o != it->end())
            e.offset = count_at(*o, "expected.offset");
        if (auto p = it->find("period"); p != it->end())
            e.period = count_at(*p, "expected.period");
        doc.expected = e;
    }
    return doc;
}

/// Parses scenario text; JSON syntax errors report line and column.
inline ScenarioDoc parse_scenario_text(const std::string& text)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        const auto [line, col] = detail::line_col(text, e.byte == 0 ? 0 : e.byte - 1);
        throw ParseError("line " + std::to_string(line) + ", column " + std::to_string(col) + ": malformed JSON ("
                         + e.what() + ")");
    }
    try {
        return parse_scenario(j);
    } catch (const json::exception& e) {
        throw ParseError(std::string("invalid scenario: ") + e.what());
    }
}

inline ScenarioDoc load_scenario_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open scenario file '" + path.string() + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_scenario_text(text);
}

template <ScalarType S>
Scenario<S> instantiate(const ScenarioDoc& doc)
{
    if (doc.random) {
        auto sc = build_random<S>(*doc.random, doc.name);
        sc.limits = doc.limits;
        sc.expected = doc.expected;
        if (!doc.provenance.empty())
            sc.provenance = doc.provenance;
        return sc;
    }
    std::vector<Vec<S>> rows;
    for (std::size_t i = 0; i < doc.opinions->size(); ++i) {
        Vec<S> v(doc.d);
        for (std::size_t k = 0; k < doc.d; ++k) {
            try {
                v[k] = parse_scalar<S>((*doc.opinions)[i][k]);
            } catch (const ParseError& e) {
                throw ParseError("agents.opinions[" + std::to_string(i) + "][" + std::to_string(k) + "]: " + e.what());
            }
        }
        rows.push_back(std::move(v));
    }
    auto sc = make_scenario<S>(doc.name, doc.set, OpinionState<S>(std::move(rows)), doc.stubborn, doc.expected,
                               doc.provenance);
    if (sc.set.dim() != doc.d)
        throw DimensionError("set '" + doc.set.name + "' has dimension " + std::to_string(sc.set.dim())
                             + " but agents.d = " + std::to_string(doc.d));
    sc.limits = doc.limits;
    return sc;
}

inline json expected_to_json(const ExpectedOutcome& e)
{
    json j;
    j["outcome"] = to_string(e.kind);
    if (e.offset)
        j["offset"] = *e.offset;
    if (e.period)
        j["period"] = *e.period;
    return j;
}

template <ScalarType S>
json scenario_to_json(const Scenario<S>& sc, Backend backend = scalar_traits<S>::backend)
{
    json j;
    j["schema"] = kScenarioSchema;
    j["name"] = sc.name;
    if (!sc.provenance.empty())
        j["provenance"] = sc.provenance;
    j["set"] = detail::set_spec_to_json(sc.set_spec);
    json agents;
    agents["n"] = sc.initial.n();
    agents["d"] = sc.initial.dim();
    if (sc.random) {
        const auto& r = *sc.random;
        json rj;
        rj["seed"] = r.seed;
        rj["box"] = {{"low", detail::rational_strings(r.box_low)}, {"high", detail::rational_strings(r.box_high)}};
        rj["stubborn_count"] = r.stubborn_count;
        rj["stubborn_opinion"] = detail::rational_strings(r.stubborn_opinion);
        rj["grid_bits"] = r.grid_bits;
        agents["random"] = rj;
    } else {
        json rows = json::array();
        for (const auto& row : sc.initial.rows) {
            json r = json::array();
            for (const auto& x : row.coords())
                r.push_back(to_string(x));
            rows.push_back(r);
        }
        agents["opinions"] = rows;
    }
    j["agents"] = agents;
    json stubborn = json::array();
    for (std::size_t i : sc.roster.stubborn())
        stubborn.push_back(i + 1);
    j["stubborn"] = stubborn;
    j["limits"] = {
        {"backend", to_string(backend)},
        {"max_steps", sc.limits.max_steps},
        {"tolerance", scalar_traits<double>::to_string(sc.limits.float_tolerance)},
        {"cycle_check", sc.limits.cycle_check},
        {"convergence_window", sc.limits.convergence_window},
        {"float_window", sc.limits.float_window},
        {"record_neighbors", sc.limits.record_neighbors},
    };
    if (sc.expected)
        j["expected"] = expected_to_json(*sc.expected);
    return j;
}

// ---------------------------------------------------------------------------
// Outputs.

template <ScalarType S>
json outcome_to_json(const Outcome<S>& o)
{
    json j;
    j["kind"] = to_string(kind_of(o));
    std::visit(
        [&j](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Terminated<S>>) {
                j["at_step"] = v.at_step;
            } else if constexpr (std::is_same_v<T, Periodic<S>>) {
                j["offset"] = v.offset;
                j["period"] = v.period;
            } else if constexpr (std::is_same_v<T, ConvergentNonTerminating<S>>) {
                j["detected_at"] = v.detected_at;
                j["window"] = v.window;
                j["contraction_factor"] = to_string(v.contraction_factor);
                j["evidence_only"] = true;
            } else {
                j["max_steps"] = v.max_steps;
                j["numerically_converged"] = v.numerically_converged;
                j["at_step"] = v.at_step;
            }
        },
        o);
    return j;
}

template <ScalarType S>
json state_to_json(const OpinionState<S>& st)
{
    json rows = json::array();
    for (const auto& r : st.rows) {
        json row = json::array();
        for (const auto& x : r.coords())
            row.push_back(to_string(x));
        rows.push_back(row);
    }
    return rows;
}

template <ScalarType S>
json hypotheses_to_json(const HypothesisReport<S>& h)
{
    json j;
    j["assumption1_zero_member"] = h.assumption1;
    j["assumption2_symmetry"] = h.assumption2_symmetry;
    j["assumption3_zero_neighborhood"] = h.assumption3_zero_neighborhood;
    j["assumption4_homogeneous_stubborn"] = h.assumption4_homogeneous_stubborn;
    j["type_symmetry_K"] = h.type_symmetry_K ? json(to_string(*h.type_symmetry_K)) : json(nullptr);
    j["diagonal_delta"] = to_string(h.diagonal_delta);
    j["reduced_matrices"] = h.reduced;
    j["matrices_checked"] = h.matrices_checked;
    return j;
}

inline json claims_to_json(const std::vector<ClaimCheck>& claims)
{
    json arr = json::array();
    for (const auto& c : claims)
        arr.push_back({{"claim", c.claim}, {"applicable", c.applicable}, {"holds", c.holds}, {"detail", c.detail}});
    return arr;
}

template <ScalarType S>
json partition_to_json(const ClusterPartition<S>& p)
{
    json blocks = json::array();
    for (const auto& b : p.blocks) {
        json blk = json::array();
        for (std::size_t i : b)
            blk.push_back(i + 1);
        blocks.push_back(blk);
    }
    json reps = json::array();
    for (const auto& r : p.representatives) {
        json row = json::array();
        for (const auto& x : r.coords())
            row.push_back(to_string(x));
        reps.push_back(row);
    }
    return {{"count", p.size()}, {"tolerance", to_string(p.tolerance)}, {"blocks", blocks}, {"representatives", reps}};
}

/// One row per agent per recorded step:
/// t,agent,coord_0..coord_{d-1},stubborn,float_0..float_{d-1}.
/// Exact coordinates are "p/q"; the float columns repeat them as doubles.
template <ScalarType S>
void write_trajectory_csv(std::ostream& os, const Trajectory<S>& traj, const AgentRoster& roster)
{
    if (traj.states.empty())
        throw DomainError("write_trajectory_csv: empty trajectory");
    const std::size_t d = traj.states.front().dim();
    os << "t,agent";
    for (std::size_t k = 0; k < d; ++k)
        os << ",coord_" << k;
    os << ",stubborn";
    for (std::size_t k = 0; k < d; ++k)
        os << ",float_" << k;
    os << '\n';
    for (std::size_t t = 0; t < traj.states.size(); ++t) {
        const auto& st = traj.states[t];
        for (std::size_t i = 0; i < st.n(); ++i) {
            os << t << ',' << i + 1;
            for (const auto& x : st[i].coords())
                os << ',' << to_string(x);
            os << ',' << (roster.is_stubborn(i) ? 1 : 0);
            for (const auto& x : st[i].coords())
                os << ',' << scalar_traits<double>::to_string(to_double(x));
            os << '\n';
        }
    }
}

/// Reads back the states written by write_trajectory_csv.
template <ScalarType S>
std::vector<OpinionState<S>> read_trajectory_csv(std::istream& is)
{
    std::string line;
    if (!std::getline(is, line))
        throw ParseError("trajectory csv: missing header");
    std::size_t d = 0;
    for (std::size_t pos = 0; (pos = line.find("coord_", pos)) != std::string::npos; ++pos)
        ++d;
    if (d == 0)
        throw ParseError("trajectory csv: header has no coordinate columns");
    std::vector<std::vector<Vec<S>>> steps;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty())
            continue;
        std::vector<std::string> cells;
        std::size_t start = 0;
        for (std::size_t pos; (pos = line.find(',', start)) != std::string::npos; start = pos + 1)
            cells.push_back(line.substr(start, pos - start));
        cells.push_back(line.substr(start));
        if (cells.size() != 3 + 2 * d)
            throw ParseError("trajectory csv line " + std::to_string(lineno) + ": wrong column count");
        const std::size_t t = std::stoul(cells[0]);
        const std::size_t agent = std::stoul(cells[1]);
        if (t >= steps.size())
            steps.resize(t + 1);
        if (agent != steps[t].size() + 1)
            throw ParseError("trajectory csv line " + std::to_string(lineno) + ": agents out of order");
        Vec<S> v(d);
        for (std::size_t k = 0; k < d; ++k)
            v[k] = parse_scalar<S>(cells[2 + k]);
        steps[t].push_back(std::move(v));
    }
    std::vector<OpinionState<S>> out;
    for (std::size_t t = 0; t < steps.size(); ++t)
        out.emplace_back(std::move(steps[t]), t);
    return out;
}

/// Per-agent coordinate series, cycle annotation and cluster assignment;
/// the input contract of the plotting script.
template <ScalarType S>
json plotdata_json(const std::string& scenario, const Trajectory<S>& traj, const AgentRoster& roster,
                   const ClusterPartition<S>& part)
{
    json j;
    j["schema"] = kPlotdataSchema;
    j["scenario"] = scenario;
    j["backend"] = to_string(scalar_traits<S>::backend);
    const std::size_t n = traj.states.front().n();
    const std::size_t d = traj.states.front().dim();
    j["n"] = n;
    j["d"] = d;
    j["steps"] = traj.steps();
    j["outcome"] = outcome_to_json(traj.outcome);
    json agents = json::array();
    for (std::size_t i = 0; i < n; ++i) {
        json series = json::array();
        for (std::size_t k = 0; k < d; ++k) {
            json s = json::array();
            for (const auto& st : traj.states)
                s.push_back(to_double(st[i][k]));
            series.push_back(s);
        }
        agents.push_back({{"agent", i + 1}, {"stubborn", roster.is_stubborn(i)}, {"series", series}});
    }
    j["agents"] = agents;
    if (const auto* p = std::get_if<Periodic<S>>(&traj.outcome))
        j["cycle"] = {{"offset", p->offset}, {"period", p->period}};
    const auto assign = part.assignment(n);
    json blocks = json::array();
    for (const auto& b : part.blocks) {
        json blk = json::array();
        for (std::size_t i : b)
            blk.push_back(i + 1);
        blocks.push_back(blk);
    }
    j["clusters"] = {{"count", part.size()}, {"blocks", blocks}, {"assignment", assign}};
    return j;
}

struct RunTiming
{
    double simulate_ms = 0;
    double analysis_ms = 0;
};

template <ScalarType S>
json report_json(const Scenario<S>& sc, const Trajectory<S>& traj, const HypothesisReport<S>& hyp,
                 const std::vector<ClaimCheck>& claims, const ClusterPartition<S>& part, const RunTiming& timing)
{
    json j;
    j["schema"] = kReportSchema;
    j["scenario"] = sc.name;
    j["backend"] = to_string(scalar_traits<S>::backend);
    j["n"] = sc.initial.n();
    j["d"] = sc.initial.dim();
    json stubborn = json::array();
    for (std::size_t i : sc.roster.stubborn())
        stubborn.push_back(i + 1);
    j["stubborn"] = stubborn;
    j["outcome"] = outcome_to_json(traj.outcome);
    j["steps"] = traj.steps();
    j["hypotheses"] = hypotheses_to_json(hyp);
    j["claims"] = claims_to_json(claims);
    j["clusters"] = partition_to_json(part);
    if (sc.expected) {
        j["expected"] = expected_to_json(*sc.expected);
        j["expected_matches"] = sc.expected->matches(traj.outcome);
    }
    j["timing_ms"] = {{"simulate", timing.simulate_ms}, {"analysis", timing.analysis_ms}};
    return j;
}

template <ScalarType S>
json counterexample_json(const Scenario<S>& sc, const Trajectory<S>& traj, const std::vector<ClaimCheck>& claims)
{
    json j;
    j["schema"] = kCounterexampleSchema;
    j["scenario"] = scenario_to_json(sc);
    j["outcome"] = outcome_to_json(traj.outcome);
    j["steps"] = traj.steps();
    j["final_state"] = state_to_json(traj.final_state());
    json violated = json::array();
    for (const auto& c : claims)
        if (c.violated())
            violated.push_back({{"claim", c.claim}, {"detail", c.detail}});
    j["violations"] = violated;
    return j;
}

/// Writes via a temporary file in the same directory and renames it over
/// the target.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content)
{
    static std::atomic<unsigned long> counter{0};
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::filesystem::path tmp = path;
    tmp += ".tmp." + std::to_string(counter++);
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw Error("cannot write '" + tmp.string() + "'");
        out << content;
        if (!out.flush())
            throw Error("write failed for '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, path);
}

} // namespace scod
