// scod: command-line front end.
//
//   scod run [SCENARIO.json] [--builtin NAME] [--backend exact|float]
//            [--max-steps N] [--seed N] [--out DIR] [--expect]
//   scod describe (--builtin NAME | SCENARIO.json) [--backend B] [--out FILE]
//   scod batch LIST [--jobs N] [--out DIR] [--expect]
//   scod search-period2 [--family F] [--trials N] [--seed N] [--out DIR]
//
// Exit codes: 0 success, 1 error, 2 expected outcome not met (or a period-2
// orbit found in a three-agent family).

#include <scod/scod.hpp>

#include <CLI11.hpp>

#include <chrono>
#include <future>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitMismatch = 2;

struct RunOptions
{
    std::string scenario_path;
    std::string builtin;
    std::string backend;
    std::optional<std::size_t> max_steps;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    bool expect = false;
};

struct RunResult
{
    int code = kExitOk;
    std::string log;
};

scod::ScenarioDoc load_doc(const RunOptions& o)
{
    if (!o.builtin.empty() && !o.scenario_path.empty())
        throw scod::ParseError("give either a scenario file or --builtin, not both");
    if (o.builtin.empty() && o.scenario_path.empty())
        throw scod::ParseError("no scenario: give a scenario file or --builtin NAME");
    if (!o.scenario_path.empty())
        return scod::load_scenario_file(o.scenario_path);

    // Builtins go through their own JSON form, so every run path is the
    // same as for a file. The n = 100 experiments default to floats.
    const bool big = o.builtin.ends_with("_n100");
    const auto& names = scod::builtin_names();
    if (std::find(names.begin(), names.end(), o.builtin) == names.end())
        throw scod::CatalogError("unknown builtin '" + o.builtin + "'");
    scod::json j = big ? scod::scenario_to_json(scod::build_builtin<double>(o.builtin))
                       : scod::scenario_to_json(scod::build_builtin<scod::Rational>(o.builtin));
    return scod::parse_scenario(j);
}

void apply_overrides(scod::ScenarioDoc& doc, const RunOptions& o)
{
    if (!o.backend.empty())
        doc.backend = scod::parse_backend(o.backend);
    if (o.max_steps)
        doc.limits.max_steps = *o.max_steps;
    if (o.seed) {
        if (!doc.random)
            throw scod::ParseError("--seed applies only to random scenarios");
        doc.random->seed = *o.seed;
    }
}

template <scod::ScalarType S>
RunResult run_scenario(const scod::ScenarioDoc& doc, const RunOptions& o)
{
    using clock = std::chrono::steady_clock;
    RunResult res;
    std::ostringstream log;

    auto sc = scod::instantiate<S>(doc);
    const auto t0 = clock::now();
    const auto traj = scod::simulate(sc.initial, sc.set, sc.roster, sc.limits);
    const auto t1 = clock::now();
    const auto hyp = scod::check_hypotheses(sc.set, sc.initial, sc.roster, traj);
    const auto claims = scod::verify_convergence_claims(traj, hyp, sc.set, sc.roster);
    const S tol = scod::scalar_traits<S>::backend == scod::Backend::Exact ? S(0) : S(1e-6);
    const auto part = scod::clusters(traj.final_state(), tol);
    const auto t2 = clock::now();
    const scod::RunTiming timing{std::chrono::duration<double, std::milli>(t1 - t0).count(),
                                 std::chrono::duration<double, std::milli>(t2 - t1).count()};

    log << sc.name << ": " << scod::outcome_to_json(traj.outcome).dump() << ", steps " << traj.steps() << ", clusters "
        << part.size() << '\n';
    for (const auto& c : claims)
        if (c.violated())
            log << "  claim violated: " << c.claim << " (" << c.detail << ")\n";

    std::map<std::string, std::string> outputs = doc.outputs;
    if (!o.out_dir.empty() && outputs.empty())
        outputs = {{"trajectory", "trajectory.csv"},
                   {"graph", "graph.dot"},
                   {"report", "report.json"},
                   {"plotdata", "plotdata.json"}};
    const fs::path base = o.out_dir.empty() ? fs::path(".") : fs::path(o.out_dir);
    for (const auto& [kind, file] : outputs) {
        const fs::path path = base / file;
        std::string content;
        if (kind == "trajectory") {
            std::ostringstream csv;
            scod::write_trajectory_csv(csv, traj, sc.roster);
            content = csv.str();
        } else if (kind == "graph") {
            content = scod::to_dot(scod::confidence_graph(traj.final_state(), sc.set, sc.roster), sc.name);
        } else if (kind == "report") {
            content = scod::report_json(sc, traj, hyp, claims, part, timing).dump(2) + "\n";
        } else {
            content = scod::plotdata_json(sc.name, traj, sc.roster, part).dump() + "\n";
        }
        scod::write_file_atomic(path, content);
        log << "  wrote " << path.string() << '\n';
    }

    if (o.expect) {
        if (!sc.expected) {
            log << "  --expect given but the scenario has no expected outcome\n";
            res.code = kExitError;
        } else if (!sc.expected->matches(traj.outcome)) {
            log << "  expected " << scod::expected_to_json(*sc.expected).dump() << ", got "
                << scod::outcome_to_json(traj.outcome).dump() << '\n';
            res.code = kExitMismatch;
        } else {
            log << "  expected outcome met\n";
        }
    }
    res.log = log.str();
    return res;
}

RunResult run_one(const RunOptions& o)
{
    try {
        auto doc = load_doc(o);
        apply_overrides(doc, o);
        return doc.backend == scod::Backend::Exact ? run_scenario<scod::Rational>(doc, o) : run_scenario<double>(doc, o);
    } catch (const std::exception& e) {
        const std::string what = o.builtin.empty() ? o.scenario_path : o.builtin;
        return {kExitError, "error: " + what + ": " + e.what() + "\n"};
    }
}

int cmd_describe(const RunOptions& o, const std::string& out_file)
{
    auto doc = load_doc(o);
    apply_overrides(doc, o);
    const scod::json j = doc.backend == scod::Backend::Exact
                             ? scod::scenario_to_json(scod::instantiate<scod::Rational>(doc), doc.backend)
                             : scod::scenario_to_json(scod::instantiate<double>(doc), doc.backend);
    const std::string text = j.dump(2) + "\n";
    if (out_file.empty())
        std::cout << text;
    else
        scod::write_file_atomic(out_file, text);
    return kExitOk;
}

// One entry per line: a scenario path or "builtin:NAME"; '#' starts a comment.
std::vector<RunOptions> read_batch(const std::string& path, const RunOptions& common)
{
    std::ifstream in(path);
    if (!in)
        throw scod::ParseError("cannot open batch file '" + path + "'");
    std::vector<RunOptions> out;
    std::string line;
    for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
        if (auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos)
            continue;
        line = line.substr(first, line.find_last_not_of(" \t\r") - first + 1);
        RunOptions o = common;
        std::string tag;
        if (line.rfind("builtin:", 0) == 0) {
            o.builtin = line.substr(8);
            tag = o.builtin;
        } else {
            fs::path p(line);
            if (p.is_relative())
                p = fs::path(path).parent_path() / p;
            o.scenario_path = p.string();
            tag = p.stem().string();
        }
        if (!common.out_dir.empty())
            o.out_dir = (fs::path(common.out_dir) / (std::to_string(lineno) + "_" + tag)).string();
        out.push_back(std::move(o));
    }
    return out;
}

int cmd_batch(const std::string& list, const RunOptions& common, std::size_t jobs)
{
    const auto runs = read_batch(list, common);
    if (jobs == 0)
        jobs = std::max(1u, std::thread::hardware_concurrency());
    std::vector<RunResult> results(runs.size());
    for (std::size_t start = 0; start < runs.size(); start += jobs) {
        std::vector<std::future<RunResult>> wave;
        for (std::size_t i = start; i < std::min(runs.size(), start + jobs); ++i)
            wave.push_back(std::async(std::launch::async, run_one, runs[i]));
        for (std::size_t k = 0; k < wave.size(); ++k)
            results[start + k] = wave[k].get();
    }
    int code = kExitOk;
    for (const auto& r : results) {
        std::cout << r.log;
        if (r.code == kExitError)
            code = kExitError;
        else if (r.code == kExitMismatch && code == kExitOk)
            code = kExitMismatch;
    }
    return code;
}

int cmd_search(const std::string& family_name, std::size_t trials, std::uint64_t seed, std::size_t max_steps,
               const std::string& out_dir)
{
    const auto family = scod::search_family_by_name(family_name);
    const auto res = scod::search_period2(family, trials, seed, max_steps);
    std::cout << "family " << res.family << " (n = " << family.n << "), " << res.trials << " trials\n";
    for (const auto& [kind, count] : res.outcome_counts)
        std::cout << "  " << kind << ": " << count << '\n';
    for (const auto& [period, count] : res.period_counts)
        std::cout << "  period " << period << ": " << count << '\n';
    std::cout << "  period-2 orbits: " << res.period2.size() << '\n';
    if (!out_dir.empty()) {
        for (const auto& hit : res.period2) {
            auto sc = scod::make_scenario<scod::Rational>(
                res.family + "_trial_" + std::to_string(hit.trial), hit.set, hit.initial, {},
                scod::ExpectedOutcome{scod::OutcomeKind::Periodic, hit.offset, hit.period}, "period-2 search hit");
            scod::json j = scod::scenario_to_json(sc);
            j["seed"] = seed;
            j["trial"] = hit.trial;
            const fs::path p = fs::path(out_dir) / (sc.name + ".json");
            scod::write_file_atomic(p, j.dump(2) + "\n");
            std::cout << "  wrote " << p.string() << '\n';
        }
    }
    return family.n == 3 && !res.period2.empty() ? kExitMismatch : kExitOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Set-based confidence opinion dynamics simulator"};
    app.require_subcommand(1);

    RunOptions run_opts;
    auto add_common = [](CLI::App* sub, RunOptions& o) {
        sub->add_option("--backend", o.backend, "exact or float")->check(CLI::IsMember({"exact", "float"}));
        sub->add_option("--max-steps", o.max_steps, "step cap")->check(CLI::PositiveNumber);
        sub->add_option("--seed", o.seed, "seed for random scenarios");
    };

    auto* run = app.add_subcommand("run", "simulate one scenario");
    run->add_option("scenario", run_opts.scenario_path, "scenario JSON file");
    run->add_option("--builtin", run_opts.builtin, "builtin scenario name");
    add_common(run, run_opts);
    run->add_option("--out", run_opts.out_dir, "output directory");
    run->add_flag("--expect", run_opts.expect, "exit 2 unless the expected outcome is met");

    RunOptions desc_opts;
    std::string desc_out;
    bool list = false;
    auto* describe = app.add_subcommand("describe", "print a scenario as JSON");
    describe->add_option("scenario", desc_opts.scenario_path, "scenario JSON file");
    describe->add_option("--builtin", desc_opts.builtin, "builtin scenario name");
    describe->add_flag("--list", list, "list builtin names");
    add_common(describe, desc_opts);
    describe->add_option("--out", desc_out, "output file");

    RunOptions batch_opts;
    std::string batch_list;
    std::size_t jobs = 0;
    auto* batch = app.add_subcommand("batch", "run the scenarios listed in a file concurrently");
    batch->add_option("list", batch_list, "one scenario path or builtin:NAME per line")->required();
    batch->add_option("--jobs", jobs, "parallel runs (default: hardware threads)");
    batch->add_option("--backend", batch_opts.backend, "exact or float")->check(CLI::IsMember({"exact", "float"}));
    batch->add_option("--max-steps", batch_opts.max_steps, "step cap")->check(CLI::PositiveNumber);
    batch->add_option("--out", batch_opts.out_dir, "output directory");
    batch->add_flag("--expect", batch_opts.expect, "exit 2 if any expected outcome is missed");

    std::string family = "punctured_interval";
    std::size_t trials = 10000;
    std::uint64_t search_seed = 1;
    std::size_t search_steps = 128;
    std::string search_out;
    auto* search = app.add_subcommand("search-period2", "random search for period-2 orbits");
    search->add_option("--family", family, "punctured_interval, star_rays_n3 or star_rays_control");
    search->add_option("--trials", trials, "random initial states to try")->check(CLI::PositiveNumber);
    search->add_option("--seed", search_seed, "splitmix64 seed");
    search->add_option("--max-steps", search_steps, "step cap per trial")->check(CLI::PositiveNumber);
    search->add_option("--out", search_out, "directory for counterexample files");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitError;
    }

    try {
        if (*run) {
            const auto r = run_one(run_opts);
            (r.code == kExitError ? std::cerr : std::cout) << r.log;
            return r.code;
        }
        if (*describe) {
            if (list) {
                for (const auto& n : scod::builtin_names())
                    std::cout << n << '\n';
                return kExitOk;
            }
            return cmd_describe(desc_opts, desc_out);
        }
        if (*batch)
            return cmd_batch(batch_list, batch_opts, jobs);
        if (*search)
            return cmd_search(family, trials, search_seed, search_steps, search_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitError;
    }
    return kExitError;
}
