#pragma once

// State classification, cluster extraction, confidence graphs, hypothesis
// checks on recorded trajectories, and the period-2 falsification search.

#include "dynamics.hpp"

#include <numeric>
#include <sstream>

namespace scod {

/// Clustered: every pair has equal opinions or mutually untrusted ones
/// (x_j - x_i not in O).
template <ScalarType S>
bool is_clustered(const OpinionState<S>& state, const ConfidenceSet<S>& set)
{
    for (std::size_t i = 0; i < state.n(); ++i)
        for (std::size_t j = 0; j < state.n(); ++j)
            if (i != j && !(state[i] == state[j]) && set.contains(sub(state[j], state[i])))
                return false;
    return true;
}

/// One exact step application.
template <ScalarType S>
bool is_equilibrium(const OpinionState<S>& state, const ConfidenceSet<S>& set, const AgentRoster& roster)
{
    return step(state, set, roster).same_opinions(state);
}

template <ScalarType S>
struct ClusterPartition
{
    std::vector<std::vector<std::size_t>> blocks;
    std::vector<Vec<S>> representatives;
    S tolerance = S(0);

    std::size_t size() const noexcept { return blocks.size(); }

    std::vector<std::size_t> assignment(std::size_t n) const
    {
        std::vector<std::size_t> out(n, 0);
        for (std::size_t b = 0; b < blocks.size(); ++b)
            for (std::size_t i : blocks[b])
                out[i] = b;
        return out;
    }
};

namespace detail {

class UnionFind
{
public:
    explicit UnionFind(std::size_t n)
        : parent_(n)
    {
        std::iota(parent_.begin(), parent_.end(), std::size_t{0});
    }

    std::size_t find(std::size_t x)
    {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    void unite(std::size_t a, std::size_t b)
    {
        a = find(a);
        b = find(b);
        if (a != b)
            parent_[std::max(a, b)] = std::min(a, b);
    }

private:
    std::vector<std::size_t> parent_;
};

} // namespace detail

/// Groups agents whose opinions agree within `tol` in max norm (transitively
/// closed). The exact backend requires tol = 0.
template <ScalarType S>
ClusterPartition<S> clusters(const OpinionState<S>& state, const S& tol)
{
    if (tol < S(0))
        throw DomainError("clusters: tolerance must be non-negative");
    if constexpr (scalar_traits<S>::exact) {
        if (tol != S(0))
            throw DomainError("clusters: the exact backend requires tolerance 0");
    }
    detail::UnionFind uf(state.n());
    for (std::size_t i = 0; i < state.n(); ++i)
        for (std::size_t j = i + 1; j < state.n(); ++j)
            if (norm_inf(sub(state[i], state[j])) <= tol)
                uf.unite(i, j);
    ClusterPartition<S> part;
    part.tolerance = tol;
    std::vector<std::size_t> block_of(state.n(), SIZE_MAX);
    for (std::size_t i = 0; i < state.n(); ++i) {
        const std::size_t root = uf.find(i);
        if (block_of[root] == SIZE_MAX) {
            block_of[root] = part.blocks.size();
            part.blocks.emplace_back();
            part.representatives.push_back(state[root]);
        }
        part.blocks[block_of[root]].push_back(i);
    }
    return part;
}

/// Directed graph with arc i -> j iff agent i trusts agent j.
struct ConfidenceGraph
{
    std::size_t n = 0;
    NeighborSets out;
    std::vector<bool> stubborn;

    bool has_arc(std::size_t i, std::size_t j) const
    {
        return std::binary_search(out[i].begin(), out[i].end(), j);
    }

    bool has_all_self_loops() const
    {
        for (std::size_t i = 0; i < n; ++i)
            if (!has_arc(i, i))
                return false;
        return true;
    }

    bool is_symmetric() const
    {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j : out[i])
                if (!has_arc(j, i))
                    return false;
        return true;
    }

    /// Reflexive, symmetric and transitive: a disjoint union of cliques.
    bool is_disjoint_cliques() const
    {
        if (!has_all_self_loops() || !is_symmetric())
            return false;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j : out[i])
                if (out[j] != out[i])
                    return false;
        return true;
    }

    /// Tarjan's algorithm; components listed with sorted members.
    std::vector<std::vector<std::size_t>> strongly_connected_components() const
    {
        std::vector<std::vector<std::size_t>> comps;
        std::vector<long> index(n, -1), low(n, 0);
        std::vector<bool> on_stack(n, false);
        std::vector<std::size_t> stack;
        long counter = 0;
        // iterative DFS frames: (node, next edge position)
        std::vector<std::pair<std::size_t, std::size_t>> frames;
        for (std::size_t root = 0; root < n; ++root) {
            if (index[root] >= 0)
                continue;
            frames.emplace_back(root, 0);
            index[root] = low[root] = counter++;
            stack.push_back(root);
            on_stack[root] = true;
            while (!frames.empty()) {
                auto& [v, pos] = frames.back();
                if (pos < out[v].size()) {
                    const std::size_t w = out[v][pos++];
                    if (index[w] < 0) {
                        index[w] = low[w] = counter++;
                        stack.push_back(w);
                        on_stack[w] = true;
                        frames.emplace_back(w, 0);
                    } else if (on_stack[w]) {
                        low[v] = std::min(low[v], index[w]);
                    }
                    continue;
                }
                const std::size_t done = v;
                frames.pop_back();
                if (!frames.empty())
                    low[frames.back().first] = std::min(low[frames.back().first], low[done]);
                if (low[done] == index[done]) {
                    std::vector<std::size_t> comp;
                    std::size_t w;
                    do {
                        w = stack.back();
                        stack.pop_back();
                        on_stack[w] = false;
                        comp.push_back(w);
                    } while (w != done);
                    std::sort(comp.begin(), comp.end());
                    comps.push_back(std::move(comp));
                }
            }
        }
        std::sort(comps.begin(), comps.end());
        return comps;
    }
};

template <ScalarType S>
ConfidenceGraph confidence_graph(const OpinionState<S>& state, const ConfidenceSet<S>& set, const AgentRoster& roster)
{
    ConfidenceGraph g;
    g.n = state.n();
    g.out = neighbor_sets(state, set, roster);
    g.stubborn.resize(g.n);
    for (std::size_t i = 0; i < g.n; ++i)
        g.stubborn[i] = roster.is_stubborn(i);
    return g;
}

/// DOT digraph; nodes carry 1-based agent labels, stubborn agents are boxes.
inline std::string to_dot(const ConfidenceGraph& g, const std::string& name = "confidence_graph")
{
    std::ostringstream os;
    os << "digraph " << name << " {\n";
    for (std::size_t i = 0; i < g.n; ++i) {
        os << "  " << i + 1 << " [label=\"" << i + 1 << "\"";
        if (g.stubborn[i])
            os << ", shape=box, xlabel=\"stubborn\"";
        os << "];\n";
    }
    for (std::size_t i = 0; i < g.n; ++i)
        for (std::size_t j : g.out[i])
            os << "  " << i + 1 << " -> " << j + 1 << ";\n";
    os << "}\n";
    return os.str();
}

// ---------------------------------------------------------------------------
// Hypothesis checks.

struct CertificationOptions
{
    std::size_t samples = 2000;
    std::uint64_t seed = 0x5C0DULL;
};

template <ScalarType S>
struct HypothesisReport
{
    bool assumption1 = false;                      // 0 in O
    bool assumption2_symmetry = false;             // O = -O
    bool assumption3_zero_neighborhood = false;    // ball around 0 inside O
    bool assumption4_homogeneous_stubborn = false; // stubborn agents share one opinion
    /// Realized type-symmetry constant max w_ij / w_ji; empty when some arc
    /// has no reverse arc (not type-symmetric for any K).
    std::optional<S> type_symmetry_K;
    /// Realized minimum diagonal weight.
    S diagonal_delta = S(0);
    /// Matrices the constants were computed on: full W, or the reduced
    /// matrices over regular agents when stubborn agents exist.
    bool reduced = false;
    std::size_t matrices_checked = 0;
};

template <ScalarType S>
bool stubborn_homogeneous(const OpinionState<S>& initial, const AgentRoster& roster)
{
    const auto& st = roster.stubborn();
    for (std::size_t i : st)
        if (!(initial[i] == initial[st.front()]))
            return false;
    return true;
}

template <ScalarType S>
HypothesisReport<S> check_hypotheses(const ConfidenceSet<S>& set, const OpinionState<S>& initial,
                                     const AgentRoster& roster, const Trajectory<S>& traj,
                                     const CertificationOptions& cert = {})
{
    HypothesisReport<S> rep;
    const auto& meta = set.metadata();
    rep.assumption1 = set.contains(Vec<S>(set.dim()));
    rep.assumption2_symmetry = meta.symmetric != Symmetry::DeclaredFalse
                               && is_symmetric_certified(set, cert.samples, cert.seed);
    rep.assumption3_zero_neighborhood = meta.zero_neighborhood_radius.has_value()
                                        && is_zero_neighborhood_certified(set, cert.samples, cert.seed);
    rep.assumption4_homogeneous_stubborn = stubborn_homogeneous(initial, roster);

    std::optional<S> k_max = S(1);
    std::optional<S> delta;
    rep.reduced = roster.has_stubborn();
    for (std::size_t t = 0; t < traj.neighbor_history.size(); ++t) {
        WeightMatrix<S> w = traj.weight_matrix_at(t);
        if (rep.reduced) {
            if (roster.regular().empty())
                break;
            w = reduced_stubborn_weights(w, roster);
        }
        ++rep.matrices_checked;
        for (std::size_t i = 0; i < w.n(); ++i) {
            delta = delta ? std::min(*delta, w(i, i)) : w(i, i);
            for (std::size_t j = 0; j < w.n(); ++j) {
                if (i == j)
                    continue;
                const bool fwd = w(i, j) != S(0);
                const bool back = w(j, i) != S(0);
                if (fwd != back)
                    k_max.reset();
                else if (fwd && k_max)
                    k_max = std::max(*k_max, S(w(i, j) / w(j, i)));
            }
        }
    }
    rep.type_symmetry_K = rep.matrices_checked > 0 ? k_max : std::nullopt;
    rep.diagonal_delta = delta.value_or(S(1));
    return rep;
}

struct ClaimCheck
{
    std::string claim;
    bool applicable = false;
    bool holds = true;
    std::string detail;

    bool violated() const noexcept { return applicable && !holds; }
};

struct ClaimOptions
{
    /// Recorded steps inspected for "frozen" agents and tail trust.
    std::size_t tail_window = 50;
    /// Distance to the stubborn opinion counted as converged (float).
    double tolerance = 1e-6;
};

namespace detail {

template <ScalarType S>
bool agent_frozen_in_tail(const Trajectory<S>& traj, std::size_t i, std::size_t window)
{
    const std::size_t last = traj.states.size() - 1;
    const std::size_t first = last >= window ? last - window : 0;
    for (std::size_t t = first; t < last; ++t)
        if (!(traj.states[t][i] == traj.states[last][i]))
            return false;
    return true;
}

template <ScalarType S>
bool distance_decreasing_in_tail(const Trajectory<S>& traj, std::size_t i, const Vec<S>& target, std::size_t window)
{
    const std::size_t last = traj.states.size() - 1;
    const std::size_t first = last >= window ? last - window : 0;
    if (first == last)
        return false;
    for (std::size_t t = first; t < last; ++t)
        if (!(norm_inf(sub(traj.states[t + 1][i], target)) < norm_inf(sub(traj.states[t][i], target))))
            return false;
    return true;
}

} // namespace detail

/// Checks the convergence claims whose hypotheses hold on this run. Claims
/// whose hypotheses fail are reported with applicable = false.
template <ScalarType S>
std::vector<ClaimCheck> verify_convergence_claims(const Trajectory<S>& traj, const HypothesisReport<S>& rep,
                                        const ConfidenceSet<S>& set, const AgentRoster& roster,
                                        const ClaimOptions& opt = {})
{
    std::vector<ClaimCheck> out;
    const bool base = rep.assumption1 && rep.assumption2_symmetry && rep.assumption4_homogeneous_stubborn;
    const bool zero_nbhd = base && rep.assumption3_zero_neighborhood;
    const OutcomeKind kind = kind_of(traj.outcome);
    const bool terminated = kind == OutcomeKind::Terminated;
    const auto& final_state = traj.final_state();

    {
        ClaimCheck c{"A: initial state is an equilibrium iff it is clustered", base, true, {}};
        if (base) {
            const bool eq = is_equilibrium(traj.initial(), set, roster);
            const bool cl = is_clustered(traj.initial(), set);
            c.holds = eq == cl;
            c.detail = std::string("equilibrium=") + (eq ? "true" : "false") + ", clustered=" + (cl ? "true" : "false");
        }
        out.push_back(c);
    }
    {
        ClaimCheck c{"A: terminal state is an equilibrium iff it is clustered", base && terminated, true, {}};
        if (c.applicable) {
            const bool eq = is_equilibrium(final_state, set, roster);
            const bool cl = is_clustered(final_state, set);
            c.holds = eq == cl;
            c.detail = std::string("equilibrium=") + (eq ? "true" : "false") + ", clustered=" + (cl ? "true" : "false");
        }
        out.push_back(c);
    }
    {
        // Finite-run reading of "trust each other infinitely often": trust at
        // the fixed point for terminated runs, trust anywhere in the tail
        // window otherwise.
        const bool numeric = std::holds_alternative<Undetermined>(traj.outcome)
                             && std::get<Undetermined>(traj.outcome).numerically_converged;
        ClaimCheck c{"B: agents trusting each other in the tail share their limit", base && (terminated || numeric), true, {}};
        if (c.applicable) {
            std::vector<NeighborSets> tail;
            if (terminated) {
                tail.push_back(neighbor_sets(final_state, set, roster));
            } else {
                const std::size_t h = traj.neighbor_history.size();
                for (std::size_t t = h > opt.tail_window ? h - opt.tail_window : 0; t < h; ++t)
                    tail.push_back(traj.neighbor_history[t]);
            }
            const double tol = terminated ? 0.0 : opt.tolerance;
            for (const auto& nb : tail) {
                for (std::size_t i = 0; i < nb.size() && c.holds; ++i) {
                    for (std::size_t j : nb[i]) {
                        if (!std::binary_search(nb[j].begin(), nb[j].end(), i))
                            continue;
                        if (to_double(norm_inf(sub(final_state[i], final_state[j]))) > tol) {
                            c.holds = false;
                            c.detail = "agents " + std::to_string(i + 1) + " and " + std::to_string(j + 1)
                                       + " trust each other but end apart";
                            break;
                        }
                    }
                }
            }
        }
        out.push_back(c);
    }
    {
        ClaimCheck c{"C: terminal state is a clustered equilibrium", zero_nbhd && terminated, true, {}};
        if (c.applicable) {
            c.holds = is_clustered(final_state, set) && is_equilibrium(final_state, set, roster);
            if (!c.holds)
                c.detail = "terminal state is not a clustered equilibrium";
        }
        out.push_back(c);
    }
    {
        ClaimCheck c{"D: dynamics terminate in finitely many steps", zero_nbhd && !roster.has_stubborn(), true, {}};
        if (c.applicable) {
            c.holds = terminated && is_clustered(final_state, set);
            c.detail = std::string("outcome=") + to_string(kind);
        }
        out.push_back(c);
    }
    {
        ClaimCheck c{"D: each regular agent freezes or converges to the stubborn opinion",
                     zero_nbhd && roster.has_stubborn(), true, {}};
        if (c.applicable) {
            const Vec<S>& target = traj.initial()[roster.stubborn().front()];
            for (std::size_t i : roster.regular()) {
                const bool frozen = terminated || detail::agent_frozen_in_tail(traj, i, opt.tail_window);
                const bool close = to_double(norm_inf(sub(final_state[i], target))) <= opt.tolerance;
                const bool shrinking = kind == OutcomeKind::ConvergentNonTerminating
                                       && detail::distance_decreasing_in_tail(traj, i, target, opt.tail_window);
                if (!(frozen || close || shrinking)) {
                    c.holds = false;
                    c.detail = "agent " + std::to_string(i + 1) + " neither froze nor approached the stubborn opinion";
                    break;
                }
            }
        }
        out.push_back(c);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Period-2 falsification search.

struct SearchSample
{
    SetSpec set;
    OpinionState<Rational> initial;
};

/// A randomized family of confidence sets with an initial-state sampler.
struct SearchFamily
{
    std::string name;
    std::size_t n = 3;
    std::function<SearchSample(SplitMix64&)> sample;
};

struct FoundOrbit
{
    std::size_t trial = 0;
    SetSpec set;
    OpinionState<Rational> initial;
    std::size_t offset = 0;
    std::size_t period = 0;
    std::vector<OpinionState<Rational>> cycle_states;
};

struct SearchResult
{
    std::string family;
    std::size_t trials = 0;
    std::vector<FoundOrbit> period2;
    std::map<std::string, std::size_t> outcome_counts;
    std::map<std::size_t, std::size_t> period_counts;
};

/// Scalar punctured intervals (-L, L) \ M with L in {5, 7, 9} and M a random
/// subset of the nonzero integers in (-L, L); three agents on integer points
/// of [-L-2, L+2].
inline SearchFamily punctured_interval_family()
{
    SearchFamily fam;
    fam.name = "punctured_interval";
    fam.n = 3;
    fam.sample = [](SplitMix64& rng) {
        static constexpr long lengths[] = {5, 7, 9};
        const long L = lengths[rng.below(3)];
        std::vector<Rational> holes;
        for (long m = -L + 1; m < L; ++m)
            if (m != 0 && (rng.next() & 1))
                holes.push_back(m);
        SetSpec spec{"punctured_interval", {{"low", Rational(-L)}, {"high", Rational(L)}, {"punctures", holes}}, {}};
        std::vector<Vec<Rational>> rows;
        for (int i = 0; i < 3; ++i)
            rows.push_back(Vec<Rational>{Rational(rng.between(-L - 2, L + 2))});
        return SearchSample{std::move(spec), OpinionState<Rational>(std::move(rows))};
    };
    return fam;
}

/// Three planar agents on the integer grid [-6, 6]^2 under the asymmetric
/// ray-union set.
inline SearchFamily star_rays_n3_family()
{
    SearchFamily fam;
    fam.name = "star_rays_n3";
    fam.n = 3;
    fam.sample = [](SplitMix64& rng) {
        SetSpec spec{"star_rays_example3", {}, {}};
        std::vector<Vec<Rational>> rows;
        for (int i = 0; i < 3; ++i)
            rows.push_back(Vec<Rational>{Rational(rng.between(-6, 6)), Rational(rng.between(-6, 6))});
        return SearchSample{std::move(spec), OpinionState<Rational>(std::move(rows))};
    };
    return fam;
}

/// Control family with four agents: three agents at (-3, 1), (-3, -1), (4, 0)
/// and the first on an integer point of the horizontal axis in [-8, 8].
/// Its basin contains the known period-2 orbit.
inline SearchFamily star_rays_control_family()
{
    SearchFamily fam;
    fam.name = "star_rays_control";
    fam.n = 4;
    fam.sample = [](SplitMix64& rng) {
        SetSpec spec{"star_rays_example3", {}, {}};
        std::vector<Vec<Rational>> rows = {
            Vec<Rational>{Rational(rng.between(-8, 8)), Rational(0)},
            Vec<Rational>{Rational(-3), Rational(1)},
            Vec<Rational>{Rational(-3), Rational(-1)},
            Vec<Rational>{Rational(4), Rational(0)},
        };
        return SearchSample{std::move(spec), OpinionState<Rational>(std::move(rows))};
    };
    return fam;
}

inline SearchFamily search_family_by_name(const std::string& name)
{
    if (name == "punctured_interval")
        return punctured_interval_family();
    if (name == "star_rays_n3")
        return star_rays_n3_family();
    if (name == "star_rays_control")
        return star_rays_control_family();
    throw CatalogError("unknown search family '" + name + "'");
}

/// Randomized search for period-2 orbits (no stubborn agents, exact backend).
inline SearchResult search_period2(const SearchFamily& family, std::size_t trials, std::uint64_t seed,
                                   std::size_t max_steps = 128)
{
    if (trials == 0)
        throw DomainError("search_period2: trials must be at least 1");
    SplitMix64 rng(seed);
    SearchResult res;
    res.family = family.name;
    res.trials = trials;
    Limits lim;
    lim.max_steps = max_steps;
    for (std::size_t trial = 0; trial < trials; ++trial) {
        SearchSample s = family.sample(rng);
        if (s.initial.n() != family.n)
            throw DomainError("search family '" + family.name + "' produced the wrong number of agents");
        const auto set = catalog_build<Rational>(s.set);
        const AgentRoster roster(s.initial.n());
        const auto traj = simulate(s.initial, set, roster, lim);
        ++res.outcome_counts[to_string(kind_of(traj.outcome))];
        if (const auto* p = std::get_if<Periodic<Rational>>(&traj.outcome)) {
            ++res.period_counts[p->period];
            if (p->period == 2)
                res.period2.push_back(FoundOrbit{trial, s.set, s.initial, p->offset, p->period, p->cycle_states});
        }
    }
    return res;
}

/// The three-agent variant; rejects families with n != 3.
inline SearchResult search_period2_n3(const SearchFamily& family, std::size_t trials, std::uint64_t seed,
                                      std::size_t max_steps = 128)
{
    if (family.n != 3)
        throw DomainError("search_period2_n3: family must have three agents");
    return search_period2(family, trials, seed, max_steps);
}

} // namespace scod
