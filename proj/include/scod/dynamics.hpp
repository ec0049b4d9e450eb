#pragma once

// The synchronous averaging dynamics: neighbor sets, one update step,
// stubborn-agent override, averaging weight matrices and trajectory
// generation with outcome classification.

#include "confidence_set.hpp"

#include <optional>
#include <unordered_map>
#include <variant>

namespace scod {

/// Agent count and the stubborn subset (sorted, unique, 0-based).
class AgentRoster
{
public:
    explicit AgentRoster(std::size_t n, std::vector<std::size_t> stubborn = {})
        : n_(n)
        , stubborn_(std::move(stubborn))
        , flags_(n, false)
    {
        std::sort(stubborn_.begin(), stubborn_.end());
        stubborn_.erase(std::unique(stubborn_.begin(), stubborn_.end()), stubborn_.end());
        for (std::size_t i : stubborn_) {
            if (i >= n_)
                throw DomainError("stubborn agent " + std::to_string(i) + " out of range for n = " + std::to_string(n_));
            flags_[i] = true;
        }
    }

    std::size_t n() const noexcept { return n_; }
    const std::vector<std::size_t>& stubborn() const noexcept { return stubborn_; }
    bool is_stubborn(std::size_t i) const { return flags_.at(i); }
    bool has_stubborn() const noexcept { return !stubborn_.empty(); }

    std::vector<std::size_t> regular() const
    {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < n_; ++i)
            if (!flags_[i])
                out.push_back(i);
        return out;
    }

private:
    std::size_t n_;
    std::vector<std::size_t> stubborn_;
    std::vector<bool> flags_;
};

/// The n x d opinion matrix at step `step`; row i is agent i's opinion.
template <ScalarType S>
struct OpinionState
{
    std::vector<Vec<S>> rows;
    std::size_t step = 0;

    OpinionState() = default;
    explicit OpinionState(std::vector<Vec<S>> r, std::size_t t = 0)
        : rows(std::move(r))
        , step(t)
    {
        if (rows.empty())
            throw DomainError("opinion state needs at least one agent");
        for (const auto& row : rows)
            if (row.dim() != rows.front().dim())
                throw DimensionError("opinion rows differ in dimension");
    }

    std::size_t n() const noexcept { return rows.size(); }
    std::size_t dim() const { return rows.front().dim(); }
    const Vec<S>& operator[](std::size_t i) const { return rows[i]; }

    /// Equality of opinions; the step index is ignored.
    bool same_opinions(const OpinionState& other) const { return rows == other.rows; }

    std::size_t hash() const
    {
        std::size_t seed = rows.size();
        for (const auto& r : rows)
            detail::hash_combine(seed, hash_vec(r));
        return seed;
    }
};

template <ScalarType S>
OpinionState<S> convert_state(const OpinionState<Rational>& st)
{
    std::vector<Vec<S>> rows;
    for (const auto& r : st.rows)
        rows.push_back(convert_vec<S>(r));
    return OpinionState<S>(std::move(rows), st.step);
}

using NeighborSet = std::vector<std::size_t>;
using NeighborSets = std::vector<NeighborSet>;

/// Dense row-stochastic matrix, row-major.
template <ScalarType S>
class WeightMatrix
{
public:
    explicit WeightMatrix(std::size_t n)
        : n_(n)
        , w_(n * n, S(0))
    {
    }

    std::size_t n() const noexcept { return n_; }
    const S& operator()(std::size_t i, std::size_t j) const { return w_[i * n_ + j]; }
    S& operator()(std::size_t i, std::size_t j) { return w_[i * n_ + j]; }

    S row_sum(std::size_t i) const
    {
        S acc(0);
        for (std::size_t j = 0; j < n_; ++j)
            acc += (*this)(i, j);
        return acc;
    }

    friend bool operator==(const WeightMatrix&, const WeightMatrix&) = default;

private:
    std::size_t n_;
    std::vector<S> w_;
};

namespace detail {

template <ScalarType S>
void check_compatible(const OpinionState<S>& state, const ConfidenceSet<S>& set, const AgentRoster& roster)
{
    if (state.n() != roster.n())
        throw DimensionError("state has " + std::to_string(state.n()) + " agents, roster has "
                             + std::to_string(roster.n()));
    if (state.dim() != set.dim())
        throw DimensionError("state dimension " + std::to_string(state.dim()) + " differs from set dimension "
                             + std::to_string(set.dim()));
}

} // namespace detail

/// N_i = {j : x_j - x_i in O}, or {i} for a stubborn agent.
template <ScalarType S>
NeighborSet neighbors(const OpinionState<S>& state, const ConfidenceSet<S>& set, const AgentRoster& roster,
                      std::size_t i)
{
    if (i >= state.n())
        throw DomainError("agent " + std::to_string(i) + " out of range");
    if (roster.is_stubborn(i))
        return {i};
    NeighborSet out;
    for (std::size_t j = 0; j < state.n(); ++j)
        if (set.contains(sub(state[j], state[i])))
            out.push_back(j);
    return out;
}

template <ScalarType S>
NeighborSets neighbor_sets(const OpinionState<S>& state, const ConfidenceSet<S>& set, const AgentRoster& roster)
{
    detail::check_compatible(state, set, roster);
    NeighborSets out;
    out.reserve(state.n());
    for (std::size_t i = 0; i < state.n(); ++i)
        out.push_back(neighbors(state, set, roster, i));
    return out;
}

/// Averages each agent's neighborhood. The mean is computed as
/// x_r + sum_j (x_j - x_r) / |N| with r the first neighbor, which is exact
/// in rationals and makes agents sharing a neighborhood land on bit-identical
/// floats.
template <ScalarType S>
OpinionState<S> apply_averaging(const OpinionState<S>& state, const NeighborSets& nbrs)
{
    std::vector<Vec<S>> next;
    next.reserve(state.n());
    for (std::size_t i = 0; i < state.n(); ++i) {
        const NeighborSet& ni = nbrs[i];
        if (ni.empty())
            throw ModelError("agent " + std::to_string(i) + " has no neighbors; the confidence set must contain 0");
        const Vec<S>& ref = state[ni.front()];
        Vec<S> acc(state.dim());
        for (std::size_t j : ni)
            acc = add(acc, sub(state[j], ref));
        next.push_back(add(ref, scale_div(acc, ni.size())));
    }
    return OpinionState<S>(std::move(next), state.step + 1);
}

template <ScalarType S>
OpinionState<S> step(const OpinionState<S>& state, const ConfidenceSet<S>& set, const AgentRoster& roster)
{
    return apply_averaging(state, neighbor_sets(state, set, roster));
}

template <ScalarType S>
WeightMatrix<S> weights_from_neighbors(const NeighborSets& nbrs)
{
    WeightMatrix<S> w(nbrs.size());
    for (std::size_t i = 0; i < nbrs.size(); ++i) {
        if (nbrs[i].empty())
            throw ModelError("agent " + std::to_string(i) + " has no neighbors");
        const S wij = S(1) / S(static_cast<long>(nbrs[i].size()));
        for (std::size_t j : nbrs[i])
            w(i, j) = wij;
    }
    return w;
}

/// W with x(t+1) = W x(t); w_ij = 1/|N_i| for j in N_i.
template <ScalarType S>
WeightMatrix<S> weight_matrix(const OpinionState<S>& state, const ConfidenceSet<S>& set, const AgentRoster& roster)
{
    return weights_from_neighbors<S>(neighbor_sets(state, set, roster));
}

/// Restriction of W to the regular agents with the weight placed on stubborn
/// agents absorbed into the diagonal. Row/column k corresponds to
/// roster.regular()[k].
template <ScalarType S>
WeightMatrix<S> reduced_stubborn_weights(const WeightMatrix<S>& w, const AgentRoster& roster)
{
    if (!roster.has_stubborn())
        throw DomainError("reduced_stubborn_weights: roster has no stubborn agents");
    if (w.n() != roster.n())
        throw DimensionError("weight matrix size differs from roster size");
    const auto reg = roster.regular();
    WeightMatrix<S> out(reg.size());
    for (std::size_t a = 0; a < reg.size(); ++a) {
        for (std::size_t b = 0; b < reg.size(); ++b)
            out(a, b) = w(reg[a], reg[b]);
        for (std::size_t l : roster.stubborn())
            out(a, a) += w(reg[a], l);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Outcomes and simulation.

enum class OutcomeKind { Terminated, Periodic, ConvergentNonTerminating, Undetermined };

inline const char* to_string(OutcomeKind k)
{
    switch (k) {
    case OutcomeKind::Terminated: return "terminated";
    case OutcomeKind::Periodic: return "periodic";
    case OutcomeKind::ConvergentNonTerminating: return "convergent_non_terminating";
    default: return "undetermined";
    }
}

inline OutcomeKind parse_outcome_kind(std::string_view s)
{
    for (auto k : {OutcomeKind::Terminated, OutcomeKind::Periodic, OutcomeKind::ConvergentNonTerminating,
                   OutcomeKind::Undetermined})
        if (s == to_string(k))
            return k;
    throw ParseError("unknown outcome kind '" + std::string(s) + "'");
}

/// Fixed point: step(states[at_step]) == states[at_step].
template <ScalarType S>
struct Terminated
{
    std::size_t at_step;
    OpinionState<S> final_state;
};

/// states[offset + period] == states[offset]; cycle_states holds both ends.
template <ScalarType S>
struct Periodic
{
    std::size_t offset;
    std::size_t period;
    std::vector<OpinionState<S>> cycle_states;
};

/// Evidence (not proof) of convergence without termination: the neighbor
/// structure stayed constant for `window` steps while the spread of every
/// neighborhood shrank by the same factor each step.
template <ScalarType S>
struct ConvergentNonTerminating
{
    std::size_t detected_at;
    std::size_t window;
    S contraction_factor;
};

struct Undetermined
{
    std::size_t max_steps;
    /// Float backend: successive states agreed within tolerance for the
    /// configured number of steps.
    bool numerically_converged = false;
    std::size_t at_step = 0;
};

template <ScalarType S>
using Outcome = std::variant<Terminated<S>, Periodic<S>, ConvergentNonTerminating<S>, Undetermined>;

template <ScalarType S>
OutcomeKind kind_of(const Outcome<S>& o)
{
    return static_cast<OutcomeKind>(o.index());
}

struct Limits
{
    std::size_t max_steps = 10000;
    bool cycle_check = true;
    /// Steps of constant neighbor structure and constant contraction needed
    /// before an exact run is classified ConvergentNonTerminating; 0 disables.
    std::size_t convergence_window = 16;
    /// Float backend only: max-norm step size below which a step counts as
    /// stalled; `float_window` stalled steps in a row stop the run.
    double float_tolerance = 1e-10;
    std::size_t float_window = 10;
    bool record_neighbors = true;
};

template <ScalarType S>
struct Trajectory
{
    std::vector<OpinionState<S>> states;
    /// neighbor_history[t] = N(states[t]) for every recorded t.
    std::vector<NeighborSets> neighbor_history;
    Outcome<S> outcome = Undetermined{0};

    std::size_t steps() const noexcept { return states.empty() ? 0 : states.size() - 1; }
    const OpinionState<S>& initial() const { return states.front(); }
    const OpinionState<S>& final_state() const { return states.back(); }

    WeightMatrix<S> weight_matrix_at(std::size_t t) const { return weights_from_neighbors<S>(neighbor_history.at(t)); }
};

namespace detail {

// Largest max-norm diameter over the non-singleton neighborhoods.
template <ScalarType S>
S neighborhood_spread(const OpinionState<S>& state, const NeighborSets& nbrs)
{
    S best(0);
    for (const auto& ni : nbrs) {
        if (ni.size() < 2)
            continue;
        for (std::size_t k = 0; k < state.dim(); ++k) {
            S lo = state[ni.front()][k];
            S hi = lo;
            for (std::size_t j : ni) {
                lo = std::min(lo, state[j][k]);
                hi = std::max(hi, state[j][k]);
            }
            best = std::max(best, S(hi - lo));
        }
    }
    return best;
}

template <ScalarType S>
S max_step_size(const OpinionState<S>& a, const OpinionState<S>& b)
{
    S best(0);
    for (std::size_t i = 0; i < a.n(); ++i)
        best = std::max(best, norm_inf(sub(a[i], b[i])));
    return best;
}

} // namespace detail

/// Iterates the dynamics from `initial` until a fixed point, an exact state
/// revisit (exact backend), convergence evidence, or the step cap.
template <ScalarType S>
Trajectory<S> simulate(const OpinionState<S>& initial, const ConfidenceSet<S>& set, const AgentRoster& roster,
                       const Limits& limits = {})
{
    if (limits.max_steps == 0)
        throw DomainError("simulate: max_steps must be at least 1");
    detail::check_compatible(initial, set, roster);
    if (!set.metadata().zero_member && !set.contains(Vec<S>(set.dim())))
        throw ModelError("confidence set does not contain 0; neighbor sets may be empty");

    constexpr bool exact = scalar_traits<S>::exact;
    Trajectory<S> traj;
    traj.states.push_back(initial);
    traj.states.back().step = 0;

    // hash -> indices of states with that hash
    std::unordered_map<std::size_t, std::vector<std::size_t>> seen;
    if (exact && limits.cycle_check)
        seen[initial.hash()].push_back(0);

    NeighborSets prev_nbrs;
    std::optional<S> prev_spread;
    std::optional<S> prev_factor;
    std::size_t contraction_streak = 0;
    std::size_t stalled = 0;

    for (std::size_t t = 0; t < limits.max_steps; ++t) {
        const OpinionState<S>& cur = traj.states.back();
        NeighborSets nbrs = neighbor_sets(cur, set, roster);
        OpinionState<S> next = apply_averaging(cur, nbrs);

        if (next.same_opinions(cur)) {
            if (limits.record_neighbors)
                traj.neighbor_history.push_back(std::move(nbrs));
            traj.outcome = Terminated<S>{t, cur};
            return traj;
        }

        if constexpr (exact) {
            if (limits.convergence_window > 0) {
                const S spread = detail::neighborhood_spread(cur, nbrs);
                bool extended = false;
                if (t > 0 && nbrs == prev_nbrs && prev_spread && *prev_spread > S(0) && spread > S(0)) {
                    const S factor = spread / *prev_spread;
                    if (factor < S(1)) {
                        if (prev_factor && *prev_factor == factor) {
                            ++contraction_streak;
                            extended = true;
                        } else {
                            contraction_streak = 1;
                            extended = true;
                        }
                        prev_factor = factor;
                    }
                }
                if (!extended) {
                    contraction_streak = 0;
                    prev_factor.reset();
                }
                prev_spread = spread;
                if (contraction_streak >= limits.convergence_window) {
                    if (limits.record_neighbors)
                        traj.neighbor_history.push_back(std::move(nbrs));
                    traj.outcome = ConvergentNonTerminating<S>{t, limits.convergence_window, *prev_factor};
                    return traj;
                }
            }
            prev_nbrs = nbrs;
        } else {
            if (to_double(detail::max_step_size(cur, next)) < limits.float_tolerance)
                ++stalled;
            else
                stalled = 0;
        }

        if (limits.record_neighbors)
            traj.neighbor_history.push_back(std::move(nbrs));
        traj.states.push_back(std::move(next));
        const std::size_t idx = traj.states.size() - 1;

        if constexpr (exact) {
            if (limits.cycle_check) {
                auto& bucket = seen[traj.states[idx].hash()];
                for (std::size_t s : bucket) {
                    if (traj.states[s].same_opinions(traj.states[idx])) {
                        Periodic<S> p{s, idx - s, {}};
                        p.cycle_states.assign(traj.states.begin() + static_cast<std::ptrdiff_t>(s), traj.states.end());
                        traj.outcome = std::move(p);
                        return traj;
                    }
                }
                bucket.push_back(idx);
            }
        } else {
            if (limits.float_window > 0 && stalled >= limits.float_window) {
                traj.outcome = Undetermined{limits.max_steps, true, idx};
                return traj;
            }
        }
    }
    traj.outcome = Undetermined{limits.max_steps, false, traj.states.size() - 1};
    return traj;
}

} // namespace scod
