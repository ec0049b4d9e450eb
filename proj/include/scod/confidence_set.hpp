#pragma once

// Confidence sets: membership predicates over opinion differences, the
// catalog of named sets, set combinators and sampling-based certification of
// the structural metadata (symmetry, star shape, zero neighborhood).

#include "numerics.hpp"

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace scod {

enum class Symmetry { DeclaredTrue, DeclaredFalse, Unknown };
enum class BackendSupport { ExactOnly, FloatOnly, Both };

inline const char* to_string(Symmetry s)
{
    switch (s) {
    case Symmetry::DeclaredTrue: return "declared_true";
    case Symmetry::DeclaredFalse: return "declared_false";
    default: return "unknown";
    }
}

template <ScalarType S>
bool backend_supported(BackendSupport support)
{
    if constexpr (scalar_traits<S>::exact)
        return support != BackendSupport::FloatOnly;
    else
        return support != BackendSupport::ExactOnly;
}

template <ScalarType S>
struct SetMetadata
{
    Symmetry symmetric = Symmetry::Unknown;
    bool zero_member = false;
    /// Radius of a Euclidean ball around the origin contained in the set.
    std::optional<S> zero_neighborhood_radius;
    BackendSupport support = BackendSupport::Both;
    /// Points where membership changes; always included in certification.
    std::vector<Vec<S>> witnesses;
    std::string description;
};

template <ScalarType S>
class ConfidenceSet
{
public:
    using Predicate = std::function<bool(const Vec<S>&)>;

    ConfidenceSet(std::size_t dim, Predicate membership, SetMetadata<S> meta)
        : dim_(dim)
        , membership_(std::make_shared<const Predicate>(std::move(membership)))
        , meta_(std::make_shared<const SetMetadata<S>>(std::move(meta)))
    {
        if (dim_ == 0)
            throw DimensionError("confidence set dimension must be at least 1");
        if (!backend_supported<S>(meta_->support))
            throw BackendError("confidence set '" + meta_->description + "' does not support the "
                               + to_string(scalar_traits<S>::backend) + " backend");
    }

    std::size_t dim() const noexcept { return dim_; }
    const SetMetadata<S>& metadata() const noexcept { return *meta_; }

    bool contains(const Vec<S>& v) const
    {
        if (v.dim() != dim_)
            throw DimensionError("membership query of dimension " + std::to_string(v.dim())
                                 + " on a set of dimension " + std::to_string(dim_));
        return (*membership_)(v);
    }

private:
    std::size_t dim_;
    std::shared_ptr<const Predicate> membership_;
    std::shared_ptr<const SetMetadata<S>> meta_;
};

/// Exponent of an l_p ball; `infinite` selects the max norm.
struct Exponent
{
    bool infinite = false;
    Rational value = 2;

    static Exponent inf() { return {true, 0}; }
    static Exponent of(Rational p) { return {false, std::move(p)}; }

    bool is_integer() const { return !infinite && boost::multiprecision::denominator(value) == 1; }
};

namespace detail {

template <ScalarType S>
S ipow(const S& x, long e)
{
    S r(1);
    for (long i = 0; i < e; ++i)
        r *= x;
    return r;
}

template <ScalarType S>
Vec<S> unit_vec(std::size_t dim, std::size_t k, const S& value)
{
    Vec<S> v(dim);
    v[k] = value;
    return v;
}

template <ScalarType S>
std::vector<Vec<S>> with_negations(std::vector<Vec<S>> pts)
{
    const std::size_t n = pts.size();
    for (std::size_t i = 0; i < n; ++i)
        pts.push_back(negate(pts[i]));
    return pts;
}

template <ScalarType S>
Vec<S> scalar_vec(const S& x)
{
    return Vec<S>{x};
}

} // namespace detail

// ---------------------------------------------------------------------------
// Catalog constructors. Boundary conventions: intervals are open, balls,
// stripes, min-coordinate sets and the triangle are closed.

/// Closed l_p ball {x : |x_1|^p + ... + |x_d|^p <= R^p}. Exact membership for
/// integer p and p = inf; other exponents are float-only.
template <ScalarType S>
ConfidenceSet<S> lp_ball(std::size_t dim, const Exponent& p, const Rational& radius)
{
    if (radius <= 0)
        throw DomainError("lp_ball: radius must be positive");
    if (!p.infinite && p.value <= 0)
        throw DomainError("lp_ball: exponent must be positive");
    if (dim == 0)
        throw DimensionError("lp_ball: dimension must be at least 1");

    SetMetadata<S> meta;
    meta.symmetric = Symmetry::DeclaredTrue;
    meta.zero_member = true;
    meta.description = "lp_ball(p=" + (p.infinite ? std::string("inf") : to_string(p.value)) + ", R="
                       + to_string(radius) + ")";

    // Euclidean ball of radius R / d^c inside the l_p ball, c = 0 for p >= 2,
    // c = 1 for 1 <= p < 2, c = ceil(1/p) below 1.
    Rational inner = radius;
    if (!p.infinite && p.value < 2) {
        long c = 1;
        if (p.value < 1) {
            const Rational inv = 1 / p.value;
            const Integer fl = boost::multiprecision::numerator(inv) / boost::multiprecision::denominator(inv);
            c = fl.convert_to<long>() + (Rational(fl) == inv ? 0 : 1);
        }
        inner = radius / detail::ipow<Rational>(Rational(static_cast<long>(dim)), c);
    }
    meta.zero_neighborhood_radius = from_rational<S>(inner);

    const S r = from_rational<S>(radius);
    for (std::size_t k = 0; k < dim; ++k)
        meta.witnesses.push_back(detail::unit_vec<S>(dim, k, r));
    meta.witnesses = detail::with_negations(std::move(meta.witnesses));

    if (p.infinite) {
        meta.support = BackendSupport::Both;
        return ConfidenceSet<S>(dim, [r](const Vec<S>& v) { return norm_inf(v) <= r; }, std::move(meta));
    }
    if (p.is_integer()) {
        const long e = boost::multiprecision::numerator(p.value).convert_to<long>();
        meta.support = BackendSupport::Both;
        const S bound = detail::ipow(r, e);
        return ConfidenceSet<S>(
            dim,
            [e, bound](const Vec<S>& v) {
                S acc(0);
                for (const auto& x : v.coords())
                    acc += detail::ipow(scalar_abs(x), e);
                return acc <= bound;
            },
            std::move(meta));
    }
    meta.support = BackendSupport::FloatOnly;
    if constexpr (scalar_traits<S>::exact) {
        throw BackendError("lp_ball with non-integer exponent " + to_string(p.value)
                           + " has irrational membership and is float-only");
    } else {
        const double pe = to_double(p.value);
        const double bound = std::pow(to_double(radius), pe);
        return ConfidenceSet<S>(
            dim,
            [pe, bound](const Vec<S>& v) {
                double acc = 0;
                for (double x : v.coords())
                    acc += std::pow(std::abs(x), pe);
                return acc <= bound + 1e-12;
            },
            std::move(meta));
    }
}

/// Open interval (low, high) with finitely many points removed.
template <ScalarType S>
ConfidenceSet<S> punctured_interval(const Rational& low, const Rational& high, std::vector<Rational> punctures)
{
    if (!(low < high))
        throw DomainError("punctured_interval: low must be below high");
    std::sort(punctures.begin(), punctures.end());
    punctures.erase(std::unique(punctures.begin(), punctures.end()), punctures.end());

    SetMetadata<S> meta;
    const bool zero_punctured = std::binary_search(punctures.begin(), punctures.end(), Rational(0));
    meta.zero_member = low < 0 && 0 < high && !zero_punctured;

    bool symmetric = low == -high;
    for (const auto& m : punctures) {
        if (m <= low || m >= high)
            continue;
        if (!std::binary_search(punctures.begin(), punctures.end(), Rational(-m)))
            symmetric = false;
    }
    meta.symmetric = symmetric ? Symmetry::DeclaredTrue : Symmetry::DeclaredFalse;

    if (meta.zero_member) {
        Rational radius = std::min(Rational(-low), high);
        for (const auto& m : punctures)
            if (m != 0)
                radius = std::min(radius, Rational(abs(m)));
        meta.zero_neighborhood_radius = from_rational<S>(radius);
    }

    // Breakpoints plus midpoints between consecutive breakpoints.
    std::vector<Rational> marks = punctures;
    marks.push_back(low);
    marks.push_back(high);
    std::sort(marks.begin(), marks.end());
    std::vector<Rational> probes = marks;
    for (std::size_t i = 0; i + 1 < marks.size(); ++i)
        probes.push_back((marks[i] + marks[i + 1]) / 2);
    for (const auto& q : probes)
        meta.witnesses.push_back(detail::scalar_vec(from_rational<S>(q)));
    meta.witnesses = detail::with_negations(std::move(meta.witnesses));

    std::string desc = "punctured_interval((" + to_string(low) + ", " + to_string(high) + ") \\ {";
    for (std::size_t i = 0; i < punctures.size(); ++i)
        desc += (i ? ", " : "") + to_string(punctures[i]);
    meta.description = desc + "})";

    std::vector<S> holes;
    for (const auto& m : punctures)
        holes.push_back(from_rational<S>(m));
    const S lo = from_rational<S>(low);
    const S hi = from_rational<S>(high);
    return ConfidenceSet<S>(
        1,
        [lo, hi, holes = std::move(holes)](const Vec<S>& v) {
            const S& x = v[0];
            if (!(lo < x && x < hi))
                return false;
            return std::find(holes.begin(), holes.end(), x) == holes.end();
        },
        std::move(meta));
}

/// Open interval (low, high).
template <ScalarType S>
ConfidenceSet<S> interval(const Rational& low, const Rational& high)
{
    return punctured_interval<S>(low, high, {});
}

/// Closed stripe {x : |x_1 + ... + x_d| <= R} of the averaged-based model.
template <ScalarType S>
ConfidenceSet<S> stripe(std::size_t dim, const Rational& radius)
{
    if (radius <= 0)
        throw DomainError("stripe: R must be positive");
    SetMetadata<S> meta;
    meta.symmetric = Symmetry::DeclaredTrue;
    meta.zero_member = true;
    meta.zero_neighborhood_radius = from_rational<S>(radius / static_cast<long>(dim));
    meta.description = "stripe(d=" + std::to_string(dim) + ", R=" + to_string(radius) + ")";
    const S r = from_rational<S>(radius);
    meta.witnesses = detail::with_negations(std::vector<Vec<S>>{detail::unit_vec<S>(dim, 0, r)});
    if (dim > 1) {
        Vec<S> skew(dim);
        skew[0] = r + S(3);
        skew[1] = S(-3);
        meta.witnesses.push_back(skew);
        meta.witnesses.push_back(negate(skew));
    }
    return ConfidenceSet<S>(
        dim,
        [r](const Vec<S>& v) {
            S acc(0);
            for (const auto& x : v.coords())
                acc += x;
            return scalar_abs(acc) <= r;
        },
        std::move(meta));
}

/// {x : |x_k| <= eps_k for some k}, closed.
template <ScalarType S>
ConfidenceSet<S> min_coordinate(std::vector<Rational> eps)
{
    if (eps.empty())
        throw DimensionError("min_coordinate: need at least one epsilon");
    for (const auto& e : eps)
        if (e <= 0)
            throw DomainError("min_coordinate: epsilons must be positive");
    const std::size_t dim = eps.size();
    SetMetadata<S> meta;
    meta.symmetric = Symmetry::DeclaredTrue;
    meta.zero_member = true;
    meta.zero_neighborhood_radius = from_rational<S>(*std::min_element(eps.begin(), eps.end()));
    std::string desc = "min_coordinate(eps=[";
    for (std::size_t k = 0; k < dim; ++k)
        desc += (k ? ", " : "") + to_string(eps[k]);
    meta.description = desc + "])";

    std::vector<S> bounds;
    for (const auto& e : eps)
        bounds.push_back(from_rational<S>(e));
    for (std::size_t k = 0; k < dim; ++k) {
        Vec<S> w(dim);
        for (std::size_t j = 0; j < dim; ++j)
            w[j] = S(3);
        w[k] = bounds[k];
        meta.witnesses.push_back(w);
    }
    meta.witnesses = detail::with_negations(std::move(meta.witnesses));
    return ConfidenceSet<S>(
        dim,
        [bounds = std::move(bounds)](const Vec<S>& v) {
            for (std::size_t k = 0; k < v.dim(); ++k)
                if (scalar_abs(v[k]) <= bounds[k])
                    return true;
            return false;
        },
        std::move(meta));
}

template <ScalarType S>
ConfidenceSet<S> min_coordinate(std::size_t dim, const Rational& eps)
{
    return min_coordinate<S>(std::vector<Rational>(dim, eps));
}

/// Closed equilateral triangle with centroid at the origin, one vertex at
/// (0, r). Membership: x_2 >= -r/2 and sqrt(3)|x_1| <= r - x_2, decided
/// exactly by squaring.
template <ScalarType S>
ConfidenceSet<S> triangle(const Rational& circumradius)
{
    if (circumradius <= 0)
        throw DomainError("triangle: circumradius must be positive");
    SetMetadata<S> meta;
    meta.symmetric = Symmetry::DeclaredFalse;
    meta.zero_member = true;
    meta.zero_neighborhood_radius = from_rational<S>(circumradius / 2);
    meta.description = "triangle(r=" + to_string(circumradius) + ")";
    const S r = from_rational<S>(circumradius);
    const S half = from_rational<S>(circumradius / 2);
    meta.witnesses = detail::with_negations(std::vector<Vec<S>>{
        vec_of<S>({0, circumradius}),
        vec_of<S>({0, circumradius * 3 / 5}),
        vec_of<S>({circumradius / 2, -circumradius * 3 / 10}),
        vec_of<S>({0, -circumradius / 2}),
    });
    return ConfidenceSet<S>(
        2,
        [r, half](const Vec<S>& v) {
            if (v[1] < -half)
                return false;
            const S slack = r - v[1];
            if (slack < S(0))
                return false;
            return S(3) * v[0] * v[0] <= slack * slack;
        },
        std::move(meta));
}

/// Ray union {x_1 > 0, x_2 = 0} u {x_1 < 0, x_2 = s x_1} u {x_1 < 0, x_2 = -s x_1}
/// together with the closed disk of the given radius.
template <ScalarType S>
ConfidenceSet<S> star_rays(const Rational& slope, const Rational& disk_radius)
{
    if (slope <= 0 || disk_radius <= 0)
        throw DomainError("star_rays: slope and radius must be positive");
    SetMetadata<S> meta;
    meta.symmetric = Symmetry::DeclaredFalse;
    meta.zero_member = true;
    meta.zero_neighborhood_radius = from_rational<S>(disk_radius);
    meta.description = "star_rays(slope=" + to_string(slope) + ", disk=" + to_string(disk_radius) + ")";
    meta.witnesses = detail::with_negations(std::vector<Vec<S>>{
        vec_of<S>({2, 0}),
        vec_of<S>({-5, -5 * slope}),
        vec_of<S>({-5, 5 * slope}),
        vec_of<S>({0, disk_radius}),
    });
    const S s = from_rational<S>(slope);
    const S r2 = from_rational<S>(disk_radius * disk_radius);
    return ConfidenceSet<S>(
        2,
        [s, r2](const Vec<S>& v) {
            if (norm2_sq(v) <= r2)
                return true;
            if (v[0] > S(0))
                return v[1] == S(0);
            if (v[0] < S(0))
                return v[1] == s * v[0] || v[1] == -(s * v[0]);
            return false;
        },
        std::move(meta));
}

/// Lines {x_2 = 0}, {x_2 = s x_1}, {x_2 = -s x_1} together with the closed disk.
template <ScalarType S>
ConfidenceSet<S> lines_ball(const Rational& slope, const Rational& disk_radius)
{
    if (slope <= 0 || disk_radius <= 0)
        throw DomainError("lines_ball: slope and radius must be positive");
    SetMetadata<S> meta;
    meta.symmetric = Symmetry::DeclaredTrue;
    meta.zero_member = true;
    meta.zero_neighborhood_radius = from_rational<S>(disk_radius);
    meta.description = "lines_ball(slope=" + to_string(slope) + ", disk=" + to_string(disk_radius) + ")";
    meta.witnesses = detail::with_negations(std::vector<Vec<S>>{
        vec_of<S>({4, 0}),
        vec_of<S>({-5, 5 * slope}),
        vec_of<S>({-5, -5 * slope}),
        vec_of<S>({-3, 1}),
    });
    const S s = from_rational<S>(slope);
    const S r2 = from_rational<S>(disk_radius * disk_radius);
    return ConfidenceSet<S>(
        2,
        [s, r2](const Vec<S>& v) {
            if (norm2_sq(v) <= r2)
                return true;
            return v[1] == S(0) || v[1] == s * v[0] || v[1] == -(s * v[0]);
        },
        std::move(meta));
}

/// Union of the coordinate hyperplanes {x_k = 0}; for d = 2 the cross of the
/// two axes. Symmetric, contains zero, but no ball around it.
template <ScalarType S>
ConfidenceSet<S> cross_lines(std::size_t dim = 2)
{
    if (dim < 2)
        throw DomainError("cross_lines: dimension must be at least 2");
    SetMetadata<S> meta;
    meta.symmetric = Symmetry::DeclaredTrue;
    meta.zero_member = true;
    meta.description = "cross_lines(d=" + std::to_string(dim) + ")";
    Vec<S> diag(dim);
    for (std::size_t k = 0; k < dim; ++k)
        diag[k] = S(-2);
    meta.witnesses = detail::with_negations(std::vector<Vec<S>>{
        detail::unit_vec<S>(dim, 0, S(-2)), detail::unit_vec<S>(dim, 1, S(-2)), diag});
    return ConfidenceSet<S>(
        dim,
        [](const Vec<S>& v) {
            for (const auto& x : v.coords())
                if (x == S(0))
                    return true;
            return false;
        },
        std::move(meta));
}

/// Finite point set.
template <ScalarType S>
ConfidenceSet<S> point_set(std::size_t dim, std::vector<Vec<S>> points)
{
    for (const auto& p : points)
        if (p.dim() != dim)
            throw DimensionError("point_set: point dimension mismatch");
    SetMetadata<S> meta;
    meta.zero_member = std::any_of(points.begin(), points.end(), [](const Vec<S>& p) { return p.is_zero(); });
    bool symmetric = true;
    for (const auto& p : points)
        if (std::find(points.begin(), points.end(), negate(p)) == points.end())
            symmetric = false;
    meta.symmetric = symmetric ? Symmetry::DeclaredTrue : Symmetry::DeclaredFalse;
    meta.description = "point_set(" + std::to_string(points.size()) + " points)";
    meta.witnesses = detail::with_negations(points);
    return ConfidenceSet<S>(
        dim,
        [points = std::move(points)](const Vec<S>& v) {
            return std::find(points.begin(), points.end(), v) != points.end();
        },
        std::move(meta));
}

/// Arbitrary user predicate with caller-declared metadata.
template <ScalarType S>
ConfidenceSet<S> custom_set(std::size_t dim, typename ConfidenceSet<S>::Predicate membership, SetMetadata<S> meta)
{
    return ConfidenceSet<S>(dim, std::move(membership), std::move(meta));
}

namespace detail {

inline BackendSupport combine_support(BackendSupport a, BackendSupport b)
{
    if (a == BackendSupport::Both)
        return b;
    if (b == BackendSupport::Both || a == b)
        return a;
    throw BackendError("combined sets have disjoint backend support");
}

} // namespace detail

template <ScalarType S>
ConfidenceSet<S> set_union(std::vector<ConfidenceSet<S>> parts)
{
    if (parts.empty())
        throw DomainError("union: needs at least one part");
    const std::size_t dim = parts.front().dim();
    SetMetadata<S> meta;
    meta.symmetric = Symmetry::DeclaredTrue;
    meta.support = BackendSupport::Both;
    meta.description = "union(";
    for (std::size_t i = 0; i < parts.size(); ++i) {
        const auto& m = parts[i].metadata();
        if (parts[i].dim() != dim)
            throw DimensionError("union: parts differ in dimension");
        meta.zero_member = meta.zero_member || m.zero_member;
        if (m.symmetric != Symmetry::DeclaredTrue)
            meta.symmetric = Symmetry::Unknown;
        if (m.zero_neighborhood_radius
            && (!meta.zero_neighborhood_radius || *meta.zero_neighborhood_radius < *m.zero_neighborhood_radius))
            meta.zero_neighborhood_radius = m.zero_neighborhood_radius;
        meta.support = detail::combine_support(meta.support, m.support);
        meta.witnesses.insert(meta.witnesses.end(), m.witnesses.begin(), m.witnesses.end());
        meta.description += (i ? ", " : "") + m.description;
    }
    meta.description += ")";
    return ConfidenceSet<S>(
        dim,
        [parts = std::move(parts)](const Vec<S>& v) {
            return std::any_of(parts.begin(), parts.end(), [&](const ConfidenceSet<S>& p) { return p.contains(v); });
        },
        std::move(meta));
}

/// base \ removed.
template <ScalarType S>
ConfidenceSet<S> set_difference(ConfidenceSet<S> base, ConfidenceSet<S> removed)
{
    if (base.dim() != removed.dim())
        throw DimensionError("difference: parts differ in dimension");
    const auto& a = base.metadata();
    const auto& b = removed.metadata();
    SetMetadata<S> meta;
    meta.symmetric = (a.symmetric == Symmetry::DeclaredTrue && b.symmetric == Symmetry::DeclaredTrue)
                         ? Symmetry::DeclaredTrue
                         : Symmetry::Unknown;
    meta.support = detail::combine_support(a.support, b.support);
    meta.zero_member = a.zero_member && !removed.contains(Vec<S>(base.dim()));
    meta.witnesses = a.witnesses;
    meta.witnesses.insert(meta.witnesses.end(), b.witnesses.begin(), b.witnesses.end());
    meta.description = "difference(" + a.description + ", " + b.description + ")";
    return ConfidenceSet<S>(
        base.dim(),
        [base, removed](const Vec<S>& v) { return base.contains(v) && !removed.contains(v); },
        std::move(meta));
}

/// base with finitely many points removed.
template <ScalarType S>
ConfidenceSet<S> puncture(ConfidenceSet<S> base, std::vector<Vec<S>> points)
{
    for (const auto& p : points)
        if (p.dim() != base.dim())
            throw DimensionError("puncture: point dimension mismatch");
    const auto& a = base.metadata();
    SetMetadata<S> meta;
    meta.support = a.support;
    const bool hits_zero = std::any_of(points.begin(), points.end(), [](const Vec<S>& p) { return p.is_zero(); });
    meta.zero_member = a.zero_member && !hits_zero;
    bool symmetric_points = true;
    for (const auto& p : points)
        if (std::find(points.begin(), points.end(), negate(p)) == points.end())
            symmetric_points = false;
    meta.symmetric = a.symmetric == Symmetry::DeclaredTrue && symmetric_points ? Symmetry::DeclaredTrue
                     : a.symmetric == Symmetry::DeclaredTrue                  ? Symmetry::Unknown
                                                                              : a.symmetric;
    if (a.zero_neighborhood_radius && !hits_zero) {
        // |p|_inf <= |p|_2, so the open ball of radius min |p|_inf misses every point.
        S radius = *a.zero_neighborhood_radius;
        for (const auto& p : points)
            radius = std::min(radius, norm_inf(p));
        meta.zero_neighborhood_radius = radius;
    }
    meta.witnesses = a.witnesses;
    const auto pw = detail::with_negations(points);
    meta.witnesses.insert(meta.witnesses.end(), pw.begin(), pw.end());
    meta.description = "puncture(" + a.description + ", " + std::to_string(points.size()) + " points)";
    return ConfidenceSet<S>(
        base.dim(),
        [base, points = std::move(points)](const Vec<S>& v) {
            return base.contains(v) && std::find(points.begin(), points.end(), v) == points.end();
        },
        std::move(meta));
}

// ---------------------------------------------------------------------------
// Named catalog, addressable from scenario files.

using ParamValue = std::variant<Rational, std::string, std::vector<Rational>>;

struct SetSpec
{
    std::string name;
    std::map<std::string, ParamValue> params;
    std::vector<SetSpec> parts;
};

inline const std::vector<std::string>& catalog_names()
{
    static const std::vector<std::string> names = {
        "lp_ball",        "interval",           "punctured_interval", "stripe",
        "min_coordinate", "triangle",           "star_rays_example3", "lines_ball_example4",
        "cross_lines",    "union",              "difference",         "puncture",
        "custom",
    };
    return names;
}

namespace detail {

inline const ParamValue* find_param(const SetSpec& spec, const std::string& key)
{
    auto it = spec.params.find(key);
    return it == spec.params.end() ? nullptr : &it->second;
}

inline Rational param_rational(const SetSpec& spec, const std::string& key, std::optional<Rational> fallback = {})
{
    const ParamValue* v = find_param(spec, key);
    if (!v) {
        if (fallback)
            return *fallback;
        throw CatalogError(spec.name + ": missing parameter '" + key + "'");
    }
    if (const auto* q = std::get_if<Rational>(v))
        return *q;
    if (const auto* s = std::get_if<std::string>(v))
        return parse_rational(*s);
    throw CatalogError(spec.name + ": parameter '" + key + "' must be a number");
}

inline std::size_t param_dim(const SetSpec& spec, std::size_t fallback)
{
    const Rational d = param_rational(spec, "d", Rational(static_cast<long>(fallback)));
    if (d < 1 || boost::multiprecision::denominator(d) != 1)
        throw DomainError(spec.name + ": d must be a positive integer");
    return boost::multiprecision::numerator(d).convert_to<std::size_t>();
}

inline std::vector<Rational> param_list(const SetSpec& spec, const std::string& key, bool required)
{
    const ParamValue* v = find_param(spec, key);
    if (!v) {
        if (required)
            throw CatalogError(spec.name + ": missing parameter '" + key + "'");
        return {};
    }
    if (const auto* l = std::get_if<std::vector<Rational>>(v))
        return *l;
    return {param_rational(spec, key)};
}

inline Exponent param_exponent(const SetSpec& spec)
{
    const ParamValue* v = find_param(spec, "p");
    if (!v)
        return Exponent::of(2);
    if (const auto* s = std::get_if<std::string>(v)) {
        if (*s == "inf" || *s == "infinity")
            return Exponent::inf();
        return Exponent::of(parse_rational(*s));
    }
    return Exponent::of(param_rational(spec, "p"));
}

template <ScalarType S>
std::vector<Vec<S>> param_points(const SetSpec& spec, std::size_t dim)
{
    const auto flat = param_list(spec, "points", false);
    if (flat.size() % dim != 0)
        throw CatalogError(spec.name + ": 'points' length must be a multiple of d");
    std::vector<Vec<S>> pts;
    for (std::size_t i = 0; i < flat.size(); i += dim) {
        Vec<S> p(dim);
        for (std::size_t k = 0; k < dim; ++k)
            p[k] = from_rational<S>(flat[i + k]);
        pts.push_back(std::move(p));
    }
    return pts;
}

} // namespace detail

/// Builds a named set. Parameters are exact rationals (or "inf" for p).
template <ScalarType S>
ConfidenceSet<S> catalog_build(const SetSpec& spec)
{
    using namespace detail;
    const std::string& n = spec.name;
    if (n == "lp_ball")
        return lp_ball<S>(param_dim(spec, 2), param_exponent(spec), param_rational(spec, "R", Rational(1)));
    if (n == "interval")
        return interval<S>(param_rational(spec, "low"), param_rational(spec, "high"));
    if (n == "punctured_interval")
        return punctured_interval<S>(param_rational(spec, "low"), param_rational(spec, "high"),
                                     param_list(spec, "punctures", false));
    if (n == "stripe")
        return stripe<S>(param_dim(spec, 2), param_rational(spec, "R", Rational(1)));
    if (n == "min_coordinate") {
        auto eps = param_list(spec, "eps", true);
        const std::size_t dim = param_dim(spec, eps.size() == 1 ? 2 : eps.size());
        if (eps.size() == 1)
            eps.assign(dim, eps.front());
        if (eps.size() != dim)
            throw CatalogError("min_coordinate: eps list length must equal d");
        return min_coordinate<S>(std::move(eps));
    }
    if (n == "triangle")
        return triangle<S>(param_rational(spec, "r", Rational(1)));
    if (n == "star_rays_example3")
        return star_rays<S>(param_rational(spec, "slope", Rational(1, 5)), param_rational(spec, "radius", Rational(1)));
    if (n == "lines_ball_example4")
        return lines_ball<S>(param_rational(spec, "slope", Rational(1, 5)), param_rational(spec, "radius", Rational(1)));
    if (n == "cross_lines")
        return cross_lines<S>(param_dim(spec, 2));
    if (n == "union") {
        std::vector<ConfidenceSet<S>> parts;
        for (const auto& p : spec.parts)
            parts.push_back(catalog_build<S>(p));
        return set_union<S>(std::move(parts));
    }
    if (n == "difference") {
        if (spec.parts.size() != 2)
            throw CatalogError("difference: needs exactly two parts");
        return set_difference<S>(catalog_build<S>(spec.parts[0]), catalog_build<S>(spec.parts[1]));
    }
    if (n == "puncture") {
        if (spec.parts.size() != 1)
            throw CatalogError("puncture: needs exactly one part");
        auto base = catalog_build<S>(spec.parts[0]);
        auto pts = param_points<S>(spec, base.dim());
        return puncture<S>(std::move(base), std::move(pts));
    }
    if (n == "custom") {
        const std::size_t dim = param_dim(spec, 1);
        return point_set<S>(dim, param_points<S>(spec, dim));
    }
    throw CatalogError("unknown confidence set '" + n + "'");
}

// ---------------------------------------------------------------------------
// Certification by sampling. These are checks, not proofs.

namespace detail {

template <ScalarType S>
Rational sample_half_width(const ConfidenceSet<S>& set)
{
    Rational r = 1;
    if (const auto& rad = set.metadata().zero_neighborhood_radius) {
        if constexpr (scalar_traits<S>::exact)
            r = std::max(Rational(1), *rad);
        else
            r = std::max(Rational(1), Rational(*rad));
    }
    return 2 * r;
}

// Half the samples sit on a quarter-integer grid so that lines, rays and
// punctures are hit; the rest on a 2^-32 grid.
template <ScalarType S>
Vec<S> sample_box_point(SplitMix64& rng, std::size_t dim, const Rational& half)
{
    Vec<S> v(dim);
    const bool coarse = (rng.next() & 1) != 0;
    const Rational quarters = half * 4;
    const long m = Integer(boost::multiprecision::numerator(quarters) / boost::multiprecision::denominator(quarters))
                       .convert_to<long>();
    for (std::size_t k = 0; k < dim; ++k) {
        Rational q;
        if (coarse) {
            q = Rational(rng.between(-m, m), 4);
        } else {
            q = (2 * rng.unit(32) - 1) * half;
        }
        v[k] = from_rational<S>(q);
    }
    return v;
}

template <ScalarType S>
std::vector<Vec<S>> certification_points(const ConfidenceSet<S>& set, std::size_t samples, std::uint64_t seed)
{
    SplitMix64 rng(seed);
    const Rational half = sample_half_width(set);
    std::vector<Vec<S>> pts;
    pts.reserve(samples + set.metadata().witnesses.size());
    for (std::size_t i = 0; i < samples; ++i)
        pts.push_back(sample_box_point<S>(rng, set.dim(), half));
    for (const auto& w : set.metadata().witnesses)
        if (w.dim() == set.dim())
            pts.push_back(w);
    return pts;
}

} // namespace detail

/// Checks O = -O on pseudo-random samples from the box of side 4 max(1, R)
/// plus the declared witness points.
template <ScalarType S>
bool is_symmetric_certified(const ConfidenceSet<S>& set, std::size_t samples, std::uint64_t seed)
{
    if (samples == 0)
        throw DomainError("is_symmetric_certified: samples must be at least 1");
    for (const auto& v : detail::certification_points(set, samples, seed))
        if (set.contains(v) != set.contains(negate(v)))
            return false;
    return true;
}

/// Checks star shape at the origin: for each sampled member x, the points
/// x * k / (segment_points - 1), k = 0..segment_points-1, must be members.
template <ScalarType S>
bool is_star_shaped_certified(const ConfidenceSet<S>& set, std::size_t samples, std::size_t segment_points,
                              std::uint64_t seed)
{
    if (samples == 0)
        throw DomainError("is_star_shaped_certified: samples must be at least 1");
    if (segment_points < 2)
        throw DomainError("is_star_shaped_certified: segment_points must be at least 2");
    const long last = static_cast<long>(segment_points - 1);
    for (const auto& x : detail::certification_points(set, samples, seed)) {
        if (!set.contains(x))
            continue;
        for (long k = 0; k <= last; ++k)
            if (!set.contains(scale(x, from_rational<S>(Rational(k, last)))))
                return false;
    }
    return true;
}

/// Spot-checks the declared zero-neighborhood radius: sampled points with
/// Euclidean norm below R must be members. False when no radius is declared.
template <ScalarType S>
bool is_zero_neighborhood_certified(const ConfidenceSet<S>& set, std::size_t samples, std::uint64_t seed)
{
    const auto& rad = set.metadata().zero_neighborhood_radius;
    if (!rad)
        return false;
    const S r2 = *rad * *rad;
    SplitMix64 rng(seed);
    for (std::size_t i = 0; i < samples; ++i) {
        Vec<S> v(set.dim());
        for (std::size_t k = 0; k < set.dim(); ++k)
            v[k] = (S(2) * from_rational<S>(rng.unit(32)) - S(1)) * *rad;
        if (norm2_sq(v) < r2 && !set.contains(v))
            return false;
    }
    return set.contains(Vec<S>(set.dim()));
}

} // namespace scod
