#pragma once

// Scalar backends and fixed-dimension opinion vectors.
//
// Two backends are supported: an exact arbitrary-precision rational (GMP via
// Boost.Multiprecision) and IEEE double. Every container and algorithm in the
// library is templated on the scalar type, so a simulation is monomorphic in
// its backend and mixing the two does not compile.

#include <boost/multiprecision/gmp.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace scod {

class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error { public: using Error::Error; };
class DomainError : public Error { public: using Error::Error; };
class BackendError : public Error { public: using Error::Error; };
class CatalogError : public Error { public: using Error::Error; };
class ModelError : public Error { public: using Error::Error; };
class ParseError : public Error { public: using Error::Error; };

using Integer = boost::multiprecision::number<boost::multiprecision::gmp_int,
                                              boost::multiprecision::et_off>;
using Rational = boost::multiprecision::number<boost::multiprecision::gmp_rational,
                                               boost::multiprecision::et_off>;

enum class Backend { Exact, Float };

inline const char* to_string(Backend b)
{
    return b == Backend::Exact ? "exact" : "float";
}

inline Backend parse_backend(std::string_view s)
{
    if (s == "exact")
        return Backend::Exact;
    if (s == "float")
        return Backend::Float;
    throw ParseError("unknown backend '" + std::string(s) + "' (expected exact or float)");
}

namespace detail {

inline void hash_combine(std::size_t& seed, std::size_t v)
{
    seed ^= v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2);
}

inline std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t'))
        s.remove_suffix(1);
    return s;
}

inline bool all_digits(std::string_view s)
{
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

// GMP treats a leading 0 as an octal prefix.
inline Integer decimal_integer(std::string_view digits)
{
    const auto first = digits.find_first_not_of('0');
    return first == std::string_view::npos ? Integer(0) : Integer(std::string(digits.substr(first)));
}

inline Integer parse_integer(std::string_view s, std::string_view whole)
{
    bool neg = false;
    if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
        neg = s.front() == '-';
        s.remove_prefix(1);
    }
    if (!all_digits(s))
        throw ParseError("malformed number '" + std::string(whole) + "'");
    Integer v = decimal_integer(s);
    return neg ? Integer(-v) : v;
}

inline Integer pow10(long e)
{
    Integer r = 1;
    for (long i = 0; i < e; ++i)
        r *= 10;
    return r;
}

// Parses "p", "p/q" or a decimal literal ("-0.125", "1e-3") exactly.
inline Rational parse_rational(std::string_view text)
{
    const std::string_view s = trim(text);
    if (s.empty())
        throw ParseError("empty number");
    if (auto slash = s.find('/'); slash != std::string_view::npos) {
        Integer num = parse_integer(trim(s.substr(0, slash)), s);
        Integer den = parse_integer(trim(s.substr(slash + 1)), s);
        if (den == 0)
            throw ParseError("zero denominator in '" + std::string(s) + "'");
        return Rational(num, den);
    }

    std::string_view body = s;
    long exponent = 0;
    if (auto e = body.find_first_of("eE"); e != std::string_view::npos) {
        std::string_view exp_part = body.substr(e + 1);
        bool neg = false;
        if (!exp_part.empty() && (exp_part.front() == '-' || exp_part.front() == '+')) {
            neg = exp_part.front() == '-';
            exp_part.remove_prefix(1);
        }
        if (!all_digits(exp_part) || exp_part.size() > 6)
            throw ParseError("malformed exponent in '" + std::string(s) + "'");
        exponent = std::stol(std::string(exp_part));
        if (neg)
            exponent = -exponent;
        body = body.substr(0, e);
    }
    bool neg = false;
    if (!body.empty() && (body.front() == '-' || body.front() == '+')) {
        neg = body.front() == '-';
        body.remove_prefix(1);
    }
    std::string digits;
    long frac_len = 0;
    if (auto dot = body.find('.'); dot != std::string_view::npos) {
        std::string_view ip = body.substr(0, dot);
        std::string_view fp = body.substr(dot + 1);
        if ((!ip.empty() && !all_digits(ip)) || (!fp.empty() && !all_digits(fp)) || (ip.empty() && fp.empty()))
            throw ParseError("malformed number '" + std::string(s) + "'");
        digits = std::string(ip) + std::string(fp);
        frac_len = static_cast<long>(fp.size());
    } else {
        if (!all_digits(body))
            throw ParseError("malformed number '" + std::string(s) + "'");
        digits = std::string(body);
    }
    Integer num = decimal_integer(digits);
    if (neg)
        num = -num;
    const long shift = exponent - frac_len;
    if (shift >= 0)
        return Rational(Integer(num * pow10(shift)), Integer(1));
    return Rational(num, pow10(-shift));
}

inline std::size_t hash_mpz(const __mpz_struct* z)
{
    std::size_t seed = std::hash<int>{}(z->_mp_size);
    const int limbs = z->_mp_size < 0 ? -z->_mp_size : z->_mp_size;
    for (int i = 0; i < limbs; ++i)
        hash_combine(seed, std::hash<mp_limb_t>{}(z->_mp_d[i]));
    return seed;
}

} // namespace detail

using detail::parse_rational;

template <class S>
struct scalar_traits;

template <>
struct scalar_traits<Rational>
{
    static constexpr Backend backend = Backend::Exact;
    static constexpr bool exact = true;

    static Rational from_rational(const Rational& q) { return q; }

    static double to_double(const Rational& q)
    {
        static const Integer limit = Integer(1) << 53;
        const Integer num = boost::multiprecision::numerator(q);
        const Integer den = boost::multiprecision::denominator(q);
        if (abs(num) <= limit && den <= limit)
            return num.convert_to<double>() / den.convert_to<double>();
        return q.convert_to<double>();
    }

    // Canonical "p/q", or "p" when the denominator is one.
    static std::string to_string(const Rational& q)
    {
        const Integer den = boost::multiprecision::denominator(q);
        if (den == 1)
            return boost::multiprecision::numerator(q).str();
        return boost::multiprecision::numerator(q).str() + "/" + den.str();
    }

    static Rational parse(std::string_view s) { return detail::parse_rational(s); }

    static std::size_t hash(const Rational& q)
    {
        const auto& raw = q.backend().data();
        std::size_t seed = detail::hash_mpz(mpq_numref(raw));
        detail::hash_combine(seed, detail::hash_mpz(mpq_denref(raw)));
        return seed;
    }
};

template <>
struct scalar_traits<double>
{
    static constexpr Backend backend = Backend::Float;
    static constexpr bool exact = false;

    static double from_rational(const Rational& q) { return scalar_traits<Rational>::to_double(q); }
    static double to_double(double x) { return x; }

    // Shortest representation that parses back to the same double.
    static std::string to_string(double x)
    {
        char buf[64];
        auto res = std::to_chars(buf, buf + sizeof(buf), x);
        return std::string(buf, res.ptr);
    }

    static double parse(std::string_view text)
    {
        const std::string_view s = detail::trim(text);
        if (s.find('/') != std::string_view::npos)
            return from_rational(detail::parse_rational(s));
        std::string_view body = s;
        if (!body.empty() && body.front() == '+')
            body.remove_prefix(1);
        double v = 0;
        auto res = std::from_chars(body.data(), body.data() + body.size(), v);
        if (res.ec != std::errc() || res.ptr != body.data() + body.size())
            throw ParseError("malformed number '" + std::string(s) + "'");
        return v;
    }

    static std::size_t hash(double x) { return std::hash<double>{}(x); }
};

template <class S>
concept ScalarType = requires { scalar_traits<S>::backend; };

template <ScalarType S>
S from_rational(const Rational& q)
{
    return scalar_traits<S>::from_rational(q);
}

template <ScalarType S>
double to_double(const S& x)
{
    return scalar_traits<S>::to_double(x);
}

template <ScalarType S>
std::string to_string(const S& x)
{
    return scalar_traits<S>::to_string(x);
}

template <ScalarType S>
S parse_scalar(std::string_view s)
{
    return scalar_traits<S>::parse(s);
}

template <ScalarType S>
S scalar_abs(const S& x)
{
    return x < S(0) ? S(-x) : x;
}

/// An opinion vector in R^d. The dimension is fixed at construction.
template <ScalarType S>
class Vec
{
public:
    using scalar_type = S;

    explicit Vec(std::size_t dim)
        : coords_(dim, S(0))
    {
        if (dim == 0)
            throw DimensionError("vector dimension must be at least 1");
    }

    explicit Vec(std::vector<S> coords)
        : coords_(std::move(coords))
    {
        if (coords_.empty())
            throw DimensionError("vector dimension must be at least 1");
    }

    Vec(std::initializer_list<S> coords)
        : Vec(std::vector<S>(coords))
    {
    }

    std::size_t dim() const noexcept { return coords_.size(); }
    const S& operator[](std::size_t k) const { return coords_[k]; }
    S& operator[](std::size_t k) { return coords_[k]; }
    std::span<const S> coords() const noexcept { return coords_; }

    bool is_zero() const
    {
        return std::all_of(coords_.begin(), coords_.end(), [](const S& x) { return x == S(0); });
    }

    friend bool operator==(const Vec& a, const Vec& b) = default;

private:
    std::vector<S> coords_;
};

/// Builds a vector for any backend from exact literals.
template <ScalarType S>
Vec<S> vec_of(std::initializer_list<Rational> coords)
{
    std::vector<S> out;
    out.reserve(coords.size());
    for (const auto& c : coords)
        out.push_back(from_rational<S>(c));
    return Vec<S>(std::move(out));
}

template <ScalarType S>
Vec<S> convert_vec(const Vec<Rational>& v)
{
    std::vector<S> out;
    out.reserve(v.dim());
    for (const auto& c : v.coords())
        out.push_back(from_rational<S>(c));
    return Vec<S>(std::move(out));
}

namespace detail {

template <ScalarType S>
void require_same_dim(const Vec<S>& a, const Vec<S>& b)
{
    if (a.dim() != b.dim())
        throw DimensionError("dimension mismatch: " + std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
}

} // namespace detail

template <ScalarType S>
Vec<S> add(const Vec<S>& a, const Vec<S>& b)
{
    detail::require_same_dim(a, b);
    Vec<S> out(a.dim());
    for (std::size_t k = 0; k < a.dim(); ++k)
        out[k] = a[k] + b[k];
    return out;
}

template <ScalarType S>
Vec<S> sub(const Vec<S>& a, const Vec<S>& b)
{
    detail::require_same_dim(a, b);
    Vec<S> out(a.dim());
    for (std::size_t k = 0; k < a.dim(); ++k)
        out[k] = a[k] - b[k];
    return out;
}

template <ScalarType S>
Vec<S> negate(const Vec<S>& a)
{
    Vec<S> out(a.dim());
    for (std::size_t k = 0; k < a.dim(); ++k)
        out[k] = -a[k];
    return out;
}

template <ScalarType S>
Vec<S> scale(const Vec<S>& a, const S& factor)
{
    Vec<S> out(a.dim());
    for (std::size_t k = 0; k < a.dim(); ++k)
        out[k] = a[k] * factor;
    return out;
}

/// Divides every coordinate by a positive integer.
template <ScalarType S>
Vec<S> scale_div(const Vec<S>& a, std::size_t k)
{
    if (k == 0)
        throw DomainError("scale_div: divisor must be positive");
    const S divisor = S(static_cast<long>(k));
    Vec<S> out(a.dim());
    for (std::size_t c = 0; c < a.dim(); ++c)
        out[c] = a[c] / divisor;
    return out;
}

template <ScalarType S>
S norm2_sq(const Vec<S>& a)
{
    S acc(0);
    for (const auto& x : a.coords())
        acc += x * x;
    return acc;
}

template <ScalarType S>
S norm_inf(const Vec<S>& a)
{
    S best(0);
    for (const auto& x : a.coords())
        best = std::max(best, scalar_abs(x));
    return best;
}

template <ScalarType S>
Vec<S> operator+(const Vec<S>& a, const Vec<S>& b) { return add(a, b); }

template <ScalarType S>
Vec<S> operator-(const Vec<S>& a, const Vec<S>& b) { return sub(a, b); }

template <ScalarType S>
Vec<S> operator-(const Vec<S>& a) { return negate(a); }

template <ScalarType S>
std::size_t hash_vec(const Vec<S>& v)
{
    std::size_t seed = v.dim();
    for (const auto& x : v.coords())
        detail::hash_combine(seed, scalar_traits<S>::hash(x));
    return seed;
}

/// splitmix64: state += 0x9E3779B97F4A7C15, then two xor-shift-multiply
/// rounds with 0xBF58476D1CE4E5B9 and 0x94D049BB133111EB and a final
/// xor-shift by 31. Identical output on every platform.
class SplitMix64
{
public:
    explicit SplitMix64(std::uint64_t seed) noexcept
        : state_(seed)
    {
    }

    std::uint64_t next() noexcept
    {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform integer in [0, bound) by rejection; bound must be positive.
    std::uint64_t below(std::uint64_t bound) noexcept
    {
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
        std::uint64_t x = next();
        while (x >= limit)
            x = next();
        return x % bound;
    }

    /// Uniform integer in [lo, hi].
    std::int64_t between(std::int64_t lo, std::int64_t hi) noexcept
    {
        return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo) + 1));
    }

    /// Exact dyadic value u / 2^bits with u uniform in [0, 2^bits).
    Rational unit(unsigned bits = 32)
    {
        const std::uint64_t u = bits >= 64 ? next() : next() >> (64 - bits);
        return Rational(Integer(u), Integer(1) << bits);
    }

private:
    std::uint64_t state_;
};

} // namespace scod
