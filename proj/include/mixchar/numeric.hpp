#pragma once

#include <boost/integer/mod_inverse.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace mixchar {

using Int = boost::multiprecision::cpp_int;

/* Error taxonomy shared by the whole library.  The CLI maps these to exit
 * codes: config_error -> 1, invariant_violation -> 2. */
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct invariant_violation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/* Checked 64-bit arithmetic for valuation bookkeeping.  Caps: operands must
 * stay below 2^62 in absolute value; violations throw instead of wrapping. */
inline long long chk_add(long long a, long long b)
{
    long long r;
    if (__builtin_add_overflow(a, b, &r))
        throw std::overflow_error("chk_add: 64-bit overflow");
    return r;
}

inline long long chk_mul(long long a, long long b)
{
    long long r;
    if (__builtin_mul_overflow(a, b, &r))
        throw std::overflow_error("chk_mul: 64-bit overflow");
    return r;
}

inline Int ipow(const Int& base, long long e)
{
    if (e < 0) throw std::invalid_argument("ipow: negative exponent");
    Int acc = 1, b = base;
    long long k = e;
    while (k > 0) {
        if (k & 1) acc *= b;
        b *= b;
        k >>= 1;
    }
    return acc;
}

/* p^e as a big integer. */
inline Int ppow(long long p, long long e)
{
    return ipow(Int(p), e);
}

/* x reduced into [0, m). */
inline Int mod_reduce(Int x, const Int& m)
{
    x %= m;
    if (x < 0) x += m;
    return x;
}

inline Int mod_inverse(const Int& x, const Int& m)
{
    Int r = boost::integer::mod_inverse(mod_reduce(x, m), m);
    if (r == 0) throw std::invalid_argument("mod_inverse: not invertible");
    return r;
}

/* p-adic valuation of a nonzero integer. */
inline long long val_p_int(Int x, long long p)
{
    if (x == 0) throw std::invalid_argument("val_p_int: zero");
    if (x < 0) x = -x;
    long long v = 0;
    while (x % p == 0) {
        x /= p;
        ++v;
    }
    return v;
}

/* Exact integer binomial coefficient. */
inline Int binom_int(long long n, long long k)
{
    if (k < 0 || k > n) return 0;
    if (k > n - k) k = n - k;
    Int acc = 1;
    for (long long r = 0; r < k; ++r) {
        acc *= (n - r);
        acc /= (r + 1);
    }
    return acc;
}

/* binom(x, k) as a polynomial value at an arbitrary integer x (the partial
 * quotients stay integral, so the incremental exact division is valid). */
inline Int binom_int(const Int& x, long long k)
{
    if (k < 0) return 0;
    Int acc = 1;
    for (long long r = 0; r < k; ++r) {
        acc *= (x - r);
        acc /= (r + 1);
    }
    return acc;
}

inline std::string to_string(const Int& x)
{
    return x.str();
}

}  // namespace mixchar
