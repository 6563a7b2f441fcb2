#pragma once

#include "numeric.hpp"

#include <compare>
#include <numeric>
#include <vector>

namespace mixchar {

/* Multi-index n = (n_1..n_d) of nonnegative exponents.  Ordered
 * lexicographically so it can key std::map deterministically. */
struct MultiIndex {
    std::vector<long long> e;

    MultiIndex() = default;
    explicit MultiIndex(std::size_t d) : e(d, 0) {}
    MultiIndex(std::initializer_list<long long> v) : e(v) {}

    std::size_t dim() const { return e.size(); }

    long long weight() const
    {
        long long w = 0;
        for (long long x : e) w = chk_add(w, x);
        return w;
    }

    bool is_zero() const
    {
        for (long long x : e)
            if (x != 0) return false;
        return true;
    }

    /* Smallest/largest coordinate (1-based) with a nonzero entry; 0 if none. */
    int bot() const
    {
        for (std::size_t i = 0; i < e.size(); ++i)
            if (e[i] != 0) return static_cast<int>(i) + 1;
        return 0;
    }
    int top() const
    {
        for (std::size_t i = e.size(); i > 0; --i)
            if (e[i - 1] != 0) return static_cast<int>(i);
        return 0;
    }

    long long operator[](int i) const { return e.at(i - 1); }  // 1-based

    MultiIndex plus(int i, long long k = 1) const
    {
        MultiIndex r = *this;
        r.e.at(i - 1) = chk_add(r.e.at(i - 1), k);
        return r;
    }

    friend MultiIndex operator+(const MultiIndex& a, const MultiIndex& b)
    {
        if (a.dim() != b.dim()) throw std::invalid_argument("MultiIndex: dim mismatch");
        MultiIndex r(a.dim());
        for (std::size_t i = 0; i < a.dim(); ++i) r.e[i] = chk_add(a.e[i], b.e[i]);
        return r;
    }

    /* Componentwise comparison (partial order). */
    friend bool leq(const MultiIndex& a, const MultiIndex& b)
    {
        if (a.dim() != b.dim()) throw std::invalid_argument("MultiIndex: dim mismatch");
        for (std::size_t i = 0; i < a.dim(); ++i)
            if (a.e[i] > b.e[i]) return false;
        return true;
    }

    auto operator<=>(const MultiIndex&) const = default;

    std::string str() const
    {
        std::string s = "(";
        for (std::size_t i = 0; i < e.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(e[i]);
        }
        return s + ")";
    }
};

/* All multi-indices of dimension d with weight() <= cap, in map order. */
inline std::vector<MultiIndex> indices_up_to(int d, long long cap)
{
    std::vector<MultiIndex> out;
    MultiIndex cur(static_cast<std::size_t>(d));
    auto rec = [&](auto&& self, int pos, long long left) -> void {
        if (pos == d) {
            out.push_back(cur);
            return;
        }
        for (long long v = 0; v <= left; ++v) {
            cur.e[pos] = v;
            self(self, pos + 1, left - v);
        }
        cur.e[pos] = 0;
    };
    rec(rec, 0, cap);
    std::sort(out.begin(), out.end());
    return out;
}

/* Base-p digit sum of n >= 0. */
inline long long digit_sum(long long p, long long n)
{
    if (p < 2 || n < 0) throw std::invalid_argument("digit_sum: bad args");
    long long s = 0;
    while (n > 0) {
        s += n % p;
        n /= p;
    }
    return s;
}

/* val_p(n!) by the Legendre formula (n - digit_sum_p(n)) / (p - 1).
 * Valid for 0 <= n < 2^62. */
inline long long val_p_factorial(long long p, long long n)
{
    if (p < 2 || n < 0) throw std::invalid_argument("val_p_factorial: bad args");
    return (n - digit_sum(p, n)) / (p - 1);
}

/* p^h clamped for divisor use; overflow-checked. */
inline long long pow_ll(long long p, int h)
{
    long long r = 1;
    for (int i = 0; i < h; ++i) r = chk_mul(r, p);
    return r;
}

/* Scalar upper convention: val_p(floor(n/p^h)!). */
inline long long v_upper_1(long long p, int h, long long n)
{
    return val_p_factorial(p, n / pow_ll(p, h));
}

/* Scalar lower convention u_h(n) = floor(n / (p^h (p-1))), n >= 0. */
inline long long u_h(long long p, int h, long long n)
{
    if (n < 0) throw std::invalid_argument("u_h: negative n");
    return n / chk_mul(pow_ll(p, h), p - 1);
}

/* Multi-index conventions: v_upper is a sum over coordinates, v_lower depends
 * only on the weight |n|. */
inline long long v_upper(long long p, int h, const MultiIndex& n)
{
    long long s = 0;
    for (long long x : n.e) s = chk_add(s, v_upper_1(p, h, x));
    return s;
}

inline long long v_lower(long long p, int h, const MultiIndex& n)
{
    return u_h(p, h, n.weight());
}

inline long long v_lower_w(long long p, int h, long long weight)
{
    return u_h(p, h, weight);
}

}  // namespace mixchar
