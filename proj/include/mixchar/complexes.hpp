#pragma once
/* Augmented Koszul-type complexes over the truncated algebras: the finite
 * free resolution of the trivial module on the generators c_i = g_i - 1,
 * with an explicit B+-linear contracting homotopy, over both Iwasawa and
 * h-analytic distribution coefficients; plus truncated group-cohomology
 * reports (elementary divisors of the Hom-complex over B+/pi^N).
 *
 * Shape: C_d -> ... -> C_1 -> C_0 -> B+ -> 0, with C_j free of rank
 * binom(d, j) on wedge symbols e_S (S an increasing j-subset of {1..d}) and
 * differential  d(e_S) = sum_k (-1)^k c_{S[k]} e_{S - S[k]}  acting by right
 * multiplication, so it is a map of left modules even when the coefficient
 * action is twisted.  The homotopy follows the minimal-active-coordinate
 * staircase:  s(b c^n e_S) = b c^{n - e_i} e_{{i} u S}  when i = min supp(n)
 * precedes every element of S, and 0 otherwise; together with the unit
 * section of the augmentation this contracts the complex on the nose.
 *
 * Over distribution coefficients the homotopy may leave the unit ball by a
 * single power of pi (the gauge v_h drops by at most 1 per weight step), so
 * its image is stored scaled by pi^pole with pole in {0,1}; all identities
 * are then verified in the scaled form, which keeps every intermediate
 * inside the ball at full precision. */

#include <algorithm>
#include <cstddef>
#include <exception>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "distributions.hpp"

namespace mixchar {

/* ==================== dense matrices over plain cells ==================== */

template <class El>
struct DenseMat {
    std::size_t rows = 0, cols = 0;
    std::vector<El> a;

    static DenseMat make(std::size_t r, std::size_t c, const El& fill)
    {
        DenseMat m;
        m.rows = r;
        m.cols = c;
        m.a.assign(r * c, fill);
        return m;
    }
    El& at(std::size_t r, std::size_t c) { return a[r * cols + c]; }
    const El& at(std::size_t r, std::size_t c) const { return a[r * cols + c]; }
};

/* Run njobs independent jobs on a stride-partitioned thread pool (jobs touch
 * disjoint data; output is deterministic regardless of the worker count). */
template <class Fn>
inline void parallel_stride(std::size_t njobs, unsigned threads, Fn&& fn)
{
    unsigned hw = threads ? threads : std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (njobs > 0 && static_cast<std::size_t>(hw) > njobs)
        hw = static_cast<unsigned>(njobs);
    if (hw <= 1) {
        for (std::size_t i = 0; i < njobs; ++i) fn(i);
        return;
    }
    std::vector<std::exception_ptr> errs(hw);
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < hw; ++w)
        pool.emplace_back([&, w]() {
            try {
                for (std::size_t i = w; i < njobs; i += hw) fn(i);
            } catch (...) {
                errs[w] = std::current_exception();
            }
        });
    for (auto& th : pool) th.join();
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
}

/* ==================== coefficient profiles ====================
 * Exact arithmetic of the rings the truncated Hom-complex is reduced to:
 *   ZModProfile    : Z/p^N           (chain ring; pi = p, valuation pivot)
 *   SeriesFpProfile: F_p[T]/T^N      (chain ring; pi = T, valuation pivot)
 *   PolyFpProfile  : F_p[y]          (PID; degree pivot, Euclidean SNF)
 *   FpProfile      : F_p             (field; plain rank computations)     */

struct ZModProfile {
    long long p;
    long long N;
    Int mod;
    using El = Int;
    ZModProfile(long long p_, long long n) : p(p_), N(n), mod(ppow(p_, n)) {}

    El zero() const { return Int(0); }
    El one() const { return Int(1); }
    El norm(const Int& x) const { return mod_reduce(x, mod); }
    bool is_zero(const El& x) const { return x == 0; }
    long long val(const El& x) const
    {
        if (x == 0) return N;
        Int y = x;
        long long v = 0;
        while (v < N && y % p == 0) {
            y /= p;
            ++v;
        }
        return v;
    }
    El add(const El& a, const El& b) const { return norm(a + b); }
    El sub(const El& a, const El& b) const { return norm(a - b); }
    El mul(const El& a, const El& b) const { return norm(a * b); }
    El neg(const El& a) const { return norm(-a); }
    El pi_pow(long long e) const { return e >= N ? Int(0) : ppow(p, e); }
    El unit_inverse(const El& u) const { return norm(mod_inverse(u, mod)); }
    /* exact quotient a/b in Z/p^N for val(a) >= val(b) > stored exactly */
    El divide(const El& a, const El& b) const
    {
        long long v = val(b);
        Int pv = ppow(p, v);
        if (a % pv != 0) throw invariant_violation("ZModProfile: inexact division");
        return norm((a / pv) * mod_inverse(b / pv, mod));
    }
};

struct SeriesFpProfile {
    long long p;
    long long N;
    using El = std::vector<long long>;  // dense T-digits, size N, entries in [0,p)
    SeriesFpProfile(long long p_, long long n) : p(p_), N(n) {}

    El zero() const { return El(static_cast<std::size_t>(N), 0); }
    El one() const
    {
        El e = zero();
        e[0] = 1 % p;
        return e;
    }
    bool is_zero(const El& x) const
    {
        for (long long v : x)
            if (v != 0) return false;
        return true;
    }
    long long val(const El& x) const
    {
        for (long long i = 0; i < N; ++i)
            if (x[static_cast<std::size_t>(i)] != 0) return i;
        return N;
    }
    El add(const El& a, const El& b) const
    {
        El r = a;
        for (long long i = 0; i < N; ++i) r[i] = (r[i] + b[i]) % p;
        return r;
    }
    El sub(const El& a, const El& b) const
    {
        El r = a;
        for (long long i = 0; i < N; ++i) r[i] = ((r[i] - b[i]) % p + p) % p;
        return r;
    }
    El neg(const El& a) const
    {
        El r = a;
        for (long long i = 0; i < N; ++i) r[i] = (p - r[i]) % p;
        return r;
    }
    El mul(const El& a, const El& b) const
    {
        El r = zero();
        for (long long i = 0; i < N; ++i) {
            if (a[i] == 0) continue;
            for (long long j = 0; i + j < N; ++j)
                r[i + j] = (r[i + j] + a[i] * b[j]) % p;
        }
        return r;
    }
    El pi_pow(long long e) const
    {
        El r = zero();
        if (e < N) r[static_cast<std::size_t>(e)] = 1 % p;
        return r;
    }
    El unit_inverse(const El& u) const
    {
        if (u[0] == 0) throw invariant_violation("SeriesFpProfile: inverting a non-unit");
        long long c0 = static_cast<long long>(
            mod_inverse(Int(u[0]), Int(p)).convert_to<long long>());
        El r = zero();
        r[0] = c0;
        for (long long k = 1; k < N; ++k) {
            long long s = 0;
            for (long long j = 1; j <= k; ++j) s = (s + u[j] * r[k - j]) % p;
            r[k] = (p - (c0 * s) % p) % p;
        }
        return r;
    }
    El divide(const El& a, const El& b) const
    {
        long long v = val(b);
        if (val(a) < v) throw invariant_violation("SeriesFpProfile: inexact division");
        El as = zero(), bs = zero();
        for (long long i = v; i < N; ++i) {
            as[i - v] = a[i];
            bs[i - v] = b[i];
        }
        return mul(as, unit_inverse(bs));
    }
};

struct PolyFpProfile {
    long long p;
    using El = std::vector<long long>;  // dense by degree, no leading zeros; empty = 0
    explicit PolyFpProfile(long long p_) : p(p_) {}

    El norm(El x) const
    {
        for (auto& c : x) c = ((c % p) + p) % p;
        while (!x.empty() && x.back() == 0) x.pop_back();
        return x;
    }
    El zero() const { return {}; }
    El one() const { return {1 % p}; }
    bool is_zero(const El& x) const { return x.empty(); }
    long long deg(const El& x) const { return static_cast<long long>(x.size()) - 1; }
    El add(const El& a, const El& b) const
    {
        El r(std::max(a.size(), b.size()), 0);
        for (std::size_t i = 0; i < a.size(); ++i) r[i] += a[i];
        for (std::size_t i = 0; i < b.size(); ++i) r[i] += b[i];
        return norm(std::move(r));
    }
    El sub(const El& a, const El& b) const { return add(a, neg(b)); }
    El neg(const El& a) const
    {
        El r = a;
        for (auto& c : r) c = (p - c) % p;
        return norm(std::move(r));
    }
    El mul(const El& a, const El& b) const
    {
        if (a.empty() || b.empty()) return {};
        El r(a.size() + b.size() - 1, 0);
        for (std::size_t i = 0; i < a.size(); ++i)
            for (std::size_t j = 0; j < b.size(); ++j) r[i + j] = (r[i + j] + a[i] * b[j]) % p;
        return norm(std::move(r));
    }
    std::pair<El, El> divmod(const El& a, const El& b) const
    {
        if (b.empty()) throw invariant_violation("PolyFpProfile: division by zero");
        long long li = static_cast<long long>(
            mod_inverse(Int(b.back()), Int(p)).convert_to<long long>());
        El rem = a, q;
        while (rem.size() >= b.size()) {
            long long sh = static_cast<long long>(rem.size() - b.size());
            long long c = (rem.back() * li) % p;
            if (q.size() < static_cast<std::size_t>(sh + 1)) q.resize(sh + 1, 0);
            q[sh] = (q[sh] + c) % p;
            for (std::size_t i = 0; i < b.size(); ++i) {
                std::size_t k = i + static_cast<std::size_t>(sh);
                rem[k] = ((rem[k] - c * b[i]) % p + p) % p;
            }
            rem = norm(std::move(rem));
            if (rem.empty()) break;
        }
        return {norm(std::move(q)), std::move(rem)};
    }
    bool is_unit(const El& x) const { return x.size() == 1; }
    El constant(long long c) const { return norm(El{c}); }
};

struct FpProfile {
    long long p;
    using El = long long;
    explicit FpProfile(long long p_) : p(p_) {}
    El zero() const { return 0; }
    El one() const { return 1 % p; }
    bool is_zero(const El& x) const { return x == 0; }
    El add(const El& a, const El& b) const { return (a + b) % p; }
    El sub(const El& a, const El& b) const { return ((a - b) % p + p) % p; }
    El mul(const El& a, const El& b) const { return (a * b) % p; }
    El neg(const El& a) const { return (p - a) % p; }
};

/* ==================== Smith reduction ==================== */

template <class P, class MatT>
inline void row_submul(const P& R, MatT& A, std::size_t dst, std::size_t src,
                       const typename P::El& q)
{
    for (std::size_t c = 0; c < A.cols; ++c)
        A.at(dst, c) = R.sub(A.at(dst, c), R.mul(q, A.at(src, c)));
}

/* Shared column-operation mirrors: applying M <- M*E keeps V <- V*E and
 * Vinv <- E^{-1}*Vinv, so x = V y stays valid with M in the new column
 * coordinates and Vinv recovers y = Vinv x. */
template <class P, class El>
struct ColOps {
    const P& R;
    DenseMat<El>& M;
    DenseMat<El>* V;
    DenseMat<El>* Vinv;

    void swap_cols(std::size_t i, std::size_t j)
    {
        if (i == j) return;
        for (std::size_t r = 0; r < M.rows; ++r) std::swap(M.at(r, i), M.at(r, j));
        if (V)
            for (std::size_t r = 0; r < V->rows; ++r) std::swap(V->at(r, i), V->at(r, j));
        if (Vinv)
            for (std::size_t c = 0; c < Vinv->cols; ++c)
                std::swap(Vinv->at(i, c), Vinv->at(j, c));
    }
    /* col dst -= q * col src */
    void submul(std::size_t dst, std::size_t src, const El& q)
    {
        for (std::size_t r = 0; r < M.rows; ++r)
            M.at(r, dst) = R.sub(M.at(r, dst), R.mul(q, M.at(r, src)));
        if (V)
            for (std::size_t r = 0; r < V->rows; ++r)
                V->at(r, dst) = R.sub(V->at(r, dst), R.mul(q, V->at(r, src)));
        if (Vinv)
            for (std::size_t c = 0; c < Vinv->cols; ++c)
                Vinv->at(src, c) = R.add(Vinv->at(src, c), R.mul(q, Vinv->at(dst, c)));
    }
    /* col i *= u (a unit with inverse uinv) */
    void scale(std::size_t i, const El& u, const El& uinv)
    {
        for (std::size_t r = 0; r < M.rows; ++r) M.at(r, i) = R.mul(M.at(r, i), u);
        if (V)
            for (std::size_t r = 0; r < V->rows; ++r) V->at(r, i) = R.mul(V->at(r, i), u);
        if (Vinv)
            for (std::size_t c = 0; c < Vinv->cols; ++c)
                Vinv->at(i, c) = R.mul(Vinv->at(i, c), uinv);
    }
};

/* Diagonalize M over a truncated local profile (valuation pivoting; every
 * elimination quotient is exact because the pivot has minimal valuation).
 * The diagonal is normalized to powers of pi with nondecreasing valuations;
 * V/Vinv (either may be null) accumulate the column transform and its
 * inverse.  Returns the diagonal entries. */
template <class P>
inline std::vector<typename P::El> snf_local(const P& R, DenseMat<typename P::El>& M,
                                             DenseMat<typename P::El>* V,
                                             DenseMat<typename P::El>* Vinv)
{
    using El = typename P::El;
    ColOps<P, El> ops{R, M, V, Vinv};
    std::vector<El> diag;
    std::size_t t = 0;
    while (t < M.rows && t < M.cols) {
        bool found = false;
        std::size_t br = t, bc = t;
        long long bv = 0;
        for (std::size_t r = t; r < M.rows; ++r)
            for (std::size_t c = t; c < M.cols; ++c) {
                const El& x = M.at(r, c);
                if (R.is_zero(x)) continue;
                long long v = R.val(x);
                if (!found || v < bv) {
                    found = true;
                    bv = v;
                    br = r;
                    bc = c;
                }
            }
        if (!found) break;
        if (br != t)
            for (std::size_t c = 0; c < M.cols; ++c) std::swap(M.at(t, c), M.at(br, c));
        ops.swap_cols(t, bc);
        for (std::size_t r = 0; r < M.rows; ++r) {
            if (r == t || R.is_zero(M.at(r, t))) continue;
            row_submul(R, M, r, t, R.divide(M.at(r, t), M.at(t, t)));
        }
        for (std::size_t c = 0; c < M.cols; ++c) {
            if (c == t || R.is_zero(M.at(t, c))) continue;
            ops.submul(c, t, R.divide(M.at(t, c), M.at(t, t)));
        }
        long long v = R.val(M.at(t, t));
        El w = R.divide(M.at(t, t), R.pi_pow(v));
        ops.scale(t, R.unit_inverse(w), w);
        diag.push_back(M.at(t, t));
        ++t;
    }
    return diag;
}

/* Smith reduction over the Euclidean domain F_p[y] (degree pivoting with
 * remainder loops and the standard divisibility fixup); diagonal entries
 * are returned monic. */
inline std::vector<PolyFpProfile::El> snf_polyfp(const PolyFpProfile& R,
                                                 DenseMat<PolyFpProfile::El>& M,
                                                 DenseMat<PolyFpProfile::El>* V,
                                                 DenseMat<PolyFpProfile::El>* Vinv)
{
    using El = PolyFpProfile::El;
    ColOps<PolyFpProfile, El> ops{R, M, V, Vinv};
    std::vector<El> diag;
    std::size_t t = 0;
    while (t < M.rows && t < M.cols) {
        bool any = false;
        for (std::size_t r = t; r < M.rows && !any; ++r)
            for (std::size_t c = t; c < M.cols && !any; ++c) any = !R.is_zero(M.at(r, c));
        if (!any) break;
        for (int guard = 0;; ++guard) {
            if (guard > 100000)
                throw invariant_violation("snf_polyfp: elimination failed to converge");
            /* relocate a minimal-degree pivot */
            std::size_t br = t, bc = t;
            long long bd = -1;
            for (std::size_t r = t; r < M.rows; ++r)
                for (std::size_t c = t; c < M.cols; ++c) {
                    const El& x = M.at(r, c);
                    if (R.is_zero(x)) continue;
                    if (bd < 0 || R.deg(x) < bd) {
                        bd = R.deg(x);
                        br = r;
                        bc = c;
                    }
                }
            if (br != t)
                for (std::size_t c = 0; c < M.cols; ++c) std::swap(M.at(t, c), M.at(br, c));
            ops.swap_cols(t, bc);
            bool changed = false;
            for (std::size_t r = 0; r < M.rows; ++r) {
                if (r == t || R.is_zero(M.at(r, t))) continue;
                row_submul(R, M, r, t, R.divmod(M.at(r, t), M.at(t, t)).first);
                if (!R.is_zero(M.at(r, t))) changed = true;
            }
            if (changed) continue;
            for (std::size_t c = 0; c < M.cols; ++c) {
                if (c == t || R.is_zero(M.at(t, c))) continue;
                ops.submul(c, t, R.divmod(M.at(t, c), M.at(t, t)).first);
                if (!R.is_zero(M.at(t, c))) changed = true;
            }
            if (changed) continue;
            bool fixed = false;
            for (std::size_t r = t + 1; r < M.rows && !fixed; ++r)
                for (std::size_t c = t + 1; c < M.cols && !fixed; ++c)
                    if (!R.is_zero(R.divmod(M.at(r, c), M.at(t, t)).second)) {
                        row_submul(R, M, t, r, R.neg(R.one()));
                        fixed = true;
                    }
            if (fixed) continue;
            break;
        }
        long long lead = M.at(t, t).back();
        if (lead != 1) {
            long long li = static_cast<long long>(
                mod_inverse(Int(lead), Int(R.p)).convert_to<long long>());
            ops.scale(t, R.constant(li), R.constant(lead));
        }
        diag.push_back(M.at(t, t));
        ++t;
    }
    return diag;
}

template <class P>
inline DenseMat<typename P::El> mat_mul(const P& R, const DenseMat<typename P::El>& A,
                                        const DenseMat<typename P::El>& B)
{
    DenseMat<typename P::El> out = DenseMat<typename P::El>::make(A.rows, B.cols, R.zero());
    for (std::size_t r = 0; r < A.rows; ++r)
        for (std::size_t k = 0; k < A.cols; ++k) {
            if (R.is_zero(A.at(r, k))) continue;
            for (std::size_t c = 0; c < B.cols; ++c)
                out.at(r, c) = R.add(out.at(r, c), R.mul(A.at(r, k), B.at(k, c)));
        }
    return out;
}

template <class P>
inline bool mat_is_zero(const P& R, const DenseMat<typename P::El>& A)
{
    for (const auto& x : A.a)
        if (!R.is_zero(x)) return false;
    return true;
}

template <class P>
inline DenseMat<typename P::El> mat_identity(const P& R, std::size_t n)
{
    DenseMat<typename P::El> m = DenseMat<typename P::El>::make(n, n, R.zero());
    for (std::size_t i = 0; i < n; ++i) m.at(i, i) = R.one();
    return m;
}

/* Divisor exponents of H = ker(B)/im(A) over R = S/pi^N, where S is the
 * truncated DVR behind the profile: B maps R^b -> R^c, A maps R^a -> R^b
 * and B*A = 0 mod pi^N.  Diagonalizing B identifies ker(B) with
 * (+)_i pi^{e_i} R; the image is rewritten in those coordinates and divided
 * through by pi^{e_i}, so H is presented by [C | diag(pi^{m_i})] whose
 * Smith divisors are the answer.  Exponents are returned descending, units
 * dropped. */
template <class P>
inline std::vector<long long> homology_chain_ring(const P& R, DenseMat<typename P::El> B,
                                                  DenseMat<typename P::El> A, long long N)
{
    using El = typename P::El;
    const std::size_t b = B.cols;
    DenseMat<El> V = mat_identity(R, b), Vinv = mat_identity(R, b);
    std::vector<El> diag = snf_local(R, B, &V, &Vinv);

    std::vector<long long> m(b, N), e(b, 0);
    for (std::size_t i = 0; i < diag.size(); ++i) {
        long long dv = R.val(diag[i]);
        m[i] = dv;
        e[i] = N - dv;
    }
    DenseMat<El> Ay = mat_mul(R, Vinv, A);

    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < b; ++i)
        if (m[i] > 0) keep.push_back(i);

    DenseMat<El> pres = DenseMat<El>::make(keep.size(), Ay.cols + keep.size(), R.zero());
    for (std::size_t ki = 0; ki < keep.size(); ++ki) {
        std::size_t i = keep[ki];
        for (std::size_t j = 0; j < Ay.cols; ++j)
            pres.at(ki, j) = R.divide(Ay.at(i, j), R.pi_pow(e[i]));
        pres.at(ki, Ay.cols + ki) = R.pi_pow(m[i]);
    }
    std::vector<El> div = snf_local(R, pres, nullptr, nullptr);
    std::vector<long long> out;
    for (const El& g : div) {
        long long v = R.val(g);
        if (v > 0) out.push_back(std::min(v, N));
    }
    /* rows the reduction never pivoted on have no relation at all: each is a
     * full B+/pi^N factor (pi^N itself vanishes in the truncated profile) */
    for (std::size_t i = div.size(); i < keep.size(); ++i) out.push_back(N);
    std::sort(out.rbegin(), out.rend());
    return out;
}

/* Free rank and monic torsion divisors of H = ker(B)/im(A) over F_p[y]
 * (exact composite B*A = 0; kernels of polynomial matrices are free). */
inline std::pair<long long, std::vector<PolyFpProfile::El>> homology_polyfp(
    const PolyFpProfile& R, DenseMat<PolyFpProfile::El> B, DenseMat<PolyFpProfile::El> A)
{
    using El = PolyFpProfile::El;
    const std::size_t b = B.cols;
    DenseMat<El> V = mat_identity(R, b), Vinv = mat_identity(R, b);
    std::vector<El> diag = snf_polyfp(R, B, &V, &Vinv);

    DenseMat<El> Ay = mat_mul(R, Vinv, A);
    for (std::size_t i = 0; i < diag.size(); ++i)
        for (std::size_t j = 0; j < Ay.cols; ++j)
            if (!R.is_zero(Ay.at(i, j)))
                throw invariant_violation(
                    "homology_polyfp: image escapes the kernel (composite not zero)");

    std::size_t kappa = b - diag.size();
    DenseMat<El> C = DenseMat<El>::make(kappa, Ay.cols, R.zero());
    for (std::size_t ki = 0; ki < kappa; ++ki)
        for (std::size_t j = 0; j < Ay.cols; ++j) C.at(ki, j) = Ay.at(diag.size() + ki, j);

    std::vector<El> div = snf_polyfp(R, C, nullptr, nullptr);
    std::vector<El> torsion;
    for (const El& f : div)
        if (!R.is_unit(f)) torsion.push_back(f);
    long long free_rank = static_cast<long long>(kappa) - static_cast<long long>(div.size());
    return {free_rank, std::move(torsion)};
}

inline std::size_t rank_fp(long long p, DenseMat<long long> M)
{
    std::size_t rank = 0;
    for (std::size_t c = 0; c < M.cols && rank < M.rows; ++c) {
        std::size_t piv = rank;
        while (piv < M.rows && M.at(piv, c) % p == 0) ++piv;
        if (piv == M.rows) continue;
        for (std::size_t cc = 0; cc < M.cols; ++cc) std::swap(M.at(rank, cc), M.at(piv, cc));
        long long inv = static_cast<long long>(
            mod_inverse(Int(M.at(rank, c)), Int(p)).convert_to<long long>());
        for (std::size_t cc = 0; cc < M.cols; ++cc)
            M.at(rank, cc) = (M.at(rank, cc) * inv) % p;
        for (std::size_t r = 0; r < M.rows; ++r) {
            if (r == rank || M.at(r, c) % p == 0) continue;
            long long f = M.at(r, c) % p;
            for (std::size_t cc = 0; cc < M.cols; ++cc)
                M.at(r, cc) = ((M.at(r, cc) - f * M.at(rank, cc)) % p + p) % p;
        }
        ++rank;
    }
    return rank;
}

/* ==================== wedge bookkeeping ==================== */

/* Increasing j-subsets of {1..d} in lexicographic order. */
inline std::vector<std::vector<int>> wedge_subsets(int d, int j)
{
    std::vector<std::vector<int>> out;
    std::vector<int> cur;
    auto rec = [&](auto&& self, int next, int left) -> void {
        if (left == 0) {
            out.push_back(cur);
            return;
        }
        for (int i = next; i <= d - left + 1; ++i) {
            cur.push_back(i);
            self(self, i + 1, left - 1);
            cur.pop_back();
        }
    };
    if (j >= 0 && j <= d) rec(rec, 1, j);
    return out;
}

inline MultiIndex unit_index(int d, int i)
{
    return MultiIndex(static_cast<std::size_t>(d)).plus(i, 1);
}

/* ==================== algebra adaptation hooks ==================== */

inline long long chain_coeff_prec(const IwasawaAlgebra& a) { return a.ctx().N; }
inline long long chain_coeff_prec(const DistAlgebra& a) { return a.N(); }
inline long long chain_top_degree(const IwasawaAlgebra& a) { return a.ctx().D; }
inline long long chain_top_degree(const DistAlgebra& a) { return a.D(); }

/* The Iwasawa homotopy is pole-free; over D_{h-an} coefficients the gauge
 * v_h can drop by one per weight step, so a single pi-pole is budgeted
 * whenever v_h is not identically zero on the supported weights. */
inline long long chain_pole_budget(const IwasawaAlgebra&) { return 0; }
inline long long chain_pole_budget(const DistAlgebra& a) { return a.vh(a.D()) > 0 ? 1 : 0; }

/* Homotopies act on the reported expansion (coefficients of full chain-ring
 * precision); guard terms feed the truncation-ideal defect instead. */
inline IwasawaElem chain_reported(const IwasawaAlgebra& a, const IwasawaElem& x)
{
    return a.reported(x);
}
inline const DistElem& chain_reported(const DistAlgebra&, const DistElem& x) { return x; }

inline IwasawaElem chain_scale_pole(const IwasawaAlgebra& a, const IwasawaElem& x, long long k)
{
    if (k == 0) return x;
    IwasawaElem out = a.zero();
    for (const auto& [n, b] : a.reported(x).coeffs()) out = a.add(out, a.monomial(b.shift(k), n));
    return out;
}
inline DistElem chain_scale_pole(const DistAlgebra& a, const DistElem& x, long long k)
{
    if (k == 0) return x;
    DistElem out = a.zero();
    for (const auto& [n, b] : x.coeffs()) out = a.add(out, a.monomial(b.shift(k), n));
    if (x.tail_gauge()) out = a.with_tail(out, chk_add(*x.tail_gauge(), k));
    return out;
}

template <class Elem>
inline void chain_attach_tail(const IwasawaAlgebra&, std::vector<Elem>&, const Elem&, long long)
{
}
inline void chain_attach_tail(const DistAlgebra& a, std::vector<DistElem>& out,
                              const DistElem& x, long long pole)
{
    if (!x.tail_gauge()) return;
    /* a discarded term b c^n with val(b) + v_h(n) >= g maps under pi^pole s
     * to a term of gauge >= g + pole - 1 in some slot; bound them all */
    long long g = chk_add(*x.tail_gauge(), pole - 1);
    for (DistElem& e : out) e = a.with_tail(e, g);
}

/* ==================== the complex ==================== */

template <class Alg>
class ChainComplexT {
public:
    using Elem = std::decay_t<decltype(std::declval<const Alg&>().zero())>;
    using Chain = std::vector<Elem>;

    explicit ChainComplexT(const Alg& alg)
        : alg_(&alg),
          d_(alg.presentation().d()),
          pole_(chain_pole_budget(alg))
    {
        if (!alg.presentation().is_abelian())
            throw config_error(
                "chain complex: the Koszul resolution requires an abelian presentation "
                "(nonabelian groups of rank >= 2 are rejected)");
        for (int j = 0; j <= d_; ++j) {
            basis_.push_back(wedge_subsets(d_, j));
            std::map<std::vector<int>, std::size_t> ix;
            for (std::size_t s = 0; s < basis_.back().size(); ++s)
                ix.emplace(basis_.back()[s], s);
            index_.push_back(std::move(ix));
        }
        build_differentials();
    }

    const Alg& algebra() const { return *alg_; }
    int dim() const { return d_; }
    long long pole_budget() const { return pole_; }
    std::size_t rank(int j) const
    {
        check_degree(j);
        return basis_[static_cast<std::size_t>(j)].size();
    }
    const std::vector<std::vector<int>>& wedge(int j) const
    {
        check_degree(j);
        return basis_[static_cast<std::size_t>(j)];
    }
    std::size_t slot(int j, const std::vector<int>& S) const
    {
        check_degree(j);
        auto it = index_[static_cast<std::size_t>(j)].find(S);
        if (it == index_[static_cast<std::size_t>(j)].end())
            throw config_error("chain complex: not an increasing subset of the generators");
        return it->second;
    }

    Chain zero_chain(int j) const { return Chain(rank(j), alg_->zero()); }
    Chain single(int j, const std::vector<int>& S, const Elem& x) const
    {
        Chain v = zero_chain(j);
        v[slot(j, S)] = x;
        return v;
    }

    const Elem& diff_entry(int j, std::size_t row, std::size_t col) const
    {
        if (j < 1 || j > d_) throw config_error("chain complex: differential degree out of range");
        return diff_[static_cast<std::size_t>(j)][row][col];
    }

    /* (generator, sign) of a stored differential entry; (0, 0) if zero. */
    std::pair<int, int> entry_data(int j, std::size_t row, std::size_t col) const
    {
        const Elem& e = diff_entry(j, row, col);
        if (e.coeffs().empty()) return {0, 0};
        const auto& [n, b] = *e.coeffs().begin();
        BElem one = BElem::one(alg_->presentation().descriptor(), b.prec());
        if (agree(b, one)) return {n.bot(), 1};
        if (agree(b, one.neg())) return {n.bot(), -1};
        throw invariant_violation("chain complex: differential entry is not a signed generator");
    }

    Chain add_chains(int j, const Chain& x, const Chain& y) const
    {
        check_chain(j, x);
        check_chain(j, y);
        Chain out = x;
        for (std::size_t s = 0; s < out.size(); ++s) out[s] = alg_->add(out[s], y[s]);
        return out;
    }
    Chain sub_chains(int j, const Chain& x, const Chain& y) const
    {
        check_chain(j, x);
        check_chain(j, y);
        Chain out = x;
        for (std::size_t s = 0; s < out.size(); ++s) out[s] = alg_->sub(out[s], y[s]);
        return out;
    }

    /* d_j : C_j -> C_{j-1} (signed right multiplication by the c_i) */
    Chain apply_diff(int j, const Chain& v) const
    {
        if (j < 1 || j > d_) throw config_error("chain complex: differential degree out of range");
        check_chain(j, v);
        Chain out = zero_chain(j - 1);
        const auto& M = diff_[static_cast<std::size_t>(j)];
        for (std::size_t r = 0; r < out.size(); ++r)
            for (std::size_t c = 0; c < v.size(); ++c) {
                if (M[r][c].coeffs().empty()) continue;
                out[r] = alg_->add(out[r], alg_->mul(v[c], M[r][c]));
            }
        return out;
    }

    BElem augment(const Chain& v) const
    {
        check_chain(0, v);
        return alg_->coeff(v[0], MultiIndex(static_cast<std::size_t>(d_)));
    }
    Chain unit_section(const BElem& b) const { return Chain{alg_->scalar(b)}; }

    /* s_j : C_j -> C_{j+1}, scaled by pi^pole; C_d maps to the empty chain. */
    Chain apply_homotopy(int j, const Chain& v) const
    {
        check_chain(j, v);
        if (j == d_) return Chain{};
        Chain out = zero_chain(j + 1);
        for (std::size_t c = 0; c < v.size(); ++c) {
            const auto& S = basis_[static_cast<std::size_t>(j)][c];
            const auto& x = chain_reported(*alg_, v[c]);
            for (const auto& [n, b] : x.coeffs()) {
                int i = n.bot();
                if (i == 0) continue;                       // constants die
                if (!S.empty() && i >= S.front()) continue; // staircase support rule
                std::vector<int> T;
                T.reserve(S.size() + 1);
                T.push_back(i);
                T.insert(T.end(), S.begin(), S.end());
                std::size_t r = slot(j + 1, T);
                BElem coeff = pole_ ? b.shift(pole_) : b;
                out[r] = alg_->add(out[r], alg_->monomial(coeff, n.plus(i, -1)));
            }
            chain_attach_tail(*alg_, out, v[c], pole_);
        }
        return out;
    }

    /* pi^pole * v, the right-hand side of the contracting identity. */
    Chain scaled(int j, const Chain& v) const
    {
        check_chain(j, v);
        Chain out = v;
        for (Elem& e : out) e = chain_scale_pole(*alg_, e, pole_);
        return out;
    }

    /* d(s(v)) + s(d(v)) + [j = 0] pi^pole * unit_section(augment(v)):
     * equals scaled(j, v) on classes supported in weight < D. */
    Chain contract(int j, const Chain& v) const
    {
        check_chain(j, v);
        Chain acc = zero_chain(j);
        if (j < d_) acc = add_chains(j, acc, apply_diff(j + 1, apply_homotopy(j, v)));
        if (j > 0) acc = add_chains(j, acc, apply_homotopy(j - 1, apply_diff(j, v)));
        if (j == 0) {
            Chain eta = unit_section(augment(v));
            acc = add_chains(0, acc, scaled(0, eta));
        }
        return acc;
    }

private:
    const Alg* alg_;
    int d_;
    long long pole_;
    std::vector<std::vector<std::vector<int>>> basis_;
    std::vector<std::map<std::vector<int>, std::size_t>> index_;
    std::vector<std::vector<std::vector<Elem>>> diff_;

    void check_degree(int j) const
    {
        if (j < 0 || j > d_) throw config_error("chain complex: degree out of range");
    }
    void check_chain(int j, const Chain& v) const
    {
        check_degree(j);
        if (v.size() != rank(j))
            throw config_error("chain complex: chain length does not match the rank");
    }

    void build_differentials()
    {
        const RingDescriptor& desc = alg_->presentation().descriptor();
        long long prec = chain_coeff_prec(*alg_);
        diff_.resize(static_cast<std::size_t>(d_) + 1);
        for (int j = 1; j <= d_; ++j) {
            auto& M = diff_[static_cast<std::size_t>(j)];
            M.assign(rank(j - 1), std::vector<Elem>(rank(j), alg_->zero()));
            for (std::size_t c = 0; c < basis_[static_cast<std::size_t>(j)].size(); ++c) {
                const auto& S = basis_[static_cast<std::size_t>(j)][c];
                for (std::size_t k = 0; k < S.size(); ++k) {
                    std::vector<int> T = S;
                    T.erase(T.begin() + static_cast<std::ptrdiff_t>(k));
                    std::size_t r = slot(j - 1, T);
                    long long sgn = (k % 2 == 0) ? 1 : -1;
                    M[r][c] = alg_->monomial(BElem::from_int(desc, Int(sgn), prec),
                                             unit_index(d_, S[k]));
                }
            }
        }
    }
};

using ChainComplex = ChainComplexT<IwasawaAlgebra>;
using AnalyticChainComplex = ChainComplexT<DistAlgebra>;

/* The resolution of the trivial module over the Iwasawa algebra.  Defined
 * for abelian presentations of any rank and for every rank-1 presentation
 * (which is structurally abelian, twisted coefficients included). */
inline ChainComplex lazard_serre(const IwasawaAlgebra& alg) { return ChainComplex(alg); }

/* The same complex with h-analytic distribution coefficients; the homotopy
 * is stored scaled by its pi-pole budget (at most 1). */
inline AnalyticChainComplex kohlhaase(const DistAlgebra& alg)
{
    return AnalyticChainComplex(alg);
}

/* ==================== homotopy certificates ==================== */

struct FiltrationCase {
    int degree = 0;
    std::string element;
    long long fil_in = 0;
    std::optional<long long> fil_out;  // nullopt: the homotopy image vanishes
    bool ok = true;
    bool strict = false;  // image vanished or dropped by less than one
};

struct HomotopyDivisionReport {
    bool ok = true;
    long long max_drop = 0;
    long long cases_checked = 0;
    long long strict_cases = 0;
    std::vector<FiltrationCase> failures;
    std::optional<FiltrationCase> first_failure;
};

/* Scans the spanning elements pi^a c^w e_S of the filtration levels
 * fil = a + |w| <= nmax (weights |w| <= dmax) and confirms that the
 * homotopy image lies in filtration fil - 1; the division behind the
 * contracting homotopy loses exactly one filtration step. */
inline HomotopyDivisionReport verify_homotopy_division(const ChainComplex& C, long long nmax,
                                                       long long dmax)
{
    const IwasawaAlgebra& A = C.algebra();
    const RingDescriptor& desc = A.presentation().descriptor();
    long long N = A.ctx().N;
    if (nmax < 1 || dmax < 1)
        throw config_error("verify_homotopy_division: need nmax >= 1 and dmax >= 1");
    long long wcap = std::min(dmax, A.ctx().D);

    HomotopyDivisionReport rep;
    std::vector<MultiIndex> idx = indices_up_to(C.dim(), wcap);
    for (int j = 0; j <= C.dim(); ++j)
        for (const auto& S : C.wedge(j))
            for (const MultiIndex& w : idx)
                for (long long a = 0; a + w.weight() <= nmax; ++a) {
                    FiltrationCase fc;
                    fc.degree = j;
                    fc.fil_in = a + w.weight();
                    {
                        std::ostringstream os;
                        os << "pi^" << a << " c^" << w.str() << " e{";
                        for (std::size_t t = 0; t < S.size(); ++t)
                            os << (t ? "," : "") << S[t];
                        os << "}";
                        fc.element = os.str();
                    }
                    BElem coeff = BElem::one(desc, N).shift(a);
                    auto img = C.apply_homotopy(j, C.single(j, S, A.monomial(coeff, w)));
                    std::optional<long long> fil;
                    for (const IwasawaElem& e : img) {
                        auto f = A.filtration_floor(e);
                        if (f) fil = fil ? std::min(*fil, *f) : *f;
                    }
                    fc.fil_out = fil;
                    fc.ok = !fil || *fil >= fc.fil_in - 1;
                    fc.strict = !fil || *fil > fc.fil_in - 1;
                    ++rep.cases_checked;
                    if (fc.strict) ++rep.strict_cases;
                    if (fil) rep.max_drop = std::max(rep.max_drop, fc.fil_in - *fil);
                    if (!fc.ok) {
                        rep.ok = false;
                        if (!rep.first_failure) rep.first_failure = fc;
                        if (rep.failures.size() < 32) rep.failures.push_back(fc);
                    }
                }
    return rep;
}

struct PoleBudgetReport {
    bool ok = true;
    long long pole = 0;
    long long min_raw_gauge = 0;  // over all cases: gauge(s image) - pole >= -pole
    long long cases_checked = 0;
    std::vector<std::string> failures;
};

/* Applies the homotopy to every spanning unit-ball monomial
 * pi^{-v_h(w)} c^w e_S and certifies that the raw (unscaled) image sits
 * within a single pi-pole of the unit ball. */
inline PoleBudgetReport certify_pole_budget(const AnalyticChainComplex& C)
{
    const DistAlgebra& A = C.algebra();
    const RingDescriptor& desc = A.presentation().descriptor();
    PoleBudgetReport rep;
    rep.pole = C.pole_budget();
    bool seen = false;
    std::vector<MultiIndex> idx = indices_up_to(C.dim(), A.D());
    for (int j = 0; j <= C.dim(); ++j)
        for (const auto& S : C.wedge(j))
            for (const MultiIndex& w : idx) {
                BElem coeff = BElem::one(desc, A.N()).shift(-A.vh(w));
                auto img = C.apply_homotopy(j, C.single(j, S, A.monomial(coeff, w)));
                for (const DistElem& e : img) {
                    auto g = A.gauge_floor(e);
                    if (!g) continue;
                    long long raw = *g - rep.pole;
                    rep.min_raw_gauge = seen ? std::min(rep.min_raw_gauge, raw) : raw;
                    seen = true;
                    ++rep.cases_checked;
                    if (raw < -rep.pole) {
                        rep.ok = false;
                        std::ostringstream os;
                        os << "degree " << j << " c^" << w.str() << ": raw gauge " << raw;
                        rep.failures.push_back(os.str());
                    }
                }
            }
    return rep;
}

/* ==================== truncated cohomology ==================== */

enum class CoeffChoice { Continuous, HAnalytic };
enum class CohomKind { ChainRingDivisors, ResidueLinearized, ResiduePolynomial };

struct DegreeReport {
    int degree = 0;
    /* ChainRingDivisors: H ~ (+)_k B+/pi^{e_k}, exponents descending */
    std::vector<long long> divisors;
    /* ResiduePolynomial: free rank over F_p[y] and torsion divisor degrees */
    long long free_rank = 0;
    std::vector<long long> torsion_degrees;
    /* ResidueLinearized: dimension over F_p of the linearized cohomology */
    long long fp_dim = 0;
    /* amount entering the Euler alternating sum (length / dim / free rank) */
    long long length = 0;
    /* the report describes H of the complex truncated mod pi^{tail_bound} */
    long long tail_bound = 0;

    std::string describe() const
    {
        std::ostringstream os;
        os << "H^" << degree << " = ";
        if (!divisors.empty() || (free_rank == 0 && torsion_degrees.empty() && fp_dim == 0)) {
            if (divisors.empty())
                os << "0";
            else
                for (std::size_t i = 0; i < divisors.size(); ++i)
                    os << (i ? " (+) " : "") << "B+/pi^" << divisors[i];
        } else if (fp_dim > 0) {
            os << "F_p^" << fp_dim << " (linearized)";
        } else {
            os << "R^" << free_rank;
            for (long long t : torsion_degrees) os << " (+) R/(deg " << t << ")";
            os << " over R = F_p[y]";
        }
        os << " mod pi^" << tail_bound;
        return os.str();
    }
};

struct CohomologyReport {
    CoeffChoice choice = CoeffChoice::Continuous;
    CohomKind kind = CohomKind::ChainRingDivisors;
    long long p = 0;
    long long N = 0;
    int d = 0;
    long long module_rank = 0;
    long long h = -1;          // h-analytic route only
    bool h_certified = false;  // h-analytic route: module passed the analyticity scan
    long long euler = 0;       // alternating sum of lengths; 0 whenever d >= 1
    std::vector<DegreeReport> degrees;
};

/* Wedge data extracted from a constructed complex: basis subsets per degree
 * and the signed-generator entries of each chain differential. */
struct WedgeEntry {
    std::size_t row = 0, col = 0;
    int gen = 0;
    int sign = 0;
};
struct WedgePattern {
    int d = 0;
    std::vector<std::vector<std::vector<int>>> basis;
    std::vector<std::vector<WedgeEntry>> diff;  // index j in [1..d]
};

template <class Alg>
inline WedgePattern wedge_pattern(const ChainComplexT<Alg>& C)
{
    WedgePattern w;
    w.d = C.dim();
    for (int j = 0; j <= w.d; ++j) w.basis.push_back(C.wedge(j));
    w.diff.resize(static_cast<std::size_t>(w.d) + 1);
    for (int j = 1; j <= w.d; ++j)
        for (std::size_t r = 0; r < C.rank(j - 1); ++r)
            for (std::size_t c = 0; c < C.rank(j); ++c) {
                auto [g, s] = C.entry_data(j, r, c);
                if (g != 0) w.diff[static_cast<std::size_t>(j)].push_back({r, c, g, s});
            }
    return w;
}

/* Hom-complex differential HD^j : V^{binom(d,j)} -> V^{binom(d,j+1)} built
 * from the degree-(j+1) chain differential: the entry sign * c_g of
 * d(e_T) at e_S contributes sign * rho_g to the block (row T, column S). */
template <class P>
inline DenseMat<typename P::El> hom_matrix(const P& R, const WedgePattern& W, int j,
                                           const std::vector<DenseMat<typename P::El>>& rho)
{
    const std::size_t n = rho[0].rows;
    DenseMat<typename P::El> out = DenseMat<typename P::El>::make(
        W.basis[static_cast<std::size_t>(j) + 1].size() * n,
        W.basis[static_cast<std::size_t>(j)].size() * n, R.zero());
    for (const WedgeEntry& e : W.diff[static_cast<std::size_t>(j) + 1]) {
        const DenseMat<typename P::El>& blk = rho[static_cast<std::size_t>(e.gen) - 1];
        for (std::size_t u = 0; u < n; ++u)
            for (std::size_t v = 0; v < n; ++v) {
                auto& tgt = out.at(e.col * n + u, e.row * n + v);
                tgt = e.sign > 0 ? R.add(tgt, blk.at(u, v)) : R.sub(tgt, blk.at(u, v));
            }
    }
    return out;
}

/* ---------- truncated cell extraction ---------- */

inline Int qp_cell(const BElem& b, long long N)
{
    const PadicInt& a = b.as_padic();
    if (a.is_zero()) return Int(0);
    return mod_reduce(a.unit() * ppow(a.p(), *a.val()), ppow(a.p(), N));
}

inline std::vector<long long> laurent_cell(const BElem& b, long long N)
{
    const LaurentElem e = (b.prec() > N ? b.reduce_prec(N) : b).as_laurent();
    std::vector<long long> out(static_cast<std::size_t>(N), 0);
    for (const auto& [exp, v] : e.terms()) {
        if (exp < 0)
            throw invariant_violation("laurent_cell: negative exponent in an integral element");
        if (exp < N) out[static_cast<std::size_t>(exp)] = v;
    }
    return out;
}

/* X-slot decomposition of an integral element of B+/X^N over F_p[y]
 * (y = p/X): slot i digit j of the p-adic coefficient contributes
 * digit * y^j at X-degree i + j. */
inline std::vector<PolyFpProfile::El> pseudo_cell(const PolyFpProfile& R, const BElem& b,
                                                  long long N)
{
    const PseudoElem e = (b.prec() > N ? b.reduce_prec(N) : b).as_pseudo();
    std::vector<PolyFpProfile::El> out(static_cast<std::size_t>(N));
    long long p = R.p;
    for (const auto& [i, a] : e.slots()) {
        if (a.is_zero()) continue;
        long long sp = N - i;
        Int rep = mod_reduce(a.unit() * ppow(p, *a.val()), ppow(p, sp));
        for (long long j = 0; j < sp && rep != 0; ++j, rep /= p) {
            long long digit = static_cast<long long>((rep % p).convert_to<long long>());
            if (digit == 0) continue;
            long long k = i + j;
            if (k < 0 || k >= N)
                throw invariant_violation("pseudo_cell: slot digit outside the truncation");
            auto& poly = out[static_cast<std::size_t>(k)];
            if (poly.size() < static_cast<std::size_t>(j + 1))
                poly.resize(static_cast<std::size_t>(j + 1), 0);
            poly[static_cast<std::size_t>(j)] = (poly[static_cast<std::size_t>(j)] + digit) % p;
        }
    }
    for (auto& poly : out) poly = R.norm(std::move(poly));
    return out;
}

inline BElem bmat_det(const BMatrix& M)
{
    const std::size_t r = M.size();
    if (r == 1) return M[0][0];
    std::function<BElem(const std::vector<std::vector<BElem>>&)> lap =
        [&](const std::vector<std::vector<BElem>>& A) -> BElem {
        if (A.size() == 1) return A[0][0];
        BElem acc = BElem::zero(A[0][0].descriptor(), A[0][0].prec());
        for (std::size_t c = 0; c < A.size(); ++c) {
            std::vector<std::vector<BElem>> sub;
            for (std::size_t i = 1; i < A.size(); ++i) {
                std::vector<BElem> row;
                for (std::size_t j = 0; j < A.size(); ++j)
                    if (j != c) row.push_back(A[i][j]);
                sub.push_back(std::move(row));
            }
            BElem term = A[0][c] * lap(sub);
            acc = (c % 2 == 0) ? acc + term : acc - term;
        }
        return acc;
    };
    return lap(M);
}

/* ---------- per-kind degree drivers ---------- */

template <class P>
inline void degrees_chain_ring(const P& R, const WedgePattern& W,
                               const std::vector<DenseMat<typename P::El>>& rho, long long N,
                               CohomologyReport& rep)
{
    using El = typename P::El;
    const int d = W.d;
    const std::size_t n = rho[0].rows;
    std::vector<DenseMat<El>> hd;
    for (int j = 0; j < d; ++j) hd.push_back(hom_matrix(R, W, j, rho));
    for (int j = 1; j < d; ++j)
        if (!mat_is_zero(R, mat_mul(R, hd[static_cast<std::size_t>(j)],
                                    hd[static_cast<std::size_t>(j) - 1])))
            throw invariant_violation("cohomology: cochain differential fails d(d(x)) = 0");
    for (int j = 0; j <= d; ++j) {
        std::size_t dim = W.basis[static_cast<std::size_t>(j)].size() * n;
        DenseMat<El> B = j < d ? hd[static_cast<std::size_t>(j)]
                               : DenseMat<El>::make(0, dim, R.zero());
        DenseMat<El> A = j > 0 ? hd[static_cast<std::size_t>(j) - 1]
                               : DenseMat<El>::make(dim, 0, R.zero());
        DegreeReport dr;
        dr.degree = j;
        dr.divisors = homology_chain_ring(R, std::move(B), std::move(A), N);
        for (long long e : dr.divisors) dr.length += e;
        dr.tail_bound = N;
        rep.euler += (j % 2 == 0 ? 1 : -1) * dr.length;
        rep.degrees.push_back(std::move(dr));
    }
}

inline void degrees_polyfp(const PolyFpProfile& R, const WedgePattern& W,
                           const std::vector<DenseMat<PolyFpProfile::El>>& rho, long long N,
                           CohomologyReport& rep)
{
    using El = PolyFpProfile::El;
    const int d = W.d;
    const std::size_t n = rho[0].rows;
    std::vector<DenseMat<El>> hd;
    for (int j = 0; j < d; ++j) hd.push_back(hom_matrix(R, W, j, rho));
    for (int j = 1; j < d; ++j)
        if (!mat_is_zero(R, mat_mul(R, hd[static_cast<std::size_t>(j)],
                                    hd[static_cast<std::size_t>(j) - 1])))
            throw invariant_violation("cohomology: cochain differential fails d(d(x)) = 0");
    for (int j = 0; j <= d; ++j) {
        std::size_t dim = W.basis[static_cast<std::size_t>(j)].size() * n;
        DenseMat<El> B = j < d ? hd[static_cast<std::size_t>(j)]
                               : DenseMat<El>::make(0, dim, R.zero());
        DenseMat<El> A = j > 0 ? hd[static_cast<std::size_t>(j) - 1]
                               : DenseMat<El>::make(dim, 0, R.zero());
        auto [free_rank, torsion] = homology_polyfp(R, std::move(B), std::move(A));
        DegreeReport dr;
        dr.degree = j;
        dr.free_rank = free_rank;
        for (const El& f : torsion) dr.torsion_degrees.push_back(R.deg(f));
        dr.length = free_rank;
        dr.tail_bound = N;
        rep.euler += (j % 2 == 0 ? 1 : -1) * dr.length;
        rep.degrees.push_back(std::move(dr));
    }
}

inline void degrees_fp(const FpProfile& R, const WedgePattern& W,
                       const std::vector<DenseMat<long long>>& rho, long long N,
                       CohomologyReport& rep)
{
    const int d = W.d;
    const std::size_t n = rho[0].rows;
    std::vector<DenseMat<long long>> hd;
    for (int j = 0; j < d; ++j) hd.push_back(hom_matrix(R, W, j, rho));
    for (int j = 1; j < d; ++j)
        if (!mat_is_zero(R, mat_mul(R, hd[static_cast<std::size_t>(j)],
                                    hd[static_cast<std::size_t>(j) - 1])))
            throw invariant_violation("cohomology: cochain differential fails d(d(x)) = 0");
    for (int j = 0; j <= d; ++j) {
        std::size_t dim = W.basis[static_cast<std::size_t>(j)].size() * n;
        std::size_t rkB = j < d ? rank_fp(R.p, hd[static_cast<std::size_t>(j)]) : 0;
        std::size_t rkA = j > 0 ? rank_fp(R.p, hd[static_cast<std::size_t>(j) - 1]) : 0;
        DegreeReport dr;
        dr.degree = j;
        dr.fp_dim = static_cast<long long>(dim - rkB - rkA);
        dr.length = dr.fp_dim;
        dr.tail_bound = N;
        rep.euler += (j % 2 == 0 ? 1 : -1) * dr.length;
        rep.degrees.push_back(std::move(dr));
    }
}

/* Truncated group cohomology of a free rank-r module with generator action
 * v -> M_i sigma_i(v): elementary divisors of H^j of the Hom-complex of the
 * resolution over B+/pi^N.  The h-analytic route draws its wedge pattern
 * from the distribution-coefficient complex and records an analyticity
 * certificate for the module; by the comparison theorem the truncated
 * reports of the two routes agree on h-analytic modules.
 *
 * Kinds: Qp and untwisted Laurent coefficients reduce to the chain rings
 * Z/p^N and F_p[T]/T^N (pi-power divisors); twisted Laurent coefficients
 * are linearized over F_p on the T-digit basis (dimension reports); the
 * untwisted pseudorigid ring reduces to free F_p[y]-modules on the X-slot
 * basis (residue-polynomial reports, y = p/X).  Full B-coefficient reports
 * are the colimit of these over pi-shifts of the lattice. */
inline CohomologyReport cohomology(const GroupPresentation& pres,
                                   const std::vector<BMatrix>& mats, long long N,
                                   CoeffChoice choice, long long h = 0, unsigned threads = 0)
{
    const RingDescriptor& desc = pres.descriptor();
    const SemilinearAction& act = pres.action();
    const int d = pres.d();
    const long long p = pres.p();
    if (N < 1) throw config_error("cohomology: need N >= 1");
    if (d != 1 && !(pres.is_abelian() && d <= 3))
        throw config_error(
            "cohomology: supported modules are rank-1 groups and abelian groups of rank <= 3");
    if (static_cast<int>(mats.size()) != d)
        throw config_error("cohomology: need one generator matrix per generator");
    const std::size_t r = mats[0].size();
    if (r == 0 || r > 8)
        throw config_error("cohomology: module rank must be between 1 and 8");
    for (const BMatrix& M : mats) {
        if (M.size() != r) throw config_error("cohomology: generator matrices must agree in size");
        for (const BVector& row : M) {
            if (row.size() != r)
                throw config_error("cohomology: generator matrices must be square");
            for (const BElem& b : row) {
                if (!(b.descriptor() == desc))
                    throw config_error("cohomology: matrix entry from the wrong coefficient ring");
                if (b.prec() < N)
                    throw config_error(
                        "cohomology: matrix entries need at least N digits of precision");
                if (!b.is_zero() && *b.val() < 0)
                    throw config_error(
                        "cohomology: matrix entries must be integral at truncation");
            }
        }
        BElem det = bmat_det(M);
        if (det.is_zero() || *det.val() != 0)
            throw config_error("cohomology: generator matrix is not invertible over B+");
    }
    /* module compatibility: commuting generators need commuting actions */
    for (int i = 1; i <= d; ++i)
        for (int j = i + 1; j <= d; ++j)
            for (std::size_t u = 0; u < r; ++u)
                for (std::size_t v = 0; v < r; ++v) {
                    BElem lhs = BElem::zero(desc, N), rhs = BElem::zero(desc, N);
                    for (std::size_t k = 0; k < r; ++k) {
                        lhs = lhs + mats[i - 1][u][k] * act.apply(i, mats[j - 1][k][v]);
                        rhs = rhs + mats[j - 1][u][k] * act.apply(j, mats[i - 1][k][v]);
                    }
                    if (!agree(lhs.reduce_prec(N), rhs.reduce_prec(N)))
                        throw config_error(
                            "cohomology: generator matrices do not define a module "
                            "(compatibility M_i sigma_i(M_j) = M_j sigma_j(M_i) fails)");
                }

    bool linear = act.is_trivial();
    if (!linear) {
        linear = true;
        BElem pi = BElem::uniformizer(desc, N);
        for (int i = 1; i <= d && linear; ++i) linear = agree(act.apply(i, pi), pi);
    }
    if (desc.kind == RingKind::OLambdaSlope1 && !linear)
        throw config_error(
            "cohomology: semilinear actions over the pseudorigid ring are not linearizable "
            "at truncation; only coefficient-linear modules are supported there");

    CohomologyReport rep;
    rep.choice = choice;
    rep.p = p;
    rep.N = N;
    rep.d = d;
    rep.module_rank = static_cast<long long>(r);

    WedgePattern pat;
    if (choice == CoeffChoice::Continuous) {
        IwasawaAlgebra ia(pres, PrecisionCtx(std::max<long long>(N, 2), 1));
        pat = wedge_pattern(lazard_serre(ia));
    } else {
        if (h < 0) throw config_error("cohomology: need h >= 0 for the h-analytic route");
        rep.h = h;
        long long n1 = std::max<long long>(
            {N, v_lower_w(p, static_cast<int>(h), 1) + 2, 2});
        DistAlgebra da(pres, h, n1, 1);
        pat = wedge_pattern(kohlhaase(da));
        /* analyticity certificate for the module's standard basis */
        long long dv = 3;
        long long nv = std::max<long long>(
            {N, v_lower_w(p, static_cast<int>(h), dv) + 2});
        DistAlgebra dav(pres, h, nv, dv);
        std::vector<BVector> basis;
        for (std::size_t l = 0; l < r; ++l) {
            BVector v;
            for (std::size_t k = 0; k < r; ++k)
                v.push_back(k == l ? BElem::one(desc, nv) : BElem::zero(desc, nv));
            basis.push_back(std::move(v));
        }
        try {
            rep.h_certified = true;
            for (const auto& vrep : dav.analytic_vectors(mats, basis, 3))
                rep.h_certified = rep.h_certified && vrep.is_h_lower;
        } catch (const config_error&) {
            /* not enough matrix precision for the analyticity scan */
            rep.h_certified = false;
        }
    }

    if (desc.kind == RingKind::Qp) {
        rep.kind = CohomKind::ChainRingDivisors;
        ZModProfile R(p, N);
        std::vector<DenseMat<Int>> rho;
        for (int i = 0; i < d; ++i) {
            DenseMat<Int> m = DenseMat<Int>::make(r, r, R.zero());
            for (std::size_t u = 0; u < r; ++u)
                for (std::size_t v = 0; v < r; ++v) m.at(u, v) = qp_cell(mats[i][u][v], N);
            for (std::size_t u = 0; u < r; ++u) m.at(u, u) = R.sub(m.at(u, u), R.one());
            rho.push_back(std::move(m));
        }
        degrees_chain_ring(R, pat, rho, N, rep);
    } else if (desc.kind == RingKind::LaurentFp && linear) {
        rep.kind = CohomKind::ChainRingDivisors;
        SeriesFpProfile R(p, N);
        std::vector<DenseMat<SeriesFpProfile::El>> rho;
        for (int i = 0; i < d; ++i) {
            auto m = DenseMat<SeriesFpProfile::El>::make(r, r, R.zero());
            for (std::size_t u = 0; u < r; ++u)
                for (std::size_t v = 0; v < r; ++v) m.at(u, v) = laurent_cell(mats[i][u][v], N);
            for (std::size_t u = 0; u < r; ++u) m.at(u, u) = R.sub(m.at(u, u), R.one());
            rho.push_back(std::move(m));
        }
        degrees_chain_ring(R, pat, rho, N, rep);
    } else if (desc.kind == RingKind::LaurentFp) {
        /* semilinear: linearize v -> M_i sigma_i(v) - v over F_p on the
         * basis T^t e_l, 0 <= t < N; columns are independent jobs */
        rep.kind = CohomKind::ResidueLinearized;
        FpProfile R(p);
        const std::size_t n = r * static_cast<std::size_t>(N);
        std::vector<DenseMat<long long>> rho(static_cast<std::size_t>(d),
                                             DenseMat<long long>::make(n, n, 0));
        for (int i = 0; i < d; ++i) {
            DenseMat<long long>& m = rho[static_cast<std::size_t>(i)];
            parallel_stride(n, threads, [&](std::size_t colidx) {
                std::size_t l = colidx / static_cast<std::size_t>(N);
                long long t = static_cast<long long>(colidx % static_cast<std::size_t>(N));
                BElem base(desc, LaurentElem::monomial(p, t, 1, N));
                BElem sig = act.apply(i + 1, base);
                for (std::size_t u = 0; u < r; ++u) {
                    BElem w = (mats[i][u][l].reduce_prec(N) * sig).reduce_prec(N);
                    std::vector<long long> cell = laurent_cell(w, N);
                    for (long long tt = 0; tt < N; ++tt) {
                        long long value = cell[static_cast<std::size_t>(tt)];
                        if (u == l && tt == t) value = ((value - 1) % p + p) % p;
                        m.at(u * static_cast<std::size_t>(N) + static_cast<std::size_t>(tt),
                             colidx) = value;
                    }
                }
            });
        }
        degrees_fp(R, pat, rho, N, rep);
    } else {
        /* pseudorigid, coefficient-linear: B+/X^N is free over F_p[y] on the
         * X-slots, so multiplication matrices become rN x rN polynomial
         * matrices and cohomology is reported per residue-polynomial degree */
        rep.kind = CohomKind::ResiduePolynomial;
        PolyFpProfile R(p);
        const std::size_t n = r * static_cast<std::size_t>(N);
        std::vector<DenseMat<PolyFpProfile::El>> rho;
        for (int i = 0; i < d; ++i) {
            auto m = DenseMat<PolyFpProfile::El>::make(n, n, R.zero());
            for (std::size_t u = 0; u < r; ++u)
                for (std::size_t l = 0; l < r; ++l) {
                    std::vector<PolyFpProfile::El> cell = pseudo_cell(R, mats[i][u][l], N);
                    for (long long k = 0; k < N; ++k)
                        for (long long mm = 0; k + mm < N; ++mm) {
                            if (R.is_zero(cell[static_cast<std::size_t>(mm)])) continue;
                            m.at(u * static_cast<std::size_t>(N) +
                                     static_cast<std::size_t>(k + mm),
                                 l * static_cast<std::size_t>(N) + static_cast<std::size_t>(k)) =
                                cell[static_cast<std::size_t>(mm)];
                        }
                }
            for (std::size_t k = 0; k < n; ++k) m.at(k, k) = R.sub(m.at(k, k), R.one());
            rho.push_back(std::move(m));
        }
        degrees_polyfp(R, pat, rho, N, rep);
    }
    return rep;
}

}  // namespace mixchar
