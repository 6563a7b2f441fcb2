#pragma once

#include "ring.hpp"
#include "valuations.hpp"

#include <functional>
#include <limits>
#include <mutex>
#include <shared_mutex>

namespace mixchar {

/* Exact integers a_k with binom(T,n) binom(T,m) = sum_k a_k binom(T,k) as
 * functions on Z; a_k = 0 outside max(n,m) <= k <= n+m.  Returned vector v
 * has v[t] = a_{max(n,m)+t}.  Computed by evaluating both sides at
 * T = max(n,m) .. n+m and solving the unitriangular system (binom(T,k)
 * vanishes for k > T). */
inline std::vector<Int> int_structure_constants(long long n, long long m)
{
    if (n < 0 || m < 0) throw std::invalid_argument("int_structure_constants: need n,m >= 0");
    long long lo = std::max(n, m), hi = n + m;
    std::vector<Int> a(hi - lo + 1, 0);
    for (long long T = lo; T <= hi; ++T) {
        Int rhs = binom_int(T, n) * binom_int(T, m);
        for (long long k = lo; k < T; ++k) rhs -= a[k - lo] * binom_int(T, k);
        a[T - lo] = rhs;  // binom(T,T) = 1
    }
    return a;
}

/* Concurrent-read cache of structure constants: shared lookups, single-writer
 * insertion per key. */
class IntStructureTable {
public:
    const std::vector<Int>& get(long long n, long long m)
    {
        if (n > m) std::swap(n, m);
        auto key = std::make_pair(n, m);
        {
            std::shared_lock lk(mu_);
            auto it = cache_.find(key);
            if (it != cache_.end()) return it->second;
        }
        std::vector<Int> fresh = int_structure_constants(n, m);
        std::unique_lock lk(mu_);
        return cache_.try_emplace(key, std::move(fresh)).first->second;
    }

    static IntStructureTable& global()
    {
        static IntStructureTable t;
        return t;
    }

private:
    std::map<std::pair<long long, long long>, std::vector<Int>> cache_;
    std::shared_mutex mu_;
};

enum class BinConvention { Bin, HUpper, HLower };

inline std::string convention_name(BinConvention c)
{
    switch (c) {
        case BinConvention::Bin: return "Bin";
        case BinConvention::HUpper: return "hBinUpper";
        case BinConvention::HLower: return "hBinLower";
    }
    return "?";
}

/* Finitely supported series sum_n b_n binom(T,n) over multi-indices with
 * |n| <= D.  Convention fixes the valuation floor the coefficients must
 * respect:
 *   Bin        : val(b_n) >= 0
 *   HUpper (h) : val(b_n) >= v_upper(h,n)
 *   HLower (h) : val(b_n) >= v_lower(h,n)
 * each relaxed by pole_budget (products of HLower series generate one
 * uniformizer pole, which is reported here rather than silently rescaled). */
struct BinSeries {
    RingDescriptor descriptor;
    int d = 1;
    long long D = 0;
    BinConvention conv = BinConvention::Bin;
    long long h = 0;
    long long pole_budget = 0;
    std::map<MultiIndex, BElem> coeffs;

    BinSeries() = default;
    BinSeries(RingDescriptor desc, int dim, long long cap, BinConvention c = BinConvention::Bin,
              long long level = 0)
        : descriptor(std::move(desc)), d(dim), D(cap), conv(c), h(level)
    {
        if (dim < 1) throw config_error("BinSeries: dimension must be >= 1");
        if (cap < 0) throw config_error("BinSeries: support cap must be >= 0");
        if (level < 0) throw config_error("BinSeries: h must be >= 0");
    }

    long long floor_for(const MultiIndex& n) const
    {
        switch (conv) {
            case BinConvention::Bin: return 0;
            case BinConvention::HUpper: return v_upper(descriptor.p, static_cast<int>(h), n);
            case BinConvention::HLower: return v_lower(descriptor.p, static_cast<int>(h), n);
        }
        return 0;
    }

    void set(const MultiIndex& n, const BElem& b)
    {
        if (static_cast<int>(n.dim()) != d)
            throw std::invalid_argument("BinSeries: index dimension mismatch");
        if (n.weight() > D) throw std::invalid_argument("BinSeries: index beyond support cap");
        if (!(b.descriptor() == descriptor))
            throw std::invalid_argument("BinSeries: coefficient descriptor mismatch");
        if (b.is_zero() && b.prec() >= floor_for(n) - pole_budget) {
            coeffs.erase(n);
            return;
        }
        coeffs.insert_or_assign(n, b);
    }

    void add(const MultiIndex& n, const BElem& b)
    {
        auto it = coeffs.find(n);
        if (it == coeffs.end())
            set(n, b);
        else
            set(n, it->second + b);
    }

    /* Certifies the convention's valuation floor on every stored coefficient;
     * a coefficient that is zero at too low a precision cannot certify the
     * floor and is rejected as well. */
    void check_invariant() const
    {
        for (auto& [n, b] : coeffs)
            if (b.val_floor() < floor_for(n) - pole_budget)
                throw invariant_violation(
                    "BinSeries: coefficient at " + n.str() + " has valuation floor " +
                    std::to_string(b.val_floor()) + " below required " +
                    std::to_string(floor_for(n) - pole_budget) + " (" + convention_name(conv) +
                    ", h=" + std::to_string(h) + ")");
    }
};

namespace detail {
/* Distribute the 1-dim structure constants over the coordinates of (n, m),
 * calling sink(k, integer coefficient) for every k with |k| <= Dcap. */
template <class Sink>
inline void combine_structure(const MultiIndex& n, const MultiIndex& m, long long Dcap,
                              IntStructureTable& table, Sink&& sink)
{
    size_t d = n.dim();
    MultiIndex k = n;
    std::vector<const std::vector<Int>*> rows(d);
    for (size_t i = 0; i < d; ++i) rows[i] = &table.get(n.e[i], m.e[i]);
    std::vector<long long> lows(d);
    for (size_t i = 0; i < d; ++i) lows[i] = std::max(n.e[i], m.e[i]);

    std::function<void(size_t, Int)> rec = [&](size_t i, Int acc) {
        if (i == d) {
            if (k.weight() <= Dcap) sink(k, acc);
            return;
        }
        const std::vector<Int>& row = *rows[i];
        for (size_t t = 0; t < row.size(); ++t) {
            if (row[t] == 0) continue;
            k.e[i] = lows[i] + static_cast<long long>(t);
            rec(i + 1, acc * row[t]);
        }
    };
    rec(0, Int(1));
}
}  // namespace detail

/* Product in the binomial basis, truncated to |k| <= min(Dx, Dy).  Bin and
 * HUpper are closed; HLower products absorb a single uniformizer pole,
 * reported through pole_budget (= budget_x + budget_y + 1). */
inline BinSeries mul_binseries(const BinSeries& x, const BinSeries& y,
                               IntStructureTable& table = IntStructureTable::global())
{
    if (!(x.descriptor == y.descriptor))
        throw config_error("mul_binseries: descriptor mismatch");
    if (x.d != y.d) throw config_error("mul_binseries: dimension mismatch");
    if (x.conv != y.conv || (x.conv != BinConvention::Bin && x.h != y.h))
        throw config_error("mul_binseries: convention mismatch");
    x.check_invariant();
    y.check_invariant();

    BinSeries out(x.descriptor, x.d, std::min(x.D, y.D), x.conv, x.h);
    out.pole_budget = x.pole_budget + y.pole_budget +
                      (x.conv == BinConvention::HLower ? 1 : 0);
    for (auto& [n, bn] : x.coeffs)
        for (auto& [m, bm] : y.coeffs) {
            BElem c = bn * bm;
            detail::combine_structure(n, m, out.D, table, [&](const MultiIndex& k, const Int& a) {
                out.add(k, c * BElem::from_int(out.descriptor, a, c.prec()));
            });
        }
    out.check_invariant();
    return out;
}

/* Forward-difference (Mahler) transform of values f(0..D): coefficient
 * a_n = (Delta^n f)(0), so that sum a_n binom(x,n) interpolates f exactly at
 * the stated precision. */
inline BinSeries mahler_transform(const std::vector<BElem>& values)
{
    if (values.empty()) throw config_error("mahler_transform: need at least one value");
    const RingDescriptor& desc = values.front().descriptor();
    for (auto& v : values)
        if (!(v.descriptor() == desc))
            throw config_error("mahler_transform: mixed descriptors");
    BinSeries out(desc, 1, static_cast<long long>(values.size()) - 1, BinConvention::Bin);
    std::vector<BElem> diff = values;
    for (long long n = 0; n < static_cast<long long>(values.size()); ++n) {
        out.set(MultiIndex{n}, diff.front());
        for (size_t i = 0; i + 1 < diff.size(); ++i) diff[i] = diff[i + 1] - diff[i];
        diff.pop_back();
    }
    return out;
}

/* Pointwise evaluation at an integer tuple: sum_n b_n prod_i binom(x_i, n_i),
 * exact because integer binomials are exact. */
inline BElem evaluate_at_int(const BinSeries& s, const std::vector<Int>& x)
{
    if (static_cast<int>(x.size()) != s.d)
        throw std::invalid_argument("evaluate_at_int: dimension mismatch");
    long long prec = std::numeric_limits<long long>::max();
    for (auto& [n, b] : s.coeffs) prec = std::min(prec, b.prec());
    if (s.coeffs.empty()) prec = 1;
    BElem acc = BElem::zero(s.descriptor, prec);
    for (auto& [n, b] : s.coeffs) {
        Int c = 1;
        for (size_t i = 0; i < n.dim(); ++i) c *= binom_int(x[i], n.e[i]);
        acc = acc + b * BElem::from_int(s.descriptor, c, b.prec());
    }
    return acc;
}

inline BElem evaluate_at_int(const BinSeries& s, const Int& x)
{
    return evaluate_at_int(s, std::vector<Int>{x});
}

/* Windowed-margin analyticity report.  margin_upper/lower list, for each
 * total weight in the top window [max(0, D-w), D], the minimum over stored
 * indices of that weight of val(b_n) - v(h,n); weights with no stored
 * coefficient are reported as absent.  A convention classifies as h-analytic
 * at desk scale when every windowed margin is >= 0 and the margin does not
 * decrease across the window (last defined margin >= first defined margin).
 * The report never claims more than the window shows. */
struct AnalyticityReport {
    long long h = 0;
    long long window = 0;
    long long window_lo = 0, window_hi = 0;
    bool is_h_upper = true;
    bool is_h_lower = true;
    std::vector<std::pair<long long, std::optional<long long>>> margins_upper, margins_lower;
};

inline AnalyticityReport classify_analyticity(const BinSeries& s, long long h, long long w)
{
    if (h < 0 || w < 0) throw config_error("classify_analyticity: need h, w >= 0");
    AnalyticityReport rep;
    rep.h = h;
    rep.window = w;
    rep.window_lo = std::max<long long>(0, s.D - w);
    rep.window_hi = s.D;
    std::map<long long, long long> mu, ml;
    for (auto& [n, b] : s.coeffs) {
        long long wt = n.weight();
        if (wt < rep.window_lo || wt > rep.window_hi) continue;
        long long cu = b.val_floor() - v_upper(s.descriptor.p, static_cast<int>(h), n);
        long long cl = b.val_floor() - v_lower(s.descriptor.p, static_cast<int>(h), n);
        auto [iu, fu] = mu.try_emplace(wt, cu);
        if (!fu) iu->second = std::min(iu->second, cu);
        auto [il, fl] = ml.try_emplace(wt, cl);
        if (!fl) il->second = std::min(il->second, cl);
    }
    auto verdict = [&](const std::map<long long, long long>& m,
                       std::vector<std::pair<long long, std::optional<long long>>>& out) {
        bool ok = true;
        for (long long wt = rep.window_lo; wt <= rep.window_hi; ++wt) {
            auto it = m.find(wt);
            out.emplace_back(wt, it == m.end() ? std::nullopt
                                               : std::optional<long long>(it->second));
        }
        for (auto& [wt, mg] : m)
            if (mg < 0) ok = false;
        if (!m.empty() && m.rbegin()->second < m.begin()->second) ok = false;
        return ok;
    };
    rep.is_h_upper = verdict(mu, rep.margins_upper);
    rep.is_h_lower = verdict(ml, rep.margins_lower);
    return rep;
}

/* Change of basis from the scaled binomials {pi^{v_upper(h,n)} binom(T,n)}
 * (n = 0..D) to the product-of-discs monomial basis {((T - i~)/p^h)^j}
 * indexed by the unique decomposition c = i~ + p^h j, i~ in [0, p^h),
 * 0 <= c <= D.  Entries are exact p-adic integers reduced mod p^M; the
 * matrix is invertible mod p (checked by elimination over F_p).  The lift i~
 * is fixed as the representative in [0, p^h); any other lift differs by a
 * unit change of basis. */
struct AmiceMatrix {
    long long p = 2, h = 0, D = 0, M = 1;
    std::vector<std::vector<Int>> entry;  // entry[n][c], both 0..D, mod p^M
    bool invertible_mod_p = false;
};

inline AmiceMatrix amice_basis_change(long long p, long long h, long long D, long long M)
{
    if (p < 2 || h < 0 || D < 0 || M < 1) throw config_error("amice_basis_change: bad parameters");
    long long ph = pow_ll(p, static_cast<int>(h));
    if (ph > D) throw config_error("amice_basis_change: insufficient D (need p^h <= D)");
    Int mod = ppow(p, M);
    AmiceMatrix A;
    A.p = p;
    A.h = h;
    A.D = D;
    A.M = M;
    A.entry.assign(D + 1, std::vector<Int>(D + 1, 0));
    for (long long n = 0; n <= D; ++n) {
        long long vfact = val_p_factorial(p, n);
        Int fact_unit = 1;
        for (long long r = 2; r <= n; ++r) fact_unit *= r;
        fact_unit /= ppow(p, vfact);
        Int fact_unit_inv = mod_inverse(mod_reduce(fact_unit, mod), mod);
        long long vh = v_upper_1(p, static_cast<int>(h), n);
        for (long long itilde = 0; itilde < ph; ++itilde) {
            /* Coefficients of prod_{r=0}^{n-1} (u + (i~ - r)) in u. */
            std::vector<Int> poly(n + 1, 0);
            poly[0] = 1;
            long long deg = 0;
            for (long long r = 0; r < n; ++r) {
                Int c = Int(itilde - r);
                for (long long t = deg + 1; t >= 1; --t) poly[t] = poly[t - 1] + c * poly[t];
                poly[0] *= c;
                ++deg;
            }
            for (long long j = 0; itilde + ph * j <= D; ++j) {
                if (j > n) break;
                /* n! * entry = p^{v_upper(h,n) + h j} * e_{n-j}; Amice
                 * integrality guarantees divisibility. */
                Int num = poly[j] * ppow(p, vh) * ppow(p, h * j);
                if (num != 0 && val_p_int(num, p) < vfact)
                    throw invariant_violation("amice_basis_change: non-integral entry");
                Int scaled = num / ppow(p, vfact);
                A.entry[n][itilde + ph * j] = mod_reduce(scaled * fact_unit_inv, mod);
            }
        }
    }
    /* Invertibility over F_p by Gaussian elimination. */
    std::vector<std::vector<long long>> red(D + 1, std::vector<long long>(D + 1));
    for (long long n = 0; n <= D; ++n)
        for (long long c = 0; c <= D; ++c)
            red[n][c] = static_cast<long long>((A.entry[n][c] % p).convert_to<long long>());
    long long rank = 0;
    for (long long col = 0; col <= D && rank <= D; ++col) {
        long long piv = -1;
        for (long long r = rank; r <= D; ++r)
            if (red[r][col] % p != 0) {
                piv = r;
                break;
            }
        if (piv < 0) continue;
        std::swap(red[piv], red[rank]);
        long long inv = static_cast<long long>(
            mod_inverse(Int(red[rank][col]), Int(p)).convert_to<long long>());
        for (long long c = 0; c <= D; ++c) red[rank][c] = red[rank][c] * inv % p;
        for (long long r = 0; r <= D; ++r) {
            if (r == rank || red[r][col] == 0) continue;
            long long f = red[r][col];
            for (long long c = 0; c <= D; ++c)
                red[r][c] = ((red[r][c] - f * red[rank][c]) % p + p) % p;
        }
        ++rank;
    }
    A.invertible_mod_p = rank == D + 1;
    return A;
}

/* The character x -> sum_{n < N} binom(x, n) t^n for a unit-ball element t of
 * valuation >= 1; terms with n >= N vanish mod pi^N.  Multiplicative:
 * lambda(x) lambda(y) = lambda(x+y) at precision. */
inline BElem lambda_character(const BElem& t, const PadicInt& x, long long N)
{
    const RingDescriptor& d = t.descriptor();
    if (t.is_zero() ? t.prec() < 1 : *t.val() < 1)
        throw config_error("lambda_character: t must have valuation >= 1");
    if (x.p() != d.p) throw config_error("lambda_character: exponent prime mismatch");
    if (N < 1) throw config_error("lambda_character: need N >= 1");
    if (t.prec() < N) throw config_error("lambda_character: t carries fewer digits than N");
    BElem tN = t.reduce_prec(N);
    BElem acc = BElem::zero(d, N);
    BElem tp = BElem::one(d, N);
    for (long long n = 0; n < N; ++n) {
        if (n > 0) {
            tp = tp * tN;
            if (tp.is_zero()) break;
        }
        PadicInt c = PadicInt::binom(x, n);
        /* binom(x,n) matters mod p^(N - val(t^n)); compute with a lifted
         * representative at precision N after checking x genuinely carries
         * the needed digits (mod-p residue suffices in characteristic p). */
        if (d.kind != RingKind::LaurentFp && chk_add(c.prec(), tp.val_floor()) < N)
            throw config_error("lambda_character: exponent precision insufficient for cap N");
        PadicInt cr = c.prec() >= N ? c.reduce_prec(N) : c.lift_prec(N);
        acc = acc + BElem::from_padic(d, cr, N) * tp;
    }
    return acc;
}

}  // namespace mixchar
