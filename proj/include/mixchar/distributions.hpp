#pragma once

#include "iwasawa.hpp"

#include <exception>
#include <thread>

namespace mixchar {

class DistAlgebra;

/* Element of a truncated h-analytic distribution algebra: finitely many
 * b_n c^n with |n| <= D, each coefficient held at the ball precision
 * N - v_h(|n|) and subject to the membership bound val(b_n) >= -v_h(|n|),
 * i.e. an exact class in L_h / pi^N L_h where L_h is the unit-ball lattice
 * spanned by pi^{-v_h(n)} c^n.  Support truncation of products is recorded
 * in tail_gauge(): the discarded part is a ball element of gauge at least
 * that value (gauge of b c^n = val(b) + v_h(|n|)). */
class DistElem {
public:
    const std::map<MultiIndex, BElem>& coeffs() const { return c_; }
    std::optional<long long> tail_gauge() const { return tail_; }
    bool is_zero() const { return c_.empty(); }

    std::string str() const
    {
        std::string s;
        for (auto& [n, b] : c_) {
            if (!s.empty()) s += " + ";
            s += "(" + b.str() + ") * c^" + n.str();
        }
        if (s.empty()) s = "0";
        if (tail_) s += "  [tail gauge >= " + std::to_string(*tail_) + "]";
        return s;
    }

private:
    friend class DistAlgebra;
    std::shared_ptr<const GroupPresentation> pres_;
    long long h_ = 0;
    std::map<MultiIndex, BElem> c_;
    std::optional<long long> tail_;
};

/* Table of all structure constants a_{n,m,k} = coefficient of c^k in
 * c^n * c^m for |n|, |m|, |k| <= D, grouped by k (the family F_k maps
 * (n,m) to a_{n,m,k}).  Absent entries are exactly zero at the stored
 * precision.  Each entry carries the certified lower bound
 * v_h(n) + v_h(m) - v_h(k) on its valuation. */
class BCHTable {
public:
    using Key = std::pair<MultiIndex, MultiIndex>;

    long long p() const { return p_; }
    long long h() const { return h_; }
    long long degree() const { return D_; }
    long long entry_prec() const { return prec_; }

    const std::map<MultiIndex, std::map<Key, BElem>>& families() const { return f_; }

    BElem entry(const MultiIndex& n, const MultiIndex& m, const MultiIndex& k) const
    {
        auto fk = f_.find(k);
        if (fk != f_.end()) {
            auto it = fk->second.find({n, m});
            if (it != fk->second.end()) return it->second;
        }
        return BElem::zero(desc_, prec_);
    }

    long long bound(const MultiIndex& n, const MultiIndex& m, const MultiIndex& k) const
    {
        return v_lower(p_, static_cast<int>(h_), n) + v_lower(p_, static_cast<int>(h_), m) -
               v_lower(p_, static_cast<int>(h_), k);
    }

    /* val_floor(entry) - bound; for absent entries the evidence is the stored
     * precision, which exceeds every bound by construction. */
    long long margin(const MultiIndex& n, const MultiIndex& m, const MultiIndex& k) const
    {
        return entry(n, m, k).val_floor() - bound(n, m, k);
    }

private:
    friend class DistAlgebra;
    RingDescriptor desc_ = RingDescriptor::qp(2);
    long long p_ = 2, h_ = 0, D_ = 1, prec_ = 1;
    std::map<MultiIndex, std::map<Key, BElem>> f_;
};

using BMatrix = std::vector<std::vector<BElem>>;
using BVector = std::vector<BElem>;

/* Windowed-margin report for one module vector: margin(n) =
 * val(c^n v) - v_lower(h, n), minimized over indices of equal weight.
 * is_h_lower holds when every margin for |n| <= D is >= 0 and the margin
 * does not decrease across the top window (last defined window margin >=
 * first).  Evidence only: the report never claims more than the computed
 * window shows. */
struct VectorAnalyticityReport {
    std::size_t index = 0;
    long long h = 0;
    long long window = 0;
    long long window_lo = 0, window_hi = 0;
    bool is_h_lower = true;
    long long min_margin = 0;
    std::vector<std::pair<long long, std::optional<long long>>> margins_lower;
};

/* Truncated h-analytic distribution algebra over a uniform-group
 * presentation.  Products run through the collection engine on the
 * integral renormalization b = pi^{-v_h} b~ at an internal precision high
 * enough that every reported digit is representative-independent. */
class DistAlgebra {
public:
    DistAlgebra(GroupPresentation pres, long long h, long long N, long long D)
        : pres_(std::make_shared<const GroupPresentation>(std::move(pres))),
          desc_(pres_->descriptor()),
          p_(desc_.p),
          h_(h),
          N_(N),
          D_(D),
          smax_(validated_gauge_digits(desc_.p, h, N, D)),
          eng_(*pres_, PrecisionCtx(N + 2 * smax_, 2 * D))
    {
    }

    const GroupPresentation& presentation() const { return *pres_; }
    const RingDescriptor& descriptor() const { return desc_; }
    long long h() const { return h_; }
    long long N() const { return N_; }
    long long D() const { return D_; }

    long long vh(long long weight) const { return v_lower_w(p_, static_cast<int>(h_), weight); }
    long long vh(const MultiIndex& n) const { return vh(n.weight()); }
    /* Absolute coefficient precision at weight w. */
    long long ball_prec(long long w) const { return N_ - vh(w); }

    DistElem zero() const { return make({}, std::nullopt); }

    DistElem monomial(const BElem& b, const MultiIndex& n) const
    {
        check_desc(b);
        check_index(n);
        if (n.weight() > D_) throw config_error("DistAlgebra: support exceeds the degree bound D");
        long long target = ball_prec(n.weight());
        if (b.prec() < target)
            throw config_error("DistAlgebra: coefficient carries fewer digits than the ball "
                               "precision N - v_h(|n|)");
        if (b.val_floor() < -vh(n))
            throw config_error(
                "DistAlgebra: coefficient violates the membership bound val(b) >= -v_h(|n|)");
        std::map<MultiIndex, BElem> c;
        BElem r = b.reduce_prec(target);
        if (!r.is_zero()) c.emplace(n, std::move(r));
        return make(std::move(c), std::nullopt);
    }

    DistElem scalar(const BElem& b) const { return monomial(b, zero_idx()); }

    DistElem one() const { return scalar(BElem::one(desc_, N_)); }

    /* Stored coefficient of c^k, or zero at the ball precision. */
    BElem coeff(const DistElem& x, const MultiIndex& k) const
    {
        check_elem(x);
        check_index(k);
        auto it = x.c_.find(k);
        if (it != x.c_.end()) return it->second;
        return BElem::zero(desc_, std::max<long long>(1, ball_prec(k.weight())));
    }

    DistElem add(const DistElem& x, const DistElem& y) const
    {
        check_elem(x);
        check_elem(y);
        std::map<MultiIndex, BElem> out = x.c_;
        for (auto& [n, b] : y.c_) {
            auto it = out.find(n);
            if (it == out.end())
                out.emplace(n, b);
            else
                it->second = it->second + b;
        }
        drop_zeros(out);
        return make(std::move(out), min_tail(x.tail_, y.tail_));
    }

    DistElem neg(const DistElem& x) const
    {
        check_elem(x);
        std::map<MultiIndex, BElem> out;
        for (auto& [n, b] : x.c_) out.emplace(n, b.neg());
        return make(std::move(out), x.tail_);
    }

    DistElem sub(const DistElem& x, const DistElem& y) const { return add(x, neg(y)); }

    /* Metadata-only transform: return x with its discarded-support bound
     * lowered to include gauge g.  Used by operators (e.g. contracting
     * homotopies) that map a discarded tail to another bounded tail. */
    DistElem with_tail(const DistElem& x, std::optional<long long> g) const
    {
        check_elem(x);
        std::map<MultiIndex, BElem> c = x.c_;
        return make(std::move(c), min_tail(x.tail_, g));
    }

    /* Agreement of stored data: identical support with coefficients agreeing
     * at the common precision, and identical recorded tail bounds. */
    bool agree_elems(const DistElem& x, const DistElem& y) const
    {
        check_elem(x);
        check_elem(y);
        if (x.tail_ != y.tail_) return false;
        for (auto& [n, b] : x.c_)
            if (!agree(b, coeff(y, n))) return false;
        for (auto& [n, b] : y.c_)
            if (x.c_.find(n) == x.c_.end() && !b.is_zero()) return false;
        return true;
    }

    /* Minimum of val(b_n) + v_h(|n|) over the support (the h-gauge); nullopt
     * for the zero element.  Membership in the unit ball is gauge >= 0. */
    std::optional<long long> gauge_floor(const DistElem& x) const
    {
        check_elem(x);
        return gauge_floor_raw(x.c_);
    }

    /* Same with the upper convention v_upper (coordinatewise factorials);
     * membership in the upper ball is gauge >= 0.  Since v_upper <= v_lower,
     * the upper ball sits inside the lower ball and this gauge is never
     * larger than gauge_floor. */
    std::optional<long long> gauge_floor_upper(const DistElem& x) const
    {
        check_elem(x);
        std::optional<long long> g;
        for (auto& [n, b] : x.c_) {
            long long c = chk_add(b.val_floor(), v_upper(p_, static_cast<int>(h_), n));
            g = g ? std::min(*g, c) : c;
        }
        return g;
    }

    /* Product.  Each pair of terms is renormalized to integral coefficients,
     * multiplied exactly through the collection engine at internal precision
     * N + 2 v_h(D), and denormalized; weight > D output is discarded into the
     * tail gauge.  The membership bound is re-verified on the output: a
     * violation signals an arithmetic bug, not a user error. */
    DistElem mul(const DistElem& x, const DistElem& y) const
    {
        check_elem(x);
        check_elem(y);
        std::map<MultiIndex, BElem> out;
        std::optional<long long> tail;
        auto upd_tail = [&](long long g) { tail = tail ? std::min(*tail, g) : g; };

        for (auto& [n, bn] : x.c_) {
            long long vn = vh(n);
            BElem tn = lift_eng(bn.shift(vn));
            for (auto& [m, bm] : y.c_) {
                long long vm = vh(m);
                long long s = chk_add(vn, vm);
                BElem tm = lift_eng(bm.shift(vm));
                IwasawaElem prod = eng_.mul(eng_.monomial(tn, n), eng_.monomial(tm, m));
                for (auto& [k, r] : prod.coeffs()) {
                    BElem rs = r.shift(-s);
                    if (k.weight() <= D_) {
                        long long target = ball_prec(k.weight());
                        if (rs.prec() < target)
                            throw invariant_violation(
                                "DistAlgebra: product lost ball precision");
                        BElem c = rs.reduce_prec(target);
                        if (c.is_zero()) continue;
                        auto it = out.find(k);
                        if (it == out.end())
                            out.emplace(k, std::move(c));
                        else
                            it->second = it->second + c;
                    } else {
                        upd_tail(chk_add(rs.val_floor(), vh(k)));
                    }
                }
            }
        }
        drop_zeros(out);

        /* Input tails propagate: gauge(eps * y) >= tail(x) + gauge(y). */
        auto gy = gauge_floor_raw(y.c_);
        auto gx = gauge_floor_raw(x.c_);
        if (x.tail_ && gy) upd_tail(chk_add(*x.tail_, *gy));
        if (y.tail_ && gx) upd_tail(chk_add(*y.tail_, *gx));
        if (x.tail_ && y.tail_) upd_tail(chk_add(*x.tail_, *y.tail_));

        auto g = gauge_floor_raw(out);
        if (g && *g < 0)
            throw invariant_violation(
                "DistAlgebra: product left the h-ball (structure-constant bound violated)");
        return make(std::move(out), tail);
    }

    /* Structure constants a_{n,m,k} for all |n|, |m|, |k| <= D, computed as
     * the c^k-coefficients of the engine product c^n * c^m and stored at the
     * internal precision (which exceeds every certified bound).  Pairs (n,m)
     * are independent pure tasks; `threads` 0 picks the hardware count. */
    BCHTable bch_table(unsigned threads = 0) const
    {
        std::vector<MultiIndex> idx = indices_up_to(pres_->d(), D_);
        std::vector<BCHTable::Key> pairs;
        for (const MultiIndex& n : idx)
            for (const MultiIndex& m : idx) pairs.emplace_back(n, m);

        std::vector<std::map<MultiIndex, BElem>> res(pairs.size());
        unsigned hw = std::thread::hardware_concurrency();
        unsigned nt = threads ? threads : (hw ? hw : 1);
        nt = static_cast<unsigned>(
            std::min<std::size_t>(nt, pairs.size() ? pairs.size() : 1));

        std::vector<std::exception_ptr> errs(nt);
        auto work = [&](unsigned tid) {
            try {
                for (std::size_t j = tid; j < pairs.size(); j += nt) {
                    const auto& [n, m] = pairs[j];
                    IwasawaElem prod = eng_.mul(eng_.monomial(BElem::one(desc_, eng_prec()), n),
                                                eng_.monomial(BElem::one(desc_, eng_prec()), m));
                    std::map<MultiIndex, BElem> keep;
                    for (auto& [k, a] : prod.coeffs())
                        if (k.weight() <= D_) keep.emplace(k, a);
                    res[j] = std::move(keep);
                }
            } catch (...) {
                errs[tid] = std::current_exception();
            }
        };
        if (nt == 1) {
            work(0);
        } else {
            std::vector<std::thread> pool;
            for (unsigned t = 0; t < nt; ++t) pool.emplace_back(work, t);
            for (auto& th : pool) th.join();
        }
        for (auto& e : errs)
            if (e) std::rethrow_exception(e);

        BCHTable tab;
        tab.desc_ = desc_;
        tab.p_ = p_;
        tab.h_ = h_;
        tab.D_ = D_;
        tab.prec_ = eng_prec();
        for (std::size_t j = 0; j < pairs.size(); ++j)
            for (auto& [k, a] : res[j]) tab.f_[k][pairs[j]] = a;
        return tab;
    }

    /* Canonical inclusion from the distribution algebra of the p^t-power
     * subgroup (generators g_i^{p^t}, same h and truncation): rewrites each
     * primed monomial c'^n = prod (g_i^{p^t} - 1)^{n_i} in the c-basis.
     * Supports abelian presentations and diagonal conjugation rules
     * (g_j g_i g_j^{-1} = g_i^alpha), whose p^t-power form has exponent
     * alpha^{p^t}. */
    DistElem include_from_subgroup(const DistAlgebra& sub, const DistElem& x, int t) const
    {
        sub.check_elem(x);
        if (t < 0) throw config_error("DistAlgebra: subgroup power t must be >= 0");
        if (desc_.kind != sub.desc_.kind || p_ != sub.p_ || pres_->d() != sub.pres_->d() ||
            h_ != sub.h_ || N_ != sub.N_ || D_ != sub.D_)
            throw config_error(
                "DistAlgebra: subgroup inclusion requires matching ring, rank, h, and truncation");
        if (t == 0) return make(std::map<MultiIndex, BElem>(x.c_), x.tail_);

        long long pt = pow_ll(p_, t);
        check_subgroup_presentation(sub, t, pt);

        long long n_inc = chk_add(N_, smax_);
        long long d_inc = chk_mul(D_, pt);
        if (d_inc > 64)
            throw config_error("DistAlgebra: inclusion degree D * p^t exceeds the desk budget");
        IwasawaAlgebra inc(*pres_, PrecisionCtx(n_inc, d_inc));

        /* c'_i = (1 + c_i)^{p^t} - 1 expanded with exact integer binomials. */
        int d = pres_->d();
        std::vector<IwasawaElem> cp;
        cp.reserve(static_cast<std::size_t>(d));
        for (int i = 1; i <= d; ++i) {
            IwasawaElem e = inc.zero();
            for (long long k = 1; k <= pt; ++k)
                e = inc.add(e, inc.monomial(BElem::from_int(desc_, binom_int(pt, k), n_inc),
                                            zero_idx().plus(i, k)));
            cp.push_back(std::move(e));
        }

        std::map<MultiIndex, BElem> out;
        std::optional<long long> tail;
        auto upd_tail = [&](long long g) { tail = tail ? std::min(*tail, g) : g; };
        for (auto& [n, bn] : x.c_) {
            long long s = vh(n);
            BElem tn = bn.shift(s);
            IwasawaElem acc =
                inc.scalar(tn.prec() >= n_inc ? tn.reduce_prec(n_inc) : tn.lift_prec(n_inc));
            for (int i = 1; i <= d; ++i)
                for (long long r = 0; r < n[i]; ++r) acc = inc.mul(acc, cp[static_cast<std::size_t>(i - 1)]);
            for (auto& [k, rk] : acc.coeffs()) {
                BElem rs = rk.shift(-s);
                if (k.weight() <= D_) {
                    long long target = ball_prec(k.weight());
                    if (rs.prec() < target)
                        throw invariant_violation("DistAlgebra: inclusion lost ball precision");
                    BElem c = rs.reduce_prec(target);
                    if (c.is_zero()) continue;
                    auto it = out.find(k);
                    if (it == out.end())
                        out.emplace(k, std::move(c));
                    else
                        it->second = it->second + c;
                } else {
                    upd_tail(chk_add(rs.val_floor(), vh(k)));
                }
            }
        }
        drop_zeros(out);
        if (x.tail_) upd_tail(*x.tail_);  // inclusion does not decrease the gauge
        auto g = gauge_floor_raw(out);
        if (g && *g < 0)
            throw invariant_violation("DistAlgebra: inclusion left the h-ball");
        return make(std::move(out), tail);
    }

    /* Evidence report on h-analyticity of module vectors.  The module is a
     * free truncated B-module of rank r with the semilinear action of g_i
     * given by v -> M_i sigma_i(v); rho(c_i) v = M_i sigma_i(v) - v, and
     * c^n v applies the factors in generator order. */
    std::vector<VectorAnalyticityReport> analytic_vectors(const std::vector<BMatrix>& mats,
                                                          const std::vector<BVector>& vectors,
                                                          long long window) const
    {
        int d = pres_->d();
        if (window < 0) throw config_error("DistAlgebra: window must be >= 0");
        if (static_cast<int>(mats.size()) != d)
            throw config_error("DistAlgebra: need one generator matrix per generator");
        std::size_t r = mats.empty() ? 0 : mats[0].size();
        if (r == 0) throw config_error("DistAlgebra: module rank must be >= 1");
        for (const BMatrix& M : mats) {
            if (M.size() != r) throw config_error("DistAlgebra: generator matrices must agree in size");
            for (const BVector& row : M) {
                if (row.size() != r)
                    throw config_error("DistAlgebra: generator matrices must be square");
                for (const BElem& b : row) check_desc(b);
            }
            if (det(M).is_zero())
                throw config_error(
                    "DistAlgebra: generator matrix not invertible at truncation (not a group "
                    "action)");
        }
        for (const BVector& v : vectors) {
            if (v.size() != r)
                throw config_error("DistAlgebra: vector length must match the module rank");
            for (const BElem& b : v) check_desc(b);
        }

        std::vector<MultiIndex> idx = indices_up_to(d, D_);
        std::vector<VectorAnalyticityReport> reps;
        for (std::size_t vi = 0; vi < vectors.size(); ++vi) {
            std::map<MultiIndex, BVector> mem;
            mem.emplace(zero_idx(), vectors[vi]);
            for (long long w = 1; w <= D_; ++w)
                for (const MultiIndex& n : idx) {
                    if (n.weight() != w) continue;
                    int i = n.bot();
                    mem.emplace(n, rho_c(mats, i, mem.at(n.plus(i, -1))));
                }

            /* Exact zeros carry no finite valuation evidence (val_floor is
             * just the working precision), so they leave the margin at their
             * weight undefined instead of faking a ceiling. */
            std::map<long long, long long> by_weight;
            for (const MultiIndex& n : idx) {
                const BVector& cv = mem.at(n);
                bool allz = true;
                for (const BElem& b : cv) allz = allz && b.is_zero();
                if (allz) continue;
                long long mg = vec_val(cv) - v_lower(p_, static_cast<int>(h_), n);
                auto [it, fresh] = by_weight.try_emplace(n.weight(), mg);
                if (!fresh) it->second = std::min(it->second, mg);
            }

            VectorAnalyticityReport rep;
            rep.index = vi;
            rep.h = h_;
            rep.window = window;
            rep.window_lo = std::max<long long>(0, D_ - window);
            rep.window_hi = D_;
            rep.min_margin = 0;
            bool ok = true, seen = false;
            for (auto& [w, mg] : by_weight) {
                rep.min_margin = seen ? std::min(rep.min_margin, mg) : mg;
                seen = true;
                if (mg < 0) ok = false;
            }
            std::optional<long long> first, last;
            for (long long w = rep.window_lo; w <= rep.window_hi; ++w) {
                auto it = by_weight.find(w);
                std::optional<long long> mg =
                    it == by_weight.end() ? std::nullopt : std::optional<long long>(it->second);
                rep.margins_lower.emplace_back(w, mg);
                if (mg) {
                    if (!first) first = mg;
                    last = mg;
                }
            }
            if (first && last && *last < *first) ok = false;
            rep.is_h_lower = ok;
            reps.push_back(std::move(rep));
        }
        return reps;
    }

private:
    std::shared_ptr<const GroupPresentation> pres_;
    RingDescriptor desc_;
    long long p_, h_, N_, D_, smax_;
    IwasawaAlgebra eng_;

    long long eng_prec() const { return N_ + 2 * smax_; }

    static long long validated_gauge_digits(long long p, long long h, long long N, long long D)
    {
        if (h < 0) throw config_error("DistAlgebra: h must be >= 0");
        if (N < 1 || D < 1) throw config_error("DistAlgebra: need N >= 1 and D >= 1");
        long long smax = v_lower_w(p, static_cast<int>(h), D);
        if (N <= smax)
            throw config_error(
                "DistAlgebra: N must exceed v_h(D) so every supported weight keeps a digit");
        return smax;
    }

    MultiIndex zero_idx() const { return MultiIndex(static_cast<std::size_t>(pres_->d())); }

    DistElem make(std::map<MultiIndex, BElem> c, std::optional<long long> tail) const
    {
        DistElem e;
        e.pres_ = pres_;
        e.h_ = h_;
        e.c_ = std::move(c);
        e.tail_ = tail;
        return e;
    }

    void check_desc(const BElem& b) const
    {
        if (b.descriptor().kind != desc_.kind || b.descriptor().p != desc_.p)
            throw config_error("DistAlgebra: coefficient belongs to a different ring");
    }

    void check_index(const MultiIndex& n) const
    {
        if (static_cast<int>(n.dim()) != pres_->d())
            throw config_error("DistAlgebra: index dimension mismatch");
        for (long long v : n.e)
            if (v < 0) throw config_error("DistAlgebra: index entries must be >= 0");
    }

    void check_elem(const DistElem& x) const
    {
        if (x.pres_ != pres_ || x.h_ != h_)
            throw config_error("DistAlgebra: element belongs to a different algebra");
    }

    static void drop_zeros(std::map<MultiIndex, BElem>& m)
    {
        for (auto it = m.begin(); it != m.end();)
            it = it->second.is_zero() ? m.erase(it) : std::next(it);
    }

    std::optional<long long> gauge_floor_raw(const std::map<MultiIndex, BElem>& c) const
    {
        std::optional<long long> g;
        for (auto& [n, b] : c) {
            long long v = chk_add(b.val_floor(), vh(n));
            g = g ? std::min(*g, v) : v;
        }
        return g;
    }

    static std::optional<long long> min_tail(std::optional<long long> a,
                                             std::optional<long long> b)
    {
        if (a && b) return std::min(*a, *b);
        return a ? a : b;
    }

    BElem lift_eng(const BElem& b) const
    {
        long long w = eng_prec();
        return b.prec() >= w ? b.reduce_prec(w) : b.lift_prec(w);
    }

    BVector rho_c(const std::vector<BMatrix>& mats, int i, const BVector& v) const
    {
        const SemilinearAction& act = pres_->action();
        std::size_t r = v.size();
        BVector sv;
        sv.reserve(r);
        for (const BElem& b : v) sv.push_back(act.apply(i, b));
        const BMatrix& M = mats[static_cast<std::size_t>(i - 1)];
        BVector out;
        out.reserve(r);
        for (std::size_t row = 0; row < r; ++row) {
            BElem acc = M[row][0] * sv[0];
            for (std::size_t col = 1; col < r; ++col) acc = acc + M[row][col] * sv[col];
            out.push_back(acc - v[row]);
        }
        return out;
    }

    static long long vec_val(const BVector& v)
    {
        long long m = v[0].val_floor();
        for (const BElem& b : v) m = std::min(m, b.val_floor());
        return m;
    }

    static BElem det(const BMatrix& M)
    {
        std::size_t r = M.size();
        if (r == 1) return M[0][0];
        std::vector<std::size_t> cols(r);
        for (std::size_t i = 0; i < r; ++i) cols[i] = i;
        auto rec = [&](auto&& self, std::size_t row, std::vector<std::size_t> use) -> BElem {
            if (use.size() == 1) return M[row][use[0]];
            BElem acc = BElem::zero(M[0][0].descriptor(), M[0][0].prec());
            bool started = false;
            for (std::size_t j = 0; j < use.size(); ++j) {
                std::vector<std::size_t> rest;
                for (std::size_t l = 0; l < use.size(); ++l)
                    if (l != j) rest.push_back(use[l]);
                BElem term = M[row][use[j]] * self(self, row + 1, rest);
                if (j % 2) term = term.neg();
                if (!started) {
                    acc = term;
                    started = true;
                } else {
                    acc = acc + term;
                }
            }
            return acc;
        };
        return rec(rec, 0, cols);
    }

    /* The p^t-power subgroup of a catalog presentation has diagonal rule
     * exponents alpha^{p^t} and action sigma_i^{p^t}; verify the primed
     * presentation matches. */
    void check_subgroup_presentation(const DistAlgebra& sub, int t, long long pt) const
    {
        int d = pres_->d();
        for (int j = 2; j <= d; ++j)
            for (int i = 1; i < j; ++i) {
                bool a = pres_->has_rule(j, i), b = sub.pres_->has_rule(j, i);
                if (a != b)
                    throw config_error(
                        "DistAlgebra: subgroup presentation does not match the p^t-power basis");
                if (!a) continue;
                long long cmp = 4 + 2 * static_cast<long long>(t);
                std::vector<PadicInt> ev = pres_->conj_exponents(j, i, cmp);
                std::vector<PadicInt> pv = sub.pres_->conj_exponents(j, i, cmp);
                for (int l = 0; l < j - 1; ++l) {
                    if (l + 1 != i) {
                        if (!ev[static_cast<std::size_t>(l)].is_zero() ||
                            !pv[static_cast<std::size_t>(l)].is_zero())
                            throw config_error(
                                "DistAlgebra: subgroup inclusion supports abelian and diagonal "
                                "conjugation rules only");
                        continue;
                    }
                    PadicInt alpha = ev[static_cast<std::size_t>(l)];
                    PadicInt want = PadicInt::from_int(p_, 1, cmp);
                    for (long long q = 0; q < pt; ++q) want = want * alpha;
                    if (!agree(want, pv[static_cast<std::size_t>(l)]))
                        throw config_error(
                            "DistAlgebra: subgroup presentation does not match the p^t-power "
                            "basis");
                }
            }

        const SemilinearAction& a0 = pres_->action();
        const SemilinearAction& a1 = sub.pres_->action();
        if (a0.is_trivial() && a1.is_trivial()) return;
        BElem probe = BElem::uniformizer(desc_, N_);
        PadicInt e = PadicInt::from_int(p_, pt, chk_add(N_, 6));
        for (int i = 1; i <= d; ++i)
            if (!agree(a1.apply(i, probe), a0.apply_power(i, e, probe)))
                throw config_error(
                    "DistAlgebra: subgroup action is not the p^t-power of the ambient action");
    }
};

}  // namespace mixchar
