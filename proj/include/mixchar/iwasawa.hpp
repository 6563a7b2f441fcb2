#pragma once

#include "group.hpp"

#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <tuple>
#include <utility>
#include <variant>
#include <vector>

namespace mixchar {

/* Truncation parameters of an Iwasawa-algebra computation.
 *   N : pi-adic precision of reported coefficients,
 *   D : support cap of the reported expansion (|n| <= D),
 *   M : p-adic digits carried by group exponents (default N + D).
 * Internally elements are classes modulo the two-sided ideal
 *   pi^N * Lambda  +  Fil^(N+D)          (Fil = the (pi, c_1..c_d)-adic
 * filtration, Fil^f spanned by b*c^n with val(b)+|n| >= f).  A coefficient at
 * c^n is therefore carried at the precision profile min(N, N+D-|n|); indices
 * of weight > D survive at reduced precision exactly so that truncated
 * multiplication is the (associative) quotient-ring product. */
struct PrecisionCtx {
    long long N;
    long long D;
    long long M;
    PrecisionCtx(long long n, long long d) : N(n), D(d), M(chk_add(n, d)) {}
    PrecisionCtx(long long n, long long d, long long m) : N(n), D(d), M(m) {}
};

/* One factor of a formal word: a generator power g_i^e (p-adic exponent) or a
 * coefficient-ring scalar. */
struct GenPower {
    int i;
    PadicInt exponent;
};
using WordToken = std::variant<GenPower, BElem>;
using Word = std::vector<WordToken>;

class IwasawaAlgebra;

/* Element sum_n b_n c^n with c^n = prod (g_i - 1)^{n_i} in strictly increasing
 * generator order and all scalars written on the left (b * c^n).  Instances
 * are created and combined only through an IwasawaAlgebra, which maintains the
 * precision profile described on PrecisionCtx. */
class IwasawaElem {
public:
    IwasawaElem() = default;

    const std::map<MultiIndex, BElem>& coeffs() const { return c_; }
    bool is_zero() const { return c_.empty(); }

    std::string str() const
    {
        if (c_.empty()) return "0";
        std::string out;
        for (auto& [n, b] : c_) {
            if (!out.empty()) out += " + ";
            out += "(" + b.str() + ") * c^" + n.str();
        }
        return out;
    }

private:
    friend class IwasawaAlgebra;
    std::shared_ptr<const GroupPresentation> pres_;
    std::map<MultiIndex, BElem> c_;
};

/* Truncated (possibly twisted) Iwasawa algebra of a uniform polycyclic
 * presentation over one coefficient ring.  Normal-form rewriting bubble-sorts
 * generator factors using the conjugation rules; scalars commute through
 * (g-1) * b = g(b) * (g-1) + (g(b) - b).  All monomial rewriting data is
 * scalar-free (Z_p-valued) and memoized per algebra instance. */
class IwasawaAlgebra {
public:
    IwasawaAlgebra(GroupPresentation pres, PrecisionCtx ctx)
        : pres_(std::make_shared<const GroupPresentation>(std::move(pres))),
          ctx_(ctx),
          desc_(pres_->descriptor())
    {
        if (ctx_.N < 1) throw config_error("IwasawaAlgebra: N must be >= 1");
        if (ctx_.D < 1) throw config_error("IwasawaAlgebra: D must be >= 1");
        phi_ = chk_add(ctx_.N, ctx_.D);
        /* binom(e, k) of an exponent known mod p^M carries M - val_p(k!)
         * digits; coefficient k*1_i needs profile(k) of them. */
        long long req = 2;
        for (long long k = 0; k < phi_; ++k)
            req = std::max(req, profile(k) + val_p_factorial(pres_->p(), k));
        if (ctx_.M < req)
            throw config_error("IwasawaAlgebra: exponent digits M=" + std::to_string(ctx_.M) +
                               " insufficient; need M >= " + std::to_string(req));
        for (int j = 2; j <= pres_->d(); ++j)
            for (int i = 1; i < j; ++i)
                if (pres_->has_rule(j, i)) pres_->conj_exponents(j, i, ctx_.M);  // throws on shortfall
    }

    const GroupPresentation& presentation() const { return *pres_; }
    const PrecisionCtx& ctx() const { return ctx_; }
    long long filtration_cap() const { return phi_; }

    /* Precision profile of the coefficient at weight w (<= 0 means the
     * coefficient is entirely below the truncation ideal). */
    long long profile(long long w) const { return std::min(ctx_.N, phi_ - w); }

    IwasawaElem zero() const { return make({}); }

    IwasawaElem one() const { return scalar(BElem::one(desc_, ctx_.N)); }

    IwasawaElem scalar(const BElem& b) const
    {
        check_desc(b);
        if (b.prec() < ctx_.N)
            throw config_error("IwasawaAlgebra: scalar carries fewer than N digits");
        std::map<MultiIndex, BElem> m;
        BElem r = b.reduce_prec(ctx_.N);
        if (!r.is_zero()) m.emplace(zero_idx(), std::move(r));
        return make(std::move(m));
    }

    /* b * c^n.  Weights beyond the filtration cap give zero. */
    IwasawaElem monomial(const BElem& b, const MultiIndex& n) const
    {
        check_desc(b);
        check_index(n);
        long long target = profile(n.weight());
        if (target <= 0) return zero();
        if (b.prec() < target)
            throw config_error("IwasawaAlgebra: coefficient below the precision profile");
        std::map<MultiIndex, BElem> m;
        BElem r = b.reduce_prec(target);
        if (!r.is_zero()) m.emplace(n, std::move(r));
        return make(std::move(m));
    }

    IwasawaElem gen_minus_one(int i) const
    {
        check_gen(i);
        return monomial(BElem::one(desc_, ctx_.N), zero_idx().plus(i));
    }

    /* g_i^e = sum_k binom(e, k) c_i^k for a p-adic integer exponent. */
    IwasawaElem gpow(int i, const PadicInt& e) const
    {
        check_gen(i);
        if (e.p() != pres_->p()) throw config_error("IwasawaAlgebra: exponent prime mismatch");
        if (e.val_floor() < 0)
            throw config_error("IwasawaAlgebra: exponent must be a p-adic integer");
        if (e.prec() < ctx_.M)
            throw config_error("IwasawaAlgebra: insufficient exponent precision (need M digits)");
        std::map<MultiIndex, BElem> out;
        BElem unit = BElem::one(desc_, phi_);
        for (long long k = 0; k < phi_; ++k)
            accumulate_scaled(out, zero_idx().plus(i, k), PadicInt::binom(e, k), unit, phi_, 0);
        finalize(out);
        return make(std::move(out));
    }

    IwasawaElem add(const IwasawaElem& x, const IwasawaElem& y) const
    {
        check_elem(x);
        check_elem(y);
        std::map<MultiIndex, BElem> out = x.c_;
        for (auto& [n, b] : y.c_) bel_add(out, n, b);
        finalize(out);
        return make(std::move(out));
    }

    IwasawaElem neg(const IwasawaElem& x) const
    {
        check_elem(x);
        std::map<MultiIndex, BElem> out;
        for (auto& [n, b] : x.c_) out.emplace(n, b.neg());
        return make(std::move(out));
    }

    IwasawaElem sub(const IwasawaElem& x, const IwasawaElem& y) const
    {
        return add(x, neg(y));
    }

    /* Product in normal form.  Exact as a map on classes modulo the
     * truncation ideal, hence associative on the nose. */
    IwasawaElem mul(const IwasawaElem& x, const IwasawaElem& y) const
    {
        check_elem(x);
        check_elem(y);
        std::map<MultiIndex, BElem> out;
        for (auto& [n, b] : x.c_) {
            long long fb = chk_add(b.val_floor(), n.weight());
            for (auto& [m, b2] : y.c_) {
                if (fb + b2.val_floor() + m.weight() >= phi_) continue;
                auto cs = commute_core(n, b2);
                for (auto& [k, ak] : cs) {
                    if (ak.is_zero()) continue;
                    if (b.val_floor() + ak.val_floor() + k.weight() + m.weight() >= phi_)
                        continue;
                    long long amb = std::min(chk_add(b.prec(), ak.val_floor()),
                                             chk_add(ak.prec(), b.val_floor()));
                    long long vx = chk_add(b.val_floor(), ak.val_floor());
                    BElem xc = lift_to_cap(b) * lift_to_cap(ak);
                    for (auto& [t, w] : mono_mul(k, m))
                        accumulate_scaled(out, t, w, xc, amb, vx);
                }
            }
        }
        finalize(out);
        return make(std::move(out));
    }

    /* Coefficients a_k of c^n * a = sum_{k <= n} a_k c^k, each with
     * val(a_k) >= val(a). */
    std::map<MultiIndex, BElem> commute_scalar(const MultiIndex& n, const BElem& a) const
    {
        check_desc(a);
        check_index(n);
        if (n.weight() > ctx_.D)
            throw config_error("IwasawaAlgebra: commute_scalar needs |n| <= D");
        return commute_core(n, a);
    }

    /* Expansion of a formal word, reported at the truncation (|n| <= D,
     * coefficients mod pi^N); independent of the rewriting order. */
    IwasawaElem normal_form(const Word& word) const
    {
        IwasawaElem acc = one();
        for (const WordToken& tok : word) {
            const IwasawaElem f = std::holds_alternative<GenPower>(tok)
                                      ? gpow(std::get<GenPower>(tok).i,
                                             std::get<GenPower>(tok).exponent)
                                      : scalar(std::get<BElem>(tok));
            acc = mul(acc, f);
        }
        return reported(acc);
    }

    /* Restriction to the reported support |n| <= D. */
    IwasawaElem reported(const IwasawaElem& x) const
    {
        check_elem(x);
        std::map<MultiIndex, BElem> out;
        for (auto& [n, b] : x.c_)
            if (n.weight() <= ctx_.D) out.emplace(n, b);
        return make(std::move(out));
    }

    /* Stored coefficient at n, or zero at the profile precision. */
    BElem coeff(const IwasawaElem& x, const MultiIndex& n) const
    {
        check_elem(x);
        check_index(n);
        auto it = x.c_.find(n);
        if (it != x.c_.end()) return it->second;
        return BElem::zero(desc_, std::max<long long>(profile(n.weight()), 0));
    }

    /* Coefficientwise agreement at the stored precisions. */
    bool agree_elems(const IwasawaElem& x, const IwasawaElem& y) const
    {
        check_elem(x);
        check_elem(y);
        auto covers = [&](const IwasawaElem& a, const IwasawaElem& b) {
            for (auto& [n, v] : a.c_)
                if (!agree(v, coeff(b, n))) return false;
            return true;
        };
        return covers(x, y) && covers(y, x);
    }

    /* Best certified lower bound for the filtration degree min(val(b_n)+|n|);
     * nullopt for the zero element. */
    std::optional<long long> filtration_floor(const IwasawaElem& x) const
    {
        check_elem(x);
        std::optional<long long> f;
        for (auto& [n, b] : x.c_) {
            long long v = chk_add(b.val_floor(), n.weight());
            if (!f || v < *f) f = v;
        }
        return f;
    }

private:
    std::shared_ptr<const GroupPresentation> pres_;
    PrecisionCtx ctx_;
    RingDescriptor desc_;
    long long phi_ = 0;

    /* Z_p-valued expansion sum_t W_t c^t of a rewriting product. */
    using ScalarExpansion = std::map<MultiIndex, PadicInt>;
    mutable std::map<std::pair<MultiIndex, MultiIndex>, ScalarExpansion> mono_memo_;
    mutable std::map<std::tuple<int, long long, int>, ScalarExpansion> swap_memo_;
    mutable std::map<std::pair<int, int>, ScalarExpansion> rel_memo_;
    mutable std::shared_mutex memo_mx_;

    MultiIndex zero_idx() const { return MultiIndex(static_cast<std::size_t>(pres_->d())); }

    PadicInt sone() const { return PadicInt::from_int(pres_->p(), 1, ctx_.M + 4); }

    void check_desc(const BElem& b) const
    {
        if (!(b.descriptor() == desc_))
            throw config_error("IwasawaAlgebra: coefficient ring mismatch");
    }
    void check_gen(int i) const
    {
        if (i < 1 || i > pres_->d())
            throw config_error("IwasawaAlgebra: generator index out of range");
    }
    void check_index(const MultiIndex& n) const
    {
        if (static_cast<int>(n.dim()) != pres_->d())
            throw config_error("IwasawaAlgebra: multi-index dimension mismatch");
        for (int i = 1; i <= pres_->d(); ++i)
            if (n[i] < 0) throw config_error("IwasawaAlgebra: negative multi-index entry");
    }
    void check_elem(const IwasawaElem& x) const
    {
        if (x.pres_ != pres_)
            throw config_error("IwasawaAlgebra: element belongs to a different presentation");
    }

    IwasawaElem make(std::map<MultiIndex, BElem>&& m) const
    {
        IwasawaElem e;
        e.pres_ = pres_;
        e.c_ = std::move(m);
        return e;
    }

    static void bel_add(std::map<MultiIndex, BElem>& out, const MultiIndex& t, const BElem& b)
    {
        auto it = out.find(t);
        if (it == out.end())
            out.emplace(t, b);
        else
            it->second = it->second + b;
    }

    static void sxp_add(ScalarExpansion& out, const MultiIndex& t, const PadicInt& w)
    {
        auto it = out.find(t);
        if (it == out.end())
            out.emplace(t, w);
        else
            it->second = it->second + w;
    }

    void sprune(ScalarExpansion& s) const
    {
        for (auto it = s.begin(); it != s.end();) {
            if (it->first.weight() >= phi_ ||
                chk_add(it->second.val_floor(), it->first.weight()) >= phi_ ||
                it->second.is_zero())
                it = s.erase(it);
            else
                ++it;
        }
    }

    /* Accumulate the contribution W * x at index t, reduced to the profile.
     * The product is formed from representatives lifted to the filtration cap,
     * so x is typically passed at the cap with amb_x the sound ambiguity floor
     * of its class (for a product b*a it is min(prec(b)+val(a), prec(a)+val(b)),
     * which keeps the valuation gained by commutation drop terms) and vx_ev the
     * valuation evidence.  Changing x within its class moves the contribution
     * by valuation >= amb_x + val(W) and changing W's representative by
     * p^prec(W) * x, so after the guards below the reduction to the profile is
     * representative-independent. */
    void accumulate_scaled(std::map<MultiIndex, BElem>& out, const MultiIndex& t,
                           const PadicInt& w, const BElem& x, long long amb_x,
                           long long vx) const
    {
        long long target = profile(t.weight());
        if (target <= 0) return;
        long long vw = w.val_floor();
        if (chk_add(vw, vx) >= target) return;  // provably zero at the profile
        long long w_need = desc_.kind == RingKind::LaurentFp ? 1 : target - vx;
        if (w.prec() < w_need)
            throw invariant_violation(
                "IwasawaAlgebra: scalar carries too few p-adic digits (raise M)");
        if (chk_add(amb_x, vw) < target)
            throw invariant_violation(
                "IwasawaAlgebra: coefficient precision fell below the truncation profile");
        long long work = phi_;
        BElem xe = x.prec() >= work ? x.reduce_prec(work) : x.lift_prec(work);
        PadicInt wr = w.prec() >= work ? w.reduce_prec(work) : w.lift_prec(work);
        BElem contrib = BElem::from_padic(desc_, wr, work) * xe;
        if (contrib.prec() < target)
            throw invariant_violation("IwasawaAlgebra: contribution lost working precision");
        bel_add(out, t, contrib.reduce_prec(target));
    }

    BElem lift_to_cap(const BElem& x) const
    {
        return x.prec() >= phi_ ? x.reduce_prec(phi_) : x.lift_prec(phi_);
    }

    void finalize(std::map<MultiIndex, BElem>& m) const
    {
        for (auto it = m.begin(); it != m.end();) {
            long long target = profile(it->first.weight());
            if (target <= 0) {
                it = m.erase(it);
                continue;
            }
            if (it->second.prec() < target)
                throw invariant_violation(
                    "IwasawaAlgebra: coefficient lost precision during accumulation");
            it->second = it->second.reduce_prec(target);
            if (it->second.is_zero())
                it = m.erase(it);
            else
                ++it;
        }
    }

    /* c^n * a as sum_{k <= n} a_k c^k, processing the factors of c^n from the
     * right (descending generator index) with
     * (g_i - 1) * b = sigma_i(b) (g_i - 1) + (sigma_i(b) - b). */
    std::map<MultiIndex, BElem> commute_core(const MultiIndex& n, const BElem& a) const
    {
        std::map<MultiIndex, BElem> cur;
        if (pres_->action().is_trivial() || n.is_zero()) {
            cur.emplace(n, a);
            return cur;
        }
        cur.emplace(zero_idx(), a);
        for (int i = pres_->d(); i >= 1; --i) {
            for (long long r = 0; r < n[i]; ++r) {
                std::map<MultiIndex, BElem> nxt;
                for (auto& [k, b] : cur) {
                    BElem s = pres_->action().apply(i, b);
                    bel_add(nxt, k.plus(i), s);
                    BElem dlt = s - b;
                    if (!dlt.is_zero()) bel_add(nxt, k, dlt);
                }
                cur = std::move(nxt);
            }
        }
        return cur;
    }

    /* Expansion w - 1 = sum_{t != 0} W_t c^t of the conjugation word
     * w = g_1^{e_1} ... g_{j-1}^{e_{j-1}} for the rule (l, j); already in
     * normal order, with W_t = prod_k binom(e_k, t_k). */
    ScalarExpansion relation_expansion(int l, int j) const
    {
        auto key = std::make_pair(l, j);
        {
            std::shared_lock lk(memo_mx_);
            auto it = rel_memo_.find(key);
            if (it != rel_memo_.end()) return it->second;
        }
        std::vector<PadicInt> exps = pres_->conj_exponents(l, j, ctx_.M);
        ScalarExpansion out;
        for (const MultiIndex& low : indices_up_to(l - 1, phi_ - 1)) {
            if (low.is_zero()) continue;
            PadicInt w = sone();
            for (int k = 1; k < l; ++k)
                if (low[k] > 0)
                    w = w * PadicInt::binom(exps[static_cast<std::size_t>(k - 1)], low[k]);
            MultiIndex t = zero_idx();
            for (int k = 1; k < l; ++k) t = t.plus(k, low[k]);
            sxp_add(out, t, w);
        }
        sprune(out);
        std::unique_lock lk(memo_mx_);
        rel_memo_.try_emplace(key, out);
        return out;
    }

    /* c_l^a * c_j in normal form (l > j, a >= 1), from
     * c_l c_j = (w - 1)(1 + c_l) - c_j and collection. */
    ScalarExpansion pow_swap(int l, long long a, int j) const
    {
        auto key = std::make_tuple(l, a, j);
        {
            std::shared_lock lk(memo_mx_);
            auto it = swap_memo_.find(key);
            if (it != swap_memo_.end()) return it->second;
        }
        ScalarExpansion result;
        if (!pres_->has_rule(l, j)) {
            MultiIndex t = zero_idx().plus(j).plus(l, a);
            if (t.weight() < phi_) result.emplace(t, sone());
        } else {
            ScalarExpansion base;
            for (auto& [t, w] : relation_expansion(l, j)) {
                sxp_add(base, t, w);
                sxp_add(base, t.plus(l), w);
            }
            sxp_add(base, zero_idx().plus(j), sone().neg());
            sprune(base);
            if (a == 1) {
                result = std::move(base);
            } else {
                MultiIndex rest = zero_idx().plus(l, a - 1);
                for (auto& [s, w] : base) {
                    if (chk_add(w.val_floor(), (a - 1) + s.weight()) >= phi_) continue;
                    for (auto& [u, v] : mono_mul(rest, s)) sxp_add(result, u, w * v);
                }
                sprune(result);
            }
        }
        std::unique_lock lk(memo_mx_);
        swap_memo_.try_emplace(key, result);
        return result;
    }

    /* c^n * c^m in normal form.  Terminates: peeling bot(m) only triggers
     * pow_swap at top(n), whose collection recurses strictly downward in
     * (generator index, power). */
    ScalarExpansion mono_mul(const MultiIndex& n, const MultiIndex& m) const
    {
        if (chk_add(n.weight(), m.weight()) >= phi_) return {};
        if (n.is_zero() || m.is_zero() || n.top() <= m.bot()) {
            ScalarExpansion r;
            r.emplace(n + m, sone());
            return r;
        }
        auto key = std::make_pair(n, m);
        {
            std::shared_lock lk(memo_mx_);
            auto it = mono_memo_.find(key);
            if (it != mono_memo_.end()) return it->second;
        }
        int j = m.bot();
        MultiIndex m2 = m.plus(j, -1);
        ScalarExpansion first;  // c^n * c_j
        if (n.top() <= j) {
            MultiIndex t = n.plus(j);
            if (t.weight() < phi_) first.emplace(t, sone());
        } else {
            int l = n.top();
            MultiIndex n2 = n.plus(l, -n[l]);
            for (auto& [s, w] : pow_swap(l, n[l], j)) {
                if (chk_add(w.val_floor(), chk_add(n2.weight(), s.weight())) >= phi_) continue;
                for (auto& [u, v] : mono_mul(n2, s)) sxp_add(first, u, w * v);
            }
            sprune(first);
        }
        ScalarExpansion out;
        if (m2.is_zero()) {
            out = std::move(first);
        } else {
            for (auto& [k, w] : first) {
                if (chk_add(w.val_floor(), chk_add(k.weight(), m2.weight())) >= phi_) continue;
                for (auto& [t, v] : mono_mul(k, m2)) sxp_add(out, t, w * v);
            }
            sprune(out);
        }
        std::unique_lock lk(memo_mx_);
        mono_memo_.try_emplace(key, out);
        return out;
    }
};

}  // namespace mixchar
