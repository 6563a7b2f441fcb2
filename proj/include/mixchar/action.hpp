#pragma once

#include "ring.hpp"

namespace mixchar {

enum class ActionKind { Trivial, Cyclotomic, Custom };

/* Raw, possibly-unvalidated description of how each group generator acts on
 * the coefficient ring.  Catalog:
 *   Trivial     : every generator fixes B.
 *   Cyclotomic  : generator i maps the uniformizer t to (1+t)^gamma_i - 1
 *                 with gamma_i in 1 + pZ_p (LaurentFp or OLambdaSlope1).
 *   Custom      : generator i maps the uniformizer to a supplied element
 *                 (expected: val = 1 with unit leading coefficient).
 * gammas/images of length 1 broadcast to all generators. */
struct ActionSpec {
    ActionKind kind = ActionKind::Trivial;
    std::vector<PadicInt> gammas;
    std::vector<BElem> images;
};

struct ActionViolation {
    int generator;
    std::string monomial;
    long long level;  // smallest n with (g-1)(pi^n B+) not in pi^(n+1) B+
};

struct ActionCheckReport {
    bool ok = true;
    long long first_violation_level = -1;
    std::vector<ActionViolation> violations;
};

class SemilinearAction {
public:
    SemilinearAction() = default;

    /* validate=false admits specs that fail the catalog constraints so that
     * check_local_analyticity can report on them. */
    SemilinearAction(RingDescriptor desc, int d, ActionSpec spec, bool validate = true)
        : desc_(std::move(desc)), d_(d), spec_(std::move(spec))
    {
        if (d_ < 1) throw config_error("SemilinearAction: dimension must be >= 1");
        if (spec_.kind == ActionKind::Cyclotomic) {
            if (spec_.gammas.empty())
                throw config_error("SemilinearAction: cyclotomic action needs gamma");
            broadcast(spec_.gammas);
            if (desc_.kind == RingKind::Qp)
                throw config_error("SemilinearAction: Qp admits only the trivial action");
            if (validate)
                for (auto& g : spec_.gammas) {
                    if (g.p() != desc_.p) throw config_error("SemilinearAction: gamma prime mismatch");
                    if (g.is_zero() || *g.val() != 0)
                        throw config_error("SemilinearAction: gamma must be a unit");
                    PadicInt gm1 = g - PadicInt::from_int(g.p(), 1, g.prec());
                    if (!gm1.is_zero() && *gm1.val() < 1)
                        throw config_error("SemilinearAction: gamma must lie in 1 + pZ_p");
                }
        } else if (spec_.kind == ActionKind::Custom) {
            if (spec_.images.empty())
                throw config_error("SemilinearAction: custom action needs uniformizer images");
            broadcast(spec_.images);
            if (desc_.kind == RingKind::Qp)
                throw config_error("SemilinearAction: Qp admits only the trivial action");
            for (auto& w : spec_.images)
                if (!(w.descriptor() == desc_))
                    throw config_error("SemilinearAction: image descriptor mismatch");
            if (validate)
                for (auto& w : spec_.images) {
                    if (w.is_zero() || *w.val() != 1)
                        throw config_error(
                            "SemilinearAction: uniformizer image must have valuation exactly 1");
                    w.shift(-1).invert();  // unit leading coefficient (throws otherwise)
                }
        }
    }

    static SemilinearAction trivial(RingDescriptor desc, int d)
    {
        return SemilinearAction(std::move(desc), d, ActionSpec{});
    }

    const RingDescriptor& descriptor() const { return desc_; }
    int dim() const { return d_; }
    bool is_trivial() const { return spec_.kind == ActionKind::Trivial; }
    const ActionSpec& spec() const { return spec_; }

    /* sigma_i(x).  Isometric, so the result carries x's precision. */
    BElem apply(int i, const BElem& x) const
    {
        if (is_trivial()) return x;
        check_gen(i);
        if (x.is_zero()) return x;
        /* Working headroom must cover the inversion depth of the deepest pole
         * in the stored expansion (e.g. (p/X)^j has valuation 0 but exponent
         * -j), not just -val(x). */
        long long pole = pole_depth(x);
        for (int attempt = 0; attempt < 3; ++attempt) {
            long long work = x.prec() + 4 + 8 * attempt + 2 * pole;
            if (spec_.kind == ActionKind::Custom)
                work = std::min(work, spec_.images[i - 1].prec());
            BElem r = substitute(i, x, work);
            if (r.prec() >= x.prec()) return r.reduce_prec(x.prec());
        }
        throw invariant_violation("SemilinearAction: substitution failed to reach target precision");
    }

    /* sigma_i^e(x) for a p-adic exponent e, via the operator binomial series
     * sum_k binom(e,k) (sigma_i - 1)^k (x). */
    BElem apply_power(int i, const PadicInt& e, const BElem& x) const
    {
        if (is_trivial()) return x;
        check_gen(i);
        if (e.p() != desc_.p) throw config_error("apply_power: exponent prime mismatch");
        BElem acc = x;
        BElem y = x;
        long long cap = x.prec() + 8 + std::max<long long>(0, -x.val_floor());
        for (long long k = 1; k <= cap; ++k) {
            BElem next = apply(i, y) - y;
            y = next;
            if (y.is_zero()) return acc;
            PadicInt bk = PadicInt::binom(e, k);
            /* binom(e,k) only matters modulo p^(x.prec - val(y)); check that
             * e carries that many digits, then compute with a representative
             * at full precision.  The representative's ambiguity enters at
             * valuation bk.prec + val(y) >= x.prec, so acc's claimed
             * precision stays honest. */
            if (desc_.kind != RingKind::LaurentFp &&
                chk_add(bk.prec(), y.val_floor()) < x.prec())
                throw invariant_violation(
                    "SemilinearAction: exponent precision insufficient for requested precision");
            PadicInt bkr = bk.prec() >= y.prec() ? bk.reduce_prec(y.prec()) : bk.lift_prec(y.prec());
            acc = acc + BElem::from_padic(desc_, bkr, y.prec()) * y;
            if (y.val_floor() >= x.prec()) return acc;
        }
        throw invariant_violation(
            "SemilinearAction: binomial operator series did not converge (action not locally "
            "analytic at this precision)");
    }

    /* Verifies (g_i - 1)(pi^n B+) in pi^(n+1) B+ for 0 <= n < N on the
     * spanning monomials of B+ at truncation (for OLambdaSlope1 this includes
     * the residue-ring monomials (p/X)^j, j <= N). */
    ActionCheckReport check_local_analyticity(long long N) const
    {
        ActionCheckReport rep;
        if (is_trivial()) return rep;
        long long work = N + 4;
        std::vector<std::pair<std::string, BElem>> monos;
        if (desc_.kind == RingKind::LaurentFp) {
            for (long long k = 0; k < N; ++k)
                monos.emplace_back("T^" + std::to_string(k),
                                   BElem(desc_, LaurentElem::monomial(desc_.p, k, 1, work)));
        } else if (desc_.kind == RingKind::OLambdaSlope1) {
            for (long long i = 0; i < N; ++i)
                monos.emplace_back("X^" + std::to_string(i),
                                   BElem(desc_, PseudoElem::from_padic(
                                                    i, PadicInt::from_int(desc_.p, 1, work - i),
                                                    work)));
            for (long long j = 1; j <= N; ++j)
                monos.emplace_back(
                    "(p/X)^" + std::to_string(j),
                    BElem(desc_, PseudoElem::from_padic(
                                     -j, PadicInt::from_val_unit(desc_.p, j, 1, work + j), work)));
        }
        for (int i = 1; i <= d_; ++i)
            for (auto& [name, m] : monos) {
                long long vm = m.val_floor();
                BElem diff = apply(i, m) - m;
                long long vd = diff.val_floor();
                if (!diff.is_zero() && vd <= vm) {
                    rep.ok = false;
                    rep.violations.push_back({i, name, vd});
                }
            }
        if (!rep.ok) {
            rep.first_violation_level = rep.violations.front().level;
            for (auto& v : rep.violations)
                rep.first_violation_level = std::min(rep.first_violation_level, v.level);
        }
        return rep;
    }

private:
    RingDescriptor desc_;
    int d_ = 1;
    ActionSpec spec_;

    template <class T>
    void broadcast(std::vector<T>& v) const
    {
        if (v.size() == 1 && d_ > 1) v.resize(d_, v[0]);
        if (static_cast<int>(v.size()) != d_)
            throw config_error("SemilinearAction: need one entry per generator");
    }

    void check_gen(int i) const
    {
        if (i < 1 || i > d_) throw std::invalid_argument("SemilinearAction: bad generator index");
    }

    /* Most negative stored exponent of x (0 if none): how deep substitution
     * must invert sigma(pi). */
    static long long pole_depth(const BElem& x)
    {
        if (x.is_zero()) return 0;
        switch (x.descriptor().kind) {
            case RingKind::LaurentFp:
                return std::max<long long>(0, -x.as_laurent().terms().begin()->first);
            case RingKind::OLambdaSlope1:
                return std::max<long long>(0, -x.as_pseudo().slots().begin()->first);
            default: return 0;
        }
    }

    /* Image of the uniformizer under sigma_i at working precision prec.
     * `needed` is the honesty horizon x.prec + pole + 1: series terms with
     * j >= needed contribute valuation >= x.prec even through a pole of the
     * given depth, so they may be dropped (a choice of representative that
     * the caller's final reduction to x.prec washes out), and coefficient j
     * must genuinely be known mod p^(needed - j) for the reduced result to
     * be independent of representatives. */
    BElem sigma_pi(int i, long long prec, long long needed) const
    {
        if (spec_.kind == ActionKind::Custom) {
            const BElem& w = spec_.images[i - 1];
            if (w.prec() < prec)
                throw invariant_violation(
                    "SemilinearAction: stored uniformizer image has insufficient precision");
            return w.reduce_prec(prec);
        }
        /* (1 + pi)^gamma - 1 = sum_{j>=1} binom(gamma, j) pi^j.  Each term is
         * built by embedding the coefficient at pi-adic precision prec - j
         * and then shifting by pi^j, which raises the precision back to prec;
         * multiplying by a pi^j element instead would cap the term (and hence
         * the sum) at prec - j. */
        const PadicInt& g = spec_.gammas[i - 1];
        BElem acc = BElem::zero(desc_, prec);
        for (long long j = 1; j <= std::min(prec, needed - 1); ++j) {
            PadicInt bj = PadicInt::binom(g, j);
            /* In characteristic p only the mod-p residue of the coefficient
             * matters; otherwise demand the genuinely-needed digit count. */
            long long honest = desc_.kind == RingKind::LaurentFp
                                   ? 1
                                   : std::max<long long>(needed - j, 1);
            if (bj.prec() < honest)
                throw invariant_violation(
                    "SemilinearAction: gamma precision insufficient for requested precision");
            long long target = std::max<long long>(prec - j, 1);
            PadicInt bjr = bj.prec() >= target ? bj.reduce_prec(target) : bj.lift_prec(target);
            BElem term = BElem::from_padic(desc_, bjr, target).shift(j);
            acc = acc + term.reduce_prec(std::min(term.prec(), prec));
        }
        return acc.reduce_prec(prec);
    }

    /* Substitution pi -> sigma(pi) on the stored expansion of x. */
    BElem substitute(int i, const BElem& x, long long work) const
    {
        BElem w = sigma_pi(i, work, x.prec() + pole_depth(x) + 1);
        if (desc_.kind == RingKind::LaurentFp) {
            const LaurentElem& e = x.as_laurent();
            BElem acc = BElem::zero(desc_, work);
            for (auto& [k, a] : e.terms())
                acc = acc + BElem(desc_, LaurentElem::monomial(desc_.p, 0, a, work)) * bpow(w, k);
            return acc;
        }
        if (desc_.kind == RingKind::OLambdaSlope1) {
            const PseudoElem& e = x.as_pseudo();
            BElem acc = BElem::zero(desc_, work);
            /* Slot k is known mod p^(x.prec - k); computing with a lifted
             * representative is exact on classes because the ambiguity,
             * multiplied by the valuation-k element sigma(X)^k, enters at
             * valuation >= x.prec and the caller reduces to x.prec. */
            for (auto& [k, a] : e.slots())
                acc = acc + BElem::from_padic(desc_, a.lift_prec(work), work) * bpow(w, k);
            return acc;
        }
        return x;  // Qp: only the trivial action exists
    }

    static BElem bpow(const BElem& w, long long k)
    {
        BElem base = k >= 0 ? w : w.invert();
        long long e = k >= 0 ? k : -k;
        BElem acc = BElem::one(base.descriptor(), base.prec() + 1);
        for (long long j = 0; j < e; ++j) acc = acc * base;
        return acc;
    }
};

}  // namespace mixchar
