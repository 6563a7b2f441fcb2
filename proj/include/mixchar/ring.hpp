#pragma once

#include "padic.hpp"

#include <map>
#include <variant>

namespace mixchar {

enum class RingKind { Qp, LaurentFp, OLambdaSlope1 };

/* Descriptor of one of the three supported Banach pairs (B, B+), each with a
 * Z-valued uniformizer valuation and residue ring of finite type:
 *   Qp             : pi = p,  B+ = Z_p,         residue F_p
 *   LaurentFp      : pi = T,  B+ = F_p[[T]],    residue F_p        (char p)
 *   OLambdaSlope1  : pi = X,  B+ = completion of Z_p[[X]][p/X],
 *                    residue F_p[y] with y the class of p/X (slope exactly 1)
 */
struct RingDescriptor {
    RingKind kind = RingKind::Qp;
    long long p = 2;
    std::string uniformizer = "p";

    static RingDescriptor qp(long long p)
    {
        return {RingKind::Qp, p, "p"};
    }
    static RingDescriptor laurent(long long p)
    {
        return {RingKind::LaurentFp, p, "T"};
    }
    static RingDescriptor pseudorigid(long long p)
    {
        return {RingKind::OLambdaSlope1, p, "X"};
    }

    bool operator==(const RingDescriptor& o) const
    {
        return kind == o.kind && p == o.p;
    }

    /* val_pi(p); nullopt encodes +infinity (characteristic p). */
    std::optional<long long> val_of_p() const
    {
        switch (kind) {
            case RingKind::Qp: return 1;
            case RingKind::LaurentFp: return std::nullopt;
            case RingKind::OLambdaSlope1: return 1;
        }
        return 1;
    }

    /* slope(B, B+) >= num/den, i.e. |p| <= |pi|^(num/den) at the integral
     * level: den * val_pi(p) >= num. */
    bool slope_at_least(long long num, long long den) const
    {
        if (den <= 0) throw std::invalid_argument("slope_at_least: den must be positive");
        auto v = val_of_p();
        if (!v) return true;
        return *v * den >= num;
    }

    std::string name() const
    {
        switch (kind) {
            case RingKind::Qp: return "Qp";
            case RingKind::LaurentFp: return "LaurentFp";
            case RingKind::OLambdaSlope1: return "OLambdaSlope1";
        }
        return "?";
    }
};

/* Truncated Laurent series over F_p: coefficients known for exponents < prec.
 * Exponents may be negative; coefficients are stored in [1, p). */
class LaurentElem {
public:
    LaurentElem() : p_(2), prec_(0) {}
    LaurentElem(long long p, long long prec) : p_(p), prec_(prec) {}

    static LaurentElem monomial(long long p, long long exponent, long long coeff, long long prec)
    {
        LaurentElem r(p, prec);
        r.add_term(exponent, coeff);
        return r;
    }

    long long p() const { return p_; }
    long long prec() const { return prec_; }
    const std::map<long long, long long>& terms() const { return c_; }
    bool is_zero() const { return c_.empty(); }

    std::optional<long long> val() const
    {
        if (c_.empty()) return std::nullopt;
        return c_.begin()->first;
    }
    long long val_floor() const { return c_.empty() ? prec_ : c_.begin()->first; }

    void add_term(long long e, long long coeff)
    {
        if (e >= prec_) return;
        long long v = ((coeff % p_) + p_) % p_;
        if (v == 0) return;
        auto [it, fresh] = c_.try_emplace(e, 0);
        it->second = (it->second + v) % p_;
        if (it->second == 0) c_.erase(it);
    }

    LaurentElem reduce_prec(long long new_prec) const
    {
        if (new_prec > prec_)
            throw std::invalid_argument("LaurentElem: cannot raise precision");
        LaurentElem r(p_, new_prec);
        for (auto& [e, v] : c_) r.add_term(e, v);
        return r;
    }

    LaurentElem lift_prec(long long new_prec) const
    {
        if (new_prec <= prec_) return reduce_prec(new_prec);
        LaurentElem r(p_, new_prec);
        for (auto& [e, v] : c_) r.add_term(e, v);
        return r;
    }

    LaurentElem neg() const
    {
        LaurentElem r(p_, prec_);
        for (auto& [e, v] : c_) r.add_term(e, p_ - v);
        return r;
    }

    LaurentElem shift(long long k) const
    {
        LaurentElem r(p_, prec_ + k);
        for (auto& [e, v] : c_) r.c_.emplace(e + k, v);
        return r;
    }

    friend LaurentElem operator+(const LaurentElem& x, const LaurentElem& y)
    {
        x.check_same(y);
        LaurentElem r(x.p_, std::min(x.prec_, y.prec_));
        for (auto& [e, v] : x.c_) r.add_term(e, v);
        for (auto& [e, v] : y.c_) r.add_term(e, v);
        return r;
    }

    friend LaurentElem operator-(const LaurentElem& x, const LaurentElem& y)
    {
        return x + y.neg();
    }

    friend LaurentElem operator*(const LaurentElem& x, const LaurentElem& y)
    {
        x.check_same(y);
        long long prec = std::min(std::min(x.prec_, y.prec_),
                                  std::min(chk_add(x.prec_, y.val_floor()),
                                           chk_add(y.prec_, x.val_floor())));
        LaurentElem r(x.p_, prec);
        for (auto& [e1, v1] : x.c_)
            for (auto& [e2, v2] : y.c_) r.add_term(e1 + e2, v1 * v2);
        return r;
    }

    LaurentElem invert() const
    {
        if (c_.empty()) throw invariant_violation("LaurentElem: inverting zero-at-precision");
        long long v = c_.begin()->first;
        long long a = c_.begin()->second;
        long long ai = static_cast<long long>(mod_inverse(Int(a), Int(p_)).convert_to<long long>());
        /* x = a T^v (1 + w), w of positive valuation; invert the unit part at
         * precision prec - v, then shift (precision prec - 2v overall). */
        LaurentElem w = shift(-v) * monomial(p_, 0, ai, prec_ - v);
        w.c_.erase(w.c_.begin());
        long long up = prec_ - v;
        LaurentElem acc = monomial(p_, 0, 1, up);
        LaurentElem pw = acc;
        for (long long j = 1; j <= std::max<long long>(up + 1, 1); ++j) {
            pw = pw * w.neg();
            if (pw.is_zero()) break;
            acc = acc + pw;
        }
        return (acc * monomial(p_, 0, ai, up)).shift(-v);
    }

    friend bool agree(const LaurentElem& x, const LaurentElem& y)
    {
        long long prec = std::min(x.prec_, y.prec_);
        return (x - y).reduce_prec(prec).is_zero();
    }

    std::string str() const
    {
        if (c_.empty()) return "0 mod T^" + std::to_string(prec_);
        std::string s;
        for (auto& [e, v] : c_) {
            if (!s.empty()) s += " + ";
            if (e == 0)
                s += std::to_string(v);
            else if (v == 1)
                s += "T^" + std::to_string(e);
            else
                s += std::to_string(v) + "*T^" + std::to_string(e);
        }
        return s + " mod T^" + std::to_string(prec_);
    }

private:
    long long p_;
    long long prec_;
    std::map<long long, long long> c_;

    void check_same(const LaurentElem& o) const
    {
        if (p_ != o.p_) throw std::invalid_argument("LaurentElem: prime mismatch");
    }
};

/* Truncated element of O_1 = (p,X)-adically completed Z_p[[X]][p/X][1/X],
 * slope exactly 1.  Stored as a finite sum  sum_i a_i X^i  with a_i in Z_p;
 * val_B = min_i (i + val_p(a_i)); slot a_i is known modulo p^(prec - i). */
class PseudoElem {
public:
    PseudoElem() : p_(2), prec_(0) {}
    PseudoElem(long long p, long long prec) : p_(p), prec_(prec) {}

    static PseudoElem from_padic(long long slot, const PadicInt& a, long long prec)
    {
        PseudoElem r(a.p(), prec);
        r.add_slot(slot, a);
        return r;
    }

    long long p() const { return p_; }
    long long prec() const { return prec_; }
    const std::map<long long, PadicInt>& slots() const { return s_; }
    bool is_zero() const { return s_.empty(); }

    std::optional<long long> val() const
    {
        std::optional<long long> best;
        for (auto& [i, a] : s_) {
            long long v = i + *a.val();
            if (!best || v < *best) best = v;
        }
        return best;
    }
    long long val_floor() const
    {
        auto v = val();
        return v ? *v : prec_;
    }

    void add_slot(long long i, const PadicInt& a)
    {
        if (a.p() != p_) throw std::invalid_argument("PseudoElem: prime mismatch");
        if (!a.is_zero() && *a.val() < 0)
            throw invariant_violation("PseudoElem: slot coefficient must lie in Z_p");
        long long slot_prec = prec_ - i;
        PadicInt red = a.prec() > slot_prec ? a.reduce_prec(slot_prec) : a;
        if (red.prec() < slot_prec)
            throw std::invalid_argument("PseudoElem: slot coefficient underprecise");
        if (red.is_zero() || *red.val() < 0) {
            if (!red.is_zero())
                throw invariant_violation("PseudoElem: slot coefficient must lie in Z_p");
            return;
        }
        auto it = s_.find(i);
        if (it == s_.end()) {
            s_.emplace(i, red);
        } else {
            PadicInt sum = it->second + red;
            if (sum.is_zero())
                s_.erase(it);
            else
                it->second = sum;
        }
    }

    PseudoElem reduce_prec(long long new_prec) const
    {
        if (new_prec > prec_)
            throw std::invalid_argument("PseudoElem: cannot raise precision");
        PseudoElem r(p_, new_prec);
        for (auto& [i, a] : s_) {
            if (i >= new_prec) continue;
            r.add_slot(i, a.reduce_prec(new_prec - i));
        }
        return r;
    }

    PseudoElem lift_prec(long long new_prec) const
    {
        if (new_prec <= prec_) return reduce_prec(new_prec);
        PseudoElem r(p_, new_prec);
        for (auto& [i, a] : s_) r.add_slot(i, a.lift_prec(new_prec - i));
        return r;
    }

    PseudoElem neg() const
    {
        PseudoElem r(p_, prec_);
        for (auto& [i, a] : s_) r.s_.emplace(i, a.neg());
        return r;
    }

    /* Multiply by X^k. */
    PseudoElem shift(long long k) const
    {
        PseudoElem r(p_, prec_ + k);
        for (auto& [i, a] : s_) r.s_.emplace(i + k, a);
        return r;
    }

    friend PseudoElem operator+(const PseudoElem& x, const PseudoElem& y)
    {
        x.check_same(y);
        long long prec = std::min(x.prec_, y.prec_);
        PseudoElem r(x.p_, prec);
        for (auto& [i, a] : x.s_)
            if (i < prec) r.add_slot(i, a.reduce_prec(prec - i));
        for (auto& [i, a] : y.s_)
            if (i < prec) r.add_slot(i, a.reduce_prec(prec - i));
        return r;
    }

    friend PseudoElem operator-(const PseudoElem& x, const PseudoElem& y)
    {
        return x + y.neg();
    }

    friend PseudoElem operator*(const PseudoElem& x, const PseudoElem& y)
    {
        x.check_same(y);
        long long prec = std::min(std::min(x.prec_, y.prec_),
                                  std::min(chk_add(x.prec_, y.val_floor()),
                                           chk_add(y.prec_, x.val_floor())));
        PseudoElem r(x.p_, prec);
        for (auto& [i, a] : x.s_)
            for (auto& [j, b] : y.s_) {
                long long k = i + j;
                if (k >= prec) continue;
                /* Slot precisions always suffice: prec <= prec_x + val_B(y)
                 * <= (prec_x - i) + j + val(b), and symmetrically. */
                PadicInt ab = a * b;
                r.add_slot(k, ab.reduce_prec(prec - k));
            }
        return r;
    }

    /* Inversion requires the residue class mod pi to be a unit of the residue
     * ring F_p[y], i.e. a scalar: after clearing val, the only valuation-zero
     * slot must sit at X^0. */
    PseudoElem invert() const
    {
        auto v0 = val();
        if (!v0) throw invariant_violation("PseudoElem: inverting zero-at-precision");
        PseudoElem z = shift(-*v0);
        for (auto& [i, a] : z.s_)
            if (i + *a.val() == 0 && i != 0)
                throw invariant_violation(
                    "PseudoElem: residue class is not a unit (degree > 0 in F_p[y])");
        auto it = z.s_.find(0);
        if (it == z.s_.end() || *it->second.val() != 0)
            throw invariant_violation("PseudoElem: residue class is not a unit");
        PadicInt a0 = it->second;
        PadicInt a0i = a0.invert();
        long long up = prec_ - *v0;
        PseudoElem w = z * from_padic(0, a0i, up);
        w.s_.erase(0);  /* w = z/a0 - 1, val >= 1 */
        PseudoElem acc = from_padic(0, PadicInt::from_int(p_, 1, up), up);
        PseudoElem pw = acc;
        for (long long j = 1; j <= std::max<long long>(up + 1, 1); ++j) {
            pw = pw * w.neg();
            if (pw.is_zero()) break;
            acc = acc + pw;
        }
        return (acc * from_padic(0, a0i, up)).shift(-*v0);
    }

    friend bool agree(const PseudoElem& x, const PseudoElem& y)
    {
        long long prec = std::min(x.prec_, y.prec_);
        return (x - y).reduce_prec(prec).is_zero();
    }

    /* Ring map O_1+ -> F_p((T)) sending X to T and p, p/X to 0: keeps the
     * slots whose coefficient is a p-adic unit. */
    LaurentElem reduce_mod_p() const
    {
        LaurentElem r(p_, prec_);
        for (auto& [i, a] : s_)
            if (*a.val() == 0)
                r.add_term(i, static_cast<long long>((a.unit() % p_).convert_to<long long>()));
        return r;
    }

    std::string str() const
    {
        if (s_.empty()) return "0 mod X^" + std::to_string(prec_);
        std::string out;
        for (auto& [i, a] : s_) {
            if (!out.empty()) out += " + ";
            out += "(" + a.str() + ")*X^" + std::to_string(i);
        }
        return out + " mod X^" + std::to_string(prec_);
    }

private:
    long long p_;
    long long prec_;
    std::map<long long, PadicInt> s_;

    void check_same(const PseudoElem& o) const
    {
        if (p_ != o.p_) throw std::invalid_argument("PseudoElem: prime mismatch");
    }
};

/* An element of one of the three rings, tagged by descriptor, with its own
 * pi-adic precision.  Arithmetic applies the pessimistic propagation cap
 * min(prec_x, prec_y) on top of the sound pole-aware rule. */
class BElem {
public:
    BElem() = default;

    static BElem zero(const RingDescriptor& d, long long prec)
    {
        switch (d.kind) {
            case RingKind::Qp: return BElem(d, PadicInt::zero(d.p, prec));
            case RingKind::LaurentFp: return BElem(d, LaurentElem(d.p, prec));
            case RingKind::OLambdaSlope1: return BElem(d, PseudoElem(d.p, prec));
        }
        throw std::logic_error("unreachable");
    }

    static BElem from_int(const RingDescriptor& d, const Int& value, long long prec)
    {
        switch (d.kind) {
            case RingKind::Qp:
                return BElem(d, PadicInt::from_int(d.p, value, prec));
            case RingKind::LaurentFp:
                return BElem(d, LaurentElem::monomial(
                                    d.p, 0,
                                    static_cast<long long>(mod_reduce(value, Int(d.p))
                                                               .convert_to<long long>()),
                                    prec));
            case RingKind::OLambdaSlope1:
                return BElem(d, PseudoElem::from_padic(
                                    0, PadicInt::from_int(d.p, value, prec), prec));
        }
        throw std::logic_error("unreachable");
    }

    static BElem one(const RingDescriptor& d, long long prec)
    {
        return from_int(d, 1, prec);
    }

    /* The distinguished topologically-nilpotent unit pi (p, T or X). */
    static BElem uniformizer(const RingDescriptor& d, long long prec)
    {
        switch (d.kind) {
            case RingKind::Qp:
                return BElem(d, PadicInt::from_val_unit(d.p, 1, 1, prec));
            case RingKind::LaurentFp:
                return BElem(d, LaurentElem::monomial(d.p, 1, 1, prec));
            case RingKind::OLambdaSlope1:
                return BElem(d, PseudoElem::from_padic(
                                    1, PadicInt::from_int(d.p, 1, prec - 1), prec));
        }
        throw std::logic_error("unreachable");
    }

    /* Embedding of a p-adic scalar (Z_p acting on coefficients) at a target
     * pi-adic precision.  For LaurentFp the image is the exact mod-p residue
     * (any target is fine); for Qp/OLambdaSlope1 the scalar must carry at
     * least target_prec p-adic digits. */
    static BElem from_padic(const RingDescriptor& d, const PadicInt& a, long long target_prec)
    {
        if (a.p() != d.p) throw std::invalid_argument("BElem::from_padic: prime mismatch");
        switch (d.kind) {
            case RingKind::Qp:
                if (a.prec() < target_prec)
                    throw invariant_violation(
                        "BElem::from_padic: insufficient exponent precision");
                return BElem(d, a.reduce_prec(target_prec));
            case RingKind::LaurentFp: {
                if (a.prec() < 1)
                    throw invariant_violation(
                        "BElem::from_padic: insufficient exponent precision");
                if (a.is_zero() || *a.val() >= 1) return zero(d, target_prec);
                return BElem(d, LaurentElem::monomial(
                                    d.p, 0,
                                    static_cast<long long>((a.unit() % d.p).convert_to<long long>()),
                                    target_prec));
            }
            case RingKind::OLambdaSlope1:
                if (a.prec() < target_prec)
                    throw invariant_violation(
                        "BElem::from_padic: insufficient exponent precision");
                return BElem(d, PseudoElem::from_padic(0, a.reduce_prec(target_prec), target_prec));
        }
        throw std::logic_error("unreachable");
    }

    const RingDescriptor& descriptor() const { return desc_; }

    long long prec() const
    {
        return std::visit([](auto& e) { return e.prec(); }, v_);
    }
    bool is_zero() const
    {
        return std::visit([](auto& e) { return e.is_zero(); }, v_);
    }
    std::optional<long long> val() const
    {
        return std::visit([](auto& e) { return e.val(); }, v_);
    }
    long long val_floor() const
    {
        return std::visit([](auto& e) { return e.val_floor(); }, v_);
    }

    BElem reduce_prec(long long np) const
    {
        return apply1([&](auto& e) { return e.reduce_prec(np); });
    }
    BElem lift_prec(long long np) const
    {
        return apply1([&](auto& e) { return e.lift_prec(np); });
    }
    BElem neg() const
    {
        return apply1([](auto& e) { return e.neg(); });
    }
    BElem shift(long long k) const
    {
        return apply1([&](auto& e) { return e.shift(k); });
    }
    BElem invert() const
    {
        return apply1([](auto& e) { return e.invert(); });
    }

    friend BElem operator+(const BElem& x, const BElem& y)
    {
        return x.apply2(y, [](auto& a, auto& b) { return a + b; });
    }
    friend BElem operator-(const BElem& x, const BElem& y)
    {
        return x.apply2(y, [](auto& a, auto& b) { return a - b; });
    }
    friend BElem operator*(const BElem& x, const BElem& y)
    {
        BElem r = x.apply2(y, [](auto& a, auto& b) { return a * b; });
        long long cap = std::min(x.prec(), y.prec());
        if (r.prec() > cap) r = r.reduce_prec(cap);
        return r;
    }

    friend bool agree(const BElem& x, const BElem& y)
    {
        x.check_same(y);
        return std::visit(
            [&](auto& a) {
                using T = std::decay_t<decltype(a)>;
                return agree(a, std::get<T>(y.v_));
            },
            x.v_);
    }

    std::string str() const
    {
        return std::visit([](auto& e) { return e.str(); }, v_);
    }

    const PadicInt& as_padic() const { return std::get<PadicInt>(v_); }
    const LaurentElem& as_laurent() const { return std::get<LaurentElem>(v_); }
    const PseudoElem& as_pseudo() const { return std::get<PseudoElem>(v_); }

    BElem(const RingDescriptor& d, PadicInt e) : desc_(d), v_(std::move(e)) { expect(RingKind::Qp); }
    BElem(const RingDescriptor& d, LaurentElem e) : desc_(d), v_(std::move(e))
    {
        expect(RingKind::LaurentFp);
    }
    BElem(const RingDescriptor& d, PseudoElem e) : desc_(d), v_(std::move(e))
    {
        expect(RingKind::OLambdaSlope1);
    }

private:
    RingDescriptor desc_;
    std::variant<PadicInt, LaurentElem, PseudoElem> v_;

    void expect(RingKind k) const
    {
        if (desc_.kind != k) throw std::invalid_argument("BElem: representation/kind mismatch");
    }
    void check_same(const BElem& o) const
    {
        if (!(desc_ == o.desc_)) throw std::invalid_argument("BElem: descriptor mismatch");
    }

    template <class F>
    BElem apply1(F&& f) const
    {
        return std::visit([&](auto& e) { return BElem(desc_, f(e)); }, v_);
    }
    template <class F>
    BElem apply2(const BElem& y, F&& f) const
    {
        check_same(y);
        return std::visit(
            [&](auto& a) {
                using T = std::decay_t<decltype(a)>;
                return BElem(desc_, f(a, std::get<T>(y.v_)));
            },
            v_);
    }
};

/* The mod-p reduction O_1 -> F_p((T)) on X-power slots with unit coefficient. */
inline BElem reduce_mod_p(const BElem& x)
{
    if (x.descriptor().kind != RingKind::OLambdaSlope1)
        throw std::invalid_argument("reduce_mod_p: expects an OLambdaSlope1 element");
    return BElem(RingDescriptor::laurent(x.descriptor().p), x.as_pseudo().reduce_mod_p());
}

}  // namespace mixchar
