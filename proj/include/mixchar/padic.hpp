#pragma once

#include "numeric.hpp"
#include "valuations.hpp"

#include <optional>
#include <sstream>

namespace mixchar {

/* Element of Q_p known modulo p^prec.  Canonical state is either
 *   - nonzero: x = p^v * u with v < prec and u a unit in [1, p^(prec-v)),
 *   - zero-at-precision: u == 0, v == prec (x lies in p^prec Z_p).
 * prec may be negative together with v (poles are first-class citizens).
 *
 * Precision propagation is the sound rule
 *   prec(x*y)   = min(prec_x + v_y, prec_y + v_x)
 * (with v read as prec for zero-at-precision operands); callers that also
 * want the pessimistic cap min(prec_x, prec_y) apply it on top (the BElem
 * layer does). */
class PadicInt {
public:
    PadicInt() : p_(0), v_(0), prec_(0) {}

    static PadicInt zero(long long p, long long prec)
    {
        PadicInt r;
        r.p_ = p;
        r.v_ = prec;
        r.prec_ = prec;
        return r;
    }

    static PadicInt from_int(long long p, const Int& value, long long prec)
    {
        return from_val_unit(p, 0, value, prec);
    }

    /* x = p^v * raw + O(p^prec); raw need not be a unit or reduced. */
    static PadicInt from_val_unit(long long p, long long v, const Int& raw, long long prec)
    {
        if (p < 2) throw std::invalid_argument("PadicInt: p must be >= 2");
        PadicInt r;
        r.p_ = p;
        r.v_ = v;
        r.u_ = raw;
        r.prec_ = prec;
        r.normalize();
        return r;
    }

    long long p() const { return p_; }
    long long prec() const { return prec_; }
    bool is_zero() const { return u_ == 0; }

    /* nullopt means "zero at this precision", i.e. val >= prec. */
    std::optional<long long> val() const
    {
        if (is_zero()) return std::nullopt;
        return v_;
    }
    /* val if known, else prec (the best lower bound). */
    long long val_floor() const { return is_zero() ? prec_ : v_; }

    const Int& unit() const { return u_; }

    PadicInt reduce_prec(long long new_prec) const
    {
        if (new_prec >= prec_) {
            if (new_prec > prec_)
                throw std::invalid_argument("PadicInt: cannot raise precision");
            return *this;
        }
        if (is_zero()) return zero(p_, new_prec);
        return from_val_unit(p_, v_, u_, new_prec);
    }

    /* Choice of representative: pads unknown digits with zero.  Only for
     * contexts (normal forms of quotient-ring presentations) where any lift
     * is acceptable. */
    PadicInt lift_prec(long long new_prec) const
    {
        if (new_prec <= prec_) return reduce_prec(new_prec);
        if (is_zero()) return zero(p_, new_prec);
        PadicInt r = *this;
        r.prec_ = new_prec;
        return r;
    }

    PadicInt neg() const
    {
        if (is_zero()) return *this;
        return from_val_unit(p_, v_, -u_, prec_);
    }

    /* Multiply by p^k (exact; shifts valuation and precision together). */
    PadicInt shift(long long k) const
    {
        PadicInt r = *this;
        r.v_ += k;
        r.prec_ += k;
        return r;
    }

    friend PadicInt operator+(const PadicInt& x, const PadicInt& y)
    {
        x.check_same(y);
        long long prec = std::min(x.prec_, y.prec_);
        if (x.is_zero() && y.is_zero()) return zero(x.p_, prec);
        if (x.is_zero()) return y.reduce_prec(prec);
        if (y.is_zero()) return x.reduce_prec(prec);
        long long vmin = std::min(x.v_, y.v_);
        if (prec <= vmin) return zero(x.p_, prec);
        Int s = x.u_ * ppow(x.p_, x.v_ - vmin) + y.u_ * ppow(x.p_, y.v_ - vmin);
        return from_val_unit(x.p_, vmin, s, prec);
    }

    friend PadicInt operator-(const PadicInt& x, const PadicInt& y) { return x + y.neg(); }

    friend PadicInt operator*(const PadicInt& x, const PadicInt& y)
    {
        x.check_same(y);
        long long prec = std::min(chk_add(x.prec_, y.val_floor()),
                                  chk_add(y.prec_, x.val_floor()));
        if (x.is_zero() || y.is_zero()) return zero(x.p_, prec);
        return from_val_unit(x.p_, x.v_ + y.v_, x.u_ * y.u_, prec);
    }

    PadicInt invert() const
    {
        if (is_zero()) throw invariant_violation("PadicInt: inverting zero-at-precision");
        long long rp = prec_ - 2 * v_;
        if (rp <= -v_) throw invariant_violation("PadicInt: no precision left to invert");
        Int ui = mod_inverse(u_, ppow(p_, rp + v_));
        return from_val_unit(p_, -v_, ui, rp);
    }

    /* Agreement modulo p^min(prec_x, prec_y). */
    friend bool agree(const PadicInt& x, const PadicInt& y)
    {
        x.check_same(y);
        long long prec = std::min(x.prec_, y.prec_);
        PadicInt d = (x - y).reduce_prec(prec);
        return d.is_zero();
    }

    /* Binomial coefficient binom(x, k) for a p-adic x; lands in Z_p when
     * val(x) >= 0.  Known modulo p^(prec_chain - val_p(k!)). */
    static PadicInt binom(const PadicInt& x, long long k)
    {
        if (k < 0) throw std::invalid_argument("PadicInt::binom: k < 0");
        PadicInt acc = from_int(x.p(), 1, x.prec() + 2 * k + 4);
        for (long long r = 0; r < k; ++r) {
            PadicInt f = x - from_int(x.p(), Int(r), x.prec());
            acc = acc * f;
        }
        long long t = val_p_factorial(x.p(), k);
        Int fact_unit = 1;
        for (long long m = 2; m <= k; ++m) fact_unit *= m;
        fact_unit /= ppow(x.p(), t);
        acc = acc.shift(-t);
        if (acc.is_zero()) return acc;
        Int ui = mod_inverse(fact_unit, ppow(x.p(), acc.prec_ - acc.v_));
        return from_val_unit(x.p(), acc.v_, acc.u_ * ui, acc.prec_);
    }

    /* "p^v * (d0,d1,...) mod p^M" with little-endian base-p digits of the
     * unit part; zero-at-precision prints as "0 mod p^M". */
    std::string str() const
    {
        std::ostringstream os;
        if (is_zero()) {
            os << "0 mod " << p_ << "^" << prec_;
            return os.str();
        }
        os << p_ << "^" << v_ << " * (";
        Int u = u_;
        bool first = true;
        if (u == 0) os << "0";
        while (u > 0) {
            if (!first) os << ",";
            os << (u % p_);
            u /= p_;
            first = false;
        }
        os << ") mod " << p_ << "^" << prec_;
        return os.str();
    }

private:
    long long p_;
    long long v_;
    Int u_;
    long long prec_;

    void check_same(const PadicInt& o) const
    {
        if (p_ != o.p_) throw std::invalid_argument("PadicInt: prime mismatch");
    }

    void normalize()
    {
        if (u_ != 0) {
            Int m = v_ < prec_ ? ppow(p_, prec_ - v_) : Int(1);
            u_ = mod_reduce(u_, m);
        }
        if (u_ == 0) {
            v_ = prec_;
            return;
        }
        long long shift_up = 0;
        while (u_ % p_ == 0) {
            u_ /= p_;
            ++shift_up;
        }
        v_ += shift_up;
        if (v_ >= prec_) {
            u_ = 0;
            v_ = prec_;
            return;
        }
        u_ = mod_reduce(u_, ppow(p_, prec_ - v_));
        if (u_ == 0) {
            v_ = prec_;
        }
    }
};

}  // namespace mixchar
