#pragma once

#include "action.hpp"
#include "padic.hpp"

#include <map>
#include <memory>
#include <utility>
#include <vector>

namespace mixchar {

/* Conjugation rule  g_j g_i g_j^{-1} = g_1^{e_1} ... g_{j-1}^{e_{j-1}}  for a
 * pair of generators i < j.  Exponents are p-adic integers carried at whatever
 * precision the caller supplies; consumers state their own demands. */
struct ConjRule {
    int j = 0;
    int i = 0;
    std::vector<PadicInt> exponents;  // length j-1, indexed by generator 1..j-1
};

/* Polycyclic presentation of a uniform pro-p group of dimension d together
 * with a (possibly trivial) semilinear action of its generators on the
 * coefficient ring.  Generators are ordered g_1 < ... < g_d; every pair i < j
 * carries a conjugation rule (absent rule = the generators commute).
 *
 * Construction certifies uniformity: each rule's exponent vector must be
 * congruent to the identity exponents modulo p^2 (diagonal entry e_i = 1,
 * all others 0), i.e. every commutator g_j g_i g_j^{-1} g_i^{-1} is a word of
 * p^2-th powers.  Violations are construction errors; abelian presentations
 * (no rules) are always valid. */
class GroupPresentation {
public:
    GroupPresentation(SemilinearAction action, std::vector<ConjRule> rules)
        : action_(std::move(action)), d_(action_.dim()), p_(action_.descriptor().p)
    {
        for (auto& r : rules) {
            if (r.i < 1 || r.j > d_ || r.i >= r.j)
                throw config_error("GroupPresentation: rule needs 1 <= i < j <= d");
            if (static_cast<int>(r.exponents.size()) != r.j - 1)
                throw config_error("GroupPresentation: rule for (j,i) needs j-1 exponents");
            for (int k = 1; k < r.j; ++k) {
                const PadicInt& e = r.exponents[static_cast<std::size_t>(k - 1)];
                if (e.p() != p_)
                    throw config_error("GroupPresentation: exponent prime mismatch");
                if (e.prec() < 2)
                    throw config_error(
                        "GroupPresentation: exponents need >= 2 digits to certify uniformity");
                if (e.val_floor() < 0)
                    throw config_error("GroupPresentation: exponents must be p-adic integers");
                PadicInt dev = k == r.i ? e - PadicInt::from_int(p_, 1, e.prec()) : e;
                if (dev.val_floor() < 2)
                    throw config_error(
                        "GroupPresentation: not uniform (commutator is not a p^2-power word)");
            }
            auto key = std::make_pair(r.j, r.i);
            if (!rules_.emplace(key, r.exponents).second)
                throw config_error("GroupPresentation: duplicate rule for a generator pair");
        }
    }

    static GroupPresentation abelian(SemilinearAction action)
    {
        return GroupPresentation(std::move(action), {});
    }

    /* Rank-2 catalog example: g_2 g_1 g_2^{-1} = g_1^(1+p^2), the smallest
     * nonabelian uniform presentation (a semidirect product Z_p x| Z_p). */
    static GroupPresentation semidirect_rank2(SemilinearAction action, long long expo_prec)
    {
        if (action.dim() != 2)
            throw config_error("GroupPresentation::semidirect_rank2: needs dimension 2");
        long long p = action.descriptor().p;
        ConjRule r;
        r.j = 2;
        r.i = 1;
        r.exponents = {PadicInt::from_int(p, 1 + p * p, expo_prec)};
        return GroupPresentation(std::move(action), {std::move(r)});
    }

    int d() const { return d_; }
    long long p() const { return p_; }
    const SemilinearAction& action() const { return action_; }
    const RingDescriptor& descriptor() const { return action_.descriptor(); }
    bool is_abelian() const { return rules_.empty(); }
    bool has_rule(int j, int i) const { return rules_.count({j, i}) != 0; }

    /* Exponent vector of g_j g_i g_j^{-1}, materializing the abelian default
     * (unit vector at i) for absent rules.  Every returned exponent carries at
     * least `prec` digits (stored rules are reduced; shortfalls are errors). */
    std::vector<PadicInt> conj_exponents(int j, int i, long long prec) const
    {
        if (i < 1 || j > d_ || i >= j)
            throw config_error("GroupPresentation: conj_exponents needs 1 <= i < j <= d");
        std::vector<PadicInt> out;
        out.reserve(static_cast<std::size_t>(j - 1));
        auto it = rules_.find({j, i});
        if (it == rules_.end()) {
            for (int k = 1; k < j; ++k)
                out.push_back(PadicInt::from_int(p_, k == i ? 1 : 0, prec));
            return out;
        }
        for (auto& e : it->second) {
            if (e.prec() < prec)
                throw config_error(
                    "GroupPresentation: relation exponents carry fewer digits than required");
            out.push_back(e.reduce_prec(prec));
        }
        return out;
    }

private:
    SemilinearAction action_;
    int d_;
    long long p_;
    std::map<std::pair<int, int>, std::vector<PadicInt>> rules_;
};

}  // namespace mixchar
