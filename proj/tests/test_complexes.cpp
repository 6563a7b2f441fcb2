#include "mixchar/complexes.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace mixchar;

namespace {

const RingDescriptor Q2 = RingDescriptor::qp(2);
const RingDescriptor Q3 = RingDescriptor::qp(3);
const RingDescriptor L2 = RingDescriptor::laurent(2);
const RingDescriptor O2 = RingDescriptor::pseudorigid(2);

SemilinearAction cyclotomic(const RingDescriptor& d, int dim, std::vector<long long> gammas)
{
    ActionSpec spec;
    spec.kind = ActionKind::Cyclotomic;
    for (long long g : gammas) spec.gammas.push_back(PadicInt::from_int(d.p, g, 40));
    return SemilinearAction(d, dim, spec);
}

GroupPresentation trivial_pres(const RingDescriptor& d, int dim)
{
    return GroupPresentation::abelian(SemilinearAction::trivial(d, dim));
}

MultiIndex mi(std::initializer_list<long long> e) { return MultiIndex(e); }

/* random sum of monomials with integer coefficients and small pi-shifts,
 * supported in weight <= wcap (tail-free by construction) */
IwasawaElem rand_iwasawa(const IwasawaAlgebra& A, std::mt19937& rng, long long wcap)
{
    const RingDescriptor& desc = A.presentation().descriptor();
    std::vector<MultiIndex> idx = indices_up_to(A.presentation().d(), wcap);
    std::uniform_int_distribution<std::size_t> pick(0, idx.size() - 1);
    std::uniform_int_distribution<long long> cval(1, 60);
    std::uniform_int_distribution<long long> sh(0, 2);
    IwasawaElem x = A.zero();
    for (int t = 0; t < 4; ++t) {
        BElem b = BElem::from_int(desc, Int(cval(rng)), A.ctx().N).shift(sh(rng));
        x = A.add(x, A.monomial(b, idx[pick(rng)]));
    }
    return x;
}

DistElem rand_dist(const DistAlgebra& A, std::mt19937& rng, long long wcap)
{
    const RingDescriptor& desc = A.presentation().descriptor();
    std::vector<MultiIndex> idx = indices_up_to(A.presentation().d(), wcap);
    std::uniform_int_distribution<std::size_t> pick(0, idx.size() - 1);
    std::uniform_int_distribution<long long> cval(1, 60);
    std::uniform_int_distribution<long long> sh(0, 2);
    DistElem x = A.zero();
    for (int t = 0; t < 4; ++t) {
        BElem b = BElem::from_int(desc, Int(cval(rng)), A.N()).shift(sh(rng));
        x = A.add(x, A.monomial(b, idx[pick(rng)]));
    }
    return x;
}

template <class Alg, class Chain>
void expect_chain_agree(const ChainComplexT<Alg>& C, const Chain& x, const Chain& y,
                        const char* what)
{
    ASSERT_EQ(x.size(), y.size()) << what;
    for (std::size_t s = 0; s < x.size(); ++s)
        EXPECT_TRUE(C.algebra().agree_elems(x[s], y[s])) << what << " slot " << s;
}

template <class Alg, class Chain>
void expect_chain_zero(const Chain& v, const char* what)
{
    for (std::size_t s = 0; s < v.size(); ++s)
        EXPECT_TRUE(v[s].is_zero()) << what << " slot " << s;
}

/* plain F_p Gaussian elimination, independent of the library's reductions */
int fp_rank_oracle(std::vector<std::vector<long long>> m, long long p)
{
    int rank = 0;
    std::size_t rows = m.size(), cols = rows ? m[0].size() : 0;
    for (std::size_t c = 0; c < cols && static_cast<std::size_t>(rank) < rows; ++c) {
        std::size_t piv = static_cast<std::size_t>(rank);
        while (piv < rows && m[piv][c] % p == 0) ++piv;
        if (piv == rows) continue;
        std::swap(m[static_cast<std::size_t>(rank)], m[piv]);
        long long inv = static_cast<long long>(
            mod_inverse(Int(m[static_cast<std::size_t>(rank)][c]), Int(p))
                .convert_to<long long>());
        for (auto& x : m[static_cast<std::size_t>(rank)]) x = (x * inv) % p;
        for (std::size_t r = 0; r < rows; ++r) {
            if (r == static_cast<std::size_t>(rank) || m[r][c] % p == 0) continue;
            long long f = m[r][c] % p;
            for (std::size_t cc = 0; cc < cols; ++cc)
                m[r][cc] = ((m[r][cc] - f * m[static_cast<std::size_t>(rank)][cc]) % p + p) % p;
        }
        ++rank;
    }
    return rank;
}

/* polynomial arithmetic mod T^cap over F_p, for substitution oracles */
std::vector<long long> poly_mul_mod(const std::vector<long long>& a,
                                    const std::vector<long long>& b, long long p,
                                    std::size_t cap)
{
    std::vector<long long> r(cap, 0);
    for (std::size_t i = 0; i < a.size() && i < cap; ++i) {
        if (a[i] == 0) continue;
        for (std::size_t j = 0; j < b.size() && i + j < cap; ++j)
            r[i + j] = (r[i + j] + a[i] * b[j]) % p;
    }
    return r;
}

std::vector<long long> poly_pow_mod(std::vector<long long> base, long long e, long long p,
                                    std::size_t cap)
{
    std::vector<long long> r(cap, 0);
    r[0] = 1 % p;
    for (; e > 0; e >>= 1) {
        if (e & 1) r = poly_mul_mod(r, base, p, cap);
        base = poly_mul_mod(base, base, p, cap);
    }
    return r;
}

BMatrix scalar_mat(const RingDescriptor& d, std::size_t r, const BElem& diag, long long prec)
{
    BMatrix m;
    for (std::size_t u = 0; u < r; ++u) {
        BVector row;
        for (std::size_t v = 0; v < r; ++v)
            row.push_back(u == v ? diag : BElem::zero(d, prec));
        m.push_back(row);
    }
    return m;
}

TEST(Complexes, ConstructionAndRanks)
{
    GroupPresentation pres = trivial_pres(Q2, 3);
    IwasawaAlgebra A(pres, PrecisionCtx(4, 3));
    ChainComplex C = lazard_serre(A);
    EXPECT_EQ(C.dim(), 3);
    EXPECT_EQ(C.rank(0), 1u);
    EXPECT_EQ(C.rank(1), 3u);
    EXPECT_EQ(C.rank(2), 3u);
    EXPECT_EQ(C.rank(3), 1u);
    EXPECT_EQ(C.pole_budget(), 0);
    /* lexicographic wedge order */
    EXPECT_EQ(C.wedge(2)[0], (std::vector<int>{1, 2}));
    EXPECT_EQ(C.wedge(2)[1], (std::vector<int>{1, 3}));
    EXPECT_EQ(C.wedge(2)[2], (std::vector<int>{2, 3}));
    EXPECT_EQ(C.slot(2, {1, 3}), 1u);
    EXPECT_THROW(C.slot(2, {3, 1}), config_error);

    /* the resolution needs commuting generators */
    GroupPresentation nonab = GroupPresentation::semidirect_rank2(
        SemilinearAction::trivial(Q2, 2), 40);
    IwasawaAlgebra NA(nonab, PrecisionCtx(3, 2));
    EXPECT_THROW(lazard_serre(NA), config_error);
    DistAlgebra ND(nonab, 2, 3, 2);
    EXPECT_THROW(kohlhaase(ND), config_error);
}

TEST(Complexes, DifferentialSquaresToZero)
{
    std::mt19937 rng(991);
    {
        IwasawaAlgebra A(trivial_pres(Q3, 2), PrecisionCtx(5, 4));
        ChainComplex C = lazard_serre(A);
        for (int rep = 0; rep < 5; ++rep) {
            ChainComplex::Chain v;
            for (std::size_t s = 0; s < C.rank(2); ++s) v.push_back(rand_iwasawa(A, rng, 3));
            expect_chain_zero<IwasawaAlgebra>(C.apply_diff(1, C.apply_diff(2, v)),
                                             "Q3 d=2 d(d(x))");
        }
    }
    {
        IwasawaAlgebra A(trivial_pres(Q2, 3), PrecisionCtx(4, 3));
        ChainComplex C = lazard_serre(A);
        for (int rep = 0; rep < 3; ++rep)
            for (int j = 2; j <= 3; ++j) {
                ChainComplex::Chain v;
                for (std::size_t s = 0; s < C.rank(j); ++s) v.push_back(rand_iwasawa(A, rng, 2));
                expect_chain_zero<IwasawaAlgebra>(C.apply_diff(j - 1, C.apply_diff(j, v)),
                                                 "Q2 d=3 d(d(x))");
            }
    }
    {
        /* twisted coefficients, commuting generators */
        GroupPresentation pres =
            GroupPresentation::abelian(cyclotomic(L2, 2, {3, 5}));
        IwasawaAlgebra A(pres, PrecisionCtx(5, 4));
        ChainComplex C = lazard_serre(A);
        for (int rep = 0; rep < 4; ++rep) {
            ChainComplex::Chain v;
            for (std::size_t s = 0; s < C.rank(2); ++s) v.push_back(rand_iwasawa(A, rng, 3));
            expect_chain_zero<IwasawaAlgebra>(C.apply_diff(1, C.apply_diff(2, v)),
                                             "twisted d=2 d(d(x))");
        }
    }
}

TEST(Complexes, HomotopyContractsDegreeZeroExamples)
{
    IwasawaAlgebra A(trivial_pres(Q2, 2), PrecisionCtx(4, 3));
    ChainComplex C = lazard_serre(A);
    BElem one = BElem::one(Q2, 4);

    /* s(c^2) = c e_1 */
    auto img = C.apply_homotopy(0, C.single(0, {}, A.monomial(one, mi({2, 0}))));
    EXPECT_TRUE(A.agree_elems(img[C.slot(1, {1})], A.monomial(one, mi({1, 0}))));
    EXPECT_TRUE(img[C.slot(1, {2})].is_zero());

    /* constants die under the homotopy; the unit section recovers them */
    auto cimg = C.apply_homotopy(0, C.single(0, {}, A.scalar(one.shift(1))));
    expect_chain_zero<IwasawaAlgebra>(cimg, "s(scalar)");
    auto back = C.contract(0, C.single(0, {}, A.scalar(one.shift(1))));
    EXPECT_TRUE(A.agree_elems(back[0], A.scalar(one.shift(1))));

    /* pi c_1 c_2 has filtration 3; its staircase image pi c_2 e_1 has 2 */
    IwasawaElem x = A.monomial(one.shift(1), mi({1, 1}));
    EXPECT_EQ(A.filtration_floor(x).value(), 3);
    auto himg = C.apply_homotopy(0, C.single(0, {}, x));
    EXPECT_TRUE(A.agree_elems(himg[C.slot(1, {1})], A.monomial(one.shift(1), mi({0, 1}))));
    EXPECT_EQ(A.filtration_floor(himg[C.slot(1, {1})]).value(), 2);
}

TEST(Complexes, HomotopyIdentityIwasawa)
{
    std::mt19937 rng(4242);
    /* d = 1 over all three coefficient rings, trivial action */
    for (const RingDescriptor& desc : {Q2, Q3, L2, O2}) {
        IwasawaAlgebra A(trivial_pres(desc, 1), PrecisionCtx(6, 5));
        ChainComplex C = lazard_serre(A);
        for (int rep = 0; rep < 6; ++rep)
            for (int j = 0; j <= 1; ++j) {
                ChainComplex::Chain v;
                for (std::size_t s = 0; s < C.rank(j); ++s) v.push_back(rand_iwasawa(A, rng, 4));
                expect_chain_agree(C, C.contract(j, v), v, "d=1 contraction");
            }
    }
    /* d = 1 twisted Laurent coefficients */
    {
        GroupPresentation pres = GroupPresentation::abelian(cyclotomic(L2, 1, {3}));
        IwasawaAlgebra A(pres, PrecisionCtx(6, 5));
        ChainComplex C = lazard_serre(A);
        for (int rep = 0; rep < 6; ++rep)
            for (int j = 0; j <= 1; ++j) {
                ChainComplex::Chain v;
                for (std::size_t s = 0; s < C.rank(j); ++s) v.push_back(rand_iwasawa(A, rng, 4));
                expect_chain_agree(C, C.contract(j, v), v, "twisted d=1 contraction");
            }
    }
    /* abelian d = 2 and d = 3 */
    {
        IwasawaAlgebra A(trivial_pres(Q2, 2), PrecisionCtx(5, 4));
        ChainComplex C = lazard_serre(A);
        for (int rep = 0; rep < 5; ++rep)
            for (int j = 0; j <= 2; ++j) {
                ChainComplex::Chain v;
                for (std::size_t s = 0; s < C.rank(j); ++s) v.push_back(rand_iwasawa(A, rng, 3));
                expect_chain_agree(C, C.contract(j, v), v, "d=2 contraction");
            }
    }
    {
        GroupPresentation pres = GroupPresentation::abelian(cyclotomic(L2, 2, {3, 5}));
        IwasawaAlgebra A(pres, PrecisionCtx(5, 4));
        ChainComplex C = lazard_serre(A);
        for (int rep = 0; rep < 4; ++rep)
            for (int j = 0; j <= 2; ++j) {
                ChainComplex::Chain v;
                for (std::size_t s = 0; s < C.rank(j); ++s) v.push_back(rand_iwasawa(A, rng, 3));
                expect_chain_agree(C, C.contract(j, v), v, "twisted d=2 contraction");
            }
    }
    {
        IwasawaAlgebra A(trivial_pres(Q2, 3), PrecisionCtx(4, 3));
        ChainComplex C = lazard_serre(A);
        for (int rep = 0; rep < 3; ++rep)
            for (int j = 0; j <= 3; ++j) {
                ChainComplex::Chain v;
                for (std::size_t s = 0; s < C.rank(j); ++s) v.push_back(rand_iwasawa(A, rng, 2));
                expect_chain_agree(C, C.contract(j, v), v, "d=3 contraction");
            }
    }
    /* top-weight defect in the top degree: d(x) overflows into the guard
     * zone, the homotopy sees nothing, and the defect sits in filtration D */
    {
        IwasawaAlgebra A(trivial_pres(Q2, 1), PrecisionCtx(6, 5));
        ChainComplex C = lazard_serre(A);
        IwasawaElem x = A.monomial(BElem::one(Q2, 6), mi({5}));
        auto lhs = C.contract(1, C.single(1, {1}, x));
        EXPECT_TRUE(lhs[0].is_zero());
        EXPECT_GE(A.filtration_floor(x).value(), A.ctx().D);
    }
}

TEST(Complexes, HomotopyDivisionReportClean)
{
    {
        IwasawaAlgebra A(trivial_pres(Q2, 2), PrecisionCtx(5, 4));
        ChainComplex C = lazard_serre(A);
        HomotopyDivisionReport rep = verify_homotopy_division(C, 5, 3);
        EXPECT_TRUE(rep.ok);
        EXPECT_EQ(rep.max_drop, 1);
        EXPECT_GT(rep.cases_checked, 100);
        EXPECT_GT(rep.strict_cases, 0);
        EXPECT_TRUE(rep.failures.empty());
        EXPECT_FALSE(rep.first_failure.has_value());
    }
    {
        IwasawaAlgebra A(trivial_pres(O2, 1), PrecisionCtx(4, 3));
        ChainComplex C = lazard_serre(A);
        HomotopyDivisionReport rep = verify_homotopy_division(C, 4, 3);
        EXPECT_TRUE(rep.ok);
        EXPECT_EQ(rep.max_drop, 1);
    }
}

TEST(Complexes, KohlhaaseIdentityAndTails)
{
    std::mt19937 rng(777);
    /* d = 1, h = 0 over Q2: the gauge steps at every weight, pole = 1 */
    {
        GroupPresentation pres = trivial_pres(Q2, 1);
        DistAlgebra A(pres, 0, 6, 5);
        AnalyticChainComplex C = kohlhaase(A);
        EXPECT_EQ(C.pole_budget(), 1);
        for (int rep = 0; rep < 6; ++rep)
            for (int j = 0; j <= 1; ++j) {
                AnalyticChainComplex::Chain v;
                for (std::size_t s = 0; s < C.rank(j); ++s) v.push_back(rand_dist(A, rng, 4));
                expect_chain_agree(C, C.contract(j, v), C.scaled(j, v), "h=0 d=1 contraction");
            }
    }
    /* abelian d = 2, h = 1, twisted Laurent coefficients */
    {
        GroupPresentation pres = GroupPresentation::abelian(cyclotomic(L2, 2, {3, 5}));
        DistAlgebra A(pres, 1, 5, 4);
        AnalyticChainComplex C = kohlhaase(A);
        EXPECT_EQ(C.pole_budget(), 1);
        for (int rep = 0; rep < 4; ++rep)
            for (int j = 0; j <= 2; ++j) {
                AnalyticChainComplex::Chain v;
                for (std::size_t s = 0; s < C.rank(j); ++s) v.push_back(rand_dist(A, rng, 3));
                expect_chain_agree(C, C.contract(j, v), C.scaled(j, v), "h=1 d=2 contraction");
            }
    }
    /* deep h: the gauge never moves below weight D, so the pole vanishes
     * and the identity is on the nose */
    {
        GroupPresentation pres = trivial_pres(Q2, 1);
        DistAlgebra A(pres, 3, 4, 4);
        AnalyticChainComplex C = kohlhaase(A);
        EXPECT_EQ(C.pole_budget(), 0);
        for (int rep = 0; rep < 4; ++rep)
            for (int j = 0; j <= 1; ++j) {
                AnalyticChainComplex::Chain v;
                for (std::size_t s = 0; s < C.rank(j); ++s) v.push_back(rand_dist(A, rng, 3));
                expect_chain_agree(C, C.contract(j, v), v, "h=3 d=1 contraction");
            }
    }
    /* recorded discard bounds ride along:  tail g maps to tail g + pole - 1 */
    {
        GroupPresentation pres = trivial_pres(Q2, 1);
        DistAlgebra A(pres, 0, 6, 5);
        AnalyticChainComplex C = kohlhaase(A);
        DistElem x = A.with_tail(A.monomial(BElem::one(Q2, 6), mi({2})), 3);
        auto img = C.apply_homotopy(0, C.single(0, {}, x));
        ASSERT_TRUE(img[0].tail_gauge().has_value());
        EXPECT_EQ(img[0].tail_gauge().value(), 3 + C.pole_budget() - 1);

        /* top-weight defect: d(x) is wholly discarded, the homotopy output
         * records that tail, and the defect's gauge clears the bound */
        DistElem xd = A.monomial(BElem::one(Q2, 6).shift(-A.vh(5)), mi({5}));
        auto lhs = C.contract(1, C.single(1, {1}, xd));
        auto rhs = C.scaled(1, C.single(1, {1}, xd));
        ASSERT_TRUE(lhs[0].tail_gauge().has_value());
        DistElem defect = A.sub(rhs[0], lhs[0]);
        ASSERT_TRUE(A.gauge_floor(defect).has_value());
        EXPECT_GE(A.gauge_floor(defect).value(), lhs[0].tail_gauge().value());
    }
}

TEST(Complexes, KohlhaasePoleBudget)
{
    {
        GroupPresentation pres = trivial_pres(Q2, 1);
        DistAlgebra A(pres, 0, 6, 4);
        AnalyticChainComplex C = kohlhaase(A);
        PoleBudgetReport rep = certify_pole_budget(C);
        EXPECT_TRUE(rep.ok);
        EXPECT_EQ(rep.pole, 1);
        EXPECT_EQ(rep.min_raw_gauge, -1);  // h = 0, p = 2: every weight steps
        EXPECT_GT(rep.cases_checked, 0);
        EXPECT_TRUE(rep.failures.empty());
    }
    {
        GroupPresentation pres = trivial_pres(Q2, 1);
        DistAlgebra A(pres, 3, 4, 4);
        AnalyticChainComplex C = kohlhaase(A);
        PoleBudgetReport rep = certify_pole_budget(C);
        EXPECT_TRUE(rep.ok);
        EXPECT_EQ(rep.pole, 0);
        EXPECT_GE(rep.min_raw_gauge, 0);
    }
}

TEST(Complexes, CohomologyTrivialRankOne)
{
    for (long long N : {3, 5, 7}) {
        for (const RingDescriptor& desc : {Q2, Q3, L2}) {
            GroupPresentation pres = trivial_pres(desc, 1);
            BMatrix M = scalar_mat(desc, 1, BElem::one(desc, N), N);
            CohomologyReport rep = cohomology(pres, {M}, N, CoeffChoice::Continuous);
            EXPECT_EQ(rep.kind, CohomKind::ChainRingDivisors);
            ASSERT_EQ(rep.degrees.size(), 2u);
            EXPECT_EQ(rep.degrees[0].divisors, std::vector<long long>{N});
            EXPECT_EQ(rep.degrees[1].divisors, std::vector<long long>{N});
            EXPECT_EQ(rep.degrees[0].tail_bound, N);
            EXPECT_EQ(rep.euler, 0);
        }
        {
            GroupPresentation pres = trivial_pres(O2, 1);
            BMatrix M = scalar_mat(O2, 1, BElem::one(O2, N), N);
            CohomologyReport rep = cohomology(pres, {M}, N, CoeffChoice::Continuous);
            EXPECT_EQ(rep.kind, CohomKind::ResiduePolynomial);
            ASSERT_EQ(rep.degrees.size(), 2u);
            EXPECT_EQ(rep.degrees[0].free_rank, N);
            EXPECT_EQ(rep.degrees[1].free_rank, N);
            EXPECT_TRUE(rep.degrees[0].torsion_degrees.empty());
            EXPECT_EQ(rep.euler, 0);
        }
    }
}

TEST(Complexes, CohomologyQpTorsion)
{
    for (long long a : {1, 2}) {
        long long N = 6, p = 3;
        GroupPresentation pres = trivial_pres(Q3, 1);
        BElem u = BElem::from_int(Q3, Int(1 + ppow(p, a)), N);
        CohomologyReport rep = cohomology(pres, {scalar_mat(Q3, 1, u, N)}, N,
                                          CoeffChoice::Continuous);
        ASSERT_EQ(rep.degrees.size(), 2u);
        EXPECT_EQ(rep.degrees[0].divisors, std::vector<long long>{a});
        EXPECT_EQ(rep.degrees[1].divisors, std::vector<long long>{a});
        EXPECT_EQ(rep.degrees[0].length, a);
        EXPECT_EQ(rep.euler, 0);
    }
    {
        /* rank-2 group: H^0 = Z/p^a, H^1 = (Z/p^a)^2, H^2 = Z/p^a */
        long long N = 6, p = 3, a = 2;
        GroupPresentation pres = trivial_pres(Q3, 2);
        BMatrix M1 = scalar_mat(Q3, 1, BElem::one(Q3, N), N);
        BMatrix M2 = scalar_mat(Q3, 1, BElem::from_int(Q3, Int(1 + ppow(p, a)), N), N);
        CohomologyReport rep = cohomology(pres, {M1, M2}, N, CoeffChoice::Continuous);
        ASSERT_EQ(rep.degrees.size(), 3u);
        EXPECT_EQ(rep.degrees[0].divisors, std::vector<long long>{a});
        EXPECT_EQ(rep.degrees[1].divisors, (std::vector<long long>{a, a}));
        EXPECT_EQ(rep.degrees[2].divisors, std::vector<long long>{a});
        EXPECT_EQ(rep.euler, 0);
    }
}

TEST(Complexes, CohomologyLaurentTwistedOracle)
{
    /* B/T^6 itself as a module under sigma: T -> (1+T)^3 - 1 over F_2 */
    const long long p = 2, N = 6;
    GroupPresentation pres = GroupPresentation::abelian(cyclotomic(L2, 1, {3}));
    BMatrix M = scalar_mat(L2, 1, BElem::one(L2, N), N);
    CohomologyReport rep = cohomology(pres, {M}, N, CoeffChoice::Continuous);
    EXPECT_EQ(rep.kind, CohomKind::ResidueLinearized);
    ASSERT_EQ(rep.degrees.size(), 2u);

    /* independent oracle: the substitution matrix of sigma - 1 and its rank */
    std::vector<long long> s = {0, 1, 1, 1};  // (1+T)^3 - 1 = T + T^2 + T^3
    std::vector<std::vector<long long>> rho(static_cast<std::size_t>(N),
                                            std::vector<long long>(static_cast<std::size_t>(N)));
    for (long long t = 0; t < N; ++t) {
        std::vector<long long> col =
            poly_pow_mod(s, t, p, static_cast<std::size_t>(N));
        col[static_cast<std::size_t>(t)] = (col[static_cast<std::size_t>(t)] + p - 1) % p;
        for (long long r = 0; r < N; ++r)
            rho[static_cast<std::size_t>(r)][static_cast<std::size_t>(t)] =
                col[static_cast<std::size_t>(r)];
    }
    int rank = fp_rank_oracle(rho, p);
    EXPECT_EQ(rep.degrees[0].fp_dim, N - rank);
    EXPECT_EQ(rep.degrees[1].fp_dim, N - rank);
    EXPECT_EQ(rep.degrees[0].fp_dim, 4);  // kernel: 1, T^2+T^3, T^4, T^5
    EXPECT_EQ(rep.euler, 0);
}

TEST(Complexes, ContinuousVsAnalyticAgree)
{
    /* rank-1 twisted module over F_2((T)):  v -> (1+T) sigma(v), gamma = 3 */
    const long long p = 2, N = 6;
    GroupPresentation pres = GroupPresentation::abelian(cyclotomic(L2, 1, {3}));
    BElem u = BElem::one(L2, N) + BElem::uniformizer(L2, N);
    BMatrix M = scalar_mat(L2, 1, u, N);

    CohomologyReport rc = cohomology(pres, {M}, N, CoeffChoice::Continuous);
    CohomologyReport ra = cohomology(pres, {M}, N, CoeffChoice::HAnalytic, 1);
    EXPECT_TRUE(ra.h_certified);
    EXPECT_EQ(ra.h, 1);
    ASSERT_EQ(rc.degrees.size(), ra.degrees.size());
    for (std::size_t j = 0; j < rc.degrees.size(); ++j) {
        EXPECT_EQ(rc.degrees[j].fp_dim, ra.degrees[j].fp_dim) << "degree " << j;
        EXPECT_EQ(rc.degrees[j].divisors, ra.degrees[j].divisors) << "degree " << j;
    }
    EXPECT_EQ(rc.euler, 0);
    EXPECT_EQ(ra.euler, 0);

    /* independent oracle: columns (1+T) sigma(T^t) - T^t over F_2 mod T^6 */
    std::vector<long long> s = {0, 1, 1, 1};
    std::vector<std::vector<long long>> rho(static_cast<std::size_t>(N),
                                            std::vector<long long>(static_cast<std::size_t>(N)));
    for (long long t = 0; t < N; ++t) {
        std::vector<long long> sig = poly_pow_mod(s, t, p, static_cast<std::size_t>(N));
        std::vector<long long> col = poly_mul_mod({1, 1}, sig, p, static_cast<std::size_t>(N));
        col[static_cast<std::size_t>(t)] = (col[static_cast<std::size_t>(t)] + p - 1) % p;
        for (long long r = 0; r < N; ++r)
            rho[static_cast<std::size_t>(r)][static_cast<std::size_t>(t)] =
                col[static_cast<std::size_t>(r)];
    }
    int rank = fp_rank_oracle(rho, p);
    EXPECT_EQ(rc.degrees[0].fp_dim, N - rank);
    EXPECT_EQ(rc.degrees[1].fp_dim, N - rank);
    EXPECT_EQ(rc.degrees[0].fp_dim, 2);
}

TEST(Complexes, CohomologyPseudorigid)
{
    const long long N = 4;
    GroupPresentation pres = trivial_pres(O2, 1);
    {
        /* multiplication by 1 + X: rho = X, one free generator survives at
         * each end of the slot chain */
        BElem u = BElem::one(O2, N) + BElem::uniformizer(O2, N);
        CohomologyReport rep = cohomology(pres, {scalar_mat(O2, 1, u, N)}, N,
                                          CoeffChoice::Continuous);
        EXPECT_EQ(rep.kind, CohomKind::ResiduePolynomial);
        EXPECT_EQ(rep.degrees[0].free_rank, 1);
        EXPECT_TRUE(rep.degrees[0].torsion_degrees.empty());
        EXPECT_EQ(rep.degrees[1].free_rank, 1);
        EXPECT_TRUE(rep.degrees[1].torsion_degrees.empty());
        EXPECT_EQ(rep.euler, 0);
    }
    {
        /* multiplication by 1 + p: rho = p = yX, so H^1 picks up an
         * F_p[y]/(y) in every interior slot */
        BElem u = BElem::from_int(O2, 3, N);  // 1 + p at p = 2
        CohomologyReport rep = cohomology(pres, {scalar_mat(O2, 1, u, N)}, N,
                                          CoeffChoice::Continuous);
        EXPECT_EQ(rep.degrees[0].free_rank, 1);
        EXPECT_TRUE(rep.degrees[0].torsion_degrees.empty());
        EXPECT_EQ(rep.degrees[1].free_rank, 1);
        EXPECT_EQ(rep.degrees[1].torsion_degrees,
                  std::vector<long long>(static_cast<std::size_t>(N - 1), 1));
        EXPECT_EQ(rep.euler, 0);
    }
}

TEST(Complexes, CohomologyValidation)
{
    const long long N = 4;
    GroupPresentation q1 = trivial_pres(Q2, 1);
    BMatrix ok1 = scalar_mat(Q2, 1, BElem::one(Q2, N), N);

    EXPECT_THROW(cohomology(q1, {ok1}, 0, CoeffChoice::Continuous), config_error);
    EXPECT_THROW(cohomology(q1, {}, N, CoeffChoice::Continuous), config_error);
    EXPECT_THROW(cohomology(q1, {scalar_mat(Q2, 1, BElem::uniformizer(Q2, N), N)}, N,
                            CoeffChoice::Continuous),
                 config_error);  // determinant not a unit
    EXPECT_THROW(cohomology(q1, {scalar_mat(Q2, 1, BElem::one(Q2, N).shift(-1), N)}, N,
                            CoeffChoice::Continuous),
                 config_error);  // not integral
    EXPECT_THROW(cohomology(q1, {scalar_mat(Q2, 1, BElem::one(Q2, 2), 2)}, N,
                            CoeffChoice::Continuous),
                 config_error);  // not enough precision
    EXPECT_THROW(cohomology(q1, {scalar_mat(L2, 1, BElem::one(L2, N), N)}, N,
                            CoeffChoice::Continuous),
                 config_error);  // wrong coefficient ring

    /* noncommuting generator matrices on a commuting group */
    {
        GroupPresentation q2 = trivial_pres(Q2, 2);
        BElem z = BElem::zero(Q2, N), o = BElem::one(Q2, N);
        BMatrix M1 = {{o, o}, {z, o}};
        BMatrix M2 = {{o, z}, {o, o}};
        EXPECT_THROW(cohomology(q2, {M1, M2}, N, CoeffChoice::Continuous), config_error);
    }
    /* nonabelian presentations and ranks beyond the table */
    {
        GroupPresentation nonab = GroupPresentation::semidirect_rank2(
            SemilinearAction::trivial(Q2, 2), 40);
        BMatrix M = scalar_mat(Q2, 1, BElem::one(Q2, N), N);
        EXPECT_THROW(cohomology(nonab, {M, M}, N, CoeffChoice::Continuous), config_error);
        GroupPresentation q4 = trivial_pres(Q2, 4);
        EXPECT_THROW(cohomology(q4, {M, M, M, M}, N, CoeffChoice::Continuous), config_error);
    }
    /* semilinear actions over the pseudorigid ring are out of scope */
    {
        GroupPresentation tw = GroupPresentation::abelian(cyclotomic(O2, 1, {3}));
        BMatrix M = scalar_mat(O2, 1, BElem::one(O2, N), N);
        EXPECT_THROW(cohomology(tw, {M}, N, CoeffChoice::Continuous), config_error);
    }
}

TEST(Complexes, EulerCharacteristicZero)
{
    const long long N = 4;
    {
        /* commuting rank-2 shears over Z/2^N */
        GroupPresentation pres = trivial_pres(Q2, 2);
        BElem z = BElem::zero(Q2, N), o = BElem::one(Q2, N);
        BElem two = BElem::from_int(Q2, 2, N);
        BMatrix M1 = {{o, o}, {z, o}};
        BMatrix M2 = {{o, two}, {z, o}};
        CohomologyReport rep = cohomology(pres, {M1, M2}, N, CoeffChoice::Continuous);
        EXPECT_EQ(rep.euler, 0);
        EXPECT_EQ(rep.module_rank, 2);
        ASSERT_EQ(rep.degrees.size(), 3u);
    }
    {
        /* rank-2 module over F_2[[T]]/T^N, coefficient-linear */
        GroupPresentation pres = trivial_pres(L2, 2);
        BElem z = BElem::zero(L2, N), o = BElem::one(L2, N);
        BElem T = BElem::uniformizer(L2, N);
        BMatrix M1 = {{o, T}, {z, o}};
        BMatrix M2 = {{o + T, z}, {z, o + T}};
        CohomologyReport rep = cohomology(pres, {M1, M2}, N, CoeffChoice::Continuous);
        EXPECT_EQ(rep.kind, CohomKind::ChainRingDivisors);
        EXPECT_EQ(rep.euler, 0);
    }
}

TEST(Complexes, WedgePatternRouteIndependent)
{
    GroupPresentation pres = trivial_pres(Q2, 3);
    IwasawaAlgebra IA(pres, PrecisionCtx(3, 1));
    DistAlgebra DA(pres, 0, 3, 1);
    WedgePattern a = wedge_pattern(lazard_serre(IA));
    WedgePattern b = wedge_pattern(kohlhaase(DA));
    ASSERT_EQ(a.d, b.d);
    for (int j = 0; j <= a.d; ++j)
        EXPECT_EQ(a.basis[static_cast<std::size_t>(j)], b.basis[static_cast<std::size_t>(j)]);
    for (int j = 1; j <= a.d; ++j) {
        const auto& ea = a.diff[static_cast<std::size_t>(j)];
        const auto& eb = b.diff[static_cast<std::size_t>(j)];
        ASSERT_EQ(ea.size(), eb.size()) << "degree " << j;
        for (std::size_t k = 0; k < ea.size(); ++k) {
            EXPECT_EQ(ea[k].row, eb[k].row);
            EXPECT_EQ(ea[k].col, eb[k].col);
            EXPECT_EQ(ea[k].gen, eb[k].gen);
            EXPECT_EQ(ea[k].sign, eb[k].sign);
        }
    }
}

}  // namespace
