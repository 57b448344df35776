#include <ffs/inseparable.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace ffsel;

namespace {

Field F2() { return make_field(2, 1).get(); }
Field F3() { return make_field(3, 1).get(); }
BiPoly P(Field F, const char *s) { return parse_bipoly(F, s); }

double rootless_fraction(const BiPoly &f, int lo, int hi, int *n_out)
{
    int n = 0, z = 0;
    for (int k = lo; k <= hi; k++)
        for (auto &ell : irreducibles_of_degree(f.F, k)) {
            n++;
            z += count_roots_mod(f, ell) == 0;
        }
    *n_out = n;
    return (double)z / n;
}

} // namespace

TEST(Insep, Decomposition)
{
    auto I = insep_info(P(F3(), "x^6+t"));
    EXPECT_EQ(I.dins, 3);
    EXPECT_EQ(I.fhat, P(F3(), "x^2+t"));
    EXPECT_EQ(I.galois_order_heuristic, 2);
    EXPECT_EQ(I.factor_base_factor, 2);
    EXPECT_EQ(insep_info(P(F2(), "x^5+x+t^2+1")).dins, 1);
    auto J = insep_info(P(F2(), "x^8+t x^4+t^3+1"));
    EXPECT_EQ(J.dins, 4);
    EXPECT_EQ(J.fhat, P(F2(), "x^2+t x+t^3+1"));
}

TEST(Insep, FreeRelationExamples)
{
    BiPoly f = P(F3(), "x^6+t");
    /* t = -c mod t + c: free iff x^2 - c splits over F_3 */
    EXPECT_TRUE(is_free_relation(f, P(F3(), "t+1").c[0]));
    EXPECT_FALSE(is_free_relation(f, P(F3(), "t+2").c[0]));
    EXPECT_FALSE(is_free_relation(f, P(F3(), "t").c[0]));   /* divides Disc(fhat) */

    /* linear fhat: every ell not dividing f_d */
    BiPoly c = P(F2(), "t x^4+t^3+1");
    for (int k = 1; k <= 6; k++)
        for (auto &ell : irreducibles_of_degree(F2(), k))
            EXPECT_EQ(is_free_relation(c, ell), !(c.lc() % ell).is_zero()) << ell;
}

TEST(Insep, CensusCharThree)
{
    auto c = free_relation_census(P(F3(), "x^6+t"), 8, 3);
    EXPECT_EQ(c.total, 1318u);
    EXPECT_NEAR(c.chebotarev_estimate, c.total / 2.0, 1e-9);
    EXPECT_TRUE(c.in_band) << c.count << " not in [" << c.band_lo << ", " << c.band_hi << "]";
    double sd = std::sqrt(0.25 / c.total);
    EXPECT_NEAR(c.proportion, 0.5, 3 * sd);
    auto again = free_relation_census(P(F3(), "x^6+t"), 8, 1);
    EXPECT_EQ(again.count, c.count);
}

TEST(Insep, CensusGenericSextic)
{
    /* separable, and its rootless share matches S_6 (265/720 derangements) */
    BiPoly f = P(F2(), "x^6+x^5+t x^3+t^2+t+1");
    int n = 0;
    double z = rootless_fraction(f, 8, 13, &n);
    EXPECT_NEAR(z, 265.0 / 720, 3 * std::sqrt(0.25 / n));
    auto c = free_relation_census(f, 12, 2, true);
    EXPECT_EQ(c.total, 747u);
    EXPECT_EQ(c.rows.size(), 747u);
    EXPECT_NEAR(c.chebotarev_estimate, 747.0 / 720, 1e-9);
    EXPECT_TRUE(c.in_band) << c.count;
}

TEST(Insep, CensusQuarticInX2)
{
    BiPoly f = P(F2(), "x^8+t x^6+(t^2+1)x^2+t+1");
    auto I = insep_info(f);
    EXPECT_EQ(I.dins, 2);
    EXPECT_EQ(I.fhat.d(), 4);
    int n = 0;
    EXPECT_NEAR(rootless_fraction(I.fhat, 8, 13, &n), 9.0 / 24, 3 * std::sqrt(0.25 / n));
    auto c = free_relation_census(f, 12);
    EXPECT_TRUE(c.in_band) << c.count << " vs " << c.chebotarev_estimate;
}

TEST(Insep, CoppersmithAlpha)
{
    auto a = coppersmith_alpha(P(F2(), "x^4+t"), 20);
    EXPECT_TRUE(a.hypothesis_verified);
    EXPECT_EQ(a.exact, rational(2));
    auto b = coppersmith_alpha(P(F3(), "x^3+t+1"), 12);
    EXPECT_TRUE(b.hypothesis_verified);
    EXPECT_EQ(b.exact, rational(1));

    auto f0 = coppersmith_alpha(P(F2(), "x^4+t(t^9+t^7+t^6+t^3+t+1)"), 20);
    EXPECT_FALSE(f0.hypothesis_verified);
    ASSERT_TRUE(f0.witness.has_value());
    EXPECT_NEAR(f0.value, 1.27, 0.05);
    /* the witness really has a root mod ell^2 */
    UPoly m = *f0.witness * *f0.witness;
    bool found = false;
    BiPoly f = P(F2(), "x^4+t(t^9+t^7+t^6+t^3+t+1)");
    for (uint64_t code = 0; code < detail::ipow(2, m.deg()) && !found; code++)
        found = detail::eval_mod(f, UPoly::from_code(F2(), code), m).is_zero();
    EXPECT_TRUE(found);

    /* the general alpha agrees within the truncation */
    AlphaOptions o;
    o.b0 = 14;
    EXPECT_NEAR(alpha(P(F2(), "x^4+t"), o).value, 2.0, 1e-3);
    EXPECT_THROW(coppersmith_alpha(P(F2(), "x^4+t x^2+1"), 4), std::invalid_argument);
    EXPECT_FALSE(coppersmith_alpha(P(F2(), "x+t"), 4).hypothesis_verified);
}

TEST(Insep, LiftCriterionMatchesEnumeration)
{
    for (const char *ls : {"t", "t+1", "t^2+t+1", "t^3+t+1"}) {
        UPoly ell = P(F2(), ls).c[0];
        UPoly m = ell * ell;
        uint64_t n = detail::ipow(2, m.deg());
        for (uint64_t c0 = 0; c0 < n; c0++)
            for (int d : {2, 4}) {
                UPoly f0 = UPoly::from_code(F2(), c0), one = UPoly::one(F2());
                BiPoly f(F2());
                f.c.assign(d + 1, UPoly(F2()));
                f.c[d] = one;
                f.c[0] = f0;
                bool brute = false;
                for (uint64_t r = 0; r < n && !brute; r++)
                    brute = detail::eval_mod(f, UPoly::from_code(F2(), r), m).is_zero();
                EXPECT_EQ(detail::lifts_mod_ell2(one, f0, ell), brute) << ls << " " << f0 << " " << d;
            }
    }
}

TEST(Insep, UnitGroupObstruction)
{
    /* among units mod ell^2, exactly a 1/N share are d-th powers */
    for (const char *ls : {"t+1", "t^2+t+1", "t^3+t^2+1"}) {
        UPoly ell = P(F2(), ls).c[0];
        UPoly m = ell * ell;
        uint64_t n = detail::ipow(2, m.deg()), N = detail::ipow(2, ell.deg());
        std::set<uint64_t> powers;
        for (uint64_t r = 0; r < n; r++) {
            UPoly x = UPoly::from_code(F2(), r);
            if ((x % ell).is_zero()) continue;
            UPoly y = powmod(x, bigint(4), m);
            powers.insert(y.code());
        }
        uint64_t units = n - n / N;
        EXPECT_EQ(powers.size() * N, units) << ls;
    }
    /* and sampled over random linear fhat for one ell */
    UPoly ell = P(F2(), "t^2+t+1").c[0], m = ell * ell;
    std::mt19937_64 rng(3);
    int units = 0, lifts = 0;
    for (int it = 0; it < 4000; it++) {
        UPoly c = UPoly::from_code(F2(), rng() % 16);
        if ((c % ell).is_zero()) continue;
        units++;
        lifts += detail::lifts_mod_ell2(UPoly::one(F2()), c, ell);
    }
    EXPECT_NEAR((double)lifts / units, 0.25, 3 * std::sqrt(0.25 * 0.75 / units));
}

TEST(Insep, RootBijection)
{
    struct Case {
        Field F;
        const char *f;
        int beta;
    };
    for (auto &cs : std::vector<Case>{{F3(), "x^6+t", 4}, {F3(), "t x^6+(t+1)x^3+t^2", 4},
                                      {F2(), "x^8+t x^6+(t^2+1)x^2+t+1", 7}}) {
        BiPoly f = P(cs.F, cs.f);
        auto I = insep_info(f);
        for (auto &ell : detail::canonical_ells(cs.F, cs.beta, -1)) {
            if ((f.lc() % ell).is_zero()) continue;
            auto ys = affine_roots_mod(I.fhat, ell);
            EXPECT_EQ((int)ys.size(), count_roots_mod(f, ell)) << cs.f << " " << ell;
            std::set<uint64_t> rs;
            for (auto &y : ys) {
                UPoly r = dth_root_mod(y, I.dins, ell);
                EXPECT_EQ(powmod(r, bigint(I.dins), ell), y % ell);
                EXPECT_TRUE(detail::eval_mod(f, r, ell).is_zero());
                rs.insert(r.code());
            }
            EXPECT_EQ(rs.size(), ys.size());
        }
    }
}

TEST(Insep, FactorBase)
{
    auto fb = factor_base_accounting(P(F3(), "x^6+t"), 6);
    EXPECT_EQ(fb.rational_side, 196u);
    EXPECT_EQ(fb.algebraic_side, fb.algebraic_fhat);
    EXPECT_LE(std::abs((double)fb.algebraic_side - (double)fb.rational_side), 3 * std::sqrt((double)fb.rational_side));
    auto lin = factor_base_accounting(P(F2(), "x+t^3"), 8);
    EXPECT_EQ(lin.algebraic_side, lin.rational_side);
    EXPECT_EQ(lin.free, lin.rational_side);
}
