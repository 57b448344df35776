#include <gtest/gtest.h>

#include "ffs/alpha.hpp"

#include <chrono>
#include <random>

using namespace ffsel;

namespace {

BiPoly rnd_bipoly(Field F, std::mt19937_64 &rng, int dx, int dt)
{
    BiPoly f(F);
    for (int i = 0; i <= dx; i++) {
        std::vector<elem> c(dt + 1);
        for (auto &x : c) x = (elem)(rng() % F->q);
        f.c.push_back(UPoly(F, c));
    }
    if (f.c.back().is_zero()) f.c.back() = UPoly::one(F);
    f.normalize();
    return f;
}

} // namespace

TEST(RootsMod, Examples)
{
    auto Fs = make_field(2, 1);
    Field F = Fs.get();
    BiPoly f = parse_bipoly(F, "x*(x-1)-(t^64-t)");
    auto r = roots_mod(f, parse_upoly(F, "t"));
    EXPECT_EQ(r.affine.size(), 2u);
    EXPECT_FALSE(r.projective);
    BiPoly g = parse_bipoly(F, "(t^3+t)x+t^2+t+1");
    for (uint64_t code : {2ull, 3ull, 7ull, 11ull}) EXPECT_EQ(roots_mod(g, UPoly::from_code(F, code)).count(), 1);
    BiPoly h = parse_bipoly(F, "x^2+t");
    auto rh = roots_mod(h, parse_upoly(F, "t+1"));
    ASSERT_EQ(rh.affine.size(), 1u);
    EXPECT_FALSE(rh.affine_simple[0]);
}

TEST(RootSet, LinearAndCoherence)
{
    auto Fs = make_field(2, 1);
    Field F = Fs.get();
    BiPoly g = parse_bipoly(F, "x+t^3+1");
    auto rs = lift_root_set(g, parse_upoly(F, "t"), 5);
    ASSERT_EQ(rs.entries.size(), 5u);
    for (int k = 1; k <= 5; k++) {
        EXPECT_EQ(rs.entries[k - 1].k, k);
        EXPECT_TRUE(rs.entries[k - 1].lifts);
    }
    /* x^3 + t^2 x + 1, ell = t: compare with a scan of all residues */
    BiPoly f = parse_bipoly(F, "x^3+t^2x+1");
    UPoly ell = parse_upoly(F, "t");
    auto rf = lift_root_set(f, ell, 6);
    for (int k = 1; k <= 6; k++) {
        UPoly lk = pow(ell, k);
        int brute = 0;
        for (uint64_t c = 0; c < (1ull << k); c++)
            if (detail::eval_mod(f, UPoly::from_code(F, c), lk).is_zero()) brute++;
        int listed = 0;
        for (auto &e : rf.entries)
            if (e.k == k && e.kind == RootKind::affine) listed++;
        EXPECT_EQ(listed, brute) << k;
    }
    for (auto &e : rf.entries) {
        EXPECT_LT(e.r.deg(), e.k * ell.deg());
        EXPECT_TRUE(detail::eval_mod(f, e.r, pow(ell, e.k)).is_zero());
    }
}

TEST(AlphaEll, ClosedForms)
{
    auto Fs = make_field(2, 1);
    Field F = Fs.get();
    UPoly t = parse_upoly(F, "t");
    /* linear: deg ell/(N^2-1) */
    EXPECT_EQ(alpha_ell_exact(parse_bipoly(F, "x+t^5+t+1"), t, 20), rational(1, 3));
    /* two simple roots mod t */
    BiPoly f = parse_bipoly(F, "x*(x-1)-(t^64-t)");
    EXPECT_EQ(alpha_ell_exact(f, t, 20), rational(-1, 3));
    /* no roots */
    BiPoly g = parse_bipoly(F, "x^2+x+1");
    EXPECT_EQ(alpha_ell_exact(g, t, 20), rational(1));
    EXPECT_EQ(alpha_ell_exact(g, parse_upoly(F, "t^2+t+1"), 20), rational(2, 3) * (1 - rational(4, 5) * 2));
}

/* the local engine against explicit root sets, exactly */
TEST(AlphaEll, LocalEngineMatchesRootSets)
{
    std::mt19937_64 rng(17);
    for (auto [p, m] : std::vector<std::pair<uint32_t, uint32_t>>{{2, 1}, {3, 1}, {2, 2}}) {
        auto Fs = make_field(p, m);
        Field F = Fs.get();
        int checked = 0;
        for (int it = 0; it < 40; it++) {
            BiPoly f = rnd_bipoly(F, rng, 1 + rng() % 4, rng() % 4);
            /* force some structure: squares, inseparable forms */
            if (it % 5 == 1) f = f * f;
            if (it % 5 == 2) f = compose_xpow(f, (int)p);
            if (it % 5 == 3) f = scale(f, parse_upoly(F, "t^2"));
            for (int dl = 1; dl <= 2; dl++)
                for (auto &ell : irreducibles_of_degree(F, dl)) {
                    if (ell.deg() * std::log2((double)F->q) > 4) continue;
                    int kmax = 6;
                    RootSet rs;
                    try {
                        rs = lift_root_set(f, ell, kmax, 200000);
                    } catch (const resource_error &) {
                        continue;
                    }
                    EXPECT_EQ(alpha_ell_exact(f, ell, kmax), alpha_from_root_set(rs))
                        << "q=" << F->q << " f=" << pretty(f) << " ell=" << pretty(ell);
                    EXPECT_EQ(alpha_ell_exact(f, ell, kmax, true), alpha_from_root_set(rs, true));
                    checked++;
                }
        }
        EXPECT_GT(checked, 40);
    }
}

/* table path (theta in a Zech field) against the explicit path over all ell */
TEST(Alpha, TablePathMatchesExplicitPath)
{
    std::mt19937_64 rng(23);
    for (auto [p, m, b0] : std::vector<std::tuple<uint32_t, uint32_t, int>>{{2, 1, 7}, {3, 1, 4}, {2, 2, 3}}) {
        auto Fs = make_field(p, m);
        Field F = Fs.get();
        for (int it = 0; it < 6; it++) {
            BiPoly f = rnd_bipoly(F, rng, 2 + rng() % 4, 1 + rng() % 3);
            if (it == 3) f = compose_xpow(rnd_bipoly(F, rng, 2, 2), (int)p);
            AlphaOptions a;
            a.b0 = b0;
            a.kmax = 8;
            AlphaOptions b = a;
            b.max_ell = 1 << 30;
            AlphaOptions c = a;
            c.jobs = 3;
            auto ra = alpha(f, a), rb = alpha(f, b), rc = alpha(f, c);
            EXPECT_EQ(ra.exact, rb.exact) << pretty(f);
            EXPECT_EQ(ra.exact, rc.exact);
            EXPECT_EQ(ra.ell_count, rb.ell_count);
        }
    }
}

TEST(Alpha, LinearIsOneOverQMinusOne)
{
    for (auto [p, m] : std::vector<std::pair<uint32_t, uint32_t>>{{2, 1}, {3, 1}, {2, 2}}) {
        auto Fs = make_field(p, m);
        Field F = Fs.get();
        BiPoly g = parse_bipoly(F, "x+t^7+t+1");
        AlphaOptions o;
        o.b0 = 20;
        auto r = alpha(g, o);
        EXPECT_NEAR(r.value, alpha_linear(F), 1e-3);
        /* content t: the ell = t term is computed locally */
        BiPoly h = parse_bipoly(F, "t*x+t^2");
        auto rh = alpha(h, o);
        UPoly tt = parse_upoly(F, "t");
        double want = r.value - 1.0 / (F->q * F->q - 1) + alpha_ell(h, tt, r.kmax);
        EXPECT_NEAR(rh.value, want, 1e-12);
    }
    EXPECT_DOUBLE_EQ(alpha_linear(make_field(3, 6).get()), 1.0 / 728);
}

TEST(Alpha, TailBoundExample)
{
    EXPECT_NEAR(alpha_tail_bound(2, 19, 6, 15), 0.567, 0.01);
    EXPECT_NEAR(alpha_tail_bound(2, 19, 6, 20), 0.097, 0.005);
    double prev = 1e9;
    for (int b = 10; b < 60; b += 5) {
        double v = alpha_tail_bound(2, 19, 6, b);
        EXPECT_LT(v, prev);
        prev = v;
    }
    EXPECT_LT(prev, 1e-6);
    auto Fs = make_field(2, 1);
    EXPECT_THROW(alpha_tail_bound(parse_bipoly(Fs.get(), "x^2+t^9+t"), 1), std::invalid_argument);
}

TEST(Oracle, ValuationAverage)
{
    std::mt19937_64 rng(31);
    auto Fs = make_field(2, 1);
    Field F = Fs.get();
    std::vector<UPoly> ells{parse_upoly(F, "t"), parse_upoly(F, "t+1"), parse_upoly(F, "t^2+t+1")};
    for (int it = 0; it < 20; it++) {
        BiPoly f = rnd_bipoly(F, rng, 1 + rng() % 4, 3);
        for (auto &ell : ells) {
            int N = 8 * ell.deg();
            double a = valuation_average_oracle(f, ell, N);
            double want = to_double(alpha_ell_exact(f, ell, 40));
            double dl = ell.deg(), Nl = std::pow(2.0, dl);
            EXPECT_NEAR(dl / (Nl - 1) - dl * a, want, 0.02) << pretty(f) << " " << pretty(ell);
        }
    }
    /* no roots mod ell: average is zero */
    EXPECT_DOUBLE_EQ(valuation_average_oracle(parse_bipoly(F, "x^2+x+1"), ells[0], 6), 0.0);
}
