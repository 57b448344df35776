#include <gtest/gtest.h>

#include "ffs/upoly.hpp"

#include <random>
#include <set>

using namespace ffsel;

TEST(Field, AxiomsSmallFields)
{
    for (auto [p, m] : std::vector<std::pair<uint32_t, uint32_t>>{{2, 1}, {2, 3}, {3, 1}, {3, 2}, {5, 2}, {2, 8}, {7, 1}}) {
        auto F = make_field(p, m);
        uint32_t q = F->q;
        for (elem a = 0; a < q; a++) {
            EXPECT_EQ(F->add(a, F->neg(a)), 0u);
            EXPECT_EQ(F->mul(a, 1), a);
            if (a) EXPECT_EQ(F->mul(a, F->inv(a)), 1u);
            for (elem b = 0; b < q; b += 1 + q / 17) {
                EXPECT_EQ(F->mul(a, b), F->mul_slow(a, b));
                EXPECT_EQ(F->add(a, b), F->add(b, a));
            }
        }
        /* Frobenius is additive */
        for (elem a = 0; a < q; a++)
            for (elem b = 0; b < q; b += 3)
                EXPECT_EQ(F->frob(F->add(a, b)), F->add(F->frob(a), F->frob(b)));
    }
}

TEST(Field, InterningAndErrors)
{
    auto a = make_field(3, 2), b = make_field(3, 2);
    EXPECT_EQ(a.get(), b.get());
    EXPECT_THROW(make_field(4, 1), config_error);
    EXPECT_THROW(make_field(2, 17), config_error);
    EXPECT_THROW(make_field(2, 2, std::vector<uint32_t>{1, 0, 1}), config_error);   /* (t+1)^2 */
    EXPECT_NO_THROW(make_field(2, 2, std::vector<uint32_t>{1, 1, 1}));
}

TEST(Field, CanonicalModulusOfF729)
{
    auto F = make_field(3, 6);
    /* least monic irreducible sextic over F_3 under the code order */
    std::vector<uint32_t> want;
    for (uint64_t code = 0;; code++) {
        std::vector<uint32_t> f(7);
        uint64_t c = code;
        for (int i = 0; i < 6; i++) {
            f[i] = c % 3;
            c /= 3;
        }
        f[6] = 1;
        auto Fp = make_field(3, 1);
        UPoly u(Fp.get(), std::vector<elem>(f.begin(), f.end()));
        if (is_irreducible(u)) {
            want = f;
            break;
        }
    }
    EXPECT_EQ(F->modulus, want);
}

TEST(UPoly, DivisionAndGcd)
{
    auto F = make_field(3, 1);
    std::mt19937_64 rng(7);
    for (int it = 0; it < 200; it++) {
        auto rnd = [&](int d) {
            std::vector<elem> c(d + 1);
            for (auto &x : c) x = rng() % 3;
            c[d] = 1 + rng() % 2;
            return UPoly(F.get(), c);
        };
        UPoly a = rnd(rng() % 12), b = rnd(1 + rng() % 6), c = rnd(rng() % 4);
        auto [qq, rr] = divmod(a, b);
        EXPECT_EQ(qq * b + rr, a);
        EXPECT_LT(rr.deg(), b.deg());
        UPoly g = gcd(a * c, b * c);
        EXPECT_TRUE((g % monic(c)).is_zero());
        UPoly u, v;
        UPoly g2 = xgcd(a, b, u, v);
        EXPECT_EQ(u * a + v * b, g2);
    }
}

TEST(UPoly, IrreducibleCountsMatchMoebius)
{
    for (auto [p, m, kmax] : std::vector<std::tuple<uint32_t, uint32_t, int>>{{2, 1, 14}, {3, 1, 8}, {2, 2, 6}, {5, 1, 5}}) {
        auto F = make_field(p, m);
        for (int k = 1; k <= kmax; k++) {
            auto codes = irreducible_codes(F.get(), k);
            EXPECT_EQ(bigint(codes->size()), count_irreducibles(F.get(), k)) << "q=" << F->q << " k=" << k;
            EXPECT_TRUE(std::is_sorted(codes->begin(), codes->end()));
        }
    }
}

TEST(UPoly, SieveAgreesWithRabin)
{
    auto F = make_field(2, 1);
    for (int k = 1; k <= 10; k++) {
        std::set<uint64_t> s;
        for (auto c : *irreducible_codes(F.get(), k)) s.insert(c);
        for (uint64_t c = 1ull << k; c < (2ull << k); c++)
            EXPECT_EQ(s.count(c) == 1, is_irreducible(UPoly::from_code(F.get(), c))) << c;
    }
}

TEST(UPoly, DdfProfile)
{
    auto F = make_field(2, 1);
    Field f = F.get();
    /* t (t+1) (t^2+t+1) (t^3+t+1)^2 (t^5+t^2+1) */
    UPoly a = UPoly::from_code(f, 2) * UPoly::from_code(f, 3) * UPoly::from_code(f, 7) *
              pow(UPoly::from_code(f, 11), 2) * UPoly::from_code(f, 37);
    auto prof = ddf_profile(a);
    std::vector<std::pair<int, int>> want{{1, 2}, {2, 1}, {3, 1}, {5, 1}};
    EXPECT_EQ(prof, want);
    EXPECT_EQ(max_irreducible_factor_degree(a), 5);
    EXPECT_EQ(factors_of_degree(a, 1), UPoly::from_code(f, 6));
    EXPECT_EQ(factors_of_degree(a, 3), UPoly::from_code(f, 11));
    EXPECT_EQ(valuation(a, UPoly::from_code(f, 11)), 2);
}

TEST(UPoly, TextForms)
{
    auto F2 = make_field(2, 1);
    UPoly a = UPoly::from_code(F2.get(), 0x152a);
    EXPECT_EQ(to_hex(a), "0x152a");
    auto F3 = make_field(3, 1);
    UPoly b(F3.get(), {1, 1, 0, 2});
    EXPECT_EQ(pretty(b), "2*t^3+t+1");
    EXPECT_EQ(to_commas(b), "1,1,0,2");
}
