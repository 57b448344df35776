#include <ffs/sieve.hpp>

#include <gtest/gtest.h>

#include <chrono>

using namespace ffsel;

namespace {

Field F2() { return make_field(2, 1).get(); }

std::vector<UPoly> ells_upto(Field F, int b)
{
    return detail::canonical_ells(F, b, -1);
}

/* every candidate and every ell of degree <= 4 against the direct value */
void check_range(const CandidateRange &rg, int kmax)
{
    auto ells = ells_upto(rg.F, 4);
    for (auto &ell : ells) {
        auto full = sieve_alpha_ell(rg, ell, kmax);
        auto aff = sieve_alpha_ell(rg, ell, kmax, true);
        ASSERT_EQ(full.size(), rg.size());
        int diffs = 0;
        for (uint64_t i = 0; i < rg.size(); i++) {
            BiPoly f = rg.candidate(i);
            if (f.d() < 1) continue;
            EllContext ctx = make_ell_context(f);
            double want = to_double(alpha_ell_exact(f, ell, kmax, false, ctx));
            ASSERT_NEAR(full[i], want, 1e-9) << "f = " << f << ", ell = " << ell;
            double want_aff = to_double(alpha_ell_exact(f, ell, kmax, true, ctx));
            ASSERT_NEAR(aff[i], want_aff, 1e-9) << "affine, f = " << f << ", ell = " << ell;
            bool lead_div = (f.lc() % ell).is_zero();
            EXPECT_EQ(aff[i] != full[i], lead_div) << f << " mod " << ell;
            diffs += aff[i] != full[i];
        }
        if (rg.lead != Lead::monic && ell.deg() == 1 && ell.c[0] == 0) EXPECT_GT(diffs, 0);
    }
}

} // namespace

TEST(Range, IndexRoundTrip)
{
    CandidateRange rg(F2(), {1, 2, 0, 1}, Lead::nonzero);
    EXPECT_EQ(rg.size(), 4u * 8 * 2 * 3);
    for (uint64_t i = 0; i < rg.size(); i++) {
        BiPoly f = rg.candidate(i);
        EXPECT_EQ(rg.index_of(f).value(), i);
        EXPECT_FALSE(f.lc().is_zero());
    }
    BiPoly g = parse_bipoly(F2(), "x^3+t^3");
    EXPECT_FALSE(rg.index_of(g).has_value());
    CandidateRange all(F2(), {1, 1, 1, 1, 1, 1});
    EXPECT_EQ(all.size(), 1u << 12);
    EXPECT_EQ(CandidateRange(F2(), {1, -1}, Lead::monic).size(), 0u);
    EXPECT_THROW(CandidateRange(F2(), {40, 40, 40}), resource_error);
}

TEST(Sieve, MatchesDirectDegree4)
{
    check_range(CandidateRange(F2(), {2, 2, 2, 1, 1}, Lead::nonzero), 8);
}

TEST(Sieve, MatchesDirectDegree5AllTuples)
{
    /* every (f_0..f_5) with deg_t f_i <= 1: 2^12 tuples */
    CandidateRange rg(F2(), {1, 1, 1, 1, 1, 1});
    EXPECT_EQ(rg.size(), 4096u);
    check_range(rg, 8);
}

TEST(Sieve, MatchesDirectDegree6)
{
    check_range(CandidateRange(F2(), {1, 1, 1, 1, 0, 0, 1}, Lead::nonzero), 8);
    check_range(CandidateRange(F2(), {3, 2, 1, 1, 0, 1, 0}, Lead::monic), 12);
}

TEST(Sieve, OddCharacteristic)
{
    Field F3 = make_field(3, 1).get();
    CandidateRange rg(F3, {1, 1, 0, 1}, Lead::nonzero);
    for (auto &ell : ells_upto(F3, 2)) {
        auto v = sieve_alpha_ell(rg, ell, 6);
        for (uint64_t i = 0; i < rg.size(); i++) {
            BiPoly f = rg.candidate(i);
            ASSERT_NEAR(v[i], alpha_ell(f, ell, 6), 1e-9) << f << " mod " << ell;
        }
    }
}

TEST(Sieve, LinearRange)
{
    CandidateRange rg(F2(), {5, 0}, Lead::monic);
    for (auto &ell : ells_upto(F2(), 3)) {
        double N = std::pow(2.0, ell.deg());
        auto v = sieve_alpha_ell(rg, ell, 10);
        for (double x : v) EXPECT_NEAR(x, ell.deg() / (N * N - 1), 1e-12);
    }
}

TEST(Sieve, SingleCandidate)
{
    CandidateRange rg(F2(), {-1, -1, 0}, Lead::monic);
    ASSERT_EQ(rg.size(), 1u);
    BiPoly f = rg.candidate(0);
    EXPECT_EQ(f, parse_bipoly(F2(), "x^2"));
    UPoly t = parse_upoly(F2(), "t");
    EXPECT_NEAR(sieve_alpha_ell(rg, t, 9)[0], alpha_ell(f, t, 9), 1e-12);
}

TEST(Sieve, EmptyRange)
{
    CandidateRange rg(F2(), {1, -1}, Lead::nonzero);
    EXPECT_EQ(rg.size(), 0u);
    EXPECT_TRUE(sieve_alpha(rg, 3).empty());
    EXPECT_TRUE(sieve_alpha_ell(rg, parse_upoly(F2(), "t"), 4).empty());
}

TEST(Sieve, WholeAlphaMatchesAlpha)
{
    CandidateRange rg(F2(), {1, 1, 1, 1, 1, 0}, Lead::monic);
    SieveOptions o;
    o.kmax = 8;
    auto v = sieve_alpha(rg, 6, o);
    AlphaOptions ao;
    ao.b0 = 6;
    ao.kmax = 8;
    for (uint64_t i = 0; i < rg.size(); i++) {
        BiPoly f = rg.candidate(i);
        ASSERT_NEAR(v[i], alpha(f, ao).value, 1e-9) << f;
    }
}

TEST(Sieve, ThreadsAreDeterministic)
{
    CandidateRange rg(F2(), {1, 1, 1, 1, 1, 1});
    SieveOptions a, b;
    a.kmax = b.kmax = 8;
    b.jobs = 3;
    auto x = sieve_alpha(rg, 4, a), y = sieve_alpha(rg, 4, b);
    EXPECT_EQ(x, y);
}

TEST(Sieve, MemoryGuard)
{
    CandidateRange rg(F2(), {9, 9, 9});
    SieveOptions o;
    o.memory_limit = 1 << 20;
    EXPECT_THROW(sieve_alpha(rg, 2, o), resource_error);
}

TEST(Sieve, ShardsResume)
{
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / ("ffs-shards-" + std::to_string(::getpid()));
    fs::remove_all(dir);
    CandidateRange rg(F2(), {1, 1, 1, 1, 0}, Lead::monic);
    SieveOptions o;
    o.kmax = 8;
    auto whole = sieve_alpha(rg, 4, o);
    auto r1 = sieve_alpha_sharded(rg, 4, o, dir, 3);
    EXPECT_EQ(r1.shards, 6u);
    EXPECT_EQ(r1.computed, 6u);
    fs::remove(dir / "shard-000004.bin");
    auto r2 = sieve_alpha_sharded(rg, 4, o, dir, 3);
    EXPECT_EQ(r2.computed, 1u);
    EXPECT_EQ(r2.reused, 5u);
    std::vector<double> joined;
    for (uint64_t id = 0; id < r2.shards; id++) {
        char name[32];
        std::snprintf(name, sizeof name, "shard-%06llu.bin", (unsigned long long)id);
        Shard s = read_shard(dir / name);
        EXPECT_EQ(s.header.first_index, joined.size());
        EXPECT_EQ(s.header.range_key, rg.key());
        joined.insert(joined.end(), s.values.begin(), s.values.end());
    }
    EXPECT_EQ(joined, whole);
    SieveOptions other = o;
    other.kmax = 9;
    EXPECT_THROW(sieve_alpha_sharded(rg, 4, other, dir, 3), config_error);
    fs::remove_all(dir);
}
