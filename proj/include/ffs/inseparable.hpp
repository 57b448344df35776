#pragma once
/* Inseparable f = fhat(x^d), d a power of the characteristic: free
 * relations, factor base counts and the Coppersmith alpha.
 *
 * x -> x^d is a bijection on every residue field, so f and fhat have the
 * same roots count modulo every ell, and f mod ell splits into linear
 * factors exactly when fhat does.
 */

#include "alpha.hpp"
#include "ext_table.hpp"

#include <thread>

namespace ffsel {

struct InsepInfo {
    int dins = 1;
    BiPoly fhat;
    double galois_order_heuristic = 1;   /* (deg fhat)! */
    double free_rel_proportion_est = 1;  /* 1 / (deg fhat)! */
    int factor_base_factor = 2;          /* both sides */
};

inline double factorial(int n)
{
    double r = 1;
    for (int i = 2; i <= n; i++) r *= i;
    return r;
}

inline InsepInfo insep_info(const BiPoly &f)
{
    SepDecomp sd = separability_decompose(f);
    InsepInfo I;
    I.dins = sd.dins;
    I.fhat = sd.fhat;
    I.galois_order_heuristic = factorial(sd.fhat.d());
    I.free_rel_proportion_est = 1 / I.galois_order_heuristic;
    return I;
}

namespace detail {

using ResOps = RPolyOps<PolyResidueField>;

inline ResOps::P reduce_mod(const BiPoly &f, const UPoly &ell)
{
    ResOps::P r;
    for (auto &c : f.c) r.push_back(c % ell);
    while (!r.empty() && r.back().is_zero()) r.pop_back();
    return r;
}

/* monic irreducibles of degree 1..beta, canonical order */
inline std::vector<UPoly> ells_upto(Field F, int beta) { return detail::canonical_ells(F, beta, -1); }

} // namespace detail

/* number of distinct roots of f modulo ell, with outputs for each */
inline std::vector<UPoly> affine_roots_mod(const BiPoly &f, const UPoly &ell)
{
    PolyResidueField K(ell);
    detail::ResOps ops(K);
    auto h = detail::reduce_mod(f, ell);
    if (ops.deg(h) < 1) {
        if (h.empty()) throw std::invalid_argument("f vanishes modulo ell");
        return {};
    }
    return ops.roots(h);
}

inline int count_roots_mod(const BiPoly &f, const UPoly &ell)
{
    PolyResidueField K(ell);
    detail::ResOps ops(K);
    auto h = detail::reduce_mod(f, ell);
    if (ops.deg(h) < 1) {
        if (h.empty()) throw std::invalid_argument("f vanishes modulo ell");
        return 0;
    }
    return ops.count_roots(h);
}

/* the d-th root in F_q[t]/ell: y^(d^-1 mod N-1) */
inline UPoly dth_root_mod(const UPoly &y, int d, const UPoly &ell)
{
    if ((y % ell).is_zero()) return UPoly(y.F);
    bigint N = boost::multiprecision::pow(bigint(y.F->q), ell.deg());
    bigint m = N - 1, a = d % m, x0 = 0, x1 = 1, b = m;
    /* inverse of d modulo N - 1 */
    while (a != 0) {
        bigint qq = b / a, t = b - qq * a;
        b = a;
        a = t;
        t = x0 - qq * x1;
        x0 = x1;
        x1 = t;
    }
    if (b != 1) throw std::invalid_argument("d not invertible modulo N - 1");
    bigint e = ((x0 % m) + m) % m;
    return powmod(y % ell, e, ell);
}

inline bool is_free_relation(const BiPoly &f, const UPoly &ell, const UPoly *disc_fhat = nullptr)
{
    SepDecomp sd = separability_decompose(f);
    const BiPoly &fh = sd.fhat;
    if ((f.lc() % ell).is_zero()) return false;
    UPoly D = disc_fhat ? *disc_fhat : (fh.d() >= 1 ? discriminant_x(fh) : UPoly::one(f.F));
    if (fh.d() >= 2 && (D % ell).is_zero()) return false;
    return count_roots_mod(fh, ell) == fh.d();
}

struct CensusRow {
    UPoly ell;
    bool splits = false;
    bool free = false;
};

struct FreeCensus {
    uint64_t count = 0;
    uint64_t total = 0;
    double proportion = 0;
    double chebotarev_estimate = 0;   /* total / (deg fhat)! */
    double band_lo = 0, band_hi = 0;  /* three binomial standard deviations */
    bool in_band = false;
    std::vector<CensusRow> rows;
};

inline FreeCensus free_relation_census(const BiPoly &f, int beta, int jobs = 1, bool keep_rows = false)
{
    InsepInfo I = insep_info(f);
    const BiPoly &fh = I.fhat;
    UPoly D = fh.d() >= 2 ? discriminant_x(fh) : UPoly::one(f.F);
    auto ells = detail::ells_upto(f.F, beta);
    std::vector<CensusRow> rows(ells.size());
    auto work = [&](size_t lo, size_t hi) {
        for (size_t i = lo; i < hi; i++) {
            CensusRow &r = rows[i];
            r.ell = ells[i];
            bool bad = (f.lc() % r.ell).is_zero() || (fh.d() >= 2 && (D % r.ell).is_zero());
            r.splits = !(f.lc() % r.ell).is_zero() && count_roots_mod(fh, r.ell) == fh.d();
            r.free = r.splits && !bad;
        }
    };
    jobs = std::max(1, jobs);
    if (jobs == 1 || ells.size() < 64) {
        work(0, ells.size());
    } else {
        std::vector<std::thread> th;
        size_t chunk = (ells.size() + jobs - 1) / jobs;
        for (int j = 0; j < jobs; j++) {
            size_t lo = j * chunk, hi = std::min(ells.size(), lo + chunk);
            if (lo < hi) th.emplace_back(work, lo, hi);
        }
        for (auto &t : th) t.join();
    }
    FreeCensus c;
    c.total = ells.size();
    for (auto &r : rows) c.count += r.free;
    c.proportion = c.total ? (double)c.count / c.total : 0;
    double p0 = I.free_rel_proportion_est;
    c.chebotarev_estimate = c.total * p0;
    double sd = std::sqrt(c.total * p0 * (1 - p0));
    c.band_lo = c.chebotarev_estimate - 3 * sd;
    c.band_hi = c.chebotarev_estimate + 3 * sd;
    c.in_band = c.count >= c.band_lo && c.count <= c.band_hi;
    if (keep_rows) c.rows = std::move(rows);
    return c;
}

struct FactorBaseCount {
    uint64_t rational_side = 0;   /* monic irreducibles of degree <= beta */
    uint64_t algebraic_side = 0;  /* pairs (ell, r), f(r) = 0 mod ell */
    uint64_t algebraic_fhat = 0;  /* the same for fhat */
    uint64_t free = 0;
};

inline FactorBaseCount factor_base_accounting(const BiPoly &f, int beta)
{
    InsepInfo I = insep_info(f);
    FactorBaseCount c;
    for (auto &ell : detail::ells_upto(f.F, beta)) {
        c.rational_side++;
        c.algebraic_side += count_roots_mod(f, ell);
        c.algebraic_fhat += count_roots_mod(I.fhat, ell);
    }
    c.free = free_relation_census(f, beta).count;
    return c;
}

struct CoppersmithAlpha {
    double value = 0;
    rational exact = 0;
    bool hypothesis_verified = false;
    std::optional<UPoly> witness;   /* an ell where some root lifts to ell^2 */
    AlphaResult general;            /* filled when the hypothesis fails */
};

namespace detail {

/* does f1 x^d + f0 have a root modulo ell^2 (either side of P^1)?
 * Writing w = -f0/f1, a root exists iff w is 0 or a Teichmueller unit
 * mod ell^2, i.e. w^N = w */
inline bool lifts_mod_ell2(const UPoly &f1, const UPoly &f0, const UPoly &ell)
{
    UPoly m = ell * ell;
    bigint N = boost::multiprecision::pow(bigint(ell.F->q), ell.deg());
    auto side = [&](const UPoly &lead, const UPoly &tail) {
        if ((lead % ell).is_zero()) return false;
        UPoly w = (-(tail * inv_mod(lead % m, m))) % m;
        return powmod(w, N, m) == w;
    };
    if ((f1 % ell).is_zero() && (f0 % ell).is_zero()) return true;   /* f = 0 mod ell */
    return side(f1, f0) || side(f0, f1);
}

} // namespace detail

inline CoppersmithAlpha coppersmith_alpha(const BiPoly &f, int b0, const AlphaOptions &fallback = {})
{
    SepDecomp sd = separability_decompose(f);
    if (sd.fhat.d() != 1) throw std::invalid_argument("coppersmith_alpha: fhat must be linear");
    const UPoly &f1 = sd.fhat.c[1], &f0 = sd.fhat.c[0];
    CoppersmithAlpha r;
    r.hypothesis_verified = sd.dins > 1;
    if (sd.dins == 1) r.witness = UPoly::monomial(f.F, 1);
    for (int k = 1; k <= b0 && r.hypothesis_verified; k++)
        for (auto &ell : irreducibles_of_degree(f.F, k))
            if (detail::lifts_mod_ell2(f1, f0, ell)) {
                r.hypothesis_verified = false;
                r.witness = ell;
                break;
            }
    if (r.hypothesis_verified) {
        r.exact = rational(2, f.F->q - 1);
        r.value = to_double(r.exact);
        return r;
    }
    AlphaOptions o = fallback;
    o.b0 = b0;
    r.general = alpha(f, o);
    r.value = r.general.value;
    r.exact = r.general.exact;
    return r;
}

} // namespace ffsel
