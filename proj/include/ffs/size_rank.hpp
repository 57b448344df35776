#pragma once
/* Size property and ranking: sigma, epsilon, Dickman rho, Murphy's E.
 *
 * E never enumerates pairs.  A cell (da, db) of the domain holds
 * (q-1)^2 q^(da+db) pairs; at deg(a/b) = da - db every kept Laurent root r
 * is matched with probability q^-N_r/(q-1), which moves that mass from the
 * degree of its nearest kept truncation down by gamma.  Summing these
 * differences gives the expected rho of the norm per cell.  Coprime pairs
 * are counted by Moebius inversion over the gcd.
 */

#include "laurent.hpp"
#include "sieve.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <array>
#include <cstdlib>
#include <mutex>

namespace ffsel {

struct SieveDomain {
    double e = 0;
    int s = 0;

    SieveDomain(double e_, int s_) : e(e_), s(s_)
    {
        if (std::floor(2 * e) != 2 * e) throw config_error("sieve parameter e must be a half-integer");
        if (A() < 0 || B() < 0) throw config_error("empty sieve domain for e = " + fmt_e() + ", s = " + std::to_string(s));
    }
    int A() const { return (int)std::floor(e + s / 2.0); }
    int B() const { return (int)std::floor(e - s / 2.0); }
    std::string fmt_e() const
    {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%g", e);
        return buf;
    }
};

/* the generic degree max_i(deg f_i + i da + (d - i) db) */
inline int generic_degree(const BiPoly &f, int da, int db)
{
    int d = f.d(), top = kDegNegInf;
    for (int i = 0; i <= d; i++)
        if (!f.c[i].is_zero()) top = std::max(top, f.c[i].deg() + i * da + (d - i) * db);
    return top;
}

inline rational sigma_exact(const BiPoly &f, int s, double e)
{
    if (f.is_zero()) throw std::invalid_argument("sigma: zero polynomial");
    SieveDomain D(e, s);
    int A = D.A(), B = D.B();
    bigint q = f.F->q;
    /* sum over cells of q^(da+db) * deg, scaled once at the end */
    rational tot = 0;
    bigint pa = 1;
    for (int da = 0; da <= A; da++, pa *= q) {
        bigint pb = pa;
        for (int db = 0; db <= B; db++, pb *= q) tot += rational(pb * generic_degree(f, da, db));
    }
    return tot * rational((q - 1) * (q - 1), boost::multiprecision::pow(q, A + B + 2));
}

inline double sigma(const BiPoly &f, int s, double e) { return to_double(sigma_exact(f, s, e)); }

/* ---- Dickman rho ----------------------------------------------------- */

namespace detail {

/* rho on [k, k+1] as a power series in y = u - (k + 1/2); the nearest
 * singularity of the continued piece is at u = k - 1, three half-widths
 * away.  Errors carry over from piece to piece as absolute errors while rho
 * itself falls off like u^-u, so the table is built in 100 digits and only
 * stored as doubles */
struct RhoTable {
    static constexpr int kPieces = 48;
    static constexpr int kTerms = 160;
    static constexpr int kStored = 60;
    std::vector<std::array<double, kStored + 1>> piece;

    void build()
    {
        using big = boost::multiprecision::cpp_bin_float_100;
        std::vector<big> b(kTerms + 1), a(kTerms + 1);
        b[0] = 1;
        piece.assign(kPieces, {});
        piece[0][0] = 1.0;
        for (int k = 1; k < kPieces; k++) {
            big c = big(k) + big(0.5);
            a[0] = 0;
            for (int i = 0; i < kTerms; i++) a[i + 1] = -(b[i] + i * a[i]) / (c * (i + 1));
            /* continuity at u = k */
            big left = 0, right = 0;
            for (int i = kTerms; i >= 0; i--) {
                left = left * big(0.5) + b[i];
                right = right * big(-0.5) + a[i];
            }
            a[0] = left - right;
            for (int i = 0; i <= kStored; i++) piece[k][i] = a[i].convert_to<double>();
            std::swap(a, b);
        }
    }
    static double horner(const std::array<double, kStored + 1> &a, double y)
    {
        double v = 0;
        for (int i = kStored; i >= 0; i--) v = v * y + a[i];
        return v;
    }
    std::string serialize() const
    {
        std::string s = "FFSRHO01";
        put_u32(s, kPieces);
        put_u32(s, kStored);
        for (auto &p : piece)
            for (double x : p) {
                uint64_t u;
                std::memcpy(&u, &x, 8);
                put_u64(s, u);
            }
        return s;
    }
    bool load(const std::string &s)
    {
        size_t need = 16 + (size_t)kPieces * (kStored + 1) * 8;
        if (s.size() != need || s.compare(0, 8, "FFSRHO01") != 0) return false;
        size_t pos = 8;
        if (get_le(s, pos, 4) != (uint64_t)kPieces || get_le(s, pos, 4) != (uint64_t)kStored) return false;
        piece.assign(kPieces, {});
        for (auto &p : piece)
            for (double &x : p) {
                uint64_t u = get_le(s, pos, 8);
                std::memcpy(&x, &u, 8);
            }
        return true;
    }
};

inline std::filesystem::path rho_cache_path()
{
    const char *dir = std::getenv("FFS_POLYSELECT_CACHE");
    if (!dir || !*dir) return {};
    return std::filesystem::path(dir) / "dickman-rho-v1.bin";
}

inline const RhoTable &rho_table()
{
    static RhoTable T;
    static std::once_flag once;
    std::call_once(once, [] {
        auto p = rho_cache_path();
        std::error_code ec;
        if (!p.empty() && std::filesystem::exists(p, ec)) {
            try {
                if (T.load(read_file(p))) return;
            } catch (const std::exception &) {
            }
        }
        T.build();
        if (!p.empty()) {
            try {
                std::filesystem::create_directories(p.parent_path(), ec);
                write_atomic(p, T.serialize());
            } catch (const std::exception &) {
                /* a read-only cache is not an error */
            }
        }
    });
    return T;
}

/* rho with rho = 1 for every u <= 1, including negative arguments that
 * come out of degree plus a negative alpha */
inline double rho_clamped(double u)
{
    if (u <= 1) return 1.0;
    const RhoTable &T = rho_table();
    int k = (int)std::floor(u);
    if (k >= RhoTable::kPieces) return 0.0;   /* below 1e-70 */
    return RhoTable::horner(T.piece[k], u - k - 0.5);
}

} // namespace detail

inline double dickman_rho(double u)
{
    if (!(u >= 0)) throw std::invalid_argument("dickman_rho: negative argument");
    return detail::rho_clamped(u);
}

/* > 1 when the candidate with average degree eps1 is the better one */
inline double speedup_estimate(double eps1, double eps2, int beta)
{
    if (beta <= 0) throw std::invalid_argument("speedup_estimate: beta must be positive");
    return dickman_rho(std::max(eps1, 0.0) / beta) / dickman_rho(std::max(eps2, 0.0) / beta);
}

/* ---- Murphy's E -------------------------------------------------------- */

enum class PairSet { all, coprime };
enum class GDegree { exact_max, deg_g0 };

struct MurphyOptions {
    PairSet pairs = PairSet::all;
    GDegree g_degree = GDegree::exact_max;
    std::optional<double> alpha_f;   /* unset: alpha(f) with default options */
    std::optional<double> alpha_g;   /* unset: 1/(q-1) */
    bool g_laurent = false;          /* cancellation at infinity on the g side too */
    int m_max = -1;                  /* -1: enough for every cell of the domain */
};

namespace detail {

/* per root degree, the kept nodes as (N_r, gap, gamma) */
struct SideModel {
    const BiPoly *f = nullptr;
    std::map<int, std::vector<std::array<int, 3>>> at;

    SideModel(const BiPoly &p, bool with_roots, int m_max) : f(&p)
    {
        if (!with_roots) return;
        for (auto &r : laurent_roots(p, m_max).roots) at[r.lead_deg].push_back({r.N_r(), r.gap, r.gamma});
    }

    /* expected rho((deg + alpha)/beta) over the pairs of one cell; a match
     * with N_r > cap is not counted */
    double expect(int da, int db, double alpha, double beta, double q, int cap) const
    {
        int M = generic_degree(*f, da, db);
        double v = rho_clamped((M + alpha) / beta);
        auto it = at.find(da - db);
        if (it == at.end()) return v;
        for (auto &[N, g, gamma] : it->second) {
            if (N > cap) continue;
            double P = std::pow(q, -N) / (q - 1);
            v += P * (rho_clamped((M - g + alpha) / beta) - rho_clamped((M - g + gamma + alpha) / beta));
        }
        return v;
    }
};

inline int default_murphy_mmax(const BiPoly &f, const SieveDomain &D)
{
    int lo = 0;
    for (auto &e : newton_polygon(f).edges)
        if (e.integral()) lo = std::min(lo, (int)boost::multiprecision::numerator(e.slope));
    return D.A() + D.B() - std::max(lo, -D.B());
}

inline int tdeg(const BiPoly &g)
{
    int t = kDegNegInf;
    for (auto &c : g.c) t = std::max(t, c.deg());
    return t;
}

} // namespace detail

inline double murphy_e(const BiPoly &f, const BiPoly &g, int s, double e, int beta, const MurphyOptions &o = {})
{
    if (g.d() != 1) throw std::invalid_argument("murphy_e: g must be linear in x");
    if (beta <= 0) throw std::invalid_argument("murphy_e: beta must be positive");
    SieveDomain D(e, s);
    double q = f.F->q;
    double af = o.alpha_f ? *o.alpha_f : alpha(f).value;
    double ag = o.alpha_g ? *o.alpha_g : 1.0 / (q - 1);
    int mf = o.m_max >= 0 ? o.m_max : detail::default_murphy_mmax(f, D);
    int mg = o.m_max >= 0 ? o.m_max : detail::default_murphy_mmax(g, D);
    detail::SideModel F(f, true, mf), G(g, o.g_laurent && o.g_degree == GDegree::exact_max, mg);
    int gt = detail::tdeg(g);
    auto cell = [&](int da, int db, int cap) {
        double rg = o.g_degree == GDegree::deg_g0 ? detail::rho_clamped((db + gt + ag) / beta)
                                                       : G.expect(da, db, ag, beta, q, cap);
        return F.expect(da, db, af, beta, q, cap) * rg;
    };
    double tot = 0;
    double pa = 1;
    for (int da = 0; da <= D.A(); da++, pa *= q) {
        double pb = pa;
        for (int db = 0; db <= D.B(); db++, pb *= q) {
            double n = (q - 1) * (q - 1) * pb;
            double v = cell(da, db, da + db);
            /* coprime pairs by Moebius inversion over the monic gcd: the
             * pairs h*(a', b') with deg h = 1 sit in the cell below, where
             * matches need two coefficients fewer */
            if (o.pairs == PairSet::coprime && da > 0 && db > 0) v -= cell(da, db, da + db - 2) / q;
            tot += n * v;
        }
    }
    return tot;
}

/* the literal definition: every pair of D(s,e) (coprime ones by default),
 * exact norm degrees; pairs with a vanishing norm are left out */
inline double murphy_e_bruteforce(const BiPoly &f, const BiPoly &g, int s, double e, int beta, double alpha_f,
                                  double alpha_g, bool coprime_only = true)
{
    SieveDomain D(e, s);
    Field F = f.F;
    uint64_t na = detail::ipow(F->q, D.A() + 1), nb = detail::ipow(F->q, D.B() + 1);
    if (na > (1u << 12) || nb > (1u << 12) || na * nb > (uint64_t(1) << 24))
        throw resource_error("murphy_e_bruteforce: domain too large");
    std::vector<UPoly> bs;
    for (uint64_t ib = 1; ib < nb; ib++) bs.push_back(UPoly::from_code(F, ib));
    double tot = 0;
    for (uint64_t ia = 1; ia < na; ia++) {
        UPoly a = UPoly::from_code(F, ia);
        for (auto &b : bs) {
            if (coprime_only && gcd(a, b).deg() > 0) continue;
            UPoly vf = norm_eval(f, a, b), vg = norm_eval(g, a, b);
            if (vf.is_zero() || vg.is_zero()) continue;
            tot += detail::rho_clamped((vf.deg() + alpha_f) / beta) * detail::rho_clamped((vg.deg() + alpha_g) / beta);
        }
    }
    return tot;
}

/* argmax over [s_lo, s_hi]; ties go to the smaller |s| */
inline int best_skewness(const BiPoly &f, const BiPoly &g, double e, int beta, int s_lo, int s_hi,
                         MurphyOptions o = {})
{
    if (s_lo > s_hi) throw std::invalid_argument("best_skewness: empty range");
    if (!o.alpha_f) o.alpha_f = alpha(f).value;
    int best = 0;
    double bv = -1;
    for (int s = s_lo; s <= s_hi; s++) {
        double v = murphy_e(f, g, s, e, beta, o);
        if (v > bv || (v == bv && std::abs(s) < std::abs(best))) bv = v, best = s;
    }
    return best;
}

/* ---- epsilon ------------------------------------------------------------- */

struct MetricReport {
    std::string f_id, g_id;
    int s = 0;
    double e = 0;
    int beta = 0;
    AlphaResult alpha;
    double alpha_inf = 0;
    double sigma = 0;
    double epsilon = 0;
    std::optional<double> murphy_e;
    bool alpha_inf_complete = true;
};

inline MetricReport epsilon(const BiPoly &f, int s, double e, const AlphaResult &a, int m_max = -1)
{
    MetricReport r;
    r.s = s;
    r.e = e;
    r.alpha = a;
    auto ai = alpha_infinity_exact(f, s, m_max);
    r.alpha_inf = ai.value;
    r.alpha_inf_complete = ai.complete;
    r.sigma = sigma(f, s, e);
    r.epsilon = r.alpha.value + r.alpha_inf + r.sigma;
    return r;
}

inline MetricReport epsilon(const BiPoly &f, int s, double e, const AlphaOptions &ao = {}, int m_max = -1)
{
    return epsilon(f, s, e, alpha(f, ao), m_max);
}

} // namespace ffsel
