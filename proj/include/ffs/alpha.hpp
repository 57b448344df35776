#pragma once
/* Root property: alpha_ell and alpha(f).
 *
 * alpha_ell(f) = deg ell (1/(N-1) - N/(N+1) sum_{(r,k)} N^-k) over the
 * affine and projective roots of f modulo the powers of ell, N = q^deg ell.
 * The sum is truncated at level K = ceil(kmax/deg ell); roots still present
 * at level K are assumed to lift forever, which closes that level with the
 * factor N/(N-1).
 *
 * Two independent evaluations are provided:
 *  - lift_root_set: explicit residues r mod ell^k, by depth-first lifting
 *  - the local engine: f is moved to F_N[[s]] through t = theta + s, with
 *    theta a root of ell, and the root sum is computed by recursing on
 *    f(r0 + s y) / s^v.  This is what alpha() runs.
 */

#include "bipoly.hpp"
#include "ext_table.hpp"

#include <atomic>
#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <functional>
#include <optional>
#include <thread>

namespace ffsel {

using rational = boost::multiprecision::cpp_rational;

inline double to_double(const rational &r) { return r.convert_to<double>(); }

/* ---- explicit roots ---- */

struct ModRoots {
    std::vector<UPoly> affine;
    std::vector<bool> affine_simple;
    bool projective = false;
    bool projective_simple = false;
    int count() const { return (int)affine.size() + (projective ? 1 : 0); }
};

namespace detail {

inline UPoly eval_mod(const BiPoly &f, const UPoly &r, const UPoly &m)
{
    UPoly acc(f.F);
    for (int i = f.d(); i >= 0; i--) acc = (acc * r + f.c[i]) % m;
    return acc;
}

inline uint64_t residue_count(Field F, int deg)
{
    double lg = deg * std::log2((double)F->q);
    if (lg > 40) throw resource_error("residue enumeration too large");
    return ipow(F->q, deg);
}

} // namespace detail

/* roots of f modulo ell in F_q[t]/ell, by exhaustive scan of the residues */
inline ModRoots roots_mod(const BiPoly &f, const UPoly &ell)
{
    ModRoots out;
    Field F = f.F;
    int k = ell.deg();
    uint64_t n = detail::residue_count(F, k);
    BiPoly fp = derivative_x(f);
    for (uint64_t code = 0; code < n; code++) {
        UPoly r = UPoly::from_code(F, code);
        if (!detail::eval_mod(f, r, ell).is_zero()) continue;
        out.affine.push_back(r);
        out.affine_simple.push_back(!detail::eval_mod(fp, r, ell).is_zero());
    }
    if ((f.lc() % ell).is_zero()) {
        out.projective = true;
        BiPoly rvp = derivative_x(reverse_x(f));
        out.projective_simple = !(rvp.coef(0) % ell).is_zero();
    }
    return out;
}

enum class RootKind { affine, projective };

struct RootEntry {
    UPoly r;
    int k;
    RootKind kind;
    bool lifts;
};

struct RootSet {
    UPoly ell;
    std::vector<RootEntry> entries;
    int k_max_used = 0;   /* deepest level K */
};

inline int lift_levels(int kmax_deg, int deg_ell) { return std::max(1, (kmax_deg + deg_ell - 1) / deg_ell); }

/* all roots mod ell^k, k = 1..K, by lifting r -> r + ell^k c */
inline RootSet lift_root_set(const BiPoly &f, const UPoly &ell, int kmax_deg, size_t max_entries = 2000000)
{
    Field F = f.F;
    int dl = ell.deg();
    int K = lift_levels(kmax_deg, dl);
    RootSet rs;
    rs.ell = monic(ell);
    rs.k_max_used = K;
    uint64_t nres = detail::residue_count(F, dl);
    std::vector<UPoly> lpow(K + 2, UPoly::one(F));
    for (int i = 1; i <= K + 1; i++) lpow[i] = lpow[i - 1] * rs.ell;

    BiPoly rev = reverse_x(f);

    auto run = [&](const BiPoly &h, RootKind kind) {
        struct Item {
            UPoly r;
            int k;
        };
        std::vector<Item> stack;
        for (uint64_t code = 0; code < nres; code++) {
            UPoly r = UPoly::from_code(F, code);
            if (kind == RootKind::projective && !r.is_zero()) continue;
            if (detail::eval_mod(h, r, rs.ell).is_zero()) stack.push_back({r, 1});
        }
        /* depth first; an entry lifts if some descendant reaches level K */
        std::function<bool(const UPoly &, int)> dfs = [&](const UPoly &r, int k) -> bool {
            size_t idx = rs.entries.size();
            rs.entries.push_back({r, k, kind, false});
            if (rs.entries.size() > max_entries) throw resource_error("root set too large");
            bool reached = k == K;
            if (k < K) {
                for (uint64_t code = 0; code < nres; code++) {
                    UPoly r2 = r + UPoly::from_code(F, code) * lpow[k];
                    if (detail::eval_mod(h, r2, lpow[k + 1]).is_zero())
                        if (dfs(r2, k + 1)) reached = true;
                }
            }
            rs.entries[idx].lifts = reached;
            return reached;
        };
        for (auto &it : stack) dfs(it.r, it.k);
    };
    run(f, RootKind::affine);
    if ((f.lc() % rs.ell).is_zero()) run(rev, RootKind::projective);
    return rs;
}

/* the alpha_ell formula applied to an explicit root set */
inline rational alpha_from_root_set(const RootSet &rs, bool affine_only = false)
{
    Field F = rs.ell.F;
    int dl = rs.ell.deg();
    bigint N = boost::multiprecision::pow(bigint(F->q), dl);
    int K = rs.k_max_used;
    std::vector<bigint> cnt(K + 1, 0);
    for (auto &e : rs.entries) {
        if (affine_only && e.kind == RootKind::projective) continue;
        cnt[e.k] += 1;
    }
    rational S = 0;
    bigint Nk = 1;
    for (int k = 1; k <= K; k++) {
        Nk *= N;
        rational term(cnt[k], Nk);
        if (k == K) term *= rational(N, N - 1);
        S += term;
    }
    return rational(dl) * (rational(1, N - 1) - rational(N, N + 1) * S);
}

/* ---- the local engine ---- */

template <class R> class LocalAlpha {
  public:
    using E = typename R::E;
    using Series = std::vector<E>;   /* coefficients of s^0, s^1, ... */
    using H = std::vector<Series>;   /* coefficients of y^0, y^1, ... */

    explicit LocalAlpha(const R &K) : K_(K), ops_(K)
    {
        N_ = bigint(K.order());
        inv_nm1_ = rational(1, N_ - 1);
        closing_ = rational(N_, N_ - 1);
    }

    const R &field() const { return K_; }

    /* f_i(theta + s) mod s^prec */
    Series expand(const UPoly &a, const E &theta, int prec) const
    {
        Series acc(prec, K_.zero());
        for (int i = a.deg(); i >= 0; i--) {
            for (int j = prec - 1; j >= 0; j--) {
                E v = K_.mul(acc[j], theta);
                if (j) v = K_.add(v, acc[j - 1]);
                acc[j] = v;
            }
            acc[0] = K_.add(acc[0], K_.from_base(a[i]));
        }
        return acc;
    }
    E eval_at(const UPoly &a, const E &theta) const
    {
        E acc = K_.zero();
        for (int i = a.deg(); i >= 0; i--) acc = K_.add(K_.mul(acc, theta), K_.from_base(a[i]));
        return acc;
    }

    /* number of roots of f(theta, x) in the residue field */
    int simple_root_count(const BiPoly &f, const E &theta) const
    {
        std::vector<E> h;
        for (auto &c : f.c) h.push_back(eval_at(c, theta));
        return ops_.count_roots(h);
    }

    /* sum_{(r,k)} N^-k over affine roots (and projective ones unless affine_only),
     * truncated at level K */
    rational root_sum(const BiPoly &f, const E &theta, int K, bool affine_only, rational *proj_part = nullptr) const
    {
        H h;
        for (auto &c : f.c) h.push_back(expand(c, theta, K));
        rational aff = M(h, K);
        rational proj = 0;
        if (K_.is_zero(h.back()[0])) {
            /* F(1, s y) = sum_j s^j f_{d-j} y^j */
            int d = (int)h.size() - 1;
            H hr(d + 1);
            for (int j = 0; j <= d; j++) hr[j] = shift_up(h[d - j], j, K);
            proj = M(hr, K) / rational(N_);
        }
        if (proj_part) *proj_part = proj;
        return affine_only ? aff : aff + proj;
    }

    rational alpha_from_sum(const rational &S) const
    {
        int dl = K_.degree();
        return rational(dl) * (inv_nm1_ - rational(N_, N_ + 1) * S);
    }

  private:
    const R &K_;
    RPolyOps<R> ops_;
    bigint N_;
    rational inv_nm1_, closing_;

    Series shift_up(const Series &a, int j, int prec) const
    {
        Series r(prec, K_.zero());
        for (int i = 0; i + j < prec && i < (int)a.size(); i++) r[i + j] = a[i];
        return r;
    }

    rational M(H h, int K) const
    {
        int v0 = K;
        for (auto &ser : h)
            for (int j = 0; j < std::min<int>(K, (int)ser.size()); j++)
                if (!K_.is_zero(ser[j])) {
                    v0 = std::min(v0, j);
                    break;
                }
        if (v0 >= K) return rational(K - 1) + closing_;
        if (v0 > 0) {
            for (auto &ser : h) ser.erase(ser.begin(), ser.begin() + std::min<size_t>(v0, ser.size()));
            return rational(v0) + M(std::move(h), K - v0);
        }
        std::vector<E> hb;
        for (auto &ser : h) hb.push_back(ser.empty() ? K_.zero() : ser[0]);
        ops_.trim(hb);
        if (ops_.deg(hb) < 1) return 0;
        std::vector<E> hbd = ops_.derivative(hb);
        rational total = 0;
        for (const E &r0 : ops_.roots(hb)) {
            if (!K_.is_zero(ops_.eval(hbd, r0))) {
                total += inv_nm1_;
                continue;
            }
            total += M(taylor(h, r0, K), K) / rational(N_);
        }
        return total;
    }

    /* coefficients of h(r0 + s y) */
    H taylor(H a, const E &r0, int K) const
    {
        int d = (int)a.size() - 1;
        for (auto &ser : a) ser.resize(K, K_.zero());
        for (int i = 0; i < d; i++)
            for (int j = d - 1; j >= i; j--)
                for (int l = 0; l < K; l++) a[j][l] = K_.add(a[j][l], K_.mul(r0, a[j + 1][l]));
        for (int j = 1; j <= d; j++) a[j] = shift_up(a[j], j, K);
        return a;
    }
};

/* ---- alpha_ell for an explicit ell ---- */

inline int default_kmax(const BiPoly &f, int b0)
{
    int k = 3 * b0;
    if (is_separable(f)) {
        UPoly D = discriminant_x(f);
        k = std::min(k, std::max(1, D.deg()));
    }
    return std::max(1, k);
}

struct EllContext {
    /* precomputed data shared by many ell */
    bool separable = true;
    UPoly disc_lc;   /* Disc(f) * f_d, empty when inseparable */
};

inline EllContext make_ell_context(const BiPoly &f)
{
    EllContext c;
    c.separable = is_separable(f);
    if (c.separable) c.disc_lc = discriminant_x(f) * f.lc();
    return c;
}

inline rational alpha_ell_exact(const BiPoly &f, const UPoly &ell, int kmax_deg, bool affine_only,
                                const EllContext &ctx)
{
    PolyResidueField R(ell);
    LocalAlpha<PolyResidueField> la(R);
    UPoly theta = R.theta();
    int dl = ell.deg();
    bigint N = R.order();
    if (ctx.separable && !(ctx.disc_lc % R.modulus()).is_zero()) {
        int n = la.simple_root_count(f, theta);
        return rational(dl) * (rational(1, N - 1) - rational(N * n, (N + 1) * (N - 1)));
    }
    return la.alpha_from_sum(la.root_sum(f, theta, lift_levels(kmax_deg, dl), affine_only));
}

inline rational alpha_ell_exact(const BiPoly &f, const UPoly &ell, int kmax_deg, bool affine_only = false)
{
    return alpha_ell_exact(f, ell, kmax_deg, affine_only, make_ell_context(f));
}

inline double alpha_ell(const BiPoly &f, const UPoly &ell, int kmax_deg, bool affine_only = false)
{
    return to_double(alpha_ell_exact(f, ell, kmax_deg, affine_only));
}

/* ---- whole alpha ---- */

inline double alpha_linear(Field F) { return 1.0 / (F->q - 1); }

/* smallest b0 with q^(-b0/2) <= 1e-3, lowered until q^b0 fits the
 * residue tables */
inline int default_b0(Field F)
{
    int b = 1;
    while (std::pow((double)F->q, -b / 2.0) > 1e-3) b++;
    while (b > 1 && std::pow((double)F->q, b) > (double)ZechField::kMaxOrder) b--;
    return b;
}

/* tail of the alpha series past b0: per degree k, the Hasse-Weil
 * fluctuation 2g q^(k/2), the subfield points deg_x * sum_{d|k,d>1} q^(k/d)
 * and the exact |k I_k - q^k - 1| for P^1, each weighted q^k/(q^2k - 1) */
inline double alpha_tail_bound(uint32_t q, double genus, int deg_x, int b0)
{
    double total = 0, lq = std::log((double)q);
    for (int k = b0 + 1; k < b0 + 4000; k++) {
        double qk = std::exp(k * lq);
        double w = qk / (qk * qk - 1);
        if (!std::isfinite(w) || qk > 1e300) w = std::exp(-k * lq);
        double sub = 0, dev = -1;
        for (int h = 2; h <= k; h++) {
            if (k % h) continue;
            sub += std::exp(k / h * lq);
            int mu = moebius(h);
            if (mu) dev += mu * std::exp(k / h * lq);
        }
        double term = w * (2 * genus * std::exp(k * lq / 2) + deg_x * sub + std::fabs(dev));
        total += term;
        if (term < 1e-17 * std::max(1.0, total)) break;
    }
    return total;
}

/* the coarse closed form (4 g0 + 12) sum q^(3k/2)/(q^2k - 1) */
inline double alpha_tail_bound_coarse(uint32_t q, double genus, int b0)
{
    double total = 0, lq = std::log((double)q);
    for (int k = b0 + 1; k < b0 + 4000; k++) {
        double term = (4 * genus + 12) * std::exp(-k * lq / 2) / (1 - std::exp(-2 * k * lq));
        total += term;
        if (term < 1e-17 * std::max(1.0, total)) break;
    }
    return total;
}

inline int arithmetic_genus(const BiPoly &f)
{
    int d0 = f.total_degree();
    return (d0 - 1) * (d0 - 2) / 2;
}

inline double alpha_tail_bound(const BiPoly &f, int b0, std::optional<double> genus = std::nullopt)
{
    if (!is_separable(f)) throw std::invalid_argument("tail bound needs a separable polynomial");
    int l0 = max_irreducible_factor_degree(discriminant_x(f) * f.lc());
    if (b0 < l0)
        throw std::invalid_argument("b0 = " + std::to_string(b0) + " is below the largest bad degree " +
                                    std::to_string(l0));
    return alpha_tail_bound(f.F->q, genus ? *genus : (double)arithmetic_genus(f), f.d(), b0);
}

struct AlphaOptions {
    int b0 = -1;             /* -1: default_b0 */
    int kmax = -1;           /* -1: default_kmax */
    int64_t max_ell = -1;    /* cap on the number of ell, canonical order */
    bool affine_only = false;
    int jobs = 1;
};

struct AlphaResult {
    double value = 0;
    rational exact = 0;
    int b0 = 0;
    int kmax = 0;
    std::optional<double> error_bound;
    bool heuristic = false;   /* inseparable f: no convergence guarantee */
    uint64_t ell_count = 0;
    bool cutoff_hit = false;
    std::vector<double> per_degree;   /* alpha contribution of each degree 1..b0 */
};

namespace detail {

struct DegreeAccum {
    bigint good = 0, roots = 0;
    rational bad = 0;
    uint64_t count = 0;
};

/* all ell of degree k through theta = alpha^n in the table field */
inline rational alpha_degree_table(const BiPoly &f, int k, int kmax, const EllContext &ctx, const AlphaOptions &o,
                                   uint64_t &count)
{
    ZechField Z(f.F, k);
    LocalAlpha<ZechField> la(Z);
    uint64_t N = Z.order(), M = N - 1;
    int K = lift_levels(kmax, k);
    int jobs = std::max(1, o.jobs);
    std::vector<DegreeAccum> acc(jobs);

    auto one = [&](DegreeAccum &a, ZechField::E theta) {
        a.count++;
        bool good = ctx.separable && !Z.is_zero(la.eval_at(ctx.disc_lc, theta));
        if (good) {
            a.good += 1;
            a.roots += la.simple_root_count(f, theta);
        } else {
            a.bad += la.alpha_from_sum(la.root_sum(f, theta, K, o.affine_only));
        }
    };
    auto work = [&](int w) {
        DegreeAccum &a = acc[w];
        if (w == 0 && k == 1) one(a, Z.zero());
        for (uint64_t n = w; n < M; n += jobs) {
            if (!Z.orbit_min(n)) continue;
            if (Z.log_degree(n) != k) continue;
            one(a, Z.from_log(n));
        }
    };
    if (jobs == 1) work(0);
    else {
        std::vector<std::thread> th;
        for (int w = 0; w < jobs; w++) th.emplace_back(work, w);
        for (auto &t : th) t.join();
    }
    DegreeAccum tot;
    for (auto &a : acc) {
        tot.good += a.good;
        tot.roots += a.roots;
        tot.bad += a.bad;
        tot.count += a.count;
    }
    count += tot.count;
    bigint Nb = N;
    return rational(k * tot.good, Nb - 1) - rational(k * Nb * tot.roots, (Nb - 1) * (Nb + 1)) + tot.bad;
}

inline std::vector<UPoly> canonical_ells(Field F, int b0, int64_t max_ell)
{
    std::vector<UPoly> out;
    for (int k = 1; k <= b0; k++)
        for (auto code : *irreducible_codes(F, k)) {
            if (max_ell >= 0 && (int64_t)out.size() >= max_ell) return out;
            out.push_back(UPoly::from_code(F, code));
        }
    return out;
}

} // namespace detail

inline AlphaResult alpha(const BiPoly &f, const AlphaOptions &opt = {})
{
    if (f.d() < 1) throw std::invalid_argument("alpha of a polynomial constant in x");
    Field F = f.F;
    AlphaResult res;
    res.b0 = opt.b0 > 0 ? opt.b0 : default_b0(F);
    res.kmax = opt.kmax > 0 ? opt.kmax : default_kmax(f, res.b0);
    EllContext ctx = make_ell_context(f);
    res.heuristic = !ctx.separable;
    res.per_degree.assign(res.b0, 0.0);
    rational total = 0;

    auto add_explicit = [&](const std::vector<UPoly> &ells) {
        std::vector<rational> part(ells.size());
        int jobs = std::max(1, opt.jobs);
        auto work = [&](int w) {
            for (size_t i = w; i < ells.size(); i += jobs)
                part[i] = alpha_ell_exact(f, ells[i], res.kmax, opt.affine_only, ctx);
        };
        if (jobs == 1) work(0);
        else {
            std::vector<std::thread> th;
            for (int w = 0; w < jobs; w++) th.emplace_back(work, w);
            for (auto &t : th) t.join();
        }
        for (size_t i = 0; i < ells.size(); i++) {
            total += part[i];
            res.per_degree[ells[i].deg() - 1] += to_double(part[i]);
        }
        res.ell_count += ells.size();
    };

    if (opt.max_ell >= 0) {
        auto ells = detail::canonical_ells(F, res.b0, opt.max_ell);
        bigint all = 0;
        for (int k = 1; k <= res.b0; k++) all += count_irreducibles(F, k);
        res.cutoff_hit = bigint(ells.size()) < all;
        add_explicit(ells);
    } else if (f.d() == 1 && ctx.separable) {
        /* one simple root per ell outside the content */
        UPoly content = gcd(f.c[0], f.c[1]);
        std::vector<UPoly> special;
        for (auto &l : irreducible_factors(content))
            if (l.deg() <= res.b0) special.push_back(l);
        for (int k = 1; k <= res.b0; k++) {
            bigint Ik = count_irreducibles(F, k);
            bigint N = boost::multiprecision::pow(bigint(F->q), k);
            int ns = 0;
            for (auto &l : special) ns += l.deg() == k;
            rational part = rational(k * (Ik - ns), N * N - 1);
            total += part;
            res.per_degree[k - 1] += to_double(part);
            res.ell_count += (uint64_t)(Ik - ns);
        }
        add_explicit(special);
    } else {
        for (int k = 1; k <= res.b0; k++) {
            uint64_t Nk = 1;
            bool table = true;
            for (int i = 0; i < k; i++) {
                if (Nk > ZechField::kMaxOrder / F->q) table = false;
                Nk *= F->q;
            }
            if (table) {
                rational part = detail::alpha_degree_table(f, k, res.kmax, ctx, opt, res.ell_count);
                total += part;
                res.per_degree[k - 1] += to_double(part);
            } else {
                throw resource_error("alpha: degree " + std::to_string(k) + " residue fields exceed the table size; lower b0");
            }
        }
    }
    res.exact = total;
    res.value = to_double(total);
    if (ctx.separable && !res.cutoff_hit) {
        int l0 = max_irreducible_factor_degree(ctx.disc_lc);
        if (res.b0 >= l0) res.error_bound = alpha_tail_bound(F->q, arithmetic_genus(f), f.d(), res.b0);
    }
    return res;
}

/* ---- averaging oracle ---- */

/* mean of v_ell(F(a,b)) over ell-coprime pairs with deg a, deg b <= N,
 * pairs with F(a,b) = 0 left out.  Literal enumeration while
 * q^(2N+2) <= budget; past that, the pairs are grouped by (a:b) mod ell^J
 * with J = floor((N+1)/deg ell), which is the same average with v capped
 * at J */
inline double valuation_average_oracle(const BiPoly &f, const UPoly &ell, int N, uint64_t budget = 1ull << 22)
{
    Field F = f.F;
    UPoly l = monic(ell);
    int dl = l.deg();
    double lg2 = (2.0 * N + 2) * std::log2((double)F->q);
    if (lg2 <= std::log2((double)budget)) {
        uint64_t n = detail::ipow(F->q, N + 1);
        double sum = 0;
        uint64_t cnt = 0;
        std::vector<UPoly> polys(n);
        std::vector<bool> div(n);
        for (uint64_t i = 0; i < n; i++) {
            polys[i] = UPoly::from_code(F, i);
            div[i] = (polys[i] % l).is_zero();
        }
        for (uint64_t i = 0; i < n; i++)
            for (uint64_t j = 0; j < n; j++) {
                if (div[i] && div[j]) continue;
                UPoly v = norm_eval(f, polys[i], polys[j]);
                /* F(a,b) = 0 only on the finitely many lines through a
                 * rational root: density zero, skipped */
                if (v.is_zero()) continue;
                sum += valuation(v, l);
                cnt++;
            }
        return sum / (double)cnt;
    }
    int J = (N + 1) / dl;
    if (J < 1) throw std::invalid_argument("degree bound below deg ell");
    double lgc = J * dl * std::log2((double)F->q);
    if (lgc > std::log2((double)budget)) throw resource_error("oracle budget exceeded");
    UPoly lj = pow(l, J);
    uint64_t n = detail::ipow(F->q, J * dl);
    BiPoly rev = reverse_x(f);
    double sum = 0;
    uint64_t classes = 0;
    for (uint64_t i = 0; i < n; i++) {
        UPoly r = UPoly::from_code(F, i);
        UPoly va = detail::eval_mod(f, r, lj);
        sum += va.is_zero() ? J : std::min(J, valuation(va, l));
        classes++;
        if ((r % l).is_zero()) {
            UPoly vp = detail::eval_mod(rev, r, lj);
            sum += vp.is_zero() ? J : std::min(J, valuation(vp, l));
            classes++;
        }
    }
    return sum / (double)classes;
}

} // namespace ffsel
