#pragma once
/* Elements of F_q[t][x]: resultants, discriminants, norms, separability. */

#include "upoly.hpp"

namespace ffsel {

struct BiPoly {
    Field F = nullptr;
    std::vector<UPoly> c;   /* c[i] is the coefficient of x^i, c.back() != 0 */

    BiPoly() = default;
    explicit BiPoly(Field f) : F(f) {}
    BiPoly(Field f, std::vector<UPoly> cs) : F(f), c(std::move(cs)) { normalize(); }

    void normalize()
    {
        while (!c.empty() && c.back().is_zero()) c.pop_back();
        for (auto &u : c) u.F = F;
    }
    bool is_zero() const { return c.empty(); }
    int d() const { return c.empty() ? kDegNegInf : (int)c.size() - 1; }
    const UPoly &lc() const { return c.back(); }
    UPoly coef(int i) const { return (i >= 0 && i < (int)c.size()) ? c[i] : UPoly(F); }
    int tdeg() const
    {
        int r = kDegNegInf;
        for (auto &u : c) r = std::max(r, u.deg());
        return r;
    }
    /* total degree as a polynomial in (t, x) */
    int total_degree() const
    {
        int r = kDegNegInf;
        for (int i = 0; i < (int)c.size(); i++)
            if (!c[i].is_zero()) r = std::max(r, i + c[i].deg());
        return r;
    }
    static BiPoly constant(const UPoly &a)
    {
        BiPoly r(a.F);
        r.c.push_back(a);
        r.normalize();
        return r;
    }
    static BiPoly xpow(Field f, int k)
    {
        BiPoly r(f);
        r.c.assign(k + 1, UPoly(f));
        r.c[k] = UPoly::one(f);
        return r;
    }
    friend bool operator==(const BiPoly &a, const BiPoly &b) { return a.c == b.c; }
    friend bool operator!=(const BiPoly &a, const BiPoly &b) { return !(a == b); }
};

inline BiPoly operator+(const BiPoly &a, const BiPoly &b)
{
    Field F = a.F ? a.F : b.F;
    BiPoly r(F);
    size_t n = std::max(a.c.size(), b.c.size());
    for (size_t i = 0; i < n; i++) r.c.push_back(a.coef((int)i) + b.coef((int)i));
    r.normalize();
    return r;
}

inline BiPoly operator-(const BiPoly &a)
{
    BiPoly r = a;
    for (auto &u : r.c) u = -u;
    return r;
}

inline BiPoly operator-(const BiPoly &a, const BiPoly &b) { return a + (-b); }

inline BiPoly operator*(const BiPoly &a, const BiPoly &b)
{
    Field F = a.F ? a.F : b.F;
    BiPoly r(F);
    if (a.is_zero() || b.is_zero()) return r;
    r.c.assign(a.c.size() + b.c.size() - 1, UPoly(F));
    for (size_t i = 0; i < a.c.size(); i++)
        for (size_t j = 0; j < b.c.size(); j++) r.c[i + j] += a.c[i] * b.c[j];
    r.normalize();
    return r;
}

inline BiPoly scale(const BiPoly &a, const UPoly &s)
{
    BiPoly r(a.F);
    for (auto &u : a.c) r.c.push_back(u * s);
    r.normalize();
    return r;
}

inline BiPoly derivative_x(const BiPoly &a)
{
    BiPoly r(a.F);
    for (int i = 1; i < (int)a.c.size(); i++) r.c.push_back(scale(a.c[i], a.F->from_int(i % a.F->p)));
    r.normalize();
    return r;
}

/* f(a) for a in F_q[t] */
inline UPoly eval_x(const BiPoly &f, const UPoly &a)
{
    UPoly r(f.F);
    for (int i = f.d(); i >= 0; i--) r = r * a + f.c[i];
    return r;
}

/* F(a, b) = sum f_i a^i b^(d-i), the homogenized norm */
inline UPoly norm_eval(const BiPoly &f, const UPoly &a, const UPoly &b)
{
    if (a.is_zero() && b.is_zero()) throw std::invalid_argument("norm of the zero pair");
    int d = f.d();
    std::vector<UPoly> bp(d + 1);
    bp[0] = UPoly::one(f.F);
    for (int i = 1; i <= d; i++) bp[i] = bp[i - 1] * b;
    UPoly r(f.F), ap = UPoly::one(f.F);
    for (int i = 0; i <= d; i++) {
        if (!f.c[i].is_zero()) r += f.c[i] * ap * bp[d - i];
        if (i < d) ap = ap * a;
    }
    return r;
}

/* f(x^k) */
inline BiPoly compose_xpow(const BiPoly &f, int k)
{
    BiPoly r(f.F);
    if (f.is_zero()) return r;
    r.c.assign(f.d() * k + 1, UPoly(f.F));
    for (int i = 0; i <= f.d(); i++) r.c[i * k] = f.c[i];
    r.normalize();
    return r;
}

/* x^d f(1/x) */
inline BiPoly reverse_x(const BiPoly &f)
{
    BiPoly r = f;
    std::reverse(r.c.begin(), r.c.end());
    r.normalize();
    return r;
}

/* ---- resultants ---- */

namespace detail {

inline UPoly upow(const UPoly &a, int e) { return pow(a, (uint64_t)std::max(e, 0)); }

/* lc(B)^(deg A - deg B + 1) A mod B */
inline BiPoly prem(const BiPoly &A, const BiPoly &B)
{
    int db = B.d();
    int delta = A.d() - db;
    BiPoly R = A;
    const UPoly &lb = B.lc();
    int e = delta + 1;
    while (!R.is_zero() && R.d() >= db) {
        UPoly lr = R.lc();
        int s = R.d() - db;
        BiPoly nr(R.F);
        nr.c.assign(R.c.size(), UPoly(R.F));
        for (int i = 0; i < (int)R.c.size(); i++) nr.c[i] = R.c[i] * lb;
        for (int i = 0; i <= db; i++) nr.c[i + s] -= lr * B.c[i];
        nr.normalize();
        R = std::move(nr);
        e--;
    }
    if (e > 0) R = scale(R, upow(lb, e));
    return R;
}

inline BiPoly div_exact_scalar(const BiPoly &A, const UPoly &s)
{
    BiPoly r(A.F);
    for (auto &u : A.c) r.c.push_back(div_exact(u, s));
    r.normalize();
    return r;
}

} // namespace detail

/* Res_x(A, B) by the subresultant PRS */
inline UPoly resultant_x(BiPoly A, BiPoly B)
{
    Field F = A.F ? A.F : B.F;
    if (A.is_zero() || B.is_zero()) return UPoly(F);
    bool neg = false;
    if (A.d() < B.d()) {
        if ((A.d() & 1) && (B.d() & 1)) neg = !neg;
        std::swap(A, B);
    }
    if (B.d() == 0) {
        UPoly r = detail::upow(B.c[0], A.d());
        return neg ? -r : r;
    }
    UPoly g = UPoly::one(F), h = UPoly::one(F);
    while (true) {
        int delta = A.d() - B.d();
        if ((A.d() & 1) && (B.d() & 1)) neg = !neg;
        BiPoly R = detail::prem(A, B);
        A = std::move(B);
        if (R.is_zero()) return UPoly(F);
        B = detail::div_exact_scalar(R, g * detail::upow(h, delta));
        g = A.lc();
        if (delta == 0) {
            /* h unchanged */
        } else {
            h = div_exact(detail::upow(g, delta), detail::upow(h, delta - 1));
        }
        if (B.d() == 0) {
            int da = A.d();
            UPoly r = div_exact(detail::upow(B.c[0], da), detail::upow(h, da - 1));
            return neg ? -r : r;
        }
    }
}

/* fraction-free determinant over F_q[t] */
inline UPoly bareiss_det(std::vector<std::vector<UPoly>> M, Field F)
{
    int n = (int)M.size();
    if (n == 0) return UPoly::one(F);
    bool neg = false;
    UPoly prev = UPoly::one(F);
    for (int k = 0; k < n - 1; k++) {
        if (M[k][k].is_zero()) {
            int sw = -1;
            for (int i = k + 1; i < n; i++)
                if (!M[i][k].is_zero()) {
                    sw = i;
                    break;
                }
            if (sw < 0) return UPoly(F);
            std::swap(M[k], M[sw]);
            neg = !neg;
        }
        for (int i = k + 1; i < n; i++)
            for (int j = k + 1; j < n; j++)
                M[i][j] = div_exact(M[k][k] * M[i][j] - M[i][k] * M[k][j], prev);
        prev = M[k][k];
    }
    UPoly r = M[n - 1][n - 1];
    return neg ? -r : r;
}

/* Res_x(A, B) as the Sylvester determinant */
inline UPoly resultant_sylvester(const BiPoly &A, const BiPoly &B)
{
    Field F = A.F ? A.F : B.F;
    if (A.is_zero() || B.is_zero()) return UPoly(F);
    int m = A.d(), n = B.d();
    int N = m + n;
    if (N == 0) return UPoly::one(F);
    std::vector<std::vector<UPoly>> M(N, std::vector<UPoly>(N, UPoly(F)));
    for (int i = 0; i < n; i++)
        for (int j = 0; j <= m; j++) M[i][i + j] = A.c[m - j];
    for (int i = 0; i < m; i++)
        for (int j = 0; j <= n; j++) M[n + i][i + j] = B.c[n - j];
    return bareiss_det(M, F);
}

/* Disc(f), normalized to its monic associate */
inline UPoly discriminant_x(const BiPoly &f)
{
    BiPoly fp = derivative_x(f);
    if (fp.is_zero()) throw std::invalid_argument("discriminant of an inseparable polynomial");
    int d = f.d();
    if (d < 1) throw std::invalid_argument("discriminant of a constant");
    UPoly r = resultant_x(f, fp);
    /* Res(f, f') = +- f_d^(deg f' - d + 2) Disc(f) */
    int e = fp.d() - d + 2;
    if (e > 0) r = div_exact(r, detail::upow(f.lc(), e));
    else if (e < 0) r = r * detail::upow(f.lc(), -e);
    return monic(r);
}

struct SepDecomp {
    BiPoly fhat;
    int dins = 1;
};

inline SepDecomp separability_decompose(const BiPoly &f)
{
    if (f.d() < 1) throw std::invalid_argument("polynomial constant in x");
    uint32_t p = f.F->p;
    int D = 1;
    while (true) {
        int nd = D * (int)p;
        if (nd > f.d()) break;
        bool ok = true;
        for (int i = 0; i <= f.d(); i++)
            if (!f.c[i].is_zero() && i % nd) {
                ok = false;
                break;
            }
        if (!ok) break;
        D = nd;
    }
    SepDecomp r;
    r.dins = D;
    r.fhat = BiPoly(f.F);
    for (int i = 0; i <= f.d(); i += D) r.fhat.c.push_back(f.c[i]);
    r.fhat.normalize();
    return r;
}

inline bool is_separable(const BiPoly &f) { return !derivative_x(f).is_zero(); }

/* irreducible factors of degree <= bound with multiplicities */
inline std::vector<std::pair<UPoly, int>> small_factors(const UPoly &R, int bound)
{
    std::vector<std::pair<UPoly, int>> out;
    if (R.is_zero()) return out;
    UPoly X = R;
    for (int k = 1; k <= bound && X.deg() >= k; k++)
        for (auto code : *irreducible_codes(R.F, k)) {
            UPoly ell = UPoly::from_code(R.F, code);
            int v = 0;
            while (X.deg() >= k) {
                auto [qq, rr] = divmod(X, ell);
                if (!rr.is_zero()) break;
                X = std::move(qq);
                v++;
            }
            if (v) out.push_back({ell, v});
        }
    return out;
}

inline std::vector<std::pair<UPoly, int>> resultant_small_factors(const BiPoly &f, const BiPoly &g, int bound)
{
    return small_factors(resultant_x(f, g), bound);
}

struct ValidationReport {
    bool valid = false;
    UPoly resultant;
    UPoly phi;                 /* product of the degree-n irreducible factors */
    std::vector<std::pair<UPoly, int>> small;
};

inline ValidationReport validate_ffs_pair(const BiPoly &f, const BiPoly &g, int n, int small_bound = 6)
{
    if (g.d() != 1) throw std::invalid_argument("g must be linear in x");
    ValidationReport rep;
    rep.resultant = resultant_x(f, g);
    if (rep.resultant.deg() >= n) {
        rep.phi = factors_of_degree(rep.resultant, n);
        rep.valid = rep.phi.deg() >= n;
    } else {
        rep.phi = UPoly::one(f.F);
    }
    rep.small = small_factors(rep.resultant, small_bound);
    return rep;
}

/* ---- text ---- */

inline std::string encode(const BiPoly &f)
{
    std::string s;
    for (int i = 0; i <= f.d(); i++) {
        if (i) s += ";";
        s += encode(f.c[i]);
    }
    return s;
}

inline std::string pretty(const BiPoly &f)
{
    if (f.is_zero()) return "0";
    std::string s;
    for (int i = f.d(); i >= 0; i--) {
        const UPoly &u = f.c[i];
        if (u.is_zero()) continue;
        if (!s.empty()) s += "+";
        std::string xs = i == 0 ? "" : (i == 1 ? "x" : "x^" + std::to_string(i));
        if (i == 0) {
            s += pretty(u);
            continue;
        }
        int nz = 0;
        for (auto co : u.c) nz += co != 0;
        if (u.is_one()) s += xs;
        else if (nz == 1 && u.lc() == 1) s += pretty(u) + xs;
        else s += "(" + pretty(u) + ")" + xs;
    }
    return s;
}

inline std::ostream &operator<<(std::ostream &os, const BiPoly &f) { return os << pretty(f); }

} // namespace ffsel

#include "parse.hpp"
