#pragma once
/* Univariate polynomials over F_q in the variable t. */

#include "field.hpp"

#include <algorithm>
#include <boost/multiprecision/cpp_int.hpp>
#include <cctype>
#include <climits>
#include <memory>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

namespace ffsel {

using bigint = boost::multiprecision::cpp_int;

constexpr int kDegNegInf = INT_MIN / 4;

struct UPoly {
    Field F = nullptr;
    std::vector<elem> c;   /* c[i] is the coefficient of t^i, no trailing zeros */

    UPoly() = default;
    explicit UPoly(Field f) : F(f) {}
    UPoly(Field f, std::vector<elem> cs) : F(f), c(std::move(cs)) { normalize(); }

    static UPoly constant(Field f, elem a)
    {
        UPoly r(f);
        if (a) r.c.push_back(a);
        return r;
    }
    static UPoly one(Field f) { return constant(f, 1); }
    static UPoly monomial(Field f, int k, elem a = 1)
    {
        UPoly r(f);
        if (!a) return r;
        r.c.assign(k + 1, 0);
        r.c[k] = a;
        return r;
    }
    /* code = sum c_i q^i */
    static UPoly from_code(Field f, uint64_t code)
    {
        UPoly r(f);
        while (code) {
            r.c.push_back((elem)(code % f->q));
            code /= f->q;
        }
        return r;
    }
    static UPoly from_code(Field f, const bigint &code)
    {
        UPoly r(f);
        bigint x = code;
        while (x != 0) {
            r.c.push_back((elem)(uint32_t)(x % f->q));
            x /= f->q;
        }
        return r;
    }

    void normalize()
    {
        while (!c.empty() && c.back() == 0) c.pop_back();
    }
    bool is_zero() const { return c.empty(); }
    int deg() const { return c.empty() ? kDegNegInf : (int)c.size() - 1; }
    elem lc() const { return c.empty() ? 0 : c.back(); }
    elem operator[](int i) const { return (i >= 0 && i < (int)c.size()) ? c[i] : 0; }
    bool is_one() const { return c.size() == 1 && c[0] == 1; }
    bool is_constant() const { return c.size() <= 1; }

    uint64_t code() const
    {
        uint64_t r = 0;
        for (int i = (int)c.size() - 1; i >= 0; i--) r = r * F->q + c[i];
        return r;
    }
    bigint big_code() const
    {
        bigint r = 0;
        for (int i = (int)c.size() - 1; i >= 0; i--) r = r * F->q + c[i];
        return r;
    }

    friend bool operator==(const UPoly &a, const UPoly &b) { return a.c == b.c; }
    friend bool operator!=(const UPoly &a, const UPoly &b) { return a.c != b.c; }
    /* canonical order: degree first, then coefficient codes from the top */
    friend bool operator<(const UPoly &a, const UPoly &b)
    {
        if (a.c.size() != b.c.size()) return a.c.size() < b.c.size();
        for (int i = (int)a.c.size() - 1; i >= 0; i--)
            if (a.c[i] != b.c[i]) return a.c[i] < b.c[i];
        return false;
    }
};

inline void check_same(const UPoly &a, const UPoly &b)
{
    if (a.F != b.F && a.F && b.F) throw std::invalid_argument("polynomials over different fields");
}

inline UPoly operator+(const UPoly &a, const UPoly &b)
{
    check_same(a, b);
    Field F = a.F ? a.F : b.F;
    UPoly r(F);
    size_t n = std::max(a.c.size(), b.c.size());
    r.c.resize(n);
    for (size_t i = 0; i < n; i++) {
        elem x = i < a.c.size() ? a.c[i] : 0, y = i < b.c.size() ? b.c[i] : 0;
        r.c[i] = F->add(x, y);
    }
    r.normalize();
    return r;
}

inline UPoly operator-(const UPoly &a)
{
    UPoly r = a;
    for (auto &x : r.c) x = a.F->neg(x);
    return r;
}

inline UPoly operator-(const UPoly &a, const UPoly &b)
{
    check_same(a, b);
    Field F = a.F ? a.F : b.F;
    UPoly r(F);
    size_t n = std::max(a.c.size(), b.c.size());
    r.c.resize(n);
    for (size_t i = 0; i < n; i++) {
        elem x = i < a.c.size() ? a.c[i] : 0, y = i < b.c.size() ? b.c[i] : 0;
        r.c[i] = F->sub(x, y);
    }
    r.normalize();
    return r;
}

inline UPoly scale(const UPoly &a, elem s)
{
    UPoly r(a.F);
    if (!s) return r;
    r.c.resize(a.c.size());
    for (size_t i = 0; i < a.c.size(); i++) r.c[i] = a.F->mul(a.c[i], s);
    r.normalize();
    return r;
}

/* a * t^k, k may be negative (drops low terms) */
inline UPoly shift(const UPoly &a, int k)
{
    UPoly r(a.F);
    if (a.is_zero()) return r;
    if (k >= 0) {
        r.c.assign(k, 0);
        r.c.insert(r.c.end(), a.c.begin(), a.c.end());
    } else if ((int)a.c.size() > -k) {
        r.c.assign(a.c.begin() + (-k), a.c.end());
    }
    r.normalize();
    return r;
}

inline UPoly operator*(const UPoly &a, const UPoly &b)
{
    check_same(a, b);
    Field F = a.F ? a.F : b.F;
    UPoly r(F);
    if (a.is_zero() || b.is_zero()) return r;
    r.c.assign(a.c.size() + b.c.size() - 1, 0);
    if (F->q == 2) {
        for (size_t i = 0; i < a.c.size(); i++) {
            if (!a.c[i]) continue;
            elem *rp = r.c.data() + i;
            for (size_t j = 0; j < b.c.size(); j++) rp[j] ^= b.c[j];
        }
    } else {
        for (size_t i = 0; i < a.c.size(); i++) {
            if (!a.c[i]) continue;
            for (size_t j = 0; j < b.c.size(); j++)
                if (b.c[j]) r.c[i + j] = F->add(r.c[i + j], F->mul(a.c[i], b.c[j]));
        }
    }
    r.normalize();
    return r;
}

inline UPoly &operator+=(UPoly &a, const UPoly &b) { return a = a + b; }
inline UPoly &operator-=(UPoly &a, const UPoly &b) { return a = a - b; }
inline UPoly &operator*=(UPoly &a, const UPoly &b) { return a = a * b; }

/* in-place reduction of a modulo b, keeping the quotient if asked */
inline void divmod_inplace(std::vector<elem> &r, const UPoly &b, Field F, std::vector<elem> *quo)
{
    int db = b.deg();
    int dr = (int)r.size() - 1;
    while (dr >= 0 && r[dr] == 0) dr--;
    if (quo) quo->assign(dr >= db ? dr - db + 1 : 0, 0);
    if (dr < db) {
        r.resize(dr + 1);
        return;
    }
    elem il = F->inv(b.lc());
    const elem *bp = b.c.data();
    if (F->q == 2) {
        for (int i = dr; i >= db; i--) {
            if (!r[i]) continue;
            if (quo) (*quo)[i - db] = 1;
            elem *rp = r.data() + (i - db);
            for (int j = 0; j <= db; j++) rp[j] ^= bp[j];
        }
    } else {
        for (int i = dr; i >= db; i--) {
            elem co = r[i];
            if (!co) continue;
            co = F->mul(co, il);
            if (quo) (*quo)[i - db] = co;
            elem nco = F->neg(co);
            elem *rp = r.data() + (i - db);
            for (int j = 0; j <= db; j++)
                if (bp[j]) rp[j] = F->add(rp[j], F->mul(nco, bp[j]));
        }
    }
    int n = std::min(dr + 1, db);
    r.resize(std::max(n, 0));
    while (!r.empty() && r.back() == 0) r.pop_back();
}

inline std::pair<UPoly, UPoly> divmod(const UPoly &a, const UPoly &b)
{
    check_same(a, b);
    if (b.is_zero()) throw std::domain_error("division by zero polynomial");
    Field F = a.F ? a.F : b.F;
    std::vector<elem> r = a.c, q;
    divmod_inplace(r, b, F, &q);
    return {UPoly(F, q), UPoly(F, r)};
}

inline UPoly operator%(const UPoly &a, const UPoly &b)
{
    check_same(a, b);
    if (b.is_zero()) throw std::domain_error("division by zero polynomial");
    std::vector<elem> r = a.c;
    divmod_inplace(r, b, a.F ? a.F : b.F, nullptr);
    return UPoly(a.F ? a.F : b.F, r);
}

inline UPoly operator/(const UPoly &a, const UPoly &b) { return divmod(a, b).first; }

/* exact division; throws when b does not divide a */
inline UPoly div_exact(const UPoly &a, const UPoly &b)
{
    auto [qq, rr] = divmod(a, b);
    if (!rr.is_zero()) throw std::logic_error("inexact division");
    return qq;
}

inline UPoly monic(const UPoly &a)
{
    if (a.is_zero()) return a;
    return scale(a, a.F->inv(a.lc()));
}

inline UPoly gcd(UPoly a, UPoly b)
{
    check_same(a, b);
    while (!b.is_zero()) {
        UPoly r = a % b;
        a = std::move(b);
        b = std::move(r);
    }
    return monic(a);
}

/* returns g = gcd, with u*a + v*b = g */
inline UPoly xgcd(const UPoly &a, const UPoly &b, UPoly &u, UPoly &v)
{
    Field F = a.F ? a.F : b.F;
    UPoly r0 = a, r1 = b, s0 = UPoly::one(F), s1(F), t0(F), t1 = UPoly::one(F);
    while (!r1.is_zero()) {
        auto [qq, rr] = divmod(r0, r1);
        r0 = std::move(r1);
        r1 = std::move(rr);
        UPoly s2 = s0 - qq * s1, t2 = t0 - qq * t1;
        s0 = std::move(s1);
        s1 = std::move(s2);
        t0 = std::move(t1);
        t1 = std::move(t2);
    }
    if (r0.is_zero()) {
        u = s0;
        v = t0;
        return r0;
    }
    elem il = F->inv(r0.lc());
    u = scale(s0, il);
    v = scale(t0, il);
    return scale(r0, il);
}

/* inverse of a modulo m (gcd must be 1) */
inline UPoly inv_mod(const UPoly &a, const UPoly &m)
{
    UPoly u, v;
    UPoly g = xgcd(a % m, m, u, v);
    if (!g.is_one()) throw std::domain_error("not invertible");
    return u % m;
}

inline elem eval(const UPoly &a, elem x)
{
    elem r = 0;
    for (int i = (int)a.c.size() - 1; i >= 0; i--) r = a.F->add(a.F->mul(r, x), a.c[i]);
    return r;
}

inline UPoly derivative(const UPoly &a)
{
    UPoly r(a.F);
    if (a.c.size() <= 1) return r;
    r.c.resize(a.c.size() - 1);
    for (size_t i = 1; i < a.c.size(); i++) r.c[i - 1] = a.F->mul(a.F->from_int((int64_t)(i % a.F->p)), a.c[i]);
    r.normalize();
    return r;
}

inline UPoly pow(const UPoly &a, uint64_t e)
{
    UPoly r = UPoly::one(a.F), b = a;
    while (e) {
        if (e & 1) r = r * b;
        e >>= 1;
        if (e) b = b * b;
    }
    return r;
}

inline UPoly mulmod(const UPoly &a, const UPoly &b, const UPoly &m) { return (a * b) % m; }

/* a^p mod m through the Frobenius: (sum a_i t^i)^p = sum a_i^p t^{ip} */
inline UPoly frob_mod(const UPoly &a, const UPoly &m)
{
    Field F = a.F;
    if (a.is_zero()) return a;
    uint32_t p = F->p;
    std::vector<elem> r((a.c.size() - 1) * p + 1, 0);
    for (size_t i = 0; i < a.c.size(); i++) r[i * p] = F->frob(a.c[i]);
    divmod_inplace(r, m, F, nullptr);
    return UPoly(F, r);
}

/* a^(q^j) mod m */
inline UPoly frob_q_mod(UPoly a, const UPoly &m, uint64_t j)
{
    uint64_t steps = j * a.F->m;
    a = a % m;
    for (uint64_t s = 0; s < steps; s++) a = frob_mod(a, m);
    return a;
}

inline UPoly powmod(const UPoly &a, const bigint &e, const UPoly &m)
{
    UPoly r = UPoly::one(a.F) % m, b = a % m;
    bigint x = e;
    unsigned nb = x == 0 ? 0 : (unsigned)msb(x) + 1;
    for (int i = (int)nb - 1; i >= 0; i--) {
        r = mulmod(r, r, m);
        if (bit_test(x, i)) r = mulmod(r, b, m);
    }
    return r;
}

inline std::vector<uint64_t> prime_factors(uint64_t n)
{
    std::vector<uint64_t> r;
    for (uint64_t d = 2; d * d <= n; d++)
        if (n % d == 0) {
            r.push_back(d);
            while (n % d == 0) n /= d;
        }
    if (n > 1) r.push_back(n);
    return r;
}

inline int moebius(uint64_t n)
{
    int mu = 1;
    for (uint64_t d = 2; d * d <= n; d++)
        if (n % d == 0) {
            n /= d;
            if (n % d == 0) return 0;
            mu = -mu;
        }
    if (n > 1) mu = -mu;
    return mu;
}

/* k I_k = sum_{h | k} mu(h) q^(k/h) */
inline bigint count_irreducibles(Field F, int k)
{
    if (k < 1) throw std::invalid_argument("degree must be >= 1");
    bigint s = 0;
    for (int h = 1; h <= k; h++) {
        if (k % h) continue;
        int mu = moebius(h);
        if (!mu) continue;
        bigint t = boost::multiprecision::pow(bigint(F->q), k / h);
        s += mu > 0 ? t : bigint(-t);
    }
    return s / k;
}

/* Rabin: f of degree n is irreducible iff t^{q^n} = t mod f and
 * gcd(t^{q^{n/r}} - t, f) = 1 for every prime r | n */
inline bool is_irreducible(const UPoly &f)
{
    int n = f.deg();
    if (n < 1) throw std::invalid_argument("irreducibility of a constant");
    if (n == 1) return true;
    Field F = f.F;
    UPoly fm = monic(f);
    UPoly tt = UPoly::monomial(F, 1);
    auto pf = prime_factors((uint64_t)n);
    std::vector<int> checks;
    for (auto r : pf) checks.push_back(n / (int)r);
    std::sort(checks.begin(), checks.end());
    UPoly x = tt % fm;
    int at = 0;
    for (int c : checks) {
        x = frob_q_mod(x, fm, c - at);
        at = c;
        if (!gcd(x - tt, fm).is_one()) return false;
    }
    x = frob_q_mod(x, fm, n - at);
    return x == tt % fm;
}

/* distinct-degree profile: pairs (degree, number of distinct irreducible
 * factors of that degree) */
inline std::vector<std::pair<int, int>> ddf_profile(const UPoly &f)
{
    std::vector<std::pair<int, int>> out;
    if (f.deg() < 1) return out;
    Field F = f.F;
    UPoly g = monic(f);
    UPoly tt = UPoly::monomial(F, 1);
    UPoly x = tt % g;
    for (int i = 1; 2 * i <= g.deg(); i++) {
        x = frob_q_mod(x, g, 1);
        UPoly h = gcd(x - tt, g);
        if (h.is_one()) continue;
        out.push_back({i, h.deg() / i});
        while (!h.is_one()) {
            g = div_exact(g, h);
            h = gcd(g, h);
        }
        if (g.deg() < 1) break;
        x = x % g;
    }
    /* every factor left has degree > deg g / 2 */
    if (g.deg() >= 1) out.push_back({g.deg(), 1});
    std::sort(out.begin(), out.end());
    return out;
}

/* largest degree of an irreducible factor */
inline int max_irreducible_factor_degree(const UPoly &f)
{
    int best = 0;
    for (auto &pr : ddf_profile(f)) best = std::max(best, pr.first);
    return best;
}

/* product of the distinct irreducible factors of exact degree n */
inline UPoly factors_of_degree(const UPoly &f, int n)
{
    Field F = f.F;
    UPoly g = monic(f);
    UPoly tt = UPoly::monomial(F, 1);
    if (g.deg() < n) return UPoly::one(F);
    UPoly x = frob_q_mod(tt, g, n);
    UPoly P = gcd(x - tt, g);
    for (auto r : prime_factors((uint64_t)n)) {
        if (P.deg() < 1) break;
        UPoly y = frob_q_mod(tt, P, n / (int)r);
        UPoly h = gcd(y - tt, P);
        if (!h.is_one()) P = div_exact(P, h);
    }
    return P;
}

/* multiplicity of ell in f (f nonzero) */
inline int valuation(UPoly f, const UPoly &ell)
{
    int v = 0;
    while (!f.is_zero()) {
        auto [qq, rr] = divmod(f, ell);
        if (!rr.is_zero()) break;
        f = std::move(qq);
        v++;
    }
    return v;
}

namespace detail {

inline void split_equal_degree(const UPoly &h, int i, std::vector<UPoly> &out, uint64_t &seed)
{
    if (h.deg() == i) {
        out.push_back(h);
        return;
    }
    Field F = h.F;
    while (true) {
        /* splitmix64 stream for the random splitting element */
        std::vector<elem> co(h.deg());
        for (auto &c : co) {
            uint64_t z = (seed += 0x9e3779b97f4a7c15ull);
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
            c = (elem)((z ^ (z >> 31)) % F->q);
        }
        UPoly a(F, co);
        if (a.deg() < 1) continue;
        UPoly b;
        if (F->p == 2) {
            b = a;
            UPoly y = a;
            for (uint64_t j = 1; j < (uint64_t)F->m * i; j++) {
                y = mulmod(y, y, h);
                b += y;
            }
        } else {
            bigint e = (boost::multiprecision::pow(bigint(F->q), i) - 1) / 2;
            b = powmod(a, e, h) - UPoly::one(F);
        }
        UPoly d = gcd(b, h);
        if (d.deg() > 0 && d.deg() < h.deg()) {
            split_equal_degree(d, i, out, seed);
            split_equal_degree(div_exact(h, d), i, out, seed);
            return;
        }
    }
}

} // namespace detail

/* distinct monic irreducible factors, in canonical order */
inline std::vector<UPoly> irreducible_factors(const UPoly &f)
{
    std::vector<UPoly> out;
    if (f.deg() < 1) return out;
    Field F = f.F;
    UPoly g = monic(f);
    UPoly tt = UPoly::monomial(F, 1);
    UPoly x = tt % g;
    uint64_t seed = 0x5eed;
    for (int i = 1; 2 * i <= g.deg(); i++) {
        x = frob_q_mod(x, g, 1);
        UPoly h = gcd(x - tt, g);
        if (h.is_one()) continue;
        detail::split_equal_degree(h, i, out, seed);
        while (!h.is_one()) {
            g = div_exact(g, h);
            h = gcd(g, h);
        }
        if (g.deg() < 1) break;
        x = x % g;
    }
    if (g.deg() >= 1) out.push_back(g);
    std::sort(out.begin(), out.end());
    return out;
}

/* ---- irreducible enumeration ---- */

namespace detail {

inline uint64_t ipow(uint64_t b, int e)
{
    uint64_t r = 1;
    while (e-- > 0) r *= b;
    return r;
}

/* multiply two monic polynomials given by codes (leading term included) */
inline uint64_t mul_codes(Field F, uint64_t a, uint64_t b)
{
    if (F->q == 2) {
        uint64_t r = 0;
        while (a) {
            int i = __builtin_ctzll(a);
            r ^= b << i;
            a &= a - 1;
        }
        return r;
    }
    elem da[64], db[64], dr[128];
    int na = 0, nb = 0;
    uint32_t q = F->q;
    while (a) {
        da[na++] = a % q;
        a /= q;
    }
    while (b) {
        db[nb++] = b % q;
        b /= q;
    }
    for (int i = 0; i < na + nb - 1; i++) dr[i] = 0;
    for (int i = 0; i < na; i++)
        if (da[i])
            for (int j = 0; j < nb; j++)
                if (db[j]) dr[i + j] = F->add(dr[i + j], F->mul(da[i], db[j]));
    uint64_t r = 0;
    for (int i = na + nb - 2; i >= 0; i--) r = r * q + dr[i];
    return r;
}

struct irred_cache {
    std::mutex mu;
    std::map<std::pair<Field, int>, std::shared_ptr<const std::vector<uint64_t>>> map;
    static irred_cache &get()
    {
        static irred_cache c;
        return c;
    }
};

constexpr uint64_t kSieveLimit = 1ull << 26;

} // namespace detail

/* monic irreducibles of degree k as codes (leading q^k included), in
 * increasing code order, i.e. lexicographic with the constant coefficient
 * least significant */
inline std::shared_ptr<const std::vector<uint64_t>> irreducible_codes(Field F, int k)
{
    if (k < 1) throw std::invalid_argument("degree must be >= 1");
    double lg = k * std::log2((double)F->q);
    if (lg > 62) throw resource_error("irreducible enumeration beyond 64-bit codes");
    auto &cache = detail::irred_cache::get();
    {
        std::lock_guard<std::mutex> lk(cache.mu);
        auto it = cache.map.find({F, k});
        if (it != cache.map.end()) return it->second;
    }
    uint64_t q = F->q, qk = detail::ipow(q, k);
    auto out = std::make_shared<std::vector<uint64_t>>();
    if (k == 1) {
        for (uint64_t c = 0; c < q; c++) out->push_back(q + c);
    } else if (qk <= detail::kSieveLimit) {
        std::vector<uint8_t> composite(qk, 0);
        for (int j = 1; 2 * j <= k; j++) {
            auto small = irreducible_codes(F, j);
            uint64_t qkj = detail::ipow(q, k - j), top = qkj;
            for (uint64_t a : *small)
                for (uint64_t b = 0; b < qkj; b++) {
                    uint64_t prod = detail::mul_codes(F, a, top + b);
                    composite[prod - qk] = 1;
                }
        }
        out->reserve((size_t)(qk / k + 16));
        for (uint64_t i = 0; i < qk; i++)
            if (!composite[i]) out->push_back(qk + i);
    } else {
        for (uint64_t i = 0; i < qk; i++) {
            UPoly f = UPoly::from_code(F, qk + i);
            if (f[0] == 0) continue;
            if (is_irreducible(f)) out->push_back(qk + i);
        }
    }
    std::shared_ptr<const std::vector<uint64_t>> res = out;
    std::lock_guard<std::mutex> lk(cache.mu);
    cache.map.emplace(std::make_pair(F, k), res);
    return res;
}

inline std::vector<UPoly> irreducibles_of_degree(Field F, int k)
{
    auto codes = irreducible_codes(F, k);
    std::vector<UPoly> r;
    r.reserve(codes->size());
    for (auto c : *codes) r.push_back(UPoly::from_code(F, c));
    return r;
}

/* ---- text forms ---- */

inline std::string to_hex(const UPoly &a)
{
    if (a.F->q != 2) throw std::invalid_argument("hex encoding is for F_2 only");
    if (a.is_zero()) return "0x0";
    std::string s;
    int n = (int)a.c.size();
    for (int i = ((n + 3) / 4) * 4 - 4; i >= 0; i -= 4) {
        int v = 0;
        for (int b = 3; b >= 0; b--) v = v * 2 + (int)a[i + b];
        s.push_back("0123456789abcdef"[v]);
    }
    return "0x" + s;
}

inline std::string to_commas(const UPoly &a)
{
    if (a.is_zero()) return "0";
    std::string s;
    for (size_t i = 0; i < a.c.size(); i++) {
        if (i) s += ",";
        s += std::to_string(a.c[i]);
    }
    return s;
}

/* default machine encoding: hex for F_2, coefficient list otherwise */
inline std::string encode(const UPoly &a) { return a.F->q == 2 ? to_hex(a) : to_commas(a); }

inline std::string pretty(const UPoly &a)
{
    if (a.is_zero()) return "0";
    std::string s;
    for (int i = a.deg(); i >= 0; i--) {
        elem co = a[i];
        if (!co) continue;
        if (!s.empty()) s += "+";
        bool showc = co != 1 || i == 0;
        if (showc) s += std::to_string(co);
        if (i >= 1) {
            if (showc) s += "*";
            s += "t";
            if (i >= 2) s += "^" + std::to_string(i);
        }
    }
    return s;
}

inline std::ostream &operator<<(std::ostream &os, const UPoly &a) { return os << pretty(a); }

} // namespace ffsel
