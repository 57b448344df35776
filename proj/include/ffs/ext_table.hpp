#pragma once
/* Residue fields F_q[t]/ell and polynomials over them.
 *
 * ZechField is F_q[y]/P, P primitive, with elements stored as discrete
 * logs (0 is zero, n+1 is alpha^n) and addition through a Zech table.
 * PolyResidueField is the plain quotient F_q[t]/ell with theta = t.  Both
 * expose the same small interface so the root machinery below is written
 * once.
 */

#include "upoly.hpp"

namespace ffsel {

class ZechField {
  public:
    using E = uint32_t;

    static constexpr uint64_t kMaxOrder = 1ull << 22;

    ZechField(Field F, int k) : F_(F), k_(k)
    {
        uint64_t N = 1;
        for (int i = 0; i < k; i++) {
            N *= F->q;
            if (N > kMaxOrder) throw resource_error("extension table too large");
        }
        N_ = N;
        build();
    }

    Field base() const { return F_; }
    int degree() const { return k_; }
    uint64_t order() const { return N_; }
    uint32_t characteristic() const { return F_->p; }
    /* number of p-th power steps in x -> x^N */
    uint64_t frob_steps() const { return (uint64_t)F_->m * k_; }
    const UPoly &modulus() const { return P_; }

    E zero() const { return 0; }
    E one() const { return 1; }
    bool is_zero(E a) const { return a == 0; }
    E mul(E a, E b) const
    {
        if (!a || !b) return 0;
        uint64_t s = (uint64_t)a + b - 2;
        if (s >= N_ - 1) s -= N_ - 1;
        return (E)s + 1;
    }
    E add(E a, E b) const
    {
        if (!a) return b;
        if (!b) return a;
        uint32_t la = a - 1, lb = b - 1;
        if (la > lb) std::swap(la, lb);
        uint32_t z = zech_[lb - la];
        if (z == kNone) return 0;
        uint64_t r = (uint64_t)la + z;
        if (r >= N_ - 1) r -= N_ - 1;
        return (E)r + 1;
    }
    E neg(E a) const
    {
        if (!a || F_->p == 2) return a;
        uint64_t r = (uint64_t)(a - 1) + (N_ - 1) / 2;
        if (r >= N_ - 1) r -= N_ - 1;
        return (E)r + 1;
    }
    E sub(E a, E b) const { return add(a, neg(b)); }
    E inv(E a) const
    {
        if (!a) throw std::domain_error("inverse of zero");
        uint32_t la = a - 1;
        return la ? (E)(N_ - 1 - la) + 1 : 1;
    }
    E pow(E a, uint64_t e) const
    {
        if (e == 0) return 1;
        if (!a) return 0;
        unsigned __int128 s = (unsigned __int128)(a - 1) * (e % (N_ - 1));
        return (E)(uint64_t)(s % (N_ - 1)) + 1;
    }
    E frob(E a) const { return pow(a, F_->p); }
    E from_base(elem c) const { return c ? log_[c] + 1 : 0; }
    E from_log(uint64_t n) const { return (E)(n % (N_ - 1)) + 1; }
    E random(uint64_t z) const { return (E)(z % N_); }
    /* polynomial code sum d_i q^i of an element, d_i in F_q */
    uint32_t code(E a) const { return a ? exp_[a - 1] : 0; }
    E from_code(uint32_t c) const { return c ? log_[c] + 1 : 0; }

    /* degree over F_q of alpha^n: size of the orbit under n -> q n */
    int log_degree(uint64_t n) const
    {
        uint64_t M = N_ - 1, x = n % M;
        int d = 1;
        uint64_t y = (x * F_->q) % M;
        while (y != x) {
            y = (y * F_->q) % M;
            d++;
        }
        return d;
    }
    /* smallest log in the orbit of n, used to pick one theta per ell */
    bool orbit_min(uint64_t n) const
    {
        uint64_t M = N_ - 1, y = (n * F_->q) % M;
        while (y != n) {
            if (y < n) return false;
            y = (y * F_->q) % M;
        }
        return true;
    }

  private:
    static constexpr uint32_t kNone = 0xffffffffu;
    Field F_;
    int k_;
    uint64_t N_;
    UPoly P_;
    std::vector<uint32_t> exp_, log_, zech_;

    void build()
    {
        uint32_t q = F_->q;
        UPoly P = find_primitive();
        P_ = P;
        uint64_t M = N_ - 1;
        exp_.assign(M, 0);
        log_.assign(N_, 0);
        if (k_ == 1) {
            /* alpha is a root of the degree 1 polynomial, so F_q itself */
            for (uint64_t i = 0; i < M; i++) exp_[i] = F_->exp_of((uint32_t)i);
        } else {
            std::vector<elem> cur(k_, 0);
            cur[0] = 1;
            for (uint64_t i = 0; i < M; i++) {
                uint32_t c = 0;
                for (int j = k_ - 1; j >= 0; j--) c = c * q + cur[j];
                exp_[i] = c;
                /* multiply by y modulo P */
                elem top = cur[k_ - 1];
                for (int j = k_ - 1; j > 0; j--) cur[j] = cur[j - 1];
                cur[0] = 0;
                if (top)
                    for (int j = 0; j < k_; j++) cur[j] = F_->sub(cur[j], F_->mul(top, P[j]));
            }
        }
        for (uint64_t i = 0; i < M; i++) log_[exp_[i]] = (uint32_t)i;
        zech_.assign(M, kNone);
        for (uint64_t n = 0; n < M; n++) {
            uint32_t c = exp_[n];
            elem d0 = c % q;
            uint32_t nc = c - d0 + F_->add(d0, 1);
            if (nc) zech_[n] = log_[nc];
        }
    }

    UPoly find_primitive() const
    {
        if (k_ == 1) return UPoly(F_, {F_->neg(F_->generator()), 1});
        uint64_t M = N_ - 1;
        auto pf = prime_factors(M);
        UPoly tt = UPoly::monomial(F_, 1);
        for (uint64_t code : *irreducible_codes(F_, k_)) {
            UPoly P = UPoly::from_code(F_, code);
            bool ok = true;
            for (auto r : pf)
                if (powmod(tt, bigint(M / r), P).is_one()) {
                    ok = false;
                    break;
                }
            if (ok) return P;
        }
        throw std::logic_error("no primitive polynomial");
    }
};

/* F_q[t]/ell with elements as reduced UPoly */
class PolyResidueField {
  public:
    using E = UPoly;

    explicit PolyResidueField(const UPoly &ell) : F_(ell.F), ell_(monic(ell)), k_(ell.deg())
    {
        if (k_ < 1) throw std::invalid_argument("residue field of a constant");
        double lg = k_ * std::log2((double)F_->q);
        if (lg > 62) throw resource_error("residue field order beyond 64 bits");
        N_ = detail::ipow(F_->q, k_);
    }

    Field base() const { return F_; }
    int degree() const { return k_; }
    uint64_t order() const { return N_; }
    uint32_t characteristic() const { return F_->p; }
    uint64_t frob_steps() const { return (uint64_t)F_->m * k_; }
    const UPoly &modulus() const { return ell_; }

    E zero() const { return UPoly(F_); }
    E one() const { return UPoly::one(F_); }
    bool is_zero(const E &a) const { return a.is_zero(); }
    E mul(const E &a, const E &b) const
    {
        if (a.is_zero() || b.is_zero()) return UPoly(F_);
        return (a * b) % ell_;
    }
    E add(const E &a, const E &b) const { return a + b; }
    E neg(const E &a) const { return -a; }
    E sub(const E &a, const E &b) const { return a - b; }
    E inv(const E &a) const { return inv_mod(a, ell_); }
    E pow(const E &a, uint64_t e) const { return powmod(a, bigint(e), ell_); }
    E frob(const E &a) const { return frob_mod(a, ell_); }
    E from_base(elem c) const { return UPoly::constant(F_, c); }
    E theta() const { return UPoly::monomial(F_, 1) % ell_; }
    E random(uint64_t z) const
    {
        std::vector<elem> c(k_);
        for (auto &x : c) {
            x = (elem)(z % F_->q);
            z = z / F_->q * 0x9e3779b97f4a7c15ull + 0x632be59bd9b4e019ull;
        }
        return UPoly(F_, c);
    }

  private:
    Field F_;
    UPoly ell_;
    int k_;
    uint64_t N_;
};

/* dense polynomials over a residue field, coefficients low to high */
template <class R> struct RPolyOps {
    using E = typename R::E;
    using P = std::vector<E>;
    const R &K;

    explicit RPolyOps(const R &k) : K(k) {}

    void trim(P &a) const
    {
        while (!a.empty() && K.is_zero(a.back())) a.pop_back();
    }
    int deg(const P &a) const { return a.empty() ? kDegNegInf : (int)a.size() - 1; }

    P monic(P a) const
    {
        trim(a);
        if (a.empty()) return a;
        E li = K.inv(a.back());
        for (auto &c : a) c = K.mul(c, li);
        return a;
    }
    /* a mod m, m monic */
    void rem_inplace(P &a, const P &m) const
    {
        int dm = deg(m);
        trim(a);
        for (int i = deg(a); i >= dm; i--) {
            E c = a[i];
            if (K.is_zero(c)) continue;
            for (int j = 0; j < dm; j++) a[i - dm + j] = K.sub(a[i - dm + j], K.mul(c, m[j]));
            a[i] = K.zero();
        }
        trim(a);
    }
    P mul(const P &a, const P &b) const
    {
        if (a.empty() || b.empty()) return {};
        P r(a.size() + b.size() - 1, K.zero());
        for (size_t i = 0; i < a.size(); i++) {
            if (K.is_zero(a[i])) continue;
            for (size_t j = 0; j < b.size(); j++) r[i + j] = K.add(r[i + j], K.mul(a[i], b[j]));
        }
        trim(r);
        return r;
    }
    P mulmod(const P &a, const P &b, const P &m) const
    {
        P r = mul(a, b);
        rem_inplace(r, m);
        return r;
    }
    P sub(P a, const P &b) const
    {
        if (a.size() < b.size()) a.resize(b.size(), K.zero());
        for (size_t i = 0; i < b.size(); i++) a[i] = K.sub(a[i], b[i]);
        trim(a);
        return a;
    }
    P add(P a, const P &b) const
    {
        if (a.size() < b.size()) a.resize(b.size(), K.zero());
        for (size_t i = 0; i < b.size(); i++) a[i] = K.add(a[i], b[i]);
        trim(a);
        return a;
    }
    P gcd(P a, P b) const
    {
        trim(a);
        trim(b);
        while (!b.empty()) {
            P m = monic(b);
            rem_inplace(a, m);
            b = std::move(a);
            a = std::move(m);
        }
        return monic(a);
    }
    /* a^p mod m */
    P frobp_mod(const P &a, const P &m) const
    {
        if (a.empty()) return a;
        uint32_t p = K.characteristic();
        P r((a.size() - 1) * p + 1, K.zero());
        for (size_t i = 0; i < a.size(); i++) r[i * p] = K.frob(a[i]);
        rem_inplace(r, m);
        return r;
    }
    /* x^N mod m */
    P x_pow_order(const P &m) const
    {
        P x{K.zero(), K.one()};
        rem_inplace(x, m);
        for (uint64_t s = 0; s < K.frob_steps(); s++) x = frobp_mod(x, m);
        return x;
    }
    P powmod(P b, uint64_t e, const P &m) const
    {
        P r{K.one()};
        rem_inplace(r, m);
        rem_inplace(b, m);
        while (e) {
            if (e & 1) r = mulmod(r, b, m);
            e >>= 1;
            if (e) b = mulmod(b, b, m);
        }
        return r;
    }
    E eval(const P &a, const E &x) const
    {
        E r = K.zero();
        for (int i = deg(a); i >= 0; i--) r = K.add(K.mul(r, x), a[i]);
        return r;
    }
    P derivative(const P &a) const
    {
        P r;
        uint32_t p = K.characteristic();
        for (size_t i = 1; i < a.size(); i++) {
            r.push_back(K.mul(K.from_base((elem)(i % p)), a[i]));
        }
        trim(r);
        return r;
    }
    /* product of the distinct linear factors over R */
    P split_part(const P &h) const
    {
        P m = monic(h);
        if (deg(m) < 1) return {K.one()};
        P xn = x_pow_order(m);
        P x{K.zero(), K.one()};
        return gcd(m, sub(xn, x));
    }
    int count_roots(const P &h) const
    {
        P g = split_part(h);
        return std::max(0, deg(g));
    }

    std::vector<E> roots(const P &h) const
    {
        std::vector<E> out;
        P g = split_part(h);
        uint64_t seed = 0x243f6a8885a308d3ull;
        split(g, out, seed);
        return out;
    }

  private:
    void split(const P &g, std::vector<E> &out, uint64_t &seed) const
    {
        int d = deg(g);
        if (d < 1) return;
        if (d == 1) {
            out.push_back(K.neg(g[0]));
            return;
        }
        uint64_t N = K.order();
        while (true) {
            uint64_t z = (seed += 0x9e3779b97f4a7c15ull);
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
            z ^= z >> 31;
            E delta = K.random(z);
            P b;
            if (K.characteristic() == 2) {
                P y{K.zero(), delta};
                rem_inplace(y, g);
                b = y;
                for (uint64_t s = 1; s < K.frob_steps(); s++) {
                    y = mulmod(y, y, g);
                    b = add(b, y);
                }
            } else {
                P y{delta, K.one()};
                b = powmod(y, (N - 1) / 2, g);
                b = sub(b, P{K.one()});
            }
            P h = gcd(g, b);
            if (deg(h) > 0 && deg(h) < d) {
                split(h, out, seed);
                /* cofactor by exact division */
                split(div_monic(g, h), out, seed);
                return;
            }
        }
    }
    P div_monic(const P &a, const P &b) const
    {
        P r = a;
        int db = deg(b), da = deg(a);
        P q(da - db + 1, K.zero());
        for (int i = da; i >= db; i--) {
            E c = r[i];
            q[i - db] = c;
            if (K.is_zero(c)) continue;
            for (int j = 0; j <= db; j++) r[i - db + j] = K.sub(r[i - db + j], K.mul(c, b[j]));
        }
        trim(q);
        return q;
    }
};

} // namespace ffsel
