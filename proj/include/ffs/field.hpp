#pragma once
/* Finite field contexts F_q, q = p^m.
 *
 * Elements are integer codes sum c_i p^i, c_i the coefficients of the
 * representative polynomial modulo the defining polynomial.  Contexts are
 * interned: make_field always hands back the same object for the same
 * (p, m, modulus), so raw pointers to a context stay valid for the whole
 * process and polynomials can carry them cheaply.
 */

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace ffsel {

using elem = uint32_t;

struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct resource_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline bool is_prime_u64(uint64_t n)
{
    if (n < 2) return false;
    for (uint64_t d = 2; d * d <= n; d++)
        if (n % d == 0) return false;
    return true;
}

class FieldCtx {
  public:
    uint32_t p = 0, m = 0, q = 0;
    std::vector<uint32_t> modulus;   /* over F_p, low to high, monic, size m+1 */

    elem add(elem a, elem b) const
    {
        if (p == 2) return a ^ b;
        if (!addt_.empty()) return addt_[(size_t)a * q + b];
        return add_slow(a, b);
    }
    elem neg(elem a) const
    {
        if (p == 2) return a;
        return negt_[a];
    }
    elem sub(elem a, elem b) const { return add(a, neg(b)); }
    elem mul(elem a, elem b) const
    {
        if (a == 0 || b == 0) return 0;
        if (q == 2) return 1;
        uint32_t s = log_[a] + log_[b];
        if (s >= q - 1) s -= q - 1;
        return exp_[s];
    }
    elem inv(elem a) const
    {
        if (a == 0) throw std::domain_error("inverse of zero");
        if (q == 2) return 1;
        return exp_[(q - 1 - log_[a]) % (q - 1)];
    }
    elem div(elem a, elem b) const { return mul(a, inv(b)); }
    elem pow(elem a, uint64_t e) const
    {
        if (e == 0) return 1;
        if (a == 0) return 0;
        if (q == 2) return 1;
        uint64_t s = ((uint64_t)log_[a] * (e % (q - 1))) % (q - 1);
        return exp_[s];
    }
    /* element of the prime subfield for an integer */
    elem from_int(int64_t v) const
    {
        int64_t r = v % (int64_t)p;
        if (r < 0) r += p;
        return (elem)r;
    }
    /* Frobenius a -> a^p */
    elem frob(elem a) const { return pow(a, p); }
    /* generator of F_q^* used by the tables */
    elem generator() const { return q == 2 ? 1 : exp_[1]; }
    uint32_t log_of(elem a) const { return log_[a]; }
    elem exp_of(uint32_t n) const { return q == 2 ? 1 : exp_[n % (q - 1)]; }
    bool prime_field() const { return m == 1; }

    /* multiplication of codes straight from the definition; used to build tables */
    elem mul_slow(elem a, elem b) const
    {
        std::vector<uint32_t> da = digits(a), db = digits(b);
        std::vector<uint64_t> r(2 * m, 0);
        for (uint32_t i = 0; i < m; i++)
            for (uint32_t j = 0; j < m; j++)
                r[i + j] += (uint64_t)da[i] * db[j];
        for (auto &x : r) x %= p;
        for (int i = 2 * (int)m - 1; i >= (int)m; i--) {
            uint64_t c = r[i];
            if (!c) continue;
            r[i] = 0;
            for (uint32_t j = 0; j < m; j++)
                r[i - m + j] = (r[i - m + j] + (p - c) * modulus[j]) % p;
        }
        elem out = 0;
        for (int i = (int)m - 1; i >= 0; i--) out = out * p + (elem)r[i];
        return out;
    }
    std::vector<uint32_t> digits(elem a) const
    {
        std::vector<uint32_t> d(m);
        for (uint32_t i = 0; i < m; i++) {
            d[i] = a % p;
            a /= p;
        }
        return d;
    }

  private:
    std::vector<uint32_t> exp_, log_;
    std::vector<uint16_t> addt_;
    std::vector<elem> negt_;

    elem add_slow(elem a, elem b) const
    {
        elem r = 0, pw = 1;
        for (uint32_t i = 0; i < m; i++) {
            r += ((a % p + b % p) % p) * pw;
            a /= p;
            b /= p;
            pw *= p;
        }
        return r;
    }

    void build()
    {
        negt_.assign(q, 0);
        for (elem a = 0; a < q; a++) {
            auto d = digits(a);
            elem r = 0;
            for (int i = (int)m - 1; i >= 0; i--) r = r * p + (d[i] ? p - d[i] : 0);
            negt_[a] = r;
        }
        if (p != 2 && q <= 1024) {
            addt_.resize((size_t)q * q);
            for (elem a = 0; a < q; a++)
                for (elem b = 0; b < q; b++) addt_[(size_t)a * q + b] = (uint16_t)add_slow(a, b);
        }
        if (q == 2) return;
        /* smallest primitive element */
        std::vector<uint32_t> pf;
        {
            uint32_t n = q - 1;
            for (uint32_t d = 2; d * d <= n; d++)
                if (n % d == 0) {
                    pf.push_back(d);
                    while (n % d == 0) n /= d;
                }
            if (n > 1) pf.push_back(n);
        }
        exp_.assign(q - 1, 0);
        log_.assign(q, 0);
        for (elem g = 2; g < q + 1; g++) {
            elem gg = g % q;
            if (gg == 0) continue;
            elem x = 1;
            bool ok = true;
            for (uint32_t i = 0; i < q - 1; i++) {
                if (i > 0 && x == 1) {
                    ok = false;
                    break;
                }
                exp_[i] = x;
                x = mul_slow(x, gg);
            }
            if (!ok || x != 1) continue;
            for (uint32_t i = 0; i < q - 1; i++) log_[exp_[i]] = i;
            return;
        }
        throw std::logic_error("no primitive element found");
    }

    friend std::shared_ptr<const FieldCtx> make_field(uint32_t, uint32_t,
                                                      std::optional<std::vector<uint32_t>>);
};

using Field = const FieldCtx *;

namespace detail {

/* small dense polynomials over F_p used only to pick the modulus */
inline bool fp_irreducible_brute(const std::vector<uint32_t> &f, uint32_t p)
{
    /* f monic of degree m over F_p: trial division by all monic polynomials
     * of degree <= m/2.  m is tiny (extension degrees of the base field). */
    int m = (int)f.size() - 1;
    if (m <= 0) return false;
    if (m == 1) return true;
    for (int k = 1; 2 * k <= m; k++) {
        uint64_t cnt = 1;
        for (int i = 0; i < k; i++) cnt *= p;
        for (uint64_t code = 0; code < cnt; code++) {
            std::vector<uint32_t> g(k + 1);
            uint64_t c = code;
            for (int i = 0; i < k; i++) {
                g[i] = c % p;
                c /= p;
            }
            g[k] = 1;
            std::vector<uint64_t> r(f.begin(), f.end());
            for (int i = m; i >= k; i--) {
                uint64_t co = r[i] % p;
                if (!co) continue;
                for (int j = 0; j <= k; j++) r[i - k + j] = (r[i - k + j] + (p - co) * g[j]) % p;
            }
            bool zero = true;
            for (int i = 0; i < k; i++)
                if (r[i] % p) zero = false;
            if (zero) return false;
        }
    }
    return true;
}

inline std::vector<uint32_t> canonical_modulus(uint32_t p, uint32_t m)
{
    /* lexicographically least monic irreducible: coefficient codes compared
     * as the integer sum c_i p^i, lowest degree least significant */
    uint64_t cnt = 1;
    for (uint32_t i = 0; i < m; i++) cnt *= p;
    for (uint64_t code = 0; code < cnt; code++) {
        std::vector<uint32_t> f(m + 1);
        uint64_t c = code;
        for (uint32_t i = 0; i < m; i++) {
            f[i] = c % p;
            c /= p;
        }
        f[m] = 1;
        if (fp_irreducible_brute(f, p)) return f;
    }
    throw std::logic_error("no irreducible polynomial");
}

struct field_registry {
    std::mutex mu;
    std::map<std::tuple<uint32_t, uint32_t, std::vector<uint32_t>>, std::shared_ptr<const FieldCtx>> map;
    static field_registry &get()
    {
        static field_registry r;
        return r;
    }
};

} // namespace detail

inline std::shared_ptr<const FieldCtx> make_field(uint32_t p, uint32_t m,
                                                  std::optional<std::vector<uint32_t>> modulus = std::nullopt)
{
    if (!is_prime_u64(p)) throw config_error("characteristic " + std::to_string(p) + " is not prime");
    if (m < 1) throw config_error("extension degree must be >= 1");
    uint64_t q = 1;
    for (uint32_t i = 0; i < m; i++) {
        q *= p;
        if (q > (1u << 16)) throw config_error("field too large (q > 2^16)");
    }
    std::vector<uint32_t> mod;
    if (m == 1) {
        mod = {0, 1};
        if (modulus && !(modulus->size() == 2 && (*modulus)[1] % p == 1 && (*modulus)[0] % p == 0))
            throw config_error("prime field takes no modulus");
    } else if (modulus) {
        mod = *modulus;
        for (auto &c : mod) c %= p;
        while (!mod.empty() && mod.back() == 0) mod.pop_back();
        if (mod.size() != m + 1) throw config_error("modulus has wrong degree");
        if (mod.back() != 1) throw config_error("modulus must be monic");
        if (!detail::fp_irreducible_brute(mod, p)) throw config_error("modulus is reducible");
    } else {
        mod = detail::canonical_modulus(p, m);
    }
    auto &reg = detail::field_registry::get();
    std::lock_guard<std::mutex> lk(reg.mu);
    auto key = std::make_tuple(p, m, mod);
    auto it = reg.map.find(key);
    if (it != reg.map.end()) return it->second;
    auto F = std::shared_ptr<FieldCtx>(new FieldCtx());
    F->p = p;
    F->m = m;
    F->q = (uint32_t)q;
    F->modulus = mod;
    F->build();
    reg.map.emplace(key, F);
    return F;
}

} // namespace ffsel
