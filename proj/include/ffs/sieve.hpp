#pragma once
/* The alpha sieve: alpha_ell for every polynomial of a coefficient range.
 *
 * For a head h = (f_d, ..., f_2) and a residue r mod ell^k, the tails
 * (f_1, f_0) with f(r) = 0 mod ell^k are the solutions of the linear system
 * f_0 + f_1 r = -sum f_i r^i over F_q; they are enumerated directly from a
 * row-reduced form cached per (k, r).  Residues are visited depth first and
 * a node with no solution for h is not lifted.
 *
 * Projective roots are sieved per head: only heads with ell | f_d carry
 * them.  When the tail cannot reach the level cap (its terms carry y^(d-1)
 * with ell | y) a head's count is shared by all its tails, otherwise each
 * tail is lifted on its own.  affine_only skips this part, as the plain
 * affine sieve does.
 */

#include "alpha.hpp"

#include <json.hpp>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

namespace ffsel {

enum class Lead { any, monic, nonzero };

/* f = sum f_i x^i with deg_t f_i <= e[i] (e[i] = -1 forces f_i = 0).
 * Candidate index: mixed radix over coefficient codes, f_0 fastest. */
struct CandidateRange {
    Field F = nullptr;
    int d = 0;
    std::vector<int> e;
    Lead lead = Lead::any;

    CandidateRange() = default;
    CandidateRange(Field f, std::vector<int> bounds, Lead l = Lead::any) : F(f), e(std::move(bounds)), lead(l)
    {
        if (e.size() < 2) throw config_error("candidate range needs deg_x >= 1");
        d = (int)e.size() - 1;
        for (int b : e)
            if (b < -1) throw config_error("coefficient bound below -1");
        strides_.assign(d + 2, 1);
        for (int i = 0; i <= d; i++) {
            uint64_t r = radix(i);
            if (r != 0 && strides_[i] > (std::numeric_limits<uint64_t>::max() >> 2) / r)
                throw resource_error("candidate range too large for a 64-bit index");
            strides_[i + 1] = strides_[i] * r;
        }
    }

    uint64_t full(int i) const
    {
        if (e[i] < 0) return 1;
        double lg = (e[i] + 1) * std::log2((double)F->q);
        if (lg > 62) throw resource_error("coefficient bound too large for a 64-bit index");
        return detail::ipow(F->q, e[i] + 1);
    }
    uint64_t radix(int i) const
    {
        /* a constrained lead with e[d] = -1 leaves the range empty */
        if (i == d && lead == Lead::monic) return e[d] >= 0 ? 1 : 0;
        if (i == d && lead == Lead::nonzero) return full(i) - 1;
        return full(i);
    }
    uint64_t stride(int i) const { return strides_[i]; }
    uint64_t size() const { return strides_[d + 1]; }

    /* the coordinate f_1 joins the solved tail unless it is a constrained lead */
    bool f1_in_tail() const { return d > 1 || lead == Lead::any; }
    uint64_t tail_size() const { return f1_in_tail() ? radix(0) * radix(1) : radix(0); }
    uint64_t head_size() const { return size() ? size() / tail_size() : 0; }
    int first_head_coord() const { return f1_in_tail() ? 2 : 1; }

    uint64_t code_of_digit(int i, uint64_t v) const
    {
        if (i == d && lead == Lead::monic) return 1;
        if (i == d && lead == Lead::nonzero) return v + 1;
        return v;
    }
    std::optional<uint64_t> digit_of_code(int i, uint64_t code) const
    {
        if (code >= full(i)) return std::nullopt;
        if (i == d && lead == Lead::monic) return code == 1 ? std::optional<uint64_t>(0) : std::nullopt;
        if (i == d && lead == Lead::nonzero) return code ? std::optional<uint64_t>(code - 1) : std::nullopt;
        return code;
    }

    BiPoly candidate(uint64_t idx) const
    {
        if (idx >= size()) throw std::out_of_range("candidate index");
        BiPoly f(F);
        f.c.resize(d + 1);
        for (int i = 0; i <= d; i++) {
            uint64_t v = (idx / strides_[i]) % radix(i);
            f.c[i] = UPoly::from_code(F, code_of_digit(i, v));
        }
        f.normalize();
        return f;
    }

    std::optional<uint64_t> index_of(const BiPoly &f) const
    {
        if (f.d() > d) return std::nullopt;
        uint64_t idx = 0;
        for (int i = 0; i <= d; i++) {
            UPoly c = f.coef(i);
            if (c.deg() > e[i]) return std::nullopt;
            auto v = digit_of_code(i, c.code());
            if (!v) return std::nullopt;
            idx += *v * strides_[i];
        }
        return idx;
    }

    std::string key() const
    {
        std::ostringstream os;
        os << "p=" << F->p << ";m=" << F->m << ";d=" << d << ";e=";
        for (int i = 0; i <= d; i++) os << (i ? "," : "") << e[i];
        os << ";lead=" << (lead == Lead::monic ? "monic" : lead == Lead::nonzero ? "nonzero" : "any");
        return os.str();
    }

  private:
    std::vector<uint64_t> strides_;
};

namespace detail {

/* A x = b over F_q with A fixed: P A = R in reduced row echelon form */
struct AffineSolver {
    Field F;
    int rows = 0, cols = 0, rank = 0;
    std::vector<std::vector<elem>> P, R;
    std::vector<int> pivot;      /* pivot column of row i < rank */
    std::vector<std::vector<elem>> kernel;

    AffineSolver(Field f, std::vector<std::vector<elem>> A) : F(f), R(std::move(A))
    {
        rows = (int)R.size();
        cols = rows ? (int)R[0].size() : 0;
        P.assign(rows, std::vector<elem>(rows, 0));
        for (int i = 0; i < rows; i++) P[i][i] = 1;
        for (int c = 0; c < cols && rank < rows; c++) {
            int pr = -1;
            for (int i = rank; i < rows; i++)
                if (R[i][c]) {
                    pr = i;
                    break;
                }
            if (pr < 0) continue;
            std::swap(R[pr], R[rank]);
            std::swap(P[pr], P[rank]);
            elem iv = F->inv(R[rank][c]);
            for (auto &x : R[rank]) x = F->mul(x, iv);
            for (auto &x : P[rank]) x = F->mul(x, iv);
            for (int i = 0; i < rows; i++) {
                if (i == rank || !R[i][c]) continue;
                elem s = F->neg(R[i][c]);
                for (int j = 0; j < cols; j++) R[i][j] = F->add(R[i][j], F->mul(s, R[rank][j]));
                for (int j = 0; j < rows; j++) P[i][j] = F->add(P[i][j], F->mul(s, P[rank][j]));
            }
            pivot.push_back(c);
            rank++;
        }
        std::vector<bool> is_piv(cols, false);
        for (int c : pivot) is_piv[c] = true;
        for (int fc = 0; fc < cols; fc++) {
            if (is_piv[fc]) continue;
            std::vector<elem> v(cols, 0);
            v[fc] = 1;
            for (int i = 0; i < rank; i++) v[pivot[i]] = F->neg(R[i][fc]);
            kernel.push_back(std::move(v));
        }
    }

    bool particular(const std::vector<elem> &b, std::vector<elem> &x) const
    {
        x.assign(cols, 0);
        for (int i = 0; i < rows; i++) {
            elem s = 0;
            for (int j = 0; j < rows; j++)
                if (P[i][j] && b[j]) s = F->add(s, F->mul(P[i][j], b[j]));
            if (i < rank) x[pivot[i]] = s;
            else if (s) return false;
        }
        return true;
    }

    /* calls fn on every solution */
    template <class Fn> void for_each(const std::vector<elem> &x0, Fn &&fn) const
    {
        int k = (int)kernel.size();
        std::vector<uint32_t> lam(k, 0);
        std::vector<elem> x = x0;
        while (true) {
            fn(x);
            int i = 0;
            for (; i < k; i++) {
                /* x += ker_i; q steps bring x back, so a wrap carries */
                bool wrap = lam[i] + 1 == F->q;
                lam[i] = wrap ? 0 : lam[i] + 1;
                for (int j = 0; j < cols; j++)
                    if (kernel[i][j]) x[j] = F->add(x[j], kernel[i][j]);
                if (!wrap) break;
            }
            if (i == k) return;
        }
    }
};

inline std::vector<elem> coeff_vec(const UPoly &a, int n)
{
    std::vector<elem> v(n, 0);
    for (int i = 0; i < n && i < (int)a.c.size(); i++) v[i] = a.c[i];
    return v;
}

inline uint64_t code_of(const elem *x, int n, uint32_t q)
{
    uint64_t r = 0;
    for (int i = n - 1; i >= 0; i--) r = r * q + x[i];
    return r;
}

class EllSieve {
  public:
    EllSieve(const CandidateRange &rg, const UPoly &ell, int kmax, bool affine_only)
        : rg_(rg), F_(rg.F), ell_(monic(ell)), affine_only_(affine_only)
    {
        dl_ = ell_.deg();
        if (dl_ < 1) throw std::invalid_argument("sieve: ell must have positive degree");
        K_ = lift_levels(kmax, dl_);
        N_ = std::pow((double)F_->q, dl_);
        nres_ = residue_count(F_, dl_);
        lpow_.assign(K_ + 2, UPoly::one(F_));
        for (int i = 1; i <= K_ + 1; i++) lpow_[i] = lpow_[i - 1] * ell_;
        w_.assign(K_ + 1, 0.0);
        for (int k = 1; k <= K_; k++) {
            w_[k] = dl_ / (N_ + 1) / std::pow(N_, k - 1);
            if (k == K_) w_[k] *= N_ / (N_ - 1);
        }
        n0_ = rg_.e[0] + 1;
        n1_ = rg_.f1_in_tail() ? rg_.e[1] + 1 : 0;
        if (n0_ < 0) n0_ = 0;
        if (n1_ < 0) n1_ = 0;
    }

    double base() const { return dl_ / (N_ - 1); }

    /* subtract the root weights of every candidate with head index in
     * [h0, h1) from acc, where acc[0] is candidate h0 * tail_size */
    void run(uint64_t h0, uint64_t h1, double *acc)
    {
        uint64_t T = rg_.tail_size();
        for (uint64_t h = h0; h < h1; h++) {
            BiPoly head = head_poly(h);
            double *row = acc + (h - h0) * T;
            affine(head, row);
            if (!affine_only_) projective(head, row);
        }
    }

  private:
    const CandidateRange &rg_;
    Field F_;
    UPoly ell_;
    bool affine_only_;
    int dl_ = 0, K_ = 0, n0_ = 0, n1_ = 0;
    double N_ = 0;
    uint64_t nres_ = 0;
    std::vector<UPoly> lpow_;
    std::vector<double> w_;
    std::map<std::pair<int, uint64_t>, std::unique_ptr<AffineSolver>> cache_;

    BiPoly head_poly(uint64_t h) const
    {
        BiPoly f(F_);
        f.c.assign(rg_.d + 1, UPoly(F_));
        int c0 = rg_.first_head_coord();
        uint64_t idx = h * rg_.tail_size();
        for (int i = c0; i <= rg_.d; i++) {
            uint64_t v = (idx / rg_.stride(i)) % rg_.radix(i);
            f.c[i] = UPoly::from_code(F_, rg_.code_of_digit(i, v));
        }
        return f;   /* not normalized: f.c has d+1 slots */
    }

    uint64_t tail_index(const std::vector<elem> &x) const
    {
        uint64_t c0 = code_of(x.data(), n0_, F_->q);
        uint64_t idx = c0 * rg_.stride(0);
        if (n1_) idx += code_of(x.data() + n0_, n1_, F_->q) * rg_.stride(1);
        return idx;
    }

    const AffineSolver &solver(int k, const UPoly &r)
    {
        /* without f_1 in the tail the system does not depend on r */
        auto key = std::make_pair(k, n1_ ? r.code() : 0);
        auto it = cache_.find(key);
        if (it != cache_.end()) return *it->second;
        if (cache_.size() > (1u << 15)) cache_.clear();
        const UPoly &m = lpow_[k];
        int D = m.deg();
        std::vector<std::vector<elem>> A(D, std::vector<elem>(n0_ + n1_, 0));
        for (int j = 0; j < n0_; j++) {
            auto v = coeff_vec(UPoly::monomial(F_, j) % m, D);
            for (int i = 0; i < D; i++) A[i][j] = v[i];
        }
        for (int j = 0; j < n1_; j++) {
            auto v = coeff_vec(shift(r, j) % m, D);
            for (int i = 0; i < D; i++) A[i][n0_ + j] = v[i];
        }
        auto p = std::make_unique<AffineSolver>(F_, std::move(A));
        auto &ref = *p;
        cache_.emplace(key, std::move(p));
        return ref;
    }

    void affine(const BiPoly &head, double *row)
    {
        int c0 = rg_.first_head_coord();
        std::vector<std::pair<UPoly, int>> stack;
        for (uint64_t code = nres_; code-- > 0;) stack.push_back({UPoly::from_code(F_, code), 1});
        std::vector<elem> x;
        while (!stack.empty()) {
            auto [r, k] = stack.back();
            stack.pop_back();
            const UPoly &m = lpow_[k];
            UPoly c(F_), rp = UPoly::one(F_);
            for (int i = 1; i < c0; i++) rp = (rp * r) % m;
            for (int i = c0; i <= rg_.d; i++) {
                rp = (rp * r) % m;
                if (!head.c[i].is_zero()) c += (head.c[i] * rp) % m;
            }
            c = -(c % m);
            const AffineSolver &S = solver(k, r);
            if (!S.particular(coeff_vec(c, m.deg()), x)) continue;
            double w = w_[k];
            S.for_each(x, [&](const std::vector<elem> &sol) { row[tail_index(sol)] -= w; });
            if (k < K_)
                for (uint64_t code = nres_; code-- > 0;)
                    stack.push_back({r + UPoly::from_code(F_, code) * lpow_[k], k + 1});
        }
    }

    /* weight of the projective roots of rev = sum f_{d-j} y^j, d = deg_x f */
    double projective_weight(const BiPoly &f) const
    {
        int d = f.d();
        double total = 0;
        std::vector<std::pair<UPoly, int>> stack{{UPoly(F_), 1}};
        while (!stack.empty()) {
            auto [y, k] = stack.back();
            stack.pop_back();
            const UPoly &m = lpow_[k];
            UPoly acc(F_);
            for (int j = d; j >= 0; j--) acc = (acc * y + f.coef(d - j)) % m;
            if (!acc.is_zero()) continue;
            total += w_[k];
            if (k < K_)
                for (uint64_t code = 0; code < nres_; code++)
                    stack.push_back({y + UPoly::from_code(F_, code) * lpow_[k], k + 1});
        }
        return total;
    }

    void projective(const BiPoly &head, double *row)
    {
        int d = rg_.d;
        uint64_t T = rg_.tail_size();
        bool lead_in_head = rg_.first_head_coord() <= d && !head.c[d].is_zero();
        if (lead_in_head) {
            if (!(head.c[d] % ell_).is_zero()) return;
            /* tail terms carry y^(d-1) or y^d with ell | y */
            int tail_val = rg_.f1_in_tail() ? d - 1 : d;
            if (tail_val >= K_) {
                BiPoly f = head;
                f.normalize();
                double w = projective_weight(f);
                if (w != 0)
                    for (uint64_t i = 0; i < T; i++) row[i] -= w;
                return;
            }
        }
        /* a zero f_d leaves the actual degree to the tail */
        for (uint64_t i = 0; i < T; i++) {
            BiPoly f = head;
            f.c[0] = UPoly::from_code(F_, (i / rg_.stride(0)) % rg_.radix(0));
            if (rg_.f1_in_tail()) f.c[1] = UPoly::from_code(F_, (i / rg_.stride(1)) % rg_.radix(1));
            f.normalize();
            if (f.d() < 1 || !(f.lc() % ell_).is_zero()) continue;
            row[i] -= projective_weight(f);
        }
    }
};

template <class Fn> void parallel_heads(uint64_t H, int jobs, Fn &&fn)
{
    jobs = (int)std::max<int64_t>(1, std::min<int64_t>(jobs, (int64_t)H));
    if (jobs <= 1) {
        fn(0, H);
        return;
    }
    std::vector<std::thread> th;
    uint64_t chunk = (H + jobs - 1) / jobs;
    for (int w = 0; w < jobs; w++) {
        uint64_t a = w * chunk, b = std::min(H, a + chunk);
        if (a >= b) break;
        th.emplace_back([&, a, b] { fn(a, b); });
    }
    for (auto &t : th) t.join();
}

inline void check_memory(uint64_t cells, uint64_t limit)
{
    if (cells > limit / sizeof(double))
        throw resource_error("sieve accumulator needs " + std::to_string(cells * sizeof(double)) +
                             " bytes, above the limit of " + std::to_string(limit));
}

} // namespace detail

struct SieveOptions {
    int kmax = -1;                    /* -1: default_sieve_kmax */
    bool affine_only = false;
    int jobs = 1;
    uint64_t memory_limit = 4ull << 30;
};

/* q^kmax about 2^24, i.e. 24 for q = 2 */
inline int default_sieve_kmax(Field F)
{
    return std::max(1, (int)std::lround(24.0 / std::log2((double)F->q)));
}

/* Each surviving residue mod ell^k spawns N children, each with its own
 * elimination, so the sieve only beats per-candidate root finding when
 * the top level q^(K deg ell) is not much bigger than the tail.  The
 * factor 4 is measured over F_2, d = 4..6. */
inline bool sieve_pays_off(const CandidateRange &rg, const UPoly &ell, int kmax)
{
    int dl = ell.deg();
    double top = lift_levels(kmax, dl) * dl * std::log2((double)rg.F->q);
    return top <= std::log2(4.0 * (double)rg.tail_size());
}

/* one pass for ell, added into acc[0 .. (h1-h0) * tail_size) */
inline void sieve_alpha_ell_into(const CandidateRange &rg, const UPoly &ell, int kmax, bool affine_only, int jobs,
                                 uint64_t h0, uint64_t h1, double *acc)
{
    uint64_t T = rg.tail_size();
    detail::EllSieve probe(rg, ell, kmax, affine_only);
    double b = probe.base();
    for (uint64_t i = 0; i < (h1 - h0) * T; i++) acc[i] += b;
    detail::parallel_heads(h1 - h0, jobs, [&](uint64_t a, uint64_t e) {
        detail::EllSieve s(rg, ell, kmax, affine_only);
        s.run(h0 + a, h0 + e, acc + a * T);
    });
}

inline std::vector<double> sieve_alpha_ell(const CandidateRange &rg, const UPoly &ell, int kmax,
                                           bool affine_only = false, int jobs = 1,
                                           uint64_t memory_limit = 4ull << 30)
{
    if (kmax < 1) throw std::invalid_argument("sieve: kmax must be positive");
    detail::check_memory(rg.size(), memory_limit);
    std::vector<double> acc(rg.size(), 0.0);
    if (acc.empty()) return acc;
    sieve_alpha_ell_into(rg, ell, kmax, affine_only, jobs, 0, rg.head_size(), acc.data());
    return acc;
}

/* sum over the monic irreducible ell of degree <= b0, in canonical order */
inline std::vector<double> sieve_alpha(const CandidateRange &rg, int b0, const SieveOptions &o = {})
{
    if (b0 < 1) throw std::invalid_argument("sieve: b0 must be positive");
    int kmax = o.kmax > 0 ? o.kmax : default_sieve_kmax(rg.F);
    detail::check_memory(rg.size(), o.memory_limit);
    std::vector<double> acc(rg.size(), 0.0);
    if (acc.empty()) return acc;
    for (auto &ell : detail::canonical_ells(rg.F, b0, -1))
        sieve_alpha_ell_into(rg, ell, kmax, o.affine_only, o.jobs, 0, rg.head_size(), acc.data());
    return acc;
}

/* ---- shards ----
 *
 * A shard holds the accumulator for a block of heads.  Layout, all integers
 * little endian:
 *   8 bytes  "FFSALPHA"
 *   u32      format version (1)
 *   u32      length L of the range key
 *   L bytes  range key (CandidateRange::key)
 *   u64      range hash, u64 ell-list hash
 *   u32 b0, u32 kmax, u32 affine_only, u32 reserved
 *   u64      shard id, u64 first candidate index, u64 value count
 *   count    IEEE doubles
 * manifest.json in the shard directory lists finished shard ids.
 */

inline uint64_t fnv1a(std::string_view s, uint64_t h = 1469598103934665603ull)
{
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

struct ShardHeader {
    std::string range_key;
    uint64_t range_hash = 0, ell_hash = 0;
    uint32_t b0 = 0, kmax = 0, affine_only = 0;
    uint64_t shard_id = 0, first_index = 0, count = 0;
};

struct Shard {
    ShardHeader header;
    std::vector<double> values;
};

namespace detail {

inline void put_u32(std::string &o, uint32_t v)
{
    for (int i = 0; i < 4; i++) o.push_back((char)((v >> (8 * i)) & 0xff));
}
inline void put_u64(std::string &o, uint64_t v)
{
    for (int i = 0; i < 8; i++) o.push_back((char)((v >> (8 * i)) & 0xff));
}
inline uint64_t get_le(const std::string &s, size_t &pos, int n)
{
    if (pos + n > s.size()) throw std::runtime_error("truncated shard");
    uint64_t v = 0;
    for (int i = 0; i < n; i++) v |= (uint64_t)(unsigned char)s[pos + i] << (8 * i);
    pos += n;
    return v;
}

inline void write_atomic(const std::filesystem::path &p, const std::string &data)
{
    auto tmp = p;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw std::runtime_error("cannot write " + tmp.string());
        os.write(data.data(), (std::streamsize)data.size());
        if (!os) throw std::runtime_error("short write on " + tmp.string());
    }
    std::filesystem::rename(tmp, p);
}

inline std::string read_file(const std::filesystem::path &p)
{
    std::ifstream is(p, std::ios::binary);
    if (!is) throw std::runtime_error("cannot read " + p.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

} // namespace detail

inline uint64_t ell_list_hash(const std::vector<UPoly> &ells)
{
    uint64_t h = fnv1a("ells");
    for (auto &l : ells) h = fnv1a(encode(l) + ";", h);
    return h;
}

inline void write_shard(const std::filesystem::path &p, const ShardHeader &h, const double *v)
{
    std::string o = "FFSALPHA";
    detail::put_u32(o, 1);
    detail::put_u32(o, (uint32_t)h.range_key.size());
    o += h.range_key;
    detail::put_u64(o, h.range_hash);
    detail::put_u64(o, h.ell_hash);
    detail::put_u32(o, h.b0);
    detail::put_u32(o, h.kmax);
    detail::put_u32(o, h.affine_only);
    detail::put_u32(o, 0);
    detail::put_u64(o, h.shard_id);
    detail::put_u64(o, h.first_index);
    detail::put_u64(o, h.count);
    for (uint64_t i = 0; i < h.count; i++) {
        uint64_t bits;
        std::memcpy(&bits, &v[i], 8);
        detail::put_u64(o, bits);
    }
    detail::write_atomic(p, o);
}

inline Shard read_shard(const std::filesystem::path &p)
{
    std::string s = detail::read_file(p);
    if (s.size() < 8 || s.compare(0, 8, "FFSALPHA") != 0) throw std::runtime_error("not a shard: " + p.string());
    size_t pos = 8;
    Shard sh;
    if (detail::get_le(s, pos, 4) != 1) throw std::runtime_error("unknown shard version");
    uint64_t L = detail::get_le(s, pos, 4);
    if (pos + L > s.size()) throw std::runtime_error("truncated shard");
    sh.header.range_key = s.substr(pos, L);
    pos += L;
    sh.header.range_hash = detail::get_le(s, pos, 8);
    sh.header.ell_hash = detail::get_le(s, pos, 8);
    sh.header.b0 = (uint32_t)detail::get_le(s, pos, 4);
    sh.header.kmax = (uint32_t)detail::get_le(s, pos, 4);
    sh.header.affine_only = (uint32_t)detail::get_le(s, pos, 4);
    detail::get_le(s, pos, 4);
    sh.header.shard_id = detail::get_le(s, pos, 8);
    sh.header.first_index = detail::get_le(s, pos, 8);
    sh.header.count = detail::get_le(s, pos, 8);
    if (s.size() - pos != sh.header.count * 8) throw std::runtime_error("shard size mismatch: " + p.string());
    sh.values.resize(sh.header.count);
    for (auto &v : sh.values) {
        uint64_t bits = detail::get_le(s, pos, 8);
        std::memcpy(&v, &bits, 8);
    }
    return sh;
}

struct ShardedRun {
    uint64_t shards = 0, computed = 0, reused = 0;
};

/* streaming sieve_alpha: heads_per_shard heads per shard file, resumable.
 * Shards already listed in the manifest with a matching header are kept. */
inline ShardedRun sieve_alpha_sharded(const CandidateRange &rg, int b0, const SieveOptions &o,
                                      const std::filesystem::path &dir, uint64_t heads_per_shard)
{
    namespace fs = std::filesystem;
    using nlohmann::json;
    if (heads_per_shard == 0) throw config_error("heads per shard must be positive");
    int kmax = o.kmax > 0 ? o.kmax : default_sieve_kmax(rg.F);
    auto ells = detail::canonical_ells(rg.F, b0, -1);
    ShardHeader base;
    base.range_key = rg.key();
    base.range_hash = fnv1a(base.range_key);
    base.ell_hash = ell_list_hash(ells);
    base.b0 = (uint32_t)b0;
    base.kmax = (uint32_t)kmax;
    base.affine_only = o.affine_only;
    uint64_t T = rg.tail_size(), H = rg.head_size();
    detail::check_memory(std::min(H, heads_per_shard) * T, o.memory_limit);
    fs::create_directories(dir);
    fs::path mpath = dir / "manifest.json";
    json man;
    if (fs::exists(mpath)) {
        man = json::parse(detail::read_file(mpath));
        if (man.value("range", "") != base.range_key || man.value("ell_hash", 0ull) != base.ell_hash ||
            man.value("kmax", -1) != kmax || man.value("b0", -1) != b0 ||
            man.value("affine_only", false) != o.affine_only || man.value("heads_per_shard", 0ull) != heads_per_shard)
            throw config_error("shard directory " + dir.string() + " belongs to a different run");
    } else {
        man = json{{"range", base.range_key}, {"range_hash", base.range_hash}, {"ell_hash", base.ell_hash},
                   {"b0", b0}, {"kmax", kmax}, {"affine_only", o.affine_only},
                   {"heads_per_shard", heads_per_shard}, {"done", json::array()}};
    }
    std::set<uint64_t> done;
    for (auto &v : man["done"]) done.insert(v.get<uint64_t>());
    ShardedRun run;
    run.shards = (H + heads_per_shard - 1) / heads_per_shard;
    std::vector<double> acc;
    for (uint64_t id = 0; id < run.shards; id++) {
        char name[32];
        std::snprintf(name, sizeof name, "shard-%06llu.bin", (unsigned long long)id);
        fs::path sp = dir / name;
        if (done.count(id) && fs::exists(sp)) {
            run.reused++;
            continue;
        }
        uint64_t h0 = id * heads_per_shard, h1 = std::min(H, h0 + heads_per_shard);
        acc.assign((h1 - h0) * T, 0.0);
        for (auto &ell : ells) sieve_alpha_ell_into(rg, ell, kmax, o.affine_only, o.jobs, h0, h1, acc.data());
        ShardHeader h = base;
        h.shard_id = id;
        h.first_index = h0 * T;
        h.count = acc.size();
        write_shard(sp, h, acc.data());
        done.insert(id);
        man["done"] = json(std::vector<uint64_t>(done.begin(), done.end()));
        detail::write_atomic(mpath, man.dump(1));
        run.computed++;
    }
    return run;
}

} // namespace ffsel
