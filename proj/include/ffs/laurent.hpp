#pragma once
/* Cancellation at the infinite place: Newton polygon, Laurent roots in 1/t,
 * gaps and alpha_infinity.
 *
 * A node is a Laurent polynomial r + O(t^-(m+1)); extensions of it are
 * r + eps with deg eps <= -(m+1).  Everything is decided from the exact
 * Taylor expansion f(r + eps) = sum_j f^[j](r) eps^j (Hasse derivatives):
 *  - dominated: deg f(r) beats every bound deg f^[j](r) - j(m+1), so no
 *    extension changes deg f
 *  - Hensel: the j = 1 term beats j >= 2 for good and deg f'(R) is fixed;
 *    then exactly one extension per level gains one unit of gap, forever
 *  - otherwise the maximum of deg f(R) is found by branch and bound over
 *    the next coefficient.
 * Only nodes whose gap grows over their truncation are kept as roots.
 */

#include "alpha.hpp"

#include <map>

namespace ffsel {

struct NewtonEdge {
    int x0 = 0, y0 = 0, x1 = 0, y1 = 0;   /* (d - i, deg f_i), x0 < x1 */
    rational slope;                      /* root degree (y1 - y0)/(x1 - x0) */
    int length() const { return x1 - x0; }
    bool integral() const { return boost::multiprecision::denominator(slope) == 1; }
};

struct NewtonPolygon {
    std::vector<std::pair<int, int>> vertices;
    std::vector<NewtonEdge> edges;   /* decreasing slope */
    int length_one_edges() const
    {
        int n = 0;
        for (auto &e : edges) n += e.length() == 1;
        return n;
    }
};

/* hull of {(d-i, deg f_i)} for the valuation -deg: the upper hull in these
 * coordinates, so that a slope delta is a degree where two terms f_i x^i
 * tie for the top */
inline NewtonPolygon newton_polygon(const BiPoly &f)
{
    if (f.is_zero()) throw std::invalid_argument("Newton polygon of zero");
    int d = f.d();
    std::vector<std::pair<int, int>> pts;
    for (int i = d; i >= 0; i--)
        if (!f.c[i].is_zero()) pts.push_back({d - i, f.c[i].deg()});
    std::vector<std::pair<int, int>> hull;
    for (auto &p : pts) {
        while (hull.size() >= 2) {
            auto &a = hull[hull.size() - 2], &b = hull.back();
            /* drop b unless it lies strictly above segment a-p */
            long cross = (long)(b.first - a.first) * (p.second - a.second) -
                         (long)(b.second - a.second) * (p.first - a.first);
            if (cross >= 0) hull.pop_back();
            else break;
        }
        hull.push_back(p);
    }
    NewtonPolygon np;
    np.vertices = hull;
    for (size_t k = 0; k + 1 < hull.size(); k++) {
        NewtonEdge e;
        e.x0 = hull[k].first;
        e.y0 = hull[k].second;
        e.x1 = hull[k + 1].first;
        e.y1 = hull[k + 1].second;
        e.slope = rational(e.y1 - e.y0, e.x1 - e.x0);
        np.edges.push_back(e);
    }
    return np;
}

struct LaurentRoot {
    std::map<int, elem> terms;   /* exponent -> nonzero coefficient */
    int lead_deg = 0;
    int m = 0;                   /* known down to t^-m */
    int gap = 0;
    int gamma = 0;               /* gap minus the gap of the nearest kept truncation */
    bool infinite = false;       /* Hensel-stable: extends forever, one unit of gap per term */
    int parent = -1;             /* index of the nearest kept truncation */
    int N_r() const { return lead_deg + m; }
};

inline std::string to_string(const LaurentRoot &r, Field F)
{
    std::string s;
    for (auto it = r.terms.rbegin(); it != r.terms.rend(); ++it) {
        if (!s.empty()) s += " + ";
        std::string c = it->second == 1 ? "" : std::to_string(it->second);
        if (it->first == 0) s += c.empty() ? "1" : c;
        else s += c + (c.empty() ? "" : "*") + (it->first == 1 ? "t" : "t^" + std::to_string(it->first));
    }
    (void)F;
    int nx = -(r.m + 1);
    s += " + O(" + (nx == 0 ? std::string("1") : nx == 1 ? std::string("t") : "t^" + std::to_string(nx)) + ")";
    return s;
}

namespace detail {

inline uint32_t binom_mod_p(int n, int k, uint32_t p)
{
    /* Lucas */
    uint64_t r = 1;
    while (n || k) {
        int a = n % (int)p, b = k % (int)p;
        if (b > a) return 0;
        uint64_t c = 1;
        for (int i = 0; i < b; i++) c = c * (uint64_t)(a - i) / (uint64_t)(i + 1);
        r = r * (c % p) % p;
        n /= (int)p;
        k /= (int)p;
    }
    return (uint32_t)r;
}

constexpr int kNeg = kDegNegInf / 2;
inline bool is_neg(int v) { return v <= kNeg; }

/* r = P / t^w with w = max(m, 0) */
struct LNode {
    UPoly P;
    int w = 0;
    int m = 0;
    int delta = 0;
};

struct NodeEval {
    std::vector<UPoly> num;    /* f^[j](r) = num[j] / t^shift[j] */
    std::vector<int> shift;
    std::vector<int> g;        /* deg f^[j](r) */
};

class LaurentEngine {
  public:
    explicit LaurentEngine(const BiPoly &f) : f_(f), F_(f.F)
    {
        if (f.d() < 1) throw std::invalid_argument("Laurent roots need deg_x f >= 1");
        d_ = f.d();
        C_.assign(d_ + 1, std::vector<elem>(d_ + 1, 0));
        for (int i = 0; i <= d_; i++)
            for (int j = 0; j <= i; j++) C_[i][j] = F_->from_int(binom_mod_p(i, j, F_->p));
    }

    Field field() const { return F_; }
    int d() const { return d_; }
    const BiPoly &poly() const { return f_; }

    /* top degree of the terms f_i r^i for a root of degree delta */
    int top(int delta) const
    {
        int M = kDegNegInf;
        for (int i = 0; i <= d_; i++)
            if (!f_.c[i].is_zero()) M = std::max(M, f_.c[i].deg() + i * delta);
        return M;
    }

    NodeEval eval(const LNode &n) const
    {
        NodeEval ev;
        std::vector<UPoly> Pp(d_ + 1, UPoly::one(F_));
        for (int k = 1; k <= d_; k++) Pp[k] = Pp[k - 1] * n.P;
        ev.num.assign(d_ + 1, UPoly(F_));
        ev.shift.assign(d_ + 1, 0);
        ev.g.assign(d_ + 1, kDegNegInf);
        for (int j = 0; j <= d_; j++) {
            UPoly acc(F_);
            for (int i = j; i <= d_; i++) {
                if (f_.c[i].is_zero() || !C_[i][j]) continue;
                acc += shift(scale(f_.c[i] * Pp[i - j], C_[i][j]), (d_ - i) * n.w);
            }
            ev.num[j] = acc;
            ev.shift[j] = (d_ - j) * n.w;
            ev.g[j] = acc.is_zero() ? kDegNegInf : acc.deg() - ev.shift[j];
        }
        return ev;
    }

    int bound(const NodeEval &ev, int j, int m) const
    {
        return is_neg(ev.g[j]) ? kDegNegInf : ev.g[j] - j * (m + 1);
    }
    int upper(const NodeEval &ev, int m) const
    {
        int u = ev.g[0];
        for (int j = 1; j <= d_; j++) u = std::max(u, bound(ev, j, m));
        return u;
    }
    bool dominated(const NodeEval &ev, int m) const
    {
        if (is_neg(ev.g[0])) return false;
        for (int j = 1; j <= d_; j++)
            if (bound(ev, j, m) >= ev.g[0]) return false;
        return true;
    }

    /* deg f(R) over the extensions when the node is Hensel-stable */
    std::optional<int> hensel(const NodeEval &ev, int m) const
    {
        int g1 = ev.g[1];
        if (is_neg(g1)) return std::nullopt;
        int B1 = g1 - (m + 1);
        if (!is_neg(ev.g[0]) && ev.g[0] > B1) return std::nullopt;
        /* deg f^[1](R) = g1 for every extension */
        for (int k = 1; k + 1 <= d_; k++) {
            if (!F_->from_int(binom_mod_p(k + 1, k, F_->p))) continue;
            int b = ev.g[1 + k];
            if (!is_neg(b) && b - k * (m + 1) >= g1) return std::nullopt;
        }
        /* the j >= 2 terms stay below the j = 1 term at every depth */
        for (int j = 2; j <= d_; j++) {
            int ub = kDegNegInf;
            for (int k = 0; j + k <= d_; k++) {
                if (!F_->from_int(binom_mod_p(j + k, k, F_->p))) continue;
                if (!is_neg(ev.g[j + k])) ub = std::max(ub, ev.g[j + k] - k * (m + 1));
            }
            if (!is_neg(ub) && ub - j * (m + 1) >= B1) return std::nullopt;
        }
        return B1;
    }

    LNode child(const LNode &n, elem lam) const
    {
        LNode c;
        c.m = n.m + 1;
        c.delta = n.delta;
        c.w = std::max(c.m, 0);
        c.P = shift(n.P, c.w - n.w);
        if (lam) c.P += UPoly::monomial(F_, c.w - c.m, lam);
        return c;
    }

    /* the coefficient that keeps a Hensel-stable node on the root */
    elem hensel_lambda(const NodeEval &ev, int m) const
    {
        int D = ev.g[1] - (m + 1);
        elem c0 = is_neg(ev.g[0]) ? 0 : ev.num[0][D + ev.shift[0]];
        elem l1 = ev.num[1].lc();
        return F_->neg(F_->div(c0, l1));
    }

    /* max over the extensions of deg f(R) */
    int dmax(const LNode &n, int budget) const
    {
        NodeEval ev = eval(n);
        return dmax(n, ev, budget);
    }

    int dmax(const LNode &n, const NodeEval &ev, int budget) const
    {
        if (dominated(ev, n.m)) return ev.g[0];
        if (auto h = hensel(ev, n.m)) return *h;
        if (budget <= 0) throw resource_error("gap search: depth limit reached");
        int U = upper(ev, n.m);
        int best = kDegNegInf;
        /* zero last: on a repeated root of f that branch never ends */
        for (uint32_t k = 1; k <= F_->q; k++) {
            LNode c = child(n, (elem)(k % F_->q));
            NodeEval ce = eval(c);
            if (upper(ce, c.m) <= best) continue;
            best = std::max(best, dmax(c, ce, budget - 1));
            if (best >= U) break;
        }
        return best;
    }

  private:
    BiPoly f_;
    Field F_;
    int d_ = 0;
    std::vector<std::vector<elem>> C_;
};

inline LaurentRoot to_root(const LNode &n, const LaurentEngine &E)
{
    LaurentRoot r;
    for (int i = 0; i < (int)n.P.c.size(); i++)
        if (n.P.c[i]) r.terms[i - n.w] = n.P.c[i];
    r.lead_deg = n.delta;
    r.m = n.m;
    (void)E;
    return r;
}

inline LNode from_root(const LaurentRoot &r, Field F)
{
    if (r.terms.empty()) throw std::invalid_argument("empty Laurent root");
    LNode n;
    n.m = r.m;
    n.w = std::max(r.m, 0);
    n.delta = r.terms.rbegin()->first;
    std::vector<elem> c;
    for (auto &[k, v] : r.terms) {
        if (k < -r.m) throw std::invalid_argument("Laurent root term below its precision");
        int idx = k + n.w;
        if ((int)c.size() <= idx) c.resize(idx + 1, 0);
        c[idx] = v;
    }
    n.P = UPoly(F, c);
    return n;
}

constexpr int kGapDepth = 64;

} // namespace detail

/* gap of (r, m): top degree minus the largest deg f(R) over extensions */
inline int gap(const BiPoly &f, const LaurentRoot &root)
{
    detail::LaurentEngine E(f);
    detail::LNode n = detail::from_root(root, f.F);
    return E.top(n.delta) - E.dmax(n, detail::kGapDepth);
}

struct LaurentResult {
    std::vector<LaurentRoot> roots;
    std::vector<NewtonEdge> fractional_edges;   /* slopes that spawn nothing */
    bool complete = true;                        /* false if m_max cut an unresolved branch */
};

/* every node with a gain in gap, m <= m_max; Hensel-stable chains are
 * written out term by term up to m_max and flagged infinite at the end */
inline LaurentResult laurent_roots(const BiPoly &f, int m_max)
{
    using namespace detail;
    LaurentEngine E(f);
    Field F = f.F;
    LaurentResult out;
    NewtonPolygon np = newton_polygon(f);

    struct Item {
        LNode n;
        int parent_gap;
        int parent;
    };
    auto keep = [&](const LNode &n, int g, int pg, int parent, bool inf) {
        LaurentRoot r = to_root(n, E);
        r.gap = g;
        r.gamma = g - pg;
        r.parent = parent;
        r.infinite = inf;
        out.roots.push_back(r);
        return (int)out.roots.size() - 1;
    };

    for (auto &e : np.edges) {
        if (!e.integral()) {
            out.fractional_edges.push_back(e);
            continue;
        }
        int delta = (int)boost::multiprecision::numerator(e.slope);
        if (-delta > m_max) continue;
        int M = E.top(delta);
        std::vector<Item> stack;
        for (elem lam = F->q; lam-- > 1;) {
            LNode s;
            s.delta = delta;
            s.m = -delta;
            s.w = std::max(s.m, 0);
            s.P = UPoly::monomial(F, delta + s.w, lam);
            stack.push_back({s, 0, -1});
        }
        while (!stack.empty()) {
            Item it = stack.back();
            stack.pop_back();
            NodeEval ev = E.eval(it.n);
            if (auto h = E.hensel(ev, it.n.m)) {
                /* one gaining extension per level from here on */
                int g = M - *h;
                LNode cur = it.n;
                NodeEval ce = ev;
                int parent = it.parent, pg = it.parent_gap;
                while (true) {
                    bool last = cur.m >= m_max;
                    if (g > pg) parent = keep(cur, g, pg, parent, last), pg = g;
                    else if (last && parent >= 0) out.roots[parent].infinite = true;
                    if (last) break;
                    elem lam = E.hensel_lambda(ce, cur.m);
                    cur = E.child(cur, lam);
                    ce = E.eval(cur);
                    g++;
                }
                continue;
            }
            int D = E.dominated(ev, it.n.m) ? ev.g[0] : E.dmax(it.n, ev, kGapDepth);
            int g = M - D;
            int parent = it.parent, pg = it.parent_gap;
            if (g > pg) {
                parent = keep(it.n, g, pg, parent, false);
                pg = g;
            }
            if (E.dominated(ev, it.n.m)) continue;
            if (it.n.m >= m_max) {
                out.complete = false;
                continue;
            }
            for (elem lam = F->q; lam-- > 0;) stack.push_back({E.child(it.n, lam), pg, parent});
        }
    }
    return out;
}

struct AlphaInfResult {
    double value = 0;
    rational exact = 0;
    bool complete = true;
};

/* default precision: every root degree gets about 1e-7 of tail */
inline int default_alpha_inf_mmax(const BiPoly &f)
{
    NewtonPolygon np = newton_polygon(f);
    int lo = 0;
    for (auto &e : np.edges)
        if (e.integral()) lo = std::min(lo, (int)boost::multiprecision::numerator(e.slope));
    int terms = (int)std::ceil(7.0 / std::log10((double)f.F->q)) + 2;
    return terms - lo;
}

/* sum over the kept roots of -gamma q^(-N_r - |s - deg r|)/(q+1); an
 * infinite root adds its tail q^(-N_r - |s - deg r|)/((q+1)(q-1)) */
inline AlphaInfResult alpha_infinity_exact(const BiPoly &f, int s, int m_max = -1)
{
    if (m_max < 0) m_max = default_alpha_inf_mmax(f);
    LaurentResult lr = laurent_roots(f, m_max);
    bigint q = f.F->q;
    AlphaInfResult res;
    res.complete = lr.complete;
    for (auto &r : lr.roots) {
        int e = r.N_r() + std::abs(s - r.lead_deg);
        rational w(1, boost::multiprecision::pow(q, e) * (q + 1));
        res.exact -= r.gamma * w;
        if (r.infinite) res.exact -= w / (q - 1);
    }
    res.value = to_double(res.exact);
    return res;
}

inline double alpha_infinity(const BiPoly &f, int s, int m_max = -1)
{
    return alpha_infinity_exact(f, s, m_max).value;
}

/* main term for a/b matching (r, m) on a domain of skewness s */
inline double match_probability(const LaurentRoot &r, double e, int s, Field F)
{
    if (e < r.N_r() + std::abs(r.lead_deg))
        throw std::invalid_argument("match_probability: e below N_r + |deg r|");
    double q = F->q;
    return std::pow(q, -(double)r.N_r() - std::abs(s - r.lead_deg)) / (q + 1);
}

} // namespace ffsel
