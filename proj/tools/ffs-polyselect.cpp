/* ffs-polyselect: command line front end.
 * Exit codes: 0 ok, 2 configuration error, 3 resource limit, 4 stopped by
 * --stop-after, 1 anything else. */

#include <ffs/ffs.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>

using namespace ffsel;
using ojson = nlohmann::ordered_json;

namespace {

struct FieldArgs {
    uint32_t p = 2, m = 1;
    std::string modulus;
};

std::vector<int> parse_ints(const std::string &s)
{
    std::vector<int> v;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        tok = detail::trim(tok);
        if (tok.empty()) continue;
        try {
            size_t used = 0;
            v.push_back(std::stoi(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception &) {
            throw config_error("not an integer list: " + s);
        }
    }
    return v;
}

std::vector<uint32_t> parse_modulus(const std::string &s)
{
    std::vector<uint32_t> v;
    for (int x : parse_ints(s)) {
        if (x < 0) throw config_error("modulus coefficients must be >= 0");
        v.push_back((uint32_t)x);
    }
    return v;
}

std::shared_ptr<const FieldCtx> field_of(const FieldArgs &a)
{
    std::optional<std::vector<uint32_t>> mod;
    if (!a.modulus.empty()) mod = parse_modulus(a.modulus);
    return make_field(a.p, a.m, mod);
}

void add_field(CLI::App *c, FieldArgs &a)
{
    c->add_option("--p", a.p, "characteristic")->capture_default_str();
    c->add_option("--m", a.m, "base field degree, q = p^m")->capture_default_str();
    c->add_option("--modulus", a.modulus, "defining polynomial of F_q over F_p, coefficients low to high");
}

void emit(const std::string &format, const ojson &j, const std::vector<std::string> &csv_lines)
{
    if (format == "json") {
        std::cout << j.dump(2) << "\n";
    } else if (format == "csv") {
        for (auto &l : csv_lines) std::cout << l << "\n";
    } else {
        throw config_error("unknown format " + format);
    }
}

ojson alpha_json(const AlphaResult &a)
{
    ojson j;
    j["alpha"] = a.value;
    j["b0"] = a.b0;
    j["kmax"] = a.kmax;
    j["ell_count"] = a.ell_count;
    j["cutoff_hit"] = a.cutoff_hit;
    j["heuristic"] = a.heuristic;
    j["error_bound"] = a.error_bound ? ojson(*a.error_bound) : ojson();
    j["per_degree"] = a.per_degree;
    return j;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"function field sieve polynomial selection"};
    app.require_subcommand(1);

    /* rank */
    JobConfig cfg;
    FieldArgs rf;
    int deg_x = -1;
    std::string bounds, lead = "any", metric = "epsilon", alpha_mode = "auto", output;
    std::vector<std::string> cands;
    auto *rk = app.add_subcommand("rank", "rank a range or list of f by epsilon, then E for the best");
    add_field(rk, rf);
    rk->add_option("--n", cfg.n, "target extension degree; enables the search for g");
    rk->add_option("--deg-x", deg_x, "degree of f in x");
    rk->add_option("--coeff-bounds", bounds, "deg_t bound per coefficient f_0..f_d, or one bound for all");
    rk->add_option("--lead", lead, "any | monic | nonzero")->capture_default_str();
    rk->add_option("--candidate", cands, "explicit f, repeatable; replaces the range");
    rk->add_option("--g", cfg.g, "fixed linear g for every candidate");
    rk->add_option("--skew", cfg.s, "skewness s")->capture_default_str();
    rk->add_option("--sieve-e", cfg.e, "sieve parameter e (a half-integer)")->capture_default_str();
    rk->add_option("--beta", cfg.beta, "smoothness bound")->capture_default_str();
    rk->add_option("--b0", cfg.b0, "alpha degree bound for the finalists (-1: default)");
    rk->add_option("--b0-sieve", cfg.b0_sieve, "alpha degree bound for the first phase (-1: min(b0, 6))");
    rk->add_option("--kmax", cfg.kmax, "lift bound for the finalists' alpha (-1: default)");
    rk->add_option("--kmax-sieve", cfg.kmax_sieve, "lift bound in the first phase (-1: default)");
    rk->add_option("--mmax", cfg.mmax, "Laurent precision bound (-1: default)");
    rk->add_option("--metric", metric, "epsilon | murphyE")->capture_default_str();
    rk->add_option("--top", cfg.top, "finalists (-1: 1% of the range, at least 100)");
    rk->add_option("--seed", cfg.gsearch.seed, "seed of the g search")->capture_default_str();
    rk->add_option("--g-deg", cfg.gsearch.deg_t, "deg_t of g (-1: smallest feasible)");
    rk->add_option("--max-trials", cfg.gsearch.max_trials, "g candidates to try")->capture_default_str();
    rk->add_flag("--prefer-small", cfg.gsearch.prefer_small, "keep the valid g with most small resultant factors");
    rk->add_flag("--irreducible", cfg.filter_irreducible, "keep only f certified irreducible in x");
    rk->add_flag("--monic", cfg.filter_monic, "keep only monic f");
    rk->add_option("--min-unit-edges", cfg.min_unit_edges, "minimum number of length-1 Newton polygon edges");
    rk->add_option("--alpha-mode", alpha_mode, "auto | sieve | direct | check")->capture_default_str();
    rk->add_flag("--affine-only", cfg.affine_only, "leave out projective roots");
    rk->add_option("--format", cfg.format, "csv | json")->capture_default_str();
    rk->add_option("--checkpoint", cfg.checkpoint, "checkpoint directory; an existing one is resumed");
    rk->add_option("--jobs", cfg.jobs, "worker threads")->capture_default_str();
    rk->add_option("--shard-size", cfg.shard_candidates, "candidates per shard")->capture_default_str();
    rk->add_option("--output", output, "write the report here instead of stdout");
    rk->add_option("--stop-after", cfg.stop_after_shards, "stop after this many new shards (testing)")
        ->group("");

    /* alpha */
    FieldArgs af;
    std::string f_text, g_text, fmt = "csv";
    AlphaOptions ao;
    auto *al = app.add_subcommand("alpha", "root property alpha(f)");
    add_field(al, af);
    al->add_option("--f", f_text, "polynomial in t and x")->required();
    al->add_option("--b0", ao.b0, "degree bound on ell (-1: default)");
    al->add_option("--kmax", ao.kmax, "lift bound (-1: default)");
    al->add_option("--max-ell", ao.max_ell, "use at most this many ell");
    al->add_option("--jobs", ao.jobs, "worker threads");
    al->add_flag("--affine-only", ao.affine_only, "leave out projective roots");
    al->add_option("--format", fmt, "csv | json");

    /* laurent */
    FieldArgs lf;
    int skew = 0, mmax = -1;
    auto *la = app.add_subcommand("laurent", "Laurent roots and alpha_infinity");
    add_field(la, lf);
    la->add_option("--f", f_text, "polynomial in t and x")->required();
    la->add_option("--skew", skew, "skewness s");
    la->add_option("--mmax", mmax, "precision bound (-1: default)");
    la->add_option("--format", fmt, "csv | json");

    /* sigma */
    FieldArgs sf;
    double e = 24.5;
    auto *si = app.add_subcommand("sigma", "size property sigma(f, s, e)");
    add_field(si, sf);
    si->add_option("--f", f_text, "polynomial in t and x")->required();
    si->add_option("--skew", skew, "skewness s");
    si->add_option("--sieve-e", e, "sieve parameter e");
    si->add_option("--format", fmt, "csv | json");

    /* murphyE */
    FieldArgs mf;
    int beta = 28;
    double alpha_f = NAN;
    bool coprime = false, step3 = false, g_laurent = false;
    auto *me = app.add_subcommand("murphyE", "Murphy's E for a pair (f, g)");
    add_field(me, mf);
    me->add_option("--f", f_text, "polynomial in t and x")->required();
    me->add_option("--g", g_text, "linear polynomial")->required();
    me->add_option("--skew", skew, "skewness s");
    me->add_option("--sieve-e", e, "sieve parameter e");
    me->add_option("--beta", beta, "smoothness bound");
    me->add_option("--alpha-f", alpha_f, "use this alpha(f) instead of computing it");
    me->add_option("--b0", ao.b0, "alpha degree bound when alpha(f) is computed");
    me->add_option("--mmax", mmax, "Laurent precision bound (-1: default)");
    me->add_flag("--coprime", coprime, "coprime pairs only");
    me->add_flag("--g-by-deg-g0", step3, "g side from deg g0 alone");
    me->add_flag("--g-laurent", g_laurent, "cancellation at infinity on the g side too");
    me->add_option("--format", fmt, "csv | json");

    /* free-rels */
    FieldArgs ff;
    int fjobs = 1;
    auto *fr = app.add_subcommand("free-rels", "free relation census up to degree beta");
    add_field(fr, ff);
    fr->add_option("--f", f_text, "polynomial in t and x")->required();
    fr->add_option("--beta", beta, "degree bound")->capture_default_str();
    fr->add_option("--jobs", fjobs, "worker threads");
    fr->add_option("--format", fmt, "csv | json");

    /* reference */
    TablesOptions to;
    std::string groups = "skew,coppersmith,n607,char3,char3-ext";
    auto *pt = app.add_subcommand("reference", "known examples, computed against their published values");
    pt->add_option("--groups", groups, "comma list out of skew, coppersmith, n607, char3, char3-ext")->capture_default_str();
    pt->add_option("--b0", to.b0_f2, "alpha degree bound over F_2")->capture_default_str();
    pt->add_option("--jobs", to.jobs, "worker threads");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &err) {
        int rc = app.exit(err);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*rk) {
            cfg.p = rf.p;
            cfg.m = rf.m;
            if (!rf.modulus.empty()) cfg.modulus = parse_modulus(rf.modulus);
            cfg.candidates = cands;
            if (cands.empty()) {
                auto b = parse_ints(bounds);
                if (deg_x < 1) throw config_error("--deg-x must be >= 1 (or give --candidate)");
                if (b.size() == 1) b.assign(deg_x + 1, b[0]);
                if ((int)b.size() != deg_x + 1) throw config_error("--coeff-bounds needs deg_x + 1 entries");
                cfg.coeff_bounds = b;
            }
            if (lead == "any") cfg.lead = Lead::any;
            else if (lead == "monic") cfg.lead = Lead::monic;
            else if (lead == "nonzero") cfg.lead = Lead::nonzero;
            else throw config_error("--lead: any, monic or nonzero");
            if (metric == "epsilon") cfg.metric = Metric::epsilon;
            else if (metric == "murphyE") cfg.metric = Metric::murphy_e;
            else throw config_error("--metric: epsilon or murphyE");
            if (alpha_mode == "auto") cfg.alpha_mode = AlphaMode::automatic;
            else if (alpha_mode == "sieve") cfg.alpha_mode = AlphaMode::sieve;
            else if (alpha_mode == "direct") cfg.alpha_mode = AlphaMode::direct;
            else if (alpha_mode == "check") cfg.alpha_mode = AlphaMode::check;
            else throw config_error("--alpha-mode: auto, sieve, direct or check");
            if (cfg.format != "csv" && cfg.format != "json") throw config_error("--format: csv or json");
            std::string text = render(rank(cfg));
            if (output.empty()) std::cout << text;
            else detail::write_atomic(output, text);
        } else if (*al) {
            auto F = field_of(af);
            BiPoly f = parse_bipoly(F.get(), f_text);
            auto a = alpha(f, ao);
            ojson j = alpha_json(a);
            j["f"] = pretty(f);
            std::vector<std::string> lines{"f,alpha,b0,kmax,ell_count,error_bound,heuristic"};
            lines.push_back(pretty(f) + "," + fmt_double(a.value, "%.6f") + "," + std::to_string(a.b0) + "," +
                            std::to_string(a.kmax) + "," + std::to_string(a.ell_count) + "," +
                            (a.error_bound ? fmt_double(*a.error_bound, "%.4g") : "") + "," +
                            (a.heuristic ? "1" : "0"));
            emit(fmt, j, lines);
        } else if (*la) {
            auto F = field_of(lf);
            BiPoly f = parse_bipoly(F.get(), f_text);
            int mm = mmax >= 0 ? mmax : default_alpha_inf_mmax(f);
            auto lr = laurent_roots(f, mm);
            auto ai = alpha_infinity_exact(f, skew, mmax);
            ojson j;
            j["f"] = pretty(f);
            j["alpha_inf"] = ai.value;
            j["alpha_inf_exact"] = ai.exact.str();
            j["complete"] = lr.complete && ai.complete;
            std::vector<std::string> lines{"# alpha_inf=" + fmt_double(ai.value, "%.9f") + " exact=" + ai.exact.str(),
                                           "root,lead_deg,m,gap,gamma,infinite"};
            j["roots"] = ojson::array();
            for (auto &r : lr.roots) {
                j["roots"].push_back({{"root", to_string(r, F.get())},
                                      {"lead_deg", r.lead_deg},
                                      {"m", r.m},
                                      {"gap", r.gap},
                                      {"gamma", r.gamma},
                                      {"infinite", r.infinite}});
                lines.push_back("\"" + to_string(r, F.get()) + "\"," + std::to_string(r.lead_deg) + "," +
                                std::to_string(r.m) + "," + std::to_string(r.gap) + "," + std::to_string(r.gamma) +
                                "," + (r.infinite ? "1" : "0"));
            }
            emit(fmt, j, lines);
        } else if (*si) {
            auto F = field_of(sf);
            BiPoly f = parse_bipoly(F.get(), f_text);
            rational v = sigma_exact(f, skew, e);
            ojson j{{"f", pretty(f)}, {"s", skew}, {"e", e}, {"sigma", to_double(v)}, {"exact", v.str()}};
            emit(fmt, j, {"f,s,e,sigma,exact", pretty(f) + "," + std::to_string(skew) + "," + fmt_double(e, "%.1f") +
                                                   "," + fmt_double(to_double(v), "%.6f") + "," + v.str()});
        } else if (*me) {
            auto F = field_of(mf);
            BiPoly f = parse_bipoly(F.get(), f_text), g = parse_bipoly(F.get(), g_text);
            MurphyOptions o;
            o.alpha_f = std::isnan(alpha_f) ? alpha(f, ao).value : alpha_f;
            o.pairs = coprime ? PairSet::coprime : PairSet::all;
            o.g_degree = step3 ? GDegree::deg_g0 : GDegree::exact_max;
            o.g_laurent = g_laurent;
            o.m_max = mmax;
            double E = murphy_e(f, g, skew, e, beta, o);
            ojson j{{"f", pretty(f)}, {"g", pretty(g)}, {"s", skew}, {"e", e}, {"beta", beta},
                    {"alpha_f", *o.alpha_f}, {"E", E}};
            emit(fmt, j, {"f,g,s,e,beta,alpha_f,E", pretty(f) + "," + pretty(g) + "," + std::to_string(skew) + "," +
                                                        fmt_double(e, "%.1f") + "," + std::to_string(beta) + "," +
                                                        fmt_double(*o.alpha_f, "%.6f") + "," + fmt_double(E, "%.6e")});
        } else if (*fr) {
            auto F = field_of(ff);
            BiPoly f = parse_bipoly(F.get(), f_text);
            auto c = free_relation_census(f, beta, fjobs);
            auto I = insep_info(f);
            ojson j{{"f", pretty(f)},         {"beta", beta},
                    {"dins", I.dins},         {"fhat", pretty(I.fhat)},
                    {"free", c.count},        {"total", c.total},
                    {"proportion", c.proportion}, {"expected", c.chebotarev_estimate},
                    {"band_lo", c.band_lo},   {"band_hi", c.band_hi},
                    {"in_band", c.in_band}};
            emit(fmt, j, {"f,beta,dins,free,total,proportion,expected,band_lo,band_hi,in_band",
                          pretty(f) + "," + std::to_string(beta) + "," + std::to_string(I.dins) + "," +
                              std::to_string(c.count) + "," + std::to_string(c.total) + "," +
                              fmt_double(c.proportion, "%.6f") + "," + fmt_double(c.chebotarev_estimate, "%.3f") + "," +
                              fmt_double(c.band_lo, "%.3f") + "," + fmt_double(c.band_hi, "%.3f") + "," +
                              (c.in_band ? "1" : "0")});
        } else if (*pt) {
            to.groups.clear();
            std::stringstream ss(groups);
            std::string g;
            while (std::getline(ss, g, ',')) {
                g = detail::trim(g);
                if (g.empty()) continue;
                if (std::find(kReferenceGroups.begin(), kReferenceGroups.end(), g) == kReferenceGroups.end())
                    throw config_error("no reference group " + g);
                to.groups.insert(g);
            }
            std::cout << render_tables(reference_values(to));
        }
    } catch (const config_error &ex) {
        std::cerr << "config error: " << ex.what() << "\n";
        return 2;
    } catch (const resource_error &ex) {
        std::cerr << "resource limit: " << ex.what() << "\n";
        return 3;
    } catch (const interrupted &ex) {
        std::cerr << ex.what() << "\n";
        return 4;
    } catch (const std::invalid_argument &ex) {
        std::cerr << "invalid input: " << ex.what() << "\n";
        return 2;
    } catch (const std::exception &ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    return 0;
}
