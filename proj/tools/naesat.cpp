#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <nlohmann/json.hpp>

#include "naesat/bp.hpp"
#include "naesat/errors.hpp"
#include "naesat/exact.hpp"
#include "naesat/experiment.hpp"
#include "naesat/firstmoment.hpp"
#include "naesat/frozen.hpp"
#include "naesat/oracle.hpp"
#include "naesat/run.hpp"
#include "naesat/verify.hpp"

using namespace naesat;
using json = nlohmann::ordered_json;

namespace {

json num(long double x) {
    if (!std::isfinite(x)) return nullptr;
    return static_cast<double>(x);
}

void emit(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot write " + path);
    f << text;
}

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot read " + path);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

// instance from --instance FILE or from (n, d, k, seed)
struct InstanceSource {
    std::string file;
    int n = 0, d = 0, k = 0;
    uint64_t seed = 1;

    void add(CLI::App* app) {
        app->add_option("--instance", file, "instance JSON file");
        app->add_option("--n", n, "variables");
        app->add_option("--d", d, "variable degree");
        app->add_option("--k", k, "clause width");
        app->add_option("--seed", seed, "generator seed");
    }
    Instance load() const {
        if (!file.empty()) return parse(slurp(file));
        if (n < 1 || d < 1 || k < 1) throw ConfigError("give --instance or --n, --d, --k");
        return generate(n, d, k, seed);
    }
    void echo(json& p) const {
        if (!file.empty()) {
            p["instance"] = json::parse(serialize(load()));
        } else {
            p["n"] = n;
            p["d"] = d;
            p["k"] = k;
            p["seed"] = seed;
        }
    }
};

std::vector<DkPair> parse_pairs(const std::vector<std::string>& items) {
    std::vector<DkPair> out;
    for (auto& s : items) {
        if (s.empty()) continue;
        int d = 0, k = 0;
        char comma = 0;
        std::istringstream is(s);
        if (!(is >> d >> comma >> k) || comma != ',' || d < 1 || k < 2) throw ConfigError("pair must look like d,k: " + s);
        out.push_back({d, k});
    }
    return out;
}

json suite_json(const SuiteResult& r) {
    json j;
    j["suite"] = r.name;
    j["checked"] = r.checked;
    j["mismatches"] = r.mismatches;
    j["ok"] = r.ok();
    j["notes"] = r.notes;
    return j;
}

Assignment parse_assignment(const std::string& s, int n) {
    if (static_cast<int>(s.size()) != n) throw InputError("assignment must have n characters");
    Assignment x(n);
    for (int v = 0; v < n; ++v) {
        if (s[v] != '0' && s[v] != '1') throw InputError("assignment characters must be 0 or 1");
        x[v] = s[v] - '0';
    }
    return x;
}

std::string assignment_text(const Assignment& x) {
    std::string s;
    for (auto b : x) s += static_cast<char>('0' + b);
    return s;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"d-regular k-NAE-SAT cluster laboratory"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string out;
    app.add_option("--out", out, "output file, stdout by default");

    // generate
    auto* gen = app.add_subcommand("generate", "draw an instance from the configuration model");
    int g_n = 0, g_d = 0, g_k = 0;
    uint64_t g_seed = 1;
    bool g_dimacs = false;
    gen->add_option("--n", g_n)->required();
    gen->add_option("--d", g_d)->required();
    gen->add_option("--k", g_k)->required();
    gen->add_option("--seed", g_seed);
    gen->add_flag("--dimacs", g_dimacs, "extended DIMACS text instead of JSON");

    // solve
    auto* solve = app.add_subcommand("solve", "enumerate all solutions");
    InstanceSource s_src;
    s_src.add(solve);
    bool s_list = false;
    solve->add_flag("--list", s_list, "include the solutions");

    // census
    auto* census = app.add_subcommand("census", "clusters of the solution set");
    InstanceSource c_src;
    c_src.add(census);
    int c_merge = 1;
    census->add_option("--merge-threshold", c_merge, "merge components within this Hamming distance");

    // coarsen
    auto* coarsen_cmd = app.add_subcommand("coarsen", "frozen configuration of a solution");
    InstanceSource co_src;
    co_src.add(coarsen_cmd);
    std::string co_x;
    coarsen_cmd->add_option("--assignment", co_x, "0/1 string; the first solution if omitted");

    // verify
    auto* verify = app.add_subcommand("verify", "exact identity suite");
    int v_nmax = 5, v_instances = 200, v_L = 3, v_kmax = 6;
    uint64_t v_seed = 1;
    bool v_fault = false;
    std::vector<std::string> v_pairs = {"2,3", "3,4", "2,4"};
    // with d < k nothing can be frozen and the all-free graph has a cycle, so the size formula and
    // the bijection only see configurations at d >= k
    std::vector<std::string> v_frozen_pairs = {"3,3", "4,3"};
    verify->add_option("--n-max", v_nmax);
    verify->add_option("--pairs", v_pairs, "d,k pairs")->expected(0, -1);
    verify->add_option("--frozen-pairs", v_frozen_pairs, "extra d,k pairs for the size formula and bijection")
        ->expected(0, -1);
    verify->add_option("--seed", v_seed);
    verify->add_option("--instances", v_instances, "random instances per size formula point");
    verify->add_option("--L", v_L, "tree size cutoff for embedding numbers");
    verify->add_option("--k-max", v_kmax, "largest k for the vhat sweep");
    verify->add_flag("--inject-fault", v_fault, "test hook: corrupt one size formula value");

    // bp
    auto* bp = app.add_subcommand("bp", "truncated BP fixed points, one sweep row per lambda");
    int b_k = 9, b_d = 0, b_L = 3, b_iter = 500;
    long double b_tol = 1e-12L, b_damp = 0.5L;
    std::vector<double> b_lambdas = {0.0, 0.5, 1.0};
    bp->add_option("--k", b_k);
    bp->add_option("--d", b_d, "degree; band middle if omitted");
    bp->add_option("--L", b_L);
    bp->add_option("--lambdas", b_lambdas)->expected(1, -1);
    bp->add_option("--tol", b_tol);
    bp->add_option("--max-iter", b_iter);
    bp->add_option("--damping", b_damp);

    // constants
    auto* cons = app.add_subcommand("constants", "lambda*, s*, c*, p* with the L sweep");
    int k_k = 9, k_d = 0, k_L = 3;
    long double k_tol = 1e-6L;
    cons->add_option("--k", k_k);
    cons->add_option("--d", k_d, "degree; band middle if omitted");
    cons->add_option("--L", k_L, "largest cutoff; the table covers 1..L");
    cons->add_option("--tol", k_tol, "bisection tolerance on lambda");

    // overlap
    auto* ov = app.add_subcommand("overlap", "overlap histogram of solution pairs");
    OverlapOptions o;
    double o_pstar = -1;
    std::string o_summary;
    ov->add_option("--n", o.n);
    ov->add_option("--d", o.d);
    ov->add_option("--k", o.k);
    ov->add_option("--trials", o.trials);
    ov->add_option("--instances", o.instances);
    ov->add_option("--seed", o.seed);
    ov->add_option("--p-star", o_pstar, "mark the mass near +-p*");
    ov->add_option("--summary", o_summary, "summary JSON file");
    ov->add_flag("--same-solution", o.same_solution, "debug: second draw equals the first");

    // moment-check
    auto* mc = app.add_subcommand("moment-check", "restricted first moment against enumeration");
    int m_n = 3, m_d = 2, m_k = 3;
    std::vector<double> m_lambdas = {0.0, 1.0, 0.5};
    double m_tol = 1e-10;
    mc->add_option("--n", m_n);
    mc->add_option("--d", m_d);
    mc->add_option("--k", m_k);
    mc->add_option("--lambdas", m_lambdas)->expected(1, -1);
    mc->add_option("--tol", m_tol);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return static_cast<int>(ExitCode::usage);
    }

    try {
        RunConfig cfg;
        int status = 0;
        if (gen->parsed()) {
            cfg.command = "generate";
            cfg.params = {{"n", g_n}, {"d", g_d}, {"k", g_k}, {"seed", g_seed}};
            Instance inst = generate(g_n, g_d, g_k, g_seed);
            if (g_dimacs) {
                emit(out, to_dimacs(inst));
            } else {
                json j = json::parse(serialize(inst));
                j["provenance"] = cfg.provenance();
                emit(out, j.dump() + "\n");
            }
        } else if (solve->parsed()) {
            cfg.command = "solve";
            s_src.echo(cfg.params);
            cfg.params["list"] = s_list;
            Instance inst = s_src.load();
            auto sols = enumerate_solutions(inst);
            json p;
            p["n"] = inst.n();
            p["solutions"] = sols.size();
            if (s_list) {
                json arr = json::array();
                for (auto& x : sols) arr.push_back(assignment_text(x));
                p["list"] = arr;
            }
            emit(out, json_artifact(cfg, p));
        } else if (census->parsed()) {
            cfg.command = "census";
            c_src.echo(cfg.params);
            cfg.params["merge_threshold"] = c_merge;
            Instance inst = c_src.load();
            auto sols = enumerate_solutions(inst);
            auto c = cluster_census(sols, c_merge);
            attach_frozen(inst, sols, c);
            emit(out, csv_artifact(cfg, census_csv(c)));
        } else if (coarsen_cmd->parsed()) {
            cfg.command = "coarsen";
            co_src.echo(cfg.params);
            Instance inst = co_src.load();
            Assignment x;
            if (co_x.empty()) {
                auto sols = enumerate_solutions(inst);
                if (sols.empty()) throw InputError("instance has no solution");
                x = sols.front();
            } else {
                x = parse_assignment(co_x, inst.n());
            }
            cfg.params["assignment"] = assignment_text(x);
            FrozenConfig fc = coarsen(inst, x);
            auto val = validate_frozen(inst, fc);
            auto fs = free_structure(inst, fc);
            json p;
            p["frozen"] = fc.text();
            p["digest"] = fc.digest();
            p["valid"] = val.ok;
            p["diagnostics"] = val.diagnostics;
            json pieces = json::array();
            for (auto& pc : fs.pieces)
                pieces.push_back({{"v", pc.v()}, {"f", pc.f()}, {"e", pc.e()}, {"cyclic", pc.cyclic()}});
            p["pieces"] = pieces;
            p["multicyclic_edges"] = multicyclic_edge_count(fs);
            emit(out, json_artifact(cfg, p));
        } else if (verify->parsed()) {
            cfg.command = "verify";
            auto pairs = parse_pairs(v_pairs);
            if (pairs.empty()) throw ConfigError("no d,k pairs given");
            auto frozen_pairs = pairs;
            for (auto& pr : parse_pairs(v_frozen_pairs)) frozen_pairs.push_back(pr);
            cfg.params = {{"n_max", v_nmax},        {"pairs", v_pairs}, {"frozen_pairs", v_frozen_pairs}, {"seed", v_seed},
                          {"instances", v_instances}, {"L", v_L},         {"k_max", v_kmax},
                          {"inject_fault", v_fault}};
            VerifyOptions vo;
            vo.seed = v_seed;
            vo.instances = v_instances;
            vo.inject_fault = v_fault;
            std::vector<SuiteResult> suites = {size_formula_suite(points_up_to(frozen_pairs, v_nmax), vo),
                                               bijection_suite(frozen_pairs, std::min(v_nmax, 4), vo),
                                               first_moment_suite(points_up_to(pairs, v_nmax), vo),
                                               embedding_suite(pairs, v_L, vo), vhat_suite(v_kmax, vo)};
            json p;
            json arr = json::array();
            bool all = true;
            for (auto& s : suites) {
                arr.push_back(suite_json(s));
                all = all && s.ok();
                std::cerr << (s.ok() ? "PASS " : "FAIL ") << s.name << " checked=" << s.checked
                          << " mismatches=" << s.mismatches << "\n";
            }
            p["suites"] = arr;
            p["ok"] = all;
            emit(out, json_artifact(cfg, p));
            if (!all) status = static_cast<int>(ExitCode::mismatch);
        } else if (bp->parsed()) {
            cfg.command = "bp";
            int d = b_d > 0 ? b_d : band_degree(b_k);
            cfg.params = {{"k", b_k}, {"d", d}, {"L", b_L}, {"lambdas", b_lambdas}, {"tol", static_cast<double>(b_tol)},
                          {"max_iter", b_iter}, {"damping", static_cast<double>(b_damp)}};
            SpinTable tab(d, b_k);
            TreeCatalog cat = enumerate_catalog(d, b_k, b_L, tab);
            BpSpace sp = build_space(tab, b_L);
            BpParams bpp;
            bpp.d = d;
            bpp.k = b_k;
            bpp.L = b_L;
            bpp.tol = b_tol;
            bpp.max_iter = b_iter;
            bpp.damping = b_damp;
            auto ls = lambda_star(sp, cat, tab, bpp);
            std::string csv = sweep_csv_header();
            bool all = true;
            for (double lam : b_lambdas) {
                bpp.lambda = lam;
                BpPoint pt = solve_point(sp, cat, tab, bpp);
                auto a = audit_point(pt, cat);
                if (!a.ok()) {
                    all = false;
                    std::cerr << "lambda " << lam << ": failed " << a.failures() << "\n";
                }
                csv += sweep_csv_row(pt, ls.flag);
            }
            emit(out, csv_artifact(cfg, csv));
            if (!all) status = static_cast<int>(ExitCode::mismatch);
        } else if (cons->parsed()) {
            cfg.command = "constants";
            int d = k_d > 0 ? k_d : band_degree(k_k);
            cfg.params = {{"k", k_k}, {"d", d}, {"L", k_L}, {"tol", static_cast<double>(k_tol)}};
            SpinTable tab(d, k_k);
            TreeCatalog cat = enumerate_catalog(d, k_k, k_L, tab);
            json table = json::array();
            json top;
            for (int L = 1; L <= k_L; ++L) {
                BpSpace sp = build_space(tab, L);
                BpParams bpp;
                bpp.d = d;
                bpp.k = k_k;
                bpp.L = L;
                auto ls = lambda_star(sp, cat, tab, bpp, k_tol);
                json row;
                row["L"] = L;
                row["flag"] = ls.flag;
                row["lambda_star"] = num(ls.lambda_star);
                row["s_star"] = num(ls.s_star);
                row["c_star"] = num(ls.c_star);
                row["monotone"] = ls.monotone;
                row["evaluations"] = ls.evaluations;
                if (std::isfinite(ls.lambda_star)) {
                    bpp.lambda = ls.lambda_star;
                    BpPoint pt = solve_point(sp, cat, tab, bpp);
                    auto ps = p_star(pt.profile, cat);
                    row["p_star"] = num(ps.p_star);
                    row["p_star_alt"] = num(ps.p_star_alt);
                    row["tail_bound"] = num(ps.tail_bound);
                    row["F"] = num(pt.energy.F);
                    row["residual"] = num(pt.state.residual);
                    row["iterations"] = pt.state.iterations;
                    row["audit_ok"] = audit_point(pt, cat).ok();
                } else {
                    row["p_star"] = nullptr;
                }
                table.push_back(row);
                top = row;
            }
            json p;
            p["k"] = k_k;
            p["d"] = d;
            p["f_rs"] = num(f_rs(d, k_k));
            p["status"] = top["flag"];
            p["lambda_star"] = top["lambda_star"];
            p["s_star"] = top["s_star"];
            p["c_star"] = top["c_star"];
            p["p_star"] = top["p_star"];
            p["L"] = k_L;
            p["sweep"] = table;
            emit(out, json_artifact(cfg, p));
        } else if (ov->parsed()) {
            cfg.command = "overlap";
            if (o_pstar >= 0) o.p_star = o_pstar;
            cfg.params = {{"n", o.n},         {"d", o.d},       {"k", o.k},
                          {"trials", o.trials}, {"instances", o.instances}, {"seed", o.seed},
                          {"same_solution", o.same_solution}, {"p_star", o_pstar >= 0 ? json(o_pstar) : json(nullptr)}};
            std::cerr << "note: desk-scale qualitative experiment; the large-k regime of the overlap theorem is not reached\n";
            auto r = overlap_experiment(o);
            emit(out, csv_artifact(cfg, overlap_csv(r)));
            json s;
            s["trials"] = r.rho_num.size();
            s["resampled"] = r.resampled;
            s["symmetric"] = r.symmetric;
            s["spot_checks"] = r.spot_checks;
            s["inconsistencies"] = r.inconsistencies;
            s["near_zero"] = r.near_zero;
            s["near_p_star"] = r.near_p_star;
            s["rest"] = r.rest;
            s["notes"] = r.notes;
            json hist = json::array();
            for (auto& [num_rho, c] : r.histogram) hist.push_back({num_rho, c});
            s["histogram"] = hist;
            if (!o_summary.empty()) emit(o_summary, json_artifact(cfg, s));
            else std::cerr << s.dump() << "\n";
            if (!r.ok()) status = static_cast<int>(ExitCode::mismatch);
        } else if (mc->parsed()) {
            cfg.command = "moment-check";
            cfg.params = {{"n", m_n}, {"d", m_d}, {"k", m_k}, {"lambdas", m_lambdas}, {"tol", m_tol}};
            std::vector<long double> lams(m_lambdas.begin(), m_lambdas.end());
            auto oracle = restricted_oracle(m_n, m_d, m_k, lams);
            auto reps = verify_first_moment(oracle, m_tol);
            emit(out, json_artifact(cfg, json::parse(moment_report_json(oracle, reps))));
            for (auto& r : reps)
                if (!r.ok) status = static_cast<int>(ExitCode::mismatch);
        }
        return status;
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return static_cast<int>(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(ExitCode::usage);
    }
}
