// Command-line front end: certification primitives as subcommands plus the
// Monte Carlo experiment runner. Exit codes: 0 success, 1 configuration
// error, 2 numerical failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "recert/errors.hpp"
#include "recert/harness.hpp"
#include "recert/json_io.hpp"
#include "recert/numerics.hpp"
#include "recert/re_spectra.hpp"
#include "recert/rng.hpp"
#include "recert/solvers.hpp"

namespace {

using namespace recert;

struct GlobalFlags {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    unsigned threads = 0;
    std::string format = "json";
};

// json: the full report; csv: one header/value row of the scalar fields.
std::string render(const nlohmann::json& j, const std::string& format) {
    if (format != "csv") return j.dump(2) + "\n";
    std::string header, values;
    for (const auto& [key, val] : j.items()) {
        if (val.is_object() || val.is_array()) continue;
        if (!header.empty()) {
            header += ',';
            values += ',';
        }
        header += key;
        values += val.is_number_float() ? format_double(val.get<double>()) : val.dump();
    }
    return header + "\n" + values + "\n";
}

void emit(const nlohmann::json& j, const GlobalFlags& g) {
    std::string text = render(j, g.format);
    if (!g.out_dir.empty()) {
        std::filesystem::create_directories(g.out_dir);
        std::ofstream f(g.out_dir + (g.format == "csv" ? "/report.csv" : "/report.json"),
                        std::ios::binary);
        f << text;
    }
    std::cout << text;
}

std::vector<double> load_vector(const std::string& path) {
    DenseMatrix m = load_matrix(path);
    if (m.cols() != 1 && m.rows() != 1)
        throw ConfigError("expected a vector (n x 1 or 1 x n matrix): " + path);
    return m.data();
}

SupportMode make_support_mode(const std::string& mode, std::size_t samples,
                              std::uint64_t seed) {
    if (mode == "enumerate") return EnumerateSupports{};
    if (mode == "sample") return SampleSupports{samples, seed};
    throw ConfigError("mode must be enumerate or sample");
}

ExperimentConfig load_experiment_config(const GlobalFlags& g) {
    if (g.config_path.empty()) throw ConfigError("--config is required");
    ExperimentConfig cfg = parse_config_file(g.config_path);
    if (g.seed) cfg.base_seed = *g.seed;
    if (!g.out_dir.empty()) cfg.out_dir = g.out_dir;
    if (g.threads > 0) cfg.threads = g.threads;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"restricted-eigenvalue certification toolkit"};
    app.require_subcommand(1);
    GlobalFlags g;
    app.add_option("--config", g.config_path, "experiment config file (JSON or TOML subset)");
    std::uint64_t seed_opt = 0;
    auto* seed_flag = app.add_option("--seed", seed_opt, "seed override");
    app.add_option("--out", g.out_dir, "output directory");
    app.add_option("--threads", g.threads, "worker threads");
    app.add_option("--format", g.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

    // re-constant
    auto* sc_re = app.add_subcommand("re-constant", "restricted eigenvalue constant of a matrix");
    std::string re_matrix, re_mode = "exact";
    std::size_t re_s0 = 1, re_grid = 720, re_restarts = 12, re_iters = 40;
    double re_k0 = 1.0;
    sc_re->add_option("--matrix", re_matrix)->required();
    sc_re->add_option("--s0", re_s0)->required();
    sc_re->add_option("--k0", re_k0)->required();
    sc_re->add_option("--mode", re_mode)->check(CLI::IsMember({"exact", "heuristic"}));
    sc_re->add_option("--grid", re_grid);
    sc_re->add_option("--restarts", re_restarts);
    sc_re->add_option("--iters", re_iters);

    // sparse-eig
    auto* sc_se = app.add_subcommand("sparse-eig", "extremal m-sparse eigenvalues");
    std::string se_matrix, se_mode = "enumerate";
    std::size_t se_m = 1, se_samples = 2000;
    sc_se->add_option("--matrix", se_matrix)->required();
    sc_se->add_option("--m", se_m)->required();
    sc_se->add_option("--mode", se_mode)->check(CLI::IsMember({"enumerate", "sample"}));
    sc_se->add_option("--samples", se_samples);

    // rip
    auto* sc_rip = app.add_subcommand("rip", "restricted isometry constant");
    std::string rip_matrix;
    std::size_t rip_s = 1;
    sc_rip->add_option("--matrix", rip_matrix)->required();
    sc_rip->add_option("--s", rip_s)->required();

    // maurey
    auto* sc_ma = app.add_subcommand("maurey", "sparse convex recombination");
    std::string ma_points, ma_weights, ma_mode = "strict";
    double ma_eps = 0.3;
    std::size_t ma_attempts = 50;
    sc_ma->add_option("--points", ma_points, "matrix whose rows are the points")->required();
    sc_ma->add_option("--weights", ma_weights, "simplex weight vector")->required();
    sc_ma->add_option("--epsilon", ma_eps)->required();
    sc_ma->add_option("--mode", ma_mode)->check(CLI::IsMember({"strict", "relaxed"}));
    sc_ma->add_option("--max-attempts", ma_attempts);

    // isometry
    auto* sc_iso = app.add_subcommand("isometry", "per-support isometry ratios of Psi against A");
    std::string iso_psi, iso_a, iso_mode = "enumerate";
    std::size_t iso_d = 1, iso_samples = 2000;
    sc_iso->add_option("--psi", iso_psi)->required();
    sc_iso->add_option("--a", iso_a)->required();
    sc_iso->add_option("--d-prime", iso_d)->required();
    sc_iso->add_option("--mode", iso_mode)->check(CLI::IsMember({"enumerate", "sample"}));
    sc_iso->add_option("--samples", iso_samples);

    // reduce-verify
    auto* sc_rv = app.add_subcommand("reduce-verify", "cone isometry and constant transfer");
    std::string rv_psi, rv_a;
    std::size_t rv_s0 = 1, rv_d = 0, rv_cone = 200, rv_supports = 2000;
    double rv_k0 = 1.0, rv_delta = 0.25;
    sc_rv->add_option("--psi", rv_psi)->required();
    sc_rv->add_option("--a", rv_a)->required();
    sc_rv->add_option("--s0", rv_s0)->required();
    sc_rv->add_option("--k0", rv_k0)->required();
    sc_rv->add_option("--delta", rv_delta)->required();
    sc_rv->add_option("--d-prime", rv_d);
    sc_rv->add_option("--cone-samples", rv_cone);
    sc_rv->add_option("--support-samples", rv_supports);

    // hull-check
    auto* sc_hc = app.add_subcommand("hull-check", "dual functional check of the sparse hull");
    std::string hc_matrix;
    std::size_t hc_s0 = 1, hc_d = 1, hc_thetas = 20, hc_cone = 200;
    double hc_k0 = 1.0, hc_delta = 0.1;
    sc_hc->add_option("--matrix", hc_matrix)->required();
    sc_hc->add_option("--s0", hc_s0)->required();
    sc_hc->add_option("--k0", hc_k0)->required();
    sc_hc->add_option("--d", hc_d)->required();
    sc_hc->add_option("--delta", hc_delta)->required();
    sc_hc->add_option("--theta-samples", hc_thetas);
    sc_hc->add_option("--cone-samples", hc_cone);

    // bernstein
    auto* sc_be = app.add_subcommand("bernstein", "empirical tail against the sub-gaussian bound");
    std::string be_dist = "gaussian";
    std::size_t be_n = 1000, be_reps = 100000;
    double be_theta = 0.5, be_bound = 1.7320508075688772;
    sc_be->add_option("--dist", be_dist)
        ->check(CLI::IsMember({"gaussian", "rademacher", "discrete_gaussian", "uniform"}));
    sc_be->add_option("--n", be_n)->required();
    sc_be->add_option("--theta", be_theta)->required();
    sc_be->add_option("--reps", be_reps);
    sc_be->add_option("--bound", be_bound, "uniform kind: entries uniform on [-bound, bound]");

    // lasso
    auto* sc_la = app.add_subcommand("lasso", "l1-penalized least squares by coordinate descent");
    std::string la_x, la_y;
    double la_lambda = 0.0, la_sigma = 0.0, la_tol = 1e-10;
    std::size_t la_iters = 100000;
    sc_la->add_option("--x", la_x)->required();
    sc_la->add_option("--y", la_y)->required();
    sc_la->add_option("--lambda", la_lambda)->required();
    sc_la->add_option("--sigma", la_sigma);
    sc_la->add_option("--tol", la_tol);
    sc_la->add_option("--max-iters", la_iters);

    // bp
    auto* sc_bp = app.add_subcommand("bp", "minimum l1 solution of X b = rhs");
    std::string bp_x, bp_b;
    double bp_tol = 1e-8;
    std::size_t bp_iters = 20000;
    sc_bp->add_option("--x", bp_x)->required();
    sc_bp->add_option("--b", bp_b)->required();
    sc_bp->add_option("--tol", bp_tol);
    sc_bp->add_option("--max-iters", bp_iters);

    // experiment / phase
    auto* sc_ex = app.add_subcommand("experiment", "run a Monte Carlo experiment from --config");
    auto* sc_ph = app.add_subcommand("phase", "run a phase_diagram config from --config");

    // walsh
    auto* sc_wa = app.add_subcommand("walsh", "coupon-collector necessity for the Walsh ensemble");
    std::size_t wa_p = 32, wa_m = 8, wa_n = 271, wa_reps = 200;
    bool wa_recovery = false;
    sc_wa->add_option("--p", wa_p)->required();
    sc_wa->add_option("--m", wa_m)->required();
    sc_wa->add_option("--n", wa_n)->required();
    sc_wa->add_option("--reps", wa_reps);
    sc_wa->add_flag("--recovery", wa_recovery, "also run basis pursuit per repetition");

    // bounds
    auto* sc_bo = app.add_subcommand("bounds", "evaluate the sample-size formulas");
    double bo_m = 10, bo_alpha = 1, bo_delta = 0.5, bo_tau = 0.0, bo_p = 100, bo_M = 1,
           bo_rho = 1, bo_d = 100, bo_C = 1, bo_c = 1;
    sc_bo->add_option("--m", bo_m)->required();
    sc_bo->add_option("--alpha", bo_alpha)->required();
    sc_bo->add_option("--delta", bo_delta)->required();
    sc_bo->add_option("--tau", bo_tau, "defaults to delta");
    sc_bo->add_option("--p", bo_p)->required();
    sc_bo->add_option("--M", bo_M);
    sc_bo->add_option("--rho", bo_rho);
    sc_bo->add_option("--d", bo_d);
    sc_bo->add_option("--C", bo_C);
    sc_bo->add_option("--c", bo_c);

    // global flags remain reachable after a subcommand name
    for (CLI::App* sub : {sc_re, sc_se, sc_rip, sc_ma, sc_iso, sc_rv, sc_hc, sc_be, sc_la,
                          sc_bp, sc_ex, sc_ph, sc_wa, sc_bo})
        sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (seed_flag->count() > 0) g.seed = seed_opt;
    const std::uint64_t seed = g.seed.value_or(1);

    try {
        if (*sc_re) {
            DenseMatrix a = load_matrix(re_matrix);
            ReMode mode = re_mode == "exact"
                              ? ReMode{ExactOracleMode{re_grid}}
                              : ReMode{HeuristicMode{re_restarts, re_iters, seed}};
            emit(to_json(re_constant(a, ConeSpec{re_s0, re_k0}, mode)), g);
        } else if (*sc_se) {
            DenseMatrix a = load_matrix(se_matrix);
            emit(to_json(sparse_eigs(a, se_m, make_support_mode(se_mode, se_samples, seed))), g);
        } else if (*sc_rip) {
            DenseMatrix x = load_matrix(rip_matrix);
            emit({{"s", rip_s}, {"theta", rip_constant(x, rip_s)}}, g);
        } else if (*sc_ma) {
            DenseMatrix pts = load_matrix(ma_points);
            std::vector<double> w = load_vector(ma_weights);
            MaureyMode mode = ma_mode == "strict" ? MaureyMode::strict : MaureyMode::relaxed;
            emit(to_json(maurey_sparsify(pts, w, ma_eps, mode, seed, ma_attempts)), g);
        } else if (*sc_iso) {
            DenseMatrix psi = load_matrix(iso_psi), a = load_matrix(iso_a);
            emit(to_json(restricted_isometry_report(
                     psi, a, iso_d, make_support_mode(iso_mode, iso_samples, seed))),
                 g);
        } else if (*sc_rv) {
            DenseMatrix psi = load_matrix(rv_psi), a = load_matrix(rv_a);
            std::size_t d = rv_d ? rv_d : std::min(4 * rv_s0, a.cols());
            emit(to_json(reduction_verify(psi, a, ConeSpec{rv_s0, rv_k0}, rv_delta, d, rv_cone,
                                          seed, rv_supports)),
                 g);
        } else if (*sc_hc) {
            DenseMatrix a = load_matrix(hc_matrix);
            emit(to_json(hull_functional_check(a, ConeSpec{hc_s0, hc_k0}, hc_d, hc_delta,
                                               hc_thetas, hc_cone, seed)),
                 g);
        } else if (*sc_be) {
            RowDistribution dist = RowDistribution::gaussian();
            if (be_dist == "rademacher") dist = RowDistribution::rademacher();
            if (be_dist == "discrete_gaussian") dist = RowDistribution::discrete_gaussian();
            if (be_dist == "uniform") dist = RowDistribution::uniform_bounded(be_bound);
            emit(to_json(bernstein_tail_check(dist, be_n, be_theta, be_reps, seed,
                                              std::max(1u, g.threads))),
                 g);
        } else if (*sc_la) {
            LassoProblem prob{load_matrix(la_x), load_vector(la_y), la_lambda, la_sigma};
            emit(to_json(lasso_cd(prob, la_tol, la_iters)), g);
        } else if (*sc_bp) {
            DenseMatrix x = load_matrix(bp_x);
            std::vector<double> b = load_vector(bp_b);
            emit(to_json(basis_pursuit(x, b, bp_tol, bp_iters)), g);
        } else if (*sc_ex || *sc_ph) {
            ExperimentConfig cfg = load_experiment_config(g);
            if (*sc_ph && cfg.kind != ExperimentConfig::Kind::phase_diagram)
                throw ConfigError("phase: config kind must be phase_diagram");
            ExperimentOutput out = run_experiment(cfg);
            write_experiment_output(out, cfg, cfg.out_dir);
            std::cout << out.summary.dump(2) << '\n';
        } else if (*sc_wa) {
            WalshNecessityReport rep =
                walsh_necessity(wa_p, wa_m, wa_n, wa_reps, seed, wa_recovery,
                                std::max(1u, g.threads));
            nlohmann::json j = {{"p", rep.p},
                                {"m", rep.m},
                                {"n", rep.n},
                                {"reps", rep.reps},
                                {"all_rows_frequency", rep.all_rows_frequency}};
            if (rep.recovery_run) j["recovery_frequency"] = rep.recovery_frequency;
            emit(j, g);
        } else if (*sc_bo) {
            if (bo_tau == 0.0) bo_tau = bo_delta;
            SampleSizeBounds b =
                sample_size_formulas(bo_m, bo_alpha, bo_delta, bo_tau, bo_p, bo_M, bo_rho, bo_d,
                                     bo_C, bo_c);
            emit({{"n_subgaussian", b.n_subgaussian},
                  {"n_sparse", b.n_sparse},
                  {"n_bounded", b.n_bounded},
                  {"n_recovery", b.n_recovery}},
                 g);
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const Error& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
