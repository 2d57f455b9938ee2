#include "recert/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "recert/errors.hpp"
#include "recert/numerics.hpp"
#include "recert/re_spectra.hpp"
#include "recert/rng.hpp"
#include "recert/solvers.hpp"
#include "recert/supports.hpp"

namespace recert {

namespace {

// Index-addressed parallel map: each job writes its own slot, so the result
// is identical for any worker count.
template <typename Fn>
void parallel_for_index(std::size_t count, unsigned threads, Fn&& fn) {
    if (threads <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> pool;
    std::size_t chunk = (count + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
        std::size_t lo = std::min<std::size_t>(std::size_t(t) * chunk, count);
        std::size_t hi = std::min<std::size_t>(lo + chunk, count);
        pool.emplace_back([&, t, lo, hi] {
            try {
                for (std::size_t i = lo; i < hi; ++i) fn(i);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    std::size_t mid = v.size() / 2;
    return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

}  // namespace

std::uint64_t trial_seed(std::uint64_t base_seed, std::size_t n_index, std::size_t trial) {
    return mix_stream(mix_stream(base_seed, n_index), trial);
}

std::size_t ExperimentConfig::effective_d_prime() const {
    if (d_prime > 0) return std::min(d_prime, covariance.p);
    return std::min(4 * cone.s0, covariance.p);
}

ExperimentConfig::Kind ExperimentConfig::kind_from_string(const std::string& s) {
    if (s == "re_transfer") return Kind::re_transfer;
    if (s == "sparse_isometry") return Kind::sparse_isometry;
    if (s == "bounded_re") return Kind::bounded_re;
    if (s == "bernstein") return Kind::bernstein;
    if (s == "recovery_rate") return Kind::recovery_rate;
    if (s == "walsh_necessity") return Kind::walsh_necessity;
    if (s == "phase_diagram") return Kind::phase_diagram;
    throw ConfigError("unknown experiment kind: " + s);
}

std::string ExperimentConfig::kind_name() const {
    switch (kind) {
        case Kind::re_transfer: return "re_transfer";
        case Kind::sparse_isometry: return "sparse_isometry";
        case Kind::bounded_re: return "bounded_re";
        case Kind::bernstein: return "bernstein";
        case Kind::recovery_rate: return "recovery_rate";
        case Kind::walsh_necessity: return "walsh_necessity";
        case Kind::phase_diagram: return "phase_diagram";
    }
    return "?";
}

void ExperimentConfig::validate() const {
    if (n_values.empty()) throw ConfigError("config: n_values must be non-empty");
    for (std::size_t i = 0; i < n_values.size(); ++i) {
        if (n_values[i] == 0) throw ConfigError("config: n values must be positive");
        if (i > 0 && n_values[i] <= n_values[i - 1])
            throw ConfigError("config: n_values must be strictly increasing");
    }
    if (trials == 0) throw ConfigError("config: trials must be positive");
    if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("config: delta must lie in (0,1)");
    if (covariance.p == 0) throw ConfigError("config: covariance dimension must be positive");
    if (threads == 0) throw ConfigError("config: threads must be positive");
    switch (kind) {
        case Kind::re_transfer:
        case Kind::sparse_isometry:
            if (!ensemble.is_psi2())
                throw ConfigError("config: this experiment needs a scalar-marginal ensemble");
            cone.validate(covariance.p);
            break;
        case Kind::bounded_re:
            if (!ensemble.is_bounded() || ensemble.kind == RowDistribution::Kind::rademacher)
                throw ConfigError("config: bounded_re needs walsh_rows or uniform_bounded");
            if (ensemble.kind == RowDistribution::Kind::walsh_rows &&
                covariance.p != ensemble.walsh_m * ensemble.walsh_k)
                throw ConfigError("config: walsh_rows requires p = block_size * blocks");
            cone.validate(covariance.p);
            break;
        case Kind::bernstein:
            if (theta_values.empty()) throw ConfigError("config: bernstein needs theta_values");
            if (reps == 0) throw ConfigError("config: reps must be positive");
            break;
        case Kind::recovery_rate:
            if (!(sigma > 0.0)) throw ConfigError("config: recovery needs sigma > 0");
            if (s_planted == 0 || s_planted >= covariance.p)
                throw ConfigError("config: recovery needs 1 <= s_planted < p");
            break;
        case Kind::walsh_necessity:
            if (ensemble.kind != RowDistribution::Kind::walsh_rows)
                throw ConfigError("config: walsh_necessity needs a walsh_rows ensemble");
            if (covariance.p != ensemble.walsh_m * ensemble.walsh_k)
                throw ConfigError("config: walsh_necessity requires p = block_size * blocks");
            break;
        case Kind::phase_diagram:
            if (s0_grid.empty()) throw ConfigError("config: phase_diagram needs s0_grid");
            if (success_metric != "recovery" && success_metric != "re_transfer")
                throw ConfigError("config: success_metric must be recovery or re_transfer");
            break;
    }
}

// ---- per-kind drivers -----------------------------------------------------

namespace {

struct TimedScope {
    explicit TimedScope(bool enabled, double& out)
        : enabled(enabled), out(out), start(std::chrono::steady_clock::now()) {}
    ~TimedScope() {
        if (enabled)
            out = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                            start)
                      .count();
    }
    bool enabled;
    double& out;
    std::chrono::steady_clock::time_point start;
};

// Population pieces shared by the reduction-style experiments.
struct PopulationModel {
    DenseMatrix sigma;
    DenseMatrix a;          // Sigma^{1/2}
    DenseMatrix a_inv;      // Sigma^{-1/2} (bounded_re only)
    double rho_d_prime = 0.0;
};

PopulationModel build_population(const ExperimentConfig& cfg) {
    PopulationModel pop;
    if (cfg.kind == ExperimentConfig::Kind::bounded_re) {
        // Sigma is pinned by the row law: (m/p) I for walsh_rows, (M^2/3) I
        // for uniform rows on [-M, M].
        double scale = cfg.ensemble.kind == RowDistribution::Kind::walsh_rows
                           ? double(cfg.ensemble.walsh_m) / double(cfg.covariance.p)
                           : cfg.ensemble.bound * cfg.ensemble.bound / 3.0;
        pop.sigma = build_covariance(CovarianceSpec::scaled_identity(cfg.covariance.p, scale));
        pop.a_inv = psd_inv_sqrt(pop.sigma);
    } else {
        pop.sigma = build_covariance(cfg.covariance);
    }
    pop.a = psd_sqrt(pop.sigma);
    return pop;
}

double rho_min_at(const DenseMatrix& a, std::size_t m, std::uint64_t seed) {
    SupportMode mode = EnumerateSupports{};
    if (binomial(a.cols(), m) > kEnumerateCapSparseEig) mode = SampleSupports{500, seed};
    return sparse_eigs(a, m, mode).rho_min;
}

TrialRecord base_record(const ExperimentConfig& cfg, std::size_t trial, std::uint64_t seed,
                        std::size_t n) {
    TrialRecord rec;
    rec.trial_index = trial;
    rec.seed = seed;
    rec.n = n;
    rec.p = cfg.covariance.p;
    rec.s0 = cfg.cone.s0;
    rec.k0 = cfg.cone.k0;
    return rec;
}

void run_reduction_kind(const ExperimentConfig& cfg, ExperimentOutput& out) {
    const PopulationModel pop = build_population(cfg);
    const std::size_t d_prime = cfg.effective_d_prime();
    const std::size_t jobs = cfg.n_values.size() * cfg.trials;
    out.records.resize(jobs);

    parallel_for_index(jobs, cfg.threads, [&](std::size_t job) {
        const std::size_t n_index = job / cfg.trials, trial = job % cfg.trials;
        const std::size_t n = cfg.n_values[n_index];
        const std::uint64_t seed = trial_seed(cfg.base_seed, n_index, trial);
        TrialRecord rec = base_record(cfg, trial, seed, n);
        {
            TimedScope timer(cfg.emit_timings, rec.wall_time_ms);
            DenseMatrix psi;
            if (cfg.kind == ExperimentConfig::Kind::bounded_re) {
                DesignSample s = sample_bounded_rows(cfg.ensemble, n, cfg.covariance.p,
                                                     mix_stream(seed, 1));
                psi = matmul(s.x, pop.a_inv);
            } else {
                psi = sample_psi(cfg.ensemble, n, pop.a.rows(), mix_stream(seed, 1));
            }
            ReductionReport rep = reduction_verify(
                psi, pop.a, cfg.cone, cfg.delta, d_prime, cfg.cone_samples, mix_stream(seed, 2),
                cfg.support_samples,
                HeuristicMode{cfg.re_restarts, cfg.re_iters, mix_stream(seed, 3)});
            if (!std::isfinite(rep.k_a.k) || !std::isfinite(rep.k_xa.k))
                throw Error("trial " + std::to_string(trial) + " at n=" + std::to_string(n) +
                            ": restricted eigenvalue constant is infinite");
            rec.delta_sparse = rep.delta_sparse;
            rec.cone_ratio_min = rep.cone_ratio_min;
            rec.cone_ratio_max = rep.cone_ratio_max;
            rec.k_a = rep.k_a.k;
            rec.k_xa = rep.k_xa.k;
            rec.transfer_holds = rep.transfer_holds;
        }
        out.records[job] = std::move(rec);
    });

    const double alpha = cfg.kind == ExperimentConfig::Kind::bounded_re
                             ? 0.0
                             : psi2_constant(cfg.ensemble);
    double rho = 0.0, bound_m = 0.0;
    if (cfg.kind == ExperimentConfig::Kind::bounded_re) {
        rho = rho_min_at(pop.a, d_prime, mix_stream(cfg.base_seed, 0xF00));
        bound_m = cfg.ensemble.entry_bound();
    }

    nlohmann::json per_n = nlohmann::json::array();
    for (std::size_t ni = 0; ni < cfg.n_values.size(); ++ni) {
        const std::size_t n = cfg.n_values[ni];
        std::size_t transfer_ok = 0, conclusion_ok = 0;
        for (std::size_t t = 0; t < cfg.trials; ++t) {
            const TrialRecord& r = out.records[ni * cfg.trials + t];
            if (r.transfer_holds) ++transfer_ok;
            if (1.0 - 5.0 * r.delta_sparse <= r.cone_ratio_min &&
                r.cone_ratio_max <= 1.0 + 3.0 * r.delta_sparse)
                ++conclusion_ok;
        }
        double floor;
        if (cfg.kind == ExperimentConfig::Kind::bounded_re)
            floor = 1.0 - std::exp(-cfg.delta * rho * double(n) /
                                   (6.0 * bound_m * bound_m * double(d_prime)));
        else
            floor = 1.0 - 2.0 * std::exp(-cfg.delta * cfg.delta * double(n) /
                                         (2000.0 * std::pow(alpha, 4)));
        per_n.push_back({{"n", n},
                         {"success_frequency", double(transfer_ok) / double(cfg.trials)},
                         {"conclusion_frequency", double(conclusion_ok) / double(cfg.trials)},
                         {"probability_floor", floor}});
    }
    out.summary["per_n"] = per_n;
    out.summary["d_prime"] = d_prime;
    if (cfg.kind == ExperimentConfig::Kind::bounded_re) {
        out.summary["rho_min_d_prime"] = rho;
        out.summary["entry_bound"] = bound_m;
    } else {
        out.summary["alpha"] = alpha;
    }
}

void run_sparse_isometry(const ExperimentConfig& cfg, ExperimentOutput& out) {
    const PopulationModel pop = build_population(cfg);
    const std::size_t m = cfg.effective_d_prime();
    const std::size_t jobs = cfg.n_values.size() * cfg.trials;
    out.records.resize(jobs);

    SupportMode mode = EnumerateSupports{};
    if (binomial(cfg.covariance.p, m) > kEnumerateCapIsometry)
        mode = SampleSupports{cfg.support_samples, mix_stream(cfg.base_seed, 0xD)};

    parallel_for_index(jobs, cfg.threads, [&](std::size_t job) {
        const std::size_t n_index = job / cfg.trials, trial = job % cfg.trials;
        const std::size_t n = cfg.n_values[n_index];
        const std::uint64_t seed = trial_seed(cfg.base_seed, n_index, trial);
        TrialRecord rec = base_record(cfg, trial, seed, n);
        {
            TimedScope timer(cfg.emit_timings, rec.wall_time_ms);
            DenseMatrix psi = sample_psi(cfg.ensemble, n, pop.a.rows(), mix_stream(seed, 1));
            rec.delta_sparse = restricted_isometry_report(psi, pop.a, m, mode).global_delta;
            rec.transfer_holds = true;  // K fields unused for this kind
        }
        out.records[job] = std::move(rec);
    });

    const double alpha = psi2_constant(cfg.ensemble);
    nlohmann::json per_n = nlohmann::json::array();
    for (std::size_t ni = 0; ni < cfg.n_values.size(); ++ni) {
        std::size_t ok = 0;
        for (std::size_t t = 0; t < cfg.trials; ++t)
            if (out.records[ni * cfg.trials + t].delta_sparse <= cfg.tau) ++ok;
        double floor = 1.0 - 2.0 * std::exp(-cfg.tau * cfg.tau * double(cfg.n_values[ni]) /
                                            (80.0 * std::pow(alpha, 4)));
        per_n.push_back({{"n", cfg.n_values[ni]},
                         {"success_frequency", double(ok) / double(cfg.trials)},
                         {"probability_floor", floor}});
    }
    out.summary["per_n"] = per_n;
    out.summary["m"] = m;
    out.summary["tau"] = cfg.tau;
    out.summary["alpha"] = alpha;
}

void run_bernstein(const ExperimentConfig& cfg, ExperimentOutput& out) {
    nlohmann::json cells = nlohmann::json::array();
    for (std::size_t ni = 0; ni < cfg.n_values.size(); ++ni) {
        for (std::size_t ti = 0; ti < cfg.theta_values.size(); ++ti) {
            BernsteinReport rep = bernstein_tail_check(
                cfg.ensemble, cfg.n_values[ni], cfg.theta_values[ti], cfg.reps,
                trial_seed(cfg.base_seed, ni, ti), cfg.threads);
            cells.push_back({{"n", rep.n},
                             {"theta", rep.theta},
                             {"empirical_tail", rep.empirical_tail},
                             {"bound", rep.bound},
                             {"std_err", rep.std_err},
                             {"holds", rep.holds},
                             {"alpha", rep.alpha}});
        }
    }
    out.summary["cells"] = cells;
    out.summary["reps"] = cfg.reps;
}

void run_recovery(const ExperimentConfig& cfg, ExperimentOutput& out) {
    const PopulationModel pop = build_population(cfg);
    const std::size_t p = cfg.covariance.p;
    const std::size_t jobs = cfg.n_values.size() * cfg.trials;
    out.records.resize(jobs);
    std::vector<char> cone_ok(jobs, 0);

    parallel_for_index(jobs, cfg.threads, [&](std::size_t job) {
        const std::size_t n_index = job / cfg.trials, trial = job % cfg.trials;
        const std::size_t n = cfg.n_values[n_index];
        const std::uint64_t seed = trial_seed(cfg.base_seed, n_index, trial);
        TrialRecord rec = base_record(cfg, trial, seed, n);
        {
            TimedScope timer(cfg.emit_timings, rec.wall_time_ms);
            DenseMatrix x = sample_design(cfg.ensemble, pop.a, n, mix_stream(seed, 1)).x;

            Rng plant_rng(mix_stream(seed, 2));
            std::vector<double> beta_true(p, 0.0);
            std::vector<int> pool(p);
            for (std::size_t i = 0; i < p; ++i) pool[i] = int(i);
            for (std::size_t i = 0; i < cfg.s_planted; ++i) {
                std::size_t j = i + plant_rng.next_below(p - i);
                std::swap(pool[i], pool[j]);
                beta_true[pool[i]] = plant_rng.next_sign();
            }

            Rng noise_rng(mix_stream(seed, 3));
            std::vector<double> y = matvec(x, beta_true);
            for (double& v : y) v += cfg.sigma * noise_rng.next_gaussian();

            const double lambda_rate = std::sqrt(2.0 * std::log(double(p)) / double(n));
            LassoProblem prob{x, std::move(y), cfg.lambda_scale * cfg.sigma * lambda_rate,
                              cfg.sigma};
            SolveResult sol = lasso_cd(prob, 1e-9, 50000);

            cone_ok[job] = lasso_cone_check(beta_true, sol.beta_hat, cfg.cone.k0).in_cone;
            std::size_t s0 = oracle_s0(beta_true, lambda_rate, cfg.sigma);
            rec.recovery_ratio =
                s0 == 0 ? 0.0
                        : oracle_rate_ratio(beta_true, sol.beta_hat, s0, lambda_rate, cfg.sigma);
            rec.transfer_holds = true;  // K fields unused for this kind
        }
        out.records[job] = std::move(rec);
    });

    nlohmann::json per_n = nlohmann::json::array();
    for (std::size_t ni = 0; ni < cfg.n_values.size(); ++ni) {
        std::size_t ok = 0;
        std::vector<double> ratios;
        for (std::size_t t = 0; t < cfg.trials; ++t) {
            ok += cone_ok[ni * cfg.trials + t] ? 1 : 0;
            ratios.push_back(out.records[ni * cfg.trials + t].recovery_ratio);
        }
        per_n.push_back({{"n", cfg.n_values[ni]},
                         {"cone_frequency", double(ok) / double(cfg.trials)},
                         {"median_rate_ratio", median_of(ratios)}});
    }
    out.summary["per_n"] = per_n;
    out.summary["sigma"] = cfg.sigma;
    out.summary["lambda_scale"] = cfg.lambda_scale;
    out.summary["s_planted"] = cfg.s_planted;
}

void run_walsh(const ExperimentConfig& cfg, ExperimentOutput& out) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t ni = 0; ni < cfg.n_values.size(); ++ni) {
        WalshNecessityReport rep = walsh_necessity(
            cfg.covariance.p, cfg.ensemble.walsh_m, cfg.n_values[ni], cfg.trials,
            mix_stream(cfg.base_seed, ni), cfg.walsh_recovery, cfg.threads);
        nlohmann::json row = {{"n", rep.n},
                              {"all_rows_frequency", rep.all_rows_frequency},
                              {"reps", rep.reps}};
        if (rep.recovery_run) row["recovery_frequency"] = rep.recovery_frequency;
        rows.push_back(row);
    }
    out.summary["per_n"] = rows;
    out.summary["p"] = cfg.covariance.p;
    out.summary["m"] = cfg.ensemble.walsh_m;
}

}  // namespace

ExperimentOutput run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    ExperimentOutput out;
    out.summary["kind"] = cfg.kind_name();
    out.summary["base_seed"] = cfg.base_seed;
    out.summary["trials"] = cfg.trials;

    switch (cfg.kind) {
        case ExperimentConfig::Kind::re_transfer:
        case ExperimentConfig::Kind::bounded_re:
            run_reduction_kind(cfg, out);
            break;
        case ExperimentConfig::Kind::sparse_isometry:
            run_sparse_isometry(cfg, out);
            break;
        case ExperimentConfig::Kind::bernstein:
            run_bernstein(cfg, out);
            break;
        case ExperimentConfig::Kind::recovery_rate:
            run_recovery(cfg, out);
            break;
        case ExperimentConfig::Kind::walsh_necessity:
            run_walsh(cfg, out);
            break;
        case ExperimentConfig::Kind::phase_diagram: {
            std::vector<PhaseCell> cells = phase_diagram(cfg);
            nlohmann::json jc = nlohmann::json::array();
            for (const PhaseCell& c : cells)
                jc.push_back({{"n", c.n},
                              {"s0", c.s0},
                              {"trials", c.trials},
                              {"successes", c.successes},
                              {"frequency", c.frequency}});
            out.summary["cells"] = jc;
            out.summary["success_metric"] = cfg.success_metric;
            out.csv = phase_csv(cells);
            return out;
        }
    }

    // records sorted by (n, trial); jobs were laid out in that order already
    std::ostringstream csv;
    csv << "# re-cert schema v1\n";
    csv << "trial_index,seed,n,p,s0,k0,delta_sparse,cone_ratio_min,cone_ratio_max,K_A,K_XA,"
           "transfer_holds,recovery_ratio,wall_time_ms\n";
    for (const TrialRecord& r : out.records) {
        csv << r.trial_index << ',' << r.seed << ',' << r.n << ',' << r.p << ',' << r.s0 << ','
            << format_double(r.k0) << ',' << format_double(r.delta_sparse) << ','
            << format_double(r.cone_ratio_min) << ',' << format_double(r.cone_ratio_max) << ','
            << format_double(r.k_a) << ',' << format_double(r.k_xa) << ','
            << (r.transfer_holds ? 1 : 0) << ',' << format_double(r.recovery_ratio) << ','
            << format_double(r.wall_time_ms) << '\n';
    }
    out.csv = csv.str();
    return out;
}

void write_experiment_output(const ExperimentOutput& out, const ExperimentConfig& cfg,
                             const std::string& dir) {
    std::filesystem::create_directories(dir);
    const bool phase = cfg.kind == ExperimentConfig::Kind::phase_diagram;
    {
        std::ofstream f(dir + (phase ? "/phase.csv" : "/records.csv"), std::ios::binary);
        if (!f) throw ConfigError("cannot write CSV under " + dir);
        f << out.csv;
    }
    {
        std::ofstream f(dir + "/summary.json", std::ios::binary);
        if (!f) throw ConfigError("cannot write summary under " + dir);
        f << out.summary.dump(2) << '\n';
    }
}

SampleSizeBounds sample_size_formulas(double m, double alpha, double delta, double tau, double p,
                                      double bound_m, double rho, double d, double big_c,
                                      double small_c) {
    if (!(m > 0) || !(alpha > 0) || !(delta > 0) || !(tau > 0) || !(p > 0) || !(bound_m > 0) ||
        !(rho > 0) || !(d > 0))
        throw ConfigError("sample_size_formulas: inputs must be positive");
    const double e = 2.718281828459045235360287471353;
    auto ceil_u64 = [](double v) {
        if (!(v > 0)) return std::uint64_t(0);
        if (v > 9.2e18) return UINT64_C(0x7fffffffffffffff);
        return static_cast<std::uint64_t>(std::ceil(v));
    };
    SampleSizeBounds b;
    b.n_subgaussian = ceil_u64(2000.0 * m * std::pow(alpha, 4) / (delta * delta) *
                               std::log(60.0 * e * p / (m * delta)));
    b.n_sparse = ceil_u64(80.0 * m * std::pow(alpha, 4) / (tau * tau) *
                          std::log(12.0 * e * p / (m * tau)));
    double core = big_c * bound_m * bound_m * d * std::log(p) / (rho * delta * delta);
    b.n_bounded = ceil_u64(core * std::pow(std::log(core), 3));
    b.n_recovery = ceil_u64(big_c * m * std::log(small_c * p / m));
    return b;
}

WalshNecessityReport walsh_necessity(std::size_t p, std::size_t m, std::size_t n,
                                     std::size_t reps, std::uint64_t seed, bool run_recovery,
                                     unsigned threads) {
    if (m == 0 || (m & (m - 1)) != 0) throw ConfigError("walsh_necessity: m must be a power of two");
    if (p == 0 || p % m != 0) throw ConfigError("walsh_necessity: p must be a multiple of m");
    std::size_t l = 0;
    while ((std::size_t(1) << l) < m) ++l;
    DenseMatrix block = walsh_matrix(l);
    DenseMatrix master(p, p);
    for (std::size_t b = 0; b < p / m; ++b)
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j) master(b * m + i, b * m + j) = block(i, j);

    std::vector<char> covered(reps, 0), recovered(reps, 0);
    parallel_for_index(reps, threads, [&](std::size_t rep) {
        Rng rng(mix_stream(seed, rep));
        std::vector<char> seen(p, 0);
        std::vector<std::size_t> picks(n);
        std::size_t distinct = 0;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t r = rng.next_below(p);
            picks[i] = r;
            if (!seen[r]) {
                seen[r] = 1;
                ++distinct;
            }
        }
        covered[rep] = distinct == p;
        if (run_recovery) {
            DenseMatrix x(n, p);
            for (std::size_t i = 0; i < n; ++i) {
                auto src = master.row(picks[i]);
                auto dst = x.row(i);
                std::copy(src.begin(), src.end(), dst.begin());
            }
            std::size_t target = rng.next_below(p);
            std::vector<double> beta_true(p, 0.0);
            beta_true[target] = 1.0;
            std::vector<double> rhs = matvec(x, beta_true);
            try {
                SolveResult sol = basis_pursuit(x, rhs, 1e-8, 20000);
                double err = 0.0;
                for (std::size_t j = 0; j < p; ++j) {
                    double d = sol.beta_hat[j] - beta_true[j];
                    err += d * d;
                }
                recovered[rep] = std::sqrt(err) <= 1e-6;
            } catch (const Error&) {
                recovered[rep] = 0;
            }
        }
    });

    WalshNecessityReport rep;
    rep.p = p;
    rep.m = m;
    rep.n = n;
    rep.reps = reps;
    std::size_t cover_ok = 0, rec_ok = 0;
    for (std::size_t r = 0; r < reps; ++r) {
        cover_ok += covered[r] ? 1 : 0;
        rec_ok += recovered[r] ? 1 : 0;
    }
    rep.all_rows_frequency = double(cover_ok) / double(reps);
    rep.recovery_run = run_recovery;
    rep.recovery_frequency = run_recovery ? double(rec_ok) / double(reps) : 0.0;
    return rep;
}

std::vector<PhaseCell> phase_diagram(const ExperimentConfig& cfg) {
    cfg.validate();
    const PopulationModel pop = build_population(cfg);
    const std::size_t p = cfg.covariance.p;
    const std::size_t cells = cfg.n_values.size() * cfg.s0_grid.size();
    const std::size_t jobs = cells * cfg.trials;
    std::vector<char> success(jobs, 0);

    parallel_for_index(jobs, cfg.threads, [&](std::size_t job) {
        const std::size_t cell = job / cfg.trials, trial = job % cfg.trials;
        const std::size_t ni = cell / cfg.s0_grid.size(), si = cell % cfg.s0_grid.size();
        const std::size_t n = cfg.n_values[ni], s0 = cfg.s0_grid[si];
        if (s0 == 0 || s0 >= p) throw ConfigError("phase_diagram: s0 grid out of range");
        const std::uint64_t seed = mix_stream(trial_seed(cfg.base_seed, ni, trial), si);

        if (cfg.success_metric == "recovery") {
            DenseMatrix x = sample_design(cfg.ensemble, pop.a, n, mix_stream(seed, 1)).x;
            Rng plant_rng(mix_stream(seed, 2));
            std::vector<double> beta_true(p, 0.0);
            std::vector<int> pool(p);
            for (std::size_t i = 0; i < p; ++i) pool[i] = int(i);
            for (std::size_t i = 0; i < s0; ++i) {
                std::size_t j = i + plant_rng.next_below(p - i);
                std::swap(pool[i], pool[j]);
                beta_true[pool[i]] = plant_rng.next_sign();
            }
            std::vector<double> rhs = matvec(x, beta_true);
            try {
                SolveResult sol = basis_pursuit(x, rhs, 1e-8, 20000);
                double err = 0.0;
                for (std::size_t j = 0; j < p; ++j) {
                    double d = sol.beta_hat[j] - beta_true[j];
                    err += d * d;
                }
                success[job] = std::sqrt(err) <= 1e-6 * std::max(1.0, norm2(beta_true));
            } catch (const Error&) {
                success[job] = 0;
            }
        } else {
            DenseMatrix psi = sample_psi(cfg.ensemble, n, pop.a.rows(), mix_stream(seed, 1));
            ConeSpec cone{s0, cfg.cone.k0};
            std::size_t d_prime = std::min(4 * s0, p);
            ReductionReport rep = reduction_verify(
                psi, pop.a, cone, cfg.delta, d_prime, cfg.cone_samples, mix_stream(seed, 2),
                cfg.support_samples,
                HeuristicMode{cfg.re_restarts, cfg.re_iters, mix_stream(seed, 3)});
            success[job] = rep.transfer_holds;
        }
    });

    std::vector<PhaseCell> out;
    for (std::size_t ni = 0; ni < cfg.n_values.size(); ++ni) {
        for (std::size_t si = 0; si < cfg.s0_grid.size(); ++si) {
            PhaseCell c;
            c.n = cfg.n_values[ni];
            c.s0 = cfg.s0_grid[si];
            c.trials = cfg.trials;
            const std::size_t cell = ni * cfg.s0_grid.size() + si;
            for (std::size_t t = 0; t < cfg.trials; ++t)
                c.successes += success[cell * cfg.trials + t] ? 1 : 0;
            c.frequency = double(c.successes) / double(c.trials);
            out.push_back(c);
        }
    }
    return out;
}

std::string phase_csv(const std::vector<PhaseCell>& cells) {
    std::ostringstream csv;
    csv << "# re-cert schema v1\n";
    csv << "n,s0,trials,successes,frequency\n";
    for (const PhaseCell& c : cells)
        csv << c.n << ',' << c.s0 << ',' << c.trials << ',' << c.successes << ','
            << format_double(c.frequency) << '\n';
    return csv.str();
}

// ---- config parsing ---------------------------------------------------------

namespace {

RowDistribution parse_ensemble(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("kind"))
        throw ConfigError("ensemble: expected an object with a kind");
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "gaussian") return RowDistribution::gaussian();
    if (kind == "rademacher") return RowDistribution::rademacher();
    if (kind == "discrete_gaussian")
        return RowDistribution::discrete_gaussian(j.value("truncation", 20));
    if (kind == "uniform_bounded") {
        if (!j.contains("bound")) throw ConfigError("uniform_bounded: missing bound");
        return RowDistribution::uniform_bounded(j.at("bound").get<double>());
    }
    if (kind == "walsh_rows") {
        if (!j.contains("m") || !j.contains("k"))
            throw ConfigError("walsh_rows: missing m or k");
        return RowDistribution::walsh_rows(j.at("m").get<std::size_t>(),
                                           j.at("k").get<std::size_t>());
    }
    throw ConfigError("unknown ensemble kind: " + kind);
}

CovarianceSpec parse_covariance(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("kind") || !j.contains("p"))
        throw ConfigError("covariance: expected an object with kind and p");
    std::string kind = j.at("kind").get<std::string>();
    std::size_t p = j.at("p").get<std::size_t>();
    if (kind == "identity") return CovarianceSpec::identity(p);
    if (kind == "ar1") {
        if (!j.contains("rho")) throw ConfigError("ar1 covariance: missing rho");
        return CovarianceSpec::ar1(p, j.at("rho").get<double>());
    }
    if (kind == "scaled_identity") {
        if (!j.contains("scale")) throw ConfigError("scaled_identity covariance: missing scale");
        return CovarianceSpec::scaled_identity(p, j.at("scale").get<double>());
    }
    if (kind == "explicit") {
        if (!j.contains("path")) throw ConfigError("explicit covariance: missing path");
        CovarianceSpec spec = CovarianceSpec::explicit_matrix(
            load_matrix(j.at("path").get<std::string>()));
        if (spec.p != p) throw ConfigError("explicit covariance: file dimension differs from p");
        return spec;
    }
    throw ConfigError("unknown covariance kind: " + kind);
}

}  // namespace

ExperimentConfig parse_config_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config: expected a JSON object");
    ExperimentConfig cfg;
    if (!j.contains("kind")) throw ConfigError("config: missing kind");
    cfg.kind = ExperimentConfig::kind_from_string(j.at("kind").get<std::string>());
    if (j.contains("ensemble")) cfg.ensemble = parse_ensemble(j.at("ensemble"));
    if (j.contains("covariance")) cfg.covariance = parse_covariance(j.at("covariance"));
    if (j.contains("cone")) {
        cfg.cone.s0 = j.at("cone").value("s0", std::size_t(1));
        cfg.cone.k0 = j.at("cone").value("k0", 1.0);
    }
    cfg.delta = j.value("delta", cfg.delta);
    cfg.tau = j.value("tau", cfg.tau);
    if (j.contains("n_values")) cfg.n_values = j.at("n_values").get<std::vector<std::size_t>>();
    cfg.trials = j.value("trials", cfg.trials);
    cfg.base_seed = j.value("base_seed", cfg.base_seed);
    cfg.d_prime = j.value("d_prime", cfg.d_prime);
    cfg.cone_samples = j.value("cone_samples", cfg.cone_samples);
    cfg.support_samples = j.value("support_samples", cfg.support_samples);
    cfg.re_restarts = j.value("re_restarts", cfg.re_restarts);
    cfg.re_iters = j.value("re_iters", cfg.re_iters);
    if (j.contains("theta_values"))
        cfg.theta_values = j.at("theta_values").get<std::vector<double>>();
    cfg.reps = j.value("reps", cfg.reps);
    cfg.sigma = j.value("sigma", cfg.sigma);
    cfg.lambda_scale = j.value("lambda_scale", cfg.lambda_scale);
    cfg.s_planted = j.value("s_planted", cfg.s_planted);
    if (j.contains("s0_grid")) cfg.s0_grid = j.at("s0_grid").get<std::vector<std::size_t>>();
    cfg.success_metric = j.value("success_metric", cfg.success_metric);
    cfg.walsh_recovery = j.value("walsh_recovery", cfg.walsh_recovery);
    cfg.out_dir = j.value("out_dir", cfg.out_dir);
    cfg.threads = j.value("threads", cfg.threads);
    cfg.emit_timings = j.value("emit_timings", cfg.emit_timings);
    return cfg;
}

namespace {

std::string strip_toml_comment(const std::string& line) {
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_string = !in_string;
        if (line[i] == '#' && !in_string) return line.substr(0, i);
    }
    return line;
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

nlohmann::json parse_toml_scalar(const std::string& raw) {
    std::string v = trim(raw);
    if (v.empty()) throw ConfigError("toml: empty value");
    if (v.front() == '"') {
        if (v.size() < 2 || v.back() != '"') throw ConfigError("toml: unterminated string");
        return v.substr(1, v.size() - 2);
    }
    if (v == "true") return true;
    if (v == "false") return false;
    try {
        if (v.find_first_of(".eE") == std::string::npos &&
            v.find_first_not_of("+-0123456789") == std::string::npos) {
            if (v.front() == '-') return std::stoll(v);
            return std::stoull(v);
        }
        std::size_t used = 0;
        double d = std::stod(v, &used);
        if (used != v.size()) throw ConfigError("toml: malformed number: " + v);
        return d;
    } catch (const std::invalid_argument&) {
        throw ConfigError("toml: cannot parse value: " + v);
    } catch (const std::out_of_range&) {
        throw ConfigError("toml: number out of range: " + v);
    }
}

nlohmann::json parse_toml_value(const std::string& raw) {
    std::string v = trim(raw);
    if (!v.empty() && v.front() == '[') {
        if (v.back() != ']') throw ConfigError("toml: unterminated array");
        nlohmann::json arr = nlohmann::json::array();
        std::string body = v.substr(1, v.size() - 2);
        std::string item;
        bool in_string = false;
        for (char c : body) {
            if (c == '"') in_string = !in_string;
            if (c == ',' && !in_string) {
                if (!trim(item).empty()) arr.push_back(parse_toml_scalar(item));
                item.clear();
            } else {
                item += c;
            }
        }
        if (!trim(item).empty()) arr.push_back(parse_toml_scalar(item));
        return arr;
    }
    return parse_toml_scalar(v);
}

}  // namespace

nlohmann::json toml_subset_to_json(const std::string& text) {
    nlohmann::json root = nlohmann::json::object();
    nlohmann::json* current = &root;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        line = trim(strip_toml_comment(line));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("toml: malformed table header");
            std::string name = trim(line.substr(1, line.size() - 2));
            if (name.empty()) throw ConfigError("toml: empty table name");
            root[name] = nlohmann::json::object();
            current = &root[name];
            continue;
        }
        std::size_t eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("toml: expected key = value: " + line);
        std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw ConfigError("toml: empty key");
        (*current)[key] = parse_toml_value(line.substr(eq + 1));
    }
    return root;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file: " + path);
    std::stringstream buf;
    buf << f.rdbuf();
    std::string text = buf.str();

    bool looks_json = false;
    for (char c : text) {
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n') continue;
        looks_json = c == '{';
        break;
    }
    if (looks_json || path.ends_with(".json")) {
        nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
        if (j.is_discarded()) throw ConfigError("config: invalid JSON in " + path);
        return parse_config_json(j);
    }
    return parse_config_json(toml_subset_to_json(text));
}

}  // namespace recert
