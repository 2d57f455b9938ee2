#include <doctest.h>

#include <cmath>
#include <fstream>

#include "recert/ensembles.hpp"
#include "recert/errors.hpp"
#include "recert/harness.hpp"
#include "recert/re_spectra.hpp"
#include "recert/rng.hpp"

using namespace recert;

namespace {

ExperimentConfig tiny_transfer_config() {
    ExperimentConfig cfg;
    cfg.kind = ExperimentConfig::Kind::re_transfer;
    cfg.ensemble = RowDistribution::gaussian();
    cfg.covariance = CovarianceSpec::identity(8);
    cfg.cone = ConeSpec{1, 1.0};
    cfg.delta = 0.3;
    cfg.n_values = {60};
    cfg.trials = 4;
    cfg.base_seed = 7;
    cfg.d_prime = 3;
    cfg.cone_samples = 100;
    cfg.re_restarts = 4;
    cfg.re_iters = 12;
    return cfg;
}

}  // namespace

TEST_CASE("trial seeds differ across the grid and repeat across calls") {
    CHECK(trial_seed(1, 0, 0) == trial_seed(1, 0, 0));
    CHECK(trial_seed(1, 0, 0) != trial_seed(1, 0, 1));
    CHECK(trial_seed(1, 0, 0) != trial_seed(1, 1, 0));
    CHECK(trial_seed(1, 0, 0) != trial_seed(2, 0, 0));
}

TEST_CASE("config json round trip") {
    nlohmann::json j = {
        {"kind", "re_transfer"},
        {"ensemble", {{"kind", "gaussian"}}},
        {"covariance", {{"kind", "identity"}, {"p", 32}}},
        {"cone", {{"s0", 2}, {"k0", 1.0}}},
        {"delta", 0.25},
        {"n_values", {640}},
        {"trials", 50},
        {"base_seed", 11},
        {"d_prime", 8},
    };
    ExperimentConfig cfg = parse_config_json(j);
    CHECK(cfg.kind == ExperimentConfig::Kind::re_transfer);
    CHECK(cfg.covariance.p == 32);
    CHECK(cfg.cone.s0 == 2);
    CHECK(cfg.d_prime == 8);
    CHECK(cfg.base_seed == 11);
    cfg.validate();

    nlohmann::json bad = j;
    bad["n_values"] = {640, 320};  // not increasing
    CHECK_THROWS_AS(parse_config_json(bad).validate(), ConfigError);
}

TEST_CASE("toml subset parses into the same config") {
    std::string toml = R"(
# comment
kind = "sparse_isometry"   # trailing comment
delta = 0.25
tau = 0.3
n_values = [50, 100, 200]
trials = 10
base_seed = 42
d_prime = 3

[ensemble]
kind = "rademacher"

[covariance]
kind = "ar1"
p = 24
rho = 0.5

[cone]
s0 = 2
k0 = 1.0
)";
    ExperimentConfig cfg = parse_config_json(toml_subset_to_json(toml));
    CHECK(cfg.kind == ExperimentConfig::Kind::sparse_isometry);
    CHECK(cfg.ensemble.kind == RowDistribution::Kind::rademacher);
    CHECK(cfg.covariance.kind == CovarianceSpec::Kind::ar1);
    CHECK(cfg.covariance.rho == 0.5);
    CHECK(cfg.n_values == std::vector<std::size_t>{50, 100, 200});
    cfg.validate();

    CHECK_THROWS_AS(toml_subset_to_json("kind \"oops\""), ConfigError);
}

TEST_CASE("experiment output is byte-identical across reruns and worker counts") {
    ExperimentConfig cfg = tiny_transfer_config();
    ExperimentOutput a = run_experiment(cfg);
    ExperimentOutput b = run_experiment(cfg);
    CHECK(a.csv == b.csv);
    CHECK(a.summary.dump() == b.summary.dump());

    cfg.threads = 4;
    ExperimentOutput c = run_experiment(cfg);
    CHECK(a.csv == c.csv);
    CHECK(a.summary.dump() == c.summary.dump());

    // wall_time column stays zeroed unless timings are opted in
    CHECK(a.csv.find("wall_time_ms") != std::string::npos);
    for (const TrialRecord& r : a.records) CHECK(r.wall_time_ms == 0.0);
}

TEST_CASE("transfer flags are recomputable from the recorded constants") {
    ExperimentConfig cfg = tiny_transfer_config();
    ExperimentOutput out = run_experiment(cfg);
    REQUIRE(out.records.size() == 4);
    for (const TrialRecord& r : out.records) {
        bool again = r.k_xa <= r.k_a / (1.0 - cfg.delta) + 1e-9;
        CHECK(r.transfer_holds == again);
        CHECK(std::isfinite(r.delta_sparse));
        CHECK(std::isfinite(r.cone_ratio_min));
        CHECK(std::isfinite(r.cone_ratio_max));
        CHECK(std::isfinite(r.k_a));
        CHECK(std::isfinite(r.k_xa));
    }
}

TEST_CASE("bernstein experiment delegates to the tail check") {
    ExperimentConfig cfg;
    cfg.kind = ExperimentConfig::Kind::bernstein;
    cfg.ensemble = RowDistribution::rademacher();
    cfg.covariance = CovarianceSpec::identity(2);
    cfg.n_values = {50};
    cfg.theta_values = {0.4};
    cfg.reps = 500;
    cfg.trials = 1;
    cfg.base_seed = 5;
    ExperimentOutput out = run_experiment(cfg);
    REQUIRE(out.summary["cells"].size() == 1);
    const auto& cell = out.summary["cells"][0];
    CHECK(cell["empirical_tail"].get<double>() == 0.0);
    CHECK(cell["holds"].get<bool>());

    BernsteinReport direct =
        bernstein_tail_check(cfg.ensemble, 50, 0.4, 500, trial_seed(cfg.base_seed, 0, 0));
    CHECK(cell["bound"].get<double>() == direct.bound);
    CHECK(cell["empirical_tail"].get<double>() == direct.empirical_tail);
}

TEST_CASE("sample size formulas evaluate the pinned bounds") {
    SampleSizeBounds b = sample_size_formulas(10, 1.0, 0.5, 0.5, 100, 1.0, 1.0, 100);
    CHECK(std::llabs(std::int64_t(b.n_subgaussian) - 647207) <= 1);
    CHECK(std::llabs(std::int64_t(b.n_sparse) - 20739) <= 1);
    CHECK(std::llabs(std::int64_t(b.n_bounded) - 782933) <= 1);
    CHECK(std::llabs(std::int64_t(b.n_recovery) - 24) <= 1);

    // doubling m approximately doubles each bound (the log factor shrinks a bit)
    SampleSizeBounds b2 = sample_size_formulas(20, 1.0, 0.5, 0.5, 100, 1.0, 1.0, 100);
    CHECK(double(b2.n_subgaussian) > 1.7 * double(b.n_subgaussian));
    CHECK(double(b2.n_subgaussian) < 2.0 * double(b.n_subgaussian));
    CHECK(double(b2.n_sparse) > 1.7 * double(b.n_sparse));
    CHECK(double(b2.n_sparse) < 2.0 * double(b.n_sparse));
}

TEST_CASE("walsh necessity coupon collector at small scale") {
    // single-block single-row degenerate case: one coupon only
    WalshNecessityReport deg = walsh_necessity(1, 1, 1, 50, 3);
    CHECK(deg.all_rows_frequency == 1.0);

    // p = 8: generous draw budget covers, a bare budget does not
    const std::size_t p = 8;
    std::size_t n_big = std::size_t(std::ceil(double(p) * std::log(double(p)) + 5.0 * double(p)));
    WalshNecessityReport big = walsh_necessity(p, 2, n_big, 100, 11);
    CHECK(big.all_rows_frequency >= 0.95);
    WalshNecessityReport small = walsh_necessity(p, 2, p, 100, 13);
    CHECK(small.all_rows_frequency <= 0.05);

    // deterministic across thread counts
    WalshNecessityReport t1 = walsh_necessity(p, 2, n_big, 60, 17, true, 1);
    WalshNecessityReport t4 = walsh_necessity(p, 2, n_big, 60, 17, true, 4);
    CHECK(t1.all_rows_frequency == t4.all_rows_frequency);
    CHECK(t1.recovery_frequency == t4.recovery_frequency);
}

TEST_CASE("phase diagram frequencies rise with n and vanish when underdetermined") {
    ExperimentConfig cfg;
    cfg.kind = ExperimentConfig::Kind::phase_diagram;
    cfg.ensemble = RowDistribution::gaussian();
    cfg.covariance = CovarianceSpec::identity(64);
    cfg.n_values = {1, 12, 40};
    cfg.s0_grid = {2};
    cfg.trials = 30;
    cfg.base_seed = 23;
    cfg.success_metric = "recovery";
    cfg.threads = 2;
    std::vector<PhaseCell> cells = phase_diagram(cfg);
    REQUIRE(cells.size() == 3);

    // n = 1 < s0: no exact recovery of a planted dense-support signal
    CHECK(cells[0].frequency == 0.0);
    // monotone up to three binomial standard errors
    for (std::size_t i = 1; i < cells.size(); ++i) {
        double fa = cells[i - 1].frequency, fb = cells[i].frequency;
        double se = std::sqrt(std::max(fa * (1 - fa), fb * (1 - fb)) / double(cfg.trials));
        CHECK(fb >= fa - 3.0 * se - 1e-12);
    }
    CHECK(cells.back().frequency >= 0.9);

    std::string csv = phase_csv(cells);
    CHECK(csv.rfind("# re-cert schema v1\n", 0) == 0);
    CHECK(csv.find("n,s0,trials,successes,frequency") != std::string::npos);
}

TEST_CASE("experiment csv carries the schema header and full column set") {
    ExperimentConfig cfg = tiny_transfer_config();
    ExperimentOutput out = run_experiment(cfg);
    CHECK(out.csv.rfind("# re-cert schema v1\n", 0) == 0);
    CHECK(out.csv.find("trial_index,seed,n,p,s0,k0,delta_sparse,cone_ratio_min,cone_ratio_max,"
                       "K_A,K_XA,transfer_holds,recovery_ratio,wall_time_ms") !=
          std::string::npos);
}
