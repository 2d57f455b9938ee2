#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "recert/cone.hpp"
#include "recert/ensembles.hpp"

namespace recert {

struct ExperimentConfig {
    enum class Kind {
        re_transfer,
        sparse_isometry,
        bounded_re,
        bernstein,
        recovery_rate,
        walsh_necessity,
        phase_diagram
    };
    Kind kind = Kind::re_transfer;
    RowDistribution ensemble;
    CovarianceSpec covariance;
    ConeSpec cone;
    double delta = 0.25;
    double tau = 0.3;
    std::vector<std::size_t> n_values;
    std::size_t trials = 50;
    std::uint64_t base_seed = 1;
    std::size_t d_prime = 0;  // 0 -> min(4*s0, p)
    std::size_t cone_samples = 200;
    std::size_t support_samples = 2000;
    std::size_t re_restarts = 12;
    std::size_t re_iters = 40;

    std::vector<double> theta_values;  // bernstein cells
    std::size_t reps = 100000;         // bernstein repetitions

    double sigma = 0.5;         // recovery noise level
    double lambda_scale = 2.0;  // lambda_n = lambda_scale * sigma * sqrt(2 log p / n)
    std::size_t s_planted = 4;  // recovery planted support size

    std::vector<std::size_t> s0_grid;        // phase diagram rows
    std::string success_metric = "recovery";  // phase: "recovery" or "re_transfer"
    bool walsh_recovery = false;              // walsh_necessity: also run basis pursuit

    std::string out_dir = "out";
    unsigned threads = 1;
    // Off by default: real per-trial wall times in the CSV make reruns differ
    // byte-for-byte, so the column is written as 0 unless explicitly enabled.
    bool emit_timings = false;

    std::size_t effective_d_prime() const;
    void validate() const;
    static Kind kind_from_string(const std::string& s);
    std::string kind_name() const;
};

struct TrialRecord {
    std::size_t trial_index = 0;
    std::uint64_t seed = 0;
    std::size_t n = 0;
    std::size_t p = 0;
    std::size_t s0 = 0;
    double k0 = 0.0;
    double delta_sparse = 0.0;
    double cone_ratio_min = 0.0;
    double cone_ratio_max = 0.0;
    double k_a = 0.0;
    double k_xa = 0.0;
    bool transfer_holds = false;
    double recovery_ratio = 0.0;
    double wall_time_ms = 0.0;
};

struct ExperimentOutput {
    std::vector<TrialRecord> records;  // sorted by (n, trial_index)
    nlohmann::json summary;
    std::string csv;  // records with the schema header
};

// Trial seeds derive as mix_stream(mix_stream(base_seed, n_index), trial),
// so grids are embarrassingly parallel yet scheduling-independent.
std::uint64_t trial_seed(std::uint64_t base_seed, std::size_t n_index, std::size_t trial);

ExperimentOutput run_experiment(const ExperimentConfig& config);

// Writes records.csv and summary.json (phase_diagram: phase.csv) under dir.
void write_experiment_output(const ExperimentOutput& out, const ExperimentConfig& config,
                             const std::string& dir);

struct SampleSizeBounds {
    std::uint64_t n_subgaussian = 0;  // (2000 m a^4/d^2) log(60 e p/(m d))
    std::uint64_t n_sparse = 0;       // (80 m a^4/t^2) log(12 e p/(m t))
    std::uint64_t n_bounded = 0;      // (C M^2 d log p/(rho d^2)) log^3(same)
    std::uint64_t n_recovery = 0;     // C m log(c p / m)
};

SampleSizeBounds sample_size_formulas(double m, double alpha, double delta, double tau, double p,
                                      double bound_m, double rho, double d, double big_c = 1.0,
                                      double small_c = 1.0);

struct WalshNecessityReport {
    double all_rows_frequency = 0.0;
    double recovery_frequency = 0.0;
    bool recovery_run = false;
    std::size_t p = 0, m = 0, n = 0, reps = 0;
};

// Coupon-collector necessity for the Walsh block-diagonal ensemble: how often
// do n uniform row draws cover all p master rows, and (optionally) how often
// does basis pursuit recover a planted 1-sparse signal from those rows.
WalshNecessityReport walsh_necessity(std::size_t p, std::size_t m, std::size_t n,
                                     std::size_t reps, std::uint64_t seed,
                                     bool run_recovery = false, unsigned threads = 1);

struct PhaseCell {
    std::size_t n = 0;
    std::size_t s0 = 0;
    std::size_t trials = 0;
    std::size_t successes = 0;
    double frequency = 0.0;
};

std::vector<PhaseCell> phase_diagram(const ExperimentConfig& config);
std::string phase_csv(const std::vector<PhaseCell>& cells);

// Config files: JSON, or a flat TOML subset (top-level keys and one level of
// [tables]; string/number/boolean/array values).
ExperimentConfig parse_config_file(const std::string& path);
ExperimentConfig parse_config_json(const nlohmann::json& j);
nlohmann::json toml_subset_to_json(const std::string& text);

}  // namespace recert
