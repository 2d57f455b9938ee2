#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "recert/cone.hpp"
#include "recert/dense_matrix.hpp"

namespace recert {

// ---- support coverage ------------------------------------------------------

struct EnumerateSupports {};
struct SampleSupports {
    std::size_t count = 2000;
    std::uint64_t seed = 0;
};
using SupportMode = std::variant<EnumerateSupports, SampleSupports>;

inline constexpr std::uint64_t kEnumerateCapSparseEig = 2'000'000;
inline constexpr std::uint64_t kEnumerateCapIsometry = 200'000;

// ---- sparse eigenvalues and the isometry constant ---------------------------

struct SparseEigResult {
    std::size_t m = 0;
    double rho_min = 0.0;
    double rho_max = 0.0;
    std::vector<int> argmin_support;
    std::vector<int> argmax_support;
    bool exact = false;  // true when every support was enumerated
};

// Extremes of ||A t||^2 / ||t||^2 over m-sparse t: per support J the edge
// eigenvalues of A_J^T A_J.
SparseEigResult sparse_eigs(const DenseMatrix& a, std::size_t m, const SupportMode& mode);

// Smallest theta with (1-theta) <= ||X_T c||^2 / (n ||c||^2) <= (1+theta)
// over all supports |T| = s, by full enumeration.
double rip_constant(const DenseMatrix& x, std::size_t s);

// ---- restricted eigenvalue constant ------------------------------------------

struct ExactOracleMode {
    std::size_t grid_per_axis = 720;
};
struct HeuristicMode {
    std::size_t restarts = 12;
    std::size_t iters = 40;
    std::uint64_t seed = 0;
};
using ReMode = std::variant<ExactOracleMode, HeuristicMode>;

struct ReEstimate {
    double inv_k = 0.0;  // minimized ||A v||_2 / ||v_J||_2
    double k = 0.0;      // 1/inv_k, +inf when inv_k == 0
    std::vector<double> witness_v;  // scaled so ||v_J||_2 = 1
    std::vector<int> witness_j;
    bool exact = false;             // exact_oracle mode
    std::size_t grid_per_axis = 0;  // oracle grid resolution, 0 for heuristic
    ConeSpec spec;
};

// Minimizes ||A v||_2 / ||v_J||_2 over |J| = s0 and the slice
// ||v_{J^c}||_1 <= k0 ||v_J||_1, ||v_J||_2 = 1.
//
// exact_oracle: per support, sweeps v_J over a spherical grid (antipodal
// halves identified) and solves the inner l1-constrained least squares by
// projected gradient. Certifying; requires s0 <= 3 and C(p, s0) <= 1e4.
//
// heuristic: alternates support adoption, the inner convex solve, and sphere
// steps on v_J from random cone starts. Reported inv_k is an upper bound on
// the true minimum, so k is a lower bound on the true constant.
ReEstimate re_constant(const DenseMatrix& a, const ConeSpec& spec, const ReMode& mode);

// Reduced dimension s0 + s0 * max_col_norm^2 * 16 K^2 (3k0)^2 (3k0+1) / delta^2,
// ceilinged; saturates at 2^63-1.
std::uint64_t d_dimension(const ConeSpec& spec, double k_at_3k0, double max_col_norm,
                          double delta);

// ---- empirical sparsification ------------------------------------------------

enum class MaureyMode { strict, relaxed };

struct MaureyResult {
    std::vector<int> support;     // L: distinct chosen point indices
    std::vector<double> coeffs;   // aligned with support, sums to 1
    double err = 0.0;             // ||y' - y||_2, recomputed from the output
    std::size_t attempts = 0;
    std::size_t draws_per_attempt = 0;  // m in strict mode, 4m in relaxed
};

// Approximates y = sum_j alpha_j u_j by an average of i.i.d. draws from
// alpha. strict draws m = ceil(4 max_j ||u_j||^2 / eps^2) indices per
// attempt; relaxed draws 4m, pushing the per-attempt failure probability
// below 1/4. Rows of `points` are the u_j.
MaureyResult maurey_sparsify(const DenseMatrix& points, std::span<const double> weights,
                             double epsilon, MaureyMode mode, std::uint64_t seed,
                             std::size_t max_attempts = 50);

// ---- isometry reports ----------------------------------------------------------

struct SupportRatio {
    std::vector<int> support;
    double ratio_min = 0.0;
    double ratio_max = 0.0;
};

struct IsometryReport {
    std::vector<SupportRatio> supports;  // supports checked, with exact extremes
    double global_delta = 0.0;           // max over supports of max(max-1, 1-min)
    bool exact_per_support = true;       // extremes via the whitened eigenproblem
};

// Per support J, exact extremes of ||Psi A_J x||_2 / (sqrt(n) ||A_J x||_2)
// over the range of A_J.
IsometryReport restricted_isometry_report(const DenseMatrix& psi, const DenseMatrix& a,
                                          std::size_t d_prime, const SupportMode& mode);

struct ReductionReport {
    double delta_sparse = 0.0;  // measured sparse-image deviation at d_prime
    double cone_ratio_min = 0.0;
    double cone_ratio_max = 0.0;
    double bound_lower = 0.0;  // 1 - 5 * delta_sparse
    double bound_upper = 0.0;  // 1 + 3 * delta_sparse
    bool conclusion_holds = false;
    ReEstimate k_a;
    ReEstimate k_xa;
    bool transfer_holds = false;  // k_xa <= k_a / (1 - delta_target) + 1e-9
    double delta_target = 0.0;    // caller's delta for the transfer bound
};

// Measures the sparse-image isometry of Psi/sqrt(n) against A at sparsity
// d_prime, evaluates sampled unit cone images against the implied
// [1-5d', 1+3d'] window, and compares restricted eigenvalue constants of A
// and Psi A / sqrt(n). Supports are enumerated when C(p, d_prime) is within
// the cap, otherwise support_samples random supports are used.
ReductionReport reduction_verify(const DenseMatrix& psi, const DenseMatrix& a,
                                 const ConeSpec& spec, double delta, std::size_t d_prime,
                                 std::size_t cone_samples, std::uint64_t seed,
                                 std::size_t support_samples = 2000,
                                 std::optional<ReMode> re_mode = std::nullopt);

// ---- convex hull dual check ------------------------------------------------------

struct HullCheckReport {
    double max_violation = 0.0;  // max over theta of (lhs - rhs)
    bool holds = false;          // max_violation <= 1e-9
    std::size_t theta_samples = 0;
    std::size_t cone_samples = 0;
    double delta = 0.0;
};

// max over |J| = d of || proj_{col(A_J)} theta ||_2 (exact per support).
double max_sparse_projection(const DenseMatrix& a, std::size_t d, std::span<const double> theta);

// For random unit functionals theta, compares the sampled supremum of
// <A x / ||A x||, theta> over the cone against (1-delta)^{-1} times the exact
// supremum over d-sparse images. The left side is sampled, so holds == false
// is a genuine counterexample only up to sampling.
HullCheckReport hull_functional_check(const DenseMatrix& a, const ConeSpec& spec, std::size_t d,
                                      double delta, std::size_t theta_samples,
                                      std::size_t cone_samples, std::uint64_t seed);

// ---- scalar tail check --------------------------------------------------------------

struct BernsteinReport {
    double empirical_tail = 0.0;
    double bound = 0.0;  // 2 exp(-theta^2 n / (10 alpha^4))
    bool holds = false;  // empirical <= bound + 3 * binomial std error
    double alpha = 0.0;
    double std_err = 0.0;
    std::size_t n = 0;
    std::size_t reps = 0;
    double theta = 0.0;
};

struct RowDistribution;  // ensembles.hpp

// Frequency of |n^{-1} sum Y_j^2 - 1| > theta over reps trials versus the
// sub-gaussian tail bound at the marginal's psi2 constant.
BernsteinReport bernstein_tail_check(const RowDistribution& dist, std::size_t n, double theta,
                                     std::size_t reps, std::uint64_t seed, unsigned threads = 1);

}  // namespace recert
