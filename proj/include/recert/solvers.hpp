#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "recert/dense_matrix.hpp"

namespace recert {

struct LassoProblem {
    DenseMatrix x;           // n x p design
    std::vector<double> y;   // length n
    double lambda_n = 0.0;   // penalty in the 1/(2n) objective scaling
    double sigma = 0.0;      // noise level, metadata only
};

struct SolveResult {
    std::vector<double> beta_hat;
    double objective = 0.0;  // lasso: (1/2n)||Y-Xb||^2 + lambda||b||_1; bp: ||b||_1
    std::size_t iterations = 0;
    bool converged = false;
    double duality_or_kkt_residual = 0.0;
};

// Cyclic coordinate descent with exact soft-threshold updates. Converged when
// the largest coordinate change in a sweep falls below tol * (1 + ||b||_inf);
// budget exhaustion clears the converged flag instead of throwing.
SolveResult lasso_cd(const LassoProblem& problem, double tol = 1e-10,
                     std::size_t max_iters = 100000);

// min ||b||_1 s.t. X b = rhs via alternating-direction splitting with
// residual-balancing penalty adaptation. Throws Infeasible when the equality
// residual cannot be brought below tol * ||rhs||_2.
SolveResult basis_pursuit(const DenseMatrix& x, std::span<const double> rhs, double tol = 1e-8,
                          std::size_t max_iters = 20000);

// Smallest s0 with sum_i min(beta_i^2, lambda^2 sigma^2) <= s0 lambda^2 sigma^2.
std::size_t oracle_s0(std::span<const double> beta, double lambda, double sigma);

// ||beta_hat - beta||_2^2 / (s0 lambda^2 sigma^2).
double oracle_rate_ratio(std::span<const double> beta_true, std::span<const double> beta_hat,
                         std::size_t s0, double lambda, double sigma);

struct ConeCheckResult {
    bool in_cone = false;
    std::vector<int> witness;
};

// Tests beta_hat - beta_true against the cone at s = |supp(beta_true)|.
// beta_hat == beta_true passes by convention (the zero vector lies in every
// cone).
ConeCheckResult lasso_cone_check(std::span<const double> beta_true,
                                 std::span<const double> beta_hat, double k0);

}  // namespace recert
