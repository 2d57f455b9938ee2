#pragma once

#include <span>
#include <utility>
#include <vector>

#include "recert/dense_matrix.hpp"

namespace recert {

struct SymEigResult {
    std::vector<double> eigenvalues;  // non-increasing
    DenseMatrix eigenvectors;         // columns aligned with eigenvalues
};

// Full spectrum of a symmetric matrix by cyclic Jacobi rotations.
// Sweeps stop once the off-diagonal Frobenius mass falls below
// tol * ||S||_F; the sweep budget is kJacobiMaxSweeps.
inline constexpr int kJacobiMaxSweeps = 100;
SymEigResult sym_eig(const DenseMatrix& s, double tol = 1e-12);

// Symmetric B with B*B ~= S. Eigenvalues in [-1e-10*||S||_2, 0) are
// clamped to zero; anything more negative is rejected.
DenseMatrix psd_sqrt(const DenseMatrix& s);

// Moore-Penrose inverse square root: directions with eigenvalue below
// deflate_tol * lambda_max are dropped.
DenseMatrix psd_inv_sqrt(const DenseMatrix& s, double deflate_tol = 1e-10);

// Extremes of x^T M x / x^T G x over the range of G. Eigendirections of G
// with eigenvalue <= tol * ||G||_2 are deflated before whitening.
std::pair<double, double> gen_eig_extremes(const DenseMatrix& m, const DenseMatrix& g,
                                           double tol = 1e-10);

// Euclidean projection onto { w : ||w||_1 <= radius }, exact sort-based rule.
std::vector<double> l1_ball_project(std::span<const double> v, double radius);

}  // namespace recert
