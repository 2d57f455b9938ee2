#pragma once

#include <cstdint>
#include <string>

#include "recert/dense_matrix.hpp"
#include "recert/rng.hpp"

namespace recert {

// Covariance model for the population Gram matrix.
struct CovarianceSpec {
    enum class Kind { identity, ar1, scaled_identity, explicit_matrix };
    Kind kind = Kind::identity;
    std::size_t p = 1;
    double rho = 0.0;    // ar1: Sigma_ij = rho^|i-j|
    double scale = 1.0;  // scaled_identity: Sigma = scale * I
    DenseMatrix matrix;  // explicit_matrix

    static CovarianceSpec identity(std::size_t p) { return {Kind::identity, p, 0.0, 1.0, {}}; }
    static CovarianceSpec ar1(std::size_t p, double rho) { return {Kind::ar1, p, rho, 1.0, {}}; }
    static CovarianceSpec scaled_identity(std::size_t p, double c) {
        return {Kind::scaled_identity, p, 0.0, c, {}};
    }
    static CovarianceSpec explicit_matrix(DenseMatrix m);
};

// Row law for random designs. The gaussian, rademacher, discrete_gaussian and
// uniform_bounded kinds have i.i.d. entries with a known scalar marginal;
// walsh_rows emits whole rows of a block-diagonal Walsh master matrix.
struct RowDistribution {
    enum class Kind { gaussian, rademacher, discrete_gaussian, uniform_bounded, walsh_rows };
    Kind kind = Kind::gaussian;
    int truncation = 20;        // discrete_gaussian: lattice support {-truncation..truncation}
    double bound = 1.0;         // uniform_bounded: entries uniform on [-bound, bound]
    std::size_t walsh_m = 2;    // walsh_rows: block size, a power of two
    std::size_t walsh_k = 1;    // walsh_rows: number of blocks, p = m*k

    static RowDistribution gaussian() { return {Kind::gaussian, 20, 1.0, 2, 1}; }
    static RowDistribution rademacher() { return {Kind::rademacher, 20, 1.0, 2, 1}; }
    static RowDistribution discrete_gaussian(int truncation = 20) {
        return {Kind::discrete_gaussian, truncation, 1.0, 2, 1};
    }
    static RowDistribution uniform_bounded(double m) {
        return {Kind::uniform_bounded, 20, m, 2, 1};
    }
    static RowDistribution walsh_rows(std::size_t m, std::size_t k) {
        return {Kind::walsh_rows, 20, 1.0, m, k};
    }

    // Kinds with a scalar marginal law (everything except walsh_rows). Rows of
    // such a matrix are isotropic when the marginal has unit variance, which
    // for uniform_bounded means bound = sqrt(3).
    bool is_psi2() const { return kind != Kind::walsh_rows; }
    bool is_bounded() const {
        return kind == Kind::rademacher || kind == Kind::uniform_bounded ||
               kind == Kind::walsh_rows;
    }
    double entry_bound() const;  // M for bounded kinds
    std::string name() const;
};

// One sampled design. When composed from a psi factor, x == psi * a exactly;
// raw bounded-row samples leave psi empty (and a holds the Walsh master for
// walsh_rows).
struct DesignSample {
    DenseMatrix x;
    DenseMatrix psi;
    DenseMatrix a;
    std::uint64_t seed = 0;
    RowDistribution dist;
};

DenseMatrix build_covariance(const CovarianceSpec& spec);

// n x q matrix with i.i.d. rows of a scalar-marginal kind. Row i consumes the
// derived stream mix_stream(seed, i), so generation order cannot matter.
DenseMatrix sample_psi(const RowDistribution& dist, std::size_t n, std::size_t q,
                       std::uint64_t seed);

// Sylvester-Hadamard matrix of size 2^l (caps at 4096).
DenseMatrix walsh_matrix(std::size_t l);

// i.i.d. rows with ||row||_inf <= M: walsh_rows draws uniformly among the p
// rows of the block-diagonal master; uniform_bounded fills entries uniform on
// [-M, M].
DesignSample sample_bounded_rows(const RowDistribution& dist, std::size_t n, std::size_t p,
                                 std::uint64_t seed);

// X = Psi * A with Psi sampled from a scalar-marginal kind.
DesignSample sample_design(const RowDistribution& dist, const DenseMatrix& a, std::size_t n,
                           std::uint64_t seed);

// One draw from the scalar marginal of a psi2 kind.
double sample_scalar(const RowDistribution& dist, Rng& rng);

// psi2 constant of the scalar marginal: inf{ t : E exp(Y^2/t^2) <= 2 }.
// gaussian and rademacher use the closed forms sqrt(8/3) and 1/sqrt(ln 2);
// the other marginals are solved by bisection (see psi2_constant_bisect).
double psi2_constant(const RowDistribution& dist);

// Bisection on the moment condition, available for every psi2 kind; the
// closed-form kinds use their analytic moment generating function here.
double psi2_constant_bisect(const RowDistribution& dist, double tol = 1e-10);

}  // namespace recert
