#include "recert/ensembles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <vector>

#include "recert/errors.hpp"
#include "recert/numerics.hpp"

namespace recert {

CovarianceSpec CovarianceSpec::explicit_matrix(DenseMatrix m) {
    CovarianceSpec s;
    s.kind = Kind::explicit_matrix;
    s.p = m.rows();
    s.matrix = std::move(m);
    return s;
}

double RowDistribution::entry_bound() const {
    switch (kind) {
        case Kind::rademacher: return 1.0;
        case Kind::uniform_bounded: return bound;
        case Kind::walsh_rows: return 1.0;
        default: throw UnsupportedError("entry_bound: distribution is not a bounded kind");
    }
}

std::string RowDistribution::name() const {
    switch (kind) {
        case Kind::gaussian: return "gaussian";
        case Kind::rademacher: return "rademacher";
        case Kind::discrete_gaussian: return "discrete_gaussian";
        case Kind::uniform_bounded: return "uniform_bounded";
        case Kind::walsh_rows: return "walsh_rows";
    }
    return "?";
}

DenseMatrix build_covariance(const CovarianceSpec& spec) {
    switch (spec.kind) {
        case CovarianceSpec::Kind::identity:
            return DenseMatrix::identity(spec.p);
        case CovarianceSpec::Kind::scaled_identity: {
            if (spec.scale <= 0.0) throw ConfigError("scaled_identity: scale must be positive");
            DenseMatrix s = DenseMatrix::identity(spec.p);
            for (std::size_t i = 0; i < spec.p; ++i) s(i, i) = spec.scale;
            return s;
        }
        case CovarianceSpec::Kind::ar1: {
            if (!(spec.rho > -1.0 && spec.rho < 1.0))
                throw ConfigError("ar1: rho must lie in (-1, 1)");
            DenseMatrix s(spec.p, spec.p);
            for (std::size_t i = 0; i < spec.p; ++i)
                for (std::size_t j = 0; j < spec.p; ++j)
                    s(i, j) = std::pow(spec.rho, std::fabs(double(i) - double(j)));
            return s;
        }
        case CovarianceSpec::Kind::explicit_matrix: {
            const DenseMatrix& s = spec.matrix;
            if (s.rows() != s.cols()) throw ConfigError("explicit covariance must be square");
            SymEigResult eig = sym_eig(s);  // also validates symmetry
            double lmax = std::max(0.0, eig.eigenvalues.front());
            if (eig.eigenvalues.back() < -1e-10 * std::max(lmax, 1e-300))
                throw NotPsdError("explicit covariance is not positive semidefinite");
            return s;
        }
    }
    throw ConfigError("unknown covariance kind");
}

namespace {

// Inverse-CDF table for the lattice law P(m) ~ exp(-m^2/2), m in
// {-truncation..truncation}. The tail mass beyond |m| = 20 is below 1e-80.
struct DiscreteGaussianTable {
    std::vector<double> cdf;
    int truncation;

    explicit DiscreteGaussianTable(int truncation) : truncation(truncation) {
        if (truncation < 0) throw ConfigError("discrete_gaussian: truncation must be >= 0");
        const int n = 2 * truncation + 1;
        std::vector<double> w(n);
        double z = 0.0;
        for (int i = 0; i < n; ++i) {
            double m = double(i - truncation);
            w[i] = std::exp(-0.5 * m * m);
            z += w[i];
        }
        cdf.resize(n);
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            acc += w[i] / z;
            cdf[i] = acc;
        }
        cdf[n - 1] = 1.0;
    }

    double draw(Rng& rng) const {
        double u = rng.next_unit();
        auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
        int idx = int(it - cdf.begin());
        if (idx >= int(cdf.size())) idx = int(cdf.size()) - 1;
        return double(idx - truncation);
    }

    // E m^2 under the truncated law, by direct summation.
    double second_moment() const {
        double z = 0.0, s = 0.0;
        for (int m = -truncation; m <= truncation; ++m) {
            double w = std::exp(-0.5 * double(m) * double(m));
            z += w;
            s += double(m) * double(m) * w;
        }
        return s / z;
    }
};

}  // namespace

double sample_scalar(const RowDistribution& dist, Rng& rng) {
    switch (dist.kind) {
        case RowDistribution::Kind::gaussian:
            return rng.next_gaussian();
        case RowDistribution::Kind::rademacher:
            return rng.next_sign();
        case RowDistribution::Kind::uniform_bounded:
            return (2.0 * rng.next_unit() - 1.0) * dist.bound;
        case RowDistribution::Kind::discrete_gaussian: {
            // Table rebuilt per call would be wasteful; keep a small cache.
            static thread_local std::unique_ptr<DiscreteGaussianTable> table;
            if (!table || table->truncation != dist.truncation)
                table = std::make_unique<DiscreteGaussianTable>(dist.truncation);
            return table->draw(rng);
        }
        default:
            throw UnsupportedError("sample_scalar: distribution has no scalar marginal");
    }
}

DenseMatrix sample_psi(const RowDistribution& dist, std::size_t n, std::size_t q,
                       std::uint64_t seed) {
    if (!dist.is_psi2())
        throw UnsupportedError("sample_psi: requires a scalar-marginal (psi2) kind");
    if (n == 0 || q == 0) throw ConfigError("sample_psi: n and q must be positive");
    DenseMatrix psi(n, q);
    for (std::size_t i = 0; i < n; ++i) {
        Rng row_rng(mix_stream(seed, i));
        auto r = psi.row(i);
        for (std::size_t j = 0; j < q; ++j) r[j] = sample_scalar(dist, row_rng);
    }
    return psi;
}

DenseMatrix walsh_matrix(std::size_t l) {
    if (l > 12) throw TooLargeError("walsh_matrix: 2^l exceeds the 4096 cap");
    std::size_t m = std::size_t(1) << l;
    DenseMatrix w(m, m);
    w(0, 0) = 1.0;
    for (std::size_t half = 1; half < m; half *= 2) {
        for (std::size_t i = 0; i < half; ++i) {
            for (std::size_t j = 0; j < half; ++j) {
                double x = w(i, j);
                w(i, j + half) = x;
                w(i + half, j) = x;
                w(i + half, j + half) = -x;
            }
        }
    }
    return w;
}

DesignSample sample_bounded_rows(const RowDistribution& dist, std::size_t n, std::size_t p,
                                 std::uint64_t seed) {
    DesignSample out;
    out.seed = seed;
    out.dist = dist;
    if (n == 0 || p == 0) throw ConfigError("sample_bounded_rows: n and p must be positive");

    if (dist.kind == RowDistribution::Kind::walsh_rows) {
        if ((dist.walsh_m & (dist.walsh_m - 1)) != 0 || dist.walsh_m == 0)
            throw ConfigError("walsh_rows: block size must be a power of two");
        if (p != dist.walsh_m * dist.walsh_k)
            throw ConfigError("walsh_rows: p must equal block_size * blocks");
        std::size_t l = 0;
        while ((std::size_t(1) << l) < dist.walsh_m) ++l;
        DenseMatrix block = walsh_matrix(l);
        // Master matrix: k Walsh blocks on the diagonal, rows drawn uniformly.
        DenseMatrix master(p, p);
        for (std::size_t b = 0; b < dist.walsh_k; ++b)
            for (std::size_t i = 0; i < dist.walsh_m; ++i)
                for (std::size_t j = 0; j < dist.walsh_m; ++j)
                    master(b * dist.walsh_m + i, b * dist.walsh_m + j) = block(i, j);
        DenseMatrix x(n, p);
        for (std::size_t i = 0; i < n; ++i) {
            Rng row_rng(mix_stream(seed, i));
            std::size_t pick = row_rng.next_below(p);
            auto src = master.row(pick);
            auto dst = x.row(i);
            std::copy(src.begin(), src.end(), dst.begin());
        }
        out.x = std::move(x);
        out.a = std::move(master);
        return out;
    }
    if (dist.kind == RowDistribution::Kind::uniform_bounded) {
        out.x = sample_psi(dist, n, p, seed);
        return out;
    }
    throw UnsupportedError("sample_bounded_rows: requires walsh_rows or uniform_bounded");
}

DesignSample sample_design(const RowDistribution& dist, const DenseMatrix& a, std::size_t n,
                           std::uint64_t seed) {
    DesignSample out;
    out.psi = sample_psi(dist, n, a.rows(), seed);
    out.x = matmul(out.psi, a);
    out.a = a;
    out.seed = seed;
    out.dist = dist;
    return out;
}

namespace {

// E exp(Y^2/t^2) for the scalar marginal, or +inf when the sum overflows.
double moment_condition(const RowDistribution& dist, double t) {
    double t2 = t * t;
    switch (dist.kind) {
        case RowDistribution::Kind::gaussian: {
            // Closed form (1 - 2/t^2)^{-1/2} for t^2 > 2.
            if (t2 <= 2.0) return std::numeric_limits<double>::infinity();
            return 1.0 / std::sqrt(1.0 - 2.0 / t2);
        }
        case RowDistribution::Kind::rademacher:
            return std::exp(1.0 / t2);
        case RowDistribution::Kind::discrete_gaussian: {
            double z = 0.0, s = 0.0;
            for (int m = -dist.truncation; m <= dist.truncation; ++m) {
                double m2 = double(m) * double(m);
                double w = std::exp(-0.5 * m2);
                z += w;
                double expo = m2 / t2 - 0.5 * m2;
                if (expo > 700.0) return std::numeric_limits<double>::infinity();
                s += std::exp(expo);
            }
            return s / z;
        }
        case RowDistribution::Kind::uniform_bounded: {
            // (1/M) int_0^M exp(u^2/t^2) du by composite Simpson.
            const int n = 4096;  // even
            double m = dist.bound;
            double h = m / n;
            double s = 1.0 + std::exp(m * m / t2);
            for (int i = 1; i < n; ++i) {
                double u = i * h;
                s += (i % 2 ? 4.0 : 2.0) * std::exp(u * u / t2);
            }
            return s * h / (3.0 * m);
        }
        default:
            throw UnsupportedError("psi2 constant: distribution has no scalar marginal");
    }
}

}  // namespace

double psi2_constant_bisect(const RowDistribution& dist, double tol) {
    if (!dist.is_psi2()) throw UnsupportedError("psi2 constant: bounded kind without marginal");
    // moment_condition decreases in t; bracket the root of == 2.
    double lo = 1e-3, hi = 1.0;
    while (moment_condition(dist, hi) > 2.0) {
        hi *= 2.0;
        if (hi > 1e6) throw NoConvergenceError("psi2 bisection: no upper bracket");
    }
    while ((hi - lo) > tol * hi) {
        double mid = 0.5 * (lo + hi);
        if (moment_condition(dist, mid) > 2.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double psi2_constant(const RowDistribution& dist) {
    switch (dist.kind) {
        case RowDistribution::Kind::gaussian:
            return std::sqrt(8.0 / 3.0);
        case RowDistribution::Kind::rademacher:
            return 1.0 / std::sqrt(std::log(2.0));
        case RowDistribution::Kind::discrete_gaussian:
        case RowDistribution::Kind::uniform_bounded:
            return psi2_constant_bisect(dist);
        default:
            throw UnsupportedError("psi2 constant: bounded kind without declared alpha");
    }
}

}  // namespace recert
