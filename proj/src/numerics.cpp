#include "recert/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "recert/errors.hpp"

namespace recert {

namespace {

double offdiag_frobenius(const DenseMatrix& a) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = i + 1; j < a.cols(); ++j) s += 2.0 * a(i, j) * a(i, j);
    return std::sqrt(s);
}

void check_symmetric(const DenseMatrix& s) {
    if (s.rows() != s.cols()) throw NonSymmetricError("matrix is not square");
    double scale = max_abs(s);
    for (std::size_t i = 0; i < s.rows(); ++i)
        for (std::size_t j = i + 1; j < s.cols(); ++j)
            if (std::fabs(s(i, j) - s(j, i)) > 1e-12 * scale)
                throw NonSymmetricError("matrix is not symmetric within 1e-12 relative tolerance");
}

}  // namespace

SymEigResult sym_eig(const DenseMatrix& s, double tol) {
    check_symmetric(s);
    const std::size_t n = s.rows();
    DenseMatrix a = s;
    DenseMatrix v = DenseMatrix::identity(n);
    const double target = tol * frobenius_norm(s);

    bool converged = offdiag_frobenius(a) <= target;
    for (int sweep = 0; sweep < kJacobiMaxSweeps && !converged; ++sweep) {
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double apq = a(p, q);
                if (apq == 0.0) continue;
                double app = a(p, p), aqq = a(q, q);
                double theta = (aqq - app) / (2.0 * apq);
                double t = (theta >= 0.0 ? 1.0 : -1.0) /
                           (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double sn = t * c;
                double tau = sn / (1.0 + c);

                a(p, p) = app - t * apq;
                a(q, q) = aqq + t * apq;
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                for (std::size_t r = 0; r < n; ++r) {
                    if (r != p && r != q) {
                        double arp = a(r, p), arq = a(r, q);
                        a(r, p) = a(p, r) = arp - sn * (arq + tau * arp);
                        a(r, q) = a(q, r) = arq + sn * (arp - tau * arq);
                    }
                    double vrp = v(r, p), vrq = v(r, q);
                    v(r, p) = vrp - sn * (vrq + tau * vrp);
                    v(r, q) = vrq + sn * (vrp - tau * vrq);
                }
            }
        }
        converged = offdiag_frobenius(a) <= target;
    }
    if (!converged)
        throw NoConvergenceError("jacobi sweep budget exhausted before off-diagonal threshold");

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int i, int j) { return a(i, i) > a(j, j); });

    SymEigResult res;
    res.eigenvalues.resize(n);
    res.eigenvectors = DenseMatrix(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        res.eigenvalues[k] = a(order[k], order[k]);
        for (std::size_t r = 0; r < n; ++r) res.eigenvectors(r, k) = v(r, order[k]);
    }
    return res;
}

namespace {

// B = V f(Lambda) V^T, lower triangle mirrored so B is exactly symmetric.
DenseMatrix assemble_spectral(const SymEigResult& eig, const std::vector<double>& f) {
    const std::size_t n = eig.eigenvalues.size();
    DenseMatrix b(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < n; ++k)
                s += eig.eigenvectors(i, k) * f[k] * eig.eigenvectors(j, k);
            b(i, j) = s;
            b(j, i) = s;
        }
    }
    return b;
}

}  // namespace

DenseMatrix psd_sqrt(const DenseMatrix& s) {
    SymEigResult eig = sym_eig(s);
    double spectral = 0.0;
    for (double l : eig.eigenvalues) spectral = std::max(spectral, std::fabs(l));
    std::vector<double> f(eig.eigenvalues.size());
    for (std::size_t k = 0; k < f.size(); ++k) {
        double l = eig.eigenvalues[k];
        if (l < -1e-10 * spectral)
            throw NotPsdError("matrix has an eigenvalue below -1e-10 * ||S||_2");
        f[k] = std::sqrt(std::max(l, 0.0));
    }
    return assemble_spectral(eig, f);
}

DenseMatrix psd_inv_sqrt(const DenseMatrix& s, double deflate_tol) {
    SymEigResult eig = sym_eig(s);
    double lmax = eig.eigenvalues.empty() ? 0.0 : eig.eigenvalues.front();
    if (lmax <= 0.0) throw DegenerateGError("matrix is numerically zero or negative");
    std::vector<double> f(eig.eigenvalues.size(), 0.0);
    for (std::size_t k = 0; k < f.size(); ++k)
        if (eig.eigenvalues[k] > deflate_tol * lmax) f[k] = 1.0 / std::sqrt(eig.eigenvalues[k]);
    return assemble_spectral(eig, f);
}

std::pair<double, double> gen_eig_extremes(const DenseMatrix& m, const DenseMatrix& g,
                                           double tol) {
    if (m.rows() != g.rows() || m.cols() != g.cols() || m.rows() != m.cols())
        throw Error("gen_eig_extremes: M and G must be square of equal dimension");
    SymEigResult geig = sym_eig(g);
    double lmax = geig.eigenvalues.front();
    if (lmax <= 0.0) throw DegenerateGError("G is numerically zero");

    std::vector<std::size_t> kept;
    for (std::size_t k = 0; k < geig.eigenvalues.size(); ++k)
        if (geig.eigenvalues[k] > tol * lmax) kept.push_back(k);
    if (kept.empty()) throw DegenerateGError("G is numerically zero after deflation");

    const std::size_t n = g.rows(), r = kept.size();
    // W = V_kept * diag(lambda^{-1/2}); C = W^T M W is the whitened pencil.
    DenseMatrix w(n, r);
    for (std::size_t c = 0; c < r; ++c) {
        double inv = 1.0 / std::sqrt(geig.eigenvalues[kept[c]]);
        for (std::size_t i = 0; i < n; ++i) w(i, c) = geig.eigenvectors(i, kept[c]) * inv;
    }
    DenseMatrix mw = matmul(m, w);
    DenseMatrix c(r, r);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = i; j < r; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < n; ++k) s += w(k, i) * mw(k, j);
            c(i, j) = s;
            c(j, i) = s;
        }
    SymEigResult ceig = sym_eig(c);
    return {ceig.eigenvalues.back(), ceig.eigenvalues.front()};
}

std::vector<double> l1_ball_project(std::span<const double> v, double radius) {
    if (radius < 0.0) throw Error("l1_ball_project: radius must be nonnegative");
    std::vector<double> w(v.begin(), v.end());
    if (radius == 0.0) {
        std::fill(w.begin(), w.end(), 0.0);
        return w;
    }
    if (norm1(v) <= radius) return w;

    std::vector<double> u(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) u[i] = std::fabs(v[i]);
    std::sort(u.begin(), u.end(), std::greater<double>());

    double cumulative = 0.0, theta = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        cumulative += u[j];
        double t = (cumulative - radius) / static_cast<double>(j + 1);
        if (u[j] - t > 0.0)
            theta = t;
        else
            break;
    }
    for (std::size_t i = 0; i < w.size(); ++i) {
        double mag = std::fabs(v[i]) - theta;
        w[i] = mag > 0.0 ? (v[i] > 0.0 ? mag : -mag) : 0.0;
    }
    return w;
}

}  // namespace recert
