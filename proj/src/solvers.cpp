#include "recert/solvers.hpp"

#include <algorithm>
#include <cmath>

#include "recert/cone.hpp"
#include "recert/errors.hpp"
#include "recert/numerics.hpp"

namespace recert {

namespace {

double soft_threshold(double z, double t) {
    if (z > t) return z - t;
    if (z < -t) return z + t;
    return 0.0;
}

double lasso_objective(const LassoProblem& prob, std::span<const double> beta) {
    std::vector<double> r = matvec(prob.x, beta);
    double rss = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        double d = prob.y[i] - r[i];
        rss += d * d;
    }
    return rss / (2.0 * double(prob.x.rows())) + prob.lambda_n * norm1(beta);
}

}  // namespace

SolveResult lasso_cd(const LassoProblem& prob, double tol, std::size_t max_iters) {
    const std::size_t n = prob.x.rows(), p = prob.x.cols();
    if (prob.y.size() != n) throw ConfigError("lasso: X and Y dimensions differ");
    if (prob.lambda_n < 0.0) throw ConfigError("lasso: lambda must be nonnegative");

    std::vector<double> col_sq(p, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        auto row = prob.x.row(i);
        for (std::size_t j = 0; j < p; ++j) col_sq[j] += row[j] * row[j];
    }
    for (double& c : col_sq) c /= double(n);

    std::vector<double> beta(p, 0.0);
    std::vector<double> resid = prob.y;  // Y - X beta
    SolveResult res;
    for (std::size_t sweep = 0; sweep < max_iters; ++sweep) {
        double max_change = 0.0;
        for (std::size_t j = 0; j < p; ++j) {
            if (col_sq[j] == 0.0) continue;
            double grad = 0.0;
            for (std::size_t i = 0; i < n; ++i) grad += prob.x(i, j) * resid[i];
            grad /= double(n);
            double rho = grad + col_sq[j] * beta[j];
            double next = soft_threshold(rho, prob.lambda_n) / col_sq[j];
            double delta = next - beta[j];
            if (delta != 0.0) {
                for (std::size_t i = 0; i < n; ++i) resid[i] -= prob.x(i, j) * delta;
                beta[j] = next;
                max_change = std::max(max_change, std::fabs(delta));
            }
        }
        res.iterations = sweep + 1;
        if (max_change < tol * (1.0 + norm_inf(beta))) {
            res.converged = true;
            break;
        }
    }

    // KKT certificate on a fresh residual
    std::vector<double> r = matvec(prob.x, beta);
    for (std::size_t i = 0; i < n; ++i) r[i] = prob.y[i] - r[i];
    std::vector<double> grad = tmatvec(prob.x, r);
    double kkt = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
        double gj = grad[j] / double(n);
        if (beta[j] == 0.0)
            kkt = std::max(kkt, std::fabs(gj) - prob.lambda_n);
        else
            kkt = std::max(kkt, std::fabs(gj - prob.lambda_n * (beta[j] > 0 ? 1.0 : -1.0)));
    }
    res.duality_or_kkt_residual = std::max(kkt, 0.0);
    res.objective = lasso_objective(prob, beta);
    res.beta_hat = std::move(beta);
    return res;
}

SolveResult basis_pursuit(const DenseMatrix& x, std::span<const double> rhs, double tol,
                          std::size_t max_iters) {
    const std::size_t n = x.rows(), p = x.cols();
    if (rhs.size() != n) throw ConfigError("basis_pursuit: rhs length must equal rows of X");

    // Affine projection v -> v - X^+ (X v - rhs). The pseudo-inverse acts
    // through the spectral decomposition of the smaller Gram side.
    const bool wide = n <= p;
    SymEigResult eig = sym_eig(wide ? gram_outer(x) : gram(x));
    const std::size_t dim = eig.eigenvalues.size();
    double lmax = std::max(eig.eigenvalues.front(), 0.0);
    std::vector<double> inv_eval(dim, 0.0);
    for (std::size_t k = 0; k < dim; ++k)
        if (eig.eigenvalues[k] > 1e-12 * lmax) inv_eval[k] = 1.0 / eig.eigenvalues[k];
    auto apply_pinv = [&](const std::vector<double>& y) {
        std::vector<double> coef(dim, 0.0);
        for (std::size_t k = 0; k < dim; ++k) {
            if (inv_eval[k] == 0.0) continue;
            double c = 0.0;
            for (std::size_t i = 0; i < dim; ++i) c += eig.eigenvectors(i, k) * y[i];
            coef[k] = c * inv_eval[k];
        }
        std::vector<double> out(dim, 0.0);
        for (std::size_t i = 0; i < dim; ++i) {
            double s = 0.0;
            for (std::size_t k = 0; k < dim; ++k) s += eig.eigenvectors(i, k) * coef[k];
            out[i] = s;
        }
        return out;
    };
    auto project_affine = [&](std::span<const double> v) {
        std::vector<double> xv = matvec(x, v);
        for (std::size_t i = 0; i < n; ++i) xv[i] -= rhs[i];
        std::vector<double> out(v.begin(), v.end());
        if (wide) {
            std::vector<double> lam = apply_pinv(xv);           // (X X^T)^+ residual
            std::vector<double> xt = tmatvec(x, lam);
            for (std::size_t j = 0; j < p; ++j) out[j] -= xt[j];
        } else {
            std::vector<double> t = tmatvec(x, xv);             // X^T residual
            std::vector<double> s = apply_pinv(t);              // (X^T X)^+ applied
            for (std::size_t j = 0; j < p; ++j) out[j] -= s[j];
        }
        return out;
    };

    double rhs_norm = norm2(rhs);
    double rho = 1.0;
    std::vector<double> z(p, 0.0), u(p, 0.0), beta(p, 0.0);
    SolveResult res;
    for (std::size_t iter = 0; iter < max_iters; ++iter) {
        std::vector<double> zu(p);
        for (std::size_t j = 0; j < p; ++j) zu[j] = z[j] - u[j];
        beta = project_affine(zu);

        std::vector<double> z_old = z;
        for (std::size_t j = 0; j < p; ++j) z[j] = soft_threshold(beta[j] + u[j], 1.0 / rho);
        for (std::size_t j = 0; j < p; ++j) u[j] += beta[j] - z[j];

        double primal = 0.0, dual = 0.0;
        for (std::size_t j = 0; j < p; ++j) {
            primal += (beta[j] - z[j]) * (beta[j] - z[j]);
            dual += (z[j] - z_old[j]) * (z[j] - z_old[j]);
        }
        primal = std::sqrt(primal);
        dual = rho * std::sqrt(dual);
        res.iterations = iter + 1;
        if (primal <= tol * std::max(1.0, norm2(z)) && dual <= tol * std::max(1.0, norm2(z))) {
            res.converged = true;
            break;
        }
        // residual balancing, factor 2
        if (primal > 10.0 * dual) {
            rho *= 2.0;
            for (double& v : u) v *= 0.5;
        } else if (dual > 10.0 * primal) {
            rho *= 0.5;
            for (double& v : u) v *= 2.0;
        }
    }

    // final iterate: feasible point nearest the sparse splitting variable
    beta = project_affine(z);

    // support polish: re-solve on the active set of z and keep the result
    // when it is feasible and does not grow the objective
    {
        double zmax = norm_inf(z);
        std::vector<int> active;
        for (std::size_t j = 0; j < p; ++j)
            if (std::fabs(z[j]) > std::max(1e-12, 1e-6 * zmax)) active.push_back(int(j));
        if (!active.empty() && active.size() < p) {
            DenseMatrix xs = select_columns(x, active);
            SymEigResult seig = sym_eig(active.size() < n ? gram(xs) : gram_outer(xs));
            double smax = std::max(seig.eigenvalues.front(), 0.0);
            std::vector<double> xtb =
                active.size() < n ? tmatvec(xs, rhs) : std::vector<double>(rhs.begin(), rhs.end());
            std::vector<double> coef(seig.eigenvalues.size(), 0.0);
            for (std::size_t k = 0; k < coef.size(); ++k) {
                if (seig.eigenvalues[k] <= 1e-12 * smax) continue;
                double c = 0.0;
                for (std::size_t i = 0; i < coef.size(); ++i)
                    c += seig.eigenvectors(i, k) * xtb[i];
                coef[k] = c / seig.eigenvalues[k];
            }
            std::vector<double> sol(coef.size(), 0.0);
            for (std::size_t i = 0; i < coef.size(); ++i)
                for (std::size_t k = 0; k < coef.size(); ++k)
                    sol[i] += seig.eigenvectors(i, k) * coef[k];
            std::vector<double> cand(p, 0.0);
            if (active.size() < n) {
                for (std::size_t t = 0; t < active.size(); ++t) cand[active[t]] = sol[t];
            } else {
                std::vector<double> lift = tmatvec(xs, sol);
                for (std::size_t t = 0; t < active.size(); ++t) cand[active[t]] = lift[t];
            }
            std::vector<double> xc = matvec(x, cand);
            double cfeas = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                double d = xc[i] - rhs[i];
                cfeas += d * d;
            }
            if (std::sqrt(cfeas) <= tol * std::max(rhs_norm, 1e-300) &&
                norm1(cand) <= norm1(beta))
                beta = std::move(cand);
        }
    }

    std::vector<double> gap = matvec(x, beta);
    double feas = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double d = gap[i] - rhs[i];
        feas += d * d;
    }
    feas = std::sqrt(feas);
    if (feas > tol * std::max(rhs_norm, 1e-300) + 1e-12)
        throw InfeasibleError("basis_pursuit: rhs is not in the range of X at tolerance");
    res.duality_or_kkt_residual = rhs_norm > 0.0 ? feas / rhs_norm : feas;
    res.objective = norm1(beta);
    res.beta_hat = std::move(beta);
    return res;
}

std::size_t oracle_s0(std::span<const double> beta, double lambda, double sigma) {
    double ls = lambda * sigma;
    if (!(ls > 0.0)) throw ConfigError("oracle_s0: lambda * sigma must be positive");
    double ls2 = ls * ls;
    double sum = 0.0;
    for (double b : beta) sum += std::min(b * b, ls2);
    if (sum == 0.0) return 0;
    return static_cast<std::size_t>(std::ceil(sum / ls2 - 1e-12));
}

double oracle_rate_ratio(std::span<const double> beta_true, std::span<const double> beta_hat,
                         std::size_t s0, double lambda, double sigma) {
    if (s0 == 0) throw ConfigError("oracle_rate_ratio: s0 must be >= 1");
    if (beta_true.size() != beta_hat.size())
        throw ConfigError("oracle_rate_ratio: vector lengths differ");
    double err_sq = 0.0;
    for (std::size_t i = 0; i < beta_true.size(); ++i) {
        double d = beta_hat[i] - beta_true[i];
        err_sq += d * d;
    }
    return err_sq / (double(s0) * lambda * lambda * sigma * sigma);
}

ConeCheckResult lasso_cone_check(std::span<const double> beta_true,
                                 std::span<const double> beta_hat, double k0) {
    const std::size_t p = beta_true.size();
    if (beta_hat.size() != p) throw ConfigError("lasso_cone_check: vector lengths differ");
    std::vector<int> supp;
    for (std::size_t i = 0; i < p; ++i)
        if (beta_true[i] != 0.0) supp.push_back(int(i));
    if (supp.empty()) throw ZeroVectorError("lasso_cone_check: beta_true is zero");

    std::vector<double> diff(p);
    bool all_zero = true;
    for (std::size_t i = 0; i < p; ++i) {
        diff[i] = beta_hat[i] - beta_true[i];
        if (diff[i] != 0.0) all_zero = false;
    }
    ConeCheckResult res;
    if (all_zero || supp.size() >= p) {
        // zero difference lies in every cone; s = p leaves no off-support mass
        res.in_cone = true;
        res.witness = supp;
        return res;
    }
    ConeMembership m = in_cone(diff, ConeSpec{supp.size(), k0});
    res.in_cone = m.in_cone;
    res.witness = std::move(m.witness);
    return res;
}

}  // namespace recert
