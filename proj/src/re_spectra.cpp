#include "recert/re_spectra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include "recert/ensembles.hpp"
#include "recert/errors.hpp"
#include "recert/numerics.hpp"
#include "recert/rng.hpp"
#include "recert/supports.hpp"

namespace recert {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<int> random_support(std::size_t p, std::size_t m, Rng& rng) {
    std::vector<int> pool(p);
    std::iota(pool.begin(), pool.end(), 0);
    for (std::size_t i = 0; i < m; ++i) {
        std::size_t j = i + rng.next_below(p - i);
        std::swap(pool[i], pool[j]);
    }
    std::vector<int> s(pool.begin(), pool.begin() + m);
    std::sort(s.begin(), s.end());
    return s;
}

// Visits each covered support once; enumeration is lexicographic, sampling
// derives one stream per support index.
template <typename Fn>
bool for_each_support(std::size_t p, std::size_t m, const SupportMode& mode,
                      std::uint64_t enumerate_cap, Fn&& fn) {
    if (std::holds_alternative<EnumerateSupports>(mode)) {
        if (binomial(p, m) > enumerate_cap)
            throw TooManySupportsError("support enumeration exceeds the configured cap");
        std::vector<int> support = first_combination(m);
        do {
            fn(support);
        } while (next_combination(support, p));
        return true;  // exact
    }
    const auto& s = std::get<SampleSupports>(mode);
    for (std::size_t i = 0; i < s.count; ++i) {
        Rng rng(mix_stream(s.seed, i));
        std::vector<int> support = random_support(p, m, rng);
        fn(support);
    }
    return false;
}

}  // namespace

SparseEigResult sparse_eigs(const DenseMatrix& a, std::size_t m, const SupportMode& mode) {
    const std::size_t p = a.cols();
    if (m == 0 || m > p) throw ConfigError("sparse_eigs: requires 1 <= m <= p");
    const DenseMatrix g = gram(a);

    SparseEigResult res;
    res.m = m;
    res.rho_min = kInf;
    res.rho_max = -kInf;
    res.exact = for_each_support(p, m, mode, kEnumerateCapSparseEig, [&](const std::vector<int>& j) {
        SymEigResult eig = sym_eig(slice_sym(g, j));
        if (eig.eigenvalues.front() > res.rho_max) {
            res.rho_max = eig.eigenvalues.front();
            res.argmax_support = j;
        }
        if (eig.eigenvalues.back() < res.rho_min) {
            res.rho_min = eig.eigenvalues.back();
            res.argmin_support = j;
        }
    });
    res.rho_min = std::max(res.rho_min, 0.0);
    return res;
}

double rip_constant(const DenseMatrix& x, std::size_t s) {
    const std::size_t p = x.cols();
    if (s == 0 || s > p) throw ConfigError("rip_constant: requires 1 <= s <= p");
    if (binomial(p, s) > kEnumerateCapSparseEig)
        throw TooManySupportsError("rip_constant: too many supports to enumerate");

    DenseMatrix g = gram(x);
    const double inv_n = 1.0 / static_cast<double>(x.rows());
    for (double& v : g.data()) v *= inv_n;

    double theta = 0.0;
    std::vector<int> support = first_combination(s);
    do {
        SymEigResult eig = sym_eig(slice_sym(g, support));
        theta = std::max(theta, eig.eigenvalues.front() - 1.0);
        theta = std::max(theta, 1.0 - eig.eigenvalues.back());
    } while (next_combination(support, p));
    return theta;
}

// ---- restricted eigenvalue constant ------------------------------------------

namespace {

std::vector<int> complement_of(std::span<const int> support, std::size_t p) {
    std::vector<char> on(p, 0);
    for (int i : support) on[i] = 1;
    std::vector<int> comp;
    comp.reserve(p - support.size());
    for (std::size_t i = 0; i < p; ++i)
        if (!on[i]) comp.push_back(int(i));
    return comp;
}

// Inner convex problem for one support: minimize over w (off-support block)
//   (v_J; w)^T G (v_J; w)  s.t.  ||w||_1 <= radius.
// Everything is expressed through the Gram matrix G = A^T A.
struct InnerSolver {
    std::vector<int> support, comp;
    DenseMatrix g_jj;      // s0 x s0
    DenseMatrix g_cj;      // comp x s0
    DenseMatrix h;         // comp x comp
    double lipschitz = 0;  // lambda_max(h)

    InnerSolver(const DenseMatrix& g, std::vector<int> j)
        : support(std::move(j)), comp(complement_of(support, g.rows())) {
        g_jj = slice_sym(g, support);
        g_cj = DenseMatrix(std::max<std::size_t>(comp.size(), 1), support.size());
        for (std::size_t r = 0; r < comp.size(); ++r)
            for (std::size_t c = 0; c < support.size(); ++c)
                g_cj(r, c) = g(std::size_t(comp[r]), std::size_t(support[c]));
        if (!comp.empty()) {
            h = slice_sym(g, comp);
            lipschitz = std::max(0.0, sym_eig(h).eigenvalues.front());
        }
    }

    double objective(std::span<const double> v_j, std::span<const double> w) const {
        double val = 0.0;
        for (std::size_t i = 0; i < v_j.size(); ++i)
            for (std::size_t k = 0; k < v_j.size(); ++k) val += v_j[i] * g_jj(i, k) * v_j[k];
        for (std::size_t r = 0; r < comp.size(); ++r) {
            double cross = 0.0;
            for (std::size_t c = 0; c < v_j.size(); ++c) cross += g_cj(r, c) * v_j[c];
            val += 2.0 * w[r] * cross;
            for (std::size_t r2 = 0; r2 < comp.size(); ++r2) val += w[r] * h(r, r2) * w[r2];
        }
        return std::max(val, 0.0);
    }

    // Projected gradient from a warm start; stops on relative decrease below
    // 1e-12 or after 1e5 iterations.
    double minimize(std::span<const double> v_j, double radius, std::vector<double>& w) const {
        if (comp.empty()) {
            w.clear();
            return objective(v_j, w);
        }
        w = l1_ball_project(w, radius);
        std::vector<double> b(comp.size(), 0.0);
        for (std::size_t r = 0; r < comp.size(); ++r)
            for (std::size_t c = 0; c < v_j.size(); ++c) b[r] += g_cj(r, c) * v_j[c];
        if (lipschitz <= 0.0) {
            // off-support columns are all zero
            std::fill(w.begin(), w.end(), 0.0);
            return objective(v_j, w);
        }
        double prev = objective(v_j, w);
        std::vector<double> grad(comp.size());
        for (int iter = 0; iter < 100000; ++iter) {
            for (std::size_t r = 0; r < comp.size(); ++r) {
                double hw = 0.0;
                for (std::size_t r2 = 0; r2 < comp.size(); ++r2) hw += h(r, r2) * w[r2];
                grad[r] = (b[r] + hw) / lipschitz;
            }
            for (std::size_t r = 0; r < comp.size(); ++r) grad[r] = w[r] - grad[r];
            w = l1_ball_project(grad, radius);
            double cur = objective(v_j, w);
            if (prev - cur <= 1e-12 * prev) return cur;
            prev = cur;
        }
        return prev;
    }
};

struct ReBest {
    double value = kInf;  // squared ratio
    std::vector<int> support;
    std::vector<double> v_j;
    std::vector<double> w;
};

void assemble_witness(ReEstimate& est, const ReBest& best, std::size_t p,
                      const std::vector<int>& comp) {
    est.inv_k = std::sqrt(std::max(best.value, 0.0));
    est.k = est.inv_k > 0.0 ? 1.0 / est.inv_k : kInf;
    est.witness_j = best.support;
    est.witness_v.assign(p, 0.0);
    for (std::size_t c = 0; c < best.support.size(); ++c)
        est.witness_v[best.support[c]] = best.v_j[c];
    for (std::size_t r = 0; r < comp.size(); ++r) est.witness_v[comp[r]] = best.w[r];
}

ReEstimate re_exact_oracle(const DenseMatrix& a, const ConeSpec& spec, std::size_t grid) {
    const std::size_t p = a.cols();
    if (spec.s0 > 3 || binomial(p, spec.s0) > 10000)
        throw InfeasibleModeError("exact oracle requires s0 <= 3 and C(p, s0) <= 1e4");
    if (grid == 0) throw ConfigError("exact oracle: grid_per_axis must be positive");
    const DenseMatrix g = gram(a);
    const double pi = 3.14159265358979323846;

    ReBest best;
    std::vector<int> comp_best;
    std::vector<int> support = first_combination(spec.s0);
    do {
        InnerSolver solver(g, support);
        double radius_scale = spec.k0;  // radius = k0 * ||v_J||_1, ||v_J||_2 = 1
        std::vector<double> w(solver.comp.size(), 0.0);
        auto consider = [&](std::span<const double> v_j) {
            double radius = 0.0;
            for (double x : v_j) radius += std::fabs(x);
            radius *= radius_scale;
            double val = solver.minimize(v_j, radius, w);
            if (val < best.value) {
                best.value = val;
                best.support = solver.support;
                best.v_j.assign(v_j.begin(), v_j.end());
                best.w = w;
                comp_best = solver.comp;
            }
        };
        if (spec.s0 == 1) {
            double v[1] = {1.0};
            consider(v);
        } else if (spec.s0 == 2) {
            for (std::size_t i = 0; i < grid; ++i) {
                double phi = pi * double(i) / double(grid);
                double v[2] = {std::cos(phi), std::sin(phi)};
                consider(v);
            }
        } else {
            for (std::size_t ai = 0; ai < grid; ++ai) {
                double theta = grid > 1 ? pi * double(ai) / double(grid - 1) : 0.0;
                for (std::size_t bi = 0; bi < grid; ++bi) {
                    double phi = pi * double(bi) / double(grid);
                    double v[3] = {std::sin(theta) * std::cos(phi),
                                   std::sin(theta) * std::sin(phi), std::cos(theta)};
                    consider(v);
                    if (theta == 0.0) break;  // pole: phi redundant
                }
            }
        }
    } while (next_combination(support, p));

    ReEstimate est;
    est.exact = true;
    est.grid_per_axis = grid;
    est.spec = spec;
    assemble_witness(est, best, p, comp_best);
    return est;
}

ReEstimate re_heuristic(const DenseMatrix& a, const ConeSpec& spec, const HeuristicMode& mode) {
    const std::size_t p = a.cols();
    const DenseMatrix g = gram(a);

    ReBest best;
    std::vector<int> comp_best;

    auto evaluate = [&](InnerSolver& solver, std::span<const double> v_j,
                        std::vector<double>& w) {
        double radius = spec.k0 * norm1(v_j);
        double val = solver.minimize(v_j, radius, w);
        if (val < best.value) {
            best.value = val;
            best.support = solver.support;
            best.v_j.assign(v_j.begin(), v_j.end());
            best.w = w;
            comp_best = solver.comp;
        }
        return val;
    };

    for (std::size_t restart = 0; restart < mode.restarts; ++restart) {
        std::vector<double> v = sample_cone(spec, p, mix_stream(mode.seed, restart));
        std::vector<int> support = top_support(v, spec.s0);
        InnerSolver solver(g, support);

        std::vector<double> v_j(spec.s0), w(solver.comp.size(), 0.0);
        auto load_blocks = [&]() {
            v_j.resize(spec.s0);
            for (std::size_t c = 0; c < spec.s0; ++c) v_j[c] = v[solver.support[c]];
            double nj = norm2(v_j);
            for (double& x : v_j) x /= nj;
            w.resize(solver.comp.size());
            for (std::size_t r = 0; r < solver.comp.size(); ++r)
                w[r] = v[solver.comp[r]] / nj;
        };
        load_blocks();

        double current = evaluate(solver, v_j, w);
        for (std::size_t it = 0; it < mode.iters; ++it) {
            // sphere step on v_J with w held fixed (then rescaled feasible)
            std::vector<double> grad(spec.s0, 0.0);
            for (std::size_t i = 0; i < spec.s0; ++i) {
                for (std::size_t k = 0; k < spec.s0; ++k) grad[i] += solver.g_jj(i, k) * v_j[k];
                for (std::size_t r = 0; r < solver.comp.size(); ++r)
                    grad[i] += solver.g_cj(r, i) * w[r];
            }
            double gdotv = dot(grad, v_j);
            for (std::size_t i = 0; i < spec.s0; ++i) grad[i] -= gdotv * v_j[i];
            double gn = norm2(grad);
            bool improved = false;
            if (gn > 1e-14) {
                double scale = solver.lipschitz > 0 ? 1.0 / solver.lipschitz : 1.0;
                for (double step = scale; step > 1e-6 * scale; step *= 0.25) {
                    std::vector<double> cand(spec.s0);
                    for (std::size_t i = 0; i < spec.s0; ++i) cand[i] = v_j[i] - step * grad[i];
                    double cn = norm2(cand);
                    if (cn == 0.0) continue;
                    for (double& x : cand) x /= cn;
                    std::vector<double> w_cand = w;
                    double cap = spec.k0 * norm1(cand);
                    double wn = norm1(w_cand);
                    if (wn > cap && wn > 0.0)
                        for (double& x : w_cand) x *= cap / wn;
                    double val = evaluate(solver, cand, w_cand);
                    if (val < current - 1e-15) {
                        v_j = cand;
                        w = w_cand;
                        current = val;
                        improved = true;
                        break;
                    }
                }
            }
            // adopt the top support of the assembled iterate if it moved
            std::vector<double> full(p, 0.0);
            for (std::size_t c = 0; c < spec.s0; ++c) full[solver.support[c]] = v_j[c];
            for (std::size_t r = 0; r < solver.comp.size(); ++r) full[solver.comp[r]] = w[r];
            std::vector<int> fresh = top_support(full, spec.s0);
            if (fresh != solver.support) {
                v = full;
                solver = InnerSolver(g, fresh);
                load_blocks();
                current = evaluate(solver, v_j, w);
            } else if (!improved) {
                break;
            }
        }
    }

    ReEstimate est;
    est.exact = false;
    est.grid_per_axis = 0;
    est.spec = spec;
    assemble_witness(est, best, p, comp_best);
    return est;
}

}  // namespace

ReEstimate re_constant(const DenseMatrix& a, const ConeSpec& spec, const ReMode& mode) {
    spec.validate(a.cols());
    if (std::holds_alternative<ExactOracleMode>(mode))
        return re_exact_oracle(a, spec, std::get<ExactOracleMode>(mode).grid_per_axis);
    return re_heuristic(a, spec, std::get<HeuristicMode>(mode));
}

std::uint64_t d_dimension(const ConeSpec& spec, double k_at_3k0, double max_col_norm,
                          double delta) {
    if (!(k_at_3k0 > 0.0) || !(max_col_norm > 0.0) || !(delta > 0.0 && delta <= 1.0))
        throw ConfigError("d_dimension: inputs must be positive with delta in (0,1]");
    long double s0 = static_cast<long double>(spec.s0);
    long double k3 = 3.0L * static_cast<long double>(spec.k0);
    long double val = s0 + s0 * static_cast<long double>(max_col_norm) * max_col_norm * 16.0L *
                               static_cast<long double>(k_at_3k0) * k_at_3k0 * k3 * k3 *
                               (k3 + 1.0L) / (static_cast<long double>(delta) * delta);
    long double ceiling = std::ceil(val);
    if (ceiling > 9.2e18L) return UINT64_C(0x7fffffffffffffff);
    return static_cast<std::uint64_t>(ceiling);
}

// ---- empirical sparsification ------------------------------------------------

MaureyResult maurey_sparsify(const DenseMatrix& points, std::span<const double> weights,
                             double epsilon, MaureyMode mode, std::uint64_t seed,
                             std::size_t max_attempts) {
    const std::size_t m_points = points.rows(), q = points.cols();
    if (weights.size() != m_points) throw ConfigError("maurey: weights/points size mismatch");
    if (!(epsilon > 0.0)) throw ConfigError("maurey: epsilon must be positive");
    double wsum = 0.0;
    for (double w : weights) {
        if (w < -1e-12) throw ConfigError("maurey: negative weight");
        wsum += w;
    }
    if (std::fabs(wsum - 1.0) > 1e-10) throw ConfigError("maurey: weights must sum to 1");

    std::vector<double> y(q, 0.0);
    double max_norm_sq = 0.0;
    for (std::size_t j = 0; j < m_points; ++j) {
        auto r = points.row(j);
        double ns = 0.0;
        for (std::size_t c = 0; c < q; ++c) {
            y[c] += weights[j] * r[c];
            ns += r[c] * r[c];
        }
        max_norm_sq = std::max(max_norm_sq, ns);
    }

    std::size_t draws = static_cast<std::size_t>(std::ceil(4.0 * max_norm_sq / (epsilon * epsilon)));
    draws = std::max<std::size_t>(draws, 1);
    if (mode == MaureyMode::relaxed) draws *= 4;

    std::vector<double> cdf(m_points);
    double acc = 0.0;
    for (std::size_t j = 0; j < m_points; ++j) {
        acc += std::max(weights[j], 0.0);
        cdf[j] = acc;
    }
    cdf[m_points - 1] = std::max(cdf[m_points - 1], 1.0);

    double best_err = kInf;
    for (std::size_t attempt = 1; attempt <= max_attempts; ++attempt) {
        Rng rng(mix_stream(seed, attempt));
        std::vector<std::size_t> counts(m_points, 0);
        for (std::size_t d = 0; d < draws; ++d) {
            double u = rng.next_unit();
            std::size_t idx = std::size_t(std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
            if (idx >= m_points) idx = m_points - 1;
            ++counts[idx];
        }
        MaureyResult res;
        res.draws_per_attempt = draws;
        res.attempts = attempt;
        std::vector<double> yp(q, 0.0);
        for (std::size_t j = 0; j < m_points; ++j) {
            if (!counts[j]) continue;
            double coeff = double(counts[j]) / double(draws);
            res.support.push_back(int(j));
            res.coeffs.push_back(coeff);
            auto r = points.row(j);
            for (std::size_t c = 0; c < q; ++c) yp[c] += coeff * r[c];
        }
        double err_sq = 0.0;
        for (std::size_t c = 0; c < q; ++c) err_sq += (yp[c] - y[c]) * (yp[c] - y[c]);
        res.err = std::sqrt(err_sq);
        if (res.err <= epsilon) return res;
        best_err = std::min(best_err, res.err);
    }
    throw AttemptsExhaustedError("maurey: attempt budget exhausted", best_err);
}

// ---- isometry reports ----------------------------------------------------------

IsometryReport restricted_isometry_report(const DenseMatrix& psi, const DenseMatrix& a,
                                          std::size_t d_prime, const SupportMode& mode) {
    if (psi.cols() != a.rows()) throw Error("restricted_isometry_report: Psi/A shape mismatch");
    const std::size_t p = a.cols();
    if (d_prime == 0 || d_prime > p)
        throw ConfigError("restricted_isometry_report: requires 1 <= d_prime <= p");

    DenseMatrix m_full = gram(matmul(psi, a));
    const double inv_n = 1.0 / static_cast<double>(psi.rows());
    for (double& v : m_full.data()) v *= inv_n;
    const DenseMatrix g_full = gram(a);

    IsometryReport rep;
    rep.exact_per_support = true;
    for_each_support(p, d_prime, mode, kEnumerateCapIsometry, [&](const std::vector<int>& j) {
        auto [lo, hi] = gen_eig_extremes(slice_sym(m_full, j), slice_sym(g_full, j));
        SupportRatio sr;
        sr.support = j;
        sr.ratio_min = std::sqrt(std::max(lo, 0.0));
        sr.ratio_max = std::sqrt(std::max(hi, 0.0));
        rep.supports.push_back(std::move(sr));
    });
    for (const SupportRatio& sr : rep.supports)
        rep.global_delta =
            std::max({rep.global_delta, sr.ratio_max - 1.0, 1.0 - sr.ratio_min});
    return rep;
}

ReductionReport reduction_verify(const DenseMatrix& psi, const DenseMatrix& a,
                                 const ConeSpec& spec, double delta, std::size_t d_prime,
                                 std::size_t cone_samples, std::uint64_t seed,
                                 std::size_t support_samples, std::optional<ReMode> re_mode) {
    const std::size_t p = a.cols();
    spec.validate(p);
    if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("reduction_verify: delta in (0,1)");
    if (cone_samples < 100) throw ConfigError("reduction_verify: cone_samples must be >= 100");
    const double sqrt_n = std::sqrt(double(psi.rows()));

    SupportMode support_mode = EnumerateSupports{};
    if (binomial(p, d_prime) > kEnumerateCapIsometry)
        support_mode = SampleSupports{support_samples, mix_stream(seed, 0xA)};

    ReductionReport rep;
    rep.delta_target = delta;
    rep.cone_ratio_min = kInf;
    rep.cone_ratio_max = -kInf;
    for (std::size_t i = 0; i < cone_samples; ++i) {
        std::vector<double> x = sample_cone(spec, p, mix_stream(seed, 0xB00 + i));
        std::vector<double> ax = matvec(a, x);
        double na = norm2(ax);
        if (na == 0.0)
            throw ReViolatedOnSampleError("reduction_verify: ||A x|| = 0 on a cone sample");
        double ratio = norm2(matvec(psi, ax)) / (sqrt_n * na);
        rep.cone_ratio_min = std::min(rep.cone_ratio_min, ratio);
        rep.cone_ratio_max = std::max(rep.cone_ratio_max, ratio);
    }

    rep.delta_sparse = restricted_isometry_report(psi, a, d_prime, support_mode).global_delta;
    rep.bound_lower = 1.0 - 5.0 * rep.delta_sparse;
    rep.bound_upper = 1.0 + 3.0 * rep.delta_sparse;
    rep.conclusion_holds =
        rep.bound_lower <= rep.cone_ratio_min && rep.cone_ratio_max <= rep.bound_upper;

    ReMode mode = re_mode.value_or(HeuristicMode{12, 40, mix_stream(seed, 0xC)});
    rep.k_a = re_constant(a, spec, mode);
    DenseMatrix x_tilde = matmul(psi, a);
    for (double& v : x_tilde.data()) v /= sqrt_n;
    rep.k_xa = re_constant(x_tilde, spec, mode);
    rep.transfer_holds = rep.k_xa.k <= rep.k_a.k / (1.0 - delta) + 1e-9;
    return rep;
}

// ---- convex hull dual check ------------------------------------------------------

double max_sparse_projection(const DenseMatrix& a, std::size_t d, std::span<const double> theta) {
    const std::size_t p = a.cols();
    if (d == 0 || d > p) throw ConfigError("max_sparse_projection: requires 1 <= d <= p");
    if (binomial(p, d) > kEnumerateCapIsometry)
        throw TooManySupportsError("max_sparse_projection: too many supports");
    if (theta.size() != a.rows()) throw Error("max_sparse_projection: theta dimension mismatch");

    const DenseMatrix g = gram(a);
    std::vector<double> at = tmatvec(a, theta);  // A^T theta

    double best = 0.0;
    std::vector<int> support = first_combination(d);
    do {
        SymEigResult eig = sym_eig(slice_sym(g, support));
        double lmax = eig.eigenvalues.front();
        if (lmax <= 0.0) continue;
        // ||P_J theta||^2 through the spectral basis of A_J^T A_J
        double proj_sq = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
            double lambda = eig.eigenvalues[k];
            if (lambda <= 1e-12 * lmax) continue;
            double c = 0.0;
            for (std::size_t i = 0; i < d; ++i) c += eig.eigenvectors(i, k) * at[support[i]];
            proj_sq += c * c / lambda;
        }
        best = std::max(best, proj_sq);
    } while (next_combination(support, p));
    return std::sqrt(best);
}

HullCheckReport hull_functional_check(const DenseMatrix& a, const ConeSpec& spec, std::size_t d,
                                      double delta, std::size_t theta_samples,
                                      std::size_t cone_samples, std::uint64_t seed) {
    const std::size_t p = a.cols(), q = a.rows();
    spec.validate(p);
    if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("hull check: delta in (0,1)");

    std::vector<std::vector<double>> images;
    images.reserve(cone_samples);
    for (std::size_t i = 0; i < cone_samples; ++i) {
        std::vector<double> x = sample_cone(spec, p, mix_stream(seed, 0x10000 + i));
        std::vector<double> ax = matvec(a, x);
        double na = norm2(ax);
        if (na == 0.0) throw ReViolatedOnSampleError("hull check: ||A x|| = 0 on a cone sample");
        for (double& v : ax) v /= na;
        images.push_back(std::move(ax));
    }

    HullCheckReport rep;
    rep.theta_samples = theta_samples;
    rep.cone_samples = cone_samples;
    rep.delta = delta;
    rep.max_violation = -kInf;
    for (std::size_t t = 0; t < theta_samples; ++t) {
        Rng rng(mix_stream(seed, 0x20000 + t));
        std::vector<double> theta(q);
        double nt = 0.0;
        while (nt == 0.0) {
            for (double& v : theta) v = rng.next_gaussian();
            nt = norm2(theta);
        }
        for (double& v : theta) v /= nt;

        double lhs = -kInf;
        for (const auto& y : images) lhs = std::max(lhs, dot(y, theta));
        double rhs = max_sparse_projection(a, d, theta) / (1.0 - delta);
        rep.max_violation = std::max(rep.max_violation, lhs - rhs);
    }
    rep.holds = rep.max_violation <= 1e-9;
    return rep;
}

// ---- scalar tail check --------------------------------------------------------------

BernsteinReport bernstein_tail_check(const RowDistribution& dist, std::size_t n, double theta,
                                     std::size_t reps, std::uint64_t seed, unsigned threads) {
    if (!(theta > 0.0 && theta < 1.0)) throw ConfigError("bernstein: theta in (0,1)");
    if (n == 0 || reps == 0) throw ConfigError("bernstein: n and reps must be positive");
    const double alpha = psi2_constant(dist);

    auto count_chunk = [&](std::size_t lo, std::size_t hi) {
        std::size_t exceed = 0;
        for (std::size_t r = lo; r < hi; ++r) {
            Rng rng(mix_stream(seed, r));
            double sum = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                double y = sample_scalar(dist, rng);
                sum += y * y;
            }
            if (std::fabs(sum / double(n) - 1.0) > theta) ++exceed;
        }
        return exceed;
    };

    std::size_t exceed = 0;
    if (threads <= 1) {
        exceed = count_chunk(0, reps);
    } else {
        std::vector<std::size_t> partial(threads, 0);
        std::vector<std::thread> pool;
        std::size_t chunk = (reps + threads - 1) / threads;
        for (unsigned t = 0; t < threads; ++t) {
            std::size_t lo = std::min<std::size_t>(t * chunk, reps);
            std::size_t hi = std::min<std::size_t>(lo + chunk, reps);
            pool.emplace_back([&, t, lo, hi] { partial[t] = count_chunk(lo, hi); });
        }
        for (auto& th : pool) th.join();
        for (std::size_t c : partial) exceed += c;
    }

    BernsteinReport rep;
    rep.n = n;
    rep.reps = reps;
    rep.theta = theta;
    rep.alpha = alpha;
    rep.empirical_tail = double(exceed) / double(reps);
    rep.bound = 2.0 * std::exp(-theta * theta * double(n) / (10.0 * std::pow(alpha, 4)));
    rep.std_err = std::sqrt(rep.empirical_tail * (1.0 - rep.empirical_tail) / double(reps));
    rep.holds = rep.empirical_tail <= rep.bound + 3.0 * rep.std_err;
    return rep;
}

}  // namespace recert
