#include "recert/json_io.hpp"

#include <cmath>

namespace recert {

namespace {

nlohmann::json finite_or_null(double x) {
    if (std::isfinite(x)) return x;
    return nullptr;
}

}  // namespace

nlohmann::json to_json(const SparseEigResult& r) {
    return {{"m", r.m},
            {"rho_min", r.rho_min},
            {"rho_max", r.rho_max},
            {"argmin_support", r.argmin_support},
            {"argmax_support", r.argmax_support},
            {"exact", r.exact}};
}

nlohmann::json to_json(const ReEstimate& r) {
    return {{"inv_k", r.inv_k},
            {"k", finite_or_null(r.k)},
            {"witness_v", r.witness_v},
            {"witness_j", r.witness_j},
            {"mode", r.exact ? "exact_oracle" : "heuristic"},
            {"grid_per_axis", r.grid_per_axis},
            {"s0", r.spec.s0},
            {"k0", r.spec.k0}};
}

nlohmann::json to_json(const MaureyResult& r) {
    return {{"support", r.support},
            {"coeffs", r.coeffs},
            {"err", r.err},
            {"attempts", r.attempts},
            {"draws_per_attempt", r.draws_per_attempt}};
}

nlohmann::json to_json(const IsometryReport& r) {
    nlohmann::json supports = nlohmann::json::array();
    for (const auto& s : r.supports)
        supports.push_back({{"support", s.support},
                            {"ratio_min", s.ratio_min},
                            {"ratio_max", s.ratio_max}});
    return {{"supports_checked", supports},
            {"global_delta", r.global_delta},
            {"exact_per_support", r.exact_per_support}};
}

nlohmann::json to_json(const ReductionReport& r) {
    return {{"delta_sparse", r.delta_sparse},
            {"cone_ratio_min", r.cone_ratio_min},
            {"cone_ratio_max", r.cone_ratio_max},
            {"bound_lower", r.bound_lower},
            {"bound_upper", r.bound_upper},
            {"conclusion_holds", r.conclusion_holds},
            {"k_a", to_json(r.k_a)},
            {"k_xa", to_json(r.k_xa)},
            {"transfer_holds", r.transfer_holds},
            {"delta_target", r.delta_target}};
}

nlohmann::json to_json(const HullCheckReport& r) {
    return {{"max_violation", r.max_violation},
            {"holds", r.holds},
            {"theta_samples", r.theta_samples},
            {"cone_samples", r.cone_samples},
            {"delta", r.delta}};
}

nlohmann::json to_json(const BernsteinReport& r) {
    return {{"empirical_tail", r.empirical_tail},
            {"bound", r.bound},
            {"holds", r.holds},
            {"alpha", r.alpha},
            {"std_err", r.std_err},
            {"n", r.n},
            {"reps", r.reps},
            {"theta", r.theta}};
}

nlohmann::json to_json(const SolveResult& r) {
    return {{"beta_hat", r.beta_hat},
            {"objective", r.objective},
            {"iterations", r.iterations},
            {"converged", r.converged},
            {"duality_or_kkt_residual", r.duality_or_kkt_residual}};
}

}  // namespace recert
