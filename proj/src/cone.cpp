#include "recert/cone.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "recert/dense_matrix.hpp"
#include "recert/errors.hpp"
#include "recert/rng.hpp"

namespace recert {

void ConeSpec::validate(std::size_t p) const {
    if (s0 == 0 || s0 >= p) throw ConfigError("cone: requires 1 <= s0 < p");
    if (!(k0 > 0.0)) throw ConfigError("cone: requires k0 > 0");
}

std::vector<int> top_support(std::span<const double> v, std::size_t s0) {
    if (s0 == 0 || s0 > v.size()) throw ConfigError("top_support: requires 1 <= s0 <= p");
    bool all_zero = true;
    for (double x : v)
        if (x != 0.0) { all_zero = false; break; }
    if (all_zero) throw ZeroVectorError("top_support: zero vector");

    std::vector<int> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    // stable sort keeps the lowest index first among ties
    std::stable_sort(order.begin(), order.end(),
                     [&](int i, int j) { return std::fabs(v[i]) > std::fabs(v[j]); });
    std::vector<int> support(order.begin(), order.begin() + s0);
    std::sort(support.begin(), support.end());
    return support;
}

ConeMembership in_cone(std::span<const double> v, const ConeSpec& spec) {
    spec.validate(v.size());
    std::vector<int> support = top_support(v, spec.s0);
    double total = norm1(v);
    double on = 0.0;
    for (int i : support) on += std::fabs(v[i]);
    double off = total - on;
    ConeMembership m;
    m.in_cone = off <= spec.k0 * on + 1e-12 * total;
    if (m.in_cone) m.witness = std::move(support);
    return m;
}

namespace {

std::vector<int> draw_support(std::size_t p, std::size_t s0, Rng& rng) {
    // partial Fisher-Yates
    std::vector<int> pool(p);
    std::iota(pool.begin(), pool.end(), 0);
    for (std::size_t i = 0; i < s0; ++i) {
        std::size_t j = i + rng.next_below(p - i);
        std::swap(pool[i], pool[j]);
    }
    std::vector<int> support(pool.begin(), pool.begin() + s0);
    std::sort(support.begin(), support.end());
    return support;
}

void normalize(std::vector<double>& v) {
    double n = norm2(v);
    for (double& x : v) x /= n;
}

// Support entries of unit magnitude, off-support entries of equal magnitude
// chosen so the off-support l1 mass is exactly "fraction" of the largest mass
// the cone allows at this (p, s0, k0). Equal support magnitudes maximize the
// reachable boundary, and off-entries never exceed support entries, so the
// chosen support stays a top-s0 set.
std::vector<double> spread_sample(const ConeSpec& spec, std::size_t p, double fraction,
                                  Rng& rng) {
    std::vector<int> support = draw_support(p, spec.s0, rng);
    std::vector<char> on(p, 0);
    for (int i : support) on[i] = 1;

    double k_eff = std::min(spec.k0, double(p - spec.s0) / double(spec.s0));
    double target = fraction * k_eff * double(spec.s0);  // ||v_I||_1 = s0
    double mag = target / double(p - spec.s0);

    std::vector<double> v(p, 0.0);
    for (std::size_t i = 0; i < p; ++i)
        v[i] = (on[i] ? 1.0 : mag) * rng.next_sign();
    normalize(v);
    return v;
}

}  // namespace

std::vector<double> sample_cone(const ConeSpec& spec, std::size_t p, ConeRegime regime,
                                std::uint64_t seed) {
    spec.validate(p);
    Rng rng(seed);
    switch (regime) {
        case ConeRegime::sparse: {
            std::vector<int> support = draw_support(p, spec.s0, rng);
            std::vector<double> v(p, 0.0);
            for (int i : support) {
                double g = 0.0;
                while (g == 0.0) g = rng.next_gaussian();
                v[i] = g;
            }
            normalize(v);
            return v;
        }
        case ConeRegime::boundary:
            return spread_sample(spec, p, 1.0, rng);
        case ConeRegime::interior:
            return spread_sample(spec, p, rng.next_unit(), rng);
    }
    throw Error("sample_cone: unknown regime");
}

std::vector<double> sample_cone(const ConeSpec& spec, std::size_t p, std::uint64_t seed) {
    ConeRegime regime = static_cast<ConeRegime>(mix_stream(seed, 0x1eaf) % 3);
    return sample_cone(spec, p, regime, mix_stream(seed, 0x5eed));
}

}  // namespace recert
