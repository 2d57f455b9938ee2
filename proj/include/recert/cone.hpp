#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace recert {

// Parameters (s0, k0) of the cone of vectors x admitting a size-s0 index set
// I with ||x_{I^c}||_1 <= k0 ||x_I||_1.
struct ConeSpec {
    std::size_t s0 = 1;
    double k0 = 1.0;

    void validate(std::size_t p) const;
};

struct ConeMembership {
    bool in_cone = false;
    std::vector<int> witness;  // maximizing support, valid when in_cone
};

// Indices (0-based, ascending) of the s0 entries largest in absolute value;
// ties go to the lowest index.
std::vector<int> top_support(std::span<const double> v, std::size_t s0);

// Tests membership against the top-s0 support, which maximizes ||v_I||_1 and
// therefore decides existence of a qualifying I. Boundary noise is absorbed
// by a 1e-12 * ||v||_1 slack.
ConeMembership in_cone(std::span<const double> v, const ConeSpec& spec);

enum class ConeRegime { sparse, boundary, interior };

// Unit-norm cone member. The plain overload cycles deterministically through
// the three regimes based on the seed.
std::vector<double> sample_cone(const ConeSpec& spec, std::size_t p, std::uint64_t seed);
std::vector<double> sample_cone(const ConeSpec& spec, std::size_t p, ConeRegime regime,
                                std::uint64_t seed);

}  // namespace recert
