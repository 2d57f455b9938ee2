#include <doctest.h>

#include <cmath>
#include <set>

#include "recert/dense_matrix.hpp"
#include "recert/ensembles.hpp"
#include "recert/errors.hpp"
#include "recert/rng.hpp"

using namespace recert;

TEST_CASE("covariance models") {
    DenseMatrix id = build_covariance(CovarianceSpec::identity(4));
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) CHECK(id(i, j) == (i == j ? 1.0 : 0.0));

    DenseMatrix ar = build_covariance(CovarianceSpec::ar1(2, 0.5));
    CHECK(ar(0, 0) == 1.0);
    CHECK(ar(0, 1) == 0.5);
    CHECK(ar(1, 0) == 0.5);
    CHECK(ar(1, 1) == 1.0);

    // the block-orthogonal row ensemble at m=4, p=8 has covariance 0.5 I
    DenseMatrix half = build_covariance(CovarianceSpec::scaled_identity(8, 0.5));
    for (std::size_t i = 0; i < 8; ++i)
        for (std::size_t j = 0; j < 8; ++j) CHECK(half(i, j) == (i == j ? 0.5 : 0.0));

    DenseMatrix bad(2, 2, {1.0, 2.0, 2.0, 1.0});  // eigenvalues 3, -1
    CHECK_THROWS_AS(build_covariance(CovarianceSpec::explicit_matrix(bad)), NotPsdError);
}

TEST_CASE("psi2 constants match closed forms and the bisection route") {
    double g = psi2_constant(RowDistribution::gaussian());
    CHECK(g == doctest::Approx(std::sqrt(8.0 / 3.0)).epsilon(1e-12));
    CHECK(std::fabs(psi2_constant_bisect(RowDistribution::gaussian()) - g) <= 1e-9);

    double r = psi2_constant(RowDistribution::rademacher());
    CHECK(r == doctest::Approx(1.0 / std::sqrt(std::log(2.0))).epsilon(1e-12));
    CHECK(std::fabs(psi2_constant_bisect(RowDistribution::rademacher()) - r) <= 1e-9);

    CHECK_THROWS_AS(psi2_constant(RowDistribution::walsh_rows(2, 1)), UnsupportedError);
}

TEST_CASE("psi2 constant of the uniform marginal solves the moment condition") {
    RowDistribution u = RowDistribution::uniform_bounded(std::sqrt(3.0));
    double alpha = psi2_constant(u);
    // independent oracle: high-resolution midpoint quadrature of
    // (1/M) int_0^M exp(v^2/alpha^2) dv, which must sit at 2
    const int n = 1000000;
    const double m = u.bound;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        double v = (double(i) + 0.5) * m / double(n);
        acc += std::exp(v * v / (alpha * alpha));
    }
    acc /= double(n);
    CHECK(acc == doctest::Approx(2.0).epsilon(1e-7));
    CHECK(alpha > 1.0);  // any unit-variance law has psi2 constant above 1
    CHECK(alpha < std::sqrt(8.0 / 3.0));  // and the uniform is lighter-tailed than the gaussian
}

TEST_CASE("walsh matrices") {
    DenseMatrix w0 = walsh_matrix(0);
    CHECK(w0.rows() == 1);
    CHECK(w0(0, 0) == 1.0);

    DenseMatrix w1 = walsh_matrix(1);
    CHECK(w1(0, 0) == 1.0);
    CHECK(w1(0, 1) == 1.0);
    CHECK(w1(1, 0) == 1.0);
    CHECK(w1(1, 1) == -1.0);

    DenseMatrix w2 = walsh_matrix(2);
    DenseMatrix wwt = gram_outer(w2);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) CHECK(wwt(i, j) == (i == j ? 4.0 : 0.0));

    CHECK_THROWS_AS(walsh_matrix(13), TooLargeError);
}

TEST_CASE("rademacher and walsh row supports") {
    DenseMatrix psi = sample_psi(RowDistribution::rademacher(), 2, 2, 42);
    for (double v : psi.data()) CHECK(std::fabs(v) == 1.0);

    DesignSample s = sample_bounded_rows(RowDistribution::walsh_rows(2, 1), 5, 2, 7);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(s.x(i, 0) == 1.0);
        CHECK(std::fabs(s.x(i, 1)) == 1.0);
    }
}

TEST_CASE("every emitted walsh row equals a master row exactly") {
    DesignSample s = sample_bounded_rows(RowDistribution::walsh_rows(4, 2), 64, 8, 3);
    DenseMatrix wwt = gram_outer(s.a);
    for (std::size_t b = 0; b < 2; ++b)
        for (std::size_t i = 0; i < 4; ++i)
            CHECK(wwt(b * 4 + i, b * 4 + i) == 4.0);  // A A^T = m I per block
    for (std::size_t i = 0; i < s.x.rows(); ++i) {
        bool matched = false;
        for (std::size_t r = 0; r < 8 && !matched; ++r) {
            bool same = true;
            for (std::size_t c = 0; c < 8; ++c)
                if (s.x(i, c) != s.a(r, c)) { same = false; break; }
            matched = same;
        }
        CHECK(matched);
    }
}

TEST_CASE("gaussian second moment concentrates") {
    DenseMatrix psi = sample_psi(RowDistribution::gaussian(), 10000, 1, 11);
    double s = 0.0;
    for (double v : psi.data()) s += v * v;
    s /= double(psi.data().size());
    CHECK(s >= 0.95);
    CHECK(s <= 1.05);
}

TEST_CASE("discrete gaussian second moment matches direct lattice summation") {
    const int truncation = 20;
    // oracle: ratio of lattice sums over {-20..20}
    double z = 0.0, m2 = 0.0;
    for (int m = -truncation; m <= truncation; ++m) {
        double w = std::exp(-0.5 * double(m) * double(m));
        z += w;
        m2 += double(m) * double(m) * w;
    }
    double oracle = m2 / z;

    DenseMatrix psi = sample_psi(RowDistribution::discrete_gaussian(truncation), 10000, 1, 19);
    double s = 0.0;
    for (double v : psi.data()) {
        CHECK(v == std::round(v));  // lattice support
        s += v * v;
    }
    s /= double(psi.data().size());
    CHECK(std::fabs(s - oracle) <= 0.02 * oracle);
}

TEST_CASE("isotropy of every scalar-marginal kind at unit variance") {
    RowDistribution kinds[] = {RowDistribution::gaussian(), RowDistribution::rademacher(),
                               RowDistribution::discrete_gaussian(),
                               RowDistribution::uniform_bounded(std::sqrt(3.0))};
    for (const RowDistribution& dist : kinds) {
        Rng rng(mix_stream(5, std::uint64_t(dist.kind)));
        double s = 0.0;
        const int n = 100000;
        for (int i = 0; i < n; ++i) {
            double v = sample_scalar(dist, rng);
            s += v * v;
        }
        s /= double(n);
        CHECK(std::fabs(s - 1.0) <= 0.03);
    }
}

TEST_CASE("walsh rows have the block covariance") {
    DesignSample s = sample_bounded_rows(RowDistribution::walsh_rows(4, 2), 100000, 8, 23);
    DenseMatrix g = gram(s.x);
    for (double& v : g.data()) v /= double(s.x.rows());
    for (std::size_t i = 0; i < 8; ++i)
        for (std::size_t j = 0; j < 8; ++j)
            CHECK(std::fabs(g(i, j) - (i == j ? 0.5 : 0.0)) <= 0.02);
}

TEST_CASE("uniform rows stay inside the bound with variance M^2/3") {
    DesignSample s = sample_bounded_rows(RowDistribution::uniform_bounded(1.0), 10000, 1, 29);
    double acc = 0.0;
    for (double v : s.x.data()) {
        CHECK(std::fabs(v) <= 1.0);
        acc += v * v;
    }
    acc /= double(s.x.data().size());
    CHECK(std::fabs(acc - 1.0 / 3.0) <= 0.02);
}

TEST_CASE("sampling is deterministic and composition is bit-exact") {
    DenseMatrix a = build_covariance(CovarianceSpec::ar1(6, 0.3));
    DesignSample d1 = sample_design(RowDistribution::gaussian(), a, 20, 99);
    DesignSample d2 = sample_design(RowDistribution::gaussian(), a, 20, 99);
    REQUIRE(d1.x.data().size() == d2.x.data().size());
    for (std::size_t i = 0; i < d1.x.data().size(); ++i) CHECK(d1.x.data()[i] == d2.x.data()[i]);

    DenseMatrix psi = sample_psi(RowDistribution::gaussian(), 20, 6, 99);
    DenseMatrix product = matmul(psi, a);
    for (std::size_t i = 0; i < product.data().size(); ++i)
        CHECK(product.data()[i] == d1.x.data()[i]);
}
