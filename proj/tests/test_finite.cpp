#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ocu/finite.hpp"
#include "ocu/haar.hpp"

using namespace ocu;

namespace {
const double SQ2 = std::sqrt(2.0);
const Mat2 kHadamard{1.0 / SQ2, 1.0 / SQ2, 1.0 / SQ2, -1.0 / SQ2};

OneChannelModel random_model(rng::Stream& s, int levels) {
    OneChannelModel m;
    for (int n = 0; n < levels; ++n) {
        m.shells.emplace_back(haar_unitary(3 + (n % 2), s), 0, 2);
        if (n >= 1) {
            Mat2 w = haar_u2(s);
            while (std::abs(w.a12) < 0.1) w = haar_u2(s);
            m.connections.push_back(w);
        }
    }
    return m;
}
}  // namespace

TEST_CASE("single swap shell: operator, Green value and spectral measure") {
    ZipperSpec spec;
    spec.V = {Mat2::swap()};
    spec.W = {Mat2::identity()};
    const OneChannelModel m = build_zipper(spec, 1.0);
    const FiniteOperator op = assemble(m, 0, 1.0, 1.0);
    CHECK(op.dim == 2);
    CHECK((to_mat2(op.matrix) - Mat2::swap()).frobenius() == 0.0);
    // frozen: g(1/2) = e0* (2 swap - I)^-1 e0 = 1/3
    CHECK(std::abs(green(op, 0.5) - cplx(1.0 / 3.0)) < 1e-14);
    const auto sm = spectral_measure(op);
    REQUIRE(sm.size() == 2);
    CHECK(sm[0].angle == doctest::Approx(0.0));
    CHECK(sm[0].weight == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(sm[1].angle == doctest::Approx(M_PI));
    CHECK(sm[1].weight == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("assembled operators are unitary") {
    rng::Stream s(31, 0, 0, 6);
    const OneChannelModel m = random_model(s, 3);
    for (bool tilde : {false, true}) {
        const FiniteOperator op =
            assemble(m, 2, std::polar(1.0, 0.3), std::polar(1.0, -1.2), tilde);
        CHECK(unitary_defect(op.matrix) < 1e-12);
    }
    const OneChannelModel strobo = build_stroboscopic(3, {Mat2::swap()});
    const FiniteOperator sop = assemble(strobo, 3, 1.0, 1.0);
    CHECK(sop.dim == 64);
    CHECK(unitary_defect(sop.matrix) < 1e-12);
}

TEST_CASE("tilde operator is a conjugate of the plain one") {
    rng::Stream s(32, 0, 0, 6);
    const OneChannelModel m = random_model(s, 3);
    const cplx u = std::polar(1.0, 0.8), v = std::polar(1.0, 2.2);
    const FiniteOperator plain = assemble(m, 2, u, v, false);
    const FiniteOperator tilde = assemble(m, 2, u, v, true);
    // U = W V and U-tilde = V W share their spectrum
    const auto a = eigenangles(plain), b = eigenangles(tilde);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        CHECK(std::abs(std::remainder(a[i] - b[i], 2.0 * M_PI)) < 1e-10);
}

TEST_CASE("boundary resolvent agrees with per-entry Green solves") {
    rng::Stream s(33, 0, 0, 6);
    const OneChannelModel m = random_model(s, 2);
    const cplx u = std::polar(1.0, 1.7), v = std::polar(1.0, -0.4);
    const cplx z = std::polar(0.85, 0.9);
    const FiniteOperator op = assemble(m, 1, u, v);
    const Mat2 r = boundary_resolvent(m, 1, u, v, z);
    CHECK(std::abs(r.a11 - green(op, z)) < 1e-11);
}

TEST_CASE("closed-form averaged Green value matches both quadratures") {
    rng::Stream s(34, 0, 0, 6);
    for (int trial = 0; trial < 5; ++trial) {
        const OneChannelModel m = random_model(s, 3);
        const cplx u = std::polar(1.0, 0.5 * trial);
        const cplx z = std::polar(0.9, 1.0 + 0.3 * trial);
        const cplx closed = averaged_green(m, 2, u, z);
        CHECK(std::abs(closed - quadrature_green_direct(m, 2, u, z, 256)) < 1e-8);
        CHECK(std::abs(closed - quadrature_green(m, 2, u, z, 64)) < 1e-8);
    }
}

TEST_CASE("rank-one quadrature equals the dense per-point quadrature") {
    rng::Stream s(35, 0, 0, 6);
    const OneChannelModel m = random_model(s, 2);
    const cplx z = std::polar(0.8, 2.4);
    const cplx direct = quadrature_green_direct(m, 1, 1.0, z, 128);
    const cplx fast = quadrature_green(m, 1, 1.0, z, 128, 1e-12);
    CHECK(std::abs(direct - fast) < 1e-10);
}

TEST_CASE("generalized eigenfunction solves the interior equations") {
    rng::Stream s(36, 0, 0, 6);
    const OneChannelModel m = random_model(s, 4);
    const cplx z = std::polar(1.0, 0.65);
    const int N = 3;
    const VecN psi = generalized_eigenfunction(m, z, N);
    const FiniteOperator op = assemble(m, N, 1.0, 1.0);
    REQUIRE(psi.size() == op.dim);
    // (U/z - I) psi vanishes away from the two boundary rows
    const VecN resid = op.matrix / z * psi - psi;
    double interior = 0.0;
    for (int i = 1; i < op.dim - 1; ++i) interior = std::max(interior, std::abs(resid(i)));
    CHECK(interior < 1e-9 * psi.norm());
    CHECK(psi.norm() > 0.0);
}

TEST_CASE("spectral weights resolve the identity") {
    rng::Stream s(37, 0, 0, 6);
    const OneChannelModel m = random_model(s, 2);
    const auto sm = spectral_measure(assemble(m, 1, 1.0, 1.0));
    double total = 0.0;
    for (const SpectralPoint& p : sm) {
        total += p.weight;
        CHECK(p.angle >= 0.0);
        CHECK(p.angle < 2.0 * M_PI);
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("canonical ordering pins channel rows") {
    rng::Stream s(38, 0, 0, 6);
    const OneChannelModel m = random_model(s, 3);
    const FiniteOperator op = assemble(m, 2, 1.0, 1.0);
    CHECK(op.minus_index(0) == 0);
    CHECK(op.plus_index(2) == op.dim - 1);
    for (int n = 0; n < 2; ++n) CHECK(op.plus_index(n) + 1 == op.minus_index(n + 1));
}

TEST_CASE("dimension guard") {
    std::vector<Mat2> coins(3000, kHadamard);
    const OneChannelModel m = build_qw1d(coins);
    CHECK_THROWS_AS(assemble(m, 2999, 1.0, 1.0), DimensionLimit);
}
