#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ocu/haar.hpp"
#include "ocu/mat2.hpp"

using namespace ocu;

namespace {
const double SQ2 = std::sqrt(2.0);
double dist(const Mat2& a, const Mat2& b) { return (a - b).frobenius(); }
}  // namespace

TEST_CASE("arithmetic and norms") {
    const Mat2 m{cplx(1.0, 2.0), cplx(0.0, -1.0), 3.0, cplx(-2.0, 0.5)};
    CHECK(std::abs(m.trace() - cplx(-1.0, 2.5)) < 1e-15);
    CHECK(dist(m * Mat2::identity(), m) == 0.0);
    CHECK(dist(m * m.inverse(), Mat2::identity()) < 1e-14);
    CHECK(dist(m.adjoint().adjoint(), m) == 0.0);
    const Mat2 d = Mat2::diag(3.0, 1.0);
    CHECK(d.op_norm() == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(d.frobenius() == doctest::Approx(std::sqrt(10.0)).epsilon(1e-14));
    CHECK(m.op_norm() <= m.frobenius() + 1e-14);
}

TEST_CASE("swap rewires to the identity") {
    CHECK(dist(phi_sharp(Mat2::swap()), Mat2::identity()) == 0.0);
    CHECK(dist(phi_flat(Mat2::swap()), Mat2::identity()) == 0.0);
}

TEST_CASE("reflection block rewires to the closed form") {
    // (c, s; s, -c) -> phi_sharp = (1/s, -c/s; -c/s, 1/s)
    const double th = M_PI / 6.0, c = std::cos(th), s = std::sin(th);
    const Mat2 t = phi_sharp(Mat2{c, s, s, -c});
    CHECK(dist(t, Mat2{1.0 / s, -c / s, -c / s, 1.0 / s}) < 1e-15);
    CHECK(u11_defect(t) < 1e-14);
}

TEST_CASE("sharp and flat coincide through inversion") {
    rng::Stream st(7, 0, 0, 1);
    for (int i = 0; i < 200; ++i) {
        Mat2 m = haar_u2(st);
        if (std::abs(m.a12) < 1e-3) continue;
        CHECK(dist(phi_sharp(m), phi_flat(m.inverse())) < 1e-12);
        CHECK(dist(phi_sharp_inv(phi_sharp(m)), m) < 1e-12);
        CHECK(dist(phi_flat_inv(phi_flat(m)), m) < 1e-12);
        CHECK(u11_defect(phi_sharp(m)) < 1e-12);
        CHECK(u11_defect(phi_flat(m)) < 1e-12);
    }
}

TEST_CASE("vanishing channel entry raises") {
    const Mat2 d = Mat2::diag(1.0, cplx(0.0, 1.0));
    CHECK_THROWS_AS(phi_sharp(d), SingularBeta);
    CHECK_THROWS_AS(phi_flat(d), SingularBeta);
    CHECK_THROWS_AS(phi_sharp_inv(Mat2{0.0, 1.0, 1.0, 0.0}), SingularBlock);
    CHECK_THROWS_AS(phi_flat_inv(Mat2{0.0, 1.0, 1.0, 0.0}), SingularBlock);
    CHECK_THROWS_AS(Mat2{}.inverse(), SingularBlock);
}

TEST_CASE("hyperbolic eigensystem of a real symmetric transfer matrix") {
    const double s3 = std::sqrt(3.0);
    const Mat2 t{2.0, -s3, -s3, 2.0};  // det 1, trace 4
    CHECK(u11_defect(t) < 1e-14);
    const U11Eigensystem es = u11_eigensystem(t);
    CHECK(es.chi == doctest::Approx(0.0));
    CHECK(std::abs(es.lambda - cplx(2.0 - s3)) < 1e-12);
    CHECK_FALSE(es.degenerate);
    // eigenvector residuals
    auto res = [&](std::array<cplx, 2> v, cplx mu) {
        auto w = t.apply(v[0], v[1]);
        return std::abs(w[0] - mu * v[0]) + std::abs(w[1] - mu * v[1]);
    };
    CHECK(res(es.eigvec_plus, es.lambda) < 1e-12);
    CHECK(res(es.eigvec_minus, 1.0 / es.lambda) < 1e-12);
    // contracting direction is (1,1)/sqrt(2)
    CHECK(std::abs(es.eigvec_plus[0] - es.eigvec_plus[1]) < 1e-12);
}

TEST_CASE("elliptic eigensystem has unimodular lambda") {
    // (a, b; conj b, conj a) with |a|^2 - |b|^2 = 1 and purely imaginary a
    const Mat2 t{cplx(0.0, 1.25), 0.75, 0.75, cplx(0.0, -1.25)};
    CHECK(u11_defect(t) < 1e-14);
    const U11Eigensystem es = u11_eigensystem(t);
    CHECK(std::abs(std::abs(es.lambda) - 1.0) < 1e-12);
    CHECK(es.lambda.imag() >= 0.0);
}

TEST_CASE("chi branch stays in [0, pi) and squares to the determinant") {
    rng::Stream st(11, 0, 0, 2);
    for (int i = 0; i < 100; ++i) {
        Mat2 m = haar_u2(st);
        if (std::abs(m.a12) < 1e-3) continue;
        const Mat2 t = phi_sharp(m);
        const U11Eigensystem es = u11_eigensystem(t);
        CHECK(es.chi >= 0.0);
        CHECK(es.chi < M_PI);
        CHECK(std::abs(std::exp(cplx(0.0, 2.0 * es.chi)) - t.det()) < 1e-10);
    }
}

TEST_CASE("eigensystem rejects matrices outside U(1,1)") {
    CHECK_THROWS_AS(u11_eigensystem(Mat2{2.0, 0.0, 0.0, 2.0}), NotU11);
}
