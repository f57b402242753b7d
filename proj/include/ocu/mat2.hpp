#ifndef OCU_MAT2_HPP
#define OCU_MAT2_HPP

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace ocu {

using cplx = std::complex<double>;

struct SingularBeta : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SingularBlock : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NotU11 : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NonFiniteValue : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace tol {
inline constexpr double beta = 1e-9;      // |beta| threshold for the phi maps
inline constexpr double defect = 1e-8;    // default unitarity / U(1,1) defect
inline constexpr double channel = 1e-12;  // structural-zero threshold for channel entries
}  // namespace tol

/// Complex 2x2 matrix value type. Row-major entries a11..a22.
struct Mat2 {
    cplx a11{0.0}, a12{0.0}, a21{0.0}, a22{0.0};

    constexpr Mat2() = default;
    constexpr Mat2(cplx m11, cplx m12, cplx m21, cplx m22)
        : a11(m11), a12(m12), a21(m21), a22(m22) {}

    static constexpr Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
    static constexpr Mat2 swap() { return {0.0, 1.0, 1.0, 0.0}; }
    static constexpr Mat2 diag(cplx d1, cplx d2) { return {d1, 0.0, 0.0, d2}; }

    constexpr cplx trace() const { return a11 + a22; }
    constexpr cplx det() const { return a11 * a22 - a12 * a21; }

    constexpr Mat2 adjoint() const {
        return {std::conj(a11), std::conj(a21), std::conj(a12), std::conj(a22)};
    }
    constexpr Mat2 transpose() const { return {a11, a21, a12, a22}; }

    Mat2 inverse() const {
        const cplx d = det();
        if (std::abs(d) == 0.0) throw SingularBlock("Mat2::inverse: zero determinant");
        return {a22 / d, -a12 / d, -a21 / d, a11 / d};
    }

    constexpr Mat2 operator*(const Mat2& o) const {
        return {a11 * o.a11 + a12 * o.a21, a11 * o.a12 + a12 * o.a22,
                a21 * o.a11 + a22 * o.a21, a21 * o.a12 + a22 * o.a22};
    }
    constexpr Mat2 operator+(const Mat2& o) const {
        return {a11 + o.a11, a12 + o.a12, a21 + o.a21, a22 + o.a22};
    }
    constexpr Mat2 operator-(const Mat2& o) const {
        return {a11 - o.a11, a12 - o.a12, a21 - o.a21, a22 - o.a22};
    }
    constexpr Mat2 operator*(cplx s) const { return {a11 * s, a12 * s, a21 * s, a22 * s}; }
    friend constexpr Mat2 operator*(cplx s, const Mat2& m) { return m * s; }

    /// Apply to a column vector (x; y).
    constexpr std::array<cplx, 2> apply(cplx x, cplx y) const {
        return {a11 * x + a12 * y, a21 * x + a22 * y};
    }

    double frobenius() const {
        return std::sqrt(std::norm(a11) + std::norm(a12) + std::norm(a21) + std::norm(a22));
    }

    /// Spectral norm via the closed-form singular values of a 2x2 matrix.
    double op_norm() const {
        const double f = std::norm(a11) + std::norm(a12) + std::norm(a21) + std::norm(a22);
        const double g = std::norm(det());
        const double disc = std::max(f * f - 4.0 * g, 0.0);
        return std::sqrt(0.5 * (f + std::sqrt(disc)));
    }

    bool finite() const {
        auto ok = [](cplx v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); };
        return ok(a11) && ok(a12) && ok(a21) && ok(a22);
    }
};

inline void require_finite(const Mat2& m, const char* where) {
    if (!m.finite()) throw NonFiniteValue(std::string(where) + ": non-finite entries");
}

/// phi_sharp of Prop on the scattering-to-transfer rewiring:
/// (beta^-1, -beta^-1 alpha; delta beta^-1, gamma - delta beta^-1 alpha).
inline Mat2 phi_sharp(const Mat2& m, double tol_beta = tol::beta) {
    const cplx beta = m.a12;
    if (std::abs(beta) <= tol_beta)
        throw SingularBeta("phi_sharp: |beta| <= tolerance");
    const cplx bi = 1.0 / beta;
    Mat2 r{bi, -bi * m.a11, m.a22 * bi, m.a21 - m.a22 * bi * m.a11};
    require_finite(r, "phi_sharp");
    return r;
}

/// phi_flat: same data in the (gamma - delta beta^-1 alpha, delta beta^-1; -beta^-1 alpha, beta^-1) layout.
inline Mat2 phi_flat(const Mat2& m, double tol_beta = tol::beta) {
    const cplx beta = m.a12;
    if (std::abs(beta) <= tol_beta)
        throw SingularBeta("phi_flat: |beta| <= tolerance");
    const cplx bi = 1.0 / beta;
    Mat2 r{m.a21 - m.a22 * bi * m.a11, m.a22 * bi, -bi * m.a11, bi};
    require_finite(r, "phi_flat");
    return r;
}

/// Inverse of phi_sharp: T = (A,B;C,D) -> (-B A^-1, A^-1; D - C A^-1 B, C A^-1).
inline Mat2 phi_sharp_inv(const Mat2& t, double tol_a = tol::beta) {
    const cplx a = t.a11;
    if (std::abs(a) <= tol_a)
        throw SingularBlock("phi_sharp_inv: |A| <= tolerance");
    const cplx ai = 1.0 / a;
    Mat2 r{-t.a12 * ai, ai, t.a22 - t.a21 * ai * t.a12, t.a21 * ai};
    require_finite(r, "phi_sharp_inv");
    return r;
}

/// Inverse of phi_flat: T = (A,B;C,D) -> (-C D^-1, D^-1; A - B D^-1 C, B D^-1).
inline Mat2 phi_flat_inv(const Mat2& t, double tol_d = tol::beta) {
    const cplx d = t.a22;
    if (std::abs(d) <= tol_d)
        throw SingularBlock("phi_flat_inv: |D| <= tolerance");
    const cplx di = 1.0 / d;
    Mat2 r{-t.a21 * di, di, t.a11 - t.a12 * di * t.a21, t.a12 * di};
    require_finite(r, "phi_flat_inv");
    return r;
}

/// Frobenius norm of T* G T - G with G = diag(1,-1). Zero iff T is in U(1,1).
inline double u11_defect(const Mat2& t) {
    const Mat2 g = Mat2::diag(1.0, -1.0);
    const Mat2 d = t.adjoint() * g * t - g;
    return d.frobenius();
}

/// ||M* M - I||_F for 2x2 matrices.
inline double unitary_defect2(const Mat2& m) {
    return (m.adjoint() * m - Mat2::identity()).frobenius();
}

struct U11Eigensystem {
    double chi = 0.0;             // branch fixed to [0, pi); e^{2 i chi} = det T
    cplx lambda{0.0};             // |lambda| <= 1; eigenvalues are e^{i chi} lambda^{+-1}
    std::array<cplx, 2> eigvec_plus{};   // eigenvector of e^{i chi} * lambda
    std::array<cplx, 2> eigvec_minus{};  // eigenvector of e^{i chi} / lambda
    bool degenerate = false;      // |lambda + 1/lambda| = 2 within tolerance
};

namespace detail {
inline std::array<cplx, 2> eigvec2(const Mat2& t, cplx mu) {
    // (t - mu) v = 0; take the better-conditioned row.
    std::array<cplx, 2> v1{t.a12, mu - t.a11};
    std::array<cplx, 2> v2{mu - t.a22, t.a21};
    const double n1 = std::sqrt(std::norm(v1[0]) + std::norm(v1[1]));
    const double n2 = std::sqrt(std::norm(v2[0]) + std::norm(v2[1]));
    std::array<cplx, 2> v = (n1 >= n2) ? v1 : v2;
    double n = std::max(n1, n2);
    if (n == 0.0) return {1.0, 0.0};
    v[0] /= n;
    v[1] /= n;
    // deterministic phase: first component of significant size made real positive
    cplx ref = (std::abs(v[0]) > 1e-14) ? v[0] : v[1];
    cplx ph = ref / std::abs(ref);
    v[0] /= ph;
    v[1] /= ph;
    return v;
}
}  // namespace detail

/// Eigenstructure of a U(1,1) matrix: det T = e^{2 i chi}, eigenvalues
/// e^{i chi} lambda and e^{i chi}/lambda with lambda + 1/lambda real.
inline U11Eigensystem u11_eigensystem(const Mat2& t, double defect_tol = tol::defect,
                                      double degen_tol = 1e-9) {
    if (u11_defect(t) >= defect_tol)
        throw NotU11("u11_eigensystem: input is not in U(1,1) to tolerance");
    U11Eigensystem es;
    const cplx d = t.det();
    double chi = 0.5 * std::arg(d);  // in (-pi/2, pi/2]
    if (chi < 0.0) chi += M_PI;      // branch [0, pi)
    es.chi = chi;
    const cplx rot = std::exp(cplx(0.0, -chi));
    const cplx s_c = t.trace() * rot;
    const double s = s_c.real();  // lambda + 1/lambda; imaginary part is defect-level noise
    const double disc = s * s - 4.0;
    es.degenerate = std::abs(std::abs(s) - 2.0) < degen_tol;
    cplx lambda;
    if (disc >= 0.0) {
        const double sg = (s >= 0.0) ? 1.0 : -1.0;
        lambda = cplx(0.5 * (s - sg * std::sqrt(disc)), 0.0);  // |lambda| <= 1
    } else {
        lambda = cplx(0.5 * s, 0.5 * std::sqrt(-disc));  // unit modulus, Im >= 0
    }
    es.lambda = lambda;
    if (!es.degenerate) {
        const cplx eichi = std::exp(cplx(0.0, chi));
        es.eigvec_plus = detail::eigvec2(t, eichi * lambda);
        es.eigvec_minus = detail::eigvec2(t, eichi / lambda);
    }
    return es;
}

}  // namespace ocu

#endif
