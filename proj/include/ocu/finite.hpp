#ifndef OCU_FINITE_HPP
#define OCU_FINITE_HPP

#include <vector>

#include "ocu/transfer.hpp"

namespace ocu {

struct EigensolverFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DimensionLimit : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Per-shell canonical index order: minus channel first, interior sites in
/// ascending original order, plus channel last.
inline std::vector<int> canonical_order(const Shell& s) {
    std::vector<int> order;
    order.reserve(static_cast<std::size_t>(s.size));
    order.push_back(s.index_minus);
    for (int i = 0; i < s.size; ++i)
        if (i != s.index_minus && i != s.index_plus) order.push_back(i);
    order.push_back(s.index_plus);
    return order;
}

/// Finite-volume operator on the first N+1 shells with boundary phases (u, v).
/// Rows and columns use the canonical per-shell ordering, so the minus channel
/// of shell 0 is global index 0 and the plus channel of shell N is the last.
struct FiniteOperator {
    int N = -1;
    cplx u{1.0}, v{1.0};
    bool tilde = false;
    int dim = 0;
    std::vector<int> offsets;  // canonical start index of each shell
    MatN matrix;

    int minus_index(int n) const { return offsets[static_cast<std::size_t>(n)]; }
    int plus_index(int n) const {
        return (n + 1 <= N ? offsets[static_cast<std::size_t>(n + 1)] : dim) - 1;
    }
};

inline constexpr int finite_dim_limit = 4096;

/// Assemble W^{(u,v)} V (plain) or V W^{(u,v)} (tilde) in the canonical basis.
/// V is block diagonal over shells; W^{(u,v)} is u at the root minus channel,
/// v at the top plus channel, the 2x2 W_n across each consecutive shell pair
/// and identity elsewhere.
inline FiniteOperator assemble(const OneChannelModel& model, int N, cplx u, cplx v,
                               bool tilde = false) {
    if (N < 0 || N >= model.levels()) throw IndexOutOfRange("assemble: N out of range");
    FiniteOperator op;
    op.N = N;
    op.u = u;
    op.v = v;
    op.tilde = tilde;
    op.offsets.resize(static_cast<std::size_t>(N + 1));
    int dim = 0;
    for (int n = 0; n <= N; ++n) {
        op.offsets[static_cast<std::size_t>(n)] = dim;
        dim += model.shell(n).size;
    }
    if (dim > finite_dim_limit)
        throw DimensionLimit("assemble: dimension exceeds dense limit 4096");
    op.dim = dim;

    MatN vmat = MatN::Zero(dim, dim);
    for (int n = 0; n <= N; ++n) {
        const Shell& s = model.shell(n);
        const std::vector<int> ord = canonical_order(s);
        const int off = op.offsets[static_cast<std::size_t>(n)];
        for (int i = 0; i < s.size; ++i)
            for (int j = 0; j < s.size; ++j)
                vmat(off + i, off + j) =
                    s.V(ord[static_cast<std::size_t>(i)], ord[static_cast<std::size_t>(j)]);
    }

    MatN wmat = MatN::Identity(dim, dim);
    wmat(0, 0) = u;
    wmat(dim - 1, dim - 1) = v;
    for (int n = 1; n <= N; ++n) {
        const Mat2& w = model.connection(n);
        const int ip = op.plus_index(n - 1);  // e_{(n-1,+)}
        const int im = op.minus_index(n);     // e_{(n,-)}
        wmat(ip, ip) = w.a11;
        wmat(ip, im) = w.a12;
        wmat(im, ip) = w.a21;
        wmat(im, im) = w.a22;
    }

    op.matrix = tilde ? MatN(vmat * wmat) : MatN(wmat * vmat);
    return op;
}

/// Green value g_N^{(u,v)}(z) = e0* (z^-1 U - I)^-1 e0 at the root channel.
inline cplx green(const FiniteOperator& op, cplx z, double cond_limit = 1e14) {
    const MatN a = op.matrix / z - MatN::Identity(op.dim, op.dim);
    Eigen::PartialPivLU<MatN> lu(a);
    if (!(lu.rcond() > 1.0 / cond_limit))
        throw SingularResolvent("green: resolvent conditioning exceeds limit");
    VecN e0 = VecN::Zero(op.dim);
    e0(0) = 1.0;
    const VecN x = lu.solve(e0);
    return x(0);
}

/// Boundary resolvent R^{(u,v)} = Q* (z^-1 U - I)^-1 Q with Q columns the
/// root minus channel and the top plus channel.
inline Mat2 boundary_resolvent(const OneChannelModel& model, int N, cplx u, cplx v, cplx z,
                               bool tilde = false, double cond_limit = 1e14) {
    const FiniteOperator op = assemble(model, N, u, v, tilde);
    const MatN a = op.matrix / z - MatN::Identity(op.dim, op.dim);
    Eigen::PartialPivLU<MatN> lu(a);
    if (!(lu.rcond() > 1.0 / cond_limit))
        throw SingularResolvent("boundary_resolvent: resolvent conditioning exceeds limit");
    MatN q = MatN::Zero(op.dim, 2);
    q(0, 0) = 1.0;
    q(op.dim - 1, 1) = 1.0;
    return to_mat2(q.adjoint() * lu.solve(q));
}

/// v-averaged Green value: closed form -B / (A u + B) from the top row of the
/// boundary-to-top transfer product.
inline cplx averaged_green(const OneChannelModel& model, int N, cplx u, cplx z) {
    const TransferProduct tp = transfer_product(model, z, N);
    if (tp.exceptional) throw ExceptionalPoint(tp.exceptional_level, z);
    const cplx a = tp.matrix.a11, b = tp.matrix.a12;
    const cplx den = a * u + b;
    if (std::abs(den) == 0.0) throw SingularResolvent("averaged_green: A u + B = 0");
    return -b / den;
}

/// v-quadrature of g^{(u,v)} over equispaced unit-modulus v, evaluated per
/// point by a dense solve. Independent of the transfer calculus.
inline cplx quadrature_green_direct(const OneChannelModel& model, int N, cplx u, cplx z,
                                    int points = 512) {
    cplx acc = 0.0;
    for (int k = 0; k < points; ++k) {
        const cplx v = std::polar(1.0, 2.0 * M_PI * k / points);
        acc += green(assemble(model, N, u, v), z);
    }
    return acc / static_cast<double>(points);
}

/// Same quadrature via a rank-one update: U^{(u,v)} differs from U^{(u,1)}
/// by (v-1) on the top plus channel, so each v costs O(1) after one
/// factorization. The point count doubles until two successive results agree
/// to quad_tol.
inline cplx quadrature_green(const OneChannelModel& model, int N, cplx u, cplx z,
                             int start_points = 512, double quad_tol = 1e-9,
                             int max_points = 1 << 16) {
    const FiniteOperator op = assemble(model, N, u, 1.0);
    const MatN a = op.matrix / z - MatN::Identity(op.dim, op.dim);
    Eigen::PartialPivLU<MatN> lu(a);
    if (!(lu.rcond() > 1e-14))
        throw SingularResolvent("quadrature_green: resolvent conditioning exceeds limit");
    const int top = op.dim - 1;
    VecN e0 = VecN::Zero(op.dim), ep = VecN::Zero(op.dim);
    e0(0) = 1.0;
    ep(top) = 1.0;
    const VecN x = lu.solve(e0);  // A^-1 e0
    const VecN t = lu.solve(ep);  // A^-1 ep
    const VecN ux = op.matrix * x, ut = op.matrix * t;
    // g(v) = x0 - (v-1) z^-1 t0 (U x)_top / (1 + (v-1) z^-1 (U t)_top)
    const cplx x0 = x(0), t0 = t(0);
    const cplx uxp = ux(top) / z, utp = ut(top) / z;
    auto g_of_v = [&](cplx v) { return x0 - (v - 1.0) * t0 * uxp / (1.0 + (v - 1.0) * utp); };

    auto average = [&](int points) {
        cplx acc = 0.0;
        for (int k = 0; k < points; ++k)
            acc += g_of_v(std::polar(1.0, 2.0 * M_PI * k / points));
        return acc / static_cast<double>(points);
    };
    cplx prev = average(start_points);
    for (int points = 2 * start_points; points <= max_points; points *= 2) {
        const cplx cur = average(points);
        if (std::abs(cur - prev) < quad_tol) return cur;
        prev = cur;
    }
    return prev;
}

struct SpectralPoint {
    double angle = 0.0;  // in [0, 2 pi)
    double weight = 0.0;
};

/// Spectral measure of the root channel vector: eigenangles of the unitary
/// matrix with weights |<e0, psi_j>|^2, sorted by angle.
inline std::vector<SpectralPoint> spectral_measure(const FiniteOperator& op) {
    Eigen::ComplexSchur<MatN> schur(op.matrix, true);
    if (schur.info() != Eigen::Success)
        throw EigensolverFailure("spectral_measure: Schur decomposition failed");
    // unitary input is normal, so the Schur form is diagonal and the Schur
    // vectors are eigenvectors
    std::vector<SpectralPoint> out(static_cast<std::size_t>(op.dim));
    for (int j = 0; j < op.dim; ++j) {
        double ang = std::arg(schur.matrixT()(j, j));
        if (ang < 0.0) ang += 2.0 * M_PI;
        out[static_cast<std::size_t>(j)] = {ang, std::norm(schur.matrixU()(0, j))};
    }
    std::sort(out.begin(), out.end(),
              [](const SpectralPoint& a, const SpectralPoint& b) { return a.angle < b.angle; });
    return out;
}

/// Eigenangles only (no weights), for truncation-spectrum band checks.
inline std::vector<double> eigenangles(const FiniteOperator& op) {
    Eigen::ComplexSchur<MatN> schur(op.matrix, false);
    if (schur.info() != Eigen::Success)
        throw EigensolverFailure("eigenangles: Schur decomposition failed");
    std::vector<double> out(static_cast<std::size_t>(op.dim));
    for (int j = 0; j < op.dim; ++j) {
        double ang = std::arg(schur.matrixT()(j, j));
        if (ang < 0.0) ang += 2.0 * M_PI;
        out[static_cast<std::size_t>(j)] = ang;
    }
    std::sort(out.begin(), out.end());
    return out;
}

/// Generalized solution on the first N+1 shells in the canonical global
/// basis: channel components propagated by the transfer recursion, interior
/// components from the in-shell solve (z^-1 V - P) Psi = Q Phi.
inline VecN generalized_eigenfunction(const OneChannelModel& model, cplx z, int N) {
    std::vector<int> offsets(static_cast<std::size_t>(N + 1));
    int dim = 0;
    for (int n = 0; n <= N; ++n) {
        offsets[static_cast<std::size_t>(n)] = dim;
        dim += model.shell(n).size;
    }
    VecN psi = VecN::Zero(dim);
    // x = (Psi_{(n,-)}; Phi_{(n,-)}), w = (Phi_{(n,+)}; Psi_{(n,+)})
    std::array<cplx, 2> x{model.u, 1.0};
    for (int n = 0; n <= N; ++n) {
        const std::array<cplx, 2> w = t_sharp(model, n, z).apply(x[0], x[1]);
        const cplx phi_minus = x[1], phi_plus = w[0];
        const Shell& s = model.shell(n);
        const MatN q = s.q();
        const MatN p = MatN::Identity(s.size, s.size) - q * q.adjoint();
        Eigen::Vector2cd phi;
        phi << phi_minus, phi_plus;
        const VecN rhs = q * phi;
        const VecN shell_psi = Eigen::PartialPivLU<MatN>(s.V / z - p).solve(rhs);
        const std::vector<int> ord = canonical_order(s);
        const int off = offsets[static_cast<std::size_t>(n)];
        for (int i = 0; i < s.size; ++i)
            psi(off + i) = shell_psi(ord[static_cast<std::size_t>(i)]);
        if (n < N) x = t_flat(model, n + 1).apply(w[0], w[1]);
    }
    return psi;
}

}  // namespace ocu

#endif
