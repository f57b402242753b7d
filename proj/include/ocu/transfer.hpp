#ifndef OCU_TRANSFER_HPP
#define OCU_TRANSFER_HPP

#include <algorithm>
#include <optional>
#include <vector>

#include "ocu/model.hpp"

namespace ocu {

struct ExceptionalPoint : std::runtime_error {
    int level;
    cplx z;
    ExceptionalPoint(int n, cplx z_)
        : std::runtime_error("exceptional point at level " + std::to_string(n)),
          level(n), z(z_) {}
};
struct SingularResolvent : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Channel block (alpha, beta; gamma, delta) = Q*(z^-1 V - P)^-1 Q of shell n,
/// evaluated as z Q*(V - z P)^-1 Q for |z| <= 1 and as the inverse of
/// Q*(z V* - P)^-1 Q for |z| > 1.
inline Mat2 channel_block(const OneChannelModel& model, int n, cplx z,
                          double cond_limit = 1e12) {
    const Shell& s = model.shell(n);
    const MatN q = s.q();
    const MatN p = MatN::Identity(s.size, s.size) - q * q.adjoint();
    const bool outer = std::abs(z) > 1.0;
    const MatN a = outer ? MatN(z * s.V.adjoint() - p) : MatN(s.V - z * p);
    Eigen::PartialPivLU<MatN> lu(a);
    const double rc = lu.rcond();
    if (!(rc > 1.0 / cond_limit))
        throw SingularResolvent("channel_block: resolvent conditioning exceeds limit");
    Mat2 block;
    if (outer) {
        block = to_mat2(q.adjoint() * lu.solve(q)).inverse();
    } else {
        block = to_mat2(MatN(z * (q.adjoint() * lu.solve(q))));
    }
    require_finite(block, "channel_block");
    return block;
}

/// Relative |beta| tolerance used to declare an exceptional point.
inline double beta_tol(const Mat2& block, double rel = 1e-9) {
    return rel * std::max(block.frobenius(), 1.0);
}

/// Shell transfer matrix T-sharp at level n. Inner branch phi_sharp of the
/// channel block for |z| <= 1, outer branch phi_flat of the conjugate block
/// for |z| > 1.
inline Mat2 t_sharp(const OneChannelModel& model, int n, cplx z) {
    const bool outer = std::abs(z) > 1.0;
    if (!outer) {
        const Mat2 block = channel_block(model, n, z);
        if (std::abs(block.a12) <= beta_tol(block)) throw ExceptionalPoint(n, z);
        return phi_sharp(block, 0.0);
    }
    const Shell& s = model.shell(n);
    const MatN q = s.q();
    const MatN p = MatN::Identity(s.size, s.size) - q * q.adjoint();
    const MatN a = z * s.V.adjoint() - p;
    Eigen::PartialPivLU<MatN> lu(a);
    if (!(lu.rcond() > 1e-12))
        throw SingularResolvent("t_sharp: resolvent conditioning exceeds limit");
    const Mat2 tilde = to_mat2(q.adjoint() * lu.solve(q));
    if (std::abs(tilde.a12) <= beta_tol(tilde)) throw ExceptionalPoint(n, z);
    return phi_flat(tilde, 0.0);
}

/// Connection transfer matrix T-flat at level n >= 1: phi_flat(W_n).
/// Structural (z-independent); fails exactly when (A2) fails at n.
inline Mat2 t_flat(const OneChannelModel& model, int n) {
    const Mat2& w = model.connection(n);
    if (std::abs(w.a12) <= tol::channel) throw ExceptionalPoint(n, 0.0);
    return phi_flat(w, 0.0);
}

/// One-level transfer matrix T_{z,n} = T-sharp * T-flat (T_{z,0} = T-sharp).
inline Mat2 transfer_step(const OneChannelModel& model, int n, cplx z) {
    Mat2 t = t_sharp(model, n, z);
    if (n >= 1) t = t * t_flat(model, n);
    return t;
}

struct TransferProduct {
    cplx z{};
    int n = -1;                 // highest level included
    Mat2 matrix;                // T_{z,N} ... T_{z,0} scaled by e^{-log_scale}
    double log_scale = 0.0;     // true product = e^{log_scale} * matrix
    bool exceptional = false;   // some level hit an exceptional point
    int exceptional_level = -1;
    bool boundary_absorbed = false;
};

/// Accumulated product T_{z,[0,N]}. Long products renormalize and carry the
/// factored-out magnitude in log_scale, so gap regions deep in a half-line
/// never overflow. If a level is exceptional the flag is set and the matrix
/// holds the partial product below that level.
inline TransferProduct transfer_product(const OneChannelModel& model, cplx z, int N,
                                        bool absorb_boundary = false) {
    if (N < 0 || N >= model.levels()) throw IndexOutOfRange("transfer_product: N out of range");
    TransferProduct out;
    out.z = z;
    out.n = N;
    out.boundary_absorbed = absorb_boundary;
    out.matrix = absorb_boundary ? Mat2::diag(1.0, 1.0 / model.u) : Mat2::identity();
    for (int n = 0; n <= N; ++n) {
        try {
            out.matrix = transfer_step(model, n, z) * out.matrix;
        } catch (const ExceptionalPoint& e) {
            out.exceptional = true;
            out.exceptional_level = n;
            return out;
        }
        const double f = out.matrix.frobenius();
        if (f > 1e100) {
            out.matrix = out.matrix * (1.0 / f);
            out.log_scale += std::log(f);
        }
    }
    require_finite(out.matrix, "transfer_product");
    return out;
}

/// Prefix products T_{z,[0,n]} for n = 0..N applied later by callers that
/// sweep levels (densities, solution samples).
inline std::vector<Mat2> transfer_prefixes(const OneChannelModel& model, cplx z, int N,
                                           bool absorb_boundary = false) {
    std::vector<Mat2> out;
    out.reserve(static_cast<std::size_t>(N + 1));
    Mat2 acc = absorb_boundary ? Mat2::diag(1.0, 1.0 / model.u) : Mat2::identity();
    for (int n = 0; n <= N; ++n) {
        acc = transfer_step(model, n, z) * acc;
        out.push_back(acc);
    }
    return out;
}

/// |beta_{z,n}| at z = e^{i phi}, minimized over levels 0..N; used for
/// exceptional-angle detection.
inline double min_beta_on_circle(const OneChannelModel& model, double phi, int N) {
    const cplx z = std::polar(1.0, phi);
    double m = std::numeric_limits<double>::infinity();
    for (int n = 0; n <= N; ++n) {
        const Mat2 block = channel_block(model, n, z);
        const double rel = std::abs(block.a12) / std::max(block.frobenius(), 1.0);
        m = std::min(m, rel);
    }
    return m;
}

struct AngleInterval {
    double lo = 0.0;
    double hi = 0.0;
    double center() const { return 0.5 * (lo + hi); }
};

/// Locate the angles where some beta_{z,n} vanishes on the unit circle
/// (the finite exceptional set at level N): bracket local minima of the
/// relative |beta| on a grid, then shrink by golden-section to width 1e-10.
inline std::vector<AngleInterval> exceptional_angles(const OneChannelModel& model, int N,
                                                     int grid_size = 4096,
                                                     double accept_tol = 1e-6) {
    if (grid_size < 16) throw std::invalid_argument("exceptional_angles: grid_size >= 16");
    // shells where beta is structurally zero (A1 failure) are not angle sets
    std::vector<int> active;
    for (int n = 0; n <= N; ++n)
        if (validate_A1(model, n)) active.push_back(n);
    if (active.empty()) return {};

    auto f = [&](double phi) {
        const cplx z = std::polar(1.0, phi);
        double m = std::numeric_limits<double>::infinity();
        for (int n : active) {
            const Mat2 block = channel_block(model, n, z);
            m = std::min(m, std::abs(block.a12) / std::max(block.frobenius(), 1.0));
        }
        return m;
    };

    const double h = 2.0 * M_PI / grid_size;
    std::vector<double> vals(static_cast<std::size_t>(grid_size));
    for (int i = 0; i < grid_size; ++i) vals[static_cast<std::size_t>(i)] = f(i * h);

    std::vector<AngleInterval> found;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int i = 0; i < grid_size; ++i) {
        const double v = vals[static_cast<std::size_t>(i)];
        const double vm = vals[static_cast<std::size_t>((i + grid_size - 1) % grid_size)];
        const double vp = vals[static_cast<std::size_t>((i + 1) % grid_size)];
        if (v <= vm && v <= vp && v < 1e-2) {
            double a = (i - 1) * h, b = (i + 1) * h;
            double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
            double f1 = f(x1), f2 = f(x2);
            while (b - a > 1e-10) {
                if (f1 < f2) {
                    b = x2; x2 = x1; f2 = f1;
                    x1 = b - gr * (b - a); f1 = f(x1);
                } else {
                    a = x1; x1 = x2; f1 = f2;
                    x2 = a + gr * (b - a); f2 = f(x2);
                }
            }
            if (std::min(f1, f2) < accept_tol) {
                double lo = std::fmod(a + 2.0 * M_PI, 2.0 * M_PI);
                double hi = lo + (b - a);
                found.push_back({lo, hi});
            }
        }
    }
    std::sort(found.begin(), found.end(),
              [](const AngleInterval& x, const AngleInterval& y) { return x.lo < y.lo; });
    return found;
}

/// Channel components (Phi_{(n,+)}, Psi_{(n,+)}) of the generalized solution
/// with boundary phase u: prefix products applied to the seed (u; 1).
/// Index 0 of the result is the n = -1 seed itself.
inline std::vector<std::array<cplx, 2>> solution_samples(const OneChannelModel& model, cplx z,
                                                         int N) {
    std::vector<std::array<cplx, 2>> out;
    out.reserve(static_cast<std::size_t>(N + 2));
    out.push_back({model.u, 1.0});
    Mat2 acc = Mat2::identity();
    for (int n = 0; n <= N; ++n) {
        acc = transfer_step(model, n, z) * acc;
        out.push_back(acc.apply(model.u, 1.0));
    }
    return out;
}

}  // namespace ocu

#endif
