#ifndef OCU_SPECTRUM_HPP
#define OCU_SPECTRUM_HPP

#include <vector>

#include "ocu/finite.hpp"

namespace ocu {

/// Angle grid with density values w.r.t. d phi. Masked nodes hit the
/// exceptional set and carry no value.
struct DensityGrid {
    std::vector<double> angles;
    std::vector<double> values;
    std::vector<bool> masked;
    int n = -1;
    cplx u{1.0};

    std::size_t size() const { return angles.size(); }

    /// Trapezoid mass over the circle, periodic closure, masked nodes
    /// interpolated from unmasked neighbors.
    double mass() const {
        const std::size_t g = size();
        if (g < 2) return 0.0;
        std::vector<double> filled(values);
        for (std::size_t i = 0; i < g; ++i) {
            if (!masked[i]) continue;
            std::size_t lo = i, hi = i;
            while (masked[lo]) lo = (lo + g - 1) % g;
            while (masked[hi]) hi = (hi + 1) % g;
            filled[i] = 0.5 * (values[lo] + values[hi]);
        }
        const double h = 2.0 * M_PI / static_cast<double>(g);
        double acc = 0.0;
        for (double v : filled) acc += v;
        return acc * h;
    }
};

/// Half-step-shifted uniform grid: nodes never sit on phi = 0 and detected
/// exceptional angles of the standard models fall between nodes.
inline std::vector<double> uniform_angle_grid(int grid_size) {
    if (grid_size < 2) throw std::invalid_argument("uniform_angle_grid: grid_size >= 2");
    std::vector<double> a(static_cast<std::size_t>(grid_size));
    const double h = 2.0 * M_PI / grid_size;
    for (int k = 0; k < grid_size; ++k) a[static_cast<std::size_t>(k)] = (k + 0.5) * h;
    return a;
}

/// Spectral density at the boundary vector: 1/(pi ||T_{e^{i phi},[0,n]} (u;1)||^2).
/// Exceptional nodes are masked instead of raising.
inline DensityGrid carmona_density(const OneChannelModel& model, cplx u, int n,
                                   int grid_size = 4096) {
    DensityGrid grid;
    grid.n = n;
    grid.u = u;
    grid.angles = uniform_angle_grid(grid_size);
    grid.values.assign(grid.angles.size(), 0.0);
    grid.masked.assign(grid.angles.size(), false);
    for (std::size_t k = 0; k < grid.angles.size(); ++k) {
        const TransferProduct tp =
            transfer_product(model, std::polar(1.0, grid.angles[k]), n);
        if (tp.exceptional) {
            grid.masked[k] = true;
            continue;
        }
        const std::array<cplx, 2> w = tp.matrix.apply(u, 1.0);
        const double norm2 = std::norm(w[0]) + std::norm(w[1]);
        grid.values[k] = std::exp(-2.0 * tp.log_scale) / (M_PI * norm2);
    }
    return grid;
}

/// Trapezoid value of the integral of ||T_{e^{i phi},[0,n]}||^{2p} over
/// [phi0, phi1]; the operator norm is the largest singular value.
inline double ls_integral(const OneChannelModel& model, double p, double phi0, double phi1,
                          int n, int grid_size = 1024) {
    if (!(p > 1.0)) throw std::invalid_argument("ls_integral: p > 1 required");
    if (!(phi0 < phi1)) throw std::invalid_argument("ls_integral: phi0 < phi1 required");
    const double h = (phi1 - phi0) / grid_size;
    double acc = 0.0;
    for (int k = 0; k <= grid_size; ++k) {
        const TransferProduct tp = transfer_product(model, std::polar(1.0, phi0 + k * h), n);
        if (tp.exceptional) continue;  // measure-zero set; drop the node
        const double val = std::exp(2.0 * p * (tp.log_scale + std::log(tp.matrix.op_norm())));
        acc += (k == 0 || k == grid_size) ? 0.5 * val : val;
    }
    return acc * h;
}

/// Pointwise Cauchy-Schwarz floor: 1/||T (u;1)||^2 <= ||T||^2. Returns the
/// maximum violation over the grid (expected <= 0 up to roundoff).
inline double density_floor_bound(const OneChannelModel& model, cplx u, int n,
                                  int grid_size = 1024) {
    double worst = -std::numeric_limits<double>::infinity();
    for (double phi : uniform_angle_grid(grid_size)) {
        const TransferProduct tp = transfer_product(model, std::polar(1.0, phi), n);
        if (tp.exceptional) continue;
        const std::array<cplx, 2> w = tp.matrix.apply(u, 1.0);
        const double scale2 = std::exp(2.0 * tp.log_scale);
        const double lhs = 1.0 / (scale2 * (std::norm(w[0]) + std::norm(w[1])));
        const double rhs = tp.matrix.op_norm();
        worst = std::max(worst, lhs - scale2 * rhs * rhs);
    }
    return worst;
}

/// Poisson extension P^{(u)}(z) of the v-averaged spectral measure, from the
/// transfer product: (|A|^2 - |B|^2)/|A u + B|^2.
inline double poisson_value_transfer(const OneChannelModel& model, cplx u, int n, cplx z) {
    const TransferProduct tp = transfer_product(model, z, n);
    if (tp.exceptional) throw ExceptionalPoint(tp.exceptional_level, z);
    const cplx a = tp.matrix.a11, b = tp.matrix.a12;
    const double den = std::norm(a * u + b);
    if (den == 0.0) throw SingularResolvent("poisson_value_transfer: A u + B = 0");
    return (std::norm(a) - std::norm(b)) / den;
}

/// Same value through the finite-volume resolvent: 1 + 2 Re g with g the
/// v-averaged Green value evaluated by quadrature.
inline double poisson_value_finite(const OneChannelModel& model, cplx u, int N, cplx z,
                                   int start_points = 512) {
    return 1.0 + 2.0 * std::real(quadrature_green(model, N, u, z, start_points));
}

enum class PoissonPath { transfer, finite_volume };

/// Grid of P(r e^{i phi})/(2 pi); as r -> 1 at non-exceptional angles this
/// converges to the Carmona density.
inline DensityGrid poisson_transform(const OneChannelModel& model, cplx u, int n, double r,
                                     int grid_size = 4096,
                                     PoissonPath path = PoissonPath::transfer) {
    if (!(r > 0.0 && r < 1.0)) throw std::invalid_argument("poisson_transform: 0 < r < 1");
    DensityGrid grid;
    grid.n = n;
    grid.u = u;
    grid.angles = uniform_angle_grid(grid_size);
    grid.values.assign(grid.angles.size(), 0.0);
    grid.masked.assign(grid.angles.size(), false);
    for (std::size_t k = 0; k < grid.angles.size(); ++k) {
        const cplx z = std::polar(r, grid.angles[k]);
        try {
            const double p = (path == PoissonPath::transfer)
                                 ? poisson_value_transfer(model, u, n, z)
                                 : poisson_value_finite(model, u, n, z);
            grid.values[k] = p / (2.0 * M_PI);
        } catch (const ExceptionalPoint&) {
            grid.masked[k] = true;
        }
    }
    return grid;
}

/// L1 distance between two density grids on the same angle set; nodes masked
/// in either grid are skipped.
inline double l1_distance(const DensityGrid& a, const DensityGrid& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("l1_distance: grids must have equal size");
    const double h = 2.0 * M_PI / static_cast<double>(a.size());
    double acc = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (a.masked[k] || b.masked[k]) continue;
        acc += std::abs(a.values[k] - b.values[k]);
    }
    return acc * h;
}

}  // namespace ocu

#endif
