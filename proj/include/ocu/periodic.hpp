#ifndef OCU_PERIODIC_HPP
#define OCU_PERIODIC_HPP

#include <vector>

#include "ocu/model.hpp"
#include "ocu/transfer.hpp"

namespace ocu {

struct NonRealDiscriminant : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct EmptyBandSet : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NearBandEdge : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Periodic scattering zipper: blocks V_1..V_p, W_1..W_p repeat with period p;
/// V_0 seeds the half-line and u is the boundary phase.
struct PeriodicZipper {
    int p = 1;
    std::vector<Mat2> V;  // V[k] = V_{k+1}, k = 0..p-1
    std::vector<Mat2> W;  // W[k] = W_{k+1}
    Mat2 V0;
    cplx u{1.0};

    PeriodicZipper() = default;
    PeriodicZipper(std::vector<Mat2> v, std::vector<Mat2> w, Mat2 v0, cplx u_ = 1.0)
        : p(static_cast<int>(v.size())), V(std::move(v)), W(std::move(w)), V0(v0), u(u_) {
        if (p < 1 || W.size() != V.size())
            throw ShapeMismatch("PeriodicZipper: need equal nonempty V and W lists");
        auto check = [](const Mat2& m, const char* what) {
            if (unitary_defect2(m) >= 1e-10)
                throw NonUnitaryBlock(std::string("PeriodicZipper: ") + what +
                                      " is not unitary to 1e-10");
            if (std::abs(m.a12) <= tol::channel)
                throw InvalidSiteChoice(std::string("PeriodicZipper: ") + what +
                                        " has vanishing channel entry");
        };
        check(V0, "V_0");
        for (const Mat2& m : V) check(m, "V block");
        for (const Mat2& m : W) check(m, "W block");
    }
};

/// Closed-form shell transfer matrix for a 2x2 block V = (a,b;c,d):
/// (z^-1 (c - d b^-1 a), d b^-1; -b^-1 a, z b^-1).
inline Mat2 zipper_t_sharp(const Mat2& v, cplx z) {
    const cplx bi = 1.0 / v.a12;
    return {(v.a21 - v.a22 * bi * v.a11) / z, v.a22 * bi, -bi * v.a11, z * bi};
}

/// T_{z,0} of the zipper.
inline Mat2 zipper_t0(const PeriodicZipper& zp, cplx z) { return zipper_t_sharp(zp.V0, z); }

/// Transfer matrix over one period: T_z = T_{z,p} ... T_{z,1} with
/// T_{z,k} = T-sharp(V_k, z) * phi_flat(W_k).
inline Mat2 monodromy(const PeriodicZipper& zp, cplx z) {
    Mat2 t = Mat2::identity();
    for (int k = 0; k < zp.p; ++k)
        t = zipper_t_sharp(zp.V[static_cast<std::size_t>(k)], z) *
            phi_flat(zp.W[static_cast<std::size_t>(k)], tol::channel) * t;
    return t;
}

/// Real discriminant D(phi) = (Tr T_z)^2 / det T_z at z = e^{i phi};
/// bands are where D < 4.
inline double discriminant(const PeriodicZipper& zp, double phi) {
    const Mat2 t = monodromy(zp, std::polar(1.0, phi));
    const cplx tr = t.trace();
    const cplx d = tr * tr / t.det();
    if (std::abs(d.imag()) >= 1e-9 * std::max(std::abs(d.real()), 1.0))
        throw NonRealDiscriminant("discriminant: imaginary part above tolerance");
    return d.real();
}

struct Arc {
    double lo = 0.0;  // angles in [0, 2 pi); lo > hi means the arc wraps
    double hi = 0.0;

    bool contains(double phi) const {
        phi = std::fmod(phi, 2.0 * M_PI);
        if (phi < 0.0) phi += 2.0 * M_PI;
        return lo <= hi ? (phi > lo && phi < hi) : (phi > lo || phi < hi);
    }
    double length() const { return lo <= hi ? hi - lo : 2.0 * M_PI - lo + hi; }
};

struct EigenAngle {
    double angle = 0.0;
    double contraction = 0.0;  // |lambda_z| of the monodromy at the angle
};

struct BandSet {
    std::vector<Arc> arcs;             // open arcs where D < 4
    std::vector<double> edges;         // angles with D = 4
    std::vector<EigenAngle> point_spectrum;

    bool in_bands(double phi) const {
        for (const Arc& a : arcs)
            if (a.contains(phi)) return true;
        return false;
    }
    double distance_to_closure(double phi) const {
        if (in_bands(phi)) return 0.0;
        double d = std::numeric_limits<double>::infinity();
        for (double e : edges) {
            double gap = std::abs(std::remainder(phi - e, 2.0 * M_PI));
            d = std::min(d, gap);
        }
        return d;
    }
};

namespace detail {
inline double bisect_edge(const PeriodicZipper& zp, double a, double b, double fa,
                          double angle_tol) {
    // sign change of D - 4 on [a, b]
    while (b - a > angle_tol) {
        const double m = 0.5 * (a + b);
        const double fm = discriminant(zp, m) - 4.0;
        if ((fa <= 0.0) == (fm <= 0.0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

/// Stationary point of D on [a, b] via bisection on a central-difference
/// derivative; used for edges where D touches 4 without crossing.
inline double bisect_stationary(const PeriodicZipper& zp, double a, double b) {
    const double h = 1e-6;
    auto slope = [&](double phi) { return discriminant(zp, phi + h) - discriminant(zp, phi - h); };
    double fa = slope(a);
    if ((fa <= 0.0) == (slope(b) <= 0.0)) return 0.5 * (a + b);
    while (b - a > 1e-11) {
        const double m = 0.5 * (a + b);
        const double fm = slope(m);
        if ((fa <= 0.0) == (fm <= 0.0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}
}  // namespace detail

/// Band arcs and edges from sign changes of D - 4 on a scan grid, refined by
/// bisection. The grid doubles until the sign-change count stabilizes twice.
inline BandSet band_set(const PeriodicZipper& zp, int grid = 2048, double angle_tol = 1e-10) {
    if (grid < 256) throw std::invalid_argument("band_set: grid >= 256");
    int stable = 0;
    std::vector<double> edges;
    std::vector<double> vals;
    int g = grid;
    long prev_count = -1;
    for (; stable < 2 && g <= (1 << 22); g *= 2) {
        vals.assign(static_cast<std::size_t>(g), 0.0);
        const double h = 2.0 * M_PI / g;
        for (int i = 0; i < g; ++i)
            vals[static_cast<std::size_t>(i)] = discriminant(zp, i * h) - 4.0;
        long count = 0;
        edges.clear();
        std::vector<bool> crossing_cell(static_cast<std::size_t>(g), false);
        for (int i = 0; i < g; ++i) {
            const double fa = vals[static_cast<std::size_t>(i)];
            const double fb = vals[static_cast<std::size_t>((i + 1) % g)];
            if ((fa <= 0.0) != (fb <= 0.0)) {
                ++count;
                crossing_cell[static_cast<std::size_t>(i)] = true;
                edges.push_back(detail::bisect_edge(zp, i * h, (i + 1) * h, fa, angle_tol));
            }
        }
        // tangential edges: interior local maxima of D that reach 4 without
        // a sign change (band edges can merge pairwise)
        for (int i = 0; i < g; ++i) {
            const std::size_t im = static_cast<std::size_t>((i + g - 1) % g);
            const std::size_t ip = static_cast<std::size_t>((i + 1) % g);
            const double v = vals[static_cast<std::size_t>(i)];
            if (v > -1e-4 && v <= 0.0 && v >= vals[im] && v >= vals[ip] &&
                !crossing_cell[static_cast<std::size_t>(i)] && !crossing_cell[im]) {
                const double phi = detail::bisect_stationary(zp, (i - 1) * h, (i + 1) * h);
                if (discriminant(zp, phi) - 4.0 > -1e-8) {
                    ++count;
                    edges.push_back(std::fmod(phi + 2.0 * M_PI, 2.0 * M_PI));
                }
            }
        }
        stable = (count == prev_count) ? stable + 1 : 0;
        prev_count = count;
        if (stable >= 2) break;
    }
    std::sort(edges.begin(), edges.end());
    // merge near-duplicate edges (tangency split by roundoff)
    std::vector<double> merged;
    for (double e : edges) {
        if (!merged.empty() && e - merged.back() < 1e-8)
            merged.back() = 0.5 * (merged.back() + e);
        else
            merged.push_back(e);
    }
    edges = std::move(merged);

    BandSet bs;
    bs.edges = edges;
    if (edges.empty()) {
        // no crossings: the circle is entirely band or entirely gap
        if (discriminant(zp, 0.5 * (2.0 * M_PI / grid)) < 4.0) {
            bs.arcs.push_back({0.0, 2.0 * M_PI});
        } else {
            throw EmptyBandSet("band_set: discriminant >= 4 everywhere");
        }
        return bs;
    }
    const std::size_t m = edges.size();
    for (std::size_t i = 0; i < m; ++i) {
        const double lo = edges[i];
        const double hi = edges[(i + 1) % m];
        const double mid =
            (i + 1 < m) ? 0.5 * (lo + hi)
                        : std::fmod(0.5 * (lo + hi + 2.0 * M_PI), 2.0 * M_PI);
        if (discriminant(zp, mid) < 4.0) bs.arcs.push_back({lo, hi});
    }
    if (bs.arcs.empty()) throw EmptyBandSet("band_set: no arc between edges");
    return bs;
}

/// Zero-based model truncation of the zipper with N+1 shells.
inline OneChannelModel zipper_model(const PeriodicZipper& zp, int N) {
    ZipperSpec spec;
    spec.V.push_back(zp.V0);
    spec.W.push_back(Mat2::identity());  // placeholder, W[0] unused
    for (int n = 1; n <= N; ++n) {
        spec.V.push_back(zp.V[static_cast<std::size_t>((n - 1) % zp.p)]);
        spec.W.push_back(zp.W[static_cast<std::size_t>((n - 1) % zp.p)]);
    }
    return build_zipper(spec, zp.u);
}

/// Eigenvalues outside the bands: angles where the boundary solution seed
/// w_z = T_{z,0}(u;1) aligns with the contracting eigenvector of the
/// monodromy. Roots located through the wrapped phase difference of the two
/// isotropic directions; a root is accepted when |lambda| < 1 - margin.
inline std::vector<EigenAngle> point_spectrum(const PeriodicZipper& zp, const BandSet& bands,
                                              int scan_grid = 4096, double angle_tol = 1e-10,
                                              double margin = 1e-6) {
    auto phase_gap = [&](double phi) -> std::pair<bool, double> {
        const cplx z = std::polar(1.0, phi);
        const Mat2 t = monodromy(zp, z);
        U11Eigensystem es;
        try {
            es = u11_eigensystem(t);
        } catch (const NotU11&) {
            return {false, 0.0};
        }
        if (es.degenerate || std::abs(es.lambda) >= 1.0 - 1e-12) return {false, 0.0};
        const std::array<cplx, 2> w = zipper_t0(zp, z).apply(zp.u, 1.0);
        // both directions are isotropic (|v1| = |v2|); compare second/first phase
        const auto& vc = es.eigvec_plus;  // eigenvector of the contracting e^{i chi} lambda
        if (std::abs(w[0]) < 1e-14 || std::abs(vc[0]) < 1e-14) return {false, 0.0};
        const double s = std::arg((w[1] / w[0]) / (vc[1] / vc[0]));
        return {true, s};
    };

    std::vector<EigenAngle> found;
    const double h = 2.0 * M_PI / scan_grid;
    double prev_phi = -1.0, prev_s = 0.0;
    bool have_prev = false;
    for (int i = 0; i <= scan_grid; ++i) {
        const double phi = std::fmod(i * h, 2.0 * M_PI);
        if (bands.in_bands(phi) || bands.distance_to_closure(phi) < 4.0 * h) {
            have_prev = false;
            continue;
        }
        const auto [ok, s] = phase_gap(phi);
        if (!ok) {
            have_prev = false;
            continue;
        }
        if (have_prev && (s <= 0.0) != (prev_s <= 0.0) && std::abs(s - prev_s) < M_PI) {
            double a = prev_phi, b = i * h, fa = prev_s;
            while (b - a > angle_tol) {
                const double m = 0.5 * (a + b);
                const auto [okm, fm] = phase_gap(m);
                if (!okm) break;
                if ((fa <= 0.0) == (fm <= 0.0)) {
                    a = m;
                    fa = fm;
                } else {
                    b = m;
                }
            }
            const double root = 0.5 * (a + b);
            const Mat2 t = monodromy(zp, std::polar(1.0, root));
            const double lam = std::abs(u11_eigensystem(t).lambda);
            if (lam < 1.0 - margin) found.push_back({root, lam});
        }
        prev_phi = i * h;
        prev_s = s;
        have_prev = true;
    }
    return found;
}

struct MonodromyDiagonalization {
    Mat2 M;             // columns are unit eigenvectors
    Mat2 R;             // diagonal, unimodular inside the bands
    double conditioning = 0.0;  // ||M|| ||M^-1||
};

/// Diagonalize the monodromy strictly inside a band: M^-1 T M = R.
inline MonodromyDiagonalization diagonalize_monodromy(const PeriodicZipper& zp, double phi,
                                                      double edge_margin = 1e-6) {
    const double d = discriminant(zp, phi);
    if (!(d < 4.0 - edge_margin))
        throw NearBandEdge("diagonalize_monodromy: discriminant within margin of 4");
    const Mat2 t = monodromy(zp, std::polar(1.0, phi));
    const U11Eigensystem es = u11_eigensystem(t);
    const cplx eichi = std::exp(cplx(0.0, es.chi));
    MonodromyDiagonalization out;
    out.M = {es.eigvec_plus[0], es.eigvec_minus[0], es.eigvec_plus[1], es.eigvec_minus[1]};
    out.R = Mat2::diag(eichi * es.lambda, eichi / es.lambda);
    out.conditioning = out.M.op_norm() * out.M.inverse().op_norm();
    return out;
}

}  // namespace ocu

#endif
