#ifndef OCU_MODEL_HPP
#define OCU_MODEL_HPP

#include <cstddef>
#include <utility>
#include <vector>

#include "ocu/matn.hpp"

namespace ocu {

struct NonUnitaryCoin : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NonUnitaryBlock : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ShapeMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InvalidSiteChoice : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IndexOutOfRange : std::out_of_range {
    using std::out_of_range::out_of_range;
};

/// One radial shell: a unitary block V on C^size with two distinguished
/// channel directions (backward/forward modes) given as basis indices.
struct Shell {
    int size = 2;
    int index_minus = 0;
    int index_plus = 1;
    MatN V;

    Shell() = default;
    Shell(MatN v, int idx_minus, int idx_plus)
        : size(static_cast<int>(v.rows())), index_minus(idx_minus), index_plus(idx_plus),
          V(std::move(v)) {
        if (size < 2 || V.cols() != size)
            throw ShapeMismatch("Shell: block must be square of size >= 2");
        if (index_minus == index_plus || index_minus < 0 || index_plus < 0 ||
            index_minus >= size || index_plus >= size)
            throw ShapeMismatch("Shell: channel indices must be distinct and in range");
        if (unitary_defect(V) >= 1e-10)
            throw NonUnitaryBlock("Shell: V is not unitary to 1e-10");
    }

    /// Columns (e_minus, e_plus).
    MatN q() const {
        MatN q = MatN::Zero(size, 2);
        q(index_minus, 0) = 1.0;
        q(index_plus, 1) = 1.0;
        return q;
    }
};

/// Finite truncation of a one-channel unitary operator: shells 0..N, the
/// 2x2 connections W_n (n >= 1) and the left boundary phase u.
struct OneChannelModel {
    std::vector<Shell> shells;
    std::vector<Mat2> connections;  // connections[n-1] is W_n, n = 1..N
    cplx u{1.0, 0.0};

    int levels() const { return static_cast<int>(shells.size()); }

    const Shell& shell(int n) const {
        if (n < 0 || n >= levels()) throw IndexOutOfRange("shell index out of range");
        return shells[static_cast<std::size_t>(n)];
    }
    const Mat2& connection(int n) const {
        if (n < 1 || n >= levels()) throw IndexOutOfRange("connection index out of range");
        return connections[static_cast<std::size_t>(n - 1)];
    }

    int dimension_up_to(int N) const {
        int d = 0;
        for (int n = 0; n <= N; ++n) d += shell(n).size;
        return d;
    }
};

/// Size-2 scattering zipper data: V_n and W_n entries, all shells of size 2.
struct ZipperSpec {
    std::vector<Mat2> V;  // V[0] = V_0, ...
    std::vector<Mat2> W;  // W[0] unused placeholder alignment: W[n] = W_n for n >= 1
};

namespace detail {
inline void check_unitary2(const Mat2& m, const char* what) {
    if (unitary_defect2(m) >= 1e-10)
        throw NonUnitaryBlock(std::string(what) + " is not unitary to 1e-10");
}
}  // namespace detail

/// (A1) at level n: some power V^k with k in 1..k_max connects the backward
/// to the forward mode. k_max = |S_n| suffices: the coefficient sequence
/// lives in a Krylov space of dimension at most |S_n|.
inline bool validate_A1(const OneChannelModel& model, int n, int k_max = -1,
                        double tol_zero = tol::channel) {
    const Shell& s = model.shell(n);
    if (k_max < 1) k_max = s.size;
    VecN v = VecN::Zero(s.size);
    v(s.index_minus) = 1.0;
    for (int k = 1; k <= k_max; ++k) {
        v = s.V * v;
        if (std::abs(v(s.index_plus)) > tol_zero) return true;
    }
    return false;
}

/// (A2) at level n >= 1: the channel entry b_n (upper-right entry of W_n in
/// the (e_{(n-1,+)}, e_{(n,-)}) basis) is nonzero.
inline bool validate_A2(const OneChannelModel& model, int n, double tol_zero = tol::channel) {
    return std::abs(model.connection(n).a12) > tol_zero;
}

inline bool validate_all(const OneChannelModel& model) {
    for (int n = 0; n < model.levels(); ++n)
        if (!validate_A1(model, n)) return false;
    for (int n = 1; n < model.levels(); ++n)
        if (!validate_A2(model, n)) return false;
    return true;
}

/// Half-line quantum walk: shells {(n,up),(n,down)}, e_minus = up, e_plus = down,
/// W_n = swap and V_n = swap * C_n.
inline OneChannelModel build_qw1d(const std::vector<Mat2>& coins, cplx u = 1.0) {
    OneChannelModel m;
    m.u = u;
    const Mat2 sw = Mat2::swap();
    for (std::size_t n = 0; n < coins.size(); ++n) {
        if (unitary_defect2(coins[n]) >= 1e-10)
            throw NonUnitaryCoin("build_qw1d: coin " + std::to_string(n) + " is not unitary");
        m.shells.emplace_back(to_matn(sw * coins[n]), 0, 1);
        if (n >= 1) m.connections.push_back(sw);
    }
    return m;
}

/// Coins of a quantum-walk model, inverse of build_qw1d.
inline std::vector<Mat2> extract_coins(const OneChannelModel& m) {
    std::vector<Mat2> coins;
    for (const Shell& s : m.shells) coins.push_back(Mat2::swap() * to_mat2(s.V));
    return coins;
}

/// Generalized one-channel quantum walk (carbon-chain type): shell n carries a
/// coin C_n of size |S_n| and V_n = S_n C_n with S_n the in-shell swap of the
/// designated up/down orbitals. e_minus = up, e_plus = down; W_n = swap.
inline OneChannelModel build_generalized_qw(const std::vector<MatN>& coins,
                                            const std::vector<std::pair<int, int>>& up_down,
                                            cplx u = 1.0) {
    if (coins.size() != up_down.size())
        throw ShapeMismatch("build_generalized_qw: coins and index pairs must align");
    OneChannelModel m;
    m.u = u;
    for (std::size_t n = 0; n < coins.size(); ++n) {
        const MatN& c = coins[n];
        const int sz = static_cast<int>(c.rows());
        const auto [up, down] = up_down[n];
        if (sz < 2 || c.cols() != sz)
            throw ShapeMismatch("build_generalized_qw: coin must be square of size >= 2");
        if (up == down || up < 0 || down < 0 || up >= sz || down >= sz)
            throw ShapeMismatch("build_generalized_qw: orbital indices invalid");
        if (unitary_defect(c) >= 1e-10)
            throw NonUnitaryCoin("build_generalized_qw: coin " + std::to_string(n) +
                                 " is not unitary");
        MatN s = MatN::Identity(sz, sz);
        s(up, up) = 0.0;
        s(down, down) = 0.0;
        s(up, down) = 1.0;
        s(down, up) = 1.0;
        m.shells.emplace_back(MatN(s * c), up, down);
        if (n >= 1) m.connections.push_back(Mat2::swap());
    }
    return m;
}

/// Scattering zipper: all shells of size 2.
inline OneChannelModel build_zipper(const ZipperSpec& spec, cplx u = 1.0) {
    if (spec.V.empty()) return {};
    if (spec.W.size() != spec.V.size())
        throw ShapeMismatch("build_zipper: V and W sequences must have equal length");
    OneChannelModel m;
    m.u = u;
    for (std::size_t n = 0; n < spec.V.size(); ++n) {
        detail::check_unitary2(spec.V[n], "build_zipper: V block");
        m.shells.emplace_back(to_matn(spec.V[n]), 0, 1);
        if (n >= 1) {
            detail::check_unitary2(spec.W[n], "build_zipper: W block");
            m.connections.push_back(spec.W[n]);
        }
    }
    return m;
}

// ---------------------------------------------------------------------------
// Stroboscopic model on Z^2: shell n is the square ring at sup-distance
// n + 1/2 from (-1/2,-1/2); V_n shifts the ring clockwise (n even) or
// counter-clockwise (n odd).

struct Site {
    int x = 0;
    int y = 0;
    friend bool operator==(const Site&, const Site&) = default;
};

inline int strobo_shell_size(int n) { return 4 * (2 * n + 1); }

/// Sites of ring n, enumerated counter-clockwise from (n, -n-1).
inline std::vector<Site> strobo_ring(int n) {
    std::vector<Site> ring;
    ring.reserve(static_cast<std::size_t>(strobo_shell_size(n)));
    for (int l = -n - 1; l <= n; ++l) ring.push_back({n, l});        // right edge, going up
    for (int l = n - 1; l >= -n - 1; --l) ring.push_back({l, n});    // top edge, going left
    for (int l = n - 1; l >= -n - 1; --l) ring.push_back({-n - 1, l});  // left edge, down
    for (int l = -n; l <= n - 1; ++l) ring.push_back({l, -n - 1});   // bottom edge, right
    return ring;
}

inline bool strobo_on_ring(int n, const Site& s) {
    const double dx = s.x + 0.5, dy = s.y + 0.5;
    return std::max(std::abs(dx), std::abs(dy)) == n + 0.5;
}

/// The default channel sites: a_{2n} = (-2n,0), a_{2n+1} = (2n,0),
/// b_{2n} = (-2n-1,0), b_{2n+1} = (2n+1,0).
inline Site strobo_default_a(int n) {
    return (n % 2 == 0) ? Site{-n, 0} : Site{n - 1, 0};
}
inline Site strobo_default_b(int n) {
    return (n % 2 == 0) ? Site{-n - 1, 0} : Site{n, 0};
}

/// Stroboscopic one-channel model up to shell n_max. W blocks are tiled from
/// w_seq; ab_sites, when given, holds (a_n, b_n) for n = 1..n_max with
/// b_0 = second element of ab_sites[0] paired with a placeholder a_0.
inline OneChannelModel build_stroboscopic(int n_max, const std::vector<Mat2>& w_seq,
                                          const std::vector<std::pair<Site, Site>>& ab_sites = {},
                                          cplx u = 1.0) {
    if (n_max < 0) throw InvalidSiteChoice("build_stroboscopic: n_max must be >= 0");
    auto a_of = [&](int n) { return ab_sites.empty() ? strobo_default_a(n) : ab_sites[n].first; };
    auto b_of = [&](int n) { return ab_sites.empty() ? strobo_default_b(n) : ab_sites[n].second; };
    if (!ab_sites.empty() && static_cast<int>(ab_sites.size()) < n_max + 2)
        throw InvalidSiteChoice("build_stroboscopic: need a/b sites for n = 0..n_max+1");

    OneChannelModel m;
    m.u = u;
    for (int n = 0; n <= n_max; ++n) {
        const auto ring = strobo_ring(n);
        const int sz = strobo_shell_size(n);
        auto index_of = [&](const Site& s) {
            for (int i = 0; i < sz; ++i)
                if (ring[static_cast<std::size_t>(i)] == s) return i;
            throw InvalidSiteChoice("build_stroboscopic: site not on ring " + std::to_string(n));
        };
        // channel sites on this shell: minus at b_n, plus at a_{n+1}
        const Site bn = b_of(n);
        const Site an1 = a_of(n + 1);
        if (!strobo_on_ring(n, bn) || !strobo_on_ring(n, an1))
            throw InvalidSiteChoice("build_stroboscopic: channel site off its ring");
        if (an1 == bn)
            throw InvalidSiteChoice("build_stroboscopic: a_{n+1} must differ from b_n");
        if (n >= 1) {
            const Site an = a_of(n);
            if (std::max(std::abs(an.x - bn.x), std::abs(an.y - bn.y)) != 1)
                throw InvalidSiteChoice("build_stroboscopic: ||a_n - b_n||_inf must be 1");
        }
        // ring shift permutation: counter-clockwise enumeration, so the
        // counter-clockwise shift maps ring[i] -> ring[i+1]
        MatN v = MatN::Zero(sz, sz);
        for (int i = 0; i < sz; ++i) {
            const int j = (n % 2 == 1) ? (i + 1) % sz : (i + sz - 1) % sz;
            v(j, i) = 1.0;
        }
        m.shells.emplace_back(std::move(v), index_of(bn), index_of(an1));
        if (n >= 1) {
            if (w_seq.empty()) throw InvalidSiteChoice("build_stroboscopic: empty W sequence");
            const Mat2& w = w_seq[static_cast<std::size_t>(n - 1) % w_seq.size()];
            detail::check_unitary2(w, "build_stroboscopic: W block");
            m.connections.push_back(w);
        }
    }
    return m;
}

}  // namespace ocu

#endif
