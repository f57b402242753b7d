#ifndef OCU_RANDOM_HPP
#define OCU_RANDOM_HPP

#include <cstdint>
#include <vector>

#include "ocu/periodic.hpp"
#include "ocu/spectrum.hpp"

namespace ocu {

struct C3Violation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace rng {

/// SplitMix64 finalizer; used as a counter-based generator so that streams
/// keyed by (seed, realization, level, tag) are independent by construction.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

struct Stream {
    std::uint64_t key = 0;
    std::uint64_t counter = 0;

    Stream(std::uint64_t seed, std::uint64_t realization, std::uint64_t level,
           std::uint64_t tag) {
        key = mix64(seed);
        key = mix64(key ^ realization);
        key = mix64(key ^ level);
        key = mix64(key ^ tag);
    }

    std::uint64_t next_u64() { return mix64(key + 0x9e3779b97f4a7c15ull * counter++); }

    /// Uniform on [-1, 1].
    double next_symmetric() {
        return static_cast<double>(next_u64() >> 11) * (2.0 / 9007199254740992.0) - 1.0;
    }
};

}  // namespace rng

/// Skew-Hermitian generator i (v . sigma) from three real parameters,
/// rescaled to operator norm <= 1.
inline Mat2 skew_generator(double v1, double v2, double v3) {
    const double rho = std::sqrt(v1 * v1 + v2 * v2 + v3 * v3);
    if (rho > 1.0) {
        v1 /= rho;
        v2 /= rho;
        v3 /= rho;
    }
    return {cplx(0.0, v3), cplx(v2, v1), cplx(-v2, v1), cplx(0.0, -v3)};
}

/// exp(gamma A) for A = i (v . sigma): cos(gamma rho) I + sin(gamma rho)/rho (v . sigma) i.
/// Exact closed form, so the result is unitary to roundoff.
inline Mat2 exp_skew(const Mat2& a, double gamma) {
    const double v3 = a.a11.imag(), v1 = a.a12.imag(), v2 = a.a12.real();
    const double rho = std::sqrt(v1 * v1 + v2 * v2 + v3 * v3);
    if (rho == 0.0) return Mat2::identity();
    const double cg = std::cos(gamma * rho), sg = std::sin(gamma * rho) / rho;
    return Mat2::identity() * cg + a * sg;
}

/// Random ensemble over a periodic zipper: blocks V_n exp(gamma_n A_n) and
/// W_n exp(gamma_n B_n) with gamma_n = c (n+1)^{-alpha} and independent
/// bounded skew-Hermitian generators.
struct EnsembleConfig {
    PeriodicZipper base;
    double alpha = 1.0;
    double c = 0.0;
    int realizations = 0;
    std::uint64_t master_seed = 0;
    int n_max = 0;  // highest shell level sampled

    /// Square-summability of the decay sequence, required for ensembles
    /// exposed through the command line; control runs may relax it.
    bool summable() const { return alpha > 0.5; }
};

inline double decay_gamma(const EnsembleConfig& cfg, int n) {
    return cfg.c * std::pow(static_cast<double>(n + 1), -cfg.alpha);
}

/// Channel-entry floor of the base blocks; sampled blocks must stay above
/// half of it.
inline double channel_floor(const PeriodicZipper& zp) {
    double eps = std::abs(zp.V0.a12);
    for (const Mat2& m : zp.V) eps = std::min(eps, std::abs(m.a12));
    for (const Mat2& m : zp.W) eps = std::min(eps, std::abs(m.a12));
    return eps;
}

namespace detail {
inline Mat2 sample_block(const Mat2& base, double gamma, double floor_half,
                         rng::Stream& stream) {
    for (int attempt = 0; attempt < 100; ++attempt) {
        const double v1 = stream.next_symmetric();
        const double v2 = stream.next_symmetric();
        const double v3 = stream.next_symmetric();
        const Mat2 g = skew_generator(v1, v2, v3);
        const Mat2 sampled = base * exp_skew(g, gamma);
        if (std::abs(sampled.a12) >= floor_half) return sampled;
    }
    throw C3Violation("sample_block: channel entry below floor after 100 resamples");
}
}  // namespace detail

/// One realization of the perturbed half-line model, shells 0..n_max.
/// Streams are keyed by (seed, realization, level, block tag), so block
/// families at distinct levels are independent and reproducible.
inline OneChannelModel sample_model(const EnsembleConfig& cfg, int realization) {
    if (cfg.alpha < 0.0 || cfg.c < 0.0)
        throw std::invalid_argument("sample_model: alpha and c must be nonnegative");
    const double floor_half = 0.5 * channel_floor(cfg.base);
    ZipperSpec spec;
    const auto base_v = [&](int n) -> const Mat2& {
        return n == 0 ? cfg.base.V0 : cfg.base.V[static_cast<std::size_t>((n - 1) % cfg.base.p)];
    };
    const auto base_w = [&](int n) -> const Mat2& {
        return cfg.base.W[static_cast<std::size_t>((n - 1) % cfg.base.p)];
    };
    for (int n = 0; n <= cfg.n_max; ++n) {
        const double gamma = decay_gamma(cfg, n);
        rng::Stream sv(cfg.master_seed, static_cast<std::uint64_t>(realization),
                       static_cast<std::uint64_t>(n), 1);
        spec.V.push_back(cfg.c == 0.0 ? base_v(n)
                                      : detail::sample_block(base_v(n), gamma, floor_half, sv));
        if (n == 0) {
            spec.W.push_back(Mat2::identity());  // placeholder, W[0] unused
        } else {
            rng::Stream sw(cfg.master_seed, static_cast<std::uint64_t>(realization),
                           static_cast<std::uint64_t>(n), 2);
            spec.W.push_back(cfg.c == 0.0
                                 ? base_w(n)
                                 : detail::sample_block(base_w(n), gamma, floor_half, sw));
        }
    }
    return build_zipper(spec, cfg.base.u);
}

struct MomentPoint {
    int n_periods = 0;
    double moment4 = 0.0;
    double stderr_ = 0.0;
};

/// Monte-Carlo fourth moments E ||M^-1 T-hat_{z,[0,np]} M||^4 at z = e^{i phi}
/// strictly inside a band, with M diagonalizing the base monodromy. Bounded
/// curves are the stability signature; growth signals localization.
inline std::vector<MomentPoint> fourth_moment_curve(const EnsembleConfig& cfg, double phi,
                                                    const std::vector<int>& n_periods_list,
                                                    int samples) {
    if (n_periods_list.empty() || samples < 1)
        throw std::invalid_argument("fourth_moment_curve: need levels and samples");
    std::vector<int> levels_sorted(n_periods_list);
    std::sort(levels_sorted.begin(), levels_sorted.end());
    const MonodromyDiagonalization diag = diagonalize_monodromy(cfg.base, phi);
    const Mat2 minv = diag.M.inverse();
    const cplx z = std::polar(1.0, phi);
    const int max_np = levels_sorted.back();
    const int need_shells = max_np * cfg.base.p;
    EnsembleConfig local = cfg;
    local.n_max = std::max(cfg.n_max, need_shells);

    std::vector<std::vector<double>> draws(levels_sorted.size());
    for (auto& d : draws) d.reserve(static_cast<std::size_t>(samples));
    for (int r = 0; r < samples; ++r) {
        const OneChannelModel model = sample_model(local, r);
        Mat2 acc = Mat2::identity();
        int level = 0;
        for (std::size_t j = 0; j < levels_sorted.size(); ++j) {
            const int target = levels_sorted[j] * cfg.base.p;
            for (; level <= target; ++level) acc = transfer_step(model, level, z) * acc;
            const double nrm = (minv * acc * diag.M).op_norm();
            draws[j].push_back(nrm * nrm * nrm * nrm);
        }
    }
    std::vector<MomentPoint> out;
    for (std::size_t j = 0; j < levels_sorted.size(); ++j) {
        double mean = 0.0;
        for (double v : draws[j]) mean += v;
        mean /= samples;
        double var = 0.0;
        for (double v : draws[j]) var += (v - mean) * (v - mean);
        var = (samples > 1) ? var / (samples - 1) : 0.0;
        out.push_back({levels_sorted[j], mean, std::sqrt(var / samples)});
    }
    return out;
}

/// Carmona density of one sampled realization.
inline DensityGrid perturbed_density(const EnsembleConfig& cfg, int realization, cplx u,
                                     int n, int grid_size = 4096) {
    OneChannelModel model = sample_model(cfg, realization);
    model.u = u;
    return carmona_density(model, u, n, grid_size);
}

}  // namespace ocu

#endif
