#ifndef OCU_CONFIG_HPP
#define OCU_CONFIG_HPP

#include <fstream>
#include <string>

#include <json.hpp>

#include "ocu/haar.hpp"
#include "ocu/model.hpp"
#include "ocu/periodic.hpp"

namespace ocu {

using json = nlohmann::json;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Complex numbers are [re, im] pairs throughout the config schema.
inline cplx parse_complex(const json& j) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw ConfigError("complex value must be a [re, im] pair");
    return {j[0].get<double>(), j[1].get<double>()};
}

/// 2x2 block as a flat row-major list of four [re, im] pairs.
inline Mat2 parse_mat2(const json& j) {
    if (!j.is_array() || j.size() != 4)
        throw ConfigError("2x2 block must be a flat list of four complex entries");
    return {parse_complex(j[0]), parse_complex(j[1]), parse_complex(j[2]), parse_complex(j[3])};
}

/// Square matrix as a list of rows of [re, im] pairs.
inline MatN parse_matn(const json& j) {
    if (!j.is_array() || j.empty()) throw ConfigError("matrix must be a list of rows");
    const int n = static_cast<int>(j.size());
    MatN m(n, n);
    for (int i = 0; i < n; ++i) {
        if (!j[i].is_array() || static_cast<int>(j[i].size()) != n)
            throw ConfigError("matrix rows must all have the matrix dimension");
        for (int k = 0; k < n; ++k) m(i, k) = parse_complex(j[i][k]);
    }
    return m;
}

inline json load_json(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file " + path);
    json j;
    try {
        f >> j;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return j;
}

namespace detail {

inline cplx config_u(const json& j) {
    return j.contains("u") ? parse_complex(j.at("u")) : cplx(1.0);
}

inline Mat2 theta_block(double theta) {
    const double c = std::cos(theta), s = std::sin(theta);
    return {c, s, s, -c};
}

inline Mat2 haar_channel_block(rng::Stream& s) {
    for (int k = 0; k < 64; ++k) {
        const Mat2 m = haar_u2(s);
        if (std::abs(m.a12) > 0.05) return m;
    }
    throw ConfigError("could not draw a block with open channel");
}

}  // namespace detail

/// Periodic zipper data of a "zipper" config. Fields: "period" (defaults to
/// the block-list length), "blocks": {"V": [...], "W": [...], "V0": ...}
/// with V0 defaulting to V[0]; or "theta" for the one-parameter reflection
/// family; or "seed" for Haar-random blocks.
inline PeriodicZipper config_zipper(const json& j) {
    const cplx u = detail::config_u(j);
    if (j.contains("theta")) {
        const double theta = j.at("theta").get<double>();
        const Mat2 v = detail::theta_block(theta);
        return {{v}, {Mat2::swap()}, v, u};
    }
    if (j.contains("blocks")) {
        const json& b = j.at("blocks");
        if (!b.is_object() || !b.contains("V") || !b.contains("W"))
            throw ConfigError("zipper blocks must hold V and W lists");
        std::vector<Mat2> v, w;
        for (const json& e : b.at("V")) v.push_back(parse_mat2(e));
        for (const json& e : b.at("W")) w.push_back(parse_mat2(e));
        if (v.empty() || v.size() != w.size())
            throw ConfigError("zipper needs equal nonempty V and W lists");
        const Mat2 v0 = b.contains("V0") ? parse_mat2(b.at("V0")) : v.front();
        return {std::move(v), std::move(w), v0, u};
    }
    if (j.contains("seed")) {
        const int p = j.contains("period") ? j.at("period").get<int>() : 1;
        if (p < 1) throw ConfigError("period must be >= 1");
        rng::Stream s(j.at("seed").get<std::uint64_t>(), 0, 0, 7);
        std::vector<Mat2> v, w;
        for (int k = 0; k < p; ++k) {
            v.push_back(detail::haar_channel_block(s));
            w.push_back(detail::haar_channel_block(s));
        }
        const Mat2 v0 = detail::haar_channel_block(s);
        return {std::move(v), std::move(w), v0, u};
    }
    throw ConfigError("zipper config needs blocks, theta, or seed");
}

/// Half-line model of any config type. "n_shells" sets the truncation; block
/// lists shorter than that are tiled periodically.
inline OneChannelModel config_model(const json& j) {
    if (!j.contains("type") || !j.at("type").is_string())
        throw ConfigError("config needs a type string");
    const std::string type = j.at("type").get<std::string>();
    if (!j.contains("n_shells")) throw ConfigError("config needs n_shells");
    const int n_shells = j.at("n_shells").get<int>();
    if (n_shells < 1) throw ConfigError("n_shells must be >= 1");
    const cplx u = detail::config_u(j);

    if (type == "qw1d") {
        std::vector<Mat2> coins;
        if (j.contains("blocks")) {
            for (const json& e : j.at("blocks")) coins.push_back(parse_mat2(e));
            if (coins.empty()) throw ConfigError("qw1d needs at least one coin");
        } else if (j.contains("seed")) {
            rng::Stream s(j.at("seed").get<std::uint64_t>(), 0, 0, 5);
            const int p = j.contains("period") ? j.at("period").get<int>() : n_shells;
            for (int k = 0; k < p; ++k) coins.push_back(detail::haar_channel_block(s));
        } else {
            throw ConfigError("qw1d config needs blocks or seed");
        }
        std::vector<Mat2> tiled;
        for (int n = 0; n < n_shells; ++n) tiled.push_back(coins[n % coins.size()]);
        return build_qw1d(tiled, u);
    }
    if (type == "zipper") {
        PeriodicZipper zp = config_zipper(j);
        ZipperSpec spec;
        spec.V.push_back(zp.V0);
        spec.W.push_back(Mat2::identity());
        for (int n = 1; n < n_shells; ++n) {
            spec.V.push_back(zp.V[static_cast<std::size_t>((n - 1) % zp.p)]);
            spec.W.push_back(zp.W[static_cast<std::size_t>((n - 1) % zp.p)]);
        }
        return build_zipper(spec, u);
    }
    if (type == "carbon") {
        if (!j.contains("blocks")) throw ConfigError("carbon config needs blocks");
        std::vector<MatN> coins;
        std::vector<std::pair<int, int>> ud;
        for (const json& e : j.at("blocks")) {
            if (!e.is_object() || !e.contains("coin") || !e.contains("up") || !e.contains("down"))
                throw ConfigError("carbon block needs coin, up, down");
            coins.push_back(parse_matn(e.at("coin")));
            ud.emplace_back(e.at("up").get<int>(), e.at("down").get<int>());
        }
        if (coins.empty()) throw ConfigError("carbon needs at least one block");
        std::vector<MatN> tc;
        std::vector<std::pair<int, int>> tu;
        for (int n = 0; n < n_shells; ++n) {
            tc.push_back(coins[n % coins.size()]);
            tu.push_back(ud[n % ud.size()]);
        }
        return build_generalized_qw(tc, tu, u);
    }
    if (type == "stroboscopic") {
        std::vector<Mat2> w_seq;
        if (j.contains("blocks"))
            for (const json& e : j.at("blocks")) w_seq.push_back(parse_mat2(e));
        if (w_seq.empty()) w_seq.push_back(Mat2::swap());
        return build_stroboscopic(n_shells - 1, w_seq, {}, u);
    }
    throw ConfigError("unknown model type: " + type);
}

}  // namespace ocu

#endif
