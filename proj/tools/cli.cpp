#include <chrono>
#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "ocu/config.hpp"
#include "ocu/csv.hpp"
#include "ocu/random.hpp"
#include "ocu/selftest.hpp"

namespace {

constexpr const char* kVersion = "ocu 1.0.0";

std::string file_digest(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ocu::ConfigError("cannot open " + path);
    std::uint64_t h = 1469598103934665603ull;  // FNV-1a
    char c;
    while (f.get(c)) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void write_manifest(const std::string& out_base, const std::string& command,
                    const std::string& config_path, std::uint64_t seed, int grid,
                    double wall_seconds) {
    ocu::json m;
    m["command"] = command;
    m["config_digest"] = config_path.empty() ? "" : file_digest(config_path);
    m["seed"] = seed;
    m["grid"] = grid;
    m["tool_version"] = kVersion;
    m["wall_time_s"] = wall_seconds;
    std::ofstream f(out_base + ".manifest.json", std::ios::binary);
    if (!f) throw ocu::IoError("cannot write manifest for " + out_base);
    f << m.dump(2) << "\n";
}

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

int run_density(const std::string& config_path, int n, int grid, const std::string& out) {
    const Timer timer;
    const ocu::json cfg = ocu::load_json(config_path);
    ocu::OneChannelModel model = ocu::config_model(cfg);
    if (n < 0) n = model.levels() - 1;
    if (n >= model.levels())
        throw ocu::ConfigError("density: --n exceeds n_shells - 1");
    for (int k = 0; k <= n; ++k)
        if (!ocu::validate_A1(model, k))
            throw ocu::SingularResolvent("density: (A1) fails at level " + std::to_string(k));
    for (int k = 1; k <= n; ++k)
        if (!ocu::validate_A2(model, k))
            throw ocu::SingularResolvent("density: (A2) fails at level " + std::to_string(k));
    const ocu::DensityGrid dg = ocu::carmona_density(model, model.u, n, grid);
    ocu::CsvWriter csv({"phi", "density", "masked"});
    for (std::size_t i = 0; i < dg.size(); ++i)
        csv.row({ocu::format_double(dg.angles[i]),
                 dg.masked[i] ? "" : ocu::format_double(dg.values[i]),
                 dg.masked[i] ? "1" : "0"});
    csv.save(out + ".csv");
    write_manifest(out, "density", config_path,
                   cfg.contains("seed") ? cfg.at("seed").get<std::uint64_t>() : 0, grid,
                   timer.seconds());
    return 0;
}

int run_bands(const std::string& config_path, int grid, const std::string& out) {
    const Timer timer;
    const ocu::json cfg = ocu::load_json(config_path);
    if (!cfg.contains("type") || cfg.at("type").get<std::string>() != "zipper")
        throw ocu::ConfigError("bands require zipper");
    const ocu::PeriodicZipper zp = ocu::config_zipper(cfg);
    ocu::BandSet bs = ocu::band_set(zp, grid);
    bs.point_spectrum = ocu::point_spectrum(zp, bs);
    ocu::CsvWriter arcs({"arc_start", "arc_end"});
    for (const ocu::Arc& a : bs.arcs)
        arcs.row({ocu::format_double(a.lo), ocu::format_double(a.hi)});
    arcs.save(out + ".csv");
    ocu::CsvWriter pts({"eig_angle", "contraction"});
    for (const ocu::EigenAngle& e : bs.point_spectrum)
        pts.row({ocu::format_double(e.angle), ocu::format_double(e.contraction)});
    pts.save(out + "_points.csv");
    write_manifest(out, "bands", config_path, 0, grid, timer.seconds());
    return 0;
}

int run_ensemble(const std::string& config_path, double alpha, double c, int samples,
                 double phi, std::vector<int> periods, std::uint64_t seed,
                 const std::string& out) {
    const Timer timer;
    const ocu::json cfg = ocu::load_json(config_path);
    if (!cfg.contains("type") || cfg.at("type").get<std::string>() != "zipper")
        throw ocu::ConfigError("ensemble requires a zipper base");
    if (!(alpha > 0.5)) throw ocu::ConfigError("(C2) requires alpha > 1/2");
    ocu::EnsembleConfig ec;
    ec.base = ocu::config_zipper(cfg);
    ec.alpha = alpha;
    ec.c = c;
    ec.realizations = samples;
    ec.master_seed = seed;
    if (periods.empty()) periods = {25, 50, 100};
    const std::vector<ocu::MomentPoint> curve =
        ocu::fourth_moment_curve(ec, phi, periods, samples);
    ocu::CsvWriter csv({"n", "moment4", "stderr"});
    for (const ocu::MomentPoint& p : curve)
        csv.row({std::to_string(p.n_periods), ocu::format_double(p.moment4),
                 ocu::format_double(p.stderr_)});
    csv.save(out + ".csv");
    write_manifest(out, "ensemble", config_path, seed, static_cast<int>(periods.size()),
                   timer.seconds());
    return 0;
}

int run_selftest(const std::string& scale, const std::string& report_path) {
    const Timer timer;
    const std::vector<ocu::SuiteResult> results = ocu::selftest::run_all(scale == "full");
    ocu::json report;
    report["scale"] = scale;
    bool all_ok = true;
    for (const ocu::SuiteResult& r : results) {
        ocu::json jr;
        jr["name"] = r.name;
        jr["passed"] = r.passed;
        jr["worst_defect"] = r.worst;
        jr["detail"] = r.detail;
        report["suites"].push_back(jr);
        all_ok = all_ok && r.passed;
        std::printf("%-20s %s (worst %.3e)\n", r.name.c_str(), r.passed ? "pass" : "FAIL",
                    r.worst);
    }
    report["passed"] = all_ok;
    report["wall_time_s"] = timer.seconds();
    if (!report_path.empty()) {
        std::ofstream f(report_path, std::ios::binary);
        f << report.dump(2) << "\n";
    } else {
        std::printf("%s\n", report.dump().c_str());
    }
    return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"One-channel unitary operators: densities, bands, ensembles"};
    app.set_version_flag("--version", kVersion);
    int threads = 0;
    app.add_option("--threads", threads, "worker thread cap (0 = library default)")
        ->envname("OCU_THREADS");

    auto* density = app.add_subcommand("density", "spectral density sweep");
    std::string d_config, d_out = "density";
    int d_n = -1, d_grid = 4096;
    density->add_option("config", d_config, "model config JSON")->required();
    density->add_option("--n", d_n, "transfer depth (default: n_shells - 1)");
    density->add_option("--grid", d_grid, "angle grid size");
    density->add_option("--out", d_out, "output base name");

    auto* bands = app.add_subcommand("bands", "band arcs and point spectrum");
    std::string b_config, b_out = "bands";
    int b_grid = 2048;
    bands->add_option("config", b_config, "zipper config JSON")->required();
    bands->add_option("--grid", b_grid, "scan grid size");
    bands->add_option("--out", b_out, "output base name");

    auto* ensemble = app.add_subcommand("ensemble", "fourth-moment stability curve");
    std::string e_config, e_out = "ensemble";
    double e_alpha = 1.0, e_c = 0.1, e_phi = M_PI / 2;
    int e_samples = 100;
    std::vector<int> e_periods;
    std::uint64_t e_seed = 1;
    ensemble->add_option("config", e_config, "zipper config JSON")->required();
    ensemble->add_option("--alpha", e_alpha, "decay exponent (> 1/2)");
    ensemble->add_option("--c", e_c, "perturbation amplitude");
    ensemble->add_option("--samples", e_samples, "Monte-Carlo sample count");
    ensemble->add_option("--phi", e_phi, "in-band angle");
    ensemble->add_option("--periods", e_periods, "period counts to report");
    ensemble->add_option("--seed", e_seed, "master seed");
    ensemble->add_option("--out", e_out, "output base name");

    auto* selftest = app.add_subcommand("selftest", "run the oracle suites");
    std::string s_scale = "small", s_report;
    selftest->add_option("--scale", s_scale, "small or full")
        ->check(CLI::IsMember({"small", "full"}));
    selftest->add_option("--report", s_report, "JSON report path");

    app.require_subcommand(1);
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    if (threads > 0) Eigen::setNbThreads(threads);

    try {
        if (density->parsed()) return run_density(d_config, d_n, d_grid, d_out);
        if (bands->parsed()) return run_bands(b_config, b_grid, b_out);
        if (ensemble->parsed())
            return run_ensemble(e_config, e_alpha, e_c, e_samples, e_phi, e_periods, e_seed,
                                e_out);
        if (selftest->parsed()) return run_selftest(s_scale, s_report);
    } catch (const ocu::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "numeric error: %s\n", e.what());
        return 3;
    }
    return 2;
}
