#include "cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "fiberchan/capacity.hpp"
#include "fiberchan/chsh.hpp"
#include "fiberchan/interferometer.hpp"
#include "fiberchan/stats.hpp"
#include "fiberchan/tomography.hpp"

namespace fiberchan::cli {

namespace {

using nlohmann::json;

constexpr std::uint64_t kDefaultSeed = 12345;

// ---- config helpers -------------------------------------------------------

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ConfigError(path + ": expected an object");
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed)
            if (key == a) ok = true;
        if (!ok) throw ConfigError(path + "." + key + ": unknown key");
    }
}

double get_number(const json& obj, const std::string& path, const char* key,
                  std::optional<double> fallback = std::nullopt) {
    if (!obj.contains(key)) {
        if (fallback) return *fallback;
        throw ConfigError(path + "." + key + ": required field missing");
    }
    const json& v = obj.at(key);
    if (!v.is_number()) throw ConfigError(path + "." + key + ": expected a number");
    return v.get<double>();
}

bool get_bool(const json& obj, const std::string& path, const char* key, bool fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_boolean()) throw ConfigError(path + "." + key + ": expected a boolean");
    return v.get<bool>();
}

std::string get_mode(const json& cfg) {
    if (!cfg.is_object()) throw ConfigError("config: expected a JSON object");
    if (!cfg.contains("mode")) throw ConfigError("config.mode: required field missing");
    if (!cfg.at("mode").is_string()) throw ConfigError("config.mode: expected a string");
    return cfg.at("mode").get<std::string>();
}

FiberParams get_fiber(const json& cfg, const std::string& path, const char* key) {
    if (!cfg.contains(key)) throw ConfigError(path + "." + key + ": required field missing");
    const json& f = cfg.at(key);
    const std::string p = path + "." + key;
    check_keys(f, p, {"length_m", "delta_n", "common_delay_s"});
    FiberParams out;
    out.length_m = get_number(f, p, "length_m");
    out.delta_n = get_number(f, p, "delta_n", 3.5e-4);
    out.common_delay_s = get_number(f, p, "common_delay_s", 0.0);
    out.validate();
    return out;
}

ScanGrid get_grid(const json& cfg, const std::string& path) {
    ScanGrid g;
    if (!cfg.contains("grid")) return g;
    const json& j = cfg.at("grid");
    const std::string p = path + ".grid";
    check_keys(j, p, {"lambda0_step", "theta_step", "phi_step"});
    g.lambda0_step = get_number(j, p, "lambda0_step", g.lambda0_step);
    g.theta_step = get_number(j, p, "theta_step", g.theta_step);
    g.phi_step = get_number(j, p, "phi_step", g.phi_step);
    g.validate();
    return g;
}

// "gamma" is either a real number or a [re, im] pair.
cd get_gamma(const json& cfg, const std::string& path, cd fallback) {
    if (!cfg.contains("gamma")) return fallback;
    const json& v = cfg.at("gamma");
    if (v.is_number()) return cd(v.get<double>(), 0.0);
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
        return cd(v[0].get<double>(), v[1].get<double>());
    throw ConfigError(path + ".gamma: expected a number or a [re, im] pair");
}

std::int64_t get_shots(const json& cfg, const std::string& path, double fallback) {
    const double s = get_number(cfg, path, "shots", fallback);
    if (!(s >= 0.0) || s != std::floor(s) || s > 9e18)
        throw ConfigError(path + ".shots: expected a non-negative integer");
    return static_cast<std::int64_t>(s);
}

int get_int(const json& cfg, const std::string& path, const char* key, int fallback,
            int lo, int hi) {
    const double v = get_number(cfg, path, key, static_cast<double>(fallback));
    if (v != std::floor(v) || v < lo || v > hi)
        throw ConfigError(path + "." + key + ": expected an integer in [" +
                          std::to_string(lo) + "," + std::to_string(hi) + "]");
    return static_cast<int>(v);
}

// ---- report helpers -------------------------------------------------------

json state_param_json(const StateParam& p) {
    return json{{"lambda0", p.lambda0}, {"theta", p.theta}, {"phi", p.phi}};
}

json estimate_json(const EstimateWithError& e) {
    return json{{"value", e.value}, {"std", e.std}, {"n_sets", e.n_sets}};
}

std::string counts_csv_string(const CountsTable& t) {
    std::ostringstream os;
    counts_to_csv(t, os);
    return os.str();
}

std::string kv_csv(const std::vector<std::pair<std::string, double>>& rows) {
    std::string out = "key,value\n";
    for (const auto& [k, v] : rows) out += k + "," + format_number(v) + "\n";
    return out;
}

template <typename Fn>
auto stage(const char* label, Fn&& fn) {
    try {
        return fn();
    } catch (const ConfigError&) {
        throw;
    } catch (const NonConvergence& e) {
        throw NonConvergence(std::string("stage ") + label + ": " + e.what());
    } catch (const std::invalid_argument& e) {
        throw InvalidState(std::string("stage ") + label + ": " + e.what());
    }
}

SpectralProfile get_profile(const json& cfg, const std::string& path) {
    const double lambda_nm = get_number(cfg, path, "lambda_nm", 800.0);
    const double dl_nm = get_number(cfg, path, "delta_lambda_nm", 3.0);
    return SpectralProfile::from_filter(lambda_nm, dl_nm);
}

// ---- commands (report only; artifact writing in the run_* wrappers) -------

json fiber_report(const json& cfg, std::uint64_t seed, int jobs, ArtifactSink& sink) {
    check_keys(cfg, "config",
               {"mode", "length_m", "delta_n", "lambda_nm", "delta_lambda_nm", "seed",
                "scan", "surface", "grid"});
    FiberParams f;
    f.length_m = get_number(cfg, "config", "length_m");
    f.delta_n = get_number(cfg, "config", "delta_n", 3.5e-4);
    f.validate();
    const double lambda_nm = get_number(cfg, "config", "lambda_nm", 800.0);
    const double dl_nm = get_number(cfg, "config", "delta_lambda_nm", 3.0);
    const SpectralProfile s = SpectralProfile::from_filter(lambda_nm, dl_nm);
    const bool do_scan = get_bool(cfg, "config", "scan", true);
    const bool keep_surface = get_bool(cfg, "config", "surface", false);
    const ScanGrid grid = get_grid(cfg, "config");

    const double coh_um = coherence_length_um(lambda_nm, dl_nm);
    const CoherenceFactor g = single_fiber_gamma(f, s);
    const ChiMatrix chi = dephasing_channel(g.gamma, PauliAxis::Z);

    json report;
    report["kappa_s"] = kappa(f);
    report["coherence_length_um"] = coh_um;
    report["decoherence_fiber_length_m"] = decoherence_fiber_length_m(coh_um, f.delta_n);
    report["gamma"] = {{"re", g.gamma.real()}, {"im", g.gamma.imag()},
                       {"abs", std::abs(g.gamma)}};
    report["seed"] = seed;

    const char* probe_names[4] = {"H", "V", "D", "R"};
    json probes;
    for (int i = 0; i < 4; ++i) {
        const Vector2 v = probe_states()[i];
        DensityMatrix in(Matrix(v * v.adjoint()));
        probes[probe_names[i]] = state_fidelity(apply_chi(chi, in), in);
    }
    report["probe_fidelities"] = probes;

    std::vector<std::pair<std::string, double>> csv = {
        {"kappa_s", kappa(f)},
        {"coherence_length_um", coh_um},
        {"decoherence_fiber_length_m", report["decoherence_fiber_length_m"].get<double>()},
        {"gamma_abs", std::abs(g.gamma)},
    };

    if (do_scan) {
        CapacityResult cap =
            stage("q1-scan", [&] { return q1_scan(chi, grid, keep_surface, jobs); });
        report["q1"] = cap.q1;
        report["argmax"] = state_param_json(cap.argmax);
        csv.push_back({"q1", cap.q1});
        if (keep_surface && cap.surface) {
            std::string surf = "lambda0,theta,phi,ic\n";
            for (const SurfaceRow& r : *cap.surface)
                surf += format_number(r.lambda0) + "," + format_number(r.theta) + "," +
                        format_number(r.phi) + "," + format_number(r.ic) + "\n";
            sink.add("surface.csv", std::move(surf));
        }
    }

    sink.add_json("chi.json", chi_to_json(chi));
    sink.add("summary.csv", kv_csv(csv));
    sink.add_json("report.json", report);
    return report;
}

NetworkMode mode_from_string(const std::string& m) {
    if (m == "unidir") return NetworkMode::Unidirectional;
    if (m == "bidir-ab") return NetworkMode::BidirectionalAB;
    if (m == "bidir-ba") return NetworkMode::BidirectionalBA;
    throw ConfigError("config.mode: unsupported network mode '" + m + "'");
}

// Resample the 16 count cells, rebuild the table and re-run the ML fit.
EstimateWithError bootstrap_fidelity(const CountsTable& counts, const ChiMatrix& target,
                                     int n_sets, int restarts, std::uint64_t seed) {
    std::vector<double> flat(16);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) flat[4 * i + j] = static_cast<double>(counts.c(i, j));
    const double total = counts.total;
    auto estimator = [&, total, restarts, seed](const std::vector<double>& v) {
        CountsTable t;
        t.total = total;
        t.seed = seed;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                t.c(i, j) = static_cast<std::int64_t>(std::llround(v[4 * i + j]));
        return process_fidelity(reconstruct_ml(t, restarts, seed).chi, target);
    };
    return bootstrap(flat, estimator, BootstrapConfig{n_sets, derive_seed(seed, 7001)});
}

json network_pipeline_report(const json& cfg, const std::string& mode, std::uint64_t seed,
                             int jobs, ArtifactSink& sink) {
    check_keys(cfg, "config",
               {"mode", "fiber1", "fiber2", "lambda_nm", "delta_lambda_nm", "nodes",
                "shots", "seed", "restarts", "bootstrap_sets", "bootstrap_restarts",
                "scan", "grid"});
    const NetworkMode nm = mode_from_string(mode);
    const FiberParams f1 = get_fiber(cfg, "config", "fiber1");
    const FiberParams f2 = get_fiber(cfg, "config", "fiber2");
    const SpectralProfile s = get_profile(cfg, "config");
    const int nodes = get_int(cfg, "config", "nodes", 128, 16, 4096);
    const std::int64_t shots = get_shots(cfg, "config", 1e6);
    const int restarts = get_int(cfg, "config", "restarts", 8, 1, 256);
    const int n_sets = get_int(cfg, "config", "bootstrap_sets", 50, 2, 10000);
    const int boot_restarts = get_int(cfg, "config", "bootstrap_restarts", 4, 1, 256);
    const bool do_scan = get_bool(cfg, "config", "scan", true);
    const ScanGrid grid = get_grid(cfg, "config");

    json report;
    report["mode"] = mode;
    report["seed"] = seed;
    report["shots"] = shots;

    PortChannels ports = stage(
        "interferometer", [&] { return extract_port_channels(nm, f1, f2, s, nodes); });
    json ports_json = json::array();
    for (const PortChannel& p : ports.ports) {
        json pj;
        pj["port"] = p.port;
        pj["probability"] = p.probability;
        pj["trace_preserving"] = is_cptp(p.chi).pass;
        ports_json.push_back(pj);
        sink.add_json("chi_port" + std::to_string(p.port) + ".json", chi_to_json(p.chi));
    }
    report["ports"] = ports_json;
    sink.add_json("chi_mean.json", chi_to_json(ports.mean));

    const CountsTable counts =
        stage("counts", [&] { return simulate_counts(ports.mean, shots, seed); });
    sink.add("counts.csv", counts_csv_string(counts));

    const ReconstructedProcess recon =
        stage("ml-reconstruction", [&] { return reconstruct_ml(counts, restarts, seed); });
    sink.add_json("chi_recon.json", chi_to_json(recon.chi));
    report["ml"] = {{"cost", recon.cost},
                    {"iterations", recon.iterations},
                    {"converged", recon.converged}};

    const double fid_identity = process_fidelity(recon.chi, ChiMatrix::identity());
    const double fid_ideal = process_fidelity(recon.chi, ports.mean);
    report["fidelity_to_identity"] = fid_identity;
    report["fidelity_to_ideal"] = fid_ideal;

    const EstimateWithError boot = stage("bootstrap", [&] {
        return bootstrap_fidelity(counts, ChiMatrix::identity(), n_sets, boot_restarts, seed);
    });
    report["fidelity_to_identity_bootstrap"] = estimate_json(boot);

    std::vector<std::pair<std::string, double>> csv = {
        {"fidelity_to_identity", fid_identity},
        {"fidelity_to_ideal", fid_ideal},
        {"fidelity_bootstrap_std", boot.std},
    };
    if (do_scan) {
        CapacityResult cap =
            stage("q1-scan", [&] { return q1_scan(recon.chi, grid, false, jobs); });
        report["q1"] = cap.q1;
        report["argmax"] = state_param_json(cap.argmax);
        csv.push_back({"q1", cap.q1});
    }
    sink.add("summary.csv", kv_csv(csv));
    sink.add_json("report.json", report);
    return report;
}

ChiMatrix target_channel(const json& cfg, const std::string& path) {
    if (cfg.contains("chi")) {
        if (cfg.contains("gamma"))
            throw ConfigError(path + ": give either chi or gamma, not both");
        return chi_from_json(cfg.at("chi"));
    }
    return dephasing_channel(get_gamma(cfg, path, cd(1.0, 0.0)), PauliAxis::Z);
}

json tomo_report(const json& cfg, std::uint64_t seed, ArtifactSink& sink) {
    check_keys(cfg, "config",
               {"mode", "gamma", "chi", "shots", "seed", "restarts", "bootstrap_sets",
                "bootstrap_restarts"});
    const ChiMatrix target = target_channel(cfg, "config");
    const std::int64_t shots = get_shots(cfg, "config", 1e6);
    const int restarts = get_int(cfg, "config", "restarts", 8, 1, 256);
    const int n_sets = get_int(cfg, "config", "bootstrap_sets", 50, 2, 10000);
    const int boot_restarts = get_int(cfg, "config", "bootstrap_restarts", 4, 1, 256);

    const CountsTable counts =
        stage("counts", [&] { return simulate_counts(target, shots, seed); });
    sink.add("counts.csv", counts_csv_string(counts));
    sink.add_json("chi_target.json", chi_to_json(target));

    const ReconstructedProcess recon =
        stage("ml-reconstruction", [&] { return reconstruct_ml(counts, restarts, seed); });
    sink.add_json("chi_recon.json", chi_to_json(recon.chi));

    const double fid = process_fidelity(recon.chi, target);
    const EstimateWithError boot = stage("bootstrap", [&] {
        return bootstrap_fidelity(counts, target, n_sets, boot_restarts, seed);
    });

    json report;
    report["mode"] = "tomo";
    report["seed"] = seed;
    report["shots"] = shots;
    report["fidelity_to_target"] = fid;
    report["fidelity_bootstrap"] = estimate_json(boot);
    report["ml"] = {{"cost", recon.cost},
                    {"iterations", recon.iterations},
                    {"converged", recon.converged}};
    sink.add("summary.csv", kv_csv({{"fidelity_to_target", fid},
                                    {"fidelity_bootstrap_std", boot.std}}));
    sink.add_json("report.json", report);
    return report;
}

json capacity_report(const json& cfg, std::uint64_t seed, int jobs, ArtifactSink& sink) {
    check_keys(cfg, "config", {"mode", "gamma", "chi", "seed", "grid", "surface"});
    const ChiMatrix chi = target_channel(cfg, "config");
    const ScanGrid grid = get_grid(cfg, "config");
    const bool keep_surface = get_bool(cfg, "config", "surface", false);

    CapacityResult cap =
        stage("q1-scan", [&] { return q1_scan(chi, grid, keep_surface, jobs); });

    json report;
    report["mode"] = "capacity";
    report["seed"] = seed;
    report["q1"] = cap.q1;
    report["argmax"] = state_param_json(cap.argmax);
    std::vector<std::pair<std::string, double>> csv = {{"q1", cap.q1}};
    const cd g = get_gamma(cfg, "config", cd(1.0, 0.0));
    if (!cfg.contains("chi") && g.imag() == 0.0 && g.real() >= 0.0 && g.real() <= 1.0) {
        const double oracle = dephasing_capacity_oracle(g.real());
        report["oracle_q1"] = oracle;
        csv.push_back({"oracle_q1", oracle});
    }
    if (keep_surface && cap.surface) {
        std::string surf = "lambda0,theta,phi,ic\n";
        for (const SurfaceRow& r : *cap.surface)
            surf += format_number(r.lambda0) + "," + format_number(r.theta) + "," +
                    format_number(r.phi) + "," + format_number(r.ic) + "\n";
        sink.add("surface.csv", std::move(surf));
    }
    sink.add_json("chi.json", chi_to_json(chi));
    sink.add("summary.csv", kv_csv(csv));
    sink.add_json("report.json", report);
    return report;
}

json bootstrap_report(const json& cfg, std::uint64_t seed, ArtifactSink& sink) {
    check_keys(cfg, "config",
               {"mode", "gamma", "chi", "shots", "seed", "bootstrap_sets",
                "bootstrap_restarts"});
    const ChiMatrix target = target_channel(cfg, "config");
    const std::int64_t shots = get_shots(cfg, "config", 1e5);
    const int n_sets = get_int(cfg, "config", "bootstrap_sets", 50, 2, 10000);
    const int boot_restarts = get_int(cfg, "config", "bootstrap_restarts", 4, 1, 256);

    const CountsTable counts =
        stage("counts", [&] { return simulate_counts(target, shots, seed); });
    sink.add("counts.csv", counts_csv_string(counts));
    const EstimateWithError boot = stage("bootstrap", [&] {
        return bootstrap_fidelity(counts, target, n_sets, boot_restarts, seed);
    });

    json report;
    report["mode"] = "bootstrap";
    report["seed"] = seed;
    report["shots"] = shots;
    report["fidelity_bootstrap"] = estimate_json(boot);
    sink.add("summary.csv", kv_csv({{"fidelity", boot.value}, {"std", boot.std}}));
    sink.add_json("report.json", report);
    return report;
}

// CHSH coincidence counts at the four settings; 16 cells indexed 4*pair +
// outcome with outcome bit 0 = detector 2 orthogonal, bit 1 = detector 1
// orthogonal.
std::vector<double> chsh_expected(const DensityMatrix& rho, const AngleSet& a,
                                  double shots) {
    const double pairs[4][2] = {{a.theta1, a.theta2},
                                {a.theta1, a.theta2p},
                                {a.theta1p, a.theta2},
                                {a.theta1p, a.theta2p}};
    std::vector<double> mean(16);
    for (int p = 0; p < 4; ++p)
        for (int o = 0; o < 4; ++o) {
            const double t1 = pairs[p][0] + ((o & 2) ? 90.0 : 0.0);
            const double t2 = pairs[p][1] + ((o & 1) ? 90.0 : 0.0);
            mean[4 * p + o] = shots * coincidence_probability(rho, t1, t2);
        }
    return mean;
}

double chsh_from_counts(const std::vector<double>& n) {
    double e[4];
    for (int p = 0; p < 4; ++p) {
        const double same = n[4 * p + 0] + n[4 * p + 3];
        const double diff = n[4 * p + 1] + n[4 * p + 2];
        if (same + diff <= 0.0)
            throw InvalidState("chsh_from_counts: empty coincidence block");
        e[p] = (same - diff) / (same + diff);
    }
    return e[0] + e[1] + e[2] - e[3];
}

json chsh_report(const json& cfg, std::uint64_t seed, ArtifactSink& sink) {
    check_keys(cfg, "config",
               {"mode", "alpha_sq_list", "gamma", "chi", "shots", "seed",
                "bootstrap_sets", "restarts"});
    if (!cfg.contains("alpha_sq_list") || !cfg.at("alpha_sq_list").is_array() ||
        cfg.at("alpha_sq_list").empty())
        throw ConfigError("config.alpha_sq_list: expected a non-empty array");
    std::vector<double> alphas;
    for (const json& v : cfg.at("alpha_sq_list")) {
        if (!v.is_number())
            throw ConfigError("config.alpha_sq_list: expected numbers");
        alphas.push_back(v.get<double>());
    }
    const ChiMatrix channel = target_channel(cfg, "config");
    const std::int64_t shots = get_shots(cfg, "config", 0.0);
    const int n_sets = get_int(cfg, "config", "bootstrap_sets", 50, 2, 10000);
    const int restarts = get_int(cfg, "config", "restarts", 16, 1, 1024);

    json entries = json::array();
    std::string csv =
        "alpha_sq,fidelity,coherent_info,theta1,theta1p,theta2,theta2p,s,s_counts,s_std\n";
    for (std::size_t idx = 0; idx < alphas.size(); ++idx) {
        const double a2 = alphas[idx];
        const DensityMatrix in = entangled_input(a2);
        const DensityMatrix out = stage("channel", [&] { return channel_on_A(channel, in); });
        const double fid = state_fidelity(out, in);
        const double ic = joint_coherent_info(channel, a2);
        auto [angles, s_val] = stage("optimize", [&] {
            return optimize_angles(out, restarts, derive_seed(seed, 100 + idx));
        });

        json e;
        e["alpha_sq"] = a2;
        e["fidelity"] = fid;
        e["coherent_info"] = ic;
        e["angles"] = {{"theta1", angles.theta1},
                       {"theta1p", angles.theta1p},
                       {"theta2", angles.theta2},
                       {"theta2p", angles.theta2p}};
        e["s"] = s_val;
        double s_counts = s_val, s_std = 0.0;
        if (shots > 0) {
            const std::vector<double> mean =
                chsh_expected(out, angles, static_cast<double>(shots));
            std::mt19937_64 rng(derive_seed(seed, 200 + idx));
            std::vector<double> n(16);
            for (int k = 0; k < 16; ++k)
                n[k] = static_cast<double>(poisson_sample(mean[k], rng));
            s_counts = chsh_from_counts(n);
            const EstimateWithError boot = stage("bootstrap", [&] {
                return bootstrap(n, chsh_from_counts,
                                 BootstrapConfig{n_sets, derive_seed(seed, 300 + idx)});
            });
            s_std = boot.std;
            e["s_counts"] = s_counts;
            e["s_std"] = s_std;
        }
        entries.push_back(e);
        csv += format_number(a2) + "," + format_number(fid) + "," + format_number(ic) +
               "," + format_number(angles.theta1) + "," + format_number(angles.theta1p) +
               "," + format_number(angles.theta2) + "," + format_number(angles.theta2p) +
               "," + format_number(s_val) + "," + format_number(s_counts) + "," +
               format_number(s_std) + "\n";
    }

    json report;
    report["mode"] = "chsh";
    report["seed"] = seed;
    report["shots"] = shots;
    report["entries"] = entries;
    sink.add("table.csv", std::move(csv));
    sink.add_json("report.json", report);
    return report;
}

json dispatch(const json& cfg, const std::string& command, std::uint64_t seed, int jobs,
              ArtifactSink& sink) {
    const std::string mode = get_mode(cfg);
    if (command == "fiber") {
        if (mode != "fiber")
            throw ConfigError("config.mode: the fiber command expects mode \"fiber\"");
        return fiber_report(cfg, seed, jobs, sink);
    }
    if (command == "chsh") {
        if (mode != "chsh")
            throw ConfigError("config.mode: the chsh command expects mode \"chsh\"");
        return chsh_report(cfg, seed, sink);
    }
    // pipeline
    if (mode == "unidir" || mode == "bidir-ab" || mode == "bidir-ba")
        return network_pipeline_report(cfg, mode, seed, jobs, sink);
    if (mode == "tomo") return tomo_report(cfg, seed, sink);
    if (mode == "capacity") return capacity_report(cfg, seed, jobs, sink);
    if (mode == "bootstrap") return bootstrap_report(cfg, seed, sink);
    throw ConfigError("config.mode: unknown mode '" + mode + "'");
}

json run_command(const std::string& command, const json& cfg, const RunOptions& opts) {
    const std::uint64_t seed = resolve_seed(cfg, opts.seed);
    ArtifactSink sink;
    sink.root = opts.out;
    const json report = dispatch(cfg, command, seed, opts.jobs, sink);
    sink.flush(json{{"command", command}, {"seed", seed}});
    return report;
}

}  // namespace

// ---- public helpers -------------------------------------------------------

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::uint64_t fnv1a(std::string_view bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string fnv1a_hex(std::string_view bytes) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a(bytes)));
    return buf;
}

void ArtifactSink::add(const std::string& rel_path, std::string bytes) {
    files.emplace_back(rel_path, std::move(bytes));
}

void ArtifactSink::add_json(const std::string& rel_path, const nlohmann::json& j) {
    add(rel_path, j.dump(2) + "\n");
}

void ArtifactSink::flush(const nlohmann::json& extra) {
    namespace fs = std::filesystem;
    std::sort(files.begin(), files.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    json artifacts = json::array();
    std::error_code ec;
    fs::create_directories(root, ec);
    if (ec) throw IoError("cannot create output directory " + root.string());
    for (const auto& [rel, bytes] : files) {
        const fs::path p = root / rel;
        if (p.has_parent_path()) fs::create_directories(p.parent_path(), ec);
        std::ofstream os(p, std::ios::binary | std::ios::trunc);
        os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!os) throw IoError("cannot write " + p.string());
        artifacts.push_back(json{{"hash", fnv1a_hex(bytes)}, {"path", rel}});
    }
    json manifest = extra;
    manifest["artifacts"] = artifacts;
    const std::string bytes = manifest.dump(2) + "\n";
    std::ofstream os(root / "manifest.json", std::ios::binary | std::ios::trunc);
    os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!os) throw IoError("cannot write " + (root / "manifest.json").string());
}

nlohmann::json load_config(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open config " + path.string());
    json cfg = json::parse(is, nullptr, false);
    if (cfg.is_discarded())
        throw ConfigError("config " + path.string() + ": invalid JSON");
    return cfg;
}

std::uint64_t resolve_seed(const nlohmann::json& cfg, std::optional<std::uint64_t> cli_seed) {
    if (cli_seed) return *cli_seed;
    if (cfg.is_object() && cfg.contains("seed")) {
        const json& v = cfg.at("seed");
        if (!v.is_number_integer() && !v.is_number_unsigned())
            throw ConfigError("config.seed: expected an integer");
        return v.get<std::uint64_t>();
    }
    if (const char* env = std::getenv("FIBERCHAN_SEED")) {
        try {
            std::size_t pos = 0;
            const std::uint64_t s = std::stoull(env, &pos);
            if (env[pos] != '\0') throw std::invalid_argument("trailing characters");
            return s;
        } catch (const std::exception&) {
            throw ConfigError("FIBERCHAN_SEED: not a valid unsigned integer");
        }
    }
    return kDefaultSeed;
}

nlohmann::json run_fiber(const nlohmann::json& cfg, const RunOptions& opts) {
    return run_command("fiber", cfg, opts);
}
nlohmann::json run_pipeline(const nlohmann::json& cfg, const RunOptions& opts) {
    return run_command("pipeline", cfg, opts);
}
nlohmann::json run_chsh(const nlohmann::json& cfg, const RunOptions& opts) {
    return run_command("chsh", cfg, opts);
}

nlohmann::json run_reproduce(const RunOptions& opts) {
    const std::uint64_t seed = opts.seed ? *opts.seed : kDefaultSeed;
    ArtifactSink sink;
    sink.root = opts.out;

    struct Entry {
        std::string name;
        std::string command;
        json cfg;
    };
    const json ident_fiber = {{"length_m", 1.0}, {"delta_n", 3.5e-4}};
    std::vector<Entry> entries = {
        {"fiber-long", "fiber", {{"mode", "fiber"}, {"length_m", 120.0}}},
        {"fiber-short", "fiber", {{"mode", "fiber"}, {"length_m", 0.2}, {"scan", false}}},
        {"unidir", "pipeline",
         {{"mode", "unidir"}, {"fiber1", ident_fiber}, {"fiber2", ident_fiber},
          {"shots", 100000}, {"bootstrap_sets", 10}, {"scan", false}}},
        {"bidir-ab", "pipeline",
         {{"mode", "bidir-ab"},
          {"fiber1", {{"length_m", 1.0}, {"delta_n", 3.5e-4}, {"common_delay_s", 4e-14}}},
          {"fiber2", {{"length_m", 1.0}, {"delta_n", 3.5e-4}}},
          {"shots", 100000}, {"bootstrap_sets", 10}, {"scan", false}}},
        {"bidir-ba", "pipeline",
         {{"mode", "bidir-ba"},
          {"fiber1", {{"length_m", 1.0}, {"delta_n", 3.5e-4}, {"common_delay_s", 4e-14}}},
          {"fiber2", {{"length_m", 1.0}, {"delta_n", 3.5e-4}}},
          {"shots", 100000}, {"bootstrap_sets", 10}, {"scan", false}}},
        {"capacity", "pipeline",
         {{"mode", "capacity"}, {"gamma", 0.5},
          {"grid", {{"lambda0_step", 0.05}, {"theta_step", std::numbers::pi / 10},
                    {"phi_step", std::numbers::pi / 10}}}}},
        {"chsh", "chsh",
         {{"mode", "chsh"}, {"alpha_sq_list", {0.1, 0.5, 0.9}}, {"gamma", 0.88},
          {"shots", 100000}, {"bootstrap_sets", 10}}},
    };

    std::string csv = "run,key,value\n";
    json summary;
    for (const Entry& e : entries) {
        ArtifactSink sub;
        sub.root = opts.out / e.name;
        const json report =
            dispatch(e.cfg, e.command, derive_seed(seed, fnv1a(e.name)), opts.jobs, sub);
        summary[e.name] = report;
        for (const auto& [rel, bytes] : sub.files)
            sink.add(e.name + "/" + rel, bytes);
        auto row = [&](const char* key) {
            if (report.contains(key) && report.at(key).is_number())
                csv += e.name + "," + key + "," +
                       format_number(report.at(key).get<double>()) + "\n";
        };
        row("q1");
        row("fidelity_to_identity");
        row("fidelity_to_target");
    }
    sink.add("summary.csv", std::move(csv));
    sink.add_json("reproduce.json", summary);
    sink.flush(json{{"command", "reproduce"}, {"seed", seed}});
    return summary;
}

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Noisy polarization fiber channel simulator and analysis toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    RunOptions opts;
    std::uint64_t seed_flag = 0;
    bool seed_set = false;

    auto add_common = [&](CLI::App* sub, bool with_config) {
        if (with_config)
            sub->add_option("config", config_path, "JSON experiment config")->required();
        sub->add_option("--out", opts.out, "output directory")->capture_default_str();
        sub->add_option("--seed", seed_flag, "seed override")
            ->each([&](const std::string&) { seed_set = true; });
        sub->add_option("--jobs", opts.jobs, "worker cap (0 = hardware)");
    };
    add_common(app.add_subcommand("fiber", "single-fiber dephasing report"), true);
    add_common(app.add_subcommand("pipeline",
                                  "interferometer / tomography / capacity pipelines"),
               true);
    add_common(app.add_subcommand("chsh", "entangled-input CHSH experiment"), true);
    add_common(app.add_subcommand("reproduce", "bundled desk-scale runs"), false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    if (seed_set) opts.seed = seed_flag;
    const std::string command = app.get_subcommands().front()->get_name();
    try {
        if (command == "reproduce") {
            run_reproduce(opts);
        } else {
            const json cfg = load_config(config_path);
            run_command(command, cfg, opts);
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const NonConvergence& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumeric;
    }
    return kExitOk;
}

}  // namespace fiberchan::cli
