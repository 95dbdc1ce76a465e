#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "../tools/cli.hpp"
#include "fiberchan/channel.hpp"

using namespace fiberchan;
using namespace fiberchan::cli;
using nlohmann::json;

namespace {

namespace fs = std::filesystem;

fs::path fresh_dir(const std::string& tag) {
    fs::path p = fs::temp_directory_path() / ("fiberchan_test_" + tag);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    REQUIRE(is.good());
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("number formatting and hashing") {
    CHECK(format_number(0.5) == "0.5");
    CHECK(format_number(1.0 / 3.0) == "0.33333333333333331");
    // FNV-1a reference vectors
    CHECK(fnv1a("") == 14695981039346656037ULL);
    CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
}

TEST_CASE("seed resolution priority") {
    unsetenv("FIBERCHAN_SEED");
    CHECK(resolve_seed(json::object(), std::nullopt) == 12345);
    CHECK(resolve_seed(json{{"seed", 7}}, std::nullopt) == 7);
    CHECK(resolve_seed(json{{"seed", 7}}, 99) == 99);
    setenv("FIBERCHAN_SEED", "31337", 1);
    CHECK(resolve_seed(json::object(), std::nullopt) == 31337);
    CHECK(resolve_seed(json{{"seed", 7}}, std::nullopt) == 7);
    setenv("FIBERCHAN_SEED", "junk", 1);
    CHECK_THROWS_AS(resolve_seed(json::object(), std::nullopt), ConfigError);
    unsetenv("FIBERCHAN_SEED");
}

TEST_CASE("unknown config keys are rejected with a field path") {
    RunOptions opts;
    opts.out = fresh_dir("badkey");
    json cfg{{"mode", "fiber"}, {"length_m", 1.0}, {"lenght_m", 2.0}};
    try {
        run_fiber(cfg, opts);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("lenght_m") != std::string::npos);
    }
    CHECK_THROWS_AS(run_fiber(json{{"mode", "fiber"}}, opts), ConfigError);
    CHECK_THROWS_AS(run_fiber(json{{"mode", "chsh"}}, opts), ConfigError);
    CHECK_THROWS_AS(
        run_pipeline(json{{"mode", "unidir"}, {"fiber1", json::object()}}, opts),
        ConfigError);
}

TEST_CASE("fiber command emits parseable, deterministic artifacts") {
    json cfg{{"mode", "fiber"}, {"length_m", 0.3}, {"scan", false}, {"seed", 4}};
    RunOptions a, b;
    a.out = fresh_dir("fiber_a");
    b.out = fresh_dir("fiber_b");
    json report = run_fiber(cfg, a);
    run_fiber(cfg, b);
    CHECK(slurp(a.out / "manifest.json") == slurp(b.out / "manifest.json"));
    CHECK(slurp(a.out / "report.json") == slurp(b.out / "report.json"));

    // artifacts parse back losslessly
    json manifest = json::parse(slurp(a.out / "manifest.json"));
    for (const json& art : manifest.at("artifacts")) {
        const std::string bytes = slurp(a.out / art.at("path").get<std::string>());
        CHECK(fnv1a_hex(bytes) == art.at("hash").get<std::string>());
    }
    ChiMatrix chi = chi_from_json(json::parse(slurp(a.out / "chi.json")));
    CHECK(is_cptp(chi).pass);
    json parsed = json::parse(slurp(a.out / "report.json"));
    CHECK(parsed == report);
    CHECK(report.at("coherence_length_um").get<double>() ==
          doctest::Approx(213.333).epsilon(1e-3));
}

TEST_CASE("pipeline tomo mode round trips a dephasing channel") {
    json cfg{{"mode", "tomo"},    {"gamma", 0.7},
             {"shots", 200000},   {"seed", 11},
             {"restarts", 4},     {"bootstrap_sets", 8},
             {"bootstrap_restarts", 2}};
    RunOptions opts;
    opts.out = fresh_dir("tomo");
    json report = run_pipeline(cfg, opts);
    CHECK(report.at("fidelity_to_target").get<double>() > 0.995);
    CHECK(report.at("fidelity_bootstrap").at("std").get<double>() < 0.01);
    CHECK(fs::exists(opts.out / "counts.csv"));
    CHECK(fs::exists(opts.out / "chi_recon.json"));
}

TEST_CASE("capacity mode compares against the closed form") {
    json cfg{{"mode", "capacity"},
             {"gamma", 0.5},
             {"grid",
              {{"lambda0_step", 0.05},
               {"theta_step", std::numbers::pi / 10.0},
               {"phi_step", std::numbers::pi / 10.0}}}};
    RunOptions opts;
    opts.out = fresh_dir("capacity");
    json report = run_pipeline(cfg, opts);
    CHECK(report.at("q1").get<double>() ==
          doctest::Approx(report.at("oracle_q1").get<double>()).epsilon(1e-6));
}

TEST_CASE("chsh command output structure") {
    json cfg{{"mode", "chsh"},
             {"alpha_sq_list", {0.1, 0.5}},
             {"shots", 50000},
             {"seed", 21},
             {"bootstrap_sets", 8},
             {"restarts", 6}};
    RunOptions opts;
    opts.out = fresh_dir("chsh");
    json report = run_chsh(cfg, opts);
    const json& entries = report.at("entries");
    REQUIRE(entries.size() == 2);
    // identity channel, Ic maximal at 0.5
    CHECK(entries[1].at("coherent_info").get<double>() >
          entries[0].at("coherent_info").get<double>());
    CHECK(entries[1].at("s").get<double>() ==
          doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-5));
    const std::string table = slurp(opts.out / "table.csv");
    CHECK(table.find("alpha_sq,") == 0);
}

TEST_CASE("cli exit codes") {
    RunOptions opts;
    const fs::path out = fresh_dir("exit");
    const fs::path cfgfile = out / "cfg.json";
    fs::create_directories(out);
    {
        std::ofstream os(cfgfile);
        os << R"({"mode":"fiber","length_m":0.2,"scan":false})";
    }
    const std::string outdir = (out / "run").string();
    const std::string cfgs = cfgfile.string();
    {
        const char* argv[] = {"fiberchan", "fiber", cfgs.c_str(), "--out",
                              outdir.c_str()};
        CHECK(run_cli(5, argv) == kExitOk);
    }
    {
        const char* argv[] = {"fiberchan", "fiber", "/nonexistent/cfg.json"};
        CHECK(run_cli(3, argv) == kExitIo);
    }
    {
        const char* argv[] = {"fiberchan", "nonsense"};
        CHECK(run_cli(2, argv) == kExitConfig);
    }
    // config error: wrong mode for the command
    const fs::path badcfg = out / "bad.json";
    {
        std::ofstream os(badcfg);
        os << R"({"mode":"chsh","alpha_sq_list":[0.5]})";
    }
    const std::string bads = badcfg.string();
    {
        const char* argv[] = {"fiberchan", "fiber", bads.c_str(), "--out",
                              outdir.c_str()};
        CHECK(run_cli(5, argv) == kExitConfig);
    }
}
