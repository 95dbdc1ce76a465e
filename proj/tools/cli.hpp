// cli.hpp
// Command-line front end: JSON experiment configs, deterministic CSV/JSON
// artifacts under an output directory, and a hash manifest.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace fiberchan::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;
inline constexpr int kExitIo = 4;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// 17 significant digits, "." decimal separator, locale independent.
std::string format_number(double v);

std::uint64_t fnv1a(std::string_view bytes);
std::string fnv1a_hex(std::string_view bytes);

// Collects artifacts in memory, then writes them plus manifest.json.
struct ArtifactSink {
    std::filesystem::path root;
    std::vector<std::pair<std::string, std::string>> files;  // rel path, bytes

    void add(const std::string& rel_path, std::string bytes);
    void add_json(const std::string& rel_path, const nlohmann::json& j);
    // Writes every artifact plus manifest.json; `extra` keys are merged
    // into the manifest document.
    void flush(const nlohmann::json& extra);
};

nlohmann::json load_config(const std::filesystem::path& path);

// Priority: CLI override, config "seed", FIBERCHAN_SEED, fixed default.
std::uint64_t resolve_seed(const nlohmann::json& cfg, std::optional<std::uint64_t> cli_seed);

struct RunOptions {
    std::filesystem::path out = "out";
    std::optional<std::uint64_t> seed;
    int jobs = 0;
};

// Each command validates the config (unknown keys rejected), runs the
// experiment, writes artifacts + manifest under opts.out and returns the
// report document.
nlohmann::json run_fiber(const nlohmann::json& cfg, const RunOptions& opts);
nlohmann::json run_pipeline(const nlohmann::json& cfg, const RunOptions& opts);
nlohmann::json run_chsh(const nlohmann::json& cfg, const RunOptions& opts);
nlohmann::json run_reproduce(const RunOptions& opts);

int run_cli(int argc, const char* const* argv);

}  // namespace fiberchan::cli
