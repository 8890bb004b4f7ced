#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "nlmc/cli/config.hpp"

namespace nlmc::cli {

inline constexpr const char* kVersion = "0.1.0";

struct CommonOptions {
    std::optional<std::filesystem::path> config;
    std::filesystem::path out = ".";
    std::optional<std::uint64_t> seed;
    unsigned threads = 0;
    bool paper_scale = false;
    const std::atomic<bool>* cancel = nullptr;
};

struct RunManifest {
    std::string command;
    std::uint64_t config_hash = 0;
    std::string version = kVersion;
    double wall_seconds = 0.0;
    std::vector<std::filesystem::path> outputs;
    bool interrupted = false;

    // Throws IoError if a listed output is missing or empty.
    void verify() const;
    void write(const std::filesystem::path& path) const;
};

// Each command writes its data files plus manifest.json into options.out.
RunManifest cmd_rate_sweep(const CommonOptions& options);
RunManifest cmd_pixmap(const CommonOptions& options);
RunManifest cmd_project_study(const CommonOptions& options);
RunManifest cmd_singular_study(const CommonOptions& options);
RunManifest cmd_gap_study(const CommonOptions& options);
RunManifest cmd_solve(const CommonOptions& options);

// 17 significant digits, '.' decimal point, independent of the locale.
std::string format_real(double value);

// Name of the pixmap written for one gamma.
std::string pixmap_name(int n, double gamma);

// Whole CLI: parses argv, dispatches, maps errors to exit codes
// (0 ok, 2 config, 3 divergence, 4 I/O, 130 interrupted).
int run(int argc, char** argv);

}  // namespace nlmc::cli
