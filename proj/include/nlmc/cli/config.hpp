#pragma once

#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nlmc/experiments.hpp"

namespace nlmc::cli {

// Flat INI configuration: `[section]` headers, `key = value` lines and ';'
// comments. Syntax errors carry the line number; value errors name the key.
class ConfigFile {
public:
    ConfigFile() = default;
    static ConfigFile load(const std::filesystem::path& path);
    static ConfigFile parse(const std::string& text);

    bool has_section(const std::string& section) const;
    std::optional<std::string> raw(const std::string& section, const std::string& key) const;

    double get_double(const std::string& section, const std::string& key, double fallback) const;
    int get_int(const std::string& section, const std::string& key, int fallback) const;
    std::uint64_t get_u64(const std::string& section, const std::string& key, std::uint64_t fallback) const;
    bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
    std::string get_string(const std::string& section, const std::string& key,
                           const std::string& fallback) const;
    std::vector<double> get_doubles(const std::string& section, const std::string& key,
                                    const std::vector<double>& fallback) const;
    std::vector<int> get_ints(const std::string& section, const std::string& key,
                              const std::vector<int>& fallback) const;
    std::vector<std::string> get_strings(const std::string& section, const std::string& key,
                                         const std::vector<std::string>& fallback) const;

    // Throws ConfigError for keys of `section` outside `allowed`.
    void require_known(const std::string& section, const std::vector<std::string>& allowed) const;

    // Canonical "section.key=value" listing, sorted.
    std::string canonical() const;

private:
    static ConfigFile from_stream(std::istream& in, const std::string& origin);

    std::map<std::string, std::map<std::string, std::string>> sections_;
};

// Reads [kernel] and the dynamics keys of `section` over the desk-scale profile
// (or the paper-scale profile when requested).
ExperimentConfig load_experiment_config(const ConfigFile& file, const std::string& section,
                                        bool paper_scale);

std::uint64_t fnv1a64(const std::string& text);

}  // namespace nlmc::cli
