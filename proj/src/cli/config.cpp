#include "nlmc/cli/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "nlmc/errors.hpp"

namespace nlmc::cli {

namespace {

namespace pt = boost::property_tree;

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, ',')) {
        std::string t = trim(item);
        if (!t.empty()) out.push_back(std::move(t));
    }
    return out;
}

template <typename T>
T parse_number(const std::string& text, const std::string& qualified) {
    T value{};
    const char* first = text.data();
    const char* last = first + text.size();
    if (!text.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) {
        throw ConfigError("cannot parse '" + text + "' as a number for key " + qualified, qualified);
    }
    return value;
}

}  // namespace

ConfigFile ConfigFile::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config " + path.string(), path.string());
    return from_stream(in, path.string());
}

ConfigFile ConfigFile::parse(const std::string& text) {
    std::istringstream in(text);
    return from_stream(in, "<config>");
}

ConfigFile ConfigFile::from_stream(std::istream& in, const std::string& origin) {
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(origin + ":" + std::to_string(e.line()) + ": " + e.message(), "",
                          static_cast<int>(e.line()));
    }
    ConfigFile file;
    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty()) {
            throw ConfigError("key '" + section + "' must belong to a [section]", section);
        }
        for (const auto& [key, node] : body) file.sections_[section][key] = trim(node.data());
    }
    return file;
}

bool ConfigFile::has_section(const std::string& section) const { return sections_.contains(section); }

std::optional<std::string> ConfigFile::raw(const std::string& section, const std::string& key) const {
    const auto s = sections_.find(section);
    if (s == sections_.end()) return std::nullopt;
    const auto k = s->second.find(key);
    if (k == s->second.end()) return std::nullopt;
    return k->second;
}

double ConfigFile::get_double(const std::string& section, const std::string& key, double fallback) const {
    const auto v = raw(section, key);
    return v ? parse_number<double>(*v, section + "." + key) : fallback;
}

int ConfigFile::get_int(const std::string& section, const std::string& key, int fallback) const {
    const auto v = raw(section, key);
    return v ? parse_number<int>(*v, section + "." + key) : fallback;
}

std::uint64_t ConfigFile::get_u64(const std::string& section, const std::string& key,
                                  std::uint64_t fallback) const {
    const auto v = raw(section, key);
    return v ? parse_number<std::uint64_t>(*v, section + "." + key) : fallback;
}

bool ConfigFile::get_bool(const std::string& section, const std::string& key, bool fallback) const {
    const auto v = raw(section, key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1" || *v == "yes") return true;
    if (*v == "false" || *v == "0" || *v == "no") return false;
    throw ConfigError("expected a boolean for key " + section + "." + key, section + "." + key);
}

std::string ConfigFile::get_string(const std::string& section, const std::string& key,
                                   const std::string& fallback) const {
    return raw(section, key).value_or(fallback);
}

std::vector<double> ConfigFile::get_doubles(const std::string& section, const std::string& key,
                                            const std::vector<double>& fallback) const {
    const auto v = raw(section, key);
    if (!v) return fallback;
    std::vector<double> out;
    for (const auto& item : split_list(*v)) out.push_back(parse_number<double>(item, section + "." + key));
    return out;
}

std::vector<int> ConfigFile::get_ints(const std::string& section, const std::string& key,
                                      const std::vector<int>& fallback) const {
    const auto v = raw(section, key);
    if (!v) return fallback;
    std::vector<int> out;
    for (const auto& item : split_list(*v)) out.push_back(parse_number<int>(item, section + "." + key));
    return out;
}

std::vector<std::string> ConfigFile::get_strings(const std::string& section, const std::string& key,
                                                 const std::vector<std::string>& fallback) const {
    const auto v = raw(section, key);
    return v ? split_list(*v) : fallback;
}

void ConfigFile::require_known(const std::string& section, const std::vector<std::string>& allowed) const {
    const auto s = sections_.find(section);
    if (s == sections_.end()) return;
    for (const auto& [key, value] : s->second) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw ConfigError("unknown key " + section + "." + key, section + "." + key);
        }
    }
}

std::string ConfigFile::canonical() const {
    std::string out;
    for (const auto& [section, keys] : sections_) {
        for (const auto& [key, value] : keys) out += section + "." + key + "=" + value + "\n";
    }
    return out;
}

ExperimentConfig load_experiment_config(const ConfigFile& file, const std::string& section,
                                        bool paper_scale) {
    ExperimentConfig c = paper_scale ? ExperimentConfig::paper_scale() : ExperimentConfig::desk_scale();

    file.require_known("kernel", {"kind", "value", "r", "periodic", "lambda", "d", "sup_bound", "expression"});
    c.kernel.kind = file.get_string("kernel", "kind", c.kernel.kind);
    c.kernel.value = file.get_double("kernel", "value", c.kernel.value);
    c.kernel.r = file.get_double("kernel", "r", c.kernel.r);
    c.kernel.periodic = file.get_bool("kernel", "periodic", c.kernel.periodic);
    c.kernel.lambda = file.get_double("kernel", "lambda", c.kernel.lambda);
    c.kernel.d = file.get_int("kernel", "d", c.kernel.d);
    c.kernel.sup_bound = file.get_double("kernel", "sup_bound", c.kernel.sup_bound);
    c.kernel.expression = file.get_string("kernel", "expression", c.kernel.expression);

    if (!paper_scale) {
        c.gammas = file.get_doubles(section, "gammas", c.gammas);
        c.ns = file.get_ints(section, "ns", c.ns);
        c.trials = file.get_int(section, "trials", c.trials);
    }
    c.q = file.get_int(section, "q", c.q);
    c.omega = file.get_double(section, "omega", c.omega);
    c.T = file.get_double(section, "T", c.T);
    c.dt = file.get_double(section, "dt", c.dt);
    c.checkpoint_interval = file.get_double(section, "checkpoint_interval", c.checkpoint_interval);
    c.base_seed = file.get_u64(section, "seed", c.base_seed);

    const std::string error = file.get_string(section, "error", "sup-time");
    if (error == "sup-time") {
        c.error = ErrorFunctional::SupTime;
    } else if (error == "final-time") {
        c.error = ErrorFunctional::FinalTime;
    } else {
        throw ConfigError("error must be sup-time or final-time", section + ".error");
    }
    const std::string initial = file.get_string(section, "initial", "midpoint");
    if (initial == "midpoint") {
        c.initial = InitialData::Midpoint;
    } else if (initial == "cell-average") {
        c.initial = InitialData::CellAverage;
    } else {
        throw ConfigError("initial must be midpoint or cell-average", section + ".initial");
    }
    const std::string coupling = file.get_string(section, "coupling", "sine");
    if (coupling == "sine") {
        c.coupling = CouplingFunction::Sine;
    } else if (coupling == "none") {
        c.coupling = CouplingFunction::None;
    } else {
        throw ConfigError("coupling must be sine or none", section + ".coupling");
    }
    return c;
}

std::uint64_t fnv1a64(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace nlmc::cli
