// Run configuration: defaults, flat key=value config files, and the
// flags > file > defaults precedence rule.
#pragma once

#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "enslab/errors.hpp"
#include "enslab/models.hpp"

namespace enslab {

// Defaults reproduce the headline configuration: lambda = 3, nine members,
// 512 archives of 2048 pairs, SAP archives of 40 pairs. "desk" scale trims
// the Monte Carlo counts so the full pipeline runs in minutes.
struct RunConfig {
    double lambda = 3.0;
    double noise_sd = std::numeric_limits<double>::quiet_NaN();  // NaN: 5% of attractor SD
    std::size_t spinup = 1000;
    std::array<double, 4> kappa{0, 0, 0, 0};  // 0: fit from data
    std::size_t n_members = 9;
    std::size_t max_lead = 8;
    std::size_t stride = 0;  // 0: max_lead
    std::string scale = "full";
    std::size_t n_archives = 512;
    std::size_t lap_size = 2048;
    std::size_t sap_size = 40;
    std::size_t test_size = 2048;
    std::uint64_t seed = 1;
    std::size_t jobs = 1;
    std::string out_dir = "out";
    std::string rounding = "half_away";  // or "truncate"
    std::vector<double> ensemble_sizes{2, 4, 8, 16, 32, 64, 128};
    std::size_t sim_length = 2048;
    std::size_t lyap_count = 4096;
    std::size_t lyap_steps = 10000;
    std::size_t modelerr_points = 4096;
};

using KeyValues = std::vector<std::pair<std::string, std::string>>;

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

inline double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("bad numeric value for '" + key + "': " + v);
    }
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        if (!v.empty() && v[0] == '-') throw std::invalid_argument(v);
        std::uint64_t x = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("bad integer value for '" + key + "': " + v);
    }
}

inline std::vector<double> parse_size_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        out.push_back(static_cast<double>(parse_u64(key, item)));
    }
    if (out.empty()) throw ConfigError("empty list for '" + key + "'");
    return out;
}

inline void apply_key(RunConfig& rc, const std::string& key, const std::string& value) {
    if (key == "lambda") rc.lambda = parse_double(key, value);
    else if (key == "noise_sd") rc.noise_sd = parse_double(key, value);
    else if (key == "spinup") rc.spinup = parse_u64(key, value);
    else if (key == "kappa1") rc.kappa[0] = parse_double(key, value);
    else if (key == "kappa2") rc.kappa[1] = parse_double(key, value);
    else if (key == "kappa3") rc.kappa[2] = parse_double(key, value);
    else if (key == "kappa4") rc.kappa[3] = parse_double(key, value);
    else if (key == "n_members") rc.n_members = parse_u64(key, value);
    else if (key == "max_lead") rc.max_lead = parse_u64(key, value);
    else if (key == "stride") rc.stride = parse_u64(key, value);
    else if (key == "scale") rc.scale = value;
    else if (key == "n_archives") rc.n_archives = parse_u64(key, value);
    else if (key == "lap_size") rc.lap_size = parse_u64(key, value);
    else if (key == "sap_size") rc.sap_size = parse_u64(key, value);
    else if (key == "test_size") rc.test_size = parse_u64(key, value);
    else if (key == "seed") rc.seed = parse_u64(key, value);
    else if (key == "jobs") rc.jobs = parse_u64(key, value);
    else if (key == "out_dir") rc.out_dir = value;
    else if (key == "rounding") rc.rounding = value;
    else if (key == "ensemble_sizes") rc.ensemble_sizes = parse_size_list(key, value);
    else if (key == "sim_length") rc.sim_length = parse_u64(key, value);
    else if (key == "lyap_count") rc.lyap_count = parse_u64(key, value);
    else if (key == "lyap_steps") rc.lyap_steps = parse_u64(key, value);
    else if (key == "modelerr_points") rc.modelerr_points = parse_u64(key, value);
    else throw ConfigError("unknown config key '" + key + "'");
}

}  // namespace detail

inline KeyValues parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file: " + path);
    KeyValues kv;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string s = detail::trim(line);
        if (s.empty() || s[0] == '#') continue;
        std::size_t eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key=value");
        kv.emplace_back(detail::trim(s.substr(0, eq)), detail::trim(s.substr(eq + 1)));
    }
    return kv;
}

inline void apply_scale(RunConfig& rc) {
    if (rc.scale == "full") {
        rc.n_archives = 512;
        rc.lap_size = 2048;
        rc.sap_size = 40;
        rc.test_size = 2048;
        rc.lyap_count = 4096;
        rc.modelerr_points = 4096;
    } else if (rc.scale == "desk") {
        rc.n_archives = 64;
        rc.lap_size = 512;
        rc.sap_size = 40;
        rc.test_size = 2048;
        rc.lyap_count = 512;
        rc.modelerr_points = 1024;
    } else {
        throw ConfigError("scale must be 'desk' or 'full', got '" + rc.scale + "'");
    }
}

inline void validate_run_config(const RunConfig& rc) {
    if (!(rc.lambda > 0.0)) throw ConfigError("lambda must be > 0");
    if (!std::isnan(rc.noise_sd) && !(rc.noise_sd > 0.0))
        throw ConfigError("noise_sd must be > 0 (or omitted for the default)");
    for (double k : rc.kappa)
        if (k < 0.0) throw ConfigError("kappa overrides must be >= 0");
    if (rc.n_members < 2) throw ConfigError("n_members must be >= 2");
    if (rc.max_lead < 1) throw ConfigError("max_lead must be >= 1");
    if (rc.stride != 0 && rc.stride < rc.max_lead)
        throw ConfigError("stride must be 0 (auto) or >= max_lead");
    if (rc.n_archives < 1 || rc.lap_size < 1 || rc.test_size < 1)
        throw ConfigError("archive counts must be >= 1");
    if (rc.sap_size < 3) throw ConfigError("sap_size must be >= 3 for leave-one-out fitting");
    if (rc.jobs < 1) throw ConfigError("jobs must be >= 1");
    if (rc.rounding != "half_away" && rc.rounding != "truncate")
        throw ConfigError("rounding must be 'half_away' or 'truncate'");
    if (rc.ensemble_sizes.empty()) throw ConfigError("ensemble_sizes must be non-empty");
    for (std::size_t i = 0; i + 1 < rc.ensemble_sizes.size(); ++i)
        if (!(rc.ensemble_sizes[i] < rc.ensemble_sizes[i + 1]))
            throw ConfigError("ensemble_sizes must be strictly ascending");
    if (rc.ensemble_sizes.front() < 2) throw ConfigError("ensemble sizes must be >= 2");
    if (rc.sim_length < 1) throw ConfigError("sim_length must be >= 1");
    if (rc.lyap_count < 1 || rc.lyap_steps < 10000)
        throw ConfigError("lyapunov sweep needs count >= 1 and steps >= 10000");
    if (rc.modelerr_points < 1) throw ConfigError("modelerr_points must be >= 1");
}

// Precedence: flags > config file > defaults. Scale is resolved first so an
// explicit count in the file or flags always wins over the scale preset.
inline RunConfig resolve_run_config(const KeyValues& file_kv, const KeyValues& flag_kv) {
    RunConfig rc;
    for (const auto& [k, v] : file_kv)
        if (k == "scale") rc.scale = v;
    for (const auto& [k, v] : flag_kv)
        if (k == "scale") rc.scale = v;
    apply_scale(rc);
    for (const auto& [k, v] : file_kv)
        if (k != "scale") detail::apply_key(rc, k, v);
    for (const auto& [k, v] : flag_kv)
        if (k != "scale") detail::apply_key(rc, k, v);
    validate_run_config(rc);
    return rc;
}

inline CoefficientRounding rounding_mode(const RunConfig& rc) {
    return rc.rounding == "truncate" ? CoefficientRounding::truncate
                                     : CoefficientRounding::half_away_from_zero;
}

}  // namespace enslab
