#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "riukf/bench/satellite.hpp"
#include "riukf/error.hpp"

namespace riukf::bench {

namespace detail {

inline std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

inline std::vector<std::string> split_list(std::string_view s) {
    std::vector<std::string> out;
    std::string item;
    for (char c : s) {
        if (c == ',' || c == ' ' || c == '\t') {
            if (!item.empty()) out.push_back(std::move(item));
            item.clear();
        } else {
            item.push_back(c);
        }
    }
    if (!item.empty()) out.push_back(std::move(item));
    return out;
}

[[noreturn]] inline void config_error(int line, const std::string& msg) {
    fail(ErrorKind::ContractViolation, "config line " + std::to_string(line) + ": " + msg);
}

template <class T>
T parse_number(const std::string& text, int line, std::string_view key) {
    T value{};
    const char* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end) config_error(line, "invalid value '" + text + "' for " + std::string(key));
    return value;
}

inline std::vector<double> parse_numbers(std::string_view text, int line, std::string_view key) {
    std::vector<double> out;
    for (const auto& item : split_list(text)) out.push_back(parse_number<double>(item, line, key));
    return out;
}

inline FilterSpec parse_filter(const std::string& name, double rho, int line) {
    if (name == "UKFRM") return FilterSpec::ukfrm();
    for (const auto& kind : bench_sigma_kinds(rho)) {
        if (name == FilterSpec::additive(kind).name()) return FilterSpec::additive(kind);
        if (name == FilterSpec::augmented(kind).name()) return FilterSpec::augmented(kind);
    }
    config_error(line, "unknown filter '" + name + "'");
}

}  // namespace detail

/// Parses a key=value satellite configuration. Blank lines and text after '#'
/// are ignored. Recognized keys: dt, duration, num_runs, seed, q_scale, r_scale,
/// q0 (4 numbers), p0 (1 number for a multiple of I, or 9 row-major numbers),
/// filters ("all" or a comma-separated list of filter names), omega_units
/// (degrees | radians), rho, threads. Unset keys keep their defaults.
inline SatelliteConfig parse_config(std::string_view text) {
    SatelliteConfig cfg;
    std::vector<std::string> filter_names;
    int filters_line = 0;
    std::istringstream in{std::string(text)};
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
        const std::string stripped = detail::trim(raw);
        if (stripped.empty()) continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) detail::config_error(line, "expected key = value");
        const std::string key = detail::trim(std::string_view(stripped).substr(0, eq));
        const std::string value = detail::trim(std::string_view(stripped).substr(eq + 1));
        if (value.empty()) detail::config_error(line, "missing value for " + key);

        if (key == "dt") {
            cfg.dt = detail::parse_number<double>(value, line, key);
        } else if (key == "duration") {
            cfg.duration = detail::parse_number<double>(value, line, key);
        } else if (key == "num_runs") {
            cfg.num_runs = detail::parse_number<int>(value, line, key);
        } else if (key == "seed") {
            cfg.seed = detail::parse_number<std::uint64_t>(value, line, key);
        } else if (key == "q_scale") {
            cfg.q_scale = detail::parse_number<double>(value, line, key);
        } else if (key == "r_scale") {
            cfg.r_scale = detail::parse_number<double>(value, line, key);
        } else if (key == "rho") {
            cfg.rho = detail::parse_number<double>(value, line, key);
        } else if (key == "threads") {
            cfg.threads = detail::parse_number<int>(value, line, key);
        } else if (key == "q0") {
            const auto q = detail::parse_numbers(value, line, key);
            if (q.size() != 4) detail::config_error(line, "q0 needs 4 numbers");
            cfg.q0 = Quaternion(q[0], q[1], q[2], q[3]);
        } else if (key == "p0") {
            const auto p = detail::parse_numbers(value, line, key);
            if (p.size() == 1) {
                cfg.P0 = p[0] * Matrix::Identity(3, 3);
            } else if (p.size() == 9) {
                cfg.P0 = Eigen::Map<const Eigen::Matrix<double, 3, 3, Eigen::RowMajor>>(p.data());
            } else {
                detail::config_error(line, "p0 needs 1 or 9 numbers");
            }
        } else if (key == "filters") {
            filter_names = detail::split_list(value);
            filters_line = line;
        } else if (key == "omega_units") {
            if (value == "degrees") {
                cfg.omega_units = AngleUnits::Degrees;
            } else if (value == "radians") {
                cfg.omega_units = AngleUnits::Radians;
            } else {
                detail::config_error(line, "omega_units must be degrees or radians");
            }
        } else {
            detail::config_error(line, "unknown key '" + key + "'");
        }
    }
    if (cfg.rho <= 0.0) detail::config_error(0, "rho must be positive");
    if (filter_names.empty() || (filter_names.size() == 1 && filter_names[0] == "all")) {
        cfg.filters = default_filters(cfg.rho);
    } else {
        cfg.filters.clear();
        for (const auto& name : filter_names) cfg.filters.push_back(detail::parse_filter(name, cfg.rho, filters_line));
    }
    cfg.validate();
    return cfg;
}

inline SatelliteConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::ContractViolation, "cannot open config file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

}  // namespace riukf::bench
