#pragma once

// key = value run configuration:
//
//   kind = waterfall            # waterfall | delta_peak | flat_profile (or delta, flat)
//   m_u = 0.587
//   m_d = 4.0                   # flat profile only
//   temperatures = 0, 0.1, 0.2
//   omega_grid = log:1e-4:0.999:200   # lin|log : lo : hi : count, in units of Omega
//   strictness = 10

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "abh/dispersion.hpp"
#include "abh/errors.hpp"
#include "abh/flow_config.hpp"

namespace abh {

struct OmegaGrid {
    bool logarithmic = true;
    double lo = 1e-4, hi = 0.999;  // fractions of Omega
    int count = 200;

    std::vector<double> fractions() const {
        std::vector<double> f;
        if (count <= 0) return f;
        if (count == 1) return {lo};
        for (int k = 0; k < count; ++k) {
            const double t = static_cast<double>(k) / (count - 1);
            f.push_back(logarithmic ? lo * std::pow(hi / lo, t) : lo + (hi - lo) * t);
        }
        return f;
    }

    // Absolute frequencies, dropping points inside the threshold guard band.
    std::vector<double> omegas(const FlowConfig& c, double guard = kDefaultThresholdGuard) const {
        const double Om = threshold_omega(c);
        std::vector<double> w;
        for (double f : fractions()) {
            const double om = f * Om;
            if (om <= 0.0 || std::abs(om - Om) < guard * Om) continue;
            w.push_back(om);
        }
        return w;
    }
};

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

inline double parse_double(const std::string& s, const std::string& what) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("cannot read " + what + " from '" + s + "'");
    }
}

inline std::vector<double> parse_list(const std::string& s, const std::string& what) {
    std::vector<double> v;
    for (const auto& item : split(s, ',')) v.push_back(parse_double(item, what));
    return v;
}

inline OmegaGrid parse_omega_grid(const std::string& spec) {
    const auto parts = split(spec, ':');
    if (parts.size() != 4) throw ConfigError("omega grid must read lin|log:lo:hi:count, got '" + spec + "'");
    OmegaGrid g;
    if (parts[0] == "log") {
        g.logarithmic = true;
    } else if (parts[0] == "lin") {
        g.logarithmic = false;
    } else {
        throw ConfigError("omega grid spacing must be lin or log");
    }
    g.lo = parse_double(parts[1], "omega grid start");
    g.hi = parse_double(parts[2], "omega grid end");
    g.count = static_cast<int>(parse_double(parts[3], "omega grid count"));
    if (g.count <= 0) throw ConfigError("omega grid is empty");
    if (!(g.lo > 0.0) || !(g.hi >= g.lo)) throw ConfigError("omega grid bounds must satisfy 0 < lo <= hi");
    return g;
}

struct RunConfig {
    FlowKind kind = FlowKind::Waterfall;
    double m_u = 0.587;
    std::optional<double> m_d;
    std::vector<double> temperatures{0.0};
    OmegaGrid grid;
    double strictness = 10.0;
    std::map<std::string, std::string> raw;  // every key as read, for CSV headers

    FlowConfig flow() const { return build_config(kind, m_u, m_d); }
};

inline RunConfig parse_run_config(std::istream& in) {
    RunConfig rc;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        std::transform(key.begin(), key.end(), key.begin(), [](unsigned char ch) { return std::tolower(ch); });
        rc.raw[key] = value;
        if (key == "kind") {
            rc.kind = parse_flow_kind(value);
        } else if (key == "m_u") {
            rc.m_u = parse_double(value, "m_u");
        } else if (key == "m_d") {
            rc.m_d = parse_double(value, "m_d");
        } else if (key == "temperatures" || key == "t") {
            rc.temperatures = parse_list(value, "temperature");
        } else if (key == "omega_grid") {
            rc.grid = parse_omega_grid(value);
        } else if (key == "strictness") {
            rc.strictness = parse_double(value, "strictness");
        } else {
            throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        }
    }
    for (double T : rc.temperatures)
        if (T < 0.0) throw ConfigError("temperatures must be non-negative");
    return rc;
}

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    return parse_run_config(in);
}

}  // namespace abh
