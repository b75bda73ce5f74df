/*
 Copyright 2026 The BSA Toolkit Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#include "bsa/params.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "bsa/errors.hpp"

namespace bsa {

namespace {

void require_positive(double v, const char* field) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw ConfigError(std::string("parameter '") + field + "' must be strictly positive");
    }
}

void require_non_negative(double v, const char* field) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
        throw ConfigError(std::string("parameter '") + field + "' must be non-negative");
    }
}

// Spring-chain inertia rows that sum into J_psi.
constexpr std::array<const char*, 5> kChainRows = {"S_o", "T_i", "T_o", "B", "C_i"};

} // namespace

void ActuatorParams::validate() const {
    require_positive(J_psi, "J_psi");
    require_positive(J_q, "J_q");
    require_positive(mass, "L_m");
    require_positive(com, "L_cm");
    require_positive(grav, "g");
    require_positive(K, "K");
    require_non_negative(tauC_psi, "tauC_psi");
    require_non_negative(tauC_q, "tauC_q");
    require_non_negative(d_psi, "d_psi");
    require_non_negative(d_q, "d_q");
    require_non_negative(alpha, "alpha");
    require_non_negative(beta, "beta");
    require_non_negative(gamma, "gamma");
    require_positive(phi_max, "phi_max");
    require_positive(tau_s_max, "tau_s_max");
    require_positive(theta_range, "theta_range");
    require_positive(u_max, "u_max");
    require_non_negative(delay_brake, "delay_brake");
    require_non_negative(delay_clutch, "delay_clutch");
    require_positive(eps_sign, "eps_sign");
}

ActuatorParams aggregate_params(const std::map<std::string, double>& values) {
    ActuatorParams p;
    std::map<std::string, double> rest = values;

    auto take = [&rest](const std::string& key) -> const double* {
        auto it = rest.find(key);
        if (it == rest.end()) return nullptr;
        static thread_local double slot;
        slot = it->second;
        rest.erase(it);
        return &slot;
    };

    if (const double* v = take("J_psi")) {
        p.J_psi = *v;
        for (const char* row : kChainRows) take(row);  // direct value wins
    } else {
        double sum = 0.0;
        std::string missing;
        for (const char* row : kChainRows) {
            if (const double* rv = take(row)) {
                sum += *rv;
            } else {
                missing += missing.empty() ? row : std::string(", ") + row;
            }
        }
        if (!missing.empty()) {
            throw ConfigError("incomplete spring-chain inertia rows, missing: " + missing);
        }
        p.J_psi = sum;
    }

    if (const double* v = take("L")) p.J_q = *v;
    if (const double* v = take("J_q")) p.J_q = *v;
    if (const double* v = take("L_m")) p.mass = *v;
    if (const double* v = take("L_cm")) p.com = *v;
    if (const double* v = take("g")) p.grav = *v;
    if (const double* v = take("K")) p.K = *v;
    if (const double* v = take("tauC_psi")) p.tauC_psi = *v;
    if (const double* v = take("tauC_q")) p.tauC_q = *v;
    if (const double* v = take("d_psi")) p.d_psi = *v;
    if (const double* v = take("d_q")) p.d_q = *v;
    if (const double* v = take("alpha")) p.alpha = *v;
    if (const double* v = take("beta")) p.beta = *v;
    if (const double* v = take("gamma")) p.gamma = *v;
    if (const double* v = take("phi_max")) p.phi_max = *v;
    if (const double* v = take("tau_s_max")) p.tau_s_max = *v;
    if (const double* v = take("theta_range")) p.theta_range = *v;
    if (const double* v = take("u_max")) p.u_max = *v;
    if (const double* v = take("delay_brake")) p.delay_brake = *v;
    if (const double* v = take("delay_clutch")) p.delay_clutch = *v;
    if (const double* v = take("eps_sign")) p.eps_sign = *v;

    if (!rest.empty()) {
        throw ConfigError("unknown parameter key '" + rest.begin()->first + "'");
    }
    p.validate();
    return p;
}

ActuatorParams load_params(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open parameter file '" + path + "'");

    std::map<std::string, double> values;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto is_blank = [](const std::string& s) {
            return s.find_first_not_of(" \t\r\n") == std::string::npos;
        };
        if (is_blank(line)) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected 'key = value'");
        }
        auto trim = [](std::string s) {
            size_t a = s.find_first_not_of(" \t\r\n");
            size_t b = s.find_last_not_of(" \t\r\n");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": empty key");
        }
        char* end = nullptr;
        double value = std::strtod(val.c_str(), &end);
        if (end == val.c_str() || *end != '\0') {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": field '" + key +
                              "' has a non-numeric value '" + val + "'");
        }
        if (values.count(key)) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": duplicate field '" + key + "'");
        }
        values[key] = value;
    }
    return aggregate_params(values);
}

std::map<std::string, double> params_to_key_values(const ActuatorParams& p) {
    return {
        {"J_psi", p.J_psi},
        {"J_q", p.J_q},
        {"L_m", p.mass},
        {"L_cm", p.com},
        {"g", p.grav},
        {"K", p.K},
        {"tauC_psi", p.tauC_psi},
        {"tauC_q", p.tauC_q},
        {"d_psi", p.d_psi},
        {"d_q", p.d_q},
        {"alpha", p.alpha},
        {"beta", p.beta},
        {"gamma", p.gamma},
        {"phi_max", p.phi_max},
        {"tau_s_max", p.tau_s_max},
        {"theta_range", p.theta_range},
        {"u_max", p.u_max},
        {"delay_brake", p.delay_brake},
        {"delay_clutch", p.delay_clutch},
        {"eps_sign", p.eps_sign},
    };
}

void save_params(const ActuatorParams& p, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write parameter file '" + path + "'");
    for (const auto& [key, value] : params_to_key_values(p)) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.17g", value);
        out << key << " = " << buf << "\n";
    }
    if (!out) throw ConfigError("failed while writing '" + path + "'");
}

} // namespace bsa
