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

#include "bsa/config.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>

#include "bsa/errors.hpp"
#include "bsa/io.hpp"

namespace bsa {

namespace {

using nlohmann::json;

json parse_json(const std::string& text) {
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded()) throw ConfigError("malformed JSON configuration");
    if (!doc.is_object()) throw ConfigError("configuration must be a JSON object");
    return doc;
}

double angle_of(const json& v, const char* field) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) return parse_angle(v.get<std::string>());
    throw ConfigError(std::string("field '") + field + "' must be a number or angle string");
}

double number_of(const json& obj, const char* field, double fallback) {
    if (!obj.contains(field)) return fallback;
    if (!obj[field].is_number()) {
        throw ConfigError(std::string("field '") + field + "' must be a number");
    }
    return obj[field].get<double>();
}

int int_of(const json& obj, const char* field, int fallback) {
    if (!obj.contains(field)) return fallback;
    if (!obj[field].is_number_integer()) {
        throw ConfigError(std::string("field '") + field + "' must be an integer");
    }
    return obj[field].get<int>();
}

bool bool_of(const json& obj, const char* field, bool fallback) {
    if (!obj.contains(field)) return fallback;
    if (!obj[field].is_boolean()) {
        throw ConfigError(std::string("field '") + field + "' must be a boolean");
    }
    return obj[field].get<bool>();
}

HybridState parse_state(const json& obj) {
    HybridState x;
    if (!obj.is_object()) throw ConfigError("'initial_state' must be an object");
    for (const auto& [key, value] : obj.items()) {
        if (key == "theta") x.theta = angle_of(value, "theta");
        else if (key == "psi") x.psi = angle_of(value, "psi");
        else if (key == "q") x.q = angle_of(value, "q");
        else if (key == "psi_dot") x.psi_dot = value.get<double>();
        else if (key == "q_dot") x.q_dot = value.get<double>();
        else if (key == "h") x.h = value.get<double>();
        else throw ConfigError("unknown state field '" + key + "'");
    }
    return x;
}

HysteresisForm parse_form(const json& obj) {
    const std::string name = obj.value("hysteresis_form", "rate");
    if (name == "rate") return HysteresisForm::RateMagnitude;
    if (name == "deflection") return HysteresisForm::DeflectionMagnitude;
    throw ConfigError("hysteresis_form must be 'rate' or 'deflection'");
}

ControlSignal parse_control(const json& obj) {
    if (!obj.contains("control")) return ControlSignal::constant(0.0);
    const json& c = obj["control"];
    if (!c.is_object() || !c.contains("kind")) {
        throw ConfigError("'control' needs a 'kind' of constant|samples|csv");
    }
    const std::string kind = c["kind"].get<std::string>();
    if (kind == "constant") {
        return ControlSignal::constant(number_of(c, "value", 0.0));
    }
    if (kind == "samples") {
        if (!c.contains("t") || !c.contains("u")) {
            throw ConfigError("sampled control needs 't' and 'u' arrays");
        }
        return ControlSignal::sampled(c["t"].get<std::vector<double>>(),
                                      c["u"].get<std::vector<double>>());
    }
    if (kind == "csv") {
        if (!c.contains("path")) throw ConfigError("csv control needs a 'path'");
        std::ifstream in(c["path"].get<std::string>());
        if (!in) throw ConfigError("cannot open control CSV '" + c["path"].get<std::string>() + "'");
        std::string line;
        std::getline(in, line);  // header t,u
        std::vector<double> ts, us;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const auto comma = line.find(',');
            if (comma == std::string::npos) throw ConfigError("control CSV rows must be 't,u'");
            ts.push_back(std::stod(line.substr(0, comma)));
            us.push_back(std::stod(line.substr(comma + 1)));
        }
        return ControlSignal::sampled(std::move(ts), std::move(us));
    }
    throw ConfigError("unknown control kind '" + kind + "'");
}

std::vector<Mode> parse_modes(const json& arr, const char* field) {
    if (!arr.is_array() || arr.empty()) {
        throw ConfigError(std::string("'") + field + "' must be a non-empty mode array");
    }
    std::vector<Mode> modes;
    for (const auto& m : arr) modes.push_back(mode_from_name(m.get<std::string>()));
    return modes;
}

std::vector<double> parse_grid(const json& obj, bool degrees_allowed) {
    auto expand = [](const json& spec, double unit) {
        const double start = spec.value("start", 0.0) * unit;
        const double stop = spec.value("stop", 0.0) * unit;
        const double step = spec.value("step", 0.0) * unit;
        if (!(step > 0.0) || stop < start) throw ConfigError("invalid grid range");
        std::vector<double> grid;
        for (double v = start; v <= stop + 1e-9 * step; v += step) grid.push_back(v);
        return grid;
    };
    if (obj.contains("grid")) {
        const json& g = obj["grid"];
        if (g.is_array()) return g.get<std::vector<double>>();
        if (g.is_object()) return expand(g, 1.0);
        throw ConfigError("'grid' must be an array or {start, stop, step}");
    }
    if (degrees_allowed && obj.contains("grid_deg")) {
        const json& g = obj["grid_deg"];
        const double unit = M_PI / 180.0;
        if (g.is_array()) {
            std::vector<double> grid;
            for (const auto& v : g) grid.push_back(v.get<double>() * unit);
            return grid;
        }
        if (g.is_object()) return expand(g, unit);
        throw ConfigError("'grid_deg' must be an array or {start, stop, step}");
    }
    throw ConfigError("sweep configuration needs a 'grid'");
}

CollocationConfig parse_colloc(const json& obj) {
    CollocationConfig cfg;
    cfg.segments_per_phase = int_of(obj, "segments_per_phase", cfg.segments_per_phase);
    if (obj.contains("scheme")) {
        const std::string s = obj["scheme"].get<std::string>();
        if (s == "trapezoidal") cfg.scheme = CollocationScheme::Trapezoidal;
        else if (s == "hermite-simpson") cfg.scheme = CollocationScheme::HermiteSimpson;
        else throw ConfigError("scheme must be 'trapezoidal' or 'hermite-simpson'");
    }
    cfg.kkt_tol = number_of(obj, "kkt_tol", cfg.kkt_tol);
    cfg.max_iter = int_of(obj, "max_iter", cfg.max_iter);
    cfg.multi_start = int_of(obj, "multi_start", cfg.multi_start);
    cfg.seed = static_cast<unsigned>(int_of(obj, "seed", 0));
    cfg.min_phase_duration = number_of(obj, "min_phase_duration", cfg.min_phase_duration);
    return cfg;
}

} // namespace

double parse_angle(const std::string& text) {
    size_t idx = 0;
    double value;
    try {
        value = std::stod(text, &idx);
    } catch (const std::exception&) {
        throw ConfigError("cannot parse angle '" + text + "'");
    }
    std::string unit = text.substr(idx);
    unit.erase(std::remove_if(unit.begin(), unit.end(), ::isspace), unit.end());
    if (unit.empty() || unit == "rad") return value;
    if (unit == "deg") return value * M_PI / 180.0;
    throw ConfigError("unknown angle unit '" + unit + "' (expected deg or rad)");
}

std::string canonical_json(const std::string& json_text) {
    return parse_json(json_text).dump();
}

SimulateConfig parse_simulate_config(const std::string& json_text) {
    const json doc = parse_json(json_text);
    SimulateConfig cfg;

    if (!doc.contains("schedule") || !doc["schedule"].is_array()) {
        throw ConfigError("simulate configuration needs a 'schedule' array");
    }
    for (const auto& entry : doc["schedule"]) {
        if (!entry.contains("mode") || !entry.contains("duration")) {
            throw ConfigError("schedule entries need 'mode' and 'duration'");
        }
        PhaseSpec ph;
        ph.mode = mode_from_name(entry["mode"].get<std::string>());
        ph.duration = entry["duration"].get<double>();
        cfg.schedule.phases.push_back(ph);
    }
    cfg.schedule.control = parse_control(doc);
    cfg.schedule.validate();

    if (doc.contains("initial_state")) cfg.initial_state = parse_state(doc["initial_state"]);
    cfg.dt = number_of(doc, "dt", cfg.dt);
    if (!(cfg.dt > 0.0)) throw ConfigError("field 'dt' must be positive");
    cfg.options.law = bool_of(doc, "hysteresis", false) ? SpringLaw::BoucWen : SpringLaw::Linear;
    cfg.options.hysteresis_form = parse_form(doc);
    cfg.options.apply_delays = bool_of(doc, "delays", false);
    cfg.options.smoothed_friction = bool_of(doc, "smoothed_friction", false);
    return cfg;
}

OptimizeConfig parse_optimize_config(const std::string& json_text) {
    const json doc = parse_json(json_text);
    OptimizeConfig cfg;

    if (!doc.contains("plan")) throw ConfigError("optimize configuration needs a 'plan'");
    cfg.plan.modes = parse_modes(doc["plan"], "plan");

    if (doc.contains("t_f")) {
        cfg.plan.t_f_fixed = true;
        cfg.plan.t_f = doc["t_f"].get<double>();
    } else if (doc.contains("t_f_range")) {
        const auto range = doc["t_f_range"].get<std::vector<double>>();
        if (range.size() != 2) throw ConfigError("'t_f_range' must be [min, max]");
        cfg.plan.t_f_fixed = false;
        cfg.plan.t_f_range = {range[0], range[1]};
    } else {
        throw ConfigError("optimize configuration needs 't_f' or 't_f_range'");
    }
    if (doc.contains("duration_bounds")) {
        for (const auto& b : doc["duration_bounds"]) {
            const auto pair = b.get<std::vector<double>>();
            if (pair.size() != 2) throw ConfigError("duration bounds must be [min, max] pairs");
            cfg.plan.duration_bounds.emplace_back(pair[0], pair[1]);
        }
    }
    cfg.plan.validate();

    cfg.colloc = parse_colloc(doc);
    if (doc.contains("initial_state")) cfg.boundary.initial = parse_state(doc["initial_state"]);
    if (doc.contains("terminal_state")) {
        const json& term = doc["terminal_state"];
        const char* names[5] = {"theta", "psi", "q", "psi_dot", "q_dot"};
        for (const auto& [key, value] : term.items()) {
            bool known = false;
            for (int i = 0; i < 5; ++i) {
                if (key == names[i]) {
                    cfg.boundary.terminal[static_cast<size_t>(i)] =
                        i < 3 ? angle_of(value, names[i]) : value.get<double>();
                    known = true;
                }
            }
            if (!known) throw ConfigError("unknown terminal state field '" + key + "'");
        }
    }
    if (doc.contains("path_bounds")) {
        const json& pb = doc["path_bounds"];
        PathBounds bounds;  // defaults replaced from params by the caller when absent
        bounds.theta_range = number_of(pb, "theta_range", bounds.theta_range);
        bounds.phi_max = number_of(pb, "phi_max", bounds.phi_max);
        bounds.u_max = number_of(pb, "u_max", bounds.u_max);
        cfg.path_bounds = bounds;
    }
    cfg.dt_replay = number_of(doc, "dt", cfg.dt_replay);
    if (!(cfg.dt_replay > 0.0)) throw ConfigError("field 'dt' must be positive");
    return cfg;
}

SweepSpec parse_sweep_config(const std::string& json_text, SweepKind kind) {
    const json doc = parse_json(json_text);
    SweepSpec spec;
    spec.kind = kind;
    spec.grid = parse_grid(doc, kind == SweepKind::InitialAngle);
    if (doc.contains("bsa_plan")) spec.bsa_plan = parse_modes(doc["bsa_plan"], "bsa_plan");
    else if (kind == SweepKind::InitialAngle) spec.bsa_plan = {Mode::Stg, Mode::Sea};
    if (doc.contains("sea_plan")) spec.sea_plan = parse_modes(doc["sea_plan"], "sea_plan");
    spec.repetitions = int_of(doc, "repetitions", spec.repetitions);
    spec.perturbation = number_of(doc, "perturbation", spec.perturbation);
    spec.seed = static_cast<unsigned>(int_of(doc, "seed", 0));
    spec.free_tf_max = number_of(doc, "t_f_max", spec.free_tf_max);
    spec.colloc = parse_colloc(doc);
    spec.colloc.seed = spec.seed;
    spec.dt_replay = number_of(doc, "dt", spec.dt_replay);
    spec.fit_degree = int_of(doc, "fit_degree", spec.fit_degree);
    spec.threads = int_of(doc, "threads", spec.threads);
    spec.validate();
    return spec;
}

IdentifyConfig parse_identify_config(const std::string& json_text) {
    const json doc = parse_json(json_text);
    IdentifyConfig cfg;
    cfg.theta_dot_set = number_of(doc, "theta_dot_set", cfg.theta_dot_set);
    cfg.theta_lim = number_of(doc, "theta_lim", cfg.theta_lim);
    cfg.cycles = int_of(doc, "cycles", cfg.cycles);
    cfg.dt = number_of(doc, "dt", cfg.dt);
    cfg.input_csv = doc.value("input_csv", cfg.input_csv);
    cfg.noise = number_of(doc, "noise", cfg.noise);
    cfg.seed = static_cast<unsigned>(int_of(doc, "seed", 0));
    cfg.fit_K = bool_of(doc, "fit_K", cfg.fit_K);
    cfg.delay_inject = number_of(doc, "delay_inject", cfg.delay_inject);
    cfg.delay_dt = number_of(doc, "delay_dt", cfg.delay_dt);
    cfg.delay_threshold = number_of(doc, "delay_threshold", cfg.delay_threshold);
    cfg.form = parse_form(doc);
    return cfg;
}

EnergyConfig parse_energy_config(const std::string& json_text) {
    const json doc = parse_json(json_text);
    EnergyConfig cfg;
    if (!doc.contains("input_csv")) throw ConfigError("energy configuration needs 'input_csv'");
    cfg.input_csv = doc["input_csv"].get<std::string>();
    const std::string law = doc.value("law", "linear");
    if (law == "linear") cfg.law = SpringLaw::Linear;
    else if (law == "boucwen") cfg.law = SpringLaw::BoucWen;
    else throw ConfigError("law must be 'linear' or 'boucwen'");
    return cfg;
}

} // namespace bsa
