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

// Command-line front end. All toolkit functionality is reached through the
// shared library's C API (bsa/bsa.h); this file only handles argument
// parsing, config-file plumbing, and exit codes.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include "bsa/bsa.h"

namespace {

using nlohmann::json;

struct CommonOptions {
    std::string params_path;
    std::string config_path;
    std::string out_dir = ".";
    std::optional<double> dt;
    std::optional<long long> seed;
    std::optional<bool> hysteresis;
    std::optional<bool> delays;
    std::optional<long long> repetitions;
};

int exit_code(bsa_status status) {
    switch (status) {
        case BSA_OK: return 0;
        case BSA_ERR_INVALID_ARGUMENT:
        case BSA_ERR_CONFIG: return 2;
        case BSA_ERR_NUMERICAL: return 3;
        case BSA_ERR_SOLVER: return 4;
        case BSA_ERR_PARTIAL: return 5;
        case BSA_ERR_INTERNAL: return 1;
    }
    return 1;
}

void add_common(CLI::App* cmd, CommonOptions& opt, bool config_required) {
    cmd->add_option("--params", opt.params_path, "Parameter file (key = value)");
    auto* config = cmd->add_option("--config", opt.config_path, "JSON configuration file");
    if (config_required) config->required();
    cmd->add_option("--out", opt.out_dir, "Output directory (default: current)");
    cmd->add_option("--dt", opt.dt, "Override the config's time step / replay step [s]");
    cmd->add_option("--seed", opt.seed, "Override the config's random seed");
    cmd->add_flag("--hysteresis,!--no-hysteresis", opt.hysteresis,
                  "Simulate with the Bouc-Wen spring law");
    cmd->add_flag("--delays,!--no-delays", opt.delays, "Apply clutch engagement delays");
    cmd->add_option("--repetitions", opt.repetitions, "Override the config's repetition count");
}

// Effective config = file content (or {}) with CLI overrides merged in.
std::string effective_config(const CommonOptions& opt, std::string* error) {
    json doc = json::object();
    if (!opt.config_path.empty()) {
        std::ifstream in(opt.config_path);
        if (!in) {
            *error = "cannot open config file '" + opt.config_path + "'";
            return {};
        }
        std::stringstream buffer;
        buffer << in.rdbuf();
        doc = json::parse(buffer.str(), nullptr, false);
        if (doc.is_discarded()) {
            *error = "malformed JSON in '" + opt.config_path + "'";
            return {};
        }
    }
    if (opt.dt) doc["dt"] = *opt.dt;
    if (opt.seed) doc["seed"] = *opt.seed;
    if (opt.hysteresis) doc["hysteresis"] = *opt.hysteresis;
    if (opt.delays) doc["delays"] = *opt.delays;
    if (opt.repetitions) doc["repetitions"] = *opt.repetitions;
    return doc.dump();
}

int run_command(const CommonOptions& opt,
                bsa_status (*command)(const bsa_params*, const char*, const char*)) {
    bsa_params* params = nullptr;
    bsa_status status = opt.params_path.empty()
                            ? bsa_params_create(&params)
                            : bsa_params_load(opt.params_path.c_str(), &params);
    if (status != BSA_OK) {
        std::fprintf(stderr, "error: %s\n", bsa_last_error());
        return exit_code(status);
    }

    std::string error;
    const std::string config = effective_config(opt, &error);
    if (!error.empty()) {
        std::fprintf(stderr, "error: %s\n", error.c_str());
        bsa_params_free(params);
        return 2;
    }

    status = command(params, config.c_str(), opt.out_dir.c_str());
    if (status != BSA_OK) {
        std::fprintf(stderr, "error: %s\n", bsa_last_error());
    }
    bsa_params_free(params);
    return exit_code(status);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bi-stiffness actuator toolkit: simulation, trajectory optimization, "
                 "experiment sweeps, and identification"};
    app.require_subcommand(1);

    struct Sub {
        const char* name;
        const char* help;
        bool config_required;
        bsa_status (*command)(const bsa_params*, const char*, const char*);
        CommonOptions opt;
        CLI::App* cmd = nullptr;
    };
    Sub subs[] = {
        {"simulate", "Run a mode schedule open loop and export the trajectory", true,
         &bsa_cmd_simulate, {}, nullptr},
        {"optimize", "Solve a multi-phase velocity-maximization OCP", true, &bsa_cmd_optimize,
         {}, nullptr},
        {"sweep-tf", "Final-time sweep: BSA vs SEA from rest", true, &bsa_cmd_sweep_final_time,
         {}, nullptr},
        {"sweep-q0", "Initial-angle sweep: BSA vs SEA with free final time", true,
         &bsa_cmd_sweep_initial_angle, {}, nullptr},
        {"identify", "Generate or load loading cycles and fit K, Bouc-Wen, delays", false,
         &bsa_cmd_identify, {}, nullptr},
        {"energy", "Compute the energy trace of an exported trajectory", true, &bsa_cmd_energy,
         {}, nullptr},
    };
    for (auto& sub : subs) {
        sub.cmd = app.add_subcommand(sub.name, sub.help);
        add_common(sub.cmd, sub.opt, sub.config_required);
    }

    CLI11_PARSE(app, argc, argv);

    for (const auto& sub : subs) {
        if (sub.cmd->parsed()) return run_command(sub.opt, sub.command);
    }
    return 2;
}
