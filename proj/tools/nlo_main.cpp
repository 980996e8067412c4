#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "nlo/experiment.hpp"

namespace {

struct CommandInfo {
    const char* name;
    const char* help;
};

const std::vector<CommandInfo> kCommands = {
    {"growth-check", "verify the structural lemmas for a growth function"},
    {"minimize", "minimize the nonlocal energy with fixed exterior data"},
    {"dg-check", "sample the truncation inequality on the minimizer"},
    {"holder", "minimize, sample the truncation inequality, fit the oscillation bound"},
    {"bound", "minimize and check the sup bound across deltas"},
    {"inequalities", "embedding and level-set inequalities on the exterior profile"},
    {"sweep", "repeat the configured task across a parameter range"},
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"experiment runner for nonlocal functionals with two-exponent growth"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    long long seed = -1;
    int jobs = 1;

    for (const auto& cmd : kCommands) {
        CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
        sub->add_option("--config", config_path, "configuration file (json)")->required();
        sub->add_option("--out", out_dir, "output directory (default: out)");
        sub->add_option("--seed", seed, "override the configured seed");
        sub->add_option("--jobs", jobs, "worker threads for sweep fan-out")
            ->check(CLI::PositiveNumber);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    nlohmann::json config;
    {
        std::ifstream f(config_path);
        if (!f) {
            std::cerr << "cannot open config file '" << config_path << "'\n";
            return 2;
        }
        std::ostringstream buf;
        buf << f.rdbuf();
        try {
            config = nlohmann::json::parse(buf.str());
        } catch (const std::exception& e) {
            std::cerr << "config is not valid json: " << e.what() << "\n";
            return 2;
        }
    }
    if (!config.is_object()) {
        std::cerr << "config top level must be an object\n";
        return 2;
    }
    if (seed >= 0) config["seed"] = static_cast<std::uint64_t>(seed);

    nlo::RunOutput out;
    if (command == "sweep") {
        out = nlo::run_sweep(config, jobs);
    } else {
        config["task"] = command;
        out = nlo::run_experiment(config);
    }

    try {
        nlo::write_outputs(out, out_dir);
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }
    if (!out.message.empty()) std::cerr << out.message << "\n";
    return out.exit_code;
}
