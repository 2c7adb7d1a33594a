#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "spinbath/commands.hpp"

int main(int argc, char** argv)
{
    using namespace spinbath;

    CLI::App app{"Entanglement stability of spin ensembles under Markovian decoherence"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    std::string format;
    int threads = 1;
    unsigned long long seed = 0;

    const std::vector<std::pair<std::string, std::string>> commands{
        {"rate", "Linear-entropy rate of the initial state (numeric, analytic, estimate)"},
        {"simulate", "Evolve the initial state and tabulate purity, trace and fidelity"},
        {"sweep", "Evaluate rates over a parameter grid"},
        {"dfs", "Certify candidate states as decoherence-free"},
        {"state", "Print a state's amplitudes and Schmidt data"},
    };
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config_path, "Scenario JSON file")->required();
        sub->add_option("--out", out_path, "Output file (default: output.path or stdout)");
        sub->add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--threads", threads, "Sweep worker count")->check(CLI::PositiveNumber);
        sub->add_option("--seed", seed, "Recorded in the output header");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    ScenarioConfig config;
    try {
        config = load_config(config_path);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    }

    RunOptions options;
    options.format = format.empty() ? config.output.format : format;
    options.threads = threads;
    options.seed = seed;

    const CommandResult result = run_command(command, config, options);
    if (!result.message.empty())
        std::cerr << result.message << '\n';
    if (result.table.columns.empty())
        return result.exit_code;

    const std::string path = out_path.empty() ? config.output.path : out_path;
    if (path.empty()) {
        write_table(std::cout, result.table, command, config, options);
    } else {
        std::ofstream out(path);
        if (!out) {
            std::cerr << "cannot open output file '" << path << "'\n";
            return kExitConfig;
        }
        write_table(out, result.table, command, config, options);
    }
    return result.exit_code;
}
