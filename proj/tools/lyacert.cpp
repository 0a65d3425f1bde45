// Command-line front end: run, validate and list built-in systems.
#include <CLI11.hpp>

#include <iostream>

#include "lyacert/runner.hpp"

int main(int argc, char** argv) {
    using namespace lyacert;
    CLI::App app{"Numerical Lyapunov certificates and convergence-rate checks for ODE scenarios"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    RunOverrides overrides;
    std::string run_path;
    auto* run = app.add_subcommand("run", "Simulate and certify a scenario, writing report.json and CSV files");
    run->add_option("scenario", run_path, "Scenario YAML file")->required();
    run->add_option("--output-dir", overrides.output_dir, "Directory for report.json and CSV output");
    run->add_option("--seed", overrides.seed, "Seed for stability probes and sublevel sampling");
    run->add_option("--dense-dt", overrides.dense_dt, "Output grid spacing (0 keeps raw solver steps)");

    std::string validate_path;
    auto* validate = app.add_subcommand("validate", "Check a scenario without integrating");
    validate->add_option("scenario", validate_path, "Scenario YAML file")->required();

    auto* list = app.add_subcommand("list-builtins", "Print built-in system ids");

    CLI11_PARSE(app, argc, argv);

    if (*run) {
        const RunOutcome out = run_scenario(run_path, overrides);
        for (const auto& m : out.messages) std::cerr << m << '\n';
        if (out.report) {
            std::cout << "overall_pass: " << (out.report->overall_pass ? "true" : "false") << '\n'
                      << "report: " << out.output_dir << "/report.json\n";
        }
        return out.exit_code;
    }
    if (*validate) {
        try {
            const auto diags = validate_scenario(validate_path);
            for (const auto& d : diags) std::cout << format(d) << '\n';
            if (diags.empty()) std::cout << "valid\n";
            return diags.empty() ? kExitPass : kExitInvalid;
        } catch (const Error& e) {
            std::cerr << e.what() << '\n';
            return kExitInvalid;
        }
    }
    if (*list) {
        for (const auto& id : builtin_system_ids()) std::cout << id << '\n';
        return kExitPass;
    }
    return kExitInvalid;
}
