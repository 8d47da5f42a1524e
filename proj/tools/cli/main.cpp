#include "config.hpp"
#include "experiments.hpp"
#include "report.hpp"

#include <finslab/errors.hpp>

#include <CLI11.hpp>

#include <iostream>

namespace {

int usage_error(const std::string& what) {
    std::cerr << "finslab: " << what << '\n';
    return 2;
}

} // namespace

int main(int argc, char** argv) {
    using namespace finslab::cli;

    CLI::App app{"Numerical experiments on conformally related Finsler spacetimes"};
    std::string experiment;
    std::string config_path;
    std::string out;
    Overrides overrides;
    app.add_option("experiment", experiment, "Experiment to run")
        ->required()
        ->check(CLI::IsMember(experiment_names()));
    app.add_option("--config", config_path, "INI configuration file")->required();
    app.add_option("--out", out, "Output directory (default experiment.out, else finslab-out/<experiment>)");
    app.add_option("--seed", overrides.seed, "Sampling seed");
    app.add_option("--step", overrides.step, "Integration step");
    app.add_option("--tol", overrides.tol, "Tolerance applied to every assertion");
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    Report report;
    try {
        const Config config = Config::load(config_path);
        if (out.empty()) out = config.text("experiment.out", "finslab-out/" + experiment);
        report = run_experiment(experiment, config, overrides);
    } catch (const ConfigError& e) {
        return usage_error(e.what());
    } catch (const std::invalid_argument& e) {
        return usage_error(e.what());
    } catch (const finslab::ParseError& e) {
        return usage_error(e.what());
    } catch (const finslab::DimensionMismatch& e) {
        return usage_error(e.what());
    } catch (const finslab::InadmissibleSample& e) {
        return usage_error(e.what());
    } catch (const finslab::NotLightlike& e) {
        return usage_error(e.what());
    } catch (const finslab::PreconditionFailure& e) {
        return usage_error(e.what());
    } catch (const finslab::Error& e) {
        std::cerr << "finslab: " << experiment << " failed: " << e.what() << '\n';
        return 1;
    }

    try {
        write_report(report, out);
    } catch (const std::exception& e) {
        std::cerr << "finslab: cannot write report to " << out << ": " << e.what() << '\n';
        return 1;
    }
    std::cout << format_records(report);
    return report.pass() ? 0 : 1;
}
