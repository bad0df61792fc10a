#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "camsearch/commands.hpp"
#include "camsearch/errors.hpp"

namespace {

struct CommonFlags {
    std::string scenario;
    std::string out;
    std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonFlags& flags, const std::string& defaultOut) {
    flags.out = defaultOut;
    cmd->add_option("--scenario", flags.scenario, "Scenario file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", flags.out, "Output file")->capture_default_str();
    cmd->add_option("--seed", flags.seed, "Override the scenario seed");
}

camsearch::Scenario load(const CommonFlags& flags) {
    camsearch::Scenario s = camsearch::load_scenario(flags.scenario);
    if (flags.seed) s.search.seed = *flags.seed;
    return s;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Energy-bounded camera pose search for low-noise imaging"};
    app.require_subcommand(1);

    CommonFlags meshFlags, energyFlags, searchFlags, sensFlags, denoiseFlags;

    auto* mesh = app.add_subcommand("mesh", "Mesh the operational space and report node counts");
    add_common(mesh, meshFlags, "mesh.csv");

    std::vector<double> tauDelays;
    auto* energy = app.add_subcommand("energy-table", "Energy and settling time over controller delay constants");
    add_common(energy, energyFlags, "energy.csv");
    energy->add_option("--tau-delays", tauDelays, "Delay time constants in seconds (default: scenario list)")
        ->delimiter(',');

    auto* search = app.add_subcommand("search", "Run one search and write its trace");
    add_common(search, searchFlags, "trace.csv");

    std::string parameter;
    std::vector<double> values;
    int seeds = 20;
    auto* sens = app.add_subcommand("sensitivity", "Sweep kEst or kSd over several seeds");
    add_common(sens, sensFlags, "sensitivity.csv");
    sens->add_option("--param", parameter, "kEst or kSd")->required()->check(CLI::IsMember({"kEst", "kSd"}));
    sens->add_option("--values", values, "Parameter values")->required()->delimiter(',');
    sens->add_option("--seeds", seeds, "Runs per value, seeds counted up from the scenario seed")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);

    std::vector<int> counts;
    auto* denoise = app.add_subcommand("denoise-bench", "Frame averaging versus Gaussian filtering");
    add_common(denoise, denoiseFlags, "denoise.csv");
    denoise->add_option("--counts", counts, "Averaging counts (default: scenario list)")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (mesh->parsed()) {
            camsearch::cmd_mesh(load(meshFlags), meshFlags.out, std::cout);
        } else if (energy->parsed()) {
            const auto s = load(energyFlags);
            camsearch::cmd_energy_table(s, energy->count("--tau-delays") ? tauDelays : s.energyTauDelays,
                                        energyFlags.out, std::cout);
        } else if (search->parsed()) {
            camsearch::cmd_search(load(searchFlags), searchFlags.out, std::cout);
        } else if (sens->parsed()) {
            camsearch::cmd_sensitivity(load(sensFlags), parameter, values, seeds, sensFlags.out, std::cout);
        } else if (denoise->parsed()) {
            const auto s = load(denoiseFlags);
            camsearch::cmd_denoise_bench(s, denoise->count("--counts") ? counts : s.denoise.averageCounts,
                                         denoiseFlags.out, std::cout);
        }
    } catch (const camsearch::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const camsearch::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
