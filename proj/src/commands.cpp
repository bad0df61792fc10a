#include "camsearch/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "camsearch/errors.hpp"

namespace camsearch {
namespace {

// Seed stream for the benchmark's noisy frames; distinct from the search streams.
constexpr std::uint64_t kDenoiseStream = 0xD3A0;

std::ofstream open_output(const std::string& path) {
    const std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DomainError("cannot open output file " + path);
    return out;
}

std::string sibling_path(const std::string& path, const std::string& suffix) {
    std::filesystem::path p(path);
    const std::string ext = p.extension().string();
    p.replace_extension();
    return p.string() + suffix + (ext.empty() ? ".csv" : ext);
}

void write_spectrum_file(const std::string& path, const ImageFrame& frame) {
    auto out = open_output(path);
    write_spectrum_csv(out, radial_power_spectrum(frame));
}

}  // namespace

SpacePair build_space(const Scenario& scenario) {
    const SystemLayout layout = make_layout(scenario.visual, scenario.tool, scenario.camera, scenario.layout);
    validate_layout(layout);
    SpacePair pair{mesh_ideal_space(layout, scenario.gridResolution), {}};
    pair.reduced = scenario.applyJointLimits
                       ? reduce_by_joint_limits(pair.ideal, scenario.visual, scenario.limits, lensDownOrientation())
                       : pair.ideal;
    return pair;
}

EnergyModel build_energy_model(const Scenario& scenario) {
    return EnergyModel(scenario.visual, scenario.motor, scenario.control, lensDownOrientation());
}

SearchEnvironment build_environment(const Scenario& scenario, std::uint64_t seed) {
    SearchEnvironment env;
    env.field = scenario.field;
    env.target = scenario.target;
    env.scene = make_scene(scenario.searchFramePx, scenario.searchFramePx, seed);
    return env;
}

void cmd_mesh(const Scenario& scenario, const std::string& outPath, std::ostream& log) {
    const SpacePair spaces = build_space(scenario);
    auto out = open_output(outPath);
    write_mesh_csv(out, spaces.reduced);
    log << "grid_resolution_m=" << scenario.gridResolution << '\n'
        << "ideal_nodes=" << spaces.ideal.size() << '\n'
        << "reduced_nodes=" << spaces.reduced.size() << '\n';
}

void cmd_energy_table(const Scenario& scenario, const std::vector<double>& tauDelays, const std::string& outPath,
                      std::ostream& log) {
    const auto rows = energy_table(scenario.energyMoveFrom, scenario.energyMoveTo, scenario.visual, scenario.motor,
                                   scenario.control, tauDelays, lensDownOrientation());
    auto out = open_output(outPath);
    write_energy_csv(out, rows);
    log << "rows=" << rows.size() << '\n';
}

SearchResult cmd_search(const Scenario& scenario, const std::string& outPath, std::ostream& log) {
    const SpacePair spaces = build_space(scenario);
    const SearchEnergy energy(spaces.reduced, build_energy_model(scenario));
    const SearchEnvironment env = build_environment(scenario, scenario.search.seed);
    SearchResult result = run(spaces.reduced, env, energy, scenario.search);

    auto trace = open_output(outPath);
    write_trace_csv(trace, result.state.trace);
    std::ostringstream summary;
    write_summary(summary, result.summary);
    summary << "global_minimum_node=" << global_minimum_node(spaces.reduced, env.field) << '\n';
    auto summaryFile = open_output(outPath + ".summary");
    summaryFile << summary.str();
    log << summary.str();
    return result;
}

std::vector<SensitivityRow> sensitivity_sweep(const Scenario& scenario, const std::string& parameter,
                                              const std::vector<double>& values, int seeds) {
    if (parameter != "kEst" && parameter != "kSd") {
        throw ValidationError("sensitivity parameter must be kEst or kSd, got '" + parameter + "'");
    }
    if (values.empty()) throw EmptyList("sensitivity value list is empty");
    if (seeds < 1) throw ValidationError("sensitivity seed count must be at least 1");

    const SpacePair spaces = build_space(scenario);
    const SearchEnergy energy(spaces.reduced, build_energy_model(scenario));
    // One environment for the whole sweep; only the search seed varies per run.
    const SearchEnvironment env = build_environment(scenario, scenario.search.seed);
    const int globalMin = global_minimum_node(spaces.reduced, env.field);

    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    std::vector<SensitivityRow> rows;
    for (double value : sorted) {
        SearchConfig config = scenario.search;
        (parameter == "kEst" ? config.kEst : config.kSd) = value;
        config.validate();

        SensitivityRow row;
        row.value = value;
        int withDistance = 0;
        int atMinimum = 0;
        for (int i = 0; i < seeds; ++i) {
            config.seed = scenario.search.seed + static_cast<std::uint64_t>(i);
            const SearchResult r = run(spaces.reduced, env, energy, config);
            row.meanIterations += r.summary.iterations;
            if (r.summary.avgNewDistance) {
                row.meanAvgNewDistance += *r.summary.avgNewDistance;
                ++withDistance;
            }
            if (r.summary.finalNode == globalMin) ++atMinimum;
        }
        row.runs = seeds;
        row.meanIterations /= seeds;
        row.meanAvgNewDistance = withDistance > 0 ? row.meanAvgNewDistance / withDistance : std::nan("");
        row.globalMinFraction = static_cast<double>(atMinimum) / seeds;
        rows.push_back(row);
    }
    return rows;
}

void cmd_sensitivity(const Scenario& scenario, const std::string& parameter, const std::vector<double>& values,
                     int seeds, const std::string& outPath, std::ostream& log) {
    const auto rows = sensitivity_sweep(scenario, parameter, values, seeds);
    auto out = open_output(outPath);
    out << "parameter,value,mean_iterations,mean_avg_new_distance_m,global_min_fraction,runs\n";
    out << std::setprecision(10);
    for (const auto& r : rows) {
        out << parameter << ',' << r.value << ',' << r.meanIterations << ',' << r.meanAvgNewDistance << ','
            << r.globalMinFraction << ',' << r.runs << '\n';
    }
    log << "rows=" << rows.size() << '\n';
}

double sigma_for_snr(const ImageFrame& clean, double snrDb) {
    const auto& v = clean.intensities;
    const double variance = (v - v.mean()).square().mean();
    return std::sqrt(variance / std::pow(10.0, snrDb / 10.0));
}

std::vector<DenoiseRow> averaging_residuals(const ImageFrame& clean, double sigma, const std::vector<int>& counts,
                                            std::uint64_t seed) {
    if (counts.empty()) throw EmptyList("averaging count list is empty");
    std::vector<int> sorted = counts;
    std::sort(sorted.begin(), sorted.end());
    if (sorted.front() < 1) throw ValidationError("averaging counts must be at least 1");
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

    // Prefix averages of one frame stream; frame i is reused by every N > i.
    Eigen::ArrayXXd sum = Eigen::ArrayXXd::Zero(clean.height(), clean.width());
    std::vector<DenoiseRow> rows;
    double single = 0;
    int taken = 0;
    for (int n : sorted) {
        for (; taken < n; ++taken) {
            sum += add_noise(clean, sigma, derive_seed(seed, kDenoiseStream, static_cast<std::uint64_t>(taken)))
                       .intensities;
        }
        const double residual = residual_std(ImageFrame(sum / n), clean);
        if (rows.empty()) single = residual_std(add_noise(clean, sigma, derive_seed(seed, kDenoiseStream, 0)), clean);
        rows.push_back({n, residual, residual / single, 1.0 / std::sqrt(static_cast<double>(n))});
    }
    return rows;
}

void cmd_denoise_bench(const Scenario& scenario, const std::vector<int>& counts, const std::string& outPath,
                       std::ostream& log) {
    const auto& d = scenario.denoise;
    const std::uint64_t seed = scenario.search.seed;
    const ImageFrame clean = make_scene(d.framePx, d.framePx, seed);
    const double sigma = sigma_for_snr(clean, d.snrDb);
    const auto rows = averaging_residuals(clean, sigma, counts, seed);

    auto out = open_output(outPath);
    out << "n,residual_std,ratio_to_single,expected_ratio\n" << std::setprecision(10);
    for (const auto& r : rows) out << r.n << ',' << r.residualStd << ',' << r.ratio << ',' << r.expectedRatio << '\n';

    const int nMax = rows.back().n;
    Eigen::ArrayXXd sum = Eigen::ArrayXXd::Zero(clean.height(), clean.width());
    for (int i = 0; i < nMax; ++i) {
        sum += add_noise(clean, sigma, derive_seed(seed, kDenoiseStream, static_cast<std::uint64_t>(i))).intensities;
    }
    const ImageFrame noisy = add_noise(clean, sigma, derive_seed(seed, kDenoiseStream, 0));
    write_spectrum_file(sibling_path(outPath, "_clean"), clean);
    write_spectrum_file(sibling_path(outPath, "_noisy"), noisy);
    write_spectrum_file(sibling_path(outPath, "_averaged"), ImageFrame(sum / nMax));
    write_spectrum_file(sibling_path(outPath, "_gaussian"), gaussian_filter(noisy, d.kernelSize, d.kernelSigmaPx));
    log << "noise_sigma=" << std::setprecision(10) << sigma << '\n' << "averaged_frames=" << nMax << '\n';
}

}  // namespace camsearch
