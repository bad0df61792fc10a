#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "camsearch/scenario.hpp"

namespace camsearch {

struct SpacePair {
    OperationalSpace ideal;
    OperationalSpace reduced;  ///< equals ideal when joint limits are off
};

SpacePair build_space(const Scenario& scenario);
EnergyModel build_energy_model(const Scenario& scenario);
SearchEnvironment build_environment(const Scenario& scenario, std::uint64_t seed);

/// Writes the search-space mesh CSV and reports ideal and reduced counts.
void cmd_mesh(const Scenario& scenario, const std::string& outPath, std::ostream& log);

void cmd_energy_table(const Scenario& scenario, const std::vector<double>& tauDelays, const std::string& outPath,
                      std::ostream& log);

/// Writes the trace CSV to outPath and the summary to outPath + ".summary"
/// and to the log.
SearchResult cmd_search(const Scenario& scenario, const std::string& outPath, std::ostream& log);

struct SensitivityRow {
    double value = 0;
    double meanIterations = 0;
    double meanAvgNewDistance = 0;
    double globalMinFraction = 0;
    int runs = 0;
};

/// Sweeps kEst or kSd over values with seeds base, base+1, ..., base+seeds-1.
std::vector<SensitivityRow> sensitivity_sweep(const Scenario& scenario, const std::string& parameter,
                                              const std::vector<double>& values, int seeds);
void cmd_sensitivity(const Scenario& scenario, const std::string& parameter, const std::vector<double>& values,
                     int seeds, const std::string& outPath, std::ostream& log);

struct DenoiseRow {
    int n = 0;
    double residualStd = 0;
    double ratio = 0;          ///< residual std relative to a single frame
    double expectedRatio = 0;  ///< 1/sqrt(n)
};

/// Residual noise of prefix averages of one stream of noisy frames.
std::vector<DenoiseRow> averaging_residuals(const ImageFrame& clean, double sigma, const std::vector<int>& counts,
                                            std::uint64_t seed);

/// Writes the residual CSV to outPath and four spectrum CSVs next to it
/// (suffixes _clean, _noisy, _averaged, _gaussian).
void cmd_denoise_bench(const Scenario& scenario, const std::vector<int>& counts, const std::string& outPath,
                       std::ostream& log);

/// Noise standard deviation that yields the requested SNR on a frame.
double sigma_for_snr(const ImageFrame& clean, double snrDb);

}  // namespace camsearch
