#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <vector>

#include "camsearch/actuation.hpp"
#include "camsearch/imaging.hpp"
#include "camsearch/workspace.hpp"

namespace camsearch {

struct SearchConfig {
    double kEst = 5.0;
    double kSd = 50.0;
    double eBound0 = 12.0;
    double eThreshold = 2.0;
    std::uint64_t seed = 1;
    int maxIterations = 10000;

    void validate() const;
};

struct ExploredEntry {
    Vec3 position = Vec3::Zero();
    int measuredCount = 1;
};

/// Explored node index -> (position, measured picture count). Ordered so that
/// iteration, and therefore every tie-break, is deterministic.
using ExploredMap = std::map<int, ExploredEntry>;

struct IterationRecord {
    int iteration = 0;
    int nodeIndex = 0;
    Vec3 position = Vec3::Zero();
    int measuredCount = 0;
    double eRemainingAfter = 0;
    bool newlyExplored = false;
    bool terminated = false;
    bool initialization = false;  ///< part of the four-node start-up tour
};

/// Pairwise move costs between the nodes of a space (1-based indices).
class SearchEnergy {
public:
    SearchEnergy(const OperationalSpace& space, const EnergyModel& model);

    double cost(int from, int to) const;
    std::size_t size() const { return n_; }

private:
    std::size_t n_;
    std::vector<double> costs_;
};

/// What the camera sees: the noise map, the scene and the noise target.
struct SearchEnvironment {
    NoiseField field;
    NoiseTarget target;
    ImageFrame scene;
};

struct SearchState {
    const OperationalSpace* space = nullptr;
    ExploredMap explored;
    int currentIndex = 0;
    double eRemaining = 0;
    int bestExploredIndex = 0;
    bool terminated = false;
    std::vector<IterationRecord> trace;
};

struct SearchSummary {
    int finalNode = 0;
    int finalMeasuredCount = 0;
    int iterations = 0;
    int exploredNodes = 0;
    double eRemaining = 0;
    std::optional<double> avgNewDistance;
    bool terminated = false;
};

struct SearchResult {
    SearchState state;
    SearchSummary summary;
};

/// Four start nodes: the farthest pair, then the farthest pair whose line is
/// perpendicular to the first within 5 degrees (45 degrees as a fallback).
std::array<int, 4> initial_nodes(const OperationalSpace& space);

/// Inverse-distance-weighted picture count at an arbitrary position.
double estimate_at(const Vec3& position, const ExploredMap& explored, double kEst);
double estimate_counts(const OperationalSpace& space, int targetIndex, const ExploredMap& explored, double kEst);

std::vector<int> feasible_set(const SearchState& state, const SearchEnergy& energy);
std::vector<int> explorable_set(const SearchState& state, const SearchEnergy& energy, const SearchConfig& config);

/// E[min(Z, cap)] for Z ~ Normal(mean, sd).
double truncated_min_expectation(double mean, double sd, double cap);

/// log E[(cap - Z)^+] for Z ~ Normal(mean, sd), sd > 0. Stays finite where
/// the shortfall itself underflows, so cap - shortfall orderings survive.
double log_expected_shortfall(double mean, double sd, double cap);
double modified_estimate(const OperationalSpace& space, int targetIndex, const ExploredMap& explored, double kEst,
                         double kSd, int nExpMin);

int select_next(const SearchState& state, const SearchEnergy& energy, const SearchConfig& config);

/// Measures a node: one synthesized shot, noise estimate, picture count.
int measure_node(const SearchEnvironment& env, const Vec3& position, int nodeIndex, std::uint64_t seed);

void step(SearchState& state, const SearchEnvironment& env, const SearchEnergy& energy, const SearchConfig& config);

SearchResult run(const OperationalSpace& space, const SearchEnvironment& env, const SearchEnergy& energy,
                 const SearchConfig& config);

/// Mean distance from each node explored in the main loop to the nearest
/// node explored before it. Throws NoNewNodes when there is none.
double avg_new_distance(const std::vector<IterationRecord>& trace);

/// Node with the smallest field sigma (ties: lowest index).
int global_minimum_node(const OperationalSpace& space, const NoiseField& field);

void write_trace_csv(std::ostream& out, const std::vector<IterationRecord>& trace);
void write_summary(std::ostream& out, const SearchSummary& summary);

}  // namespace camsearch
