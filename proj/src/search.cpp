#include "camsearch/search.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>

#include "camsearch/errors.hpp"

namespace camsearch {
namespace {

constexpr std::uint64_t kShotStream = 0x5407;

bool nearlyEqual(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)}); }

struct PairPick {
    int i = 0, j = 0;
    double distance = -1.0;
};

// Keeps the longer pair; equal lengths prefer the lower index sum, then the
// lower first index.
void offerPair(PairPick& best, int i, int j, double distance) {
    if (best.i == 0 || distance > best.distance * (1.0 + 1e-12)) {
        best = {i, j, distance};
        return;
    }
    if (distance < best.distance * (1.0 - 1e-12)) return;
    if (i + j < best.i + best.j || (i + j == best.i + best.j && i < best.i)) best = {i, j, distance};
}

PairPick perpendicularPair(const OperationalSpace& space, const PairPick& first, double toleranceDeg) {
    const Vec3 axis = (space.node(first.j).position - space.node(first.i).position).normalized();
    const double maxCos = std::sin(toleranceDeg * std::numbers::pi / 180.0);
    const int n = static_cast<int>(space.size());
    PairPick best;
    for (int i = 1; i <= n; ++i) {
        if (i == first.i || i == first.j) continue;
        for (int j = i + 1; j <= n; ++j) {
            if (j == first.i || j == first.j) continue;
            const Vec3 line = space.node(j).position - space.node(i).position;
            const double length = line.norm();
            if (length == 0.0 || std::abs(line.dot(axis)) / length > maxCos + 1e-12) continue;
            offerPair(best, i, j, length);
        }
    }
    return best;
}

void refreshBest(SearchState& state) {
    int best = 0, bestCount = std::numeric_limits<int>::max();
    for (const auto& [index, entry] : state.explored) {
        if (entry.measuredCount < bestCount) {
            best = index;
            bestCount = entry.measuredCount;
        }
    }
    state.bestExploredIndex = best;
}

void record(SearchState& state, int nodeIndex, bool newlyExplored, bool terminated, bool initialization) {
    IterationRecord r;
    r.iteration = static_cast<int>(state.trace.size()) + 1;
    r.nodeIndex = nodeIndex;
    r.position = state.space->node(nodeIndex).position;
    r.measuredCount = state.explored.at(nodeIndex).measuredCount;
    r.eRemainingAfter = state.eRemaining;
    r.newlyExplored = newlyExplored;
    r.terminated = terminated;
    r.initialization = initialization;
    state.trace.push_back(r);
}

bool measureIfNew(SearchState& state, const SearchEnvironment& env, std::uint64_t seed) {
    const int index = state.currentIndex;
    if (state.explored.count(index) != 0) return false;
    const Vec3& p = state.space->node(index).position;
    state.explored[index] = {p, measure_node(env, p, index, seed)};
    refreshBest(state);
    return true;
}

}  // namespace

void SearchConfig::validate() const {
    if (!(kEst >= 0)) throw DomainError("kEst must be non-negative");
    if (!(kSd >= 0)) throw DomainError("kSd must be non-negative");
    if (!(eBound0 > 0)) throw DomainError("eBound0 must be positive");
    if (!(eThreshold >= 0)) throw DomainError("eThreshold must be non-negative");
    if (maxIterations < 1) throw DomainError("maxIterations must be at least 1");
}

SearchEnergy::SearchEnergy(const OperationalSpace& space, const EnergyModel& model)
    : n_(space.size()), costs_(n_ * n_, 0.0) {
    std::vector<JointVector> joints;
    joints.reserve(n_);
    for (const Node& node : space.nodes) joints.push_back(model.joints(node.position));
    for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t j = i + 1; j < n_; ++j) {
            costs_[i * n_ + j] = model.cost(joints[i], joints[j]);
            costs_[j * n_ + i] = model.cost(joints[j], joints[i]);
        }
    }
}

double SearchEnergy::cost(int from, int to) const {
    return costs_.at(static_cast<std::size_t>(from - 1) * n_ + static_cast<std::size_t>(to - 1));
}

std::array<int, 4> initial_nodes(const OperationalSpace& space) {
    const int n = static_cast<int>(space.size());
    if (n < 4) throw SpaceTooSmall("need at least 4 nodes, have " + std::to_string(n));
    PairPick first;
    for (int i = 1; i <= n; ++i) {
        for (int j = i + 1; j <= n; ++j) offerPair(first, i, j, (space.node(j).position - space.node(i).position).norm());
    }
    PairPick second = perpendicularPair(space, first, 5.0);
    if (second.i == 0) second = perpendicularPair(space, first, 45.0);
    if (second.i == 0) throw SpaceTooSmall("no second node pair is even roughly perpendicular to the first");
    return {first.i, first.j, second.i, second.j};
}

double estimate_at(const Vec3& position, const ExploredMap& explored, double kEst) {
    if (explored.empty()) throw EmptyExploredSet("estimation needs at least one explored node");
    // Weights are formed in log space: distance^-kEst overflows for large kEst.
    std::vector<double> logWeight;
    std::vector<int> counts;
    double maxLog = -std::numeric_limits<double>::infinity();
    int lo = std::numeric_limits<int>::max(), hi = 0;
    for (const auto& [index, entry] : explored) {
        const double d = (entry.position - position).norm();
        if (d == 0.0) return entry.measuredCount;
        const double lw = -kEst * std::log(d);
        logWeight.push_back(lw);
        counts.push_back(entry.measuredCount);
        maxLog = std::max(maxLog, lw);
        lo = std::min(lo, entry.measuredCount);
        hi = std::max(hi, entry.measuredCount);
    }
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        const double w = std::exp(logWeight[i] - maxLog);
        num += w * counts[i];
        den += w;
    }
    return std::clamp(num / den, static_cast<double>(lo), static_cast<double>(hi));
}

double estimate_counts(const OperationalSpace& space, int targetIndex, const ExploredMap& explored, double kEst) {
    if (explored.empty()) throw EmptyExploredSet("estimation needs at least one explored node");
    const auto it = explored.find(targetIndex);
    if (it != explored.end()) return it->second.measuredCount;
    return estimate_at(space.node(targetIndex).position, explored, kEst);
}

std::vector<int> feasible_set(const SearchState& state, const SearchEnergy& energy) {
    std::vector<int> out;
    const int n = static_cast<int>(state.space->size());
    for (int i = 1; i <= n; ++i) {
        if (i == state.currentIndex || energy.cost(state.currentIndex, i) <= state.eRemaining) out.push_back(i);
    }
    return out;
}

std::vector<int> explorable_set(const SearchState& state, const SearchEnergy& energy, const SearchConfig& config) {
    std::vector<int> feasible = feasible_set(state, energy);
    if (state.eRemaining > config.eThreshold) return feasible;
    std::vector<int> out;
    for (int i : feasible) {
        const double e1 = energy.cost(state.currentIndex, i);
        const double e2 = energy.cost(i, state.bestExploredIndex);
        if (e1 + e2 <= state.eRemaining) out.push_back(i);
    }
    return out;
}

double truncated_min_expectation(double mean, double sd, double cap) {
    if (!(sd > 0)) return std::min(mean, cap);
    const double z = (cap - mean) / sd;
    const double cdf = 0.5 * std::erfc(-z / std::numbers::sqrt2);
    const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
    return mean * cdf - sd * pdf + cap * (1.0 - cdf);
}

double log_expected_shortfall(double mean, double sd, double cap) {
    const double t = (mean - cap) / sd;
    const double logPdf = -0.5 * t * t - 0.5 * std::log(2.0 * std::numbers::pi);
    if (t < 3.0) {
        const double upperTail = 0.5 * std::erfc(t / std::numbers::sqrt2);
        return std::log(sd) + std::log(std::exp(logPdf) - t * upperTail);
    }
    // Mills ratio Q(t)/pdf(t) by its continued fraction; the shortfall is
    // sd·pdf(t)·(1 - t·ratio).
    double tail = t;
    for (int k = 60; k >= 1; --k) tail = t + k / tail;
    const double ratio = 1.0 / tail;
    return std::log(sd) + logPdf + std::log(1.0 - t * ratio);
}

double modified_estimate(const OperationalSpace& space, int targetIndex, const ExploredMap& explored, double kEst,
                         double kSd, int nExpMin) {
    const auto it = explored.find(targetIndex);
    if (it != explored.end()) return it->second.measuredCount;
    const Vec3& p = space.node(targetIndex).position;
    double nearest = std::numeric_limits<double>::infinity();
    for (const auto& [index, entry] : explored) nearest = std::min(nearest, (entry.position - p).norm());
    return truncated_min_expectation(estimate_at(p, explored, kEst), kSd * nearest, nExpMin);
}

int select_next(const SearchState& state, const SearchEnergy& energy, const SearchConfig& config) {
    const OperationalSpace& space = *state.space;
    const int best = state.bestExploredIndex;
    const int nExpMin = state.explored.at(best).measuredCount;
    // Below the threshold the search only exploits: unexplored nodes are
    // scored by their plain estimate, which never beats the best measurement.
    const bool exploit = state.eRemaining <= config.eThreshold;
    const Vec3& here = space.node(state.currentIndex).position;

    // Candidates are ranked by (score, key). Explored nodes score their
    // measured count. An unexplored node's modified estimate is cap minus
    // its expected shortfall, so in explore mode it scores below every
    // explored node and is ordered by the log shortfall, which keeps the
    // order exact where the shortfall underflows.
    struct Pick {
        int index = 0;
        double score = 0.0, key = 0.0, distance = 0.0;
    } pick;
    for (int i : explorable_set(state, energy, config)) {
        // Every candidate must leave enough energy to fall back to the best node.
        if (i != best && energy.cost(state.currentIndex, i) + energy.cost(i, best) > state.eRemaining) continue;
        const auto it = state.explored.find(i);
        double score = 0.0, key = 0.0;
        if (it != state.explored.end()) {
            score = it->second.measuredCount;
        } else if (exploit) {
            score = estimate_at(space.node(i).position, state.explored, config.kEst);
        } else {
            const Vec3& p = space.node(i).position;
            double nearest = std::numeric_limits<double>::infinity();
            for (const auto& [index, entry] : state.explored) nearest = std::min(nearest, (entry.position - p).norm());
            const double sd = config.kSd * nearest;
            const double mean = estimate_at(p, state.explored, config.kEst);
            if (sd > 0) {
                score = -std::numeric_limits<double>::infinity();
                key = -log_expected_shortfall(mean, sd, nExpMin);
            } else {
                score = std::min(mean, static_cast<double>(nExpMin));
            }
        }
        const double distance = (space.node(i).position - here).norm();
        bool better = pick.index == 0 || score < pick.score || (score == pick.score && key < pick.key);
        if (pick.index != 0 && score == pick.score && nearlyEqual(key, pick.key)) {
            if (pick.index == best) {
                better = false;
            } else if (i == best) {
                better = true;
            } else {
                better = distance < pick.distance || (distance == pick.distance && i < pick.index);
            }
        } else if (pick.index != 0 && std::isfinite(score) && nearlyEqual(score, pick.score) && key == pick.key) {
            better = (i == best) || (pick.index != best && (distance < pick.distance ||
                                                             (distance == pick.distance && i < pick.index)));
        }
        if (better) pick = {i, score, key, distance};
    }
    return pick.index == 0 ? best : pick.index;
}

int measure_node(const SearchEnvironment& env, const Vec3& position, int nodeIndex, std::uint64_t seed) {
    const ImageFrame shot = synth_image(env.field, position, env.scene,
                                        derive_seed(seed, kShotStream, static_cast<std::uint64_t>(nodeIndex)));
    return picture_count(estimate_sigma(shot), env.target);
}

void step(SearchState& state, const SearchEnvironment& env, const SearchEnergy& energy, const SearchConfig& config) {
    if (state.terminated) return;
    const int here = state.currentIndex;
    const bool fresh = measureIfNew(state, env, config.seed);
    const int next = select_next(state, energy, config);
    if (next == here) {
        state.terminated = true;
        record(state, here, fresh, true, false);
        return;
    }
    state.eRemaining = std::max(0.0, state.eRemaining - energy.cost(here, next));
    state.currentIndex = next;
    record(state, here, fresh, false, false);
    const double back = energy.cost(next, state.bestExploredIndex);
    if (back > state.eRemaining * (1.0 + 1e-12) + 1e-15) {
        throw SafetyViolation("return to node " + std::to_string(state.bestExploredIndex) + " needs " +
                              std::to_string(back) + " ws but only " + std::to_string(state.eRemaining) + " remain");
    }
}

SearchResult run(const OperationalSpace& space, const SearchEnvironment& env, const SearchEnergy& energy,
                 const SearchConfig& config) {
    config.validate();
    SearchResult result;
    SearchState& state = result.state;
    state.space = &space;
    state.eRemaining = config.eBound0;

    // Start-up tour: nearest neighbour in energy over the four start nodes.
    const std::array<int, 4> start = initial_nodes(space);
    std::vector<int> pending(start.begin(), start.end());
    state.currentIndex = std::min(start[0], start[1]);
    pending.erase(std::find(pending.begin(), pending.end(), state.currentIndex));
    measureIfNew(state, env, config.seed);
    record(state, state.currentIndex, true, false, true);
    while (!pending.empty()) {
        auto nearest = pending.begin();
        for (auto it = pending.begin(); it != pending.end(); ++it) {
            const double c = energy.cost(state.currentIndex, *it), cn = energy.cost(state.currentIndex, *nearest);
            if (c < cn || (c == cn && *it < *nearest)) nearest = it;
        }
        const double c = energy.cost(state.currentIndex, *nearest);
        if (c > state.eRemaining) {
            throw InsufficientInitialEnergy("start-up tour needs more than eBound0 = " + std::to_string(config.eBound0) +
                                            " ws");
        }
        state.eRemaining -= c;
        state.currentIndex = *nearest;
        pending.erase(nearest);
        measureIfNew(state, env, config.seed);
        record(state, state.currentIndex, true, false, true);
    }
    if (energy.cost(state.currentIndex, state.bestExploredIndex) > state.eRemaining) {
        throw InsufficientInitialEnergy("no energy left to return to the best start node after the start-up tour");
    }

    int iterations = 0;
    while (!state.terminated && iterations < config.maxIterations) {
        step(state, env, energy, config);
        ++iterations;
    }

    SearchSummary& s = result.summary;
    s.finalNode = state.currentIndex;
    s.finalMeasuredCount = state.explored.at(state.currentIndex).measuredCount;
    s.iterations = iterations;
    s.exploredNodes = static_cast<int>(state.explored.size());
    s.eRemaining = state.eRemaining;
    s.terminated = state.terminated;
    try {
        s.avgNewDistance = avg_new_distance(state.trace);
    } catch (const NoNewNodes&) {
        s.avgNewDistance.reset();
    }
    return result;
}

double avg_new_distance(const std::vector<IterationRecord>& trace) {
    std::vector<Vec3> seen;
    double sum = 0.0;
    int count = 0;
    for (const IterationRecord& r : trace) {
        if (!r.newlyExplored) continue;
        if (!r.initialization && !seen.empty()) {
            double nearest = std::numeric_limits<double>::infinity();
            for (const Vec3& p : seen) nearest = std::min(nearest, (p - r.position).norm());
            sum += nearest;
            ++count;
        }
        seen.push_back(r.position);
    }
    if (count == 0) throw NoNewNodes("trace has no node explored after the start-up tour");
    return sum / count;
}

int global_minimum_node(const OperationalSpace& space, const NoiseField& field) {
    if (space.nodes.empty()) throw EmptySpace("no nodes to scan");
    int best = space.nodes.front().index;
    double bestSigma = field_sigma(field, space.nodes.front().position);
    for (const Node& node : space.nodes) {
        const double s = field_sigma(field, node.position);
        if (s < bestSigma) {
            best = node.index;
            bestSigma = s;
        }
    }
    return best;
}

void write_trace_csv(std::ostream& out, const std::vector<IterationRecord>& trace) {
    out << "iter,node_index,x,y,z,measured_count,e_remaining_ws,newly_explored,terminated\n" << std::setprecision(9);
    for (const IterationRecord& r : trace) {
        out << r.iteration << ',' << r.nodeIndex << ',' << r.position.x() << ',' << r.position.y() << ','
            << r.position.z() << ',' << r.measuredCount << ',' << r.eRemainingAfter << ',' << (r.newlyExplored ? 1 : 0)
            << ',' << (r.terminated ? 1 : 0) << '\n';
    }
}

void write_summary(std::ostream& out, const SearchSummary& s) {
    out << std::setprecision(9);
    out << "final_node=" << s.finalNode << '\n';
    out << "final_measured_count=" << s.finalMeasuredCount << '\n';
    out << "iterations=" << s.iterations << '\n';
    out << "explored_nodes=" << s.exploredNodes << '\n';
    out << "e_remaining_ws=" << s.eRemaining << '\n';
    out << "avg_new_distance_m=";
    if (s.avgNewDistance) {
        out << *s.avgNewDistance;
    } else {
        out << "nan";
    }
    out << '\n';
    out << "terminated=" << (s.terminated ? "true" : "false") << '\n';
}

}  // namespace camsearch
