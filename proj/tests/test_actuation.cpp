#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "camsearch/actuation.hpp"
#include "camsearch/errors.hpp"

using namespace camsearch;

namespace {

// Reference -> first-order prefilter (tauDelay) -> (3τs + 1)/(τs + 1)^3,
// integrated as a state-space cascade with small RK4 steps.
struct CascadeOutput {
    double q, qdot;
};

CascadeOutput cascade(double tau, double tauDelay, double tEnd) {
    using State = std::array<double, 4>;  // prefilter, three lags
    auto deriv = [&](const State& s) {
        const double u = tauDelay > 0 ? s[0] : 1.0;
        return State{tauDelay > 0 ? (1.0 - s[0]) / tauDelay : 0.0, (u - s[1]) / tau, (s[1] - s[2]) / tau,
                     (s[2] - s[3]) / tau};
    };
    State s{0, 0, 0, 0};
    const int steps = 20000;
    const double h = tEnd / steps;
    for (int k = 0; k < steps; ++k) {
        auto add = [](const State& a, const State& b, double f) {
            State r;
            for (int i = 0; i < 4; ++i) r[i] = a[i] + f * b[i];
            return r;
        };
        const State k1 = deriv(s), k2 = deriv(add(s, k1, h / 2)), k3 = deriv(add(s, k2, h / 2)),
                    k4 = deriv(add(s, k3, h));
        for (int i = 0; i < 4; ++i) s[i] += h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    }
    const State ds = deriv(s);
    return {3.0 * (s[2] - s[3]) + s[3], 3.0 * (ds[2] - ds[3]) + ds[3]};
}

JointMove unit_move(double tauDelay) {
    JointMove m;
    m.qInitial = 0.2;
    m.qFinal = 1.2;
    m.control.tauDelay = tauDelay;
    return m;
}

}  // namespace

TEST_CASE("closed-form response matches the simulated control loop") {
    for (double tauDelay : {0.0, 0.003, 0.02, 0.5}) {
        const JointMove m = unit_move(tauDelay);
        for (double t : {0.002, 0.01, 0.03, 0.1, 0.6}) {
            const CascadeOutput ref = cascade(m.control.tauIn, tauDelay, t);
            const JointState s = joint_response(m, t);
            CHECK(s.q - m.qInitial == doctest::Approx(ref.q).epsilon(1e-8).scale(1.0));
            CHECK(s.qdot == doctest::Approx(ref.qdot).epsilon(1e-7).scale(1.0));
        }
    }
}

TEST_CASE("velocity and acceleration are derivatives of the response") {
    for (double tauDelay : {0.0, 0.2}) {
        const JointMove m = unit_move(tauDelay);
        const double h = 1e-7;
        for (double t : {0.004, 0.02, 0.08, 0.3}) {
            const double fdq = (joint_response(m, t + h).q - joint_response(m, t - h).q) / (2 * h);
            const double fdv = (joint_response(m, t + h).qdot - joint_response(m, t - h).qdot) / (2 * h);
            const JointState s = joint_response(m, t);
            CHECK(s.qdot == doctest::Approx(fdq).epsilon(1e-4));
            CHECK(s.v == doctest::Approx(fdv).epsilon(1e-4));
        }
    }
}

TEST_CASE("response starts at rest and ends at the target") {
    for (double tauDelay : {0.0, 0.4}) {
        const JointMove m = unit_move(tauDelay);
        const JointState s0 = joint_response(m, 0.0);
        CHECK(s0.q == doctest::Approx(m.qInitial));
        CHECK(s0.qdot == doctest::Approx(0.0));
        const JointState sEnd = joint_response(m, 100.0);
        CHECK(sEnd.q == doctest::Approx(m.qFinal));
    }
}

TEST_CASE("small delays converge to the undelayed response at first order") {
    // A prefilter with time constant d lags its input by at most d, so the
    // gap is bounded by d times the largest slope and shrinks linearly in d.
    const JointMove a = unit_move(0.0);
    double maxQdot = 0, maxV = 0;
    for (double t = 0; t < 0.2; t += 1e-5) {
        maxQdot = std::max(maxQdot, std::abs(joint_response(a, t).qdot));
        maxV = std::max(maxV, std::abs(joint_response(a, t).v));
    }
    for (double t : {0.001, 0.01, 0.05}) {
        const JointState s0 = joint_response(a, t);
        const JointState s6 = joint_response(unit_move(1e-6), t);
        const JointState s7 = joint_response(unit_move(1e-7), t);
        CHECK(std::abs(s6.q - s0.q) <= 1e-6 * maxQdot);
        CHECK(std::abs(s6.qdot - s0.qdot) <= 1e-6 * maxV);
        CHECK(std::abs(s6.q - s0.q) == doctest::Approx(10.0 * std::abs(s7.q - s0.q)).epsilon(0.01));
    }
}

TEST_CASE("RL solver matches the analytic step and ramp responses") {
    const double r = 0.03, l = 1e-4, step = 1e-5;
    const auto stepI = solve_rl_current([](double) { return 2.0; }, r, l, step, 400);
    const auto rampI = solve_rl_current([](double t) { return 50.0 * t; }, r, l, step, 400);
    const double tc = l / r;
    for (std::size_t k = 0; k < 400; k += 37) {
        const double t = step * static_cast<double>(k);
        CHECK(stepI[k] == doctest::Approx(2.0 / r * (1 - std::exp(-t / tc))).epsilon(1e-8).scale(1.0));
        const double ramp = 50.0 / r * (t - tc * (1 - std::exp(-t / tc)));
        CHECK(rampI[k] == doctest::Approx(ramp).epsilon(1e-8).scale(1.0));
    }
}

TEST_CASE("energy integral converges under step halving") {
    const JointMove m = unit_move(0.2);
    const double horizon = default_horizon(m);
    const double coarse = joint_energy(m, horizon, m.params.maxStep());
    const double fine = joint_energy(m, horizon, m.params.maxStep() / 2);
    CHECK(std::abs(coarse - fine) / fine < 0.005);
    CHECK_THROWS_AS(joint_current(m, m.params.maxStep() * 2, 10), StepTooCoarse);
}

TEST_CASE("energy scales with the square of the move") {
    JointMove m = unit_move(0.2);
    const double e1 = joint_energy(m, 3.0);
    m.qFinal = m.qInitial + 2.0;
    CHECK(joint_energy(m, 3.0) == doctest::Approx(4.0 * e1).epsilon(1e-9));
    m.qFinal = m.qInitial;
    CHECK(joint_energy(m, 3.0) == 0.0);
}

TEST_CASE("settling time at the calibrated input constant") {
    const JointMove m = unit_move(0.0);
    CHECK(settling_time(m) == doctest::Approx(0.07).epsilon(0.15));
    // Outside the band just before, inside from then on.
    const double ts = settling_time(m, 1e-5);
    CHECK(std::abs(joint_response(m, ts - 2e-5).q - m.qFinal) > 0.02);
    for (double t = ts; t < 1.0; t += 1e-3) CHECK(std::abs(joint_response(m, t).q - m.qFinal) <= 0.02 + 1e-12);
}

TEST_CASE("energy table trend over the delay constant") {
    const auto rows = energy_table({-0.30, 0.05, 1.20}, {-0.45, 0.45, 1.20}, RobotGeometry::irb4600Camera(),
                                   MotorGearParams{}, ControlParams{}, {0.0, 0.2, 0.4, 0.6, 0.8, 1.0},
                                   lensDownOrientation());
    REQUIRE(rows.size() == 6);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        CHECK(rows[i].energy < rows[i - 1].energy);
        CHECK(rows[i].settlingTime > rows[i - 1].settlingTime);
    }
    CHECK_THROWS(energy_table({0, 0, 1}, {0, 0, 1}, RobotGeometry::irb4600Camera(), MotorGearParams{},
                              ControlParams{}, {}, lensDownOrientation()));
    std::ostringstream out;
    write_energy_csv(out, rows);
    CHECK(out.str().rfind("tau_delay_s,energy_ws,settling_s\n", 0) == 0);
}

TEST_CASE("energy model cost is the unit energy times the summed squared deltas") {
    ControlParams c;
    c.tauDelay = 1.0;
    const EnergyModel model(RobotGeometry::irb4600Camera(), MotorGearParams{}, c, lensDownOrientation());
    const Vec3 a(1.35, 0.1, 1.5), b(1.45, -0.05, 1.6);
    const JointVector qa = model.joints(a), qb = model.joints(b);
    double sum = 0;
    for (std::size_t j = 0; j < 6; ++j) sum += std::pow(joint_delta(qa, qb, j), 2);
    CHECK(model.quote(a, b).energy == doctest::Approx(model.unitEnergy() * sum));
    CHECK(model.cost(qa, qb) == doctest::Approx(model.cost(qb, qa)));
    CHECK(model.quote(a, a).energy == 0.0);
}

TEST_CASE("wrist roll deltas take the short way round") {
    JointVector a, b;
    a[3] = 3.0;
    b[3] = -3.0;
    a[0] = 3.0;
    b[0] = -3.0;
    CHECK(joint_delta(a, b, 3) == doctest::Approx(2 * std::numbers::pi - 6.0));
    CHECK(joint_delta(a, b, 0) == doctest::Approx(-6.0));
}

TEST_CASE("parameter validation") {
    MotorGearParams p;
    p.resistanceOhm = 0;
    CHECK_THROWS_AS(p.validate(), DomainError);
    ControlParams c;
    c.tauDelay = c.tauIn;
    JointMove m;
    m.qFinal = 1;
    m.control = c;
    CHECK_THROWS_AS(joint_response(m, 0.1), NearDegenerateTimeConstants);
    CHECK(MotorGearParams{}.kb() == doctest::Approx(7e-3 * 60 / (2 * std::numbers::pi)));
}
