#include "camsearch/actuation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <string>

#include "camsearch/errors.hpp"
#include "camsearch/workspace.hpp"

namespace camsearch {
namespace {

// Response of the closed loop (3τs + 1)/(τs + 1)^3 to a unit reference, in
// the form c2·t²·e^{-t/τ} + c1·t·e^{-t/τ} + c0·e^{-t/τ} + cd·e^{-t/τd}.
struct Terms {
    double c2 = 0, c1 = 0, c0 = 0, cd = 0;

    double eval(double t, double tau, double tauDelay) const {
        const double e = std::exp(-t / tau);
        double r = (c2 * t * t + c1 * t + c0) * e;
        if (tauDelay > 0) r += cd * std::exp(-t / tauDelay);
        return r;
    }
};

struct ResponseTerms {
    Terms q, qdot, v;
};

ResponseTerms responseTerms(const ControlParams& c) {
    const double tau = c.tauIn;
    const double d = c.tauDelay;
    ResponseTerms r;
    if (d == 0.0) {
        r.q = {1.0 / (tau * tau), -1.0 / tau, -1.0, 0.0};
        r.qdot = {-1.0 / (tau * tau * tau), 3.0 / (tau * tau), 0.0, 0.0};
        r.v = {1.0 / std::pow(tau, 4), -5.0 / (tau * tau * tau), 3.0 / (tau * tau), 0.0};
        return r;
    }
    if (std::abs(tau - d) < 1e-6 * tau) {
        throw NearDegenerateTimeConstants("tauDelay " + std::to_string(d) + " is too close to tauIn " +
                                          std::to_string(tau));
    }
    const double g = tau - d;
    const double aq = tau + tau * d / g;
    const double bq = -tau - (3 * tau * tau * d - tau * d * d) / (g * g);
    const double cq = -tau - (-3 * tau * tau * d * d + tau * d * d * d) / (g * g * g);
    // Delay-term weights divided by the matching power of tauDelay; the
    // common factor d² cancels analytically so tiny delays stay finite.
    const double dqOverD = -(3 * tau * d * d - d * d * d) / (g * g * g);
    const double dqOverD2 = -(3 * tau * d - d * d) / (g * g * g);
    const double dqOverD3 = -(3 * tau - d) / (g * g * g);

    // Each derivative maps (A, B, C, D) to (-A, 2A - B, B - C, -D) with one
    // more power of the matching time constant.
    const double aqd = -aq, bqd = 2 * aq - bq, cqd = bq - cq;
    const double av = -aqd, bv = 2 * aqd - bqd, cv = bqd - cqd;

    const double t2 = tau * tau, t3 = t2 * tau, t4 = t3 * tau, t5 = t4 * tau;
    r.q = {aq / t3, bq / t2, cq / tau, dqOverD};
    r.qdot = {aqd / t4, bqd / t3, cqd / t2, -dqOverD2};
    r.v = {av / t5, bv / t4, cv / t3, dqOverD3};
    return r;
}

std::size_t sampleCount(double horizon, double step) {
    return static_cast<std::size_t>(std::ceil(horizon / step - 1e-9)) + 1;
}

}  // namespace

double MotorGearParams::kb() const { return kbMvPerRpm * 1e-3 * 60.0 / (2.0 * std::numbers::pi); }

double MotorGearParams::jm() const { return jaKgM2 + jgKgM2; }

double MotorGearParams::b() const { return bmNmsPerRad + kb() * kmNmPerA / resistanceOhm; }

double MotorGearParams::maxStep() const { return inductanceH / (10.0 * resistanceOhm); }

void MotorGearParams::validate() const {
    if (!(resistanceOhm > 0 && inductanceH > 0 && kbMvPerRpm > 0 && kmNmPerA > 0 && jaKgM2 > 0 && jgKgM2 > 0 &&
          gearRatio > 0 && bmNmsPerRad > 0)) {
        throw DomainError("motor and gear constants must be positive");
    }
}

void ControlParams::validate() const {
    if (!(tauIn > 0)) throw DomainError("tauIn must be positive");
    if (!(tauDelay >= 0)) throw DomainError("tauDelay must be non-negative");
}

JointState joint_response(const JointMove& move, double t) {
    const ResponseTerms terms = responseTerms(move.control);
    const double delta = move.qFinal - move.qInitial;
    const double tau = move.control.tauIn;
    const double d = move.control.tauDelay;
    JointState s;
    s.q = move.qInitial + delta * (1.0 + terms.q.eval(t, tau, d));
    s.qdot = delta * terms.qdot.eval(t, tau, d);
    s.v = delta * terms.v.eval(t, tau, d);
    return s;
}

double joint_voltage(const JointMove& move, double t) {
    const JointState s = joint_response(move, t);
    const MotorGearParams& p = move.params;
    return (p.resistanceOhm / p.kmNmPerA) * (p.jm() * s.v + p.b() * s.qdot);
}

std::vector<double> solve_rl_current(const std::function<double(double)>& drive, double resistance,
                                     double inductance, double step, std::size_t samples) {
    std::vector<double> current(samples, 0.0);
    auto slope = [&](double t, double i) { return (drive(t) - resistance * i) / inductance; };
    double i = 0.0;
    for (std::size_t k = 1; k < samples; ++k) {
        const double t = static_cast<double>(k - 1) * step;
        const double k1 = slope(t, i);
        const double k2 = slope(t + 0.5 * step, i + 0.5 * step * k1);
        const double k3 = slope(t + 0.5 * step, i + 0.5 * step * k2);
        const double k4 = slope(t + step, i + step * k3);
        i += step / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
        current[k] = i;
    }
    return current;
}

std::vector<double> joint_current(const JointMove& move, double step, std::size_t samples) {
    const MotorGearParams& p = move.params;
    if (!(step > 0) || step > p.maxStep() * (1.0 + 1e-12)) {
        throw StepTooCoarse("step " + std::to_string(step) + " s exceeds L/(10R) = " + std::to_string(p.maxStep()));
    }
    if (move.qFinal == move.qInitial) return std::vector<double>(samples, 0.0);
    const ResponseTerms terms = responseTerms(move.control);
    const double delta = move.qFinal - move.qInitial;
    const double tau = move.control.tauIn;
    const double d = move.control.tauDelay;
    const double gainV = p.resistanceOhm / p.kmNmPerA;
    const double backEmf = p.kb() / p.gearRatio;
    auto drive = [&](double t) {
        const double qdot = delta * terms.qdot.eval(t, tau, d);
        const double v = delta * terms.v.eval(t, tau, d);
        return gainV * (p.jm() * v + p.b() * qdot) - backEmf * qdot;
    };
    return solve_rl_current(drive, p.resistanceOhm, p.inductanceH, step, samples);
}

double joint_energy(const JointMove& move, double horizon, double step) {
    if (move.qFinal == move.qInitial || horizon <= 0) return 0.0;
    const double maxStep = move.params.maxStep();
    if (step == 0.0) step = maxStep;
    const std::size_t n = sampleCount(horizon, step);
    const double h = horizon / static_cast<double>(n - 1);
    if (h > maxStep * (1.0 + 1e-12)) {
        throw StepTooCoarse("step " + std::to_string(h) + " s exceeds L/(10R) = " + std::to_string(maxStep));
    }
    const std::vector<double> current = joint_current(move, h, n);
    double energy = 0.0;
    double prev = joint_voltage(move, 0.0) * current[0];
    for (std::size_t k = 1; k < n; ++k) {
        const double power = joint_voltage(move, static_cast<double>(k) * h) * current[k];
        energy += 0.5 * h * (prev + power);
        prev = power;
    }
    return energy;
}

double settling_time(const JointMove& move, double step) {
    const double delta = move.qFinal - move.qInitial;
    if (delta == 0.0) return 0.0;
    if (step == 0.0) step = move.params.maxStep();
    const ResponseTerms terms = responseTerms(move.control);
    const double tau = move.control.tauIn;
    const double d = move.control.tauDelay;
    // Beyond this horizon every exponential is far below the 2% band.
    const double horizon = 60.0 * std::max(tau, d);
    const std::size_t n = sampleCount(horizon, step);
    std::size_t lastOutside = 0;
    bool everOutside = false;
    for (std::size_t k = 0; k < n; ++k) {
        const double err = std::abs(terms.q.eval(static_cast<double>(k) * step, tau, d));
        if (err > 0.02) {
            lastOutside = k;
            everOutside = true;
        }
    }
    return everOutside ? static_cast<double>(lastOutside + 1) * step : 0.0;
}

double default_horizon(const JointMove& move) {
    return settling_time(move) + 5.0 * std::max(move.control.tauIn, move.control.tauDelay);
}

EnergyQuote unit_joint_quote(const MotorGearParams& params, const ControlParams& control, double step) {
    params.validate();
    control.validate();
    JointMove move{0.0, 1.0, params, control};
    EnergyQuote q;
    q.settlingTime = settling_time(move, step);
    q.energy = joint_energy(move, q.settlingTime + 5.0 * std::max(control.tauIn, control.tauDelay), step);
    return q;
}

double joint_delta(const JointVector& from, const JointVector& to, std::size_t joint) {
    const double delta = to[joint] - from[joint];
    return (joint == 3 || joint == 5) ? wrapAngle(delta) : delta;
}

EnergyModel::EnergyModel(const RobotGeometry& geom, const MotorGearParams& params, const ControlParams& control,
                         const Pose& orientation)
    : geom_(geom), orientation_(orientation), unit_(unit_joint_quote(params, control)) {}

JointVector EnergyModel::joints(const Vec3& point) const {
    return inverse_kinematics(flange_pose_for(point, orientation_, geom_), geom_);
}

double EnergyModel::cost(const JointVector& from, const JointVector& to) const {
    double sum = 0.0;
    for (std::size_t j = 0; j < 6; ++j) {
        const double delta = joint_delta(from, to, j);
        sum += delta * delta;
    }
    return unit_.energy * sum;
}

EnergyQuote EnergyModel::quote(const Vec3& from, const Vec3& to) const {
    const JointVector a = joints(from);
    const JointVector b = joints(to);
    EnergyQuote q;
    q.energy = cost(a, b);
    for (std::size_t j = 0; j < 6; ++j) {
        if (joint_delta(a, b, j) != 0.0) q.settlingTime = unit_.settlingTime;
    }
    return q;
}

EnergyQuote move_energy(const Vec3& from, const Vec3& to, const RobotGeometry& geom, const MotorGearParams& params,
                        const ControlParams& control, const Pose& orientation) {
    return EnergyModel(geom, params, control, orientation).quote(from, to);
}

std::vector<EnergyRow> energy_table(const Vec3& from, const Vec3& to, const RobotGeometry& geom,
                                    const MotorGearParams& params, const ControlParams& controlBase,
                                    const std::vector<double>& tauDelays, const Pose& orientation) {
    if (tauDelays.empty()) throw DomainError("energy table needs at least one tauDelay");
    std::vector<EnergyRow> rows;
    rows.reserve(tauDelays.size());
    for (double tauDelay : tauDelays) {
        ControlParams control = controlBase;
        control.tauDelay = tauDelay;
        const EnergyQuote q = move_energy(from, to, geom, params, control, orientation);
        rows.push_back({tauDelay, q.energy, q.settlingTime});
    }
    return rows;
}

void write_energy_csv(std::ostream& out, const std::vector<EnergyRow>& rows) {
    out << "tau_delay_s,energy_ws,settling_s\n" << std::setprecision(9);
    for (const EnergyRow& r : rows) out << r.tauDelay << ',' << r.energy << ',' << r.settlingTime << '\n';
}

}  // namespace camsearch
