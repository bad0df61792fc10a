#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include "camsearch/kinematics.hpp"

namespace camsearch {

/// DC motor and gear constants of one joint drive.
struct MotorGearParams {
    double resistanceOhm = 0.03;
    double inductanceH = 1e-4;
    double kbMvPerRpm = 7.0;
    double kmNmPerA = 0.0674;
    double jaKgM2 = 0.09847;
    double jgKgM2 = 0.05;
    double gearRatio = 200.0;
    double bmNmsPerRad = 0.06;

    /// Back-emf constant in V·s/rad.
    double kb() const;
    double jm() const;
    /// Motor damping including the electrical contribution.
    double b() const;
    /// Largest current-integration step that resolves L/R.
    double maxStep() const;
    void validate() const;
};

struct ControlParams {
    double tauIn = 0.009;
    double tauDelay = 0.0;

    void validate() const;
};

struct JointMove {
    double qInitial = 0;
    double qFinal = 0;
    MotorGearParams params;
    ControlParams control;
};

struct JointState {
    double q = 0;
    double qdot = 0;
    double v = 0;  ///< virtual (acceleration) input
};

struct EnergyQuote {
    double energy = 0;        ///< watt-seconds
    double settlingTime = 0;  ///< seconds
};

struct EnergyRow {
    double tauDelay = 0;
    double energy = 0;
    double settlingTime = 0;
};

JointState joint_response(const JointMove& move, double t);
double joint_voltage(const JointMove& move, double t);

/// Integrates L·I' + R·I = drive(t) from I(0) = 0 with classical RK4 and
/// returns I at t = k·step for k = 0..samples-1.
std::vector<double> solve_rl_current(const std::function<double(double)>& drive, double resistance,
                                     double inductance, double step, std::size_t samples);

/// Armature current on the grid t = k·step, k = 0..samples-1.
/// Throws StepTooCoarse when step exceeds params.maxStep().
std::vector<double> joint_current(const JointMove& move, double step, std::size_t samples);

/// Trapezoidal integral of V·I over [0, horizon]. step = 0 selects maxStep().
double joint_energy(const JointMove& move, double horizon, double step = 0.0);

/// 2% settling time found on a grid of the given step (0 selects maxStep()).
double settling_time(const JointMove& move, double step = 0.0);

/// Settling time plus five of the slowest time constants.
double default_horizon(const JointMove& move);

/// Energy of a move of unit amplitude; energy scales with the square of the
/// amplitude, so a move of size Δ costs unit·Δ².
EnergyQuote unit_joint_quote(const MotorGearParams& params, const ControlParams& control, double step = 0.0);

/// Joint displacement used for energy: wrist roll axes take the short way.
double joint_delta(const JointVector& from, const JointVector& to, std::size_t joint);

/// Caches the unit-move energy so that pairwise costs are a cheap sum.
class EnergyModel {
public:
    EnergyModel(const RobotGeometry& geom, const MotorGearParams& params, const ControlParams& control,
                const Pose& orientation);

    JointVector joints(const Vec3& point) const;
    double cost(const JointVector& from, const JointVector& to) const;
    EnergyQuote quote(const Vec3& from, const Vec3& to) const;
    double unitEnergy() const { return unit_.energy; }
    double settlingTime() const { return unit_.settlingTime; }

private:
    RobotGeometry geom_;
    Pose orientation_;
    EnergyQuote unit_;
};

EnergyQuote move_energy(const Vec3& from, const Vec3& to, const RobotGeometry& geom, const MotorGearParams& params,
                        const ControlParams& control, const Pose& orientation);

std::vector<EnergyRow> energy_table(const Vec3& from, const Vec3& to, const RobotGeometry& geom,
                                    const MotorGearParams& params, const ControlParams& controlBase,
                                    const std::vector<double>& tauDelays, const Pose& orientation);

void write_energy_csv(std::ostream& out, const std::vector<EnergyRow>& rows);

}  // namespace camsearch
