#include "camsearch/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "camsearch/errors.hpp"

namespace camsearch {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kClampSlack = 1e-12;

// Unit vectors of the forearm frame after the first three joints: `along` is
// the roll axis at q4 = q5 = 0, `up` is orthogonal to it in the arm plane and
// `lateral` is normal to the arm plane.
struct ArmFrame {
    Vec3 along, up, lateral;
};

ArmFrame armFrame(double q1, double q23) {
    const double c1 = std::cos(q1), s1 = std::sin(q1);
    const double c23 = std::cos(q23), s23 = std::sin(q23);
    return {Vec3(c1 * c23, s1 * c23, -s23), Vec3(c1 * s23, s1 * s23, c23), Vec3(-s1, c1, 0.0)};
}

double clampedAcos(double x, const char* what) {
    if (x > 1.0 + kClampSlack || x < -1.0 - kClampSlack) {
        throw Unreachable(std::string(what) + " argument " + std::to_string(x) + " outside [-1, 1]");
    }
    return std::acos(std::clamp(x, -1.0, 1.0));
}

}  // namespace

bool JointVector::finite() const {
    return std::all_of(q.begin(), q.end(), [](double v) { return std::isfinite(v); });
}

JointLimits JointLimits::irb4600() {
    return {{-180.0, -90.0, -180.0, -400.0, -125.0, -400.0}, {180.0, 150.0, 75.0, 400.0, 120.0, 400.0}};
}

JointLimits JointLimits::unconstrained() {
    JointLimits limits;
    limits.minDeg.fill(-400.0);
    limits.maxDeg.fill(400.0);
    return limits;
}

void JointLimits::validate() const {
    for (std::size_t i = 0; i < 6; ++i) {
        if (!(minDeg[i] < maxDeg[i])) {
            throw DomainError("joint " + std::to_string(i + 1) + " limit min must be below max");
        }
    }
}

RobotGeometry RobotGeometry::irb4600(double extension, double farEnd) {
    RobotGeometry g;
    g.extension = extension;
    g.farEnd = farEnd;
    return g;
}

RobotGeometry RobotGeometry::irb4600Camera() { return irb4600(0.017, 0.033); }

RobotGeometry RobotGeometry::irb4600Tool() { return irb4600(0.127, 0.127); }

double RobotGeometry::forearm() const { return std::hypot(l3, l4); }

void RobotGeometry::validate() const {
    if (!(l1 > 0 && l2 > 0 && l3 > 0 && l4 > 0 && a1 > 0 && lt > 0)) {
        throw DomainError("robot link lengths must be positive");
    }
    if (!(extension >= 0)) throw DomainError("end-effector extension must be non-negative");
    if (!(farEnd >= extension)) throw DomainError("mounted object far end must not be shorter than its extension");
}

double Pose::orthonormalityError() const {
    double err = std::max({std::abs(n.norm() - 1.0), std::abs(s.norm() - 1.0), std::abs(a.norm() - 1.0)});
    err = std::max({err, std::abs(n.dot(s)), std::abs(n.dot(a)), std::abs(s.dot(a))});
    return err;
}

Pose lensDownOrientation() {
    Pose p;
    p.n = Vec3(-1.0, 0.0, 0.0);
    p.s = Vec3(0.0, 1.0, 0.0);
    p.a = Vec3(0.0, 0.0, -1.0);
    return p;
}

double wrapAngle(double angle) {
    double r = std::remainder(angle, 2.0 * kPi);
    if (r <= -kPi) r += 2.0 * kPi;
    return r;
}

Pose forward_kinematics(const JointVector& q, const RobotGeometry& geom) {
    const double q23 = q[1] + q[2];
    const ArmFrame f = armFrame(q[0], q23);
    const double c4 = std::cos(q[3]), s4 = std::sin(q[3]);
    const double c5 = std::cos(q[4]), s5 = std::sin(q[4]);
    const double c6 = std::cos(q[5]), s6 = std::sin(q[5]);

    Pose pose;
    pose.a = c5 * f.along + s4 * s5 * f.lateral - c4 * s5 * f.up;
    pose.n = -s5 * c6 * f.along + (c4 * s6 + s4 * c5 * c6) * f.lateral + (s4 * s6 - c4 * c5 * c6) * f.up;
    pose.s = s5 * s6 * f.along + (c4 * c6 - s4 * c5 * s6) * f.lateral + (s4 * c6 + c4 * c5 * s6) * f.up;

    // Wrist centre: shoulder offset a1, upper arm L2, forearm offset L3 and length L4.
    const double s2 = std::sin(q[1]), c2 = std::cos(q[1]);
    const double s23 = std::sin(q23), c23 = std::cos(q23);
    const double reach = geom.a1 + geom.l2 * s2 + geom.l3 * s23 + geom.l4 * c23;
    const double height = geom.l1 + geom.l2 * c2 + geom.l3 * c23 - geom.l4 * s23;
    pose.d = Vec3(std::cos(q[0]) * reach, std::sin(q[0]) * reach, height) + geom.lt * pose.a;
    return pose;
}

JointVector inverse_kinematics(const Pose& pose, const RobotGeometry& geom) {
    const Vec3 wrist = pose.d - geom.lt * pose.a;
    const double radial = std::hypot(wrist.x(), wrist.y());
    if (radial < 1e-12) {
        throw SingularWristAxis("wrist centre lies on the base axis, q1 is indeterminate");
    }

    JointVector q;
    q[0] = std::atan2(wrist.y(), wrist.x());

    const double x = radial - geom.a1;
    const double z = wrist.z() - geom.l1;
    const double rho2 = x * x + z * z;
    const double rho = std::sqrt(rho2);
    const double ell = geom.forearm();
    const double ell2 = ell * ell;
    const double l22 = geom.l2 * geom.l2;
    if (rho < 1e-12) throw Unreachable("wrist centre coincides with the shoulder axis");

    // Shoulder angle between the upper arm and the shoulder-to-wrist line,
    // and the interior elbow angle, both from the law of cosines.
    const double shoulder = clampedAcos((l22 + rho2 - ell2) / (2.0 * geom.l2 * rho), "shoulder");
    const double elbow = clampedAcos((l22 + ell2 - rho2) / (2.0 * geom.l2 * ell), "elbow");
    q[1] = kPi / 2.0 - shoulder - std::atan2(z, x);
    q[2] = kPi - elbow - std::atan2(geom.l4, geom.l3);

    const ArmFrame f = armFrame(q[0], q[1] + q[2]);
    q[4] = std::acos(std::clamp(f.along.dot(pose.a), -1.0, 1.0));
    const double s5 = std::sin(q[4]);
    if (std::abs(s5) > 1e-9) {
        q[3] = std::atan2(f.lateral.dot(pose.a), -f.up.dot(pose.a));
        q[5] = std::atan2(f.along.dot(pose.s), -f.along.dot(pose.n));
    } else {
        // Wrist singularity: only q4 +/- q6 is determined; put it all on q6.
        q[3] = 0.0;
        const double c5 = std::cos(q[4]);
        q[5] = std::atan2(c5 * f.up.dot(pose.s), f.lateral.dot(pose.s));
    }

    for (std::size_t i = 0; i < 6; ++i) q[i] = wrapAngle(q[i]);
    return q;
}

bool within_joint_limits(const JointVector& q, const JointLimits& limits) {
    constexpr double kDeg = 180.0 / kPi;
    // Degree/radian round trips must not push an exact boundary angle outside.
    constexpr double kSlackDeg = 1e-9;
    for (std::size_t i = 0; i < 6; ++i) {
        const double deg = q[i] * kDeg;
        if (deg < limits.minDeg[i] - kSlackDeg || deg > limits.maxDeg[i] + kSlackDeg) return false;
    }
    return true;
}

}  // namespace camsearch
