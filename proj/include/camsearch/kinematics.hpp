#pragma once

#include <array>
#include <cstddef>

#include <Eigen/Core>

namespace camsearch {

using Vec3 = Eigen::Vector3d;

/// Joint angles of the six revolute axes, radians.
struct JointVector {
    std::array<double, 6> q{};

    double& operator[](std::size_t i) { return q[i]; }
    double operator[](std::size_t i) const { return q[i]; }
    bool finite() const;
};

/// Closed per-axis working ranges in degrees.
struct JointLimits {
    std::array<double, 6> minDeg{};
    std::array<double, 6> maxDeg{};

    /// ABB IRB 4600-45/2.05 axis working ranges.
    static JointLimits irb4600();
    /// A range wide enough that no IK solution is ever rejected.
    static JointLimits unconstrained();
    void validate() const;
};

/// Link lengths of the elbow manipulator with spherical wrist (meters).
/// `extension` locates the controlled point of the mounted object (camera
/// optical centre or tool tip) beyond the flange along the roll axis;
/// `farEnd` is the full length of that object and bounds the swept volume.
struct RobotGeometry {
    double l1 = 0.495;
    double l2 = 0.900;
    double l3 = 0.175;
    double l4 = 0.960;
    double a1 = 0.175;
    double lt = 0.135;
    double extension = 0.0;
    double farEnd = 0.0;

    static RobotGeometry irb4600(double extension, double farEnd);
    static RobotGeometry irb4600Camera();
    static RobotGeometry irb4600Tool();
    /// Distance from the elbow axis to the wrist centre.
    double forearm() const;
    void validate() const;
};

/// End-effector flange position `d` and the yaw/pitch/roll direction
/// vectors (n, s, a) expressed in the base frame.
struct Pose {
    Vec3 d = Vec3::Zero();
    Vec3 n = Vec3::UnitX();
    Vec3 s = Vec3::UnitY();
    Vec3 a = Vec3::UnitZ();

    /// Largest deviation of (n, s, a) from an orthonormal triple.
    double orthonormalityError() const;
};

/// Fixed camera orientation used throughout meshing and search: lens facing
/// down (roll axis a = -Z) with the stereo baseline along the X axis.
Pose lensDownOrientation();

Pose forward_kinematics(const JointVector& q, const RobotGeometry& geom);

/// Elbow-up closed-form solution. Throws Unreachable when the wrist centre is
/// out of reach and SingularWristAxis when it lies on the base axis.
JointVector inverse_kinematics(const Pose& pose, const RobotGeometry& geom);

bool within_joint_limits(const JointVector& q, const JointLimits& limits);

/// Reduce an angle to (-pi, pi].
double wrapAngle(double angle);

}  // namespace camsearch
