#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "camsearch/kinematics.hpp"

namespace camsearch {

/// Stereo camera datasheet values (Zed 2 by default).
struct CameraSpec {
    double focalLengthMm = 2.8;
    double baselineMm = 120.0;
    double viewAngleWidthDeg = 86.05;
    double viewAngleHeightDeg = 55.35;
    double sensorWidthMm = 5.23;
    double sensorHeightMm = 2.94;
    int resolutionW = 1920;
    int resolutionH = 1080;
    double markerDiameterMm = 12.0;
    double minPixelDiameter = 5.0;

    void validate() const;
};

struct WorkspaceRadii {
    double rV = 0;   ///< dexterous radius, visual system
    double rT = 0;   ///< dexterous radius, tool system
    double rVr = 0;  ///< reachable radius, visual system
    double rTr = 0;  ///< reachable radius, tool system
};

struct GroundAngles {
    double theta1Deg = 0;
    double theta2Deg = 0;
};

struct Interval {
    double lo = 0;
    double hi = 0;
};

struct DetectionRange {
    double pixelDensityPerMm = 0;  ///< pixels per millimetre on the sensor
    double imageDiameterMm = 0;    ///< smallest resolvable marker image
    double zMax = 0;               ///< metres
};

/// Everything the operational-space geometry needs, in metres.
/// The visual-system ground frame has its origin below the robot base, with
/// the shoulder (sphere centre) at (a1, 0, l1) and the marker at (lM, 0, 0).
struct SystemLayout {
    double l1 = 0;
    double a1 = 0;
    double rV = 0;
    double rT = 0;
    double rVr = 0;
    double rTr = 0;
    double theta1Deg = 0;
    double theta2Deg = 0;
    double lVT = 0;
    double lM = 0;
    double coneOffset = 0;     ///< d: cone vertex height above the marker
    double tanHalfAlpha = 0;
    double tanHalfBeta = 0;
    double zMaxDetect = 0;
};

/// Overrides for the derived layout quantities. Unset values are computed.
struct LayoutOptions {
    std::optional<double> rV = 1.716;
    std::optional<double> rT = 1.606;
    std::optional<double> lVT;
    double lM = 2.83;
};

struct Node {
    int index = 0;
    Vec3 position = Vec3::Zero();
};

struct OperationalSpace {
    std::vector<Node> nodes;
    double gridResolution = 0;
    SystemLayout layout;

    std::size_t size() const { return nodes.size(); }
    /// Node by its 1-based index.
    const Node& node(int index) const { return nodes.at(static_cast<std::size_t>(index - 1)); }
};

struct QuadraticRoots {
    double a = 0, b = 0, c = 0;
    double zMin = 0, zMax = 0;
    double discriminant = 0;
};

WorkspaceRadii workspace_radii(const RobotGeometry& visual, const RobotGeometry& tool);
GroundAngles ground_angles(double rV, double rT, double l1);
double cone_offset(double baseline, double alphaDeg);
DetectionRange max_detect_depth(const CameraSpec& spec);

SystemLayout make_layout(const RobotGeometry& visual, const RobotGeometry& tool, const CameraSpec& camera,
                         const LayoutOptions& options = {});
/// Throws DomainError when the system separation is too small and
/// EmptyInterval when the marker lies outside its admissible band.
void validate_layout(const SystemLayout& layout);

Interval marker_bounds(const SystemLayout& layout);
QuadraticRoots z_range(const SystemLayout& layout);
Interval y_range(double z, const SystemLayout& layout);
Interval x_range(double z, double y, const SystemLayout& layout);
bool contains(const Vec3& p, const SystemLayout& layout);

OperationalSpace mesh_ideal_space(const SystemLayout& layout, double h);

/// Flange pose that puts the mounted object's reference point at `point`.
Pose flange_pose_for(const Vec3& point, const Pose& orientation, const RobotGeometry& geom);

OperationalSpace reduce_by_joint_limits(const OperationalSpace& space, const RobotGeometry& geom,
                                        const JointLimits& limits, const Pose& orientation);

void write_mesh_csv(std::ostream& out, const OperationalSpace& space);

}  // namespace camsearch
