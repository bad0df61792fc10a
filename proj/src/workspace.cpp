#include "camsearch/workspace.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <string>

#include "camsearch/errors.hpp"

namespace camsearch {
namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kSnap = 1e-9;

double tanHalf(double angleDeg) { return std::tan(0.5 * angleDeg * kDegToRad); }

// Square root that tolerates round-off just below zero.
std::optional<double> softSqrt(double x, double eps = 1e-12) {
    if (x < -eps) return std::nullopt;
    return std::sqrt(std::max(0.0, x));
}

}  // namespace

void CameraSpec::validate() const {
    if (!(viewAngleWidthDeg > 0 && viewAngleWidthDeg < 180)) throw DomainError("view angle width must be in (0, 180)");
    if (!(viewAngleHeightDeg > 0 && viewAngleHeightDeg < 180)) throw DomainError("view angle height must be in (0, 180)");
    if (!(baselineMm > 0)) throw DomainError("baseline must be positive");
    if (!(focalLengthMm > 0)) throw DomainError("focal length must be positive");
    if (!(sensorWidthMm > 0 && sensorHeightMm > 0 && resolutionW > 0 && resolutionH > 0)) {
        throw DomainError("sensor dimensions and resolution must be positive");
    }
    if (!(markerDiameterMm > 0 && minPixelDiameter > 0)) throw DomainError("marker size parameters must be positive");
}

WorkspaceRadii workspace_radii(const RobotGeometry& visual, const RobotGeometry& tool) {
    auto wristRadius = [](const RobotGeometry& g) { return g.l2 + g.forearm(); };
    WorkspaceRadii r;
    r.rV = wristRadius(visual) - visual.lt - visual.extension;
    r.rT = wristRadius(tool) - tool.lt - tool.extension;
    r.rVr = wristRadius(visual) + visual.lt + visual.farEnd;
    r.rTr = wristRadius(tool) + tool.lt + tool.farEnd;
    if (r.rV <= 0 || r.rT <= 0) throw NonPositiveRadius("end-effector extension exceeds the arm reach");
    return r;
}

GroundAngles ground_angles(double rV, double rT, double l1) {
    if (l1 >= rV || l1 >= rT) throw DomainError("l1 must be smaller than both dexterous radii");
    return {std::asin(l1 / rV) / kDegToRad, std::asin(l1 / rT) / kDegToRad};
}

double cone_offset(double baseline, double alphaDeg) { return 0.5 * baseline / tanHalf(alphaDeg); }

DetectionRange max_detect_depth(const CameraSpec& spec) {
    DetectionRange r;
    r.pixelDensityPerMm = spec.resolutionW / spec.sensorWidthMm;
    r.imageDiameterMm = spec.minPixelDiameter / r.pixelDensityPerMm;
    r.zMax = spec.focalLengthMm * spec.markerDiameterMm / r.imageDiameterMm / 1000.0;
    return r;
}

SystemLayout make_layout(const RobotGeometry& visual, const RobotGeometry& tool, const CameraSpec& camera,
                         const LayoutOptions& options) {
    visual.validate();
    tool.validate();
    camera.validate();
    const WorkspaceRadii radii = workspace_radii(visual, tool);

    SystemLayout layout;
    layout.l1 = visual.l1;
    layout.a1 = visual.a1;
    layout.rV = options.rV.value_or(radii.rV);
    layout.rT = options.rT.value_or(radii.rT);
    layout.rVr = radii.rVr;
    layout.rTr = radii.rTr;
    const GroundAngles angles = ground_angles(layout.rV, layout.rT, layout.l1);
    layout.theta1Deg = angles.theta1Deg;
    layout.theta2Deg = angles.theta2Deg;
    layout.lVT = options.lVT.value_or(layout.rVr + layout.rTr);
    layout.lM = options.lM;
    layout.coneOffset = cone_offset(camera.baselineMm / 1000.0, camera.viewAngleWidthDeg);
    layout.tanHalfAlpha = tanHalf(camera.viewAngleWidthDeg);
    layout.tanHalfBeta = tanHalf(camera.viewAngleHeightDeg);
    layout.zMaxDetect = max_detect_depth(camera).zMax;
    validate_layout(layout);
    return layout;
}

void validate_layout(const SystemLayout& layout) {
    if (layout.lVT < layout.rVr + layout.rTr - kSnap) {
        throw DomainError("inter-system distance lVT " + std::to_string(layout.lVT) +
                          " is below the no-interference minimum " + std::to_string(layout.rVr + layout.rTr));
    }
    const Interval bounds = marker_bounds(layout);
    if (layout.lM < bounds.lo - kSnap || layout.lM >= bounds.hi) {
        throw EmptyInterval("marker distance lM " + std::to_string(layout.lM) + " outside [" +
                            std::to_string(bounds.lo) + ", " + std::to_string(bounds.hi) + ")");
    }
}

Interval marker_bounds(const SystemLayout& layout) {
    const double cosHalfAlpha = 1.0 / std::sqrt(1.0 + layout.tanHalfAlpha * layout.tanHalfAlpha);
    Interval b;
    b.lo = layout.a1 + layout.lVT - layout.rT * std::cos(layout.theta2Deg * kDegToRad);
    b.hi = layout.rV / cosHalfAlpha + (layout.l1 - layout.coneOffset) * layout.tanHalfAlpha + layout.a1;
    if (b.lo >= b.hi) throw EmptyInterval("marker placement interval is empty");
    return b;
}

QuadraticRoots z_range(const SystemLayout& layout) {
    // Intersect the sphere's X-Z cross-section with the near cone generator
    // X = lM - tan(alpha/2) (Z - d).
    const double t = layout.tanHalfAlpha;
    const double d = layout.coneOffset;
    const double m = layout.lM - layout.a1;
    QuadraticRoots r;
    r.a = 1.0 + t * t;
    r.b = -2.0 * (t * t * d + t * m + layout.l1);
    r.c = t * t * d * d + 2.0 * t * m * d + m * m - layout.rV * layout.rV + layout.l1 * layout.l1;
    r.discriminant = r.b * r.b - 4.0 * r.a * r.c;
    // Relative tolerance so an exact tangency is not lost to round-off.
    const double tol = 1e-12 * r.b * r.b;
    if (r.discriminant < -tol) {
        throw NoIntersection("cone and sphere cross-sections do not overlap (discriminant " +
                             std::to_string(r.discriminant) + ")");
    }
    const double root = std::sqrt(std::max(0.0, r.discriminant));
    // Numerically stable pair of roots.
    const double qv = -0.5 * (r.b + std::copysign(root, r.b));
    double z1 = qv / r.a;
    double z2 = qv != 0.0 ? r.c / qv : z1;
    r.zMin = std::min(z1, z2);
    r.zMax = std::max(z1, z2);
    return r;
}

namespace {

struct Slice {
    double diskR2;    // squared disk radius at this height
    double ellipseA;  // semi-axis along X
    double ellipseB;  // semi-axis along Y
};

std::optional<Slice> sliceAt(double z, const SystemLayout& layout) {
    const double dz = z - layout.l1;
    const double r2 = layout.rV * layout.rV - dz * dz;
    const double h = z - layout.coneOffset;
    if (r2 < -1e-12 || h < 0) return std::nullopt;
    return Slice{std::max(0.0, r2), layout.tanHalfAlpha * h, layout.tanHalfBeta * h};
}

bool insideDisk(double x, double y, double r2, const SystemLayout& l) {
    const double dx = x - l.a1;
    return dx * dx + y * y <= r2 + kSnap;
}

bool insideEllipse(double x, double y, const Slice& s, const SystemLayout& l) {
    if (s.ellipseA <= 0 || s.ellipseB <= 0) return std::abs(x - l.lM) <= kSnap && std::abs(y) <= kSnap;
    const double u = (x - l.lM) / s.ellipseA;
    const double v = y / s.ellipseB;
    return u * u + v * v <= 1.0 + kSnap;
}

}  // namespace

Interval y_range(double z, const SystemLayout& layout) {
    const auto slice = sliceAt(z, layout);
    if (!slice) throw EmptyInterval("height " + std::to_string(z) + " is outside both constraints");
    const Slice& s = *slice;
    const double diskR = std::sqrt(s.diskR2);

    // The lens is convex and symmetric in Y, so its widest point is the top of
    // one shape lying inside the other or a boundary crossing.
    double best = -1.0;
    if (insideEllipse(layout.a1, diskR, s, layout)) best = std::max(best, diskR);
    if (insideDisk(layout.lM, s.ellipseB, s.diskR2, layout)) best = std::max(best, s.ellipseB);

    if (s.ellipseA > 0 && s.ellipseB > 0) {
        const double ia = 1.0 / (s.ellipseA * s.ellipseA);
        const double ib = 1.0 / (s.ellipseB * s.ellipseB);
        // (X - lM)^2 ia + (R^2 - (X - a1)^2) ib = 1
        const double qa = ia - ib;
        const double qb = -2.0 * layout.lM * ia + 2.0 * layout.a1 * ib;
        const double qc = layout.lM * layout.lM * ia + (s.diskR2 - layout.a1 * layout.a1) * ib - 1.0;
        std::vector<double> xs;
        if (std::abs(qa) < 1e-15) {
            if (std::abs(qb) > 0) xs.push_back(-qc / qb);
        } else {
            const double disc = qb * qb - 4.0 * qa * qc;
            if (auto root = softSqrt(disc, 1e-12 * qb * qb)) {
                xs.push_back((-qb + *root) / (2.0 * qa));
                xs.push_back((-qb - *root) / (2.0 * qa));
            }
        }
        for (double x : xs) {
            const double dx = x - layout.a1;
            if (auto y = softSqrt(s.diskR2 - dx * dx, 1e-10)) best = std::max(best, *y);
        }
    }
    if (best < 0) throw EmptyInterval("disk and ellipse do not intersect at height " + std::to_string(z));
    return {-best, best};
}

Interval x_range(double z, double y, const SystemLayout& layout) {
    const auto slice = sliceAt(z, layout);
    if (!slice) throw EmptyInterval("height " + std::to_string(z) + " is outside both constraints");
    const Slice& s = *slice;
    const auto diskHalf = softSqrt(s.diskR2 - y * y, 1e-10);
    const double e = s.ellipseB > 0 ? 1.0 - (y * y) / (s.ellipseB * s.ellipseB) : (std::abs(y) <= kSnap ? 0.0 : -1.0);
    const auto ellipseHalf = softSqrt(e, 1e-10);
    if (!diskHalf || !ellipseHalf) throw EmptyInterval("row y = " + std::to_string(y) + " misses the slice");
    const double ellipseX = s.ellipseA * *ellipseHalf;
    Interval r{std::max(layout.a1 - *diskHalf, layout.lM - ellipseX), std::min(layout.a1 + *diskHalf, layout.lM + ellipseX)};
    if (r.lo > r.hi) {
        if (r.lo - r.hi > 1e-9) throw EmptyInterval("row y = " + std::to_string(y) + " has no admissible x");
        r.lo = r.hi = 0.5 * (r.lo + r.hi);
    }
    return r;
}

bool contains(const Vec3& p, const SystemLayout& layout) {
    const double dx = p.x() - layout.a1;
    const double dz = p.z() - layout.l1;
    if (dx * dx + p.y() * p.y() + dz * dz > layout.rV * layout.rV + kSnap) return false;
    const double h = p.z() - layout.coneOffset;
    if (h < -kSnap) return false;
    const double u = (p.x() - layout.lM) / layout.tanHalfAlpha;
    const double v = p.y() / layout.tanHalfBeta;
    return u * u + v * v <= h * h + kSnap;
}

OperationalSpace mesh_ideal_space(const SystemLayout& layout, double h) {
    if (!(h > 0)) throw DomainError("grid resolution must be positive");
    const QuadraticRoots zr = z_range(layout);
    const double x0 = layout.lM - layout.tanHalfAlpha * (zr.zMax - layout.coneOffset);
    const double z0 = zr.zMin;

    OperationalSpace space;
    space.gridResolution = h;
    space.layout = layout;

    // Ranges are widened by one grid step and every candidate is re-checked,
    // so the sweep agrees with contains() under boundary snapping.
    const long kMax = static_cast<long>(std::floor((zr.zMax - z0) / h)) + 1;
    for (long k = 0; k <= kMax; ++k) {
        const double z = z0 + static_cast<double>(k) * h;
        Interval yr;
        try {
            yr = y_range(std::clamp(z, zr.zMin, zr.zMax), layout);
        } catch (const EmptyInterval&) {
            continue;
        }
        const long jMax = static_cast<long>(std::floor(yr.hi / h)) + 1;
        for (long j = -jMax; j <= jMax; ++j) {
            const double y = static_cast<double>(j) * h;
            Interval xr;
            try {
                xr = x_range(std::clamp(z, zr.zMin, zr.zMax), std::clamp(y, yr.lo, yr.hi), layout);
            } catch (const EmptyInterval&) {
                continue;
            }
            const long iLo = static_cast<long>(std::floor((xr.lo - x0) / h)) - 1;
            const long iHi = static_cast<long>(std::ceil((xr.hi - x0) / h)) + 1;
            for (long i = std::max(0L, iLo); i <= iHi; ++i) {
                const Vec3 p(x0 + static_cast<double>(i) * h, y, z);
                if (contains(p, layout)) {
                    space.nodes.push_back({static_cast<int>(space.nodes.size()) + 1, p});
                }
            }
        }
    }
    if (space.nodes.empty()) throw EmptySpace("no grid node fits the operational space at h = " + std::to_string(h));
    return space;
}

Pose flange_pose_for(const Vec3& point, const Pose& orientation, const RobotGeometry& geom) {
    Pose pose = orientation;
    pose.d = point - geom.extension * orientation.a;
    return pose;
}

OperationalSpace reduce_by_joint_limits(const OperationalSpace& space, const RobotGeometry& geom,
                                        const JointLimits& limits, const Pose& orientation) {
    if (space.nodes.empty()) throw EmptySpace("cannot reduce an empty space");
    OperationalSpace out;
    out.gridResolution = space.gridResolution;
    out.layout = space.layout;
    for (const Node& node : space.nodes) {
        try {
            const JointVector q = inverse_kinematics(flange_pose_for(node.position, orientation, geom), geom);
            if (!within_joint_limits(q, limits)) continue;
        } catch (const Unreachable&) {
            continue;
        } catch (const SingularWristAxis&) {
            continue;
        }
        out.nodes.push_back({static_cast<int>(out.nodes.size()) + 1, node.position});
    }
    if (out.nodes.empty()) throw EmptySpace("every node violates the joint limits");
    return out;
}

void write_mesh_csv(std::ostream& out, const OperationalSpace& space) {
    out << "index,x,y,z\n";
    out << std::setprecision(9);
    for (const Node& n : space.nodes) {
        out << n.index << ',' << n.position.x() << ',' << n.position.y() << ',' << n.position.z() << '\n';
    }
}

}  // namespace camsearch
