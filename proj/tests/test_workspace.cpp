#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <tuple>

#include "camsearch/errors.hpp"
#include "camsearch/workspace.hpp"

using namespace camsearch;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

SystemLayout reference_layout() {
    return make_layout(RobotGeometry::irb4600Camera(), RobotGeometry::irb4600Tool(), CameraSpec{}, LayoutOptions{});
}

// Membership written directly from the two solids: the dexterous sphere
// about the shoulder and the elliptic viewing cone over the marker.
bool inside_oracle(const Vec3& p, const SystemLayout& l) {
    const double slack = 1e-9;
    const Vec3 shoulder(l.a1, 0.0, l.l1);
    if ((p - shoulder).squaredNorm() > l.rV * l.rV + slack) return false;
    const double h = p.z() - l.coneOffset;
    if (h < -slack) return false;
    const double u = (p.x() - l.lM) / l.tanHalfAlpha;
    const double v = p.y() / l.tanHalfBeta;
    return u * u + v * v <= h * h + slack;
}

using Key = std::tuple<long, long, long>;

Key lattice_key(const Vec3& p, const Vec3& origin, double h) {
    return {std::lround((p.x() - origin.x()) / h), std::lround((p.y() - origin.y()) / h),
            std::lround((p.z() - origin.z()) / h)};
}

// Largest distance from the shoulder reached by `reach` beyond the wrist
// centre, scanning the elbow and wrist-pitch angles in the arm plane.
double planar_scan_radius(const RobotGeometry& g, double beyondWrist) {
    const Vec3 shoulder(g.a1, 0.0, g.l1);
    double best = 0;
    for (int i = 0; i < 3600; ++i) {
        JointVector q;
        q[2] = (-180.0 + 0.1 * i) * kDeg;
        const Pose p = forward_kinematics(q, g);
        const Vec3 wrist = p.d - g.lt * p.a;
        best = std::max(best, (wrist - shoulder).norm());
    }
    return best + beyondWrist;
}

}  // namespace

TEST_CASE("workspace radii match a planar scan of the arm") {
    const auto cam = RobotGeometry::irb4600Camera();
    const auto tool = RobotGeometry::irb4600Tool();
    const WorkspaceRadii r = workspace_radii(cam, tool);
    CHECK(r.rVr == doctest::Approx(planar_scan_radius(cam, cam.lt + cam.farEnd)).epsilon(1e-5));
    CHECK(r.rTr == doctest::Approx(planar_scan_radius(tool, tool.lt + tool.farEnd)).epsilon(1e-5));
    CHECK(r.rV == doctest::Approx(planar_scan_radius(cam, -cam.lt - cam.extension)).epsilon(1e-5));
    CHECK(r.rTr == doctest::Approx(2.138).epsilon(5e-4));
    CHECK(r.rVr == doctest::Approx(2.044).epsilon(5e-4));
}

TEST_CASE("ground angles and cone geometry") {
    const GroundAngles a = ground_angles(1.716, 1.606, 0.495);
    CHECK(a.theta1Deg == doctest::Approx(16.77).epsilon(1e-3));
    CHECK(a.theta2Deg == doctest::Approx(17.95).epsilon(1e-3));
    CHECK(std::sin(a.theta1Deg * kDeg) * 1.716 == doctest::Approx(0.495));
    CHECK(cone_offset(0.12, 86.05) == doctest::Approx(0.064).epsilon(0.01));
    CHECK(cone_offset(0.12, 90.0) == doctest::Approx(0.06));
    CHECK(max_detect_depth(CameraSpec{}).zMax == doctest::Approx(2.47).epsilon(0.004));
    CHECK_THROWS_AS(ground_angles(0.4, 1.6, 0.495), DomainError);
}

TEST_CASE("z range roots solve the stated quadratic and lie on both surfaces") {
    const SystemLayout l = reference_layout();
    const QuadraticRoots q = z_range(l);
    for (double z : {q.zMin, q.zMax}) {
        CHECK(q.a * z * z + q.b * z + q.c == doctest::Approx(0.0).epsilon(1e-12));
        const double x = l.lM - l.tanHalfAlpha * (z - l.coneOffset);
        CHECK(std::hypot(x - l.a1, z - l.l1) == doctest::Approx(l.rV).epsilon(1e-12));
    }
    CHECK(q.zMin < q.zMax);
}

TEST_CASE("y and x ranges bound the membership test") {
    const SystemLayout l = reference_layout();
    const QuadraticRoots q = z_range(l);
    for (int k = 1; k < 10; ++k) {
        const double z = q.zMin + (q.zMax - q.zMin) * k / 10.0;
        const Interval yr = y_range(z, l);
        // Dense scan: widest row of the slice with any admissible x.
        double widest = 0;
        for (int j = 0; j <= 4000; ++j) {
            const double y = yr.hi * 1.05 * j / 4000.0;
            for (int i = 0; i <= 2000; ++i) {
                const double x = l.a1 + (l.lM - l.a1) * i / 2000.0 + 0.2;
                if (inside_oracle(Vec3(x, y, z), l)) {
                    widest = std::max(widest, y);
                    break;
                }
            }
        }
        CHECK(yr.hi == doctest::Approx(widest).epsilon(2e-3));
        CHECK(yr.lo == -yr.hi);
        const Interval xr = x_range(z, 0.0, l);
        CHECK(inside_oracle(Vec3(xr.lo, 0, z), l));
        CHECK(inside_oracle(Vec3(xr.hi, 0, z), l));
        CHECK_FALSE(inside_oracle(Vec3(xr.lo - 1e-4, 0, z), l));
        CHECK_FALSE(inside_oracle(Vec3(xr.hi + 1e-4, 0, z), l));
    }
    CHECK_THROWS_AS(y_range(q.zMax + 1.0, l), EmptyInterval);
}

TEST_CASE("mesh equals a brute-force bounding-box scan") {
    const SystemLayout l = reference_layout();
    for (double h : {0.05, 0.04}) {
        const OperationalSpace space = mesh_ideal_space(l, h);
        const QuadraticRoots q = z_range(l);
        const Vec3 origin(l.lM - l.tanHalfAlpha * (q.zMax - l.coneOffset), 0.0, q.zMin);

        std::vector<Key> expected;
        const Vec3 lo(l.a1 - l.rV, -l.rV, l.l1 - l.rV);
        const Vec3 hi(l.a1 + l.rV, l.rV, l.l1 + l.rV);
        for (long k = std::lround(std::floor((lo.z() - origin.z()) / h)); origin.z() + k * h <= hi.z(); ++k) {
            for (long j = std::lround(std::floor(lo.y() / h)); j * h <= hi.y(); ++j) {
                for (long i = std::lround(std::floor((lo.x() - origin.x()) / h)); origin.x() + i * h <= hi.x(); ++i) {
                    const Vec3 p(origin.x() + i * h, j * h, origin.z() + k * h);
                    if (inside_oracle(p, l)) expected.push_back({i, j, k});
                }
            }
        }
        std::vector<Key> got;
        for (const Node& n : space.nodes) {
            got.push_back(lattice_key(n.position, origin, h));
            CHECK(contains(n.position, l));
        }
        std::sort(expected.begin(), expected.end());
        std::sort(got.begin(), got.end());
        CHECK(got == expected);
        for (std::size_t i = 0; i < space.size(); ++i) CHECK(space.nodes[i].index == static_cast<int>(i) + 1);
    }
}

TEST_CASE("coarser grids give fewer nodes") {
    const SystemLayout l = reference_layout();
    CHECK(mesh_ideal_space(l, 0.08).size() < mesh_ideal_space(l, 0.04).size());
    CHECK(mesh_ideal_space(l, 0.04).size() < mesh_ideal_space(l, 0.025).size());
    CHECK_THROWS_AS(mesh_ideal_space(l, 0.0), DomainError);
}

TEST_CASE("joint-limit reduction keeps exactly the nodes with an admissible solution") {
    const SystemLayout l = reference_layout();
    const auto cam = RobotGeometry::irb4600Camera();
    const OperationalSpace ideal = mesh_ideal_space(l, 0.04);
    const OperationalSpace reduced = reduce_by_joint_limits(ideal, cam, JointLimits::irb4600(), lensDownOrientation());
    CHECK(reduced.size() < ideal.size());
    CHECK(reduced.size() > 0);
    for (const Node& n : reduced.nodes) {
        const Pose target = flange_pose_for(n.position, lensDownOrientation(), cam);
        const JointVector q = inverse_kinematics(target, cam);
        CHECK(within_joint_limits(q, JointLimits::irb4600()));
        const Pose back = forward_kinematics(q, cam);
        CHECK((back.d + cam.extension * back.a - n.position).norm() < 1e-9);
    }
    const OperationalSpace all = reduce_by_joint_limits(ideal, cam, JointLimits::unconstrained(), lensDownOrientation());
    CHECK(all.size() == ideal.size());
}

TEST_CASE("layout validation") {
    LayoutOptions tooClose;
    tooClose.lVT = 3.0;
    CHECK_THROWS_AS(make_layout(RobotGeometry::irb4600Camera(), RobotGeometry::irb4600Tool(), CameraSpec{}, tooClose),
                    DomainError);
    LayoutOptions farMarker;
    farMarker.lM = 3.5;
    CHECK_THROWS_AS(make_layout(RobotGeometry::irb4600Camera(), RobotGeometry::irb4600Tool(), CameraSpec{}, farMarker),
                    EmptyInterval);
    const Interval b = marker_bounds(reference_layout());
    CHECK(b.lo == doctest::Approx(2.829).epsilon(1e-3));
    CHECK(b.hi == doctest::Approx(2.925).epsilon(1e-3));
}

TEST_CASE("mesh CSV has one row per node") {
    const OperationalSpace s = mesh_ideal_space(reference_layout(), 0.05);
    std::ostringstream out;
    write_mesh_csv(out, s);
    const std::string text = out.str();
    CHECK(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')) == s.size() + 1);
}
