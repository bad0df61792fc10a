#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "camsearch/actuation.hpp"
#include "camsearch/imaging.hpp"
#include "camsearch/kinematics.hpp"
#include "camsearch/search.hpp"
#include "camsearch/workspace.hpp"

namespace camsearch {

/// Settings for the image-averaging benchmark.
struct DenoiseSettings {
    int framePx = 256;
    double snrDb = 5.0;
    int kernelSize = 7;
    double kernelSigmaPx = 1.5;
    std::vector<int> averageCounts{1, 4, 100, 1000};
};

/// Everything a command needs, with module defaults for omitted keys.
struct Scenario {
    RobotGeometry visual = RobotGeometry::irb4600Camera();
    RobotGeometry tool = RobotGeometry::irb4600Tool();
    JointLimits limits = JointLimits::irb4600();
    CameraSpec camera;
    MotorGearParams motor;
    ControlParams control;
    LayoutOptions layout;
    double gridResolution = 0.04;
    bool applyJointLimits = true;
    NoiseField field;
    NoiseTarget target;
    int searchFramePx = 128;
    SearchConfig search;
    Vec3 energyMoveFrom{-0.30, 0.05, 1.20};
    Vec3 energyMoveTo{-0.45, 0.45, 1.20};
    std::vector<double> energyTauDelays{0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
    DenoiseSettings denoise;

    /// Throws ValidationError naming the first violated field.
    void validate() const;
};

/// Parses a YAML scenario. Syntax and type errors raise ParseError with the
/// line and column; unknown keys and invariant violations raise
/// ValidationError.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);

}  // namespace camsearch
