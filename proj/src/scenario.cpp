#include "camsearch/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "camsearch/errors.hpp"

namespace camsearch {
namespace {

std::string where(const YAML::Mark& mark) {
    if (mark.is_null()) return "";
    return " at line " + std::to_string(mark.line + 1) + ", column " + std::to_string(mark.column + 1);
}

// A mapping whose keys must all be consumed; leftovers are unknown keys.
class Section {
public:
    Section(YAML::Node node, std::string path) : node_(std::move(node)), path_(std::move(path)) {
        if (node_ && !node_.IsNull() && !node_.IsMap()) {
            throw ParseError("section '" + path_ + "' must be a mapping" + where(node_.Mark()));
        }
    }

    template <typename T>
    void read(const std::string& key, T& target) {
        seen_.insert(key);
        if (!node_ || node_.IsNull()) return;
        const YAML::Node value = node_[key];
        if (!value) return;
        try {
            target = value.as<T>();
        } catch (const YAML::Exception&) {
            throw ParseError("key '" + name(key) + "' has the wrong type" + where(value.Mark()));
        }
    }

    void readVec3(const std::string& key, Vec3& target) {
        std::vector<double> v;
        read(key, v);
        if (v.empty()) return;
        if (v.size() != 3) throw ValidationError("'" + name(key) + "' must list exactly 3 coordinates");
        target = Vec3(v[0], v[1], v[2]);
    }

    Section child(const std::string& key) {
        seen_.insert(key);
        YAML::Node sub = (node_ && node_.IsMap()) ? node_[key] : YAML::Node();
        return Section(sub, name(key));
    }

    YAML::Node raw(const std::string& key) {
        seen_.insert(key);
        return (node_ && node_.IsMap()) ? node_[key] : YAML::Node();
    }

    void finish() const {
        if (!node_ || !node_.IsMap()) return;
        for (const auto& entry : node_) {
            const std::string key = entry.first.as<std::string>();
            if (seen_.count(key) == 0) {
                throw ValidationError("unknown key '" + name(key) + "'" + where(entry.first.Mark()));
            }
        }
    }

    std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

private:
    YAML::Node node_;
    std::string path_;
    std::set<std::string> seen_;
};

void require(bool ok, const std::string& message) {
    if (!ok) throw ValidationError(message);
}

// Runs a component validator and reports its failure as a scenario error.
template <typename F>
void component(const std::string& section, F&& check) {
    try {
        check();
    } catch (const Error& e) {
        throw ValidationError(section + ": " + e.what());
    }
}

}  // namespace

void Scenario::validate() const {
    component("robot.visual", [&] { visual.validate(); });
    component("robot.tool", [&] { tool.validate(); });
    component("robot.joint_limits_deg", [&] { limits.validate(); });
    component("camera", [&] { camera.validate(); });
    component("motor", [&] { motor.validate(); });
    component("control", [&] { control.validate(); });
    component("noise", [&] { field.validate(); });
    require(target.sigmaReduced > 0, "target.sigma_reduced (sigmaReduced) must be positive");
    require(gridResolution > 0, "mesh.grid_resolution_m (h) must be positive");
    require(searchFramePx >= 3, "noise.frame_px must be at least 3");
    require(search.kEst >= 0, "search.k_est (kEst) must be non-negative");
    require(search.kSd >= 0, "search.k_sd_per_m (kSd) must be non-negative");
    require(search.eBound0 > 0, "search.e_bound_ws (eBound0) must be positive");
    require(search.eThreshold >= 0, "search.e_threshold_ws (eThreshold) must be non-negative");
    require(search.maxIterations >= 1, "search.max_iterations (maxIterations) must be at least 1");
    require(layout.lM > 0, "layout.marker_distance_m (lM) must be positive");
    for (double d : energyTauDelays) require(d >= 0, "energy_table.tau_delays_s entries must be non-negative");
    require(denoise.framePx >= 3, "denoise.frame_px must be at least 3");
    require(denoise.kernelSize >= 3 && denoise.kernelSize % 2 == 1, "denoise.kernel_size_px must be odd and >= 3");
    require(denoise.kernelSigmaPx > 0, "denoise.kernel_sigma_px must be positive");
    for (int n : denoise.averageCounts) require(n >= 1, "denoise.average_counts entries must be >= 1");
}

Scenario parse_scenario(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ParseError(e.msg + where(e.mark));
    }
    Scenario s;
    Section top(root, "");

    Section robot = top.child("robot");
    for (RobotGeometry* g : {&s.visual, &s.tool}) {
        robot.read("l1_m", g->l1);
        robot.read("l2_m", g->l2);
        robot.read("l3_m", g->l3);
        robot.read("l4_m", g->l4);
        robot.read("a1_m", g->a1);
        robot.read("lt_m", g->lt);
    }
    robot.read("camera_extension_m", s.visual.extension);
    robot.read("camera_far_end_m", s.visual.farEnd);
    robot.read("tool_extension_m", s.tool.extension);
    robot.read("tool_far_end_m", s.tool.farEnd);
    Section limits = robot.child("joint_limits_deg");
    std::vector<double> lo(s.limits.minDeg.begin(), s.limits.minDeg.end());
    std::vector<double> hi(s.limits.maxDeg.begin(), s.limits.maxDeg.end());
    limits.read("min", lo);
    limits.read("max", hi);
    require(lo.size() == 6 && hi.size() == 6, "robot.joint_limits_deg min and max need 6 entries each");
    std::copy(lo.begin(), lo.end(), s.limits.minDeg.begin());
    std::copy(hi.begin(), hi.end(), s.limits.maxDeg.begin());
    limits.finish();
    robot.finish();

    Section camera = top.child("camera");
    camera.read("focal_length_mm", s.camera.focalLengthMm);
    camera.read("baseline_mm", s.camera.baselineMm);
    camera.read("view_angle_width_deg", s.camera.viewAngleWidthDeg);
    camera.read("view_angle_height_deg", s.camera.viewAngleHeightDeg);
    camera.read("sensor_width_mm", s.camera.sensorWidthMm);
    camera.read("sensor_height_mm", s.camera.sensorHeightMm);
    camera.read("resolution_w_px", s.camera.resolutionW);
    camera.read("resolution_h_px", s.camera.resolutionH);
    camera.read("marker_diameter_mm", s.camera.markerDiameterMm);
    camera.read("min_pixel_diameter_px", s.camera.minPixelDiameter);
    camera.finish();

    Section motor = top.child("motor");
    motor.read("resistance_ohm", s.motor.resistanceOhm);
    motor.read("inductance_h", s.motor.inductanceH);
    motor.read("kb_mv_per_rpm", s.motor.kbMvPerRpm);
    motor.read("km_nm_per_a", s.motor.kmNmPerA);
    motor.read("ja_kg_m2", s.motor.jaKgM2);
    motor.read("jg_kg_m2", s.motor.jgKgM2);
    motor.read("gear_ratio", s.motor.gearRatio);
    motor.read("bm_nms_per_rad", s.motor.bmNmsPerRad);
    motor.finish();

    Section control = top.child("control");
    control.read("tau_in_s", s.control.tauIn);
    control.read("tau_delay_s", s.control.tauDelay);
    control.finish();

    Section layout = top.child("layout");
    layout.read("marker_distance_m", s.layout.lM);
    double value = 0.0;
    if (layout.raw("inter_system_distance_m")) {
        layout.read("inter_system_distance_m", value);
        s.layout.lVT = value;
    }
    if (layout.raw("dexterous_radius_visual_m")) {
        layout.read("dexterous_radius_visual_m", value);
        s.layout.rV = value;
    }
    if (layout.raw("dexterous_radius_tool_m")) {
        layout.read("dexterous_radius_tool_m", value);
        s.layout.rT = value;
    }
    bool derived = false;
    layout.read("derive_radii_from_links", derived);
    if (derived) {
        s.layout.rV.reset();
        s.layout.rT.reset();
    }
    layout.finish();

    Section mesh = top.child("mesh");
    mesh.read("grid_resolution_m", s.gridResolution);
    mesh.read("apply_joint_limits", s.applyJointLimits);
    mesh.finish();

    Section noise = top.child("noise");
    noise.read("sigma_base", s.field.sigmaBase);
    noise.read("sigma_floor", s.field.sigmaFloor);
    noise.read("frame_px", s.searchFramePx);
    const YAML::Node wells = noise.raw("wells");
    if (wells && !wells.IsNull()) {
        if (!wells.IsSequence()) throw ParseError("noise.wells must be a list" + where(wells.Mark()));
        s.field.wells.clear();
        for (std::size_t i = 0; i < wells.size(); ++i) {
            Section well(wells[i], "noise.wells[" + std::to_string(i) + "]");
            NoiseWell w;
            well.readVec3("center_m", w.center);
            well.read("depth", w.depth);
            well.read("width_m", w.width);
            well.finish();
            s.field.wells.push_back(w);
        }
    }
    noise.finish();

    Section target = top.child("target");
    target.read("sigma_reduced", s.target.sigmaReduced);
    target.finish();

    Section search = top.child("search");
    search.read("k_est", s.search.kEst);
    search.read("k_sd_per_m", s.search.kSd);
    search.read("e_bound_ws", s.search.eBound0);
    search.read("e_threshold_ws", s.search.eThreshold);
    search.read("seed", s.search.seed);
    search.read("max_iterations", s.search.maxIterations);
    search.finish();

    Section energy = top.child("energy_table");
    energy.readVec3("from_m", s.energyMoveFrom);
    energy.readVec3("to_m", s.energyMoveTo);
    energy.read("tau_delays_s", s.energyTauDelays);
    energy.finish();

    Section denoise = top.child("denoise");
    denoise.read("frame_px", s.denoise.framePx);
    denoise.read("snr_db", s.denoise.snrDb);
    denoise.read("kernel_size_px", s.denoise.kernelSize);
    denoise.read("kernel_sigma_px", s.denoise.kernelSigmaPx);
    denoise.read("average_counts", s.denoise.averageCounts);
    denoise.finish();

    top.finish();
    s.validate();
    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open scenario file '" + path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_scenario(text.str());
}

}  // namespace camsearch
