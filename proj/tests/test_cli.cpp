#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "camsearch/commands.hpp"

namespace fs = std::filesystem;
using namespace camsearch;

namespace {

const fs::path kDir = fs::temp_directory_path() / "camsearch_cli_test";

int run_cli(const std::string& args) {
    const std::string cmd = std::string(CAMSEARCH_CLI) + " " + args + " > " + (kDir / "stdout.txt").string() +
                            " 2> " + (kDir / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::vector<std::vector<std::string>> csv_rows(const fs::path& p) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(slurp(p));
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

std::string ref() { return std::string("--scenario ") + CAMSEARCH_REFERENCE; }

std::string write_scenario(const std::string& name, const std::string& from, const std::string& to) {
    std::string text = slurp(CAMSEARCH_REFERENCE);
    const auto pos = text.find(from);
    REQUIRE(pos != std::string::npos);
    text.replace(pos, from.size(), to);
    const fs::path p = kDir / name;
    std::ofstream(p) << text;
    return "--scenario " + p.string();
}

struct Setup {
    Setup() { fs::create_directories(kDir); }
};
const Setup setup;

}  // namespace

TEST_CASE("mesh writes only contained nodes and reports both counts") {
    REQUIRE(run_cli("mesh " + ref() + " --out " + (kDir / "mesh.csv").string()) == 0);
    const std::string report = slurp(kDir / "stdout.txt");
    CHECK(report.find("ideal_nodes=") != std::string::npos);
    CHECK(report.find("reduced_nodes=") != std::string::npos);
    const Scenario s = load_scenario(CAMSEARCH_REFERENCE);
    const SystemLayout layout = make_layout(s.visual, s.tool, s.camera, s.layout);
    const auto rows = csv_rows(kDir / "mesh.csv");
    CHECK(rows.size() == build_space(s).reduced.size());
    for (const auto& r : rows) CHECK(contains(Vec3(std::stod(r[1]), std::stod(r[2]), std::stod(r[3])), layout));

    const std::string coarse = write_scenario("coarse.scenario", "grid_resolution_m: 0.04", "grid_resolution_m: 0.08");
    REQUIRE(run_cli("mesh " + coarse + " --out " + (kDir / "mesh2.csv").string()) == 0);
    CHECK(csv_rows(kDir / "mesh2.csv").size() < rows.size());
}

TEST_CASE("energy table is monotone and repeatable") {
    const std::string out = (kDir / "energy.csv").string();
    REQUIRE(run_cli("energy-table " + ref() + " --out " + out) == 0);
    const std::string first = slurp(out);
    const auto rows = csv_rows(out);
    REQUIRE(rows.size() == 6);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        CHECK(std::stod(rows[i][1]) < std::stod(rows[i - 1][1]));
        CHECK(std::stod(rows[i][2]) > std::stod(rows[i - 1][2]));
    }
    REQUIRE(run_cli("energy-table " + ref() + " --out " + out) == 0);
    CHECK(slurp(out) == first);
    REQUIRE(run_cli("energy-table " + ref() + " --tau-delays 0.3 --out " + out) == 0);
    CHECK(csv_rows(out).size() == 1);
    const Scenario s = load_scenario(CAMSEARCH_REFERENCE);
    std::ostringstream log;
    CHECK_THROWS(cmd_energy_table(s, {}, out, log));
}

TEST_CASE("search is repeatable and ends at the smallest measured count") {
    const std::string out = (kDir / "trace.csv").string();
    REQUIRE(run_cli("search " + ref() + " --out " + out) == 0);
    const std::string trace = slurp(out), summary = slurp(out + ".summary");
    REQUIRE(run_cli("search " + ref() + " --out " + out) == 0);
    CHECK(slurp(out) == trace);
    CHECK(slurp(out + ".summary") == summary);

    int minCount = 1 << 30;
    for (const auto& r : csv_rows(out)) minCount = std::min(minCount, std::stoi(r[5]));
    CHECK(summary.find("final_measured_count=" + std::to_string(minCount) + "\n") != std::string::npos);

    REQUIRE(run_cli("search " + ref() + " --seed 7 --out " + out) == 0);
    CHECK(slurp(out) != trace);
}

TEST_CASE("threshold regimes order the explored area") {
    auto explored = [](const std::string& threshold) {
        const std::string sc =
            write_scenario("t" + threshold + ".scenario", "e_threshold_ws: 2\n", "e_threshold_ws: " + threshold + "\n");
        const std::string out = (kDir / ("trace" + threshold + ".csv")).string();
        REQUIRE(run_cli("search " + sc + " --out " + out) == 0);
        const std::string summary = slurp(out + ".summary");
        const auto at = summary.find("explored_nodes=");
        return std::stoi(summary.substr(at + 15));
    };
    const int small = explored("0.25"), mid = explored("2"), large = explored("11");
    CHECK(large < mid);
    CHECK(small >= mid);
}

TEST_CASE("sensitivity rows are sorted and repeatable") {
    const std::string out = (kDir / "sens.csv").string();
    REQUIRE(run_cli("sensitivity " + ref() + " --param kSd --values 50,5 --seeds 2 --out " + out) == 0);
    const std::string first = slurp(out);
    const auto rows = csv_rows(out);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0][1] == "5");
    CHECK(rows[1][1] == "50");
    CHECK(rows[0][5] == "2");
    REQUIRE(run_cli("sensitivity " + ref() + " --param kSd --values 50,5 --seeds 2 --out " + out) == 0);
    CHECK(slurp(out) == first);
    REQUIRE(run_cli("sensitivity " + ref() + " --param kEst --values 5 --seeds 1 --out " + out) == 0);
    CHECK(csv_rows(out).size() == 1);
    CHECK(run_cli("sensitivity " + ref() + " --param kFoo --values 5 --out " + out) == 1);
}

TEST_CASE("denoise bench writes residuals and four spectra") {
    const std::string sc = write_scenario("small.scenario", "  frame_px: 256", "  frame_px: 128");
    const fs::path out = kDir / "denoise.csv";
    REQUIRE(run_cli("denoise-bench " + sc + " --counts 1,4,16 --out " + out.string()) == 0);
    const std::string first = slurp(out);
    const auto rows = csv_rows(out);
    REQUIRE(rows.size() == 3);
    for (const auto& r : rows) CHECK(std::stod(r[2]) == doctest::Approx(std::stod(r[3])).epsilon(0.1));
    for (const char* suffix : {"_clean", "_noisy", "_averaged", "_gaussian"})
        CHECK(fs::exists(kDir / (std::string("denoise") + suffix + ".csv")));
    REQUIRE(run_cli("denoise-bench " + sc + " --counts 1,4,16 --out " + out.string()) == 0);
    CHECK(slurp(out) == first);
}

TEST_CASE("exit codes separate input errors from runtime failures") {
    const std::string out = " --out " + (kDir / "x.csv").string();
    CHECK(run_cli("mesh --scenario /nonexistent" + out) == 1);
    CHECK(run_cli("frobnicate" + out) == 1);
    const std::string bad = write_scenario("bad.scenario", "e_bound_ws: 12", "e_bound_ws: -1");
    CHECK(run_cli("search " + bad + out) == 1);
    CHECK(slurp(kDir / "stderr.txt").find("eBound0") != std::string::npos);
    const std::string unknown = write_scenario("unknown.scenario", "  seed: 1", "  seeed: 1");
    CHECK(run_cli("search " + unknown + out) == 1);
    const std::string poor = write_scenario("poor.scenario", "e_bound_ws: 12", "e_bound_ws: 0.01");
    CHECK(run_cli("search " + poor + out) == 2);
    CHECK(slurp(kDir / "stderr.txt").find("InsufficientInitialEnergy") != std::string::npos);
}
