#include "henon/report.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace henon;

namespace {

const std::filesystem::path kOut = std::filesystem::temp_directory_path() / "henon_cli_test";

int run(const std::string& args) {
    const std::string cmd = std::string(HENON_LAB_CLI) + " " + args + " > " + (kOut / "stdout.txt").string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Json report() {
    std::ifstream f(kOut / "report.json");
    std::stringstream ss;
    ss << f.rdbuf();
    return Json::parse(ss.str());
}

std::string out_flag() { return " --out " + kOut.string(); }

}  // namespace

TEST_CASE("unknown flag and bad values exit with 1") {
    std::filesystem::create_directories(kOut);
    CHECK(run("fixed-points --map 'y^2;a=0.3' --bogus") == 1);
    CHECK(run("nosuchcommand") == 1);
    CHECK(run("verdict --map 'y^2;a=0.3' --m 100" + out_flag()) == 1);
    CHECK(run("fixed-points --map 'y^2;a=0'" + out_flag()) == 1);
    CHECK(run("fixed-points" + out_flag()) == 1);
}

TEST_CASE("fixed-points needs no chart and omits chart diagnostics") {
    std::filesystem::create_directories(kOut);
    std::filesystem::remove(kOut / "report.json");
    REQUIRE(run("fixed-points --map 'y^2;a=0.3' --period 2" + out_flag()) == 0);
    const Json r = report();
    CHECK(r["schema"] == "henon-lab/1");
    CHECK(r["command"] == "fixed-points");
    CHECK_FALSE(r.contains("chart"));
    CHECK_FALSE(r.contains("timing"));
    CHECK(r["orbits"].size() == 3);
}

TEST_CASE("chart subcommand reports diagnostics with their budgets") {
    REQUIRE(run("chart --map 'y^2;a=0.3'" + out_flag()) == 0);
    const Json r = report();
    REQUIRE(r.contains("chart"));
    CHECK(r["chart"]["conjugacy_residual"].get<double>() < 1e-10);
    CHECK(r["chart"].contains("tol"));
    CHECK(r["chart"].contains("n_max"));
    CHECK(r["chart"]["g_norm"][0].get<double>() == doctest::Approx(2.4789826).epsilon(1e-6));
}

TEST_CASE("verdict with a coarse tolerance is inconclusive and exits 2") {
    REQUIRE(run("verdict --map 'y^2;a=0.3' --m 64 --tol 0.5 --r-schedule 2.5" + out_flag()) == 2);
    const Json r = report();
    CHECK(r["verdict"]["status"] == "Inconclusive");
}

TEST_CASE("render-slice writes a PPM of the requested size") {
    REQUIRE(run("render-slice --map 'y^2;a=0.3' --m 64" + out_flag()) == 0);
    std::ifstream f(kOut / "slice.ppm", std::ios::binary);
    std::string header(13, '\0');
    f.read(header.data(), 13);
    CHECK(header == "P6\n64 64\n255\n");
}

TEST_CASE("dissipative maps are analyzed through the inverse") {
    REQUIRE(run("chart --map 'y^2-6;a=2'" + out_flag()) == 0);
    const Json r = report();
    CHECK(r["analyzed_map"]["kind"] == "inverse");
}

TEST_CASE("selfcheck passes") { CHECK(run("selfcheck" + out_flag()) == 0); }
