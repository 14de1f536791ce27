#include <doctest.h>

#include "rampc/io.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

const std::string src = RAMPC_SOURCE_DIR;

int run(const std::string& args)
{
    const std::string cmd = std::string(RAMPC_CLI) + " " + args + " > /dev/null 2>&1";
    const int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

fs::path scratch(const std::string& name)
{
    const fs::path d = fs::temp_directory_path() / ("rampc_cli_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

} // namespace

TEST_CASE("cli: verify-ccm on the scalar config writes results and a manifest")
{
    const fs::path out = scratch("verify");
    CHECK(run("--config " + src + "/configs/scalar_tracking.json --out " + out.string() + " verify-ccm") == 0);
    CHECK(fs::exists(out / "manifest.json"));
    const auto v = rampc::read_json_file((out / "verification.json").string());
    CHECK(v.at("result") == "PASS");
    const auto m = rampc::read_json_file((out / "manifest.json").string());
    CHECK(m.at("command") == "verify-ccm");
}

TEST_CASE("cli: input errors exit with 2")
{
    const fs::path d = scratch("bad");
    CHECK(run("--config " + (d / "missing.json").string() + " verify-ccm") == 2);

    auto j = rampc::read_json_file(src + "/configs/scalar_tracking.json");
    j["system_file"] = src + "/data/scalar_system.json";
    j["ccm_file"] = src + "/data/scalar_ccm.json";
    j["mpc"]["horizon"] = 10;
    rampc::write_json_file((d / "unknown.json").string(), j);
    CHECK(run("--config " + (d / "unknown.json").string() + " --out " + d.string() + " verify-ccm") == 2);

    j["mpc"].erase("horizon");
    j["mpc"]["N"] = 0;
    rampc::write_json_file((d / "badN.json").string(), j);
    CHECK(run("--config " + (d / "badN.json").string() + " --out " + d.string() + " solve-ocp") == 2);

    std::ofstream((d / "garbage.json").string()) << "{ not json";
    CHECK(run("--config " + (d / "garbage.json").string() + " --out " + d.string() + " constants") == 2);
}

TEST_CASE("cli: solve-ocp and estimate-demo on the scalar config")
{
    const fs::path out = scratch("solve");
    CHECK(run("--config " + src + "/configs/scalar_tracking.json --out " + out.string() + " solve-ocp") == 0);
    CHECK(rampc::read_json_file((out / "solution.json").string()).at("status") == "converged");
    const fs::path est = scratch("est");
    CHECK(run("--config " + src + "/configs/scalar_tracking.json --out " + est.string() + " estimate-demo") == 0);
    CHECK(fs::exists(est / "parameter_sets.csv"));
}
