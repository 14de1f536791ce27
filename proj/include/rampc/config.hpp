#pragma once

#include "rampc/ccm_constants.hpp"
#include "rampc/io.hpp"
#include "rampc/ocp.hpp"
#include "rampc/simulator.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace rampc {

/// One JSON file with a section per module; unknown keys are rejected.
struct RunConfig {
    std::string path;
    std::string base_dir; // relative file names resolve against this
    json raw;

    UncertainSystem sys;
    CCM ccm;
    std::string ccm_path;
    std::vector<std::string> input_files; // everything hashed into the manifest

    SampleSpec samples;
    ConstantsOptions constants_options;
    std::optional<TubeConstants> constants; // from "constants_file" when given

    MPCConfig mpc;
    TerminalSpec terminal;
    SimConfig sim;

    double verify_tol = 1e-6;
    json geodesic_query;   // {"x": [...], "z": [...]}
    json estimate_demo;    // {"steps", "seed", "theta_true"}
    int sim_runs = 1; // consecutive seeds for simulate

    /// Stored constants, or a fresh computation on the configured samples.
    TubeConstants tube_constants() const;
};

RunConfig load_run_config(const std::string& path);

json to_json(const TubeConstants& c);
TubeConstants tube_constants_from_json(const json& j);

struct RunManifest {
    std::string config_path;
    std::string command;
    std::uint64_t seed = 0;
    std::string out_dir;
    std::string version;
    std::string input_hash; // FNV-1a over the input files, hex
};

/// 64-bit FNV-1a of the files' bytes in order; stable across platforms.
std::string hash_files(const std::vector<std::string>& paths);

json to_json(const RunManifest& m);
void write_manifest(const std::string& dir, const RunManifest& m);

const char* toolkit_version();

} // namespace rampc
