#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "nlo/expr.hpp"
#include "nlo/grid.hpp"
#include "nlo/growth.hpp"

namespace nlo {

// A validated run description.  Field presence is task-dependent; see
// config_from_json for the rules.  `echo` keeps the parsed source object so
// every report can embed the exact configuration it ran from.
struct ExperimentConfig {
    std::string task;

    GrowthFunction growth = GrowthFunction::power(2.0);
    bool has_growth = false;

    std::string kernel_text = "one";
    double structure_lambda = 1.0; // extra admissibility slack for residual checks

    int dim = 1;
    double h = 0.0, omega_radius = 0.0, R_infinity = 0.0;
    bool has_grid = false;

    std::vector<double> s_list;
    double s_min = 1e-3;

    std::string exterior_text;
    bool has_exterior = false;

    std::uint64_t seed = 1;
    double tol = 1e-8;

    Point x0{0.0, 0.0};
    bool has_x0 = false;
    double R = 0.0;
    bool has_R = false;

    std::vector<double> deltas;

    int dg_count = 50;
    double dg_ratio_lo = 0.3, dg_ratio_hi = 0.8;

    double t_lo = 1e-4, t_hi = 1e4; // growth-check evaluation grid
    int t_count = 200;

    double p_embed = 2.0; // embedding / isoperimetric exponent
    double level_low = 0.0, level_high = 0.0;
    bool has_levels = false;
    double iso_gamma = 0.2, iso_gamma0 = 0.2, iso_C0 = 10.0;

    nlohmann::json echo;
};

// Parses and validates; any shape or invariant problem throws config_error.
ExperimentConfig config_from_json(const nlohmann::json& j);

// Everything a run produced, still in memory.  files maps relative paths to
// contents; the caller decides where (and whether) they land on disk.
struct RunOutput {
    int exit_code = 0; // 0 ok, 2 configuration rejected, 3 numeric failure (partial report)
    std::string message;
    std::map<std::string, std::string> files;
};

// Executes config["task"].  Identical input json produces byte-identical
// files.  On numeric failure the report written so far is kept, with an
// "error" entry, and the exit code is 3; configuration problems give 2 and
// no files.
RunOutput run_experiment(const nlohmann::json& config_json);

// Runs the base task once per value of config["sweep"], patched into the
// matching field, and merges one summary CSV keyed by the parameter.
// Sub-run failures become per-row status entries; the sweep itself still
// exits 0.  `jobs` fans the sub-runs across threads; the merge happens on
// the calling thread in slot order, so the output does not depend on jobs.
RunOutput run_sweep(const nlohmann::json& config_json, int jobs = 1);

// Writes every file under dir, creating directories as needed.
void write_outputs(const RunOutput& out, const std::string& dir);

} // namespace nlo
