#pragma once

/// JSON experiment configuration. Every section is optional and falls back
/// to the built-in defaults of the requested command; unknown or malformed
/// keys raise config_error naming the offending key. Runs are fully
/// deterministic; the `seedless` flag only documents that.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "biogas/growth.hpp"
#include "biogas/simulate.hpp"

namespace biogas {

enum class LawType { Constant, MrapLevel, MrapZ1, MrapZ0, MrapCurve, Piecewise, Appendix };

struct LawSpec {
    LawType type = LawType::MrapZ1;
    double u0 = 0.0;                    // Constant
    double s_star = -1.0;               // MrapLevel
    double z1 = 1.0;                    // MrapZ1
    std::vector<double> times, values;  // Piecewise
    double eps = 5.0;                   // Appendix
    double appendix_s_star = -1.0;      // Appendix; < 0 means s_bar(1)
    std::string label;
};

struct InitialCondition {
    double s0 = 0.0;
    double z0 = 0.0;                // canonical storage; x0 = (s_in - s0) z0
    std::optional<double> z1;       // per-condition auxiliary level override
};

struct GridSpec {
    int z1_points = 61;
    int T_points = 56;
    double T_min = 0.5;
    double T_max = 6.0;
    double x0_min = 5.0, x0_max = 75.0;
    int x0_points = 41;
    double s0_min = 5.0, s0_max = 60.0;
    int s0_points = 41;
    std::vector<double> map_times{1.0, 2.0, 4.0, 6.0};
};

struct AppendixSpec {
    double eps = 5.0;
    double s_star = -1.0;  // < 0 means s_bar(1)
    int N_max = 10;
    int traj_N = 4;  // largest N whose full trajectory is integrated and exported
};

struct ExperimentConfig {
    GrowthModel model;
    ProcessParams process{100.0, 3.0};
    std::vector<InitialCondition> initial_conditions;
    std::vector<LawSpec> laws;
    double t0 = 0.0;
    double T = 50.0;
    SimOptions sim;  // step, method, band, thinning, tolerances
    GridSpec grids;
    AppendixSpec appendix;
    double value_surface_z1 = 1.0;
    std::string output_dir = "out";
    int jobs = 0;  // 0 = hardware concurrency
    bool seedless = true;
};

/// Parses and validates a config file. Keys outside the documented schema,
/// wrong types, or values violating the model invariants raise config_error.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Parses a JSON string (same validation path as load_config).
ExperimentConfig parse_config(const std::string& json_text);

const char* law_type_name(LawType t);

/// Filename-safe label for a law (explicit `label` wins).
std::string law_label(const LawSpec& spec);

}  // namespace biogas
