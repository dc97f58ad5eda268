#pragma once

/// Configuration-driven experiment commands behind the CLI. Every command
/// writes CSV (and SVG where meaningful) into the output directory and is
/// deterministic: identical configs produce byte-identical files regardless
/// of the worker count.

#include <filesystem>

#include "biogas/config.hpp"
#include "biogas/rewards.hpp"

namespace biogas {

/// Builds a concrete control law for one initial condition. MrapZ0 resolves
/// to the most rapid approach toward s_bar(z0); MrapCurve tabulates the
/// maximizer curve on the invariant z-range of the condition.
ControlLaw build_law(const LawSpec& spec, const GrowthModel& model,
                     const ProcessParams& params, const InitialCondition& ic, double step);

int effective_jobs(const ExperimentConfig& cfg);

/// Built-in defaults per command name (phase-portrait, reward-surface,
/// compare-feedbacks, value-surface, appendix, check).
ExperimentConfig default_config(const std::string& command);

/// State-space trajectory bundles with the invariant line overlay.
void cmd_phase_portrait(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

/// Normalized average-reward surface over (z1, T) per initial condition.
void cmd_reward_surface(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

/// Time plots and open-loop controls of the candidate feedbacks, reward
/// curves T -> J^T, and initial-condition difference maps.
void cmd_compare_feedbacks(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

/// Auxiliary value W_z1 over the initial-condition grid.
void cmd_value_surface(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

/// Oscillating-schedule analysis: cycle quantities, K_N / L_N sequences,
/// their limits, and trajectory export for small N.
void cmd_appendix(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

/// Assumption checkers, invariant suites and oracle comparisons.
/// Returns the number of failed checks (0 = all green).
int cmd_check(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

}  // namespace biogas
