#pragma once

/// Reward functionals, the auxiliary value function and its two-sided frame
/// on the true value function, and the exhaustive schedule oracle.
///
/// The finite-horizon reward integrates phi(s, z) z; the auxiliary problem
/// freezes the second argument at z1 and integrates phi(s, z1), which makes
/// the MRAP feedback to s_bar(z1) exactly optimal and yields the frame
///   min(z0, 1) W_z1  <=  V  <=  max(z0, 1) W_z1.

#include <variant>
#include <vector>

#include "biogas/simulate.hpp"

namespace biogas {

struct FiniteHorizon {};
struct Average {
    double T = 0.0;  ///< averaging horizon measured from t0
};
struct Discounted {
    double delta = 0.0;  ///< discount rate > 0
};
struct Auxiliary {
    double z1 = 0.0;  ///< frozen z argument
};
using RewardKind = std::variant<FiniteHorizon, Average, Discounted, Auxiliary>;

struct RewardValue {
    double value = 0.0;
    double tail_bound = 0.0;  ///< analytic truncation bound (discounted only)
};

/// Evaluates the chosen functional on a simulated trajectory. Average with
/// a horizon shorter than the simulation reads the exact checkpoint when one
/// was recorded at t0+T and interpolates the running integral otherwise.
/// Discounted and Auxiliary require the matching accumulator to have been
/// requested in SimOptions.
RewardValue reward(const GrowthModel& model, const ProcessParams& params,
                   const Trajectory& traj, const RewardKind& kind);

/// Auxiliary value W_z1(t0, xi): simulates the optimal feedback psi_{s_bar(z1)}
/// and returns the accumulated frozen-z1 reward.
double auxiliary_value_W(const GrowthModel& model, const ProcessParams& params,
                         const StateSZ& xi, double z1, double t0, double T,
                         const SimOptions& base_opts);

struct SubOptFrame {
    double z1 = 0.0;
    double W = 0.0;
    double lower = 0.0;       ///< min(z0,1) W
    double upper = 0.0;       ///< max(z0,1) W
    double gap_bound = 0.0;   ///< |1 - z0| W
    double J_feedback = 0.0;  ///< true reward of the same feedback trajectory
};

/// Computes W and the frame, evaluates the true reward of psi_{s_bar(z1)}
/// on the same trajectory and verifies lower <= J <= upper (with relative
/// slack `tol`); a violation beyond tolerance throws numeric_error.
SubOptFrame value_frame(const GrowthModel& model, const ProcessParams& params,
                        const StateSZ& xi, double z1, double t0, double T,
                        const SimOptions& base_opts, double tol = 1e-6);

struct RewardSurface {
    std::vector<double> z1_grid;
    std::vector<double> T_grid;
    std::vector<std::vector<double>> J;    ///< J[i][j] = J^{T_i} under psi_{s_bar(z1_j)}
    std::vector<std::vector<double>> J_N;  ///< per-row min-max normalization of J
    std::vector<bool> degenerate;          ///< row had max == min
    std::vector<int> argmax;               ///< per-row argmax, ties to smaller z1
};

/// One simulation per z1 (to max T with checkpoints at every grid time),
/// then per-T min-max normalization. Cells are distributed over `jobs`
/// workers; results are deterministic and independent of the pool size.
RewardSurface normalized_reward_surface(const GrowthModel& model, const ProcessParams& params,
                                        const StateSZ& xi, const std::vector<double>& z1_grid,
                                        const std::vector<double>& T_grid,
                                        const SimOptions& base_opts, int jobs = 1);

struct AverageLimitPoint {
    double T = 0.0;
    double J = 0.0;
    double tail_inf = 0.0;  ///< min of J over horizons >= T in the list
    double tail_sup = 0.0;  ///< max of J over horizons >= T in the list
};

/// J^T for each horizon in T_list (single simulation, exact checkpoints),
/// with running tail extrema to expose liminf/limsup behavior.
std::vector<AverageLimitPoint> average_reward_limits(const GrowthModel& model,
                                                     const ProcessParams& params,
                                                     const StateSZ& xi, const ControlLaw& law,
                                                     std::vector<double> T_list,
                                                     const SimOptions& base_opts);

struct DiscountedPoint {
    double delta = 0.0;
    double J = 0.0;
    double tail_bound = 0.0;
};

/// J_delta for each rate (single simulation, horizon chosen so every
/// truncation tail is below tail_tol relative to the integrand bound).
std::vector<DiscountedPoint> discounted_limit(const GrowthModel& model,
                                              const ProcessParams& params, const StateSZ& xi,
                                              const ControlLaw& law,
                                              std::vector<double> delta_list,
                                              const SimOptions& base_opts,
                                              double tail_tol = 1e-8);

struct BruteForceResult {
    double value = 0.0;
    std::vector<double> schedule;  ///< argmax control level per segment
};

/// Exhaustive maximum of the chosen reward over piecewise-constant
/// schedules with `n_segments` equal segments and per-segment values from
/// `levels`. Serves as a certified lower bound on the value function.
/// Throws budget_error beyond 12 segments or 65536 schedules.
BruteForceResult brute_force_value(const GrowthModel& model, const ProcessParams& params,
                                   const StateSZ& xi, double t0, double T, int n_segments,
                                   const std::vector<double>& levels, const RewardKind& kind,
                                   const SimOptions& base_opts, int jobs = 1);

}  // namespace biogas
