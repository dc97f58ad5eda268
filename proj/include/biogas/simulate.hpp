#pragma once

/// Closed- and open-loop simulation of the chemostat in (s, z) coordinates.
///
/// Fixed-step classical RK4 by default (sweep determinism), with an
/// adaptive RK45 alternative. Switching surfaces of the bang feedbacks are
/// localized by bisecting partial steps on the event function s - s*
/// (respectively s - s_bar(z)); once inside the sliding band the singular
/// control is applied as a smooth state feedback and the surface is left
/// only if that control saturates. Open-loop schedules never step across
/// their own discontinuities: steps are split exactly at breakpoints.
///
/// Reward integrands are accumulated with the trapezoid rule on every
/// accepted step; stored samples are thinned.

#include <functional>
#include <optional>
#include <ostream>
#include <utility>
#include <vector>

#include "biogas/control.hpp"
#include "biogas/dynamics.hpp"

namespace biogas {

/// Terminates the run at the first zero crossing of `event` in the given
/// direction (+1 rising, -1 falling, 0 either), localized by bisection.
struct StopCondition {
    std::function<double(const StateSZ&)> event;
    int direction = 0;
};

enum class IntegratorMethod { RK4Fixed, RK45Adaptive };

struct SimOptions {
    double t0 = 0.0;
    double T = 0.0;
    double step = 1e-3;
    IntegratorMethod method = IntegratorMethod::RK4Fixed;
    double abs_tol = 1e-9;  ///< adaptive only
    double rel_tol = 1e-9;  ///< adaptive only
    double slide_band = -1.0;      ///< half-width; < 0 means 1e-6 * s_in
    double event_time_tol = 1e-3;  ///< event bisection window, fraction of the step
    int thin = 10;                 ///< store every thin-th accepted step
    std::vector<double> checkpoints;     ///< ascending times in (t0, T]; steps land on them
    std::vector<double> discount_rates;  ///< accumulate discounted reward per rate
    std::vector<double> aux_z1;          ///< accumulate the frozen-z1 integrand per value
    bool verify_admissibility = true;    ///< controllability precheck for MRAP laws
    std::optional<StopCondition> stop;
};

/// Exact cumulative production at a requested time (steps are split so the
/// checkpoint is hit exactly; no interpolation involved).
struct Checkpoint {
    double t = 0.0;
    double s = 0.0, z = 0.0;
    double cum_phi_z = 0.0;
};

struct Trajectory {
    double t0 = 0.0, tf = 0.0;

    // thinned samples (events, checkpoints and endpoints always included)
    std::vector<double> t, s, z, u;
    // full-resolution running integrals, snapshotted at the stored samples
    std::vector<double> cum_phi_z;  ///< integral of phi(s,z) z
    std::vector<double> cum_mu;     ///< integral of mu along the path
    std::vector<double> cum_u;      ///< integral of the applied control
    std::vector<double> cum_z;      ///< integral of z

    double total_phi_z = 0.0;  ///< full-horizon integral of phi z
    std::vector<std::pair<double, double>> aux;         ///< (z1, integral of phi(s, z1))
    std::vector<std::pair<double, double>> discounted;  ///< (delta, delta int e^{-d(t-t0)} phi z)
    std::vector<Checkpoint> checkpoints;

    bool stopped_early = false;  ///< stop condition fired before T
    int clamp_events = 0;        ///< on-curve control clampings
    double max_box_violation = 0.0;   ///< worst excursion outside the invariant box
    double worst_z_backstep = 0.0;    ///< worst violation of z-monotonicity

    size_t size() const { return t.size(); }
    StateSZ state_at(size_t i) const { return StateSZ{s[i], z[i]}; }

    double aux_integral(double z1) const;         ///< throws if z1 was not requested
    double discounted_value(double delta) const;  ///< throws if delta was not requested

    /// CSV with columns t, s, z, x, u, phi_z.
    void write_csv(std::ostream& os, const GrowthModel& model,
                   const ProcessParams& params) const;
};

/// Integrates the closed loop from xi over [t0, T].
Trajectory simulate(const GrowthModel& model, const ProcessParams& params,
                    const ControlLaw& law, const StateSZ& xi, const SimOptions& opts);

/// First time the predicate holds along the trajectory, refined by
/// bisection on linearly interpolated states between stored samples.
std::optional<double> hitting_time(const Trajectory& traj,
                                   const std::function<bool(const StateSZ&)>& pred);

}  // namespace biogas
