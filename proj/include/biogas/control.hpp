#pragma once

/// Feedback and open-loop control laws.
///
/// The most-rapid-approach (MRAP) feedback to a substrate level s*:
///
///   psi(s, z) = 0        for s > s*
///             = u_sing   for s = s*      (singular value mu(s*,(s_in-s*)z) z)
///             = u_max    for s < s*
///
/// and its generalization tracking the per-z maximizer curve s = s_bar(z),
/// whose on-curve control follows from d/dt [s - s_bar(z)] = 0.

#include <memory>
#include <variant>
#include <vector>

#include "biogas/dynamics.hpp"
#include "biogas/growth.hpp"

namespace biogas {

/// u(t) = u0.
struct ConstantControl {
    double u0 = 0.0;
};

/// Most rapid approach to a fixed substrate level.
struct Mrap {
    double s_star = 0.0;
};

/// Most rapid approach to the maximizer curve { s = s_bar(z) }.
struct MrapCurve {
    std::shared_ptr<const MaximizerCurve> curve;
};

/// Open-loop schedule: u(t) = values[i] on [times[i], times[i+1]), with the
/// last value held beyond the final breakpoint.
struct PiecewiseConstant {
    std::vector<double> times;   ///< ascending breakpoints, times[0] = schedule start
    std::vector<double> values;  ///< same length as times
};

/// Open-loop schedule of the oscillating counterexample: hold at s = eps on
/// [0, t_star], then alternate blocks (2^m t*, 2^{m+1} t*] of repeated
/// excursion cycles (m even) and holds (m odd). Evaluated lazily per time
/// query; no cycle list is materialized.
struct AppendixSchedule {
    double eps = 0.0;     ///< low substrate level (cycle start/end)
    double s_star = 0.0;  ///< excursion peak
    double t_up = 0.0;    ///< time from eps to s_star under u_max
    double t_star = 0.0;  ///< full cycle duration (up + down)
    double u_hold = 0.0;  ///< mu(eps, s_in - eps), holds s at eps on {z=1}
    double u_max = 0.0;
};

using ControlLaw =
    std::variant<ConstantControl, Mrap, MrapCurve, PiecewiseConstant, AppendixSchedule>;

/// Clamp to the admissible range [0, u_max].
double saturate(double u, const ProcessParams& params);

/// Singular value of the MRAP feedback: mu(s*, (s_in - s*) z) z.
double mrap_singular_value(const GrowthModel& model, const ProcessParams& params,
                           double s_star, double z);

/// On-curve control of the curve feedback, before clamping:
///   u = mu z + s_bar'(z) mu (1 - z) z / (s_in - s)
/// with mu evaluated at (s, (s_in - s) z).
double curve_singular_value(const GrowthModel& model, const ProcessParams& params,
                            const MaximizerCurve& curve, const StateSZ& state);

/// Pointwise value of the three-branch MRAP law with a sliding band of
/// half-width `band` around s*. Throws admissibility_error when the
/// singular value exceeds u_max inside the band.
double mrap_control(const GrowthModel& model, const ProcessParams& params, double s_star,
                    const StateSZ& state, double band);

/// Pointwise value of the curve feedback; the on-curve value is clamped to
/// [0, u_max] (tabulation slack), off-curve branches are bang.
double mrap_curve_control(const GrowthModel& model, const ProcessParams& params,
                          const MaximizerCurve& curve, const StateSZ& state, double band);

/// Schedule lookup for the open-loop laws.
double piecewise_value(const PiecewiseConstant& law, double t);
double appendix_value(const AppendixSchedule& law, double t);

/// First control discontinuity strictly after t (+inf when none). Feedback
/// laws switch on state events instead and report +inf here.
double next_switch_time(const ControlLaw& law, double t);

/// True for laws whose switching is driven by state events.
bool is_state_feedback(const ControlLaw& law);

/// Upper bound on the time the MRAP feedback needs to reach s* from xi,
/// built from the one-sided drift constants of the reachability argument:
/// k- bounds the decay of s above s* (u = 0 branch), k+ the growth below
/// (u = u_max branch); the bound is s_in / min(k+, -k-). Returns +inf when
/// the controllability margin is exhausted.
double mrap_reach_time_bound(const GrowthModel& model, const ProcessParams& params,
                             const StateSZ& xi, double s_star);

/// Derived quantities of the oscillating schedule.
struct AppendixAnalysis {
    AppendixSchedule schedule;
    double t_up = 0.0, t_down = 0.0, t_star = 0.0;
    double I_star = 0.0;  ///< biogas produced along one excursion cycle
    double I_eps = 0.0;   ///< t_star * phi(eps, 1), produced by a t_star-long hold
    double K_infinity = 0.0;  ///< (I* + 2 I_eps) / (3 t*)
    double L_infinity = 0.0;  ///< (2 I* + I_eps) / (3 t*)

    /// Exact average production over [0, 2^{2N} t*] from the segment sums.
    double K_N(int N) const;
    /// Exact average production over [0, 2^{2N+1} t*]; equals (K_N + I*/t*)/2.
    double L_N(int N) const;
    /// Closed-form K_N via the partial geometric sum.
    double K_N_closed(int N) const;
};

/// Builds the oscillating schedule for initial condition (eps, 1): simulates
/// the excursion cycle on {z = 1} (u_max up to s_star, 0 back down to eps),
/// extracting t_up, t_down and the cycle production integral. Requires
/// 0 < eps < s_star < s_in and admissibility of u_hold and the excursion.
AppendixAnalysis appendix_schedule(const GrowthModel& model, const ProcessParams& params,
                                   double eps, double s_star, double step = 1e-3);

}  // namespace biogas
