#include "biogas/control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "biogas/simulate.hpp"

namespace biogas {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double saturate(double u, const ProcessParams& params) {
    return std::min(std::max(u, 0.0), params.u_max);
}

double mrap_singular_value(const GrowthModel& model, const ProcessParams& params,
                           double s_star, double z) {
    return mu(model, s_star, (params.s_in - s_star) * z) * z;
}

double curve_singular_value(const GrowthModel& model, const ProcessParams& params,
                            const MaximizerCurve& curve, const StateSZ& state) {
    // From d/dt [s - s_bar(z)] = 0 along (4):
    //   (u - mu z)(s_in - s) = s_bar'(z) mu (1 - z) z
    const double m = mu(model, state.s, (params.s_in - state.s) * state.z);
    const double slope = curve.slope_at(state.z);
    return m * state.z + slope * m * (1.0 - state.z) * state.z / (params.s_in - state.s);
}

double mrap_control(const GrowthModel& model, const ProcessParams& params, double s_star,
                    const StateSZ& state, double band) {
    const double g = state.s - s_star;
    if (g > band) return 0.0;
    if (g < -band) return params.u_max;
    const double u = mrap_singular_value(model, params, s_star, state.z);
    if (u > params.u_max * (1.0 + 1e-12) + 1e-15) {
        std::ostringstream msg;
        msg << "MRAP singular value " << u << " exceeds u_max " << params.u_max
            << " (controllability violated)";
        throw admissibility_error(msg.str());
    }
    return std::min(u, params.u_max);
}

double mrap_curve_control(const GrowthModel& model, const ProcessParams& params,
                          const MaximizerCurve& curve, const StateSZ& state, double band) {
    const double g = state.s - curve.s_at(state.z);
    if (g > band) return 0.0;
    if (g < -band) return params.u_max;
    return saturate(curve_singular_value(model, params, curve, state), params);
}

double piecewise_value(const PiecewiseConstant& law, double t) {
    if (law.times.empty()) {
        throw control_error("piecewise schedule is empty");
    }
    if (t < law.times.front()) return law.values.front();
    const auto it = std::upper_bound(law.times.begin(), law.times.end(), t);
    const size_t i = static_cast<size_t>(it - law.times.begin()) - 1;
    return law.values[i];
}

namespace {

// Block decomposition of the oscillating schedule: [0, t*] is a hold, then
// block m >= 0 covers (2^m t*, 2^{m+1} t*]; even m repeats the excursion
// cycle 2^m times, odd m holds at s = eps.
struct AppendixPosition {
    bool hold = true;
    double cycle_tau = 0.0;  // position inside an excursion cycle, in (0, t*]
};

AppendixPosition appendix_locate(const AppendixSchedule& law, double t) {
    AppendixPosition pos;
    if (t <= law.t_star) {
        pos.hold = true;
        return pos;
    }
    const double r = t / law.t_star;
    int m = static_cast<int>(std::floor(std::log2(r)));
    // guard against log2 landing on the wrong side of a block boundary
    while (std::ldexp(1.0, m) * law.t_star >= t) --m;
    while (std::ldexp(1.0, m + 1) * law.t_star < t) ++m;
    if (m % 2 == 1) {
        pos.hold = true;
        return pos;
    }
    pos.hold = false;
    const double block_start = std::ldexp(1.0, m) * law.t_star;
    double tau = std::fmod(t - block_start, law.t_star);
    if (tau == 0.0) tau = law.t_star;  // cycle end belongs to the cycle
    pos.cycle_tau = tau;
    return pos;
}

}  // namespace

double appendix_value(const AppendixSchedule& law, double t) {
    if (t < 0.0) {
        throw control_error("appendix schedule evaluated at negative time");
    }
    const AppendixPosition pos = appendix_locate(law, t);
    if (pos.hold) return law.u_hold;
    return pos.cycle_tau <= law.t_up ? law.u_max : 0.0;
}

namespace {

// Next schedule discontinuity strictly after t, tolerant of t sitting
// exactly on a previously returned boundary.
double next_appendix_switch(const AppendixSchedule& l, double t) {
    const double ts = l.t_star;
    const double tol = 1e-9 * std::max(ts, std::abs(t));
    if (t < ts - tol) return ts;
    int m = 0;
    while (std::ldexp(1.0, m + 1) * ts <= t + tol) ++m;
    const double block_start = std::ldexp(1.0, m) * ts;
    const double block_end = std::ldexp(1.0, m + 1) * ts;
    if (m % 2 == 1) return block_end;  // hold block
    const double cycles_done = std::floor((t - block_start + tol) / ts);
    const double cycle_start = block_start + cycles_done * ts;
    const double tau = t - cycle_start;
    double next;
    if (tau < l.t_up - tol) {
        next = cycle_start + l.t_up;
    } else if (tau < ts - tol) {
        next = cycle_start + ts;
    } else {
        next = cycle_start + ts + l.t_up;
    }
    return std::min(next, block_end);
}

}  // namespace

double next_switch_time(const ControlLaw& law, double t) {
    return std::visit(
        [&](const auto& l) -> double {
            using L = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<L, PiecewiseConstant>) {
                for (double bp : l.times) {
                    if (bp > t) return bp;
                }
                return kInf;
            } else if constexpr (std::is_same_v<L, AppendixSchedule>) {
                return next_appendix_switch(l, t);
            } else {
                (void)l;
                return kInf;
            }
        },
        law);
}

bool is_state_feedback(const ControlLaw& law) {
    return std::holds_alternative<Mrap>(law) || std::holds_alternative<MrapCurve>(law);
}

double mrap_reach_time_bound(const GrowthModel& model, const ProcessParams& params,
                             const StateSZ& xi, double s_star) {
    const double z_lo = std::min(xi.z, 1.0);
    const double z_hi = std::max(xi.z, 1.0);
    constexpr int n = 512;

    // k-: uniform decay rate of s on [s*, s0] under u = 0 (kept as the full
    // product, including the (s_in - s) factor, so the bound is valid up to s0)
    double k_minus = -kInf;
    if (xi.s > s_star) {
        double lo_prod = kInf;
        for (int i = 0; i <= n; ++i) {
            const double s = s_star + (xi.s - s_star) * i / n;
            const double v =
                mu(model, s, std::max((params.s_in - s) * z_lo, 1e-300)) * z_lo *
                (params.s_in - s);
            lo_prod = std::min(lo_prod, v);
        }
        k_minus = -lo_prod;
    }

    // k+: uniform growth rate of s on (0, s*) under u = u_max
    double k_plus = kInf;
    if (xi.s < s_star) {
        double hi_mu_z = 0.0;
        for (int i = 0; i <= n; ++i) {
            const double s = s_star * i / n;
            const double v = mu(model, s, std::max((params.s_in - s) * z_hi, 1e-300)) * z_hi;
            hi_mu_z = std::max(hi_mu_z, v);
        }
        k_plus = (params.u_max - hi_mu_z) * (params.s_in - s_star);
    }

    const double rate = std::min(k_plus, -k_minus);
    if (!(rate > 0.0)) return kInf;
    return params.s_in / rate;
}

double AppendixAnalysis::K_N(int N) const {
    // exact block sums: production I_eps on [0,t*], then alternating blocks
    double total = I_eps;
    for (int k = 0; k < N; ++k) {
        total += std::ldexp(1.0, 2 * k) * I_star;       // excursion block
        total += std::ldexp(1.0, 2 * k + 1) * I_eps;    // hold block
    }
    return total / (std::ldexp(1.0, 2 * N) * t_star);
}

double AppendixAnalysis::L_N(int N) const {
    return 0.5 * (K_N(N) + I_star / t_star);
}

double AppendixAnalysis::K_N_closed(int N) const {
    double geo = 0.0;
    for (int j = 1; j <= N; ++j) geo += std::ldexp(1.0, -2 * j);
    return (I_star + 2.0 * I_eps) / t_star * geo + I_eps / (std::ldexp(1.0, 2 * N) * t_star);
}

AppendixAnalysis appendix_schedule(const GrowthModel& model, const ProcessParams& params,
                                   double eps, double s_star, double step) {
    if (!(0.0 < eps && eps < s_star && s_star < params.s_in)) {
        throw std::domain_error("appendix_schedule: need 0 < eps < s_star < s_in");
    }
    const StateSZ xi{eps, 1.0};
    const ControllabilityReport rep = check_controllability(model, params, xi);
    if (!rep.ok) {
        std::ostringstream msg;
        msg << "appendix schedule: controllability fails on {z=1} (max mu z = " << rep.max_mu_z
            << " >= u_max = " << params.u_max << ")";
        throw admissibility_error(msg.str());
    }

    AppendixAnalysis out;
    out.schedule.eps = eps;
    out.schedule.s_star = s_star;
    out.schedule.u_max = params.u_max;
    out.schedule.u_hold = mu(model, eps, params.s_in - eps);

    // excursion leg up: u = u_max from (eps, 1) until s = s_star
    SimOptions up;
    up.t0 = 0.0;
    up.T = 1e6;  // stop condition ends the leg
    up.step = step;
    up.verify_admissibility = false;
    up.stop = StopCondition{[=](const StateSZ& st) { return st.s - s_star; }, +1};
    const Trajectory leg_up =
        simulate(model, params, ControlLaw{ConstantControl{params.u_max}}, xi, up);
    if (!leg_up.stopped_early) {
        throw admissibility_error("appendix schedule: s_star unreachable under u_max");
    }
    out.t_up = leg_up.tf;

    // leg down: u = 0 from (s_star, 1) back to s = eps
    SimOptions down = up;
    down.stop = StopCondition{[=](const StateSZ& st) { return st.s - eps; }, -1};
    const Trajectory leg_down = simulate(model, params, ControlLaw{ConstantControl{0.0}},
                                         StateSZ{s_star, 1.0}, down);
    if (!leg_down.stopped_early) {
        throw admissibility_error("appendix schedule: eps unreachable under u = 0");
    }
    out.t_down = leg_down.tf;

    out.t_star = out.t_up + out.t_down;
    out.I_star = leg_up.total_phi_z + leg_down.total_phi_z;
    out.I_eps = out.t_star * phi(model, params, eps, 1.0);
    out.schedule.t_up = out.t_up;
    out.schedule.t_star = out.t_star;
    out.K_infinity = (out.I_star + 2.0 * out.I_eps) / (3.0 * out.t_star);
    out.L_infinity = (2.0 * out.I_star + out.I_eps) / (3.0 * out.t_star);
    return out;
}

}  // namespace biogas
