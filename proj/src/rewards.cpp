#include "biogas/rewards.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "biogas/parallel.hpp"

namespace biogas {

namespace {

// Uniform bound on the reward integrand over the invariant box of the run:
// phi(s, z) z <= phi_bar(min(z0,1)) max(z0,1).
double integrand_bound(const GrowthModel& model, const ProcessParams& params, double z0) {
    const double z_lo = std::min(z0, 1.0);
    const double z_hi = std::max(z0, 1.0);
    return phi_bar(model, params, z_lo) * z_hi;
}

// Running integral of phi z at time tt (t0-relative horizon already applied
// by the caller). Prefers an exact checkpoint, falls back to interpolating
// the stored cumulative.
double cum_phi_z_at(const Trajectory& traj, double tt) {
    const double tol = 1e-9 * std::max(1.0, std::abs(tt));
    if (std::abs(tt - traj.tf) <= tol) return traj.total_phi_z;
    for (const auto& cp : traj.checkpoints) {
        if (std::abs(cp.t - tt) <= tol) return cp.cum_phi_z;
    }
    if (tt < traj.t0 - tol || tt > traj.tf + tol) {
        throw std::invalid_argument("reward horizon outside the simulated range");
    }
    const auto it = std::lower_bound(traj.t.begin(), traj.t.end(), tt);
    const size_t i = static_cast<size_t>(it - traj.t.begin());
    if (i == 0) return traj.cum_phi_z.front();
    if (i >= traj.size()) return traj.cum_phi_z.back();
    const double w = (tt - traj.t[i - 1]) / (traj.t[i] - traj.t[i - 1]);
    return traj.cum_phi_z[i - 1] + w * (traj.cum_phi_z[i] - traj.cum_phi_z[i - 1]);
}

SimOptions with_horizon(const SimOptions& base, double t0, double T) {
    SimOptions o = base;
    o.t0 = t0;
    o.T = T;
    return o;
}

}  // namespace

RewardValue reward(const GrowthModel& model, const ProcessParams& params,
                   const Trajectory& traj, const RewardKind& kind) {
    return std::visit(
        [&](const auto& k) -> RewardValue {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, FiniteHorizon>) {
                return RewardValue{traj.total_phi_z, 0.0};
            } else if constexpr (std::is_same_v<K, Average>) {
                if (!(k.T > 0.0)) throw std::invalid_argument("Average: horizon must be > 0");
                return RewardValue{cum_phi_z_at(traj, traj.t0 + k.T) / k.T, 0.0};
            } else if constexpr (std::is_same_v<K, Discounted>) {
                if (!(k.delta > 0.0)) {
                    throw std::invalid_argument("Discounted: rate must be > 0");
                }
                const double z0 = traj.z.empty() ? 1.0 : traj.z.front();
                const double bound = integrand_bound(model, params, z0);
                const double tail = std::exp(-k.delta * (traj.tf - traj.t0)) * bound;
                return RewardValue{traj.discounted_value(k.delta), tail};
            } else {
                const double z0 = traj.z.empty() ? 1.0 : traj.z.front();
                const double lo = std::min(z0, 1.0), hi = std::max(z0, 1.0);
                if (k.z1 < lo - 1e-12 || k.z1 > hi + 1e-12) {
                    std::ostringstream msg;
                    msg << "Auxiliary: z1=" << k.z1 << " outside [" << lo << ", " << hi << "]";
                    throw std::domain_error(msg.str());
                }
                return RewardValue{traj.aux_integral(k.z1), 0.0};
            }
        },
        kind);
}

double auxiliary_value_W(const GrowthModel& model, const ProcessParams& params,
                         const StateSZ& xi, double z1, double t0, double T,
                         const SimOptions& base_opts) {
    SimOptions opts = with_horizon(base_opts, t0, T);
    opts.aux_z1 = {z1};
    const ControlLaw law{Mrap{s_bar(model, params, z1)}};
    return simulate(model, params, law, xi, opts).aux_integral(z1);
}

SubOptFrame value_frame(const GrowthModel& model, const ProcessParams& params,
                        const StateSZ& xi, double z1, double t0, double T,
                        const SimOptions& base_opts, double tol) {
    const double z_lo = std::min(xi.z, 1.0);
    const double z_hi = std::max(xi.z, 1.0);
    if (z1 < z_lo - 1e-12 || z1 > z_hi + 1e-12) {
        std::ostringstream msg;
        msg << "value_frame: z1=" << z1 << " outside [" << z_lo << ", " << z_hi << "]";
        throw std::domain_error(msg.str());
    }

    SimOptions opts = with_horizon(base_opts, t0, T);
    opts.aux_z1 = {z1};
    const ControlLaw law{Mrap{s_bar(model, params, z1)}};
    const Trajectory traj = simulate(model, params, law, xi, opts);

    SubOptFrame frame;
    frame.z1 = z1;
    frame.W = traj.aux_integral(z1);
    frame.lower = z_lo * frame.W;
    frame.upper = z_hi * frame.W;
    frame.gap_bound = std::abs(1.0 - xi.z) * frame.W;
    frame.J_feedback = traj.total_phi_z;

    const double slack = tol * std::max(1.0, std::abs(frame.W));
    if (frame.J_feedback < frame.lower - slack || frame.J_feedback > frame.upper + slack) {
        std::ostringstream msg;
        msg << "value frame violated: " << frame.lower << " <= " << frame.J_feedback
            << " <= " << frame.upper << " fails beyond tolerance (z1=" << z1 << ")";
        throw numeric_error(msg.str());
    }
    return frame;
}

RewardSurface normalized_reward_surface(const GrowthModel& model, const ProcessParams& params,
                                        const StateSZ& xi, const std::vector<double>& z1_grid,
                                        const std::vector<double>& T_grid,
                                        const SimOptions& base_opts, int jobs) {
    if (z1_grid.empty() || T_grid.empty()) {
        throw std::invalid_argument("normalized_reward_surface: empty grid");
    }
    if (!std::is_sorted(T_grid.begin(), T_grid.end())) {
        throw std::invalid_argument("normalized_reward_surface: T grid must be ascending");
    }

    RewardSurface surf;
    surf.z1_grid = z1_grid;
    surf.T_grid = T_grid;
    surf.J.assign(T_grid.size(), std::vector<double>(z1_grid.size(), 0.0));

    const double T_max = T_grid.back();
    std::vector<std::vector<double>> per_z1(z1_grid.size());
    parallel_for(z1_grid.size(), jobs, [&](size_t j) {
        SimOptions opts = with_horizon(base_opts, base_opts.t0, base_opts.t0 + T_max);
        opts.checkpoints.clear();
        for (double T : T_grid) opts.checkpoints.push_back(base_opts.t0 + T);
        const ControlLaw law{Mrap{s_bar(model, params, z1_grid[j])}};
        const Trajectory traj = simulate(model, params, law, xi, opts);
        if (traj.checkpoints.size() != T_grid.size()) {
            throw numeric_error("normalized_reward_surface: missing checkpoints");
        }
        std::vector<double> col(T_grid.size());
        for (size_t i = 0; i < T_grid.size(); ++i) {
            col[i] = traj.checkpoints[i].cum_phi_z / T_grid[i];
        }
        per_z1[j] = std::move(col);
    });
    for (size_t i = 0; i < T_grid.size(); ++i) {
        for (size_t j = 0; j < z1_grid.size(); ++j) {
            surf.J[i][j] = per_z1[j][i];
        }
    }

    surf.J_N.assign(T_grid.size(), std::vector<double>(z1_grid.size(), 0.0));
    surf.degenerate.assign(T_grid.size(), false);
    surf.argmax.assign(T_grid.size(), 0);
    for (size_t i = 0; i < T_grid.size(); ++i) {
        const auto& row = surf.J[i];
        double lo = row[0], hi = row[0];
        int arg = 0;
        for (size_t j = 1; j < row.size(); ++j) {
            lo = std::min(lo, row[j]);
            if (row[j] > hi) {
                hi = row[j];
                arg = static_cast<int>(j);  // strict: ties stay at the smaller z1
            }
        }
        surf.argmax[i] = arg;
        const double span = hi - lo;
        if (span <= 1e-14 * std::max(1.0, std::abs(hi))) {
            surf.degenerate[i] = true;  // row left all-zero
            continue;
        }
        for (size_t j = 0; j < row.size(); ++j) {
            surf.J_N[i][j] = (row[j] - lo) / span;
        }
    }
    return surf;
}

std::vector<AverageLimitPoint> average_reward_limits(const GrowthModel& model,
                                                     const ProcessParams& params,
                                                     const StateSZ& xi, const ControlLaw& law,
                                                     std::vector<double> T_list,
                                                     const SimOptions& base_opts) {
    if (T_list.empty()) return {};
    std::sort(T_list.begin(), T_list.end());
    SimOptions opts = with_horizon(base_opts, base_opts.t0, base_opts.t0 + T_list.back());
    opts.checkpoints.clear();
    for (double T : T_list) opts.checkpoints.push_back(base_opts.t0 + T);
    const Trajectory traj = simulate(model, params, law, xi, opts);
    if (traj.checkpoints.size() != T_list.size()) {
        throw numeric_error("average_reward_limits: missing checkpoints");
    }

    std::vector<AverageLimitPoint> out(T_list.size());
    for (size_t i = 0; i < T_list.size(); ++i) {
        out[i].T = T_list[i];
        out[i].J = traj.checkpoints[i].cum_phi_z / T_list[i];
    }
    double tinf = out.back().J, tsup = out.back().J;
    for (size_t i = out.size(); i-- > 0;) {
        tinf = std::min(tinf, out[i].J);
        tsup = std::max(tsup, out[i].J);
        out[i].tail_inf = tinf;
        out[i].tail_sup = tsup;
    }
    return out;
}

std::vector<DiscountedPoint> discounted_limit(const GrowthModel& model,
                                              const ProcessParams& params, const StateSZ& xi,
                                              const ControlLaw& law,
                                              std::vector<double> delta_list,
                                              const SimOptions& base_opts, double tail_tol) {
    if (delta_list.empty()) return {};
    for (double d : delta_list) {
        if (!(d > 0.0)) throw std::invalid_argument("discounted_limit: rates must be > 0");
    }
    const double d_min = *std::min_element(delta_list.begin(), delta_list.end());
    const double T = std::max(base_opts.T - base_opts.t0, std::log(1.0 / tail_tol) / d_min);

    SimOptions opts = with_horizon(base_opts, base_opts.t0, base_opts.t0 + T);
    opts.discount_rates = delta_list;
    const Trajectory traj = simulate(model, params, law, xi, opts);

    const double bound = integrand_bound(model, params, xi.z);
    std::vector<DiscountedPoint> out(delta_list.size());
    for (size_t i = 0; i < delta_list.size(); ++i) {
        out[i].delta = delta_list[i];
        out[i].J = traj.discounted_value(delta_list[i]);
        out[i].tail_bound = std::exp(-delta_list[i] * T) * bound;
    }
    return out;
}

BruteForceResult brute_force_value(const GrowthModel& model, const ProcessParams& params,
                                   const StateSZ& xi, double t0, double T, int n_segments,
                                   const std::vector<double>& levels, const RewardKind& kind,
                                   const SimOptions& base_opts, int jobs) {
    if (n_segments < 1 || n_segments > 12) {
        throw budget_error("brute_force_value: exhaustive mode supports 1..12 segments");
    }
    if (levels.empty()) {
        throw std::invalid_argument("brute_force_value: empty level set");
    }
    for (double u : levels) {
        if (u < 0.0 || u > params.u_max) {
            throw control_error("brute_force_value: level outside [0, u_max]");
        }
    }
    double count_d = 1.0;
    for (int i = 0; i < n_segments; ++i) count_d *= static_cast<double>(levels.size());
    if (count_d > 65536.0) {
        std::ostringstream msg;
        msg << "brute_force_value: " << count_d << " schedules exceed the enumeration budget";
        throw budget_error(msg.str());
    }
    const size_t count = static_cast<size_t>(count_d);

    SimOptions opts = with_horizon(base_opts, t0, T);
    if (const auto* aux = std::get_if<Auxiliary>(&kind)) {
        opts.aux_z1 = {aux->z1};
    }
    if (const auto* disc = std::get_if<Discounted>(&kind)) {
        opts.discount_rates = {disc->delta};
    }

    const double seg_len = (T - t0) / n_segments;
    std::vector<double> values(count);
    parallel_for(count, jobs, [&](size_t idx) {
        PiecewiseConstant schedule;
        schedule.times.resize(n_segments);
        schedule.values.resize(n_segments);
        size_t rem = idx;
        for (int seg = 0; seg < n_segments; ++seg) {
            schedule.times[seg] = t0 + seg * seg_len;
            schedule.values[seg] = levels[rem % levels.size()];
            rem /= levels.size();
        }
        const Trajectory traj = simulate(model, params, ControlLaw{schedule}, xi, opts);
        values[idx] = reward(model, params, traj, kind).value;
    });

    size_t best = 0;
    for (size_t idx = 1; idx < count; ++idx) {
        if (values[idx] > values[best]) best = idx;
    }
    BruteForceResult result;
    result.value = values[best];
    result.schedule.resize(n_segments);
    size_t rem = best;
    for (int seg = 0; seg < n_segments; ++seg) {
        result.schedule[seg] = levels[rem % levels.size()];
        rem /= levels.size();
    }
    return result;
}

}  // namespace biogas
