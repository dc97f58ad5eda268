#include "biogas/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace biogas {

namespace {

enum class Mode { TimeBased, Lower, Upper, Singular };

struct IntegrandEval {
    double phi_z = 0.0;
    double mu_val = 0.0;
    double z = 0.0;
    std::vector<double> aux;   // phi(s, z1) per requested z1
    std::vector<double> disc;  // delta e^{-delta (t-t0)} phi z per requested delta
};

class Simulator {
public:
    Simulator(const GrowthModel& model, const ProcessParams& params, const ControlLaw& law,
              const StateSZ& xi, const SimOptions& opts)
        : model_(model), params_(params), law_(law), xi_(xi), opts_(opts) {
        band_ = opts.slide_band > 0 ? opts.slide_band : 1e-6 * params.s_in;
        feedback_ = is_state_feedback(law);
        if (const auto* pc = std::get_if<PiecewiseConstant>(&law_)) {
            if (pc->times.size() != pc->values.size() || pc->times.empty()) {
                throw control_error("piecewise schedule needs matching, non-empty breakpoints");
            }
            if (!std::is_sorted(pc->times.begin(), pc->times.end())) {
                throw control_error("piecewise schedule breakpoints must be ascending");
            }
        }
    }

    Trajectory run();

private:
    const GrowthModel& model_;
    const ProcessParams& params_;
    const ControlLaw& law_;
    StateSZ xi_;
    SimOptions opts_;
    double band_ = 0.0;
    bool feedback_ = false;
    Mode mode_ = Mode::TimeBased;
    double u_seg_ = 0.0;  // control value on the current segment (non-singular modes)
    Trajectory traj_;

    double target_s(const StateSZ& st) const {
        if (const auto* m = std::get_if<Mrap>(&law_)) return m->s_star;
        return std::get<MrapCurve>(law_).curve->s_at(st.z);
    }
    double event_g(const StateSZ& st) const { return st.s - target_s(st); }

    double singular_u(const StateSZ& st, bool* saturated_high, bool* saturated_low) const {
        double raw;
        if (const auto* m = std::get_if<Mrap>(&law_)) {
            raw = mrap_singular_value(model_, params_, m->s_star, st.z);
            if (raw > params_.u_max * (1.0 + 1e-12) + 1e-15) {
                std::ostringstream msg;
                msg << "MRAP singular value " << raw << " exceeds u_max " << params_.u_max
                    << " at z=" << st.z << " (controllability violated)";
                throw admissibility_error(msg.str());
            }
        } else {
            raw = curve_singular_value(model_, params_, *std::get<MrapCurve>(law_).curve, st);
        }
        if (saturated_high) *saturated_high = raw > params_.u_max;
        if (saturated_low) *saturated_low = raw < 0.0;
        return std::min(std::max(raw, 0.0), params_.u_max);
    }

    double control_at(const StateSZ& st) const {
        if (mode_ == Mode::Singular) {
            return singular_u(st, nullptr, nullptr);
        }
        return u_seg_;
    }

    DerivSZ deriv(const StateSZ& st) const {
        const double u = control_at(st);
        const double sin_s = params_.s_in - st.s;
        const double m = mu(model_, std::max(st.s, 0.0), std::max(sin_s * st.z, 1e-300));
        return DerivSZ{(u - m * st.z) * sin_s, m * (1.0 - st.z) * st.z};
    }

    StateSZ rk4(const StateSZ& st, double h) const {
        const DerivSZ k1 = deriv(st);
        const DerivSZ k2 = deriv(StateSZ{st.s + 0.5 * h * k1.ds, st.z + 0.5 * h * k1.dz});
        const DerivSZ k3 = deriv(StateSZ{st.s + 0.5 * h * k2.ds, st.z + 0.5 * h * k2.dz});
        const DerivSZ k4 = deriv(StateSZ{st.s + h * k3.ds, st.z + h * k3.dz});
        return StateSZ{st.s + h / 6.0 * (k1.ds + 2 * k2.ds + 2 * k3.ds + k4.ds),
                       st.z + h / 6.0 * (k1.dz + 2 * k2.dz + 2 * k3.dz + k4.dz)};
    }

    // Fehlberg 4(5) pair; returns the 5th-order solution, fills err with the
    // embedded error estimate.
    StateSZ rkf45(const StateSZ& st, double h, double* err) const {
        const DerivSZ k1 = deriv(st);
        const DerivSZ k2 = deriv({st.s + h * (k1.ds / 4), st.z + h * (k1.dz / 4)});
        const DerivSZ k3 = deriv({st.s + h * (3 * k1.ds / 32 + 9 * k2.ds / 32),
                                  st.z + h * (3 * k1.dz / 32 + 9 * k2.dz / 32)});
        const DerivSZ k4 = deriv(
            {st.s + h * (1932 * k1.ds - 7200 * k2.ds + 7296 * k3.ds) / 2197,
             st.z + h * (1932 * k1.dz - 7200 * k2.dz + 7296 * k3.dz) / 2197});
        const DerivSZ k5 = deriv({st.s + h * (439 * k1.ds / 216 - 8 * k2.ds +
                                              3680 * k3.ds / 513 - 845 * k4.ds / 4104),
                                  st.z + h * (439 * k1.dz / 216 - 8 * k2.dz +
                                              3680 * k3.dz / 513 - 845 * k4.dz / 4104)});
        const DerivSZ k6 = deriv(
            {st.s + h * (-8 * k1.ds / 27 + 2 * k2.ds - 3544 * k3.ds / 2565 +
                         1859 * k4.ds / 4104 - 11 * k5.ds / 40),
             st.z + h * (-8 * k1.dz / 27 + 2 * k2.dz - 3544 * k3.dz / 2565 +
                         1859 * k4.dz / 4104 - 11 * k5.dz / 40)});
        const double s5 = st.s + h * (16 * k1.ds / 135 + 6656 * k3.ds / 12825 +
                                      28561 * k4.ds / 56430 - 9 * k5.ds / 50 + 2 * k6.ds / 55);
        const double z5 = st.z + h * (16 * k1.dz / 135 + 6656 * k3.dz / 12825 +
                                      28561 * k4.dz / 56430 - 9 * k5.dz / 50 + 2 * k6.dz / 55);
        const double s4 = st.s + h * (25 * k1.ds / 216 + 1408 * k3.ds / 2565 +
                                      2197 * k4.ds / 4104 - k5.ds / 5);
        const double z4 = st.z + h * (25 * k1.dz / 216 + 1408 * k3.dz / 2565 +
                                      2197 * k4.dz / 4104 - k5.dz / 5);
        const double es = std::abs(s5 - s4);
        const double ez = std::abs(z5 - z4);
        const double ws = opts_.abs_tol + opts_.rel_tol * std::max(std::abs(st.s), std::abs(s5));
        const double wz = opts_.abs_tol + opts_.rel_tol * std::max(std::abs(st.z), std::abs(z5));
        *err = std::max(es / ws, ez / wz);
        return StateSZ{s5, z5};
    }

    StateSZ advance(const StateSZ& st, double h) const {
        if (opts_.method == IntegratorMethod::RK4Fixed) return rk4(st, h);
        double err;
        return rkf45(st, h, &err);
    }

    IntegrandEval evaluate(const StateSZ& st, double t) const {
        IntegrandEval e;
        const double s = std::min(std::max(st.s, 0.0), params_.s_in);
        e.phi_z = phi(model_, params_, s, std::max(st.z, 1e-300)) * st.z;
        e.mu_val = mu(model_, s, std::max((params_.s_in - s) * st.z, 1e-300));
        e.z = st.z;
        e.aux.reserve(opts_.aux_z1.size());
        for (double z1 : opts_.aux_z1) e.aux.push_back(phi(model_, params_, s, z1));
        e.disc.reserve(opts_.discount_rates.size());
        for (double d : opts_.discount_rates) {
            e.disc.push_back(d * std::exp(-d * (t - opts_.t0)) * e.phi_z);
        }
        return e;
    }

    void check_finite(const StateSZ& st, const StateSZ& last_valid, double t) const {
        if (!std::isfinite(st.s) || !std::isfinite(st.z)) {
            std::ostringstream msg;
            msg << "integration produced a non-finite state at t=" << t
                << "; last valid state (s,z) = (" << last_valid.s << ", " << last_valid.z
                << ")";
            throw numeric_error(msg.str());
        }
    }
};

Trajectory Simulator::run() {
    if (!(opts_.T > opts_.t0)) {
        throw std::invalid_argument("simulate: need T > t0");
    }
    if (!(opts_.step > 0.0)) {
        throw std::invalid_argument("simulate: need step > 0");
    }
    if (xi_.s < 0.0 || xi_.s >= params_.s_in || !(xi_.z > 0.0)) {
        throw std::domain_error("simulate: initial condition outside the domain");
    }
    if (feedback_ && opts_.verify_admissibility) {
        const ControllabilityReport rep = check_controllability(model_, params_, xi_);
        if (!rep.ok) {
            std::ostringstream msg;
            msg << "controllability violated: max mu z = " << rep.max_mu_z << " at (s,z)=("
                << rep.arg_s << "," << rep.arg_z << ") >= u_max = " << params_.u_max;
            throw admissibility_error(msg.str());
        }
    }

    const InvariantBox box = invariant_box(params_, xi_);
    const double z_dir = xi_.z <= 1.0 ? 1.0 : -1.0;  // z drifts toward 1

    traj_.t0 = opts_.t0;
    traj_.aux.reserve(opts_.aux_z1.size());
    for (double z1 : opts_.aux_z1) traj_.aux.emplace_back(z1, 0.0);
    traj_.discounted.reserve(opts_.discount_rates.size());
    for (double d : opts_.discount_rates) traj_.discounted.emplace_back(d, 0.0);

    // initial mode
    if (feedback_) {
        const double g0 = event_g(xi_);
        if (std::abs(g0) <= band_) {
            mode_ = Mode::Singular;
        } else if (g0 < 0.0) {
            mode_ = Mode::Lower;
            u_seg_ = params_.u_max;
        } else {
            mode_ = Mode::Upper;
            u_seg_ = 0.0;
        }
    } else {
        mode_ = Mode::TimeBased;
    }

    double t = opts_.t0;
    StateSZ st = xi_;
    double cum_phi_z = 0.0, cum_mu = 0.0, cum_u = 0.0, cum_z = 0.0;
    size_t cp_index = 0;
    long step_index = 0;

    auto record = [&](double tt, const StateSZ& state, double uu) {
        traj_.t.push_back(tt);
        traj_.s.push_back(state.s);
        traj_.z.push_back(state.z);
        traj_.u.push_back(uu);
        traj_.cum_phi_z.push_back(cum_phi_z);
        traj_.cum_mu.push_back(cum_mu);
        traj_.cum_u.push_back(cum_u);
        traj_.cum_z.push_back(cum_z);
    };

    // immediate stop when the initial state is already past the surface
    if (opts_.stop) {
        const double w0 = opts_.stop->event(xi_);
        const int dir = opts_.stop->direction;
        const bool already = (dir == 1 && w0 >= 0.0) || (dir == -1 && w0 <= 0.0) ||
                             (dir == 0 && w0 == 0.0);
        if (already) {
            record(t, st, control_at(st));
            traj_.tf = t;
            traj_.total_phi_z = 0.0;
            traj_.stopped_early = true;
            return traj_;
        }
    }

    record(t, st, control_at(st));
    IntegrandEval left = evaluate(st, t);
    double u_left = control_at(st);

    double h_adaptive = opts_.step;

    while (t < opts_.T) {
        // boundary of the current smooth segment
        double boundary = opts_.T;
        bool boundary_is_cp = false;
        if (cp_index < opts_.checkpoints.size() && opts_.checkpoints[cp_index] < boundary) {
            boundary = opts_.checkpoints[cp_index];
            boundary_is_cp = true;
        } else if (cp_index < opts_.checkpoints.size() &&
                   opts_.checkpoints[cp_index] == boundary) {
            boundary_is_cp = true;
        }
        const double disc = next_switch_time(law_, t);
        if (disc < boundary) {
            boundary = disc;
            boundary_is_cp = false;
        }
        if (boundary <= t + 1e-15 * std::max(1.0, std::abs(t))) {
            // degenerate sliver: snap to the boundary
            t = boundary;
            if (boundary_is_cp) {
                traj_.checkpoints.push_back(Checkpoint{t, st.s, st.z, cum_phi_z});
                ++cp_index;
            }
            continue;
        }

        // singular-mode saturation check at the step start (hysteresis exit)
        if (mode_ == Mode::Singular) {
            bool hi = false, lo = false;
            (void)singular_u(st, &hi, &lo);
            if (hi || lo) {
                ++traj_.clamp_events;
                mode_ = hi ? Mode::Lower : Mode::Upper;
                u_seg_ = hi ? params_.u_max : 0.0;
            }
        }
        if (mode_ == Mode::TimeBased) {
            u_seg_ = std::visit(
                [&](const auto& l) -> double {
                    using L = std::decay_t<decltype(l)>;
                    if constexpr (std::is_same_v<L, ConstantControl>) {
                        return l.u0;
                    } else if constexpr (std::is_same_v<L, PiecewiseConstant>) {
                        return piecewise_value(l, t + 0.5 * std::min(opts_.step, boundary - t));
                    } else if constexpr (std::is_same_v<L, AppendixSchedule>) {
                        return appendix_value(l, t + 0.5 * std::min(opts_.step, boundary - t));
                    } else {
                        return 0.0;  // unreachable for feedback laws
                    }
                },
                law_);
            if (u_seg_ < 0.0 || u_seg_ > params_.u_max) {
                std::ostringstream msg;
                msg << "open-loop control " << u_seg_ << " outside [0, " << params_.u_max
                    << "] at t=" << t;
                throw control_error(msg.str());
            }
        }

        double h = std::min(opts_.method == IntegratorMethod::RK4Fixed ? opts_.step : h_adaptive,
                            boundary - t);
        bool hit_boundary = (h == boundary - t);

        StateSZ next{};
        if (opts_.method == IntegratorMethod::RK4Fixed) {
            next = rk4(st, h);
        } else {
            // adaptive: shrink until the error estimate passes
            for (;;) {
                double err = 0.0;
                next = rkf45(st, h, &err);
                if (err <= 1.0 || h <= 1e-14 * std::max(1.0, std::abs(t))) {
                    if (h <= 1e-14 * std::max(1.0, std::abs(t)) && err > 1.0) {
                        std::ostringstream msg;
                        msg << "adaptive step size underflow at t=" << t
                            << "; last valid state (s,z) = (" << st.s << ", " << st.z << ")";
                        throw numeric_error(msg.str());
                    }
                    h_adaptive = std::min(
                        opts_.step * 1e3,
                        h * std::min(5.0, std::max(0.2, 0.9 * std::pow(err > 0 ? err : 1e-16,
                                                                       -0.2))));
                    break;
                }
                h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
                hit_boundary = false;
            }
        }
        check_finite(next, st, t + h);

        bool mode_switch = false;
        Mode next_mode = mode_;

        // surface events for the bang branches of the feedback laws
        if (feedback_ && (mode_ == Mode::Lower || mode_ == Mode::Upper)) {
            const double g1 = event_g(next);
            const bool crossed = mode_ == Mode::Lower ? g1 >= 0.0 : g1 <= 0.0;
            const bool in_band = std::abs(g1) <= band_;
            if (crossed && !in_band) {
                // bisect partial steps on the event function
                double lo = 0.0, hi = h;
                StateSZ cand = next;
                const double window_tol =
                    std::max(opts_.event_time_tol * h, 1e-15 * std::max(1.0, std::abs(t)));
                for (int it = 0; it < 100; ++it) {
                    if (hi - lo <= window_tol && std::abs(event_g(cand)) <= 0.5 * band_) break;
                    const double mid = 0.5 * (lo + hi);
                    if (mid <= lo || mid >= hi) break;
                    const StateSZ mid_state = advance(st, mid);
                    const double gm = event_g(mid_state);
                    const bool c = mode_ == Mode::Lower ? gm >= 0.0 : gm <= 0.0;
                    if (c) {
                        hi = mid;
                        cand = mid_state;
                    } else {
                        lo = mid;
                    }
                }
                h = hi;
                next = cand;
                hit_boundary = false;
                mode_switch = true;
                next_mode = Mode::Singular;
            } else if (crossed || in_band) {
                mode_switch = true;
                next_mode = Mode::Singular;
            }
        }

        // stop condition, localized within the (possibly truncated) step
        bool stopping = false;
        if (opts_.stop) {
            const double w0 = opts_.stop->event(st);
            const double w1 = opts_.stop->event(next);
            const int dir = opts_.stop->direction;
            const bool crossed = (dir >= 0 && w0 < 0.0 && w1 >= 0.0) ||
                                 (dir <= 0 && w0 > 0.0 && w1 <= 0.0);
            if (crossed) {
                double lo = 0.0, hi = h;
                StateSZ cand = next;
                for (int it = 0; it < 100; ++it) {
                    if (hi - lo <= 1e-13 * std::max(1.0, std::abs(t) + h)) break;
                    const double mid = 0.5 * (lo + hi);
                    if (mid <= lo || mid >= hi) break;
                    const StateSZ mid_state = advance(st, mid);
                    const double wm = opts_.stop->event(mid_state);
                    const bool c = w0 < 0.0 ? wm >= 0.0 : wm <= 0.0;
                    if (c) {
                        hi = mid;
                        cand = mid_state;
                    } else {
                        lo = mid;
                    }
                }
                h = hi;
                next = cand;
                hit_boundary = false;
                stopping = true;
                mode_switch = false;  // the run ends here
            }
        }

        double t_next = t + h;
        if (hit_boundary) t_next = boundary;  // keep boundary times exact

        // accumulate the reward integrands over [t, t_next]
        const IntegrandEval right = evaluate(next, t_next);
        const double u_right = control_at(next);
        const double half = 0.5 * h;
        cum_phi_z += half * (left.phi_z + right.phi_z);
        cum_mu += half * (left.mu_val + right.mu_val);
        cum_u += half * (u_left + u_right);
        cum_z += half * (left.z + right.z);
        for (size_t i = 0; i < traj_.aux.size(); ++i) {
            traj_.aux[i].second += half * (left.aux[i] + right.aux[i]);
        }
        for (size_t i = 0; i < traj_.discounted.size(); ++i) {
            traj_.discounted[i].second += half * (left.disc[i] + right.disc[i]);
        }

        // diagnostics at full resolution
        const double viol =
            std::max({0.0, box.z_lo - next.z, next.z - box.z_hi, -next.s, next.s - box.s_hi});
        traj_.max_box_violation = std::max(traj_.max_box_violation, viol);
        traj_.worst_z_backstep =
            std::max(traj_.worst_z_backstep, z_dir * (st.z - next.z));

        t = t_next;
        st = next;
        ++step_index;

        bool cp_here = false;
        if (hit_boundary && boundary_is_cp && cp_index < opts_.checkpoints.size() &&
            t == opts_.checkpoints[cp_index]) {
            traj_.checkpoints.push_back(Checkpoint{t, st.s, st.z, cum_phi_z});
            ++cp_index;
            cp_here = true;
        }

        const bool final_point = stopping || t >= opts_.T;
        if (final_point || mode_switch || cp_here || step_index % opts_.thin == 0) {
            record(t, st, u_right);
        }

        if (mode_switch) {
            mode_ = next_mode;
            if (mode_ == Mode::Lower) u_seg_ = params_.u_max;
            if (mode_ == Mode::Upper) u_seg_ = 0.0;
            // the new mode's control applies from here on
            u_left = control_at(st);
        } else {
            u_left = u_right;
        }
        left = right;

        if (stopping) {
            traj_.stopped_early = true;
            break;
        }
    }

    traj_.tf = t;
    traj_.total_phi_z = cum_phi_z;
    return traj_;
}

}  // namespace

Trajectory simulate(const GrowthModel& model, const ProcessParams& params,
                    const ControlLaw& law, const StateSZ& xi, const SimOptions& opts) {
    Simulator sim(model, params, law, xi, opts);
    return sim.run();
}

double Trajectory::aux_integral(double z1) const {
    for (const auto& [key, value] : aux) {
        if (std::abs(key - z1) <= 1e-12 * std::max(1.0, std::abs(z1))) return value;
    }
    throw std::invalid_argument("aux integrand for this z1 was not accumulated; request it in "
                                "SimOptions::aux_z1");
}

double Trajectory::discounted_value(double delta) const {
    for (const auto& [key, value] : discounted) {
        if (std::abs(key - delta) <= 1e-12 * std::max(1.0, std::abs(delta))) return value;
    }
    throw std::invalid_argument("discounted integrand for this rate was not accumulated; "
                                "request it in SimOptions::discount_rates");
}

void Trajectory::write_csv(std::ostream& os, const GrowthModel& model,
                           const ProcessParams& params) const {
    os << "t,s,z,x,u,phi_z\n";
    char line[220];
    for (size_t i = 0; i < t.size(); ++i) {
        const double x = (params.s_in - s[i]) * z[i];
        const double s_cl = std::min(std::max(s[i], 0.0), params.s_in);
        const double pz = phi(model, params, s_cl, std::max(z[i], 1e-300)) * z[i];
        std::snprintf(line, sizeof(line), "%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n", t[i], s[i],
                      z[i], x, u[i], pz);
        os << line;
    }
}

std::optional<double> hitting_time(const Trajectory& traj,
                                   const std::function<bool(const StateSZ&)>& pred) {
    if (traj.size() == 0) return std::nullopt;
    if (pred(traj.state_at(0))) return traj.t.front();
    for (size_t i = 1; i < traj.size(); ++i) {
        if (!pred(traj.state_at(i))) continue;
        // refine between samples i-1 and i on the interpolated state
        double lo = 0.0, hi = 1.0;
        const StateSZ a = traj.state_at(i - 1);
        const StateSZ b = traj.state_at(i);
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (lo + hi);
            const StateSZ m{a.s + mid * (b.s - a.s), a.z + mid * (b.z - a.z)};
            if (pred(m)) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        return traj.t[i - 1] + hi * (traj.t[i] - traj.t[i - 1]);
    }
    return std::nullopt;
}

}  // namespace biogas
