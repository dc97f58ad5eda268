#include "biogas/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace biogas {

namespace {

void require_admissible_u(const ProcessParams& params, double u) {
    if (!(u >= 0.0) || u > params.u_max) {
        std::ostringstream msg;
        msg << "control u=" << u << " outside [0, " << params.u_max << "]";
        throw control_error(msg.str());
    }
}

// Growth rate with the biomass argument floored away from 0 so that the
// continuous limit x -> 0+ is used on the chart boundary s = s_in.
double mu_boundary_safe(const GrowthModel& model, double s, double x) {
    return mu(model, std::max(s, 0.0), std::max(x, 1e-300));
}

}  // namespace

DerivSX rhs_sx(const GrowthModel& model, const ProcessParams& params, const StateSX& state,
               double u) {
    require_admissible_u(params, u);
    const double growth = mu(model, state.s, state.x) * state.x;
    return DerivSX{u * (params.s_in - state.s) - growth, growth - u * state.x};
}

DerivSZ rhs_sz(const GrowthModel& model, const ProcessParams& params, const StateSZ& state,
               double u) {
    require_admissible_u(params, u);
    if (state.s >= params.s_in) {
        throw std::domain_error("rhs_sz: s >= s_in is singular for the (s, z) chart");
    }
    const double m = mu(model, state.s, (params.s_in - state.s) * state.z);
    return DerivSZ{(u - m * state.z) * (params.s_in - state.s),
                   m * (1.0 - state.z) * state.z};
}

StateSZ to_sz(const ProcessParams& params, const StateSX& state) {
    if (state.s >= params.s_in) {
        throw std::domain_error("to_sz: s >= s_in is singular for the (s, z) chart");
    }
    return StateSZ{state.s, state.x / (params.s_in - state.s)};
}

StateSX to_sx(const ProcessParams& params, const StateSZ& state) {
    if (state.s >= params.s_in) {
        throw std::domain_error("to_sx: s >= s_in is singular for the (s, z) chart");
    }
    return StateSX{state.s, (params.s_in - state.s) * state.z};
}

InvariantBox invariant_box(const ProcessParams& params, const StateSZ& xi) {
    return InvariantBox{0.0, params.s_in, std::min(xi.z, 1.0), std::max(xi.z, 1.0)};
}

ControllabilityReport check_controllability(const GrowthModel& model,
                                            const ProcessParams& params, const StateSZ& xi,
                                            int n_s, int n_z) {
    const InvariantBox box = invariant_box(params, xi);
    n_s = std::max(n_s, 8);
    n_z = std::max(n_z, 2);

    auto mu_z = [&](double s, double z) {
        return mu_boundary_safe(model, s, (params.s_in - s) * z) * z;
    };

    ControllabilityReport rep;
    double s_lo = box.s_lo, s_hi = box.s_hi;
    double z_lo = box.z_lo, z_hi = box.z_hi;
    double best = -1.0, best_s = s_lo, best_z = z_lo;
    for (int round = 0; round < 5; ++round) {
        const int ns = round == 0 ? n_s : 17;
        const int nz = round == 0 ? n_z : 9;
        double local_best = -1.0, ls = s_lo, lz = z_lo;
        for (int i = 0; i < ns; ++i) {
            const double s = s_lo + (s_hi - s_lo) * i / (ns - 1);
            for (int j = 0; j < nz; ++j) {
                const double z = nz > 1 ? z_lo + (z_hi - z_lo) * j / (nz - 1) : z_lo;
                const double v = mu_z(s, z);
                if (v > local_best) {
                    local_best = v;
                    ls = s;
                    lz = z;
                }
            }
        }
        if (local_best > best) {
            best = local_best;
            best_s = ls;
            best_z = lz;
        }
        // zoom on the best cell
        const double ds = (s_hi - s_lo) / (round == 0 ? n_s - 1 : 16);
        const double dz = (z_hi - z_lo) / std::max(round == 0 ? n_z - 1 : 8, 1);
        s_lo = std::max(box.s_lo, best_s - ds);
        s_hi = std::min(box.s_hi, best_s + ds);
        z_lo = std::max(box.z_lo, best_z - dz);
        z_hi = std::min(box.z_hi, best_z + dz);
        if (s_hi - s_lo <= 0 && z_hi - z_lo <= 0) break;
    }

    rep.max_mu_z = best;
    rep.arg_s = best_s;
    rep.arg_z = best_z;
    rep.margin = params.u_max - best;
    rep.ok = rep.margin > 0.0;
    return rep;
}

}  // namespace biogas
