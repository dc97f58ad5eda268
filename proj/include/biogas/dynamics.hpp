#pragma once

/// Controlled chemostat dynamics in the original (s, x) coordinates and in
/// the analysis frame (s, z) with z = x / (s_in - s).
///
///   ds/dt = u (s_in - s) - mu(s, x) x        dx/dt = (mu(s, x) - u) x
///   ds/dt = (u - mu z)(s_in - s)             dz/dt = mu (1 - z) z
///
/// The slab {z = 1} is invariant and z moves monotonically toward it; the
/// box [0, s_in] x [min(z0,1), max(z0,1)] is forward invariant for every
/// admissible control.

#include "biogas/growth.hpp"

namespace biogas {

struct StateSX {
    double s = 0.0;  ///< substrate, in [0, s_in)
    double x = 0.0;  ///< biomass, > 0
};

struct StateSZ {
    double s = 0.0;  ///< substrate, in [0, s_in]
    double z = 0.0;  ///< x / (s_in - s), > 0
};

struct DerivSX {
    double ds = 0.0;
    double dx = 0.0;
};

struct DerivSZ {
    double ds = 0.0;
    double dz = 0.0;
};

/// Forward-invariant box of reachable states from xi (s range times the
/// z interval between z0 and 1).
struct InvariantBox {
    double s_lo = 0.0, s_hi = 0.0;
    double z_lo = 0.0, z_hi = 0.0;

    bool contains(const StateSZ& st, double tol = 0.0) const {
        return st.s >= s_lo - tol && st.s <= s_hi + tol && st.z >= z_lo - tol &&
               st.z <= z_hi + tol;
    }
};

/// Right-hand side in (s, x). Requires u in [0, u_max].
DerivSX rhs_sx(const GrowthModel& model, const ProcessParams& params, const StateSX& state,
               double u);

/// Right-hand side in (s, z). Requires u in [0, u_max] and s < s_in.
DerivSZ rhs_sz(const GrowthModel& model, const ProcessParams& params, const StateSZ& state,
               double u);

/// Coordinate change z = x / (s_in - s); throws std::domain_error at the
/// chart singularity s >= s_in.
StateSZ to_sz(const ProcessParams& params, const StateSX& state);
StateSX to_sx(const ProcessParams& params, const StateSZ& state);

InvariantBox invariant_box(const ProcessParams& params, const StateSZ& xi);

struct ControllabilityReport {
    bool ok = false;
    double margin = 0.0;    ///< u_max - max over the box of mu(s,(s_in-s)z) z
    double max_mu_z = 0.0;  ///< the maximum itself
    double arg_s = 0.0, arg_z = 0.0;
};

/// Checks the controllability condition max_{box} mu(s,(s_in-s)z) z < u_max
/// by a dense grid (default 256 x 64) plus local refinement around the best
/// cell. Never throws.
ControllabilityReport check_controllability(const GrowthModel& model,
                                            const ProcessParams& params, const StateSZ& xi,
                                            int n_s = 256, int n_z = 64);

}  // namespace biogas
