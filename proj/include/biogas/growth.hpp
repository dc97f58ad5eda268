#pragma once

/// Growth-rate families, the biogas flow map and its per-z maximizers.
///
/// The flow map phi(s,z) = mu(s, (s_in - s) z) * (s_in - s) is the
/// instantaneous biogas flow factor; total production integrates phi * z.
/// Everything here is a pure function of immutable inputs.

#include <functional>
#include <string>
#include <vector>

#include "biogas/errors.hpp"

namespace biogas {

enum class GrowthKind { Monod, Haldane, Contois, Custom };

/// Tagged growth-rate model mu(s, x).
///
/// Monod    mu(s)   = mu_max s / (K_s + s)
/// Haldane  mu(s)   = mu_bar s / (K_s + s + s^2/K_i)
/// Contois  mu(s,x) = mu_max s / (K_s x + s)
/// Custom   any user-supplied mu(s,x); it is the caller's job to run
///          check_assumptions() on it before trusting feedback laws.
struct GrowthModel {
    GrowthKind kind = GrowthKind::Monod;
    double mu_max = 0.0;  ///< 1/time (Monod, Contois)
    double mu_bar = 0.0;  ///< 1/time (Haldane)
    double K_s = 0.0;     ///< mass/volume (Monod, Haldane), dimensionless ratio (Contois)
    double K_i = 0.0;     ///< mass/volume (Haldane)
    std::function<double(double, double)> mu_fn;  ///< Custom only

    static GrowthModel monod(double mu_max, double K_s);
    static GrowthModel haldane(double mu_bar, double K_s, double K_i);
    static GrowthModel contois(double mu_max, double K_s);
    static GrowthModel custom(std::function<double(double, double)> fn);

    /// True when mu genuinely depends on biomass (Contois, Custom);
    /// for substrate-only models phi is independent of z.
    bool depends_on_biomass() const;

    const char* name() const;
};

/// Reactor-level constants. Yield and biogas proportionality are both 1.
struct ProcessParams {
    double s_in = 0.0;   ///< inflow substrate concentration, > 0
    double u_max = 0.0;  ///< dilution-rate bound, > 0
};

/// Rectangle in (s, z) used by assumption checks and controllability.
struct StateBox {
    double s_lo = 0.0, s_hi = 0.0;
    double z_lo = 0.0, z_hi = 0.0;
};

/// Specific growth rate mu(s, x).
/// Requires s >= 0; Contois/Custom additionally require x > 0.
double mu(const GrowthModel& model, double s, double x);

/// Biogas flow factor phi(s, z) = mu(s, (s_in - s) z) (s_in - s) for
/// s in [0, s_in], z > 0. Exactly 0 at both ends of the s range.
double phi(const GrowthModel& model, const ProcessParams& params, double s, double z);

/// Location of the unique maximum of s -> phi(s, z1) on (0, s_in),
/// found by a 512-point coarse grid followed by golden-section search to
/// 1e-10 absolute. Throws assumption_violation if the coarse grid shows
/// separated local maxima.
double s_bar(const GrowthModel& model, const ProcessParams& params, double z1);

/// Maximum of s -> phi(s, z) over (0, s_in); equals phi(s_bar(z), z).
double phi_bar(const GrowthModel& model, const ProcessParams& params, double z);

/// d s_bar / dz by central difference with step h_z (default
/// 1e-4 * max(1, z)). Identically 0 for substrate-only models.
double s_bar_slope(const GrowthModel& model, const ProcessParams& params, double z,
                   double h_z = -1.0);

/// Tabulated maximizer curve { (z, s_bar(z)) } with the flow maximum and
/// the curve slope per grid point. Lookups between grid points use cubic
/// Hermite interpolation on the tabulated slopes.
struct MaximizerCurve {
    std::vector<double> z_grid;       ///< ordered, ascending
    std::vector<double> s_bar;        ///< maximizer per grid point, in (0, s_in)
    std::vector<double> phi_at_max;   ///< phi(s_bar(z), z)
    std::vector<double> s_bar_slope;  ///< d s_bar / dz per grid point

    double z_min() const { return z_grid.front(); }
    double z_max() const { return z_grid.back(); }

    /// s_bar at z; throws std::out_of_range outside the tabulated range.
    double s_at(double z) const;
    /// d s_bar / dz at z, from the same Hermite interpolant.
    double slope_at(double z) const;

    /// CSV with columns z, s_bar, phi_at_max, s_bar_slope.
    void write_csv(std::ostream& os) const;
};

/// Tabulates the maximizer curve on [z_lo, z_hi]. A degenerate range
/// (z_lo == z_hi) yields a single-point curve with constant lookups.
MaximizerCurve tabulate_maximizer_curve(const GrowthModel& model, const ProcessParams& params,
                                        double z_lo, double z_hi, int n_points = 512);

struct CheckResult {
    std::string name;
    bool pass = false;
    double worst = 0.0;  ///< magnitude of the worst violation found (0 when clean)
    std::string detail;
};

struct AssumptionReport {
    std::vector<CheckResult> checks;

    bool pass() const;
    const CheckResult* find(const std::string& name) const;
    std::string summary() const;
};

/// Samples the standing model assumptions on a grid over `box`:
/// parameter positivity, mu(0, x) = 0, mu > 0 for s > 0, crowding
/// monotonicity of x -> mu and x -> mu x, and unimodality of phi(., z).
/// Never throws; every failure lands in the report.
AssumptionReport check_assumptions(const GrowthModel& model, const ProcessParams& params,
                                   const StateBox& box, int n_samples = 64);

}  // namespace biogas
