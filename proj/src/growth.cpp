#include "biogas/growth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>
#include <utility>

namespace biogas {

namespace {

void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw std::invalid_argument(std::string(what) + " must be strictly positive");
    }
}

}  // namespace

GrowthModel GrowthModel::monod(double mu_max, double K_s) {
    require_positive(mu_max, "mu_max");
    require_positive(K_s, "K_s");
    GrowthModel m;
    m.kind = GrowthKind::Monod;
    m.mu_max = mu_max;
    m.K_s = K_s;
    return m;
}

GrowthModel GrowthModel::haldane(double mu_bar, double K_s, double K_i) {
    require_positive(mu_bar, "mu_bar");
    require_positive(K_s, "K_s");
    require_positive(K_i, "K_i");
    GrowthModel m;
    m.kind = GrowthKind::Haldane;
    m.mu_bar = mu_bar;
    m.K_s = K_s;
    m.K_i = K_i;
    return m;
}

GrowthModel GrowthModel::contois(double mu_max, double K_s) {
    require_positive(mu_max, "mu_max");
    require_positive(K_s, "K_s");
    GrowthModel m;
    m.kind = GrowthKind::Contois;
    m.mu_max = mu_max;
    m.K_s = K_s;
    return m;
}

GrowthModel GrowthModel::custom(std::function<double(double, double)> fn) {
    if (!fn) {
        throw std::invalid_argument("custom growth model requires a callable");
    }
    GrowthModel m;
    m.kind = GrowthKind::Custom;
    m.mu_fn = std::move(fn);
    return m;
}

bool GrowthModel::depends_on_biomass() const {
    return kind == GrowthKind::Contois || kind == GrowthKind::Custom;
}

const char* GrowthModel::name() const {
    switch (kind) {
        case GrowthKind::Monod: return "monod";
        case GrowthKind::Haldane: return "haldane";
        case GrowthKind::Contois: return "contois";
        case GrowthKind::Custom: return "custom";
    }
    return "?";
}

double mu(const GrowthModel& model, double s, double x) {
    if (s < 0.0) {
        throw std::domain_error("mu: substrate concentration must be non-negative");
    }
    switch (model.kind) {
        case GrowthKind::Monod:
            return model.mu_max * s / (model.K_s + s);
        case GrowthKind::Haldane:
            return model.mu_bar * s / (model.K_s + s + s * s / model.K_i);
        case GrowthKind::Contois:
            if (!(x > 0.0)) {
                throw std::domain_error("mu: Contois requires biomass x > 0");
            }
            return model.mu_max * s / (model.K_s * x + s);
        case GrowthKind::Custom:
            if (!(x > 0.0)) {
                throw std::domain_error("mu: custom model requires biomass x > 0");
            }
            return model.mu_fn(s, x);
    }
    throw std::logic_error("mu: unknown growth kind");
}

double phi(const GrowthModel& model, const ProcessParams& params, double s, double z) {
    if (s < 0.0 || s > params.s_in) {
        throw std::domain_error("phi: s outside [0, s_in]");
    }
    if (!(z > 0.0)) {
        throw std::domain_error("phi: z must be strictly positive");
    }
    // mu vanishes at s=0 and the factor (s_in - s) at s=s_in; returning 0
    // directly also keeps Contois away from its x=0 singularity.
    if (s == 0.0 || s == params.s_in) {
        return 0.0;
    }
    const double x = (params.s_in - s) * z;
    return mu(model, s, x) * (params.s_in - s);
}

namespace {

// Relative value tolerance used to tell genuine secondary maxima apart
// from flat-top grid noise.
constexpr double kPeakSeparationTol = 1e-9;

struct CoarseScan {
    int argmax = 0;
    double max_value = 0.0;
    bool multimodal = false;
    double second_peak = 0.0;
};

// Scans f over grid values; flags multimodality when two local maxima are
// separated by a valley significantly below both peaks.
CoarseScan coarse_scan(const std::vector<double>& values) {
    CoarseScan out;
    const int n = static_cast<int>(values.size());
    for (int i = 0; i < n; ++i) {
        if (values[i] > values[out.argmax]) out.argmax = i;
    }
    out.max_value = values[out.argmax];

    const double scale = std::max(std::abs(out.max_value), 1e-300);
    std::vector<int> peaks;
    for (int i = 1; i + 1 < n; ++i) {
        if (values[i] >= values[i - 1] && values[i] >= values[i + 1]) {
            // collapse plateaus: keep only the first index of a flat run
            if (!peaks.empty() && values[peaks.back()] == values[i]) {
                bool flat = true;
                for (int j = peaks.back(); j <= i; ++j) {
                    if (values[j] != values[i]) { flat = false; break; }
                }
                if (flat) continue;
            }
            peaks.push_back(i);
        }
    }
    for (size_t a = 0; a + 1 < peaks.size(); ++a) {
        for (size_t b = a + 1; b < peaks.size(); ++b) {
            double valley = values[peaks[a]];
            for (int j = peaks[a]; j <= peaks[b]; ++j) valley = std::min(valley, values[j]);
            const double lower_peak = std::min(values[peaks[a]], values[peaks[b]]);
            if (lower_peak - valley > kPeakSeparationTol * scale) {
                out.multimodal = true;
                out.second_peak = lower_peak;
            }
        }
    }
    return out;
}

double golden_section_max(const std::function<double(double)>& f, double a, double b,
                          double tol) {
    static const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    double fc = f(c);
    double fd = f(d);
    while (b - a > tol) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

// Golden section stalls once the objective is flat to machine precision
// around the maximum (plateau half-width ~ sqrt(eps f / |f''|), far wider
// than 1e-10). Polishing by bisection on the sign of a symmetric difference
// recovers the stationary point to the requested tolerance.
double polish_stationary(const std::function<double(double)>& f, double m, double lo_limit,
                         double hi_limit, double scale) {
    const double d = 1e-6 * scale;
    auto slope_sign = [&](double s) { return f(s + d) - f(s - d); };
    double radius = 64.0 * d;
    double lo = m, hi = m;
    for (int attempt = 0; attempt < 20; ++attempt) {
        lo = std::max(m - radius, lo_limit + d);
        hi = std::min(m + radius, hi_limit - d);
        if (slope_sign(lo) > 0.0 && slope_sign(hi) < 0.0) break;
        radius *= 4.0;
        if (radius > (hi_limit - lo_limit)) return m;  // no clean bracket; keep golden result
    }
    if (!(slope_sign(lo) > 0.0) || !(slope_sign(hi) < 0.0)) return m;
    for (int it = 0; it < 200 && hi - lo > 1e-11 * std::max(1.0, scale); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (slope_sign(mid) > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

constexpr int kCoarsePoints = 512;

}  // namespace

double s_bar(const GrowthModel& model, const ProcessParams& params, double z1) {
    if (!(z1 > 0.0)) {
        throw std::domain_error("s_bar: z must be strictly positive");
    }
    require_positive(params.s_in, "s_in");
    const double eps = 1e-9 * params.s_in;
    const double lo = eps;
    const double hi = params.s_in - eps;

    auto f = [&](double s) { return phi(model, params, s, z1); };

    std::vector<double> grid(kCoarsePoints), values(kCoarsePoints);
    for (int i = 0; i < kCoarsePoints; ++i) {
        grid[i] = lo + (hi - lo) * i / (kCoarsePoints - 1);
        values[i] = f(grid[i]);
    }
    const CoarseScan scan = coarse_scan(values);
    if (scan.multimodal) {
        std::ostringstream msg;
        msg << "s_bar: phi(., z=" << z1 << ") is not unimodal on (0, s_in): "
            << "secondary maximum " << scan.second_peak << " vs " << scan.max_value;
        throw assumption_violation(msg.str());
    }

    const int i = scan.argmax;
    const double a = grid[std::max(i - 1, 0)];
    const double b = grid[std::min(i + 1, kCoarsePoints - 1)];
    const double m = golden_section_max(f, a, b, 1e-10);
    return polish_stationary(f, m, lo, hi, params.s_in);
}

double phi_bar(const GrowthModel& model, const ProcessParams& params, double z) {
    return phi(model, params, s_bar(model, params, z), z);
}

double s_bar_slope(const GrowthModel& model, const ProcessParams& params, double z,
                   double h_z) {
    if (!model.depends_on_biomass()) {
        return 0.0;  // phi is independent of z
    }
    if (h_z <= 0.0) {
        h_z = 1e-4 * std::max(1.0, z);
    }
    const double z_lo = std::max(z - h_z, 1e-12);
    const double z_hi = z + h_z;
    return (s_bar(model, params, z_hi) - s_bar(model, params, z_lo)) / (z_hi - z_lo);
}

MaximizerCurve tabulate_maximizer_curve(const GrowthModel& model, const ProcessParams& params,
                                        double z_lo, double z_hi, int n_points) {
    if (!(z_lo > 0.0) || z_hi < z_lo) {
        throw std::domain_error("tabulate_maximizer_curve: need 0 < z_lo <= z_hi");
    }
    MaximizerCurve curve;
    if (z_hi == z_lo || n_points < 2) {
        curve.z_grid = {z_lo};
        curve.s_bar = {s_bar(model, params, z_lo)};
        curve.phi_at_max = {phi(model, params, curve.s_bar[0], z_lo)};
        curve.s_bar_slope = {s_bar_slope(model, params, z_lo)};
        return curve;
    }
    curve.z_grid.resize(n_points);
    curve.s_bar.resize(n_points);
    curve.phi_at_max.resize(n_points);
    curve.s_bar_slope.resize(n_points);
    for (int i = 0; i < n_points; ++i) {
        const double z = z_lo + (z_hi - z_lo) * i / (n_points - 1);
        curve.z_grid[i] = z;
        curve.s_bar[i] = s_bar(model, params, z);
        curve.phi_at_max[i] = phi(model, params, curve.s_bar[i], z);
        curve.s_bar_slope[i] = s_bar_slope(model, params, z);
    }
    return curve;
}

namespace {

// Locates the interval index for z; z must be inside the tabulated range
// (up to a relative snap tolerance that absorbs integrator rounding at the
// range ends).
size_t curve_interval(const std::vector<double>& grid, double& z) {
    const double tol = 1e-9 * std::max(1.0, std::abs(grid.front()) + std::abs(grid.back()));
    if (z < grid.front() && z > grid.front() - tol) z = grid.front();
    if (z > grid.back() && z < grid.back() + tol) z = grid.back();
    if (z < grid.front() || z > grid.back()) {
        std::ostringstream msg;
        msg << "maximizer curve lookup at z=" << z << " outside tabulated range ["
            << grid.front() << ", " << grid.back() << "]";
        throw std::out_of_range(msg.str());
    }
    const auto it = std::upper_bound(grid.begin(), grid.end(), z);
    size_t i = static_cast<size_t>(it - grid.begin());
    if (i > 0) --i;
    if (i + 1 >= grid.size()) i = grid.size() - 2;
    return i;
}

}  // namespace

double MaximizerCurve::s_at(double z) const {
    if (z_grid.size() == 1) {
        if (z != z_grid[0]) {
            // allow fp slack around a degenerate one-point curve
            if (std::abs(z - z_grid[0]) > 1e-9 * std::max(1.0, std::abs(z_grid[0]))) {
                throw std::out_of_range("maximizer curve lookup outside degenerate range");
            }
        }
        return s_bar[0];
    }
    const size_t i = curve_interval(z_grid, z);
    const double dz = z_grid[i + 1] - z_grid[i];
    const double t = (z - z_grid[i]) / dz;
    const double h00 = (1 + 2 * t) * (1 - t) * (1 - t);
    const double h10 = t * (1 - t) * (1 - t);
    const double h01 = t * t * (3 - 2 * t);
    const double h11 = t * t * (t - 1);
    return h00 * s_bar[i] + h10 * dz * s_bar_slope[i] + h01 * s_bar[i + 1] +
           h11 * dz * s_bar_slope[i + 1];
}

double MaximizerCurve::slope_at(double z) const {
    if (z_grid.size() == 1) {
        return s_bar_slope[0];
    }
    const size_t i = curve_interval(z_grid, z);
    const double dz = z_grid[i + 1] - z_grid[i];
    const double t = (z - z_grid[i]) / dz;
    const double dh00 = 6 * t * t - 6 * t;
    const double dh10 = 3 * t * t - 4 * t + 1;
    const double dh01 = -6 * t * t + 6 * t;
    const double dh11 = 3 * t * t - 2 * t;
    return (dh00 * s_bar[i] + dh01 * s_bar[i + 1]) / dz + dh10 * s_bar_slope[i] +
           dh11 * s_bar_slope[i + 1];
}

void MaximizerCurve::write_csv(std::ostream& os) const {
    os << "z,s_bar,phi_at_max,s_bar_slope\n";
    char line[160];
    for (size_t i = 0; i < z_grid.size(); ++i) {
        std::snprintf(line, sizeof(line), "%.12g,%.12g,%.12g,%.12g\n", z_grid[i], s_bar[i],
                      phi_at_max[i], s_bar_slope[i]);
        os << line;
    }
}

bool AssumptionReport::pass() const {
    for (const auto& c : checks) {
        if (!c.pass) return false;
    }
    return true;
}

const CheckResult* AssumptionReport::find(const std::string& name) const {
    for (const auto& c : checks) {
        if (c.name == name) return &c;
    }
    return nullptr;
}

std::string AssumptionReport::summary() const {
    std::ostringstream os;
    for (const auto& c : checks) {
        os << (c.pass ? "[ok]   " : "[FAIL] ") << c.name;
        if (!c.pass) {
            os << " (worst " << c.worst << (c.detail.empty() ? "" : "; " + c.detail) << ")";
        }
        os << "\n";
    }
    return os.str();
}

AssumptionReport check_assumptions(const GrowthModel& model, const ProcessParams& params,
                                   const StateBox& box, int n_samples) {
    AssumptionReport report;
    const int n = std::max(n_samples, 4);

    // Parameter positivity first; the remaining checks are skipped when the
    // model cannot even be evaluated safely.
    CheckResult pos{"params_positive", true, 0.0, ""};
    auto flag = [&](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            pos.pass = false;
            pos.detail += std::string(pos.detail.empty() ? "" : ", ") + name;
            pos.worst = std::min(pos.worst, v);
        }
    };
    switch (model.kind) {
        case GrowthKind::Monod:
            flag(model.mu_max, "mu_max");
            flag(model.K_s, "K_s");
            break;
        case GrowthKind::Haldane:
            flag(model.mu_bar, "mu_bar");
            flag(model.K_s, "K_s");
            flag(model.K_i, "K_i");
            break;
        case GrowthKind::Contois:
            flag(model.mu_max, "mu_max");
            flag(model.K_s, "K_s");
            break;
        case GrowthKind::Custom:
            if (!model.mu_fn) {
                pos.pass = false;
                pos.detail = "mu_fn";
            }
            break;
    }
    flag(params.s_in, "s_in");
    flag(params.u_max, "u_max");
    report.checks.push_back(pos);
    if (!pos.pass) {
        return report;
    }

    const double s_lo = std::max(box.s_lo, 0.0);
    const double s_hi = std::min(box.s_hi, params.s_in);
    const double z_lo = std::max(box.z_lo, 1e-9);
    const double z_hi = std::max(box.z_hi, z_lo);

    auto s_sample = [&](int i) {
        return s_lo + (s_hi - s_lo) * (i + 1) / (n + 1);  // interior points
    };
    auto z_sample = [&](int j) {
        return n > 1 ? z_lo + (z_hi - z_lo) * j / (n - 1) : z_lo;
    };
    // biomass samples span the x values reachable inside the box
    const double x_lo = std::max((params.s_in - s_hi) * z_lo, 1e-9);
    const double x_hi = std::max((params.s_in - s_lo) * z_hi, x_lo * (1 + 1e-9));
    auto x_sample = [&](int j) {
        return n > 1 ? x_lo + (x_hi - x_lo) * j / (n - 1) : x_lo;
    };

    CheckResult zero{"mu_zero_at_s0", true, 0.0, ""};
    CheckResult positive{"mu_positive_for_s_positive", true, 0.0, ""};
    CheckResult crowding{"crowding_mu_nonincreasing_in_x", true, 0.0, ""};
    CheckResult growth{"mu_x_nondecreasing_in_x", true, 0.0, ""};
    const double tol = 1e-12;

    try {
        for (int j = 0; j < n; ++j) {
            const double m0 = mu(model, 0.0, x_sample(j));
            if (std::abs(m0) > tol) {
                zero.pass = false;
                zero.worst = std::max(zero.worst, std::abs(m0));
            }
        }
        for (int i = 0; i < n; ++i) {
            const double s = s_sample(i);
            if (s <= 0.0) continue;
            double prev_mu = 0.0, prev_mux = 0.0;
            for (int j = 0; j < n; ++j) {
                const double x = x_sample(j);
                const double m = mu(model, s, x);
                if (!(m > 0.0)) {
                    positive.pass = false;
                    positive.worst = std::min(positive.worst, m);
                }
                const double mx = m * x;
                if (j > 0) {
                    const double scale = std::max({std::abs(m), std::abs(prev_mu), 1.0});
                    if (m > prev_mu + tol * scale) {
                        crowding.pass = false;
                        crowding.worst = std::max(crowding.worst, m - prev_mu);
                    }
                    const double scale2 = std::max({std::abs(mx), std::abs(prev_mux), 1.0});
                    if (mx < prev_mux - tol * scale2) {
                        growth.pass = false;
                        growth.worst = std::max(growth.worst, prev_mux - mx);
                    }
                }
                prev_mu = m;
                prev_mux = mx;
            }
        }
    } catch (const std::exception& e) {
        positive.pass = false;
        positive.detail = e.what();
    }
    report.checks.push_back(zero);
    report.checks.push_back(positive);
    report.checks.push_back(crowding);
    report.checks.push_back(growth);

    CheckResult unimodal{"phi_unimodal_per_z", true, 0.0, ""};
    try {
        std::vector<double> values(kCoarsePoints);
        const double eps = 1e-9 * params.s_in;
        for (int j = 0; j < n; ++j) {
            const double z = z_sample(j);
            for (int i = 0; i < kCoarsePoints; ++i) {
                const double s = eps + (params.s_in - 2 * eps) * i / (kCoarsePoints - 1);
                values[i] = phi(model, params, s, z);
            }
            const CoarseScan scan = coarse_scan(values);
            if (scan.multimodal) {
                unimodal.pass = false;
                unimodal.worst = std::max(unimodal.worst, scan.second_peak);
                std::ostringstream os;
                os << "secondary maximum at z=" << z;
                unimodal.detail = os.str();
            }
        }
    } catch (const std::exception& e) {
        unimodal.pass = false;
        unimodal.detail = e.what();
    }
    report.checks.push_back(unimodal);
    return report;
}

}  // namespace biogas
