#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "biogas/growth.hpp"

using namespace biogas;

namespace {

const ProcessParams kContoisProc{100.0, 1.5};
const ProcessParams kHaldaneProc{100.0, 3.0};

GrowthModel contois_ref() { return GrowthModel::contois(0.74, 1.0); }
GrowthModel haldane_ref() { return GrowthModel::haldane(0.74, 9.28, 256.0); }
GrowthModel monod_ref() { return GrowthModel::monod(0.74, 9.28); }

// Positive root of s^2 (1 + s_in/K_i) + 2 K_s s - s_in K_s = 0, the
// stationarity condition of the Haldane flow map.
double haldane_sbar_root(double K_s, double K_i, double s_in) {
    const double a = 1.0 + s_in / K_i;
    const double b = 2.0 * K_s;
    const double c = -s_in * K_s;
    return (-b + std::sqrt(b * b - 4.0 * a * c)) / (2.0 * a);
}

// Contois maximizer closed form: s_bar(z) = s_in sqrt(a) / (1 + sqrt(a)),
// a = K_s z, from the stationarity condition of s (s_in - s) / (a(s_in-s)+s).
double contois_sbar_closed(double K_s, double s_in, double z) {
    const double r = std::sqrt(K_s * z);
    return s_in * r / (1.0 + r);
}

double contois_sbar_slope_closed(double K_s, double s_in, double z) {
    const double a = K_s * z;
    const double r = std::sqrt(a);
    return s_in * K_s / (2.0 * r * (1.0 + r) * (1.0 + r));
}

// Independent argmax by dense grid scan.
double grid_argmax_phi(const GrowthModel& m, const ProcessParams& p, double z, int n = 20001) {
    double best_s = 0.0, best_v = -1.0;
    for (int i = 1; i < n; ++i) {
        const double s = p.s_in * i / n;
        const double v = phi(m, p, s, z);
        if (v > best_v) {
            best_v = v;
            best_s = s;
        }
    }
    return best_s;
}

}  // namespace

TEST_CASE("mu: half saturation and zero substrate") {
    const GrowthModel monod = monod_ref();
    CHECK(mu(monod, 9.28, 1.0) == doctest::Approx(0.37).epsilon(1e-12));
    CHECK(mu(monod, 0.0, 5.0) == 0.0);
    CHECK(mu(haldane_ref(), 0.0, 5.0) == 0.0);
    CHECK(mu(contois_ref(), 0.0, 5.0) == 0.0);
    const GrowthModel custom =
        GrowthModel::custom([](double s, double x) { return 0.5 * s / (1.0 + s + x); });
    CHECK(mu(custom, 0.0, 2.0) == 0.0);
}

TEST_CASE("mu: Contois reduces to Monod at ratio s/x") {
    const GrowthModel contois = contois_ref();
    const GrowthModel monod = GrowthModel::monod(0.74, 1.0);
    for (double s : {0.5, 3.0, 20.0, 80.0}) {
        for (double x : {0.2, 1.0, 7.0, 60.0}) {
            CHECK(mu(contois, s, x) == doctest::Approx(mu(monod, s / x, 1.0)).epsilon(1e-12));
        }
    }
}

TEST_CASE("mu: domain errors") {
    CHECK_THROWS_AS(mu(monod_ref(), -1.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(mu(contois_ref(), 5.0, 0.0), std::domain_error);
    CHECK_THROWS_AS(mu(contois_ref(), 5.0, -2.0), std::domain_error);
}

TEST_CASE("model factories reject non-positive parameters") {
    CHECK_THROWS_AS(GrowthModel::monod(0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(GrowthModel::haldane(0.74, -9.28, 256.0), std::invalid_argument);
    CHECK_THROWS_AS(GrowthModel::contois(0.74, 0.0), std::invalid_argument);
}

TEST_CASE("phi: vanishes at both ends, positive inside") {
    for (const GrowthModel& m : {monod_ref(), haldane_ref(), contois_ref()}) {
        for (double z : {0.2, 1.0, 3.0}) {
            CHECK(phi(m, kContoisProc, 0.0, z) == 0.0);
            CHECK(phi(m, kContoisProc, 100.0, z) == 0.0);
            for (double s : {1.0, 25.0, 50.0, 99.0}) {
                CHECK(phi(m, kContoisProc, s, z) > 0.0);
            }
        }
    }
    CHECK_THROWS_AS(phi(contois_ref(), kContoisProc, -0.5, 1.0), std::domain_error);
    CHECK_THROWS_AS(phi(contois_ref(), kContoisProc, 100.5, 1.0), std::domain_error);
}

TEST_CASE("phi: Contois with K_s z = 1 collapses to a parabola") {
    const GrowthModel contois = contois_ref();
    // K_s z = 1 makes the denominator K_s(s_in-s)z + s equal s_in
    for (double s : {10.0, 50.0, 90.0}) {
        const double expected = 0.74 * s * (100.0 - s) / 100.0;
        CHECK(phi(contois, kContoisProc, s, 1.0) == doctest::Approx(expected).epsilon(1e-12));
    }
    CHECK(phi(contois, kContoisProc, 50.0, 1.0) == doctest::Approx(18.5).epsilon(1e-12));
}

TEST_CASE("phi: Haldane independent of z") {
    const GrowthModel haldane = haldane_ref();
    for (double s : {5.0, 20.0, 60.0}) {
        const double ref = phi(haldane, kHaldaneProc, s, 1.0);
        for (double z : {0.2, 3.0}) {
            CHECK(phi(haldane, kHaldaneProc, s, z) == doctest::Approx(ref).epsilon(1e-14));
        }
    }
}

TEST_CASE("phi: crowding-driven framing inequalities") {
    const GrowthModel contois = contois_ref();
    for (double s : {5.0, 30.0, 70.0}) {
        for (auto [z1, z2] : {std::pair{0.3, 0.9}, std::pair{0.9, 1.7}, std::pair{1.7, 2.5}}) {
            const double p1 = phi(contois, kContoisProc, s, z1);
            const double p2 = phi(contois, kContoisProc, s, z2);
            CHECK(p1 >= p2);                  // z -> phi non-increasing
            CHECK(p1 * z1 <= p2 * z2 + 1e-12);  // z -> phi z non-decreasing
        }
    }
}

TEST_CASE("s_bar: Contois closed forms") {
    const GrowthModel contois = contois_ref();
    CHECK(s_bar(contois, kContoisProc, 1.0) == doctest::Approx(50.0).epsilon(1e-10));
    CHECK(phi_bar(contois, kContoisProc, 1.0) == doctest::Approx(18.5).epsilon(1e-10));
    for (double z : {0.25, 0.625, 1.75, 3.0}) {
        const double expected = contois_sbar_closed(1.0, 100.0, z);
        CHECK(s_bar(contois, kContoisProc, z) == doctest::Approx(expected).epsilon(1e-8));
    }
    // dense grid cross-check at z = 0.4
    const double sg = grid_argmax_phi(contois, kContoisProc, 0.4);
    CHECK(std::abs(s_bar(contois, kContoisProc, 0.4) - sg) < 100.0 / 20001 + 1e-9);
}

TEST_CASE("s_bar: Haldane quadratic root, z-independent") {
    const GrowthModel haldane = haldane_ref();
    const double root = haldane_sbar_root(9.28, 256.0, 100.0);
    CHECK(root == doctest::Approx(20.0).epsilon(1e-2));
    for (double z : {0.2, 1.0, 3.0}) {
        CHECK(std::abs(s_bar(haldane, kHaldaneProc, z) - root) < 1e-6);
    }
    const double pb = phi_bar(haldane, kHaldaneProc, 1.0);
    CHECK(phi_bar(haldane, kHaldaneProc, 0.2) == doctest::Approx(pb).epsilon(1e-12));
    CHECK(phi_bar(haldane, kHaldaneProc, 3.0) == doctest::Approx(pb).epsilon(1e-12));
}

TEST_CASE("s_bar: Monod closed form sqrt(K_s (K_s + s_in)) - K_s") {
    const GrowthModel monod = monod_ref();
    const double expected = std::sqrt(9.28 * (9.28 + 100.0)) - 9.28;
    CHECK(s_bar(monod, kHaldaneProc, 1.0) == doctest::Approx(expected).epsilon(1e-8));
    // phi is z-free, so the maximum value is too
    const double pb = phi_bar(monod, kHaldaneProc, 1.0);
    CHECK(phi_bar(monod, kHaldaneProc, 0.2) == doctest::Approx(pb).epsilon(1e-12));
    CHECK(phi_bar(monod, kHaldaneProc, 3.0) == doctest::Approx(pb).epsilon(1e-12));
}

TEST_CASE("s_bar: determinism and multimodality detection") {
    const GrowthModel contois = contois_ref();
    CHECK(s_bar(contois, kContoisProc, 0.7) == s_bar(contois, kContoisProc, 0.7));

    // two-bump flow map via a custom growth law
    const GrowthModel bumpy = GrowthModel::custom([](double s, double) {
        const double g1 = std::exp(-(s - 20.0) * (s - 20.0) / 50.0);
        const double g2 = std::exp(-(s - 70.0) * (s - 70.0) / 50.0);
        return (g1 + 0.8 * g2) / std::max(100.0 - s, 1e-6);
    });
    CHECK_THROWS_AS(s_bar(bumpy, kContoisProc, 1.0), assumption_violation);
}

TEST_CASE("s_bar_slope: zero for substrate-only models, Contois analytic") {
    CHECK(s_bar_slope(haldane_ref(), kHaldaneProc, 0.5) == 0.0);
    CHECK(s_bar_slope(haldane_ref(), kHaldaneProc, 2.0) == 0.0);
    CHECK(s_bar_slope(monod_ref(), kHaldaneProc, 1.0) == 0.0);

    const GrowthModel contois = contois_ref();
    for (double z : {0.3, 1.0, 1.9}) {
        const double analytic = contois_sbar_slope_closed(1.0, 100.0, z);
        CHECK(s_bar_slope(contois, kContoisProc, z) ==
              doctest::Approx(analytic).epsilon(1e-5));
    }
    CHECK(s_bar_slope(contois, kContoisProc, 1.0) == doctest::Approx(12.5).epsilon(1e-6));

    // definition check against a fresh central difference
    const double h = 1e-5;
    const double fd = (s_bar(contois, kContoisProc, 1.0 + h) -
                       s_bar(contois, kContoisProc, 1.0 - h)) /
                      (2.0 * h);
    CHECK(std::abs(fd - s_bar_slope(contois, kContoisProc, 1.0)) < 1e-4);
}

TEST_CASE("maximizer curve: tabulation, interpolation, stationarity") {
    const GrowthModel contois = contois_ref();
    const MaximizerCurve curve = tabulate_maximizer_curve(contois, kContoisProc, 0.25, 1.0, 64);
    REQUIRE(curve.z_grid.size() == 64);
    for (size_t i = 0; i < curve.z_grid.size(); ++i) {
        CHECK(curve.s_bar[i] > 0.0);
        CHECK(curve.s_bar[i] < 100.0);
        // stationarity of phi at the tabulated maximizer
        const double ds = 1e-5;
        const double d = (phi(contois, kContoisProc, curve.s_bar[i] + ds, curve.z_grid[i]) -
                          phi(contois, kContoisProc, curve.s_bar[i] - ds, curve.z_grid[i])) /
                         (2.0 * ds);
        CHECK(std::abs(d) < 1e-5);
    }
    // Hermite lookup against the direct optimizer at off-grid z; truncation
    // error of the 64-point interpolant dominates
    for (double z : {0.26, 0.5, 0.83, 0.999}) {
        CHECK(std::abs(curve.s_at(z) - s_bar(contois, kContoisProc, z)) < 1e-6);
        CHECK(curve.slope_at(z) ==
              doctest::Approx(contois_sbar_slope_closed(1.0, 100.0, z)).epsilon(2e-4));
    }
    // the default 512-point tabulation is another two orders tighter
    const MaximizerCurve fine = tabulate_maximizer_curve(contois, kContoisProc, 0.25, 1.0);
    for (double z : {0.26, 0.5, 0.83}) {
        CHECK(std::abs(fine.s_at(z) - s_bar(contois, kContoisProc, z)) < 1e-8);
    }
    CHECK_THROWS_AS(curve.s_at(0.1), std::out_of_range);
    CHECK_THROWS_AS(curve.s_at(1.2), std::out_of_range);

    const MaximizerCurve flat = tabulate_maximizer_curve(haldane_ref(), kHaldaneProc, 0.2, 3.0, 16);
    for (size_t i = 1; i < flat.z_grid.size(); ++i) {
        CHECK(std::abs(flat.s_bar[i] - flat.s_bar[0]) < 1e-8);
    }

    const MaximizerCurve point = tabulate_maximizer_curve(contois, kContoisProc, 1.0, 1.0);
    CHECK(point.s_at(1.0) == doctest::Approx(50.0).epsilon(1e-9));
    CHECK(point.slope_at(1.0) == doctest::Approx(12.5).epsilon(1e-5));
}

TEST_CASE("maximizer curve: CSV header and shape") {
    const MaximizerCurve curve =
        tabulate_maximizer_curve(contois_ref(), kContoisProc, 0.5, 1.0, 3);
    std::ostringstream os;
    curve.write_csv(os);
    const std::string text = os.str();
    CHECK(text.rfind("z,s_bar,phi_at_max,s_bar_slope\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 4);
}

TEST_CASE("check_assumptions: reference families pass") {
    const StateBox box{0.0, 100.0, 0.2, 3.0};
    for (const GrowthModel& m : {monod_ref(), haldane_ref(), contois_ref()}) {
        const ProcessParams& p = m.kind == GrowthKind::Contois ? kContoisProc : kHaldaneProc;
        const AssumptionReport rep = check_assumptions(m, p, box);
        CHECK(rep.pass());
    }
}

TEST_CASE("check_assumptions: invalid parameters and synthetic violations") {
    const StateBox box{0.0, 100.0, 0.2, 3.0};

    GrowthModel bad;  // aggregate init bypasses the validating factory
    bad.kind = GrowthKind::Contois;
    bad.mu_max = 0.74;
    bad.K_s = -1.0;
    const AssumptionReport rep = check_assumptions(bad, kContoisProc, box);
    CHECK_FALSE(rep.pass());
    REQUIRE(rep.find("params_positive") != nullptr);
    CHECK_FALSE(rep.find("params_positive")->pass);

    // mu increasing in x violates crowding
    const GrowthModel crowd = GrowthModel::custom([](double s, double x) { return s * x; });
    const AssumptionReport rep2 = check_assumptions(crowd, kContoisProc, box);
    CHECK_FALSE(rep2.pass());
    REQUIRE(rep2.find("crowding_mu_nonincreasing_in_x") != nullptr);
    CHECK_FALSE(rep2.find("crowding_mu_nonincreasing_in_x")->pass);
}
