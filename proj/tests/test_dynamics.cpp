#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "biogas/dynamics.hpp"

using namespace biogas;

namespace {
const ProcessParams kContoisProc{100.0, 1.5};
const ProcessParams kHaldaneProc{100.0, 3.0};
GrowthModel contois_ref() { return GrowthModel::contois(0.74, 1.0); }
GrowthModel haldane_ref() { return GrowthModel::haldane(0.74, 9.28, 256.0); }
}  // namespace

TEST_CASE("rhs_sx: hand evaluation for the Haldane reference point") {
    const GrowthModel m = haldane_ref();
    const StateSX st{20.0, 80.0};
    const double u = 0.3;
    // independent arithmetic straight from the model definition
    const double mu_val = 0.74 * 20.0 / (9.28 + 20.0 + 20.0 * 20.0 / 256.0);
    const double ds_expected = u * (100.0 - 20.0) - mu_val * 80.0;
    const double dx_expected = mu_val * 80.0 - u * 80.0;
    const DerivSX d = rhs_sx(m, kHaldaneProc, st, u);
    CHECK(d.ds == doctest::Approx(ds_expected).epsilon(1e-14));
    CHECK(d.dx == doctest::Approx(dx_expected).epsilon(1e-14));
}

TEST_CASE("rhs_sx: boundary equilibrium and mass balance") {
    const GrowthModel m = contois_ref();
    CHECK(rhs_sx(m, kContoisProc, StateSX{0.0, 10.0}, 0.0).ds == 0.0);

    for (double s : {5.0, 40.0, 90.0}) {
        for (double x : {1.0, 30.0, 120.0}) {
            for (double u : {0.0, 0.7, 1.5}) {
                const DerivSX d = rhs_sx(m, kContoisProc, StateSX{s, x}, u);
                const double total = d.ds + d.dx;
                const double expected = u * (100.0 - s - x);
                CHECK(total == doctest::Approx(expected).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("rhs_sx / rhs_sz: control bounds enforced") {
    const GrowthModel m = contois_ref();
    CHECK_THROWS_AS(rhs_sx(m, kContoisProc, StateSX{10.0, 10.0}, -0.1), control_error);
    CHECK_THROWS_AS(rhs_sx(m, kContoisProc, StateSX{10.0, 10.0}, 1.6), control_error);
    CHECK_THROWS_AS(rhs_sz(m, kContoisProc, StateSZ{10.0, 0.5}, 2.0), control_error);
}

TEST_CASE("rhs_sz: invariant slab and sign structure") {
    const GrowthModel m = contois_ref();
    for (double s : {1.0, 50.0, 99.0}) {
        for (double u : {0.0, 1.0}) {
            CHECK(rhs_sz(m, kContoisProc, StateSZ{s, 1.0}, u).dz == 0.0);
        }
    }
    CHECK(rhs_sz(m, kContoisProc, StateSZ{30.0, 0.5}, 0.0).dz > 0.0);
    CHECK(rhs_sz(m, kContoisProc, StateSZ{30.0, 2.0}, 0.0).dz < 0.0);
    CHECK_THROWS_AS(rhs_sz(m, kContoisProc, StateSZ{100.0, 1.0}, 0.0), std::domain_error);
}

TEST_CASE("rhs_sz equals rhs_sx pushed through the chart") {
    for (const GrowthModel& m : {contois_ref(), haldane_ref()}) {
        const ProcessParams& p = m.kind == GrowthKind::Contois ? kContoisProc : kHaldaneProc;
        for (double s : {5.0, 35.0, 80.0}) {
            for (double x : {2.0, 25.0, 90.0}) {
                for (double u : {0.0, 0.4, 1.2}) {
                    const StateSX sx{s, x};
                    const StateSZ sz = to_sz(p, sx);
                    const DerivSX dxy = rhs_sx(m, p, sx, u);
                    // dz = dx/(s_in - s) + x ds/(s_in - s)^2
                    const double denom = p.s_in - s;
                    const double dz_chain = dxy.dx / denom + x * dxy.ds / (denom * denom);
                    const DerivSZ dsz = rhs_sz(m, p, sz, u);
                    CHECK(dsz.ds == doctest::Approx(dxy.ds).epsilon(1e-12));
                    CHECK(dsz.dz == doctest::Approx(dz_chain).epsilon(1e-10));
                }
            }
        }
    }
}

TEST_CASE("coordinate change: reference points and round trip") {
    CHECK(to_sz(kContoisProc, StateSX{20.0, 80.0}).z == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(to_sz(kContoisProc, StateSX{60.0, 70.0}).z == doctest::Approx(1.75).epsilon(1e-15));
    CHECK(to_sz(kContoisProc, StateSX{20.0, 20.0}).z == doctest::Approx(0.25).epsilon(1e-15));
    // (x0, s0) = (10, 70) sits on z0 = 1/3
    CHECK(to_sz(kContoisProc, StateSX{70.0, 10.0}).z ==
          doctest::Approx(1.0 / 3.0).epsilon(1e-15));

    const StateSZ sz = to_sz(kContoisProc, StateSX{60.0, 70.0});
    const StateSX back = to_sx(kContoisProc, sz);
    CHECK(back.s == doctest::Approx(60.0).epsilon(1e-15));
    CHECK(back.x == doctest::Approx(70.0).epsilon(1e-15));

    CHECK_THROWS_AS(to_sz(kContoisProc, StateSX{100.0, 5.0}), std::domain_error);
    CHECK_THROWS_AS(to_sx(kContoisProc, StateSZ{100.0, 1.0}), std::domain_error);
}

TEST_CASE("invariant_box: degenerate and two-sided cases") {
    const InvariantBox b1 = invariant_box(kContoisProc, StateSZ{10.0, 1.0});
    CHECK(b1.z_lo == 1.0);
    CHECK(b1.z_hi == 1.0);

    const InvariantBox b2 = invariant_box(kContoisProc, StateSZ{10.0, 0.25});
    CHECK(b2.z_lo == 0.25);
    CHECK(b2.z_hi == 1.0);
    CHECK(b2.s_lo == 0.0);
    CHECK(b2.s_hi == 100.0);

    const InvariantBox b3 = invariant_box(kContoisProc, StateSZ{10.0, 3.0});
    CHECK(b3.z_lo == 1.0);
    CHECK(b3.z_hi == 3.0);
}

TEST_CASE("check_controllability: reference cases") {
    // Contois with z0 <= 1: mu z <= mu_max, comfortably below u_max = 1.5
    const ControllabilityReport ok =
        check_controllability(contois_ref(), kContoisProc, StateSZ{20.0, 0.25});
    CHECK(ok.ok);
    CHECK(ok.max_mu_z <= 0.74 + 1e-9);
    CHECK(ok.margin == doctest::Approx(kContoisProc.u_max - ok.max_mu_z));

    // zero control authority
    const ProcessParams dead{100.0, 0.0};
    CHECK_FALSE(check_controllability(contois_ref(), dead, StateSZ{20.0, 0.25}).ok);

    // Haldane reference parameters with u_max = 3
    CHECK(check_controllability(haldane_ref(), kHaldaneProc, StateSZ{20.0, 0.25}).ok);

    // Contois with a wide z box above 1 exceeds u_max = 1.5
    const ControllabilityReport wide =
        check_controllability(contois_ref(), kContoisProc, StateSZ{20.0, 3.0});
    CHECK_FALSE(wide.ok);
    CHECK(wide.max_mu_z == doctest::Approx(0.74 * 3.0).epsilon(1e-3));
}
