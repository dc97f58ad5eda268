#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <memory>

#include "biogas/control.hpp"
#include "biogas/simulate.hpp"

using namespace biogas;

namespace {
const ProcessParams kContoisProc{100.0, 1.5};
const ProcessParams kHaldaneProc{100.0, 3.0};
GrowthModel contois_ref() { return GrowthModel::contois(0.74, 1.0); }
GrowthModel haldane_ref() { return GrowthModel::haldane(0.74, 9.28, 256.0); }

double haldane_sbar_root() {
    const double a = 1.0 + 100.0 / 256.0;
    const double b = 2.0 * 9.28;
    const double c = -100.0 * 9.28;
    return (-b + std::sqrt(b * b - 4.0 * a * c)) / (2.0 * a);
}
}  // namespace

TEST_CASE("saturate clamps to [0, u_max]") {
    CHECK(saturate(-0.1, kContoisProc) == 0.0);
    CHECK(saturate(2.5, kContoisProc) == 1.5);
    CHECK(saturate(0.7, kContoisProc) == 0.7);
}

TEST_CASE("mrap: bang branches and singular value") {
    const GrowthModel m = haldane_ref();
    const double s_star = haldane_sbar_root();
    const double band = 1e-4;

    CHECK(mrap_control(m, kHaldaneProc, s_star, StateSZ{99.9, 1.0}, band) == 0.0);
    CHECK(mrap_control(m, kHaldaneProc, s_star, StateSZ{0.0, 1.0}, band) == 3.0);

    // on the surface with z = 1 the singular value is mu_H(s_star)
    const double mu_star = 0.74 * s_star / (9.28 + s_star + s_star * s_star / 256.0);
    CHECK(mrap_control(m, kHaldaneProc, s_star, StateSZ{s_star, 1.0}, band) ==
          doctest::Approx(mu_star).epsilon(1e-12));
    CHECK(mrap_singular_value(m, kHaldaneProc, s_star, 1.0) ==
          doctest::Approx(mu_star).epsilon(1e-12));
}

TEST_CASE("mrap: inadmissible singular value throws") {
    const ProcessParams weak{100.0, 0.1};
    // Contois singular value at s*=50, z=1 is 0.37 > 0.1
    CHECK_THROWS_AS(mrap_control(contois_ref(), weak, 50.0, StateSZ{50.0, 1.0}, 1e-4),
                    admissibility_error);
}

TEST_CASE("mrap_curve: reduces to the fixed-level law when phi is z-free") {
    const GrowthModel m = haldane_ref();
    const auto curve = std::make_shared<MaximizerCurve>(
        tabulate_maximizer_curve(m, kHaldaneProc, 0.25, 1.0, 128));
    const double s_star = haldane_sbar_root();
    for (double z : {0.3, 0.6, 1.0}) {
        const double u_curve =
            mrap_curve_control(m, kHaldaneProc, *curve, StateSZ{curve->s_at(z), z}, 1e-4);
        const double u_fixed = mrap_singular_value(m, kHaldaneProc, s_star, z);
        CHECK(u_curve == doctest::Approx(u_fixed).epsilon(1e-6));
    }

    // at z = 1 the slope term vanishes for any model
    const GrowthModel c = contois_ref();
    const auto ccurve = std::make_shared<MaximizerCurve>(
        tabulate_maximizer_curve(c, kContoisProc, 0.25, 1.0, 128));
    const double sb1 = ccurve->s_at(1.0);
    const double expect = mu(c, sb1, 100.0 - sb1) * 1.0;
    CHECK(mrap_curve_control(c, kContoisProc, *ccurve, StateSZ{sb1, 1.0}, 1e-4) ==
          doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("piecewise schedule lookup") {
    PiecewiseConstant law;
    law.times = {0.0, 1.0, 2.5};
    law.values = {0.2, 1.0, 0.0};
    CHECK(piecewise_value(law, 0.0) == 0.2);
    CHECK(piecewise_value(law, 0.99) == 0.2);
    CHECK(piecewise_value(law, 1.0) == 1.0);
    CHECK(piecewise_value(law, 2.4) == 1.0);
    CHECK(piecewise_value(law, 7.0) == 0.0);
    CHECK(next_switch_time(ControlLaw{law}, 0.0) == 1.0);
    CHECK(next_switch_time(ControlLaw{law}, 1.0) == 2.5);
    CHECK(std::isinf(next_switch_time(ControlLaw{law}, 2.5)));
}

TEST_CASE("appendix schedule: construction and block structure") {
    const GrowthModel m = haldane_ref();
    const double s_star = haldane_sbar_root();
    const AppendixAnalysis ap = appendix_schedule(m, kHaldaneProc, 5.0, s_star);

    CHECK(ap.t_up > 0.0);
    CHECK(ap.t_down > 0.0);
    CHECK(ap.t_star == doctest::Approx(ap.t_up + ap.t_down));
    // phi increases up to s_bar, so the excursion beats the hold
    CHECK(ap.I_star > ap.I_eps);
    CHECK(ap.I_eps == doctest::Approx(ap.t_star * phi(m, kHaldaneProc, 5.0, 1.0)));

    const AppendixSchedule& sched = ap.schedule;
    const double u_hold = mu(m, 5.0, 95.0);
    CHECK(sched.u_hold == doctest::Approx(u_hold).epsilon(1e-12));

    // hold on [0, t*]
    CHECK(appendix_value(sched, 0.5 * ap.t_star) == doctest::Approx(u_hold));
    // first excursion block (t*, 2t*]
    CHECK(appendix_value(sched, ap.t_star + 0.5 * ap.t_up) == kHaldaneProc.u_max);
    CHECK(appendix_value(sched, ap.t_star + ap.t_up + 0.5 * ap.t_down) == 0.0);
    // hold block (2t*, 4t*]
    CHECK(appendix_value(sched, 3.0 * ap.t_star) == doctest::Approx(u_hold));
    // second excursion block (4t*, 8t*] repeats the cycle 4 times
    const double cyc2 = 4.0 * ap.t_star + 2.0 * ap.t_star;  // third cycle inside the block
    CHECK(appendix_value(sched, cyc2 + 0.5 * ap.t_up) == kHaldaneProc.u_max);
    CHECK(appendix_value(sched, cyc2 + ap.t_up + 0.5 * ap.t_down) == 0.0);
}

TEST_CASE("appendix schedule: switch times tile the horizon") {
    const GrowthModel m = haldane_ref();
    const AppendixAnalysis ap = appendix_schedule(m, kHaldaneProc, 5.0, haldane_sbar_root());
    const ControlLaw law{ap.schedule};

    double t = 0.0;
    int guard = 0;
    while (t < 16.0 * ap.t_star && guard++ < 200) {
        const double nxt = next_switch_time(law, t);
        REQUIRE(nxt > t);
        // constant in the open interval: sample three interior points
        const double u0 = appendix_value(ap.schedule, t + 0.25 * (nxt - t));
        CHECK(appendix_value(ap.schedule, t + 0.5 * (nxt - t)) == u0);
        CHECK(appendix_value(ap.schedule, t + 0.75 * (nxt - t)) == u0);
        t = nxt;
    }
    CHECK(guard < 200);
}

TEST_CASE("appendix schedule: K_N and L_N recursions and limits") {
    const GrowthModel m = haldane_ref();
    const AppendixAnalysis ap = appendix_schedule(m, kHaldaneProc, 5.0, haldane_sbar_root());

    for (int N = 1; N <= 10; ++N) {
        CHECK(ap.K_N(N) == doctest::Approx(ap.K_N_closed(N)).epsilon(1e-12));
        CHECK(ap.L_N(N) == doctest::Approx(0.5 * (ap.K_N(N) + ap.I_star / ap.t_star)));
    }
    CHECK(ap.K_N(30) == doctest::Approx(ap.K_infinity).epsilon(1e-12));
    CHECK(ap.L_N(30) == doctest::Approx(ap.L_infinity).epsilon(1e-12));
    CHECK(ap.L_infinity > ap.K_infinity);
    CHECK(ap.L_infinity - ap.K_infinity ==
          doctest::Approx((ap.I_star - ap.I_eps) / (3.0 * ap.t_star)).epsilon(1e-12));
}

TEST_CASE("appendix schedule: open-loop integration reproduces the block sums") {
    const GrowthModel m = haldane_ref();
    const AppendixAnalysis ap = appendix_schedule(m, kHaldaneProc, 5.0, haldane_sbar_root());

    const int N = 2;
    const double horizon = std::ldexp(1.0, 2 * N) * ap.t_star;
    SimOptions opts;
    opts.T = horizon;
    opts.step = 1e-3;
    const Trajectory traj =
        simulate(m, kHaldaneProc, ControlLaw{ap.schedule}, StateSZ{5.0, 1.0}, opts);

    const double expected = ap.K_N(N) * horizon;
    CHECK(traj.total_phi_z == doctest::Approx(expected).epsilon(1e-4));
    // the trajectory never leaves {z = 1}
    for (double zv : traj.z) CHECK(std::abs(zv - 1.0) < 1e-9);
}

namespace {
// composite Simpson rule, n even
double simpson(const std::function<double(double)>& f, double a, double b, int n) {
    const double h = (b - a) / n;
    double acc = f(a) + f(b);
    for (int i = 1; i < n; ++i) {
        acc += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
    }
    return acc * h / 3.0;
}
}  // namespace

TEST_CASE("appendix schedule: quadrature oracle for the cycle quantities") {
    // On {z = 1} the legs are scalar ODEs in s, so every cycle quantity has
    // an independent 1-D quadrature form:
    //   t_up   = int ds / [(u_max - mu(s)) (s_in - s)]
    //   I_up   = int mu(s) / (u_max - mu(s)) ds
    //   t_down = int ds / [mu(s) (s_in - s)]
    //   I_down = s_star - eps            (production equals substrate drop)
    const GrowthModel m = haldane_ref();
    const double eps = 5.0;
    const double s_star = haldane_sbar_root();
    // step 1e-4: the trapezoid-accumulated cycle production carries an
    // O(h^2) error (~4e-6 relative at the production step on this fast leg)
    const AppendixAnalysis ap = appendix_schedule(m, kHaldaneProc, eps, s_star, 1e-4);

    auto mu_h = [&](double s) { return mu(m, s, 100.0 - s); };
    const double t_up_q = simpson(
        [&](double s) { return 1.0 / ((3.0 - mu_h(s)) * (100.0 - s)); }, eps, s_star, 20000);
    const double i_up_q =
        simpson([&](double s) { return mu_h(s) / (3.0 - mu_h(s)); }, eps, s_star, 20000);
    const double t_down_q =
        simpson([&](double s) { return 1.0 / (mu_h(s) * (100.0 - s)); }, eps, s_star, 20000);
    const double i_down_exact = s_star - eps;

    CHECK(ap.t_up == doctest::Approx(t_up_q).epsilon(1e-9));
    CHECK(ap.t_down == doctest::Approx(t_down_q).epsilon(1e-9));
    CHECK(ap.I_star == doctest::Approx(i_up_q + i_down_exact).epsilon(1e-7));
}

TEST_CASE("appendix schedule: rejects bad geometry and dead control") {
    const GrowthModel m = haldane_ref();
    CHECK_THROWS_AS(appendix_schedule(m, kHaldaneProc, 20.0, 5.0), std::domain_error);
    const ProcessParams dead{100.0, 0.2};
    CHECK_THROWS_AS(appendix_schedule(m, dead, 5.0, 20.0), admissibility_error);
}

TEST_CASE("mrap reach-time bound is positive and finite under controllability") {
    const GrowthModel c = contois_ref();
    const double bound_down = mrap_reach_time_bound(c, kContoisProc, StateSZ{80.0, 0.5}, 50.0);
    CHECK(bound_down > 0.0);
    CHECK(std::isfinite(bound_down));
    const double bound_up = mrap_reach_time_bound(c, kContoisProc, StateSZ{10.0, 0.5}, 50.0);
    CHECK(bound_up > 0.0);
    CHECK(std::isfinite(bound_up));

    // dead control authority: no finite upward bound
    const ProcessParams dead{100.0, 1e-6};
    CHECK(std::isinf(mrap_reach_time_bound(c, dead, StateSZ{10.0, 0.5}, 50.0)));
}
