#include "biogas/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "biogas/csv.hpp"
#include "biogas/parallel.hpp"
#include "biogas/svg.hpp"

namespace biogas {

namespace fs = std::filesystem;

namespace {

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> out;
    if (n <= 1 || hi <= lo) {
        out.push_back(lo);
        return out;
    }
    out.reserve(n);
    for (int i = 0; i < n; ++i) out.push_back(lo + (hi - lo) * i / (n - 1));
    return out;
}

SimOptions sim_opts(const ExperimentConfig& cfg, double t0, double T) {
    SimOptions o = cfg.sim;
    o.t0 = t0;
    o.T = T;
    o.checkpoints.clear();
    o.aux_z1.clear();
    o.discount_rates.clear();
    return o;
}

double ic_x0(const ExperimentConfig& cfg, const InitialCondition& ic) {
    return (cfg.process.s_in - ic.s0) * ic.z0;
}

std::string ic_tag(size_t k) { return "ic" + std::to_string(k); }

void write_lines(const fs::path& path, const std::vector<std::string>& lines) {
    std::ofstream out(path);
    if (!out) throw numeric_error("cannot open " + path.string() + " for writing");
    for (const auto& l : lines) out << l << "\n";
}

}  // namespace

ControlLaw build_law(const LawSpec& spec, const GrowthModel& model,
                     const ProcessParams& params, const InitialCondition& ic, double step) {
    const double z_lo = std::min(ic.z0, 1.0);
    const double z_hi = std::max(ic.z0, 1.0);
    switch (spec.type) {
        case LawType::Constant:
            if (spec.u0 < 0.0 || spec.u0 > params.u_max) {
                throw config_error("constant law value outside [0, u_max]");
            }
            return ControlLaw{ConstantControl{spec.u0}};
        case LawType::MrapLevel:
            if (spec.s_star < 0.0 || spec.s_star >= params.s_in) {
                throw config_error("mrap s_star outside [0, s_in)");
            }
            return ControlLaw{Mrap{spec.s_star}};
        case LawType::MrapZ1:
            return ControlLaw{Mrap{s_bar(model, params, spec.z1)}};
        case LawType::MrapZ0:
            return ControlLaw{Mrap{s_bar(model, params, ic.z0)}};
        case LawType::MrapCurve: {
            auto curve = std::make_shared<MaximizerCurve>(
                tabulate_maximizer_curve(model, params, z_lo, z_hi));
            return ControlLaw{MrapCurve{std::move(curve)}};
        }
        case LawType::Piecewise: {
            PiecewiseConstant pc;
            pc.times = spec.times;
            pc.values = spec.values;
            for (double v : pc.values) {
                if (v < 0.0 || v > params.u_max) {
                    throw config_error("piecewise law value outside [0, u_max]");
                }
            }
            return ControlLaw{pc};
        }
        case LawType::Appendix: {
            const double target = spec.appendix_s_star > 0.0 ? spec.appendix_s_star
                                                             : s_bar(model, params, 1.0);
            return ControlLaw{appendix_schedule(model, params, spec.eps, target, step).schedule};
        }
    }
    throw std::logic_error("unknown law type");
}

int effective_jobs(const ExperimentConfig& cfg) {
    if (cfg.jobs > 0) return cfg.jobs;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

ExperimentConfig default_config(const std::string& command) {
    ExperimentConfig cfg;
    cfg.model = GrowthModel::haldane(0.74, 9.28, 256.0);
    cfg.process = ProcessParams{100.0, 3.0};
    auto add_grid_ics = [&cfg]() {
        for (double z0 : {0.2, 0.7, 1.5, 3.0}) {
            for (double s0 : {10.0, 60.0, 75.0}) {
                cfg.initial_conditions.push_back(InitialCondition{s0, z0, {}});
            }
        }
    };
    if (command == "phase-portrait") {
        // Haldane reactor under the most rapid approach to s_bar
        cfg.T = 50.0;
        add_grid_ics();
        LawSpec law;
        law.type = LawType::MrapZ1;
        law.z1 = 1.0;
        cfg.laws.push_back(law);
        return cfg;
    }
    cfg.model = GrowthModel::contois(0.74, 1.0);
    cfg.process = ProcessParams{100.0, 1.5};
    if (command == "reward-surface") {
        cfg.T = 6.0;
        cfg.initial_conditions.push_back(InitialCondition{20.0, 0.25, {}});   // (x0,s0)=(20,20)
        cfg.initial_conditions.push_back(InitialCondition{60.0, 1.75, {}});   // (x0,s0)=(70,60)
        return cfg;
    }
    if (command == "compare-feedbacks") {
        cfg.T = 6.0;
        cfg.initial_conditions.push_back(InitialCondition{2.0, 30.0 / 98.0, {}});   // (30,2)
        cfg.initial_conditions.push_back(InitialCondition{20.0, 0.25, {}});         // (20,20)
        cfg.initial_conditions.push_back(InitialCondition{70.0, 1.0 / 3.0, {}});    // (10,70)
        return cfg;
    }
    if (command == "value-surface") {
        cfg.T = 2.0;
        // start the grid below the maximizer band: the u = 0 descent from
        // above is biomass-limited for every model and would swamp the
        // biomass sensitivity the surface is meant to expose
        cfg.grids.s0_min = 2.0;
        cfg.grids.s0_max = 20.0;
        return cfg;
    }
    if (command == "appendix") {
        cfg.model = GrowthModel::haldane(0.74, 9.28, 256.0);
        cfg.process = ProcessParams{100.0, 3.0};
        return cfg;
    }
    if (command == "check") {
        cfg.T = 20.0;
        cfg.initial_conditions.push_back(InitialCondition{20.0, 0.25, {}});
        cfg.initial_conditions.push_back(InitialCondition{60.0, 1.75, {}});
        cfg.initial_conditions.push_back(InitialCondition{50.0, 1.0, {}});
        LawSpec a;
        a.type = LawType::MrapZ1;
        a.z1 = 1.0;
        LawSpec b;
        b.type = LawType::MrapZ0;
        LawSpec c;
        c.type = LawType::MrapCurve;
        LawSpec d;
        d.type = LawType::Constant;
        d.u0 = 0.7;
        cfg.laws = {a, b, c, d};
        return cfg;
    }
    throw config_error("no defaults for command '" + command + "'");
}

void cmd_phase_portrait(const ExperimentConfig& cfg, const fs::path& out_dir) {
    if (cfg.initial_conditions.empty()) {
        std::cout << "phase-portrait: no initial conditions, nothing to do\n";
        return;
    }
    fs::create_directories(out_dir);

    std::vector<LawSpec> laws = cfg.laws;
    if (laws.empty()) {
        LawSpec def;
        def.type = LawType::MrapZ1;
        def.z1 = 1.0;
        laws.push_back(def);
    }

    std::vector<std::string> report;
    report.push_back("phase-portrait: " + std::string(cfg.model.name()));

    struct Run {
        size_t ic;
        size_t law;
        Trajectory traj;
        bool ok = false;
        std::string error;
    };
    std::vector<Run> runs(cfg.initial_conditions.size() * laws.size());
    parallel_for(runs.size(), effective_jobs(cfg), [&](size_t idx) {
        Run& run = runs[idx];
        run.ic = idx / laws.size();
        run.law = idx % laws.size();
        const InitialCondition& ic = cfg.initial_conditions[run.ic];
        const StateSZ xi{ic.s0, ic.z0};
        try {
            const ControlLaw law = build_law(laws[run.law], cfg.model, cfg.process, ic,
                                             cfg.sim.step);
            SimOptions opts = sim_opts(cfg, cfg.t0, cfg.T);
            opts.verify_admissibility = false;  // runtime saturation still guards
            run.traj = simulate(cfg.model, cfg.process, law, xi, opts);
            run.ok = true;
        } catch (const std::exception& e) {
            run.error = e.what();
        }
    });

    double x_max = 0.0;
    for (const Run& run : runs) {
        if (!run.ok) continue;
        for (size_t i = 0; i < run.traj.size(); ++i) {
            x_max = std::max(x_max, (cfg.process.s_in - run.traj.s[i]) * run.traj.z[i]);
        }
    }
    SvgCanvas canvas(0.0, 1.05 * std::max(x_max, cfg.process.s_in), 0.0, cfg.process.s_in);
    canvas.set_labels("state space trajectories", "biomass x", "substrate s");

    CsvWriter ic_csv(out_dir / "initial_conditions.csv", "ic,s0,x0,z0,controllability_margin");
    for (size_t k = 0; k < cfg.initial_conditions.size(); ++k) {
        const InitialCondition& ic = cfg.initial_conditions[k];
        const ControllabilityReport rep =
            check_controllability(cfg.model, cfg.process, StateSZ{ic.s0, ic.z0});
        ic_csv.row({static_cast<double>(k), ic.s0, ic_x0(cfg, ic), ic.z0, rep.margin});
        if (!rep.ok) {
            report.push_back(ic_tag(k) + ": controllability margin " + format_num(rep.margin) +
                             " (box check failed; relying on runtime saturation guard)");
        }
    }

    for (const Run& run : runs) {
        const std::string label = ic_tag(run.ic) + "_" + law_label(laws[run.law]);
        if (!run.ok) {
            report.push_back(label + ": FAILED: " + run.error);
            continue;
        }
        std::ofstream traj_csv(out_dir / ("trajectory_" + label + ".csv"));
        run.traj.write_csv(traj_csv, cfg.model, cfg.process);

        std::vector<std::pair<double, double>> pts;
        pts.reserve(run.traj.size());
        for (size_t i = 0; i < run.traj.size(); ++i) {
            pts.emplace_back((cfg.process.s_in - run.traj.s[i]) * run.traj.z[i],
                             run.traj.s[i]);
        }
        canvas.polyline(pts, palette_color(static_cast<int>(run.ic)));
        report.push_back(label + ": final (s,z) = (" + format_num(run.traj.s.back()) + ", " +
                         format_num(run.traj.z.back()) + ")");
    }

    // invariant set {x + s = s_in}
    canvas.line(cfg.process.s_in, 0.0, 0.0, cfg.process.s_in, "#000000", 2.0);
    canvas.save(out_dir / "phase_portrait.svg");
    write_lines(out_dir / "report.txt", report);
    std::cout << "phase-portrait: wrote " << runs.size() << " trajectories to " << out_dir
              << "\n";
}

void cmd_reward_surface(const ExperimentConfig& cfg, const fs::path& out_dir) {
    if (cfg.initial_conditions.empty()) {
        std::cout << "reward-surface: no initial conditions, nothing to do\n";
        return;
    }
    fs::create_directories(out_dir);
    std::vector<std::string> report;

    for (size_t k = 0; k < cfg.initial_conditions.size(); ++k) {
        const InitialCondition& ic = cfg.initial_conditions[k];
        const StateSZ xi{ic.s0, ic.z0};
        const double z_lo = std::min(ic.z0, 1.0);
        const double z_hi = std::max(ic.z0, 1.0);
        const std::vector<double> z1_grid = linspace(z_lo, z_hi, cfg.grids.z1_points);
        const std::vector<double> T_grid =
            linspace(cfg.grids.T_min, cfg.grids.T_max, cfg.grids.T_points);

        const RewardSurface surf = normalized_reward_surface(
            cfg.model, cfg.process, xi, z1_grid, T_grid, sim_opts(cfg, 0.0, cfg.grids.T_max),
            effective_jobs(cfg));

        CsvWriter csv(out_dir / ("surface_" + ic_tag(k) + ".csv"), "T,z1,J_avg,J_N");
        for (size_t i = 0; i < T_grid.size(); ++i) {
            for (size_t j = 0; j < z1_grid.size(); ++j) {
                csv.row({T_grid[i], z1_grid[j], surf.J[i][j], surf.J_N[i][j]});
            }
        }

        SvgCanvas canvas(z_lo, z_hi, cfg.grids.T_min, cfg.grids.T_max);
        canvas.set_labels("normalized average reward, " + ic_tag(k), "z1", "T");
        const double dz = z1_grid.size() > 1 ? z1_grid[1] - z1_grid[0] : (z_hi - z_lo + 1e-9);
        const double dT = T_grid.size() > 1 ? T_grid[1] - T_grid[0] : 1.0;
        for (size_t i = 0; i < T_grid.size(); ++i) {
            for (size_t j = 0; j < z1_grid.size(); ++j) {
                canvas.cell(z1_grid[j] - 0.5 * dz, T_grid[i] - 0.5 * dT, dz, dT,
                            heat_color(surf.J_N[i][j]));
            }
        }
        canvas.save(out_dir / ("surface_" + ic_tag(k) + ".svg"));

        std::ostringstream line;
        line << ic_tag(k) << ": argmax z1 at T=" << T_grid.front() << " is "
             << format_num(z1_grid[surf.argmax.front()]) << ", at T=" << T_grid.back()
             << " is " << format_num(z1_grid[surf.argmax.back()]);
        report.push_back(line.str());
        for (size_t i = 0; i < T_grid.size(); ++i) {
            if (surf.degenerate[i]) {
                report.push_back(ic_tag(k) + ": degenerate row at T=" + format_num(T_grid[i]));
            }
        }
    }
    write_lines(out_dir / "report.txt", report);
    std::cout << "reward-surface: wrote " << cfg.initial_conditions.size() << " surfaces to "
              << out_dir << "\n";
}

void cmd_compare_feedbacks(const ExperimentConfig& cfg, const fs::path& out_dir) {
    fs::create_directories(out_dir);
    std::vector<std::string> report;
    const std::vector<double> T_grid =
        linspace(cfg.grids.T_min, cfg.grids.T_max, cfg.grids.T_points);

    // with no configured laws, compare the reference family
    // { psi_{s_bar(z0)}, psi_{s_bar(z1)}, psi_{s_bar(1)}, psi_curve };
    // an explicit law list replaces it (a single law plots alone)
    const bool default_family = cfg.laws.empty();

    for (size_t k = 0; k < cfg.initial_conditions.size(); ++k) {
        const InitialCondition& ic = cfg.initial_conditions[k];
        const StateSZ xi{ic.s0, ic.z0};
        const double z1 = ic.z1.value_or(0.5 * (ic.z0 + 1.0));

        struct Candidate {
            std::string name;
            ControlLaw law;
        };
        const auto curve = std::make_shared<MaximizerCurve>(tabulate_maximizer_curve(
            cfg.model, cfg.process, std::min(ic.z0, 1.0), std::max(ic.z0, 1.0)));
        std::vector<Candidate> candidates;
        if (default_family) {
            candidates.push_back(
                {"mrap_z0", ControlLaw{Mrap{s_bar(cfg.model, cfg.process, ic.z0)}}});
            candidates.push_back(
                {"mrap_z1", ControlLaw{Mrap{s_bar(cfg.model, cfg.process, z1)}}});
            candidates.push_back(
                {"mrap_1", ControlLaw{Mrap{s_bar(cfg.model, cfg.process, 1.0)}}});
            candidates.push_back({"mrap_curve", ControlLaw{MrapCurve{curve}}});
        } else {
            for (const LawSpec& spec : cfg.laws) {
                candidates.push_back({law_label(spec),
                                      build_law(spec, cfg.model, cfg.process, ic, cfg.sim.step)});
            }
        }

        {
            std::ofstream curve_csv(out_dir / ("maximizer_curve_" + ic_tag(k) + ".csv"));
            curve->write_csv(curve_csv);
        }

        std::vector<Trajectory> trajs(candidates.size());
        parallel_for(candidates.size(), effective_jobs(cfg), [&](size_t c) {
            SimOptions opts = sim_opts(cfg, 0.0, cfg.grids.T_max);
            for (double T : T_grid) opts.checkpoints.push_back(T);
            trajs[c] = simulate(cfg.model, cfg.process, candidates[c].law, xi, opts);
        });

        // time plots (state and open-loop control realization)
        SvgCanvas state_canvas(0.0, cfg.grids.T_max, 0.0, cfg.process.s_in * 1.02);
        state_canvas.set_labels("states under the candidate feedbacks, " + ic_tag(k), "t",
                                "s (dashed), x (solid)");
        SvgCanvas u_canvas(0.0, cfg.grids.T_max, 0.0, cfg.process.u_max * 1.05);
        u_canvas.set_labels("open-loop control realizations, " + ic_tag(k), "t", "u");
        std::vector<std::pair<std::string, std::string>> legend;
        for (size_t c = 0; c < candidates.size(); ++c) {
            const Trajectory& traj = trajs[c];
            std::ofstream traj_csv(out_dir /
                                   ("timeplot_" + ic_tag(k) + "_" + candidates[c].name + ".csv"));
            traj.write_csv(traj_csv, cfg.model, cfg.process);

            std::vector<std::pair<double, double>> s_pts, x_pts, u_pts;
            for (size_t i = 0; i < traj.size(); ++i) {
                s_pts.emplace_back(traj.t[i], traj.s[i]);
                x_pts.emplace_back(traj.t[i], (cfg.process.s_in - traj.s[i]) * traj.z[i]);
                u_pts.emplace_back(traj.t[i], traj.u[i]);
            }
            const std::string color = palette_color(static_cast<int>(c));
            state_canvas.polyline(s_pts, color, 1.5, true);
            state_canvas.polyline(x_pts, color, 1.5, false);
            u_canvas.polyline(u_pts, color, 1.5, false);
            legend.emplace_back(color, candidates[c].name);
        }
        state_canvas.legend(legend);
        u_canvas.legend(legend);
        state_canvas.save(out_dir / ("timeplot_" + ic_tag(k) + ".svg"));
        u_canvas.save(out_dir / ("controls_" + ic_tag(k) + ".svg"));

        // reward curves T -> J^T
        std::string header = "T";
        for (const Candidate& cand : candidates) header += ",J_" + cand.name;
        CsvWriter curves(out_dir / ("curves_" + ic_tag(k) + ".csv"), header);
        double J_max = 0.0;
        for (size_t i = 0; i < T_grid.size(); ++i) {
            std::vector<double> row{T_grid[i]};
            for (const Trajectory& traj : trajs) {
                row.push_back(traj.checkpoints[i].cum_phi_z / T_grid[i]);
                J_max = std::max(J_max, row.back());
            }
            curves.row(row);
        }
        SvgCanvas jcanvas(cfg.grids.T_min, cfg.grids.T_max, 0.0, 1.05 * J_max);
        jcanvas.set_labels("average reward vs final time, " + ic_tag(k), "T", "J^T");
        for (size_t c = 0; c < candidates.size(); ++c) {
            std::vector<std::pair<double, double>> pts;
            for (size_t i = 0; i < T_grid.size(); ++i) {
                pts.emplace_back(T_grid[i], trajs[c].checkpoints[i].cum_phi_z / T_grid[i]);
            }
            jcanvas.polyline(pts, palette_color(static_cast<int>(c)));
        }
        jcanvas.legend(legend);
        jcanvas.save(out_dir / ("curves_" + ic_tag(k) + ".svg"));

        // dominance summary for the curve feedback (reference family only)
        if (default_family) {
            int dominated = 0;
            for (size_t i = 0; i < T_grid.size(); ++i) {
                std::vector<double> others{trajs[0].checkpoints[i].cum_phi_z,
                                           trajs[1].checkpoints[i].cum_phi_z,
                                           trajs[2].checkpoints[i].cum_phi_z};
                std::sort(others.begin(), others.end());
                const double second_best = others[1];
                if (trajs[3].checkpoints[i].cum_phi_z < second_best * (1.0 - 0.01)) {
                    ++dominated;
                }
            }
            report.push_back(ic_tag(k) + ": curve feedback below second-best at " +
                             std::to_string(dominated) + "/" + std::to_string(T_grid.size()) +
                             " horizons (z1=" + format_num(z1) + ")");
        }
    }

    // difference maps over the initial-condition grid
    if (!cfg.grids.map_times.empty()) {
        const std::vector<double> x0s = linspace(cfg.grids.x0_min, cfg.grids.x0_max,
                                                 cfg.grids.x0_points);
        const std::vector<double> s0s = linspace(cfg.grids.s0_min, cfg.grids.s0_max,
                                                 cfg.grids.s0_points);
        std::vector<double> map_times = cfg.grids.map_times;
        std::sort(map_times.begin(), map_times.end());
        const double T_last = map_times.back();

        struct Cell {
            std::vector<double> J_1, J_z0;  // per map time
        };
        std::vector<Cell> cells(x0s.size() * s0s.size());
        const double sbar1 = s_bar(cfg.model, cfg.process, 1.0);
        parallel_for(cells.size(), effective_jobs(cfg), [&](size_t idx) {
            const double x0 = x0s[idx % x0s.size()];
            const double s0 = s0s[idx / x0s.size()];
            const double z0 = x0 / (cfg.process.s_in - s0);
            const StateSZ xi{s0, z0};
            SimOptions opts = sim_opts(cfg, 0.0, T_last);
            opts.checkpoints = map_times;
            const Trajectory t1 =
                simulate(cfg.model, cfg.process, ControlLaw{Mrap{sbar1}}, xi, opts);
            const Trajectory t0 = simulate(
                cfg.model, cfg.process,
                ControlLaw{Mrap{s_bar(cfg.model, cfg.process, z0)}}, xi, opts);
            for (size_t m = 0; m < map_times.size(); ++m) {
                cells[idx].J_1.push_back(t1.checkpoints[m].cum_phi_z);
                cells[idx].J_z0.push_back(t0.checkpoints[m].cum_phi_z);
            }
        });

        for (size_t m = 0; m < map_times.size(); ++m) {
            std::ostringstream name;
            name << "diffmap_T" << format_num(map_times[m]);
            CsvWriter csv(out_dir / (name.str() + ".csv"), "x0,s0,J_mrap_1,J_mrap_z0,diff");
            double max_abs = 0.0;
            for (size_t idx = 0; idx < cells.size(); ++idx) {
                max_abs = std::max(max_abs,
                                   std::abs(cells[idx].J_1[m] - cells[idx].J_z0[m]));
            }
            SvgCanvas canvas(cfg.grids.x0_min, cfg.grids.x0_max, cfg.grids.s0_min,
                             cfg.grids.s0_max);
            canvas.set_labels("J(mrap_1) - J(mrap_z0) at T=" + format_num(map_times[m]), "x0",
                              "s0");
            const double dx = x0s.size() > 1 ? x0s[1] - x0s[0] : 1.0;
            const double ds = s0s.size() > 1 ? s0s[1] - s0s[0] : 1.0;
            int sign_changes = 0;
            for (size_t idx = 0; idx < cells.size(); ++idx) {
                const double x0 = x0s[idx % x0s.size()];
                const double s0 = s0s[idx / x0s.size()];
                const double diff = cells[idx].J_1[m] - cells[idx].J_z0[m];
                csv.row({x0, s0, cells[idx].J_1[m], cells[idx].J_z0[m], diff});
                canvas.cell(x0 - 0.5 * dx, s0 - 0.5 * ds, dx, ds,
                            diverging_color(max_abs > 0 ? diff / max_abs : 0.0));
                if (diff < 0.0) ++sign_changes;
            }
            canvas.save(out_dir / (name.str() + ".svg"));
            report.push_back("diffmap T=" + format_num(map_times[m]) + ": " +
                             std::to_string(sign_changes) + "/" +
                             std::to_string(cells.size()) + " cells favor mrap_z0");
        }
    }

    write_lines(out_dir / "report.txt", report);
    std::cout << "compare-feedbacks: outputs in " << out_dir << "\n";
}

void cmd_value_surface(const ExperimentConfig& cfg, const fs::path& out_dir) {
    fs::create_directories(out_dir);
    const std::vector<double> x0s =
        linspace(cfg.grids.x0_min, cfg.grids.x0_max, cfg.grids.x0_points);
    const std::vector<double> s0s =
        linspace(cfg.grids.s0_min, cfg.grids.s0_max, cfg.grids.s0_points);
    const double z1 = cfg.value_surface_z1;
    const double sbar_z1 = s_bar(cfg.model, cfg.process, z1);

    std::vector<double> W(x0s.size() * s0s.size(), 0.0);
    parallel_for(W.size(), effective_jobs(cfg), [&](size_t idx) {
        const double x0 = x0s[idx % x0s.size()];
        const double s0 = s0s[idx / x0s.size()];
        const StateSZ xi{s0, x0 / (cfg.process.s_in - s0)};
        SimOptions opts = sim_opts(cfg, cfg.t0, cfg.T);
        opts.aux_z1 = {z1};
        const Trajectory traj =
            simulate(cfg.model, cfg.process, ControlLaw{Mrap{sbar_z1}}, xi, opts);
        W[idx] = traj.aux_integral(z1);
    });

    CsvWriter csv(out_dir / "value_surface.csv", "x0,s0,z0,W");
    double w_lo = W[0], w_hi = W[0];
    for (size_t idx = 0; idx < W.size(); ++idx) {
        const double x0 = x0s[idx % x0s.size()];
        const double s0 = s0s[idx / x0s.size()];
        csv.row({x0, s0, x0 / (cfg.process.s_in - s0), W[idx]});
        w_lo = std::min(w_lo, W[idx]);
        w_hi = std::max(w_hi, W[idx]);
    }

    SvgCanvas canvas(cfg.grids.x0_min, cfg.grids.x0_max, cfg.grids.s0_min, cfg.grids.s0_max);
    canvas.set_labels("auxiliary value W_z1, z1=" + format_num(z1) + ", " + cfg.model.name(),
                      "x0", "s0");
    const double dx = x0s.size() > 1 ? x0s[1] - x0s[0] : 1.0;
    const double ds = s0s.size() > 1 ? s0s[1] - s0s[0] : 1.0;
    for (size_t idx = 0; idx < W.size(); ++idx) {
        const double x0 = x0s[idx % x0s.size()];
        const double s0 = s0s[idx / x0s.size()];
        const double v = w_hi > w_lo ? (W[idx] - w_lo) / (w_hi - w_lo) : 0.0;
        canvas.cell(x0 - 0.5 * dx, s0 - 0.5 * ds, dx, ds, heat_color(v));
    }
    canvas.save(out_dir / "value_surface.svg");

    // biomass sensitivity: relative variation of W along x0 at fixed s0
    double worst_row_variation = 0.0;
    for (size_t r = 0; r < s0s.size(); ++r) {
        double lo = 1e300, hi = -1e300, mean = 0.0;
        for (size_t c = 0; c < x0s.size(); ++c) {
            const double v = W[r * x0s.size() + c];
            lo = std::min(lo, v);
            hi = std::max(hi, v);
            mean += v;
        }
        mean /= x0s.size();
        if (mean > 0) worst_row_variation = std::max(worst_row_variation, (hi - lo) / mean);
    }
    write_lines(out_dir / "report.txt",
                {"value-surface: model " + std::string(cfg.model.name()),
                 "W range [" + format_num(w_lo) + ", " + format_num(w_hi) + "]",
                 "worst relative variation along x0 at fixed s0: " +
                     format_num(worst_row_variation)});
    std::cout << "value-surface: " << W.size() << " cells in " << out_dir << "\n";
}

void cmd_appendix(const ExperimentConfig& cfg, const fs::path& out_dir) {
    fs::create_directories(out_dir);
    const double target = cfg.appendix.s_star > 0.0 ? cfg.appendix.s_star
                                                    : s_bar(cfg.model, cfg.process, 1.0);
    const AppendixAnalysis ap =
        appendix_schedule(cfg.model, cfg.process, cfg.appendix.eps, target, cfg.sim.step);

    std::vector<std::string> report;
    report.push_back("appendix schedule: eps=" + format_num(cfg.appendix.eps) +
                     ", s_star=" + format_num(target));
    report.push_back("t_up=" + format_num(ap.t_up) + ", t_down=" + format_num(ap.t_down) +
                     ", t_star=" + format_num(ap.t_star));
    report.push_back("I_star=" + format_num(ap.I_star) + ", I_eps=" + format_num(ap.I_eps));
    report.push_back("K_inf=" + format_num(ap.K_infinity) +
                     ", L_inf=" + format_num(ap.L_infinity));

    CsvWriter kn(out_dir / "appendix_kn.csv", "N,K_N,K_N_closed,L_N");
    double worst_identity = 0.0;
    for (int N = 1; N <= cfg.appendix.N_max; ++N) {
        const double K = ap.K_N(N);
        const double Kc = ap.K_N_closed(N);
        const double L = ap.L_N(N);
        kn.row({static_cast<double>(N), K, Kc, L});
        worst_identity = std::max(worst_identity, std::abs(K - Kc) / std::max(Kc, 1e-300));
    }
    report.push_back("worst |K_N - closed form| relative: " + format_num(worst_identity));

    // full open-loop integration up to 2^{2 traj_N + 1} t*
    if (cfg.appendix.traj_N > 0) {
        const int Nt = cfg.appendix.traj_N;
        const double horizon = std::ldexp(1.0, 2 * Nt + 1) * ap.t_star;
        SimOptions opts = sim_opts(cfg, 0.0, horizon);
        for (int N = 1; N <= Nt; ++N) {
            opts.checkpoints.push_back(std::ldexp(1.0, 2 * N) * ap.t_star);
            opts.checkpoints.push_back(std::ldexp(1.0, 2 * N + 1) * ap.t_star);
        }
        std::sort(opts.checkpoints.begin(), opts.checkpoints.end());
        const Trajectory traj = simulate(cfg.model, cfg.process, ControlLaw{ap.schedule},
                                         StateSZ{cfg.appendix.eps, 1.0}, opts);

        CsvWriter sim_csv(out_dir / "appendix_kn_sim.csv",
                          "N,K_N_sim,K_N,L_N_sim,L_N,rel_err_K,rel_err_L");
        double worst_sim = 0.0;
        for (int N = 1; N <= Nt; ++N) {
            const double TK = std::ldexp(1.0, 2 * N) * ap.t_star;
            const double TL = std::ldexp(1.0, 2 * N + 1) * ap.t_star;
            const double K_sim = traj.checkpoints[2 * (N - 1)].cum_phi_z / TK;
            const double L_sim = traj.checkpoints[2 * N - 1].cum_phi_z / TL;
            const double eK = std::abs(K_sim - ap.K_N(N)) / ap.K_N(N);
            const double eL = std::abs(L_sim - ap.L_N(N)) / ap.L_N(N);
            sim_csv.row({static_cast<double>(N), K_sim, ap.K_N(N), L_sim, ap.L_N(N), eK, eL});
            worst_sim = std::max({worst_sim, eK, eL});
        }
        report.push_back("worst simulated K_N/L_N relative error: " + format_num(worst_sim));

        std::ofstream traj_csv(out_dir / "appendix_traj.csv");
        traj.write_csv(traj_csv, cfg.model, cfg.process);

        // open-loop realization (t, u) across the integrated horizon
        CsvWriter sched(out_dir / "appendix_schedule.csv", "t,u");
        double t = 0.0;
        int guard = 0;
        while (t < horizon && guard++ < 100000) {
            const double nxt = std::min(next_switch_time(ControlLaw{ap.schedule}, t), horizon);
            sched.row({t, appendix_value(ap.schedule, 0.5 * (t + nxt))});
            t = nxt;
        }
        sched.row({horizon, appendix_value(ap.schedule, horizon)});
    }

    const bool split = ap.L_infinity > ap.K_infinity;
    report.push_back(std::string("verdict: L_inf ") + (split ? ">" : "<=") +
                     " K_inf, gap = " + format_num(ap.L_infinity - ap.K_infinity) +
                     " (expected (I_star - I_eps)/(3 t_star) = " +
                     format_num((ap.I_star - ap.I_eps) / (3.0 * ap.t_star)) + ")");
    write_lines(out_dir / "appendix_report.txt", report);
    std::cout << "appendix: L_inf - K_inf = " << ap.L_infinity - ap.K_infinity
              << " (liminf < limsup: " << (split ? "yes" : "NO") << ")\n";
}

int cmd_check(const ExperimentConfig& cfg, const fs::path& out_dir) {
    fs::create_directories(out_dir);
    std::vector<std::string> report;
    int failures = 0;
    auto check = [&](bool ok, const std::string& what) {
        report.push_back(std::string(ok ? "[ok]   " : "[FAIL] ") + what);
        if (!ok) ++failures;
    };

    // model assumptions over the hull of the initial conditions
    double z_lo = 1.0, z_hi = 1.0;
    for (const auto& ic : cfg.initial_conditions) {
        z_lo = std::min(z_lo, ic.z0);
        z_hi = std::max(z_hi, ic.z0);
    }
    const StateBox box{0.0, cfg.process.s_in, z_lo, z_hi};
    const AssumptionReport rep = check_assumptions(cfg.model, cfg.process, box);
    for (const auto& c : rep.checks) {
        check(c.pass, "assumption " + c.name +
                          (c.pass ? "" : " (worst " + format_num(c.worst) + ")"));
    }
    if (!rep.pass()) {
        write_lines(out_dir / "check_report.txt", report);
        for (const auto& l : report) std::cout << l << "\n";
        return failures;
    }

    // controllability per initial condition
    for (size_t k = 0; k < cfg.initial_conditions.size(); ++k) {
        const auto& ic = cfg.initial_conditions[k];
        const ControllabilityReport cr =
            check_controllability(cfg.model, cfg.process, StateSZ{ic.s0, ic.z0});
        check(cr.ok, ic_tag(k) + " controllability margin " + format_num(cr.margin));
    }

    // stationarity of the maximizer at representative z
    for (double z : {z_lo, 1.0, z_hi}) {
        const double sb = s_bar(cfg.model, cfg.process, z);
        const double d = 1e-5 * cfg.process.s_in;
        const double slope = (phi(cfg.model, cfg.process, sb + d, z) -
                              phi(cfg.model, cfg.process, sb - d, z)) /
                             (2.0 * d);
        check(std::abs(slope) < 1e-6, "maximizer stationarity at z=" + format_num(z) +
                                          " (dphi/ds = " + format_num(slope) + ")");
    }

    // invariant suite per (initial condition, law)
    std::vector<LawSpec> laws = cfg.laws;
    if (laws.empty()) {
        LawSpec def;
        def.type = LawType::MrapZ1;
        def.z1 = 1.0;
        laws.push_back(def);
    }
    for (size_t k = 0; k < cfg.initial_conditions.size(); ++k) {
        const auto& ic = cfg.initial_conditions[k];
        const StateSZ xi{ic.s0, ic.z0};
        for (const LawSpec& spec : laws) {
            const std::string tag = ic_tag(k) + " " + law_label(spec);
            try {
                const ControlLaw law = build_law(spec, cfg.model, cfg.process, ic, cfg.sim.step);
                const Trajectory traj =
                    simulate(cfg.model, cfg.process, law, xi, sim_opts(cfg, cfg.t0, cfg.T));
                check(traj.max_box_violation <= 1e-7,
                      tag + " invariant box (violation " +
                          format_num(traj.max_box_violation) + ")");
                check(traj.worst_z_backstep <= 1e-9,
                      tag + " z monotone toward 1 (backstep " +
                          format_num(traj.worst_z_backstep) + ")");
                double worst_oracle = 0.0;
                for (size_t i = 0; i < traj.size(); ++i) {
                    const double em = std::exp(-traj.cum_mu[i]);
                    const double z_pred = ic.z0 / (ic.z0 + (1.0 - ic.z0) * em);
                    worst_oracle = std::max(worst_oracle, std::abs(traj.z[i] - z_pred));
                }
                check(worst_oracle <= 1e-6,
                      tag + " closed-form z oracle (worst " + format_num(worst_oracle) + ")");
                bool u_ok = true;
                for (double uv : traj.u) {
                    u_ok = u_ok && uv >= 0.0 && uv <= cfg.process.u_max + 1e-12;
                }
                check(u_ok, tag + " admissible controls");
            } catch (const std::exception& e) {
                check(false, tag + " simulation: " + e.what());
            }
        }
    }

    // value frames and the exhaustive oracle on a small schedule family
    CsvWriter frames(out_dir / "frames.csv", "z1,W,lower,J_feedback,upper,gap_bound");
    CsvWriter oracle(out_dir / "oracle.csv", "ic,z1,bf_value,upper_bound,u0,u1,u2,u3");
    for (size_t k = 0; k < cfg.initial_conditions.size(); ++k) {
        const auto& ic = cfg.initial_conditions[k];
        const StateSZ xi{ic.s0, ic.z0};
        const double horizon = std::min(cfg.T, 5.0);
        for (double z1 : {std::min(ic.z0, 1.0), 0.5 * (ic.z0 + 1.0), std::max(ic.z0, 1.0)}) {
            try {
                const SubOptFrame fr = value_frame(cfg.model, cfg.process, xi, z1, 0.0,
                                                   horizon, sim_opts(cfg, 0.0, horizon));
                frames.row({fr.z1, fr.W, fr.lower, fr.J_feedback, fr.upper, fr.gap_bound});
                check(true, ic_tag(k) + " frame holds at z1=" + format_num(z1));
            } catch (const std::exception& e) {
                check(false, ic_tag(k) + " frame at z1=" + format_num(z1) + ": " + e.what());
            }
        }
        try {
            const double z1 = 0.5 * (ic.z0 + 1.0);
            const SubOptFrame fr = value_frame(cfg.model, cfg.process, xi, z1, 0.0, horizon,
                                               sim_opts(cfg, 0.0, horizon));
            const BruteForceResult bf = brute_force_value(
                cfg.model, cfg.process, xi, 0.0, horizon, 4, {0.0, cfg.process.u_max},
                FiniteHorizon{}, sim_opts(cfg, 0.0, horizon), effective_jobs(cfg));
            oracle.row({static_cast<double>(k), z1, bf.value, fr.upper, bf.schedule[0],
                        bf.schedule[1], bf.schedule[2], bf.schedule[3]});
            check(bf.value <= fr.upper * (1.0 + 1e-3),
                  ic_tag(k) + " exhaustive oracle below the upper frame bound");
        } catch (const std::exception& e) {
            check(false, ic_tag(k) + " oracle: " + e.what());
        }
    }

    write_lines(out_dir / "check_report.txt", report);
    for (const auto& l : report) std::cout << l << "\n";
    std::cout << (failures == 0 ? "check: all passed" : "check: FAILURES " +
                                                            std::to_string(failures))
              << "\n";
    return failures;
}

}  // namespace biogas
