#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "biogas/config.hpp"
#include "biogas/experiments.hpp"
#include "biogas/svg.hpp"

using namespace biogas;
namespace fs = std::filesystem;

namespace {
std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}
}  // namespace

TEST_CASE("config: full document round-trips into the expected structs") {
    const std::string text = R"({
        "model": {"kind": "contois", "mu_max": 0.74, "K_s": 1.0},
        "process": {"s_in": 100.0, "u_max": 1.5},
        "initial_conditions": [
            {"s0": 20.0, "x0": 20.0},
            {"s0": 60.0, "z0": 1.75, "z1": 1.2}
        ],
        "laws": [
            {"type": "constant", "u": 0.5},
            {"type": "mrap", "z1": 1.0},
            {"type": "mrap", "s_star": 30.0},
            {"type": "mrap_z0"},
            {"type": "mrap_curve"},
            {"type": "piecewise", "times": [0, 1], "values": [0, 1.5]},
            {"type": "appendix", "eps": 4.0, "s_star": 40.0}
        ],
        "horizon": {"t0": 0.0, "T": 6.0},
        "integrator": {"step": 0.002, "method": "rk4", "thin": 5},
        "grids": {"z1_points": 31, "T_points": 12, "T_min": 0.5, "T_max": 6.0},
        "appendix": {"eps": 5.0, "N_max": 8, "traj_N": 3},
        "output_dir": "outdir",
        "jobs": 2,
        "seedless": true
    })";
    const ExperimentConfig cfg = parse_config(text);
    CHECK(cfg.model.kind == GrowthKind::Contois);
    CHECK(cfg.process.u_max == 1.5);
    REQUIRE(cfg.initial_conditions.size() == 2);
    CHECK(cfg.initial_conditions[0].z0 == doctest::Approx(0.25));
    CHECK(cfg.initial_conditions[1].z1.value() == doctest::Approx(1.2));
    REQUIRE(cfg.laws.size() == 7);
    CHECK(cfg.laws[1].type == LawType::MrapZ1);
    CHECK(cfg.laws[2].type == LawType::MrapLevel);
    CHECK(cfg.sim.step == 0.002);
    CHECK(cfg.sim.thin == 5);
    CHECK(cfg.grids.z1_points == 31);
    CHECK(cfg.appendix.N_max == 8);
    CHECK(cfg.output_dir == "outdir");
    CHECK(cfg.jobs == 2);
}

TEST_CASE("config: malformed documents name the offending key") {
    auto message_of = [](const std::string& text) {
        try {
            parse_config(text);
        } catch (const config_error& e) {
            return std::string(e.what());
        }
        return std::string("(no error)");
    };

    CHECK(message_of(R"({"modle": {}})").find("modle") != std::string::npos);
    CHECK(message_of(R"({"model": {"kind": "exponential"}})").find("model.kind") !=
          std::string::npos);
    CHECK(message_of(R"({"process": {"s_in": -1, "u_max": 1}})").find("s_in") !=
          std::string::npos);
    CHECK(message_of(R"({"initial_conditions": [{"s0": 20}]})").find("x0 or z0") !=
          std::string::npos);
    CHECK(message_of(R"({"initial_conditions": [{"s0": 200, "x0": 5}]})").find("s0") !=
          std::string::npos);
    CHECK(message_of(R"({"laws": [{"type": "warp"}]})").find("warp") != std::string::npos);
    CHECK(message_of(R"({"horizon": {"T": -5}})").find("horizon.T") != std::string::npos);
    CHECK(message_of(R"({"integrator": {"step": 0}})").find("integrator.step") !=
          std::string::npos);
    CHECK(message_of("not json at all").find("parse error") != std::string::npos);
}

TEST_CASE("config: defaults exist for every command") {
    for (const char* cmd : {"phase-portrait", "reward-surface", "compare-feedbacks",
                            "value-surface", "appendix", "check"}) {
        const ExperimentConfig cfg = default_config(cmd);
        CHECK(cfg.process.s_in == 100.0);
    }
    CHECK_THROWS_AS(default_config("unknown"), config_error);
}

TEST_CASE("config: shipped files parse and match their commands") {
    const fs::path dir = fs::path(TEST_SOURCE_DIR) / ".." / "configs";
    REQUIRE(fs::exists(dir));
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.path().extension() != ".json") continue;
        CAPTURE(entry.path().string());
        CHECK_NOTHROW(load_config(entry.path()));
    }
}

TEST_CASE("experiments: the default portrait drives every start to the maximizer") {
    ExperimentConfig cfg = default_config("phase-portrait");
    cfg.T = 60.0;
    const fs::path out = fs::temp_directory_path() / "biogas_cfg_portrait";
    fs::remove_all(out);
    cmd_phase_portrait(cfg, out);

    // all runs end near (s_bar, s_in - s_bar): the root of the stationarity
    // quadratic s^2 (1 + s_in/K_i) + 2 K_s s - s_in K_s = 0
    const double a = 1.0 + 100.0 / 256.0, b = 2.0 * 9.28, c = -100.0 * 9.28;
    const double sb = (-b + std::sqrt(b * b - 4.0 * a * c)) / (2.0 * a);
    const std::string report = slurp(out / "report.txt");
    size_t finals = 0;
    std::istringstream lines(report);
    std::string line;
    while (std::getline(lines, line)) {
        const size_t at = line.find("final (s,z) = (");
        if (at == std::string::npos) continue;
        const double s_final = std::stod(line.substr(at + 15));
        CHECK(std::abs(s_final - sb) < 1e-3);
        ++finals;
    }
    CHECK(finals == 12);
    fs::remove_all(out);
}

TEST_CASE("experiments: deterministic reruns produce identical CSV bytes") {
    ExperimentConfig cfg = default_config("reward-surface");
    cfg.initial_conditions.resize(1);
    cfg.grids.z1_points = 7;
    cfg.grids.T_points = 4;
    cfg.jobs = 2;

    const fs::path out_a = fs::temp_directory_path() / "biogas_cfg_a";
    const fs::path out_b = fs::temp_directory_path() / "biogas_cfg_b";
    fs::remove_all(out_a);
    fs::remove_all(out_b);
    cmd_reward_surface(cfg, out_a);
    cfg.jobs = 1;  // worker count must not affect the bytes
    cmd_reward_surface(cfg, out_b);

    CHECK(slurp(out_a / "surface_ic0.csv") == slurp(out_b / "surface_ic0.csv"));
    CHECK(!slurp(out_a / "surface_ic0.csv").empty());
    fs::remove_all(out_a);
    fs::remove_all(out_b);
}

TEST_CASE("experiments: empty initial-condition list writes nothing") {
    ExperimentConfig cfg = default_config("phase-portrait");
    cfg.initial_conditions.clear();
    const fs::path out = fs::temp_directory_path() / "biogas_cfg_empty";
    fs::remove_all(out);
    cmd_phase_portrait(cfg, out);
    CHECK_FALSE(fs::exists(out));
}

TEST_CASE("experiments: check fails loudly when the dilution bound is tiny") {
    ExperimentConfig cfg = default_config("check");
    cfg.process.u_max = 0.1;  // controllability impossible for the Contois box
    cfg.T = 5.0;
    const fs::path out = fs::temp_directory_path() / "biogas_cfg_badcheck";
    fs::remove_all(out);
    const int failures = cmd_check(cfg, out);
    CHECK(failures > 0);
    // margin report lands in the written check report
    std::ifstream in(out / "check_report.txt");
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(ss.str().find("controllability margin") != std::string::npos);
    CHECK(ss.str().find("[FAIL]") != std::string::npos);
    fs::remove_all(out);
}

TEST_CASE("svg canvas: writes well-formed drawings") {
    SvgCanvas canvas(0.0, 10.0, 0.0, 5.0);
    canvas.set_labels("demo", "x", "y");
    canvas.polyline({{0.0, 0.0}, {5.0, 2.5}, {10.0, 1.0}}, palette_color(0));
    canvas.line(0.0, 5.0, 10.0, 0.0, "#000", 2.0, true);
    canvas.cell(2.0, 2.0, 1.0, 1.0, heat_color(0.5));
    canvas.cell(3.0, 2.0, 1.0, 1.0, diverging_color(-0.7));
    canvas.marker(5.0, 2.5, palette_color(1));
    canvas.text(1.0, 4.5, "label");
    canvas.legend({{palette_color(0), "series"}});
    const fs::path out = fs::temp_directory_path() / "biogas_svg_smoke.svg";
    canvas.save(out);
    const std::string text = slurp(out);
    CHECK(text.rfind("<svg", 0) == 0);
    CHECK(text.find("</svg>") != std::string::npos);
    CHECK(text.find("polyline") != std::string::npos);
    CHECK(text.find("NaN") == std::string::npos);
    fs::remove(out);
}

TEST_CASE("experiments: a single-law compare config plots one curve") {
    ExperimentConfig cfg = default_config("compare-feedbacks");
    cfg.initial_conditions = {cfg.initial_conditions[1]};
    LawSpec only;
    only.type = LawType::MrapZ1;
    only.z1 = 1.0;
    cfg.laws = {only};
    cfg.grids.T_points = 4;
    cfg.grids.map_times.clear();  // skip the difference maps
    const fs::path out = fs::temp_directory_path() / "biogas_cfg_single";
    fs::remove_all(out);
    cmd_compare_feedbacks(cfg, out);
    std::ifstream in(out / "curves_ic0.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "T,J_mrap_z1_1");
    fs::remove_all(out);
}
