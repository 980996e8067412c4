#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

#include "json.hpp"

#include "nlo/experiment.hpp"
#include "nlo/solve.hpp"

using namespace nlo;
using nlohmann::json;

namespace {

// exterior data must be nonzero where the exterior nodes actually sit
// (|x| >= omega_radius), or the minimizer collapses to zero
json base_minimize() {
    return {{"task", "minimize"},
            {"growth", {{"family", "power"}, {"p", 2.0}}},
            {"grid", {{"dim", 1}, {"h", 0.25}, {"omega_radius", 1.0}, {"R_infinity", 4.0}}},
            {"s", 0.5},
            {"exterior", "max(0, 2 - abs(x))"},
            {"seed", 1}};
}

// holder/dg geometry: B_{8R}(0) inside the working set, radii clear the 3h floor
json base_holder() {
    return {{"task", "holder"},
            {"growth", {{"family", "power"}, {"p", 2.0}}},
            {"grid",
             {{"dim", 1}, {"h", 0.03125}, {"omega_radius", 2.25}, {"R_infinity", 9.0}}},
            {"s", 0.6},
            {"exterior", "max(0, 4 - abs(x))"},
            {"seed", 1},
            {"x0", {0.0}},
            {"R", 0.25},
            {"dg", {{"count", 6}}}};
}

json base_bound() {
    json j = base_minimize();
    j["task"] = "bound";
    j["s"] = 0.4; // s p < d and q < p* both hold for the quadratic growth
    j["x0"] = {0.0};
    j["R"] = 0.5;
    j["deltas"] = {0.5, 0.25, 0.125};
    return j;
}

int lines_of(const std::string& text) {
    int n = 0;
    for (char ch : text) n += ch == '\n';
    return n;
}

json report_of(const RunOutput& out) {
    REQUIRE(out.files.count("report.json") == 1);
    return json::parse(out.files.at("report.json"));
}

} // namespace

TEST_CASE("growth-check recovers the declared exponents") {
    json cfg = {{"task", "growth-check"},
                {"growth", {{"family", "power"}, {"p", 2.0}}},
                {"t_count", 64},
                {"seed", 1}};
    const RunOutput out = run_experiment(cfg);
    REQUIRE(out.exit_code == 0);
    const json rep = report_of(out);
    CHECK(rep.at("task") == "growth-check");
    CHECK(rep.at("config") == cfg);
    const json& res = rep.at("results");
    CHECK(res.at("p_est").get<double>() == doctest::Approx(2.0).epsilon(1e-8));
    CHECK(res.at("q_est").get<double>() == doctest::Approx(2.0).epsilon(1e-8));
    CHECK(res.at("all_pass").get<bool>());
    CHECK(res.at("checks").size() >= 10);

    REQUIRE(out.files.count("growth_checks.csv") == 1);
    const std::string& csv = out.files.at("growth_checks.csv");
    CHECK(lines_of(csv) == static_cast<int>(res.at("checks").size()) + 1);
    CHECK(csv.rfind("name,pass,worst\n", 0) == 0);
    CHECK(csv.find(",0,") == std::string::npos); // no failed rows
}

TEST_CASE("minimize run matches the direct library call") {
    const json cfg = base_minimize();
    const RunOutput out = run_experiment(cfg);
    REQUIRE(out.exit_code == 0);
    const json rep = report_of(out);
    REQUIRE(rep.at("results").size() == 1);
    const json& row = rep.at("results").at(0);
    CHECK(row.at("s").get<double>() == 0.5);
    CHECK(row.at("iterations").get<int>() >= 1);
    CHECK(row.at("residual_norm").get<double>() <= 1e-7);
    CHECK_FALSE(row.contains("wall_time"));

    auto dom = std::make_shared<GridDomain>(build_grid(1, 0.25, 1.0, 4.0));
    const Expression e = parse_expression("max(0, 2 - abs(x))");
    const GridFunction ext(dom, [&e](Point p) { return e(p); });
    const MinimizeResult direct =
        minimize(GrowthFunction::power(2.0), KernelCoefficient::one(), ext, ext, 0.5);

    REQUIRE(out.files.count("solution.csv") == 1);
    const GridFunction written = from_csv(dom, out.files.at("solution.csv"));
    for (int i = 0; i < dom->size(); ++i) CHECK(written[i] == direct.u[i]);
    CHECK(row.at("final_energy").get<double>() == direct.report.final_energy);
}

TEST_CASE("configuration rejections exit 2 without files") {
    auto rejects = [](json cfg, const std::string& needle) {
        const RunOutput out = run_experiment(cfg);
        CHECK(out.exit_code == 2);
        CHECK(out.files.empty());
        INFO("message: ", out.message);
        CHECK(out.message.find(needle) != std::string::npos);
    };

    json cfg = base_minimize();
    cfg.erase("s");
    rejects(cfg, "'s'");

    cfg = base_minimize();
    cfg["task"] = "solve-everything";
    rejects(cfg, "unknown task");

    cfg = base_minimize();
    cfg.erase("growth");
    rejects(cfg, "growth");

    cfg = base_minimize();
    cfg["exterior"] = "1+";
    rejects(cfg, "expression");

    cfg = base_minimize();
    cfg["seed"] = -3;
    rejects(cfg, "seed");

    cfg = base_minimize();
    cfg["grd"] = 1;
    rejects(cfg, "unknown key");

    cfg = base_minimize();
    cfg["s"] = 1.5;
    rejects(cfg, "outside");

    cfg = base_minimize();
    cfg["s"] = {0.5, 0.5};
    rejects(cfg, "distinct");

    cfg = base_bound();
    cfg.erase("deltas");
    rejects(cfg, "deltas");

    cfg = base_bound();
    cfg["deltas"] = {0.5, 1.5};
    rejects(cfg, "delta");

    cfg = base_holder();
    cfg["x0"] = {0.26};
    rejects(cfg, "x0");

    cfg = base_minimize();
    cfg["grid"]["R_infinity"] = 2.0;
    rejects(cfg, "R_infinity");
}

TEST_CASE("numeric failure exits 3 and keeps a partial report") {
    json cfg = base_minimize();
    cfg["exterior"] = "1/0 + 0*x";
    const RunOutput out = run_experiment(cfg);
    CHECK(out.exit_code == 3);
    CHECK_FALSE(out.message.empty());
    const json rep = report_of(out);
    CHECK(rep.contains("error"));
    CHECK(rep.at("results").is_array());
}

TEST_CASE("dg-check pipeline is deterministic in the seed") {
    json cfg = base_minimize();
    cfg["task"] = "dg-check";
    cfg["grid"]["h"] = 0.125;
    cfg["dg"] = {{"count", 8}};
    cfg["seed"] = 5;

    const RunOutput a = run_experiment(cfg);
    REQUIRE(a.exit_code == 0);
    const json rep = report_of(a);
    REQUIRE(rep.at("results").size() == 1);
    const json& row = rep.at("results").at(0);
    CHECK(row.at("samples").get<int>() == 8);
    CHECK(row.at("c_empirical").get<double>() >= 0.0);
    CHECK(std::isfinite(row.at("c_empirical").get<double>()));
    CHECK_FALSE(row.at("any_unbounded").get<bool>());
    REQUIRE(a.files.count("dg_samples.csv") == 1);
    CHECK(lines_of(a.files.at("dg_samples.csv")) == 9);

    const RunOutput b = run_experiment(cfg);
    CHECK(a.files == b.files); // byte-identical rerun

    cfg["seed"] = 6;
    const RunOutput c = run_experiment(cfg);
    REQUIRE(c.exit_code == 0);
    CHECK(c.files.at("dg_samples.csv") != a.files.at("dg_samples.csv"));
}

TEST_CASE("holder pipeline produces the fitted bound") {
    const RunOutput out = run_experiment(base_holder());
    REQUIRE(out.exit_code == 0);
    const json rep = report_of(out);
    REQUIRE(rep.at("results").size() == 1);
    const json& row = rep.at("results").at(0);
    CHECK(row.at("holds").get<bool>());
    const double alpha = row.at("alpha_hat").get<double>();
    CHECK(alpha > 0.0);
    CHECK(alpha <= 1.0);
    CHECK(row.at("c_empirical").get<double>() >= 0.0);
    CHECK(row.at("sup_norm").get<double>() > 0.0);
    CHECK(row.at("solve").at("iterations").get<int>() >= 1);

    REQUIRE(out.files.count("holder_summary.csv") == 1);
    const std::string& summary = out.files.at("holder_summary.csv");
    CHECK(lines_of(summary) == 2);
    CHECK(summary.rfind("s,alpha_hat,c_fit,lhs,sup_norm,tail,holds\n", 0) == 0);
    CHECK(summary.substr(summary.size() - 2) == "1\n"); // holds column

    REQUIRE(out.files.count("osc_decay.csv") == 1);
    CHECK(lines_of(out.files.at("osc_decay.csv")) == 5);
}

TEST_CASE("bound pipeline emits one row per delta") {
    const RunOutput out = run_experiment(base_bound());
    REQUIRE(out.exit_code == 0);
    const json rep = report_of(out);
    const json& row = rep.at("results").at(0);
    CHECK(row.at("p_star").get<double>() == doctest::Approx(10.0));
    CHECK(std::isfinite(row.at("c_run").get<double>()));
    REQUIRE(row.at("checks").size() == 3);
    for (const auto& ck : row.at("checks"))
        CHECK(ck.at("rhs").get<double>() >=
              ck.at("lhs").get<double>() - 1e-12 * (1.0 + std::abs(ck.at("lhs").get<double>())));

    REQUIRE(out.files.count("bound_table.csv") == 1);
    const std::string& csv = out.files.at("bound_table.csv");
    CHECK(lines_of(csv) == 4);
    CHECK(csv.rfind("delta,lhs,rhs,c_fit\n", 0) == 0);
}

TEST_CASE("inequalities pipeline reports the embedding and level-set checks") {
    json cfg = {{"task", "inequalities"},
                {"grid", {{"dim", 1}, {"h", 0.0625}, {"omega_radius", 1.0}, {"R_infinity", 4.0}}},
                {"s", 0.4},
                {"exterior", "max(0, 1 - abs(x)/0.5)"},
                {"p", 2.0},
                {"R", 0.5},
                {"levels", {0.25, 0.75}},
                {"seed", 1}};
    const RunOutput out = run_experiment(cfg);
    REQUIRE(out.exit_code == 0);
    const json rep = report_of(out);
    const json& row = rep.at("results").at(0);
    CHECK(row.at("embedding").at("ratio").get<double>() > 0.0);
    CHECK(row.contains("isoperimetric"));
    CHECK(row.at("isoperimetric").at("measure_low").get<double>() > 0.0);

    REQUIRE(out.files.count("inequalities.csv") == 1);
    CHECK(lines_of(out.files.at("inequalities.csv")) == 3);
}

TEST_CASE("s sweep over the holder task merges one summary row per value") {
    json cfg = base_holder();
    cfg["sweep"] = {{"parameter", "s"}, {"values", {0.6, 0.7}}};

    const RunOutput two = run_sweep(cfg, 2);
    REQUIRE(two.exit_code == 0);
    REQUIRE(two.files.count("sweep.csv") == 1);
    const std::string& csv = two.files.at("sweep.csv");
    CHECK(lines_of(csv) == 3);
    CHECK(csv.rfind("s,alpha_hat,c_fit,status\n", 0) == 0);
    CHECK(csv.find(",error") == std::string::npos);

    const json rep = json::parse(two.files.at("report.json"));
    CHECK(rep.at("parameter") == "s");
    CHECK(rep.at("base_task") == "holder");
    REQUIRE(rep.at("rows").size() == 2);
    for (const auto& row : rep.at("rows")) {
        CHECK(row.at("status") == "ok");
        CHECK(row.at("exit_code").get<int>() == 0);
        CHECK(row.at("report").at("results").at(0).at("holds").get<bool>());
    }
}

TEST_CASE("delta sweep over the bound task ignores the worker count") {
    json cfg = base_bound();
    cfg["sweep"] = {{"parameter", "delta"}, {"values", {0.5, 0.25, 0.125}}};
    const RunOutput out = run_sweep(cfg, 2);
    REQUIRE(out.exit_code == 0);
    const std::string& csv = out.files.at("sweep.csv");
    CHECK(lines_of(csv) == 4);
    CHECK(csv.rfind("delta,lhs,rhs,c_fit,status\n", 0) == 0);
    const json rep = json::parse(out.files.at("report.json"));
    for (const auto& row : rep.at("rows")) CHECK(row.at("status") == "ok");

    // fan-out width cannot show up in the merged bytes
    const RunOutput one = run_sweep(cfg, 1);
    CHECK(one.files == out.files);
    const RunOutput five = run_sweep(cfg, 5);
    CHECK(five.files == out.files);
}

TEST_CASE("s sweep over the minimize task carries the solver summary") {
    json cfg = base_minimize();
    cfg["sweep"] = {{"parameter", "s"}, {"values", {0.35, 0.45, 0.55}}};
    const RunOutput three = run_sweep(cfg, 3);
    REQUIRE(three.exit_code == 0);
    const std::string& csv = three.files.at("sweep.csv");
    CHECK(lines_of(csv) == 4);
    CHECK(csv.rfind("s,iterations,final_energy,residual_norm,status\n", 0) == 0);
    CHECK(csv.find(",error") == std::string::npos);
    const RunOutput one = run_sweep(cfg, 1);
    CHECK(one.files == three.files);
}

TEST_CASE("sweep envelope validation") {
    auto rejects = [](const json& cfg, const std::string& needle) {
        const RunOutput out = run_sweep(cfg, 1);
        CHECK(out.exit_code == 2);
        CHECK(out.files.empty());
        INFO("message: ", out.message);
        CHECK(out.message.find(needle) != std::string::npos);
    };

    json cfg = base_bound();
    cfg["sweep"] = {{"parameter", "delta"}, {"values", json::array()}};
    rejects(cfg, "empty");

    cfg["sweep"] = {{"parameter", "tolerance"}, {"values", {1.0}}};
    rejects(cfg, "parameter");

    cfg = base_minimize();
    cfg["sweep"] = {{"parameter", "delta"}, {"values", {0.5}}};
    rejects(cfg, "bound");

    cfg = base_minimize();
    cfg["sweep"] = {{"parameter", "q"}, {"values", {3.0}}};
    rejects(cfg, "sum");

    cfg = base_minimize();
    cfg.erase("sweep");
    rejects(cfg, "sweep");
}

TEST_CASE("sweep keeps going past a failing sub-run") {
    json cfg = base_minimize();
    cfg["sweep"] = {{"parameter", "s"}, {"values", {0.5, 1.5}}};
    const RunOutput out = run_sweep(cfg, 1);
    REQUIRE(out.exit_code == 0);
    const std::string& csv = out.files.at("sweep.csv");
    CHECK(lines_of(csv) == 3);
    CHECK(csv.find("1.5,,,,error\n") != std::string::npos);
    const json rep = json::parse(out.files.at("report.json"));
    CHECK(rep.at("rows").at(0).at("status") == "ok");
    CHECK(rep.at("rows").at(1).at("status") == "error");
    CHECK(rep.at("rows").at(1).at("exit_code").get<int>() == 2);
    CHECK(rep.at("rows").at(1).at("message").get<std::string>().find("outside") !=
          std::string::npos);
}

TEST_CASE("growth p sweep re-parameterizes the family") {
    json cfg = {{"task", "growth-check"},
                {"growth", {{"family", "power"}, {"p", 2.0}}},
                {"t_count", 48},
                {"seed", 1},
                {"sweep", {{"parameter", "p"}, {"values", {2.0, 3.0}}}}};
    const RunOutput out = run_sweep(cfg, 1);
    REQUIRE(out.exit_code == 0);
    const json rep = json::parse(out.files.at("report.json"));
    REQUIRE(rep.at("rows").size() == 2);
    for (const auto& row : rep.at("rows")) {
        CHECK(row.at("status") == "ok");
        const json& res = row.at("report").at("results");
        CHECK(res.at("p_est").get<double>() ==
              doctest::Approx(row.at("value").get<double>()).epsilon(1e-8));
    }
}

TEST_CASE("write_outputs lands every file on disk") {
    namespace fs = std::filesystem;
    json cfg = {{"task", "growth-check"},
                {"growth", {{"family", "power"}, {"p", 2.0}}},
                {"t_count", 32},
                {"seed", 1}};
    const RunOutput out = run_experiment(cfg);
    REQUIRE(out.exit_code == 0);

    const fs::path dir = fs::path("test_out_experiment");
    fs::remove_all(dir);
    write_outputs(out, dir.string());
    for (const auto& [rel, content] : out.files) {
        std::ifstream f(dir / rel, std::ios::binary);
        REQUIRE(f.good());
        std::ostringstream buf;
        buf << f.rdbuf();
        CHECK(buf.str() == content);
    }
    fs::remove_all(dir);
}
