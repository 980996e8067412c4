#include "nlo/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <thread>

#include "nlo/degiorgi.hpp"
#include "nlo/energy.hpp"
#include "nlo/errors.hpp"
#include "nlo/regularity.hpp"
#include "nlo/solve.hpp"

namespace nlo {

using nlohmann::json;

namespace {

const std::vector<std::string> kTasks = {"growth-check", "minimize", "dg-check",
                                         "holder",       "bound",    "inequalities"};

bool known_task(const std::string& t) {
    return std::find(kTasks.begin(), kTasks.end(), t) != kTasks.end();
}

[[noreturn]] void bad(const std::string& why) { throw config_error("config: " + why); }

double need_number(const json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key)) bad(where + " needs '" + key + "'");
    if (!j.at(key).is_number()) bad(where + "." + key + " must be a number");
    return j.at(key).get<double>();
}

double opt_number(const json& j, const std::string& key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number()) bad("'" + key + "' must be a number");
    return j.at(key).get<double>();
}

std::vector<double> number_list(const json& v, const std::string& key) {
    std::vector<double> out;
    if (v.is_number()) {
        out.push_back(v.get<double>());
    } else if (v.is_array()) {
        for (const auto& e : v) {
            if (!e.is_number()) bad("'" + key + "' entries must be numbers");
            out.push_back(e.get<double>());
        }
    } else {
        bad("'" + key + "' must be a number or an array of numbers");
    }
    return out;
}

} // namespace

ExperimentConfig config_from_json(const json& j) {
    if (!j.is_object()) bad("top level must be an object");

    static const std::vector<std::string> known_keys = {
        "task",   "growth", "kernel",  "structure", "grid",   "s",     "s_min",
        "exterior", "seed", "tolerance", "x0",      "R",      "deltas", "dg",
        "t_range", "t_count", "p",     "levels",    "gamma",  "gamma0", "C0",
        "sweep"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (std::find(known_keys.begin(), known_keys.end(), it.key()) == known_keys.end())
            bad("unknown key '" + it.key() + "'");

    ExperimentConfig c;
    if (!j.contains("task") || !j.at("task").is_string()) bad("'task' (string) is required");
    c.task = j.at("task").get<std::string>();
    if (!known_task(c.task)) bad("unknown task '" + c.task + "'");

    const bool needs_grid = c.task != "growth-check";
    const bool needs_growth = c.task != "inequalities";
    const bool needs_exterior = c.task != "growth-check";
    const bool needs_x0 = c.task == "holder" || c.task == "bound";
    const bool needs_R = c.task == "holder" || c.task == "bound" || c.task == "inequalities";

    if (j.contains("growth")) {
        try {
            c.growth = growth_from_json(j.at("growth"));
        } catch (const config_error&) {
            throw;
        } catch (const std::exception& e) {
            bad(std::string("growth block: ") + e.what());
        }
        c.has_growth = true;
    } else if (needs_growth) {
        bad("task '" + c.task + "' needs a 'growth' block");
    }

    if (j.contains("kernel")) {
        if (!j.at("kernel").is_string()) bad("'kernel' must be a string");
        c.kernel_text = j.at("kernel").get<std::string>();
    }
    if (j.contains("structure")) {
        const auto& st = j.at("structure");
        if (!st.is_object()) bad("'structure' must be an object");
        c.structure_lambda = opt_number(st, "lambda", 1.0);
        if (!(c.structure_lambda >= 1.0)) bad("structure.lambda must be >= 1");
    }

    if (j.contains("grid")) {
        const auto& g = j.at("grid");
        if (!g.is_object()) bad("'grid' must be an object");
        const double dim = need_number(g, "dim", "grid");
        if (dim != 1.0 && dim != 2.0) bad("grid.dim must be 1 or 2");
        c.dim = static_cast<int>(dim);
        c.h = need_number(g, "h", "grid");
        c.omega_radius = need_number(g, "omega_radius", "grid");
        c.R_infinity = need_number(g, "R_infinity", "grid");
        if (!(c.h > 0.0)) bad("grid.h must be positive");
        if (!(c.omega_radius > c.h)) bad("grid.omega_radius must exceed h");
        if (!(c.R_infinity >= 4.0 * c.omega_radius * (1.0 - 1e-12)))
            bad("grid.R_infinity must be at least 4*omega_radius");
        c.has_grid = true;
    } else if (needs_grid) {
        bad("task '" + c.task + "' needs a 'grid' block");
    }

    c.s_min = opt_number(j, "s_min", c.s_min);
    if (!(c.s_min > 0.0) || !(c.s_min < 1.0)) bad("'s_min' must lie in (0, 1)");
    if (j.contains("s")) {
        c.s_list = number_list(j.at("s"), "s");
        if (c.s_list.empty()) bad("'s' must not be empty");
        for (double s : c.s_list)
            if (!(s > c.s_min) || !(s < 1.0))
                bad("s = " + format_double(s) + " outside (" + format_double(c.s_min) + ", 1)");
        for (std::size_t i = 0; i + 1 < c.s_list.size(); ++i)
            for (std::size_t k = i + 1; k < c.s_list.size(); ++k)
                if (c.s_list[i] == c.s_list[k]) bad("'s' values must be distinct");
    } else if (needs_grid) {
        bad("task '" + c.task + "' needs 's'");
    }

    if (j.contains("exterior")) {
        if (!j.at("exterior").is_string()) bad("'exterior' must be a string expression");
        c.exterior_text = j.at("exterior").get<std::string>();
        parse_expression(c.exterior_text); // reject malformed expressions now
        c.has_exterior = true;
    } else if (needs_exterior) {
        bad("task '" + c.task + "' needs an 'exterior' expression");
    }

    if (j.contains("seed")) {
        const auto& sd = j.at("seed");
        if (!sd.is_number_integer() || sd.is_number_float() || sd.get<double>() < 0.0)
            bad("'seed' must be a nonnegative integer");
        c.seed = sd.get<std::uint64_t>();
    }
    c.tol = opt_number(j, "tolerance", c.tol);
    if (!(c.tol > 0.0)) bad("'tolerance' must be positive");

    if (j.contains("x0")) {
        const auto& p = j.at("x0");
        if (!p.is_array() || p.empty() || p.size() > 2) bad("'x0' must be [x] or [x, y]");
        auto coords = number_list(p, "x0");
        if (static_cast<int>(coords.size()) != c.dim)
            bad("'x0' must have exactly dim coordinates");
        c.x0 = {coords[0], coords.size() > 1 ? coords[1] : 0.0};
        c.has_x0 = true;
    } else if (needs_x0) {
        bad("task '" + c.task + "' needs 'x0'");
    }

    if (j.contains("R")) {
        c.R = need_number(j, "R", "config");
        if (!(c.R > 0.0)) bad("'R' must be positive");
        c.has_R = true;
    } else if (needs_R) {
        bad("task '" + c.task + "' needs 'R'");
    }

    if (j.contains("deltas")) {
        c.deltas = number_list(j.at("deltas"), "deltas");
        if (c.deltas.empty()) bad("'deltas' must not be empty");
        for (double d : c.deltas)
            if (!(d > 0.0) || !(d < 1.0)) bad("every delta must lie in (0, 1)");
    } else if (c.task == "bound") {
        bad("task 'bound' needs 'deltas'");
    }

    if (j.contains("dg")) {
        const auto& d = j.at("dg");
        if (!d.is_object()) bad("'dg' must be an object");
        const double count = opt_number(d, "count", c.dg_count);
        if (count < 1.0 || count != std::floor(count)) bad("dg.count must be a positive integer");
        c.dg_count = static_cast<int>(count);
        c.dg_ratio_lo = opt_number(d, "ratio_lo", c.dg_ratio_lo);
        c.dg_ratio_hi = opt_number(d, "ratio_hi", c.dg_ratio_hi);
        if (!(c.dg_ratio_lo > 0.0) || !(c.dg_ratio_lo <= c.dg_ratio_hi) ||
            !(c.dg_ratio_hi < 1.0))
            bad("dg ratios need 0 < ratio_lo <= ratio_hi < 1");
    }

    if (j.contains("t_range")) {
        auto r = number_list(j.at("t_range"), "t_range");
        if (r.size() != 2 || !(r[0] > 0.0) || !(r[0] < r[1]))
            bad("'t_range' must be [lo, hi] with 0 < lo < hi");
        c.t_lo = r[0];
        c.t_hi = r[1];
    }
    {
        const double tc = opt_number(j, "t_count", c.t_count);
        if (tc < 2.0 || tc != std::floor(tc)) bad("'t_count' must be an integer >= 2");
        c.t_count = static_cast<int>(tc);
    }

    c.p_embed = opt_number(j, "p", c.p_embed);
    if (!(c.p_embed >= 1.0)) bad("'p' must be >= 1");
    if (j.contains("levels")) {
        auto lv = number_list(j.at("levels"), "levels");
        if (lv.size() != 2 || !(lv[0] < lv[1])) bad("'levels' must be [low, high] with low < high");
        c.level_low = lv[0];
        c.level_high = lv[1];
        c.has_levels = true;
    }
    c.iso_gamma = opt_number(j, "gamma", c.iso_gamma);
    c.iso_gamma0 = opt_number(j, "gamma0", c.iso_gamma0);
    c.iso_C0 = opt_number(j, "C0", c.iso_C0);
    if (!(c.iso_gamma > 0.0) || !(c.iso_gamma < 1.0)) bad("'gamma' must lie in (0, 1)");
    if (!(c.iso_gamma0 > 0.0) || !(c.iso_gamma0 < 1.0)) bad("'gamma0' must lie in (0, 1)");
    if (!(c.iso_C0 > 0.0)) bad("'C0' must be positive");

    c.echo = j;
    return c;
}

// ---------------------------------------------------------------------------
// task pipelines

namespace {

std::shared_ptr<const GridDomain> make_domain(const ExperimentConfig& c) {
    return std::make_shared<GridDomain>(build_grid(c.dim, c.h, c.omega_radius, c.R_infinity));
}

GridFunction exterior_function(const ExperimentConfig& c,
                               const std::shared_ptr<const GridDomain>& dom) {
    const Expression e = parse_expression(c.exterior_text);
    return GridFunction(dom, [&e](Point p) { return e(p); });
}

int node_of(const ExperimentConfig& c, const GridDomain& dom) {
    const double fx = c.x0[0] / dom.h(), fy = c.x0[1] / dom.h();
    const long ix = std::lround(fx), iy = std::lround(fy);
    if (std::abs(fx - static_cast<double>(ix)) > 1e-6 ||
        std::abs(fy - static_cast<double>(iy)) > 1e-6)
        bad("x0 is not a grid node at this h");
    const int idx = dom.node_at(static_cast<int>(ix), static_cast<int>(iy));
    if (idx < 0) bad("x0 lies outside the represented grid");
    return idx;
}

std::string s_suffix(const ExperimentConfig& c, std::size_t i) {
    return c.s_list.size() == 1 ? std::string() : "_s" + format_double(c.s_list[i]);
}

std::string csv_bool(bool b) { return b ? "1" : "0"; }

// one minimize run: exterior data doubles as the starting point
MinimizeResult solve_once(const ExperimentConfig& c, const GridFunction& ext, double s) {
    const KernelCoefficient kern = KernelCoefficient::parse(c.kernel_text, c.h);
    return minimize(c.growth, kern, ext, ext, s, c.tol);
}

double residual_of(const ExperimentConfig& c, const GridFunction& u, double s) {
    const KernelCoefficient kern = KernelCoefficient::parse(c.kernel_text, c.h);
    StructureFunction hs = StructureFunction::euler_lagrange(c.growth, kern);
    hs.Lambda = std::max(hs.Lambda, c.structure_lambda);
    return residual_norm(hs, u, s);
}

void task_growth_check(const ExperimentConfig& c, json& report, RunOutput& out) {
    const auto grid = log_grid(c.t_lo, c.t_hi, c.t_count);
    const GrowthBounds bounds = check_growth_bounds(c.growth, grid);
    const auto checks = growth_suite(c.growth, grid);

    bool all_pass = true;
    double worst = 0.0;
    std::string csv = "name,pass,worst\n";
    json rows = json::array();
    for (const auto& ck : checks) {
        all_pass = all_pass && ck.pass;
        worst = std::min(worst, ck.worst);
        csv += ck.name + "," + csv_bool(ck.pass) + "," + format_double(ck.worst) + "\n";
        rows.push_back({{"name", ck.name}, {"pass", ck.pass}, {"worst", ck.worst}});
    }
    report["results"] = {{"family", c.growth.family_name()},
                         {"p_est", bounds.p_est},
                         {"q_est", bounds.q_est},
                         {"all_pass", all_pass},
                         {"worst_margin", worst},
                         {"checks", rows}};
    out.files["growth_checks.csv"] = csv;
}

void task_minimize(const ExperimentConfig& c, json& report, RunOutput& out) {
    const auto dom = make_domain(c);
    const GridFunction ext = exterior_function(c, dom);
    for (std::size_t i = 0; i < c.s_list.size(); ++i) {
        const double s = c.s_list[i];
        const MinimizeResult res = solve_once(c, ext, s);
        const double resid = residual_of(c, res.u, s);
        json row;
        to_json(row, res.report);
        row["s"] = s;
        row["residual_norm"] = resid;
        report["results"].push_back(row);
        out.files["solution" + s_suffix(c, i) + ".csv"] = to_csv(res.u);
    }
}

json dg_run(const ExperimentConfig& c, const GridFunction& u, double s, std::string& csv) {
    DgSampleSpec spec;
    spec.count = c.dg_count;
    spec.ratio_lo = c.dg_ratio_lo;
    spec.ratio_hi = c.dg_ratio_hi;
    spec.seed = c.seed;
    const DgMembership m = dg_membership(c.growth, u, s, spec);

    csv = "x0x,x0y,r,R,k,side,lhs_seminorm,lhs_cross,rhs_local,rhs_tail,c_min\n";
    const GridDomain& dom = u.domain();
    for (const auto& rep : m.samples) {
        const Point p = dom.position(rep.x0);
        csv += format_double(p[0]) + "," + format_double(p[1]) + "," + format_double(rep.r) +
               "," + format_double(rep.R) + "," + format_double(rep.k_level) + "," +
               (rep.side == LevelSide::plus ? "plus" : "minus") + "," +
               format_double(rep.lhs_seminorm) + "," + format_double(rep.lhs_cross) + "," +
               format_double(rep.rhs_local) + "," + format_double(rep.rhs_tail) + "," +
               format_double(rep.unbounded ? -1.0 : rep.c_min) + "\n";
    }
    json worst;
    to_json(worst, m.worst);
    return {{"s", s},
            {"c_empirical", m.c_empirical},
            {"any_unbounded", m.any_unbounded},
            {"samples", static_cast<int>(m.samples.size())},
            {"worst", worst}};
}

void task_dg_check(const ExperimentConfig& c, json& report, RunOutput& out) {
    const auto dom = make_domain(c);
    const GridFunction ext = exterior_function(c, dom);
    for (std::size_t i = 0; i < c.s_list.size(); ++i) {
        const double s = c.s_list[i];
        const MinimizeResult res = solve_once(c, ext, s);
        std::string csv;
        json row = dg_run(c, res.u, s, csv);
        json solved;
        to_json(solved, res.report);
        row["solve"] = solved;
        report["results"].push_back(row);
        out.files["dg_samples" + s_suffix(c, i) + ".csv"] = csv;
    }
}

void task_holder(const ExperimentConfig& c, json& report, RunOutput& out) {
    const auto dom = make_domain(c);
    const GridFunction ext = exterior_function(c, dom);
    const int x0 = node_of(c, *dom);
    std::string summary = "s,alpha_hat,c_fit,lhs,sup_norm,tail,holds\n";
    for (std::size_t i = 0; i < c.s_list.size(); ++i) {
        const double s = c.s_list[i];
        const MinimizeResult res = solve_once(c, ext, s);
        std::string dg_csv;
        const json dg = dg_run(c, res.u, s, dg_csv);
        const HolderCheck hc = verify_holder_bound(c.growth, res.u, s, x0, c.R);

        std::string osc = "radius,osc\n";
        for (const auto& [rad, o] : hc.fit.osc_decay)
            osc += format_double(rad) + "," + format_double(o) + "\n";
        out.files["osc_decay" + s_suffix(c, i) + ".csv"] = osc;

        summary += format_double(s) + "," + format_double(hc.fit.alpha_hat) + "," +
                   format_double(hc.c_fit) + "," + format_double(hc.lhs) + "," +
                   format_double(hc.sup_norm) + "," + format_double(hc.tail) + "," +
                   csv_bool(hc.holds) + "\n";

        json solved;
        to_json(solved, res.report);
        report["results"].push_back({{"s", s},
                                     {"solve", solved},
                                     {"c_empirical", dg.at("c_empirical")},
                                     {"any_unbounded", dg.at("any_unbounded")},
                                     {"alpha_hat", hc.fit.alpha_hat},
                                     {"fit_residual", hc.fit.fit_residual},
                                     {"constant_function", hc.fit.constant_function},
                                     {"lhs", hc.lhs},
                                     {"sup_norm", hc.sup_norm},
                                     {"tail", hc.tail},
                                     {"c_fit", hc.c_fit},
                                     {"holds", hc.holds}});
    }
    out.files["holder_summary.csv"] = summary;
}

void task_bound(const ExperimentConfig& c, json& report, RunOutput& out) {
    const auto dom = make_domain(c);
    const GridFunction ext = exterior_function(c, dom);
    const int x0 = node_of(c, *dom);
    for (std::size_t i = 0; i < c.s_list.size(); ++i) {
        const double s = c.s_list[i];
        const MinimizeResult res = solve_once(c, ext, s);
        const auto rows = verify_local_bound(c.growth, res.u, s, x0, c.R, c.deltas);

        std::string csv = "delta,lhs,rhs,c_fit\n";
        double c_run = 0.0;
        json checks = json::array();
        for (const auto& b : rows) {
            csv += format_double(b.delta) + "," + format_double(b.lhs) + "," +
                   format_double(b.rhs) + "," + format_double(b.c_fit) + "\n";
            c_run = std::max(c_run, b.c_fit);
            json bj;
            to_json(bj, b);
            checks.push_back(bj);
        }
        out.files["bound_table" + s_suffix(c, i) + ".csv"] = csv;

        json solved;
        to_json(solved, res.report);
        report["results"].push_back(
            {{"s", s},
             {"solve", solved},
             {"p_star", p_star_exponent(c.dim, s, c.growth.p_lower())},
             {"c_run", c_run},
             {"checks", checks}});
    }
}

void task_inequalities(const ExperimentConfig& c, json& report, RunOutput& out) {
    const auto dom = make_domain(c);
    const GridFunction u = exterior_function(c, dom);
    std::string csv = "name,s,lhs,rhs,value\n";
    for (double s : c.s_list) {
        const EmbeddingCheck em = sobolev_embedding_check(u, s, c.p_embed, c.R);
        csv += "embedding," + format_double(s) + "," + format_double(em.lhs) + "," +
               format_double(em.rhs) + "," + format_double(em.ratio) + "\n";
        json row = {{"s", s},
                    {"embedding",
                     {{"lhs", em.lhs}, {"rhs", em.rhs}, {"ratio", em.ratio}}}};
        if (c.has_levels) {
            const IsoperimetricCheck iso =
                isoperimetric_check(u, s, c.p_embed, c.R, c.level_low, c.level_high,
                                    c.iso_gamma, c.iso_gamma0, c.iso_C0);
            const double cfit = iso.band_empty ? -1.0 : iso.c_fit;
            csv += "isoperimetric," + format_double(s) + "," + format_double(iso.lhs) + "," +
                   format_double(iso.rhs) + "," + format_double(cfit) + "\n";
            row["isoperimetric"] = {{"hypotheses_met", iso.hypotheses_met},
                                    {"band_empty", iso.band_empty},
                                    {"lhs", iso.lhs},
                                    {"rhs", iso.rhs},
                                    {"c_fit", cfit},
                                    {"measure_low", iso.measure_low},
                                    {"measure_high", iso.measure_high},
                                    {"measure_band", iso.measure_band}};
        }
        report["results"].push_back(row);
    }
    out.files["inequalities.csv"] = csv;
}

void dispatch(const ExperimentConfig& c, json& report, RunOutput& out) {
    if (c.task == "growth-check")
        task_growth_check(c, report, out);
    else if (c.task == "minimize")
        task_minimize(c, report, out);
    else if (c.task == "dg-check")
        task_dg_check(c, report, out);
    else if (c.task == "holder")
        task_holder(c, report, out);
    else if (c.task == "bound")
        task_bound(c, report, out);
    else
        task_inequalities(c, report, out);
}

} // namespace

RunOutput run_experiment(const json& config_json) {
    RunOutput out;
    json report;
    try {
        const ExperimentConfig c = config_from_json(config_json);
        report["task"] = c.task;
        report["config"] = c.echo;
        report["results"] = json::array();
        dispatch(c, report, out);
        out.files["report.json"] = report.dump(2) + "\n";
    } catch (const config_error& e) {
        out = RunOutput{};
        out.exit_code = 2;
        out.message = e.what();
    } catch (const std::invalid_argument& e) {
        out = RunOutput{};
        out.exit_code = 2;
        out.message = e.what();
    } catch (const std::domain_error& e) {
        out = RunOutput{};
        out.exit_code = 2;
        out.message = e.what();
    } catch (const std::exception& e) {
        // numeric_error, structure_error, solver failures: keep what we have
        out.exit_code = 3;
        out.message = e.what();
        report["error"] = std::string(e.what());
        out.files["report.json"] = report.dump(2) + "\n";
    }
    return out;
}

// ---------------------------------------------------------------------------
// sweep

namespace {

const std::vector<std::string> kSweepParams = {"s", "delta", "h", "p", "q"};

std::vector<std::string> summary_columns(const std::string& task) {
    if (task == "growth-check") return {"all_pass", "worst_margin"};
    if (task == "minimize") return {"iterations", "final_energy", "residual_norm"};
    if (task == "dg-check") return {"c_empirical"};
    if (task == "holder") return {"alpha_hat", "c_fit"};
    if (task == "bound") return {"lhs", "rhs", "c_fit"};
    return {"ratio"}; // inequalities: embedding ratio
}

// Pulls the summary row out of a finished sub-run report.  Multi-entry runs
// (several s, several deltas) contribute their first entry.
std::vector<double> summary_values(const std::string& task, const json& report) {
    const json& res = report.at("results");
    if (task == "growth-check")
        return {res.at("all_pass").get<bool>() ? 1.0 : 0.0,
                res.at("worst_margin").get<double>()};
    const json& first = res.at(0);
    if (task == "minimize")
        return {first.at("iterations").get<double>(), first.at("final_energy").get<double>(),
                first.at("residual_norm").get<double>()};
    if (task == "dg-check") return {first.at("c_empirical").get<double>()};
    if (task == "holder")
        return {first.at("alpha_hat").get<double>(), first.at("c_fit").get<double>()};
    if (task == "bound") {
        const json& row = first.at("checks").at(0);
        return {row.at("lhs").get<double>(), row.at("rhs").get<double>(),
                row.at("c_fit").get<double>()};
    }
    return {first.at("embedding").at("ratio").get<double>()};
}

json patched_config(const json& base, const std::string& param, double value) {
    json j = base;
    j.erase("sweep");
    if (param == "s")
        j["s"] = value;
    else if (param == "delta")
        j["deltas"] = json::array({value});
    else if (param == "h")
        j["grid"]["h"] = value;
    else
        j["growth"][param] = value;
    return j;
}

} // namespace

RunOutput run_sweep(const json& config_json, int jobs) {
    RunOutput out;
    std::string param;
    std::vector<double> values;
    std::string base_task;
    try {
        if (!config_json.is_object() || !config_json.contains("sweep"))
            bad("sweep runs need a 'sweep' block");
        const json& sw = config_json.at("sweep");
        if (!sw.is_object() || !sw.contains("parameter") || !sw.at("parameter").is_string())
            bad("sweep.parameter (string) is required");
        param = sw.at("parameter").get<std::string>();
        if (std::find(kSweepParams.begin(), kSweepParams.end(), param) == kSweepParams.end())
            bad("sweep.parameter must be one of s, delta, h, p, q");
        if (!sw.contains("values")) bad("sweep.values is required");
        values = number_list(sw.at("values"), "sweep.values");
        if (values.empty()) bad("sweep.values must not be empty");

        if (!config_json.contains("task") || !config_json.at("task").is_string())
            bad("'task' (string) is required");
        base_task = config_json.at("task").get<std::string>();
        if (!known_task(base_task)) bad("unknown task '" + base_task + "'");
        if (param == "delta" && base_task != "bound")
            bad("sweep parameter 'delta' only applies to the bound task");
        if (param == "p" || param == "q") {
            if (!config_json.contains("growth") || !config_json.at("growth").is_object() ||
                !config_json.at("growth").contains("family"))
                bad("sweep parameter '" + param + "' needs a growth block with a family");
            const std::string fam = config_json.at("growth").at("family").get<std::string>();
            if (param == "q" && fam != "sum")
                bad("sweep parameter 'q' only applies to the sum family");
            if (param == "p" && fam == "sampled")
                bad("sweep parameter 'p' cannot re-parameterize a sampled growth");
        }
        if (jobs < 1) bad("jobs must be >= 1");
    } catch (const config_error& e) {
        out.exit_code = 2;
        out.message = e.what();
        return out;
    }

    // fan out, one slot per value; nothing below writes shared state
    std::vector<RunOutput> slots(values.size());
    {
        std::atomic<std::size_t> next{0};
        const std::size_t workers =
            std::min<std::size_t>(static_cast<std::size_t>(jobs), values.size());
        auto work = [&]() {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= values.size()) return;
                slots[i] = run_experiment(patched_config(config_json, param, values[i]));
            }
        };
        if (workers <= 1) {
            work();
        } else {
            std::vector<std::thread> pool;
            for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
            for (auto& t : pool) t.join();
        }
    }

    // merge on this thread only, in slot order
    const auto cols = summary_columns(base_task);
    std::string csv = param;
    for (const auto& col : cols) csv += "," + col;
    csv += ",status\n";

    json rows = json::array();
    for (std::size_t i = 0; i < values.size(); ++i) {
        const RunOutput& sub = slots[i];
        json row = {{"value", values[i]}, {"exit_code", sub.exit_code}};
        csv += format_double(values[i]);
        bool ok = sub.exit_code == 0;
        std::vector<double> metrics;
        if (ok) {
            try {
                const json rep = json::parse(sub.files.at("report.json"));
                metrics = summary_values(base_task, rep);
                row["report"] = rep;
            } catch (const std::exception& e) {
                ok = false;
                row["message"] = std::string("summary extraction failed: ") + e.what();
            }
        } else {
            row["message"] = sub.message;
        }
        for (std::size_t k = 0; k < cols.size(); ++k)
            csv += "," + (ok ? format_double(metrics[k]) : std::string());
        csv += ok ? ",ok\n" : ",error\n";
        row["status"] = ok ? "ok" : "error";
        rows.push_back(row);
    }

    json report = {{"task", "sweep"},
                   {"parameter", param},
                   {"base_task", base_task},
                   {"config", config_json},
                   {"rows", rows}};
    out.files["sweep.csv"] = csv;
    out.files["report.json"] = report.dump(2) + "\n";
    return out;
}

void write_outputs(const RunOutput& out, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    for (const auto& [rel, content] : out.files) {
        const fs::path target = fs::path(dir) / rel;
        if (target.has_parent_path()) fs::create_directories(target.parent_path());
        std::ofstream f(target, std::ios::binary);
        if (!f) throw config_error("cannot write " + target.string());
        f << content;
    }
}

} // namespace nlo
