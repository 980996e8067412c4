#include "nlo/regularity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nlo/errors.hpp"

namespace nlo {

namespace {

void require_node(const GridDomain& dom, int x0, const char* who) {
    if (x0 < 0 || x0 >= dom.size())
        throw std::domain_error(std::string(who) + ": bad center node");
}

double sup_abs_over(const GridFunction& u, const std::vector<int>& nodes) {
    double m = 0.0;
    for (int i : nodes) m = std::max(m, std::abs(u[i]));
    return m;
}

} // namespace

double holder_seminorm(const GridFunction& u, double alpha, const std::vector<int>& region) {
    if (!(alpha > 0.0) || alpha > 1.0)
        throw std::invalid_argument("holder_seminorm: alpha must lie in (0,1]");
    if (region.size() < 2)
        throw std::invalid_argument("holder_seminorm: region needs at least two nodes");
    const GridDomain& dom = u.domain();
    double m = 0.0;
    for (std::size_t ii = 0; ii < region.size(); ++ii)
        for (std::size_t jj = ii + 1; jj < region.size(); ++jj) {
            const double d = dist(dom.position(region[ii]), dom.position(region[jj]));
            m = std::max(m, std::abs(u[region[ii]] - u[region[jj]]) / std::pow(d, alpha));
        }
    return m;
}

AlphaFit estimate_alpha(const GridFunction& u, int x0, const std::vector<double>& radii) {
    const GridDomain& dom = u.domain();
    require_node(dom, x0, "estimate_alpha");
    if (radii.size() < 4)
        throw std::invalid_argument("estimate_alpha: need at least four radii");
    const Point c = dom.position(x0);
    const double reach = std::max(std::abs(c[0]), std::abs(c[1]));
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (i > 0 && !(radii[i] < radii[i - 1]))
            throw std::invalid_argument("estimate_alpha: radii must be decreasing");
        if (radii[i] < 3.0 * dom.h() * (1.0 - 1e-12))
            throw std::invalid_argument("estimate_alpha: radius below the 3h resolution floor");
        if (reach + radii[i] > dom.R_infinity() * (1.0 + 1e-12))
            throw std::invalid_argument("estimate_alpha: ball leaves the represented box");
    }

    AlphaFit fit;
    for (double r : radii) {
        const auto ball = dom.nodes_in_ball(c, r);
        double lo = u[ball.front()], hi = lo;
        for (int i : ball) {
            lo = std::min(lo, u[i]);
            hi = std::max(hi, u[i]);
        }
        fit.osc_decay.emplace_back(r, hi - lo);
    }
    if (fit.osc_decay.front().second == 0.0) {
        fit.constant_function = true;
        return fit; // alpha_hat 1, residual 0
    }

    std::vector<double> lx, ly;
    for (const auto& [r, osc] : fit.osc_decay)
        if (osc > 0.0) {
            lx.push_back(std::log(r));
            ly.push_back(std::log(osc));
        }
    if (lx.size() < 2) return fit; // oscillation collapses immediately; keep the ceiling

    const auto n = static_cast<double>(lx.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    const double slope = sxy / sxx;
    const double icpt = my - slope * mx;
    double ss = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        const double e = ly[i] - icpt - slope * lx[i];
        ss += e * e;
    }
    fit.fit_residual = std::sqrt(ss / n);
    fit.alpha_hat = std::clamp(slope, 1e-6, 1.0);
    return fit;
}

std::vector<double> default_alpha_radii(const GridDomain& dom, double R, double ratio,
                                        int count) {
    if (!(R > 0.0) || !(ratio > 0.0) || ratio >= 1.0 || count < 2)
        throw std::invalid_argument("default_alpha_radii: need R > 0, ratio in (0,1), count >= 2");
    std::vector<double> radii;
    double r = R;
    while (static_cast<int>(radii.size()) < count && r >= 3.0 * dom.h() * (1.0 - 1e-12)) {
        radii.push_back(r);
        r *= ratio;
    }
    if (static_cast<int>(radii.size()) < count)
        throw std::invalid_argument(
            "default_alpha_radii: grid too coarse for the requested radius family");
    return radii;
}

HolderCheck verify_holder_bound(const GrowthFunction& gf, const GridFunction& u, double s,
                                int x0, double R) {
    const GridDomain& dom = u.domain();
    require_node(dom, x0, "verify_holder_bound");
    if (!(R > 0.0)) throw std::invalid_argument("verify_holder_bound: R must be positive");
    const Point c = dom.position(x0);
    if (!dom.ball_inside_interior(c, 8.0 * R))
        throw std::invalid_argument("verify_holder_bound: B_{8R}(x0) leaves the working set");

    HolderCheck out;
    out.fit = estimate_alpha(u, x0, default_alpha_radii(dom, R));
    const auto ball_R = dom.nodes_in_ball(c, R);
    out.lhs = std::pow(R, out.fit.alpha_hat) *
              holder_seminorm(u, out.fit.alpha_hat, ball_R);
    out.sup_norm = sup_abs_over(u, dom.nodes_in_ball(c, 4.0 * R));
    out.tail = tail_fprime(gf, u, x0, 4.0 * R, s).tail;
    const double num = out.lhs - out.tail;
    out.c_fit = (num > 0.0 && out.sup_norm > 0.0) ? num / out.sup_norm : 0.0;
    out.holds = out.lhs <= out.c_fit * out.sup_norm + out.tail + 1e-12 * (1.0 + out.lhs);
    return out;
}

void to_json(nlohmann::json& j, const BoundCheck& b) {
    j = nlohmann::json{{"delta", b.delta}, {"lhs", b.lhs}, {"rhs", b.rhs}, {"c_fit", b.c_fit}};
}

double p_star_exponent(int dim, double s, double p) {
    if (!(s > 0.0) || s >= 1.0 || !(p >= 1.0))
        throw std::invalid_argument("p_star_exponent: need s in (0,1) and p >= 1");
    if (s * p >= static_cast<double>(dim))
        throw config_error("p_star_exponent: sp < d fails, no embedding exponent");
    return static_cast<double>(dim) * p / (static_cast<double>(dim) - s * p);
}

std::vector<BoundCheck> verify_local_bound(const GrowthFunction& gf, const GridFunction& u,
                                           double s, int x0, double R,
                                           const std::vector<double>& deltas) {
    const GridDomain& dom = u.domain();
    require_node(dom, x0, "verify_local_bound");
    if (!(R > 0.0)) throw std::invalid_argument("verify_local_bound: R must be positive");
    if (deltas.empty()) throw std::invalid_argument("verify_local_bound: no deltas given");
    for (double d : deltas)
        if (!(d > 0.0) || d >= 1.0)
            throw std::invalid_argument("verify_local_bound: deltas must lie in (0,1)");
    const double p = gf.p_lower(), q = gf.q_upper();
    const double pstar = p_star_exponent(dom.dim(), s, p); // throws when sp >= d
    if (q >= pstar)
        throw config_error("verify_local_bound: q < p* fails, sup bound not available");
    const Point c = dom.position(x0);
    if (!dom.ball_inside_interior(c, 2.0 * R))
        throw std::invalid_argument("verify_local_bound: B_{2R}(x0) leaves the working set");

    const auto ball = dom.nodes_in_ball(c, R);
    const double lhs = sup_abs_over(u, ball);
    double meanq = 0.0;
    for (int i : ball) meanq += std::pow(std::abs(u[i]), q);
    meanq /= static_cast<double>(ball.size());
    const double tail = tail_fprime(gf, u, x0, R, s).tail;
    const double mean_pow = std::pow(meanq, (pstar - p) / (p * (pstar - q)));

    std::vector<BoundCheck> rows;
    rows.reserve(deltas.size());
    for (double d : deltas) {
        BoundCheck row;
        row.delta = d;
        row.lhs = lhs;
        const double amp = std::pow(d, -(q - 1.0) * (pstar / p) / (pstar - q)) * mean_pow;
        const double fixed = d * tail + std::pow(d, (q - 1.0) / q);
        const double num = lhs - fixed;
        row.c_fit = (num > 0.0 && amp > 0.0) ? num / amp : 0.0;
        row.rhs = fixed + row.c_fit * amp;
        rows.push_back(row);
    }
    return rows;
}

double gagliardo_sum(const GridFunction& u, const std::vector<int>& inner,
                     const std::vector<int>& outer, double sigma, double p) {
    if (!(sigma > 0.0) || sigma >= 1.0)
        throw std::invalid_argument("gagliardo_sum: sigma must lie in (0,1)");
    if (!(p >= 1.0)) throw std::invalid_argument("gagliardo_sum: p must be >= 1");
    if (inner.empty() || outer.empty())
        throw std::invalid_argument("gagliardo_sum: empty region");
    const GridDomain& dom = u.domain();
    const double hd = dom.cell_measure();
    const double expo = static_cast<double>(dom.dim()) + sigma * p;
    double acc = 0.0;
    for (int a : inner)
        for (int b : outer) {
            if (b == a) continue;
            const double d = dist(dom.position(a), dom.position(b));
            acc += hd * hd * std::pow(std::abs(u[a] - u[b]), p) / std::pow(d, expo);
        }
    return acc;
}

EmbeddingCheck sobolev_embedding_check(const GridFunction& u, double s, double p,
                                       double R_ball) {
    const GridDomain& dom = u.domain();
    const double pstar = p_star_exponent(dom.dim(), s, p); // throws when sp >= d
    const auto ball = dom.nodes_in_ball({0.0, 0.0}, R_ball);
    if (ball.size() < 2)
        throw std::invalid_argument("sobolev_embedding_check: ball holds fewer than two nodes");
    const double hd = dom.cell_measure();
    double lp_star = 0.0, lp = 0.0;
    for (int i : ball) {
        lp_star += hd * std::pow(std::abs(u[i]), pstar);
        lp += hd * std::pow(std::abs(u[i]), p);
    }
    EmbeddingCheck out;
    out.lhs = std::pow(lp_star, p / pstar);
    const double dsp = static_cast<double>(dom.dim()) - s * p;
    out.rhs = (1.0 - s) / std::pow(dsp, p - 1.0) * gagliardo_sum(u, ball, ball, s, p) +
              std::pow(R_ball, -s * p) * lp;
    out.ratio = out.rhs > 0.0 ? out.lhs / out.rhs : 0.0;
    return out;
}

IsoperimetricCheck isoperimetric_check(const GridFunction& u, double s, double p, double R_ball,
                                       double h_level, double k_level, double gamma,
                                       double gamma0, double C0) {
    if (!(k_level > h_level))
        throw std::invalid_argument("isoperimetric_check: need k_level > h_level");
    if (!(p > 1.0)) throw std::invalid_argument("isoperimetric_check: need p > 1");
    if (!(s > 0.0) || s >= 1.0)
        throw std::invalid_argument("isoperimetric_check: s must lie in (0,1)");
    if (!(gamma > 0.0) || gamma >= 1.0 || !(gamma0 > 0.0) || gamma0 >= 1.0 || !(C0 > 0.0))
        throw std::invalid_argument("isoperimetric_check: need gamma, gamma0 in (0,1), C0 > 0");
    const GridDomain& dom = u.domain();
    const auto ball = dom.nodes_in_ball({0.0, 0.0}, R_ball);
    if (ball.size() < 2)
        throw std::invalid_argument("isoperimetric_check: ball holds fewer than two nodes");
    const double hd = dom.cell_measure();
    const int d = dom.dim();

    IsoperimetricCheck out;
    double lp = 0.0;
    int n_low = 0, n_high = 0, n_band = 0;
    for (int i : ball) {
        lp += hd * std::pow(std::abs(u[i]), p);
        if (u[i] <= h_level) ++n_low;
        if (u[i] >= k_level) ++n_high;
        if (u[i] > h_level && u[i] < k_level) ++n_band;
    }
    out.measure_low = hd * n_low;
    out.measure_high = hd * n_high;
    out.measure_band = hd * n_band;
    const double m_ball = hd * static_cast<double>(ball.size());
    const double semi_p = gagliardo_sum(u, ball, ball, s, p);
    const double gap = k_level - h_level;

    const bool h1 = out.measure_low >= gamma * m_ball * (1.0 - 1e-12);
    const bool h2 = out.measure_high >= gamma0 * m_ball * (1.0 - 1e-12);
    const bool h3 = lp + (1.0 - s) * std::pow(R_ball, s * p) * semi_p <=
                    C0 * std::pow(R_ball, d) * std::pow(gap, p) * (1.0 + 1e-12);
    out.hypotheses_met = h1 && h2 && h3;

    out.lhs = gap * std::pow(out.measure_low * out.measure_high,
                             (static_cast<double>(d) - 1.0) / static_cast<double>(d));
    out.rhs = std::pow(R_ball, static_cast<double>(d) - 2.0 + s) *
              std::pow(1.0 - s, 1.0 / p) * std::pow(semi_p, 1.0 / p) *
              std::pow(out.measure_band, (p - 1.0) / p);
    out.band_empty = n_band == 0;
    if (out.rhs > 0.0)
        out.c_fit = out.lhs / out.rhs;
    else if (out.lhs > 0.0)
        out.c_fit = std::numeric_limits<double>::infinity();
    return out;
}

void to_json(nlohmann::json& j, const RegularityReport& rep) {
    j = nlohmann::json{{"alpha_hat", rep.alpha_hat},
                       {"holder_constant", rep.holder_constant},
                       {"p_star", rep.p_star}};
    auto& osc = j["osc_decay"] = nlohmann::json::array();
    for (const auto& [r, o] : rep.osc_decay) osc.push_back({{"radius", r}, {"osc", o}});
    j["sup_bound_checks"] = rep.sup_bound_checks;
}

} // namespace nlo
