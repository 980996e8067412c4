#include "nlo/degiorgi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nlo/errors.hpp"
#include "nlo/rng.hpp"

namespace nlo {

namespace {

struct GapTerms {
    double seminorm, cross, local, tail_sum, l1;
};

// every term of the inequality, with pluggable value/derivative profiles so the
// auxiliary-integrand transfer reuses the identical sweep
template <class Value, class Deriv>
GapTerms gap_terms(const Value& fval, const Deriv& fder, const GridFunction& u, double s,
                   int x0, double r, double R, double k_level, LevelSide side) {
    const GridDomain& dom = u.domain();
    const Point c = dom.position(x0);
    const int d = dom.dim();
    const double hd = dom.cell_measure();

    // w is the active truncation, v the opposite one; the cross term pairs the
    // active part inside B_r against the strict level set {v > 0}
    std::vector<double> w(static_cast<std::size_t>(dom.size())),
        v(static_cast<std::size_t>(dom.size()));
    for (int i = 0; i < dom.size(); ++i) {
        const double gap = u[i] - k_level;
        const double wp = gap > 0.0 ? gap : 0.0;
        const double wm = gap < 0.0 ? -gap : 0.0;
        w[static_cast<std::size_t>(i)] = side == LevelSide::plus ? wp : wm;
        v[static_cast<std::size_t>(i)] = side == LevelSide::plus ? wm : wp;
    }

    const auto ball_r = dom.nodes_in_ball(c, r);
    const auto ball_R = dom.nodes_in_ball(c, R);

    GapTerms out{0.0, 0.0, 0.0, 0.0, 0.0};
    const double wconst = (1.0 - s) * hd * hd;

    // seminorm over B_r, ordered pairs counted twice
    for (std::size_t ii = 0; ii < ball_r.size(); ++ii)
        for (std::size_t jj = ii + 1; jj < ball_r.size(); ++jj) {
            const int a = ball_r[ii], b = ball_r[jj];
            const double dd = dist(dom.position(a), dom.position(b));
            out.seminorm +=
                2.0 * wconst / std::pow(dd, d) *
                fval(std::abs(w[static_cast<std::size_t>(a)] - w[static_cast<std::size_t>(b)]) *
                     std::pow(dd, -s));
        }

    // cross pairing: x in B_r with w(x) > 0, y anywhere with v(y) > 0
    for (int a : ball_r) {
        const double wx = w[static_cast<std::size_t>(a)];
        if (wx == 0.0) continue;
        const Point xa = dom.position(a);
        for (int b = 0; b < dom.size(); ++b) {
            const double vy = v[static_cast<std::size_t>(b)];
            if (vy == 0.0) continue;
            const double dd = dist(xa, dom.position(b));
            out.cross += wconst / std::pow(dd, d) * fder(vy * std::pow(dd, -s)) * wx *
                         std::pow(dd, -s);
        }
    }

    const double Rs = std::pow(R, s);
    for (int b : ball_R) {
        const double wb = w[static_cast<std::size_t>(b)];
        out.local += hd * fval(wb / Rs);
        out.l1 += hd * wb;
    }

    for (int b = 0; b < dom.size(); ++b) {
        const double rho = dist(dom.position(b), c);
        if (rho <= r * (1.0 + 1e-12)) continue;
        const double rs = std::pow(rho, s);
        out.tail_sum +=
            hd * fder(w[static_cast<std::size_t>(b)] / rs) * std::pow(rho, -d) / rs;
    }
    out.tail_sum *= 1.0 - s;
    return out;
}

CaccioppoliReport assemble(const GapTerms& t, const GridFunction& u, double s, int x0, double r,
                           double R, double k_level, LevelSide side, double q) {
    const int d = u.domain().dim();
    CaccioppoliReport rep;
    rep.x0 = x0;
    rep.r = r;
    rep.R = R;
    rep.k_level = k_level;
    rep.s = s;
    rep.side = side;
    rep.lhs_seminorm = t.seminorm;
    rep.lhs_cross = t.cross;
    rep.l1_norm = t.l1;
    const double ratio = R / (R - r);
    rep.rhs_local = std::pow(ratio, q) * t.local;
    rep.rhs_tail = std::pow(ratio, d + s * q) * t.l1 * t.tail_sum;
    const double num = rep.lhs_seminorm + rep.lhs_cross;
    const double den = rep.rhs_local + rep.rhs_tail;
    if (den > 0.0)
        rep.c_min = num / den;
    else if (num == 0.0)
        rep.c_min = 0.0;
    else {
        rep.c_min = std::numeric_limits<double>::infinity();
        rep.unbounded = true;
    }
    return rep;
}

void validate_sample(const GridFunction& u, double s, int x0, double r, double R) {
    const GridDomain& dom = u.domain();
    if (x0 < 0 || x0 >= dom.size())
        throw std::domain_error("caccioppoli_gap: bad center node");
    if (s <= 0.0 || s >= 1.0)
        throw std::invalid_argument("caccioppoli_gap: s must lie in (0,1)");
    if (!(r > 0.0) || !(r < R))
        throw std::invalid_argument("caccioppoli_gap: need 0 < r < R");
    if (!dom.ball_inside_interior(dom.position(x0), R))
        throw std::invalid_argument("caccioppoli_gap: B_R(x0) leaves the working set");
    if (dom.nodes_in_ball(dom.position(x0), r).empty())
        throw std::invalid_argument("caccioppoli_gap: B_r holds no nodes at this resolution");
}

} // namespace

void to_json(nlohmann::json& j, const CaccioppoliReport& rep) {
    j = nlohmann::json{{"x0", rep.x0},
                       {"r", rep.r},
                       {"R", rep.R},
                       {"k", rep.k_level},
                       {"s", rep.s},
                       {"side", rep.side == LevelSide::plus ? "plus" : "minus"},
                       {"lhs_seminorm", rep.lhs_seminorm},
                       {"lhs_cross", rep.lhs_cross},
                       {"rhs_local", rep.rhs_local},
                       {"rhs_tail", rep.rhs_tail},
                       {"l1_norm", rep.l1_norm},
                       {"c_min", rep.unbounded ? -1.0 : rep.c_min},
                       {"unbounded", rep.unbounded}};
}

CaccioppoliReport caccioppoli_gap(const GrowthFunction& gf, const GridFunction& u, double s,
                                  int x0, double r, double R, double k_level, LevelSide side) {
    validate_sample(u, s, x0, r, R);
    const auto t = gap_terms([&gf](double x) { return gf.value(x); },
                             [&gf](double x) { return gf.derivative(x); }, u, s, x0, r, R,
                             k_level, side);
    return assemble(t, u, s, x0, r, R, k_level, side, gf.q_upper());
}

CaccioppoliReport transfer_to_g(const CaccioppoliReport& rep, const GrowthFunction& gf,
                                const GridFunction& u) {
    validate_sample(u, rep.s, rep.x0, rep.r, rep.R);
    // t g'(t) = f(t) and the sandwich p g <= f <= q g give g the same exponent
    // pair, so the prefactor exponents carry over unchanged
    const auto t = gap_terms([&gf](double x) { return gf.auxiliary_g(x); },
                             [&gf](double x) { return gf.auxiliary_g_prime(x); }, u, rep.s,
                             rep.x0, rep.r, rep.R, rep.k_level, rep.side);
    CaccioppoliReport out =
        assemble(t, u, rep.s, rep.x0, rep.r, rep.R, rep.k_level, rep.side, gf.q_upper());

    const double p = gf.p_lower(), q = gf.q_upper();
    auto caged = [&](double rebuilt, double orig) {
        const double slack = 1e-9 * (1.0 + std::abs(orig));
        return rebuilt >= orig / q - slack && rebuilt <= orig / p + slack;
    };
    if (!caged(out.lhs_seminorm, rep.lhs_seminorm) || !caged(out.lhs_cross, rep.lhs_cross) ||
        !caged(out.rhs_local, rep.rhs_local) || !caged(out.rhs_tail, rep.rhs_tail))
        throw structure_error("transfer_to_g: rebuilt term escaped the [1/q, 1/p] cage");
    return out;
}

DgMembership dg_membership(const GrowthFunction& gf, const GridFunction& u, double s,
                           const DgSampleSpec& spec) {
    const GridDomain& dom = u.domain();
    if (spec.count < 1) throw std::invalid_argument("dg_membership: sample count must be >= 1");
    if (!(spec.ratio_lo > 0.0) || !(spec.ratio_lo <= spec.ratio_hi) || !(spec.ratio_hi < 1.0))
        throw std::invalid_argument("dg_membership: need 0 < ratio_lo <= ratio_hi < 1");
    const double h = dom.h();
    const auto& interior = dom.interior_nodes();

    std::vector<double> sorted;
    sorted.reserve(interior.size());
    for (int i : interior) sorted.push_back(u[i]);
    std::sort(sorted.begin(), sorted.end());
    const double quantiles[4] = {0.2, 0.4, 0.6, 0.8};

    Sampler rng(spec.seed);
    DgMembership out;
    out.samples.reserve(static_cast<std::size_t>(spec.count));
    const long attempts_cap = 40L * spec.count;
    for (long attempt = 0; attempt < attempts_cap &&
                           out.samples.size() < static_cast<std::size_t>(spec.count);
         ++attempt) {
        const int x0 = interior[static_cast<std::size_t>(rng.below(interior.size()))];
        const Point c = dom.position(x0);
        const double cap = dom.omega_radius() - std::max(std::abs(c[0]), std::abs(c[1]));
        if (cap < 2.5 * h) continue;
        const double R_raw = rng.uniform(2.5 * h, cap);
        const long mR = static_cast<long>(std::floor(R_raw / h - 0.5 + 1e-12));
        if (mR < 2) continue;
        const double R = (static_cast<double>(mR) + 0.5) * h;
        if (!dom.ball_inside_interior(c, R)) continue;
        const double ratio = rng.uniform(spec.ratio_lo, spec.ratio_hi);
        long mr = static_cast<long>(std::floor(ratio * R / h - 0.5 + 1e-12));
        mr = std::min(std::max(mr, 1L), mR - 1);
        const double r = (static_cast<double>(mr) + 0.5) * h;
        const double k =
            sorted[static_cast<std::size_t>(std::floor(quantiles[rng.below(4)] *
                                                       static_cast<double>(sorted.size() - 1)))];
        out.samples.push_back(caccioppoli_gap(gf, u, s, x0, r, R, k, spec.side));
    }
    if (out.samples.empty())
        throw std::invalid_argument("dg_membership: no admissible samples at this resolution");

    bool have_worst = false;
    for (const auto& rep : out.samples) {
        if (rep.unbounded) {
            out.any_unbounded = true;
            if (!have_worst || !out.worst.unbounded) {
                out.worst = rep;
                have_worst = true;
            }
            continue;
        }
        if (rep.c_min >= out.c_empirical) {
            out.c_empirical = rep.c_min;
            if (!have_worst || !out.worst.unbounded) {
                out.worst = rep;
                have_worst = true;
            }
        }
    }
    return out;
}

FastConvergence fast_convergence(double y0, double C, double b, double beta, int n_steps) {
    if (!(C > 0.0) || !(b > 0.0) || !(beta > 0.0) || !(y0 >= 0.0) || n_steps < 0)
        throw std::invalid_argument("fast_convergence: need C, b, beta > 0 and y0 >= 0");
    FastConvergence out;
    out.sequence.reserve(static_cast<std::size_t>(n_steps) + 1);
    out.sequence.push_back(y0);
    double y = y0;
    bool overflowed = false;
    for (int j = 0; j < n_steps; ++j) {
        y = C * std::pow(b, j) * std::pow(y, 1.0 + beta);
        if (!std::isfinite(y) || y > 1e150) {
            overflowed = true;
            break;
        }
        out.sequence.push_back(y);
    }
    out.converges = !overflowed && out.sequence.back() < 1e-12;

    const double threshold = std::pow(C, -1.0 / beta) * std::pow(b, -1.0 / (beta * beta));
    out.threshold_applies = y0 <= threshold * (1.0 + 1e-12);
    if (out.threshold_applies) {
        if (overflowed) out.bound_ok = false;
        for (std::size_t j = 0; j < out.sequence.size(); ++j) {
            const double cap = y0 * std::pow(b, -static_cast<double>(j) / beta);
            if (out.sequence[j] > cap * (1.0 + 1e-12)) {
                out.bound_ok = false;
                break;
            }
        }
    }
    return out;
}

} // namespace nlo
