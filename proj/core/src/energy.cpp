#include "nlo/energy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "nlo/errors.hpp"

namespace nlo {

namespace {

void check_region(const std::vector<int>& region, const GridDomain& dom) {
    for (int i : region)
        if (i < 0 || i >= dom.size())
            throw std::domain_error("modular region: node " + std::to_string(i) +
                                    " outside the grid");
}

// ordered-pair sum over region x region; each unordered pair visited once and
// counted twice, in ascending region order, so repeated runs reduce identically
double pair_sum(const std::vector<int>& region, const GridFunction& u, const GridDomain& dom,
                double s, const std::function<double(double)>& profile) {
    const double hd = dom.cell_measure();
    const double wconst = (1.0 - s) * hd * hd;
    double acc = 0.0;
    for (std::size_t ii = 0; ii < region.size(); ++ii) {
        const Point xi = dom.position(region[ii]);
        const double ui = u[region[ii]];
        for (std::size_t jj = ii + 1; jj < region.size(); ++jj) {
            const Point xj = dom.position(region[jj]);
            const double d = dist(xi, xj);
            if (d <= 0.0)
                throw std::domain_error("modular region: repeated node");
            const double w = wconst / (dom.dim() == 1 ? d : d * d);
            acc += 2.0 * w * profile(std::abs(ui - u[region[jj]]) * std::pow(d, -s));
        }
    }
    return acc;
}

} // namespace

ModularKind ModularKind::lf(std::vector<int> region) {
    return {Form::lf, std::move(region), 0.0};
}
ModularKind ModularKind::wsf(std::vector<int> region, double s) {
    return {Form::wsf, std::move(region), s};
}
ModularKind ModularKind::vsf(double s) { return {Form::vsf, {}, s}; }

double modular_with(const ModularKind& kind, const std::function<double(double)>& profile,
                    const GridFunction& u) {
    const GridDomain& dom = u.domain();
    switch (kind.form) {
    case ModularKind::Form::lf: {
        check_region(kind.region, dom);
        const double hd = dom.cell_measure();
        double acc = 0.0;
        for (int i : kind.region) acc += hd * profile(std::abs(u[i]));
        return acc;
    }
    case ModularKind::Form::wsf: {
        check_region(kind.region, dom);
        if (kind.s <= 0.0 || kind.s >= 1.0)
            throw std::invalid_argument("modular: s must lie in (0,1)");
        return pair_sum(kind.region, u, dom, kind.s, profile);
    }
    case ModularKind::Form::vsf: {
        const QuadratureTable t = pair_weights(dom, kind.s);
        double acc = 0.0;
        for (std::size_t r = 0; r < t.size(); ++r)
            acc += 2.0 * t.w[r] * profile(std::abs(u[t.a[r]] - u[t.b[r]]) * t.inv_dist_s[r]);
        return acc;
    }
    }
    throw std::logic_error("unreachable");
}

double modular(const ModularKind& kind, const GrowthFunction& gf, const GridFunction& u) {
    return modular_with(kind, [&gf](double t) { return gf.value(t); }, u);
}

double luxemburg_norm(const ModularKind& kind, const GrowthFunction& gf, const GridFunction& u) {
    if (modular(kind, gf, u) == 0.0) return 0.0;
    auto phi = [&](double lam) {
        GridFunction v = u;
        for (double& x : v.values()) x /= lam;
        return modular(kind, gf, v);
    };

    // seed the upper end near the closed-form answer for a power function,
    // then expand/contract geometrically to an actual bracket
    const GridDomain& dom = u.domain();
    double measure = 0.0;
    if (kind.form == ModularKind::Form::lf)
        measure = dom.cell_measure() * static_cast<double>(kind.region.size());
    else
        measure = std::pow(2.0 * dom.R_infinity(), dom.dim());
    double hi = u.max_abs() * std::pow(measure, 1.0 / gf.p_lower());
    if (!(hi > 0.0) || !std::isfinite(hi)) hi = 1.0;

    int guard = 0;
    while (phi(hi) > 1.0) {
        hi *= 2.0;
        if (++guard > 300) throw numeric_error("luxemburg_norm: no upper bracket");
    }
    double lo = 0.5 * hi;
    guard = 0;
    while (phi(lo) <= 1.0) {
        hi = lo;
        lo *= 0.5;
        if (++guard > 1200) throw numeric_error("luxemburg_norm: no lower bracket");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-10 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (phi(mid) <= 1.0 ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

namespace {

void spot_check_kernel(const KernelCoefficient& k, const QuadratureTable& t,
                       const GridDomain& dom) {
    if (t.size() == 0) return;
    if (!(k.lambda >= 1.0) || !std::isfinite(k.lambda))
        throw structure_error("kernel '" + k.name + "': ellipticity constant must be >= 1");
    const double tol = 1e-9 * k.lambda;
    const std::size_t step = std::max<std::size_t>(1, t.size() / 64);
    for (std::size_t r = 0; r < t.size(); r += step) {
        const Point x = dom.position(t.a[r]), y = dom.position(t.b[r]);
        const double v = k.eval(x, y), vr = k.eval(y, x);
        std::ostringstream at;
        at << " at pair (" << x[0] << "," << x[1] << ")-(" << y[0] << "," << y[1] << ")";
        if (!(std::abs(v - vr) <= tol))
            throw structure_error("kernel '" + k.name + "' is not symmetric" + at.str());
        if (!(v >= 1.0 / k.lambda - tol) || !(v <= k.lambda + tol))
            throw structure_error("kernel '" + k.name + "' leaves its ellipticity band" +
                                  at.str());
    }
}

} // namespace

double energy_If(const GrowthFunction& gf, const KernelCoefficient& k, const GridFunction& u,
                 const QuadratureTable& t) {
    spot_check_kernel(k, t, u.domain());
    const GridDomain& dom = u.domain();
    double acc = 0.0;
    for (std::size_t r = 0; r < t.size(); ++r) {
        const double kv = k.eval(dom.position(t.a[r]), dom.position(t.b[r]));
        acc += 2.0 * t.w[r] * kv * gf.value(std::abs(u[t.a[r]] - u[t.b[r]]) * t.inv_dist_s[r]);
    }
    return acc;
}

double energy_If(const GrowthFunction& gf, const KernelCoefficient& k, const GridFunction& u,
                 double s) {
    return energy_If(gf, k, u, pair_weights(u.domain(), s));
}

TailResult tail_fprime(const GrowthFunction& gf, const GridFunction& u, int x0, double R,
                       double s) {
    const GridDomain& dom = u.domain();
    if (x0 < 0 || x0 >= dom.size()) throw std::domain_error("tail_fprime: bad center node");
    if (s <= 0.0 || s >= 1.0) throw std::invalid_argument("tail_fprime: s must lie in (0,1)");
    if (!(R > 0.0)) throw std::invalid_argument("tail_fprime: R must be positive");
    if (R > 0.25 * dom.R_infinity() * (1.0 + 1e-12))
        throw std::invalid_argument("tail_fprime: R exceeds R_infinity/4");
    const Point c = dom.position(x0);
    const double cnorm = std::sqrt(c[0] * c[0] + c[1] * c[1]);
    if (cnorm + R > dom.R_infinity() * (1.0 + 1e-12))
        throw std::invalid_argument("tail_fprime: B_R(x0) leaves the represented ball");

    const int d = dom.dim();
    const double hd = dom.cell_measure();
    const double Rs = std::pow(R, s);
    double I = 0.0;
    for (int i = 0; i < dom.size(); ++i) {
        const double r = dist(dom.position(i), c);
        if (r <= R * (1.0 + 1e-12)) continue;
        const double rs = std::pow(r, s);
        I += hd * gf.derivative(std::abs(u[i]) / rs) * std::pow(r, -d) / rs;
    }
    I *= (1.0 - s) * Rs;

    // everything beyond the represented ball, charged at the largest slope the
    // data admits out there: integral of r^{-d-s} over r > R_eff is
    // omega_d R_eff^{-s} / s in polar form
    const double R_eff = dom.R_infinity() - cnorm;
    const double omega_d = d == 1 ? 2.0 : 2.0 * std::numbers::pi;
    const double excess = (1.0 - s) * Rs *
                          gf.derivative(u.max_abs() / std::pow(R_eff, s)) * omega_d *
                          std::pow(R_eff, -s) / s;

    TailResult out;
    out.level = I;
    out.tail = Rs * gf.derivative_inverse(I);
    out.upper_bound = Rs * gf.derivative_inverse(I + excess);
    return out;
}

} // namespace nlo
