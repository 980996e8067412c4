#include "nlo/growth.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>
#include <limits>

namespace nlo {

namespace {

// integer-exponent fast paths; the solver hammers these in inner loops
inline double powi_or(double t, double e) {
    if (e == 2.0) return t * t;
    if (e == 3.0) return t * t * t;
    if (e == 1.0) return t;
    if (e == 4.0) { double s = t * t; return s * s; }
    return std::pow(t, e);
}

inline double rel_margin_ge(double x, double y) {
    // slack of the claim x >= y, scaled so tolerances are relative
    return (x - y) / (1.0 + std::max(std::abs(x), std::abs(y)));
}

double adaptive_simpson_rec(const std::function<double(double)>& fn, double a, double b,
                            double fa, double fm, double fb, double whole, double tol,
                            int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = fn(lm), frm = fn(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (std::abs(delta) <= 15.0 * tol || (b - a) < 1e-14 * (std::abs(a) + std::abs(b)))
        return left + right + delta / 15.0;
    if (depth <= 0) throw numeric_error("adaptive quadrature: depth exhausted before tolerance");
    return adaptive_simpson_rec(fn, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(fn, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double adaptive_simpson(const std::function<double(double)>& fn, double a, double b,
                        double rel_tol) {
    if (b <= a) return 0.0;
    const double fa = fn(a), fb = fn(b), fm = fn(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    const double tol = rel_tol * std::max(std::abs(whole), 1e-12);
    return adaptive_simpson_rec(fn, a, b, fa, fm, fb, whole, tol, 48);
}

} // namespace

// ---------------------------------------------------------------------------
// sampled family

double SampledData::value(double x) const {
    if (x <= 0.0) return 0.0;
    if (x < t.front()) return f.front() * std::pow(x / t.front(), p_lower);
    if (x >= t.back()) return f.back() * std::pow(x / t.back(), q_upper);
    const auto it = std::upper_bound(t.begin(), t.end(), x);
    const std::size_t k = static_cast<std::size_t>(it - t.begin()) - 1;
    const double dt = t[k + 1] - t[k];
    const double di = d[k], dj = d[k + 1], sg = sigma[k];
    const double u = x - t[k];
    if (std::abs(di + dj - 2.0 * sg) <= 1e-13 * (std::abs(di) + std::abs(dj) + 1e-300)) {
        // single quadratic piece (degenerates to a line when di == dj)
        return f[k] + di * u + (dj - di) / (2.0 * dt) * u * u;
    }
    // knot placed so the derivative passes through the interval secant;
    // this keeps f' monotone and the spline interpolating at the same time
    const double A = dt * (dj - sg) / (dj - di);
    if (u <= A) {
        if (A <= 0.0) return f[k];
        return f[k] + di * u + (sg - di) / (2.0 * A) * u * u;
    }
    const double B = dt - A;
    const double fxi = f[k] + 0.5 * A * (di + sg);
    const double v = u - A;
    return fxi + sg * v + (dj - sg) / (2.0 * B) * v * v;
}

double SampledData::derivative(double x) const {
    if (x <= 0.0) {
        if (fprime0) return *fprime0;
        return p_lower > 1.0 ? 0.0 : p_lower * f.front() / t.front();
    }
    if (x < t.front()) return p_lower * value(x) / x;
    if (x >= t.back()) return q_upper * value(x) / x;
    const auto it = std::upper_bound(t.begin(), t.end(), x);
    const std::size_t k = static_cast<std::size_t>(it - t.begin()) - 1;
    const double dt = t[k + 1] - t[k];
    const double di = d[k], dj = d[k + 1], sg = sigma[k];
    const double u = x - t[k];
    if (u == 0.0) return di;
    if (std::abs(di + dj - 2.0 * sg) <= 1e-13 * (std::abs(di) + std::abs(dj) + 1e-300))
        return di + (dj - di) / dt * u;
    const double A = dt * (dj - sg) / (dj - di);
    if (u <= A) return di + (sg - di) / A * u;
    const double B = dt - A;
    return sg + (dj - sg) / B * (u - A);
}

// ---------------------------------------------------------------------------
// factories

GrowthFunction GrowthFunction::power(double p) {
    if (!(p >= 1.0)) throw std::invalid_argument("power growth needs p >= 1");
    GrowthFunction g;
    g.family_ = GrowthFamily::power;
    g.p_ = p;
    g.p_lower_ = g.q_upper_ = p;
    g.c0_ = 1.0;
    return g;
}

GrowthFunction GrowthFunction::sum(double p, double q) {
    if (!(p >= 1.0) || !(q >= p)) throw std::invalid_argument("sum growth needs 1 <= p <= q");
    GrowthFunction g;
    g.family_ = GrowthFamily::sum;
    g.p_ = p;
    g.q_ = q;
    g.p_lower_ = p;
    g.q_upper_ = q;
    g.c0_ = 1.0; // t^p + t^q >= t^p
    return g;
}

GrowthFunction GrowthFunction::power_log(double p) {
    if (!(p >= 1.0)) throw std::invalid_argument("power_log growth needs p >= 1");
    GrowthFunction g;
    g.family_ = GrowthFamily::power_log;
    g.p_ = p;
    g.p_lower_ = p;
    g.q_upper_ = p + 1.0; // t/( (1+t) log(1+t) ) lies in (0, 1)
    // no c0: f/t^p vanishes at 0, f/t^{p+1} vanishes at infinity
    return g;
}

GrowthFunction GrowthFunction::sampled(std::vector<double> nodes, std::vector<double> values,
                                       double p_lower, double q_upper,
                                       std::optional<double> fprime0) {
    if (nodes.size() != values.size() || nodes.size() < 2)
        throw std::invalid_argument("sampled growth needs >= 2 matching nodes/values");
    if (!(p_lower >= 1.0) || !(q_upper >= p_lower))
        throw std::invalid_argument("sampled growth needs 1 <= p_lower <= q_upper");
    const std::size_t n = nodes.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (!(values[i] >= 0.0)) throw std::invalid_argument("sampled values must be >= 0");
        if (i && !(nodes[i] > nodes[i - 1]))
            throw std::invalid_argument("sampled nodes must be strictly increasing");
    }
    if (!(nodes.front() > 0.0)) throw std::invalid_argument("sampled nodes must be positive");

    auto data = std::make_shared<SampledData>();
    data->t = std::move(nodes);
    data->f = std::move(values);
    data->p_lower = p_lower;
    data->q_upper = q_upper;
    data->fprime0 = fprime0;
    data->sigma.resize(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        data->sigma[i] = (data->f[i + 1] - data->f[i]) / (data->t[i + 1] - data->t[i]);
        if (data->sigma[i] < -1e-12)
            throw std::invalid_argument("sampled values must be nondecreasing");
        if (i && data->sigma[i] < data->sigma[i - 1] * (1.0 - 1e-9) - 1e-12)
            throw std::invalid_argument("sampled data must have nondecreasing secants (convexity)");
    }
    data->d.resize(n);
    if (n == 2) {
        data->d[0] = data->d[1] = data->sigma[0];
    } else {
        for (std::size_t i = 1; i + 1 < n; ++i)
            data->d[i] = 0.5 * (data->sigma[i - 1] + data->sigma[i]);
        data->d[0] = std::max(0.0, 2.0 * data->sigma[0] - data->d[1]);
        data->d[n - 1] = 2.0 * data->sigma[n - 2] - data->d[n - 2];
    }
    for (std::size_t i = 1; i < n; ++i) // squash fp noise, keep f' monotone
        data->d[i] = std::max(data->d[i], data->d[i - 1]);

    GrowthFunction g;
    g.family_ = GrowthFamily::sampled;
    g.p_lower_ = p_lower;
    g.q_upper_ = q_upper;
    g.data_ = std::move(data);
    return g;
}

GrowthFunction GrowthFunction::with_affine(double mul, double add) const {
    if (!(mul > 0.0)) throw std::invalid_argument("with_affine needs mul > 0");
    GrowthFunction g = *this;
    g.scale_ = 1.0 / mul;
    g.offset_ = -add / mul;
    g.c0_.reset();
    return g;
}

// ---------------------------------------------------------------------------
// evaluation

double GrowthFunction::base_value(double t) const {
    switch (family_) {
    case GrowthFamily::power: return powi_or(t, p_);
    case GrowthFamily::sum: return powi_or(t, p_) + powi_or(t, q_);
    case GrowthFamily::power_log: return powi_or(t, p_) * std::log1p(t);
    case GrowthFamily::sampled: return data_->value(t);
    }
    return 0.0;
}

double GrowthFunction::base_derivative(double t) const {
    switch (family_) {
    case GrowthFamily::power: return p_ * powi_or(t, p_ - 1.0);
    case GrowthFamily::sum: return p_ * powi_or(t, p_ - 1.0) + q_ * powi_or(t, q_ - 1.0);
    case GrowthFamily::power_log:
        return p_ * powi_or(t, p_ - 1.0) * std::log1p(t) + powi_or(t, p_) / (1.0 + t);
    case GrowthFamily::sampled: return data_->derivative(t);
    }
    return 0.0;
}

double GrowthFunction::value(double t) const {
    if (t < 0.0) throw std::domain_error("growth function argument must be nonnegative");
    return (base_value(t) - offset_) / scale_;
}

double GrowthFunction::derivative(double t) const {
    if (t < 0.0) throw std::domain_error("growth derivative argument must be nonnegative");
    return base_derivative(t) / scale_;
}

double GrowthFunction::conjugate(double y) const {
    if (y < 0.0) throw std::domain_error("conjugate argument must be nonnegative");
    if (y == 0.0) return std::max(0.0, -value(0.0));
    if (family_ == GrowthFamily::power && p_ > 1.0) {
        const double tstar = std::pow(scale_ * y / p_, 1.0 / (p_ - 1.0));
        return y * tstar - value(tstar);
    }
    double hi = 1.0;
    int guard = 0;
    while (derivative(hi) < y) {
        hi *= 2.0;
        if (++guard > 120)
            throw numeric_error("conjugate: slope bracket exhausted (f' appears bounded)");
    }
    // ternary search on the concave map t -> y t - f(t)
    double lo = 0.0;
    for (int it = 0; it < 240; ++it) {
        const double m1 = lo + (hi - lo) / 3.0;
        const double m2 = hi - (hi - lo) / 3.0;
        if (y * m1 - value(m1) < y * m2 - value(m2))
            lo = m1;
        else
            hi = m2;
    }
    const double tb = 0.5 * (lo + hi);
    return std::max(0.0, y * tb - value(tb));
}

double GrowthFunction::derivative_inverse(double y) const {
    if (y < 0.0) throw std::domain_error("derivative_inverse argument must be nonnegative");
    if (y == 0.0) return 0.0;
    if (derivative(0.0) >= y) return 0.0;
    if (family_ == GrowthFamily::power) {
        if (p_ == 1.0) {
            if (y <= 1.0 / scale_) return 0.0;
            throw numeric_error("derivative_inverse: bracket exhausted (f' constant)");
        }
        return std::pow(scale_ * y / p_, 1.0 / (p_ - 1.0));
    }
    double hi = 1.0;
    while (derivative(hi) < y) {
        hi *= 2.0;
        if (hi > 1e18)
            throw numeric_error("derivative_inverse: bracket exhausted before f' reached target");
    }
    double lo = 0.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (derivative(mid) >= y)
            hi = mid;
        else
            lo = mid;
    }
    return hi; // leftmost point with f' >= y, so plateaus resolve to their left edge
}

double GrowthFunction::auxiliary_g(double t) const {
    if (t < 0.0) throw std::domain_error("auxiliary_g argument must be nonnegative");
    if (std::abs(value(0.0)) > 1e-12)
        throw std::invalid_argument("auxiliary_g needs f(0) = 0; normalize first");
    if (t == 0.0) return 0.0;
    switch (family_) {
    case GrowthFamily::power: return value(t) / p_;
    case GrowthFamily::sum:
        return (powi_or(t, p_) / p_ + powi_or(t, q_) / q_) / scale_;
    default: break;
    }
    // int_0^t f(s)/s ds in the log variable s = e^tau; the slice below s_lo
    // contributes at most f(s_lo)/p_lower which is far below tolerance
    const double s_lo = std::min(1e-8, 1e-8 * t);
    auto integrand = [this](double tau) { return value(std::exp(tau)); };
    return adaptive_simpson(integrand, std::log(s_lo), std::log(t), 1e-9);
}

double GrowthFunction::auxiliary_F(double t) const {
    if (t < 0.0) throw std::domain_error("auxiliary_F argument must be nonnegative");
    return auxiliary_g(std::pow(t, 1.0 / p_lower_));
}

double GrowthFunction::auxiliary_g_prime(double t) const {
    if (t < 0.0) throw std::domain_error("auxiliary_g_prime argument must be nonnegative");
    if (t == 0.0) return p_lower_ > 1.0 ? 0.0 : derivative(0.0);
    return value(t) / t;
}

GrowthFunction GrowthFunction::normalized() const {
    const double b0 = base_value(0.0);
    const double b1 = base_value(1.0);
    if (!(b1 > b0)) throw std::invalid_argument("cannot normalize a degenerate growth function");
    GrowthFunction g = *this;
    const double old_scale = g.scale_;
    g.offset_ = b0;
    g.scale_ = b1 - b0;
    switch (family_) {
    case GrowthFamily::power:
    case GrowthFamily::sum:
        g.c0_ = 1.0 / g.scale_; // base >= t^{p_lower} pointwise
        break;
    default:
        if (g.c0_ && offset_ == 0.0 && b0 == 0.0)
            g.c0_ = *g.c0_ * old_scale / g.scale_;
        break;
    }
    return g;
}

bool GrowthFunction::is_normalized() const {
    return std::abs(value(0.0)) <= 1e-12 && std::abs(value(1.0) - 1.0) <= 1e-12;
}

std::string GrowthFunction::family_name() const {
    switch (family_) {
    case GrowthFamily::power: return "power";
    case GrowthFamily::sum: return "sum";
    case GrowthFamily::power_log: return "powerlog";
    case GrowthFamily::sampled: return "sampled";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// serialization

void to_json(nlohmann::json& j, const GrowthFunction& gf) {
    j = nlohmann::json{{"family", gf.family_name()},
                       {"p_lower", gf.p_lower_},
                       {"q_upper", gf.q_upper_},
                       {"offset", gf.offset_},
                       {"scale", gf.scale_}};
    if (gf.family_ == GrowthFamily::sampled) {
        j["nodes"] = gf.data_->t;
        j["values"] = gf.data_->f;
        if (gf.data_->fprime0) j["fprime0"] = *gf.data_->fprime0;
    } else {
        j["p"] = gf.p_;
        if (gf.family_ == GrowthFamily::sum) j["q"] = gf.q_;
    }
    if (gf.c0_) j["c0"] = *gf.c0_;
}

GrowthFunction growth_from_json(const nlohmann::json& j) {
    const std::string fam = j.at("family").get<std::string>();
    GrowthFunction g;
    if (fam == "power") {
        g = GrowthFunction::power(j.at("p").get<double>());
    } else if (fam == "sum") {
        g = GrowthFunction::sum(j.at("p").get<double>(), j.at("q").get<double>());
    } else if (fam == "powerlog") {
        g = GrowthFunction::power_log(j.at("p").get<double>());
    } else if (fam == "sampled") {
        std::optional<double> fp0;
        if (j.contains("fprime0")) fp0 = j.at("fprime0").get<double>();
        g = GrowthFunction::sampled(j.at("nodes").get<std::vector<double>>(),
                                    j.at("values").get<std::vector<double>>(),
                                    j.at("p_lower").get<double>(),
                                    j.at("q_upper").get<double>(), fp0);
    } else {
        throw config_error("unknown growth family '" + fam + "'");
    }
    if (j.contains("offset")) g.offset_ = j.at("offset").get<double>();
    if (j.contains("scale")) g.scale_ = j.at("scale").get<double>();
    if (j.contains("c0")) g.c0_ = j.at("c0").get<double>();
    if (j.value("normalized", false)) g = g.normalized();
    return g;
}

// ---------------------------------------------------------------------------
// structural checks

std::vector<double> log_grid(double lo, double hi, int count) {
    if (!(lo > 0.0) || !(hi > lo) || count < 2)
        throw std::invalid_argument("log_grid needs 0 < lo < hi and count >= 2");
    std::vector<double> g(static_cast<std::size_t>(count));
    const double step = std::log(hi / lo) / (count - 1);
    for (int i = 0; i < count; ++i) g[static_cast<std::size_t>(i)] = lo * std::exp(step * i);
    g.front() = lo;
    g.back() = hi;
    return g;
}

GrowthBounds check_growth_bounds(const GrowthFunction& gf, const std::vector<double>& t_grid,
                                 double tol) {
    if (t_grid.size() < 2) throw std::invalid_argument("check_growth_bounds: grid too small");
    std::vector<double> grid = t_grid;
    std::sort(grid.begin(), grid.end());
    GrowthBounds out;
    out.p_est = std::numeric_limits<double>::infinity();
    out.q_est = -std::numeric_limits<double>::infinity();
    double prev_hi = std::numeric_limits<double>::infinity(); // f/t^q, must not increase
    double prev_lo = 0.0;                                     // f/t^p, must not decrease
    for (double t : grid) {
        if (!(t > 0.0)) throw std::invalid_argument("check_growth_bounds: grid must be positive");
        const double ft = gf.value(t);
        if (!(ft > 0.0))
            throw std::invalid_argument("degenerate growth function: f vanishes at t > 0");
        const double ratio = t * gf.derivative(t) / ft;
        out.p_est = std::min(out.p_est, ratio);
        out.q_est = std::max(out.q_est, ratio);
        const double hi = ft / std::pow(t, gf.q_upper());
        const double lo = ft / std::pow(t, gf.p_lower());
        if (hi > prev_hi * (1.0 + tol) + tol)
            throw structure_error("f(t)/t^q fails to be nonincreasing at t = " + std::to_string(t));
        if (lo < prev_lo * (1.0 - tol) - tol)
            throw structure_error("f(t)/t^p fails to be nondecreasing at t = " + std::to_string(t));
        prev_hi = hi;
        prev_lo = lo;
    }
    if (out.p_est < gf.p_lower() - tol * (1.0 + gf.p_lower()))
        throw structure_error("growth ratio drops below declared p_lower: est " +
                              std::to_string(out.p_est));
    if (out.q_est > gf.q_upper() + tol * (1.0 + gf.q_upper()))
        throw structure_error("growth ratio exceeds declared q_upper: est " +
                              std::to_string(out.q_est));
    return out;
}

DoublingReport doubling_check(const GrowthFunction& gf, double lambda, double t, double tol) {
    if (!(lambda > 0.0) || t < 0.0)
        throw std::invalid_argument("doubling_check needs lambda > 0, t >= 0");
    const double p = gf.p_lower(), q = gf.q_upper();
    DoublingReport rep;
    rep.worst_margin = std::numeric_limits<double>::infinity();
    auto band = [&](double x, double lo, double hi) {
        const double m = std::min(rel_margin_ge(x, lo), rel_margin_ge(hi, x));
        rep.worst_margin = std::min(rep.worst_margin, m);
        return m >= -tol;
    };
    const double fpt = gf.derivative(t);
    const double lu = std::max(lambda, 1.0 / lambda);
    rep.scale_up_ok = band(gf.derivative(lu * t), (p / q) * std::pow(lu, p - 1.0) * fpt,
                           (q / p) * std::pow(lu, q - 1.0) * fpt);
    const double ld = std::min(lambda, 1.0 / lambda);
    rep.scale_down_ok = band(gf.derivative(ld * t), (p / q) * std::pow(ld, q - 1.0) * fpt,
                             (q / p) * std::pow(ld, p - 1.0) * fpt);
    const double s = lambda * t;
    rep.subadditive_ok = band(gf.derivative(t + s), 0.5 * (fpt + gf.derivative(s)),
                              (q / p) * std::pow(2.0, q - 1.0) * (fpt + gf.derivative(s)));
    return rep;
}

std::vector<CheckResult> growth_suite(const GrowthFunction& gf, const std::vector<double>& t_grid,
                                      double tol_closed, double tol_quad) {
    std::vector<double> grid = t_grid;
    std::sort(grid.begin(), grid.end());
    const std::size_t n = grid.size();
    const std::size_t stride = std::max<std::size_t>(1, n / 20);
    std::vector<double> sub;
    for (std::size_t i = 0; i < n; i += stride) sub.push_back(grid[i]);

    const bool spline_backed = gf.family() == GrowthFamily::sampled;
    const bool closed_aux =
        gf.family() == GrowthFamily::power || gf.family() == GrowthFamily::sum;
    const double tol_val = spline_backed ? tol_quad : tol_closed;
    const double tol_aux = (spline_backed || !closed_aux) ? tol_quad : tol_closed;

    std::vector<CheckResult> out;
    auto begin_check = [&](const std::string& name, double tol) {
        out.push_back({name, true, std::numeric_limits<double>::infinity()});
        return tol;
    };
    auto record = [&](double margin, double tol) {
        CheckResult& c = out.back();
        c.worst = std::min(c.worst, margin);
        if (margin < -tol) c.pass = false;
    };

    const double p = gf.p_lower(), q = gf.q_upper();

    { // declared growth band + the equivalent monotonicity statements
        double tol = begin_check("growth-bounds", tol_val);
        try {
            GrowthBounds b = check_growth_bounds(gf, grid, tol);
            record(std::min(b.p_est - p + tol, q - b.q_est + tol), tol);
        } catch (const std::exception&) {
            record(-1.0, tol);
        }
    }

    { // f(t)/t nondecreasing
        double tol = begin_check("slope-monotone", tol_val);
        for (std::size_t i = 1; i < n; ++i)
            record(rel_margin_ge(gf.value(grid[i]) / grid[i], gf.value(grid[i - 1]) / grid[i - 1]),
                   tol);
    }

    { // f' nondecreasing (convexity)
        double tol = begin_check("derivative-monotone", tol_val);
        for (std::size_t i = 1; i < n; ++i)
            record(rel_margin_ge(gf.derivative(grid[i]), gf.derivative(grid[i - 1])), tol);
    }

    { // two-sided derivative scaling + subadditivity
        double tol = begin_check("derivative-doubling", tol_val);
        double tol2 = tol; // same tolerance; kept separate for clarity
        const double lambdas[] = {1.0, 1.25, 2.0, 4.0, 16.0};
        for (double t : sub)
            for (double l : lambdas) {
                DoublingReport rep = doubling_check(gf, l, t, tol2);
                record(rep.worst_margin, tol);
            }
    }

    { // f(a+b) - f(a) >= theta f'(a) b + (1-theta) f(b)
        double tol = begin_check("convexity-gap", tol_val);
        const double thetas[] = {0.0, 0.5, 1.0};
        for (double a : sub)
            for (double b : sub)
                for (double th : thetas)
                    record(rel_margin_ge(gf.value(a + b) - gf.value(a),
                                         th * gf.derivative(a) * b + (1.0 - th) * gf.value(b)),
                           tol);
    }

    { // f(|mu a - b|) - f(|a-b|) <= f'(b) a
        double tol = begin_check("shift-difference", tol_val);
        const double mus[] = {0.0, 0.5, 1.0};
        for (double a : sub)
            for (double b : sub)
                for (double mu : mus)
                    record(rel_margin_ge(gf.derivative(b) * a,
                                         gf.value(std::abs(mu * a - b)) -
                                             gf.value(std::abs(a - b))),
                           tol);
    }

    { // f(t) <= c f(s) with c > 1 forces t <= c s
        double tol = begin_check("value-comparison", tol_val);
        for (double t : sub)
            for (double s : sub) {
                const double fs = gf.value(s);
                if (!(fs > 0.0)) continue;
                const double c = gf.value(t) / fs;
                if (c > 1.0) record(rel_margin_ge(c * s, t), tol);
            }
    }

    { // f*(f'(t)) = f'(t) t - f(t)
        double tol = begin_check("conjugate-identity", tol_val);
        for (double t : grid) {
            const double y = gf.derivative(t);
            const double lhs = gf.conjugate(y);
            const double rhs = y * t - gf.value(t);
            record(tol - std::abs(lhs - rhs) / (1.0 + std::abs(gf.value(t))), tol);
        }
    }

    { // y t <= f(t) + f*(y)
        double tol = begin_check("conjugate-young", tol_val);
        for (double ts : sub) {
            const double y = gf.derivative(ts);
            const double fstar = gf.conjugate(y);
            for (double t : sub) record(rel_margin_ge(gf.value(t) + fstar, y * t), tol);
        }
    }

    { // f*(f'(t)) <= (q-1) f(t)
        double tol = begin_check("conjugate-growth", tol_val);
        for (double t : sub)
            record(rel_margin_ge((q - 1.0) * gf.value(t), gf.conjugate(gf.derivative(t))), tol);
    }

    { // f'((f')^{-1}(y)) >= y  and  (f')^{-1}(f'(t)) <= t
        double tol = begin_check("inverse-composition", tol_val);
        for (double t : sub) {
            const double y = gf.derivative(t);
            record(rel_margin_ge(gf.derivative(gf.derivative_inverse(y)), y), tol);
            record(rel_margin_ge(t, gf.derivative_inverse(y)), tol);
        }
    }

    { // f(1)(t^p - 1) <= f(t) <= f(1)(t^q + 1)
        double tol = begin_check("envelope", tol_val);
        const double f1 = gf.value(1.0);
        for (double t : grid) {
            const double ft = gf.value(t);
            record(rel_margin_ge(ft, f1 * (std::pow(t, p) - 1.0)), tol);
            record(rel_margin_ge(f1 * (std::pow(t, q) + 1.0), ft), tol);
        }
    }

    if (gf.c0()) { // coercivity c0 t^p <= f(t)
        double tol = begin_check("coercivity", tol_val);
        for (double t : grid) record(rel_margin_ge(gf.value(t), *gf.c0() * std::pow(t, p)), tol);
    }

    { // (1/q) f <= g <= (1/p) f
        double tol = begin_check("auxiliary-sandwich", tol_aux);
        for (double t : grid) {
            const double ft = gf.value(t), gt = gf.auxiliary_g(t);
            record(rel_margin_ge(gt, ft / q), tol);
            record(rel_margin_ge(ft / p, gt), tol);
        }
    }

    { // (1/q) f' <= g' <= (1/p) f'
        double tol = begin_check("auxiliary-derivative-sandwich", tol_val);
        for (double t : grid) {
            const double fpt = gf.derivative(t), gpt = gf.auxiliary_g_prime(t);
            record(rel_margin_ge(gpt, fpt / q), tol);
            record(rel_margin_ge(fpt / p, gpt), tol);
        }
    }

    { // F(t) <= t F'(t) <= (q/p) F(t), with t F'(t) = f(t^{1/p})/p
        double tol = begin_check("auxiliary-scaling", tol_aux);
        for (double t : sub) {
            const double Ft = gf.auxiliary_F(t);
            const double tFp = gf.value(std::pow(t, 1.0 / p)) / p;
            record(rel_margin_ge(tFp, Ft), tol);
            record(rel_margin_ge((q / p) * Ft, tFp), tol);
        }
    }

    return out;
}

} // namespace nlo
