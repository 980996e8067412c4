#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "nlo/errors.hpp"

namespace nlo {

enum class GrowthFamily { power, sum, power_log, sampled };

// Monotone-convex quadratic spline through sampled (t, f(t)) data.
// f' is piecewise linear and nondecreasing; flat segments of the data stay
// exactly flat in f', which is what the generalized inverse relies on.
struct SampledData {
    std::vector<double> t;      // strictly increasing, > 0
    std::vector<double> f;      // nondecreasing, convex secants
    std::vector<double> d;      // node derivatives, nondecreasing
    std::vector<double> sigma;  // interval secants
    double p_lower = 1.0, q_upper = 1.0;
    std::optional<double> fprime0;

    double value(double x) const;
    double derivative(double x) const;
};

// A convex growth function t >= 0 -> f(t), with declared growth exponents
// 1 <= p_lower <= q_upper: p_lower*f(t) <= t*f'(t) <= q_upper*f(t).
// Internally f(t) = (B(t) - offset)/scale where B is the pure family shape;
// normalized() rescales so that f(0) = 0 and f(1) = 1 exactly.
class GrowthFunction {
public:
    static GrowthFunction power(double p);                      // t^p (already normalized)
    static GrowthFunction sum(double p, double q);              // t^p + t^q
    static GrowthFunction power_log(double p);                  // t^p log(1+t)
    static GrowthFunction sampled(std::vector<double> nodes, std::vector<double> values,
                                  double p_lower, double q_upper,
                                  std::optional<double> fprime0 = std::nullopt);

    // raw affine variant a*B(t) + b of the same base shape (used to exercise
    // normalization; b != 0 breaks f(0) = 0 until normalized)
    GrowthFunction with_affine(double mul, double add) const;

    double value(double t) const;            // f(t), t >= 0
    double derivative(double t) const;       // f'(t)
    double conjugate(double y) const;        // sup_{t>=0} (y t - f(t))
    double derivative_inverse(double y) const; // inf { t : f'(t) >= y }

    // g(t) = int_0^t f(s)/s ds  and  F(t) = g(t^{1/p_lower}); g' = f(t)/t.
    double auxiliary_F(double t) const;
    double auxiliary_g(double t) const;
    double auxiliary_g_prime(double t) const;

    GrowthFunction normalized() const;
    bool is_normalized() const;

    double p_lower() const { return p_lower_; }
    double q_upper() const { return q_upper_; }
    GrowthFamily family() const { return family_; }
    const std::optional<double>& c0() const { return c0_; }
    GrowthFunction& set_c0(std::optional<double> c) { c0_ = c; return *this; }
    std::string family_name() const;

private:
    GrowthFunction() = default;

    double base_value(double t) const;
    double base_derivative(double t) const;

    GrowthFamily family_ = GrowthFamily::power;
    double p_ = 2.0, q_ = 2.0;          // family exponents (q_ unused except sum)
    double p_lower_ = 2.0, q_upper_ = 2.0;
    std::optional<double> c0_;
    double offset_ = 0.0, scale_ = 1.0; // f = (B - offset)/scale
    std::shared_ptr<const SampledData> data_; // sampled family only

    friend void to_json(nlohmann::json&, const GrowthFunction&);
    friend GrowthFunction growth_from_json(const nlohmann::json&);
};

void to_json(nlohmann::json& j, const GrowthFunction& gf);
GrowthFunction growth_from_json(const nlohmann::json& j);

struct GrowthBounds {
    double p_est = 0.0, q_est = 0.0;
};

// (min, max) of t f'(t)/f(t) over the grid.  Throws structure_error when the
// estimates fall outside the declared [p_lower, q_upper] band (tolerance tol)
// or when the equivalent monotonicity statements f/t^q decreasing,
// f/t^p increasing fail along the grid.
GrowthBounds check_growth_bounds(const GrowthFunction& gf, const std::vector<double>& t_grid,
                                 double tol = 1e-8);

struct DoublingReport {
    bool scale_up_ok = false;   // f'(lambda t) within [(p/q) l^{p-1}, (q/p) l^{q-1}] f'(t), l >= 1
    bool scale_down_ok = false; // mirrored bound for l <= 1
    bool subadditive_ok = false;
    double worst_margin = 0.0;  // most negative slack seen (>= 0 when all hold)
};

DoublingReport doubling_check(const GrowthFunction& gf, double lambda, double t,
                              double tol = 1e-8);

struct CheckResult {
    std::string name;
    bool pass = false;
    double worst = 0.0; // worst (most negative) relative margin observed
};

// The whole battery of structural checks on one growth function over a grid:
// growth bounds, slope monotonicity, doubling, subadditivity, convexity gap,
// shifted-difference bound, comparison lemma, conjugate identities, envelope,
// auxiliary-pair sandwiches.  tol_closed for exact identities, tol_quad for
// anything that goes through quadrature or spline evaluation.
std::vector<CheckResult> growth_suite(const GrowthFunction& gf,
                                      const std::vector<double>& t_grid,
                                      double tol_closed = 1e-8,
                                      double tol_quad = 1e-4);

std::vector<double> log_grid(double lo, double hi, int count);

} // namespace nlo
