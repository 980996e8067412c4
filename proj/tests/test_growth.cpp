#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "nlo/growth.hpp"

using nlo::GrowthFunction;

namespace {

bool close(double a, double b, double tol) {
    return std::abs(a - b) <= tol * (1.0 + std::max(std::abs(a), std::abs(b)));
}

// independent conjugate oracle: dense scan of y t - f(t), then one parabolic refine
double conjugate_scan(const GrowthFunction& f, double y, double t_hi) {
    const int n = 4'000'000;
    double best = 0.0;
    const double step = t_hi / n;
    for (int i = 0; i <= n; ++i) {
        const double t = step * i;
        best = std::max(best, y * t - f.value(t));
    }
    return best;
}

// fixed-rule quadrature oracle for g(t) = int_0^t f(s)/s ds: composite Simpson
// with many panels in the log variable, refined once for a Richardson estimate
double aux_g_oracle(const GrowthFunction& f, double t) {
    auto simpson = [&](int panels) {
        const double a = std::log(1e-10 * t), b = std::log(t);
        const double h = (b - a) / panels;
        double acc = f.value(std::exp(a)) + f.value(std::exp(b));
        for (int i = 1; i < panels; ++i)
            acc += (i % 2 ? 4.0 : 2.0) * f.value(std::exp(a + h * i));
        return acc * h / 3.0;
    };
    const double c = simpson(2048), fine = simpson(4096);
    return fine + (fine - c) / 15.0;
}

} // namespace

TEST_CASE("closed-form values and derivatives") {
    auto p2 = GrowthFunction::power(2.0);
    CHECK(p2.value(3.0) == 9.0);
    CHECK(p2.derivative(2.0) == 4.0);
    CHECK(p2.value(0.0) == 0.0);
    CHECK(p2.is_normalized());

    auto s23 = GrowthFunction::sum(2.0, 3.0).normalized();
    CHECK(s23.value(1.0) == doctest::Approx(1.0));
    CHECK(s23.value(2.0) == doctest::Approx((4.0 + 8.0) / 2.0));
    // (2t + 3t^2)/2 at t = 2
    CHECK(s23.derivative(2.0) == doctest::Approx(8.0));

    auto pl = GrowthFunction::power_log(2.0).normalized();
    CHECK(pl.value(1.0) == doctest::Approx(1.0));
    CHECK(pl.value(0.0) == 0.0);
    CHECK(pl.value(3.0) == doctest::Approx(9.0 * std::log(4.0) / std::log(2.0)));

    CHECK_THROWS_AS(p2.value(-0.5), std::domain_error);
    CHECK_THROWS_AS(p2.derivative(-1.0), std::domain_error);
    CHECK_THROWS_AS(GrowthFunction::power(0.5), std::invalid_argument);
    CHECK_THROWS_AS(GrowthFunction::sum(2.0, 1.5), std::invalid_argument);
}

TEST_CASE("normalization pins f(0) = 0 and f(1) = 1") {
    // t^2 + 5 -> t^2, exactly
    auto shifted = GrowthFunction::power(2.0).with_affine(1.0, 5.0);
    CHECK(shifted.value(0.0) == 5.0);
    auto norm = shifted.normalized();
    CHECK(norm.value(0.0) == 0.0);
    CHECK(norm.value(1.0) == 1.0);
    CHECK(norm.value(3.0) == 9.0);

    // 3 t^2 -> t^2
    auto scaled = GrowthFunction::power(2.0).with_affine(3.0, 0.0).normalized();
    CHECK(scaled.value(2.0) == doctest::Approx(4.0));

    // 2 t^2 + t^3 via samples -> (2 t^2 + t^3)/3
    std::vector<double> nodes = nlo::log_grid(1e-3, 1e2, 800);
    std::vector<double> vals;
    for (double t : nodes) vals.push_back(2.0 * t * t + t * t * t);
    auto samp = GrowthFunction::sampled(nodes, vals, 2.0, 3.0).normalized();
    CHECK(samp.value(1.0) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(close(samp.value(2.0), (8.0 + 8.0) / 3.0, 1e-4));

    CHECK(GrowthFunction::sum(2.0, 3.0).normalized().is_normalized());
    CHECK_FALSE(GrowthFunction::sum(2.0, 3.0).is_normalized());
}

TEST_CASE("growth bounds land in the declared band") {
    auto grid = nlo::log_grid(1e-4, 1e4, 200);

    auto b3 = nlo::check_growth_bounds(GrowthFunction::power(3.0), grid);
    CHECK(b3.p_est == doctest::Approx(3.0).epsilon(1e-10));
    CHECK(b3.q_est == doctest::Approx(3.0).epsilon(1e-10));

    auto bs = nlo::check_growth_bounds(GrowthFunction::sum(2.0, 3.0).normalized(), grid);
    CHECK(bs.p_est >= 2.0 - 1e-8);
    CHECK(bs.q_est <= 3.0 + 1e-8);
    CHECK(bs.p_est < bs.q_est);

    auto bl = nlo::check_growth_bounds(GrowthFunction::power_log(2.0).normalized(), grid);
    CHECK(bl.p_est >= 2.0 - 1e-8);
    CHECK(bl.q_est <= 3.0 + 1e-8);

    // a declared band that is too tight must be rejected
    std::vector<double> nodes = nlo::log_grid(1e-4, 1e4, 100);
    std::vector<double> vals;
    for (double t : nodes) vals.push_back(t * t + t * t * t);
    auto lying = GrowthFunction::sampled(nodes, vals, 2.5, 3.0);
    CHECK_THROWS_AS(nlo::check_growth_bounds(lying, nlo::log_grid(1e-3, 1e3, 50), 1e-4),
                    nlo::structure_error);
}

TEST_CASE("sampled family reproduces the power law it was built from") {
    auto nodes = nlo::log_grid(1e-4, 1e4, 2000);
    std::vector<double> vals;
    for (double t : nodes) vals.push_back(t * t);
    auto samp = GrowthFunction::sampled(nodes, vals, 2.0, 2.0);

    auto b = nlo::check_growth_bounds(samp, nlo::log_grid(1e-3, 1e3, 200), 1e-4);
    CHECK(close(b.p_est, 2.0, 2e-4));
    CHECK(close(b.q_est, 2.0, 2e-4));

    for (double t : {3e-4, 0.02, 0.7, 1.0, 13.0, 900.0}) {
        CHECK(close(samp.value(t), t * t, 1e-4));
        CHECK(close(samp.derivative(t), 2.0 * t, 2e-4));
    }
    // extrapolation beyond the sampled range follows the declared power laws
    CHECK(close(samp.value(1e6), 1e12, 1e-3));
    CHECK(close(samp.value(1e-6), 1e-12, 1e-3));
    CHECK(samp.value(0.0) == 0.0);
    CHECK(samp.derivative(0.0) == 0.0);

    CHECK_THROWS_AS(GrowthFunction::sampled({1.0, 2.0, 3.0}, {0.0, 5.0, 6.0}, 1.0, 2.0),
                    std::invalid_argument); // concave secants
}

TEST_CASE("doubling bounds at a point") {
    auto p2 = GrowthFunction::power(2.0);
    auto rep = nlo::doubling_check(p2, 2.0, 1.0);
    CHECK(rep.scale_up_ok);
    CHECK(rep.scale_down_ok);
    CHECK(rep.subadditive_ok);
    // p == q pins f'(lambda t) to lambda f'(t): band [4, 4] around f'(2) = 4
    CHECK(rep.worst_margin >= -1e-12);

    auto s23 = GrowthFunction::sum(2.0, 3.0).normalized();
    for (double l : {0.25, 0.5, 1.0, 3.0, 10.0})
        for (double t : {0.0, 1e-3, 0.3, 1.0, 40.0}) {
            auto r = nlo::doubling_check(s23, l, t);
            CHECK(r.scale_up_ok);
            CHECK(r.scale_down_ok);
            CHECK(r.subadditive_ok);
        }
}

TEST_CASE("conjugate: closed form, oracle, identity") {
    auto p2 = GrowthFunction::power(2.0);
    CHECK(p2.conjugate(4.0) == doctest::Approx(4.0)); // y^2/4
    CHECK(p2.conjugate(0.0) == 0.0);

    auto s23 = GrowthFunction::sum(2.0, 3.0).normalized();
    const double oracle = conjugate_scan(s23, 1.0, 4.0);
    CHECK(close(s23.conjugate(1.0), oracle, 1e-8));

    for (double t : {1e-3, 0.1, 1.0, 7.0, 250.0}) {
        const double y = s23.derivative(t);
        CHECK(close(s23.conjugate(y), y * t - s23.value(t), 1e-10));
        // st <= f(t) + f*(s) with equality at s = f'(t)
        CHECK(s23.value(t) + s23.conjugate(y) >= y * t - 1e-9 * (1.0 + y * t));
        CHECK(s23.conjugate(y) <= (3.0 - 1.0) * s23.value(t) * (1.0 + 1e-9) + 1e-12);
    }

    // bounded slope means the transform blows up past it
    auto linear = GrowthFunction::sampled({1.0, 2.0, 3.0}, {1.0, 2.0, 3.0}, 1.0, 1.0);
    CHECK_THROWS_AS(linear.conjugate(2.0), nlo::numeric_error);
    CHECK_THROWS_AS(p2.conjugate(-1.0), std::domain_error);
}

TEST_CASE("generalized inverse of the derivative") {
    auto p2 = GrowthFunction::power(2.0);
    CHECK(p2.derivative_inverse(6.0) == doctest::Approx(3.0));
    CHECK(p2.derivative_inverse(0.0) == 0.0);

    auto s23 = GrowthFunction::sum(2.0, 3.0).normalized();
    for (double y : {1e-4, 0.3, 2.0, 55.0}) {
        const double t = s23.derivative_inverse(y);
        CHECK(s23.derivative(t) >= y - 1e-9 * (1.0 + y));
        if (t > 1e-12) CHECK(s23.derivative(t * (1.0 - 1e-9)) <= y * (1.0 + 1e-9));
    }

    // flat stretch of f' resolves to its left endpoint
    std::vector<double> nodes = {0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5};
    std::vector<double> vals = {0.25, 1.0, 2.0, 3.0, 4.0, 5.0, 6.5};
    auto plateau = GrowthFunction::sampled(nodes, vals, 2.0, 3.0);
    CHECK(plateau.derivative(1.75) == doctest::Approx(2.0));
    CHECK(plateau.derivative(2.6) == doctest::Approx(2.0));
    CHECK(plateau.derivative_inverse(2.0) == doctest::Approx(1.0).epsilon(1e-9));
    // just above the plateau value the inverse jumps to the far edge
    CHECK(plateau.derivative_inverse(2.2) == doctest::Approx(3.0).epsilon(1e-9));

    auto linear = GrowthFunction::sampled({1.0, 2.0, 3.0}, {1.0, 2.0, 3.0}, 1.0, 1.0);
    CHECK(linear.derivative_inverse(0.5) == 0.0);
    CHECK_THROWS_AS(linear.derivative_inverse(2.0), nlo::numeric_error);
}

TEST_CASE("auxiliary pair g, F") {
    auto p2 = GrowthFunction::power(2.0);
    CHECK(p2.auxiliary_g(1.0) == doctest::Approx(0.5));
    CHECK(p2.auxiliary_F(4.0) == doctest::Approx(2.0));  // F(t) = t/p for t^p
    CHECK(p2.auxiliary_g_prime(2.0) == doctest::Approx(2.0)); // f(t)/t

    auto pl = GrowthFunction::power_log(2.0).normalized();
    for (double t : {0.01, 0.5, 1.0, 20.0, 4000.0}) {
        const double g = pl.auxiliary_g(t);
        CHECK(close(g, aux_g_oracle(pl, t), 1e-6));
        CHECK(g >= pl.value(t) / 3.0 * (1.0 - 1e-6));
        CHECK(g <= pl.value(t) / 2.0 * (1.0 + 1e-6));
    }

    // g is only defined once f(0) = 0
    CHECK_THROWS_AS(GrowthFunction::power(2.0).with_affine(1.0, 5.0).auxiliary_g(1.0),
                    std::invalid_argument);
}

TEST_CASE("full structural suite passes for the four stock families") {
    auto grid = nlo::log_grid(1e-4, 1e4, 60); // acceptance re-runs this at 200 points
    std::vector<GrowthFunction> fams = {
        GrowthFunction::power(2.0),
        GrowthFunction::power(3.0),
        GrowthFunction::sum(2.0, 3.0).normalized(),
        GrowthFunction::power_log(2.0).normalized(),
    };
    for (const auto& gf : fams) {
        auto results = nlo::growth_suite(gf, grid);
        for (const auto& r : results) {
            INFO(gf.family_name(), ": ", r.name, " worst margin ", r.worst);
            CHECK(r.pass);
        }
        CHECK(results.size() >= 14);
    }
}

TEST_CASE("suite flags a function that violates convexity") {
    // concave-ish data dressed up with a wide declared band still fails checks
    std::vector<double> nodes = nlo::log_grid(0.1, 10.0, 40);
    std::vector<double> vals;
    for (double t : nodes) vals.push_back(t * t);
    auto ok = GrowthFunction::sampled(nodes, vals, 1.0, 4.0);
    auto results = nlo::growth_suite(ok, nlo::log_grid(0.2, 5.0, 40), 1e-8, 1e-3);
    bool all = true;
    for (const auto& r : results) all = all && r.pass;
    CHECK(all); // generous band, honest function: fine

    // now poison one sample so secants stay monotone but the band is a lie
    auto lying = GrowthFunction::sampled(nodes, vals, 2.6, 2.7);
    auto res2 = nlo::growth_suite(lying, nlo::log_grid(0.2, 5.0, 40), 1e-8, 1e-3);
    bool any_fail = false;
    for (const auto& r : res2) any_fail = any_fail || !r.pass;
    CHECK(any_fail);
}

TEST_CASE("json round trip") {
    auto s23 = GrowthFunction::sum(2.0, 3.0).normalized();
    nlohmann::json j = s23;
    auto back = nlo::growth_from_json(j);
    for (double t : {0.0, 0.4, 1.0, 9.0}) CHECK(back.value(t) == s23.value(t));
    CHECK(back.p_lower() == 2.0);
    CHECK(back.q_upper() == 3.0);

    auto nodes = nlo::log_grid(0.01, 100.0, 50);
    std::vector<double> vals;
    for (double t : nodes) vals.push_back(t * t + t);
    auto samp = GrowthFunction::sampled(nodes, vals, 1.0, 2.0);
    nlohmann::json js = samp;
    auto sback = nlo::growth_from_json(js);
    for (double t : {0.5, 1.0, 2.0, 50.0}) CHECK(sback.value(t) == samp.value(t));

    CHECK_THROWS_AS(nlo::growth_from_json(nlohmann::json{{"family", "exp"}}), nlo::config_error);
}
