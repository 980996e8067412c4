#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <memory>
#include <vector>

#include "nlo/rng.hpp"
#include "nlo/solve.hpp"

using namespace nlo;

namespace {

std::shared_ptr<GridDomain> make(int dim, double h, double omega, double rinf) {
    return std::make_shared<GridDomain>(build_grid(dim, h, omega, rinf));
}

GridFunction step_exterior(std::shared_ptr<GridDomain> dom) {
    return GridFunction(*&dom, [](Point p) { return p[0] >= 1.0 ? 1.0 : 0.0; });
}

// dense normal-equations oracle for the quadratic case f = t^2, k = 1
std::vector<double> dense_quadratic_solve(const GridDomain& dom, const GridFunction& ext,
                                          double s) {
    const auto t = pair_weights(dom, s);
    const auto& interior = dom.interior_nodes();
    const int n = static_cast<int>(interior.size());
    std::vector<int> slot(static_cast<std::size_t>(dom.size()), -1);
    for (int a = 0; a < n; ++a) slot[static_cast<std::size_t>(interior[a])] = a;

    std::vector<double> A(static_cast<std::size_t>(n * n), 0.0),
        rhs(static_cast<std::size_t>(n), 0.0);
    for (std::size_t r = 0; r < t.size(); ++r) {
        const double c = 4.0 * t.w[r] * t.inv_dist_s[r] * t.inv_dist_s[r];
        const int ia = slot[static_cast<std::size_t>(t.a[r])];
        const int ib = slot[static_cast<std::size_t>(t.b[r])];
        if (ia >= 0 && ib >= 0) {
            A[static_cast<std::size_t>(ia * n + ia)] += c;
            A[static_cast<std::size_t>(ib * n + ib)] += c;
            A[static_cast<std::size_t>(ia * n + ib)] -= c;
            A[static_cast<std::size_t>(ib * n + ia)] -= c;
        } else if (ia >= 0) {
            A[static_cast<std::size_t>(ia * n + ia)] += c;
            rhs[static_cast<std::size_t>(ia)] += c * ext[t.b[r]];
        } else if (ib >= 0) {
            A[static_cast<std::size_t>(ib * n + ib)] += c;
            rhs[static_cast<std::size_t>(ib)] += c * ext[t.a[r]];
        }
    }
    // gaussian elimination with partial pivoting
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r2 = col + 1; r2 < n; ++r2)
            if (std::abs(A[static_cast<std::size_t>(r2 * n + col)]) >
                std::abs(A[static_cast<std::size_t>(piv * n + col)]))
                piv = r2;
        for (int c2 = 0; c2 < n; ++c2)
            std::swap(A[static_cast<std::size_t>(col * n + c2)],
                      A[static_cast<std::size_t>(piv * n + c2)]);
        std::swap(rhs[static_cast<std::size_t>(col)], rhs[static_cast<std::size_t>(piv)]);
        for (int r2 = col + 1; r2 < n; ++r2) {
            const double m = A[static_cast<std::size_t>(r2 * n + col)] /
                             A[static_cast<std::size_t>(col * n + col)];
            for (int c2 = col; c2 < n; ++c2)
                A[static_cast<std::size_t>(r2 * n + c2)] -=
                    m * A[static_cast<std::size_t>(col * n + c2)];
            rhs[static_cast<std::size_t>(r2)] -= m * rhs[static_cast<std::size_t>(col)];
        }
    }
    std::vector<double> x(static_cast<std::size_t>(n), 0.0);
    for (int r2 = n - 1; r2 >= 0; --r2) {
        double acc = rhs[static_cast<std::size_t>(r2)];
        for (int c2 = r2 + 1; c2 < n; ++c2)
            acc -= A[static_cast<std::size_t>(r2 * n + c2)] * x[static_cast<std::size_t>(c2)];
        x[static_cast<std::size_t>(r2)] = acc / A[static_cast<std::size_t>(r2 * n + r2)];
    }
    return x;
}

// cyclic coordinate minimization, each 1D problem solved by bisection on the
// partial derivative
GridFunction coordinate_descent(const GrowthFunction& gf, const GridFunction& ext, double s) {
    const GridDomain& dom = ext.domain();
    const auto t = pair_weights(dom, s);
    GridFunction u = ext;
    auto partial = [&](int node, double v) {
        double acc = 0.0;
        for (std::size_t r = 0; r < t.size(); ++r) {
            double ua, ub;
            if (t.a[r] == node)
                ua = v, ub = u[t.b[r]];
            else if (t.b[r] == node)
                ua = u[t.a[r]], ub = v;
            else
                continue;
            const double tt = (ua - ub) * t.inv_dist_s[r];
            if (tt == 0.0) continue;
            double c = 2.0 * t.w[r] * t.inv_dist_s[r] * (tt > 0 ? 1.0 : -1.0) *
                       gf.derivative(std::abs(tt));
            acc += t.a[r] == node ? c : -c;
        }
        return acc;
    };
    for (int sweep = 0; sweep < 4000; ++sweep) {
        double moved = 0.0;
        for (int i : dom.interior_nodes()) {
            double lo = u[i] - 1.0, hi = u[i] + 1.0;
            while (partial(i, lo) > 0.0) lo -= (hi - lo);
            while (partial(i, hi) < 0.0) hi += (hi - lo);
            for (int it = 0; it < 100 && hi - lo > 1e-13; ++it) {
                const double mid = 0.5 * (lo + hi);
                (partial(i, mid) > 0.0 ? hi : lo) = mid;
            }
            const double v = 0.5 * (lo + hi);
            moved = std::max(moved, std::abs(v - u[i]));
            u[i] = v;
        }
        if (moved < 1e-12) break;
    }
    return u;
}

} // namespace

TEST_CASE("structure condition checks") {
    auto gf = GrowthFunction::power(2.0);
    auto one = KernelCoefficient::one();
    auto hs = StructureFunction::euler_lagrange(gf, one);

    std::vector<StructureSample> samples;
    for (double t : {-3.0, -1.0, -0.25, 0.0, 0.5, 2.0, 10.0})
        samples.push_back({{0.25, 0.0}, {1.0, 0.5}, t});

    auto rep = check_structure(hs, samples);
    CHECK(rep.samples == samples.size());
    CHECK(rep.lambda_hat == doctest::Approx(1.0));

    StructureFunction half = hs;
    half.Lambda = 2.0;
    half.evaluator = [gf](Point, Point, double t) {
        return (t > 0 ? 1.0 : t < 0 ? -1.0 : 0.0) * 0.5 * gf.derivative(std::abs(t));
    };
    CHECK(check_structure(half, samples).lambda_hat == doctest::Approx(2.0));

    StructureFunction cubic = hs;
    cubic.Lambda = 2.0;
    cubic.evaluator = [](Point, Point, double t) { return t * t * t; };
    CHECK_THROWS_AS(check_structure(cubic, samples), structure_error);

    StructureFunction skew = hs;
    skew.evaluator = [gf](Point x, Point y, double t) {
        return (x[0] < y[0] ? 1.0 : 0.9) * (t > 0 ? 1.0 : t < 0 ? -1.0 : 0.0) *
               gf.derivative(std::abs(t));
    };
    CHECK_THROWS_AS(check_structure(skew, samples), structure_error);

    CHECK_THROWS_AS(check_structure(hs, {}), std::invalid_argument);
}

TEST_CASE("constant exterior data pins the minimizer") {
    auto dom = make(1, 0.25, 1.0, 4.0);
    GridFunction ext(dom, 0.7);
    auto res = minimize(GrowthFunction::sum(2.0, 3.0), KernelCoefficient::one(), ext, ext, 0.5,
                        1e-10);
    for (int i = 0; i < res.u.size(); ++i) CHECK(res.u[i] == doctest::Approx(0.7).epsilon(1e-9));
    CHECK(res.report.final_energy <= 1e-18);
    CHECK(res.report.gradient_norm <= 1e-10);
}

TEST_CASE("quadratic case against the dense solve") {
    auto dom = make(1, 0.25, 1.0, 4.0);
    auto gf = GrowthFunction::power(2.0);
    GridFunction ext = step_exterior(dom);
    auto res = minimize(gf, KernelCoefficient::one(), ext, ext, 0.5, 1e-10);

    auto oracle = dense_quadratic_solve(*dom, ext, 0.5);
    const auto& interior = dom->interior_nodes();
    for (std::size_t a = 0; a < interior.size(); ++a)
        CHECK(res.u[interior[a]] == doctest::Approx(oracle[a]).epsilon(1e-8));

    // exterior untouched, profile monotone between the boundary states
    for (int i = 0; i < dom->size(); ++i)
        if (!dom->interior(i)) CHECK(res.u[i] == ext[i]);
    CHECK(res.report.final_energy <=
          energy_If(gf, KernelCoefficient::one(), ext, 0.5) * (1.0 + 1e-12));

    auto hs = StructureFunction::euler_lagrange(gf, KernelCoefficient::one());
    CHECK(residual_norm(hs, res.u, 0.5) <= 10.0 * 1e-10);
}

TEST_CASE("two-exponent growth against coordinate descent") {
    auto dom = make(1, 0.25, 1.0, 4.0);
    auto gf = GrowthFunction::sum(2.0, 3.0);
    GridFunction ext = step_exterior(dom);
    auto res = minimize(gf, KernelCoefficient::one(), ext, ext, 0.5, 1e-11);
    GridFunction oracle = coordinate_descent(gf, ext, 0.5);
    for (int i : dom->interior_nodes())
        CHECK(res.u[i] == doctest::Approx(oracle[i]).epsilon(1e-6));
}

TEST_CASE("descent from a remote start") {
    auto dom = make(1, 0.25, 1.0, 4.0);
    auto gf = GrowthFunction::sum(2.0, 3.0);
    GridFunction ext = step_exterior(dom);
    GridFunction u0 = ext;
    Sampler rng(41);
    for (int i : dom->interior_nodes()) u0[i] = rng.uniform(-5.0, 5.0);
    const double e0 = energy_If(gf, KernelCoefficient::one(), u0, 0.5);
    auto res = minimize(gf, KernelCoefficient::one(), ext, u0, 0.5, 1e-9);
    CHECK(res.report.final_energy <= e0);
    CHECK(res.report.iterations > 0);

    // same minimizer as the clean start
    auto res2 = minimize(gf, KernelCoefficient::one(), ext, ext, 0.5, 1e-9);
    for (int i : dom->interior_nodes())
        CHECK(res.u[i] == doctest::Approx(res2.u[i]).epsilon(1e-6));
}

TEST_CASE("scale covariance for a power growth") {
    auto dom = make(1, 0.25, 1.0, 4.0);
    auto gf = GrowthFunction::power(3.0);
    GridFunction g1(dom, [](Point p) { return std::abs(p[0]) >= 1.0 ? std::exp(-std::abs(p[0])) : 0.0; });
    GridFunction gc = g1;
    for (double& x : gc.values()) x *= 2.5;

    auto r1 = minimize(gf, KernelCoefficient::one(), g1, g1, 0.6, 1e-12);
    auto rc = minimize(gf, KernelCoefficient::one(), gc, gc, 0.6, 1e-12);
    for (int i = 0; i < dom->size(); ++i)
        CHECK(rc.u[i] == doctest::Approx(2.5 * r1.u[i]).epsilon(1e-8));
}

TEST_CASE("minimizer stays near the exterior range") {
    auto dom = make(1, 0.2, 1.0, 4.0);
    Sampler rng(97);
    GridFunction ext(dom, 0.0);
    for (int i = 0; i < ext.size(); ++i)
        if (!dom->interior(i)) ext[i] = rng.uniform();
    auto res = minimize(GrowthFunction::sum(2.0, 3.0), KernelCoefficient::checker(1.5, 0.2),
                        ext, ext, 0.6, 1e-9);
    for (int i = 0; i < res.u.size(); ++i) {
        CHECK(res.u[i] >= -0.05);
        CHECK(res.u[i] <= 1.05);
    }
}

TEST_CASE("minimize rejects bad configurations") {
    auto dom = make(1, 0.25, 1.0, 4.0);
    GridFunction ext = step_exterior(dom);
    CHECK_THROWS_AS(minimize(GrowthFunction::power(1.0), KernelCoefficient::one(), ext, ext,
                             0.5, 1e-8),
                    config_error);

    GridFunction bad = ext;
    bad[0] += 1.0; // node 0 is deep in the exterior
    CHECK_THROWS_AS(minimize(GrowthFunction::power(2.0), KernelCoefficient::one(), ext, bad,
                             0.5, 1e-8),
                    std::invalid_argument);

    KernelCoefficient skew;
    skew.name = "skew";
    skew.lambda = 1.5;
    skew.eval = [](Point x, Point y) { return x[0] <= y[0] ? 1.5 : 1.0 / 1.5; };
    CHECK_THROWS_AS(minimize(GrowthFunction::power(2.0), skew, ext, ext, 0.5, 1e-8),
                    structure_error);

    // an unreachable tolerance must fail loudly and carry the partial report
    bool threw = false;
    try {
        minimize(GrowthFunction::sum(2.0, 3.0), KernelCoefficient::one(), ext, ext, 0.5, 0.0);
    } catch (const solve_error& e) {
        threw = true;
        CHECK(e.report.iterations > 0);
        CHECK(e.report.final_energy > 0.0);
    }
    CHECK(threw);
}

TEST_CASE("weak residual and its norm") {
    auto dom = make(1, 0.25, 1.0, 4.0);
    auto gf = GrowthFunction::sum(2.0, 3.0);
    auto hs = StructureFunction::euler_lagrange(gf, KernelCoefficient::one());

    GridFunction c(dom, 2.0), hat(dom, 0.0);
    hat[dom->node_at(0, 0)] = 1.0;
    CHECK(weak_residual(hs, c, hat, 0.5) == 0.0);
    CHECK(residual_norm(hs, c, 0.5) == 0.0);

    GridFunction any(dom, [](Point p) { return std::sin(p[0]); });
    GridFunction zero(dom, 0.0);
    CHECK(weak_residual(hs, any, zero, 0.5) == 0.0);

    GridFunction leaky(dom, 0.0);
    leaky[0] = 1.0;
    CHECK_THROWS_AS(weak_residual(hs, any, leaky, 0.5), std::invalid_argument);

    // the minimizer solves the discrete equation: every nodal hat is quiet
    GridFunction ext = step_exterior(dom);
    const double tol = 1e-9;
    auto res = minimize(gf, KernelCoefficient::one(), ext, ext, 0.5, tol);
    const double hd = dom->cell_measure();
    for (int i : dom->interior_nodes()) {
        GridFunction phi(dom, 0.0);
        phi[i] = 1.0;
        CHECK(std::abs(weak_residual(hs, res.u, phi, 0.5)) / hd <= 10.0 * tol);
    }
    CHECK(residual_norm(hs, res.u, 0.5) <= 10.0 * tol);

    // residual grows when the solution is disturbed
    GridFunction bumped = res.u;
    bumped[dom->node_at(0, 0)] += 0.1;
    CHECK(residual_norm(hs, bumped, 0.5) > residual_norm(hs, res.u, 0.5));

    // structure functions bounded away from the gradient structure still see
    // a small residual against the minimizer, scaled by Lambda
    StructureFunction damped = hs;
    damped.Lambda = 2.0;
    damped.evaluator = [gf](Point, Point, double t) {
        return (t > 0 ? 1.0 : t < 0 ? -1.0 : 0.0) * 0.5 * gf.derivative(std::abs(t));
    };
    CHECK(residual_norm(damped, res.u, 0.5) <= 5.0 * tol);
}
