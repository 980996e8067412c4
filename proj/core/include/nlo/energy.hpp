#pragma once

#include <functional>
#include <vector>

#include "nlo/grid.hpp"
#include "nlo/growth.hpp"

namespace nlo {

// Which Orlicz modular to evaluate.
//   lf   : zero-order, sum of h^d f(|u|) over a node set
//   wsf  : Gagliardo-type double sum over ordered pairs inside a node set
//   vsf  : same double sum over every pair with at least one interior endpoint
// The pair forms weight each ordered pair (x,y), x != y, by
// (1-s) h^{2d} |x-y|^{-d} and evaluate f at |u(x)-u(y)| / |x-y|^s.
struct ModularKind {
    enum class Form { lf, wsf, vsf };
    Form form = Form::lf;
    std::vector<int> region; // lf / wsf only
    double s = 0.0;          // wsf / vsf only

    static ModularKind lf(std::vector<int> region);
    static ModularKind wsf(std::vector<int> region, double s);
    static ModularKind vsf(double s);
};

double modular(const ModularKind& kind, const GrowthFunction& gf, const GridFunction& u);

// Same sums with an arbitrary profile in place of f; used to compare the
// modular built from the auxiliary integrand against the original one.
double modular_with(const ModularKind& kind, const std::function<double(double)>& profile,
                    const GridFunction& u);

// inf{lambda > 0 : modular(u/lambda) <= 1}, by bisection.  Returns 0 for a
// vanishing modular.  Bisection tolerance 1e-10 relative on lambda.
double luxemburg_norm(const ModularKind& kind, const GrowthFunction& gf, const GridFunction& u);

// Full energy: vsf pair sum with the kernel coefficient inserted.  The kernel
// is spot-checked for symmetry and the ellipticity band on a sample of pairs;
// violations raise structure_error.  With k identically one this reproduces
// modular(vsf) bit for bit.
double energy_If(const GrowthFunction& gf, const KernelCoefficient& k, const GridFunction& u,
                 double s);
double energy_If(const GrowthFunction& gf, const KernelCoefficient& k, const GridFunction& u,
                 const QuadratureTable& table);

struct TailResult {
    double tail = 0.0;        // R^s (f')^{-1}(I) with I truncated at the grid edge
    double upper_bound = 0.0; // same with the analytic beyond-the-edge excess added to I
    double level = 0.0;       // the truncated I itself
};

// Nonlocal slope tail of u seen from node x0 at radius R:
//   I = (1-s) R^s sum_{|y-x0| > R} h^d f'(|u(y)|/r^s) r^{-d-s},   r = |y-x0|,
// returned as R^s (f')^{-1}(I).  The upper bound charges everything beyond the
// represented ball at the worst admissible slope.  Requires R <= R_infinity/4
// and B_R(x0) inside the represented ball.
TailResult tail_fprime(const GrowthFunction& gf, const GridFunction& u, int x0, double R,
                       double s);

} // namespace nlo
