#pragma once

#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

#include "nlo/energy.hpp"
#include "nlo/errors.hpp"
#include "nlo/grid.hpp"
#include "nlo/growth.hpp"

namespace nlo {

// Odd nonlinearity h(x, y, t) driving the divergence-form operator.  Admissible
// when symmetric in (x, y) and pinched between the slope envelopes:
//   sign(t) (1/Lambda) f'(|t|)  <=  h(x,y,t)  <=  sign(t) Lambda f'(|t|).
struct StructureFunction {
    std::function<double(Point, Point, double)> evaluator;
    double Lambda = 1.0;
    GrowthFunction gf = GrowthFunction::power(2.0);

    // h(x,y,t) = sign(t) f'(|t|) k(x,y): the nonlinearity whose weak solutions
    // are exactly the minimizers of the energy with kernel k
    static StructureFunction euler_lagrange(const GrowthFunction& gf,
                                            const KernelCoefficient& k);
};

struct StructureSample {
    Point x{0.0, 0.0}, y{0.0, 0.0};
    double t = 0.0;
};

struct StructureReport {
    std::size_t samples = 0;
    double lambda_hat = 1.0; // tightest admissible constant seen
};

// Verifies symmetry and the envelope at every sample; throws structure_error
// naming the first offending sample.
StructureReport check_structure(const StructureFunction& hs,
                                const std::vector<StructureSample>& samples,
                                double tol = 1e-9);

struct SolveReport {
    int iterations = 0;
    double final_energy = 0.0;
    double gradient_norm = 0.0;
    double wall_time = 0.0; // diagnostic only; never serialized
};

void to_json(nlohmann::json& j, const SolveReport& r);

struct solve_error : numeric_error {
    SolveReport report;
    solve_error(const std::string& what, SolveReport r);
};

struct MinimizeResult {
    GridFunction u;
    SolveReport report;
};

// Gradient of the energy with respect to every nodal value, assembled in one
// pass over the pair table.
std::vector<double> energy_gradient(const GrowthFunction& gf, const KernelCoefficient& k,
                                    const GridFunction& u, const QuadratureTable& table);

// Minimizes the energy over interior values with the exterior held at
// exterior_data.  Preconditioned descent with backtracking; stops once the
// preconditioned gradient and the cell-normalized gradient both fall below
// tol in max norm.  Throws solve_error (carrying the partial report) on
// iteration-cap or line-search failure, config_error when p_lower = 1.
MinimizeResult minimize(const GrowthFunction& gf, const KernelCoefficient& k,
                        const GridFunction& exterior_data, const GridFunction& u0, double s,
                        double tol = 1e-8);

// Bilinear pairing of L_h u against a test function vanishing outside the
// working set: ordered-pair sum of w * h(x,y,(u_x-u_y)/|dx|^s) (phi_x-phi_y)/|dx|^s.
double weak_residual(const StructureFunction& hs, const GridFunction& u,
                     const GridFunction& phi, double s);

// max over interior nodal hats phi_i of |weak_residual| / h^d
double residual_norm(const StructureFunction& hs, const GridFunction& u, double s);

} // namespace nlo
