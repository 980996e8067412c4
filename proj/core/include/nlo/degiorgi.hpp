#pragma once

#include <cstdint>
#include <vector>

#include "json.hpp"

#include "nlo/energy.hpp"
#include "nlo/grid.hpp"
#include "nlo/growth.hpp"

namespace nlo {

enum class LevelSide { plus, minus };

// One evaluation of the truncation inequality at a sample (x0, r < R, k):
//   seminorm of w over B_r  +  cross pairing against the opposite level set
//     <= c (R/(R-r))^q * zero-order modular of w/R^s over B_R
//      + c (R/(R-r))^{d+sq} * ||w||_{L1(B_R)} * slope-tail sum outside B_r,
// where w = (u-k)_+ for the plus side and (u-k)_- for the minus side.
// c_min is the smallest constant making the inequality hold at this sample.
struct CaccioppoliReport {
    int x0 = 0;
    double r = 0.0, R = 0.0;
    double k_level = 0.0;
    double s = 0.0;
    LevelSide side = LevelSide::plus;
    double lhs_seminorm = 0.0;
    double lhs_cross = 0.0;
    double rhs_local = 0.0;
    double rhs_tail = 0.0;
    double l1_norm = 0.0; // ||w||_{L1(B_R)}, before the prefactor
    double c_min = 0.0;
    bool unbounded = false; // zero right side against a positive left side
};

void to_json(nlohmann::json& j, const CaccioppoliReport& rep);

CaccioppoliReport caccioppoli_gap(const GrowthFunction& gf, const GridFunction& u, double s,
                                  int x0, double r, double R, double k_level,
                                  LevelSide side = LevelSide::plus);

// Recomputes every term of the report with the auxiliary integrand g in place
// of f (and g' = f/t in place of f').  The slope sandwich pins each rebuilt
// term inside [1/q, 1/p] of its original, so c_min can grow by at most q/p;
// a violation of that cage raises structure_error.
CaccioppoliReport transfer_to_g(const CaccioppoliReport& rep, const GrowthFunction& gf,
                                const GridFunction& u);

struct DgSampleSpec {
    int count = 50;
    double ratio_lo = 0.3, ratio_hi = 0.8; // r/R before snapping
    std::uint64_t seed = 1;
    LevelSide side = LevelSide::plus;
};

struct DgMembership {
    double c_empirical = 0.0; // max finite c_min over the samples
    bool any_unbounded = false;
    CaccioppoliReport worst;
    std::vector<CaccioppoliReport> samples;
};

// Draws admissible (x0, r, R, k) tuples: centers on interior nodes far enough
// from the working-set boundary, radii snapped to half-cell offsets, levels
// from the interior value quantiles {0.2, 0.4, 0.6, 0.8}.  Deterministic for a
// fixed spec.
DgMembership dg_membership(const GrowthFunction& gf, const GridFunction& u, double s,
                           const DgSampleSpec& spec);

struct FastConvergence {
    std::vector<double> sequence; // y_0 ... y_n (shorter on overflow)
    bool converges = false;       // reached below 1e-12
    bool threshold_applies = false;
    bool bound_ok = true; // y_j <= y_0 b^{-j/beta} whenever the threshold held
};

// Iterates y_{j+1} = C b^j y_j^{1+beta} and checks the geometric decay bound
// y_j <= y_0 b^{-j/beta}, valid for y_0 <= C^{-1/beta} b^{-1/beta^2}.
FastConvergence fast_convergence(double y0, double C, double b, double beta, int n_steps);

} // namespace nlo
