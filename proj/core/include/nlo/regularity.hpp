#pragma once

#include <utility>
#include <vector>

#include "json.hpp"

#include "nlo/energy.hpp"
#include "nlo/grid.hpp"
#include "nlo/growth.hpp"

namespace nlo {

// max over node pairs in region of |u_i - u_j| / |x_i - x_j|^alpha.
// Needs alpha in (0,1] and at least two nodes.
double holder_seminorm(const GridFunction& u, double alpha, const std::vector<int>& region);

struct AlphaFit {
    double alpha_hat = 1.0; // clipped to (0,1]
    double fit_residual = 0.0;
    bool constant_function = false; // oscillation already zero at the largest radius
    std::vector<std::pair<double, double>> osc_decay; // (radius, oscillation), largest first
};

// Least-squares slope of log osc(B_r(x0)) against log r over the given radii.
// Radii must be decreasing, at least four, each at least 3h (resolution floor)
// and each ball inside the represented box.  Zero-oscillation radii are
// dropped from the fit.
AlphaFit estimate_alpha(const GridFunction& u, int x0, const std::vector<double>& radii);

// The `count` largest radii of the geometric family R ratio^j that clear the
// 3h floor; fewer than `count` admissible is an error.
std::vector<double> default_alpha_radii(const GridDomain& dom, double R, double ratio = 0.75,
                                        int count = 4);

struct HolderCheck {
    AlphaFit fit;
    double lhs = 0.0;      // R^alpha_hat [u]_{C^alpha(B_R)}
    double sup_norm = 0.0; // over B_{4R}
    double tail = 0.0;     // slope tail at 4R
    double c_fit = 0.0;    // smallest C with lhs <= C sup_norm + tail
    bool holds = true;
};

// Oscillation-decay bound at a sample point: fits the exponent on B_R, then
// checks  R^a [u]_{C^a(B_R)} <= C ||u||_{L^inf(B_4R)} + tail(4R).
// Needs B_{8R}(x0) inside the working set.
HolderCheck verify_holder_bound(const GrowthFunction& gf, const GridFunction& u, double s,
                                int x0, double R);

struct BoundCheck {
    double delta = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
    double c_fit = 0.0;
};

void to_json(nlohmann::json& j, const BoundCheck& b);

// dp / (d - sp); requires sp < d.
double p_star_exponent(int dim, double s, double p);

// Sup bound with tail and mean-power terms, one row per delta in (0,1):
//   sup_{B_R} |u| <= delta tail(R)
//                  + C delta^{-(q-1)(p*/p)/(p*-q)} (avg_{B_R} |u|^q)^{(p*-p)/(p(p*-q))}
//                  + delta^{(q-1)/q}.
// Needs sp < d and q < p* (else the configuration is rejected) and B_{2R}(x0)
// inside the working set.  c_fit is the smallest C closing the row.
std::vector<BoundCheck> verify_local_bound(const GrowthFunction& gf, const GridFunction& u,
                                           double s, int x0, double R,
                                           const std::vector<double>& deltas);

// sum_{x in inner} sum_{y in outer, y != x} h^{2d} |u(x)-u(y)|^p / |x-y|^{d + sigma p}
double gagliardo_sum(const GridFunction& u, const std::vector<int>& inner,
                     const std::vector<int>& outer, double sigma, double p);

struct EmbeddingCheck {
    double lhs = 0.0;   // ||u||_{L^{p*}(B_R)}^p
    double rhs = 0.0;   // (1-s)/(d-sp)^{p-1} [u]^p_{W^{s,p}} + R^{-sp} ||u||_p^p, no constant
    double ratio = 0.0; // lhs / rhs
};

// Fractional Sobolev embedding on the origin-centered ball; requires sp < d.
EmbeddingCheck sobolev_embedding_check(const GridFunction& u, double s, double p,
                                       double R_ball);

struct IsoperimetricCheck {
    bool hypotheses_met = false;
    bool band_empty = false; // |{h < u < k}| vanished; c_fit is then meaningless
    double lhs = 0.0;        // (k-h) (|{u<=h}| |{u>=k}|)^{(d-1)/d}
    double rhs = 0.0;        // R^{d-2+s} (1-s)^{1/p} [u]_{W^{s,p}} |{h<u<k}|^{(p-1)/p}
    double c_fit = 0.0;
    double measure_low = 0.0, measure_high = 0.0, measure_band = 0.0;
};

// Degenerate-case level-set inequality on the origin-centered ball.  The three
// hypotheses (two measure fractions >= gamma, gamma0 and the scaled energy
// bound with C0) are checked first; when any fails the result only carries the
// flag and the raw quantities.
IsoperimetricCheck isoperimetric_check(const GridFunction& u, double s, double p, double R_ball,
                                       double h_level, double k_level, double gamma,
                                       double gamma0, double C0);

struct RegularityReport {
    double alpha_hat = 1.0;
    double holder_constant = 0.0;
    std::vector<std::pair<double, double>> osc_decay;
    std::vector<BoundCheck> sup_bound_checks;
    double p_star = 0.0; // 0 when sp >= d
};

void to_json(nlohmann::json& j, const RegularityReport& rep);

} // namespace nlo
