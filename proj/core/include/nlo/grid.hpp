#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "nlo/errors.hpp"

namespace nlo {

using Point = std::array<double, 2>; // y component unused in dimension 1

inline double dist(const Point& a, const Point& b) {
    const double dx = a[0] - b[0], dy = a[1] - b[1];
    return std::sqrt(dx * dx + dy * dy);
}

struct GridIndex; // integer-coordinate -> node lookup, built once per grid

// Uniform grid covering the ball |x| <= R_infinity, with the working set
// Omega = (-omega_radius, omega_radius)^dim marked as interior.  Node order is
// lexicographic in integer coordinates (column-major), which fixes both the
// serialization layout and every deterministic reduction order downstream.
class GridDomain {
public:
    int dim() const { return dim_; }
    double h() const { return h_; }
    double omega_radius() const { return omega_radius_; }
    double R_infinity() const { return R_infinity_; }

    int size() const { return static_cast<int>(coords_.size()); }
    bool interior(int i) const { return interior_[static_cast<std::size_t>(i)]; }
    const std::vector<int>& interior_nodes() const { return interior_nodes_; }
    std::array<int, 2> coord(int i) const { return coords_[static_cast<std::size_t>(i)]; }
    Point position(int i) const {
        const auto& c = coords_[static_cast<std::size_t>(i)];
        return {c[0] * h_, c[1] * h_};
    }
    double cell_measure() const { return dim_ == 1 ? h_ : h_ * h_; }

    // nodes with |x - center| <= r (closed ball)
    std::vector<int> nodes_in_ball(const Point& center, double r) const;
    // true when every node with |x - center| < r is interior
    bool ball_inside_interior(const Point& center, double r) const;
    // index of the node at integer coordinates, or -1
    int node_at(int ix, int iy) const;

private:
    friend GridDomain build_grid(int, double, double, double);
    int dim_ = 1;
    double h_ = 1.0, omega_radius_ = 1.0, R_infinity_ = 4.0;
    std::vector<std::array<int, 2>> coords_;
    std::vector<bool> interior_;
    std::vector<int> interior_nodes_;
    int span_ = 0; // max |integer coordinate|
    std::shared_ptr<const GridIndex> index_; // immutable, shared by copies
};

// Preconditions: dim in {1,2}, h > 0, 0 < omega_radius, R_infinity >= 4*omega_radius,
// and omega_radius > h (otherwise there are no interior nodes to work with).
GridDomain build_grid(int dim, double h, double omega_radius, double R_infinity);

void to_json(nlohmann::json& j, const GridDomain& dom);
GridDomain grid_from_json(const nlohmann::json& j);

// Values on the nodes of a shared domain.  Exterior nodes carry the fixed
// complement data during minimization; nothing here enforces that -- the
// solver only ever writes interior entries.
class GridFunction {
public:
    GridFunction() = default;
    GridFunction(std::shared_ptr<const GridDomain> dom, double constant = 0.0)
        : dom_(std::move(dom)),
          v_(static_cast<std::size_t>(dom_->size()), constant) {}
    GridFunction(std::shared_ptr<const GridDomain> dom, const std::function<double(Point)>& fn)
        : dom_(std::move(dom)), v_(static_cast<std::size_t>(dom_->size())) {
        for (int i = 0; i < dom_->size(); ++i)
            v_[static_cast<std::size_t>(i)] = fn(dom_->position(i));
    }

    const GridDomain& domain() const { return *dom_; }
    const std::shared_ptr<const GridDomain>& domain_ptr() const { return dom_; }
    int size() const { return static_cast<int>(v_.size()); }
    double operator[](int i) const { return v_[static_cast<std::size_t>(i)]; }
    double& operator[](int i) { return v_[static_cast<std::size_t>(i)]; }
    const std::vector<double>& values() const { return v_; }
    std::vector<double>& values() { return v_; }

    double max_abs() const;

private:
    std::shared_ptr<const GridDomain> dom_;
    std::vector<double> v_;
};

// strict level sets over all represented nodes: ({u > k}, {u < k})
std::pair<std::vector<int>, std::vector<int>> level_sets(const GridFunction& u, double k);

// Symmetric coefficient with ellipticity bound: 1/lambda <= k(x,y) <= lambda.
struct KernelCoefficient {
    std::function<double(Point, Point)> eval;
    double lambda = 1.0;
    std::string name = "one";

    static KernelCoefficient one();
    static KernelCoefficient constant(double value);
    // k(x,y) = value when floor parity of x and y agree, else 1/value
    static KernelCoefficient checker(double value, double cell);
    static KernelCoefficient parse(const std::string& text, double cell);
};

// Quadrature weights for the double nonlocal sum: one row per unordered node
// pair (a < b) with at least one interior endpoint.
//   w = (1-s) h^{2 dim} / |x_a - x_b|^{dim}
// Symmetric double sums count each row twice; the s-dependent factor
// |x_a - x_b|^{-s} is cached per row.
struct QuadratureTable {
    double s = 0.5;
    double h = 1.0;
    int dim = 1;
    std::vector<std::int32_t> a, b;
    std::vector<double> w, dist, inv_dist_s;

    std::size_t size() const { return a.size(); }
};

QuadratureTable pair_weights(const GridDomain& dom, double s);

// ---------------------------------------------------------------------------
// serialization

// CSV rows "x[,y],value" in node order; binary is a small header plus the raw
// value array in the same node order.
std::string to_csv(const GridFunction& u);
GridFunction from_csv(std::shared_ptr<const GridDomain> dom, const std::string& text);
std::vector<std::uint8_t> to_binary(const GridFunction& u);
GridFunction from_binary(std::shared_ptr<const GridDomain> dom,
                         const std::vector<std::uint8_t>& bytes);

std::string format_double(double v); // shortest round-trip decimal form

} // namespace nlo
