#include "nlo/grid.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <sstream>
#include <unordered_map>

namespace nlo {

namespace {

inline std::int64_t pack_key(int ix, int iy) {
    return (static_cast<std::int64_t>(ix) << 32) ^ (static_cast<std::uint32_t>(iy));
}

} // namespace

struct GridIndex {
    std::unordered_map<std::int64_t, int> map;
};

GridDomain build_grid(int dim, double h, double omega_radius, double R_infinity) {
    if (dim != 1 && dim != 2) throw std::invalid_argument("build_grid: dim must be 1 or 2");
    if (!(h > 0.0)) throw std::invalid_argument("build_grid: h must be positive");
    if (!(omega_radius > h))
        throw std::invalid_argument("build_grid: omega_radius must exceed h");
    if (R_infinity < 4.0 * omega_radius * (1.0 - 1e-12))
        throw std::invalid_argument(
            "build_grid: R_infinity must be at least 4*omega_radius so the far field "
            "around every admissible ball is represented");

    GridDomain dom;
    dom.dim_ = dim;
    dom.h_ = h;
    dom.omega_radius_ = omega_radius;
    dom.R_infinity_ = R_infinity;
    const int M = static_cast<int>(std::floor(R_infinity / h * (1.0 + 1e-12)));
    dom.span_ = M;
    const double r2 = R_infinity * R_infinity * (1.0 + 1e-12);
    const double interior_edge = omega_radius - 1e-9 * h;
    const int jlo = dim == 2 ? -M : 0, jhi = dim == 2 ? M : 0;
    for (int ix = -M; ix <= M; ++ix) {
        for (int iy = jlo; iy <= jhi; ++iy) {
            const double x = ix * h, y = iy * h;
            if (x * x + y * y > r2) continue;
            const bool inside =
                std::abs(x) < interior_edge && (dim == 1 || std::abs(y) < interior_edge);
            if (inside) dom.interior_nodes_.push_back(static_cast<int>(dom.coords_.size()));
            dom.coords_.push_back({ix, iy});
            dom.interior_.push_back(inside);
        }
    }
    if (dom.interior_nodes_.empty())
        throw std::invalid_argument("build_grid: no interior nodes at this resolution");
    auto idx = std::make_shared<GridIndex>();
    idx->map.reserve(dom.coords_.size() * 2);
    for (int i = 0; i < dom.size(); ++i)
        idx->map.emplace(pack_key(dom.coords_[static_cast<std::size_t>(i)][0],
                                  dom.coords_[static_cast<std::size_t>(i)][1]),
                         i);
    dom.index_ = std::move(idx);
    return dom;
}

int GridDomain::node_at(int ix, int iy) const {
    auto f = index_->map.find(pack_key(ix, iy));
    return f == index_->map.end() ? -1 : f->second;
}

std::vector<int> GridDomain::nodes_in_ball(const Point& center, double r) const {
    std::vector<int> out;
    const double r2 = r * r * (1.0 + 1e-12);
    for (int i = 0; i < size(); ++i) {
        const Point p = position(i);
        const double dx = p[0] - center[0], dy = p[1] - center[1];
        if (dx * dx + dy * dy <= r2) out.push_back(i);
    }
    return out;
}

bool GridDomain::ball_inside_interior(const Point& center, double r) const {
    const double r2 = r * r * (1.0 - 1e-12);
    for (int i = 0; i < size(); ++i) {
        if (interior(i)) continue;
        const Point p = position(i);
        const double dx = p[0] - center[0], dy = p[1] - center[1];
        if (dx * dx + dy * dy < r2) return false;
    }
    return true;
}

void to_json(nlohmann::json& j, const GridDomain& dom) {
    j = nlohmann::json{{"dim", dom.dim()},
                       {"h", dom.h()},
                       {"omega_radius", dom.omega_radius()},
                       {"R_infinity", dom.R_infinity()}};
}

GridDomain grid_from_json(const nlohmann::json& j) {
    try {
        return build_grid(j.at("dim").get<int>(), j.at("h").get<double>(),
                          j.at("omega_radius").get<double>(), j.at("R_infinity").get<double>());
    } catch (const nlohmann::json::exception& e) {
        throw config_error(std::string("grid: ") + e.what());
    }
}

double GridFunction::max_abs() const {
    double m = 0.0;
    for (double x : v_) m = std::max(m, std::abs(x));
    return m;
}

std::pair<std::vector<int>, std::vector<int>> level_sets(const GridFunction& u, double k) {
    std::vector<int> above, below;
    for (int i = 0; i < u.size(); ++i) {
        if (u[i] > k) above.push_back(i);
        else if (u[i] < k) below.push_back(i);
    }
    return {std::move(above), std::move(below)};
}

KernelCoefficient KernelCoefficient::one() {
    return {[](Point, Point) { return 1.0; }, 1.0, "one"};
}

KernelCoefficient KernelCoefficient::constant(double value) {
    if (!(value > 0.0)) throw std::invalid_argument("kernel constant must be positive");
    const double lam = std::max(value, 1.0 / value);
    return {[value](Point, Point) { return value; }, lam, "lambda:" + format_double(value)};
}

KernelCoefficient KernelCoefficient::checker(double value, double cell) {
    if (!(value > 0.0)) throw std::invalid_argument("kernel checker value must be positive");
    if (!(cell > 0.0)) throw std::invalid_argument("kernel checker cell must be positive");
    const double lam = std::max(value, 1.0 / value);
    auto parity = [cell](const Point& p) {
        return (std::llround(p[0] / cell) + std::llround(p[1] / cell)) & 1;
    };
    return {[value, parity](Point x, Point y) {
                return parity(x) == parity(y) ? value : 1.0 / value;
            },
            lam, "checker:" + format_double(value)};
}

KernelCoefficient KernelCoefficient::parse(const std::string& text, double cell) {
    if (text == "one") return one();
    auto colon = text.find(':');
    if (colon != std::string::npos) {
        const std::string head = text.substr(0, colon);
        double v = 0.0;
        try {
            v = std::stod(text.substr(colon + 1));
        } catch (const std::exception&) {
            throw config_error("kernel: cannot parse value in '" + text + "'");
        }
        if (head == "lambda") return constant(v);
        if (head == "checker") return checker(v, cell);
    }
    throw config_error("kernel: expected one | lambda:<v> | checker:<v>, got '" + text + "'");
}

QuadratureTable pair_weights(const GridDomain& dom, double s) {
    if (!(s > 0.0) || !(s < 1.0)) throw std::invalid_argument("pair_weights: need 0 < s < 1");
    QuadratureTable t;
    t.s = s;
    t.h = dom.h();
    t.dim = dom.dim();
    const int n = dom.size();
    const double hpow = t.dim == 1 ? t.h * t.h : t.h * t.h * t.h * t.h;
    // rows: unordered pairs with at least one interior endpoint
    const std::size_t ni = dom.interior_nodes().size();
    const std::size_t approx = ni * static_cast<std::size_t>(n);
    t.a.reserve(approx);
    t.b.reserve(approx);
    t.w.reserve(approx);
    t.dist.reserve(approx);
    t.inv_dist_s.reserve(approx);
    for (int i = 0; i < n; ++i) {
        const Point pi = dom.position(i);
        const bool ii = dom.interior(i);
        for (int j = i + 1; j < n; ++j) {
            if (!ii && !dom.interior(j)) continue;
            const Point pj = dom.position(j);
            const double d = dist(pi, pj);
            const double dpow = t.dim == 1 ? d : d * d;
            t.a.push_back(i);
            t.b.push_back(j);
            t.w.push_back((1.0 - s) * hpow / dpow);
            t.dist.push_back(d);
            t.inv_dist_s.push_back(std::pow(d, -s));
        }
    }
    return t;
}

// ---------------------------------------------------------------------------
// serialization

std::string format_double(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string to_csv(const GridFunction& u) {
    const GridDomain& dom = u.domain();
    std::string out = dom.dim() == 1 ? "x,value\n" : "x,y,value\n";
    for (int i = 0; i < u.size(); ++i) {
        const Point p = dom.position(i);
        out += format_double(p[0]);
        if (dom.dim() == 2) {
            out += ',';
            out += format_double(p[1]);
        }
        out += ',';
        out += format_double(u[i]);
        out += '\n';
    }
    return out;
}

GridFunction from_csv(std::shared_ptr<const GridDomain> dom, const std::string& text) {
    GridFunction u(dom, 0.0);
    std::vector<bool> seen(static_cast<std::size_t>(dom->size()), false);
    std::istringstream in(text);
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (header) { header = false; continue; }
        std::istringstream row(line);
        std::string cell;
        std::vector<double> vals;
        while (std::getline(row, cell, ',')) vals.push_back(std::stod(cell));
        if (vals.size() != static_cast<std::size_t>(dom->dim() + 1))
            throw config_error("grid csv: wrong column count in row '" + line + "'");
        const int ix = static_cast<int>(std::llround(vals[0] / dom->h()));
        const int iy = dom->dim() == 2 ? static_cast<int>(std::llround(vals[1] / dom->h())) : 0;
        const int idx = dom->node_at(ix, iy);
        if (idx < 0) throw config_error("grid csv: node outside the domain in row '" + line + "'");
        u[idx] = vals.back();
        seen[static_cast<std::size_t>(idx)] = true;
    }
    for (bool s : seen)
        if (!s) throw config_error("grid csv: missing rows for some nodes");
    return u;
}

std::vector<std::uint8_t> to_binary(const GridFunction& u) {
    const GridDomain& dom = u.domain();
    std::vector<std::uint8_t> out;
    out.reserve(24 + static_cast<std::size_t>(u.size()) * 8);
    auto push = [&](const void* p, std::size_t n) {
        const auto* b = static_cast<const std::uint8_t*>(p);
        out.insert(out.end(), b, b + n);
    };
    push("NLGF", 4);
    const std::uint32_t version = 1, dim = static_cast<std::uint32_t>(dom.dim());
    push(&version, 4);
    push(&dim, 4);
    const double h = dom.h();
    push(&h, 8);
    const std::uint64_t count = static_cast<std::uint64_t>(u.size());
    push(&count, 8);
    push(u.values().data(), static_cast<std::size_t>(u.size()) * 8);
    return out;
}

GridFunction from_binary(std::shared_ptr<const GridDomain> dom,
                         const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 28 || std::memcmp(bytes.data(), "NLGF", 4) != 0)
        throw config_error("grid binary: bad header");
    std::uint32_t version = 0, dim = 0;
    std::memcpy(&version, bytes.data() + 4, 4);
    std::memcpy(&dim, bytes.data() + 8, 4);
    double h = 0.0;
    std::memcpy(&h, bytes.data() + 12, 8);
    std::uint64_t count = 0;
    std::memcpy(&count, bytes.data() + 20, 8);
    if (version != 1) throw config_error("grid binary: unsupported version");
    if (dim != static_cast<std::uint32_t>(dom->dim()) || std::abs(h - dom->h()) > 1e-12 ||
        count != static_cast<std::uint64_t>(dom->size()))
        throw config_error("grid binary: header does not match the domain");
    if (bytes.size() != 28 + count * 8) throw config_error("grid binary: truncated payload");
    GridFunction u(dom, 0.0);
    std::memcpy(u.values().data(), bytes.data() + 28, count * 8);
    return u;
}

} // namespace nlo
