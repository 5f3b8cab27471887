#include "lattice/tiling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <unordered_map>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "lattice/error.hpp"

namespace lattice {

namespace {

constexpr double kSqrt3 = std::numbers::sqrt3;
constexpr double kPi = std::numbers::pi;

// Relative tolerances, in units of the edge length.
constexpr double kMergeTol = 1e-6;
constexpr double kLengthTol = 1e-9;
constexpr double kInsideTol = 1e-9;

const std::vector<TopologyInfo>& catalog() {
    static const std::vector<TopologyInfo> topologies = {
        {Topology::T, "T", {3, 3, 3, 3, 3, 3}, 6, true},
        {Topology::S, "S", {4, 4, 4, 4}, 4, true},
        {Topology::H, "H", {6, 6, 6}, 3, true},
        {Topology::T3S2, "T3S2", {3, 3, 3, 4, 4}, 5, true},
        {Topology::T2STS, "T2STS", {3, 3, 4, 3, 4}, 5, true},
        {Topology::THTH, "THTH", {3, 6, 3, 6}, 4, true},
        {Topology::TSHS, "TSHS", {3, 4, 6, 4}, 4, true},
        {Topology::TD2, "TD2", {3, 12, 12}, 3, true},
        {Topology::SO2, "SO2", {4, 8, 8}, 3, true},
        {Topology::SHD, "SHD", {4, 6, 12}, 3, true},
        {Topology::T4H, "T4H", {3, 3, 3, 3, 6}, 5, false},
    };
    return topologies;
}

// One rectangular repeat of a tiling with unit edge length. The pattern is
// mirror-symmetric about x = 0 and y = 0 (except T4H), hence also about
// x = width/2 and y = height/2.
struct PatternCell {
    double width = 0.0;
    double height = 0.0;
    std::vector<Vec2> basis;
};

void append_polygon(std::vector<Vec2>& out, Vec2 center, int sides, double phase_deg) {
    const double circumradius = 0.5 / std::sin(kPi / sides);
    for (int k = 0; k < sides; ++k) {
        const double angle = phase_deg * kPi / 180.0 + 2.0 * kPi * k / sides;
        out.emplace_back(center.x() + circumradius * std::cos(angle),
                         center.y() + circumradius * std::sin(angle));
    }
}

// Polygons centered on a triangular lattice of spacing `spacing`, described
// with the rectangular cell (spacing, spacing*sqrt3).
PatternCell polygons_on_triangular_lattice(double spacing, int sides, double phase_deg) {
    PatternCell cell{spacing, spacing * kSqrt3, {}};
    append_polygon(cell.basis, {0.0, 0.0}, sides, phase_deg);
    append_polygon(cell.basis, {spacing / 2.0, spacing * kSqrt3 / 2.0}, sides, phase_deg);
    return cell;
}

PatternCell pattern_cell(Topology topology) {
    switch (topology) {
        case Topology::T:
            return {1.0, kSqrt3, {{0.0, 0.0}, {0.5, kSqrt3 / 2.0}}};
        case Topology::S:
            return {1.0, 1.0, {{0.0, 0.0}}};
        case Topology::H:
            return polygons_on_triangular_lattice(kSqrt3, 6, 30.0);
        case Topology::T3S2: {
            // square rows centered on y = 0, triangle rows in between
            const double row = 1.0 + kSqrt3 / 2.0;
            return {1.0, 2.0 * row, {{0.0, 0.5}, {0.0, -0.5}, {0.5, row + 0.5}, {0.5, row - 0.5}}};
        }
        case Topology::T2STS: {
            const double side = 1.0 + kSqrt3;
            const double half = side / 2.0;
            const double r = kSqrt3 / 2.0;
            return {side,
                    side,
                    {{0.0, 0.5}, {0.0, -0.5}, {r, 0.0}, {-r, 0.0},
                     {half, r}, {half, -r}, {0.5, half}, {-0.5, half}}};
        }
        case Topology::THTH: {
            PatternCell cell{2.0, 2.0 * kSqrt3, {}};
            for (const Vec2& site : {Vec2{0.0, 0.0}, Vec2{1.0, kSqrt3}}) {
                cell.basis.push_back(site + Vec2{1.0, 0.0});
                cell.basis.push_back(site + Vec2{0.5, kSqrt3 / 2.0});
                cell.basis.push_back(site + Vec2{-0.5, kSqrt3 / 2.0});
            }
            return cell;
        }
        case Topology::TSHS:
            return polygons_on_triangular_lattice(1.0 + kSqrt3, 6, 30.0);
        case Topology::TD2:
            return polygons_on_triangular_lattice(2.0 + kSqrt3, 12, 15.0);
        case Topology::SO2: {
            const double spacing = 1.0 + std::numbers::sqrt2;
            PatternCell cell{spacing, spacing, {}};
            append_polygon(cell.basis, {0.0, 0.0}, 8, 22.5);
            return cell;
        }
        case Topology::SHD:
            return polygons_on_triangular_lattice(3.0 + kSqrt3, 12, 15.0);
        case Topology::T4H:
            // hexagons on a triangular lattice of spacing sqrt7, twisted so
            // that neighbouring hexagons are bridged by triangle strips
            return polygons_on_triangular_lattice(std::sqrt(7.0), 6,
                                                  -std::atan(kSqrt3 / 5.0) * 180.0 / kPi);
    }
    throw Error(ErrorKind::UnknownTopology, "unhandled topology");
}

struct CellKey {
    std::int64_t i;
    std::int64_t j;
    bool operator==(const CellKey&) const = default;
};

struct CellKeyHash {
    std::size_t operator()(const CellKey& k) const noexcept {
        return std::hash<std::int64_t>()(k.i * 73856093LL ^ k.j * 19349663LL);
    }
};

// Uniform bucket grid over point indices.
class PointGrid {
public:
    explicit PointGrid(double cell) : cell_(cell) {}

    CellKey key(const Vec2& p) const {
        return {static_cast<std::int64_t>(std::floor(p.x() / cell_)),
                static_cast<std::int64_t>(std::floor(p.y() / cell_))};
    }

    void insert(const Vec2& p, int index) { buckets_[key(p)].push_back(index); }

    template <typename Fn>
    void for_each_near(const Vec2& p, Fn&& fn) const {
        const CellKey k = key(p);
        for (std::int64_t di = -1; di <= 1; ++di) {
            for (std::int64_t dj = -1; dj <= 1; ++dj) {
                const auto it = buckets_.find({k.i + di, k.j + dj});
                if (it == buckets_.end()) continue;
                for (const int idx : it->second) fn(idx);
            }
        }
    }

private:
    double cell_;
    std::unordered_map<CellKey, std::vector<int>, CellKeyHash> buckets_;
};

std::vector<std::vector<int>> adjacency(std::size_t n, const std::vector<Edge>& edges) {
    std::vector<std::vector<int>> adj(n);
    for (const auto& [a, b] : edges) {
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    return adj;
}

// Component label per vertex (labels are 0..k-1 in order of first vertex).
std::vector<int> component_labels(std::size_t n, const std::vector<Edge>& edges, int& count) {
    const auto adj = adjacency(n, edges);
    std::vector<int> label(n, -1);
    count = 0;
    std::vector<int> stack;
    for (std::size_t s = 0; s < n; ++s) {
        if (label[s] >= 0) continue;
        label[s] = count;
        stack.assign(1, static_cast<int>(s));
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            for (const int w : adj[v]) {
                if (label[w] < 0) {
                    label[w] = count;
                    stack.push_back(w);
                }
            }
        }
        ++count;
    }
    return label;
}

// Keeps the vertices flagged in `keep`, renumbering them in sorted (y, x)
// order so that the output does not depend on generation order.
TilingGraph compact(const TilingGraph& in, const std::vector<bool>& keep) {
    const double quantum = kMergeTol * in.edge_length;
    std::vector<int> order;
    for (std::size_t v = 0; v < in.vertices.size(); ++v) {
        if (keep[v]) order.push_back(static_cast<int>(v));
    }
    auto q = [quantum](double c) { return std::llround(c / quantum); };
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const auto ya = q(in.vertices[a].y());
        const auto yb = q(in.vertices[b].y());
        if (ya != yb) return ya < yb;
        return q(in.vertices[a].x()) < q(in.vertices[b].x());
    });
    std::vector<int> remap(in.vertices.size(), -1);
    TilingGraph out{in.topology, {}, {}, in.bbox, in.edge_length};
    for (const int v : order) {
        remap[v] = static_cast<int>(out.vertices.size());
        out.vertices.push_back(in.vertices[v]);
    }
    for (const auto& [a, b] : in.edges) {
        if (remap[a] < 0 || remap[b] < 0) continue;
        out.edges.push_back({std::min(remap[a], remap[b]), std::max(remap[a], remap[b])});
    }
    std::sort(out.edges.begin(), out.edges.end());
    return out;
}

TilingGraph clip_pattern(Topology topology, const PatternCell& cell, Vec2 anchor, Bbox bbox,
                         double edge_length) {
    const double e = edge_length;
    const double half_w = bbox.width / 2.0;
    const double half_h = bbox.height / 2.0;
    const double tol = kInsideTol * e;
    const double cell_w = cell.width * e;
    const double cell_h = cell.height * e;

    double reach = 0.0;
    for (const Vec2& b : cell.basis) reach = std::max(reach, b.cwiseAbs().maxCoeff());
    reach = (reach + 1.0) * e;

    const auto i_lo = static_cast<int>(std::floor((anchor.x() - half_w - reach) / cell_w));
    const auto i_hi = static_cast<int>(std::ceil((anchor.x() + half_w + reach) / cell_w));
    const auto j_lo = static_cast<int>(std::floor((anchor.y() - half_h - reach) / cell_h));
    const auto j_hi = static_cast<int>(std::ceil((anchor.y() + half_h + reach) / cell_h));

    TilingGraph g{topology, {}, {}, bbox, edge_length};
    PointGrid grid(e);
    const double merge = kMergeTol * e;
    for (int j = j_lo; j <= j_hi; ++j) {
        for (int i = i_lo; i <= i_hi; ++i) {
            for (const Vec2& b : cell.basis) {
                const Vec2 p{b.x() * e + i * cell_w - anchor.x(), b.y() * e + j * cell_h - anchor.y()};
                if (std::abs(p.x()) > half_w + tol || std::abs(p.y()) > half_h + tol) continue;
                bool duplicate = false;
                grid.for_each_near(p, [&](int idx) {
                    if ((g.vertices[idx] - p).norm() < merge) duplicate = true;
                });
                if (duplicate) continue;
                grid.insert(p, static_cast<int>(g.vertices.size()));
                g.vertices.push_back(p);
            }
        }
    }

    for (std::size_t a = 0; a < g.vertices.size(); ++a) {
        grid.for_each_near(g.vertices[a], [&](int b) {
            if (b <= static_cast<int>(a)) return;
            if (std::abs((g.vertices[b] - g.vertices[a]).norm() - e) < merge) {
                g.edges.push_back({static_cast<int>(a), b});
            }
        });
    }

    // Largest connected component among vertices that carry an edge.
    int count = 0;
    const auto label = component_labels(g.vertices.size(), g.edges, count);
    std::vector<int> edge_count(count, 0);
    for (const auto& edge : g.edges) ++edge_count[label[edge[0]]];
    const auto best = std::max_element(edge_count.begin(), edge_count.end()) - edge_count.begin();
    std::vector<bool> keep(g.vertices.size(), false);
    for (std::size_t v = 0; v < g.vertices.size(); ++v) {
        keep[v] = count > 0 && label[v] == best && edge_count[best] > 0;
    }
    return compact(g, keep);
}

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

std::string edge_entity(std::size_t index, const Edge& edge) {
    return fmt::format("edge {} ({}-{})", index, edge[0], edge[1]);
}

// True when the closed segments [p1,p2] and [q1,q2] share a point, with
// `eps` as the collinearity tolerance.
bool segments_touch(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2, double eps) {
    const double d1 = cross(p2 - p1, q1 - p1);
    const double d2 = cross(p2 - p1, q2 - p1);
    const double d3 = cross(q2 - q1, p1 - q1);
    const double d4 = cross(q2 - q1, p2 - q1);
    auto on_segment = [eps](const Vec2& a, const Vec2& b, const Vec2& p, double d) {
        if (std::abs(d) > eps) return false;
        return p.x() >= std::min(a.x(), b.x()) - 1e-12 && p.x() <= std::max(a.x(), b.x()) + 1e-12 &&
               p.y() >= std::min(a.y(), b.y()) - 1e-12 && p.y() <= std::max(a.y(), b.y()) + 1e-12;
    };
    if (((d1 > eps && d2 < -eps) || (d1 < -eps && d2 > eps)) &&
        ((d3 > eps && d4 < -eps) || (d3 < -eps && d4 > eps))) {
        return true;
    }
    return on_segment(p1, p2, q1, d1) || on_segment(p1, p2, q2, d2) || on_segment(q1, q2, p1, d3) ||
           on_segment(q1, q2, p2, d4);
}

// True if some polygon of the pattern, as oriented in the pattern, fits in
// the box when translated freely.
bool polygon_fits(Topology topology, const PatternCell& cell, Bbox bbox, double e) {
    const Bbox sample{3.0 * cell.width * e + 4.0 * e, 3.0 * cell.height * e + 4.0 * e};
    const TilingGraph patch = clip_pattern(topology, cell, {0.0, 0.0}, sample, e);
    const double tol = 1e-9 * e;
    for (const Face& face : enclosed_faces(patch).faces) {
        double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
        for (const int v : face.vertices) {
            const Vec2& p = patch.vertices[v];
            x0 = std::min(x0, p.x());
            x1 = std::max(x1, p.x());
            y0 = std::min(y0, p.y());
            y1 = std::max(y1, p.y());
        }
        if (x1 - x0 <= bbox.width + tol && y1 - y0 <= bbox.height + tol) return true;
    }
    return false;
}

}  // namespace

std::string TopologyInfo::config_string() const {
    std::string out;
    for (std::size_t k = 0; k < vertex_config.size(); ++k) {
        if (k > 0) out += '.';
        out += std::to_string(vertex_config[k]);
    }
    return out;
}

std::span<const TopologyInfo> list_topologies() { return catalog(); }

const TopologyInfo& topology_info(Topology topology) {
    return catalog().at(static_cast<std::size_t>(topology));
}

std::string_view code(Topology topology) { return topology_info(topology).code; }

Topology parse_topology(std::string_view text) {
    for (const auto& info : catalog()) {
        if (info.code == text) return info.id;
    }
    throw Error(ErrorKind::UnknownTopology, fmt::format("'{}' is not a uniform tiling code", text));
}

TilingGraph generate_tiling(Topology topology, Bbox bbox, double edge_length) {
    if (!(edge_length > 0.0) || !std::isfinite(edge_length)) {
        throw Error(ErrorKind::InvalidInput, "edge length must be positive");
    }
    if (!(bbox.width > 0.0) || !(bbox.height > 0.0) || !std::isfinite(bbox.width) ||
        !std::isfinite(bbox.height)) {
        throw Error(ErrorKind::InvalidInput, "bounding box must have positive size");
    }
    const PatternCell cell = pattern_cell(topology);
    const double e = edge_length;
    std::vector<Vec2> anchors{{0.0, 0.0}};
    if (topology_info(topology).orthotropic_rve) {
        anchors.emplace_back(cell.width * e / 2.0, 0.0);
        anchors.emplace_back(0.0, cell.height * e / 2.0);
        anchors.emplace_back(cell.width * e / 2.0, cell.height * e / 2.0);
    }

    TilingGraph best;
    bool have_best = false;
    for (const Vec2& anchor : anchors) {
        TilingGraph candidate = clip_pattern(topology, cell, anchor, bbox, edge_length);
        if (!have_best || candidate.edges.size() > best.edges.size()) {
            best = std::move(candidate);
            have_best = true;
        }
    }
    if (best.edges.empty() || !polygon_fits(topology, cell, bbox, e)) {
        throw Error(ErrorKind::BboxTooSmall,
                    fmt::format("no {} polygon with edge {} mm fits in {} x {} mm", code(topology),
                                edge_length, bbox.width, bbox.height));
    }
    return best;
}

Vec2 mirror_line_spacing(Topology topology, double edge_length) {
    if (!topology_info(topology).orthotropic_rve) {
        throw Error(ErrorKind::NotOrthotropic, fmt::format("{} has no mirror lines", code(topology)));
    }
    const PatternCell cell = pattern_cell(topology);
    return {cell.width * edge_length / 2.0, cell.height * edge_length / 2.0};
}

bool ValidationReport::has(std::string_view rule) const {
    return std::any_of(violations.begin(), violations.end(),
                       [rule](const Violation& v) { return v.rule == rule; });
}

std::vector<int> vertex_degrees(const TilingGraph& graph) {
    std::vector<int> degree(graph.vertices.size(), 0);
    for (const auto& [a, b] : graph.edges) {
        if (a >= 0 && b >= 0 && a < static_cast<int>(degree.size()) && b < static_cast<int>(degree.size())) {
            ++degree[a];
            ++degree[b];
        }
    }
    return degree;
}

ValidationReport validate_tiling(const TilingGraph& graph) {
    ValidationReport report;
    auto add = [&report](std::string rule, std::string entity, double measured) {
        report.violations.push_back({std::move(rule), std::move(entity), measured});
    };
    const double e = graph.edge_length;
    const int n = static_cast<int>(graph.vertices.size());
    if (!(e > 0.0)) {
        add("edge-length", "graph", e);
        return report;
    }

    bool indices_ok = true;
    for (std::size_t k = 0; k < graph.edges.size(); ++k) {
        const auto& [a, b] = graph.edges[k];
        if (a < 0 || b < 0 || a >= n || b >= n || a == b) {
            add("index-range", edge_entity(k, graph.edges[k]), static_cast<double>(std::max(a, b)));
            indices_ok = false;
        }
    }
    if (!indices_ok) return report;

    // equal edge lengths
    double longest = 0.0;
    for (std::size_t k = 0; k < graph.edges.size(); ++k) {
        const auto& [a, b] = graph.edges[k];
        const double len = (graph.vertices[b] - graph.vertices[a]).norm();
        longest = std::max(longest, len);
        if (std::abs(len - e) > kLengthTol * e) add("equal-edge", edge_entity(k, graph.edges[k]), len);
    }

    // duplicate vertices
    PointGrid vertex_grid(e);
    for (int v = 0; v < n; ++v) {
        vertex_grid.for_each_near(graph.vertices[v], [&](int w) {
            const double d = (graph.vertices[w] - graph.vertices[v]).norm();
            if (d <= kMergeTol * e) add("duplicate-vertex", fmt::format("vertices {} and {}", w, v), d);
        });
        vertex_grid.insert(graph.vertices[v], v);
    }

    // duplicate edges
    std::vector<Edge> sorted;
    sorted.reserve(graph.edges.size());
    for (const auto& [a, b] : graph.edges) sorted.push_back({std::min(a, b), std::max(a, b)});
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t k = 1; k < sorted.size(); ++k) {
        if (sorted[k] == sorted[k - 1]) {
            add("duplicate-edge", fmt::format("edge ({}-{})", sorted[k][0], sorted[k][1]), 2.0);
        }
    }

    // edge-to-edge: no crossings or touching away from shared endpoints
    PointGrid midpoint_grid(std::max(longest, e));
    const double eps = 1e-9 * e * e;
    for (std::size_t k = 0; k < graph.edges.size(); ++k) {
        const auto& ek = graph.edges[k];
        const Vec2& p1 = graph.vertices[ek[0]];
        const Vec2& p2 = graph.vertices[ek[1]];
        const Vec2 mid = 0.5 * (p1 + p2);
        midpoint_grid.for_each_near(mid, [&](int other) {
            const auto& eo = graph.edges[other];
            const Vec2& q1 = graph.vertices[eo[0]];
            const Vec2& q2 = graph.vertices[eo[1]];
            const bool shares = ek[0] == eo[0] || ek[0] == eo[1] || ek[1] == eo[0] || ek[1] == eo[1];
            bool bad = false;
            if (!shares) {
                bad = segments_touch(p1, p2, q1, q2, eps);
            } else if (ek != eo) {
                // sharing one endpoint: only a collinear overlap is illegal
                const int common = (ek[0] == eo[0] || ek[0] == eo[1]) ? ek[0] : ek[1];
                const Vec2& c = graph.vertices[common];
                const Vec2 u = (ek[0] == common ? p2 : p1) - c;
                const Vec2 w = (eo[0] == common ? q2 : q1) - c;
                bad = std::abs(cross(u, w)) <= eps && u.dot(w) > 0.0;
            }
            if (bad) {
                add("edge-to-edge", fmt::format("{} x {}", edge_entity(k, ek), edge_entity(other, eo)),
                    (mid - 0.5 * (q1 + q2)).norm());
            }
        });
        midpoint_grid.insert(mid, static_cast<int>(k));
    }

    // degree bounds
    const int full = topology_info(graph.topology).vertex_degree;
    const auto degree = vertex_degrees(graph);
    const double half_w = graph.bbox.width / 2.0;
    const double half_h = graph.bbox.height / 2.0;
    for (int v = 0; v < n; ++v) {
        if (degree[v] > full) {
            add("degree", fmt::format("vertex {}", v), degree[v]);
            continue;
        }
        const Vec2& p = graph.vertices[v];
        const double clearance = std::min(half_w - std::abs(p.x()), half_h - std::abs(p.y()));
        if (clearance > e * (1.0 + kLengthTol) && degree[v] != full) {
            add("interior-degree", fmt::format("vertex {}", v), degree[v]);
        }
        if (degree[v] == 0) add("isolated-vertex", fmt::format("vertex {}", v), 0.0);
    }

    int components = 0;
    component_labels(graph.vertices.size(), graph.edges, components);
    if (components > 1) add("connected", "graph", components);
    return report;
}

std::vector<int> perimeter_vertices(const TilingGraph& graph) {
    const int full = topology_info(graph.topology).vertex_degree;
    const auto degree = vertex_degrees(graph);
    std::vector<int> out;
    for (std::size_t v = 0; v < degree.size(); ++v) {
        if (degree[v] < full) out.push_back(static_cast<int>(v));
    }
    return out;
}

FaceSet enclosed_faces(const TilingGraph& graph) {
    const std::size_t n = graph.vertices.size();
    // Half-edge 2k runs a->b of edge k, 2k+1 runs b->a.
    std::vector<std::vector<int>> outgoing(n);
    for (std::size_t k = 0; k < graph.edges.size(); ++k) {
        outgoing[graph.edges[k][0]].push_back(static_cast<int>(2 * k));
        outgoing[graph.edges[k][1]].push_back(static_cast<int>(2 * k + 1));
    }
    auto origin = [&](int h) { return graph.edges[h / 2][h % 2]; };
    auto target = [&](int h) { return graph.edges[h / 2][1 - h % 2]; };
    std::vector<int> slot(2 * graph.edges.size(), 0);  // position of h in outgoing[origin(h)]
    for (std::size_t v = 0; v < n; ++v) {
        auto& out = outgoing[v];
        std::sort(out.begin(), out.end(), [&](int a, int b) {
            const Vec2 da = graph.vertices[target(a)] - graph.vertices[v];
            const Vec2 db = graph.vertices[target(b)] - graph.vertices[v];
            return std::atan2(da.y(), da.x()) < std::atan2(db.y(), db.x());
        });
        for (std::size_t s = 0; s < out.size(); ++s) slot[out[s]] = static_cast<int>(s);
    }

    FaceSet result;
    result.faces_per_edge.assign(graph.edges.size(), 0);
    std::vector<bool> visited(2 * graph.edges.size(), false);
    for (std::size_t start = 0; start < visited.size(); ++start) {
        if (visited[start]) continue;
        Face face;
        std::vector<int> loop;
        int h = static_cast<int>(start);
        while (!visited[h]) {
            visited[h] = true;
            loop.push_back(h);
            face.vertices.push_back(origin(h));
            // at the head vertex, turn to the neighbour just clockwise of the twin
            const int twin = h ^ 1;
            const auto& around = outgoing[target(h)];
            const int s = slot[twin];
            h = around[(s + around.size() - 1) % around.size()];
        }
        double twice_area = 0.0;
        for (std::size_t k = 0; k < face.vertices.size(); ++k) {
            const Vec2& a = graph.vertices[face.vertices[k]];
            const Vec2& b = graph.vertices[face.vertices[(k + 1) % face.vertices.size()]];
            twice_area += cross(a, b);
        }
        if (twice_area <= 0.0) continue;  // outer face (clockwise) or degenerate
        face.area = 0.5 * twice_area;
        for (const int half : loop) ++result.faces_per_edge[half / 2];
        result.faces.push_back(std::move(face));
    }
    return result;
}

nlohmann::json to_json(const TilingGraph& graph) {
    nlohmann::json vertices = nlohmann::json::array();
    for (const Vec2& p : graph.vertices) vertices.push_back({p.x(), p.y()});
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& [a, b] : graph.edges) edges.push_back({a, b});
    return {{"topology", std::string(code(graph.topology))},
            {"edge_length_mm", graph.edge_length},
            {"bbox_mm", {graph.bbox.width, graph.bbox.height}},
            {"vertices", std::move(vertices)},
            {"edges", std::move(edges)}};
}

TilingGraph tiling_from_json(const nlohmann::json& doc) {
    try {
        TilingGraph g;
        g.topology = parse_topology(doc.at("topology").get<std::string>());
        g.edge_length = doc.at("edge_length_mm").get<double>();
        g.bbox = {doc.at("bbox_mm").at(0).get<double>(), doc.at("bbox_mm").at(1).get<double>()};
        for (const auto& p : doc.at("vertices")) g.vertices.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
        for (const auto& e : doc.at("edges")) g.edges.push_back({e.at(0).get<int>(), e.at(1).get<int>()});
        return g;
    } catch (const nlohmann::json::exception& ex) {
        throw Error(ErrorKind::InvalidInput, fmt::format("malformed mesh document: {}", ex.what()));
    }
}

}  // namespace lattice
