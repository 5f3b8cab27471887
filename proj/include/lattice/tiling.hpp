#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

namespace lattice {

using Vec2 = Eigen::Vector2d;

// The eleven uniform tilings of the plane. Codes read the polygons around a
// vertex: T=triangle, S=square, H=hexagon, O=octagon, D=dodecagon.
enum class Topology { T, S, H, T3S2, T2STS, THTH, TSHS, TD2, SO2, SHD, T4H };

struct TopologyInfo {
    Topology id;
    std::string_view code;
    std::vector<int> vertex_config;  // polygon side counts in order around a vertex
    int vertex_degree;
    bool orthotropic_rve;  // false only for the chiral snub hexagonal tiling

    std::string config_string() const;  // e.g. "3.6.3.6"
};

/// All eleven tilings in catalog order: T, S, H, T3S2, T2STS, THTH, TSHS,
/// TD2, SO2, SHD, T4H.
std::span<const TopologyInfo> list_topologies();
const TopologyInfo& topology_info(Topology topology);
std::string_view code(Topology topology);

/// Parses a topology code ("THTH", "T3S2", ...). Case-sensitive.
/// Throws Error(UnknownTopology).
Topology parse_topology(std::string_view code);

struct Bbox {
    double width = 0.0;   // mm
    double height = 0.0;  // mm
};

using Edge = std::array<int, 2>;

// Vertex coordinates are in mm with the origin at the bounding-box center, so
// the box spans [-width/2, width/2] x [-height/2, height/2].
struct TilingGraph {
    Topology topology = Topology::S;
    std::vector<Vec2> vertices;
    std::vector<Edge> edges;  // i < j, sorted
    Bbox bbox;
    double edge_length = 0.0;  // mm
};

/// Clips the tiling to `bbox`, keeping only edges that lie completely inside.
/// The pattern is anchored so that its two mirror axes coincide with the box
/// center lines; among the admissible anchors the one retaining most edges
/// wins. Only the largest connected component is returned.
///
/// Throws Error(InvalidInput) for non-positive sizes and Error(BboxTooSmall)
/// when not a single complete polygon of the tiling fits inside the box.
TilingGraph generate_tiling(Topology topology, Bbox bbox, double edge_length);

/// Distance (mm) between adjacent vertical and horizontal mirror lines of
/// the pattern placed by generate_tiling; one line of each family passes
/// through the box center. Throws Error(NotOrthotropic) for T4H.
Vec2 mirror_line_spacing(Topology topology, double edge_length);

struct Violation {
    std::string rule;    // "equal-edge", "edge-to-edge", "duplicate-vertex", ...
    std::string entity;  // human-readable offending item, e.g. "edge 12 (4-9)"
    double measured = 0.0;
};

struct ValidationReport {
    std::vector<Violation> violations;

    bool passed() const { return violations.empty(); }
    bool has(std::string_view rule) const;
};

ValidationReport validate_tiling(const TilingGraph& graph);

std::vector<int> vertex_degrees(const TilingGraph& graph);

/// Vertices whose degree is below the catalog degree, ascending.
std::vector<int> perimeter_vertices(const TilingGraph& graph);

// A bounded face of the planar embedding; for a clipped tiling these are
// exactly the complete polygons that survived clipping.
struct Face {
    std::vector<int> vertices;  // counter-clockwise
    double area = 0.0;          // mm^2
};

struct FaceSet {
    std::vector<Face> faces;
    std::vector<int> faces_per_edge;  // 0, 1 or 2 bounded faces adjacent to each edge
};

FaceSet enclosed_faces(const TilingGraph& graph);

nlohmann::json to_json(const TilingGraph& graph);
TilingGraph tiling_from_json(const nlohmann::json& doc);

}  // namespace lattice
