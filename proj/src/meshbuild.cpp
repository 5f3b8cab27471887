#include "lattice/meshbuild.hpp"

#include <cmath>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "lattice/error.hpp"

namespace lattice {

void Material::validate() const {
    if (!(young_modulus > 0.0) || !std::isfinite(young_modulus)) {
        throw Error(ErrorKind::InvalidInput, fmt::format("Young's modulus must be positive, got {}", young_modulus));
    }
    if (!(poisson_ratio > -1.0 && poisson_ratio < 0.5)) {
        throw Error(ErrorKind::InvalidInput, fmt::format("Poisson's ratio must lie in (-1, 0.5), got {}", poisson_ratio));
    }
}

std::string_view to_string(SegmentRole role) {
    return role == SegmentRole::Actuator ? "actuator" : "node-arm";
}

SectionProfile SectionProfile::rectangular(double width, double depth) {
    return {width, depth, width * depth, depth * width * width * width / 12.0, 5.0 / 6.0};
}

StiffnessCase StiffnessCase::make(StiffnessCaseId id) { return make(id, 5.0, 1.0); }

StiffnessCase StiffnessCase::make(StiffnessCaseId id, double wide, double narrow) {
    switch (id) {
        case StiffnessCaseId::ActuatorStiff: return {id, wide, narrow};
        case StiffnessCaseId::NodeStiff: return {id, narrow, wide};
        case StiffnessCaseId::EqualLow: return {id, narrow, narrow};
        case StiffnessCaseId::EqualHigh: return {id, wide, wide};
    }
    throw Error(ErrorKind::InvalidInput, "unknown stiffness case");
}

std::string_view to_string(StiffnessCaseId id) {
    switch (id) {
        case StiffnessCaseId::ActuatorStiff: return "actuator-stiff";
        case StiffnessCaseId::NodeStiff: return "node-stiff";
        case StiffnessCaseId::EqualLow: return "equal-low";
        case StiffnessCaseId::EqualHigh: return "equal-high";
    }
    return "unknown";
}

StiffnessCaseId parse_stiffness_case(std::string_view text) {
    for (const auto id : kAllCases) {
        if (to_string(id) == text) return id;
    }
    throw Error(ErrorKind::InvalidInput,
                fmt::format("unknown stiffness case '{}' (expected actuator-stiff, node-stiff, equal-low, equal-high)", text));
}

SectionProfile section_for(const StiffnessCase& stiffness_case, SegmentRole role, double depth) {
    if (!(depth > 0.0)) throw Error(ErrorKind::InvalidInput, "section depth must be positive");
    const double width = role == SegmentRole::Actuator ? stiffness_case.actuator_width : stiffness_case.node_width;
    if (!(width > 0.0)) throw Error(ErrorKind::InvalidInput, "section width must be positive");
    return SectionProfile::rectangular(width, depth);
}

BeamMesh build_beam_mesh(const TilingGraph& graph, const StiffnessCase& stiffness_case,
                         const Material& material, double depth, const MeshOptions& options) {
    material.validate();
    if (!(depth > 0.0)) throw Error(ErrorKind::InvalidInput, "depth must be positive");
    if (options.subdivisions < 1) throw Error(ErrorKind::InvalidInput, "subdivisions must be at least 1");
    if (!(options.arm_fraction > 0.0 && options.arm_fraction < 0.5)) {
        throw Error(ErrorKind::InvalidInput, "arm fraction must lie in (0, 0.5)");
    }
    const auto report = validate_tiling(graph);
    if (!report.passed()) {
        const auto& first = report.violations.front();
        throw Error(ErrorKind::InvalidGraph, fmt::format("{} violation(s), first: {} at {} (measured {})",
                                                         report.violations.size(), first.rule, first.entity,
                                                         first.measured));
    }

    BeamMesh mesh;
    mesh.bbox = graph.bbox;
    mesh.depth = depth;
    mesh.edge_length = graph.edge_length;
    mesh.material = material;
    mesh.stiffness_case = stiffness_case;
    mesh.topology = graph.topology;
    mesh.subdivisions = options.subdivisions;
    mesh.hub_count = static_cast<int>(graph.vertices.size());
    mesh.boundary_hubs = perimeter_vertices(graph);

    const SectionProfile arm = section_for(stiffness_case, SegmentRole::NodeArm, depth);
    const SectionProfile actuator = section_for(stiffness_case, SegmentRole::Actuator, depth);

    mesh.fe_nodes = graph.vertices;
    mesh.fe_nodes.reserve(graph.vertices.size() + 2 * graph.edges.size() * options.subdivisions);
    for (const auto& [a, b] : graph.edges) {
        const Vec2& pa = graph.vertices[a];
        const Vec2& pb = graph.vertices[b];
        mesh.fe_nodes.push_back(pa + options.arm_fraction * (pb - pa));
        mesh.fe_nodes.push_back(pb + options.arm_fraction * (pa - pb));
    }

    auto add_member = [&mesh, &options](int i, int j, SegmentRole role, const SectionProfile& section, int edge) {
        int prev = i;
        const Vec2 pi = mesh.fe_nodes[i];
        const Vec2 pj = mesh.fe_nodes[j];
        for (int s = 1; s < options.subdivisions; ++s) {
            const double t = static_cast<double>(s) / options.subdivisions;
            mesh.fe_nodes.push_back(pi + t * (pj - pi));
            const int next = static_cast<int>(mesh.fe_nodes.size()) - 1;
            mesh.segments.push_back({prev, next, role, section, edge});
            prev = next;
        }
        mesh.segments.push_back({prev, j, role, section, edge});
    };

    for (std::size_t k = 0; k < graph.edges.size(); ++k) {
        const auto [a, b] = graph.edges[k];
        const int near_a = mesh.hub_count + static_cast<int>(2 * k);
        const int near_b = near_a + 1;
        const int edge = static_cast<int>(k);
        add_member(a, near_a, SegmentRole::NodeArm, arm, edge);
        add_member(near_a, near_b, SegmentRole::Actuator, actuator, edge);
        add_member(near_b, b, SegmentRole::NodeArm, arm, edge);
    }

    return mesh;
}

nlohmann::json to_json(const BeamMesh& mesh) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const Vec2& p : mesh.fe_nodes) nodes.push_back({p.x(), p.y()});
    nlohmann::json segments = nlohmann::json::array();
    for (const Segment& s : mesh.segments) {
        segments.push_back({{"i", s.i}, {"j", s.j}, {"role", std::string(to_string(s.role))},
                            {"width_mm", s.section.in_plane_width}});
    }
    return {{"material", {{"young_modulus_mpa", mesh.material.young_modulus},
                          {"poisson_ratio", mesh.material.poisson_ratio}}},
            {"depth_mm", mesh.depth},
            {"case", std::string(to_string(mesh.stiffness_case.id))},
            {"fe_nodes", std::move(nodes)},
            {"segments", std::move(segments)},
            {"boundary_hubs", mesh.boundary_hubs}};
}

}  // namespace lattice
