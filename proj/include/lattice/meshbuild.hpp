#pragma once

#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "lattice/tiling.hpp"

namespace lattice {

struct Material {
    double young_modulus = 2000.0;  // MPa
    double poisson_ratio = 0.3;

    double shear_modulus() const { return young_modulus / (2.0 * (1.0 + poisson_ratio)); }

    /// Throws Error(InvalidInput) unless E > 0 and -1 < nu < 0.5.
    void validate() const;
};

enum class SegmentRole { NodeArm, Actuator };

std::string_view to_string(SegmentRole role);

// Rectangular section: width in the plane of the lattice, depth out of plane.
struct SectionProfile {
    double in_plane_width = 0.0;     // mm
    double out_of_plane_depth = 0.0; // mm
    double area = 0.0;               // mm^2
    double second_moment = 0.0;      // mm^4, in-plane bending
    double shear_correction = 5.0 / 6.0;

    static SectionProfile rectangular(double width, double depth);
};

enum class StiffnessCaseId { ActuatorStiff, NodeStiff, EqualLow, EqualHigh };

struct StiffnessCase {
    StiffnessCaseId id = StiffnessCaseId::ActuatorStiff;
    double actuator_width = 5.0;  // mm
    double node_width = 1.0;      // mm

    /// Default widths: ActuatorStiff (5,1), NodeStiff (1,5), EqualLow (1,1),
    /// EqualHigh (5,5), as (actuator, node) in mm.
    static StiffnessCase make(StiffnessCaseId id);
    static StiffnessCase make(StiffnessCaseId id, double wide, double narrow);
};

std::string_view to_string(StiffnessCaseId id);       // "actuator-stiff", ...
StiffnessCaseId parse_stiffness_case(std::string_view text);  // throws Error(InvalidInput)
inline constexpr StiffnessCaseId kAllCases[] = {StiffnessCaseId::ActuatorStiff, StiffnessCaseId::NodeStiff,
                                                StiffnessCaseId::EqualLow, StiffnessCaseId::EqualHigh};

SectionProfile section_for(const StiffnessCase& stiffness_case, SegmentRole role, double depth);

struct Segment {
    int i = 0;
    int j = 0;
    SegmentRole role = SegmentRole::Actuator;
    SectionProfile section;
    int edge = 0;  // index of the source tiling edge
};

struct MeshOptions {
    double arm_fraction = 0.25;  // each node arm is a quarter of the edge (12.5 of 50 mm)
    int subdivisions = 1;        // FE elements per segment
};

// FE-ready beam model. Fe-nodes [0, hub_count) are the tiling vertices in the
// same order (the rigid hubs); each tiling edge then contributes two
// interior nodes, and every segment is split into `subdivisions` elements.
struct BeamMesh {
    std::vector<Vec2> fe_nodes;
    std::vector<Segment> segments;  // one per FE element
    int hub_count = 0;
    std::vector<int> boundary_hubs;  // ascending, equals perimeter_vertices(graph)
    Bbox bbox;
    double depth = 5.0;
    double edge_length = 50.0;
    Material material;
    StiffnessCase stiffness_case;
    Topology topology = Topology::S;
    int subdivisions = 1;

    std::size_t dof_count() const { return 3 * fe_nodes.size(); }
};

/// Throws Error(InvalidGraph) when the graph fails validation and
/// Error(InvalidInput) for a non-positive depth or an invalid material.
BeamMesh build_beam_mesh(const TilingGraph& graph, const StiffnessCase& stiffness_case,
                         const Material& material, double depth, const MeshOptions& options = {});

nlohmann::json to_json(const BeamMesh& mesh);

}  // namespace lattice
