#pragma once

#include <array>
#include <span>
#include <string_view>

#include <nlohmann/json_fwd.hpp>

#include "lattice/fem.hpp"

namespace lattice {

// Load cases of the strain-energy method: (a) uniaxial x, (b) uniaxial y,
// (c) pure shear, (d) equal biaxial.
enum class LoadCase { A, B, C, D };

inline constexpr LoadCase kLoadCases[] = {LoadCase::A, LoadCase::B, LoadCase::C, LoadCase::D};

/// a -> (s,0,0); b -> (0,s,0); c -> (0,0,s); d -> (s,s,0).
/// Throws Error(InvalidInput) unless 0 < s <= 0.1.
MacroStrain load_case_strain(LoadCase load_case, double s);

struct EnergyDensities {
    double se_a = 0.0;  // MPa
    double se_b = 0.0;
    double se_c = 0.0;
    double se_d = 0.0;
    std::array<MacroStrain, 4> strains{};  // the strain applied in a, b, c, d

    double operator[](LoadCase load_case) const;
};

struct StiffnessTensorH {
    double c1111 = 0.0;  // MPa
    double c2222 = 0.0;
    double c1122 = 0.0;  // equals C2211
    double c1212 = 0.0;
};

struct MacroStress {
    double sigma11 = 0.0;  // MPa
    double sigma22 = 0.0;
    double sigma12 = 0.0;
};

struct EngineeringConstants {
    double e1 = 0.0;  // MPa
    double e2 = 0.0;
    double g12 = 0.0;
    double nu12 = 0.0;
    double nu21 = 0.0;
};

enum class BoundaryMode {
    Symmetry,  // symmetry cell cut at mirror lines, apply_symmetry_bc
    Affine,    // whole clipped mesh, apply_affine_bc on the perimeter hubs
};

struct HomogenizeOptions {
    BoundaryMode boundary = BoundaryMode::Symmetry;
    bool parallel_load_cases = false;
};

/// Solves the four load cases on `mesh` at strain magnitude `s`. In
/// symmetry mode the mesh is first cut to its symmetry cell and the
/// densities refer to the cell volume.
EnergyDensities run_load_cases(const BeamMesh& mesh, double s, const HomogenizeOptions& options = {});

/// C1111 = 2 SE_a / e11^2, C2222 = 2 SE_b / e22^2, C1212 = SE_c / (2 e12^2),
/// C1122 = (SE_d - SE_a - SE_b) / (e11 e22).
///
/// Throws Error(InvalidInput) if the biaxial strains differ from those of
/// the uniaxial cases, Error(NotPositiveDefinite) if the tensor is not.
StiffnessTensorH stiffness_tensor(const EnergyDensities& densities);

MacroStress macro_stress(const StiffnessTensorH& c, const MacroStrain& strain);

EngineeringConstants engineering_constants(const StiffnessTensorH& c);

// Everything fixed for one homogenisation apart from topology, box, case and
// strain. Defaults are the reference actuator lattice: E = 2000 MPa,
// nu = 0.3, 5 mm depth, 50 mm edges split 12.5 / 25 / 12.5 mm.
struct LatticeParameters {
    Material material;
    double depth = 5.0;         // mm
    double edge_length = 50.0;  // mm
    MeshOptions mesh;
    HomogenizeOptions homogenize;
};

struct ResultRecord {
    Topology topology = Topology::S;
    Bbox bbox;
    StiffnessCaseId stiffness_case = StiffnessCaseId::ActuatorStiff;
    double strain = 0.0;
    StiffnessTensorH tensor;
    EngineeringConstants constants;
    double solve_seconds = 0.0;
    std::size_t dof_count = 0;
};

/// Full chain tiling -> beam mesh -> four solves -> tensor -> constants.
/// Throws Error(NotOrthotropic) for T4H.
ResultRecord homogenize(Topology topology, Bbox bbox, const StiffnessCase& stiffness_case, double strain,
                        const LatticeParameters& params = {});

/// Same as homogenize() for several strain magnitudes, reusing one mesh and
/// one factorisation. Records come back in the order of `strains`.
std::vector<ResultRecord> homogenize_sweep(Topology topology, Bbox bbox, const StiffnessCase& stiffness_case,
                                           std::span<const double> strains, const LatticeParameters& params = {});

nlohmann::json to_json(const ResultRecord& record);

}  // namespace lattice
