#pragma once

#include <iosfwd>
#include <memory>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "lattice/meshbuild.hpp"

namespace lattice {

using ElementMatrix = Eigen::Matrix<double, 6, 6>;

/// Exact shear-flexible (Timoshenko) stiffness of a prismatic 2D beam in
/// global coordinates, DOF order (ux, uy, theta) at each end. Units N/mm,
/// N and N mm. Throws Error(ZeroLength) when the ends are within 1e-9 mm.
ElementMatrix element_stiffness(const Vec2& start, const Vec2& end, const SectionProfile& section,
                                const Material& material);

// Macroscopic strain; eps12 is the tensor shear component (engineering
// shear strain is 2*eps12).
struct MacroStrain {
    double eps11 = 0.0;
    double eps22 = 0.0;
    double eps12 = 0.0;

    bool is_zero() const { return eps11 == 0.0 && eps22 == 0.0 && eps12 == 0.0; }
    /// Throws Error(InvalidInput) if a component is non-finite or exceeds 0.1 in magnitude.
    void validate() const;
};

struct LinearSystem {
    Eigen::SparseMatrix<double> stiffness;  // full symmetric storage
    int node_count = 0;

    int dof_count() const { return 3 * node_count; }
    static int dof(int node, int component) { return 3 * node + component; }
};

/// Throws Error(DisconnectedMesh) unless the FE nodes form one component.
LinearSystem assemble(const BeamMesh& mesh);

// Prescribed translations; refers to `system`, which must outlive it.
struct ConstrainedSystem {
    const LinearSystem* system = nullptr;
    std::vector<int> prescribed_dofs;  // ascending
    Eigen::VectorXd prescribed_values;
};

/// Affine (kinematically uniform) boundary conditions: each boundary hub at
/// (x, y) relative to the box center gets ux = e11 x + e12 y and
/// uy = e12 x + e22 y. Hub rotations and all other DOFs stay free.
/// Throws Error(NoBoundary) if the mesh has no boundary hubs.
ConstrainedSystem apply_affine_bc(const LinearSystem& system, const BeamMesh& mesh, const MacroStrain& strain);

// The part of a beam mesh between the outermost pair of lattice mirror lines
// in each direction, with members cut where they cross a line and members
// lying on a line carried at half section. Under the conditions of
// apply_symmetry_bc this model reproduces the response of the unbounded
// periodic lattice.
struct SymmetryCell {
    BeamMesh mesh;  // bbox is (2 half_width, 2 half_height), boundary_hubs are the line nodes
    double half_width = 0.0;   // mm, position of the vertical mirror lines
    double half_height = 0.0;  // mm, position of the horizontal mirror lines
};

/// Cuts `mesh` at mirror lines x = +-k sx and y = +-k sy (spacings from
/// mirror_line_spacing), choosing the largest rectangle whose interior
/// holds no perimeter hub, so that no lattice member is missing from it.
/// Throws Error(BboxTooSmall) when no such rectangle exists.
SymmetryCell make_symmetry_cell(const BeamMesh& mesh, Vec2 mirror_spacing);

/// Mirror-line conditions on a symmetry cell. A normal strain state
/// (eps12 == 0) prescribes, on each line, the displacement normal to it
/// (u = eps x) and a zero rotation, leaving the tangential one free. Pure
/// shear (eps11 == eps22 == 0) prescribes the tangential displacement and
/// leaves the normal one and the rotation free. Throws Error(InvalidInput)
/// for a strain mixing both.
ConstrainedSystem apply_symmetry_bc(const LinearSystem& system, const SymmetryCell& cell, const MacroStrain& strain);

struct Solution {
    Eigen::VectorXd displacements;  // all DOFs: mm, mm, rad per node
    Eigen::VectorXd reactions;      // K u; nonzero only at prescribed DOFs up to round-off
    double energy = 0.0;            // 1/2 u^T K u, N mm
    double relative_residual = 0.0;
};

// Factorises the free-free block once so that many prescribed-displacement
// vectors with the same constrained DOF set can be solved cheaply.
class PartitionedSolver {
public:
    /// Throws Error(SingularSystem) with the weakest pivot's node and
    /// component when the free block cannot be factorised.
    PartitionedSolver(const LinearSystem& system, std::vector<int> prescribed_dofs);
    ~PartitionedSolver();
    PartitionedSolver(PartitionedSolver&&) noexcept;
    PartitionedSolver& operator=(PartitionedSolver&&) noexcept;

    Solution solve(const Eigen::VectorXd& prescribed_values) const;

    const std::vector<int>& prescribed_dofs() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

Solution solve(const ConstrainedSystem& constrained);

/// Energy stored in each FE element, N mm.
std::vector<double> element_energies(const Solution& solution, const BeamMesh& mesh);

/// Strain-energy density U / (W H depth) in MPa (N mm / mm^3), with W x H
/// the mesh bounding box.
double strain_energy_density(const Solution& solution, const BeamMesh& mesh);

/// Matrix Market coordinate format, symmetric, lower triangle.
void write_matrix_market(std::ostream& out, const Eigen::SparseMatrix<double>& matrix);

/// CSV: node,x,y,ux,uy,theta
void write_solution_csv(std::ostream& out, const BeamMesh& mesh, const Solution& solution);

}  // namespace lattice
