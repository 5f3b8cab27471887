#include "lattice/homogenize.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "lattice/error.hpp"

namespace lattice {

MacroStrain load_case_strain(LoadCase load_case, double s) {
    if (!(s > 0.0 && s <= 0.1)) {
        throw Error(ErrorKind::InvalidInput, fmt::format("strain magnitude {} outside (0, 0.1]", s));
    }
    switch (load_case) {
        case LoadCase::A: return {s, 0.0, 0.0};
        case LoadCase::B: return {0.0, s, 0.0};
        case LoadCase::C: return {0.0, 0.0, s};
        case LoadCase::D: return {s, s, 0.0};
    }
    throw Error(ErrorKind::InvalidInput, "unknown load case");
}

double EnergyDensities::operator[](LoadCase load_case) const {
    switch (load_case) {
        case LoadCase::A: return se_a;
        case LoadCase::B: return se_b;
        case LoadCase::C: return se_c;
        case LoadCase::D: return se_d;
    }
    return 0.0;
}

namespace {

// The model actually solved: the symmetry cell of the mesh, or the mesh
// itself in affine mode.
struct AnalysisModel {
    BoundaryMode mode;
    SymmetryCell cell;
    const BeamMesh* mesh = nullptr;

    AnalysisModel(const BeamMesh& source, BoundaryMode boundary) : mode(boundary) {
        if (mode == BoundaryMode::Symmetry) {
            cell = make_symmetry_cell(source, mirror_line_spacing(source.topology, source.edge_length));
            mesh = &cell.mesh;
        } else {
            mesh = &source;
        }
    }
    AnalysisModel(const AnalysisModel&) = delete;
    AnalysisModel& operator=(const AnalysisModel&) = delete;

    ConstrainedSystem constraints(const LinearSystem& system, const MacroStrain& strain) const {
        return mode == BoundaryMode::Affine ? apply_affine_bc(system, *mesh, strain)
                                            : apply_symmetry_bc(system, cell, strain);
    }
};

// One factorisation per distinct constrained DOF set: the affine mode uses a
// single set, the symmetry mode one for normal and one for shear states.
class LoadCaseSolver {
public:
    LoadCaseSolver(const AnalysisModel& model, const LinearSystem& system, const HomogenizeOptions& options)
        : model_(model), system_(system), options_(options) {
        const double probe = 0.01;
        for (const LoadCase lc : kLoadCases) {
            auto dofs = model.constraints(system, load_case_strain(lc, probe)).prescribed_dofs;
            const auto it = std::find(dof_sets_.begin(), dof_sets_.end(), dofs);
            if (it != dof_sets_.end()) {
                solver_for_[static_cast<std::size_t>(lc)] = static_cast<std::size_t>(it - dof_sets_.begin());
                continue;
            }
            solver_for_[static_cast<std::size_t>(lc)] = solvers_.size();
            solvers_.emplace_back(system, dofs);
            dof_sets_.push_back(std::move(dofs));
        }
    }

    EnergyDensities run(double s) const {
        EnergyDensities out;
        std::array<double, 4> se{};
        auto run_one = [&](std::size_t k) {
            const MacroStrain strain = load_case_strain(kLoadCases[k], s);
            const ConstrainedSystem bc = model_.constraints(system_, strain);
            const Solution sol = solvers_[solver_for_[k]].solve(bc.prescribed_values);
            return std::pair{strain, strain_energy_density(sol, *model_.mesh)};
        };
        if (options_.parallel_load_cases) {
            std::array<std::future<std::pair<MacroStrain, double>>, 4> jobs;
            for (std::size_t k = 0; k < 4; ++k) jobs[k] = std::async(std::launch::async, run_one, k);
            for (std::size_t k = 0; k < 4; ++k) std::tie(out.strains[k], se[k]) = jobs[k].get();
        } else {
            for (std::size_t k = 0; k < 4; ++k) std::tie(out.strains[k], se[k]) = run_one(k);
        }
        out.se_a = se[0];
        out.se_b = se[1];
        out.se_c = se[2];
        out.se_d = se[3];
        return out;
    }

private:
    const AnalysisModel& model_;
    const LinearSystem& system_;
    HomogenizeOptions options_;
    std::vector<std::vector<int>> dof_sets_;
    std::vector<PartitionedSolver> solvers_;
    std::array<std::size_t, 4> solver_for_{};
};

}  // namespace

EnergyDensities run_load_cases(const BeamMesh& mesh, double s, const HomogenizeOptions& options) {
    load_case_strain(LoadCase::A, s);
    const AnalysisModel model(mesh, options.boundary);
    const LinearSystem system = assemble(*model.mesh);
    return LoadCaseSolver(model, system, options).run(s);
}

StiffnessTensorH stiffness_tensor(const EnergyDensities& ed) {
    const MacroStrain& a = ed.strains[0];
    const MacroStrain& b = ed.strains[1];
    const MacroStrain& c = ed.strains[2];
    const MacroStrain& d = ed.strains[3];
    if (d.eps11 != a.eps11 || d.eps22 != b.eps22) {
        throw Error(ErrorKind::InvalidInput, "biaxial strains must equal the uniaxial strains of cases a and b");
    }
    if (a.eps11 == 0.0 || b.eps22 == 0.0 || c.eps12 == 0.0) {
        throw Error(ErrorKind::InvalidInput, "load-case strains must be non-zero");
    }
    StiffnessTensorH t;
    t.c1111 = 2.0 * ed.se_a / (a.eps11 * a.eps11);
    t.c2222 = 2.0 * ed.se_b / (b.eps22 * b.eps22);
    t.c1212 = ed.se_c / (2.0 * c.eps12 * c.eps12);
    t.c1122 = (ed.se_d - ed.se_a - ed.se_b) / (d.eps11 * d.eps22);
    if (!(t.c1111 > 0.0 && t.c2222 > 0.0 && t.c1212 > 0.0 && t.c1111 * t.c2222 - t.c1122 * t.c1122 > 0.0)) {
        throw Error(ErrorKind::NotPositiveDefinite,
                    fmt::format("C1111={:.6g} C2222={:.6g} C1122={:.6g} C1212={:.6g}", t.c1111, t.c2222, t.c1122,
                                t.c1212));
    }
    return t;
}

MacroStress macro_stress(const StiffnessTensorH& c, const MacroStrain& e) {
    return {c.c1111 * e.eps11 + c.c1122 * e.eps22, c.c1122 * e.eps11 + c.c2222 * e.eps22, c.c1212 * 2.0 * e.eps12};
}

EngineeringConstants engineering_constants(const StiffnessTensorH& c) {
    return {c.c1111 - c.c1122 * c.c1122 / c.c2222, c.c2222 - c.c1122 * c.c1122 / c.c1111, c.c1212,
            c.c1122 / c.c2222, c.c1122 / c.c1111};
}

std::vector<ResultRecord> homogenize_sweep(Topology topology, Bbox bbox, const StiffnessCase& stiffness_case,
                                           std::span<const double> strains, const LatticeParameters& params) {
    if (!topology_info(topology).orthotropic_rve) {
        throw Error(ErrorKind::NotOrthotropic,
                    fmt::format("{} has no reflective symmetry, so its lattice is not orthotropic", code(topology)));
    }
    for (const double s : strains) load_case_strain(LoadCase::A, s);

    const auto start = std::chrono::steady_clock::now();
    const TilingGraph graph = generate_tiling(topology, bbox, params.edge_length);
    const BeamMesh mesh = build_beam_mesh(graph, stiffness_case, params.material, params.depth, params.mesh);
    const AnalysisModel model(mesh, params.homogenize.boundary);
    const LinearSystem system = assemble(*model.mesh);
    const LoadCaseSolver solver(model, system, params.homogenize);

    std::vector<ResultRecord> out;
    out.reserve(strains.size());
    for (const double s : strains) {
        const EnergyDensities ed = solver.run(s);
        ResultRecord r;
        r.topology = topology;
        r.bbox = bbox;
        r.stiffness_case = stiffness_case.id;
        r.strain = s;
        r.tensor = stiffness_tensor(ed);
        r.constants = engineering_constants(r.tensor);
        r.dof_count = model.mesh->dof_count();
        out.push_back(r);
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    for (auto& r : out) r.solve_seconds = seconds / static_cast<double>(out.size());
    return out;
}

ResultRecord homogenize(Topology topology, Bbox bbox, const StiffnessCase& stiffness_case, double strain,
                        const LatticeParameters& params) {
    const double strains[] = {strain};
    return homogenize_sweep(topology, bbox, stiffness_case, strains, params).front();
}

nlohmann::json to_json(const ResultRecord& r) {
    return {{"topology", std::string(code(r.topology))},
            {"bbox_mm", {r.bbox.width, r.bbox.height}},
            {"case", std::string(to_string(r.stiffness_case))},
            {"strain", r.strain},
            {"c1111", r.tensor.c1111},
            {"c2222", r.tensor.c2222},
            {"c1122", r.tensor.c1122},
            {"c1212", r.tensor.c1212},
            {"e1", r.constants.e1},
            {"e2", r.constants.e2},
            {"g12", r.constants.g12},
            {"nu12", r.constants.nu12},
            {"nu21", r.constants.nu21},
            {"dof_count", r.dof_count}};
}

}  // namespace lattice
