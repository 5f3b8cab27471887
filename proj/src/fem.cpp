#include "lattice/fem.hpp"

#include <algorithm>
#include <map>
#include <span>
#include <cmath>
#include <numeric>
#include <ostream>

#include <Eigen/SparseCholesky>
#include <fmt/format.h>

#include "lattice/error.hpp"

namespace lattice {

ElementMatrix element_stiffness(const Vec2& start, const Vec2& end, const SectionProfile& section,
                                const Material& material) {
    const Vec2 axis = end - start;
    const double L = axis.norm();
    if (L <= 1e-9) {
        throw Error(ErrorKind::ZeroLength, fmt::format("beam element of length {} mm", L));
    }
    const double E = material.young_modulus;
    const double G = material.shear_modulus();
    const double A = section.area;
    const double I = section.second_moment;
    const double phi = 12.0 * E * I / (section.shear_correction * G * A * L * L);

    const double ka = E * A / L;
    const double k1 = 12.0 * E * I / (L * L * L * (1.0 + phi));
    const double k2 = 6.0 * E * I / (L * L * (1.0 + phi));
    const double k3 = (4.0 + phi) * E * I / (L * (1.0 + phi));
    const double k4 = (2.0 - phi) * E * I / (L * (1.0 + phi));

    ElementMatrix local;
    // clang-format off
    local <<  ka,   0,   0, -ka,   0,   0,
               0,  k1,  k2,   0, -k1,  k2,
               0,  k2,  k3,   0, -k2,  k4,
             -ka,   0,   0,  ka,   0,   0,
               0, -k1, -k2,   0,  k1, -k2,
               0,  k2,  k4,   0, -k2,  k3;
    // clang-format on

    const double c = axis.x() / L;
    const double s = axis.y() / L;
    ElementMatrix T = ElementMatrix::Zero();
    for (int n = 0; n < 2; ++n) {
        T(3 * n, 3 * n) = c;
        T(3 * n, 3 * n + 1) = s;
        T(3 * n + 1, 3 * n) = -s;
        T(3 * n + 1, 3 * n + 1) = c;
        T(3 * n + 2, 3 * n + 2) = 1.0;
    }
    ElementMatrix global = T.transpose() * local * T;
    // exact symmetry regardless of round-off in the triple product
    return 0.5 * (global + global.transpose());
}

void MacroStrain::validate() const {
    for (const double v : {eps11, eps22, eps12}) {
        if (!std::isfinite(v) || std::abs(v) > 0.1) {
            throw Error(ErrorKind::InvalidInput,
                        fmt::format("macro strain component {} outside the linear range |eps| <= 0.1", v));
        }
    }
}

namespace {

int count_components(int node_count, const std::vector<Segment>& segments) {
    std::vector<int> parent(node_count);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&parent](int x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    int components = node_count;
    for (const Segment& s : segments) {
        const int a = find(s.i);
        const int b = find(s.j);
        if (a != b) {
            parent[a] = b;
            --components;
        }
    }
    return components;
}

}  // namespace

LinearSystem assemble(const BeamMesh& mesh) {
    const int nodes = static_cast<int>(mesh.fe_nodes.size());
    if (nodes == 0) throw Error(ErrorKind::DisconnectedMesh, "mesh has no nodes");
    const int components = count_components(nodes, mesh.segments);
    if (components != 1) {
        throw Error(ErrorKind::DisconnectedMesh, fmt::format("mesh has {} connected components", components));
    }

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(36 * mesh.segments.size());
    for (const Segment& seg : mesh.segments) {
        const ElementMatrix ke = element_stiffness(mesh.fe_nodes[seg.i], mesh.fe_nodes[seg.j], seg.section, mesh.material);
        const int base[2] = {3 * seg.i, 3 * seg.j};
        for (int r = 0; r < 6; ++r) {
            for (int c = 0; c < 6; ++c) {
                triplets.emplace_back(base[r / 3] + r % 3, base[c / 3] + c % 3, ke(r, c));
            }
        }
    }
    LinearSystem system;
    system.node_count = nodes;
    system.stiffness.resize(3 * nodes, 3 * nodes);
    system.stiffness.setFromTriplets(triplets.begin(), triplets.end());
    system.stiffness.makeCompressed();
    return system;
}

ConstrainedSystem apply_affine_bc(const LinearSystem& system, const BeamMesh& mesh, const MacroStrain& strain) {
    strain.validate();
    if (mesh.boundary_hubs.empty()) throw Error(ErrorKind::NoBoundary, "mesh has no boundary hubs");
    ConstrainedSystem out;
    out.system = &system;
    out.prescribed_dofs.reserve(2 * mesh.boundary_hubs.size());
    out.prescribed_values.resize(static_cast<Eigen::Index>(2 * mesh.boundary_hubs.size()));
    Eigen::Index k = 0;
    for (const int hub : mesh.boundary_hubs) {
        const Vec2& p = mesh.fe_nodes[hub];
        out.prescribed_dofs.push_back(LinearSystem::dof(hub, 0));
        out.prescribed_dofs.push_back(LinearSystem::dof(hub, 1));
        out.prescribed_values[k++] = strain.eps11 * p.x() + strain.eps12 * p.y();
        out.prescribed_values[k++] = strain.eps12 * p.x() + strain.eps22 * p.y();
    }
    return out;
}

namespace {

struct PointKey {
    long long x;
    long long y;
    auto operator<=>(const PointKey&) const = default;
};

}  // namespace

SymmetryCell make_symmetry_cell(const BeamMesh& mesh, Vec2 spacing) {
    if (!(spacing.x() > 0.0 && spacing.y() > 0.0)) {
        throw Error(ErrorKind::InvalidInput, "mirror line spacing must be positive");
    }
    const double tol = 1e-9 * mesh.edge_length;
    const auto hubs = std::span(mesh.fe_nodes).first(static_cast<std::size_t>(mesh.hub_count));
    std::vector<char> perimeter(hubs.size(), 0);
    for (const int h : mesh.boundary_hubs) perimeter[h] = 1;

    // a rectangle is complete when no perimeter hub lies strictly inside it
    auto complete = [&](double hx, double hy) {
        for (std::size_t h = 0; h < hubs.size(); ++h) {
            if (perimeter[h] && std::abs(hubs[h].x()) < hx - tol && std::abs(hubs[h].y()) < hy - tol) return false;
        }
        return true;
    };
    const int kx_max = static_cast<int>(std::floor((mesh.bbox.width / 2.0 + tol) / spacing.x()));
    const int ky_max = static_cast<int>(std::floor((mesh.bbox.height / 2.0 + tol) / spacing.y()));
    double best_area = 0.0;
    double hx = 0.0;
    double hy = 0.0;
    int ky = ky_max;
    for (int kx = 1; kx <= kx_max; ++kx) {
        while (ky > 0 && !complete(kx * spacing.x(), ky * spacing.y())) --ky;
        if (ky == 0) break;
        const double area = kx * spacing.x() * ky * spacing.y();
        if (area > best_area) {
            best_area = area;
            hx = kx * spacing.x();
            hy = ky * spacing.y();
        }
    }
    if (best_area <= 0.0) {
        throw Error(ErrorKind::BboxTooSmall,
                    fmt::format("no complete mirror-symmetric cell fits in {} x {} mm", mesh.bbox.width, mesh.bbox.height));
    }

    SymmetryCell cell;
    cell.half_width = hx;
    cell.half_height = hy;
    BeamMesh& out = cell.mesh;
    out.bbox = {2.0 * hx, 2.0 * hy};
    out.depth = mesh.depth;
    out.edge_length = mesh.edge_length;
    out.material = mesh.material;
    out.stiffness_case = mesh.stiffness_case;
    out.topology = mesh.topology;
    out.subdivisions = mesh.subdivisions;

    std::map<PointKey, int> index;
    const double quantum = 1e-6 * mesh.edge_length;
    auto node_at = [&](const Vec2& p) {
        const PointKey key{std::llround(p.x() / quantum), std::llround(p.y() / quantum)};
        const auto [it, inserted] = index.try_emplace(key, static_cast<int>(out.fe_nodes.size()));
        if (inserted) out.fe_nodes.push_back(p);
        return it->second;
    };
    auto on_x_line = [&](const Vec2& p) { return std::abs(std::abs(p.x()) - hx) <= tol; };
    auto on_y_line = [&](const Vec2& p) { return std::abs(std::abs(p.y()) - hy) <= tol; };

    // hubs first, so that hub indices stay below every cut node
    for (std::size_t h = 0; h < hubs.size(); ++h) {
        if (std::abs(hubs[h].x()) <= hx + tol && std::abs(hubs[h].y()) <= hy + tol) node_at(hubs[h]);
    }
    out.hub_count = static_cast<int>(out.fe_nodes.size());

    for (const Segment& seg : mesh.segments) {
        const Vec2 p = mesh.fe_nodes[seg.i];
        const Vec2 d = mesh.fe_nodes[seg.j] - p;
        // Liang-Barsky clip against the cell rectangle grown by tol
        double t0 = 0.0;
        double t1 = 1.0;
        bool empty = false;
        auto clip = [&](double denom, double num) {
            if (std::abs(denom) <= tol) {
                if (num < 0.0) empty = true;
                return;
            }
            const double t = num / denom;
            if (denom < 0.0) {
                t0 = std::max(t0, t);
            } else {
                t1 = std::min(t1, t);
            }
        };
        clip(-d.x(), p.x() + hx + tol);
        clip(d.x(), hx + tol - p.x());
        clip(-d.y(), p.y() + hy + tol);
        clip(d.y(), hy + tol - p.y());
        if (empty || (t1 - t0) * d.norm() <= 2.0 * tol) continue;
        auto snap = [&](Vec2 q) {
            if (std::abs(std::abs(q.x()) - hx) <= 2.0 * tol) q.x() = std::copysign(hx, q.x());
            if (std::abs(std::abs(q.y()) - hy) <= 2.0 * tol) q.y() = std::copysign(hy, q.y());
            return q;
        };
        const Vec2 a = t0 > 0.0 ? snap(p + t0 * d) : p;
        const Vec2 b = t1 < 1.0 ? snap(p + t1 * d) : Vec2(p + d);
        if ((b - a).norm() <= 1e-6 * mesh.edge_length) continue;  // touches the cell from outside
        Segment piece = seg;
        piece.i = node_at(a);
        piece.j = node_at(b);
        if ((on_x_line(a) && on_x_line(b) && std::abs(a.x() - b.x()) <= tol) ||
            (on_y_line(a) && on_y_line(b) && std::abs(a.y() - b.y()) <= tol)) {
            // shared with the mirror image across the line
            piece.section = SectionProfile::rectangular(seg.section.in_plane_width, seg.section.out_of_plane_depth / 2.0);
            piece.section.shear_correction = seg.section.shear_correction;
        }
        out.segments.push_back(piece);
    }
    for (std::size_t n = 0; n < out.fe_nodes.size(); ++n) {
        if (on_x_line(out.fe_nodes[n]) || on_y_line(out.fe_nodes[n])) out.boundary_hubs.push_back(static_cast<int>(n));
    }
    return cell;
}

ConstrainedSystem apply_symmetry_bc(const LinearSystem& system, const SymmetryCell& cell, const MacroStrain& strain) {
    strain.validate();
    const bool shear = strain.eps12 != 0.0;
    if (shear && (strain.eps11 != 0.0 || strain.eps22 != 0.0)) {
        throw Error(ErrorKind::InvalidInput, "symmetry conditions take either a normal or a pure shear strain state");
    }
    if (cell.mesh.boundary_hubs.empty()) throw Error(ErrorKind::NoBoundary, "symmetry cell has no line nodes");
    const double tol = 1e-9 * cell.mesh.edge_length;
    ConstrainedSystem out;
    out.system = &system;
    std::vector<std::pair<int, double>> fixed;
    for (const int n : cell.mesh.boundary_hubs) {
        const Vec2& p = cell.mesh.fe_nodes[n];
        const bool on_x = std::abs(std::abs(p.x()) - cell.half_width) <= tol;
        const bool on_y = std::abs(std::abs(p.y()) - cell.half_height) <= tol;
        const double ux = strain.eps11 * p.x() + strain.eps12 * p.y();
        const double uy = strain.eps12 * p.x() + strain.eps22 * p.y();
        if (shear) {
            if (on_x) fixed.emplace_back(LinearSystem::dof(n, 1), uy);
            if (on_y) fixed.emplace_back(LinearSystem::dof(n, 0), ux);
        } else {
            if (on_x) fixed.emplace_back(LinearSystem::dof(n, 0), ux);
            if (on_y) fixed.emplace_back(LinearSystem::dof(n, 1), uy);
            fixed.emplace_back(LinearSystem::dof(n, 2), 0.0);
        }
    }
    std::sort(fixed.begin(), fixed.end());
    out.prescribed_values.resize(static_cast<Eigen::Index>(fixed.size()));
    for (std::size_t k = 0; k < fixed.size(); ++k) {
        out.prescribed_dofs.push_back(fixed[k].first);
        out.prescribed_values[static_cast<Eigen::Index>(k)] = fixed[k].second;
    }
    return out;
}

struct PartitionedSolver::Impl {
    const LinearSystem* system = nullptr;
    std::vector<int> prescribed;
    std::vector<int> free_dofs;
    Eigen::SparseMatrix<double> k_ff;
    Eigen::SparseMatrix<double> k_fp;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Lower> factor;
};

PartitionedSolver::PartitionedSolver(const LinearSystem& system, std::vector<int> prescribed_dofs)
    : impl_(std::make_unique<Impl>()) {
    Impl& m = *impl_;
    m.system = &system;
    const int n = system.dof_count();
    std::sort(prescribed_dofs.begin(), prescribed_dofs.end());
    prescribed_dofs.erase(std::unique(prescribed_dofs.begin(), prescribed_dofs.end()), prescribed_dofs.end());
    m.prescribed = std::move(prescribed_dofs);

    std::vector<int> slot(n, 0);
    std::vector<char> fixed(n, 0);
    for (std::size_t p = 0; p < m.prescribed.size(); ++p) {
        const int d = m.prescribed[p];
        if (d < 0 || d >= n) throw Error(ErrorKind::InvalidInput, fmt::format("prescribed DOF {} out of range", d));
        fixed[d] = 1;
        slot[d] = static_cast<int>(p);
    }
    for (int d = 0; d < n; ++d) {
        if (fixed[d]) continue;
        slot[d] = static_cast<int>(m.free_dofs.size());
        m.free_dofs.push_back(d);
    }

    std::vector<Eigen::Triplet<double>> ff;
    std::vector<Eigen::Triplet<double>> fp;
    const auto& K = system.stiffness;
    for (int col = 0; col < K.outerSize(); ++col) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(K, col); it; ++it) {
            if (fixed[it.row()]) continue;
            if (fixed[col]) {
                fp.emplace_back(slot[it.row()], slot[col], it.value());
            } else {
                ff.emplace_back(slot[it.row()], slot[col], it.value());
            }
        }
    }
    const auto nf = static_cast<Eigen::Index>(m.free_dofs.size());
    m.k_ff.resize(nf, nf);
    m.k_ff.setFromTriplets(ff.begin(), ff.end());
    m.k_fp.resize(nf, static_cast<Eigen::Index>(m.prescribed.size()));
    m.k_fp.setFromTriplets(fp.begin(), fp.end());
    if (nf == 0) return;

    m.factor.compute(m.k_ff);
    const Eigen::VectorXd pivots = m.factor.vectorD();
    const double largest = pivots.cwiseAbs().maxCoeff();
    Eigen::Index weakest = 0;
    const double smallest = pivots.cwiseAbs().minCoeff(&weakest);
    if (m.factor.info() != Eigen::Success || !(smallest > 1e-13 * largest)) {
        // map the weakest pivot back through the fill-reducing permutation
        const int free_index = m.factor.permutationPinv().indices()[weakest];
        const int dof = m.free_dofs[free_index];
        static constexpr const char* kComponent[] = {"ux", "uy", "theta"};
        throw Error(ErrorKind::SingularSystem,
                    fmt::format("free stiffness block is singular: pivot ratio {:.3e}, near-null mode at node {} {}",
                                largest > 0.0 ? smallest / largest : 0.0, dof / 3, kComponent[dof % 3]));
    }
}

PartitionedSolver::~PartitionedSolver() = default;
PartitionedSolver::PartitionedSolver(PartitionedSolver&&) noexcept = default;
PartitionedSolver& PartitionedSolver::operator=(PartitionedSolver&&) noexcept = default;

const std::vector<int>& PartitionedSolver::prescribed_dofs() const { return impl_->prescribed; }

Solution PartitionedSolver::solve(const Eigen::VectorXd& prescribed_values) const {
    const Impl& m = *impl_;
    if (prescribed_values.size() != static_cast<Eigen::Index>(m.prescribed.size())) {
        throw Error(ErrorKind::InvalidInput, "prescribed value count does not match the constrained DOF set");
    }
    Solution sol;
    sol.displacements = Eigen::VectorXd::Zero(m.system->dof_count());
    for (std::size_t p = 0; p < m.prescribed.size(); ++p) {
        sol.displacements[m.prescribed[p]] = prescribed_values[static_cast<Eigen::Index>(p)];
    }
    if (!m.free_dofs.empty()) {
        const Eigen::VectorXd rhs = -(m.k_fp * prescribed_values);
        const Eigen::VectorXd u_free = m.factor.solve(rhs);
        const double rhs_norm = rhs.norm();
        const double residual = (m.k_ff * u_free - rhs).norm();
        sol.relative_residual = rhs_norm > 0.0 ? residual / rhs_norm : residual;
        if (!u_free.allFinite() || sol.relative_residual > 1e-8) {
            throw Error(ErrorKind::SingularSystem,
                        fmt::format("solve residual {:.3e} exceeds tolerance", sol.relative_residual));
        }
        for (std::size_t f = 0; f < m.free_dofs.size(); ++f) {
            sol.displacements[m.free_dofs[f]] = u_free[static_cast<Eigen::Index>(f)];
        }
    }
    sol.reactions = m.system->stiffness * sol.displacements;
    sol.energy = 0.5 * sol.displacements.dot(sol.reactions);
    return sol;
}

Solution solve(const ConstrainedSystem& constrained) {
    if (constrained.system == nullptr) throw Error(ErrorKind::InvalidInput, "constrained system has no stiffness");
    const PartitionedSolver solver(*constrained.system, constrained.prescribed_dofs);
    return solver.solve(constrained.prescribed_values);
}

std::vector<double> element_energies(const Solution& solution, const BeamMesh& mesh) {
    std::vector<double> out;
    out.reserve(mesh.segments.size());
    Eigen::Matrix<double, 6, 1> ue;
    for (const Segment& seg : mesh.segments) {
        const ElementMatrix ke = element_stiffness(mesh.fe_nodes[seg.i], mesh.fe_nodes[seg.j], seg.section, mesh.material);
        ue << solution.displacements.segment<3>(3 * seg.i), solution.displacements.segment<3>(3 * seg.j);
        out.push_back(0.5 * ue.dot(ke * ue));
    }
    return out;
}

double strain_energy_density(const Solution& solution, const BeamMesh& mesh) {
    return solution.energy / (mesh.bbox.width * mesh.bbox.height * mesh.depth);
}

void write_matrix_market(std::ostream& out, const Eigen::SparseMatrix<double>& matrix) {
    std::size_t entries = 0;
    for (int col = 0; col < matrix.outerSize(); ++col) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(matrix, col); it; ++it) {
            if (it.row() >= col) ++entries;
        }
    }
    out << "%%MatrixMarket matrix coordinate real symmetric\n";
    out << matrix.rows() << ' ' << matrix.cols() << ' ' << entries << '\n';
    for (int col = 0; col < matrix.outerSize(); ++col) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(matrix, col); it; ++it) {
            if (it.row() >= col) out << fmt::format("{} {} {:.17g}\n", it.row() + 1, col + 1, it.value());
        }
    }
}

void write_solution_csv(std::ostream& out, const BeamMesh& mesh, const Solution& solution) {
    out << "node,x,y,ux,uy,theta\n";
    for (std::size_t n = 0; n < mesh.fe_nodes.size(); ++n) {
        const auto u = solution.displacements.segment<3>(static_cast<Eigen::Index>(3 * n));
        out << fmt::format("{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", n, mesh.fe_nodes[n].x(),
                           mesh.fe_nodes[n].y(), u[0], u[1], u[2]);
    }
}

}  // namespace lattice
