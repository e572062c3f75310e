#pragma once

#include "fraclod/assembly.hpp"
#include "fraclod/mesh.hpp"

#include <Eigen/SparseCholesky>

#include <memory>
#include <vector>

namespace fraclod {

using SparseMatR = Eigen::SparseMatrix<double, Eigen::RowMajor>;

enum class BoundaryMode { local, global };

BoundaryMode parse_boundary_mode(const std::string& name);
std::string boundary_mode_name(BoundaryMode mode);

// Projective quasi-interpolation I_H from the fine space onto the coarse space.
// One functional row per coarse degree of freedom; the fine-space kernel of the
// row system coincides with ker(I_H) intersected with the fine dof space.
struct InterpolationOperator {
    BoundaryMode mode = BoundaryMode::local;
    Index n_fine_vertices = 0;
    Index n_coarse_vertices = 0;
    std::vector<Index> coarse_dofs; // coarse vertex id per row, ascending
    SparseMatR rows;                // rows scaled so the largest entry is 1
    std::vector<double> scales;     // row scale restoring the raw functional value

    // Global mode: trace nodal values require one coarse trace-mass solve.
    std::vector<int> trace_index_of_row; // -1 for rows with direct nodal recovery
    std::shared_ptr<Eigen::SimplicialLLT<SparseMat>> trace_mass_solver;
};

InterpolationOperator build_interpolation(const CylinderMesh& coarse, const CylinderMesh& fine,
                                          const NodeClassification& coarse_cls, double a,
                                          BoundaryMode mode);

// Coarse nodal values of I_H u; zero at coarse Dirichlet nodes.
Vector apply_interpolation(const InterpolationOperator& op, const Vector& u_fine);

} // namespace fraclod
