#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <functional>
#include <vector>

#include "fraclod/coefficient.hpp"
#include "fraclod/mesh.hpp"
#include "fraclod/special_functions.hpp"

namespace fraclod {

using SparseMat = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;

// f(x) on Omega; x[1] is unused for d = 1.
using TraceFunction = std::function<double(const std::array<double, 2>&)>;

// Stiffness of the extended bilinear form: per element
// (A grad_x u . grad_x v + du/dy dv/dy) * integral of y^a, with A sampled
// at the element centroid. When `dirichlet` is given, Dirichlet rows and
// columns are replaced by identity.
SparseMat assemble_weighted_stiffness(const CylinderMesh& mesh, const CoefficientField& field,
                                      double a, const NodeClassification* dirichlet = nullptr);

// Unit-coefficient energy matrix, no boundary treatment; induces the
// weighted energy seminorm.
SparseMat assemble_weighted_energy_matrix(const CylinderMesh& mesh, double a);

SparseMat assemble_weighted_mass(const CylinderMesh& mesh, double a);

// Dense weighted mass over the coarse dof hats that are nonzero on the
// patch; basis_nodes receives their vertex ids (ascending).
Eigen::MatrixXd assemble_weighted_mass_local(const CylinderMesh& mesh, const Patch& patch,
                                             double a, const NodeClassification& cls,
                                             std::vector<Index>& basis_nodes);

// load_i = c_s * integral over Omega of f * trace(lambda_i); zero for
// nodes with y > 0.
Vector assemble_trace_load(const CylinderMesh& mesh, const TraceFunction& f,
                           const FractionalOrder& order, int degree = 4);

double weighted_energy_norm(const SparseMat& energy, const Vector& u);

// Squared unit-coefficient weighted energy of u restricted to a subset of
// elements.
double weighted_energy_on_elements(const CylinderMesh& mesh, const std::vector<Index>& elements,
                                   double a, const Vector& u);

// Nodal interpolation of the coarse P1 space into the fine one; requires
// fine.refinement_map pointing at `coarse`.
SparseMat prolongation_matrix(const CylinderMesh& coarse, const CylinderMesh& fine);

// L2(Omega) inner products of f against the traces of all fine hats.
Vector trace_moment_vector(const CylinderMesh& mesh, const TraceFunction& f, int degree = 4);

} // namespace fraclod
