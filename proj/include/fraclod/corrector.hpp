#pragma once

#include "fraclod/assembly.hpp"
#include "fraclod/coefficient.hpp"
#include "fraclod/mesh.hpp"
#include "fraclod/quasi_interpolation.hpp"

#include <vector>

namespace fraclod {

// Shared setup for corrector computations on a coarse/fine mesh pair.
struct CorrectorContext {
    const CylinderMesh* coarse = nullptr;
    const CylinderMesh* fine = nullptr;
    const NodeClassification* coarse_cls = nullptr;
    const NodeClassification* fine_cls = nullptr;
    const InterpolationOperator* iop = nullptr;
    double a = 0.0;
    SparseMat K; // weighted stiffness with coefficient, no boundary conditions
    SparseMat P; // fine-from-coarse prolongation
    std::vector<double> coeff_of_element;           // coefficient at fine element centroids
    std::vector<std::vector<Index>> fines_of_coarse; // coarse element -> fine elements
    std::vector<std::vector<Index>> fine_incidence;  // fine vertex -> fine elements
    std::vector<std::vector<Index>> coarse_incidence;
    int n_threads = 1;
};

CorrectorContext make_corrector_context(const CylinderMesh& coarse, const CylinderMesh& fine,
                                        const NodeClassification& coarse_cls,
                                        const NodeClassification& fine_cls,
                                        const InterpolationOperator& iop,
                                        const CoefficientField& field, double a,
                                        int n_threads = 0);

// Partition-of-unity weight of a coarse dof node: hat_v / sum of dof hats,
// zero where the denominator falls below 1e-14.
double pou_weight(const CorrectorContext& ctx, Index v, const Point& p);

// Ideal corrector of the prolonged coarse function, one saddle-point solve on
// the whole fine dof space.
Vector full_corrector(const CorrectorContext& ctx, const Vector& u_coarse);

// Localized corrector: sum of per-node patch solves with hat-partitioned
// right-hand sides over k-layer vertex patches.
Vector localized_corrector(const CorrectorContext& ctx, const Vector& u_coarse, int k);

// Correctors of all coarse hat dofs, one column per coarse dof. k <= 0 selects
// the full-domain ideal corrector.
SparseMat corrector_basis(const CorrectorContext& ctx, int k);

struct DecayMeasurement {
    std::vector<int> k_values;
    std::vector<double> errors; // plain weighted energy error vs the ideal corrector
    double slope = 0.0;         // least-squares slope of log(error) vs k
    double theta = 0.0;         // exp(slope)
    double r_squared = 0.0;
};

DecayMeasurement measure_decay(const CorrectorContext& ctx, const Vector& u_coarse,
                               const std::vector<int>& k_values);

} // namespace fraclod
