#pragma once

#include "fraclod/assembly.hpp"
#include "fraclod/corrector.hpp"
#include "fraclod/mesh.hpp"
#include "fraclod/special_functions.hpp"

#include <Eigen/Dense>

namespace fraclod {

// Fine Galerkin solution of the truncated extension problem; conjugate
// gradients with diagonal preconditioning to relative tolerance 1e-10.
struct FineSolution {
    Vector u;
    int iterations = 0;
    double residual = 0.0;
};

FineSolution solve_fine(const CylinderMesh& mesh, const NodeClassification& cls,
                        const SparseMat& K_bc, const Vector& load);

// Multiscale Galerkin solution in span{hat_w - Q hat_w}.
struct MultiscaleSolution {
    Vector u;      // expanded in the fine space
    Vector coeffs; // one per coarse dof
};

MultiscaleSolution solve_multiscale(const CorrectorContext& ctx, const SparseMat& Q,
                                    const Vector& load);

// Coarse Galerkin solution in the uncorrected coarse space, expanded on the
// fine mesh through the prolongation.
Vector solve_coarse_galerkin(const CorrectorContext& ctx, const Vector& load);

// Separable reference solution on the unit box with constant coefficient
// kappa: eigenpairs are products of sine modes with mu = kappa pi^2 |k|^2.
// With T > 0 the per-mode vertical profile satisfies the truncated problem
// with a zero cap condition, so the reference matches the truncated model
// exactly; T <= 0 gives the untruncated fractional solution.
struct SpectralReference {
    int d = 1;
    double s = 0.5;
    double kappa = 1.0;
    double T = 0.0;
    int n_modes = 0;
    Eigen::MatrixXd coef; // trace coefficients; (n_modes x 1) for d = 1
    double trace_value(const std::array<double, 2>& x) const;
    // Extension U(x, y); per-mode vertical profile equals 1 at y = 0.
    double extension_value(const std::array<double, 2>& x, double y) const;
};

SpectralReference make_spectral_reference(const TraceFunction& f, int d, double s, double kappa,
                                          double T, int n_modes);

double energy_error(const SparseMat& energy, const Vector& u, const Vector& v);

// L2(omega) distance between the trace of a fine function and a reference.
double trace_l2_error(const CylinderMesh& mesh, const Vector& u, const TraceFunction& ref,
                      int n_gauss = 6);

SparseMat assemble_trace_mass(const CylinderMesh& mesh);

} // namespace fraclod
