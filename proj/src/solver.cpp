#include "fraclod/solver.hpp"

#include "fraclod/quadrature.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <stdexcept>

namespace fraclod {

FineSolution solve_fine(const CylinderMesh& mesh, const NodeClassification& cls,
                        const SparseMat& K_bc, const Vector& load) {
    Vector rhs = load;
    for (Index v : cls.dirichlet) rhs[v] = 0.0;
    Eigen::ConjugateGradient<SparseMat, Eigen::Lower | Eigen::Upper,
                             Eigen::DiagonalPreconditioner<double>>
        cg;
    cg.setTolerance(1e-10);
    cg.setMaxIterations(200000);
    cg.compute(K_bc);
    FineSolution out;
    out.u = cg.solve(rhs);
    out.iterations = static_cast<int>(cg.iterations());
    out.residual = cg.error();
    if (cg.info() != Eigen::Success)
        throw std::runtime_error("solve_fine: conjugate gradients did not converge");
    (void)mesh;
    return out;
}

namespace {

// Multiscale basis: prolonged coarse hats minus their correctors.
SparseMat multiscale_basis(const CorrectorContext& ctx, const SparseMat& Q) {
    const Index n_dofs = static_cast<Index>(ctx.coarse_cls->dof.size());
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(Q.nonZeros()) + static_cast<std::size_t>(n_dofs) * 8);
    for (Index c = 0; c < n_dofs; ++c) {
        const Index w = ctx.coarse_cls->dof[c];
        for (SparseMat::InnerIterator it(ctx.P, w); it; ++it)
            trips.emplace_back(it.row(), c, it.value());
    }
    for (Index c = 0; c < Q.outerSize(); ++c)
        for (SparseMat::InnerIterator it(Q, c); it; ++it)
            trips.emplace_back(it.row(), c, -it.value());
    SparseMat B(ctx.fine->num_vertices(), n_dofs);
    B.setFromTriplets(trips.begin(), trips.end());
    return B;
}

Vector galerkin_in_basis(const CorrectorContext& ctx, const SparseMat& B, const Vector& load,
                         Vector& coeffs) {
    const Eigen::MatrixXd Bd(B);
    const Eigen::MatrixXd KB = ctx.K * Bd;
    const Eigen::MatrixXd G = Bd.transpose() * KB;
    const Vector rhs = Bd.transpose() * load;
    coeffs = Eigen::LDLT<Eigen::MatrixXd>(G).solve(rhs);
    return B * coeffs;
}

} // namespace

MultiscaleSolution solve_multiscale(const CorrectorContext& ctx, const SparseMat& Q,
                                    const Vector& load) {
    const SparseMat B = multiscale_basis(ctx, Q);
    MultiscaleSolution out;
    out.u = galerkin_in_basis(ctx, B, load, out.coeffs);
    return out;
}

Vector solve_coarse_galerkin(const CorrectorContext& ctx, const Vector& load) {
    const SparseMat empty(ctx.fine->num_vertices(),
                          static_cast<Index>(ctx.coarse_cls->dof.size()));
    const SparseMat B = multiscale_basis(ctx, empty);
    Vector coeffs;
    return galerkin_in_basis(ctx, B, load, coeffs);
}

double SpectralReference::trace_value(const std::array<double, 2>& x) const {
    const double pi = 3.14159265358979323846;
    double v = 0.0;
    if (d == 1) {
        for (int k = 1; k <= n_modes; ++k)
            v += coef(k - 1, 0) * std::sqrt(2.0) * std::sin(k * pi * x[0]);
    } else {
        for (int k1 = 1; k1 <= n_modes; ++k1) {
            const double s1 = std::sqrt(2.0) * std::sin(k1 * pi * x[0]);
            for (int k2 = 1; k2 <= n_modes; ++k2)
                v += coef(k1 - 1, k2 - 1) * s1 * std::sqrt(2.0) * std::sin(k2 * pi * x[1]);
        }
    }
    return v;
}

double SpectralReference::extension_value(const std::array<double, 2>& x, double y) const {
    const double pi = 3.14159265358979323846;
    const double C_s = std::pow(2.0, 1.0 - s) / gamma_positive(s);
    auto profile = [&](double mu) {
        if (y <= 0.0) return 1.0;
        const double z = std::sqrt(mu) * y;
        double v = C_s * std::pow(z, s) * bessel_k(s, z);
        if (T > 0.0) {
            const double zT = std::sqrt(mu) * T;
            if (zT <= 30.0) {
                const double r = C_s * bessel_k(s, zT) / bessel_i(s, zT);
                v -= r * std::pow(z, s) * bessel_i(s, z);
            }
        }
        return v;
    };
    double out = 0.0;
    if (d == 1) {
        for (int k = 1; k <= n_modes; ++k) {
            const double c = coef(k - 1, 0);
            if (std::abs(c) < 1e-300) continue;
            const double mu = kappa * pi * pi * double(k) * k;
            out += c * std::sqrt(2.0) * std::sin(k * pi * x[0]) * profile(mu);
        }
    } else {
        for (int k1 = 1; k1 <= n_modes; ++k1) {
            for (int k2 = 1; k2 <= n_modes; ++k2) {
                const double c = coef(k1 - 1, k2 - 1);
                if (std::abs(c) < 1e-300) continue;
                const double mu = kappa * pi * pi * (double(k1) * k1 + double(k2) * k2);
                out += c * 2.0 * std::sin(k1 * pi * x[0]) * std::sin(k2 * pi * x[1]) *
                       profile(mu);
            }
        }
    }
    return out;
}

SpectralReference make_spectral_reference(const TraceFunction& f, int d, double s, double kappa,
                                          double T, int n_modes) {
    if (n_modes < 1) throw std::domain_error("make_spectral_reference: n_modes < 1");
    const double pi = 3.14159265358979323846;
    SpectralReference ref;
    ref.d = d;
    ref.s = s;
    ref.kappa = kappa;
    ref.T = T;
    ref.n_modes = n_modes;
    const FractionalOrder order = extension_constant(s);
    const double C_s = std::pow(2.0, 1.0 - s) / gamma_positive(s);

    // Mode loads by composite Gauss, two cells per highest half-wave.
    const int cells = std::max(32, 4 * n_modes);
    const Rule1d gl = gauss_legendre_1d(4);
    const int nq = cells * static_cast<int>(gl.nodes.size());
    std::vector<double> xs(nq), ws(nq);
    for (int c = 0; c < cells; ++c) {
        for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
            const int i = c * static_cast<int>(gl.nodes.size()) + static_cast<int>(q);
            xs[i] = (c + gl.nodes[q]) / cells;
            ws[i] = gl.weights[q] / cells;
        }
    }
    Eigen::MatrixXd sine(n_modes, nq);
    for (int k = 1; k <= n_modes; ++k)
        for (int i = 0; i < nq; ++i)
            sine(k - 1, i) = std::sqrt(2.0) * std::sin(k * pi * xs[i]) * ws[i];

    Eigen::MatrixXd fk;
    if (d == 1) {
        Eigen::VectorXd fv(nq);
        for (int i = 0; i < nq; ++i) fv[i] = f({xs[i], 0.0});
        fk = sine * fv;
    } else {
        Eigen::MatrixXd fv(nq, nq);
        for (int i = 0; i < nq; ++i)
            for (int j = 0; j < nq; ++j) fv(i, j) = f({xs[i], xs[j]});
        fk = sine * fv * sine.transpose();
    }

    ref.coef = fk;
    for (int k1 = 1; k1 <= n_modes; ++k1) {
        const int k2max = d == 1 ? 1 : n_modes;
        for (int k2 = 1; k2 <= k2max; ++k2) {
            const double mu =
                kappa * pi * pi * (d == 1 ? double(k1) * k1 : double(k1) * k1 + double(k2) * k2);
            double c = std::pow(mu, -s) * fk(k1 - 1, k2 - 1);
            if (T > 0.0) {
                const double z = std::sqrt(mu) * T;
                // psi/chi = C_s K_s(z)/I_s(z) decays like exp(-2z); below the
                // threshold the correction is under 1e-25 and is dropped.
                if (z <= 30.0) {
                    const double ratio = C_s * bessel_k(s, z) / bessel_i(s, z);
                    c /= 1.0 + (C_s / order.c_s) * ratio;
                }
            }
            ref.coef(k1 - 1, k2 - 1) = c;
        }
    }
    return ref;
}

double energy_error(const SparseMat& energy, const Vector& u, const Vector& v) {
    const Vector d = u - v;
    return std::sqrt(std::max(d.dot(energy * d), 0.0));
}

double trace_l2_error(const CylinderMesh& mesh, const Vector& u, const TraceFunction& ref,
                      int n_gauss) {
    const TraceSet ts = collect_trace_faces(mesh);
    const Rule1d gl = gauss_legendre_1d(n_gauss);
    double total = 0.0;
    for (const TraceFace& face : ts.faces) {
        if (mesh.d == 1) {
            const Point& p0 = mesh.vertices[face.verts[0]];
            const Point& p1 = mesh.vertices[face.verts[1]];
            const double len = std::abs(p1[0] - p0[0]);
            for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
                const double t = gl.nodes[q];
                const double x = p0[0] + t * (p1[0] - p0[0]);
                const double uh = (1.0 - t) * u[face.verts[0]] + t * u[face.verts[1]];
                const double e = uh - ref({x, 0.0});
                total += gl.weights[q] * len * e * e;
            }
        } else {
            const Point& p0 = mesh.vertices[face.verts[0]];
            const Point& p1 = mesh.vertices[face.verts[1]];
            const Point& p2 = mesh.vertices[face.verts[2]];
            const double area2 = std::abs((p1[0] - p0[0]) * (p2[1] - p0[1]) -
                                          (p2[0] - p0[0]) * (p1[1] - p0[1]));
            for (std::size_t q2 = 0; q2 < gl.nodes.size(); ++q2) {
                const double u2 = gl.nodes[q2];
                for (std::size_t q1 = 0; q1 < gl.nodes.size(); ++q1) {
                    const double u1 = gl.nodes[q1];
                    const double l0 = (1.0 - u2) * (1.0 - u1);
                    const double l1 = (1.0 - u2) * u1;
                    const double l2 = u2;
                    const double x1 = l0 * p0[0] + l1 * p1[0] + l2 * p2[0];
                    const double x2 = l0 * p0[1] + l1 * p1[1] + l2 * p2[1];
                    const double uh = l0 * u[face.verts[0]] + l1 * u[face.verts[1]] +
                                      l2 * u[face.verts[2]];
                    const double e = uh - ref({x1, x2});
                    total += gl.weights[q1] * gl.weights[q2] * area2 * (1.0 - u2) * e * e;
                }
            }
        }
    }
    return std::sqrt(total);
}

SparseMat assemble_trace_mass(const CylinderMesh& mesh) {
    const TraceSet ts = collect_trace_faces(mesh);
    const Rule1d gl = gauss_legendre_1d(3);
    std::vector<Eigen::Triplet<double>> trips;
    for (const TraceFace& face : ts.faces) {
        if (mesh.d == 1) {
            const Point& p0 = mesh.vertices[face.verts[0]];
            const Point& p1 = mesh.vertices[face.verts[1]];
            const double len = std::abs(p1[0] - p0[0]);
            for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
                const double t = gl.nodes[q];
                const double lam[2] = {1.0 - t, t};
                for (int i = 0; i < 2; ++i)
                    for (int j = 0; j < 2; ++j)
                        trips.emplace_back(face.verts[i], face.verts[j],
                                           gl.weights[q] * len * lam[i] * lam[j]);
            }
        } else {
            const Point& p0 = mesh.vertices[face.verts[0]];
            const Point& p1 = mesh.vertices[face.verts[1]];
            const Point& p2 = mesh.vertices[face.verts[2]];
            const double area2 = std::abs((p1[0] - p0[0]) * (p2[1] - p0[1]) -
                                          (p2[0] - p0[0]) * (p1[1] - p0[1]));
            for (std::size_t q2 = 0; q2 < gl.nodes.size(); ++q2) {
                const double u2 = gl.nodes[q2];
                for (std::size_t q1 = 0; q1 < gl.nodes.size(); ++q1) {
                    const double u1 = gl.nodes[q1];
                    const double lam[3] = {(1.0 - u2) * (1.0 - u1), (1.0 - u2) * u1, u2};
                    const double w = gl.weights[q1] * gl.weights[q2] * area2 * (1.0 - u2);
                    for (int i = 0; i < 3; ++i)
                        for (int j = 0; j < 3; ++j)
                            trips.emplace_back(face.verts[i], face.verts[j],
                                               w * lam[i] * lam[j]);
                }
            }
        }
    }
    SparseMat M(mesh.num_vertices(), mesh.num_vertices());
    M.setFromTriplets(trips.begin(), trips.end());
    return M;
}

} // namespace fraclod
