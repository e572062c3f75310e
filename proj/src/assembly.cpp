#include "fraclod/assembly.hpp"

#include "fraclod/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fraclod {

namespace {

// Weighted element measure, exact integral of y^a over the simplex.
double weighted_measure(const CylinderMesh& mesh, Index e, double a, int degree) {
    double w = 0.0;
    for (double q : weighted_simplex_quadrature(mesh, e, a, degree).weights) w += q;
    return w;
}

void element_gradients(const CylinderMesh& mesh, Index e,
                       std::array<std::array<double, 3>, 4>& grads) {
    for (int i = 0; i < mesh.nverts_per_simplex(); ++i) grads[i] = hat_gradient(mesh, e, i);
}

double grad_pair(const std::array<double, 3>& gi, const std::array<double, 3>& gj, int d,
                 double A) {
    double gx = 0.0;
    for (int k = 0; k < d; ++k) gx += gi[k] * gj[k];
    return A * gx + gi[d] * gj[d];
}

SparseMat assemble_stiffness_impl(const CylinderMesh& mesh, const CoefficientField* field,
                                  double a, const NodeClassification* dirichlet, int degree) {
    const int nv = mesh.nverts_per_simplex();
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(mesh.num_simplices()) * nv * nv);
    std::array<std::array<double, 3>, 4> grads;
    for (Index e = 0; e < mesh.num_simplices(); ++e) {
        const double A = field ? field->sample(mesh.simplex_centroid(e)) : 1.0;
        const double w = weighted_measure(mesh, e, a, degree);
        element_gradients(mesh, e, grads);
        for (int i = 0; i < nv; ++i) {
            const Index gi = mesh.simplices[e][i];
            if (dirichlet && dirichlet->kind[gi] == NodeKind::dirichlet) continue;
            for (int j = 0; j < nv; ++j) {
                const Index gj = mesh.simplices[e][j];
                if (dirichlet && dirichlet->kind[gj] == NodeKind::dirichlet) continue;
                trips.emplace_back(gi, gj, w * grad_pair(grads[i], grads[j], mesh.d, A));
            }
        }
    }
    if (dirichlet) {
        for (Index v : dirichlet->dirichlet) trips.emplace_back(v, v, 1.0);
    }
    SparseMat K(mesh.num_vertices(), mesh.num_vertices());
    K.setFromTriplets(trips.begin(), trips.end());
    return K;
}

} // namespace

SparseMat assemble_weighted_stiffness(const CylinderMesh& mesh, const CoefficientField& field,
                                      double a, const NodeClassification* dirichlet) {
    return assemble_stiffness_impl(mesh, &field, a, dirichlet, 2);
}

SparseMat assemble_weighted_energy_matrix(const CylinderMesh& mesh, double a) {
    // Error integrands carry the higher default degree.
    return assemble_stiffness_impl(mesh, nullptr, a, nullptr, 4);
}

SparseMat assemble_weighted_mass(const CylinderMesh& mesh, double a) {
    const int nv = mesh.nverts_per_simplex();
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(mesh.num_simplices()) * nv * nv);
    for (Index e = 0; e < mesh.num_simplices(); ++e) {
        const SimplexRule rule = weighted_simplex_quadrature(mesh, e, a, 2);
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const auto lam = barycentric_coordinates(mesh, e, rule.points[q]);
            for (int i = 0; i < nv; ++i)
                for (int j = 0; j < nv; ++j)
                    trips.emplace_back(mesh.simplices[e][i], mesh.simplices[e][j],
                                       rule.weights[q] * lam[i] * lam[j]);
        }
    }
    SparseMat M(mesh.num_vertices(), mesh.num_vertices());
    M.setFromTriplets(trips.begin(), trips.end());
    return M;
}

Eigen::MatrixXd assemble_weighted_mass_local(const CylinderMesh& mesh, const Patch& patch,
                                             double a, const NodeClassification& cls,
                                             std::vector<Index>& basis_nodes) {
    basis_nodes.clear();
    std::vector<int> local_of(mesh.num_vertices(), -1);
    for (Index v : patch.nodes) {
        if (cls.kind[v] != NodeKind::dirichlet) {
            local_of[v] = static_cast<int>(basis_nodes.size());
            basis_nodes.push_back(v);
        }
    }
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(basis_nodes.size(), basis_nodes.size());
    const int nv = mesh.nverts_per_simplex();
    for (Index e : patch.elements) {
        const SimplexRule rule = weighted_simplex_quadrature(mesh, e, a, 2);
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const auto lam = barycentric_coordinates(mesh, e, rule.points[q]);
            for (int i = 0; i < nv; ++i) {
                const int li = local_of[mesh.simplices[e][i]];
                if (li < 0) continue;
                for (int j = 0; j < nv; ++j) {
                    const int lj = local_of[mesh.simplices[e][j]];
                    if (lj < 0) continue;
                    M(li, lj) += rule.weights[q] * lam[i] * lam[j];
                }
            }
        }
    }
    return M;
}

Vector trace_moment_vector(const CylinderMesh& mesh, const TraceFunction& f, int degree) {
    Vector load = Vector::Zero(mesh.num_vertices());
    const TraceSet ts = collect_trace_faces(mesh);
    const int n = (degree + 4) / 2;
    const Rule1d gl = gauss_legendre_1d(n);
    for (const TraceFace& face : ts.faces) {
        if (mesh.d == 1) {
            const Point& p0 = mesh.vertices[face.verts[0]];
            const Point& p1 = mesh.vertices[face.verts[1]];
            const double len = std::abs(p1[0] - p0[0]);
            for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
                const double t = gl.nodes[q];
                const double x = p0[0] + t * (p1[0] - p0[0]);
                const double fw = f({x, 0.0}) * gl.weights[q] * len;
                load[face.verts[0]] += fw * (1.0 - t);
                load[face.verts[1]] += fw * t;
            }
        } else {
            const Point& p0 = mesh.vertices[face.verts[0]];
            const Point& p1 = mesh.vertices[face.verts[1]];
            const Point& p2 = mesh.vertices[face.verts[2]];
            const double area2 = std::abs((p1[0] - p0[0]) * (p2[1] - p0[1]) -
                                          (p2[0] - p0[0]) * (p1[1] - p0[1]));
            // Collapsed map: barycentrics ((1-u2)(1-u1), (1-u2)u1, u2),
            // surface element = area2 * (1-u2).
            for (std::size_t q2 = 0; q2 < gl.nodes.size(); ++q2) {
                const double u2 = gl.nodes[q2];
                for (std::size_t q1 = 0; q1 < gl.nodes.size(); ++q1) {
                    const double u1 = gl.nodes[q1];
                    const double l0 = (1.0 - u2) * (1.0 - u1);
                    const double l1 = (1.0 - u2) * u1;
                    const double l2 = u2;
                    const double x1 = l0 * p0[0] + l1 * p1[0] + l2 * p2[0];
                    const double x2 = l0 * p0[1] + l1 * p1[1] + l2 * p2[1];
                    const double fw = f({x1, x2}) * gl.weights[q1] * gl.weights[q2] *
                                      area2 * (1.0 - u2);
                    load[face.verts[0]] += fw * l0;
                    load[face.verts[1]] += fw * l1;
                    load[face.verts[2]] += fw * l2;
                }
            }
        }
    }
    return load;
}

Vector assemble_trace_load(const CylinderMesh& mesh, const TraceFunction& f,
                           const FractionalOrder& order, int degree) {
    return order.c_s * trace_moment_vector(mesh, f, degree);
}

double weighted_energy_norm(const SparseMat& energy, const Vector& u) {
    return std::sqrt(std::max(u.dot(energy * u), 0.0));
}

double weighted_energy_on_elements(const CylinderMesh& mesh, const std::vector<Index>& elements,
                                   double a, const Vector& u) {
    const int nv = mesh.nverts_per_simplex();
    std::array<std::array<double, 3>, 4> grads;
    double total = 0.0;
    for (Index e : elements) {
        const double w = weighted_measure(mesh, e, a, 4);
        element_gradients(mesh, e, grads);
        std::array<double, 3> g = {0.0, 0.0, 0.0};
        for (int i = 0; i < nv; ++i) {
            const double ui = u[mesh.simplices[e][i]];
            for (int k = 0; k <= mesh.d; ++k) g[k] += ui * grads[i][k];
        }
        double g2 = 0.0;
        for (int k = 0; k <= mesh.d; ++k) g2 += g[k] * g[k];
        total += w * g2;
    }
    return total;
}

SparseMat prolongation_matrix(const CylinderMesh& coarse, const CylinderMesh& fine) {
    if (fine.refinement_map.size() != fine.simplices.size())
        throw std::invalid_argument("prolongation_matrix: fine mesh has no refinement map");
    const auto incidence = vertex_incidence(fine);
    std::vector<Eigen::Triplet<double>> trips;
    for (Index v = 0; v < fine.num_vertices(); ++v) {
        if (incidence[v].empty())
            throw std::runtime_error("prolongation_matrix: isolated fine vertex");
        const Index ef = *std::min_element(incidence[v].begin(), incidence[v].end());
        const Index ec = fine.refinement_map[ef];
        auto lam = barycentric_coordinates(coarse, ec, fine.vertices[v]);
        for (int k = 0; k < coarse.nverts_per_simplex(); ++k) {
            if (lam[k] > 1e-13)
                trips.emplace_back(v, coarse.simplices[ec][k], std::min(lam[k], 1.0));
        }
    }
    SparseMat P(fine.num_vertices(), coarse.num_vertices());
    P.setFromTriplets(trips.begin(), trips.end());
    return P;
}

} // namespace fraclod
