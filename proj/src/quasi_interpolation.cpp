#include "fraclod/quasi_interpolation.hpp"

#include "fraclod/quadrature.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace fraclod {

BoundaryMode parse_boundary_mode(const std::string& name) {
    if (name == "local") return BoundaryMode::local;
    if (name == "global") return BoundaryMode::global;
    throw std::invalid_argument("unknown boundary mode: " + name);
}

std::string boundary_mode_name(BoundaryMode mode) {
    return mode == BoundaryMode::local ? "local" : "global";
}

namespace {

// Scatter map from global ids to local dense indices with O(touched) reset.
struct LocalIndex {
    std::vector<int> slot;
    std::vector<Index> members;

    explicit LocalIndex(Index n) : slot(n, -1) {}

    int add(Index v) {
        if (slot[v] < 0) {
            slot[v] = static_cast<int>(members.size());
            members.push_back(v);
        }
        return slot[v];
    }
    int at(Index v) const { return slot[v]; }
    int size() const { return static_cast<int>(members.size()); }
    void clear() {
        for (Index v : members) slot[v] = -1;
        members.clear();
    }
};

// Barycentric coordinates of a trace point within a trace face (x-coordinates only).
std::array<double, 3> face_barycentric(const CylinderMesh& m, const TraceFace& face,
                                       const std::array<double, 2>& x) {
    if (m.d == 1) {
        const double x0 = m.vertices[face.verts[0]][0];
        const double x1 = m.vertices[face.verts[1]][0];
        const double t = (x[0] - x0) / (x1 - x0);
        return {1.0 - t, t, 0.0};
    }
    const Point& p0 = m.vertices[face.verts[0]];
    const Point& p1 = m.vertices[face.verts[1]];
    const Point& p2 = m.vertices[face.verts[2]];
    const double a11 = p1[0] - p0[0], a12 = p2[0] - p0[0];
    const double a21 = p1[1] - p0[1], a22 = p2[1] - p0[1];
    const double det = a11 * a22 - a12 * a21;
    const double b1 = x[0] - p0[0], b2 = x[1] - p0[1];
    const double l1 = (a22 * b1 - a12 * b2) / det;
    const double l2 = (-a21 * b1 + a11 * b2) / det;
    return {1.0 - l1 - l2, l1, l2};
}

// Quadrature over one trace face: callback(x, weight, hat values at the face vertices).
template <typename F>
void for_each_face_point(const CylinderMesh& m, const TraceFace& face, const Rule1d& gl, F&& cb) {
    if (m.d == 1) {
        const double x0 = m.vertices[face.verts[0]][0];
        const double x1 = m.vertices[face.verts[1]][0];
        const double len = std::abs(x1 - x0);
        for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
            const double t = gl.nodes[q];
            cb(std::array<double, 2>{x0 + t * (x1 - x0), 0.0}, gl.weights[q] * len,
               std::array<double, 3>{1.0 - t, t, 0.0});
        }
        return;
    }
    const Point& p0 = m.vertices[face.verts[0]];
    const Point& p1 = m.vertices[face.verts[1]];
    const Point& p2 = m.vertices[face.verts[2]];
    const double area2 =
        std::abs((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]));
    for (std::size_t q2 = 0; q2 < gl.nodes.size(); ++q2) {
        const double u2 = gl.nodes[q2];
        for (std::size_t q1 = 0; q1 < gl.nodes.size(); ++q1) {
            const double u1 = gl.nodes[q1];
            const std::array<double, 3> lam = {(1.0 - u2) * (1.0 - u1), (1.0 - u2) * u1, u2};
            const std::array<double, 2> x = {
                lam[0] * p0[0] + lam[1] * p1[0] + lam[2] * p2[0],
                lam[0] * p0[1] + lam[1] * p1[1] + lam[2] * p2[1]};
            cb(x, gl.weights[q1] * gl.weights[q2] * area2 * (1.0 - u2), lam);
        }
    }
}

} // namespace

InterpolationOperator build_interpolation(const CylinderMesh& coarse, const CylinderMesh& fine,
                                          const NodeClassification& coarse_cls, double a,
                                          BoundaryMode mode) {
    if (fine.refinement_map.size() != fine.simplices.size())
        throw std::invalid_argument("build_interpolation: fine mesh has no refinement map");

    InterpolationOperator op;
    op.mode = mode;
    op.n_fine_vertices = fine.num_vertices();
    op.n_coarse_vertices = coarse.num_vertices();
    op.coarse_dofs = coarse_cls.dof;

    const auto coarse_incidence = vertex_incidence(coarse);
    std::vector<std::vector<Index>> fines_of_coarse(coarse.num_simplices());
    for (Index ef = 0; ef < fine.num_simplices(); ++ef)
        fines_of_coarse[fine.refinement_map[ef]].push_back(ef);

    const TraceSet coarse_ts = collect_trace_faces(coarse);
    const TraceSet fine_ts = collect_trace_faces(fine);
    std::vector<std::vector<Index>> coarse_faces_of_vertex(coarse.num_vertices());
    for (std::size_t fc = 0; fc < coarse_ts.faces.size(); ++fc)
        for (int t = 0; t <= coarse.d; ++t)
            coarse_faces_of_vertex[coarse_ts.faces[fc].verts[t]].push_back(
                static_cast<Index>(fc));
    std::vector<std::vector<Index>> fine_faces_of_coarse_face(coarse_ts.faces.size());
    for (std::size_t ff = 0; ff < fine_ts.faces.size(); ++ff) {
        const Index ec = fine.refinement_map[fine_ts.faces[ff].element];
        const Index fc = coarse_ts.face_of_element[ec];
        if (fc < 0)
            throw std::runtime_error("build_interpolation: fine trace face outside coarse trace");
        fine_faces_of_coarse_face[fc].push_back(static_cast<Index>(ff));
    }

    const int nvc = coarse.nverts_per_simplex();
    const int nvf = fine.nverts_per_simplex();
    const Rule1d gl = gauss_legendre_1d(3);

    std::vector<int> trace_dof_index(coarse.num_vertices(), -1);
    int n_trace_dofs = 0;
    for (Index v : coarse_cls.trace) trace_dof_index[v] = n_trace_dofs++;

    LocalIndex lc(coarse.num_vertices());
    LocalIndex lf(fine.num_vertices());
    std::vector<Eigen::Triplet<double>> trips;
    op.scales.assign(op.coarse_dofs.size(), 0.0);
    op.trace_index_of_row.assign(op.coarse_dofs.size(), -1);

    for (std::size_t r = 0; r < op.coarse_dofs.size(); ++r) {
        const Index v = op.coarse_dofs[r];
        lc.clear();
        lf.clear();
        Eigen::VectorXd row;

        if (coarse_cls.kind[v] == NodeKind::interior) {
            // Weighted local L2 projection onto the coarse space over the vertex patch.
            const auto& pel = coarse_incidence[v];
            for (Index ec : pel)
                for (int t = 0; t < nvc; ++t) lc.add(coarse.simplices[ec][t]);
            Eigen::MatrixXd Mcc = Eigen::MatrixXd::Zero(lc.size(), lc.size());
            for (Index ec : pel) {
                const SimplexRule rule = weighted_simplex_quadrature(coarse, ec, a, 2);
                for (std::size_t q = 0; q < rule.points.size(); ++q) {
                    const auto lam = barycentric_coordinates(coarse, ec, rule.points[q]);
                    for (int i = 0; i < nvc; ++i)
                        for (int j = 0; j < nvc; ++j)
                            Mcc(lc.at(coarse.simplices[ec][i]), lc.at(coarse.simplices[ec][j])) +=
                                rule.weights[q] * lam[i] * lam[j];
                }
            }
            for (Index ec : pel)
                for (Index ef : fines_of_coarse[ec])
                    for (int t = 0; t < nvf; ++t) lf.add(fine.simplices[ef][t]);
            Eigen::MatrixXd Mcf = Eigen::MatrixXd::Zero(lc.size(), lf.size());
            for (Index ec : pel) {
                for (Index ef : fines_of_coarse[ec]) {
                    const SimplexRule rule = weighted_simplex_quadrature(fine, ef, a, 2);
                    for (std::size_t q = 0; q < rule.points.size(); ++q) {
                        const auto lamc = barycentric_coordinates(coarse, ec, rule.points[q]);
                        const auto lamf = barycentric_coordinates(fine, ef, rule.points[q]);
                        for (int i = 0; i < nvc; ++i) {
                            const double wc = rule.weights[q] * lamc[i];
                            const int li = lc.at(coarse.simplices[ec][i]);
                            for (int j = 0; j < nvf; ++j)
                                Mcf(li, lf.at(fine.simplices[ef][j])) += wc * lamf[j];
                        }
                    }
                }
            }
            Eigen::VectorXd ev = Eigen::VectorXd::Zero(lc.size());
            ev[lc.at(v)] = 1.0;
            row = Mcf.transpose() * Mcc.llt().solve(ev);
        } else {
            // Trace node: unweighted d-dimensional projection on the trace.
            const auto& pfaces = coarse_faces_of_vertex[v];
            if (pfaces.empty())
                throw std::runtime_error("build_interpolation: trace node without trace faces");
            for (Index fc : pfaces)
                for (int t = 0; t <= coarse.d; ++t) lc.add(coarse_ts.faces[fc].verts[t]);
            for (Index fc : pfaces)
                for (Index ff : fine_faces_of_coarse_face[fc])
                    for (int t = 0; t <= fine.d; ++t) lf.add(fine_ts.faces[ff].verts[t]);

            Eigen::MatrixXd Mtcf = Eigen::MatrixXd::Zero(lc.size(), lf.size());
            for (Index fc : pfaces) {
                for (Index ff : fine_faces_of_coarse_face[fc]) {
                    const TraceFace& facef = fine_ts.faces[ff];
                    for_each_face_point(
                        fine, facef, gl,
                        [&](const std::array<double, 2>& x, double w,
                            const std::array<double, 3>& lamf) {
                            const auto lamc = face_barycentric(coarse, coarse_ts.faces[fc], x);
                            for (int i = 0; i <= coarse.d; ++i) {
                                const int li = lc.at(coarse_ts.faces[fc].verts[i]);
                                for (int j = 0; j <= fine.d; ++j)
                                    Mtcf(li, lf.at(facef.verts[j])) += w * lamc[i] * lamf[j];
                            }
                        });
                }
            }
            if (mode == BoundaryMode::local) {
                Eigen::MatrixXd Mtcc = Eigen::MatrixXd::Zero(lc.size(), lc.size());
                for (Index fc : pfaces) {
                    for_each_face_point(coarse, coarse_ts.faces[fc], gl,
                                        [&](const std::array<double, 2>&, double w,
                                            const std::array<double, 3>& lam) {
                                            for (int i = 0; i <= coarse.d; ++i)
                                                for (int j = 0; j <= coarse.d; ++j)
                                                    Mtcc(lc.at(coarse_ts.faces[fc].verts[i]),
                                                         lc.at(coarse_ts.faces[fc].verts[j])) +=
                                                        w * lam[i] * lam[j];
                                        });
                }
                Eigen::VectorXd ev = Eigen::VectorXd::Zero(lc.size());
                ev[lc.at(v)] = 1.0;
                row = Mtcf.transpose() * Mtcc.llt().solve(ev);
            } else {
                // Global mode: the row is the trace moment against the coarse hat.
                row = Mtcf.row(lc.at(v)).transpose();
                op.trace_index_of_row[r] = trace_dof_index[v];
            }
        }

        // Normalize so the largest-magnitude entry becomes exactly 1.
        int imax = 0;
        row.cwiseAbs().maxCoeff(&imax);
        const double nrm = row[imax];
        if (nrm == 0.0)
            throw std::runtime_error("build_interpolation: degenerate functional row");
        op.scales[r] = nrm;
        for (int j = 0; j < row.size(); ++j) {
            if (row[j] != 0.0)
                trips.emplace_back(static_cast<Index>(r), lf.members[j], row[j] / nrm);
        }
    }

    op.rows.resize(static_cast<Index>(op.coarse_dofs.size()), fine.num_vertices());
    op.rows.setFromTriplets(trips.begin(), trips.end());

    if (mode == BoundaryMode::global && n_trace_dofs > 0) {
        // Coarse trace mass over trace dofs, for nodal recovery from moments.
        std::vector<Eigen::Triplet<double>> mt;
        for (const TraceFace& face : coarse_ts.faces) {
            for_each_face_point(coarse, face, gl,
                                [&](const std::array<double, 2>&, double w,
                                    const std::array<double, 3>& lam) {
                                    for (int i = 0; i <= coarse.d; ++i) {
                                        const int ti = trace_dof_index[face.verts[i]];
                                        if (ti < 0) continue;
                                        for (int j = 0; j <= coarse.d; ++j) {
                                            const int tj = trace_dof_index[face.verts[j]];
                                            if (tj >= 0)
                                                mt.emplace_back(ti, tj, w * lam[i] * lam[j]);
                                        }
                                    }
                                });
        }
        SparseMat Mt(n_trace_dofs, n_trace_dofs);
        Mt.setFromTriplets(mt.begin(), mt.end());
        op.trace_mass_solver = std::make_shared<Eigen::SimplicialLLT<SparseMat>>();
        op.trace_mass_solver->compute(Mt);
        if (op.trace_mass_solver->info() != Eigen::Success)
            throw std::runtime_error("build_interpolation: trace mass factorization failed");
    }
    return op;
}

Vector apply_interpolation(const InterpolationOperator& op, const Vector& u_fine) {
    if (u_fine.size() != op.n_fine_vertices)
        throw std::invalid_argument("apply_interpolation: size mismatch");
    Vector out = Vector::Zero(op.n_coarse_vertices);
    Vector moments;
    int n_trace = 0;
    for (int t : op.trace_index_of_row) n_trace = std::max(n_trace, t + 1);
    if (n_trace > 0) moments = Vector::Zero(n_trace);

    for (Index r = 0; r < op.rows.rows(); ++r) {
        double raw = 0.0;
        for (SparseMatR::InnerIterator it(op.rows, r); it; ++it)
            raw += it.value() * u_fine[it.col()];
        raw *= op.scales[r];
        if (op.trace_index_of_row[r] < 0)
            out[op.coarse_dofs[r]] = raw;
        else
            moments[op.trace_index_of_row[r]] = raw;
    }
    if (n_trace > 0) {
        const Vector vals = op.trace_mass_solver->solve(moments);
        for (Index r = 0; r < op.rows.rows(); ++r)
            if (op.trace_index_of_row[r] >= 0)
                out[op.coarse_dofs[r]] = vals[op.trace_index_of_row[r]];
    }
    return out;
}

} // namespace fraclod
