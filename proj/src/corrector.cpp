#include "fraclod/corrector.hpp"

#include "fraclod/quadrature.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseLU>
#ifdef FRACLOD_HAVE_UMFPACK
#include <Eigen/UmfPackSupport>
#endif

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace fraclod {

namespace {

double grad_pair(const std::array<double, 3>& gi, const std::array<double, 3>& gj, int d,
                 double A) {
    double gx = 0.0;
    for (int k = 0; k < d; ++k) gx += gi[k] * gj[k];
    return A * gx + gi[d] * gj[d];
}

// Per-worker scatter buffers with O(touched) reset.
struct Scratch {
    std::vector<char> elem_in;
    std::vector<char> seen;
    std::vector<int> free_idx;
    std::vector<Index> elems, verts;

    Scratch(Index nelem, Index nvert)
        : elem_in(nelem, 0), seen(nvert, 0), free_idx(nvert, -1) {}

    void reset() {
        for (Index e : elems) elem_in[e] = 0;
        for (Index v : verts) {
            seen[v] = 0;
            free_idx[v] = -1;
        }
        elems.clear();
        verts.clear();
    }
};

struct PatchSystem {
    std::vector<Index> free_nodes;
    std::vector<Index> active_rows;
    // The saddle matrix must outlive the factorization: UMFPACK's solve reads
    // the original values for iterative refinement.
    SparseMat S;
#ifdef FRACLOD_HAVE_UMFPACK
    Eigen::UmfPackLU<SparseMat> lu;
#else
    Eigen::SparseLU<SparseMat> lu;
#endif
    int nf = 0;
    int nc = 0;
    // Set when the constraints annihilate every free dof (h = H being the
    // canonical case): the constrained minimizer is identically zero and the
    // saddle matrix itself is singular.
    bool trivial_kernel = false;
};

// Fine elements and free fine dofs covered by a set of coarse elements.
// Free nodes are fine dofs all of whose incident elements lie in the patch.
void collect_patch_fine(const CorrectorContext& ctx, const std::vector<Index>& coarse_elems,
                        Scratch& s) {
    const int nvf = ctx.fine->nverts_per_simplex();
    for (Index ec : coarse_elems) {
        for (Index ef : ctx.fines_of_coarse[ec]) {
            s.elem_in[ef] = 1;
            s.elems.push_back(ef);
        }
    }
    for (Index ef : s.elems) {
        for (int t = 0; t < nvf; ++t) {
            const Index v = ctx.fine->simplices[ef][t];
            if (!s.seen[v]) {
                s.seen[v] = 1;
                s.verts.push_back(v);
            }
        }
    }
    std::sort(s.verts.begin(), s.verts.end());
}

std::vector<Index> free_nodes_of_patch(const CorrectorContext& ctx, const Scratch& s) {
    std::vector<Index> free;
    for (Index v : s.verts) {
        if (ctx.fine_cls->kind[v] == NodeKind::dirichlet) continue;
        bool inside = true;
        for (Index e : ctx.fine_incidence[v]) {
            if (!s.elem_in[e]) {
                inside = false;
                break;
            }
        }
        if (inside) free.push_back(v);
    }
    return free;
}

void factorize_system(const CorrectorContext& ctx, PatchSystem& ps, const Scratch& s) {
    const int nf = ps.nf = static_cast<int>(ps.free_nodes.size());
    const int nc = ps.nc = static_cast<int>(ps.active_rows.size());
    std::vector<Eigen::Triplet<double>> trips;
    for (int jc = 0; jc < nf; ++jc) {
        for (SparseMat::InnerIterator it(ctx.K, ps.free_nodes[jc]); it; ++it) {
            const int lr = s.free_idx[it.row()];
            if (lr >= 0) trips.emplace_back(lr, jc, it.value());
        }
    }
    for (int ar = 0; ar < nc; ++ar) {
        for (SparseMatR::InnerIterator it(ctx.iop->rows, ps.active_rows[ar]); it; ++it) {
            const int lj = s.free_idx[it.col()];
            if (lj >= 0) {
                trips.emplace_back(nf + ar, lj, it.value());
                trips.emplace_back(lj, nf + ar, it.value());
            }
        }
    }
    ps.S.resize(nf + nc, nf + nc);
    ps.S.setFromTriplets(trips.begin(), trips.end());
    ps.lu.compute(ps.S);
    if (ps.lu.info() != Eigen::Success) {
        // A singular saddle matrix with injective constraint block means the
        // constrained space is {0}; the minimizer is then exactly zero.
        Eigen::MatrixXd C = Eigen::MatrixXd::Zero(nc, nf);
        for (int ar = 0; ar < nc; ++ar) {
            for (SparseMatR::InnerIterator it(ctx.iop->rows, ps.active_rows[ar]); it; ++it) {
                const int lj = s.free_idx[it.col()];
                if (lj >= 0) C(ar, lj) = it.value();
            }
        }
        if (Eigen::ColPivHouseholderQR<Eigen::MatrixXd>(C).rank() == nf) {
            ps.trivial_kernel = true;
            return;
        }
        throw std::runtime_error("corrector: saddle point factorization failed");
    }
}

// Saddle system on the k-layer patch around coarse vertex v. Constraint rows
// are restricted to those meeting the free dofs; the restriction is exact for
// functions supported on the patch.
bool build_patch_system(const CorrectorContext& ctx, Index v, int k, Scratch& s,
                        PatchSystem& ps) {
    const Patch patch = build_patch(*ctx.coarse, ctx.coarse_incidence, v, k);
    collect_patch_fine(ctx, patch.elements, s);
    ps.free_nodes = free_nodes_of_patch(ctx, s);
    if (ps.free_nodes.empty()) return false;
    for (std::size_t i = 0; i < ps.free_nodes.size(); ++i)
        s.free_idx[ps.free_nodes[i]] = static_cast<int>(i);

    const Patch reach = build_patch(*ctx.coarse, ctx.coarse_incidence, v, k + 1);
    ps.active_rows.clear();
    for (Index z : reach.nodes) {
        const Index r = ctx.coarse_cls->dof_index[z];
        if (r < 0) continue;
        for (SparseMatR::InnerIterator it(ctx.iop->rows, r); it; ++it) {
            if (s.free_idx[it.col()] >= 0) {
                ps.active_rows.push_back(r);
                break;
            }
        }
    }
    std::sort(ps.active_rows.begin(), ps.active_rows.end());
    factorize_system(ctx, ps, s);
    return true;
}

// Saddle system over the whole fine dof space with every constraint row.
void build_full_system(const CorrectorContext& ctx, Scratch& s, PatchSystem& ps) {
    for (Index e = 0; e < ctx.fine->num_simplices(); ++e) {
        s.elem_in[e] = 1;
        s.elems.push_back(e);
    }
    ps.free_nodes = ctx.fine_cls->dof;
    for (Index v : ps.free_nodes) s.verts.push_back(v);
    for (std::size_t i = 0; i < ps.free_nodes.size(); ++i)
        s.free_idx[ps.free_nodes[i]] = static_cast<int>(i);
    ps.active_rows.resize(ctx.iop->rows.rows());
    for (Index r = 0; r < ctx.iop->rows.rows(); ++r) ps.active_rows[r] = r;
    factorize_system(ctx, ps, s);
}

Eigen::MatrixXd solve_system(const PatchSystem& ps, const Eigen::MatrixXd& rhs_top) {
    if (ps.trivial_kernel) return Eigen::MatrixXd::Zero(ps.nf, rhs_top.cols());
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(ps.nf + ps.nc, rhs_top.cols());
    rhs.topRows(ps.nf) = rhs_top;
    const Eigen::MatrixXd sol = ps.lu.solve(rhs);
    return sol.topRows(ps.nf);
}

// Weighted measure int_e lambdahat_v y^a over a fine element under coarse
// element ec, with lambdahat_v = hat_v / sum of dof-node hats evaluated at
// the quadrature points. Points where the denominator vanishes (elements all
// of whose vertices are Dirichlet) contribute nothing.
double pou_weighted_measure(const CorrectorContext& ctx, Index ec, int tv, Index ef) {
    const int nvc = ctx.coarse->nverts_per_simplex();
    std::array<bool, 4> is_dof = {false, false, false, false};
    for (int t = 0; t < nvc; ++t)
        is_dof[t] =
            ctx.coarse_cls->kind[ctx.coarse->simplices[ec][t]] != NodeKind::dirichlet;
    const SimplexRule rule = weighted_simplex_quadrature(*ctx.fine, ef, ctx.a, 2);
    double w = 0.0;
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
        const auto lam = barycentric_coordinates(*ctx.coarse, ec, rule.points[q]);
        double den = 0.0;
        for (int t = 0; t < nvc; ++t)
            if (is_dof[t]) den += lam[t];
        if (den < 1e-14) continue;
        w += rule.weights[q] * lam[tv] / den;
    }
    return w;
}

// RHS columns for the patch problem at vertex v: the w-th column carries
// int lambdahat_v B grad(hat_w) . grad(phi_i) y^a for each adjacent coarse
// dof w, tested with the free fine hats phi_i.
Eigen::MatrixXd node_rhs_columns(const CorrectorContext& ctx, Index v, const Scratch& s,
                                 const PatchSystem& ps, std::vector<Index>& column_dofs) {
    const int nvc = ctx.coarse->nverts_per_simplex();
    const int nvf = ctx.fine->nverts_per_simplex();
    column_dofs.clear();
    std::vector<int> col_of(ctx.coarse->num_vertices(), -1);
    for (Index ec : ctx.coarse_incidence[v]) {
        for (int t = 0; t < nvc; ++t) {
            const Index w = ctx.coarse->simplices[ec][t];
            if (ctx.coarse_cls->dof_index[w] >= 0 && col_of[w] < 0) {
                col_of[w] = 0;
                column_dofs.push_back(w);
            }
        }
    }
    std::sort(column_dofs.begin(), column_dofs.end());
    for (std::size_t c = 0; c < column_dofs.size(); ++c)
        col_of[column_dofs[c]] = static_cast<int>(c);

    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(ps.nf, column_dofs.size());
    for (Index ec : ctx.coarse_incidence[v]) {
        int tv = -1;
        for (int t = 0; t < nvc; ++t)
            if (ctx.coarse->simplices[ec][t] == v) tv = t;
        for (Index ef : ctx.fines_of_coarse[ec]) {
            const double W = pou_weighted_measure(ctx, ec, tv, ef);
            if (std::abs(W) < 1e-14) continue;
            const double A = ctx.coeff_of_element[ef];
            std::array<std::array<double, 3>, 4> gf;
            for (int i = 0; i < nvf; ++i) gf[i] = hat_gradient(*ctx.fine, ef, i);
            for (int t = 0; t < nvc; ++t) {
                const Index w = ctx.coarse->simplices[ec][t];
                const int col = col_of[w];
                if (col < 0) continue;
                const auto gw = hat_gradient(*ctx.coarse, ec, t);
                for (int i = 0; i < nvf; ++i) {
                    const int li = s.free_idx[ctx.fine->simplices[ef][i]];
                    if (li >= 0) rhs(li, col) += W * grad_pair(gw, gf[i], ctx.fine->d, A);
                }
            }
        }
    }
    return rhs;
}

// Single RHS for a general coarse function: grad(u_H) replaces grad(hat_w).
Eigen::MatrixXd function_rhs_column(const CorrectorContext& ctx, Index v, const Scratch& s,
                                    const PatchSystem& ps, const Vector& u_coarse) {
    const int nvc = ctx.coarse->nverts_per_simplex();
    const int nvf = ctx.fine->nverts_per_simplex();
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(ps.nf, 1);
    for (Index ec : ctx.coarse_incidence[v]) {
        int tv = -1;
        for (int t = 0; t < nvc; ++t)
            if (ctx.coarse->simplices[ec][t] == v) tv = t;
        std::array<double, 3> gu = {0.0, 0.0, 0.0};
        for (int t = 0; t < nvc; ++t) {
            const auto g = hat_gradient(*ctx.coarse, ec, t);
            const double uw = u_coarse[ctx.coarse->simplices[ec][t]];
            for (int c = 0; c <= ctx.coarse->d; ++c) gu[c] += uw * g[c];
        }
        for (Index ef : ctx.fines_of_coarse[ec]) {
            const double W = pou_weighted_measure(ctx, ec, tv, ef);
            if (std::abs(W) < 1e-14) continue;
            const double A = ctx.coeff_of_element[ef];
            for (int i = 0; i < nvf; ++i) {
                const int li = s.free_idx[ctx.fine->simplices[ef][i]];
                if (li >= 0)
                    rhs(li, 0) +=
                        W * grad_pair(gu, hat_gradient(*ctx.fine, ef, i), ctx.fine->d, A);
            }
        }
    }
    return rhs;
}

} // namespace

CorrectorContext make_corrector_context(const CylinderMesh& coarse, const CylinderMesh& fine,
                                        const NodeClassification& coarse_cls,
                                        const NodeClassification& fine_cls,
                                        const InterpolationOperator& iop,
                                        const CoefficientField& field, double a,
                                        int n_threads) {
    CorrectorContext ctx;
    ctx.coarse = &coarse;
    ctx.fine = &fine;
    ctx.coarse_cls = &coarse_cls;
    ctx.fine_cls = &fine_cls;
    ctx.iop = &iop;
    ctx.a = a;
    ctx.K = assemble_weighted_stiffness(fine, field, a, nullptr);
    ctx.P = prolongation_matrix(coarse, fine);
    ctx.coeff_of_element.resize(fine.num_simplices());
    for (Index e = 0; e < fine.num_simplices(); ++e)
        ctx.coeff_of_element[e] = field.sample(fine.simplex_centroid(e));
    ctx.fines_of_coarse.resize(coarse.num_simplices());
    for (Index ef = 0; ef < fine.num_simplices(); ++ef)
        ctx.fines_of_coarse[fine.refinement_map[ef]].push_back(ef);
    ctx.fine_incidence = vertex_incidence(fine);
    ctx.coarse_incidence = vertex_incidence(coarse);
    if (n_threads <= 0) {
        const unsigned hw = std::thread::hardware_concurrency();
        n_threads = hw == 0 ? 1 : static_cast<int>(std::min(hw, 8u));
    }
    ctx.n_threads = n_threads;
    return ctx;
}

double pou_weight(const CorrectorContext& ctx, Index v, const Point& p) {
    const int nvc = ctx.coarse->nverts_per_simplex();
    for (Index ec : ctx.coarse_incidence[v]) {
        const auto lam = barycentric_coordinates(*ctx.coarse, ec, p);
        bool inside = true;
        for (int t = 0; t < nvc; ++t)
            if (lam[t] < -1e-12) inside = false;
        if (!inside) continue;
        int tv = -1;
        double den = 0.0;
        for (int t = 0; t < nvc; ++t) {
            const Index w = ctx.coarse->simplices[ec][t];
            if (w == v) tv = t;
            if (ctx.coarse_cls->kind[w] != NodeKind::dirichlet) den += lam[t];
        }
        if (den < 1e-14) return 0.0;
        return lam[tv] / den;
    }
    return 0.0;
}

Vector full_corrector(const CorrectorContext& ctx, const Vector& u_coarse) {
    Scratch s(ctx.fine->num_simplices(), ctx.fine->num_vertices());
    PatchSystem ps;
    build_full_system(ctx, s, ps);
    const Vector rhs_full = ctx.K * (ctx.P * u_coarse);
    Eigen::MatrixXd rhs_top(ps.nf, 1);
    for (int i = 0; i < ps.nf; ++i) rhs_top(i, 0) = rhs_full[ps.free_nodes[i]];
    const Eigen::MatrixXd sol = solve_system(ps, rhs_top);
    Vector q = Vector::Zero(ctx.fine->num_vertices());
    for (int i = 0; i < ps.nf; ++i) q[ps.free_nodes[i]] = sol(i, 0);
    return q;
}

Vector localized_corrector(const CorrectorContext& ctx, const Vector& u_coarse, int k) {
    if (k <= 0) return full_corrector(ctx, u_coarse);
    Scratch s(ctx.fine->num_simplices(), ctx.fine->num_vertices());
    Vector q = Vector::Zero(ctx.fine->num_vertices());
    for (Index v : ctx.coarse_cls->dof) {
        s.reset();
        PatchSystem ps;
        if (!build_patch_system(ctx, v, k, s, ps)) continue;
        const Eigen::MatrixXd rhs = function_rhs_column(ctx, v, s, ps, u_coarse);
        if (rhs.norm() == 0.0) continue;
        const Eigen::MatrixXd sol = solve_system(ps, rhs);
        for (int i = 0; i < ps.nf; ++i) q[ps.free_nodes[i]] += sol(i, 0);
    }
    return q;
}

SparseMat corrector_basis(const CorrectorContext& ctx, int k) {
    const Index n_fine = ctx.fine->num_vertices();
    const Index n_dofs = static_cast<Index>(ctx.coarse_cls->dof.size());

    if (k <= 0) {
        Scratch s(ctx.fine->num_simplices(), n_fine);
        PatchSystem ps;
        build_full_system(ctx, s, ps);
        const SparseMat KP = ctx.K * ctx.P;
        SparseMat Q(n_fine, n_dofs);
        Q.reserve(Eigen::VectorXi::Constant(n_dofs, ps.nf));
        const Index chunk = 64;
        for (Index c0 = 0; c0 < n_dofs; c0 += chunk) {
            const Index nc = std::min(chunk, n_dofs - c0);
            Eigen::MatrixXd rhs_top = Eigen::MatrixXd::Zero(ps.nf, nc);
            for (Index c = 0; c < nc; ++c) {
                const Index w = ctx.coarse_cls->dof[c0 + c];
                for (SparseMat::InnerIterator it(KP, w); it; ++it) {
                    const int lr = s.free_idx[it.row()];
                    if (lr >= 0) rhs_top(lr, c) = it.value();
                }
            }
            const Eigen::MatrixXd sol = solve_system(ps, rhs_top);
            for (Index c = 0; c < nc; ++c)
                for (int i = 0; i < ps.nf; ++i)
                    if (sol(i, c) != 0.0) Q.insert(ps.free_nodes[i], c0 + c) = sol(i, c);
        }
        Q.makeCompressed();
        return Q;
    }

    const double dense_bytes = 8.0 * static_cast<double>(n_fine) * n_dofs;
    if (dense_bytes > 2e9) throw std::runtime_error("corrector_basis: problem too large");
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n_fine, n_dofs);

    struct NodeResult {
        std::vector<Index> free_nodes;
        std::vector<Index> column_dofs;
        Eigen::MatrixXd sol;
    };
    const Index n_cv = static_cast<Index>(ctx.coarse_cls->dof.size());
    const Index window = static_cast<Index>(std::max(64, 8 * ctx.n_threads));
    std::vector<NodeResult> results(std::min(window, n_cv));

    for (Index v0 = 0; v0 < n_cv; v0 += window) {
        const Index nv = std::min(window, n_cv - v0);
        std::atomic<Index> next(0);
        auto worker = [&]() {
            Scratch s(ctx.fine->num_simplices(), n_fine);
            for (;;) {
                const Index i = next.fetch_add(1);
                if (i >= nv) break;
                const Index v = ctx.coarse_cls->dof[v0 + i];
                NodeResult& res = results[i];
                res.free_nodes.clear();
                res.column_dofs.clear();
                res.sol.resize(0, 0);
                s.reset();
                PatchSystem ps;
                if (!build_patch_system(ctx, v, k, s, ps)) continue;
                const Eigen::MatrixXd rhs = node_rhs_columns(ctx, v, s, ps, res.column_dofs);
                if (res.column_dofs.empty()) continue;
                res.sol = solve_system(ps, rhs);
                res.free_nodes = ps.free_nodes;
            }
        };
        if (ctx.n_threads > 1) {
            std::vector<std::thread> pool;
            for (int t = 0; t < ctx.n_threads; ++t) pool.emplace_back(worker);
            for (auto& th : pool) th.join();
        } else {
            worker();
        }
        for (Index i = 0; i < nv; ++i) {
            const NodeResult& res = results[i];
            if (res.sol.size() == 0) continue;
            for (std::size_t c = 0; c < res.column_dofs.size(); ++c) {
                const Index col = ctx.coarse_cls->dof_index[res.column_dofs[c]];
                for (std::size_t r = 0; r < res.free_nodes.size(); ++r)
                    acc(res.free_nodes[r], col) += res.sol(static_cast<Index>(r), c);
            }
        }
    }
    return acc.sparseView();
}

DecayMeasurement measure_decay(const CorrectorContext& ctx, const Vector& u_coarse,
                               const std::vector<int>& k_values) {
    DecayMeasurement out;
    out.k_values = k_values;
    const SparseMat energy = assemble_weighted_energy_matrix(*ctx.fine, ctx.a);
    const Vector ideal = full_corrector(ctx, u_coarse);
    for (int k : k_values) {
        const Vector diff = ideal - localized_corrector(ctx, u_coarse, k);
        out.errors.push_back(weighted_energy_norm(energy, diff));
    }
    // Least-squares fit of log(error) against k; values at the solver noise
    // floor are excluded from the fit range.
    double sx = 0, sy = 0, sxx = 0, sxy = 0, n = 0;
    for (std::size_t i = 0; i < k_values.size(); ++i) {
        if (!(out.errors[i] >= 1e-12)) continue;
        const double x = k_values[i], y = std::log(out.errors[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        n += 1;
    }
    if (n >= 2) {
        out.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        out.theta = std::exp(out.slope);
        const double mean_y = sy / n;
        double ss_res = 0, ss_tot = 0;
        for (std::size_t i = 0; i < k_values.size(); ++i) {
            if (!(out.errors[i] >= 1e-12)) continue;
            const double y = std::log(out.errors[i]);
            const double fit = mean_y + out.slope * (k_values[i] - sx / n);
            ss_res += (y - fit) * (y - fit);
            ss_tot += (y - mean_y) * (y - mean_y);
        }
        out.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
    }
    return out;
}

} // namespace fraclod
