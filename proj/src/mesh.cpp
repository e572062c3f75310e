#include "fraclod/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <unordered_set>

namespace fraclod {

namespace {

int points_per_layer(int d, int nx) {
    return d == 1 ? nx + 1 : (nx + 1) * (nx + 1);
}

Index grid_vertex(int d, int nx, int i1, int i2, int j) {
    return static_cast<Index>(j) * points_per_layer(d, nx) +
           (d == 2 ? static_cast<Index>(i2) * (nx + 1) : 0) + i1;
}

struct GridIndex {
    int i1, i2, j;
};

GridIndex vertex_grid_index(const CylinderMesh& m, Index v) {
    const int npl = points_per_layer(m.d, m.nx);
    GridIndex g;
    g.j = static_cast<int>(v / npl);
    const int rem = static_cast<int>(v % npl);
    if (m.d == 2) {
        g.i2 = rem / (m.nx + 1);
        g.i1 = rem % (m.nx + 1);
    } else {
        g.i2 = 0;
        g.i1 = rem;
    }
    return g;
}

// Axis orders of the Kuhn decomposition, listed in a fixed order so
// element ids are reproducible. Axis d is the y direction.
std::vector<std::array<int, 3>> kuhn_permutations(int dim) {
    std::vector<std::array<int, 3>> perms;
    std::array<int, 3> axes = {0, 1, 2};
    if (dim == 2) {
        perms.push_back({0, 1, -1});
        perms.push_back({1, 0, -1});
    } else {
        std::array<int, 3> p = axes;
        std::sort(p.begin(), p.end());
        do {
            perms.push_back(p);
        } while (std::next_permutation(p.begin(), p.end()));
    }
    return perms;
}

// 2x2 or 3x3 inverse of the edge matrix A = [p_1-p_0 ... p_dim-p_0],
// returned row-major. Throws on degenerate simplices.
void edge_matrix_inverse(const CylinderMesh& m, Index e, double inv[3][3], double* det_out) {
    const int dim = m.d + 1;
    const auto& s = m.simplices[e];
    const Point& p0 = m.vertices[s[0]];
    double A[3][3] = {};
    for (int c = 0; c < dim; ++c) {
        const Point& pc = m.vertices[s[c + 1]];
        for (int r = 0; r < dim; ++r) A[r][c] = pc[r] - p0[r];
    }
    double det = 0.0;
    if (dim == 2) {
        det = A[0][0] * A[1][1] - A[0][1] * A[1][0];
        if (det == 0.0) throw std::runtime_error("degenerate simplex " + std::to_string(e));
        inv[0][0] = A[1][1] / det;
        inv[0][1] = -A[0][1] / det;
        inv[1][0] = -A[1][0] / det;
        inv[1][1] = A[0][0] / det;
    } else {
        inv[0][0] = A[1][1] * A[2][2] - A[1][2] * A[2][1];
        inv[0][1] = A[0][2] * A[2][1] - A[0][1] * A[2][2];
        inv[0][2] = A[0][1] * A[1][2] - A[0][2] * A[1][1];
        inv[1][0] = A[1][2] * A[2][0] - A[1][0] * A[2][2];
        inv[1][1] = A[0][0] * A[2][2] - A[0][2] * A[2][0];
        inv[1][2] = A[0][2] * A[1][0] - A[0][0] * A[1][2];
        inv[2][0] = A[1][0] * A[2][1] - A[1][1] * A[2][0];
        inv[2][1] = A[0][1] * A[2][0] - A[0][0] * A[2][1];
        inv[2][2] = A[0][0] * A[1][1] - A[0][1] * A[1][0];
        det = A[0][0] * inv[0][0] + A[0][1] * inv[1][0] + A[0][2] * inv[2][0];
        if (det == 0.0) throw std::runtime_error("degenerate simplex " + std::to_string(e));
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) inv[r][c] /= det;
    }
    if (det_out) *det_out = det;
}

} // namespace

double CylinderMesh::simplex_volume(Index e) const {
    const int dim = d + 1;
    const auto& s = simplices[e];
    const Point& p0 = vertices[s[0]];
    double A[3][3] = {};
    for (int c = 0; c < dim; ++c) {
        const Point& pc = vertices[s[c + 1]];
        for (int r = 0; r < dim; ++r) A[r][c] = pc[r] - p0[r];
    }
    double det;
    if (dim == 2) {
        det = A[0][0] * A[1][1] - A[0][1] * A[1][0];
        return std::abs(det) / 2.0;
    }
    det = A[0][0] * (A[1][1] * A[2][2] - A[1][2] * A[2][1]) -
          A[0][1] * (A[1][0] * A[2][2] - A[1][2] * A[2][0]) +
          A[0][2] * (A[1][0] * A[2][1] - A[1][1] * A[2][0]);
    return std::abs(det) / 6.0;
}

Point CylinderMesh::simplex_centroid(Index e) const {
    const int nv = nverts_per_simplex();
    Point c = {0.0, 0.0, 0.0};
    for (int i = 0; i < nv; ++i) {
        const Point& p = vertices[simplices[e][i]];
        for (int k = 0; k < 3; ++k) c[k] += p[k];
    }
    for (int k = 0; k < 3; ++k) c[k] /= nv;
    return c;
}

CylinderMesh build_cylinder_mesh(int d, int nx, double T, int ny) {
    if (d != 1 && d != 2) throw std::invalid_argument("build_cylinder_mesh: d must be 1 or 2");
    if (nx < 1 || ny < 1) throw std::invalid_argument("build_cylinder_mesh: nx, ny must be >= 1");
    if (!(T > 0.0)) throw std::invalid_argument("build_cylinder_mesh: T must be positive");

    CylinderMesh m;
    m.d = d;
    m.nx = nx;
    m.ny = ny;
    m.T = T;

    const int npl = points_per_layer(d, nx);
    m.vertices.resize(static_cast<std::size_t>(npl) * (ny + 1));
    for (int j = 0; j <= ny; ++j) {
        const double y = j * (T / ny);
        if (d == 1) {
            for (int i1 = 0; i1 <= nx; ++i1)
                m.vertices[grid_vertex(d, nx, i1, 0, j)] = {i1 * (1.0 / nx), y, 0.0};
        } else {
            for (int i2 = 0; i2 <= nx; ++i2)
                for (int i1 = 0; i1 <= nx; ++i1)
                    m.vertices[grid_vertex(d, nx, i1, i2, j)] = {i1 * (1.0 / nx), i2 * (1.0 / nx), y};
        }
    }

    const int dim = d + 1;
    const auto perms = kuhn_permutations(dim);
    const int cells_per_layer = d == 1 ? nx : nx * nx;
    m.simplices.reserve(static_cast<std::size_t>(cells_per_layer) * ny * perms.size());
    for (int j = 0; j < ny; ++j) {
        for (int c2 = 0; c2 < (d == 2 ? nx : 1); ++c2) {
            for (int c1 = 0; c1 < nx; ++c1) {
                for (const auto& perm : perms) {
                    std::array<int, 3> b = {0, 0, 0}; // offsets along axes (x1[,x2],y)
                    std::array<Index, 4> simplex = {-1, -1, -1, -1};
                    auto corner = [&]() {
                        const int bj = b[d];
                        return grid_vertex(d, nx, c1 + b[0], c2 + (d == 2 ? b[1] : 0), j + bj);
                    };
                    simplex[0] = corner();
                    for (int t = 0; t < dim; ++t) {
                        b[perm[t]] += 1;
                        simplex[t + 1] = corner();
                    }
                    m.simplices.push_back(simplex);
                }
            }
        }
    }
    return m;
}

int default_ny(double T, int nx) {
    const int ny = static_cast<int>(std::lround(T * nx));
    return std::max(ny, 1);
}

CylinderMesh refine(const CylinderMesh& coarse, int factor) {
    if (factor < 1) throw std::invalid_argument("refine: factor must be >= 1");
    CylinderMesh fine = build_cylinder_mesh(coarse.d, coarse.nx * factor, coarse.T,
                                            coarse.ny * factor);
    const int nsimp_cell = coarse.d == 1 ? 2 : 6;
    fine.refinement_map.resize(fine.simplices.size());
    for (Index e = 0; e < fine.num_simplices(); ++e) {
        const Point c = fine.simplex_centroid(e);
        const int i1 = std::min(static_cast<int>(c[0] * coarse.nx), coarse.nx - 1);
        const int i2 = coarse.d == 2 ? std::min(static_cast<int>(c[1] * coarse.nx), coarse.nx - 1) : 0;
        const int j = std::min(static_cast<int>(c[coarse.d] / coarse.T * coarse.ny), coarse.ny - 1);
        const Index cell = (static_cast<Index>(j) * (coarse.d == 2 ? coarse.nx : 1) + i2) * coarse.nx + i1;
        Index found = -1;
        for (int t = 0; t < nsimp_cell; ++t) {
            const Index ce = cell * nsimp_cell + t;
            const auto lam = barycentric_coordinates(coarse, ce, c);
            double lo = 1.0;
            for (int k = 0; k < coarse.d + 2; ++k) lo = std::min(lo, lam[k]);
            if (lo >= -1e-12) {
                found = ce;
                break;
            }
        }
        if (found < 0) throw std::runtime_error("refine: fine simplex not located in coarse cell");
        // Nestedness guard: every fine vertex must lie inside the coarse simplex.
        for (int k = 0; k < fine.d + 2; ++k) {
            const auto lam = barycentric_coordinates(coarse, found, fine.vertices[fine.simplices[e][k]]);
            for (int q = 0; q < coarse.d + 2; ++q) {
                if (lam[q] < -1e-9)
                    throw std::runtime_error("refine: refinement is not nested");
            }
        }
        fine.refinement_map[e] = found;
    }
    return fine;
}

NodeClassification classify_nodes(const CylinderMesh& m) {
    NodeClassification cls;
    cls.kind.resize(m.vertices.size());
    cls.dof_index.assign(m.vertices.size(), -1);
    for (Index v = 0; v < m.num_vertices(); ++v) {
        const GridIndex g = vertex_grid_index(m, v);
        const bool lateral = g.i1 == 0 || g.i1 == m.nx ||
                             (m.d == 2 && (g.i2 == 0 || g.i2 == m.nx));
        NodeKind kind;
        if (lateral || g.j == m.ny) {
            kind = NodeKind::dirichlet;
        } else if (g.j == 0) {
            kind = NodeKind::trace;
        } else {
            kind = NodeKind::interior;
        }
        cls.kind[v] = kind;
        switch (kind) {
            case NodeKind::interior: cls.interior.push_back(v); break;
            case NodeKind::trace: cls.trace.push_back(v); break;
            case NodeKind::dirichlet: cls.dirichlet.push_back(v); break;
        }
    }
    cls.dof.reserve(cls.interior.size() + cls.trace.size());
    for (Index v = 0; v < m.num_vertices(); ++v) {
        if (cls.kind[v] != NodeKind::dirichlet) {
            cls.dof_index[v] = static_cast<Index>(cls.dof.size());
            cls.dof.push_back(v);
        }
    }
    return cls;
}

std::vector<std::vector<Index>> vertex_incidence(const CylinderMesh& m) {
    std::vector<std::vector<Index>> inc(m.vertices.size());
    const int nv = m.nverts_per_simplex();
    for (Index e = 0; e < m.num_simplices(); ++e)
        for (int k = 0; k < nv; ++k) inc[m.simplices[e][k]].push_back(e);
    return inc;
}

Patch build_patch(const CylinderMesh& m, const std::vector<std::vector<Index>>& incidence,
                  Index center, int layers) {
    if (center < 0 || center >= m.num_vertices())
        throw std::invalid_argument("build_patch: invalid center node");
    if (layers < 0) throw std::invalid_argument("build_patch: layers must be >= 0");

    const int nv = m.nverts_per_simplex();
    std::unordered_set<Index> elems(incidence[center].begin(), incidence[center].end());
    for (int k = 0; k < layers; ++k) {
        std::unordered_set<Index> grown = elems;
        for (Index e : elems)
            for (int t = 0; t < nv; ++t)
                for (Index e2 : incidence[m.simplices[e][t]]) grown.insert(e2);
        if (grown.size() == elems.size()) break;
        elems = std::move(grown);
    }

    Patch patch;
    patch.center = center;
    patch.layers = layers;
    patch.elements.assign(elems.begin(), elems.end());
    std::sort(patch.elements.begin(), patch.elements.end());

    std::unordered_set<Index> nodes;
    for (Index e : patch.elements)
        for (int t = 0; t < nv; ++t) nodes.insert(m.simplices[e][t]);
    patch.nodes.assign(nodes.begin(), nodes.end());
    std::sort(patch.nodes.begin(), patch.nodes.end());

    for (Index n : patch.nodes) {
        bool internal = true;
        for (Index e : incidence[n]) {
            if (!elems.count(e)) {
                internal = false;
                break;
            }
        }
        if (!internal) patch.boundary_nodes.push_back(n);
    }

    for (Index e : patch.elements) {
        std::array<Index, 3> face = {-1, -1, -1};
        int cnt = 0;
        for (int t = 0; t < nv; ++t) {
            const Index v = m.simplices[e][t];
            if (vertex_grid_index(m, v).j == 0) {
                if (cnt < 3) face[cnt] = v;
                ++cnt;
            }
        }
        if (cnt == m.d + 1) patch.trace_faces.push_back({face, e});
    }
    return patch;
}

TraceSet collect_trace_faces(const CylinderMesh& m) {
    TraceSet ts;
    ts.face_of_element.assign(m.simplices.size(), -1);
    const int nv = m.nverts_per_simplex();
    for (Index e = 0; e < m.num_simplices(); ++e) {
        std::array<Index, 3> face = {-1, -1, -1};
        int cnt = 0;
        for (int t = 0; t < nv; ++t) {
            const Index v = m.simplices[e][t];
            if (vertex_grid_index(m, v).j == 0) {
                if (cnt < 3) face[cnt] = v;
                ++cnt;
            }
        }
        if (cnt == m.d + 1) {
            ts.face_of_element[e] = static_cast<Index>(ts.faces.size());
            ts.faces.push_back({face, e});
        }
    }
    return ts;
}

std::array<double, 4> barycentric_coordinates(const CylinderMesh& m, Index e, const Point& p) {
    const int dim = m.d + 1;
    double inv[3][3];
    edge_matrix_inverse(m, e, inv, nullptr);
    const Point& p0 = m.vertices[m.simplices[e][0]];
    std::array<double, 4> lam = {0.0, 0.0, 0.0, 0.0};
    double rest = 0.0;
    for (int r = 0; r < dim; ++r) {
        double val = 0.0;
        for (int c = 0; c < dim; ++c) val += inv[r][c] * (p[c] - p0[c]);
        lam[r + 1] = val;
        rest += val;
    }
    lam[0] = 1.0 - rest;
    return lam;
}

std::array<double, 3> hat_gradient(const CylinderMesh& m, Index e, int local) {
    const int dim = m.d + 1;
    double inv[3][3];
    edge_matrix_inverse(m, e, inv, nullptr);
    std::array<double, 3> g = {0.0, 0.0, 0.0};
    if (local == 0) {
        for (int r = 0; r < dim; ++r)
            for (int c = 0; c < dim; ++c) g[c] -= inv[r][c];
    } else {
        for (int c = 0; c < dim; ++c) g[c] = inv[local - 1][c];
    }
    return g;
}

std::string dump_mesh(const CylinderMesh& m) {
    std::string out;
    char buf[128];
    std::snprintf(buf, sizeof(buf), "VERTICES %d\n", m.num_vertices());
    out += buf;
    const int dim = m.d + 1;
    for (const auto& p : m.vertices) {
        if (dim == 2)
            std::snprintf(buf, sizeof(buf), "%.17g %.17g\n", p[0], p[1]);
        else
            std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g\n", p[0], p[1], p[2]);
        out += buf;
    }
    std::snprintf(buf, sizeof(buf), "SIMPLICES %d\n", m.num_simplices());
    out += buf;
    for (const auto& s : m.simplices) {
        if (dim == 2)
            std::snprintf(buf, sizeof(buf), "%d %d %d\n", s[0], s[1], s[2]);
        else
            std::snprintf(buf, sizeof(buf), "%d %d %d %d\n", s[0], s[1], s[2], s[3]);
        out += buf;
    }
    return out;
}

} // namespace fraclod
