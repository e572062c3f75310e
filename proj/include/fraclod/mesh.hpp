#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace fraclod {

using Index = std::int32_t;

// Point in the extended cylinder Omega x (0,T). Components [0..d-1] are
// the Omega coordinates, component [d] is the extension coordinate y.
// Unused components are zero.
using Point = std::array<double, 3>;

enum class NodeKind : std::uint8_t { interior, trace, dirichlet };

// Simplicial mesh of the cylinder (0,1)^d x (0,T) built from a tensor
// grid of nx^d * ny cells, each split into (d+1)! Kuhn simplices with a
// globally consistent diagonal. Refinements by an integer factor are
// exactly nested.
struct CylinderMesh {
    int d = 1;
    int nx = 0;
    int ny = 0;
    double T = 1.0;
    std::vector<Point> vertices;
    std::vector<std::array<Index, 4>> simplices; // d+2 ids used, remainder -1
    std::vector<Index> refinement_map;           // fine simplex -> containing coarse simplex

    int nverts_per_simplex() const { return d + 2; }
    double dx() const { return 1.0 / nx; }
    double dy() const { return T / ny; }
    Index num_vertices() const { return static_cast<Index>(vertices.size()); }
    Index num_simplices() const { return static_cast<Index>(simplices.size()); }
    double simplex_volume(Index e) const;
    Point simplex_centroid(Index e) const;
};

struct NodeClassification {
    std::vector<NodeKind> kind;  // per vertex
    std::vector<Index> interior; // N_int: 0 < y < T, x in open Omega
    std::vector<Index> trace;    // N_Omega: y = 0, x in open Omega
    std::vector<Index> dirichlet;
    std::vector<Index> dof;       // interior and trace nodes, ascending
    std::vector<Index> dof_index; // vertex -> position in dof, -1 otherwise
};

// Face lying on the trace plane y = 0: d+1 vertex ids and the simplex
// that owns the face.
struct TraceFace {
    std::array<Index, 3> verts; // d+1 ids used, remainder -1
    Index element = -1;
};

struct TraceSet {
    std::vector<TraceFace> faces;
    std::vector<Index> face_of_element; // per simplex, -1 if no trace face
};

// Element patch omega_{v,k}: k = 0 is the support of the hat function
// at v, each further layer adds every simplex touching the closure.
struct Patch {
    Index center = -1;
    int layers = 0;
    std::vector<Index> elements;       // ascending
    std::vector<Index> nodes;          // ascending, all vertices of elements
    std::vector<Index> boundary_nodes; // nodes with an incident element outside
    std::vector<TraceFace> trace_faces;
};

CylinderMesh build_cylinder_mesh(int d, int nx, double T, int ny);

// Fine mesh with nx*factor x ny*factor cells and refinement_map filled;
// verifies exact nestedness.
CylinderMesh refine(const CylinderMesh& coarse, int factor);

// ny convention used by the experiment drivers.
int default_ny(double T, int nx);

NodeClassification classify_nodes(const CylinderMesh& mesh);

std::vector<std::vector<Index>> vertex_incidence(const CylinderMesh& mesh);

Patch build_patch(const CylinderMesh& mesh,
                  const std::vector<std::vector<Index>>& incidence,
                  Index center, int layers);

TraceSet collect_trace_faces(const CylinderMesh& mesh);

// Barycentric coordinates of p with respect to simplex e (d+2 entries).
std::array<double, 4> barycentric_coordinates(const CylinderMesh& mesh, Index e,
                                              const Point& p);

// Constant gradient of the local hat function on simplex e (d+1 components).
std::array<double, 3> hat_gradient(const CylinderMesh& mesh, Index e, int local);

// Plain text dump: VERTICES block then SIMPLICES block.
std::string dump_mesh(const CylinderMesh& mesh);

} // namespace fraclod
