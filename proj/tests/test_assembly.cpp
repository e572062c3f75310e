#include "doctest.h"

#include "fraclod/assembly.hpp"
#include "fraclod/mesh.hpp"
#include "fraclod/quadrature.hpp"
#include "fraclod/special_functions.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

using namespace fraclod;

namespace {

double max_abs(const SparseMat& M) {
    double m = 0.0;
    for (int j = 0; j < M.outerSize(); ++j)
        for (SparseMat::InnerIterator it(M, j); it; ++it) m = std::max(m, std::abs(it.value()));
    return m;
}

double max_abs_diff(const SparseMat& A, const SparseMat& B) {
    const SparseMat D = A - B;
    return max_abs(D);
}

Vector random_dof_vector(const NodeClassification& cls, Index n, std::mt19937_64& rng) {
    Vector x = Vector::Zero(n);
    for (Index v : cls.dof) x[v] = 2.0 * (double(rng() >> 11) * 0x1.0p-53) - 1.0;
    return x;
}

Index vertex_at(const CylinderMesh& mesh, double x, double y) {
    for (Index v = 0; v < mesh.num_vertices(); ++v) {
        if (std::abs(mesh.vertices[v][0] - x) < 1e-12 && std::abs(mesh.vertices[v][1] - y) < 1e-12)
            return v;
    }
    REQUIRE(false);
    return -1;
}

} // namespace

TEST_CASE("weighted stiffness is symmetric") {
    const CylinderMesh mesh = build_cylinder_mesh(1, 8, 1.0, 8);
    const NodeClassification cls = classify_nodes(mesh);
    const CoefficientField field = log_uniform_random_field(1, {8, 0}, 100.0, 5);
    for (double a : {-0.6, 0.0, 0.6}) {
        const SparseMat K = assemble_weighted_stiffness(mesh, field, a);
        CHECK(max_abs_diff(K, SparseMat(K.transpose())) <= 1e-12 * max_abs(K));
        const SparseMat Kbc = assemble_weighted_stiffness(mesh, field, a, &cls);
        CHECK(max_abs_diff(Kbc, SparseMat(Kbc.transpose())) <= 1e-12 * max_abs(Kbc));
    }
}

TEST_CASE("weighted stiffness is elliptic on the dof space") {
    const CylinderMesh mesh = build_cylinder_mesh(1, 6, 1.0, 6);
    const NodeClassification cls = classify_nodes(mesh);
    const CoefficientField field = log_uniform_random_field(1, {6, 0}, 50.0, 2);
    const SparseMat K = assemble_weighted_stiffness(mesh, field, -0.2);
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 100; ++trial) {
        const Vector x = random_dof_vector(cls, mesh.num_vertices(), rng);
        CHECK(x.dot(K * x) > 0.0);
    }
}

TEST_CASE("Dirichlet rows and columns become identity") {
    const CylinderMesh mesh = build_cylinder_mesh(1, 4, 1.0, 4);
    const NodeClassification cls = classify_nodes(mesh);
    const CoefficientField field = constant_field(1, 2.0);
    const SparseMat K = assemble_weighted_stiffness(mesh, field, 0.4, &cls);
    for (Index v : cls.dirichlet) {
        for (SparseMat::InnerIterator it(K, v); it; ++it)
            CHECK(it.value() == (it.row() == v ? 1.0 : 0.0));
    }
}

TEST_CASE("coarse stiffness equals the Galerkin restriction of the fine one") {
    const CylinderMesh coarse = build_cylinder_mesh(1, 4, 1.0, 4);
    const CylinderMesh fine = refine(coarse, 2);
    // coefficient aligned to the coarse grid so both levels resolve it
    const CoefficientField field = parse_coefficient_spec("logrand:30:9", 1, 4);
    const SparseMat P = prolongation_matrix(coarse, fine);
    for (double a : {0.0, 0.6, -0.6}) {
        const SparseMat KH = assemble_weighted_stiffness(coarse, field, a);
        const SparseMat Kh = assemble_weighted_stiffness(fine, field, a);
        const SparseMat G = P.transpose() * Kh * P;
        CHECK(max_abs_diff(KH, G) <= 1e-10 * max_abs(KH));
    }
}

TEST_CASE("unit-coefficient unweighted stiffness has the five-point stencil") {
    // dx = dy and a = 0 reduce to the classical P1 Laplacian: diagonal 4,
    // zero row sums away from the boundary.
    const CylinderMesh mesh = build_cylinder_mesh(1, 4, 1.0, 4);
    const CoefficientField one = constant_field(1, 1.0);
    const SparseMat K = assemble_weighted_stiffness(mesh, one, 0.0);
    const Index v = vertex_at(mesh, 0.5, 0.5);
    CHECK(K.coeff(v, v) == doctest::Approx(4.0).epsilon(1e-12));
    double row_sum = 0.0;
    for (SparseMat::InnerIterator it(K, v); it; ++it) row_sum += it.value();
    CHECK(row_sum == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("energy matrix equals stiffness with unit coefficient") {
    const CylinderMesh mesh = build_cylinder_mesh(1, 4, 1.5, 6);
    const CoefficientField one = constant_field(1, 1.0);
    for (double a : {-0.4, 0.6}) {
        const SparseMat E = assemble_weighted_energy_matrix(mesh, a);
        const SparseMat K = assemble_weighted_stiffness(mesh, one, a);
        CHECK(max_abs_diff(E, K) <= 1e-13 * max_abs(K));
    }
}

TEST_CASE("weighted energy of the vertical coordinate") {
    // u = y has gradient (0,1): the squared energy is the weighted volume
    // integral of y^a, i.e. T^{a+1}/(a+1) on the unit-width cylinder.
    const CylinderMesh mesh = build_cylinder_mesh(1, 4, 1.0, 4);
    Vector u(mesh.num_vertices());
    for (Index v = 0; v < mesh.num_vertices(); ++v) u[v] = mesh.vertices[v][1];
    for (double a : {-0.6, 0.0, 0.6}) {
        const SparseMat E = assemble_weighted_energy_matrix(mesh, a);
        const double want = 1.0 / (1.0 + a);
        CHECK(weighted_energy_norm(E, u) == doctest::Approx(std::sqrt(want)).epsilon(1e-12));
        CHECK(weighted_energy_norm(E, 2.0 * u) ==
              doctest::Approx(2.0 * std::sqrt(want)).epsilon(1e-12));
    }
    CHECK(weighted_energy_norm(assemble_weighted_energy_matrix(mesh, 0.3),
                               Vector::Zero(mesh.num_vertices())) == 0.0);
}

TEST_CASE("element-restricted energy is additive") {
    const CylinderMesh mesh = build_cylinder_mesh(1, 4, 1.0, 4);
    const double a = 0.4;
    std::mt19937_64 rng(3);
    Vector u(mesh.num_vertices());
    for (Index v = 0; v < mesh.num_vertices(); ++v) u[v] = double(rng() >> 11) * 0x1.0p-53;
    std::vector<Index> first, second, all;
    for (Index e = 0; e < mesh.num_simplices(); ++e) {
        all.push_back(e);
        (e % 2 == 0 ? first : second).push_back(e);
    }
    const double full = weighted_energy_on_elements(mesh, all, a, u);
    const double split = weighted_energy_on_elements(mesh, first, a, u) +
                         weighted_energy_on_elements(mesh, second, a, u);
    CHECK(full == doctest::Approx(split).epsilon(1e-12));
    const SparseMat E = assemble_weighted_energy_matrix(mesh, a);
    CHECK(std::sqrt(full) == doctest::Approx(weighted_energy_norm(E, u)).epsilon(1e-12));
}

TEST_CASE("weighted mass matrix is symmetric positive definite") {
    const CylinderMesh mesh = build_cylinder_mesh(1, 4, 1.0, 4);
    const NodeClassification cls = classify_nodes(mesh);
    for (double a : {-0.6, 0.5}) {
        const SparseMat M = assemble_weighted_mass(mesh, a);
        CHECK(max_abs_diff(M, SparseMat(M.transpose())) <= 1e-13 * max_abs(M));
        // total weighted volume: hats sum to one
        const Vector ones = Vector::Ones(mesh.num_vertices());
        CHECK(ones.dot(M * ones) == doctest::Approx(1.0 / (1.0 + a)).epsilon(1e-12));
        std::mt19937_64 rng(7);
        for (int trial = 0; trial < 20; ++trial) {
            const Vector x = random_dof_vector(cls, mesh.num_vertices(), rng);
            CHECK(x.dot(M * x) > 0.0);
        }
    }
}

TEST_CASE("local weighted mass reduces to the classical P1 mass for a = 0") {
    const CylinderMesh mesh = build_cylinder_mesh(1, 4, 1.0, 4);
    const NodeClassification cls = classify_nodes(mesh);
    // an element whose vertices are all interior nodes
    Index elem = -1;
    for (Index e = 0; e < mesh.num_simplices() && elem < 0; ++e) {
        bool all_int = true;
        for (int t = 0; t < 3; ++t)
            if (cls.kind[mesh.simplices[e][t]] != NodeKind::interior) all_int = false;
        if (all_int) elem = e;
    }
    REQUIRE(elem >= 0);
    Patch patch;
    patch.center = mesh.simplices[elem][0];
    patch.elements = {elem};
    patch.nodes.assign(mesh.simplices[elem].begin(), mesh.simplices[elem].begin() + 3);
    std::sort(patch.nodes.begin(), patch.nodes.end());

    std::vector<Index> basis;
    const Eigen::MatrixXd M = assemble_weighted_mass_local(mesh, patch, 0.0, cls, basis);
    REQUIRE(basis.size() == 3);
    REQUIRE(M.rows() == 3);
    const double vol = mesh.simplex_volume(elem);
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            const double want = vol * (i == j ? 2.0 : 1.0) / 12.0;
            CHECK(M(i, j) == doctest::Approx(want).epsilon(1e-12));
        }
    }
}

TEST_CASE("local weighted mass matches direct quadrature of hat products") {
    const CylinderMesh mesh = build_cylinder_mesh(1, 4, 1.0, 4);
    const NodeClassification cls = classify_nodes(mesh);
    const auto inc = vertex_incidence(mesh);
    const Index center = vertex_at(mesh, 0.5, 0.5);
    const Patch patch = build_patch(mesh, inc, center, 0);
    const double a = 0.6;
    std::vector<Index> basis;
    const Eigen::MatrixXd M = assemble_weighted_mass_local(mesh, patch, a, cls, basis);
    REQUIRE(std::size_t(M.rows()) == basis.size());
    CHECK((M - Eigen::MatrixXd(M.transpose())).cwiseAbs().maxCoeff() <=
          1e-13 * M.cwiseAbs().maxCoeff());
    Eigen::MatrixXd direct = Eigen::MatrixXd::Zero(M.rows(), M.cols());
    for (Index e : patch.elements) {
        const SimplexRule rule = weighted_simplex_quadrature(mesh, e, a, 2);
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const auto lam = barycentric_coordinates(mesh, e, rule.points[q]);
            for (std::size_t i = 0; i < basis.size(); ++i) {
                double li = 0.0;
                for (int t = 0; t < 3; ++t)
                    if (mesh.simplices[e][t] == basis[i]) li = lam[t];
                if (li == 0.0) continue;
                for (std::size_t j = 0; j < basis.size(); ++j) {
                    double lj = 0.0;
                    for (int t = 0; t < 3; ++t)
                        if (mesh.simplices[e][t] == basis[j]) lj = lam[t];
                    direct(i, j) += rule.weights[q] * li * lj;
                }
            }
        }
    }
    CHECK((M - direct).cwiseAbs().maxCoeff() <= 1e-13 * M.cwiseAbs().maxCoeff());
}

TEST_CASE("trace load of the constant density integrates to c_s") {
    for (int d : {1, 2}) {
        const CylinderMesh mesh = build_cylinder_mesh(d, d == 1 ? 8 : 4, 1.0, d == 1 ? 8 : 4);
        const FractionalOrder order = extension_constant(0.3);
        const Vector load = assemble_trace_load(mesh, [](const std::array<double, 2>&) {
            return 1.0;
        }, order);
        CHECK(load.sum() == doctest::Approx(order.c_s).epsilon(1e-12));
        for (Index v = 0; v < mesh.num_vertices(); ++v)
            if (mesh.vertices[v][d] > 0.0) CHECK(load[v] == 0.0);
    }
}

TEST_CASE("trace load is stable under quadrature refinement") {
    const CylinderMesh mesh = build_cylinder_mesh(1, 8, 1.0, 8);
    const FractionalOrder order = extension_constant(0.45);
    const auto f = [](const std::array<double, 2>& x) { return std::sin(3.14159265358979 * x[0]); };
    const Vector l4 = assemble_trace_load(mesh, f, order, 4);
    const Vector l8 = assemble_trace_load(mesh, f, order, 8);
    CHECK((l4 - l8).cwiseAbs().maxCoeff() <= 1e-10 * l4.cwiseAbs().maxCoeff());
}

TEST_CASE("trace load equals c_s times the trace moment vector on trace dofs") {
    const CylinderMesh mesh = build_cylinder_mesh(1, 8, 1.0, 8);
    const NodeClassification cls = classify_nodes(mesh);
    const FractionalOrder order = extension_constant(0.7);
    const auto f = [](const std::array<double, 2>& x) { return 1.0 + x[0] * x[0]; };
    const Vector load = assemble_trace_load(mesh, f, order, 4);
    const Vector mom = trace_moment_vector(mesh, f, 4);
    for (Index v : cls.trace)
        CHECK(load[v] == doctest::Approx(order.c_s * mom[v]).epsilon(1e-13));
}

TEST_CASE("prolongation reproduces affine functions and the constant") {
    const CylinderMesh coarse = build_cylinder_mesh(1, 3, 1.0, 3);
    const CylinderMesh fine = refine(coarse, 3);
    const SparseMat P = prolongation_matrix(coarse, fine);
    CHECK(P.rows() == fine.num_vertices());
    CHECK(P.cols() == coarse.num_vertices());
    Vector gc(coarse.num_vertices()), gf(fine.num_vertices());
    for (Index v = 0; v < coarse.num_vertices(); ++v)
        gc[v] = 1.0 + 2.0 * coarse.vertices[v][0] - 3.0 * coarse.vertices[v][1];
    for (Index v = 0; v < fine.num_vertices(); ++v)
        gf[v] = 1.0 + 2.0 * fine.vertices[v][0] - 3.0 * fine.vertices[v][1];
    CHECK((P * gc - gf).cwiseAbs().maxCoeff() <= 1e-13);
    CHECK_THROWS_AS(prolongation_matrix(coarse, build_cylinder_mesh(1, 9, 1.0, 9)),
                    std::invalid_argument);
}
