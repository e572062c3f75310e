#pragma once

#include <vector>

#include "fraclod/mesh.hpp"

namespace fraclod {

// Rule on the interval (0,1); weights already include the weight function.
struct Rule1d {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Weighted rule on a simplex in physical coordinates. Weights absorb the
// factor y^a: integral f(x,y) y^a dV ~ sum_q w_q f(p_q).
struct SimplexRule {
    std::vector<Point> points;
    std::vector<double> weights;
    double weight_exponent = 0.0;
    int exactness_degree = 0;
};

// Gauss rule for the weight y^a on (0,1), a > -1, from the shifted Jacobi
// recurrence via Golub-Welsch. a = 0 yields Gauss-Legendre.
Rule1d jacobi_rule_1d(double a, int n);

Rule1d gauss_legendre_1d(int n);

// Gauss rule for the weight (c+y)^a on (0,1), c > 0, exact for polynomials
// of degree 2n-1. Built from closed-form moments for small c, Legendre
// points with the smooth weight folded in for large c.
Rule1d shifted_power_rule_1d(double a, double c, int n);

// Rule exact to `degree` for integrand * y^a over a simplex whose vertices
// all have y >= 0. The slab between consecutive vertex levels is mapped to
// a tensor domain where y depends on one coordinate only, so the weighted
// direction separates and Gauss-Jacobi applies when the slab touches y = 0.
SimplexRule weighted_simplex_quadrature(const std::vector<Point>& verts, int d,
                                        double a, int degree);

SimplexRule weighted_simplex_quadrature(const CylinderMesh& mesh, Index e,
                                        double a, int degree);

// Muckenhoupt A2 ratio (avg of y^a)(avg of y^-a) for a box [..] x [y0, y1].
double muckenhoupt_ratio(double y0, double y1, double a);

// Same ratio over a mesh patch (union of elements).
double muckenhoupt_ratio(const CylinderMesh& mesh, const std::vector<Index>& elements,
                         double a);

} // namespace fraclod
