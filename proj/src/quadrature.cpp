#include "fraclod/quadrature.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fraclod {

namespace {

// Nodes and weights from a monic three-term recurrence: alpha holds the
// diagonal, beta2 the squared off-diagonal entries, mass the zeroth moment.
Rule1d golub_welsch(const std::vector<double>& alpha, const std::vector<double>& beta2,
                    double mass) {
    const int n = static_cast<int>(alpha.size());
    Eigen::VectorXd diag(n), sub(n > 1 ? n - 1 : 1);
    for (int i = 0; i < n; ++i) diag[i] = alpha[i];
    for (int i = 0; i + 1 < n; ++i) {
        if (!(beta2[i] > 0.0))
            throw std::runtime_error("golub_welsch: nonpositive recurrence coefficient");
        sub[i] = std::sqrt(beta2[i]);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub.head(std::max(n - 1, 0)),
                              Eigen::ComputeEigenvectors);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("golub_welsch: tridiagonal eigensolve failed");
    Rule1d rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        rule.nodes[i] = es.eigenvalues()[i];
        const double q0 = es.eigenvectors()(0, i);
        rule.weights[i] = mass * q0 * q0;
    }
    return rule;
}

// Monic recurrence coefficients from monomial moments (Chebyshev algorithm).
Rule1d rule_from_moments(const std::vector<double>& m, int n) {
    std::vector<double> alpha(n), beta2(n);
    alpha[0] = m[1] / m[0];
    beta2[0] = 0.0;
    std::vector<double> sig_prev(2 * n, 0.0), sig_cur(m.begin(), m.end()), sig_next(2 * n, 0.0);
    for (int k = 1; k < n; ++k) {
        for (int l = k; l <= 2 * n - k - 1; ++l) {
            sig_next[l] = sig_cur[l + 1] - alpha[k - 1] * sig_cur[l] -
                          (k >= 2 ? beta2[k - 1] * sig_prev[l] : 0.0);
        }
        alpha[k] = sig_next[k + 1] / sig_next[k] - sig_cur[k] / sig_cur[k - 1];
        beta2[k] = sig_next[k] / sig_cur[k - 1];
        sig_prev = sig_cur;
        sig_cur = sig_next;
    }
    std::vector<double> off(beta2.begin() + 1, beta2.end());
    return golub_welsch(alpha, off, m[0]);
}

struct SlabEdge {
    Point lo;
    Point hi;
    double ylo, yhi;

    Point at(double y) const {
        const double t = (y - ylo) / (yhi - ylo);
        Point p;
        for (int k = 0; k < 3; ++k) p[k] = lo[k] + t * (hi[k] - lo[k]);
        return p;
    }
};

double cross_z(double ax, double ay, double bx, double by) { return ax * by - ay * bx; }

} // namespace

Rule1d jacobi_rule_1d(double a, int n) {
    if (!(a > -1.0 && a < 1.0)) throw std::domain_error("jacobi_rule_1d: need |a| < 1");
    if (n < 1) throw std::invalid_argument("jacobi_rule_1d: need n >= 1");
    std::vector<double> alpha(n), beta2(n > 1 ? n - 1 : 0);
    alpha[0] = (a / (a + 2.0) + 1.0) / 2.0;
    for (int k = 1; k < n; ++k) {
        const double den = (2.0 * k + a) * (2.0 * k + a + 2.0);
        alpha[k] = (a * a / den + 1.0) / 2.0;
        const double t = 2.0 * k * (k + a) / (2.0 * k + a);
        beta2[k - 1] = t * t / ((2.0 * k + a + 1.0) * (2.0 * k + a - 1.0)) / 4.0;
    }
    return golub_welsch(alpha, beta2, 1.0 / (1.0 + a));
}

Rule1d gauss_legendre_1d(int n) { return jacobi_rule_1d(0.0, n); }

Rule1d shifted_power_rule_1d(double a, double c, int n) {
    if (!(a > -1.0)) throw std::domain_error("shifted_power_rule_1d: need a > -1");
    if (!(c > 0.0)) throw std::domain_error("shifted_power_rule_1d: need c > 0");
    if (n < 1) throw std::invalid_argument("shifted_power_rule_1d: need n >= 1");

    if (c >= 4.0) {
        // Weight is analytic with a distant singularity; Legendre points with
        // the weight folded in stay below 1e-13 relative error from n = 6 on.
        Rule1d rule = gauss_legendre_1d(std::max(n, 6));
        for (std::size_t i = 0; i < rule.nodes.size(); ++i)
            rule.weights[i] *= std::pow(c + rule.nodes[i], a);
        return rule;
    }

    // Closed-form moments of (c+y)^a on (0,1).
    std::vector<double> m(2 * n + 1);
    const double up = std::pow(1.0 + c, a + 1.0);
    m[0] = (up - std::pow(c, a + 1.0)) / (a + 1.0);
    for (int k = 1; k <= 2 * n; ++k) m[k] = (up - k * c * m[k - 1]) / (a + 1.0 + k);
    m.resize(2 * n);
    return rule_from_moments(m, n);
}

SimplexRule weighted_simplex_quadrature(const std::vector<Point>& verts, int d,
                                        double a, int degree) {
    if (d != 1 && d != 2) throw std::invalid_argument("weighted_simplex_quadrature: d must be 1 or 2");
    const int nv = d + 2;
    if (static_cast<int>(verts.size()) != nv)
        throw std::invalid_argument("weighted_simplex_quadrature: wrong vertex count");
    if (!(a > -1.0)) throw std::domain_error("weighted_simplex_quadrature: need a > -1");
    if (degree < 0) throw std::invalid_argument("weighted_simplex_quadrature: degree < 0");

    double ymax = 0.0;
    for (const auto& p : verts) ymax = std::max(ymax, std::abs(p[d]));
    const double tol = 1e-12 * std::max(1.0, ymax);
    for (const auto& p : verts) {
        if (p[d] < -tol)
            throw std::domain_error("weighted_simplex_quadrature: vertex below y = 0");
    }

    // Distinct vertex levels.
    std::vector<double> levels;
    for (const auto& p : verts) levels.push_back(std::max(p[d], 0.0));
    std::sort(levels.begin(), levels.end());
    std::vector<double> eta;
    for (double y : levels) {
        if (eta.empty() || y - eta.back() > tol) eta.push_back(y);
    }
    if (eta.size() < 2)
        throw std::domain_error("weighted_simplex_quadrature: degenerate simplex (flat in y)");

    const int n_u = (degree + 3) / 2;
    const int n_v = (degree + 4) / 2;
    const Rule1d gl = gauss_legendre_1d(n_u);

    SimplexRule rule;
    rule.weight_exponent = a;
    rule.exactness_degree = degree;

    for (std::size_t sl = 0; sl + 1 < eta.size(); ++sl) {
        const double eta0 = eta[sl];
        const double eta1 = eta[sl + 1];
        const double delta = eta1 - eta0;

        // Simplex edges spanning the whole slab.
        std::vector<SlabEdge> edges;
        for (int i = 0; i < nv; ++i) {
            for (int j = i + 1; j < nv; ++j) {
                const double yi = verts[i][d];
                const double yj = verts[j][d];
                const Point& pi = verts[i];
                const Point& pj = verts[j];
                const double lo = std::min(yi, yj);
                const double hi = std::max(yi, yj);
                if (lo <= eta0 + tol && hi >= eta1 - tol) {
                    if (yi <= yj)
                        edges.push_back({pi, pj, yi, yj});
                    else
                        edges.push_back({pj, pi, yj, yi});
                }
            }
        }
        const int expected_min = d + 1;
        if (static_cast<int>(edges.size()) < expected_min || edges.size() > 4)
            throw std::runtime_error("weighted_simplex_quadrature: malformed slab cross-section");

        // Fix corner order using the slab midpoint; cross-sections of a
        // simplex are convex, so an angular sort yields a proper cyclic order.
        const double ymid = 0.5 * (eta0 + eta1);
        std::vector<Point> mid;
        for (const auto& e : edges) mid.push_back(e.at(ymid));
        std::vector<int> order(edges.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
        if (d == 2 && edges.size() >= 3) {
            double cx = 0.0, cy = 0.0;
            for (const auto& p : mid) {
                cx += p[0];
                cy += p[1];
            }
            cx /= mid.size();
            cy /= mid.size();
            std::sort(order.begin(), order.end(), [&](int i, int j) {
                return std::atan2(mid[i][1] - cy, mid[i][0] - cx) <
                       std::atan2(mid[j][1] - cy, mid[j][0] - cx);
            });
        }

        // v-direction rule carrying the weight y^a, y = eta0 + v*delta.
        Rule1d vr;
        double scale = std::pow(delta, a) * delta;
        if (eta0 <= tol) {
            vr = jacobi_rule_1d(a, n_v);
        } else {
            vr = shifted_power_rule_1d(a, eta0 / delta, n_v);
        }

        auto corner = [&](int m, double y) {
            return edges[order[std::min<std::size_t>(m, order.size() - 1)]].at(y);
        };

        if (d == 1) {
            for (std::size_t iv = 0; iv < vr.nodes.size(); ++iv) {
                const double y = eta0 + vr.nodes[iv] * delta;
                const Point c0 = corner(0, y);
                const Point c1 = corner(1, y);
                const double jx = c1[0] - c0[0];
                for (std::size_t iu = 0; iu < gl.nodes.size(); ++iu) {
                    const double u = gl.nodes[iu];
                    Point p = {c0[0] + u * jx, y, 0.0};
                    const double w = gl.weights[iu] * vr.weights[iv] * std::abs(jx) * scale;
                    rule.points.push_back(p);
                    rule.weights.push_back(w);
                }
            }
        } else {
            // Bilinear map over corners [Q00, Q10, Q11, Q01]; a triangular
            // cross-section repeats the last corner.
            auto quad_at = [&](double y) {
                std::array<Point, 4> q;
                q[0] = corner(0, y);
                q[1] = corner(1, y);
                q[2] = corner(2, y);
                q[3] = corner(edges.size() == 4 ? 3 : 2, y);
                return q;
            };
            // Orientation from the slab center.
            const auto qm = quad_at(ymid);
            const double jmid =
                cross_z(0.5 * (qm[1][0] - qm[0][0] + qm[2][0] - qm[3][0]),
                        0.5 * (qm[1][1] - qm[0][1] + qm[2][1] - qm[3][1]),
                        0.5 * (qm[3][0] - qm[0][0] + qm[2][0] - qm[1][0]),
                        0.5 * (qm[3][1] - qm[0][1] + qm[2][1] - qm[1][1]));
            const double sigma = jmid >= 0.0 ? 1.0 : -1.0;

            for (std::size_t iv = 0; iv < vr.nodes.size(); ++iv) {
                const double y = eta0 + vr.nodes[iv] * delta;
                const auto q = quad_at(y);
                for (std::size_t i2 = 0; i2 < gl.nodes.size(); ++i2) {
                    const double u2 = gl.nodes[i2];
                    for (std::size_t i1 = 0; i1 < gl.nodes.size(); ++i1) {
                        const double u1 = gl.nodes[i1];
                        const double b00 = (1 - u1) * (1 - u2), b10 = u1 * (1 - u2);
                        const double b11 = u1 * u2, b01 = (1 - u1) * u2;
                        Point p = {b00 * q[0][0] + b10 * q[1][0] + b11 * q[2][0] + b01 * q[3][0],
                                   b00 * q[0][1] + b10 * q[1][1] + b11 * q[2][1] + b01 * q[3][1],
                                   y};
                        const double du1x = (1 - u2) * (q[1][0] - q[0][0]) + u2 * (q[2][0] - q[3][0]);
                        const double du1y = (1 - u2) * (q[1][1] - q[0][1]) + u2 * (q[2][1] - q[3][1]);
                        const double du2x = (1 - u1) * (q[3][0] - q[0][0]) + u1 * (q[2][0] - q[1][0]);
                        const double du2y = (1 - u1) * (q[3][1] - q[0][1]) + u1 * (q[2][1] - q[1][1]);
                        const double jx = sigma * cross_z(du1x, du1y, du2x, du2y);
                        const double w = gl.weights[i1] * gl.weights[i2] * vr.weights[iv] * jx * scale;
                        rule.points.push_back(p);
                        rule.weights.push_back(w);
                    }
                }
            }
        }
    }
    return rule;
}

SimplexRule weighted_simplex_quadrature(const CylinderMesh& mesh, Index e, double a,
                                        int degree) {
    std::vector<Point> verts;
    const int nv = mesh.nverts_per_simplex();
    verts.reserve(nv);
    for (int k = 0; k < nv; ++k) verts.push_back(mesh.vertices[mesh.simplices[e][k]]);
    return weighted_simplex_quadrature(verts, mesh.d, a, degree);
}

double muckenhoupt_ratio(double y0, double y1, double a) {
    if (!(y1 > y0) || y0 < 0.0)
        throw std::domain_error("muckenhoupt_ratio: need 0 <= y0 < y1");
    if (!(a > -1.0 && a < 1.0))
        throw std::domain_error("muckenhoupt_ratio: need |a| < 1");
    auto mean_pow = [&](double p) {
        return (std::pow(y1, p + 1.0) - std::pow(y0, p + 1.0)) / ((p + 1.0) * (y1 - y0));
    };
    return mean_pow(a) * mean_pow(-a);
}

double muckenhoupt_ratio(const CylinderMesh& mesh, const std::vector<Index>& elements,
                         double a) {
    if (elements.empty()) throw std::invalid_argument("muckenhoupt_ratio: empty patch");
    if (!(a > -1.0 && a < 1.0))
        throw std::domain_error("muckenhoupt_ratio: need |a| < 1");
    double vol = 0.0, wp = 0.0, wm = 0.0;
    for (Index e : elements) {
        vol += mesh.simplex_volume(e);
        for (double w : weighted_simplex_quadrature(mesh, e, a, 0).weights) wp += w;
        for (double w : weighted_simplex_quadrature(mesh, e, -a, 0).weights) wm += w;
    }
    return (wp / vol) * (wm / vol);
}

} // namespace fraclod
