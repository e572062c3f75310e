#pragma once

namespace fraclod {

// Bundle of constants attached to a fractional power s in (0,1):
// the extension weight exponent a = 1 - 2s and the Neumann coupling
// constant c_s = 2^{1-2s} Gamma(1-s) / Gamma(s).
struct FractionalOrder {
    double s;
    double a;
    double c_s;
};

// Gamma function for x > 0. Throws std::domain_error otherwise.
double gamma_positive(double x);

// Modified Bessel function of the second kind K_nu(x) for order
// nu in [0,1) and x > 0. Series/Temme method for x <= 2, continued
// fraction with asymptotic scaling for x > 2.
double bessel_k(double nu, double x);

// Modified Bessel function of the first kind I_nu(x) for nu >= 0,
// x >= 0, by the ascending power series.
double bessel_i(double nu, double x);

// Builds the FractionalOrder record for s in (0,1).
FractionalOrder extension_constant(double s);

} // namespace fraclod
