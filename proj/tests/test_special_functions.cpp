#include "doctest.h"

#include "fraclod/special_functions.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

using namespace fraclod;

namespace {

constexpr double kPi = 3.14159265358979323846;

double rel_err(double got, double want) { return std::abs(got - want) / std::abs(want); }

} // namespace

TEST_CASE("gamma_positive matches reference values") {
    CHECK(gamma_positive(1.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(gamma_positive(2.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(gamma_positive(5.0) == doctest::Approx(24.0).epsilon(1e-14));
    CHECK(rel_err(gamma_positive(0.5), std::sqrt(kPi)) < 1e-14);
    CHECK(rel_err(gamma_positive(0.8), 1.164229713725303373636) < 1e-12);
    CHECK(rel_err(gamma_positive(0.2), 4.590843711998803053205) < 1e-12);
    CHECK(rel_err(gamma_positive(0.1), 9.513507698668731836292) < 1e-12);
    CHECK(rel_err(gamma_positive(2.5), 1.329340388179137020474) < 1e-12);
    CHECK(rel_err(gamma_positive(5.5), 52.34277778455352018115) < 1e-12);
    CHECK(rel_err(gamma_positive(10.3), 716430.6890623752445476) < 1e-12);
}

TEST_CASE("gamma_positive recurrence Gamma(x+1) = x Gamma(x)") {
    for (double x : {0.1, 0.37, 0.8, 1.6, 3.3, 7.7}) {
        CHECK(rel_err(gamma_positive(x + 1.0), x * gamma_positive(x)) < 1e-13);
    }
}

TEST_CASE("gamma_positive rejects nonpositive arguments") {
    CHECK_THROWS_AS(gamma_positive(0.0), std::domain_error);
    CHECK_THROWS_AS(gamma_positive(-1.5), std::domain_error);
}

TEST_CASE("bessel_k half-integer order closed form") {
    // K_{1/2}(x) = sqrt(pi/(2x)) exp(-x)
    for (double x : {0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 30.0}) {
        const double want = std::sqrt(kPi / (2.0 * x)) * std::exp(-x);
        CHECK(rel_err(bessel_k(0.5, x), want) < 1e-12);
    }
    CHECK(rel_err(bessel_k(0.5, 1.0), 0.4610685044478945584396) < 1e-12);
    CHECK(rel_err(bessel_k(0.5, 2.0), 0.119937771968061447368) < 1e-12);
}

TEST_CASE("bessel_k matches reference values across the order range") {
    CHECK(rel_err(bessel_k(0.0, 1.0), 0.4210244382407083333356) < 1e-12);
    CHECK(rel_err(bessel_k(0.2, 1.0), 0.4272199951367349915133) < 1e-12);
    CHECK(rel_err(bessel_k(0.8, 1.0), 0.5301919015031991333586) < 1e-12);
    CHECK(rel_err(bessel_k(0.2, 0.001), 9.860620951098158860808) < 1e-12);
    CHECK(rel_err(bessel_k(0.3, 0.001), 14.40654752904102796143) < 1e-12);
    CHECK(rel_err(bessel_k(0.6, 0.5), 1.147536289420273267476) < 1e-12);
    // x > 2 exercises the continued-fraction branch.
    CHECK(rel_err(bessel_k(0.2, 2.0), 0.1148418755182362166658) < 1e-12);
    CHECK(rel_err(bessel_k(0.45, 2.0), 0.1187674441413288379921) < 1e-12);
    CHECK(rel_err(bessel_k(0.55, 2.0), 0.1212435045461005807672) < 1e-12);
    CHECK(rel_err(bessel_k(0.8, 2.0), 0.1299515575669897324292) < 1e-12);
    CHECK(rel_err(bessel_k(0.7, 2.5), 0.06777798985757463379824) < 1e-12);
    CHECK(rel_err(bessel_k(0.9, 10.0), 0.00001848060434410218836847) < 1e-12);
    CHECK(rel_err(bessel_k(0.999, 3.0), 0.04014485863714827928599) < 1e-12);
    CHECK(rel_err(bessel_k(0.2, 30.0), 2.133876720547502804591e-14) < 1e-12);
    CHECK(rel_err(bessel_k(0.2, 50.0), 3.411518728419645391821e-23) < 1e-12);
    CHECK(rel_err(bessel_k(0.8, 50.0), 3.431847337201484192991e-23) < 1e-12);
}

TEST_CASE("bessel_k symmetry in the order near nu = 1/2") {
    // K_nu = K_{-nu}; the reflection used for nu > 1/2 must keep the value
    // continuous across the switch.
    CHECK(rel_err(bessel_k(0.49999999, 1.3), bessel_k(0.5, 1.3)) < 1e-7);
    CHECK(rel_err(bessel_k(0.50000001, 1.3), bessel_k(0.5, 1.3)) < 1e-7);
}

TEST_CASE("bessel_k large-argument asymptotics") {
    // K_nu(x) ~ sqrt(pi/(2x)) e^{-x}: the scaled ratio is within 1% at x=50.
    for (double nu : {0.2, 0.5, 0.8}) {
        const double x = 50.0;
        const double ratio = bessel_k(nu, x) * std::sqrt(2.0 * x / kPi) * std::exp(x);
        CHECK(std::abs(ratio - 1.0) < 0.01);
    }
}

TEST_CASE("bessel_k small-argument limit") {
    // 2/Gamma(s) (z/2)^s K_s(z) -> 1 as z -> 0. The deviation scales like
    // z^{2s}, so the smallest order needs a smaller z to reach 1e-4.
    for (double s : {0.5, 0.8}) {
        const double z = 1e-6;
        const double lim = 2.0 / gamma_positive(s) * std::pow(z / 2.0, s) * bessel_k(s, z);
        CHECK(std::abs(lim - 1.0) < 1e-4);
    }
    {
        const double s = 0.2, z = 1e-11;
        const double lim = 2.0 / gamma_positive(s) * std::pow(z / 2.0, s) * bessel_k(s, z);
        CHECK(std::abs(lim - 1.0) < 1e-4);
    }
}

TEST_CASE("bessel_k rejects arguments outside its domain") {
    CHECK_THROWS_AS(bessel_k(-0.1, 1.0), std::domain_error);
    CHECK_THROWS_AS(bessel_k(1.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(bessel_k(0.5, 0.0), std::domain_error);
    CHECK_THROWS_AS(bessel_k(0.5, -2.0), std::domain_error);
}

TEST_CASE("bessel_i reference values and limits") {
    CHECK(bessel_i(0.0, 0.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(bessel_i(0.7, 0.0) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(rel_err(bessel_i(0.2, 1.0), 1.157186488690116036868) < 1e-12);
    CHECK(rel_err(bessel_i(0.5, 2.0), 2.046236863089055036605) < 1e-12);
    CHECK(rel_err(bessel_i(0.8, 0.5), 0.3666153402142315606676) < 1e-12);
    CHECK(rel_err(bessel_i(1.2, 3.0), 3.62304446983584100193) < 1e-12);
    CHECK(rel_err(bessel_i(0.3, 1e-4), 0.05710455150763785606546) < 1e-12);
    // I_{1/2}(x) = sqrt(2/(pi x)) sinh(x)
    for (double x : {0.3, 1.0, 2.5}) {
        const double want = std::sqrt(2.0 / (kPi * x)) * std::sinh(x);
        CHECK(rel_err(bessel_i(0.5, x), want) < 1e-12);
    }
}

TEST_CASE("bessel_i rejects arguments outside its domain") {
    CHECK_THROWS_AS(bessel_i(-0.2, 1.0), std::domain_error);
    CHECK_THROWS_AS(bessel_i(0.5, -1.0), std::domain_error);
}

TEST_CASE("wronskian identity K_nu I_nu' + K_nu' I_nu = 1/x") {
    // Central-difference derivatives: checks K and I against each other.
    for (double nu : {0.2, 0.45, 0.8}) {
        for (double x : {0.5, 1.0, 1.7}) {
            const double eps = 1e-6;
            const double dI = (bessel_i(nu, x + eps) - bessel_i(nu, x - eps)) / (2 * eps);
            const double dK = (bessel_k(nu, x + eps) - bessel_k(nu, x - eps)) / (2 * eps);
            const double w = bessel_i(nu, x) * dK - bessel_k(nu, x) * dI;
            CHECK(std::abs(w + 1.0 / x) < 1e-8);
        }
    }
}

TEST_CASE("extension_constant fields and reference values") {
    const FractionalOrder half = extension_constant(0.5);
    CHECK(half.s == 0.5);
    CHECK(half.a == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(half.c_s == doctest::Approx(1.0).epsilon(1e-15));

    CHECK(rel_err(extension_constant(0.2).c_s, 0.3843829968998867535593) < 1e-12);
    CHECK(rel_err(extension_constant(0.8).c_s, 2.601571890705799892152) < 1e-12);
    CHECK(rel_err(extension_constant(0.37).c_s, 0.7095528686459611635686) < 1e-12);
    CHECK(extension_constant(0.3).a == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(extension_constant(0.9).a == doctest::Approx(-0.8).epsilon(1e-15));
}

TEST_CASE("extension_constant reflection identity") {
    // c_s = 2^{1-2s} pi / (sin(pi s) Gamma(s)^2), from Gamma(1-s)Gamma(s) =
    // pi / sin(pi s).
    for (int i = 1; i <= 50; ++i) {
        const double s = i / 51.0;
        const double g = gamma_positive(s);
        const double want = std::exp2(1.0 - 2.0 * s) * kPi / (std::sin(kPi * s) * g * g);
        CHECK(rel_err(extension_constant(s).c_s, want) < 1e-12);
    }
}

TEST_CASE("extension_constant rejects s outside (0,1)") {
    CHECK_THROWS_AS(extension_constant(0.0), std::domain_error);
    CHECK_THROWS_AS(extension_constant(1.0), std::domain_error);
    CHECK_THROWS_AS(extension_constant(-0.2), std::domain_error);
    CHECK_THROWS_AS(extension_constant(1.7), std::domain_error);
}
