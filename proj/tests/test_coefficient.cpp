#include "doctest.h"

#include "fraclod/coefficient.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

using namespace fraclod;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream out(path);
    out << content;
    out.close();
    return path.string();
}

// Spells out the trace-point overload of sample.
std::array<double, 2> pt(double x1, double x2) { return {x1, x2}; }

} // namespace

TEST_CASE("constant_field fills the grid with one value") {
    const CoefficientField f = constant_field(1, 2.5);
    CHECK(f.d == 1);
    CHECK(f.alpha == 2.5);
    CHECK(f.beta == 2.5);
    CHECK(f.sample(pt(0.0, 0.0)) == 2.5);
    CHECK(f.sample(pt(0.37, 0.0)) == 2.5);
    CHECK(f.sample(pt(1.0, 0.0)) == 2.5);

    const CoefficientField g = constant_field(2, {3, 5}, 0.25);
    CHECK(g.values.size() == 15);
    CHECK(g.sample(pt(0.9, 0.1)) == 0.25);
    CHECK_THROWS_AS(constant_field(1, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(constant_field(1, -2.0), std::invalid_argument);
    CHECK_THROWS_AS(constant_field(3, 1.0), std::invalid_argument);
}

TEST_CASE("sample picks cells with boundary ties going down") {
    CoefficientField f;
    f.d = 1;
    f.shape = {2, 0};
    f.values = {1.0, 10.0};
    f.alpha = 1.0;
    f.beta = 10.0;
    CHECK(f.sample(pt(0.25, 0.0)) == 1.0);
    CHECK(f.sample(pt(0.75, 0.0)) == 10.0);
    // ties at the cell boundary resolve to the lower cell
    CHECK(f.sample(pt(0.5, 0.0)) == 1.0);
    CHECK(f.sample(pt(0.0, 0.0)) == 1.0);
    CHECK(f.sample(pt(1.0, 0.0)) == 10.0);
}

TEST_CASE("sample rejects points outside the unit box") {
    const CoefficientField f = constant_field(2, {2, 2}, 1.0);
    CHECK_THROWS_AS(f.sample(pt(-0.2, 0.5)), std::domain_error);
    CHECK_THROWS_AS(f.sample(pt(0.5, 1.2)), std::domain_error);
    // d = 1 ignores the second component entirely
    const CoefficientField g = constant_field(1, 1.0);
    CHECK(g.sample(pt(0.5, 7.0)) == 1.0);
}

TEST_CASE("sample is row-major with the last axis fastest") {
    CoefficientField f;
    f.d = 2;
    f.shape = {2, 2};
    f.values = {1.0, 2.0, 3.0, 4.0}; // rows: x1 in {lo,hi}, cols: x2
    f.alpha = 1.0;
    f.beta = 4.0;
    CHECK(f.sample(pt(0.25, 0.25)) == 1.0);
    CHECK(f.sample(pt(0.25, 0.75)) == 2.0);
    CHECK(f.sample(pt(0.75, 0.25)) == 3.0);
    CHECK(f.sample(pt(0.75, 0.75)) == 4.0);
}

TEST_CASE("load_raster reads one- and two-dimensional grids") {
    const std::string p1 = write_temp("fraclod_r1.txt", "4\n1 2 3 4\n");
    const CoefficientField f1 = load_raster(p1);
    CHECK(f1.d == 1);
    CHECK(f1.shape[0] == 4);
    CHECK(f1.alpha == 1.0);
    CHECK(f1.beta == 4.0);
    CHECK(f1.sample(pt(0.1, 0.0)) == 1.0);
    CHECK(f1.sample(pt(0.9, 0.0)) == 4.0);

    const std::string p2 = write_temp("fraclod_r2.txt", "2 2\n1 2\n3 4\n");
    const CoefficientField f2 = load_raster(p2);
    CHECK(f2.d == 2);
    CHECK(f2.alpha == 1.0);
    CHECK(f2.beta == 4.0);
    CHECK(f2.sample(pt(0.25, 0.75)) == 2.0);
    std::remove(p1.c_str());
    std::remove(p2.c_str());
}

TEST_CASE("load_raster reports the offending line") {
    auto expect_line = [](const std::string& name, const std::string& content,
                          const std::string& needle) {
        const std::string p = write_temp(name, content);
        bool threw = false;
        try {
            load_raster(p);
        } catch (const std::exception& err) {
            threw = true;
            CHECK(std::string(err.what()).find(needle) != std::string::npos);
        }
        CHECK(threw);
        std::remove(p.c_str());
    };
    expect_line("fraclod_bad1.txt", "2\n1 -3\n", "line 2");
    expect_line("fraclod_bad2.txt", "0\n", "line 1");
    expect_line("fraclod_bad3.txt", "2\n1 2 3\n", "line 2");
    expect_line("fraclod_bad4.txt", "2\nabc 1\n", "line 2");
    // a short file is only detected at the end, so the message counts values
    expect_line("fraclod_bad5.txt", "2 2\n1 2\n", "expected 4 values");
    CHECK_THROWS_AS(load_raster("/nonexistent/fraclod_nofile.txt"), std::exception);
}

TEST_CASE("log-uniform random fields are bounded and reproducible") {
    const CoefficientField f = log_uniform_random_field(1, {64, 0}, 1e4, 7);
    CHECK(f.values.size() == 64);
    for (double v : f.values) {
        CHECK(v >= 1.0);
        CHECK(v <= 1e4);
    }
    CHECK(f.beta / f.alpha <= 1e4);
    const CoefficientField g = log_uniform_random_field(1, {64, 0}, 1e4, 7);
    for (std::size_t i = 0; i < f.values.size(); ++i) CHECK(f.values[i] == g.values[i]);
    const CoefficientField h = log_uniform_random_field(1, {64, 0}, 1e4, 8);
    bool differs = false;
    for (std::size_t i = 0; i < f.values.size(); ++i)
        if (f.values[i] != h.values[i]) differs = true;
    CHECK(differs);
}

TEST_CASE("log-uniform field with contrast one is constant") {
    const CoefficientField f = log_uniform_random_field(2, {4, 4}, 1.0, 3);
    for (double v : f.values) CHECK(v == 1.0);
    CHECK_THROWS_AS(log_uniform_random_field(1, {4, 0}, 0.5, 3), std::invalid_argument);
}

TEST_CASE("extended tensor B = diag(A, 1) has eigenvalues inside the bounds") {
    const CoefficientField f = log_uniform_random_field(2, {8, 8}, 100.0, 11);
    for (double x1 : {0.05, 0.3, 0.55, 0.9}) {
        for (double x2 : {0.1, 0.45, 0.8}) {
            const double A = f.sample(pt(x1, x2));
            const double lo = std::min(A, 1.0), hi = std::max(A, 1.0);
            CHECK(lo >= std::min(f.alpha, 1.0));
            CHECK(hi <= std::max(f.beta, 1.0));
            CHECK(f.alpha <= A);
            CHECK(A <= f.beta);
        }
    }
}

TEST_CASE("parse_coefficient_spec dispatches on the kind") {
    const CoefficientField c = parse_coefficient_spec("constant:2.5", 1, 8);
    CHECK(c.alpha == 2.5);
    CHECK(c.beta == 2.5);
    CHECK(c.shape[0] == 8);

    const CoefficientField r1 = parse_coefficient_spec("logrand:100:5", 1, 16);
    const CoefficientField r2 = parse_coefficient_spec("logrand:100:5", 1, 16);
    CHECK(r1.shape[0] == 16);
    for (std::size_t i = 0; i < r1.values.size(); ++i) CHECK(r1.values[i] == r2.values[i]);
    CHECK(r1.beta / r1.alpha <= 100.0);

    const std::string p = write_temp("fraclod_spec.txt", "2\n1 5\n");
    const CoefficientField rr = parse_coefficient_spec("raster:" + p, 1, 4);
    CHECK(rr.beta == 5.0);
    std::remove(p.c_str());
}

TEST_CASE("parse_coefficient_spec flags configuration errors") {
    CHECK_THROWS_AS(parse_coefficient_spec("fourier:1", 1, 8), std::invalid_argument);
    CHECK_THROWS_AS(parse_coefficient_spec("constant:-1", 1, 8), std::invalid_argument);
    CHECK_THROWS_AS(parse_coefficient_spec("constant:abc", 1, 8), std::invalid_argument);
    CHECK_THROWS_AS(parse_coefficient_spec("logrand:100", 1, 8), std::invalid_argument);
    CHECK_THROWS_AS(parse_coefficient_spec("logrand:0.5:3", 1, 8), std::invalid_argument);
    CHECK_THROWS_AS(parse_coefficient_spec("raster:/nonexistent/x.txt", 1, 8),
                    std::invalid_argument);
    CHECK_THROWS_AS(parse_coefficient_spec("", 1, 8), std::invalid_argument);
}
