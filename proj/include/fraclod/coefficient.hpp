#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "fraclod/mesh.hpp"

namespace fraclod {

// Piecewise-constant scalar coefficient A on a uniform grid over Omega.
// The extended operator uses the block tensor B = diag(A, 1); only the
// scalar A is stored.
struct CoefficientField {
    int d = 1;
    std::array<int, 2> shape = {0, 0}; // cells per Omega axis; shape[1] unused for d = 1
    std::vector<double> values;        // row-major, last axis fastest
    double alpha = 0.0;                // min value
    double beta = 0.0;                 // max value

    // Value of A at x; ties at cell boundaries resolve to the lower cell.
    double sample(const std::array<double, 2>& x) const;
    double sample(const Point& p) const {
        return sample(std::array<double, 2>{p[0], p[1]});
    }
};

CoefficientField constant_field(int d, double value);

// Grid cell counts chosen by the caller; values filled with one constant.
CoefficientField constant_field(int d, std::array<int, 2> shape, double value);

// Text raster: first line "nx" (d=1) or "nx ny" (d=2), then positive reals
// row-major. Malformed input reports the offending line number.
CoefficientField load_raster(const std::string& path);

// log10(A) uniform on [0, log10(contrast)], reproducible per seed.
CoefficientField log_uniform_random_field(int d, std::array<int, 2> shape,
                                          double contrast, std::uint64_t seed);

// Parses "constant:<v>", "raster:<path>", "logrand:<contrast>:<seed>".
// The grid of generated fields is aligned to `cells` per axis.
CoefficientField parse_coefficient_spec(const std::string& spec, int d, int cells);

} // namespace fraclod
