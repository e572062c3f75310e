#include "fraclod/coefficient.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace fraclod {

namespace {

int boundary_tied_cell(double x, int n) {
    // ceil(x*n) - 1 puts boundary values into the lower cell.
    const int i = static_cast<int>(std::ceil(x * n)) - 1;
    return std::clamp(i, 0, n - 1);
}

void finalize_range(CoefficientField& f) {
    const auto [lo, hi] = std::minmax_element(f.values.begin(), f.values.end());
    f.alpha = *lo;
    f.beta = *hi;
}

} // namespace

double CoefficientField::sample(const std::array<double, 2>& x) const {
    constexpr double tol = 1e-12;
    for (int c = 0; c < d; ++c)
        if (!(x[c] >= -tol && x[c] <= 1.0 + tol))
            throw std::domain_error("CoefficientField::sample: point outside the unit box");
    const int i1 = boundary_tied_cell(x[0], shape[0]);
    if (d == 1) return values[i1];
    const int i2 = boundary_tied_cell(x[1], shape[1]);
    return values[static_cast<std::size_t>(i1) * shape[1] + i2];
}

CoefficientField constant_field(int d, double value) {
    return constant_field(d, {1, d == 2 ? 1 : 0}, value);
}

CoefficientField constant_field(int d, std::array<int, 2> shape, double value) {
    if (d != 1 && d != 2) throw std::invalid_argument("constant_field: d must be 1 or 2");
    if (!(value > 0.0)) throw std::invalid_argument("constant_field: value must be positive");
    if (shape[0] < 1 || (d == 2 && shape[1] < 1))
        throw std::invalid_argument("constant_field: invalid shape");
    CoefficientField f;
    f.d = d;
    f.shape = shape;
    f.values.assign(static_cast<std::size_t>(shape[0]) * (d == 2 ? shape[1] : 1), value);
    finalize_range(f);
    return f;
}

CoefficientField load_raster(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_raster: cannot open '" + path + "'");

    std::string line;
    int lineno = 0;
    auto next_line = [&]() {
        while (std::getline(in, line)) {
            ++lineno;
            if (line.find_first_not_of(" \t\r\n") != std::string::npos) return true;
        }
        return false;
    };

    if (!next_line()) throw std::runtime_error("load_raster: '" + path + "' is empty");
    std::istringstream header(line);
    int n1 = 0, n2 = 0;
    header >> n1;
    const bool two_dim = static_cast<bool>(header >> n2);
    if (header.fail() && !header.eof())
        throw std::runtime_error("load_raster: bad header at line " + std::to_string(lineno));
    if (n1 < 1 || (two_dim && n2 < 1))
        throw std::runtime_error("load_raster: bad grid size at line " + std::to_string(lineno));

    CoefficientField f;
    f.d = two_dim ? 2 : 1;
    f.shape = {n1, two_dim ? n2 : 0};
    const std::size_t total = static_cast<std::size_t>(n1) * (two_dim ? n2 : 1);
    f.values.reserve(total);
    while (f.values.size() < total && next_line()) {
        std::istringstream vals(line);
        double v;
        while (vals >> v) {
            if (!(v > 0.0))
                throw std::runtime_error("load_raster: nonpositive value at line " +
                                         std::to_string(lineno));
            if (f.values.size() == total)
                throw std::runtime_error("load_raster: extra values at line " +
                                         std::to_string(lineno));
            f.values.push_back(v);
        }
        if (!vals.eof())
            throw std::runtime_error("load_raster: malformed value at line " +
                                     std::to_string(lineno));
    }
    if (f.values.size() != total)
        throw std::runtime_error("load_raster: expected " + std::to_string(total) +
                                 " values, got " + std::to_string(f.values.size()));
    finalize_range(f);
    return f;
}

CoefficientField log_uniform_random_field(int d, std::array<int, 2> shape,
                                          double contrast, std::uint64_t seed) {
    if (d != 1 && d != 2)
        throw std::invalid_argument("log_uniform_random_field: d must be 1 or 2");
    if (!(contrast >= 1.0))
        throw std::invalid_argument("log_uniform_random_field: contrast must be >= 1");
    if (shape[0] < 1 || (d == 2 && shape[1] < 1))
        throw std::invalid_argument("log_uniform_random_field: invalid shape");
    CoefficientField f;
    f.d = d;
    f.shape = shape;
    const std::size_t total = static_cast<std::size_t>(shape[0]) * (d == 2 ? shape[1] : 1);
    f.values.resize(total);
    std::mt19937_64 rng(seed);
    for (auto& v : f.values) {
        // 53-bit uniform in [0,1); avoids distribution objects so streams are
        // identical across standard library implementations.
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        v = std::pow(contrast, u);
    }
    finalize_range(f);
    return f;
}

CoefficientField parse_coefficient_spec(const std::string& spec, int d, int cells) {
    const auto colon = spec.find(':');
    const std::string kind = spec.substr(0, colon);
    const std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);
    try {
        if (kind == "constant") {
            return constant_field(d, {cells, d == 2 ? cells : 0}, std::stod(rest));
        }
        if (kind == "raster") {
            CoefficientField f = load_raster(rest);
            if (f.d != d)
                throw std::runtime_error("raster dimension " + std::to_string(f.d) +
                                         " does not match d = " + std::to_string(d));
            return f;
        }
        if (kind == "logrand") {
            const auto sep = rest.find(':');
            if (sep == std::string::npos)
                throw std::runtime_error("logrand spec needs contrast and seed");
            const double contrast = std::stod(rest.substr(0, sep));
            const std::uint64_t seed = std::stoull(rest.substr(sep + 1));
            return log_uniform_random_field(d, {cells, d == 2 ? cells : 0}, contrast, seed);
        }
        throw std::runtime_error("unknown kind");
    } catch (const std::exception& err) {
        // Bad coefficient specs are configuration errors.
        throw std::invalid_argument("coefficient spec '" + spec + "': " + err.what());
    }
}

} // namespace fraclod
