#pragma once

#include "fraclod/assembly.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace fraclod {

// Experiment configuration, merged from a key=value file and CLI overrides.
struct StudyConfig {
    std::string study;
    int d = 1;
    std::vector<double> s_list = {0.5};
    std::vector<double> H_list;
    double h = 0.0;
    std::vector<double> h_list;
    int k = 2; // <= 0 selects the full-domain ideal corrector
    std::vector<int> k_list;
    double T = 0.0; // <= 0 selects the default: 1 for s <= 1/2, else 3/2
    std::vector<double> T_list;
    std::string boundary_mode = "local";
    std::string coeff = "constant:1";
    std::string rhs = "eigen";
    std::uint64_t seed = 1;
    int n_modes = 0; // 0 selects the default per dimension
    int threads = 0; // 0 selects the hardware default
    std::string out; // empty writes to stdout
};

StudyConfig load_config(const std::string& path);

// Applies "key=value" to an existing config; unknown keys throw.
void apply_override(StudyConfig& cfg, const std::string& key, const std::string& value);

// Accepts plain reals and the shorthand "2^-k".
double parse_mesh_size(const std::string& text);

double default_truncation(double s);
int default_modes(int d);

TraceFunction make_rhs(const std::string& name, int d, double s, double kappa);

// Runs the configured study. Studies return the complete CSV text with the
// header "study,s,d,H,h,k,T,boundary_mode,coeff,value,eoc"; the single-shot
// "solve" study returns a plain-text solution dump instead (VERTICES /
// SIMPLICES / VALUES blocks). Output is deterministic for a fixed
// configuration and seed.
std::string run_study(const StudyConfig& cfg);

} // namespace fraclod
