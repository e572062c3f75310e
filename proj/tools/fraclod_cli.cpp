#include "CLI11.hpp"

#include "fraclod/study.hpp"

#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

namespace {

struct FlagSet {
    std::map<std::string, std::string> vals;
    std::map<std::string, CLI::Option*> opts;
    std::string config;
    CLI::Option* config_opt = nullptr;
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multiscale solver for heterogeneous fractional diffusion via the "
                 "truncated extension problem"};
    app.require_subcommand(1);

    const std::vector<std::pair<std::string, std::string>> studies = {
        {"converge", "Multiscale convergence against the separable reference"},
        {"decay", "Corrector localization error versus patch layers"},
        {"truncate", "Sensitivity of the fine solution to the cylinder height"},
        {"oracle", "Fine Galerkin error against the separable reference"},
        {"solve", "Single solve with a plain-text solution dump"},
    };

    std::map<std::string, FlagSet> flags;
    for (const auto& [name, desc] : studies) {
        CLI::App* sub = app.add_subcommand(name, desc);
        sub->set_help_flag("--help", "print help"); // frees -h/--h for the mesh size
        FlagSet& fs = flags[name];
        fs.config_opt = sub->add_option("--config", fs.config, "key=value configuration file");
        auto add = [&](const std::string& flag, const std::string& key, const std::string& help) {
            fs.opts[key] = sub->add_option(flag, fs.vals[key], help);
        };
        add("--d", "d", "trace dimension (1 or 2)");
        add("--s", "s", "fractional powers in (0,1), comma separated");
        add("--H-list", "H_list", "coarse mesh sizes, comma separated (accepts 2^-k)");
        add("--h", "h", "fine mesh size (accepts 2^-k)");
        add("--h-list", "h_list", "fine mesh sizes, comma separated");
        add("--k", "k", "patch layers; values <= 0 use the full-domain corrector");
        add("--k-list", "k_list", "patch layer counts for the decay study");
        add("--T", "T", "cylinder height; defaults to 1 for s <= 1/2, else 1.5");
        add("--T-list", "T_list", "cylinder heights for the truncation study");
        add("--boundary-mode", "boundary_mode", "trace treatment: local or global");
        add("--coeff", "coeff", "constant:<v> | raster:<path> | logrand:<contrast>[:<seed>]");
        add("--rhs", "rhs", "load function: eigen, poly, or one");
        add("--seed", "seed", "seed for generated coefficients");
        add("--n-modes", "n_modes", "modes per axis in the separable reference");
        add("--threads", "threads", "worker threads for corrector patches (0 = auto)");
        add("--out", "out", "output path (default stdout)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        CLI::App* sub = app.get_subcommands().front();
        FlagSet& fs = flags[sub->get_name()];
        fraclod::StudyConfig cfg;
        if (fs.config_opt->count() > 0) cfg = fraclod::load_config(fs.config);
        cfg.study = sub->get_name();
        for (const auto& [key, opt] : fs.opts)
            if (opt->count() > 0) fraclod::apply_override(cfg, key, fs.vals[key]);

        const std::string csv = fraclod::run_study(cfg);
        if (cfg.out.empty()) {
            std::cout << csv;
        } else {
            std::ofstream out(cfg.out, std::ios::binary);
            if (!out) throw std::runtime_error("cannot open output file: " + cfg.out);
            out << csv;
            if (!out.flush()) throw std::runtime_error("failed writing output: " + cfg.out);
        }
        return 0;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
