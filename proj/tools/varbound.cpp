#include "commands.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <iostream>

using namespace varbound;
using namespace varbound::cli;

namespace {

void error_record(const char* kind, const std::string& message) {
    nlohmann::json j;
    j["error"] = {{"kind", kind}, {"message", message}};
    std::cerr << j.dump() << '\n';
}

void add_common(CLI::App* sub, RunConfig& cfg, std::optional<std::uint64_t>& seed) {
    sub->add_option("--out", cfg.out, "output directory for CSV files and manifest.json");
    sub->add_option("--seed", seed, "random seed");
    sub->add_option("--tol", cfg.tol, "tolerance of reported checks");
}

void add_problem(CLI::App* sub, RunConfig& cfg) {
    sub->add_option("problem", cfg.input, "problem file")->required()->check(CLI::ExistingFile);
}

void add_lower(CLI::App* sub, RunConfig& cfg) {
    sub->add_option("--grid", cfg.grid_overrides, "grid overrides key=value,... (cells, radius, y_nodes, ...)");
    sub->add_option("--phi-degree", cfg.phi_degree, "degree of the phi basis");
    sub->add_option("--h-degree", cfg.h_degree, "degree of h and l");
    sub->add_option("--radius", cfg.radius, "truncation radius of y and z");
}

void add_upper(CLI::App* sub, RunConfig& cfg) {
    sub->add_option("--elements", cfg.elements, "elements per axis of the coarsest mesh");
    sub->add_option("--multistart", cfg.multistart, "number of seeded starts");
    sub->add_option("--refine", cfg.refine, "number of nested refinement levels");
}

}  // namespace

int main(int argc, char** argv) {
    RunConfig cfg;
    for (int k = 0; k < argc; ++k) cfg.argv.emplace_back(argv[k]);
    cfg.data_dir = VARBOUND_DATA_DIR;
    std::optional<std::uint64_t> seed;

    CLI::App app{"Lower and upper bounds for polynomial variational problems"};
    app.require_subcommand(1);

    auto* omr = app.add_subcommand("omr", "occupation-measure LP on a grid");
    add_problem(omr, cfg);
    add_lower(omr, cfg);
    add_common(omr, cfg, seed);

    auto* pdr = app.add_subcommand("pdr", "collocation LP for a dual certificate, then certification");
    add_problem(pdr, cfg);
    add_lower(pdr, cfg);
    add_common(pdr, cfg, seed);

    auto* sharp = app.add_subcommand("sharp", "certificate from conjugate dual fields (1D scalar problems)");
    add_problem(sharp, cfg);
    sharp->add_option("--phi-degree", cfg.phi_degree, "degree of the sigma fit");
    sharp->add_option("--h-degree", cfg.h_degree, "degree of the h fit");
    sharp->add_option("--radius", cfg.radius, "certification radius");
    sharp->add_flag("--convexify", cfg.convexify, "replace the gradient part by its convex envelope");
    add_common(sharp, cfg, seed);

    auto* upper = app.add_subcommand("upper", "finite-element upper bound");
    add_problem(upper, cfg);
    add_upper(upper, cfg);
    upper->add_flag("--dump", cfg.dump, "write nodal values of the finest level");
    add_common(upper, cfg, seed);

    auto* verify = app.add_subcommand("verify-measure", "check a measure pair file against the relaxation");
    verify->add_option("measure", cfg.input, "measure file")->required()->check(CLI::ExistingFile);
    verify->add_option("--phi-degree", cfg.phi_degree, "degree of the phi, h and l test bases");
    verify->add_flag("--exact", cfg.exact, "require every residual to vanish in exact arithmetic");
    add_common(verify, cfg, seed);

    auto* sandwich = app.add_subcommand("sandwich", "pdr <= omr <= upper on one problem");
    add_problem(sandwich, cfg);
    add_lower(sandwich, cfg);
    add_upper(sandwich, cfg);
    add_common(sandwich, cfg, seed);

    auto* examples = app.add_subcommand("examples", "run every shipped problem");
    examples->add_option("--data", cfg.data_dir, "data directory holding problems/");
    add_common(examples, cfg, seed);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        error_record("input", e.what());
        return 2;
    }
    for (auto* sub : app.get_subcommands()) cfg.verb = sub->get_name();
    if (seed) cfg.seed = *seed;

    const std::string started = utc_now();
    try {
        const VerbResult r = run(cfg);
        write_outputs(cfg, r, started);
        std::cout << r.summary;
        return r.status;
    } catch (const InputError& e) {
        error_record("input", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        error_record("input", e.what());
        return 2;
    } catch (const std::filesystem::filesystem_error& e) {
        error_record("input", e.what());
        return 2;
    } catch (const std::exception& e) {
        error_record("numerical", e.what());
        return 1;
    }
}
