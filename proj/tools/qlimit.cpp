// qlimit: runs the verification suites and writes CSV or JSON tables.
// Exit status: 0 all checks passed, 1 some check failed, 2 bad configuration
// or runtime error.

#include <qlimit/harness.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <string>

namespace {

struct cli_options {
    int points = 0;
    double extent = 0.0;
    int dims = 0;
    std::string hbars;
    std::string kperp;
};

void add_common(CLI::App* sub, qlimit::harness::run_config& cfg, cli_options& o) {
    sub->add_option("--n", o.points, "grid points per axis");
    sub->add_option("--extent", o.extent, "grid extent");
    sub->add_option("--dim", o.dims, "spatial dimension");
    sub->add_option("--mass", cfg.mass, "field mass");
    sub->add_option("--hbars", o.hbars, "comma-separated hbar values, strictly decreasing in (0,1]");
    sub->add_option("--seed", cfg.seed, "random seed");
    sub->add_option("--out", cfg.out, "output path (default stdout)");
    sub->add_option("--format", cfg.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
}

} // namespace

int main(int argc, char** argv) {
    namespace h = qlimit::harness;
    CLI::App app{"Classical-limit verification suites"};
    app.require_subcommand(1);
    h::run_config cfg;
    cli_options o;

    auto* alg = app.add_subcommand("algebra-check", "Weyl algebra axioms and positivity");
    add_common(alg, cfg, o);

    auto* scan = app.add_subcommand("limit-scan", "closed-form residuals against hbar");
    add_common(scan, cfg, o);
    scan->add_option("--pairs", cfg.pairs, "basic, all, or kind-kind:cond list (kinds: weyl field annihilator "
                                           "creator number; cond: dirac vn)");

    auto* repv = app.add_subcommand("rep-verify", "Berezin versus Weyl diagram under refinement");
    add_common(repv, cfg, o);
    repv->add_option("--a", cfg.a, "generator shift coordinate");
    repv->add_option("--b", cfg.b, "generator phase coordinate");
    repv->add_flag("--strict", cfg.strict, "reject fractional grid shifts");

    auto* fe = app.add_subcommand("field-energy", "total number and Hamiltonian identities");
    add_common(fe, cfg, o);
    fe->add_option("family", cfg.family, "kg-minkowski, kg-rindler or maxwell")
        ->check(CLI::IsMember({"kg-minkowski", "kg-rindler", "maxwell"}));
    fe->add_option("--kperp", o.kperp, "transverse wavenumbers ky,kz for kg-rindler");
    int states = 0;
    fe->add_option("--states", states, "number of random states");
    fe->add_option("--state", cfg.state_in, "read the state from a .csv or .bin file");
    fe->add_option("--save-state", cfg.state_out, "write the first state to a .csv or .bin file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        for (auto* sub : {alg, scan, repv, fe})
            if (sub->parsed()) {
                cfg.command = sub->get_name();
                if (sub->count("--n")) cfg.points = o.points;
                if (sub->count("--extent")) cfg.extent = o.extent;
                if (sub->count("--dim")) cfg.dims = o.dims;
                if (sub->count("--hbars")) cfg.hbars = h::parse_list(o.hbars);
            }
        if (fe->parsed()) {
            if (fe->count("--states")) cfg.states = states;
            if (fe->count("--kperp")) {
                const auto k = h::parse_list(o.kperp);
                if (k.size() != 2) throw qlimit::error(qlimit::errc::invalid_config, "--kperp takes two values");
                cfg.kperp = {k[0], k[1]};
            }
        }
        const auto report = h::run(cfg);
        const std::string text = h::render(report, cfg);
        if (cfg.out.empty() || cfg.out == "-") {
            std::cout << text;
        } else {
            std::ofstream os(cfg.out, std::ios::binary);
            if (!os) throw qlimit::error(qlimit::errc::io, "cannot open " + cfg.out);
            os << text;
        }
        if (!report.passed) std::cerr << "qlimit: some checks failed\n";
        return report.passed ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "qlimit: " << e.what() << "\n";
        return 2;
    }
}
