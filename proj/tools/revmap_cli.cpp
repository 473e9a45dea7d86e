#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "cli.hpp"

namespace {

using revmap::cli::RunConfig;

void add_alpha(CLI::App &sub, RunConfig &c, bool with_gamma) {
    auto *a = sub.add_option("--alpha", c.alpha, "Rotation angle alpha (radians)");
    if (with_gamma) {
        auto *g = sub.add_option("--gamma", c.gamma, "Bishop invariant gamma > 1/2");
        a->excludes(g);
    }
}

void add_model(CLI::App &sub, RunConfig &c) {
    sub.add_option("--s", c.s, "Twist order s")->check(CLI::PositiveNumber);
    sub.add_option("--m0", c.m0, "Perturbation bound m0")->check(CLI::PositiveNumber);
    sub.add_option("--R", c.R, "Radius bound R in (0,1)")->check(CLI::Range(0.0, 1.0));
}

void add_family(CLI::App &sub, RunConfig &c) {
    sub.add_option("--family", c.family_path, "Coefficient family file ('i j re im' lines)")->check(CLI::ExistingFile);
    sub.add_flag("--hermitian", c.hermitian, "Close the family under a_{j,i} = conj(a_{i,j})");
}

void add_curve(CLI::App &sub, RunConfig &c) {
    sub.add_option("--n", c.n, "Period n")->required()->check(CLI::PositiveNumber);
    sub.add_option("--j", c.j, "Branch index 1..2s (default 2s)");
    sub.add_option("--grid", c.grid, "Points on |w| = 1")->check(CLI::PositiveNumber);
    sub.add_option("--K", c.K, "Highest Laurent mode (default grid/2 - 1)");
    sub.add_option("--tol", c.solver_tol, "Branch equation tolerance")->check(CLI::PositiveNumber);
    sub.add_option("--return-tol", c.return_tol, "n-step return tolerance")->check(CLI::PositiveNumber);
}

void add_out(CLI::App &sub, RunConfig &c) { sub.add_option("--out", c.out_path, "Output file (default stdout)"); }

} // namespace

int main(int argc, char **argv) {
    RunConfig c;
    CLI::App app{"Normal forms, periodic-point curves and divergence obstructions of reversible maps"};
    app.set_version_flag("--version", std::string("revmap ") + revmap::cli::version);
    app.require_subcommand(1);

    try {
        c.truncation = revmap::cli::truncation_from_env();
    } catch (const revmap::error &e) {
        std::cerr << "revmap: error: " << e.what() << '\n';
        return 1;
    }

    auto *normalize = app.add_subcommand("normalize", "Formal normal form {lambda, eps, s} of a reversible map");
    normalize->add_option("--map", c.map_path, "MapJet file ('xi|eta i j re im' lines)")->check(CLI::ExistingFile);
    normalize->add_option("--tau", c.tau_path, "Reversing involution (default (eta, xi))")->check(CLI::ExistingFile);
    normalize->add_option("--truncation,-N", c.truncation, "Truncation order N (env REVMAP_TRUNCATION)")
        ->check(CLI::Range(2, 200));
    normalize->add_option("--phi-out", c.phi_path, "CSV file for the normalizing transformation");
    add_alpha(*normalize, c, false);
    add_model(*normalize, c);
    add_family(*normalize, c);
    add_out(*normalize, c);

    auto *curve = app.add_subcommand("curve", "Periodic-point curve zeta_j(w) of the perturbed twist map");
    add_alpha(*curve, c, false);
    add_model(*curve, c);
    add_curve(*curve, c);
    add_family(*curve, c);
    add_out(*curve, c);

    auto *obstruct = app.add_subcommand("obstruct", "Laurent coefficients H_k and intervals I_k over resonant n");
    add_alpha(*obstruct, c, false);
    add_model(*obstruct, c);
    obstruct->add_option("--schedule-count", c.schedule_count, "Number of resonant n")->check(CLI::PositiveNumber);
    obstruct->add_option("--n-max", c.n_max, "Largest n scanned")->check(CLI::PositiveNumber);
    obstruct->add_option("--grid", c.grid, "Minimum grid size (doubled until >= 4n)")->check(CLI::PositiveNumber);
    obstruct->add_option("--tol", c.solver_tol, "Solver tolerance")->check(CLI::PositiveNumber);
    add_family(*obstruct, c);
    add_out(*obstruct, c);

    auto *surface = app.add_subcommand("surface", "Periodic-point curves of the complex-tangent map");
    add_alpha(*surface, c, true);
    add_model(*surface, c);
    add_curve(*surface, c);
    surface->add_option("--samples", c.real_samples, "Samples per ray in the real-point search")
        ->check(CLI::Range(2, 1 << 20));
    surface->add_option("--real-tol", c.real_tol, "Relative tolerance for reality")->check(CLI::PositiveNumber);
    add_family(*surface, c);
    add_out(*surface, c);

    auto *bishop = app.add_subcommand("bishop", "Eigenvalue and exceptionality of a Bishop invariant");
    bishop->add_option("--gamma", c.gamma, "Bishop invariant gamma > 1/2")->required();
    add_out(*bishop, c);

    auto *constants = app.add_subcommand("constants", "Domain constants d0, c2, delta, r0 for period n");
    add_alpha(*constants, c, false);
    add_model(*constants, c);
    constants->add_option("--n", c.n, "Period n")->required()->check(CLI::PositiveNumber);
    add_out(*constants, c);

    auto *majorant = app.add_subcommand("majorant", "Majorant recursion f_k(d0, d0) against k/(4n)");
    add_model(*majorant, c);
    majorant->add_option("--n", c.n, "Period n")->required()->check(CLI::PositiveNumber);
    majorant->add_option("--steps", c.steps, "Recursion length K <= n (default n)");
    add_out(*majorant, c);

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return 1;
    }
    c.subcommand = app.get_subcommands().front()->get_name();
    return revmap::cli::run(c, std::cout, std::cerr);
}
