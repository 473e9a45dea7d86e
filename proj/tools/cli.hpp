#pragma once

// Experiment driver behind the revmap executable. Every artifact starts with the same metadata
// block (version, config echo, tolerances); CSV carries it as '# ' comment lines.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include <revmap/error.hpp>
#include <revmap/family.hpp>
#include <revmap/normal_form.hpp>
#include <revmap/obstruction.hpp>
#include <revmap/series.hpp>
#include <revmap/surface.hpp>
#include <revmap/twist.hpp>

namespace revmap::cli {

inline constexpr const char *version = "0.1.0";
inline constexpr int default_truncation = 16;

using json = nlohmann::ordered_json;

struct RunConfig {
    std::string subcommand;
    std::optional<double> alpha;
    std::optional<double> gamma;
    int s = 1;
    std::int64_t n = 0;
    int j = 0; // 0 selects the real branch 2s
    int grid = 64;
    int K = -1; // -1: grid/2 − 1
    std::size_t schedule_count = 3;
    std::int64_t n_max = 1000;
    std::int64_t steps = -1; // majorant recursion length, -1: n
    int truncation = default_truncation;
    std::string family_path;
    bool hermitian = false;
    std::string map_path;
    std::string tau_path;
    std::string out_path;
    std::string phi_path;
    double m0 = 0.1;
    double R = 0.9;
    int real_samples = 256;
    double solver_tol = 1e-13;
    double return_tol = 1e-10;
    double real_tol = 1e-12;

    void validate() const {
        static const std::vector<std::string> known{"normalize", "curve",    "obstruct", "surface",
                                                    "bishop",    "constants", "majorant"};
        if (std::find(known.begin(), known.end(), subcommand) == known.end()) {
            throw invalid_input("unknown subcommand '" + subcommand + "'");
        }
        if (alpha && gamma) {
            throw invalid_input("--alpha and --gamma are mutually exclusive");
        }
        if (!(solver_tol > 0.0 && return_tol > 0.0 && real_tol > 0.0)) {
            throw invalid_input("tolerances must be positive");
        }
        if (s < 1) {
            throw invalid_input("--s must be at least 1");
        }
        if (truncation < 2) {
            throw invalid_input("--truncation must be at least 2");
        }
        if (grid < 1 || real_samples < 2) {
            throw invalid_input("--grid and --samples must be positive");
        }
    }
};

// Default truncation order, overridable through REVMAP_TRUNCATION.
inline int truncation_from_env() {
    const char *v = std::getenv("REVMAP_TRUNCATION");
    if (v == nullptr || *v == '\0') {
        return default_truncation;
    }
    char *end = nullptr;
    const long t = std::strtol(v, &end, 10);
    if (*end != '\0' || t < 2 || t > 200) {
        throw invalid_input(std::string("REVMAP_TRUNCATION must be an integer in [2, 200], got '") + v + "'");
    }
    return static_cast<int>(t);
}

inline json config_json(const RunConfig &c) {
    json j;
    j["subcommand"] = c.subcommand;
    j["alpha"] = c.alpha ? json(*c.alpha) : json(nullptr);
    j["gamma"] = c.gamma ? json(*c.gamma) : json(nullptr);
    j["s"] = c.s;
    j["n"] = c.n;
    j["j"] = c.j;
    j["grid"] = c.grid;
    j["K"] = c.K;
    j["schedule_count"] = c.schedule_count;
    j["n_max"] = c.n_max;
    j["steps"] = c.steps;
    j["truncation"] = c.truncation;
    j["family"] = c.family_path;
    j["hermitian"] = c.hermitian;
    j["map"] = c.map_path;
    j["tau"] = c.tau_path;
    j["m0"] = c.m0;
    j["R"] = c.R;
    j["samples"] = c.real_samples;
    return j;
}

inline json tolerances_json(const RunConfig &c) {
    return {{"solver", c.solver_tol},       {"return", c.return_tol}, {"real", c.real_tol},
            {"resonance", 1e-8},            {"eps_s_extraction", 1e-9}, {"root_of_unity", 1e-10}};
}

inline json meta_json(const RunConfig &c) {
    return {{"version", version}, {"config", config_json(c)}, {"tolerances", tolerances_json(c)}};
}

inline json complex_json(cplx z) { return {{"re", z.real()}, {"im", z.imag()}}; }

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_csv_meta(std::ostream &out, const RunConfig &c) {
    out << "# revmap " << version << '\n';
    out << "# config " << config_json(c).dump() << '\n';
    out << "# tolerances " << tolerances_json(c).dump() << '\n';
}

// "xi i j re im" / "eta i j re im" lines; '#' starts a comment. Terms beyond the order are truncated.
inline MapJet parse_mapjet(std::istream &in, int order) {
    Jet xi(order), eta(order);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        std::istringstream ls(line);
        std::string comp;
        if (!(ls >> comp)) {
            continue;
        }
        int i = 0, k = 0;
        double re = 0.0, im = 0.0;
        std::string extra;
        if ((comp != "xi" && comp != "eta") || !(ls >> i >> k >> re >> im) || (ls >> extra) || i < 0 || k < 0) {
            throw invalid_input("map line " + std::to_string(lineno) + ": expected 'xi|eta i j re im'");
        }
        if (i + k <= order) {
            (comp == "xi" ? xi : eta).at(i, k) += cplx{re, im};
        }
    }
    return {xi, eta};
}

inline MapJet parse_mapjet_file(const std::string &path, int order) {
    std::ifstream in(path);
    if (!in) {
        throw error("cannot open map file '" + path + "'");
    }
    return parse_mapjet(in, order);
}

inline void write_mapjet_csv(std::ostream &out, const MapJet &m) {
    out << "component,i,j,re,im\n";
    const int N = m.order();
    for (int c = 0; c < 2; ++c) {
        const Jet &f = c == 0 ? m.xi() : m.eta();
        for (int d = 0; d <= N; ++d) {
            for (int k = 0; k <= d; ++k) {
                const cplx v = f(d - k, k);
                if (v != cplx{}) {
                    out << (c == 0 ? "xi" : "eta") << ',' << d - k << ',' << k << ',' << fmt17(v.real()) << ','
                        << fmt17(v.imag()) << '\n';
                }
            }
        }
    }
}

namespace detail {

inline CoefficientFamily load_family(const RunConfig &c) {
    if (c.family_path.empty()) {
        return CoefficientFamily(c.s, c.hermitian);
    }
    return parse_family_file(c.family_path, c.s, c.hermitian);
}

inline double require_alpha(const RunConfig &c) {
    if (!c.alpha) {
        throw invalid_input(c.subcommand + ": --alpha is required");
    }
    return *c.alpha;
}

inline std::int64_t require_n(const RunConfig &c) {
    if (c.n < 1) {
        throw invalid_input(c.subcommand + ": --n must be at least 1");
    }
    return c.n;
}

inline TwistParams twist_params(const RunConfig &c, double alpha) {
    TwistParams tp{alpha, c.s, c.m0, c.R};
    tp.validate();
    return tp;
}

inline json series_json(const SeriesOneVar &f) {
    json arr = json::array();
    for (const cplx v : f.coefficients()) {
        arr.push_back(complex_json(v));
    }
    return arr;
}

inline int branch(const RunConfig &c) { return c.j == 0 ? 2 * c.s : c.j; }

inline int laurent_K(const RunConfig &c) { return c.K < 0 ? std::max(c.grid / 2 - 1, 0) : c.K; }

inline json domain_json(const CurveDomain &d, double c2) {
    return {{"n", d.n},         {"c2", c2},         {"d0", d.d0},
            {"epsilon0", d.epsilon0}, {"delta", d.delta}, {"r0", d.r0},
            {"r0_below_half_d0", d.r0_below_half_d0}};
}

inline void write_curve_rows(std::ostream &out, const std::vector<CurveSample> &samples,
                             const std::vector<int> *real_flags) {
    out << "w_re,w_im,zeta_re,zeta_im,residual" << (real_flags ? ",real" : "") << '\n';
    for (std::size_t m = 0; m < samples.size(); ++m) {
        const CurveSample &p = samples[m];
        out << fmt17(p.w.real()) << ',' << fmt17(p.w.imag()) << ',' << fmt17(p.zeta.real()) << ','
            << fmt17(p.zeta.imag()) << ',' << fmt17(p.residual);
        if (real_flags) {
            out << ',' << (*real_flags)[m];
        }
        out << '\n';
    }
}

inline void run_normalize(const RunConfig &c, std::ostream &out) {
    const int N = c.truncation;
    MapJet phi, tau;
    json source;
    if (!c.map_path.empty()) {
        if (!c.family_path.empty()) {
            throw invalid_input("normalize: --map and --family are mutually exclusive");
        }
        phi = parse_mapjet_file(c.map_path, N);
        tau = c.tau_path.empty() ? MapJet::swap(N) : parse_mapjet_file(c.tau_path, N);
        source = {{"kind", "map"}, {"path", c.map_path}};
    } else {
        const TwistParams tp = twist_params(c, require_alpha(c));
        phi = varphi_jet(load_family(c), tp, N);
        tau = MapJet::swap(N);
        source = {{"kind", "family"}, {"path", c.family_path}};
    }
    const NormalFormResult r = full_normalize(phi, tau, N);
    json j;
    j["meta"] = meta_json(c);
    j["source"] = source;
    j["lambda"] = complex_json(r.lambda);
    j["eps"] = r.eps;
    j["s"] = r.s == infinite_order ? json("infinity") : json(r.s);
    j["conjugation_residual"] = r.conjugation_residual;
    j["tau_residual"] = r.tau_residual;
    j["reality_defect"] = r.reality_defect;
    j["M"] = series_json(r.M);
    j["Lambda1"] = series_json(r.Lambda1);
    j["Lambda2"] = series_json(r.Lambda2);
    j["Gamma"] = series_json(r.Gamma);
    out << j.dump(2) << '\n';
    if (!c.phi_path.empty()) {
        std::ofstream pf(c.phi_path);
        if (!pf) {
            throw error("cannot write '" + c.phi_path + "'");
        }
        write_csv_meta(pf, c);
        write_mapjet_csv(pf, r.Phi);
    }
}

inline void run_curve(const RunConfig &c, std::ostream &out) {
    const TwistParams tp = twist_params(c, require_alpha(c));
    const std::int64_t n = require_n(c);
    const TwistMap map(load_family(c), tp);
    const double c2 = calibrate_c2(tp);
    const CurveDomain dom = compute_constants(tp, n, c2);
    const ResonanceData res = beta_reduce(n, tp.alpha);
    SolverOptions opt;
    opt.tolerance = c.solver_tol;
    opt.return_tolerance = c.return_tol;
    const PeriodicCurve pc = periodic_curve(map, res, dom, branch(c), c.grid, laurent_K(c), opt);
    write_csv_meta(out, c);
    out << "# constants " << domain_json(dom, c2).dump() << '\n';
    out << "# resonance " << json{{"n", res.n}, {"g", res.g}, {"beta", res.beta}}.dump() << '\n';
    out << "# max_residual " << fmt17(pc.max_residual) << '\n';
    write_curve_rows(out, pc.samples, nullptr);
}

inline void run_obstruct(const RunConfig &c, std::ostream &out) {
    const TwistParams tp = twist_params(c, require_alpha(c));
    const TwistMap map(load_family(c), tp);
    const double c2 = calibrate_c2(tp);
    const double delta = compute_constants(tp, 1, c2).delta;
    const ResonanceSchedule sched = select_resonant_n(tp.alpha, delta, c.schedule_count, c.n_max);
    WitnessOptions opt;
    opt.min_grid = c.grid;
    opt.solver_tolerance = c.solver_tol;
    const ObstructionReport rep = divergence_witness(map, sched.entries, c2, opt);
    json j;
    j["meta"] = meta_json(c);
    j["c2"] = c2;
    j["delta"] = delta;
    j["schedule_complete"] = sched.complete;
    json entries = json::array();
    for (const ObstructionEntry &e : rep.entries) {
        entries.push_back({{"n", e.n},
                           {"beta", e.beta},
                           {"Hk_numeric", complex_json(e.Hk_numeric)},
                           {"Hk_leading", complex_json(e.Hk_leading)},
                           {"I_min", e.I_min},
                           {"I_max", e.I_max},
                           {"nonconstant", e.nonconstant},
                           {"predicted_width", e.predicted_width},
                           {"threshold", e.threshold},
                           {"max_residual", e.max_residual},
                           {"grid", e.grid_size}});
    }
    j["entries"] = entries;
    j["nonconstant_count"] = rep.nonconstant_count;
    j["conclusion"] = rep.conclusion();
    out << j.dump(2) << '\n';
}

inline void run_surface(const RunConfig &c, std::ostream &out) {
    double alpha = 0.0;
    json bishop = nullptr;
    if (c.gamma) {
        const BishopData b = lambda_from_gamma(*c.gamma);
        if (b.exceptional) {
            throw hypothesis_violation("surface: gamma = " + fmt17(*c.gamma) +
                                       " is exceptional (lambda^" + std::to_string(b.order) + " = 1)");
        }
        alpha = alpha_from_lambda(b.lambda);
        bishop = {{"gamma", b.gamma}, {"lambda", complex_json(b.lambda)}};
    } else {
        alpha = require_alpha(c);
    }
    const TwistParams tp = twist_params(c, alpha);
    const std::int64_t n = require_n(c);
    const SurfaceMap map(load_family(c), tp);
    const double c2 = calibrate_c2(tp);
    const CurveDomain dom = compute_constants(tp, n, c2);
    const ResonanceData res = beta_reduce(n, alpha);
    IntersectionOptions iopt;
    iopt.samples = c.real_samples;
    iopt.tol = c.real_tol;
    const SurfaceCurve sc = surface_curves(map, res, dom, branch(c), c.grid, laurent_K(c), iopt);

    // A sample lies in the totally real set when ξ = ζw and η = ζ/w are both real.
    std::vector<int> real_flags;
    for (const CurveSample &p : sc.curve.samples) {
        const cplx x = p.zeta * p.w, y = p.zeta / p.w;
        const double tol = c.real_tol * std::abs(p.zeta);
        real_flags.push_back(std::abs(x.imag()) <= tol && std::abs(y.imag()) <= tol ? 1 : 0);
    }
    json points = json::array();
    for (const RealPoint &p : sc.real.points) {
        points.push_back({{"w", complex_json(p.w)}, {"zeta", complex_json(p.zeta)}});
    }
    const json real{{"isolated", sc.real.count()},
                    {"continuum", sc.real.continuum},
                    {"ray_continuum", sc.real.ray_continuum},
                    {"max_defect", sc.real.max_defect},
                    {"points", points}};
    write_csv_meta(out, c);
    out << "# alpha " << fmt17(alpha) << '\n';
    if (!bishop.is_null()) {
        out << "# bishop " << bishop.dump() << '\n';
    }
    out << "# constants " << domain_json(dom, c2).dump() << '\n';
    out << "# resonance " << json{{"n", res.n}, {"g", res.g}, {"beta", res.beta}}.dump() << '\n';
    out << "# real_intersection " << real.dump() << '\n';
    out << "# max_residual " << fmt17(sc.curve.max_residual) << '\n';
    write_curve_rows(out, sc.curve.samples, &real_flags);
}

inline void run_bishop(const RunConfig &c, std::ostream &out) {
    if (!c.gamma) {
        throw invalid_input("bishop: --gamma is required");
    }
    const BishopData b = lambda_from_gamma(*c.gamma);
    const cplx l = b.lambda;
    json j;
    j["meta"] = meta_json(c);
    j["gamma"] = b.gamma;
    j["lambda"] = complex_json(l);
    j["alpha"] = alpha_from_lambda(l);
    j["exceptional"] = b.exceptional;
    j["k"] = b.exceptional ? json(b.order) : json(nullptr);
    j["scanned_orders"] = b.exceptional ? json(nullptr) : json(b.order);
    j["certificate"] = b.exceptional ? json(std::abs(std::pow(l, b.order) - 1.0)) : json(nullptr);
    j["identities"] = {{"quadratic", std::abs(b.gamma * l * l - l + b.gamma)},
                       {"modulus", std::abs(std::abs(l) - 1.0)},
                       {"trace", std::abs(2.0 * l.real() - 1.0 / b.gamma)}};
    out << j.dump(2) << '\n';
}

inline void run_constants(const RunConfig &c, std::ostream &out) {
    const TwistParams tp = twist_params(c, c.alpha.value_or(0.0));
    const std::int64_t n = require_n(c);
    const double c2 = calibrate_c2(tp);
    const CurveDomain dom = compute_constants(tp, n, c2);
    json j;
    j["meta"] = meta_json(c);
    j["constants"] = domain_json(dom, c2);
    if (c.alpha) {
        const ResonanceData res = beta_reduce(n, *c.alpha);
        j["resonance"] = {{"n", res.n},
                          {"g", res.g},
                          {"beta", res.beta},
                          {"boundary", res.boundary},
                          {"in_range", res.beta < 0.0 && res.beta > -dom.delta}};
    }
    out << j.dump(2) << '\n';
}

inline void run_majorant(const RunConfig &c, std::ostream &out) {
    const TwistParams tp = twist_params(c, c.alpha.value_or(0.0));
    const std::int64_t n = require_n(c);
    const std::int64_t K = c.steps < 0 ? n : c.steps;
    const MajorantReport rep = majorant_sequence(tp, n, K);
    double worst = 0.0;
    for (std::size_t k = 1; k < rep.f.size(); ++k) {
        worst = std::max(worst, rep.f[k] / (static_cast<double>(k) / (4.0 * static_cast<double>(n))));
    }
    json j;
    j["meta"] = meta_json(c);
    j["n"] = rep.n;
    j["d0"] = rep.d0;
    j["steps"] = K;
    j["violations"] = rep.violations;
    j["max_ratio"] = worst; // max_k f_k / (k/(4n))
    j["f"] = rep.f;
    out << j.dump(2) << '\n';
}

} // namespace detail

// Exit codes: 0 success, 1 input/I/O errors, 2 violated hypotheses and solver failures.
inline int run(const RunConfig &config, std::ostream &out, std::ostream &err) {
    try {
        config.validate();
        std::ofstream file;
        std::ostream *sink = &out;
        if (!config.out_path.empty()) {
            file.open(config.out_path);
            if (!file) {
                throw error("cannot write '" + config.out_path + "'");
            }
            sink = &file;
        }
        const std::string &sc = config.subcommand;
        if (sc == "normalize") {
            detail::run_normalize(config, *sink);
        } else if (sc == "curve") {
            detail::run_curve(config, *sink);
        } else if (sc == "obstruct") {
            detail::run_obstruct(config, *sink);
        } else if (sc == "surface") {
            detail::run_surface(config, *sink);
        } else if (sc == "bishop") {
            detail::run_bishop(config, *sink);
        } else if (sc == "constants") {
            detail::run_constants(config, *sink);
        } else {
            detail::run_majorant(config, *sink);
        }
        sink->flush();
        if (!*sink) {
            throw error("write failed");
        }
        return 0;
    } catch (const hypothesis_violation &e) {
        err << "revmap: hypothesis violated: " << e.what() << '\n';
        return 2;
    } catch (const convergence_error &e) {
        err << "revmap: no convergence: " << e.what() << '\n';
        return 2;
    } catch (const error &e) {
        err << "revmap: error: " << e.what() << '\n';
        return 1;
    }
}

} // namespace revmap::cli
