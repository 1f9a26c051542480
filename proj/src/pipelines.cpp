#include "nsfk/pipelines.hpp"

#include <Eigen/Eigenvalues>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "nsfk/convex_extension.hpp"
#include "nsfk/dissipativity.hpp"
#include "nsfk/fitting.hpp"
#include "nsfk/linear_evolution.hpp"

namespace nsfk {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// JSON has no representation for non-finite numbers
nlohmann::ordered_json num(double v)
{
    if (std::isfinite(v)) return v;
    return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
}

std::string yes_no(bool b)
{
    return b ? "1" : "0";
}

}  // namespace

std::string csv_number(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string CsvTable::render() const
{
    std::string s;
    for (size_t i = 0; i < header.size(); ++i) s += (i ? "," : "") + header[i];
    s += "\n";
    for (const auto& r : rows) {
        for (size_t i = 0; i < r.size(); ++i) s += (i ? "," : "") + r[i];
        s += "\n";
    }
    return s;
}

bool PipelineResult::passed() const
{
    for (const Criterion& c : criteria)
        if (!c.passed) return false;
    return true;
}

Criterion at_most(std::string name, double observed, double tolerance, std::string detail)
{
    Criterion c{std::move(name), observed <= tolerance, observed, tolerance, tolerance - observed, std::move(detail)};
    return c;
}

Criterion at_least(std::string name, double observed, double tolerance, std::string detail)
{
    Criterion c{std::move(name), observed >= tolerance, observed, tolerance, observed - tolerance, std::move(detail)};
    return c;
}

Criterion within(std::string name, double observed, double target, double tolerance)
{
    const double d = std::abs(observed - target);
    Criterion c{std::move(name), d <= tolerance, observed, tolerance, tolerance - d,
                "target " + csv_number(target)};
    return c;
}

PipelineResult verify_thermo(const RunConfig& cfg)
{
    PipelineResult r;
    r.subcommand = "verify-thermo";
    const EquationOfState eos = make_eos(cfg.closure);

    const HypothesisReport hyp = verify_hypotheses(eos, cfg.domain, cfg.thermo.grid);
    CsvTable cond{"thermo_conditions.csv", {"condition", "passed", "worst", "rho", "theta"}, {}};
    for (const ConditionResult& c : hyp.conditions) {
        Criterion k{"thermo: " + c.name, c.passed, c.worst, 0, 0, ""};
        k.detail = "worst at (rho, theta) = (" + csv_number(c.rho_at) + ", " + csv_number(c.theta_at) + ")";
        r.criteria.push_back(k);
        cond.rows.push_back({c.name, yes_no(c.passed), csv_number(c.worst), csv_number(c.rho_at),
                             csv_number(c.theta_at)});
    }
    r.tables.push_back(cond);

    EntropyPairOptions eo;
    eo.n_samples = cfg.thermo.states;
    eo.fd_step = cfg.thermo.fd_step;
    eo.seed = cfg.seed;
    eo.u_max = cfg.thermo.u_max;
    const EntropyPairReport ep = verify_entropy_pair(eos, nsf_maps(eos), cfg.domain, eo);
    const std::vector<Criterion> epc = {
        at_least("entropy pair: Hessian positive definite (scaled min eigenvalue)", ep.min_hessian_eig, 0),
        at_most("entropy pair: Hessian asymmetry", ep.max_hessian_asym, ep.symmetry_tol),
        at_most("entropy pair: A0 asymmetry", ep.max_a0_asym, ep.symmetry_tol),
        at_most("entropy pair: A1 asymmetry", ep.max_a1_asym, ep.symmetry_tol),
        at_least("entropy pair: B positive semidefinite (scaled min eigenvalue)", ep.min_b_eig, -ep.symmetry_tol),
        at_most("entropy pair: flux condition residual", ep.max_flux_residual, ep.flux_tol),
        at_most("entropy pair: D_Uf0 inverse residual", ep.max_jac_f0_inverse, 1e-12),
    };
    CsvTable et{"entropy_pair.csv", {"quantity", "value", "tolerance", "passed"}, {}};
    for (const Criterion& c : epc) {
        r.criteria.push_back(c);
        et.rows.push_back({c.name, csv_number(c.observed), csv_number(c.tolerance), yes_no(c.passed)});
    }
    r.tables.push_back(et);
    r.values["entropy_pair"] = {{"samples", ep.n_samples},
                                {"min_a0_eig", num(ep.min_a0_eig)},
                                {"max_congruence", num(ep.max_congruence)}};
    return r;
}

PipelineResult analyze_symbol(const RunConfig& cfg)
{
    PipelineResult r;
    r.subcommand = "analyze-symbol";
    const SymbolConfig& sc = cfg.symbol;
    const EquationOfState eos = make_eos(cfg.closure);
    const EquilibriumCoefficients c = equilibrium_coefficients(eos, cfg.equilibrium);
    const SymbolTriplet trip = symbol_triplet(c);
    const TransformedTriplet tt = transformed_triplet(c);
    const std::vector<double> grid = mirrored_log_grid(sc.xi_min, sc.xi_max, sc.points_per_side, true);
    const std::vector<double> nonzero = mirrored_log_grid(sc.xi_min, sc.xi_max, sc.points_per_side, false);

    // closed-form against numeric eigenvalues of the transformed symbol
    CsvTable eig{"eigen_tracks.csv", {"xi", "closed_1", "closed_2", "closed_3", "numeric_1", "numeric_2", "numeric_3"}, {}};
    double max_diff = 0, min_gap = kInf;
    for (double xi : grid) {
        const auto cl = atilde_eigenvalues(c, xi);
        const Mat3 A = tt.Atilde_by_congruence(xi);
        const Eigen::Vector3d nu =
            Eigen::SelfAdjointEigenSolver<Mat3>(0.5 * (A + A.transpose()), Eigen::EigenvaluesOnly).eigenvalues();
        const double scale = std::max(1.0, nu.cwiseAbs().maxCoeff());
        for (int k = 0; k < 3; ++k) max_diff = std::max(max_diff, std::abs(cl[k] - nu(k)) / scale);
        min_gap = std::min({min_gap, (cl[1] - cl[0]) / scale, (cl[2] - cl[1]) / scale});
        eig.rows.push_back({csv_number(xi), csv_number(cl[0]), csv_number(cl[1]), csv_number(cl[2]),
                            csv_number(nu(0)), csv_number(nu(1)), csv_number(nu(2))});
    }
    r.tables.push_back(eig);
    r.criteria.push_back(at_most("transformed symbol: closed-form vs numeric eigenvalues (relative)", max_diff, 1e-12));
    r.criteria.push_back(at_least("transformed symbol: eigenvalues simple (relative gap)", min_gap, 1e-14));

    const CouplingReport cp = check_genuine_coupling(as_pencil(trip), nonzero);
    r.criteria.push_back(at_least("genuine coupling margin", cp.min_margin, cp.margin_tol,
                                  "worst xi " + csv_number(cp.worst_xi)));
    CsvTable ct{"coupling.csv", {"xi", "margin"}, {}};
    for (size_t i = 0; i < nonzero.size(); ++i) ct.rows.push_back({csv_number(nonzero[i]), csv_number(cp.margins[i])});
    r.tables.push_back(ct);

    const FriedrichsReport fr = check_friedrichs(trip);
    Criterion fc{"Friedrichs symmetrizer search conclusive", fr.conclusive, double(fr.nullspace_dim), 0, 0,
                 fr.feasible ? "feasible: constant symmetrizer found" : "infeasible: " + fr.certificate};
    r.criteria.push_back(fc);
    r.values["friedrichs"] = {{"feasible", fr.feasible},
                              {"conclusive", fr.conclusive},
                              {"nullspace_dim", fr.nullspace_dim},
                              {"certificate", fr.certificate},
                              {"min_eig_S", num(fr.min_eig_S)},
                              {"min_eig_SA0", num(fr.min_eig_SA0)}};

    const EpsWindow win = compensating_window(c);
    const double eps = sc.eps > 0 ? sc.eps : win.midpoint();
    std::vector<double> cgrid;
    for (double xi : grid)
        if (std::abs(xi) <= sc.certificate_xi_max) cgrid.push_back(xi);
    const CompensatingCertificate cc = verify_certificate(c, eps, cgrid);
    r.criteria.push_back(Criterion{"compensating matrix: eps inside window", cc.in_window, eps, 0, 0,
                                   "window (" + csv_number(win.lower) + ", " + csv_number(win.upper) + ")"});
    r.criteria.push_back(at_least("compensating matrix: lambda_min([K A]^s + B) - gamma_bar", cc.min_eig - cc.gamma_bar,
                                  -cc.tol, "at xi " + csv_number(cc.min_eig_xi)));
    r.criteria.push_back(at_most("compensating matrix: skew-symmetry residual", cc.max_skew_residual, 1e-14));
    r.values["compensating"] = {{"eps", eps},
                                {"gamma_bar", num(cc.gamma_bar)},
                                {"window", {num(win.lower), num(win.upper)}},
                                {"sup_K", num(cc.sup_K)},
                                {"sup_xiK", num(cc.sup_xiK)},
                                {"min_eig", num(cc.min_eig)}};

    const DissipativityType dt = spectral_bound(trip, grid);
    r.criteria.push_back(Criterion{"strict dissipativity", dt.strictly_dissipative, dt.max_sigma_nonzero, 0,
                                   -dt.max_sigma_nonzero, "worst xi " + csv_number(dt.worst_xi)});
    r.values["type"] = {{"classification", dt.classification},
                        {"p", num(dt.p)},
                        {"q", num(dt.q)},
                        {"slope_small", num(dt.slope_small)},
                        {"slope_large", num(dt.slope_large)},
                        {"residual_small", num(dt.residual_small)},
                        {"residual_large", num(dt.residual_large)},
                        {"c0", num(dt.c0)}};
    CsvTable st{"sigma.csv", {"xi", "sigma", "bound"}, {}};
    const double pr = std::round(dt.p), qr = std::round(dt.q);
    for (size_t i = 0; i < dt.xi.size(); ++i) {
        const double xi = dt.xi[i];
        const double bound = dt.strictly_dissipative
                                 ? -dt.c0 * std::pow(std::abs(xi), 2 * pr) / std::pow(1 + xi * xi, qr)
                                 : std::numeric_limits<double>::quiet_NaN();
        st.rows.push_back({csv_number(xi), csv_number(dt.sigma[i]), csv_number(bound)});
    }
    r.tables.push_back(st);

    // The Lyapunov functional is built around the capillary term; without it the
    // functional degenerates and the check is reported as not applicable.
    if (c.kbar <= 0) {
        r.values["lyapunov"] = {{"applicable", false}, {"reason", "zero capillarity at equilibrium"}};
    } else {
        LyapunovOptions lo;
        lo.n_modes = sc.lyapunov_modes;
        lo.seed = cfg.seed;
        lo.c0_grid = grid;
        const std::vector<double> lgrid =
            mirrored_log_grid(sc.lyapunov_xi_min, sc.lyapunov_xi_max, sc.lyapunov_points / 2, false);
        const LyapunovReport ly = lyapunov_check(c, eps, sc.delta, lgrid, lo);
        Criterion lc = at_most("Lyapunov: dUpsilon/dt + c0 xi^2 Upsilon", ly.max_violation, lo.tol,
                               ly.conclusive ? "c0 " + csv_number(ly.c0) : ly.note);
        lc.passed = lc.passed && ly.conclusive;
        r.criteria.push_back(lc);
        r.criteria.push_back(at_most("Lyapunov: sup |delta xi K|", ly.max_delta_xi_K, 0.5));
        r.values["lyapunov"] = {{"delta", sc.delta},
                                {"c0", num(ly.c0)},
                                {"conclusive", ly.conclusive},
                                {"max_imag_upsilon", num(ly.max_imag_upsilon)},
                                {"max_eig_consistency", num(ly.max_eig_consistency)},
                                {"checked", ly.n_checked}};
    }
    return r;
}

PipelineResult linear_decay(const RunConfig& cfg)
{
    PipelineResult r;
    r.subcommand = "linear-decay";
    const LinearConfig& lc = cfg.linear;
    const EquationOfState eos = make_eos(cfg.closure);
    const EquilibriumCoefficients c = equilibrium_coefficients(eos, cfg.equilibrium);
    NodeOptions no;
    no.n = lc.nodes;
    no.xi_max = lc.xi_max;
    no.min_spacing = lc.min_spacing;
    const SpectralProfile nodes = make_nodes(no);
    const SpectralProfile init = lc.profile == "gaussian"             ? gaussian_profile(nodes)
                                 : lc.profile == "zero-mass-gaussian" ? zero_mass_profile(nodes)
                                                                      : profile_from_csv(nodes, lc.profile_path);
    std::vector<double> times = log_space(lc.t_min, lc.t_max, lc.times);
    times.insert(times.begin(), 0.0);
    FitOptions fo;
    fo.window_lo = lc.window_lo;
    fo.window_hi = lc.window_hi;
    const DecayFit fit = evolve_and_fit(c, init, times, lc.ell, fo);

    CsvTable t{"decay.csv", {"t", "norm"}, {}};
    for (size_t i = 0; i < fit.times.size(); ++i) t.rows.push_back({csv_number(fit.times[i]), csv_number(fit.norms[i])});
    r.tables.push_back(t);

    const double predicted = -(0.5 * lc.ell + 0.25);
    r.criteria.push_back(at_most("decay fit residual", fit.residual, fo.residual_threshold));
    if (lc.profile == "zero-mass-gaussian") {
        // vanishing mass decays faster than the generic rate; recorded only
        r.values["note"] = "zero-mass data: exponent recorded, not matched to the L1 rate";
    } else {
        r.criteria.push_back(within("decay exponent", fit.exponent, predicted, lc.tolerance));
    }
    r.values["fit"] = {{"ell", lc.ell},
                       {"exponent", num(fit.exponent)},
                       {"predicted", predicted},
                       {"amplitude", num(fit.amplitude)},
                       {"residual", num(fit.residual)},
                       {"window", {fit.t_lo, fit.t_hi}},
                       {"fallback_nodes", fit.fallback_nodes}};
    return r;
}

PipelineResult nonlinear_run(const RunConfig& cfg)
{
    PipelineResult r;
    r.subcommand = "nonlinear-run";
    const NonlinearConfig& nc = cfg.nonlinear;
    const EquationOfState eos = make_eos(cfg.closure);
    RunSpec spec = nc.run;
    spec.domain = cfg.domain;
    const RunResult res = run(eos, cfg.equilibrium, spec);

    CsvTable t{"ledger.csv",
               {"t", "mass", "momentum", "energy", "entropy", "norm_u", "norm_w", "ratio", "max_n1", "max_n",
                "max_w1_residual"},
               {}};
    for (const LedgerRow& w : res.rows)
        t.rows.push_back({csv_number(w.t), csv_number(w.mass), csv_number(w.momentum), csv_number(w.energy),
                          csv_number(w.entropy), csv_number(w.norm_u), csv_number(w.norm_w), csv_number(w.ratio),
                          csv_number(w.max_n1), csv_number(w.max_n), csv_number(w.max_w1_residual)});
    r.tables.push_back(t);

    r.criteria.push_back(Criterion{"run completed", res.completed, res.t_reached, spec.T, res.t_reached - spec.T,
                                   res.completed ? "" : res.failure});
    r.criteria.push_back(at_most("mass drift", res.max_mass_drift, 1e-8));
    r.criteria.push_back(at_most("momentum drift", res.max_momentum_drift, 1e-8));
    r.criteria.push_back(at_most("energy drift", res.max_energy_drift, 1e-8));
    r.criteria.push_back(at_least("entropy increment per step", res.min_entropy_increment, -1e-9));
    r.criteria.push_back(at_most("max |N1| / field scale", res.max_n1 / std::max(1.0, res.field_scale), 1e-12));

    bool trivial = true;
    for (const LedgerRow& w : res.rows) trivial = trivial && w.norm_u == 0;
    if (trivial) {
        r.values["note"] = "zero perturbation: all perturbation norms vanish";
        r.criteria.push_back(at_most("perturbation norm", 0.0, 0.0));
    } else {
        Criterion ex{"decay exponent in [-0.5, -0.15]", res.decay_exponent >= -0.5 && res.decay_exponent <= -0.15,
                     res.decay_exponent, 0, std::min(res.decay_exponent + 0.5, -0.15 - res.decay_exponent),
                     "window [" + csv_number(res.fit_t_lo) + ", " + csv_number(res.fit_t_hi) + "]"};
        r.criteria.push_back(ex);
        r.criteria.push_back(at_most("largest relative norm increase in fit window", res.max_norm_increase,
                                     nc.max_norm_increase));
        Criterion band{"W / (U - Ubar) ratio band", res.ratio_min >= nc.ratio_lo && res.ratio_max <= nc.ratio_hi,
                       res.ratio_max, nc.ratio_hi, std::min(res.ratio_min - nc.ratio_lo, nc.ratio_hi - res.ratio_max),
                       "observed [" + csv_number(res.ratio_min) + ", " + csv_number(res.ratio_max) + "]"};
        r.criteria.push_back(band);
    }
    r.values["run"] = {{"steps", res.steps},
                       {"t_reached", res.t_reached},
                       {"t_wrap", res.t_wrap},
                       {"max_speed", res.max_speed},
                       {"scheme", scheme_name(spec.scheme)},
                       {"decay_exponent", num(res.decay_exponent)},
                       {"decay_residual", num(res.decay_residual)},
                       {"fit_window", {res.fit_t_lo, res.fit_t_hi}},
                       {"ratio", {num(res.ratio_min), num(res.ratio_max)}},
                       {"failure", res.failure}};
    return r;
}

int run_subcommand(const std::string& name, const RunConfig& cfg, const PipelineOptions& opt)
{
    const auto t0 = std::chrono::steady_clock::now();
    PipelineResult r;
    if (name == "verify-thermo")
        r = verify_thermo(cfg);
    else if (name == "analyze-symbol")
        r = analyze_symbol(cfg);
    else if (name == "linear-decay")
        r = linear_decay(cfg);
    else if (name == "nonlinear-run")
        r = nonlinear_run(cfg);
    else
        throw std::invalid_argument("unknown subcommand '" + name + "'");
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    namespace fs = std::filesystem;
    fs::create_directories(opt.out_dir);
    auto write = [&](const std::string& file, const std::string& text) {
        std::ofstream out(fs::path(opt.out_dir) / file, std::ios::binary);
        out << text;
        if (!out) throw std::runtime_error("cannot write " + (fs::path(opt.out_dir) / file).string());
    };
    for (const CsvTable& t : r.tables) write(t.file, t.render());

    nlohmann::ordered_json j;
    j["tool"] = "nsfk";
    j["version"] = kVersion;
    j["subcommand"] = r.subcommand;
    j["config"] = cfg.origin;
    j["config_hash"] = cfg.hash();
    j["seed"] = cfg.seed;
    j["passed"] = r.passed();
    j["criteria"] = nlohmann::ordered_json::array();
    for (const Criterion& c : r.criteria)
        j["criteria"].push_back({{"name", c.name},
                                 {"passed", c.passed},
                                 {"observed", num(c.observed)},
                                 {"tolerance", num(c.tolerance)},
                                 {"margin", num(c.margin)},
                                 {"detail", c.detail}});
    j["values"] = r.values;
    j["outputs"] = nlohmann::ordered_json::array();
    for (const CsvTable& t : r.tables) j["outputs"].push_back(t.file);
    j["elapsed_seconds"] = elapsed;
    write(r.subcommand + ".json", j.dump(2) + "\n");

    std::ostringstream s;
    s << r.subcommand << " (config hash " << cfg.hash() << ")\n";
    for (const Criterion& c : r.criteria) {
        s << (c.passed ? "PASS " : "FAIL ") << c.name << ": observed " << csv_number(c.observed);
        if (!c.detail.empty()) s << " (" << c.detail << ")";
        s << "\n";
    }
    if (r.values.contains("type")) s << "classification: " << r.values["type"]["classification"].get<std::string>() << "\n";
    s << (r.passed() ? "result: pass" : "result: FAIL") << "\n";
    r.summary = s.str();
    write(r.subcommand + ".txt", r.summary);
    if (!opt.quiet) std::cout << r.summary;
    return r.exit_code();
}

}  // namespace nsfk
