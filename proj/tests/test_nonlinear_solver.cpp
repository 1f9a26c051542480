#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "nsfk/nonlinear_solver.hpp"

using namespace nsfk;

namespace {

const double kPi = std::acos(-1.0);
const State kBar{1, 0, 1, 0};

EquationOfState reference()
{
    return ideal_gas_eos(1.0, 5.0 / 3.0, 1.0, 1.0, 1.0);
}

// Smooth periodic field built from a few low modes.
StateField smooth_field(int N, double L, double amp)
{
    StateField f = StateField::constant(N, L, kBar);
    for (int i = 0; i < N; ++i) {
        const double x = 2 * kPi * i / N;
        f.rho[i] += amp * (std::sin(x) + 0.5 * std::cos(2 * x + 0.3));
        f.u[i] += amp * (0.7 * std::cos(x) - 0.2 * std::sin(3 * x));
        f.theta[i] += amp * (0.4 * std::sin(2 * x) + 0.3 * std::cos(x + 1.0));
    }
    return f;
}

// Sixth-order central difference on a periodic sample.
std::vector<double> fd6(const std::vector<double>& g, double dx)
{
    const int n = static_cast<int>(g.size());
    std::vector<double> d(n);
    auto at = [&](int i) { return g[((i % n) + n) % n]; };
    for (int i = 0; i < n; ++i)
        d[i] = (45 * (at(i + 1) - at(i - 1)) - 9 * (at(i + 2) - at(i - 2)) + (at(i + 3) - at(i - 3))) / (60 * dx);
    return d;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b)
{
    double m = 0;
    for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

double field_distance(const StateField& a, const StateField& b)
{
    return std::max({max_abs_diff(a.rho, b.rho), max_abs_diff(a.u, b.u), max_abs_diff(a.theta, b.theta)});
}

StateField evolve(const EquationOfState& eos, const StateField& f0, double dt, double T, Scheme s)
{
    SpectralSolver solver(eos, kBar, f0.N(), f0.L);
    ConservedSpectrum V = solver.to_spectrum(f0);
    const int n = static_cast<int>(std::lround(T / dt));
    for (int k = 0; k < n; ++k) solver.step(V, dt, s);
    return solver.to_field(V);
}

}  // namespace

TEST(Rhs, ConstantFieldIsStationary)
{
    SpectralSolver solver(reference(), kBar, 64, 10);
    const StateField r = solver.rhs(StateField::constant(64, 10, kBar));
    for (int i = 0; i < 64; ++i) {
        EXPECT_LE(std::abs(r.rho[i]), 1e-15);
        EXPECT_LE(std::abs(r.u[i]), 1e-15);
        EXPECT_LE(std::abs(r.theta[i]), 1e-15);
    }
}

TEST(Rhs, EulerLimitMatchesFiniteDifferenceOracle)
{
    const double gamma = 5.0 / 3.0, L = 2 * kPi;
    const int N = 256;
    const EquationOfState eos = ideal_gas_eos_degenerate(1, gamma, 0, 0, 0);
    SpectralSolver solver(eos, kBar, N, L);
    const StateField f = smooth_field(N, L, 0.1);
    const StateField r = solver.rhs(f);

    // Euler in primitive form for p = rho theta, e = theta / (gamma - 1)
    const double dx = L / N;
    std::vector<double> m(N), p(N);
    for (int i = 0; i < N; ++i) {
        m[i] = f.rho[i] * f.u[i];
        p[i] = f.rho[i] * f.theta[i];
    }
    const auto mx = fd6(m, dx), px = fd6(p, dx), ux = fd6(f.u, dx), tx = fd6(f.theta, dx);
    std::vector<double> rt(N), ut(N), tt(N);
    for (int i = 0; i < N; ++i) {
        rt[i] = -mx[i];
        ut[i] = -f.u[i] * ux[i] - px[i] / f.rho[i];
        tt[i] = -f.u[i] * tx[i] - (gamma - 1) * f.theta[i] * ux[i];
    }
    EXPECT_LE(max_abs_diff(r.rho, rt), 1e-6);
    EXPECT_LE(max_abs_diff(r.u, ut), 1e-6);
    EXPECT_LE(max_abs_diff(r.theta, tt), 1e-6);
}

TEST(Rhs, MassRateIntegratesToZero)
{
    SpectralSolver solver(reference(), kBar, 128, 30);
    const StateField r = solver.rhs(smooth_field(128, 30, 0.2));
    EXPECT_LE(std::abs(solver.integral(r.rho)), 1e-13);
}

TEST(Step, ZeroDtIsIdentityAndEquilibriumIsFixed)
{
    SpectralSolver solver(reference(), kBar, 64, 20);
    ConservedSpectrum V = solver.to_spectrum(smooth_field(64, 20, 0.05));
    const ConservedSpectrum V0 = V;
    solver.step(V, 0.0, Scheme::RK4);
    for (int c = 0; c < 3; ++c) EXPECT_EQ(V.v[c], V0.v[c]);

    ConservedSpectrum E = solver.to_spectrum(StateField::constant(64, 20, kBar));
    for (int k = 0; k < 20; ++k) solver.step(E, 0.05, Scheme::IntegratingFactorRK4);
    const StateField f = solver.to_field(E);
    EXPECT_LE(field_distance(f, StateField::constant(64, 20, kBar)), 1e-14);
    EXPECT_TRUE(std::isinf(solver.stability_bound(E, Scheme::IntegratingFactorRK4)));
}

TEST(Step, FourthOrderSelfConvergence)
{
    // the integrating factor treats the linear part exactly, so it needs a
    // stronger nonlinearity and longer steps to leave the roundoff floor
    struct Case {
        Scheme s;
        double amp, dt, T;
    };
    for (const Case& k : {Case{Scheme::RK4, 0.05, 0.02, 0.4}, Case{Scheme::IntegratingFactorRK4, 0.1, 0.1, 2.0}}) {
        const Scheme s = k.s;
        const StateField f0 = smooth_field(64, 40, k.amp);
        const StateField ref = evolve(reference(), f0, k.dt / 16, k.T, s);
        const double e1 = field_distance(evolve(reference(), f0, k.dt, k.T, s), ref);
        const double e2 = field_distance(evolve(reference(), f0, k.dt / 2, k.T, s), ref);
        const double ratio = e1 / e2;
        EXPECT_GE(ratio, 12.8) << scheme_name(s) << " e1=" << e1 << " e2=" << e2;
        EXPECT_LE(ratio, 19.2) << scheme_name(s) << " e1=" << e1 << " e2=" << e2;
    }
}

TEST(Step, RejectsDtAboveStabilityBound)
{
    SpectralSolver solver(reference(), kBar, 256, 40);
    ConservedSpectrum V = solver.to_spectrum(smooth_field(256, 40, 0.05));
    const ConservedSpectrum V0 = V;
    const double bound = solver.stability_bound(V, Scheme::RK4);
    ASSERT_TRUE(std::isfinite(bound));
    try {
        solver.step(V, 2 * bound, Scheme::RK4);
        FAIL() << "expected StepRejected";
    } catch (const StepRejected& e) {
        EXPECT_EQ(e.dt(), 2 * bound);
        EXPECT_NE(std::string(e.what()).find("stability bound"), std::string::npos);
    }
    for (int c = 0; c < 3; ++c) EXPECT_EQ(V.v[c], V0.v[c]);
    EXPECT_NO_THROW(solver.step(V, 0.5 * bound, Scheme::RK4));
}

TEST(Step, RejectsDomainExit)
{
    Domain d;
    d.rho_min = 0.95;
    SpectralSolver solver(reference(), kBar, 64, 20, d);
    StateField f = smooth_field(64, 20, 0.02);
    for (double& r : f.rho) r -= 0.029;
    ConservedSpectrum V = solver.to_spectrum(f);
    bool rejected = false;
    for (int k = 0; k < 200 && !rejected; ++k) {
        try {
            solver.step(V, 0.05, Scheme::IntegratingFactorRK4);
        } catch (const StepRejected&) {
            rejected = true;
        }
    }
    EXPECT_TRUE(rejected);
}

TEST(WSystem, ExactAlongSolverRates)
{
    // A0 W_t + A1 W_x - B W_xx - C W_xxx = d/dx Ntilde with W_t = Dbar^{-1} F0_t and
    // F0_t = D_U F0 U_t + D_{U_x} F0 U_xt rebuilt from the solver's primitive rates
    const int N = 64;
    const double L = 2 * kPi;
    for (const EquationOfState& eos :
         {reference(), reference().with_kappa("linear", linear_in_theta_kappa(0.8, 6.0))}) {
        SpectralSolver solver(eos, kBar, N, L, Domain{}, false);
        const StateField f = smooth_field(N, L, 0.02);
        const StateField ut = solver.rhs(f);
        const std::vector<double> rxt = solver.derivative(ut.rho, 1);
        const FieldDerivatives d = solver.derivatives(f);
        const EquilibriumCoefficients& c = solver.coefficients();
        const Mat3 Dinv = jac_f0_inv(eos, kBar);

        std::vector<double> W[3], Nt[3];
        std::vector<Vec3> Wt(N);
        for (int k = 0; k < 3; ++k) {
            W[k].resize(N);
            Nt[k].resize(N);
        }
        double scale = 0;
        for (int i = 0; i < N; ++i) {
            const ExtendedState e = d.at(i);
            const Vec3 Ut(ut.rho[i], ut.u[i], ut.theta[i]), Uxt(rxt[i], 0, 0);
            Wt[i] = Dinv * (jac_F0(eos, e) * Ut + jac_F0_grad(eos, e) * Uxt);
            const Vec3 w = w_variables(eos, kBar, e);
            const Vec3 n = nonlinear_terms(eos, kBar, e).Ntilde;
            for (int k = 0; k < 3; ++k) {
                W[k][i] = w(k);
                Nt[k][i] = n(k);
            }
            scale = std::max(scale, (c.A0 * Wt[i]).norm());
        }
        std::vector<double> Wx[3], Wxx[3], Wxxx[3], Nx[3];
        for (int k = 0; k < 3; ++k) {
            Wx[k] = solver.derivative(W[k], 1);
            Wxx[k] = solver.derivative(W[k], 2);
            Wxxx[k] = solver.derivative(W[k], 3);
            Nx[k] = solver.derivative(Nt[k], 1);
        }
        double worst = 0;
        for (int i = 0; i < N; ++i) {
            const Vec3 a(Wx[0][i], Wx[1][i], Wx[2][i]), b(Wxx[0][i], Wxx[1][i], Wxx[2][i]);
            const Vec3 g(Wxxx[0][i], Wxxx[1][i], Wxxx[2][i]), n(Nx[0][i], Nx[1][i], Nx[2][i]);
            worst = std::max(worst, (c.A0 * Wt[i] + c.A1 * a - c.B * b - c.C * g - n).norm());
        }
        ASSERT_GT(scale, 1e-3);
        EXPECT_LE(worst, 1e-9 * scale) << eos.name();
    }
}

TEST(Diagnostics, FirstComponentVanishesAndW1IsDensity)
{
    SpectralSolver solver(reference(), kBar, 256, 40);
    StateField f = initial_field(256, 40, kBar, PerturbationSpec{});
    const ConservedSpectrum V = solver.to_spectrum(f);
    const WDiagnostics w = w_diagnostics(solver, V);
    EXPECT_LE(w.max_n1, 1e-12);
    EXPECT_LE(w.max_w1_residual, 0.0);
    EXPECT_GT(w.norm_u, 0);
    EXPECT_GT(w.ratio, 0.9);
    EXPECT_LT(w.ratio, 1.1);
}

TEST(Diagnostics, EquilibriumRatioUndefined)
{
    SpectralSolver solver(reference(), kBar, 64, 20);
    const WDiagnostics w = w_diagnostics(solver, solver.to_spectrum(StateField::constant(64, 20, kBar)));
    EXPECT_EQ(w.norm_u, 0);
    EXPECT_EQ(w.norm_w, 0);
    EXPECT_TRUE(std::isnan(w.ratio));
}

TEST(Diagnostics, NonlinearityQuadraticInAmplitude)
{
    SpectralSolver solver(reference(), kBar, 512, 80);
    PerturbationSpec p;
    p.fields = {"rho", "u", "theta"};
    p.amplitude = 2e-3;
    const double a = w_diagnostics(solver, solver.to_spectrum(initial_field(512, 80, kBar, p))).max_n;
    p.amplitude = 1e-3;
    const double b = w_diagnostics(solver, solver.to_spectrum(initial_field(512, 80, kBar, p))).max_n;
    EXPECT_NEAR(a / b, 4.0, 0.1);
}

TEST(Run, ConservationEntropyAndDecayOnShortRun)
{
    RunSpec s;
    s.N = 512;
    s.L = 100;
    s.T = 10;
    s.dt = 0.02;
    const RunResult r = run(reference(), kBar, s);
    ASSERT_TRUE(r.completed) << r.failure;
    EXPECT_EQ(r.rows.size(), 11u);
    EXPECT_LE(r.max_mass_drift, 1e-12);
    EXPECT_LE(r.max_momentum_drift, 1e-12);
    EXPECT_LE(r.max_energy_drift, 1e-12);
    EXPECT_GE(r.min_entropy_increment, -1e-9);
    EXPECT_LE(r.max_n1, 1e-12);
    for (size_t i = 1; i < r.rows.size(); ++i) {
        EXPECT_GT(r.rows[i].t, r.rows[i - 1].t);
        EXPECT_LT(r.rows[i].norm_u, r.rows[i - 1].norm_u);
        EXPECT_EQ(r.rows[i].max_w1_residual, 0.0);
    }
    EXPECT_NEAR(r.t_wrap, 100 / (2 * r.max_speed), 1e-12);
}

TEST(Run, ZeroAmplitudeIsTrivial)
{
    RunSpec s;
    s.N = 64;
    s.L = 20;
    s.T = 1;
    s.dt = 0.05;
    s.perturbation.amplitude = 0;
    const RunResult r = run(reference(), kBar, s);
    ASSERT_TRUE(r.completed);
    for (const LedgerRow& w : r.rows) {
        EXPECT_EQ(w.norm_u, 0);
        EXPECT_EQ(w.norm_w, 0);
    }
}

TEST(Run, DeterministicLedger)
{
    RunSpec s;
    s.N = 128;
    s.L = 40;
    s.T = 2;
    s.dt = 0.02;
    const RunResult a = run(reference(), kBar, s), b = run(reference(), kBar, s);
    ASSERT_EQ(a.rows.size(), b.rows.size());
    for (size_t i = 0; i < a.rows.size(); ++i) {
        EXPECT_EQ(a.rows[i].energy, b.rows[i].energy);
        EXPECT_EQ(a.rows[i].norm_u, b.rows[i].norm_u);
        EXPECT_EQ(a.rows[i].entropy, b.rows[i].entropy);
    }
}

TEST(Run, ResolutionDoublingChangesLittle)
{
    RunSpec s;
    s.L = 50;
    s.T = 1;
    s.dt = 1e-3;
    s.N = 512;
    const RunResult a = run(reference(), kBar, s);
    s.N = 1024;
    const RunResult b = run(reference(), kBar, s);
    ASSERT_TRUE(a.completed) << a.failure;
    ASSERT_TRUE(b.completed) << b.failure;
    EXPECT_LE(std::abs(a.rows.back().norm_u - b.rows.back().norm_u), 1e-6 * b.rows.back().norm_u);
}

TEST(Run, RejectedStepEndsWithPartialLedger)
{
    RunSpec s;
    s.N = 256;
    s.L = 40;
    s.T = 1;
    s.dt = 0.5;
    s.scheme = Scheme::RK4;
    const RunResult r = run(reference(), kBar, s);
    EXPECT_FALSE(r.completed);
    EXPECT_NE(r.failure.find("dt=0.5"), std::string::npos) << r.failure;
    EXPECT_EQ(r.rows.size(), 1u);
}

TEST(Setup, Validation)
{
    EXPECT_THROW(SpectralSolver(reference(), kBar, 100, 10), std::invalid_argument);
    EXPECT_THROW(SpectralSolver(reference(), kBar, 64, 0), std::invalid_argument);
    EXPECT_THROW(parse_scheme("euler"), std::invalid_argument);
    EXPECT_EQ(parse_scheme("rk4"), Scheme::RK4);
    EXPECT_EQ(parse_scheme(scheme_name(Scheme::IntegratingFactorRK4)), Scheme::IntegratingFactorRK4);
    PerturbationSpec p;
    p.shape = "square";
    EXPECT_THROW(initial_field(64, 10, kBar, p), std::invalid_argument);
    p.shape = "wave-packet";
    p.fields = {"pressure"};
    EXPECT_THROW(initial_field(64, 10, kBar, p), std::invalid_argument);
    p.fields = {"u"};
    const StateField f = initial_field(64, 10, kBar, p);
    EXPECT_NEAR(f.u[32], p.amplitude, 1e-15);
    EXPECT_EQ(f.rho[32], 1.0);
}
