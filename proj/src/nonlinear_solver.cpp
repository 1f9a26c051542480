#include "nsfk/nonlinear_solver.hpp"

#include <fftw3.h>
#include <unsupported/Eigen/MatrixFunctions>

#include "nsfk/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nsfk {

namespace {

constexpr double kPi = 3.14159265358979323846;
const cplx kI(0, 1);

}  // namespace

StateField StateField::constant(int N, double L, const State& s)
{
    StateField f;
    f.L = L;
    f.rho.assign(N, s.rho);
    f.u.assign(N, s.u);
    f.theta.assign(N, s.theta);
    return f;
}

ExtendedState FieldDerivatives::at(int i) const
{
    ExtendedState e;
    e.rho = rho[i];
    e.u = u[i];
    e.theta = theta[i];
    e.rho_x = rho_x[i];
    e.u_x = u_x[i];
    e.theta_x = theta_x[i];
    e.rho_xx = rho_xx[i];
    e.u_xx = u_xx[i];
    e.theta_xx = theta_xx[i];
    e.rho_xxx = rho_xxx[i];
    return e;
}

Scheme parse_scheme(const std::string& name)
{
    if (name == "rk4") return Scheme::RK4;
    if (name == "if-rk4") return Scheme::IntegratingFactorRK4;
    throw std::invalid_argument("unknown scheme '" + name + "' (expected rk4 or if-rk4)");
}

std::string scheme_name(Scheme s)
{
    return s == Scheme::RK4 ? "rk4" : "if-rk4";
}

// FFTW plans on fixed buffers; FFTW_ESTIMATE keeps the algorithm choice, and
// therefore the rounding, identical from run to run.
struct SpectralSolver::Fft {
    int n;
    double* real;
    fftw_complex* spec;
    fftw_plan r2c, c2r;

    explicit Fft(int n_)
        : n(n_), real(fftw_alloc_real(n_)), spec(fftw_alloc_complex(n_ / 2 + 1)),
          r2c(fftw_plan_dft_r2c_1d(n_, real, spec, FFTW_ESTIMATE)),
          c2r(fftw_plan_dft_c2r_1d(n_, spec, real, FFTW_ESTIMATE))
    {
    }
    ~Fft()
    {
        fftw_destroy_plan(c2r);
        fftw_destroy_plan(r2c);
        fftw_free(spec);
        fftw_free(real);
    }
};

SpectralSolver::SpectralSolver(EquationOfState eos, const State& equilibrium, int N, double L,
                               Domain domain, bool dealias)
    : eos_(std::move(eos)), ubar_{equilibrium.rho, equilibrium.u, equilibrium.theta, 0},
      coeffs_(equilibrium_coefficients(eos_, ubar_)), N_(N), L_(L), domain_(domain),
      dealias_(dealias)
{
    if (N < 8 || (N & (N - 1)) != 0) throw std::invalid_argument("grid size N must be a power of two >= 8");
    if (!(L > 0)) throw std::invalid_argument("domain length L must be positive");
    K_ = N / 2 + 1;
    kcut_ = dealias ? N / 3 : N / 2 - 1;
    xi_.resize(K_);
    for (int k = 0; k < K_; ++k) xi_[k] = 2 * kPi * k / L;

    // linear operator of the conserved variables: V_t = -Dbar M Dbar^{-1} V
    const Mat3 D = jac_f0(eos_, ubar_);
    const Mat3c Dc = D.cast<cplx>();
    const Mat3c Dinv = D.inverse().cast<cplx>();
    lin_.resize(K_);
    for (int k = 0; k < K_; ++k) lin_[k] = -(Dc * evolution_symbol(coeffs_, xi_[k]) * Dinv);
    fft_ = std::make_unique<Fft>(N);
}

SpectralSolver::~SpectralSolver() = default;

double SpectralSolver::xi_cut() const
{
    return xi_[kcut_];
}

void SpectralSolver::forward(const std::vector<double>& in, std::vector<cplx>& out)
{
    std::copy(in.begin(), in.end(), fft_->real);
    fftw_execute(fft_->r2c);
    out.resize(K_);
    const double s = 1.0 / N_;
    for (int k = 0; k < K_; ++k) out[k] = cplx(fft_->spec[k][0], fft_->spec[k][1]) * s;
}

void SpectralSolver::backward(const std::vector<cplx>& in, std::vector<double>& out)
{
    for (int k = 0; k < K_; ++k) {
        fft_->spec[k][0] = in[k].real();
        fft_->spec[k][1] = in[k].imag();
    }
    // the Nyquist mode carries no sine part and is dropped for odd symmetry
    fft_->spec[K_ - 1][1] = 0;
    fftw_execute(fft_->c2r);
    out.assign(fft_->real, fft_->real + N_);
}

std::vector<double> SpectralSolver::derivative(const std::vector<double>& g, int order)
{
    std::vector<cplx> s;
    forward(g, s);
    const cplx f = order == 1 ? kI : order == 2 ? cplx(-1, 0) : -kI;
    for (int k = 0; k < K_; ++k) s[k] *= f * std::pow(xi_[k], order);
    s[K_ - 1] = 0;
    std::vector<double> out;
    backward(s, out);
    return out;
}

double SpectralSolver::integral(const std::vector<double>& g) const
{
    double s = 0;
    for (double v : g) s += v;
    return s * dx();
}

ConservedSpectrum SpectralSolver::to_spectrum(const StateField& f)
{
    if (f.N() != N_) throw std::invalid_argument("field size does not match the solver grid");
    const std::vector<double> rx = derivative(f.rho, 1);
    std::vector<double> v[3];
    for (auto& a : v) a.resize(N_);
    for (int i = 0; i < N_; ++i) {
        ExtendedState e;
        e.rho = f.rho[i];
        e.u = f.u[i];
        e.theta = f.theta[i];
        e.rho_x = rx[i];
        const Vec3 F = conserved_quantities(eos_, e);
        for (int c = 0; c < 3; ++c) v[c][i] = F(c);
    }
    ConservedSpectrum V;
    for (int c = 0; c < 3; ++c) {
        forward(v[c], V.v[c]);
        for (int k = kcut_ + 1; k < K_; ++k) V.v[c][k] = 0;
    }
    theta_guess_ = f.theta;
    return V;
}

StateField SpectralSolver::to_field(const ConservedSpectrum& V)
{
    StateField f;
    f.L = L_;
    std::vector<double> m, E;
    backward(V.v[0], f.rho);
    backward(V.v[1], m);
    backward(V.v[2], E);
    std::vector<cplx> rs = V.v[0];
    for (int k = 0; k < K_; ++k) rs[k] *= kI * xi_[k];
    rs[K_ - 1] = 0;
    std::vector<double> rx;
    backward(rs, rx);

    f.u.resize(N_);
    f.theta.resize(N_);
    if (theta_guess_.size() != static_cast<size_t>(N_)) theta_guess_.assign(N_, ubar_.theta);
    for (int i = 0; i < N_; ++i) {
        const double r = f.rho[i];
        if (!(r > 0)) throw DomainError("density left the domain at x=" + std::to_string(i * dx()));
        const double u = m[i] / r;
        f.u[i] = u;
        const double target = E[i] / r - 0.5 * u * u;
        const double g2 = rx[i] * rx[i];
        double th = theta_guess_[i] > 0 ? theta_guess_[i] : ubar_.theta;
        for (int it = 0; it < 50; ++it) {
            const ThermoPoint q = eos_.eval(r, th);
            const double eps = q.e + (q.kappa.v - th * q.kappa.t) * g2;
            const double eps_t = q.e_t - th * q.kappa.tt * g2;
            double step = (eps - target) / eps_t;
            // keep the iterate positive
            if (th - step <= 0) step = 0.5 * th;
            th -= step;
            if (std::abs(step) <= 1e-15 * th) break;
        }
        f.theta[i] = th;
        theta_guess_[i] = th;
    }
    return f;
}

FieldDerivatives SpectralSolver::derivatives(const StateField& f)
{
    FieldDerivatives d;
    d.rho = f.rho;
    d.u = f.u;
    d.theta = f.theta;
    std::vector<cplx> r, u, t;
    forward(f.rho, r);
    forward(f.u, u);
    forward(f.theta, t);
    auto deriv = [&](const std::vector<cplx>& s, int order, std::vector<double>& out) {
        std::vector<cplx> w = s;
        const cplx fac = order == 1 ? kI : order == 2 ? cplx(-1, 0) : -kI;
        for (int k = 0; k < K_; ++k) w[k] *= fac * std::pow(xi_[k], order);
        w[K_ - 1] = 0;
        backward(w, out);
    };
    deriv(r, 1, d.rho_x);
    deriv(r, 2, d.rho_xx);
    deriv(r, 3, d.rho_xxx);
    deriv(u, 1, d.u_x);
    deriv(u, 2, d.u_xx);
    deriv(t, 1, d.theta_x);
    deriv(t, 2, d.theta_xx);
    return d;
}

FieldDerivatives SpectralSolver::derivatives(const ConservedSpectrum& V)
{
    return derivatives(to_field(V));
}

void SpectralSolver::conserved_rate(const ConservedSpectrum& V, ConservedSpectrum& dV)
{
    const StateField f = to_field(V);
    std::vector<cplx> rs = V.v[0], us, ts;
    forward(f.u, us);
    forward(f.theta, ts);

    auto deriv = [&](const std::vector<cplx>& s, int order) {
        std::vector<cplx> w = s;
        const cplx fac = order == 1 ? kI : order == 2 ? cplx(-1, 0) : -kI;
        for (int k = 0; k < K_; ++k) w[k] *= fac * std::pow(xi_[k], order);
        w[K_ - 1] = 0;
        std::vector<double> out;
        backward(w, out);
        return out;
    };
    const std::vector<double> rx = deriv(rs, 1), rxx = deriv(rs, 2);
    const std::vector<double> ux = deriv(us, 1), tx = deriv(ts, 1);

    std::vector<double> phi2(N_), phi3(N_);
    for (int i = 0; i < N_; ++i) {
        const double r = f.rho[i], u = f.u[i], th = f.theta[i];
        const ThermoPoint q = eos_.eval(r, th);
        const double g2 = rx[i] * rx[i];
        const double eps = q.e + (q.kappa.v - th * q.kappa.t) * g2;
        const double E = r * (eps + 0.5 * u * u);
        const double k = 2 * r * q.kappa.v;
        const double k_r = 2 * q.kappa.v + 2 * r * q.kappa.r;
        const double k_t = 2 * r * q.kappa.t;
        const double k_x = k_r * rx[i] + k_t * tx[i];
        const double K = k * r * rxx[i] + r * k_x * rx[i] - 0.5 * k_r * r * g2 - 0.5 * k * g2;
        const double w = -k * r * rx[i] * ux[i];
        const double mu = q.mu.v, al = q.alpha.v;
        phi2[i] = -(r * u * u + q.p) + mu * ux[i] + K;
        phi3[i] = -(u * (E + q.p)) + al * tx[i] + mu * u * ux[i] + u * K + w;
    }

    std::vector<cplx> p2, p3;
    forward(phi2, p2);
    forward(phi3, p3);
    for (int c = 0; c < 3; ++c) dV.v[c].assign(K_, 0.0);
    for (int k = 0; k <= kcut_; ++k) {
        const cplx d = kI * xi_[k];
        dV.v[0][k] = -d * V.v[1][k];
        dV.v[1][k] = d * p2[k];
        dV.v[2][k] = d * p3[k];
    }
}

StateField SpectralSolver::rhs(const StateField& f)
{
    const ConservedSpectrum V = to_spectrum(f);
    ConservedSpectrum dV;
    conserved_rate(V, dV);
    const StateField g = to_field(V);
    std::vector<double> rt, mt, Et;
    backward(dV.v[0], rt);
    backward(dV.v[1], mt);
    backward(dV.v[2], Et);
    const std::vector<double> rx = derivative(g.rho, 1);
    const std::vector<double> rxt = derivative(rt, 1);

    StateField out;
    out.L = L_;
    out.rho = rt;
    out.u.resize(N_);
    out.theta.resize(N_);
    for (int i = 0; i < N_; ++i) {
        const double r = g.rho[i], u = g.u[i], th = g.theta[i];
        ExtendedState e;
        e.rho = r;
        e.u = u;
        e.theta = th;
        e.rho_x = rx[i];
        const Mat3 J = jac_F0(eos_, e);
        const double eps_g = jac_F0_grad(eos_, e)(2, 0);
        const double ut = (mt[i] - u * rt[i]) / r;
        const double tt = (Et[i] - J(2, 0) * rt[i] - J(2, 1) * ut - eps_g * rxt[i]) / J(2, 2);
        out.u[i] = ut;
        out.theta[i] = tt;
    }
    return out;
}

void SpectralSolver::prepare_exponentials(double dt)
{
    if (dt == exp_dt_) return;
    e_half_.resize(K_);
    e_full_.resize(K_);
    for (int k = 0; k < K_; ++k) {
        if (k > kcut_ || xi_[k] == 0) {
            e_half_[k] = e_full_[k] = Mat3c::Identity();
            continue;
        }
        e_half_[k] = (0.5 * dt * lin_[k]).exp();
        e_full_[k] = e_half_[k] * e_half_[k];
    }
    exp_dt_ = dt;
}

void SpectralSolver::apply_exp(const std::vector<Mat3c>& E, const ConservedSpectrum& in,
                               ConservedSpectrum& out) const
{
    for (int c = 0; c < 3; ++c) out.v[c].resize(K_);
    for (int k = 0; k < K_; ++k) {
        const Vec3c x(in.v[0][k], in.v[1][k], in.v[2][k]);
        const Vec3c y = E[k] * x;
        for (int c = 0; c < 3; ++c) out.v[c][k] = y(c);
    }
}

void SpectralSolver::nonlinear_rate(const ConservedSpectrum& V, ConservedSpectrum& out)
{
    conserved_rate(V, out);
    for (int k = 0; k <= kcut_; ++k) {
        const Vec3c x(V.v[0][k], V.v[1][k], V.v[2][k]);
        const Vec3c y = lin_[k] * x;
        for (int c = 0; c < 3; ++c) out.v[c][k] -= y(c);
    }
}

namespace {

ConservedSpectrum axpy(const ConservedSpectrum& x, double a, const ConservedSpectrum& y)
{
    ConservedSpectrum z;
    for (int c = 0; c < 3; ++c) {
        z.v[c].resize(x.v[c].size());
        for (size_t k = 0; k < x.v[c].size(); ++k) z.v[c][k] = x.v[c][k] + a * y.v[c][k];
    }
    return z;
}

}  // namespace

void SpectralSolver::check_domain(const StateField& f, double dt) const
{
    for (int i = 0; i < N_; ++i) {
        if (!(f.rho[i] > domain_.rho_min) || !(f.theta[i] > domain_.theta_min) ||
            !std::isfinite(f.u[i])) {
            throw StepRejected("step with dt=" + std::to_string(dt) +
                                   " leaves the admissible domain at x=" + std::to_string(i * dx()),
                               dt);
        }
    }
}

double SpectralSolver::stability_bound(const ConservedSpectrum& V, Scheme scheme)
{
    if (scheme == Scheme::RK4) {
        double rad = 0;
        for (int k = 0; k <= kcut_; ++k) {
            Eigen::ComplexEigenSolver<Mat3c> es(lin_[k], false);
            rad = std::max(rad, es.eigenvalues().cwiseAbs().maxCoeff());
        }
        return rad > 0 ? 2.8 / rad : std::numeric_limits<double>::infinity();
    }
    const StateField f = to_field(V);
    const std::vector<double> rx = derivative(f.rho, 1);
    const ThermoPoint qb = eos_.eval(ubar_.rho, ubar_.theta);
    const double kbar = 2 * ubar_.rho * qb.kappa.v;
    const double cbar = std::sqrt(qb.p_r + qb.p_t * qb.p_t * ubar_.theta / (ubar_.rho * ubar_.rho * qb.e_t));
    const double nu_bar = qb.mu.v / ubar_.rho, chi_bar = qb.alpha.v / (ubar_.rho * qb.e_t);
    double du = 0, dc = 0, dnu = 0, dk = 0;
    for (int i = 0; i < N_; ++i) {
        const double r = f.rho[i], th = f.theta[i];
        const ThermoPoint q = eos_.eval(r, th);
        const double eps_t = q.e_t - th * q.kappa.tt * rx[i] * rx[i];
        const double c = std::sqrt(std::max(0.0, q.p_r + q.p_t * q.p_t * th / (r * r * eps_t)));
        du = std::max(du, std::abs(f.u[i] - ubar_.u));
        dc = std::max(dc, std::abs(c - cbar));
        dnu = std::max({dnu, std::abs(q.mu.v / r - nu_bar), std::abs(q.alpha.v / (r * eps_t) - chi_bar)});
        dk = std::max(dk, std::abs(2 * r * q.kappa.v - kbar));
    }
    const double x = xi_cut();
    const double rate = x * (du + dc) + x * x * dnu + x * x * x * dk;
    return rate > 0 ? 2.8 / rate : std::numeric_limits<double>::infinity();
}

void SpectralSolver::step(ConservedSpectrum& V, double dt, Scheme scheme)
{
    if (dt < 0) throw std::invalid_argument("dt must be nonnegative");
    if (dt == 0) return;
    const double bound = stability_bound(V, scheme);
    if (dt > bound)
        throw StepRejected("dt=" + std::to_string(dt) + " exceeds the " + scheme_name(scheme) +
                               " stability bound " + std::to_string(bound),
                           dt);

    const std::vector<double> guess = theta_guess_;
    ConservedSpectrum out;
    try {
        if (scheme == Scheme::RK4) {
            ConservedSpectrum k1, k2, k3, k4;
            conserved_rate(V, k1);
            conserved_rate(axpy(V, 0.5 * dt, k1), k2);
            conserved_rate(axpy(V, 0.5 * dt, k2), k3);
            conserved_rate(axpy(V, dt, k3), k4);
            out = V;
            for (int c = 0; c < 3; ++c)
                for (int k = 0; k < K_; ++k)
                    out.v[c][k] += dt / 6 * (k1.v[c][k] + 2.0 * k2.v[c][k] + 2.0 * k3.v[c][k] + k4.v[c][k]);
        } else {
            // Lawson form: exact propagation of the linearized part
            prepare_exponentials(dt);
            ConservedSpectrum k1, k2, k3, k4, a, b, ev, eh;
            nonlinear_rate(V, k1);
            apply_exp(e_half_, axpy(V, 0.5 * dt, k1), a);
            nonlinear_rate(a, k2);
            apply_exp(e_half_, V, eh);
            nonlinear_rate(axpy(eh, 0.5 * dt, k2), k3);
            apply_exp(e_half_, k3, b);
            apply_exp(e_full_, V, ev);
            nonlinear_rate(axpy(ev, dt, b), k4);
            ConservedSpectrum e1, e23, s23;
            apply_exp(e_full_, k1, e1);
            s23 = axpy(k2, 1.0, k3);
            apply_exp(e_half_, s23, e23);
            out = ev;
            for (int c = 0; c < 3; ++c)
                for (int k = 0; k < K_; ++k)
                    out.v[c][k] += dt / 6 * (e1.v[c][k] + 2.0 * e23.v[c][k] + k4.v[c][k]);
        }
        for (int c = 0; c < 3; ++c) {
            for (int k = kcut_ + 1; k < K_; ++k) out.v[c][k] = 0;
            out.v[c][0] = cplx(out.v[c][0].real(), 0);
        }
        check_domain(to_field(out), dt);
    } catch (const DomainError& e) {
        theta_guess_ = guess;
        throw StepRejected(std::string("step with dt=") + std::to_string(dt) + " failed: " + e.what(), dt);
    } catch (const StepRejected&) {
        theta_guess_ = guess;
        throw;
    }
    V = std::move(out);
}

StateField initial_field(int N, double L, const State& equilibrium, const PerturbationSpec& p)
{
    if (p.shape != "gaussian" && p.shape != "wave-packet")
        throw std::invalid_argument("unknown perturbation shape '" + p.shape + "'");
    if (!(p.width > 0)) throw std::invalid_argument("perturbation width must be positive");
    StateField f = StateField::constant(N, L, equilibrium);
    const double x0 = p.center >= 0 ? p.center : 0.5 * L;
    for (const std::string& name : p.fields) {
        std::vector<double>* target = name == "rho" ? &f.rho : name == "u" ? &f.u : name == "theta" ? &f.theta : nullptr;
        if (!target) throw std::invalid_argument("unknown perturbed field '" + name + "'");
        for (int i = 0; i < N; ++i) {
            const double x = L * i / N;
            double d = x - x0;
            d -= L * std::round(d / L);
            double g = std::exp(-(d / p.width) * (d / p.width));
            if (p.shape == "wave-packet") g *= std::cos(p.wavenumber * d);
            (*target)[i] += p.amplitude * g;
        }
    }
    return f;
}

double relative_drift(double now, double start, double scale)
{
    return std::abs(now - start) / std::max(std::abs(start), scale);
}

WDiagnostics w_diagnostics(SpectralSolver& solver, const ConservedSpectrum& V)
{
    const FieldDerivatives d = solver.derivatives(V);
    const State& ub = solver.equilibrium();
    const EquationOfState& eos = solver.eos();
    const int N = solver.N();
    WDiagnostics out;
    out.W.resize(N);
    std::vector<double> w1(N);
    double su = 0, sw = 0;
    std::vector<double> n1(N), nn(N), ann(N);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < N; ++i) {
        const ExtendedState e = d.at(i);
        out.W[i] = w_variables(eos, ub, e);
        const NonlinearTerms nt = nonlinear_terms(eos, ub, e);
        n1[i] = std::abs(nt.N(0));
        nn[i] = nt.N.cwiseAbs().maxCoeff();
        ann[i] = nt.annihilated_residual;
    }
    for (int i = 0; i < N; ++i) {
        w1[i] = out.W[i](0);
        out.max_n1 = std::max(out.max_n1, n1[i]);
        out.max_n = std::max(out.max_n, nn[i]);
        out.max_annihilated = std::max(out.max_annihilated, ann[i]);
        out.max_w1_residual = std::max(out.max_w1_residual, std::abs(out.W[i](0) - (d.rho[i] - ub.rho)));
    }
    const std::vector<double> w1x = solver.derivative(w1, 1);
    for (int i = 0; i < N; ++i) {
        const double dr = d.rho[i] - ub.rho, du = d.u[i] - ub.u, dt = d.theta[i] - ub.theta;
        su += dr * dr + d.rho_x[i] * d.rho_x[i] + du * du + dt * dt;
        sw += w1[i] * w1[i] + w1x[i] * w1x[i] + out.W[i](1) * out.W[i](1) + out.W[i](2) * out.W[i](2);
    }
    out.norm_u = std::sqrt(su * solver.dx());
    out.norm_w = std::sqrt(sw * solver.dx());
    out.ratio = out.norm_u > 0 ? out.norm_w / out.norm_u : std::numeric_limits<double>::quiet_NaN();
    return out;
}

RunResult run(const EquationOfState& eos, const State& equilibrium, const RunSpec& spec,
              const std::function<void(const LedgerRow&)>& on_row)
{
    if (!(spec.dt > 0)) throw std::invalid_argument("dt must be positive");
    if (!(spec.T >= 0)) throw std::invalid_argument("T must be nonnegative");
    if (!(spec.sample_interval > 0)) throw std::invalid_argument("sample interval must be positive");
    spec.domain.validate();

    SpectralSolver solver(eos, equilibrium, spec.N, spec.L, spec.domain);
    StateField f0 = initial_field(spec.N, spec.L, equilibrium, spec.perturbation);
    ConservedSpectrum V = solver.to_spectrum(f0);

    RunResult res;
    const EquilibriumCoefficients& c = solver.coefficients();
    res.max_speed = std::abs(equilibrium.u) + std::sqrt(c.cbar * c.cbar + c.p_rho);
    res.t_wrap = spec.L / (2 * res.max_speed);
    res.fit_t_hi = std::min(spec.T, res.t_wrap);
    res.fit_t_lo = spec.fit_t_lo > 0 ? spec.fit_t_lo : res.t_wrap / 10;
    res.min_entropy_increment = std::numeric_limits<double>::infinity();

    auto totals = [&](const StateField& f, double& mass, double& mom, double& energy, double& entropy) {
        const std::vector<double> rx = solver.derivative(f.rho, 1);
        std::vector<double> a(spec.N), b(spec.N), e(spec.N), s(spec.N);
        for (int i = 0; i < spec.N; ++i) {
            const State st{f.rho[i], f.u[i], f.theta[i], rx[i]};
            a[i] = f.rho[i];
            b[i] = f.rho[i] * f.u[i];
            e[i] = f.rho[i] * (nonstandard_energy(eos, st) + 0.5 * f.u[i] * f.u[i]);
            s[i] = f.rho[i] * nonstandard_entropy(eos, st);
        }
        mass = solver.integral(a);
        mom = solver.integral(b);
        energy = solver.integral(e);
        entropy = solver.integral(s);
    };

    double m0 = 0, p0 = 0, e0 = 0, s_prev = 0;
    auto sample = [&](double t) {
        const StateField f = solver.to_field(V);
        LedgerRow row;
        row.t = t;
        totals(f, row.mass, row.momentum, row.energy, row.entropy);
        const WDiagnostics wd = w_diagnostics(solver, V);
        row.norm_u = wd.norm_u;
        row.norm_w = wd.norm_w;
        row.ratio = wd.ratio;
        row.max_n1 = wd.max_n1;
        row.max_n = wd.max_n;
        row.max_w1_residual = wd.max_w1_residual;
        double scale = 0;
        for (int i = 0; i < spec.N; ++i)
            scale = std::max({scale, std::abs(f.rho[i]), std::abs(f.u[i]), std::abs(f.theta[i])});
        res.field_scale = std::max(res.field_scale, scale);
        res.max_n1 = std::max(res.max_n1, wd.max_n1);
        res.rows.push_back(row);
        if (on_row) on_row(row);
    };

    {
        const StateField f = solver.to_field(V);
        double s0;
        totals(f, m0, p0, e0, s0);
        s_prev = s0;
    }
    sample(0.0);
    const double mom_scale = std::abs(m0) * res.max_speed;

    const long nsteps = std::lround(spec.T / spec.dt);
    const long per_sample = std::max(1L, std::lround(spec.sample_interval / spec.dt));
    try {
        for (long n = 1; n <= nsteps; ++n) {
            solver.step(V, spec.dt, spec.scheme);
            ++res.steps;
            const double t = n * spec.dt;
            res.t_reached = t;
            const StateField f = solver.to_field(V);
            double m, p, e, s;
            totals(f, m, p, e, s);
            res.min_entropy_increment = std::min(res.min_entropy_increment, s - s_prev);
            s_prev = s;
            res.max_mass_drift = std::max(res.max_mass_drift, relative_drift(m, m0, 0));
            res.max_momentum_drift = std::max(res.max_momentum_drift, relative_drift(p, p0, mom_scale));
            res.max_energy_drift = std::max(res.max_energy_drift, relative_drift(e, e0, 0));
            if (n % per_sample == 0 || n == nsteps) sample(t);
        }
        res.completed = true;
    } catch (const std::exception& ex) {
        res.failure = ex.what();
    }
    if (res.steps == 0) res.min_entropy_increment = 0;

    res.ratio_min = std::numeric_limits<double>::infinity();
    res.ratio_max = -std::numeric_limits<double>::infinity();
    std::vector<double> xs, ys;
    double prev = -1;
    for (const LedgerRow& r : res.rows) {
        if (std::isfinite(r.ratio)) {
            res.ratio_min = std::min(res.ratio_min, r.ratio);
            res.ratio_max = std::max(res.ratio_max, r.ratio);
        }
        if (r.t >= res.fit_t_lo - 1e-9 && r.t <= res.fit_t_hi + 1e-9 && r.norm_u > 0) {
            xs.push_back(std::log1p(r.t));
            ys.push_back(std::log(r.norm_u));
            if (prev > 0) res.max_norm_increase = std::max(res.max_norm_increase, r.norm_u / prev - 1);
            prev = r.norm_u;
        }
    }
    if (!std::isfinite(res.ratio_min)) res.ratio_min = res.ratio_max = std::numeric_limits<double>::quiet_NaN();
    if (xs.size() >= 2) {
        const LineFit lf = fit_line(xs, ys);
        res.decay_exponent = lf.slope;
        res.decay_residual = lf.rms_residual;
    } else {
        res.decay_exponent = std::numeric_limits<double>::quiet_NaN();
    }
    return res;
}

}  // namespace nsfk
