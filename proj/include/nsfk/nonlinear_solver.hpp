/// \file nonlinear_solver.hpp
/// \brief Pseudo-spectral integrator for the full capillary system on a periodic
/// domain, with conservation, entropy and perturbation-variable diagnostics.
#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "nsfk/linear_evolution.hpp"
#include "nsfk/symbols.hpp"

namespace nsfk {

using cplx = std::complex<double>;

/// Primitive fields on N equispaced points of [0, L).
struct StateField {
    double L = 0;
    std::vector<double> rho, u, theta;

    int N() const { return static_cast<int>(rho.size()); }
    static StateField constant(int N, double L, const State& s);
};

/// Spectral coefficients (r2c layout, N/2 + 1 modes) of the conserved
/// quantities (rho, rho u, rho (epsilon + u^2/2)).
struct ConservedSpectrum {
    std::vector<cplx> v[3];
};

/// Pointwise derivatives of a primitive field up to the orders the capillary
/// terms need.
struct FieldDerivatives {
    std::vector<double> rho, u, theta;
    std::vector<double> rho_x, u_x, theta_x;
    std::vector<double> rho_xx, u_xx, theta_xx;
    std::vector<double> rho_xxx;

    ExtendedState at(int i) const;
};

enum class Scheme { RK4, IntegratingFactorRK4 };

Scheme parse_scheme(const std::string& name);
std::string scheme_name(Scheme s);

/// Raised when a step would leave the admissible domain or violates the
/// advertised stability bound.
class StepRejected : public std::runtime_error {
public:
    StepRejected(const std::string& what, double dt) : std::runtime_error(what), dt_(dt) {}
    double dt() const { return dt_; }

private:
    double dt_;
};

class SpectralSolver {
public:
    SpectralSolver(EquationOfState eos, const State& equilibrium, int N, double L,
                   Domain domain = {}, bool dealias = true);
    ~SpectralSolver();
    SpectralSolver(const SpectralSolver&) = delete;
    SpectralSolver& operator=(const SpectralSolver&) = delete;

    int N() const { return N_; }
    double L() const { return L_; }
    double dx() const { return L_ / N_; }
    /// Largest wavenumber kept by the dealiasing filter.
    double xi_cut() const;
    const EquationOfState& eos() const { return eos_; }
    const State& equilibrium() const { return ubar_; }
    const EquilibriumCoefficients& coefficients() const { return coeffs_; }

    ConservedSpectrum to_spectrum(const StateField& f);
    /// Recovers (rho, u, theta); theta by Newton on the energy at fixed rho_x.
    StateField to_field(const ConservedSpectrum& V);
    FieldDerivatives derivatives(const ConservedSpectrum& V);
    FieldDerivatives derivatives(const StateField& f);

    /// d/dt of the conserved spectrum.
    void conserved_rate(const ConservedSpectrum& V, ConservedSpectrum& dV);
    /// (rho_t, u_t, theta_t) through the chain rule on the conserved quantities.
    StateField rhs(const StateField& f);

    /// Advances V by dt. Throws StepRejected if dt exceeds the stability bound
    /// or the new state leaves the domain; V is left unchanged in that case.
    void step(ConservedSpectrum& V, double dt, Scheme scheme);
    /// Advertised step bound. RK4: 2.8 over the spectral radius of the linear
    /// symbol on the kept modes. Integrating factor: 2.8 over a rate built from
    /// the deviation of the local coefficients from their equilibrium values.
    double stability_bound(const ConservedSpectrum& V, Scheme scheme);

    /// Trapezoid sums over the period.
    double integral(const std::vector<double>& g) const;
    /// Spectral derivative of a periodic sample, order 1..3, not filtered.
    std::vector<double> derivative(const std::vector<double>& g, int order);

private:
    struct Fft;
    void forward(const std::vector<double>& in, std::vector<cplx>& out);
    void backward(const std::vector<cplx>& in, std::vector<double>& out);
    void prepare_exponentials(double dt);
    void nonlinear_rate(const ConservedSpectrum& V, ConservedSpectrum& out);
    void apply_exp(const std::vector<Mat3c>& E, const ConservedSpectrum& in, ConservedSpectrum& out) const;
    void check_domain(const StateField& f, double dt) const;

    EquationOfState eos_;
    State ubar_;
    EquilibriumCoefficients coeffs_;
    int N_;
    double L_;
    Domain domain_;
    bool dealias_;
    int K_;             // number of r2c modes
    int kcut_;          // last kept mode index
    std::vector<double> xi_;
    std::vector<Mat3c> lin_;       // linear operator per mode, in conserved variables
    std::vector<Mat3c> e_half_, e_full_;
    double exp_dt_ = -1;
    std::vector<double> theta_guess_;
    std::unique_ptr<Fft> fft_;
};

struct PerturbationSpec {
    std::string shape = "gaussian";     ///< gaussian | wave-packet
    double amplitude = 1e-2;
    double width = 2.0;
    double center = -1;                 ///< negative: L / 2
    double wavenumber = 1.0;            ///< carrier for wave-packet
    std::vector<std::string> fields{"rho"};
};

StateField initial_field(int N, double L, const State& equilibrium, const PerturbationSpec& p);

struct RunSpec {
    int N = 4096;
    double L = 400;
    double dt = 0.01;
    double T = 150;
    double sample_interval = 1.0;
    Scheme scheme = Scheme::IntegratingFactorRK4;
    PerturbationSpec perturbation;
    Domain domain;
    /// Decay fit window [fit_t_lo, min(T, t_wrap)]; negative means t_wrap / 10.
    double fit_t_lo = -1;
};

struct LedgerRow {
    double t = 0;
    double mass = 0, momentum = 0, energy = 0, entropy = 0;
    double norm_u = 0;     ///< ell = 0 triple norm of U - Ubar
    double norm_w = 0;     ///< ell = 0 triple norm of W
    double ratio = 0;      ///< norm_w / norm_u, NaN when both vanish
    double max_n1 = 0;
    double max_n = 0;
    double max_w1_residual = 0;  ///< max |W1 - (rho - rho_bar)|
};

struct WDiagnostics {
    std::vector<Vec3> W;
    double norm_w = 0, norm_u = 0, ratio = 0;
    double max_n1 = 0, max_n = 0;
    double max_w1_residual = 0;
    double max_annihilated = 0;
};

/// W pointwise from spectral gradients, the norm ratio and the first component of N.
WDiagnostics w_diagnostics(SpectralSolver& solver, const ConservedSpectrum& V);

struct RunResult {
    std::vector<LedgerRow> rows;
    bool completed = false;
    std::string failure;
    int steps = 0;
    double t_reached = 0;
    double t_wrap = 0;
    double max_speed = 0;
    double max_mass_drift = 0, max_momentum_drift = 0, max_energy_drift = 0;
    /// Smallest per-step change of the total entropy (negative means decrease).
    double min_entropy_increment = 0;
    double fit_t_lo = 0, fit_t_hi = 0;
    double decay_exponent = 0, decay_residual = 0;
    double max_n1 = 0, field_scale = 1;
    double ratio_min = 0, ratio_max = 0;
    double max_norm_increase = 0;   ///< largest relative growth between samples inside the fit window
};

/// Relative drift |I(t) - I(0)| / max(|I(0)|, scale) used for the conserved integrals.
double relative_drift(double now, double start, double scale);

RunResult run(const EquationOfState& eos, const State& equilibrium, const RunSpec& spec,
              const std::function<void(const LedgerRow&)>& on_row = {});

}  // namespace nsfk
