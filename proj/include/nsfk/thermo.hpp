/// \file thermo.hpp
/// \brief Equation of state with capillarity, standard and gradient-dependent potentials.
#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace nsfk {

/// Raised when a state leaves the admissible (rho, theta) domain.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Value of a scalar function of (rho, theta) together with its partial
/// derivatives up to third order. Suffix letters name the differentiation
/// variables, e.g. `rt` is d^2/(drho dtheta).
struct Jet {
    double v = 0;
    double r = 0, t = 0;
    double rr = 0, rt = 0, tt = 0;
    double rrr = 0, rrt = 0, rtt = 0, ttt = 0;

    static Jet constant(double c) {
        Jet j;
        j.v = c;
        return j;
    }
};

using ScalarClosure = std::function<Jet(double rho, double theta)>;

struct Domain {
    double rho_min = 0.1;
    double theta_min = 0.1;
    double rho_max = 10.0;
    double theta_max = 10.0;

    void validate() const;
    bool contains(double rho, double theta) const {
        return rho > rho_min && theta > theta_min;
    }
};

struct State {
    double rho = 1;
    double u = 0;
    double theta = 1;
    double rho_x = 0;
};

/// Thermodynamic quantities at one (rho, theta), derived from the Helmholtz
/// free energy psi by p = rho^2 psi_r, e = psi - theta psi_t, eta = -psi_t.
struct ThermoPoint {
    double rho, theta;
    Jet psi, kappa, mu, alpha;
    double p, p_r, p_t;
    double e, e_r, e_t;
    double e_rr, e_rt, e_tt;
    double eta, eta_r, eta_t;
};

class EquationOfState {
public:
    EquationOfState(std::string name, ScalarClosure psi, ScalarClosure kappa,
                    ScalarClosure mu, ScalarClosure alpha);

    const std::string& name() const { return name_; }

    Jet psi(double rho, double theta) const { return psi_(rho, theta); }
    Jet kappa(double rho, double theta) const { return kappa_(rho, theta); }
    Jet mu(double rho, double theta) const { return mu_(rho, theta); }
    Jet alpha(double rho, double theta) const { return alpha_(rho, theta); }

    /// Throws DomainError for rho <= 0 or theta <= 0.
    ThermoPoint eval(double rho, double theta) const;

    /// Same closure with the capillarity coefficient replaced.
    EquationOfState with_kappa(std::string name, ScalarClosure kappa) const;

private:
    std::string name_;
    ScalarClosure psi_, kappa_, mu_, alpha_;
};

/// Polytropic ideal gas psi = R theta (log rho - log theta / (gamma - 1)) with
/// constant kappa, mu, alpha. All of kappa0, mu0, alpha0 must be positive.
EquationOfState ideal_gas_eos(double R, double gamma, double kappa0, double mu0, double alpha0);

/// Ideal gas that also admits kappa0, mu0, alpha0 equal to zero, for the
/// capillarity-free and inviscid limits.
EquationOfState ideal_gas_eos_degenerate(double R, double gamma, double kappa0, double mu0,
                                         double alpha0);

/// kappa(rho, theta) = kappa0 (2 - theta / theta_star); concave in theta, so
/// the gradient contribution to the entropy is nonzero.
ScalarClosure linear_in_theta_kappa(double kappa0, double theta_star);

/// epsilon = e + (kappa - theta kappa_t) rho_x^2
double nonstandard_energy(const EquationOfState& eos, const State& s);
/// s = eta - kappa_t rho_x^2
double nonstandard_entropy(const EquationOfState& eos, const State& s);
/// Psi = psi + kappa rho_x^2
double nonstandard_free_energy(const EquationOfState& eos, const State& s);
/// k = 2 rho kappa
double modified_capillarity(const EquationOfState& eos, const State& s);

struct ConditionResult {
    std::string name;
    bool passed = true;
    /// Smallest signed margin for inequalities, largest residual for identities.
    double worst = 0;
    double rho_at = 0, theta_at = 0;
};

struct HypothesisReport {
    std::vector<ConditionResult> conditions;
    bool all_passed() const;
    const ConditionResult& find(const std::string& name) const;
};

struct HypothesisOptions {
    double identity_tol = 1e-10;
    double fd_step = 1e-5;
    double fd_rel_tol = 1e-6;
    /// Density-gradient magnitudes used for the Legendre identity.
    std::vector<double> rho_x_samples{0.0, 0.5, 1.0, 2.0};
};

/// Samples an n x n uniform grid over the domain and checks positivity of
/// mu, alpha, kappa, concavity of kappa in theta, the Weyl inequalities, the
/// compatibility identities, finite-difference agreement of p, e, eta and the
/// Legendre identity epsilon = Psi + theta s.
HypothesisReport verify_hypotheses(const EquationOfState& eos, const Domain& domain,
                                   int n_samples, const HypothesisOptions& opt = {});

}  // namespace nsfk
