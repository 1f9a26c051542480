/// \file symbols.hpp
/// \brief Conservation form of the capillary system, perturbation variables W,
/// nonlinear remainder terms and the Fourier symbols of the linearization.
#pragma once

#include <complex>

#include "nsfk/convex_extension.hpp"

namespace nsfk {

using Mat3c = Eigen::Matrix3cd;
using Vec3c = Eigen::Vector3cd;

/// Pointwise state with the spatial derivatives the capillary terms need.
struct ExtendedState {
    double rho = 1, u = 0, theta = 1;
    double rho_x = 0, u_x = 0, theta_x = 0;
    double rho_xx = 0, u_xx = 0, theta_xx = 0;
    double rho_xxx = 0;

    State state() const { return {rho, u, theta, rho_x}; }
    Vec3 U() const { return {rho, u, theta}; }
    Vec3 Ux() const { return {rho_x, u_x, theta_x}; }
    Vec3 Uxx() const { return {rho_xx, u_xx, theta_xx}; }

    static ExtendedState at_rest(const State& s)
    {
        ExtendedState e;
        e.rho = s.rho;
        e.u = s.u;
        e.theta = s.theta;
        return e;
    }
};

/// F0 = (rho, rho u, rho (epsilon + u^2/2)).
Vec3 conserved_quantities(const EquationOfState& eos, const ExtendedState& x);
/// Gradient part of F0: (0, 0, rho (kappa - theta kappa_t) rho_x^2).
Vec3 gamma0(const EquationOfState& eos, const ExtendedState& x);
/// Gradient part of F1: u * gamma0.
Vec3 gamma1(const EquationOfState& eos, const ExtendedState& x);

struct FluxTensors {
    Vec3 F1;
    Mat3 G, H;
    Vec3 gtilde;
};

/// F1 = f1 + Gamma1, viscous tensor G, capillary tensor H and the lower-order
/// capillary flux gtilde, so that the flux on the right is G U_x + H U_xx + gtilde.
FluxTensors flux_and_tensors(const EquationOfState& eos, const ExtendedState& x);

struct KortewegStress {
    double K = 0;  ///< Korteweg stress
    double w = 0;  ///< interstitial work flux
};

KortewegStress korteweg_stress(const EquationOfState& eos, const ExtendedState& x);

/// D_U F0 at fixed rho_x.
Mat3 jac_F0(const EquationOfState& eos, const ExtendedState& x);
Mat3 jac_F0_inv(const EquationOfState& eos, const ExtendedState& x);
/// D_{U_x} F0; only the (3,1) entry is nonzero.
Mat3 jac_F0_grad(const EquationOfState& eos, const ExtendedState& x);
/// d/dx (D_U F0) U_x + D_{U_x} F0 U_xxx + d/dx (D_{U_x} F0) U_xx, expanded by the
/// chain rule. Equals F0_xx - D_U F0 U_xx.
Vec3 f0_second_derivative_remainder(const EquationOfState& eos, const ExtendedState& x);

/// W = D_Uf0(Ubar)^{-1} (F0(U, U_x) - f0(Ubar)).
Vec3 w_variables(const EquationOfState& eos, const State& equilibrium, const ExtendedState& x);

struct NonlinearTerms {
    Vec3 r, R_Ux, I, g;   ///< tilde-terms before multiplication by the symmetrizer
    Vec3 Ntilde;          ///< symmetrized sum
    Vec3 N;               ///< A0(Ubar)^{-1} Ntilde
    /// |H(Ubar) D_Uf0(Ubar)^{-1} (F0_xx - D_U F0 U_xx)|, identically zero in exact arithmetic.
    double annihilated_residual = 0;
};

/// Right-hand side of the W system A0 W_t + A1 W_x - B W_xx - C W_xxx = d/dx Ntilde.
NonlinearTerms nonlinear_terms(const EquationOfState& eos, const State& equilibrium,
                               const ExtendedState& x);

struct EquilibriumCoefficients {
    State Ubar;
    double p_rho = 0, p_theta = 0, e_theta = 0, mu = 0, alpha = 0, kbar = 0;
    Mat3 A0, A1, B, C;
    double cbar = 0;

    double beta(double xi) const { return p_rho + xi * xi * kbar * Ubar.rho; }
};

EquilibriumCoefficients equilibrium_coefficients(const EquationOfState& eos,
                                                 const State& equilibrium);

/// Constant-coefficient third-order system A0 W_t + D1 W_x + D2 W_xx + D3 W_xxx = 0
/// split into the odd part A(xi) and the even part B(xi) of its symbol.
struct SymbolTriplet {
    Mat3 A0, D1, D2, D3;

    Mat3 A(double xi) const { return D1 - xi * xi * D3; }
    Mat3 B(double xi) const { return -xi * xi * D2; }
};

SymbolTriplet symbol_triplet(const EquilibriumCoefficients& c);

/// M(i xi) = A0^{-1} (i xi A(xi) + B(xi)), so that W_t + M W = 0 in Fourier space.
Mat3c evolution_symbol(const SymbolTriplet& t, double xi);
Mat3c evolution_symbol(const EquilibriumCoefficients& c, double xi);

}  // namespace nsfk
