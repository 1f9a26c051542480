/// \file convex_extension.hpp
/// \brief Navier-Stokes-Fourier fluxes, Jacobians and the entropy pair E = -rho eta.
#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>

#include "nsfk/thermo.hpp"

namespace nsfk {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Closed-form maps of the capillarity-free system in U = (rho, u, theta).
/// Held as callables so that verification can be run against altered fluxes.
struct NsfMaps {
    std::function<Vec3(const State&)> f0, f1, z;
    std::function<Mat3(const State&)> viscous, jac_f0, jac_f0_inv, jac_f1, jac_z;
    std::function<double(const State&)> entropy, entropy_flux;
};

NsfMaps nsf_maps(const EquationOfState& eos);

Vec3 f0(const EquationOfState& eos, const State& s);
Vec3 f1(const EquationOfState& eos, const State& s);
/// Viscous-conductive tensor G(U) = [[0,0,0],[0,mu,0],[0,mu u,alpha]].
Mat3 viscous_tensor(const EquationOfState& eos, const State& s);
Mat3 jac_f0(const EquationOfState& eos, const State& s);
Mat3 jac_f0_inv(const EquationOfState& eos, const State& s);
Mat3 jac_f1(const EquationOfState& eos, const State& s);
/// Z = (-eta + (e - u^2/2 + p/rho)/theta, u/theta, -1/theta), the gradient of E in V = f0(U).
Vec3 z_map(const EquationOfState& eos, const State& s);
Mat3 jac_z(const EquationOfState& eos, const State& s);
/// E = -rho eta
double entropy_density(const EquationOfState& eos, const State& s);
/// Theta = -rho u eta
double entropy_flux(const EquationOfState& eos, const State& s);

/// D^2_V E = D_U Z (D_U f0)^{-1}.
Mat3 hessian_entropy(const EquationOfState& eos, const State& s);

struct CoefficientMatrices {
    Mat3 A0, A1, B;
};

/// Closed forms of A0 = D_Uf0^T D^2E D_Uf0, A1 = D_Uf0^T D^2E D_Uf1, B = D_Uf0^T D^2E G.
CoefficientMatrices coefficient_matrices(const EquationOfState& eos, const State& s);

struct EntropyPairReport {
    int n_samples = 0;
    double max_hessian_asym = 0;   ///< relative ||H - H^T|| / ||H||
    double min_hessian_eig = 0;    ///< smallest eigenvalue of the symmetric part, scaled by ||H||
    double max_a0_asym = 0;
    double max_a1_asym = 0;
    double min_a0_eig = 0;
    double min_b_eig = 0;          ///< relative to ||B||
    double max_flux_residual = 0;  ///< relative
    double max_congruence = 0;     ///< relative ||D_Uf0^T H D_Uf0 - A0||
    double max_jac_f0_inverse = 0; ///< ||D_Uf0 (D_Uf0)^{-1} - I||
    State worst_flux_state{};

    double symmetry_tol = 1e-12;
    double flux_tol = 1e-6;

    bool hessian_pd() const { return min_hessian_eig > 0; }
    bool symmetric() const
    {
        return max_hessian_asym <= symmetry_tol && max_a0_asym <= symmetry_tol &&
               max_a1_asym <= symmetry_tol;
    }
    bool b_psd() const { return min_b_eig >= -symmetry_tol; }
    bool flux_ok() const { return max_flux_residual <= flux_tol; }
    bool passed() const { return hessian_pd() && symmetric() && b_psd() && flux_ok(); }
};

struct EntropyPairOptions {
    int n_samples = 100;
    double fd_step = 1e-5;
    unsigned long long seed = 12345;
    double u_max = 1.0;
    double symmetry_tol = 1e-12;
    double flux_tol = 1e-6;
};

/// At random interior states checks Hessian positivity, symmetry of A0 and A1,
/// B >= 0 and the flux condition D_U Theta = Z^T D_U f1, the left side by
/// central differences.
EntropyPairReport verify_entropy_pair(const EquationOfState& eos, const NsfMaps& maps,
                                      const Domain& domain, const EntropyPairOptions& opt = {});

}  // namespace nsfk
