/// \file dissipativity.hpp
/// \brief Structural analysis of the linearized symbol: symmetrizer, transformed
/// triplet, genuine coupling, Friedrichs infeasibility, compensating matrix,
/// spectral bound and the Lyapunov functional.
#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "nsfk/symbols.hpp"

namespace nsfk {

/// S(xi) = diag(beta(xi) / p_rho, 1, 1).
Mat3 symbol_symmetrizer(const EquilibriumCoefficients& c, double xi);

/// Symmetric triplet (I, Atilde(xi), xi^2 Btilde) obtained from V = S^{1/2} A0^{1/2} W.
struct TransformedTriplet {
    EquilibriumCoefficients coeffs;
    Mat3 Btilde;

    Mat3 S(double xi) const { return symbol_symmetrizer(coeffs, xi); }
    /// [[u, beta^{1/2}, 0], [beta^{1/2}, u, cbar], [0, cbar, u]]
    Mat3 Atilde(double xi) const;
    /// S^{1/2} A0^{-1/2} A(xi) A0^{-1/2} S^{-1/2}, evaluated by matrix products.
    Mat3 Atilde_by_congruence(double xi) const;
    /// Change of variables W -> V at wavenumber xi (diagonal).
    Mat3 to_v(double xi) const;
};

TransformedTriplet transformed_triplet(const EquilibriumCoefficients& c);

/// (u - sqrt(cbar^2 + beta), u, u + sqrt(cbar^2 + beta)) in increasing order.
std::array<double, 3> atilde_eigenvalues(const EquilibriumCoefficients& c, double xi);

/// Pencil (A0, A(xi), B(xi)) in the generic form used by the coupling check.
struct PencilTriplet {
    Mat3 A0;
    std::function<Mat3(double)> A, B;
};

PencilTriplet as_pencil(const SymbolTriplet& t);
PencilTriplet as_pencil(const TransformedTriplet& t);

struct CouplingReport {
    bool passed = true;
    double min_margin = 0;   ///< smallest margin over the grid
    double worst_xi = 0;
    Vec3 offending{0, 0, 0}; ///< kernel vector at the worst point
    std::vector<double> margins;
    int kernel_dim_max = 0;
    double margin_tol = 1e-8;
};

/// For each xi != 0: kernel of B(xi) by SVD with threshold rank_tol * sigma_max;
/// every kernel basis vector V must give rank{A0 V, A(xi) V} = 2 (margin: second
/// singular value with normalized columns), and no real eigenvector of
/// A0^{-1} A(xi) may lie in the kernel (margin: distance to the kernel).
CouplingReport check_genuine_coupling(const PencilTriplet& t, const std::vector<double>& xi_grid,
                                      double rank_tol = 1e-10, double margin_tol = 1e-8);

struct FriedrichsReport {
    bool feasible = false;
    bool conclusive = true;
    int nullspace_dim = 0;
    std::string certificate;
    Mat3 S = Mat3::Zero();     ///< symmetrizer when feasible
    double min_eig_S = 0;
    double min_eig_SA0 = 0;
    /// Diagonal entries (0-based) forced to zero by the D2, D3 constraints alone.
    std::vector<int> forced_zero_diagonal_sub;
    std::vector<int> forced_zero_diagonal;
};

/// Searches for a constant symmetric S > 0 with S A0 > 0 and S D_k symmetric,
/// k = 1, 2, 3, by computing the nullspace of the linear symmetry constraints.
FriedrichsReport check_friedrichs(const SymbolTriplet& t);

struct EpsWindow {
    double gamma_bar = 0;
    double lower = 0, upper = 0;
    double midpoint() const { return 0.5 * (lower + upper); }
    bool contains(double eps) const { return eps > lower && eps < upper; }
};

EpsWindow compensating_window(const EquilibriumCoefficients& c);

/// Ktilde(xi) = eps beta^{-1/2} [[0,1,0],[-1,0,cbar beta^{-1/2}],[0,-cbar beta^{-1/2},0]],
/// no window check.
Mat3 compensating_symbol(const EquilibriumCoefficients& c, double eps, double xi);

/// Validated factory; throws std::invalid_argument if eps is outside the window.
std::function<Mat3(double)> compensating_matrix(const EquilibriumCoefficients& c, double eps);

struct CompensatingCertificate {
    double eps_K = 0;
    double gamma_bar = 0;
    EpsWindow window;
    bool in_window = false;
    double sup_K = 0, sup_xiK = 0;
    double min_eig = 0, min_eig_xi = 0;
    double max_offdiag = 0;    ///< off-diagonal size of [Ktilde Atilde]^s
    double max_skew_residual = 0;
    double tol = 0;
    bool passed = false;
};

CompensatingCertificate verify_certificate(const EquilibriumCoefficients& c, double eps,
                                           const std::vector<double>& xi_grid, double tol = 1e-10);

struct DissipativityType {
    bool strictly_dissipative = false;
    double max_sigma_nonzero = 0;  ///< largest sigma(xi) over xi != 0
    double worst_xi = 0;
    double sigma_at_zero = 0;
    double slope_small = 0, slope_large = 0;
    double residual_small = 0, residual_large = 0;
    double p = 0, q = 0;
    double c0 = 0;                 ///< inf of -sigma (1+xi^2)^q / |xi|^{2p} with rounded (p, q)
    std::string classification;
    std::vector<double> xi, sigma;
};

struct SpectralOptions {
    double small_lo = 1e-3, small_hi = 1e-1;
    double large_lo = 1e1, large_hi = 1e3;
};

/// sigma(xi) = max Re eig(-M(i xi)) on the grid, strictness test and the
/// two-asymptote log-log fit for (p, q).
DissipativityType spectral_bound(const SymbolTriplet& t, const std::vector<double>& xi_grid,
                                 const SpectralOptions& opt = {});

struct LyapunovReport {
    double delta = 0, eps = 0;
    double c0 = 0;                 ///< inf over the c0 grid of the generalized eigenvalue
    double max_violation = 0;      ///< max of dUpsilon/dt + c0 xi^2 Upsilon over samples
    double max_imag_upsilon = 0;
    double max_delta_xi_K = 0;     ///< sup |delta xi Ktilde|, must stay <= 1/2
    double max_eig_consistency = 0;///< max of sigma(xi) + c0 xi^2 / 2, must be <= 0
    int n_checked = 0;
    double worst_xi = 0;
    bool conclusive = true;
    bool passed = false;
    std::string note;
};

struct LyapunovOptions {
    int n_modes = 100;
    unsigned long long seed = 2024;
    double tol = 1e-10;
    /// Grid on which c0 is computed; the test grid is always included.
    std::vector<double> c0_grid;
};

/// Upsilon = |V|^2 - delta xi <V, i Ktilde V> along V_t + (i xi Atilde + xi^2 Btilde) V = 0.
LyapunovReport lyapunov_check(const EquilibriumCoefficients& c, double eps, double delta,
                              const std::vector<double>& xi_grid, const LyapunovOptions& opt = {});

/// Hermitian weight P(xi) of Upsilon in V coordinates and Q(xi) with dUpsilon/dt = -xi^2 <V, Q V>.
void lyapunov_forms(const EquilibriumCoefficients& c, double eps, double delta, double xi,
                    Mat3c& P, Mat3c& Q);

}  // namespace nsfk
