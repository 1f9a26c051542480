/// \file linear_evolution.hpp
/// \brief Per-mode exact evolution of the linearized system on the whole line
/// and decay-rate fitting of weighted Fourier norms.
#pragma once

#include <string>
#include <vector>

#include "nsfk/symbols.hpp"

namespace nsfk {

/// Quadrature nodes and weights on the real line with per-node Fourier modes.
struct SpectralProfile {
    std::vector<double> xi;
    std::vector<double> weights;
    std::vector<Vec3c> modes;
};

struct NodeOptions {
    int n = 4096;               ///< even, symmetric, no node at the origin
    double xi_max = 200;
    double min_spacing = 1e-4;  ///< node spacing at the origin
};

/// Nodes xi = a sinh(b s) on a uniform s grid: spacing min_spacing near zero,
/// geometric growth away from it, largest |xi| = xi_max. Weights are the
/// trapezoid rule in s times d xi / d s.
SpectralProfile make_nodes(const NodeOptions& opt = {});

/// (e^{-xi^2}, e^{-xi^2}, e^{-xi^2}) on the given nodes.
SpectralProfile gaussian_profile(const SpectralProfile& nodes);
/// i xi e^{-xi^2} in every component (vanishing mean).
SpectralProfile zero_mass_profile(const SpectralProfile& nodes);
/// Reads rows (xi, Re1, Im1, Re2, Im2, Re3, Im3), interpolating linearly onto
/// the nodes and setting modes outside the tabulated range to zero.
SpectralProfile profile_from_csv(const SpectralProfile& nodes, const std::string& path);

/// Precomputed propagator exp(-t M(i xi)) at one wavenumber.
class ModePropagator {
public:
    ModePropagator(const EquilibriumCoefficients& c, double xi);
    Vec3c apply(const Vec3c& mode, double t) const;
    bool used_fallback() const { return fallback_; }

private:
    Mat3c M_, V_, Vinv_;
    Vec3c lambda_;
    bool fallback_ = false;
};

/// exp(-t M(i xi)) mode. Eigendecomposition, or scaling-and-squaring when the
/// eigenvector matrix is poorly conditioned.
Vec3c propagate_mode(const EquilibriumCoefficients& c, const Vec3c& mode, double xi, double t);

/// sqrt of the quadrature of xi^{2 ell} [(1 + xi^2)|W1|^2 + |W2|^2 + |W3|^2].
double weighted_norm(const SpectralProfile& profile, int ell);

struct DecayFit {
    double exponent = 0;
    double amplitude = 0;
    double residual = 0;
    double t_lo = 0, t_hi = 0;
    bool flagged = false;        ///< residual above the threshold
    std::vector<double> times, norms;
    int fallback_nodes = 0;
};

struct FitOptions {
    double window_lo = -1;       ///< default t_max / 100
    double window_hi = -1;       ///< default t_max
    double residual_threshold = 0.05;
};

/// Evolves every mode to each time, evaluates weighted_norm at order ell and
/// fits log norm against log(1 + t) on the window.
DecayFit evolve_and_fit(const EquilibriumCoefficients& c, const SpectralProfile& initial,
                        const std::vector<double>& times, int ell, const FitOptions& opt = {});

struct PointwiseReport {
    double c0 = 0;                ///< decay constant used
    double C_bound = 0;           ///< sup over the grid of the Upsilon / energy equivalence constant
    double worst_ratio = 0;       ///< max of E(t) / (exp(-c0 xi^2 t) E(0))
    double worst_xi = 0, worst_t = 0;
    bool passed = false;
};

/// Checks E(xi, t) <= C exp(-c0 xi^2 t) E(xi, 0) for random modes, with
/// E = (1 + xi^2)|W1|^2 + |W2|^2 + |W3|^2, c0 from the Lyapunov functional and
/// C(xi) the condition number of Upsilon relative to E at that xi.
PointwiseReport verify_pointwise(const EquilibriumCoefficients& c, double eps, double delta,
                                 double c0, const std::vector<double>& xi_grid,
                                 const std::vector<double>& t_grid, int n_modes = 20,
                                 unsigned long long seed = 7);

}  // namespace nsfk
