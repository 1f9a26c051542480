#include "nsfk/symbols.hpp"

#include <cmath>

namespace nsfk {

namespace {

// k = 2 rho kappa and its first partials
struct Capillarity {
    double k, k_r, k_t;
};

Capillarity capillarity(const ThermoPoint& q)
{
    return {2 * q.rho * q.kappa.v, 2 * q.kappa.v + 2 * q.rho * q.kappa.r, 2 * q.rho * q.kappa.t};
}

// gradient-dependent energy epsilon and the partials used by D_U F0
struct Energy {
    double eps, eps_r, eps_t, eps_g;  // eps_g = d eps / d rho_x
};

Energy energy(const ThermoPoint& q, double rho_x)
{
    const Jet& k = q.kappa;
    const double g2 = rho_x * rho_x;
    const double th = q.theta;
    Energy en;
    en.eps = q.e + (k.v - th * k.t) * g2;
    en.eps_r = q.e_r + (k.r - th * k.rt) * g2;
    en.eps_t = q.e_t - th * k.tt * g2;
    en.eps_g = 2 * (k.v - th * k.t) * rho_x;
    return en;
}

}  // namespace

Vec3 conserved_quantities(const EquationOfState& eos, const ExtendedState& x)
{
    const ThermoPoint q = eos.eval(x.rho, x.theta);
    const Energy en = energy(q, x.rho_x);
    return {x.rho, x.rho * x.u, x.rho * (en.eps + 0.5 * x.u * x.u)};
}

Vec3 gamma0(const EquationOfState& eos, const ExtendedState& x)
{
    const ThermoPoint q = eos.eval(x.rho, x.theta);
    return {0, 0, x.rho * (q.kappa.v - x.theta * q.kappa.t) * x.rho_x * x.rho_x};
}

Vec3 gamma1(const EquationOfState& eos, const ExtendedState& x)
{
    return x.u * gamma0(eos, x);
}

FluxTensors flux_and_tensors(const EquationOfState& eos, const ExtendedState& x)
{
    const ThermoPoint q = eos.eval(x.rho, x.theta);
    const Capillarity c = capillarity(q);
    const State s = x.state();
    FluxTensors out;
    out.F1 = f1(eos, s) + gamma1(eos, x);
    out.G = viscous_tensor(eos, s);
    out.H = Mat3::Zero();
    out.H(1, 0) = c.k * x.rho;
    out.H(2, 0) = c.k * x.rho * x.u;
    const double g2 = 0.5 * x.rho * x.rho_x * x.rho_x * c.k_r + x.rho * x.rho_x * x.theta_x * c.k_t -
                      0.5 * c.k * x.rho_x * x.rho_x;
    out.gtilde = {0, g2, x.u * g2 - c.k * x.rho * x.rho_x * x.u_x};
    return out;
}

KortewegStress korteweg_stress(const EquationOfState& eos, const ExtendedState& x)
{
    const ThermoPoint q = eos.eval(x.rho, x.theta);
    const Capillarity c = capillarity(q);
    const double k_x = c.k_r * x.rho_x + c.k_t * x.theta_x;
    KortewegStress ks;
    ks.K = c.k * x.rho * x.rho_xx + x.rho * k_x * x.rho_x -
           0.5 * c.k_r * x.rho * x.rho_x * x.rho_x - 0.5 * c.k * x.rho_x * x.rho_x;
    ks.w = -c.k * x.rho * x.rho_x * x.u_x;
    return ks;
}

Mat3 jac_F0(const EquationOfState& eos, const ExtendedState& x)
{
    const ThermoPoint q = eos.eval(x.rho, x.theta);
    const Energy en = energy(q, x.rho_x);
    const double r = x.rho, u = x.u;
    Mat3 J;
    J << 1, 0, 0,
         u, r, 0,
         en.eps + 0.5 * u * u + r * en.eps_r, r * u, r * en.eps_t;
    return J;
}

Mat3 jac_F0_inv(const EquationOfState& eos, const ExtendedState& x)
{
    const ThermoPoint q = eos.eval(x.rho, x.theta);
    const Energy en = energy(q, x.rho_x);
    const double r = x.rho, u = x.u;
    const double d = r * en.eps_t;
    if (!(d > 0)) throw DomainError("D_U F0 is singular: epsilon_theta <= 0");
    Mat3 J;
    J << 1, 0, 0,
         -u / r, 1 / r, 0,
         (0.5 * u * u - en.eps - r * en.eps_r) / d, -u / d, 1 / d;
    return J;
}

Mat3 jac_F0_grad(const EquationOfState& eos, const ExtendedState& x)
{
    const ThermoPoint q = eos.eval(x.rho, x.theta);
    Mat3 J = Mat3::Zero();
    J(2, 0) = x.rho * energy(q, x.rho_x).eps_g;
    return J;
}

Vec3 f0_second_derivative_remainder(const EquationOfState& eos, const ExtendedState& x)
{
    const ThermoPoint q = eos.eval(x.rho, x.theta);
    const Energy en = energy(q, x.rho_x);
    const Jet& k = q.kappa;
    const double r = x.rho, u = x.u, th = x.theta;
    const double rx = x.rho_x, ux = x.u_x, tx = x.theta_x, rxx = x.rho_xx;
    const double g2 = rx * rx;

    // x-derivatives of the entries of D_U F0 along the field
    const double eps_x = en.eps_r * rx + en.eps_t * tx + en.eps_g * rxx;
    const double eps_r_x = q.e_rr * rx + q.e_rt * tx + (k.rr - th * k.rrt) * rx * g2 -
                           th * k.rtt * tx * g2 + 2 * (k.r - th * k.rt) * rx * rxx;
    const double eps_t_x = q.e_rt * rx + q.e_tt * tx - th * k.rtt * rx * g2 -
                           (k.tt + th * k.ttt) * tx * g2 - 2 * th * k.tt * rx * rxx;

    Mat3 dJ = Mat3::Zero();
    dJ(1, 0) = ux;
    dJ(1, 1) = rx;
    dJ(2, 0) = eps_x + u * ux + rx * en.eps_r + r * eps_r_x;
    dJ(2, 1) = rx * u + r * ux;
    dJ(2, 2) = rx * en.eps_t + r * eps_t_x;

    // D_{U_x} F0 (3,1) = 2 rho (kappa - theta kappa_t) rho_x and its x-derivative
    const double a = k.v - th * k.t;
    const double a_x = (k.r - th * k.rt) * rx - th * k.tt * tx;
    const double jg = 2 * r * a * rx;
    const double jg_x = 2 * rx * a * rx + 2 * r * a_x * rx + 2 * r * a * rxx;

    Vec3 out = dJ * x.Ux();
    out(2) += jg * x.rho_xxx + jg_x * rxx;
    return out;
}

Vec3 w_variables(const EquationOfState& eos, const State& equilibrium, const ExtendedState& x)
{
    const State ub{equilibrium.rho, equilibrium.u, equilibrium.theta, 0};
    return jac_f0_inv(eos, ub) * (conserved_quantities(eos, x) - f0(eos, ub));
}

NonlinearTerms nonlinear_terms(const EquationOfState& eos, const State& equilibrium,
                               const ExtendedState& x)
{
    const State ub{equilibrium.rho, equilibrium.u, equilibrium.theta, 0};
    const Mat3 Dbar_inv = jac_f0_inv(eos, ub);
    const Mat3 J1bar = jac_f1(eos, ub);
    const Mat3 Gbar = viscous_tensor(eos, ub);
    const ExtendedState xbar = ExtendedState::at_rest(ub);
    const Mat3 Hbar = flux_and_tensors(eos, xbar).H;
    const Mat3 P = jac_f0(eos, ub).transpose() * hessian_entropy(eos, ub);
    const Mat3 A0bar = coefficient_matrices(eos, ub).A0;

    const FluxTensors ft = flux_and_tensors(eos, x);
    const Mat3 DF0 = jac_F0(eos, x);
    const Mat3 DF0_inv = jac_F0_inv(eos, x);
    const Mat3 DgF0 = jac_F0_grad(eos, x);
    const Vec3 Ux = x.Ux(), Uxx = x.Uxx();

    NonlinearTerms nt;
    nt.r = -(ft.F1 - f1(eos, ub)) + J1bar * Dbar_inv * (conserved_quantities(eos, x) - f0(eos, ub));
    nt.R_Ux = (ft.G * DF0_inv - Gbar * Dbar_inv) * DF0 * Ux;
    const Vec3 bracket = f0_second_derivative_remainder(eos, x);
    const Vec3 annihilated = Hbar * Dbar_inv * bracket;
    nt.annihilated_residual = annihilated.norm();
    nt.I = -Gbar * Dbar_inv * DgF0 * Uxx + (ft.H * DF0_inv - Hbar * Dbar_inv) * DF0 * Uxx - annihilated;
    nt.g = ft.gtilde;
    nt.Ntilde = P * (nt.r + nt.R_Ux + nt.I + nt.g);
    nt.N = A0bar.diagonal().cwiseInverse().asDiagonal() * nt.Ntilde;
    return nt;
}

EquilibriumCoefficients equilibrium_coefficients(const EquationOfState& eos,
                                                 const State& equilibrium)
{
    EquilibriumCoefficients c;
    c.Ubar = {equilibrium.rho, equilibrium.u, equilibrium.theta, 0};
    const ThermoPoint q = eos.eval(c.Ubar.rho, c.Ubar.theta);
    c.p_rho = q.p_r;
    c.p_theta = q.p_t;
    c.e_theta = q.e_t;
    c.mu = q.mu.v;
    c.alpha = q.alpha.v;
    c.kbar = 2 * c.Ubar.rho * q.kappa.v;
    const CoefficientMatrices m = coefficient_matrices(eos, c.Ubar);
    c.A0 = m.A0;
    c.A1 = m.A1;
    c.B = m.B;
    c.C = Mat3::Zero();
    c.C(1, 0) = c.kbar * c.Ubar.rho / c.Ubar.theta;
    c.cbar = c.p_theta * std::sqrt(c.Ubar.theta) / (std::sqrt(c.e_theta) * c.Ubar.rho);
    return c;
}

SymbolTriplet symbol_triplet(const EquilibriumCoefficients& c)
{
    return {c.A0, c.A1, -c.B, -c.C};
}

Mat3c evolution_symbol(const SymbolTriplet& t, double xi)
{
    const std::complex<double> I(0, 1);
    const Mat3c rhs = (I * xi) * t.A(xi).cast<std::complex<double>>() + t.B(xi).cast<std::complex<double>>();
    return t.A0.inverse().cast<std::complex<double>>() * rhs;
}

Mat3c evolution_symbol(const EquilibriumCoefficients& c, double xi)
{
    return evolution_symbol(symbol_triplet(c), xi);
}

}  // namespace nsfk
