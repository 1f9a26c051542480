#include "nsfk/convex_extension.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace nsfk {

Vec3 f0(const EquationOfState& eos, const State& s)
{
    const ThermoPoint q = eos.eval(s.rho, s.theta);
    return {s.rho, s.rho * s.u, s.rho * (q.e + 0.5 * s.u * s.u)};
}

Vec3 f1(const EquationOfState& eos, const State& s)
{
    const ThermoPoint q = eos.eval(s.rho, s.theta);
    const double u = s.u;
    return {s.rho * u, s.rho * u * u + q.p, s.rho * u * (q.e + 0.5 * u * u) + q.p * u};
}

Mat3 viscous_tensor(const EquationOfState& eos, const State& s)
{
    const ThermoPoint q = eos.eval(s.rho, s.theta);
    Mat3 G = Mat3::Zero();
    G(1, 1) = q.mu.v;
    G(2, 1) = q.mu.v * s.u;
    G(2, 2) = q.alpha.v;
    return G;
}

Mat3 jac_f0(const EquationOfState& eos, const State& s)
{
    const ThermoPoint q = eos.eval(s.rho, s.theta);
    const double r = s.rho, u = s.u;
    Mat3 J;
    J << 1, 0, 0,
         u, r, 0,
         q.e + 0.5 * u * u + r * q.e_r, r * u, r * q.e_t;
    return J;
}

Mat3 jac_f0_inv(const EquationOfState& eos, const State& s)
{
    const ThermoPoint q = eos.eval(s.rho, s.theta);
    const double r = s.rho, u = s.u;
    const double d = r * q.e_t;
    Mat3 J;
    J << 1, 0, 0,
         -u / r, 1 / r, 0,
         (0.5 * u * u - q.e - r * q.e_r) / d, -u / d, 1 / d;
    return J;
}

Mat3 jac_f1(const EquationOfState& eos, const State& s)
{
    const ThermoPoint q = eos.eval(s.rho, s.theta);
    const double r = s.rho, u = s.u;
    const double E = q.e + 0.5 * u * u;
    Mat3 J;
    J << u, r, 0,
         u * u + q.p_r, 2 * r * u, q.p_t,
         u * E + r * u * q.e_r + u * q.p_r, r * E + r * u * u + q.p, r * u * q.e_t + u * q.p_t;
    return J;
}

Vec3 z_map(const EquationOfState& eos, const State& s)
{
    const ThermoPoint q = eos.eval(s.rho, s.theta);
    const double u = s.u, th = s.theta;
    return {-q.eta + (q.e - 0.5 * u * u + q.p / s.rho) / th, u / th, -1 / th};
}

Mat3 jac_z(const EquationOfState& eos, const State& s)
{
    const ThermoPoint q = eos.eval(s.rho, s.theta);
    const double r = s.rho, u = s.u, th = s.theta;
    Mat3 J;
    J << q.p_r / r, -u, -(q.e - 0.5 * u * u + r * q.e_r) / th,
         0, 1, -u / th,
         0, 0, 1 / th;
    return J / th;
}

double entropy_density(const EquationOfState& eos, const State& s)
{
    return -s.rho * eos.eval(s.rho, s.theta).eta;
}

double entropy_flux(const EquationOfState& eos, const State& s)
{
    return -s.rho * s.u * eos.eval(s.rho, s.theta).eta;
}

Mat3 hessian_entropy(const EquationOfState& eos, const State& s)
{
    return jac_z(eos, s) * jac_f0_inv(eos, s);
}

CoefficientMatrices coefficient_matrices(const EquationOfState& eos, const State& s)
{
    const ThermoPoint q = eos.eval(s.rho, s.theta);
    const double r = s.rho, u = s.u, th = s.theta;
    CoefficientMatrices c;
    c.A0 = Mat3::Zero();
    c.A0(0, 0) = q.p_r / r;
    c.A0(1, 1) = r;
    c.A0(2, 2) = q.e_t * r / th;
    c.A0 /= th;
    c.A1 << q.p_r * u / r, q.p_r, 0,
            q.p_r, r * u, q.p_t,
            0, q.p_t, r * u * q.e_t / th;
    c.A1 /= th;
    c.B = Mat3::Zero();
    c.B(1, 1) = q.mu.v;
    c.B(2, 2) = q.alpha.v / th;
    c.B /= th;
    return c;
}

NsfMaps nsf_maps(const EquationOfState& eos)
{
    NsfMaps m;
    m.f0 = [eos](const State& s) { return f0(eos, s); };
    m.f1 = [eos](const State& s) { return f1(eos, s); };
    m.z = [eos](const State& s) { return z_map(eos, s); };
    m.viscous = [eos](const State& s) { return viscous_tensor(eos, s); };
    m.jac_f0 = [eos](const State& s) { return jac_f0(eos, s); };
    m.jac_f0_inv = [eos](const State& s) { return jac_f0_inv(eos, s); };
    m.jac_f1 = [eos](const State& s) { return jac_f1(eos, s); };
    m.jac_z = [eos](const State& s) { return jac_z(eos, s); };
    m.entropy = [eos](const State& s) { return entropy_density(eos, s); };
    m.entropy_flux = [eos](const State& s) { return entropy_flux(eos, s); };
    return m;
}

namespace {

double asym(const Mat3& M)
{
    const double n = M.norm();
    return n > 0 ? (M - M.transpose()).norm() / n : 0.0;
}

double min_sym_eig(const Mat3& M)
{
    Eigen::SelfAdjointEigenSolver<Mat3> es(0.5 * (M + M.transpose()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

}  // namespace

EntropyPairReport verify_entropy_pair(const EquationOfState& eos, const NsfMaps& maps,
                                      const Domain& domain, const EntropyPairOptions& opt)
{
    if (!(opt.fd_step > 0)) throw std::invalid_argument("verify_entropy_pair: fd_step must be positive");
    if (opt.n_samples < 1) throw std::invalid_argument("verify_entropy_pair: n_samples must be >= 1");
    domain.validate();

    EntropyPairReport rep;
    rep.n_samples = opt.n_samples;
    rep.symmetry_tol = opt.symmetry_tol;
    rep.flux_tol = opt.flux_tol;
    rep.min_hessian_eig = rep.min_a0_eig = rep.min_b_eig = INFINITY;

    std::mt19937_64 gen(opt.seed);
    std::uniform_real_distribution<double> ur(domain.rho_min, domain.rho_max);
    std::uniform_real_distribution<double> ut(domain.theta_min, domain.theta_max);
    std::uniform_real_distribution<double> uu(-opt.u_max, opt.u_max);
    const double h = opt.fd_step;

    for (int n = 0; n < opt.n_samples; ++n) {
        State s;
        s.rho = ur(gen);
        s.theta = ut(gen);
        s.u = uu(gen);
        // keep central-difference stencils inside the domain
        s.rho = std::max(s.rho, domain.rho_min + 2 * h);
        s.theta = std::max(s.theta, domain.theta_min + 2 * h);

        const Mat3 H = maps.jac_z(s) * maps.jac_f0_inv(s);
        const double hn = H.norm();
        rep.max_hessian_asym = std::max(rep.max_hessian_asym, asym(H));
        rep.min_hessian_eig = std::min(rep.min_hessian_eig, min_sym_eig(H) / hn);

        const CoefficientMatrices c = coefficient_matrices(eos, s);
        rep.max_a0_asym = std::max(rep.max_a0_asym, asym(c.A0));
        rep.max_a1_asym = std::max(rep.max_a1_asym, asym(c.A1));
        rep.min_a0_eig = std::min(rep.min_a0_eig, min_sym_eig(c.A0));
        const double bn = c.B.norm();
        rep.min_b_eig = std::min(rep.min_b_eig, bn > 0 ? min_sym_eig(c.B) / bn : 0.0);

        const Mat3 Jf0 = maps.jac_f0(s);
        const Mat3 cong = Jf0.transpose() * H * Jf0;
        rep.max_congruence =
            std::max(rep.max_congruence, (cong - c.A0).norm() / std::max(1.0, c.A0.norm()));
        rep.max_jac_f0_inverse = std::max(
            rep.max_jac_f0_inverse, (Jf0 * maps.jac_f0_inv(s) - Mat3::Identity()).norm());

        // D_U Theta by central differences in (rho, u, theta)
        Eigen::RowVector3d grad;
        for (int k = 0; k < 3; ++k) {
            State sp = s, sm = s;
            double* pp = k == 0 ? &sp.rho : k == 1 ? &sp.u : &sp.theta;
            double* pm = k == 0 ? &sm.rho : k == 1 ? &sm.u : &sm.theta;
            *pp += h;
            *pm -= h;
            grad(k) = (maps.entropy_flux(sp) - maps.entropy_flux(sm)) / (2 * h);
        }
        const Eigen::RowVector3d rhs = maps.z(s).transpose() * maps.jac_f1(s);
        const double res = (grad - rhs).norm() / std::max(1.0, rhs.norm());
        if (res > rep.max_flux_residual || std::isnan(res)) {
            rep.max_flux_residual = res;
            rep.worst_flux_state = s;
        }
    }
    return rep;
}

}  // namespace nsfk
