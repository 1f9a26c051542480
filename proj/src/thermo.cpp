#include "nsfk/thermo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nsfk {

void Domain::validate() const
{
    if (!(rho_min > 0) || !(theta_min > 0))
        throw std::invalid_argument("domain: rho_min and theta_min must be positive");
    if (!(rho_max > rho_min) || !(theta_max > theta_min))
        throw std::invalid_argument("domain: upper bounds must exceed lower bounds");
}

EquationOfState::EquationOfState(std::string name, ScalarClosure psi, ScalarClosure kappa,
                                 ScalarClosure mu, ScalarClosure alpha)
    : name_(std::move(name)), psi_(std::move(psi)), kappa_(std::move(kappa)),
      mu_(std::move(mu)), alpha_(std::move(alpha))
{
}

ThermoPoint EquationOfState::eval(double rho, double theta) const
{
    if (!(rho > 0) || !(theta > 0))
        throw DomainError("state outside admissible domain: rho=" + std::to_string(rho) +
                          " theta=" + std::to_string(theta));
    ThermoPoint q;
    q.rho = rho;
    q.theta = theta;
    q.psi = psi_(rho, theta);
    q.kappa = kappa_(rho, theta);
    q.mu = mu_(rho, theta);
    q.alpha = alpha_(rho, theta);

    const Jet& f = q.psi;
    q.p = rho * rho * f.r;
    q.p_r = 2 * rho * f.r + rho * rho * f.rr;
    q.p_t = rho * rho * f.rt;
    q.e = f.v - theta * f.t;
    q.e_r = f.r - theta * f.rt;
    q.e_t = -theta * f.tt;
    q.e_rr = f.rr - theta * f.rrt;
    q.e_rt = -theta * f.rtt;
    q.e_tt = -f.tt - theta * f.ttt;
    q.eta = -f.t;
    q.eta_r = -f.rt;
    q.eta_t = -f.tt;
    return q;
}

EquationOfState EquationOfState::with_kappa(std::string name, ScalarClosure kappa) const
{
    return EquationOfState(std::move(name), psi_, std::move(kappa), mu_, alpha_);
}

namespace {

ScalarClosure constant_closure(double c)
{
    return [c](double, double) { return Jet::constant(c); };
}

EquationOfState make_ideal_gas(double R, double gamma, double kappa0, double mu0, double alpha0)
{
    const double c = 1.0 / (gamma - 1.0);
    ScalarClosure psi = [R, c](double rho, double theta) {
        Jet j;
        const double lr = std::log(rho), lt = std::log(theta);
        j.v = R * theta * (lr - c * lt);
        j.r = R * theta / rho;
        j.t = R * (lr - c * lt) - R * c;
        j.rr = -R * theta / (rho * rho);
        j.rt = R / rho;
        j.tt = -R * c / theta;
        j.rrr = 2 * R * theta / (rho * rho * rho);
        j.rrt = -R / (rho * rho);
        j.rtt = 0;
        j.ttt = R * c / (theta * theta);
        return j;
    };
    return EquationOfState("ideal-gas", psi, constant_closure(kappa0), constant_closure(mu0),
                           constant_closure(alpha0));
}

}  // namespace

EquationOfState ideal_gas_eos(double R, double gamma, double kappa0, double mu0, double alpha0)
{
    if (!(R > 0)) throw std::invalid_argument("ideal gas: R must be positive");
    if (!(gamma > 1)) throw std::invalid_argument("ideal gas: gamma must exceed 1");
    if (!(kappa0 > 0) || !(mu0 > 0) || !(alpha0 > 0))
        throw std::invalid_argument("ideal gas: kappa0, mu0, alpha0 must be positive");
    return make_ideal_gas(R, gamma, kappa0, mu0, alpha0);
}

EquationOfState ideal_gas_eos_degenerate(double R, double gamma, double kappa0, double mu0,
                                         double alpha0)
{
    if (!(R > 0)) throw std::invalid_argument("ideal gas: R must be positive");
    if (!(gamma > 1)) throw std::invalid_argument("ideal gas: gamma must exceed 1");
    if (!(kappa0 >= 0) || !(mu0 >= 0) || !(alpha0 >= 0))
        throw std::invalid_argument("ideal gas: kappa0, mu0, alpha0 must be nonnegative");
    return make_ideal_gas(R, gamma, kappa0, mu0, alpha0);
}

ScalarClosure linear_in_theta_kappa(double kappa0, double theta_star)
{
    if (!(theta_star > 0)) throw std::invalid_argument("theta_star must be positive");
    return [kappa0, theta_star](double, double theta) {
        Jet j;
        j.v = kappa0 * (2 - theta / theta_star);
        j.t = -kappa0 / theta_star;
        return j;
    };
}

double nonstandard_energy(const EquationOfState& eos, const State& s)
{
    const ThermoPoint q = eos.eval(s.rho, s.theta);
    return q.e + (q.kappa.v - s.theta * q.kappa.t) * s.rho_x * s.rho_x;
}

double nonstandard_entropy(const EquationOfState& eos, const State& s)
{
    const ThermoPoint q = eos.eval(s.rho, s.theta);
    return q.eta - q.kappa.t * s.rho_x * s.rho_x;
}

double nonstandard_free_energy(const EquationOfState& eos, const State& s)
{
    const ThermoPoint q = eos.eval(s.rho, s.theta);
    return q.psi.v + q.kappa.v * s.rho_x * s.rho_x;
}

double modified_capillarity(const EquationOfState& eos, const State& s)
{
    return 2 * s.rho * eos.kappa(s.rho, s.theta).v;
}

bool HypothesisReport::all_passed() const
{
    return std::all_of(conditions.begin(), conditions.end(),
                       [](const ConditionResult& c) { return c.passed; });
}

const ConditionResult& HypothesisReport::find(const std::string& name) const
{
    for (const auto& c : conditions)
        if (c.name == name) return c;
    throw std::out_of_range("no condition named " + name);
}

namespace {

struct Tracker {
    ConditionResult res;
    bool is_identity;
    double tol;

    Tracker(std::string name, bool identity, double tol_)
        : is_identity(identity), tol(tol_)
    {
        res.name = std::move(name);
        res.worst = identity ? 0.0 : std::numeric_limits<double>::infinity();
    }

    // Inequalities record the smallest margin, identities the largest residual.
    void add(double value, double rho, double theta)
    {
        const bool worse = is_identity ? value > res.worst : value < res.worst;
        if (worse || std::isnan(value)) {
            res.worst = value;
            res.rho_at = rho;
            res.theta_at = theta;
        }
    }

    ConditionResult finish(bool strict)
    {
        if (is_identity)
            res.passed = res.worst <= tol;
        else
            res.passed = strict ? res.worst > 0 : res.worst >= 0;
        if (std::isnan(res.worst)) res.passed = false;
        return res;
    }
};

double rel_err(double analytic, double numeric)
{
    return std::abs(analytic - numeric) / std::max(1.0, std::abs(analytic));
}

}  // namespace

HypothesisReport verify_hypotheses(const EquationOfState& eos, const Domain& domain,
                                   int n_samples, const HypothesisOptions& opt)
{
    if (n_samples < 1) throw std::invalid_argument("verify_hypotheses: n_samples must be >= 1");
    domain.validate();

    Tracker mu_pos("mu>0", false, 0), alpha_pos("alpha>0", false, 0),
        kappa_pos("kappa>0", false, 0), kappa_conc("kappa_tt<=0", false, 0),
        p_pos("p>0", false, 0), pr_pos("p_rho>0", false, 0), pt_pos("p_theta>0", false, 0),
        et_pos("e_theta>0", false, 0);
    Tracker id_er("e_rho=(p-theta p_theta)/rho^2", true, opt.identity_tol),
        id_etat("eta_theta=e_theta/theta", true, opt.identity_tol),
        id_etar("eta_rho=-p_theta/rho^2", true, opt.identity_tol),
        legendre("epsilon=Psi+theta s", true, opt.identity_tol);
    Tracker fd_p("fd(p)", true, opt.fd_rel_tol), fd_e("fd(e)", true, opt.fd_rel_tol),
        fd_eta("fd(eta)", true, opt.fd_rel_tol);

    const double h = opt.fd_step;
    const double drho = (domain.rho_max - domain.rho_min) / n_samples;
    const double dtheta = (domain.theta_max - domain.theta_min) / n_samples;
    for (int i = 0; i < n_samples; ++i) {
        const double rho = domain.rho_min + (i + 1) * drho;
        for (int j = 0; j < n_samples; ++j) {
            const double theta = domain.theta_min + (j + 1) * dtheta;
            const ThermoPoint q = eos.eval(rho, theta);

            mu_pos.add(q.mu.v, rho, theta);
            alpha_pos.add(q.alpha.v, rho, theta);
            kappa_pos.add(q.kappa.v, rho, theta);
            kappa_conc.add(-q.kappa.tt, rho, theta);
            p_pos.add(q.p, rho, theta);
            pr_pos.add(q.p_r, rho, theta);
            pt_pos.add(q.p_t, rho, theta);
            et_pos.add(q.e_t, rho, theta);

            id_er.add(std::abs(q.e_r - (q.p - theta * q.p_t) / (rho * rho)), rho, theta);
            id_etat.add(std::abs(q.eta_t - q.e_t / theta), rho, theta);
            id_etar.add(std::abs(q.eta_r + q.p_t / (rho * rho)), rho, theta);

            const ThermoPoint rp = eos.eval(rho + h, theta), rm = eos.eval(rho - h, theta);
            const ThermoPoint tp = eos.eval(rho, theta + h), tm = eos.eval(rho, theta - h);
            const double inv = 1.0 / (2 * h);
            fd_p.add(std::max(rel_err(q.p_r, (rp.p - rm.p) * inv),
                              rel_err(q.p_t, (tp.p - tm.p) * inv)),
                     rho, theta);
            fd_e.add(std::max(rel_err(q.e_r, (rp.e - rm.e) * inv),
                              rel_err(q.e_t, (tp.e - tm.e) * inv)),
                     rho, theta);
            fd_eta.add(std::max(rel_err(q.eta_r, (rp.eta - rm.eta) * inv),
                                rel_err(q.eta_t, (tp.eta - tm.eta) * inv)),
                       rho, theta);

            for (double gx : opt.rho_x_samples) {
                const State s{rho, 0.0, theta, gx};
                const double lhs = nonstandard_energy(eos, s);
                const double rhs = nonstandard_free_energy(eos, s) + theta * nonstandard_entropy(eos, s);
                legendre.add(std::abs(lhs - rhs), rho, theta);
            }
        }
    }

    HypothesisReport rep;
    rep.conditions = {mu_pos.finish(true),   alpha_pos.finish(true), kappa_pos.finish(true),
                      kappa_conc.finish(false), p_pos.finish(true), pr_pos.finish(true),
                      pt_pos.finish(true),   et_pos.finish(true),    id_er.finish(false),
                      id_etat.finish(false), id_etar.finish(false),  legendre.finish(false),
                      fd_p.finish(false),    fd_e.finish(false),     fd_eta.finish(false)};
    return rep;
}

}  // namespace nsfk
