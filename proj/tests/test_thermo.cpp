#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "nsfk/thermo.hpp"

using namespace nsfk;

namespace {

EquationOfState reference()
{
    return ideal_gas_eos(1.0, 5.0 / 3.0, 1.0, 1.0, 1.0);
}

// psi of the reference gas, written out independently of the library
double psi_ref(double rho, double theta)
{
    return theta * (std::log(rho) - 1.5 * std::log(theta));
}

}  // namespace

TEST(IdealGas, ReferenceValuesAtEquilibrium)
{
    const ThermoPoint q = reference().eval(1, 1);
    EXPECT_NEAR(q.p, 1.0, 1e-15);
    EXPECT_NEAR(q.e, 1.5, 1e-15);
    EXPECT_NEAR(q.e_t, 1.5, 1e-15);
}

TEST(IdealGas, PressureDerivativesByHand)
{
    const ThermoPoint q = reference().eval(2, 3);
    EXPECT_NEAR(q.p, 6.0, 1e-14);
    EXPECT_NEAR(q.p_r, 3.0, 1e-14);
    EXPECT_NEAR(q.p_t, 2.0, 1e-14);
}

TEST(IdealGas, RejectsBadParameters)
{
    EXPECT_THROW(ideal_gas_eos(0, 5.0 / 3.0, 1, 1, 1), std::invalid_argument);
    EXPECT_THROW(ideal_gas_eos(1, 0.5, 1, 1, 1), std::invalid_argument);
    EXPECT_THROW(ideal_gas_eos(1, 5.0 / 3.0, 0, 1, 1), std::invalid_argument);
    EXPECT_THROW(ideal_gas_eos(1, 5.0 / 3.0, 1, -1, 1), std::invalid_argument);
    EXPECT_THROW(ideal_gas_eos(1, 5.0 / 3.0, 1, 1, 0), std::invalid_argument);
    EXPECT_NO_THROW(ideal_gas_eos_degenerate(1, 5.0 / 3.0, 0, 0, 0));
    EXPECT_THROW(ideal_gas_eos_degenerate(1, 5.0 / 3.0, -1, 0, 0), std::invalid_argument);
}

TEST(IdealGas, EvalOutsideDomainThrows)
{
    EXPECT_THROW(reference().eval(0, 1), DomainError);
    EXPECT_THROW(reference().eval(1, -1), DomainError);
}

TEST(NonstandardPotentials, HandValues)
{
    const EquationOfState eos = reference();
    EXPECT_NEAR(nonstandard_energy(eos, State{1, 0, 1, 0}), 1.5, 1e-15);
    EXPECT_NEAR(nonstandard_energy(eos, State{1, 0, 1, 1}), 2.5, 1e-15);
    EXPECT_NEAR(nonstandard_entropy(eos, State{1.3, 0, 0.7, 2}), eos.eval(1.3, 0.7).eta, 1e-15);
    EXPECT_NEAR(modified_capillarity(eos, State{1, 0, 1, 0}), 2.0, 1e-15);
    const EquationOfState half = ideal_gas_eos(1, 5.0 / 3.0, 0.5, 1, 1);
    EXPECT_NEAR(modified_capillarity(half, State{3, 0, 1, 0}), 3.0, 1e-15);
    EXPECT_NEAR(modified_capillarity(eos, State{2, 0, 1, 0}), 2 * modified_capillarity(eos, State{1, 0, 1, 0}),
                1e-15);
}

TEST(NonstandardPotentials, KappaProportionalToTheta)
{
    // kappa = kappa0 theta: kappa - theta kappa_t = 0, so epsilon = e
    const EquationOfState eos = reference().with_kappa("kappa0 theta", [](double, double t) {
        Jet j;
        j.v = 0.7 * t;
        j.t = 0.7;
        return j;
    });
    for (double rx : {0.0, 0.3, 2.0})
        EXPECT_NEAR(nonstandard_energy(eos, State{1.2, 0, 1.7, rx}), eos.eval(1.2, 1.7).e, 1e-14);
}

TEST(NonstandardPotentials, LinearKappaEntropyShift)
{
    const double k0 = 0.8, ts = 5.0;
    const EquationOfState eos = reference().with_kappa("linear", linear_in_theta_kappa(k0, ts));
    for (double rx : {0.0, 0.5, 1.5}) {
        const State s{1.4, 0, 2.0, rx};
        EXPECT_NEAR(nonstandard_entropy(eos, s), eos.eval(1.4, 2.0).eta + k0 / ts * rx * rx, 1e-14);
    }
}

TEST(NonstandardPotentials, LegendreIdentityRandomStates)
{
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> r(0.2, 5), g(-3, 3);
    const EquationOfState eos = reference().with_kappa("linear", linear_in_theta_kappa(1.3, 4.0));
    for (int i = 0; i < 1000; ++i) {
        const State s{r(gen), 0, r(gen), g(gen)};
        const double lhs = nonstandard_energy(eos, s);
        const double rhs = nonstandard_free_energy(eos, s) + s.theta * nonstandard_entropy(eos, s);
        EXPECT_NEAR(lhs, rhs, 1e-12 * std::max(1.0, std::abs(lhs)));
    }
}

TEST(Jets, AgreeWithIndependentFiniteDifferences)
{
    // psi written out by hand, differentiated numerically; pressure and energy
    // must match the analytic jet
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> r(0.3, 4);
    const EquationOfState eos = reference();
    const double h = 1e-5;
    for (int i = 0; i < 200; ++i) {
        const double rho = r(gen), th = r(gen);
        const ThermoPoint q = eos.eval(rho, th);
        const double psi_r = (psi_ref(rho + h, th) - psi_ref(rho - h, th)) / (2 * h);
        const double psi_t = (psi_ref(rho, th + h) - psi_ref(rho, th - h)) / (2 * h);
        EXPECT_NEAR(q.p, rho * rho * psi_r, 1e-7 * q.p);
        EXPECT_NEAR(q.e, psi_ref(rho, th) - th * psi_t, 1e-7 * std::abs(q.e));
        EXPECT_NEAR(q.eta, -psi_t, 1e-7 * std::max(1.0, std::abs(q.eta)));
    }
}

TEST(Hypotheses, ReferenceClosurePasses)
{
    const HypothesisReport rep = verify_hypotheses(reference(), Domain{}, 50);
    for (const auto& c : rep.conditions) EXPECT_TRUE(c.passed) << c.name << " worst " << c.worst;
    EXPECT_TRUE(rep.all_passed());
    EXPECT_LE(rep.find("e_rho=(p-theta p_theta)/rho^2").worst, 1e-10);
    EXPECT_LE(rep.find("epsilon=Psi+theta s").worst, 1e-12);
}

TEST(Hypotheses, ConvexCapillarityFailsConcavity)
{
    const EquationOfState eos = reference().with_kappa("theta^2", [](double, double t) {
        Jet j;
        j.v = t * t;
        j.t = 2 * t;
        j.tt = 2;
        return j;
    });
    const HypothesisReport rep = verify_hypotheses(eos, Domain{}, 10);
    EXPECT_FALSE(rep.find("kappa_tt<=0").passed);
    EXPECT_TRUE(rep.find("p>0").passed);
    EXPECT_FALSE(rep.all_passed());
}

TEST(Hypotheses, TemperatureIndependentPressureFailsWeyl)
{
    // psi = log rho - theta log theta: p = rho, p_theta = 0
    const EquationOfState eos("barotropic",
                              [](double rho, double t) {
                                  Jet j;
                                  j.v = std::log(rho) - t * std::log(t);
                                  j.r = 1 / rho;
                                  j.rr = -1 / (rho * rho);
                                  j.rrr = 2 / (rho * rho * rho);
                                  j.t = -std::log(t) - 1;
                                  j.tt = -1 / t;
                                  j.ttt = 1 / (t * t);
                                  return j;
                              },
                              [](double, double) { return Jet::constant(1); },
                              [](double, double) { return Jet::constant(1); },
                              [](double, double) { return Jet::constant(1); });
    const HypothesisReport rep = verify_hypotheses(eos, Domain{}, 10);
    EXPECT_FALSE(rep.find("p_theta>0").passed);
    EXPECT_TRUE(rep.find("e_theta>0").passed);
}

TEST(Hypotheses, ReportsViolatingState)
{
    const EquationOfState eos = ideal_gas_eos_degenerate(1, 5.0 / 3.0, 1, 0, 1);
    const HypothesisReport rep = verify_hypotheses(eos, Domain{}, 5);
    const ConditionResult& c = rep.find("mu>0");
    EXPECT_FALSE(c.passed);
    EXPECT_GT(c.rho_at, 0);
    EXPECT_GT(c.theta_at, 0);
}

TEST(Domain, Validation)
{
    EXPECT_NO_THROW(Domain{}.validate());
    EXPECT_THROW((Domain{0, 0.1, 10, 10}.validate()), std::invalid_argument);
    EXPECT_THROW((Domain{0.1, 0.1, 0.05, 10}.validate()), std::invalid_argument);
}
