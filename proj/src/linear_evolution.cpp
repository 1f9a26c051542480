#include "nsfk/linear_evolution.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "nsfk/dissipativity.hpp"
#include "nsfk/fitting.hpp"

namespace nsfk {

SpectralProfile make_nodes(const NodeOptions& opt)
{
    if (opt.n < 4 || opt.n % 2 != 0) throw std::invalid_argument("make_nodes: n must be even and >= 4");
    if (!(opt.xi_max > 0) || !(opt.min_spacing > 0))
        throw std::invalid_argument("make_nodes: xi_max and min_spacing must be positive");
    const double h = 2.0 / opt.n;
    const double smax = 1.0 - 0.5 * h;
    const double ab = opt.min_spacing / h;
    if (ab * smax >= opt.xi_max)
        throw std::invalid_argument("make_nodes: min_spacing too large for xi_max and n");

    // a sinh(b smax) = xi_max with a b fixed; sinh(b smax)/b increases with b
    auto f = [&](double b) { return ab * std::sinh(b * smax) / b - opt.xi_max; };
    double lo = 1e-8, hi = 1.0;
    while (f(hi) < 0) hi *= 2;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) < 0 ? lo : hi) = mid;
    }
    const double b = 0.5 * (lo + hi), a = ab / b;

    SpectralProfile p;
    p.xi.resize(opt.n);
    p.weights.resize(opt.n);
    p.modes.assign(opt.n, Vec3c::Zero());
    for (int j = 0; j < opt.n; ++j) {
        const double s = (j - 0.5 * (opt.n - 1)) * h;
        p.xi[j] = a * std::sinh(b * s);
        p.weights[j] = h * a * b * std::cosh(b * s);
    }
    return p;
}

SpectralProfile gaussian_profile(const SpectralProfile& nodes)
{
    SpectralProfile p = nodes;
    for (size_t j = 0; j < p.xi.size(); ++j) {
        const double g = std::exp(-p.xi[j] * p.xi[j]);
        p.modes[j] = Vec3c(g, g, g);
    }
    return p;
}

SpectralProfile zero_mass_profile(const SpectralProfile& nodes)
{
    SpectralProfile p = nodes;
    for (size_t j = 0; j < p.xi.size(); ++j) {
        const std::complex<double> g(0, p.xi[j] * std::exp(-p.xi[j] * p.xi[j]));
        p.modes[j] = Vec3c(g, g, g);
    }
    return p;
}

SpectralProfile profile_from_csv(const SpectralProfile& nodes, const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open profile file " + path);
    std::vector<double> xs;
    std::vector<Vec3c> vs;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        double v[7];
        int k = 0;
        while (k < 7 && ss >> v[k]) ++k;
        if (k == 0 && lineno == 1) continue;  // header
        if (k != 7) throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected 7 columns");
        xs.push_back(v[0]);
        vs.emplace_back(std::complex<double>(v[1], v[2]), std::complex<double>(v[3], v[4]),
                        std::complex<double>(v[5], v[6]));
    }
    if (xs.size() < 2) throw std::runtime_error(path + ": need at least two rows");
    for (size_t i = 1; i < xs.size(); ++i)
        if (!(xs[i] > xs[i - 1])) throw std::runtime_error(path + ": xi must be strictly increasing");

    SpectralProfile p = nodes;
    for (size_t j = 0; j < p.xi.size(); ++j) {
        const double x = p.xi[j];
        if (x < xs.front() || x > xs.back()) {
            p.modes[j] = Vec3c::Zero();
            continue;
        }
        const size_t hi = std::upper_bound(xs.begin(), xs.end(), x) - xs.begin();
        const size_t i1 = std::min(hi, xs.size() - 1), i0 = i1 - 1;
        const double w = (x - xs[i0]) / (xs[i1] - xs[i0]);
        p.modes[j] = (1 - w) * vs[i0] + w * vs[i1];
    }
    return p;
}

ModePropagator::ModePropagator(const EquilibriumCoefficients& c, double xi)
    : M_(evolution_symbol(c, xi))
{
    Eigen::ComplexEigenSolver<Mat3c> es(M_);
    if (es.info() == Eigen::Success) {
        V_ = es.eigenvectors();
        lambda_ = es.eigenvalues();
        const Eigen::Vector3d sv = Eigen::JacobiSVD<Mat3c>(V_).singularValues();
        if (sv(2) > 0 && sv(0) / sv(2) < 1e8) {
            Vinv_ = V_.inverse();
            return;
        }
    }
    fallback_ = true;
}

Vec3c ModePropagator::apply(const Vec3c& mode, double t) const
{
    if (t < 0) throw std::invalid_argument("propagate: t must be nonnegative");
    if (t == 0) return mode;
    if (fallback_) {
        const Mat3c E = (-t * M_).exp();
        return E * mode;
    }
    Vec3c y = Vinv_ * mode;
    for (int k = 0; k < 3; ++k) y(k) *= std::exp(-t * lambda_(k));
    return V_ * y;
}

Vec3c propagate_mode(const EquilibriumCoefficients& c, const Vec3c& mode, double xi, double t)
{
    return ModePropagator(c, xi).apply(mode, t);
}

namespace {

double modal_energy(const Vec3c& w, double xi)
{
    return (1 + xi * xi) * std::norm(w(0)) + std::norm(w(1)) + std::norm(w(2));
}

}  // namespace

double weighted_norm(const SpectralProfile& profile, int ell)
{
    if (ell < 0) throw std::invalid_argument("weighted_norm: ell must be >= 0");
    double s = 0;
    for (size_t j = 0; j < profile.xi.size(); ++j) {
        const double x = profile.xi[j];
        s += profile.weights[j] * std::pow(x * x, ell) * modal_energy(profile.modes[j], x);
    }
    return std::sqrt(s);
}

DecayFit evolve_and_fit(const EquilibriumCoefficients& c, const SpectralProfile& initial,
                        const std::vector<double>& times, int ell, const FitOptions& opt)
{
    if (times.size() < 2) throw std::invalid_argument("evolve_and_fit: need at least two times");
    for (size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1])) throw std::invalid_argument("evolve_and_fit: times must increase");
    if (times.front() < 0) throw std::invalid_argument("evolve_and_fit: times must be nonnegative");

    const long n = static_cast<long>(initial.xi.size());
    const long nt = static_cast<long>(times.size());
    std::vector<double> partial(n * nt, 0.0);
    std::vector<int> fb(n, 0);
#pragma omp parallel for schedule(static)
    for (long j = 0; j < n; ++j) {
        const double x = initial.xi[j];
        const ModePropagator prop(c, x);
        fb[j] = prop.used_fallback();
        const double w = initial.weights[j] * std::pow(x * x, ell);
        for (long k = 0; k < nt; ++k)
            partial[k * n + j] = w * modal_energy(prop.apply(initial.modes[j], times[k]), x);
    }

    DecayFit fit;
    fit.times = times;
    fit.norms.resize(nt);
    for (long k = 0; k < nt; ++k) {
        double s = 0;
        for (long j = 0; j < n; ++j) s += partial[k * n + j];
        fit.norms[k] = std::sqrt(s);
    }
    for (int f : fb) fit.fallback_nodes += f;

    const double tmax = times.back();
    fit.t_lo = opt.window_lo > 0 ? opt.window_lo : tmax / 100;
    fit.t_hi = opt.window_hi > 0 ? opt.window_hi : tmax;
    std::vector<double> xs, ys;
    for (long k = 0; k < nt; ++k) {
        if (times[k] < fit.t_lo * (1 - 1e-12) || times[k] > fit.t_hi * (1 + 1e-12)) continue;
        if (!(fit.norms[k] > 0)) continue;
        xs.push_back(std::log1p(times[k]));
        ys.push_back(std::log(fit.norms[k]));
    }
    if (xs.size() < 2) {
        fit.flagged = true;
        return fit;
    }
    const LineFit lf = fit_line(xs, ys);
    fit.exponent = lf.slope;
    fit.amplitude = std::exp(lf.intercept);
    fit.residual = lf.rms_residual;
    fit.flagged = !(fit.residual <= opt.residual_threshold);
    return fit;
}

PointwiseReport verify_pointwise(const EquilibriumCoefficients& c, double eps, double delta,
                                 double c0, const std::vector<double>& xi_grid,
                                 const std::vector<double>& t_grid, int n_modes,
                                 unsigned long long seed)
{
    PointwiseReport rep;
    rep.c0 = c0;
    const TransformedTriplet tt = transformed_triplet(c);

    std::mt19937_64 gen(seed);
    std::normal_distribution<double> nd;
    std::vector<Vec3c> modes(n_modes);
    for (auto& v : modes)
        for (int k = 0; k < 3; ++k) v(k) = {nd(gen), nd(gen)};

    const long n = static_cast<long>(xi_grid.size());
    std::vector<double> cb(n, 1.0), ratio(n, 0.0), tw(n, 0.0);
#pragma omp parallel for schedule(static)
    for (long i = 0; i < n; ++i) {
        const double xi = xi_grid[i];
        // Upsilon = <D W, P D W> against E = <W, Qw W>
        Mat3c P, Q;
        if (xi != 0) {
            lyapunov_forms(c, eps, delta, xi, P, Q);
        } else {
            P = Mat3c::Identity();
        }
        const Mat3c D = tt.to_v(xi).cast<std::complex<double>>();
        const Eigen::Vector3d qw(1 + xi * xi, 1, 1);
        const Mat3c Qis = qw.cwiseSqrt().cwiseInverse().cast<std::complex<double>>().asDiagonal();
        const Mat3c X = Qis * D.adjoint() * P * D * Qis;
        const Eigen::Vector3d ev =
            Eigen::SelfAdjointEigenSolver<Mat3c>(0.5 * (X + X.adjoint()), Eigen::EigenvaluesOnly).eigenvalues();
        cb[i] = ev(2) / ev(0);

        const ModePropagator prop(c, xi);
        for (const Vec3c& w0 : modes) {
            const double e0 = modal_energy(w0, xi);
            for (double t : t_grid) {
                const double r = modal_energy(prop.apply(w0, t), xi) / (std::exp(-c0 * xi * xi * t) * e0);
                if (r > ratio[i]) {
                    ratio[i] = r;
                    tw[i] = t;
                }
            }
        }
    }
    rep.passed = true;
    for (long i = 0; i < n; ++i) {
        rep.C_bound = std::max(rep.C_bound, cb[i]);
        if (!(ratio[i] <= cb[i] * (1 + 1e-9))) rep.passed = false;
        if (ratio[i] > rep.worst_ratio) {
            rep.worst_ratio = ratio[i];
            rep.worst_xi = xi_grid[i];
            rep.worst_t = tw[i];
        }
    }
    return rep;
}

}  // namespace nsfk
