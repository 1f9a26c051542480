#include "nsfk/dissipativity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "nsfk/fitting.hpp"

namespace nsfk {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const std::complex<double> kI(0, 1);

Mat3 sym(const Mat3& M) { return 0.5 * (M + M.transpose()); }

double min_sym_eig(const Mat3& M)
{
    return Eigen::SelfAdjointEigenSolver<Mat3>(sym(M), Eigen::EigenvaluesOnly).eigenvalues()(0);
}

}  // namespace

Mat3 symbol_symmetrizer(const EquilibriumCoefficients& c, double xi)
{
    Mat3 S = Mat3::Identity();
    S(0, 0) = c.beta(xi) / c.p_rho;
    return S;
}

Mat3 TransformedTriplet::Atilde(double xi) const
{
    const double u = coeffs.Ubar.u, sb = std::sqrt(coeffs.beta(xi)), cb = coeffs.cbar;
    Mat3 A;
    A << u, sb, 0,
         sb, u, cb,
         0, cb, u;
    return A;
}

Mat3 TransformedTriplet::Atilde_by_congruence(double xi) const
{
    const Eigen::Vector3d a0 = coeffs.A0.diagonal();
    const Eigen::Vector3d s = S(xi).diagonal();
    const Eigen::Vector3d left = s.cwiseSqrt().cwiseProduct(a0.cwiseSqrt().cwiseInverse());
    const Eigen::Vector3d right = s.cwiseSqrt().cwiseInverse().cwiseProduct(a0.cwiseSqrt().cwiseInverse());
    const Mat3 A = symbol_triplet(coeffs).A(xi);
    return left.asDiagonal() * A * right.asDiagonal();
}

Mat3 TransformedTriplet::to_v(double xi) const
{
    const Eigen::Vector3d d = S(xi).diagonal().cwiseSqrt().cwiseProduct(coeffs.A0.diagonal().cwiseSqrt());
    return d.asDiagonal();
}

TransformedTriplet transformed_triplet(const EquilibriumCoefficients& c)
{
    TransformedTriplet t;
    t.coeffs = c;
    t.Btilde = Mat3::Zero();
    t.Btilde(1, 1) = c.mu / c.Ubar.rho;
    t.Btilde(2, 2) = c.alpha / (c.e_theta * c.Ubar.rho);
    return t;
}

std::array<double, 3> atilde_eigenvalues(const EquilibriumCoefficients& c, double xi)
{
    const double r = std::sqrt(c.cbar * c.cbar + c.beta(xi));
    const double u = c.Ubar.u;
    return {u - r, u, u + r};
}

PencilTriplet as_pencil(const SymbolTriplet& t)
{
    return {t.A0, [t](double xi) { return t.A(xi); }, [t](double xi) { return t.B(xi); }};
}

PencilTriplet as_pencil(const TransformedTriplet& t)
{
    return {Mat3::Identity(), [t](double xi) { return t.Atilde(xi); },
            [t](double xi) -> Mat3 { return xi * xi * t.Btilde; }};
}

CouplingReport check_genuine_coupling(const PencilTriplet& t, const std::vector<double>& xi_grid,
                                      double rank_tol, double margin_tol)
{
    CouplingReport rep;
    rep.margin_tol = margin_tol;
    rep.min_margin = kInf;
    rep.margins.assign(xi_grid.size(), kInf);
    std::vector<Vec3> offending(xi_grid.size(), Vec3::Zero());
    std::vector<int> kdim(xi_grid.size(), 0);

#pragma omp parallel for schedule(static)
    for (long i = 0; i < static_cast<long>(xi_grid.size()); ++i) {
        const double xi = xi_grid[i];
        if (xi == 0) continue;
        const Mat3 B = t.B(xi), A = t.A(xi);
        Eigen::JacobiSVD<Mat3> svd(B, Eigen::ComputeFullV);
        const Eigen::Vector3d sv = svd.singularValues();
        const double cut = rank_tol * sv(0);
        int rank = 0;
        for (int k = 0; k < 3; ++k)
            if (sv(k) > cut && sv(k) > 0) ++rank;
        const Eigen::MatrixXd K = svd.matrixV().rightCols(3 - rank);
        kdim[i] = 3 - rank;
        double margin = kInf;
        Vec3 worst = Vec3::Zero();

        // rank{A0 V, A V} = 2 for each kernel basis vector
        for (int k = 0; k < K.cols(); ++k) {
            const Vec3 v = K.col(k);
            const Vec3 a = t.A0 * v, b = A * v;
            double m = 0;
            if (a.norm() > 0 && b.norm() > 0) {
                Eigen::Matrix<double, 3, 2> pair;
                pair.col(0) = a.normalized();
                pair.col(1) = b.normalized();
                m = Eigen::JacobiSVD<Eigen::Matrix<double, 3, 2>>(pair).singularValues()(1);
            }
            if (m < margin) {
                margin = m;
                worst = v;
            }
        }

        // no real eigenvector of A0^{-1} A inside ker B
        if (K.cols() > 0) {
            Eigen::EigenSolver<Mat3> es(t.A0.inverse() * A);
            const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
            const Mat3 proj = Mat3::Identity() - K * K.transpose();
            for (int k = 0; k < 3; ++k) {
                if (std::abs(es.eigenvalues()(k).imag()) > 1e-10 * scale) continue;
                Vec3 v = es.eigenvectors().col(k).real();
                if (v.norm() == 0) v = es.eigenvectors().col(k).imag();
                v.normalize();
                const double d = (proj * v).norm();
                if (d < margin) {
                    margin = d;
                    worst = v;
                }
            }
        }
        if (K.cols() == 0) margin = 1.0;
        rep.margins[i] = margin;
        offending[i] = worst;
    }

    for (size_t i = 0; i < xi_grid.size(); ++i) {
        if (xi_grid[i] == 0) continue;
        rep.kernel_dim_max = std::max(rep.kernel_dim_max, kdim[i]);
        if (rep.margins[i] < rep.min_margin) {
            rep.min_margin = rep.margins[i];
            rep.worst_xi = xi_grid[i];
            rep.offending = offending[i];
        }
    }
    rep.passed = rep.min_margin > margin_tol;
    return rep;
}

namespace {

// unknowns (s11, s12, s13, s22, s23, s33)
Mat3 sym_from_vec(const Eigen::Matrix<double, 6, 1>& s)
{
    Mat3 S;
    S << s(0), s(1), s(2),
         s(1), s(3), s(4),
         s(2), s(4), s(5);
    return S;
}

constexpr int kDiag[3] = {0, 3, 5};

// rows: antisymmetric part of S D for each D, columns: unknowns
Eigen::MatrixXd symmetry_constraints(const std::vector<Mat3>& Ds)
{
    Eigen::MatrixXd C(3 * Ds.size(), 6);
    for (int k = 0; k < 6; ++k) {
        Eigen::Matrix<double, 6, 1> e = Eigen::Matrix<double, 6, 1>::Zero();
        e(k) = 1;
        const Mat3 Sk = sym_from_vec(e);
        for (size_t d = 0; d < Ds.size(); ++d) {
            const Mat3 X = Sk * Ds[d] - (Sk * Ds[d]).transpose();
            C(3 * d + 0, k) = X(0, 1);
            C(3 * d + 1, k) = X(0, 2);
            C(3 * d + 2, k) = X(1, 2);
        }
    }
    return C;
}

Eigen::MatrixXd nullspace(const Eigen::MatrixXd& C)
{
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(C, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double smax = sv.size() > 0 ? sv(0) : 0.0;
    const double cut = 1e-10 * std::max(smax, 1.0);
    int rank = 0;
    for (int k = 0; k < sv.size(); ++k)
        if (sv(k) > cut) ++rank;
    return svd.matrixV().rightCols(C.cols() - rank);
}

std::vector<int> forced_zero_diagonal(const Eigen::MatrixXd& N)
{
    std::vector<int> out;
    for (int d = 0; d < 3; ++d)
        if (N.cols() == 0 || N.row(kDiag[d]).norm() <= 1e-12) out.push_back(d);
    return out;
}

}  // namespace

FriedrichsReport check_friedrichs(const SymbolTriplet& t)
{
    FriedrichsReport rep;
    const Eigen::MatrixXd N = nullspace(symmetry_constraints({t.D1, t.D2, t.D3, t.A0}));
    const Eigen::MatrixXd Nsub = nullspace(symmetry_constraints({t.D2, t.D3}));
    rep.nullspace_dim = static_cast<int>(N.cols());
    rep.forced_zero_diagonal_sub = forced_zero_diagonal(Nsub);
    rep.forced_zero_diagonal = forced_zero_diagonal(N);

    auto describe_sub = [&]() {
        std::ostringstream os;
        if (!rep.forced_zero_diagonal_sub.empty()) {
            os << "; symmetry of S D2 and S D3 alone forces S(";
            for (size_t k = 0; k < rep.forced_zero_diagonal_sub.size(); ++k)
                os << (k ? "),S(" : "") << rep.forced_zero_diagonal_sub[k] + 1 << ","
                   << rep.forced_zero_diagonal_sub[k] + 1;
            os << ") = 0";
        }
        return os.str();
    };

    if (N.cols() == 0) {
        rep.feasible = false;
        rep.certificate = "constraint nullspace is {0}: only S = 0 symmetrizes all of A0, D1, D2, D3" +
                          describe_sub();
        return rep;
    }
    if (!rep.forced_zero_diagonal.empty()) {
        std::ostringstream os;
        os << "every admissible S has S(" << rep.forced_zero_diagonal[0] + 1 << ","
           << rep.forced_zero_diagonal[0] + 1 << ") = 0, a vanishing diagonal entry, so no S is "
           << "positive definite" << describe_sub();
        rep.feasible = false;
        rep.certificate = os.str();
        return rep;
    }

    // maximize min(lambda_min(S), lambda_min(sym(S A0))) over unit coefficient vectors
    const int m = static_cast<int>(N.cols());
    std::vector<Mat3> basis(m);
    for (int k = 0; k < m; ++k) basis[k] = sym_from_vec(N.col(k));
    auto objective = [&](const Eigen::VectorXd& c, Eigen::VectorXd* grad) {
        Mat3 S = Mat3::Zero();
        for (int k = 0; k < m; ++k) S += c(k) * basis[k];
        Eigen::SelfAdjointEigenSolver<Mat3> e1(S);
        Eigen::SelfAdjointEigenSolver<Mat3> e2(sym(S * t.A0));
        const bool first = e1.eigenvalues()(0) <= e2.eigenvalues()(0);
        const double val = first ? e1.eigenvalues()(0) : e2.eigenvalues()(0);
        if (grad) {
            grad->resize(m);
            const Vec3 v = first ? Vec3(e1.eigenvectors().col(0)) : Vec3(e2.eigenvectors().col(0));
            for (int k = 0; k < m; ++k) {
                const Mat3 Xk = first ? basis[k] : sym(basis[k] * t.A0);
                (*grad)(k) = v.dot(Xk * v);
            }
        }
        return val;
    };

    Eigen::Matrix<double, 6, 1> eye;
    eye << 1, 0, 0, 1, 0, 1;
    Eigen::VectorXd c = N.transpose() * eye;
    if (c.norm() == 0) c = Eigen::VectorXd::Ones(m);
    c.normalize();
    Eigen::VectorXd best = c;
    double best_val = objective(c, nullptr);
    for (int it = 0; it < 2000 && best_val <= 1e-10; ++it) {
        Eigen::VectorXd g;
        objective(c, &g);
        c += (0.5 / std::sqrt(1.0 + it)) * g;
        c.normalize();
        const double v = objective(c, nullptr);
        if (v > best_val) {
            best_val = v;
            best = c;
        }
    }

    Mat3 S = Mat3::Zero();
    for (int k = 0; k < m; ++k) S += best(k) * basis[k];
    rep.S = S / S.norm() * std::sqrt(3.0);
    rep.min_eig_S = min_sym_eig(rep.S);
    rep.min_eig_SA0 = min_sym_eig(rep.S * t.A0);
    if (best_val > 1e-10) {
        rep.feasible = true;
        rep.certificate = "positive definite symmetrizer found in a nullspace of dimension " +
                          std::to_string(m);
    } else {
        rep.feasible = false;
        rep.conclusive = false;
        rep.certificate = "no positive definite element found in a nullspace of dimension " +
                          std::to_string(m) + describe_sub();
    }
    return rep;
}

EpsWindow compensating_window(const EquilibriumCoefficients& c)
{
    const double rho = c.Ubar.rho;
    const double a = c.alpha / (c.e_theta * rho);
    const double b = c.mu / rho;
    const double d = c.alpha * c.p_rho / (c.e_theta * rho * c.cbar * c.cbar);
    EpsWindow w;
    w.gamma_bar = 0.25 * std::min({a, b, d});
    w.lower = w.gamma_bar;
    w.upper = 0.5 * std::min(b, d);
    return w;
}

Mat3 compensating_symbol(const EquilibriumCoefficients& c, double eps, double xi)
{
    const double beta = c.beta(xi);
    const double sb = std::sqrt(beta);
    const double r = c.cbar / sb;
    Mat3 K;
    K << 0, 1, 0,
         -1, 0, r,
         0, -r, 0;
    return (eps / sb) * K;
}

std::function<Mat3(double)> compensating_matrix(const EquilibriumCoefficients& c, double eps)
{
    const EpsWindow w = compensating_window(c);
    if (!w.contains(eps)) {
        std::ostringstream os;
        os << "compensating_matrix: eps = " << eps << " outside the admissible window ("
           << w.lower << ", " << w.upper << ")";
        throw std::invalid_argument(os.str());
    }
    return [c, eps](double xi) { return compensating_symbol(c, eps, xi); };
}

CompensatingCertificate verify_certificate(const EquilibriumCoefficients& c, double eps,
                                           const std::vector<double>& xi_grid, double tol)
{
    CompensatingCertificate cert;
    cert.eps_K = eps;
    cert.window = compensating_window(c);
    cert.gamma_bar = cert.window.gamma_bar;
    cert.in_window = cert.window.contains(eps);
    cert.tol = tol;
    cert.min_eig = kInf;
    const TransformedTriplet tt = transformed_triplet(c);

    const long n = static_cast<long>(xi_grid.size());
    std::vector<double> eig(n), offd(n), skew(n), nk(n), nxk(n);
#pragma omp parallel for schedule(static)
    for (long i = 0; i < n; ++i) {
        const double xi = xi_grid[i];
        const Mat3 K = compensating_symbol(c, eps, xi);
        const Mat3 X = sym(K * tt.Atilde(xi));
        const Mat3 Y = X + tt.Btilde;
        eig[i] = min_sym_eig(Y);
        Mat3 off = X;
        off.diagonal().setZero();
        offd[i] = off.cwiseAbs().maxCoeff();
        skew[i] = (K + K.transpose()).cwiseAbs().maxCoeff();
        const double kn = Eigen::JacobiSVD<Mat3>(K).singularValues()(0);
        nk[i] = kn;
        nxk[i] = std::abs(xi) * kn;
    }
    for (long i = 0; i < n; ++i) {
        if (eig[i] < cert.min_eig) {
            cert.min_eig = eig[i];
            cert.min_eig_xi = xi_grid[i];
        }
        cert.max_offdiag = std::max(cert.max_offdiag, offd[i]);
        cert.max_skew_residual = std::max(cert.max_skew_residual, skew[i]);
        cert.sup_K = std::max(cert.sup_K, nk[i]);
        cert.sup_xiK = std::max(cert.sup_xiK, nxk[i]);
    }
    cert.passed = cert.gamma_bar > 0 && cert.min_eig >= cert.gamma_bar - tol &&
                  std::isfinite(cert.sup_K) && std::isfinite(cert.sup_xiK);
    return cert;
}

DissipativityType spectral_bound(const SymbolTriplet& t, const std::vector<double>& xi_grid,
                                 const SpectralOptions& opt)
{
    DissipativityType d;
    const long n = static_cast<long>(xi_grid.size());
    d.xi = xi_grid;
    d.sigma.assign(n, 0.0);
    std::vector<double> floor(n, 0.0);
#pragma omp parallel for schedule(static)
    for (long i = 0; i < n; ++i) {
        const Mat3c M = evolution_symbol(t, xi_grid[i]);
        Eigen::ComplexEigenSolver<Mat3c> es(-M, false);
        d.sigma[i] = es.eigenvalues().real().maxCoeff();
        floor[i] = 1e3 * std::numeric_limits<double>::epsilon() * M.norm();
    }

    d.strictly_dissipative = true;
    d.max_sigma_nonzero = -kInf;
    for (long i = 0; i < n; ++i) {
        if (xi_grid[i] == 0) {
            d.sigma_at_zero = d.sigma[i];
            continue;
        }
        if (d.sigma[i] > d.max_sigma_nonzero) {
            d.max_sigma_nonzero = d.sigma[i];
            d.worst_xi = xi_grid[i];
        }
        if (!(d.sigma[i] < -floor[i])) d.strictly_dissipative = false;
    }

    std::vector<double> xs, ys, xl, yl;
    bool loggable = true;
    for (long i = 0; i < n; ++i) {
        const double xi = xi_grid[i];
        if (xi <= 0) continue;
        const bool small = xi >= opt.small_lo && xi <= opt.small_hi;
        const bool large = xi >= opt.large_lo && xi <= opt.large_hi;
        if (!small && !large) continue;
        if (!(d.sigma[i] < 0)) {
            loggable = false;
            continue;
        }
        (small ? xs : xl).push_back(std::log(xi));
        (small ? ys : yl).push_back(std::log(-d.sigma[i]));
    }

    if (!d.strictly_dissipative || !loggable || xs.size() < 2 || xl.size() < 2) {
        d.classification = "not strictly dissipative";
        return d;
    }
    const LineFit fs = fit_line(xs, ys), fl = fit_line(xl, yl);
    d.slope_small = fs.slope;
    d.slope_large = fl.slope;
    d.residual_small = fs.rms_residual;
    d.residual_large = fl.rms_residual;
    d.p = 0.5 * fs.slope;
    d.q = 0.5 * (fs.slope - fl.slope);

    const double pr = std::round(d.p), qr = std::round(d.q);
    d.c0 = kInf;
    for (long i = 0; i < n; ++i) {
        const double xi = xi_grid[i];
        if (xi == 0) continue;
        const double val = -d.sigma[i] * std::pow(1 + xi * xi, qr) / std::pow(std::abs(xi), 2 * pr);
        d.c0 = std::min(d.c0, val);
    }
    const bool near = std::abs(d.p - pr) <= 0.05 && std::abs(d.q - qr) <= 0.05;
    std::ostringstream os;
    if (near && pr == 1 && qr == 0)
        os << "regularity-gain";
    else if (near && pr == 1 && qr == 1)
        os << "standard";
    else if (near && pr == 1 && qr == 2)
        os << "regularity-loss";
    else
        os << "type (" << d.p << ", " << d.q << ")";
    d.classification = os.str();
    return d;
}

void lyapunov_forms(const EquilibriumCoefficients& c, double eps, double delta, double xi,
                    Mat3c& P, Mat3c& Q)
{
    const TransformedTriplet tt = transformed_triplet(c);
    const Mat3c K = compensating_symbol(c, eps, xi).cast<std::complex<double>>();
    P = Mat3c::Identity() - (delta * xi) * kI * K;
    const Mat3c T = (kI * xi) * tt.Atilde(xi).cast<std::complex<double>>() +
                    (xi * xi) * tt.Btilde.cast<std::complex<double>>();
    Q = (T.adjoint() * P + P * T) / (xi * xi);
    Q = 0.5 * (Q + Q.adjoint()).eval();
    P = 0.5 * (P + P.adjoint()).eval();
}

namespace {

// smallest lambda with Q v = lambda P v, P > 0
double generalized_min_eig(const Mat3c& P, const Mat3c& Q)
{
    Eigen::LLT<Mat3c> llt(P);
    if (llt.info() != Eigen::Success) return -kInf;
    const Mat3c L = llt.matrixL();
    const Mat3c Linv = L.inverse();
    const Mat3c X = Linv * Q * Linv.adjoint();
    return Eigen::SelfAdjointEigenSolver<Mat3c>(0.5 * (X + X.adjoint()), Eigen::EigenvaluesOnly)
        .eigenvalues()(0);
}

}  // namespace

LyapunovReport lyapunov_check(const EquilibriumCoefficients& c, double eps, double delta,
                              const std::vector<double>& xi_grid, const LyapunovOptions& opt)
{
    LyapunovReport rep;
    rep.delta = delta;
    rep.eps = eps;

    std::vector<double> cgrid = opt.c0_grid;
    cgrid.insert(cgrid.end(), xi_grid.begin(), xi_grid.end());
    const long nc = static_cast<long>(cgrid.size());
    std::vector<double> gmin(nc, kInf), dk(nc, 0.0);
#pragma omp parallel for schedule(static)
    for (long i = 0; i < nc; ++i) {
        const double xi = cgrid[i];
        dk[i] = std::abs(delta * xi) *
                Eigen::JacobiSVD<Mat3>(compensating_symbol(c, eps, xi)).singularValues()(0);
        if (xi == 0) continue;
        Mat3c P, Q;
        lyapunov_forms(c, eps, delta, xi, P, Q);
        gmin[i] = generalized_min_eig(P, Q);
    }
    rep.c0 = *std::min_element(gmin.begin(), gmin.end());
    rep.max_delta_xi_K = *std::max_element(dk.begin(), dk.end());

    if (!(delta > 0) || !(rep.c0 > 0)) {
        rep.conclusive = false;
        rep.passed = false;
        rep.note = delta > 0 ? "no positive decay constant: dUpsilon/dt is not bounded by -c0 xi^2 Upsilon"
                             : "delta = 0 reduces Upsilon to |V|^2; the check degenerates to <V, Btilde V> >= 0";
        return rep;
    }

    // random unit modes, shared across the grid
    std::mt19937_64 gen(opt.seed);
    std::normal_distribution<double> nd;
    std::vector<Vec3c> modes(opt.n_modes);
    for (auto& v : modes) {
        for (int k = 0; k < 3; ++k) v(k) = {nd(gen), nd(gen)};
        v.normalize();
    }

    const TransformedTriplet tt = transformed_triplet(c);
    const long n = static_cast<long>(xi_grid.size());
    std::vector<double> viol(n, -kInf), imag(n, 0.0), cons(n, -kInf);
#pragma omp parallel for schedule(static)
    for (long i = 0; i < n; ++i) {
        const double xi = xi_grid[i];
        const Mat3c K = compensating_symbol(c, eps, xi).cast<std::complex<double>>();
        const Mat3c P = Mat3c::Identity() - (delta * xi) * kI * K;
        const Mat3c T = (kI * xi) * tt.Atilde(xi).cast<std::complex<double>>() +
                        (xi * xi) * tt.Btilde.cast<std::complex<double>>();
        for (const Vec3c& v : modes) {
            const Vec3c vt = -T * v;
            const std::complex<double> ups = v.dot(P * v);
            const double dups = 2 * vt.dot(P * v).real();
            imag[i] = std::max(imag[i], std::abs(ups.imag()));
            viol[i] = std::max(viol[i], dups + rep.c0 * xi * xi * ups.real());
        }
        if (xi != 0) {
            Eigen::ComplexEigenSolver<Mat3c> es(-T, false);
            cons[i] = es.eigenvalues().real().maxCoeff() + 0.5 * rep.c0 * xi * xi;
        }
    }
    rep.max_violation = -kInf;
    rep.max_eig_consistency = -kInf;
    for (long i = 0; i < n; ++i) {
        if (viol[i] > rep.max_violation) {
            rep.max_violation = viol[i];
            rep.worst_xi = xi_grid[i];
        }
        rep.max_imag_upsilon = std::max(rep.max_imag_upsilon, imag[i]);
        rep.max_eig_consistency = std::max(rep.max_eig_consistency, cons[i]);
    }
    rep.n_checked = static_cast<int>(n * modes.size());
    rep.passed = rep.max_violation <= opt.tol && rep.max_delta_xi_K <= 0.5;
    return rep;
}

}  // namespace nsfk
