#include "nsfk/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nsfk {

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y)
{
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("fit_line: need at least two (x, y) pairs");
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 0)) throw std::invalid_argument("fit_line: abscissae are all equal");
    LineFit f;
    f.n = static_cast<int>(x.size());
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ss = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (f.slope * x[i] + f.intercept);
        ss += r * r;
    }
    f.rms_residual = std::sqrt(ss / n);
    return f;
}

std::vector<double> log_space(double lo, double hi, int n)
{
    if (!(lo > 0) || !(hi > lo) || n < 2) throw std::invalid_argument("log_space: bad range");
    std::vector<double> v(n);
    const double a = std::log(lo), b = std::log(hi);
    for (int i = 0; i < n; ++i) v[i] = std::exp(a + (b - a) * i / (n - 1));
    v.front() = lo;
    v.back() = hi;
    return v;
}

std::vector<double> lin_space(double lo, double hi, int n)
{
    if (!(hi > lo) || n < 2) throw std::invalid_argument("lin_space: bad range");
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = lo + (hi - lo) * i / (n - 1);
    v.back() = hi;
    return v;
}

std::vector<double> mirrored_log_grid(double lo, double hi, int n_per_side, bool include_zero)
{
    const std::vector<double> pos = log_space(lo, hi, n_per_side);
    std::vector<double> g;
    g.reserve(2 * pos.size() + 1);
    for (auto it = pos.rbegin(); it != pos.rend(); ++it) g.push_back(-*it);
    if (include_zero) g.push_back(0.0);
    g.insert(g.end(), pos.begin(), pos.end());
    return g;
}

}  // namespace nsfk
