/// \file fitting.hpp
/// \brief Least-squares line fits and grids shared by the analysis modules.
#pragma once

#include <vector>

namespace nsfk {

struct LineFit {
    double slope = 0;
    double intercept = 0;
    double rms_residual = 0;
    int n = 0;
};

/// Ordinary least squares y = slope * x + intercept. Requires at least two
/// distinct abscissae.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

/// n points logarithmically spaced on [lo, hi], lo > 0.
std::vector<double> log_space(double lo, double hi, int n);
/// n points uniformly spaced on [lo, hi] including both ends.
std::vector<double> lin_space(double lo, double hi, int n);
/// Sorted grid {-x_k} U {0} U {x_k} with x_k log-spaced on [lo, hi]; zero optional.
std::vector<double> mirrored_log_grid(double lo, double hi, int n_per_side, bool include_zero);

}  // namespace nsfk
