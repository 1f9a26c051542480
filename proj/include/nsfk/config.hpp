/// \file config.hpp
/// \brief Sectioned key = value run configuration, validation and hashing.
#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "nsfk/nonlinear_solver.hpp"
#include "nsfk/thermo.hpp"

namespace nsfk {

/// Parse or validation failure; line is 0 when the problem is not tied to a line.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& origin, int line, const std::string& field, const std::string& msg);
    int line() const { return line_; }
    const std::string& field() const { return field_; }

private:
    int line_;
    std::string field_;
};

struct ClosureConfig {
    std::string type = "ideal_gas";   ///< ideal_gas | ideal_gas_linear_kappa
    double R = 1, gamma = 5.0 / 3.0;
    double kappa0 = 1, mu0 = 1, alpha0 = 1;
    double theta_star = 10;           ///< only for ideal_gas_linear_kappa
};

struct ThermoConfig {
    int grid = 50;
    int states = 100;
    double fd_step = 1e-5;
    double u_max = 1;
};

struct SymbolConfig {
    double xi_min = 1e-3, xi_max = 1e3;
    int points_per_side = 1000;       ///< grid is mirrored and includes 0
    double eps = -1;                  ///< negative: midpoint of the admissible window
    double certificate_xi_max = 100;
    double delta = 0.05;
    int lyapunov_modes = 100;
    int lyapunov_points = 200;
    double lyapunov_xi_min = 1e-2, lyapunov_xi_max = 1e2;
};

struct LinearConfig {
    int nodes = 4096;
    double xi_max = 200;
    double min_spacing = 1e-4;
    std::string profile = "gaussian"; ///< gaussian | zero-mass-gaussian | csv
    std::string profile_path;
    int ell = 0;
    double t_min = 1, t_max = 1e4;
    int times = 81;
    double window_lo = -1, window_hi = -1;
    double tolerance = 0.05;
};

struct NonlinearConfig {
    RunSpec run;
    double ratio_lo = 0.9, ratio_hi = 1.1;
    double max_norm_increase = 1e-2;
};

struct RunConfig {
    std::string origin;
    ClosureConfig closure;
    State equilibrium{1, 0, 1, 0};
    Domain domain;
    ThermoConfig thermo;
    SymbolConfig symbol;
    LinearConfig linear;
    NonlinearConfig nonlinear;
    unsigned long long seed = 12345;

    /// Sorted key = value listing of every setting, defaults included.
    std::string canonical() const;
    /// SHA-256 of canonical(), hex encoded.
    std::string hash() const;
};

/// Parses text; unknown sections or keys and malformed values raise ConfigError.
RunConfig parse_config(const std::string& text, const std::string& origin = "<config>");
RunConfig load_config(const std::string& path);

/// Checks every numeric field against the preconditions of the module using it.
void validate(const RunConfig& cfg);

/// Closure selected by the config. Zero kappa0, mu0 or alpha0 are accepted so that
/// degenerate sub-cases can be analyzed.
EquationOfState make_eos(const ClosureConfig& c);

std::string sha256_hex(const std::string& data);

}  // namespace nsfk
