#include "nsfk/config.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <utility>

namespace nsfk {

ConfigError::ConfigError(const std::string& origin, int line, const std::string& field,
                         const std::string& msg)
    : std::runtime_error(origin + (line > 0 ? ":" + std::to_string(line) : std::string()) +
                         (field.empty() ? std::string() : ": [" + field + "]") + ": " + msg),
      line_(line), field_(field)
{
}

namespace {

std::string trim(const std::string& s)
{
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::string fmt(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double to_double(const std::string& v)
{
    size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size() || !std::isfinite(d)) throw std::invalid_argument("not a finite number");
    return d;
}

long long to_int(const std::string& v)
{
    size_t pos = 0;
    const long long i = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("not an integer");
    return i;
}

std::vector<std::string> split_list(const std::string& v)
{
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::string join_list(const std::vector<std::string>& v)
{
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
    return s;
}

// One configurable setting: how to read it from text and how to print it back.
struct Key {
    std::string section, name;
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

template <class Get>
Key real_key(std::string sec, std::string name, Get ref)
{
    return {sec, name, [ref](RunConfig& c, const std::string& v) { ref(c) = to_double(v); },
            [ref](const RunConfig& c) { return fmt(ref(c)); }};
}

template <class Get>
Key int_key(std::string sec, std::string name, Get ref)
{
    return {sec, name,
            [ref](RunConfig& c, const std::string& v) {
                const long long i = to_int(v);
                using T = std::remove_reference_t<decltype(ref(c))>;
                if (!std::in_range<T>(i))
                    throw std::invalid_argument("integer out of range");
                ref(c) = static_cast<T>(i);
            },
            [ref](const RunConfig& c) { return std::to_string(ref(c)); }};
}

template <class Get>
Key str_key(std::string sec, std::string name, Get ref)
{
    return {sec, name, [ref](RunConfig& c, const std::string& v) { ref(c) = v; },
            [ref](const RunConfig& c) { return ref(c); }};
}

const std::vector<Key>& keys()
{
    static const std::vector<Key> k = {
        int_key("", "seed", [](auto& c) -> auto& { return c.seed; }),

        str_key("closure", "type", [](auto& c) -> auto& { return c.closure.type; }),
        real_key("closure", "R", [](auto& c) -> auto& { return c.closure.R; }),
        real_key("closure", "gamma", [](auto& c) -> auto& { return c.closure.gamma; }),
        real_key("closure", "kappa0", [](auto& c) -> auto& { return c.closure.kappa0; }),
        real_key("closure", "mu0", [](auto& c) -> auto& { return c.closure.mu0; }),
        real_key("closure", "alpha0", [](auto& c) -> auto& { return c.closure.alpha0; }),
        real_key("closure", "theta_star", [](auto& c) -> auto& { return c.closure.theta_star; }),

        real_key("equilibrium", "rho", [](auto& c) -> auto& { return c.equilibrium.rho; }),
        real_key("equilibrium", "u", [](auto& c) -> auto& { return c.equilibrium.u; }),
        real_key("equilibrium", "theta", [](auto& c) -> auto& { return c.equilibrium.theta; }),

        real_key("domain", "rho_min", [](auto& c) -> auto& { return c.domain.rho_min; }),
        real_key("domain", "theta_min", [](auto& c) -> auto& { return c.domain.theta_min; }),
        real_key("domain", "rho_max", [](auto& c) -> auto& { return c.domain.rho_max; }),
        real_key("domain", "theta_max", [](auto& c) -> auto& { return c.domain.theta_max; }),

        int_key("thermo", "grid", [](auto& c) -> auto& { return c.thermo.grid; }),
        int_key("thermo", "states", [](auto& c) -> auto& { return c.thermo.states; }),
        real_key("thermo", "fd_step", [](auto& c) -> auto& { return c.thermo.fd_step; }),
        real_key("thermo", "u_max", [](auto& c) -> auto& { return c.thermo.u_max; }),

        real_key("symbol", "xi_min", [](auto& c) -> auto& { return c.symbol.xi_min; }),
        real_key("symbol", "xi_max", [](auto& c) -> auto& { return c.symbol.xi_max; }),
        int_key("symbol", "points_per_side", [](auto& c) -> auto& { return c.symbol.points_per_side; }),
        real_key("symbol", "eps", [](auto& c) -> auto& { return c.symbol.eps; }),
        real_key("symbol", "certificate_xi_max", [](auto& c) -> auto& { return c.symbol.certificate_xi_max; }),
        real_key("symbol", "delta", [](auto& c) -> auto& { return c.symbol.delta; }),
        int_key("symbol", "lyapunov_modes", [](auto& c) -> auto& { return c.symbol.lyapunov_modes; }),
        int_key("symbol", "lyapunov_points", [](auto& c) -> auto& { return c.symbol.lyapunov_points; }),
        real_key("symbol", "lyapunov_xi_min", [](auto& c) -> auto& { return c.symbol.lyapunov_xi_min; }),
        real_key("symbol", "lyapunov_xi_max", [](auto& c) -> auto& { return c.symbol.lyapunov_xi_max; }),

        int_key("linear", "nodes", [](auto& c) -> auto& { return c.linear.nodes; }),
        real_key("linear", "xi_max", [](auto& c) -> auto& { return c.linear.xi_max; }),
        real_key("linear", "min_spacing", [](auto& c) -> auto& { return c.linear.min_spacing; }),
        str_key("linear", "profile", [](auto& c) -> auto& { return c.linear.profile; }),
        str_key("linear", "profile_path", [](auto& c) -> auto& { return c.linear.profile_path; }),
        int_key("linear", "ell", [](auto& c) -> auto& { return c.linear.ell; }),
        real_key("linear", "t_min", [](auto& c) -> auto& { return c.linear.t_min; }),
        real_key("linear", "t_max", [](auto& c) -> auto& { return c.linear.t_max; }),
        int_key("linear", "times", [](auto& c) -> auto& { return c.linear.times; }),
        real_key("linear", "window_lo", [](auto& c) -> auto& { return c.linear.window_lo; }),
        real_key("linear", "window_hi", [](auto& c) -> auto& { return c.linear.window_hi; }),
        real_key("linear", "tolerance", [](auto& c) -> auto& { return c.linear.tolerance; }),

        int_key("nonlinear", "N", [](auto& c) -> auto& { return c.nonlinear.run.N; }),
        real_key("nonlinear", "L", [](auto& c) -> auto& { return c.nonlinear.run.L; }),
        real_key("nonlinear", "dt", [](auto& c) -> auto& { return c.nonlinear.run.dt; }),
        real_key("nonlinear", "T", [](auto& c) -> auto& { return c.nonlinear.run.T; }),
        real_key("nonlinear", "sample_interval", [](auto& c) -> auto& { return c.nonlinear.run.sample_interval; }),
        {"nonlinear", "scheme",
         [](RunConfig& c, const std::string& v) { c.nonlinear.run.scheme = parse_scheme(v); },
         [](const RunConfig& c) { return scheme_name(c.nonlinear.run.scheme); }},
        str_key("nonlinear", "shape", [](auto& c) -> auto& { return c.nonlinear.run.perturbation.shape; }),
        real_key("nonlinear", "amplitude", [](auto& c) -> auto& { return c.nonlinear.run.perturbation.amplitude; }),
        real_key("nonlinear", "width", [](auto& c) -> auto& { return c.nonlinear.run.perturbation.width; }),
        real_key("nonlinear", "center", [](auto& c) -> auto& { return c.nonlinear.run.perturbation.center; }),
        real_key("nonlinear", "wavenumber", [](auto& c) -> auto& { return c.nonlinear.run.perturbation.wavenumber; }),
        {"nonlinear", "fields",
         [](RunConfig& c, const std::string& v) { c.nonlinear.run.perturbation.fields = split_list(v); },
         [](const RunConfig& c) { return join_list(c.nonlinear.run.perturbation.fields); }},
        real_key("nonlinear", "fit_t_lo", [](auto& c) -> auto& { return c.nonlinear.run.fit_t_lo; }),
        real_key("nonlinear", "ratio_lo", [](auto& c) -> auto& { return c.nonlinear.ratio_lo; }),
        real_key("nonlinear", "ratio_hi", [](auto& c) -> auto& { return c.nonlinear.ratio_hi; }),
        real_key("nonlinear", "max_norm_increase", [](auto& c) -> auto& { return c.nonlinear.max_norm_increase; }),
    };
    return k;
}

}  // namespace

std::string RunConfig::canonical() const
{
    std::vector<std::string> lines;
    for (const Key& k : keys())
        lines.push_back((k.section.empty() ? "" : k.section + ".") + k.name + " = " + k.get(*this));
    std::sort(lines.begin(), lines.end());
    std::string out;
    for (const auto& l : lines) out += l + "\n";
    return out;
}

std::string sha256_hex(const std::string& data)
{
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 digest failed");
    static const char* hex = "0123456789abcdef";
    std::string s;
    for (unsigned int i = 0; i < len; ++i) {
        s += hex[md[i] >> 4];
        s += hex[md[i] & 15];
    }
    return s;
}

std::string RunConfig::hash() const
{
    return sha256_hex(canonical());
}

RunConfig parse_config(const std::string& text, const std::string& origin)
{
    RunConfig cfg;
    cfg.origin = origin;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    std::map<std::string, int> seen;
    while (std::getline(in, line)) {
        ++lineno;
        const size_t hash = line.find_first_of("#;");
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(origin, lineno, "", "unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            bool known = false;
            for (const Key& k : keys()) known = known || k.section == section;
            if (!known) throw ConfigError(origin, lineno, section, "unknown section");
            continue;
        }
        const size_t eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(origin, lineno, "", "expected key = value");
        const std::string name = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const std::string field = section.empty() ? name : section + "." + name;
        const Key* key = nullptr;
        for (const Key& k : keys())
            if (k.section == section && k.name == name) key = &k;
        if (!key) throw ConfigError(origin, lineno, field, "unknown key");
        if (seen.count(field))
            throw ConfigError(origin, lineno, field, "duplicate key (first set on line " +
                                                         std::to_string(seen[field]) + ")");
        seen[field] = lineno;
        if (value.empty()) throw ConfigError(origin, lineno, field, "empty value");
        try {
            key->set(cfg, value);
        } catch (const std::exception& e) {
            throw ConfigError(origin, lineno, field, "invalid value '" + value + "': " + e.what());
        }
    }
    return cfg;
}

RunConfig load_config(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path, 0, "", "cannot open config file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

void validate(const RunConfig& c)
{
    auto require = [&](bool ok, const std::string& field, const std::string& msg) {
        if (!ok) throw ConfigError(c.origin, 0, field, msg);
    };
    const ClosureConfig& cl = c.closure;
    require(cl.type == "ideal_gas" || cl.type == "ideal_gas_linear_kappa", "closure.type",
            "must be ideal_gas or ideal_gas_linear_kappa");
    require(cl.R > 0, "closure.R", "must be > 0");
    require(cl.gamma > 1, "closure.gamma", "must be > 1");
    require(cl.kappa0 >= 0, "closure.kappa0", "must be >= 0");
    require(cl.mu0 >= 0, "closure.mu0", "must be >= 0");
    require(cl.alpha0 >= 0, "closure.alpha0", "must be >= 0");
    require(cl.theta_star > 0, "closure.theta_star", "must be > 0");

    const Domain& d = c.domain;
    require(d.rho_min > 0, "domain.rho_min", "must be > 0");
    require(d.theta_min > 0, "domain.theta_min", "must be > 0");
    require(d.rho_max > d.rho_min, "domain.rho_max", "must exceed rho_min");
    require(d.theta_max > d.theta_min, "domain.theta_max", "must exceed theta_min");
    require(d.contains(c.equilibrium.rho, c.equilibrium.theta), "equilibrium",
            "(rho, theta) must lie inside the domain");

    require(c.thermo.grid >= 1, "thermo.grid", "must be >= 1");
    require(c.thermo.states >= 1, "thermo.states", "must be >= 1");
    require(c.thermo.fd_step > 0, "thermo.fd_step", "must be > 0");
    require(c.thermo.u_max >= 0, "thermo.u_max", "must be >= 0");

    const SymbolConfig& s = c.symbol;
    require(s.xi_min > 0, "symbol.xi_min", "must be > 0");
    require(s.xi_max > s.xi_min, "symbol.xi_max", "must exceed xi_min");
    require(s.points_per_side >= 2, "symbol.points_per_side", "must be >= 2");
    require(s.eps < 0 || s.eps > 0, "symbol.eps", "must be positive (or negative for the default)");
    require(s.certificate_xi_max > 0, "symbol.certificate_xi_max", "must be > 0");
    require(s.delta >= 0, "symbol.delta", "must be >= 0");
    require(s.lyapunov_modes >= 1, "symbol.lyapunov_modes", "must be >= 1");
    require(s.lyapunov_points >= 2, "symbol.lyapunov_points", "must be >= 2");
    require(s.lyapunov_xi_min > 0 && s.lyapunov_xi_max > s.lyapunov_xi_min, "symbol.lyapunov_xi_min",
            "need 0 < lyapunov_xi_min < lyapunov_xi_max");

    const LinearConfig& l = c.linear;
    require(l.nodes >= 4 && l.nodes % 2 == 0, "linear.nodes", "must be even and >= 4");
    require(l.xi_max > 0, "linear.xi_max", "must be > 0");
    require(l.min_spacing > 0, "linear.min_spacing", "must be > 0");
    require(l.profile == "gaussian" || l.profile == "zero-mass-gaussian" || l.profile == "csv",
            "linear.profile", "must be gaussian, zero-mass-gaussian or csv");
    require(l.profile != "csv" || !l.profile_path.empty(), "linear.profile_path",
            "required when profile = csv");
    require(l.ell >= 0, "linear.ell", "must be >= 0");
    require(l.t_min > 0 && l.t_max >= 100 * l.t_min, "linear.t_max",
            "need t_min > 0 and the time range to span at least two decades");
    require(l.times >= 2, "linear.times", "must be >= 2");
    require(l.tolerance > 0, "linear.tolerance", "must be > 0");

    const RunSpec& r = c.nonlinear.run;
    require(r.N >= 8 && (r.N & (r.N - 1)) == 0, "nonlinear.N", "must be a power of two >= 8");
    require(r.L > 0, "nonlinear.L", "must be > 0");
    require(r.dt > 0, "nonlinear.dt", "must be > 0");
    require(r.T >= 0, "nonlinear.T", "must be >= 0");
    require(r.sample_interval > 0, "nonlinear.sample_interval", "must be > 0");
    const PerturbationSpec& p = r.perturbation;
    require(p.shape == "gaussian" || p.shape == "wave-packet", "nonlinear.shape",
            "must be gaussian or wave-packet");
    require(p.amplitude >= 0, "nonlinear.amplitude", "must be >= 0");
    require(p.width > 0 && p.width < r.L, "nonlinear.width", "must be in (0, L)");
    require(p.center < r.L, "nonlinear.center", "must be < L (negative selects L/2)");
    require(!p.fields.empty(), "nonlinear.fields", "must name at least one field");
    for (const auto& f : p.fields)
        require(f == "rho" || f == "u" || f == "theta", "nonlinear.fields", "unknown field '" + f + "'");
    require(c.nonlinear.ratio_hi > c.nonlinear.ratio_lo && c.nonlinear.ratio_lo > 0,
            "nonlinear.ratio_lo", "need 0 < ratio_lo < ratio_hi");
    require(c.nonlinear.max_norm_increase >= 0, "nonlinear.max_norm_increase", "must be >= 0");
}

EquationOfState make_eos(const ClosureConfig& c)
{
    EquationOfState eos = ideal_gas_eos_degenerate(c.R, c.gamma, c.kappa0, c.mu0, c.alpha0);
    if (c.type == "ideal_gas_linear_kappa")
        return eos.with_kappa("ideal gas, kappa linear in theta", linear_in_theta_kappa(c.kappa0, c.theta_star));
    return eos;
}

}  // namespace nsfk
