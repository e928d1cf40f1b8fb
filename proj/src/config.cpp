#include "kinhydro/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "kinhydro/collision.hpp"
#include "kinhydro/errors.hpp"
#include "kinhydro/grid.hpp"

namespace kinhydro {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(v);
    while (std::getline(is, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double to_double(const std::string& key, const std::string& v) {
    std::size_t pos = 0;
    double x = 0;
    try {
        x = std::stod(v, &pos);
    } catch (const std::exception&) {
        throw InvalidArgument("config: " + key + " expects a number, got '" + v + "'");
    }
    if (pos != v.size()) throw InvalidArgument("config: " + key + " expects a number, got '" + v + "'");
    return x;
}

int to_int(const std::string& key, const std::string& v) {
    const double x = to_double(key, v);
    if (x != std::floor(x) || std::abs(x) > 1e9) throw InvalidArgument("config: " + key + " expects an integer");
    return static_cast<int>(x);
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "on" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "off" || v == "0" || v == "no") return false;
    throw InvalidArgument("config: " + key + " expects a boolean, got '" + v + "'");
}

std::string num(double x) {
    std::ostringstream os;
    os << std::setprecision(17) << x;
    return os.str();
}

}  // namespace

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = {
        "dim", "n_x", "n_v", "v_max", "delta", "s_sobolev", "p", "alpha", "beta", "epsilon", "t_end",
        "t_end_eps2", "dt_factor", "scheme", "integrator", "conserve_fix", "nonlinear", "coupled", "samples",
        "output_dir", "initial", "amplitude", "theta_ratio", "mode", "galerkin_degree", "nsf_dt", "layer_window"};
    return keys;
}

void set_config_key(SimConfig& c, const std::string& key, const std::string& v) {
    if (key == "dim") c.dim = to_int(key, v);
    else if (key == "n_x") c.n_x = to_int(key, v);
    else if (key == "n_v") c.n_v = to_int(key, v);
    else if (key == "v_max") c.v_max = to_double(key, v);
    else if (key == "delta") c.delta = to_double(key, v);
    else if (key == "s_sobolev") c.s_sobolev = to_double(key, v);
    else if (key == "p") c.p = (v == "inf" || v == "infinity") ? NormSpec::inf : to_double(key, v);
    else if (key == "alpha") c.alpha = to_double(key, v);
    else if (key == "beta") c.beta = to_double(key, v);
    else if (key == "epsilon") {
        c.epsilon.clear();
        for (const auto& s : split_list(v)) c.epsilon.push_back(to_double(key, s));
    } else if (key == "t_end") c.t_end = to_double(key, v);
    else if (key == "t_end_eps2") c.t_end_eps2 = to_double(key, v);
    else if (key == "dt_factor") c.dt_factor = to_double(key, v);
    else if (key == "scheme") {
        if (v == "strang") c.scheme = Scheme::Strang;
        else if (v == "lie") c.scheme = Scheme::Lie;
        else throw InvalidArgument("config: scheme must be strang or lie");
    } else if (key == "integrator") {
        if (v == "exponential") c.integrator = CollisionIntegrator::Exponential;
        else if (v == "nu-if") c.integrator = CollisionIntegrator::NuIntegratingFactor;
        else throw InvalidArgument("config: integrator must be exponential or nu-if");
    } else if (key == "conserve_fix") c.conserve_fix = to_bool(key, v);
    else if (key == "nonlinear") c.nonlinear = to_bool(key, v);
    else if (key == "coupled") c.coupled = to_bool(key, v);
    else if (key == "samples") c.samples = to_int(key, v);
    else if (key == "output_dir") c.output_dir = v;
    else if (key == "initial") c.initial = v;
    else if (key == "amplitude") c.amplitude = to_double(key, v);
    else if (key == "theta_ratio") c.theta_ratio = to_double(key, v);
    else if (key == "mode") {
        const auto parts = split_list(v);
        if (parts.empty() || parts.size() > 3) throw InvalidArgument("config: mode expects 1 to 3 integers");
        c.mode = {0, 0, 0};
        for (std::size_t a = 0; a < parts.size(); ++a) c.mode[a] = to_int(key, parts[a]);
    } else if (key == "galerkin_degree") c.galerkin_degree = to_int(key, v);
    else if (key == "nsf_dt") c.nsf_dt = to_double(key, v);
    else if (key == "layer_window") c.layer_window = to_double(key, v);
    else throw InvalidArgument("config: unknown key '" + key + "'");
}

SimConfig parse_config(const std::string& text) {
    SimConfig c;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw InvalidArgument("config: line " + std::to_string(lineno) + ": expected key = value");
        set_config_key(c, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return c;
}

SimConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

EvolveConfig SimConfig::evolve_config(double eps) const {
    EvolveConfig e;
    e.epsilon = eps;
    e.dt_factor = dt_factor;
    e.t_end = run_t_end(eps);
    e.scheme = scheme;
    e.integrator = integrator;
    e.conserve_fix = conserve_fix;
    e.nonlinear = nonlinear;
    e.coupled = coupled;
    e.delta = delta;
    e.samples = samples;
    return e;
}

std::vector<std::string> SimConfig::validate() const {
    if (dim != 2 && dim != 3) throw InvalidArgument("config: dim must be 2 or 3");
    if (n_x < 1) throw InvalidArgument("config: n_x must be positive");
    if (n_v < 4) throw InvalidArgument("config: n_v must be at least 4");
    if (!(v_max > 0)) throw InvalidArgument("config: v_max must be positive");
    SplittingParams{delta}.validate();
    if (!(s_sobolev > dim / 2.0)) throw InvalidArgument("config: s_sobolev must exceed dim/2");
    if (!(beta > dim / 2.0 + 1)) throw InvalidArgument("config: beta must exceed dim/2 + 1");
    if (!(p >= 1)) throw InvalidArgument("config: p must lie in [1, inf]");
    if (epsilon.empty()) throw InvalidArgument("config: epsilon list is empty");
    for (double e : epsilon) evolve_config(e).validate();
    if (!(nsf_dt > 0)) throw InvalidArgument("config: nsf_dt must be positive");
    if (!(layer_window >= 0)) throw InvalidArgument("config: layer_window must be non-negative");
    if (galerkin_degree < 2) throw InvalidArgument("config: galerkin_degree must be at least 2");

    std::vector<std::string> warn;
    const VelocityGrid vg(dim, v_max, n_v);
    const auto [nu0, nu1] = nu_bounds(collision_frequency(vg), vg);
    const RegimeConstants rc = regime_constants(p, alpha, dim, nu0, nu1);
    if (alpha < rc.alpha_star)
        warn.push_back("alpha = " + num(alpha) + " is below alpha_*(p) = " + num(rc.alpha_star) +
                       " (alpha_*(1) = 3 for the hard-sphere threshold chain)");
    if (rc.flagged) warn.push_back("sigma_B(p, alpha) <= 0: coercivity bound not available");
    return warn;
}

std::string SimConfig::canonical() const {
    std::ostringstream os;
    auto kv = [&](const char* k, const std::string& v) { os << k << " = " << v << "\n"; };
    kv("dim", std::to_string(dim));
    kv("n_x", std::to_string(n_x));
    kv("n_v", std::to_string(n_v));
    kv("v_max", num(v_max));
    kv("delta", num(delta));
    kv("s_sobolev", num(s_sobolev));
    kv("p", std::isinf(p) ? "inf" : num(p));
    kv("alpha", num(alpha));
    kv("beta", num(beta));
    std::string eps;
    for (std::size_t i = 0; i < epsilon.size(); ++i) eps += (i ? "," : "") + num(epsilon[i]);
    kv("epsilon", eps);
    kv("t_end", num(t_end));
    kv("t_end_eps2", num(t_end_eps2));
    kv("dt_factor", num(dt_factor));
    kv("scheme", scheme == Scheme::Strang ? "strang" : "lie");
    kv("integrator", integrator == CollisionIntegrator::Exponential ? "exponential" : "nu-if");
    kv("conserve_fix", conserve_fix ? "true" : "false");
    kv("nonlinear", nonlinear ? "true" : "false");
    kv("coupled", coupled ? "true" : "false");
    kv("samples", std::to_string(samples));
    kv("output_dir", output_dir);
    kv("initial", initial);
    kv("amplitude", num(amplitude));
    kv("theta_ratio", num(theta_ratio));
    kv("mode", std::to_string(mode[0]) + "," + std::to_string(mode[1]) + "," + std::to_string(mode[2]));
    kv("galerkin_degree", std::to_string(galerkin_degree));
    kv("nsf_dt", num(nsf_dt));
    kv("layer_window", num(layer_window));
    return os.str();
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string SimConfig::hash() const {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << fnv1a(canonical());
    return os.str();
}

int configure_threads() {
#ifdef _OPENMP
    if (const char* env = std::getenv("KINHYDRO_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) omp_set_num_threads(n);
    }
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace kinhydro
