#include "nsda/config.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

namespace nsda {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

struct Setter {
    std::function<void(Config&, const std::string&)> apply;
};

[[noreturn]] void bad_value(const std::string& origin, size_t line,
                            const std::string& what) {
    throw std::runtime_error(origin + ":" + std::to_string(line) + ": " + what);
}

template <typename T>
T parse_number(const std::string& v) {
    std::stringstream ss(v);
    T out;
    ss >> out;
    if (ss.fail() || !ss.eof()) throw std::runtime_error("not a number: '" + v + "'");
    return out;
}

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"grid.domain_length_m", {[](Config& c, const std::string& v) { c.domain_length_m = parse_number<double>(v); }}},
        {"grid.modes_per_dim", {[](Config& c, const std::string& v) { c.modes_per_dim = parse_number<int>(v); }}},
        {"grid.dealias_num", {[](Config& c, const std::string& v) { c.dealias_num = parse_number<int>(v); }}},
        {"grid.dealias_den", {[](Config& c, const std::string& v) { c.dealias_den = parse_number<int>(v); }}},
        {"dynamics.nu_m2_per_s", {[](Config& c, const std::string& v) { c.nu_m2_per_s = parse_number<double>(v); }}},
        {"dynamics.dt_s", {[](Config& c, const std::string& v) { c.dt_s = parse_number<double>(v); }}},
        {"dynamics.spinup_time_s", {[](Config& c, const std::string& v) { c.spinup_time_s = parse_number<double>(v); }}},
        {"dynamics.grashof_target", {[](Config& c, const std::string& v) { c.grashof_target = parse_number<double>(v); }}},
        {"dynamics.forcing_seed", {[](Config& c, const std::string& v) { c.forcing_seed = parse_number<std::uint64_t>(v); }}},
        {"dynamics.reference_scheme", {[](Config& c, const std::string& v) { c.reference_scheme = v; }}},
        {"assimilation.mu_per_s", {[](Config& c, const std::string& v) { c.mu_per_s = parse_number<double>(v); }}},
        {"assimilation.squares_per_side", {[](Config& c, const std::string& v) { c.squares_per_side = parse_number<int>(v); }}},
        {"assimilation.basis", {[](Config& c, const std::string& v) { c.basis = v; }}},
        {"assimilation.observation", {[](Config& c, const std::string& v) { c.observation = v; }}},
        {"assimilation.node_offset_frac_x", {[](Config& c, const std::string& v) { c.node_offset_frac_x = parse_number<double>(v); }}},
        {"assimilation.node_offset_frac_y", {[](Config& c, const std::string& v) { c.node_offset_frac_y = parse_number<double>(v); }}},
        {"assimilation.cadence_steps", {[](Config& c, const std::string& v) { c.cadence_steps = parse_number<int>(v); }}},
        {"noise.sigma_sq_m2_per_s", {[](Config& c, const std::string& v) { c.sigma_sq_m2_per_s = parse_number<double>(v); }}},
        {"noise.seed", {[](Config& c, const std::string& v) { c.noise_seed = parse_number<std::uint64_t>(v); }}},
        {"harness.members", {[](Config& c, const std::string& v) { c.members = parse_number<int>(v); }}},
        {"harness.bound_mode", {[](Config& c, const std::string& v) { c.bound_mode = v; }}},
        {"harness.epsilon", {[](Config& c, const std::string& v) { c.epsilon = parse_number<double>(v); }}},
        {"harness.run_time_s", {[](Config& c, const std::string& v) { c.run_time_s = parse_number<double>(v); }}},
        {"harness.avg_window_s", {[](Config& c, const std::string& v) { c.avg_window_s = parse_number<double>(v); }}},
        {"harness.perturbation_rel", {[](Config& c, const std::string& v) { c.perturbation_rel = parse_number<double>(v); }}},
        {"harness.sample_every_steps", {[](Config& c, const std::string& v) { c.sample_every_steps = parse_number<int>(v); }}},
        {"harness.threads", {[](Config& c, const std::string& v) { c.threads = parse_number<int>(v); }}},
        {"harness.seed", {[](Config& c, const std::string& v) { c.harness_seed = parse_number<std::uint64_t>(v); }}},
        {"constants.c_lady", {[](Config& c, const std::string& v) { c.constants.c_lady = parse_number<double>(v); c.constants_given = true; }}},
        {"constants.c_brezis", {[](Config& c, const std::string& v) { c.constants.c_brezis = parse_number<double>(v); c.constants_given = true; }}},
        {"constants.c_grad", {[](Config& c, const std::string& v) { c.constants.c_grad = parse_number<double>(v); c.constants_given = true; }}},
        {"constants.c_bound_a", {[](Config& c, const std::string& v) { c.constants.c_bound_a = parse_number<double>(v); }}},
        {"constants.c1_step", {[](Config& c, const std::string& v) { c.constants.c1_step = parse_number<double>(v); }}},
        {"constants.c1_nodal", {[](Config& c, const std::string& v) { c.constants.c1_nodal = parse_number<double>(v); }}},
        {"constants.c2_nodal", {[](Config& c, const std::string& v) { c.constants.c2_nodal = parse_number<double>(v); }}},
        {"constants.calibration_trials", {[](Config& c, const std::string& v) { c.calibration_trials = parse_number<int>(v); }}},
    };
    return table;
}

} // namespace

Config parse_config_text(const std::string& text, const std::string& origin) {
    Config c;
    std::stringstream ss(text);
    std::string line, section;
    size_t lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const auto hash = line.find_first_of("#;");
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                bad_value(origin, lineno, "unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            bad_value(origin, lineno, "expected 'key = value'");
        const std::string key = section + "." + trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        auto it = setters().find(key);
        if (it == setters().end())
            bad_value(origin, lineno, "unknown key '" + key + "'");
        try {
            it->second.apply(c, value);
        } catch (const std::exception& e) {
            bad_value(origin, lineno, std::string(e.what()) + " for key '" + key + "'");
        }
    }
    return c;
}

void config_set_key(Config& c, const std::string& dotted_key,
                    const std::string& value) {
    auto it = setters().find(dotted_key);
    if (it == setters().end())
        throw std::runtime_error("unknown config key '" + dotted_key + "'");
    it->second.apply(c, trim(value));
}

Config parse_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open config file: " + path);
    std::stringstream buf;
    buf << f.rdbuf();
    return parse_config_text(buf.str(), path);
}

namespace {
std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}
}

std::string serialize_config(const Config& c) {
    std::ostringstream o;
    o << "[grid]\n";
    o << "domain_length_m = " << fmt(c.domain_length_m) << "\n";
    o << "modes_per_dim = " << c.modes_per_dim << "\n";
    o << "dealias_num = " << c.dealias_num << "\n";
    o << "dealias_den = " << c.dealias_den << "\n\n";
    o << "[dynamics]\n";
    o << "nu_m2_per_s = " << fmt(c.nu_m2_per_s) << "\n";
    o << "dt_s = " << fmt(c.dt_s) << "\n";
    o << "spinup_time_s = " << fmt(c.spinup_time_s) << "\n";
    o << "grashof_target = " << fmt(c.grashof_target) << "\n";
    o << "forcing_seed = " << c.forcing_seed << "\n";
    o << "reference_scheme = " << c.reference_scheme << "\n\n";
    o << "[assimilation]\n";
    o << "mu_per_s = " << fmt(c.mu_per_s) << "\n";
    o << "squares_per_side = " << c.squares_per_side << "\n";
    o << "basis = " << c.basis << "\n";
    o << "observation = " << c.observation << "\n";
    o << "node_offset_frac_x = " << fmt(c.node_offset_frac_x) << "\n";
    o << "node_offset_frac_y = " << fmt(c.node_offset_frac_y) << "\n";
    o << "cadence_steps = " << c.cadence_steps << "\n\n";
    o << "[noise]\n";
    o << "sigma_sq_m2_per_s = " << fmt(c.sigma_sq_m2_per_s) << "\n";
    o << "seed = " << c.noise_seed << "\n\n";
    o << "[harness]\n";
    o << "members = " << c.members << "\n";
    o << "bound_mode = " << c.bound_mode << "\n";
    o << "epsilon = " << fmt(c.epsilon) << "\n";
    o << "run_time_s = " << fmt(c.run_time_s) << "\n";
    o << "avg_window_s = " << fmt(c.avg_window_s) << "\n";
    o << "perturbation_rel = " << fmt(c.perturbation_rel) << "\n";
    o << "sample_every_steps = " << c.sample_every_steps << "\n";
    o << "threads = " << c.threads << "\n";
    o << "seed = " << c.harness_seed << "\n\n";
    o << "[constants]\n";
    o << "c_lady = " << fmt(c.constants.c_lady) << "\n";
    o << "c_brezis = " << fmt(c.constants.c_brezis) << "\n";
    o << "c_grad = " << fmt(c.constants.c_grad) << "\n";
    o << "c_bound_a = " << fmt(c.constants.c_bound_a) << "\n";
    o << "c1_step = " << fmt(c.constants.c1_step) << "\n";
    o << "c1_nodal = " << fmt(c.constants.c1_nodal) << "\n";
    o << "c2_nodal = " << fmt(c.constants.c2_nodal) << "\n";
    o << "calibration_trials = " << c.calibration_trials << "\n";
    return o.str();
}

} // namespace nsda
