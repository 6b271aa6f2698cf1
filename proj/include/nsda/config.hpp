/// @file config.hpp
/// @brief Flat sectioned key-value run configuration with explicit units in
///        key names, resolution of derived defaults, and serialization.

#ifndef NSDA_CONFIG_HPP
#define NSDA_CONFIG_HPP

#include <cstdint>
#include <string>

#include "nsda/harness.hpp"

namespace nsda {

/// Parsed run configuration; zeros mean "derive from the bound mode".
struct Config {
    // [grid]
    double domain_length_m = 2.0 * 3.14159265358979323846;
    int modes_per_dim = 128;
    int dealias_num = 2;
    int dealias_den = 3;

    // [dynamics]
    double nu_m2_per_s = 0.01;
    double dt_s = 0.02;
    double spinup_time_s = 0.0;  // 0 = 20/(nu lambda1)
    double grashof_target = 10.0;
    std::uint64_t forcing_seed = 7;
    std::string reference_scheme = "imex_rk2";

    // [assimilation]
    double mu_per_s = 0.0;       // 0 = derive (bound mode); >0 = exploratory
    int squares_per_side = 0;    // 0 = derive and round to a divisor of M
    std::string basis = "";      // "" = derive from bound mode
    std::string observation = "";
    double node_offset_frac_x = 0.5;
    double node_offset_frac_y = 0.5;
    int cadence_steps = 1;

    // [noise]
    double sigma_sq_m2_per_s = 0.0;
    std::uint64_t noise_seed = 42;

    // [harness]
    int members = 4;
    std::string bound_mode = "cor1";
    double epsilon = 0.25;
    double run_time_s = 0.0;     // 0 = 20/mu
    double avg_window_s = 0.0;   // 0 = 5/mu
    double perturbation_rel = 1.0;
    int sample_every_steps = 1;
    int threads = 0;
    std::uint64_t harness_seed = 1;

    // [constants]  (zeros trigger on-the-fly calibration)
    Constants constants;
    bool constants_given = false;
    int calibration_trials = 4000;

    bool exploratory = false;    // set during resolution when mu/K explicit
};

/// Parses the sectioned key=value format; unknown keys and malformed lines
/// raise with file:line anchors.
Config parse_config_file(const std::string& path);
Config parse_config_text(const std::string& text, const std::string& origin);

/// Sets one value by dotted key ("section.key"); throws on unknown keys.
void config_set_key(Config& c, const std::string& dotted_key,
                    const std::string& value);

/// Serializes with every derived default materialized except the
/// mode-derived assimilation parameters, which stay derivable (zeros) so a
/// re-run reproduces the artifacts bit for bit.
std::string serialize_config(const Config& c);

} // namespace nsda

#endif
