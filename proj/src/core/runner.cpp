#include "runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

namespace nsda {

namespace {

using nlohmann::json;

json constants_to_json(const Constants& k) {
    json j;
    j["c_lady"] = k.c_lady;
    j["c_brezis"] = k.c_brezis;
    j["c_grad"] = k.c_grad;
    j["c_bound_a"] = k.c_bound_a;
    j["c1_step"] = k.c1_step;
    j["c1_nodal"] = k.c1_nodal;
    j["c2_nodal"] = k.c2_nodal;
    return j;
}

json report_to_json(const TheoremReport& r) {
    json j;
    j["mode"] = r.mode;
    j["threshold"] = r.threshold;
    j["observed"] = r.observed;
    j["se_at_observed"] = r.se_at_observed;
    j["threshold_avg"] = r.threshold_avg;
    j["observed_avg"] = r.observed_avg;
    j["se_avg"] = r.se_avg;
    j["pass_primary"] = r.pass_primary;
    j["pass_avg"] = r.pass_avg;
    j["pass"] = r.pass;
    j["margin"] = r.margin;
    j["mu"] = r.mu;
    j["h"] = r.h;
    j["q"] = r.q;
    j["epsilon"] = r.epsilon;
    j["G"] = r.G;
    j["nu"] = r.nu;
    j["T_avg"] = r.T_avg;
    j["trace_q"] = r.trace_q;
    j["trace_ahalf_q"] = r.trace_ahalf_q;
    j["J"] = r.J;
    j["c5"] = r.c5;
    j["constants"] = constants_to_json(r.constants);
    for (const auto& [key, val] : r.extras) j["extras"][key] = val;
    return j;
}

void write_series_csv(const std::string& path, const ErrorSeries& s) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write error series: " + path);
    f << "t, mean_H2, se_H2, mean_V2, se_V2, mean_DA2, se_DA2\n";
    char buf[40];
    for (size_t i = 0; i < s.times.size(); ++i) {
        auto put = [&](double v, bool lead = false) {
            std::snprintf(buf, sizeof buf, "%.17g", v);
            if (!lead) f << ", ";
            f << buf;
        };
        put(s.times[i], true);
        put(s.mean_h2[i]);
        put(s.se_h2[i]);
        put(s.mean_v2[i]);
        put(s.se_v2[i]);
        put(s.mean_da2[i]);
        put(s.se_da2[i]);
        f << "\n";
    }
}

/// Everything derived from the config that a run needs.
struct ResolvedRun {
    GridPtr grid;
    std::optional<SolverConfig> solver;
    AssimilationConfig assim;
    Constants constants;
    ParameterSelection sel;
    BoundMode mode = BoundMode::cor1;
    double G = 0.0;
    bool exploratory = false;
    int K_requested = 0;   // selection before grid rounding
    SpectralField U0{nullptr};
    SpinupDiagnostics spin_diag;
};

Scheme scheme_from_string(const std::string& s) {
    if (s == "imex_euler") return Scheme::imex_euler;
    if (s == "imex_rk2") return Scheme::imex_rk2;
    throw std::runtime_error("unknown reference_scheme: " + s);
}

int round_fine_K(const ParameterSelection& sel, int M) {
    // Coarse K rounds up to a divisor of M; the fine grid must stay an exact
    // q-refinement that also divides M, so q rounds up to a power of two.
    int q = 1;
    while (q < sel.q) q *= 2;
    int Kc = round_K_to_grid(sel.K_coarse, M);
    while (Kc * q > M) {
        if (Kc > 1) throw std::runtime_error(
            "selected observation resolution K=" + std::to_string(Kc * q) +
            " exceeds the grid M=" + std::to_string(M) +
            "; increase modes_per_dim or reduce the Grashof number");
        break;
    }
    return Kc * q;
}

ResolvedRun resolve(const Config& cfg, bool needs_dynamics) {
    ResolvedRun r;
    r.grid = make_grid(cfg.domain_length_m, cfg.modes_per_dim, cfg.dealias_num,
                       cfg.dealias_den);
    r.mode = bound_mode_from_string(cfg.bound_mode);
    const double lam1 = r.grid->lambda1();
    const double L = cfg.domain_length_m;
    const double nu = cfg.nu_m2_per_s;

    SpectralField forcing = make_shell_forcing(
        r.grid, cfg.forcing_seed, cfg.grashof_target * nu * nu * lam1);
    const double t_spin =
        cfg.spinup_time_s > 0.0 ? cfg.spinup_time_s : 20.0 / (nu * lam1);
    r.solver.emplace(r.grid, nu, std::move(forcing), cfg.dt_s, t_spin,
                     scheme_from_string(cfg.reference_scheme));
    r.G = grashof(*r.solver);

    r.constants = cfg.constants;
    const bool need_calibration = r.constants.c_lady <= 0.0 ||
                                  r.constants.c_brezis <= 0.0 ||
                                  r.constants.c_grad <= 0.0;
    if (need_calibration)
        r.constants = calibrate_constants(r.grid, cfg.calibration_trials,
                                          cfg.harness_seed);

    if (needs_dynamics) {
        auto spin = spin_up(*r.solver, cfg.harness_seed);
        r.U0 = std::move(spin.U);
        r.spin_diag = spin.diag;
        r.constants.c_bound_a = std::max(1.1 * spin.diag.c_bound_a, 1e-4);
    }

    r.sel = select_parameters(r.mode, r.G, nu, L, r.constants, cfg.epsilon);
    r.K_requested = r.sel.K;

    const bool r2_mode = r.mode == BoundMode::main2 ||
                         r.mode == BoundMode::cor1main2 ||
                         r.mode == BoundMode::nodcor1 ||
                         r.mode == BoundMode::nodes_oversampled;
    r.assim.basis_kind = !cfg.basis.empty()
                             ? (cfg.basis == "mollified" ? BasisKind::mollified
                                                         : BasisKind::step)
                             : (r2_mode ? BasisKind::mollified : BasisKind::step);
    r.assim.obs_kind = !cfg.observation.empty()
                           ? (cfg.observation == "nodal" ? ObservationKind::nodal
                                                         : ObservationKind::volume)
                           : (r2_mode ? ObservationKind::nodal
                                      : ObservationKind::volume);

    r.exploratory = cfg.mu_per_s > 0.0 || cfg.squares_per_side > 0;
    r.assim.mu = cfg.mu_per_s > 0.0 ? cfg.mu_per_s : r.sel.mu;
    if (cfg.squares_per_side > 0) {
        r.assim.K = cfg.squares_per_side;
        r.assim.q = 1;
    } else if (r.sel.degenerate) {
        r.assim.K = 1;
        r.assim.q = 1;
    } else {
        r.assim.K = round_fine_K(r.sel, cfg.modes_per_dim);
        int q = 1;
        while (q < r.sel.q) q *= 2;
        r.assim.q = q;
    }
    r.assim.node_off1 = cfg.node_offset_frac_x;
    r.assim.node_off2 = cfg.node_offset_frac_y;
    r.assim.cadence = cfg.cadence_steps;
    r.assim.noise = NoiseModel{cfg.sigma_sq_m2_per_s, 2 * r.assim.K * r.assim.K,
                               cfg.noise_seed};
    return r;
}

json manifest_json(const Config& cfg, const RunOptions& opt, const ResolvedRun& r,
                   const std::vector<std::string>& artifacts) {
    json j;
    j["tool"] = "nsda";
    j["version"] = version_string();
    j["mode"] = opt.mode;
    j["resolved_config"] = serialize_config(cfg);
    j["seed"] = cfg.harness_seed;
    j["noise_seed"] = cfg.noise_seed;
    j["forcing_seed"] = cfg.forcing_seed;
    j["grashof"] = r.G;
    j["bound_mode"] = to_string(r.mode);
    j["constants"] = constants_to_json(r.constants);
    j["selection"] = {{"mu", r.sel.mu},
                      {"K_prescribed", r.K_requested},
                      {"K_used", r.assim.K},
                      {"K_coarse_used", r.assim.coarse_K()},
                      {"q_prescribed", r.sel.q},
                      {"q_used", r.assim.q},
                      {"h_used", r.grid->length() / std::max(1, r.assim.K)},
                      {"degenerate", r.sel.degenerate},
                      {"J", r.sel.J},
                      {"c5", r.sel.c5}};
    j["exploratory"] = r.exploratory;
    j["threads"] = cfg.threads;
    j["spinup"] = {{"max_h2", r.spin_diag.max_h2},
                   {"max_v2", r.spin_diag.max_v2},
                   {"max_da2", r.spin_diag.max_da2},
                   {"c_bound_a", r.spin_diag.c_bound_a},
                   {"cfl_max", r.spin_diag.cfl_max}};
    j["artifacts"] = artifacts;
    return j;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write: " + path);
    f << text;
}

ExperimentConfig make_experiment(const Config& cfg, const ResolvedRun& r) {
    ExperimentConfig e{*r.solver,
                       r.assim,
                       cfg.members,
                       cfg.run_time_s > 0.0 ? cfg.run_time_s
                                            : 20.0 / std::max(r.assim.mu, 1e-12),
                       cfg.avg_window_s > 0.0 ? cfg.avg_window_s
                                              : 5.0 / std::max(r.assim.mu, 1e-12),
                       r.mode,
                       cfg.epsilon,
                       cfg.perturbation_rel,
                       cfg.harness_seed,
                       cfg.sample_every_steps,
                       cfg.threads};
    return e;
}

// Single-trajectory assimilation with observations either synthesized (noise
// stream of member 1) or ingested from a log; also used by reference mode to
// emit the log it would have consumed.
struct TrajectoryResult {
    ErrorSeries series;
    std::vector<double> obs_times;
    std::vector<ObservationVector> obs_rows;
};

TrajectoryResult run_single(const Config& cfg, const ResolvedRun& r,
                            const ExperimentConfig& exp,
                            const ObservationLog* replay, bool collect_log,
                            bool assimilate) {
    const double dt = exp.solver.dt;
    const auto steps = static_cast<std::uint64_t>(std::ceil(exp.T_run / dt));
    const double dt_obs = exp.assim.cadence * dt;
    const InterpolantBasis basis =
        build_basis(exp.assim.basis_kind, exp.assim.coarse_K(), exp.solver.grid);
    SolverConfig member_solver = exp.solver;
    member_solver.scheme = Scheme::imex_euler;

    SpectralField U = r.U0;
    SpectralField u(exp.solver.grid);
    if (assimilate) {
        u = r.U0;
        if (exp.perturbation_rel > 0.0) {
            SpectralField pert = random_divfree_field(
                exp.solver.grid, exp.seed, rng::Purpose::perturbation, 1, 2.0,
                std::max(4, exp.solver.grid->modes() / 8),
                exp.perturbation_rel * r.U0.norm(Space::H));
            u += pert;
        }
    }

    TrajectoryResult out;
    out.series.members = 1;
    ObservationVector held;
    std::uint64_t obs_index = 0;

    for (std::uint64_t s = 0; s < steps; ++s) {
        const double t = s * dt;
        if (s % exp.assim.cadence == 0) {
            ObservationVector fine =
                exp.assim.obs_kind == ObservationKind::volume
                    ? observe_volumes(U, exp.assim.K)
                    : observe_nodes_regular(U, exp.assim.K, exp.assim.node_off1,
                                            exp.assim.node_off2);
            if (exp.assim.noise.sigma_sq > 0.0) {
                auto dbeta = sample_increments(dt_obs, exp.assim.noise, 1,
                                               static_cast<std::uint32_t>(obs_index));
                for (size_t i = 0; i < fine.values.size(); ++i)
                    fine.values[i] += dbeta[i] / dt_obs;
            }
            if (replay) {
                if (obs_index >= replay->times.size())
                    throw std::runtime_error("replay: log ends before the run");
                const double t_row = replay->times[obs_index];
                if (std::abs(t_row - t) > 1e-9 * std::max(1.0, std::abs(t)))
                    throw std::runtime_error(
                        "replay: log time " + std::to_string(t_row) +
                        " does not match observation time " + std::to_string(t) +
                        "; cadence incompatible with dt");
                if (replay->obs[obs_index].channels() != fine.channels())
                    throw std::runtime_error("replay: channel count mismatch");
                fine = replay->obs[obs_index];
                fine.kind = exp.assim.obs_kind;
            }
            if (collect_log) {
                out.obs_times.push_back(t);
                out.obs_rows.push_back(fine);
            }
            held = exp.assim.q > 1 ? oversample_average(fine, exp.assim.q)
                                   : std::move(fine);
            ++obs_index;
        }
        SpectralField U_next = step_reference(U, member_solver);
        if (assimilate) {
            u = step_nudged(u, held, member_solver, exp.assim, basis);
            if ((s + 1) % exp.sample_every == 0 || s + 1 == steps) {
                SpectralField v = U_next;
                v -= u;
                out.series.times.push_back((s + 1) * dt);
                out.series.mean_h2.push_back(std::pow(v.norm(Space::H), 2));
                out.series.mean_v2.push_back(std::pow(v.norm(Space::V), 2));
                out.series.mean_da2.push_back(std::pow(v.norm(Space::DA), 2));
                out.series.se_h2.push_back(0.0);
                out.series.se_v2.push_back(0.0);
                out.series.se_da2.push_back(0.0);
            }
        }
        U = std::move(U_next);
    }
    (void)cfg;
    return out;
}

} // namespace

const char* version_string() { return "0.1.0"; }

RunResult run_experiment(Config cfg, const RunOptions& opt) {
    RunResult res;
    try {
        if (opt.seed >= 0) cfg.harness_seed = static_cast<std::uint64_t>(opt.seed);
        if (opt.members > 0) cfg.members = opt.members;
        if (!opt.bound.empty()) cfg.bound_mode = opt.bound;
        if (opt.epsilon > 0.0) cfg.epsilon = opt.epsilon;

        std::filesystem::create_directories(opt.out_dir);
        const auto path = [&](const char* name) {
            return (std::filesystem::path(opt.out_dir) / name).string();
        };

        if (opt.mode == "calibrate") {
            auto grid = make_grid(cfg.domain_length_m, cfg.modes_per_dim,
                                  cfg.dealias_num, cfg.dealias_den);
            Constants k =
                calibrate_constants(grid, cfg.calibration_trials, cfg.harness_seed);
            json j = constants_to_json(k);
            j["trials"] = cfg.calibration_trials;
            j["modes_per_dim"] = cfg.modes_per_dim;
            res.report_json = j.dump(2);
            res.report_path = path("constants.json");
            write_text(res.report_path, res.report_json);
            res.ok = true;
            return res;
        }

        if (opt.mode == "verify") {
            json checks;
            bool all = true;
            for (int K : {4, 8, 16}) {
                auto rep = check_partition_properties(cfg.domain_length_m, K);
                const bool ok = rep.max_partition_deviation <= 1e-10 &&
                                rep.max_outside_support <= 1e-12 &&
                                rep.mean_abs_error <= 1e-10 &&
                                rep.psi_l2 >= 0.8 * rep.h && rep.psi_l2 <= 1.2 * rep.h &&
                                std::abs(rep.gram_psi_edge) <= 1.44 * rep.h * rep.h &&
                                rep.gram_psi_disjoint == 0.0;
                checks["partition_K" + std::to_string(K)] = ok;
                all = all && ok;
            }
            {
                auto grid = make_grid(cfg.domain_length_m, cfg.modes_per_dim,
                                      cfg.dealias_num, cfg.dealias_den);
                double c1 = 0.0;
                for (int K : {4, 8, 16}) {
                    auto basis = build_basis(BasisKind::step, K, grid);
                    auto rep = verify_approximation(basis, ObservationKind::volume,
                                                    ApproxMode::R1, 150,
                                                    cfg.harness_seed);
                    c1 = std::max(c1, rep.c1_max);
                }
                checks["step_c1"] = c1;
                checks["step_c1_ok"] = c1 <= 1.0 / 6.0;
                all = all && c1 <= 1.0 / 6.0;
            }
            {
                bool ok = true;
                for (int i = 0; i < 2000; ++i) {
                    const double eta =
                        10.0 * rng::uniform({cfg.harness_seed, rng::Purpose::test, 9, 0,
                                             static_cast<std::uint32_t>(i)});
                    // golden-section minimization of r - eta(1+log r) on [1, R]
                    double lo = 1.0, hi = std::max(2.0, 2.0 * eta);
                    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
                    double a = hi - gr * (hi - lo), b = lo + gr * (hi - lo);
                    auto f = [eta](double rr) { return rr - eta * (1.0 + std::log(rr)); };
                    for (int it = 0; it < 200; ++it) {
                        if (f(a) < f(b)) hi = b, b = a, a = hi - gr * (hi - lo);
                        else lo = a, a = b, b = lo + gr * (hi - lo);
                    }
                    if (f(0.5 * (lo + hi)) < minlog_bound(eta) - 1e-9) ok = false;
                }
                checks["minlog_ok"] = ok;
                all = all && ok;
            }
            res.report_json = json{{"checks", checks}, {"pass", all}}.dump(2);
            res.report_path = path("verification.json");
            write_text(res.report_path, res.report_json);
            res.ok = true;
            res.checks_passed = all;
            return res;
        }

        if (opt.mode != "reference" && opt.mode != "assimilate" &&
            opt.mode != "ensemble")
            throw std::runtime_error("unknown mode: " + opt.mode);

        ResolvedRun r = resolve(cfg, true);
        ExperimentConfig exp = make_experiment(cfg, r);
        std::vector<std::string> artifacts;

        if (opt.mode == "reference") {
            auto traj = run_single(cfg, r, exp, nullptr, true, false);
            res.obslog_path = path("observations.csv");
            write_observation_log(res.obslog_path, traj.obs_times, traj.obs_rows);
            artifacts.push_back(res.obslog_path);
            Checkpoint ck{0.0, 0, cfg.noise_seed, r.U0};
            const std::string ckpath = path("reference_start.ckpt");
            save_checkpoint(ckpath, ck);
            artifacts.push_back(ckpath);
            res.report_json = json{{"grashof", r.G},
                                   {"spinup", {{"max_h2", r.spin_diag.max_h2},
                                               {"max_v2", r.spin_diag.max_v2},
                                               {"max_da2", r.spin_diag.max_da2}}}}
                                  .dump(2);
            res.report_path = path("reference.json");
            write_text(res.report_path, res.report_json);
        } else if (opt.mode == "assimilate") {
            std::optional<ObservationLog> log;
            if (!opt.replay_path.empty())
                log = read_observation_log(opt.replay_path, r.assim.obs_kind);
            auto traj = run_single(cfg, r, exp, log ? &*log : nullptr, false, true);
            res.series_path = path("series.csv");
            write_series_csv(res.series_path, traj.series);
            artifacts.push_back(res.series_path);
            res.report_json =
                json{{"final_h2", traj.series.mean_h2.back()},
                     {"final_v2", traj.series.mean_v2.back()},
                     {"replay", !opt.replay_path.empty()}}
                    .dump(2);
            res.report_path = path("assimilate.json");
            write_text(res.report_path, res.report_json);
        } else {  // ensemble
            ErrorSeries series = run_ensemble(exp, r.U0);
            res.series_path = path("series.csv");
            write_series_csv(res.series_path, series);
            artifacts.push_back(res.series_path);

            const InterpolantBasis coarse_basis = build_basis(
                exp.assim.basis_kind, exp.assim.coarse_K(), exp.solver.grid);
            const double q2 = static_cast<double>(exp.assim.q) * exp.assim.q;
            WienerStats stats = covariance_traces(
                coarse_basis, exp.assim.noise.sigma_sq / q2, Fidelity::simulation);
            TheoremReport rep =
                evaluate_bound(series, exp, stats, r.constants, r.G, r.sel);
            json j = report_to_json(rep);
            j["exploratory"] = r.exploratory;
            res.report_json = j.dump(2);
            res.report_path = path("report.json");
            write_text(res.report_path, res.report_json);
            artifacts.push_back(res.report_path);
            res.checks_passed = r.exploratory ? true : rep.pass;
        }

        res.manifest_path = path("manifest.json");
        write_text(res.manifest_path,
                   manifest_json(cfg, opt, r, artifacts).dump(2));
        res.ok = true;
        return res;
    } catch (const std::exception& e) {
        res.ok = false;
        res.checks_passed = false;
        res.message = e.what();
        return res;
    }
}

} // namespace nsda
