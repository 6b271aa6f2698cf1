#include "nsda/harness.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <thread>

namespace nsda {

namespace {
constexpr double pi = std::numbers::pi;
constexpr double euler_e = std::numbers::e;
}

double Constants::c3() const {
    if (c1_nodal <= 0.0 || c2_nodal < 0.0)
        throw std::logic_error("Constants::c3: nodal R2 constants not calibrated");
    return std::max(c1_nodal, std::sqrt(c2_nodal));
}

std::string to_string(BoundMode m) {
    switch (m) {
    case BoundMode::main1: return "main1";
    case BoundMode::cor1: return "cor1";
    case BoundMode::cor2: return "cor2";
    case BoundMode::main2: return "main2";
    case BoundMode::cor1main2: return "cor1main2";
    case BoundMode::nodcor1: return "nodcor1";
    case BoundMode::nodes_oversampled: return "nodes-oversampled";
    }
    return "?";
}

BoundMode bound_mode_from_string(const std::string& s) {
    if (s == "main1") return BoundMode::main1;
    if (s == "cor1") return BoundMode::cor1;
    if (s == "cor2") return BoundMode::cor2;
    if (s == "main2") return BoundMode::main2;
    if (s == "cor1main2") return BoundMode::cor1main2;
    if (s == "nodcor1") return BoundMode::nodcor1;
    if (s == "nodes-oversampled" || s == "nodes_oversampled")
        return BoundMode::nodes_oversampled;
    throw std::invalid_argument("unknown bound mode: " + s);
}

Constants calibrate_constants(GridPtr grid, int trials, std::uint64_t seed) {
    if (trials < 100)
        throw std::invalid_argument("calibrate_constants: trials must be >= 100");
    Constants k;
    const double lam1 = grid->lambda1();
    const int disk =
        static_cast<int>(std::sqrt(static_cast<double>(grid->max_jsq())));

    double max_lady = 0.0, max_brezis = 0.0;
    const double decays[] = {1.0, 1.5, 2.0, 2.5};
    const int jmaxes[] = {4, disk / 4, disk / 2, disk};
    for (int t = 0; t < trials; ++t) {
        SpectralField phi =
            (t % 5 == 4)
                ? random_blob_field(grid, seed, rng::Purpose::calibration,
                                    static_cast<std::uint32_t>(t), 1 + t % 4)
                : random_divfree_field(grid, seed, rng::Purpose::calibration,
                                       static_cast<std::uint32_t>(t),
                                       decays[t % 4],
                                       std::max(2, jmaxes[(t / 4) % 4]));
        const double h = phi.norm(Space::H);
        const double v = phi.norm(Space::V);
        const double da = phi.norm(Space::DA);
        const double l4 = phi.norm(Space::L4);
        const double linf = phi.norm(Space::Linf);
        if (h <= 0.0 || v <= 0.0) continue;
        max_lady = std::max(max_lady, l4 * l4 / (h * v));
        const double logterm = 1.0 + std::log(da * da / (lam1 * v * v));
        max_brezis = std::max(max_brezis, linf / (v * logterm));
    }
    k.c_lady = 1.1 * max_lady;
    k.c_brezis = 1.1 * max_brezis;

    // Trace constant c: sweep mollified bases over K; c = max of
    // trace[A^1/2 Q A^1/2] h^2 / (sigma^2 L^2) = max per-channel V-norm sum.
    {
        auto sweep_grid = make_grid(grid->length(), 64);
        double cmax = 0.0;
        for (int K : {4, 8, 16, 32}) {
            auto b = build_basis(BasisKind::mollified, K, sweep_grid);
            cmax = std::max(cmax, b.gamma_v_sq_cons);
        }
        k.c_grad = 1.1 * cmax;
    }

    // R2 constants of the mollified nodal interpolant, pooled over K.
    {
        double c1 = 0.0, c2 = 0.0;
        for (int K : {4, 8, 16}) {
            if (grid->modes() % K != 0) continue;
            auto b = build_basis(BasisKind::mollified, K, grid);
            auto rep = verify_approximation(b, ObservationKind::nodal,
                                            ApproxMode::R2,
                                            std::max(50, trials / 40), seed + K);
            c1 = std::max(c1, rep.c1_fit);
            c2 = std::max(c2, rep.c2_fit);
        }
        k.c1_nodal = 1.1 * c1;
        k.c2_nodal = 1.1 * c2;
    }
    return k;
}

int round_K_to_grid(int K, int M) {
    for (int cand = K; cand <= M; ++cand)
        if (M % cand == 0) return cand;
    throw std::invalid_argument("no divisor of M=" + std::to_string(M) +
                                " is >= requested K=" + std::to_string(K));
}

namespace {

int choose_q(double epsilon) {
    if (!(epsilon > 0.0 && epsilon <= 1.0))
        throw std::invalid_argument("epsilon must lie in (0, 1]");
    // Unique integer with q^2 >= 1/epsilon > (q-1)^2.
    int q = static_cast<int>(std::ceil(std::sqrt(1.0 / epsilon) - 1e-12));
    if (q < 1) q = 1;
    while (static_cast<double>(q) * q < 1.0 / epsilon) ++q;
    while (q > 1 && static_cast<double>(q - 1) * (q - 1) >= 1.0 / epsilon) --q;
    return q;
}

// Smallest K with L/K <= hmax, i.e. the largest admissible h of the form L/K.
int smallest_admissible_K(double L, double hmax) {
    int K = static_cast<int>(std::ceil(L / hmax - 1e-12));
    if (K < 1) K = 1;
    while (L / K > hmax * (1.0 + 1e-12)) ++K;
    return K;
}

} // namespace

ParameterSelection select_parameters(BoundMode mode, double G, double nu,
                                     double L, const Constants& k,
                                     double epsilon) {
    if (!(G > 0.0 && nu > 0.0 && L > 0.0))
        throw std::invalid_argument("select_parameters: G, nu, L must be positive");
    const double lam1 = std::pow(2.0 * pi / L, 2);
    ParameterSelection sel;

    const bool r2_mode = mode == BoundMode::main2 || mode == BoundMode::cor1main2 ||
                         mode == BoundMode::nodcor1 ||
                         mode == BoundMode::nodes_oversampled;

    double c_interp;  // constant entering the h-admissibility 1/h^2 >= 2 c mu / nu
    if (r2_mode) {
        if (!(k.c_brezis > 0.0))
            throw std::invalid_argument("select_parameters: C_B not calibrated");
        sel.W = std::max(2.0 + std::log(2.0 * k.c_brezis * std::sqrt(k.c_bound_a)), 0.5);
        sel.J = 2.0 * k.c_brezis * sel.W * (1.0 + std::log(1.0 + G));
        sel.c5 = 4.0 * k.c_brezis * k.c_brezis * sel.W * sel.W;
        c_interp = k.c3();
        if (mode == BoundMode::main2) {
            sel.mu = 2.0 * nu * lam1 * G * sel.J;
        } else {
            sel.mu = sel.c5 * nu * lam1 * G * G * std::pow(1.0 + std::log(1.0 + G), 2);
        }
    } else {
        if (!(k.c_lady > 0.0))
            throw std::invalid_argument("select_parameters: C_L not calibrated");
        sel.mu = 4.0 * k.c_lady * k.c_lady * nu * lam1 * G * G;
        c_interp = k.c1_step;
    }

    const double hmax = std::sqrt(nu / (2.0 * c_interp * sel.mu));
    if (hmax >= L) {
        // Viscosity dominates: U is a steady state and no observational data
        // is needed; flag the degenerate selection.
        sel.degenerate = true;
        sel.K = sel.K_coarse = 1;
        sel.h = sel.h_coarse = L;
        sel.q = 1;
        return sel;
    }

    const int K2 = smallest_admissible_K(L, hmax);
    if (mode == BoundMode::cor2 || mode == BoundMode::nodes_oversampled) {
        sel.q = choose_q(epsilon);
        sel.K_coarse = K2;
        sel.h_coarse = L / K2;
        sel.K = K2 * sel.q;
        sel.h = L / sel.K;
    } else {
        sel.q = 1;
        sel.K = sel.K_coarse = K2;
        sel.h = sel.h_coarse = L / K2;
    }
    return sel;
}

double minlog_bound(double eta) {
    if (!(eta > 0.0)) throw std::invalid_argument("minlog_bound: eta must be > 0");
    return -eta * std::log(eta);
}

double window_average(const std::vector<double>& times,
                      const std::vector<double>& values, double T) {
    if (times.size() != values.size() || times.size() < 2)
        throw std::invalid_argument("window_average: malformed series");
    const double t_end = times.back();
    const double t_begin = t_end - T;
    if (t_begin < times.front() - 1e-12)
        throw std::invalid_argument("window_average: series shorter than the window T");
    double sum = 0.0, len = 0.0;
    for (size_t i = 1; i < times.size(); ++i) {
        if (times[i] <= t_begin) continue;
        const double dt = times[i] - times[i - 1];
        sum += values[i] * dt;
        len += dt;
    }
    return sum / len;
}

ErrorSeries run_ensemble(const ExperimentConfig& cfg, const SpectralField& U0) {
    cfg.assim.validate(cfg.solver.dt);
    if (cfg.members < 1) throw std::invalid_argument("run_ensemble: members must be >= 1");
    if (!(cfg.T_run > 0.0)) throw std::invalid_argument("run_ensemble: T_run must be > 0");

    const double dt = cfg.solver.dt;
    const auto steps = static_cast<std::uint64_t>(std::ceil(cfg.T_run / dt));
    const int members = cfg.members;

    // Coarse lifting basis (equal to the observation resolution unless
    // oversampling is active).
    const InterpolantBasis basis =
        build_basis(cfg.assim.basis_kind, cfg.assim.coarse_K(), cfg.solver.grid);

    // The assimilation window runs first-order IMEX for both trajectories
    // (Euler-Maruyama for the members), so sigma = 0 with u0 = U0 keeps
    // u == U bitwise; RK2 is reserved for spin-up.
    SolverConfig member_solver = cfg.solver;
    member_solver.scheme = Scheme::imex_euler;

    // Initial conditions: U0 plus an independent seeded perturbation.
    std::vector<SpectralField> u;
    u.reserve(members);
    const double u0_h = U0.norm(Space::H);
    for (int m = 0; m < members; ++m) {
        SpectralField pert =
            cfg.perturbation_rel > 0.0
                ? random_divfree_field(cfg.solver.grid, cfg.seed,
                                       rng::Purpose::perturbation,
                                       static_cast<std::uint32_t>(m + 1), 2.0,
                                       std::max(4, cfg.solver.grid->modes() / 8),
                                       cfg.perturbation_rel * u0_h)
                : SpectralField(cfg.solver.grid);
        SpectralField u0 = U0;
        u0 += pert;
        u.push_back(std::move(u0));
    }

    std::vector<ObservationVector> held_obs(members);
    const double dt_obs = cfg.assim.cadence * dt;

    // Per-member sample storage, reduced deterministically afterwards.
    const auto n_samples = steps / cfg.sample_every + 1;
    std::vector<std::vector<double>> h2(members), v2(members), da2(members);
    for (int m = 0; m < members; ++m) {
        h2[m].reserve(n_samples);
        v2[m].reserve(n_samples);
        da2[m].reserve(n_samples);
    }
    ErrorSeries series;
    series.members = members;

    unsigned n_threads = cfg.threads > 0
                             ? static_cast<unsigned>(cfg.threads)
                             : std::max(1u, std::thread::hardware_concurrency());
    n_threads = std::min<unsigned>(n_threads, static_cast<unsigned>(members));

    SpectralField U = U0;
    for (std::uint64_t s = 0; s < steps; ++s) {
        const bool obs_step = s % cfg.assim.cadence == 0;
        ObservationVector obs_clean;
        if (obs_step) obs_clean = observe_state(U, cfg.assim);

        SpectralField U_next = step_reference(U, member_solver);
        const bool sample = (s + 1) % cfg.sample_every == 0 || s + 1 == steps;

        std::exception_ptr failure;
        std::mutex failure_mutex;
        auto worker = [&](int m_begin, int m_end) {
            try {
                for (int m = m_begin; m < m_end; ++m) {
                    if (obs_step) {
                        // Fresh noisy observation of U: white noise enters as
                        // increment/dt over the observation window.
                        auto dbeta = sample_increments(
                            dt_obs, cfg.assim.noise, static_cast<std::uint32_t>(m + 1),
                            static_cast<std::uint32_t>(s / cfg.assim.cadence));
                        ObservationVector noise_fine;
                        noise_fine.K = cfg.assim.K;
                        noise_fine.kind = cfg.assim.obs_kind;
                        noise_fine.values = std::move(dbeta);
                        ObservationVector noise_avg =
                            cfg.assim.q > 1 ? oversample_average(noise_fine, cfg.assim.q)
                                            : std::move(noise_fine);
                        ObservationVector ov = obs_clean;
                        for (size_t i = 0; i < ov.values.size(); ++i)
                            ov.values[i] += noise_avg.values[i] / dt_obs;
                        held_obs[m] = std::move(ov);
                    }
                    try {
                        u[m] = step_nudged(u[m], held_obs[m], member_solver,
                                           cfg.assim, basis);
                    } catch (const std::exception& e) {
                        throw std::runtime_error(
                            "ensemble member " + std::to_string(m) + " failed at t=" +
                            std::to_string((s + 1) * dt) + ": " + e.what());
                    }
                    if (sample) {
                        SpectralField v = U_next;
                        v -= u[m];
                        h2[m].push_back(std::pow(v.norm(Space::H), 2));
                        v2[m].push_back(std::pow(v.norm(Space::V), 2));
                        da2[m].push_back(std::pow(v.norm(Space::DA), 2));
                    }
                }
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        };

        if (n_threads <= 1) {
            worker(0, members);
        } else {
            std::vector<std::thread> pool;
            const int chunk = (members + n_threads - 1) / n_threads;
            for (unsigned t = 0; t < n_threads; ++t) {
                const int b = static_cast<int>(t) * chunk;
                const int e = std::min(members, b + chunk);
                if (b < e) pool.emplace_back(worker, b, e);
            }
            for (auto& th : pool) th.join();
        }
        if (failure) std::rethrow_exception(failure);

        U = std::move(U_next);
        if (sample) series.times.push_back((s + 1) * dt);
    }

    // Ordered reduction by member index.
    const size_t n = series.times.size();
    auto reduce = [&](const std::vector<std::vector<double>>& per_member,
                      std::vector<double>& mean_out, std::vector<double>& se_out) {
        mean_out.resize(n);
        se_out.resize(n);
        for (size_t i = 0; i < n; ++i) {
            double mean = 0.0;
            for (int m = 0; m < members; ++m) mean += per_member[m][i];
            mean /= members;
            double var = 0.0;
            for (int m = 0; m < members; ++m)
                var += std::pow(per_member[m][i] - mean, 2);
            var = members > 1 ? var / (members - 1) : 0.0;
            mean_out[i] = mean;
            se_out[i] = members > 1 ? std::sqrt(var / members) : 0.0;
        }
    };
    reduce(h2, series.mean_h2, series.se_h2);
    reduce(v2, series.mean_v2, series.se_v2);
    reduce(da2, series.mean_da2, series.se_da2);
    return series;
}

TheoremReport evaluate_bound(const ErrorSeries& series,
                             const ExperimentConfig& cfg,
                             const WienerStats& stats, const Constants& k,
                             double G, const ParameterSelection& sel) {
    if (series.times.size() < 4)
        throw std::invalid_argument("evaluate_bound: series too short");
    const double T = cfg.T_avg;
    if (!(T > 0.0)) throw std::invalid_argument("evaluate_bound: T_avg must be > 0");
    if (series.times.back() - series.times.front() < T)
        throw std::invalid_argument("evaluate_bound: series window shorter than T_avg");

    TheoremReport rep;
    rep.mode = to_string(cfg.mode);
    rep.mu = cfg.assim.mu;
    rep.h = sel.h;
    rep.q = sel.q;
    rep.epsilon = cfg.epsilon;
    rep.G = G;
    rep.nu = cfg.solver.nu;
    rep.T_avg = T;
    rep.trace_q = stats.trace_q;
    rep.trace_ahalf_q = stats.trace_ahalf_q;
    rep.constants = k;
    rep.J = sel.J;
    rep.c5 = sel.c5;

    const double L = cfg.solver.grid->length();
    const double lam1 = cfg.solver.grid->lambda1();
    const double mu = cfg.assim.mu;
    const double nu = cfg.solver.nu;
    const double sig2 = cfg.assim.noise.sigma_sq;
    const bool r2_mode = cfg.mode == BoundMode::main2 ||
                         cfg.mode == BoundMode::cor1main2 ||
                         cfg.mode == BoundMode::nodcor1 ||
                         cfg.mode == BoundMode::nodes_oversampled;

    // Primary statistic: E|v|_H^2 for R1 modes, E||v||_V^2 for R2 modes.
    const auto& mean_p = r2_mode ? series.mean_v2 : series.mean_h2;
    const auto& se_p = r2_mode ? series.se_v2 : series.se_h2;
    // Averaged statistic: the V-norm window average for R1 modes, the D(A)
    // window average for R2 modes.
    const auto& mean_a = r2_mode ? series.mean_da2 : series.mean_v2;
    const auto& se_a = r2_mode ? series.se_da2 : series.se_v2;

    // limsup proxy: maximum of the ensemble mean over the final quarter.
    const double t_q = series.times.back() -
                       0.25 * (series.times.back() - series.times.front());
    size_t argmax = series.times.size() - 1;
    for (size_t i = 0; i < series.times.size(); ++i) {
        if (series.times[i] < t_q) continue;
        if (mean_p[i] >= mean_p[argmax] || series.times[argmax] < t_q) argmax = i;
    }
    rep.observed = mean_p[argmax];
    rep.se_at_observed = se_p[argmax];

    rep.observed_avg = nu * window_average(series.times, mean_a, T);
    rep.se_avg = nu * window_average(series.times, se_a, T);

    switch (cfg.mode) {
    case BoundMode::main1:
        rep.threshold = mu * stats.trace_q;
        rep.threshold_avg = (1.0 / T + mu) * mu * stats.trace_q;
        break;
    case BoundMode::cor1: {
        const double kappa1 = 16.0 * pi * pi * k.c_lady * k.c_lady;
        rep.extras["kappa1"] = kappa1;
        rep.threshold = kappa1 * nu * G * G * sig2;
        rep.threshold_avg =
            (1.0 / T + kappa1 * nu * G * G / (L * L)) * kappa1 * nu * G * G * sig2;
        rep.extras["kappa2"] = 32.0 * pi * pi * k.c1_step * k.c_lady * k.c_lady;
        break;
    }
    case BoundMode::cor2:
        rep.threshold = mu * sig2 * L * L * cfg.epsilon;
        rep.threshold_avg = (1.0 / T + mu) * mu * sig2 * L * L * cfg.epsilon;
        break;
    case BoundMode::main2: {
        const double expfac = std::exp(nu * lam1 * G * G * sel.J * sel.J / mu);
        rep.extras["exp_factor"] = expfac;
        rep.threshold = 4.0 * mu * expfac * stats.trace_ahalf_q;
        rep.threshold_avg =
            (8.0 * expfac *
                 (mu / T + 4.0 * sel.J * sel.J * (1.0 / T + nu * lam1) * nu * lam1 * G * G) +
             mu * mu) *
            2.0 * stats.trace_ahalf_q;
        break;
    }
    case BoundMode::cor1main2:
        rep.threshold = 4.0 * euler_e * mu * stats.trace_ahalf_q;
        rep.threshold_avg = (20.0 / T + 16.0 * nu * lam1 + mu / (2.0 * euler_e)) *
                            4.0 * euler_e * mu * stats.trace_ahalf_q;
        break;
    case BoundMode::nodcor1: {
        const double kappa3 =
            128.0 * pi * pi * euler_e * k.c_grad * k.c3() * sel.c5 * sel.c5;
        rep.extras["kappa3"] = kappa3;
        const double logG = 1.0 + std::log(1.0 + G);
        rep.threshold = kappa3 * nu * lam1 * std::pow(G, 4) * std::pow(logG, 4) * sig2;
        rep.threshold_avg =
            (20.0 / T + 16.0 * nu * lam1 +
             sel.c5 * nu * lam1 * G * G * logG * logG / (2.0 * euler_e)) *
            rep.threshold;
        break;
    }
    case BoundMode::nodes_oversampled: {
        const double base = 32.0 * euler_e * k.c_grad * k.c3() * mu * mu / nu *
                            sig2 * L * L * cfg.epsilon;
        rep.extras["kappa4"] =
            32.0 * pi * pi * k.c3() * k.c_brezis * k.c_brezis * sel.W * sel.W;
        rep.threshold = base;
        rep.threshold_avg =
            (20.0 / T + 16.0 * nu * lam1 + mu / (2.0 * euler_e)) * base;
        break;
    }
    }

    if (rep.threshold > 0.0) {
        rep.pass_primary = rep.observed + 2.0 * rep.se_at_observed <= rep.threshold;
        rep.pass_avg = rep.observed_avg + 2.0 * rep.se_avg <= rep.threshold_avg;
        rep.margin = rep.threshold / (rep.observed + 2.0 * rep.se_at_observed);
    } else {
        // Noise-free limit: the bound collapses to the solver floor.
        rep.pass_primary = rep.observed <= cfg.floor_tol;
        rep.pass_avg = rep.observed_avg <= cfg.floor_tol;
        rep.margin = 0.0;
    }
    rep.pass = rep.pass_primary && rep.pass_avg;
    return rep;
}

} // namespace nsda
