#include "nsda/dynamics.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <numbers>
#include <stdexcept>
#include <tuple>

namespace nsda {

namespace {

// Cached per-mode integrating factors e^{-nu |k|^2 dt} for the active grid.
const std::vector<double>& decay_factors(const WaveGrid& g, double nu_dt) {
    struct Key {
        int M;
        double L, nu_dt;
        bool operator<(const Key& o) const {
            return std::tie(M, L, nu_dt) < std::tie(o.M, o.L, o.nu_dt);
        }
    };
    thread_local std::map<Key, std::vector<double>> cache;
    auto& entry = cache[Key{g.modes(), g.length(), nu_dt}];
    if (entry.empty()) {
        const int M = g.modes();
        entry.resize(static_cast<size_t>(M) * M);
        for (int a1 = 0; a1 < M; ++a1)
            for (int a2 = 0; a2 < M; ++a2)
                entry[static_cast<size_t>(a1) * M + a2] =
                    std::exp(-nu_dt * g.ksq(a1, a2));
    }
    return entry;
}

void apply_decay(SpectralField& f, const std::vector<double>& e) {
    const size_t n = e.size();
    for (int comp = 0; comp < 2; ++comp) {
        Complex* c = f.component(comp);
        for (size_t i = 0; i < n; ++i) c[i] *= e[i];
    }
}

void check_finite(const SpectralField& f, const char* where) {
    if (!f.finite())
        throw std::runtime_error(std::string(where) + ": nonfinite state (blow-up)");
}

} // namespace

SolverConfig::SolverConfig(GridPtr g, double nu_, SpectralField f, double dt_,
                           double t_spinup_, Scheme s)
    : grid(std::move(g)), nu(nu_), forcing(std::move(f)), dt(dt_),
      t_spinup(t_spinup_), scheme(s) {
    if (!(nu > 0.0)) throw std::invalid_argument("SolverConfig: nu must be > 0");
    if (!(dt > 0.0)) throw std::invalid_argument("SolverConfig: dt must be > 0");
    if (forcing.grid() != *grid)
        throw std::invalid_argument("SolverConfig: forcing grid mismatch");
    if (forcing.mean_magnitude() != 0.0)
        throw std::invalid_argument("SolverConfig: forcing must have zero mean");
    if (forcing.max_divergence() > 1e-12)
        throw std::invalid_argument("SolverConfig: forcing must be divergence-free");
}

double grashof(const SolverConfig& cfg) {
    return cfg.forcing.norm(Space::H) / (cfg.nu * cfg.nu * cfg.grid->lambda1());
}

void AssimilationConfig::validate(double dt) const {
    if (!(mu >= 0.0)) throw std::invalid_argument("AssimilationConfig: mu must be >= 0");
    if (mu * dt > 0.5)
        throw std::invalid_argument(
            "AssimilationConfig: explicit nudging requires mu*dt <= 1/2 (got " +
            std::to_string(mu * dt) + "); reduce dt or mu");
    if (q < 1 || K % q != 0)
        throw std::invalid_argument("AssimilationConfig: q must divide K");
    if (cadence < 1) throw std::invalid_argument("AssimilationConfig: cadence must be >= 1");
    if (noise.channels != 2 * K * K)
        throw std::invalid_argument("AssimilationConfig: noise channels must equal 2*K^2");
}

ObservationVector observe_state(const SpectralField& u,
                                const AssimilationConfig& acfg) {
    ObservationVector fine =
        acfg.obs_kind == ObservationKind::volume
            ? observe_volumes(u, acfg.K)
            : observe_nodes_regular(u, acfg.K, acfg.node_off1, acfg.node_off2);
    return acfg.q > 1 ? oversample_average(fine, acfg.q) : fine;
}

namespace {

// Explicit tendency of the reference equation: f - B(U,U).
SpectralField reference_tendency(const SpectralField& U, const SolverConfig& cfg) {
    SpectralField n = bilinear(U, U);
    n *= -1.0;
    n += cfg.forcing;
    return n;
}

} // namespace

SpectralField step_reference(const SpectralField& U, const SolverConfig& cfg) {
    const auto& e = decay_factors(*cfg.grid, cfg.nu * cfg.dt);
    SpectralField out(cfg.grid);
    if (cfg.scheme == Scheme::imex_euler) {
        SpectralField n = reference_tendency(U, cfg);
        out = U;
        out.axpy(cfg.dt, n);
        apply_decay(out, e);
    } else {
        // Integrating-factor Heun: second order for the deterministic flow.
        SpectralField k1 = reference_tendency(U, cfg);
        SpectralField mid = U;
        mid.axpy(cfg.dt, k1);
        apply_decay(mid, e);
        SpectralField k2 = reference_tendency(mid, cfg);
        out = U;
        out.axpy(0.5 * cfg.dt, k1);
        apply_decay(out, e);
        out.axpy(0.5 * cfg.dt, k2);
    }
    check_finite(out, "step_reference");
    return out;
}

SpectralField step_nudged(const SpectralField& u, const ObservationVector& obs,
                          const SolverConfig& cfg, const AssimilationConfig& acfg,
                          const InterpolantBasis& lift_basis) {
    // Observation mismatch of the current state against the supplied data,
    // lifted and projected: Pi L_h(O_h(u) - obs).  The noise rides the data.
    ObservationVector zu = observe_state(u, acfg);
    if (zu.values.size() != obs.values.size())
        throw std::invalid_argument("step_nudged: observation dimension mismatch");
    for (size_t i = 0; i < zu.values.size(); ++i) zu.values[i] -= obs.values[i];
    SpectralField feedback = interpolate(zu, lift_basis);

    SpectralField n = reference_tendency(u, cfg);
    n.axpy(-acfg.mu, feedback);

    SpectralField out = u;
    out.axpy(cfg.dt, n);
    apply_decay(out, decay_factors(*cfg.grid, cfg.nu * cfg.dt));
    check_finite(out, "step_nudged");
    return out;
}

SpinupResult spin_up(const SolverConfig& cfg, std::uint64_t seed) {
    if (!(cfg.t_spinup > 0.0))
        throw std::invalid_argument("spin_up: t_spinup must be > 0");
    const double G = grashof(cfg);
    // Seeded low-mode start at the attractor's energy scale.
    const double u0_scale = std::sqrt(2.0) * cfg.nu * G;
    SpectralField U =
        u0_scale > 0.0
            ? random_divfree_field(cfg.grid, seed, rng::Purpose::perturbation,
                                   0xA77Au, 2.0, 4, u0_scale)
            : SpectralField(cfg.grid);

    const auto steps = static_cast<std::uint64_t>(std::ceil(cfg.t_spinup / cfg.dt));
    const std::uint64_t tail_start = steps - steps / 4;
    SpinupDiagnostics diag;
    const double lam1 = cfg.grid->lambda1();
    double sum_v2 = 0.0, sum_da2 = 0.0;
    std::uint64_t tail_samples = 0;

    for (std::uint64_t s = 0; s < steps; ++s) {
        try {
            U = step_reference(U, cfg);
        } catch (const std::runtime_error&) {
            throw std::runtime_error("spin_up: blow-up at t=" +
                                     std::to_string((s + 1) * cfg.dt));
        }
        if (s + 1 >= tail_start) {
            const double h2 = std::pow(U.norm(Space::H), 2);
            const double v2 = std::pow(U.norm(Space::V), 2);
            const double da2 = std::pow(U.norm(Space::DA), 2);
            diag.max_h2 = std::max(diag.max_h2, h2);
            diag.max_v2 = std::max(diag.max_v2, v2);
            diag.max_da2 = std::max(diag.max_da2, da2);
            sum_v2 += v2;
            sum_da2 += da2;
            ++tail_samples;
            const double umax = U.norm(Space::Linf);
            diag.cfl_max = std::max(
                diag.cfl_max, cfg.dt * umax * 2.0 * std::numbers::pi *
                                  cfg.grid->modes() / cfg.grid->length());
        }
    }
    if (tail_samples > 0) {
        diag.avg_v2 = sum_v2 / tail_samples;
        diag.avg_da2 = sum_da2 / tail_samples;
        diag.tail_time = tail_samples * cfg.dt;
    }
    diag.c_bound_a =
        diag.max_da2 / (cfg.nu * cfg.nu * lam1 * lam1 * std::pow(1.0 + G, 4));
    return SpinupResult{std::move(U), diag};
}

namespace {
constexpr char kCheckpointMagic[8] = {'N', 'S', 'D', 'A', 'C', 'K', 'P', '1'};
}

void save_checkpoint(const std::string& path, const Checkpoint& c) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open checkpoint for writing: " + path);
    f.write(kCheckpointMagic, sizeof kCheckpointMagic);
    const WaveGrid& g = c.field.grid();
    const double L = g.length();
    const std::int32_t M = g.modes();
    const std::int32_t dn = g.dealias_num(), dd = g.dealias_den();
    f.write(reinterpret_cast<const char*>(&L), sizeof L);
    f.write(reinterpret_cast<const char*>(&M), sizeof M);
    f.write(reinterpret_cast<const char*>(&dn), sizeof dn);
    f.write(reinterpret_cast<const char*>(&dd), sizeof dd);
    f.write(reinterpret_cast<const char*>(&c.t), sizeof c.t);
    f.write(reinterpret_cast<const char*>(&c.step), sizeof c.step);
    f.write(reinterpret_cast<const char*>(&c.rng_seed), sizeof c.rng_seed);
    const auto& coeffs = c.field.coeffs();
    f.write(reinterpret_cast<const char*>(coeffs.data()),
            static_cast<std::streamsize>(coeffs.size() * sizeof(Complex)));
    if (!f) throw std::runtime_error("checkpoint write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open checkpoint: " + path);
    char magic[8];
    f.read(magic, sizeof magic);
    if (!f || std::memcmp(magic, kCheckpointMagic, sizeof magic) != 0)
        throw std::runtime_error("not a checkpoint file: " + path);
    double L, t;
    std::int32_t M, dn, dd;
    std::uint64_t step, seed;
    f.read(reinterpret_cast<char*>(&L), sizeof L);
    f.read(reinterpret_cast<char*>(&M), sizeof M);
    f.read(reinterpret_cast<char*>(&dn), sizeof dn);
    f.read(reinterpret_cast<char*>(&dd), sizeof dd);
    f.read(reinterpret_cast<char*>(&t), sizeof t);
    f.read(reinterpret_cast<char*>(&step), sizeof step);
    f.read(reinterpret_cast<char*>(&seed), sizeof seed);
    auto grid = make_grid(L, M, dn, dd);
    Checkpoint c{t, step, seed, SpectralField(grid)};
    f.read(reinterpret_cast<char*>(c.field.coeffs().data()),
           static_cast<std::streamsize>(c.field.coeffs().size() * sizeof(Complex)));
    if (!f) throw std::runtime_error("checkpoint truncated: " + path);
    return c;
}

} // namespace nsda
