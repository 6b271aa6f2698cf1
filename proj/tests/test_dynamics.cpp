/// @file test_dynamics.cpp
/// @brief Time integration: decay, forced steady state, energy balance,
///        synchronization invariants, convergence order, checkpoints.

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <numbers>

#include "nsda/dynamics.hpp"

using namespace nsda;
namespace {
constexpr double pi = std::numbers::pi;

SpectralField sine_mode_field(GridPtr g, int j1, int j2, double scale) {
    // Divergence-free single real mode: amplitude along k-perp.
    SpectralField f(g);
    const int M = g->modes();
    const double k1 = g->k_of((j1 % M + M) % M), k2 = g->k_of((j2 % M + M) % M);
    const double kn = std::hypot(k1, k2);
    const Complex c(0.0, -0.5 * scale);
    const int a1 = (j1 % M + M) % M, a2 = (j2 % M + M) % M;
    const int b1 = (M - a1) % M, b2 = (M - a2) % M;
    f.at(0, a1, a2) = c * (-k2 / kn);
    f.at(1, a1, a2) = c * (k1 / kn);
    f.at(0, b1, b2) = std::conj(f.at(0, a1, a2));
    f.at(1, b1, b2) = std::conj(f.at(1, a1, a2));
    return f;
}
} // namespace

TEST_CASE("grashof number") {
    auto g = make_grid(2.0 * pi, 32);
    SolverConfig cfg(g, 1.0, make_shell_forcing(g, 1, 5.0), 0.01, 1.0);
    CHECK(grashof(cfg) == doctest::Approx(5.0).epsilon(1e-12));
    SolverConfig cfg2(g, 2.0, make_shell_forcing(g, 1, 5.0), 0.01, 1.0);
    CHECK(grashof(cfg2) == doctest::Approx(5.0 / 4.0).epsilon(1e-12));
    SolverConfig cfg0(g, 1.0, SpectralField(g), 0.01, 1.0);
    CHECK(grashof(cfg0) == 0.0);
}

TEST_CASE("unforced flow dissipates energy") {
    auto g = make_grid(2.0 * pi, 64);
    SolverConfig cfg(g, 0.05, SpectralField(g), 0.005, 1.0, Scheme::imex_euler);
    SpectralField U = random_divfree_field(g, 5, rng::Purpose::test, 0, 1.5, 10, 0.5);
    double prev = U.norm(Space::H);
    for (int s = 0; s < 200; ++s) {
        U = step_reference(U, cfg);
        const double cur = U.norm(Space::H);
        CHECK(cur < prev);
        prev = cur;
    }
}

TEST_CASE("forced eigenmode is a steady state") {
    auto g = make_grid(2.0 * pi, 64);
    const double nu = 1e-3, dt = 0.01;
    SpectralField phi = sine_mode_field(g, 1, 0, 1.0);
    const double lam = g->ksq(1, 0);
    SpectralField f = phi;
    f *= nu * lam;
    SolverConfig cfg(g, nu, f, dt, 1.0, Scheme::imex_rk2);
    SpectralField U = phi;
    for (int s = 0; s < 500; ++s) U = step_reference(U, cfg);
    SpectralField diff = U;
    diff -= phi;
    CHECK(diff.norm(Space::H) <= 1e-10 * phi.norm(Space::H));
}

TEST_CASE("discrete energy balance residual is O(dt)") {
    auto g = make_grid(2.0 * pi, 64);
    const double nu = 0.02;
    SpectralField f = make_shell_forcing(g, 3, 0.1);
    SpectralField U0 = random_divfree_field(g, 9, rng::Purpose::test, 1, 1.5, 8, 0.3);

    auto residual = [&](double dt) {
        SolverConfig cfg(g, nu, f, dt, 1.0, Scheme::imex_euler);
        SpectralField U1 = step_reference(U0, cfg);
        const double e0 = std::pow(U0.norm(Space::H), 2);
        const double e1 = std::pow(U1.norm(Space::H), 2);
        return std::abs((e1 - e0) / dt + 2.0 * nu * std::pow(U0.norm(Space::V), 2) -
                        2.0 * inner_h(f, U0));
    };
    const double r1 = residual(0.02);
    const double r2 = residual(0.01);
    CHECK(r1 / r2 == doctest::Approx(2.0).epsilon(0.5));
}

TEST_CASE("synchronized noise-free member stays bitwise on the reference") {
    auto g = make_grid(2.0 * pi, 64);
    const double nu = 0.02;
    SpectralField f = make_shell_forcing(g, 3, nu * nu * 8.0);
    SolverConfig cfg(g, nu, f, 0.01, 1.0, Scheme::imex_euler);
    AssimilationConfig acfg;
    acfg.mu = 2.0;
    acfg.K = 8;
    acfg.basis_kind = BasisKind::step;
    acfg.obs_kind = ObservationKind::volume;
    acfg.noise = NoiseModel{0.0, 2 * 8 * 8, 1};
    acfg.validate(cfg.dt);
    auto basis = build_basis(BasisKind::step, 8, g);

    SpectralField U = random_divfree_field(g, 17, rng::Purpose::test, 2, 2.0, 6, 0.1);
    SpectralField u = U;
    for (int s = 0; s < 100; ++s) {
        auto obs = observe_state(U, acfg);
        SpectralField U1 = step_reference(U, cfg);
        u = step_nudged(u, obs, cfg, acfg, basis);
        U = U1;
        SpectralField v = U;
        v -= u;
        REQUIRE(v.norm(Space::H) <= 1e-12 * U.norm(Space::H));
    }
    // Bitwise identity, not just closeness.
    CHECK(u.coeffs() == U.coeffs());
}

TEST_CASE("mu*dt stability validation") {
    AssimilationConfig acfg;
    acfg.mu = 30.0;
    acfg.K = 4;
    acfg.noise = NoiseModel{0.0, 32, 1};
    CHECK_THROWS_AS(acfg.validate(0.05), std::invalid_argument);  // mu dt = 1.5
    acfg.mu = 5.0;
    CHECK_NOTHROW(acfg.validate(0.05));
}

TEST_CASE("without nudging, trajectories do not synchronize") {
    auto g = make_grid(2.0 * pi, 64);
    const double nu = 0.02;
    SpectralField f = make_shell_forcing(g, 3, nu * nu * 20.0);
    SolverConfig cfg(g, nu, f, 0.01, 1.0, Scheme::imex_euler);
    SpectralField U = random_divfree_field(g, 23, rng::Purpose::test, 0, 2.0, 6, 0.1);
    SpectralField u = U;
    SpectralField pert = random_divfree_field(g, 24, rng::Purpose::test, 1, 2.0, 6,
                                              0.5 * U.norm(Space::H));
    u += pert;
    const double v0 = [&] {
        SpectralField v = U;
        v -= u;
        return v.norm(Space::H);
    }();
    for (int s = 0; s < 500; ++s) {
        U = step_reference(U, cfg);
        u = step_reference(u, cfg);
    }
    SpectralField v = U;
    v -= u;
    CHECK(v.norm(Space::H) > 0.3 * v0);
}

TEST_CASE("first-order convergence of the IMEX step") {
    auto g = make_grid(2.0 * pi, 32);
    const double nu = 0.05;
    SpectralField f = make_shell_forcing(g, 11, 0.2);
    SpectralField U0 = random_divfree_field(g, 31, rng::Purpose::test, 0, 1.5, 6, 0.4);
    const double T = 0.5;
    auto endpoint = [&](double dt) {
        SolverConfig cfg(g, nu, f, dt, 1.0, Scheme::imex_euler);
        SpectralField U = U0;
        const int n = static_cast<int>(std::round(T / dt));
        for (int s = 0; s < n; ++s) U = step_reference(U, cfg);
        return U;
    };
    SpectralField a = endpoint(0.01);
    SpectralField b = endpoint(0.005);
    SpectralField c = endpoint(0.0025);
    SpectralField d1 = a;
    d1 -= b;
    SpectralField d2 = b;
    d2 -= c;
    const double ratio = d1.norm(Space::H) / d2.norm(Space::H);
    CHECK(ratio > 2.0 / 3.0);
    CHECK(ratio < 6.0);
}

TEST_CASE("blow-up reports the failure time") {
    auto g = make_grid(2.0 * pi, 32);
    SpectralField f = make_shell_forcing(g, 1, 1e30);
    SolverConfig cfg(g, 1e-9, f, 1e6, 10.0, Scheme::imex_euler);
    SpectralField U = random_divfree_field(g, 1, rng::Purpose::test, 0, 1.5, 4, 1e12);
    CHECK_THROWS_WITH_AS(
        [&] {
            for (int s = 0; s < 400; ++s) U = step_reference(U, cfg);
        }(),
        doctest::Contains("blow-up"), std::runtime_error);
}

TEST_CASE("spin-up reaches the a-priori regime at small scale") {
    auto g = make_grid(2.0 * pi, 64);
    const double nu = 0.1, G = 4.0;
    SpectralField f = make_shell_forcing(g, 7, G * nu * nu * g->lambda1());
    SolverConfig cfg(g, nu, f, 0.02, 20.0 / (nu * g->lambda1()), Scheme::imex_rk2);
    auto res = spin_up(cfg, 2);
    CHECK(res.diag.max_h2 <= 2.0 * nu * nu * G * G);
    CHECK(res.diag.max_v2 <= 2.0 * nu * nu * g->lambda1() * G * G);
    CHECK(res.diag.c_bound_a > 0.0);
    CHECK(res.U.finite());
    CHECK(res.U.max_divergence() < 1e-12);
}

TEST_CASE("checkpoints round-trip exactly") {
    auto g = make_grid(1.5, 32);
    SpectralField u = random_divfree_field(g, 77, rng::Purpose::test, 0, 1.5, 8, 2.5);
    Checkpoint c{12.375, 9000, 0xfeedfacecafef00dull, u};
    const std::string path = "ckpt_test.bin";
    save_checkpoint(path, c);
    Checkpoint r = load_checkpoint(path);
    CHECK(r.t == c.t);
    CHECK(r.step == c.step);
    CHECK(r.rng_seed == c.rng_seed);
    CHECK(r.field.grid() == c.field.grid());
    CHECK(r.field.coeffs() == c.field.coeffs());
    std::remove(path.c_str());
    CHECK_THROWS(load_checkpoint("does_not_exist.bin"));
}
