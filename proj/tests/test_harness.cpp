/// @file test_harness.cpp
/// @brief Parameter selection arithmetic, the min-log lemma bound, constant
///        calibration, ensemble execution and bound evaluation.

#include <doctest.h>

#include <cmath>
#include <numbers>

#include "nsda/harness.hpp"

using namespace nsda;
namespace {
constexpr double pi = std::numbers::pi;

// Golden-section minimizer of r - eta(1+log r) over r >= 1.
double minimize_phi(double eta) {
    auto f = [eta](double r) { return r - eta * (1.0 + std::log(r)); };
    double lo = 1.0, hi = std::max(2.0, 2.0 * eta);
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = hi - gr * (hi - lo), b = lo + gr * (hi - lo);
    for (int it = 0; it < 300; ++it) {
        if (f(a) < f(b)) {
            hi = b;
            b = a;
            a = hi - gr * (hi - lo);
        } else {
            lo = a;
            a = b;
            b = lo + gr * (hi - lo);
        }
        if (hi - lo < 1e-12) break;
    }
    return f(0.5 * (lo + hi));
}
} // namespace

TEST_CASE("minlog bound") {
    CHECK(minlog_bound(1.0) == 0.0);
    CHECK(minimize_phi(1.0) == doctest::Approx(0.0).epsilon(1e-10));

    // eta = e: the bound -e is attained at r = e.
    CHECK(minlog_bound(std::numbers::e) == doctest::Approx(-std::numbers::e).epsilon(1e-12));
    CHECK(minimize_phi(std::numbers::e) ==
          doctest::Approx(-std::numbers::e).epsilon(1e-8));

    // eta = 1/2: bound is +0.34657..., the actual min is phi(1) = 1/2.
    CHECK(minlog_bound(0.5) == doctest::Approx(0.5 * std::log(2.0)).epsilon(1e-12));
    CHECK(minimize_phi(0.5) == doctest::Approx(0.5).epsilon(1e-10));

    CHECK_THROWS_AS(minlog_bound(0.0), std::invalid_argument);
    CHECK_THROWS_AS(minlog_bound(-1.0), std::invalid_argument);

    for (int i = 0; i < 1000; ++i) {
        const double eta = 10.0 * rng::uniform({1, rng::Purpose::test, 4, 0,
                                                static_cast<std::uint32_t>(i)});
        CHECK(minimize_phi(eta) >= minlog_bound(eta) - 1e-9);
        if (eta >= 1.0)
            CHECK(minimize_phi(eta) == doctest::Approx(minlog_bound(eta)).epsilon(1e-6));
    }
}

TEST_CASE("parameter selection: cor1 worked example") {
    Constants k;
    k.c_lady = 1.0;
    k.c1_step = 1.0 / 6.0;
    auto sel = select_parameters(BoundMode::cor1, 4.0, 1.0, 2.0 * pi, k);
    CHECK(sel.mu == doctest::Approx(64.0).epsilon(1e-12));
    CHECK(sel.h <= std::sqrt(3.0 / 128.0) + 1e-12);
    CHECK(sel.K == 42);
    CHECK(!sel.degenerate);
}

TEST_CASE("parameter selection: oversampling q rule and degenerate case") {
    Constants k;
    k.c_lady = 1.0;
    // epsilon = 0.1 -> q = 4 (16 >= 10 > 9); 0.25 -> 2; 1 -> 1.
    auto s1 = select_parameters(BoundMode::cor2, 4.0, 1.0, 2.0 * pi, k, 0.1);
    CHECK(s1.q == 4);
    CHECK(s1.K == 4 * s1.K_coarse);
    auto s2 = select_parameters(BoundMode::cor2, 4.0, 1.0, 2.0 * pi, k, 0.25);
    CHECK(s2.q == 2);
    auto s3 = select_parameters(BoundMode::cor2, 4.0, 1.0, 2.0 * pi, k, 1.0);
    CHECK(s3.q == 1);
    CHECK_THROWS_AS(select_parameters(BoundMode::cor2, 4.0, 1.0, 2.0 * pi, k, 0.0),
                    std::invalid_argument);

    // Strong viscosity: no observational data needed.
    auto sd = select_parameters(BoundMode::cor1, 0.01, 1.0, 2.0 * pi, k);
    CHECK(sd.degenerate);
    CHECK(sd.K == 1);
    CHECK(sd.h == 2.0 * pi);
}

TEST_CASE("parameter selection: R2 modes") {
    Constants k;
    k.c_brezis = 0.4;
    k.c_bound_a = 0.25;
    k.c1_nodal = 0.3;
    k.c2_nodal = 0.5;
    const double G = 2.0, nu = 0.05, L = 2.0 * pi;
    const double lam1 = std::pow(2.0 * pi / L, 2);

    auto sm = select_parameters(BoundMode::main2, G, nu, L, k);
    const double W = std::max(2.0 + std::log(2.0 * 0.4 * 0.5), 0.5);
    const double J = 2.0 * 0.4 * W * (1.0 + std::log(3.0));
    CHECK(sm.J == doctest::Approx(J).epsilon(1e-12));
    CHECK(sm.mu == doctest::Approx(2.0 * nu * lam1 * G * J).epsilon(1e-12));

    auto sc = select_parameters(BoundMode::cor1main2, G, nu, L, k);
    const double c5 = 4.0 * 0.16 * W * W;
    CHECK(sc.c5 == doctest::Approx(c5).epsilon(1e-12));
    CHECK(sc.mu ==
          doctest::Approx(c5 * nu * lam1 * G * G * std::pow(1.0 + std::log(3.0), 2))
              .epsilon(1e-12));
    const double c3 = std::max(0.3, std::sqrt(0.5));
    CHECK(sc.h <= std::sqrt(nu / (2.0 * c3 * sc.mu)) + 1e-12);
    CHECK(sc.h_coarse == sc.h);

    auto sn = select_parameters(BoundMode::nodes_oversampled, G, nu, L, k, 0.25);
    CHECK(sn.q == 2);
    CHECK(sn.K == 2 * sn.K_coarse);
}

TEST_CASE("K rounding to the grid") {
    CHECK(round_K_to_grid(42, 128) == 64);
    CHECK(round_K_to_grid(4, 128) == 4);
    CHECK(round_K_to_grid(5, 128) == 8);
    CHECK(round_K_to_grid(128, 128) == 128);
    CHECK_THROWS_AS(round_K_to_grid(129, 128), std::invalid_argument);
}

TEST_CASE("window average") {
    std::vector<double> t, v;
    for (int i = 0; i <= 100; ++i) {
        t.push_back(0.1 * i);
        v.push_back(2.0 * 0.1 * i);  // v = 2t
    }
    // Average of 2t over [8, 10] is 18.
    CHECK(window_average(t, v, 2.0) == doctest::Approx(18.0).epsilon(0.02));
    CHECK_THROWS_AS(window_average(t, v, 11.0), std::invalid_argument);
}

TEST_CASE("calibration produces plausible stable constants") {
    auto g64 = make_grid(2.0 * pi, 64);
    auto k64 = calibrate_constants(g64, 400, 11);
    CHECK(k64.c_lady > 0.15);
    CHECK(k64.c_lady < 0.8);
    CHECK(k64.c_brezis > 0.05);
    CHECK(k64.c_brezis < 2.0);
    CHECK(k64.c_grad > 0.0);
    CHECK(k64.c1_nodal > 0.0);
    CHECK(k64.c2_nodal >= 0.0);
    CHECK(k64.c3() >= k64.c1_nodal);

    auto g128 = make_grid(2.0 * pi, 128);
    auto k128 = calibrate_constants(g128, 400, 11);
    CHECK(k128.c_lady == doctest::Approx(k64.c_lady).epsilon(0.10));
    CHECK_THROWS_AS(calibrate_constants(g64, 10, 1), std::invalid_argument);
}

TEST_CASE("ensemble: reproducibility across schedules and basic statistics") {
    auto g = make_grid(2.0 * pi, 32);
    const double nu = 0.05, dt = 0.01;
    SpectralField f = make_shell_forcing(g, 3, 4.0 * nu * nu * g->lambda1());
    SolverConfig solver(g, nu, f, dt, 1.0, Scheme::imex_euler);

    AssimilationConfig assim;
    assim.mu = 3.0;
    assim.K = 8;
    assim.basis_kind = BasisKind::step;
    assim.obs_kind = ObservationKind::volume;
    assim.noise = NoiseModel{1e-6, 2 * 8 * 8, 77};

    SpectralField U0 = random_divfree_field(g, 5, rng::Purpose::test, 0, 2.0, 5,
                                            std::sqrt(2.0) * nu * 4.0);

    ExperimentConfig cfg{solver, assim, 4,    2.0, 0.5, BoundMode::main1,
                         0.25,   1.0,   1234, 1,   1};
    ErrorSeries s1 = run_ensemble(cfg, U0);
    cfg.threads = 2;
    ErrorSeries s2 = run_ensemble(cfg, U0);
    CHECK(s1.mean_h2 == s2.mean_h2);  // bitwise identical reduction
    CHECK(s1.se_v2 == s2.se_v2);
    CHECK(s1.times.size() == 200);

    // sigma = 0 with u0 = U0: the series is numerically zero.
    ExperimentConfig czero = cfg;
    czero.assim.noise.sigma_sq = 0.0;
    czero.perturbation_rel = 0.0;
    czero.members = 1;
    ErrorSeries sz = run_ensemble(czero, U0);
    for (double v : sz.mean_h2) CHECK(v <= 1e-24);

    // Doubling the ensemble moves the mean by a few standard errors at most.
    ExperimentConfig c8 = cfg;
    c8.members = 8;
    ErrorSeries s8 = run_ensemble(c8, U0);
    const size_t i = s1.times.size() - 1;
    const double se = std::max(s1.se_h2[i], 1e-30);
    CHECK(std::abs(s8.mean_h2[i] - s1.mean_h2[i]) <= 5.0 * se);
}

TEST_CASE("bound evaluation logic on synthetic series") {
    auto g = make_grid(2.0 * pi, 32);
    const double nu = 0.05, dt = 0.01;
    SpectralField f = make_shell_forcing(g, 3, 4.0 * nu * nu * g->lambda1());
    SolverConfig solver(g, nu, f, dt, 1.0, Scheme::imex_euler);
    AssimilationConfig assim;
    assim.mu = 2.0;
    assim.K = 8;
    assim.noise = NoiseModel{1e-4, 2 * 8 * 8, 7};

    ExperimentConfig cfg{solver, assim, 4,    10.0, 2.0, BoundMode::main1,
                         0.25,   1.0,   1234, 1,    1};

    ErrorSeries s;
    s.members = 4;
    for (int i = 0; i <= 1000; ++i) {
        s.times.push_back(0.01 * i);
        s.mean_h2.push_back(1e-6);
        s.se_h2.push_back(1e-8);
        s.mean_v2.push_back(1e-5);
        s.se_v2.push_back(1e-7);
        s.mean_da2.push_back(1e-4);
        s.se_da2.push_back(1e-6);
    }
    auto basis = build_basis(BasisKind::step, 8, g);
    auto stats = covariance_traces(basis, assim.noise.sigma_sq);
    Constants k;
    k.c_lady = 0.4;

    ParameterSelection sel;
    sel.mu = assim.mu;
    sel.h = g->length() / 8;
    auto rep = evaluate_bound(s, cfg, stats, k, 4.0, sel);
    CHECK(rep.mode == "main1");
    CHECK(rep.threshold == doctest::Approx(assim.mu * stats.trace_q));
    CHECK(rep.pass_primary == (1e-6 + 2e-8 <= rep.threshold));
    CHECK(rep.observed == doctest::Approx(1e-6));
    // The vavg threshold: (1/T + mu) mu trace[Q].
    CHECK(rep.threshold_avg ==
          doctest::Approx((1.0 / 2.0 + assim.mu) * assim.mu * stats.trace_q));
    CHECK(rep.observed_avg == doctest::Approx(nu * 1e-5).epsilon(1e-6));

    // cor2 threshold scales linearly in epsilon; cor1 threshold is h-free.
    ExperimentConfig c2 = cfg;
    c2.mode = BoundMode::cor2;
    c2.epsilon = 0.25;
    auto r2 = evaluate_bound(s, c2, stats, k, 4.0, sel);
    c2.epsilon = 0.0625;
    auto r3 = evaluate_bound(s, c2, stats, k, 4.0, sel);
    CHECK(r2.threshold == doctest::Approx(4.0 * r3.threshold).epsilon(1e-12));

    ExperimentConfig c1 = cfg;
    c1.mode = BoundMode::cor1;
    auto rc1a = evaluate_bound(s, c1, stats, k, 4.0, sel);
    ParameterSelection sel2 = sel;
    sel2.h = g->length() / 16;  // finer observations, same bound
    auto rc1b = evaluate_bound(s, c1, stats, k, 4.0, sel2);
    CHECK(rc1a.threshold == rc1b.threshold);

    // Window shorter than T_avg errors out.
    ExperimentConfig cshort = cfg;
    cshort.T_avg = 100.0;
    CHECK_THROWS_AS(evaluate_bound(s, cshort, stats, k, 4.0, sel),
                    std::invalid_argument);
}
