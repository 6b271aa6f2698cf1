/// @file test_mollifier.cpp
/// @brief Mollifier machinery: normalization, radial transform, pointwise
///        convolution values/gradients, and the two independent routes to the
///        profile (quadrature vs Fourier).

#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "nsda/mollifier.hpp"

using namespace nsda;
namespace {
constexpr double pi = std::numbers::pi;

double bump(double r2) { return r2 >= 1.0 ? 0.0 : std::exp(-1.0 / (1.0 - r2)); }
} // namespace

TEST_CASE("gauss rules integrate polynomials exactly") {
    const auto& g = moll::gauss_rule(12);
    double s0 = 0, s2 = 0, s10 = 0;
    for (int i = 0; i < 12; ++i) {
        s0 += g.weights[i];
        s2 += g.weights[i] * g.nodes[i] * g.nodes[i];
        s10 += g.weights[i] * std::pow(g.nodes[i], 10);
    }
    CHECK(s0 == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(s2 == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    CHECK(s10 == doctest::Approx(2.0 / 11.0).epsilon(1e-13));
}

TEST_CASE("mollifier normalization against a brute-force Riemann oracle") {
    // K0 * integral of bump over the unit disk must be 1; the oracle uses a
    // dense midpoint rule, independent of the Gauss machinery.
    const int n = 2000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double x = -1.0 + (i + 0.5) * 2.0 / n;
            const double y = -1.0 + (j + 0.5) * 2.0 / n;
            sum += bump(x * x + y * y);
        }
    }
    sum *= 4.0 / (static_cast<double>(n) * n);
    CHECK(moll::bump_norm_const() * sum == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("radial transform: value at zero, table consistency") {
    CHECK(moll::rho_hat(0.0) == doctest::Approx(1.0).epsilon(1e-12));
    // Midpoint-rule oracle for rho_hat at a few frequencies.
    for (double s : {0.7, 3.3, 11.0, 29.5}) {
        const int n = 4000;
        double sum = 0.0;
        for (int i = 0; i < n; ++i) {
            const double r = (i + 0.5) / n;
            sum += bump(r * r) * std::cos(0.0) * r * std::cyl_bessel_j(0.0, s * r);
        }
        const double oracle = 2.0 * pi * moll::bump_norm_const() * sum / n;
        // The midpoint oracle itself is only ~1e-5 accurate at high frequency.
        CHECK(std::abs(moll::rho_hat(s) - oracle) <= 1e-4 * std::abs(oracle) + 1e-8);
    }
}

TEST_CASE("psi~ values: plateau, support, half-edge symmetry") {
    moll::PsiTilde psi(1.0, 4);
    const double h = psi.h(), eps = psi.eps();
    CHECK(h == doctest::Approx(0.25));
    CHECK(eps == doctest::Approx(0.025));

    // Exact 1 on the plateau interior, exact 0 outside the fattened square;
    // points within rounding of the plateau boundary fall back to quadrature.
    CHECK(psi.value(0.5 * h, 0.5 * h) == 1.0);
    CHECK(psi.value(1.01 * eps, h - 1.01 * eps) == 1.0);
    CHECK(psi.value(eps, h - eps) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(psi.value(-1.5 * eps, 0.5 * h) == 0.0);
    CHECK(psi.value(0.5 * h, h + 1.5 * eps) == 0.0);

    // On an edge midpoint the convolution sees exactly half the mollifier.
    CHECK(psi.value(0.0, 0.5 * h) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(psi.value(h, 0.5 * h) == doctest::Approx(0.5).epsilon(1e-12));

    // Range [0, 1].
    for (int i = 0; i <= 60; ++i) {
        const double x = -2.0 * eps + i * (h + 4.0 * eps) / 60.0;
        for (int j = 0; j <= 60; ++j) {
            const double y = -2.0 * eps + j * (h + 4.0 * eps) / 60.0;
            const double v = psi.value(x, y);
            CHECK(v >= -1e-12);
            CHECK(v <= 1.0 + 1e-12);
        }
    }

    // Periodicity.
    CHECK(psi.value(0.3 * eps, 0.5 * h) ==
          doctest::Approx(psi.value(0.3 * eps + 1.0, 0.5 * h - 3.0)).epsilon(1e-13));
}

TEST_CASE("psi~ against a direct 2D convolution oracle") {
    moll::PsiTilde psi(1.0, 4);
    const double h = psi.h(), eps = psi.eps();
    // Oracle: midpoint quadrature of rho_eps(y) * chi_Q(x - y).
    auto oracle = [&](double x1, double x2) {
        const int n = 600;
        double sum = 0.0;
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                const double y1 = -eps + (i + 0.5) * 2.0 * eps / n;
                const double y2 = -eps + (j + 0.5) * 2.0 * eps / n;
                const double r2 = (y1 * y1 + y2 * y2) / (eps * eps);
                if (r2 >= 1.0) continue;
                const double px = x1 - y1, py = x2 - y2;
                if (px >= 0.0 && px < h && py >= 0.0 && py < h)
                    sum += bump(r2);
            }
        }
        return moll::bump_norm_const() * sum * 4.0 / (static_cast<double>(n) * n);
    };
    for (auto [x, y] : {std::pair{0.4 * eps, 0.5 * h}, {h - 0.2 * eps, 0.7 * eps},
                        {0.0, 0.0}, {0.9 * eps, h}}) {
        CHECK(psi.value(x, y) == doctest::Approx(oracle(x, y)).epsilon(2e-4));
    }
}

TEST_CASE("gradient matches finite differences of the value") {
    moll::PsiTilde psi(2.0, 8);
    const double h = psi.h(), eps = psi.eps();
    const double d = 1e-6 * h;
    for (auto [x, y] : {std::pair{0.2 * eps, 0.4 * h}, {h - 0.5 * eps, 0.5 * eps},
                        {0.8 * eps, 0.8 * eps}}) {
        const auto g = psi.gradient(x, y);
        const double fd1 = (psi.value(x + d, y) - psi.value(x - d, y)) / (2 * d);
        const double fd2 = (psi.value(x, y + d) - psi.value(x, y - d)) / (2 * d);
        CHECK(g[0] == doctest::Approx(fd1).epsilon(1e-5));
        CHECK(g[1] == doctest::Approx(fd2).epsilon(1e-5));
    }
    // Gradient vanishes identically on the plateau and outside the support.
    auto gp = psi.gradient(0.5 * h, 0.5 * h);
    CHECK(gp[0] == 0.0);
    CHECK(gp[1] == 0.0);
}

TEST_CASE("fourier coefficients: mean and quadrature cross-check") {
    moll::PsiTilde psi(1.0, 4);
    const double h = psi.h();
    // Mean = h^2/L^2 exactly (convolution preserves the integral).
    CHECK(psi.fourier(0, 0).real() == doctest::Approx(h * h).epsilon(1e-12));
    CHECK(psi.fourier(0, 0).imag() == 0.0);

    // Independent route: panel quadrature of psi~(x) e^{-i k x} over the
    // support, compared with psi_hat_raw * rho_hat.
    const auto& gr = moll::gauss_rule(40);
    const double eps = psi.eps();
    auto quad_coeff = [&](int j1, int j2) {
        const double breaks[] = {-eps, eps, h - eps, h + eps};
        std::vector<double> xs, ws;
        for (int p = 0; p < 3; ++p) {
            const double c = 0.5 * (breaks[p + 1] - breaks[p]);
            const double m = 0.5 * (breaks[p + 1] + breaks[p]);
            for (int i = 0; i < 40; ++i) {
                xs.push_back(m + c * gr.nodes[i]);
                ws.push_back(c * gr.weights[i]);
            }
        }
        std::complex<double> sum(0, 0);
        for (size_t i = 0; i < xs.size(); ++i)
            for (size_t j = 0; j < xs.size(); ++j)
                sum += ws[i] * ws[j] * psi.value(xs[i], xs[j]) *
                       std::polar(1.0, -2.0 * pi * (j1 * xs[i] + j2 * xs[j]));
        return sum;  // L = 1
    };
    for (auto [j1, j2] : {std::pair{1, 0}, {2, 3}, {5, 1}}) {
        const auto ours = psi.fourier(j1, j2);
        const auto oracle = quad_coeff(j1, j2);
        CHECK(std::abs(ours - oracle) <= 1e-9 * std::abs(ours) + 1e-14);
    }
}
