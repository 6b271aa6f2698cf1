/// @file mollifier.hpp
/// @brief The radial bump mollifier and the mollified square profile used to
///        build smooth interpolant bases: pointwise values and gradients by
///        quadrature, Fourier coefficients by the radial transform.

#ifndef NSDA_MOLLIFIER_HPP
#define NSDA_MOLLIFIER_HPP

#include <array>
#include <complex>
#include <vector>

namespace nsda::moll {

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
const GaussRule& gauss_rule(int n);

/// Normalization K0 with integral of K0 * exp(-1/(1-|z|^2)) over the unit
/// disk equal to 1.
double bump_norm_const();

/// Normalized radial Fourier transform of the mollifier:
/// rho_hat(s) = K0 * 2 pi * int_0^1 exp(-1/(1-r^2)) J0(s r) r dr,
/// so rho_hat(0) = 1.  Tabulated with a Hermite-cubic interpolant; exact
/// quadrature beyond the table.
double rho_hat(double s);

/// Mollified, L-periodicized indicator of the square [0,h)^2 with mollifier
/// radius eps = h/10:  psi~ = rho_eps * psi.  Values and gradients are exact
/// up to Gauss quadrature of the smooth compactly supported integrand.
class PsiTilde {
public:
    PsiTilde(double L, int K);

    double L() const { return L_; }
    double h() const { return h_; }
    double eps() const { return eps_; }

    /// psi~(x) for the reference square; translate the argument to evaluate
    /// other squares.
    double value(double x1, double x2) const;
    std::array<double, 2> gradient(double x1, double x2) const;

    /// Exact Fourier coefficient (convention f = sum f_hat e^{ikx}):
    /// psi~_hat(j) = psi_hat(j) * rho_hat(eps |k_j|).
    std::complex<double> fourier(int j1, int j2) const;

    /// Fourier coefficient of the raw (unmollified) square indicator.
    std::complex<double> fourier_raw(int j1, int j2) const;

private:
    double L_, h_, eps_;
};

} // namespace nsda::moll

#endif
