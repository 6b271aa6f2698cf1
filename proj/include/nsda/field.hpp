/// @file field.hpp
/// @brief Divergence-free, zero-mean velocity fields on the periodic box,
///        stored as truncated Fourier coefficients, with the Leray projection,
///        Stokes-operator powers, norms, and the dealiased advective term.

#ifndef NSDA_FIELD_HPP
#define NSDA_FIELD_HPP

#include <array>
#include <complex>
#include <vector>

#include "nsda/grid.hpp"
#include "nsda/rng.hpp"

namespace nsda {

using Complex = std::complex<double>;

/// Norm/space selector for SpectralField::norm.
enum class Space { H, V, DA, L4, Linf };

/// Two-component velocity field as full-spectrum Fourier coefficients with
/// enforced conjugate symmetry.  Invariants (maintained by every operation
/// that returns a SpectralField):
///   - coefficient at k = 0 is exactly zero (zero spatial mean),
///   - k . u_hat(k) = 0 on every retained mode (divergence-free),
///   - u_hat(-k) = conj(u_hat(k)) (real physical field),
///   - coefficients outside the dealias disk are exactly zero.
class SpectralField {
public:
    explicit SpectralField(GridPtr grid);

    const WaveGrid& grid() const { return *grid_; }
    GridPtr grid_ptr() const { return grid_; }

    Complex& at(int comp, int a1, int a2) {
        return coeffs_[idx(comp, a1, a2)];
    }
    const Complex& at(int comp, int a1, int a2) const {
        return coeffs_[idx(comp, a1, a2)];
    }
    Complex* component(int comp) {
        return coeffs_.data() + static_cast<size_t>(comp) * n_per_comp_;
    }
    const Complex* component(int comp) const {
        return coeffs_.data() + static_cast<size_t>(comp) * n_per_comp_;
    }

    std::vector<Complex>& coeffs() { return coeffs_; }
    const std::vector<Complex>& coeffs() const { return coeffs_; }

    void set_zero();

    // In-place linear algebra (same grid required).
    SpectralField& operator+=(const SpectralField& o);
    SpectralField& operator-=(const SpectralField& o);
    SpectralField& operator*=(double s);
    void axpy(double a, const SpectralField& x);  // this += a*x

    /// Orthogonal projection onto divergence-free, zero-mean fields; also
    /// zeroes all modes outside the dealias disk and re-imposes conjugate
    /// symmetry.  Idempotent.
    void leray_project();

    /// Multiply each mode by |k|^(2*alpha).  Negative alpha is allowed since
    /// the k = 0 mode is identically zero.
    void apply_stokes_power(double alpha);

    double norm(Space space) const;
    /// D(A^alpha) norm: (L^2 sum |k|^(4 alpha) |u_hat|^2)^(1/2).
    double norm_dalpha(double alpha) const;

    /// Exact trigonometric evaluation of the truncated series at arbitrary
    /// points (wrapped periodically); no grid snapping.
    std::array<double, 2> evaluate_at(double x1, double x2) const;
    std::vector<std::array<double, 2>>
    evaluate_at_points(const std::vector<std::array<double, 2>>& pts) const;

    /// Physical samples of one component on the M x M grid (inverse DFT).
    std::vector<double> to_physical(int comp) const;

    // Diagnostics used by tests and runtime guards.
    double max_divergence() const;      // max_k |k . u_hat| / max coefficient
    double mean_magnitude() const;      // |u_hat(0)|
    bool finite() const;

private:
    size_t idx(int comp, int a1, int a2) const {
        return static_cast<size_t>(comp) * n_per_comp_ +
               static_cast<size_t>(a1) * grid_->modes() + a2;
    }

    GridPtr grid_;
    size_t n_per_comp_;
    std::vector<Complex> coeffs_;
};

/// <u, v> = integral of u . v over the box = L^2 sum u_hat . conj(v_hat).
double inner_h(const SpectralField& u, const SpectralField& v);
/// ((u, v)) = integral of grad u : grad v = L^2 sum |k|^2 u_hat . conj(v_hat).
double inner_v(const SpectralField& u, const SpectralField& v);
/// <A^alpha u, v> = L^2 sum |k|^(2 alpha) u_hat . conj(v_hat).
double inner_weighted(const SpectralField& u, const SpectralField& v, double alpha);

/// Leray projection of raw coefficients (conjugate-symmetric input assumed).
SpectralField leray_project(GridPtr grid, const std::vector<Complex>& raw);

SpectralField stokes_power(const SpectralField& u, double alpha);

/// Dealiased advective term Pi((u . grad) v), computed pseudospectrally on the
/// M x M grid.  Both fields must live on the same grid.  The result is
/// divergence-free, zero-mean, and supported on the retained disk, so the
/// orthogonality identities <B(u,v),v> = 0 and <B(v,v),Av> = 0 hold to
/// rounding.
SpectralField bilinear(const SpectralField& u, const SpectralField& v);

/// Random divergence-free field with |u_hat(k)| ~ |j|^(-decay) up to |j| <=
/// jmax, random phases drawn from the (seed, purpose, stream) Philox stream.
/// Normalized to H-norm 1 unless norm_h <= 0.
SpectralField random_divfree_field(GridPtr grid, std::uint64_t seed,
                                   rng::Purpose purpose, std::uint32_t stream,
                                   double decay, int jmax, double norm_h = 1.0);

/// Random superposition of compactly supported divergence-free vortex blobs;
/// probes norm inequalities closer to their extremizers than smooth spectra.
SpectralField random_blob_field(GridPtr grid, std::uint64_t seed,
                                rng::Purpose purpose, std::uint32_t stream,
                                int n_blobs, double norm_h = 1.0);

/// Time-independent body force supported on the wavenumber shell
/// shell_min <= |j| <= shell_max with seeded random phases, scaled so that
/// |f|_H = norm_h.
SpectralField make_shell_forcing(GridPtr grid, std::uint64_t seed,
                                 double norm_h, int shell_min = 1,
                                 int shell_max = 2);

} // namespace nsda

#endif
