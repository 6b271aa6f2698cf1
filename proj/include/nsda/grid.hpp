/// @file grid.hpp
/// @brief Fourier grid for [0,L]^2 periodic fields: wavenumbers, dealias mask,
///        Stokes eigenvalue ladder.

#ifndef NSDA_GRID_HPP
#define NSDA_GRID_HPP

#include <cstdint>
#include <memory>
#include <vector>

namespace nsda {

/// Truncated Fourier grid on the periodic box [0,L]^2 with M modes per
/// dimension.  Wavevectors are k = (2*pi/L) * j for integer multi-indices
/// j in [-M/2, M/2).  Nonlinear terms are dealiased by circular truncation:
/// only modes with |j| <= dealias_fraction * M/2 are retained, so quadratic
/// products computed pseudospectrally are alias-free on the retained set.
class WaveGrid {
public:
    /// @param L        domain side length (must be > 0)
    /// @param M        modes per dimension; power of two, >= 4
    /// @param dealias_num/den  retained-mode radius as a fraction of M/2,
    ///                 in (0,1]; default 2/3
    WaveGrid(double L, int M, int dealias_num = 2, int dealias_den = 3);

    double length() const { return L_; }
    int modes() const { return M_; }
    double lambda1() const { return lambda1_; }   // (2*pi/L)^2
    double dealias_fraction() const {
        return static_cast<double>(dealias_num_) / dealias_den_;
    }
    int dealias_num() const { return dealias_num_; }
    int dealias_den() const { return dealias_den_; }

    /// Integer wavenumber of array index a in [0,M).
    int index_to_j(int a) const { return a < M_ / 2 ? a : a - M_; }

    /// Physical wavenumber component (2*pi/L)*j of array index a.
    double k_of(int a) const { return two_pi_over_L_ * index_to_j(a); }

    /// |k|^2 for array indices (a1,a2); row-major a1*M + a2.
    double ksq(int a1, int a2) const { return ksq_[a1 * M_ + a2]; }
    const std::vector<double>& ksq() const { return ksq_; }

    /// 1 if mode (a1,a2) is retained by the circular dealias truncation
    /// (the k = 0 mode is retained here; zero-mean is a field invariant).
    bool retained(int a1, int a2) const { return mask_[a1 * M_ + a2] != 0; }
    const std::vector<std::uint8_t>& mask() const { return mask_; }

    /// Number of retained modes, including k = 0.
    int retained_count() const { return retained_count_; }

    /// Largest |j|^2 retained (integer wavevector squared).
    std::int64_t max_jsq() const { return max_jsq_; }

    double two_pi_over_L() const { return two_pi_over_L_; }

    bool operator==(const WaveGrid& o) const {
        return L_ == o.L_ && M_ == o.M_ && dealias_num_ == o.dealias_num_ &&
               dealias_den_ == o.dealias_den_;
    }
    bool operator!=(const WaveGrid& o) const { return !(*this == o); }

private:
    double L_;
    int M_;
    int dealias_num_;
    int dealias_den_;
    double two_pi_over_L_;
    double lambda1_;
    std::vector<double> ksq_;
    std::vector<std::uint8_t> mask_;
    int retained_count_ = 0;
    std::int64_t max_jsq_ = 0;
};

using GridPtr = std::shared_ptr<const WaveGrid>;

/// Convenience factory returning a shared immutable grid.
GridPtr make_grid(double L, int M, int dealias_num = 2, int dealias_den = 3);

} // namespace nsda

#endif
