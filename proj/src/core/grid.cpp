#include "nsda/grid.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace nsda {

namespace {
bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }
}

WaveGrid::WaveGrid(double L, int M, int dealias_num, int dealias_den)
    : L_(L), M_(M), dealias_num_(dealias_num), dealias_den_(dealias_den) {
    if (!(L > 0.0))
        throw std::invalid_argument("WaveGrid: domain length must be positive");
    if (M < 4 || !is_pow2(M))
        throw std::invalid_argument("WaveGrid: modes per dimension must be a power of two >= 4");
    if (dealias_num <= 0 || dealias_den <= 0 || dealias_num > dealias_den)
        throw std::invalid_argument("WaveGrid: dealias fraction must be in (0,1]");

    two_pi_over_L_ = 2.0 * std::numbers::pi / L_;
    lambda1_ = two_pi_over_L_ * two_pi_over_L_;

    ksq_.resize(static_cast<size_t>(M_) * M_);
    mask_.resize(static_cast<size_t>(M_) * M_);

    // Retained disk: |j|^2 <= (fraction * M/2)^2, compared in exact integer
    // arithmetic as (2*den*j)^2 <= (num*M)^2.  The Nyquist line j = -M/2 is
    // always dropped so conjugate symmetry pairs every retained mode.
    const std::int64_t rhs =
        static_cast<std::int64_t>(dealias_num_) * M_ * dealias_num_ * M_;
    for (int a1 = 0; a1 < M_; ++a1) {
        const int j1 = index_to_j(a1);
        for (int a2 = 0; a2 < M_; ++a2) {
            const int j2 = index_to_j(a2);
            const std::int64_t jsq =
                static_cast<std::int64_t>(j1) * j1 + static_cast<std::int64_t>(j2) * j2;
            const double k1 = two_pi_over_L_ * j1;
            const double k2 = two_pi_over_L_ * j2;
            ksq_[static_cast<size_t>(a1) * M_ + a2] = k1 * k1 + k2 * k2;
            const bool in_disk = 4 * jsq * dealias_den_ * dealias_den_ <= rhs;
            const bool off_nyquist = j1 != -M_ / 2 && j2 != -M_ / 2;
            if (in_disk && off_nyquist) {
                mask_[static_cast<size_t>(a1) * M_ + a2] = 1;
                ++retained_count_;
                if (jsq > max_jsq_) max_jsq_ = jsq;
            }
        }
    }
}

GridPtr make_grid(double L, int M, int dealias_num, int dealias_den) {
    return std::make_shared<const WaveGrid>(L, M, dealias_num, dealias_den);
}

} // namespace nsda
