/// @file noise.hpp
/// @brief Measurement-error model: seeded Brownian channel increments, lifting
///        to the finite-rank Q-Wiener process through the interpolant basis,
///        covariance traces, and the auxiliary Ornstein-Uhlenbeck process.

#ifndef NSDA_NOISE_HPP
#define NSDA_NOISE_HPP

#include <cstdint>
#include <vector>

#include "nsda/field.hpp"
#include "nsda/observables.hpp"

namespace nsda {

/// Channel Brownian motions b_d with E(b_d(t)) = 0 and E(b_d(t)^2) =
/// t*sigma^2/2, mutually independent; sigma^2 carries units velocity^2*time.
struct NoiseModel {
    double sigma_sq = 0.0;
    int channels = 0;        // D = 2N
    std::uint64_t seed = 0;
};

/// Channel increments over one step of length dt: i.i.d. N(0, dt*sigma^2/2),
/// a pure function of (seed, member, step, channel).
std::vector<double> sample_increments(double dt, const NoiseModel& model,
                                      std::uint32_t member, std::uint32_t step);

/// W increment: sum_d dbeta_d gamma_d with gamma_d = Pi ell_d (Leray-projected
/// basis function restricted to the retained disk).  Linear in dbeta.
SpectralField lift_increment(const std::vector<double>& dbeta,
                             const InterpolantBasis& basis);

/// Which realization of the covariance operator a trace refers to: the one
/// applied on the simulation grid (retained disk), or the extended mode sum
/// approximating the infinite-dimensional operator.
enum class Fidelity { simulation, construction };

struct WienerStats {
    double trace_q = 0.0;         // (sigma^2/2) sum_d |gamma_d|_H^2
    double trace_ahalf_q = 0.0;   // (sigma^2/2) sum_d ||gamma_d||_V^2
    BasisKind basis_kind = BasisKind::step;
    Fidelity fidelity = Fidelity::simulation;
};

/// Covariance traces for the lifted noise.  trace[A^1/2 Q A^1/2] at
/// construction fidelity is +infinity for the step basis (step functions are
/// not in H^1); use the checked accessor where a finite value is required.
WienerStats covariance_traces(const InterpolantBasis& basis, double sigma_sq,
                              Fidelity fidelity = Fidelity::simulation);

/// trace[A^1/2 Q A^1/2], throwing for the step basis at construction
/// fidelity instead of returning the divergent value.
double trace_ahalf_q_checked(const InterpolantBasis& basis, double sigma_sq,
                             Fidelity fidelity = Fidelity::simulation);

/// Per-wavevector decomposition of trace[Q]: mass(k) = (sigma^2/2) * sum_d
/// L^2 |gamma_d_hat(k)|^2, together with lambda = |k|^2.  Used to validate
/// the OU process against the Ito-isometry bound mode by mode.
struct ModeMass {
    int a1 = 0, a2 = 0;
    double lambda = 0.0;
    double sum_gamma_sq = 0.0;  // sum_d L^2 |gamma_d_hat(k)|^2
    double mass = 0.0;          // (sigma^2/2) * sum_gamma_sq
};
std::vector<ModeMass> trace_mass_by_mode(const InterpolantBasis& basis,
                                         double sigma_sq);

/// One step of dz + nu A z dt = mu dW by exact per-mode exponential
/// integration: z' = e^{-nu lambda dt} z + mu g(nu lambda dt) dW with
/// g(x)^2 = (1 - e^{-2x})/(2x), so the discrete chain has exactly the OU
/// transition law for Gaussian increments of variance dt*sigma^2/2 per
/// channel.
SpectralField ou_step(const SpectralField& z, double dt, double nu, double mu,
                      const SpectralField& dW);

} // namespace nsda

#endif
