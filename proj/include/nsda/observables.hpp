/// @file observables.hpp
/// @brief Observation operators (volume averages, nodal values), lifting
///        bases (step and mollified), the composed interpolants, spatial
///        oversampling, and empirical approximation-property estimates.

#ifndef NSDA_OBSERVABLES_HPP
#define NSDA_OBSERVABLES_HPP

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "nsda/field.hpp"
#include "nsda/grid.hpp"
#include "nsda/mollifier.hpp"

namespace nsda {

enum class ObservationKind { volume, nodal };
enum class BasisKind { step, mollified };

/// D = 2N measurements with interleaved components: values[2n] is the first
/// velocity component on square n (0-based; odd 1-based indices in the paper's
/// numbering), values[2n+1] the second.  Squares are indexed n = i + j*K for
/// column i, row j (0-based), matching Q_n = [i h, (i+1) h) x [j h, (j+1) h).
struct ObservationVector {
    std::vector<double> values;
    int K = 0;
    ObservationKind kind = ObservationKind::volume;

    int squares() const { return K * K; }
    int channels() const { return 2 * K * K; }
};

/// Lifting basis: the D = 2N functions ell_d are component-tagged translates
/// of one scalar profile (step: chi_{Q} - h^2/L^2; mollified: psi~ - <psi~>),
/// so the basis is stored as the reference profile's Fourier coefficients on
/// the simulation grid plus exact norm data.
class InterpolantBasis {
public:
    BasisKind kind;
    int K;
    GridPtr grid;

    /// Fourier coefficients of the reference profile (mean removed, zero at
    /// j = 0), full M x M layout.  Only retained-disk modes are nonzero.
    std::vector<Complex> profile;

    /// Mollified profile evaluator (null for the step basis).
    std::shared_ptr<const moll::PsiTilde> psi;

    /// Exact integral of |ell_d|^2 (pre-projection, infinite-dimensional);
    /// closed form for the step basis, high-order quadrature for mollified.
    double channel_l2_sq_exact = 0.0;

    /// Per-channel |Pi ell_d|_H^2 and ||Pi ell_d||_V^2 restricted to the
    /// simulation grid's retained disk (the operator actually applied).
    double gamma_h_sq_sim = 0.0;
    double gamma_v_sq_sim = 0.0;

    /// Same quantities summed over an extended mode set approximating the
    /// infinite-dimensional operator.  V-norm is +inf for the step basis.
    double gamma_h_sq_cons = 0.0;
    double gamma_v_sq_cons = 0.0;

    double h() const { return grid->length() / K; }
    bool under_resolved = false;  // mollifier marginally resolved on the grid
};

/// Builds the basis; K must divide the grid resolution M.  For the mollified
/// basis M/K >= 20 is recommended; smaller ratios set `under_resolved`.
InterpolantBasis build_basis(BasisKind kind, int K, GridPtr grid);

/// Volume-element observations: entry pair n = (N/L^2) * integral of Phi over
/// Q_n, by exact per-mode quadrature of the trigonometric polynomial.
ObservationVector observe_volumes(const SpectralField& phi, int K);

/// Nodal observations at one point per square, validated x_n in Q_n.
/// Points are ordered by square index n = i + j*K.
ObservationVector observe_nodes(const SpectralField& phi,
                                const std::vector<std::array<double, 2>>& nodes);

/// Nodal observations with a common in-square offset (off1, off2) in [0,1)^2
/// in units of h; exact trigonometric evaluation via mode folding.
ObservationVector observe_nodes_regular(const SpectralField& phi, int K,
                                        double off1 = 0.5, double off2 = 0.5);

/// Pi L_h(zeta) = sum_d zeta_d gamma_d as a SpectralField (zero-mean,
/// divergence-free, retained-disk supported).
SpectralField interpolate(const ObservationVector& zeta,
                          const InterpolantBasis& basis);

/// Block average of q^2 fine observation pairs per coarse square; maps fine
/// resolution h onto h' = q h.  For noiseless volume observations this equals
/// the directly observed coarse vector.
ObservationVector oversample_average(const ObservationVector& fine, int q);

/// Empirical approximation-property estimates for the composed interpolant
/// R_h = L_h o O_h.
struct ApproxReport {
    double c1_max = 0.0;        // R1: max ||phi - R phi||^2 / (h^2 ||phi||_H1^2)
    double c1_fit = 0.0;        // R2 regression coefficients, envelope-scaled
    double c2_fit = 0.0;        //   so every trial satisfies the fitted bound
    int trials = 0;
};
enum class ApproxMode { R1, R2 };
ApproxReport verify_approximation(const InterpolantBasis& basis,
                                  ObservationKind obs_kind, ApproxMode mode,
                                  int trials, std::uint64_t seed);

/// ||phi - L_h(O_h(phi))||_L2^2 for one field, computed without grid
/// quadrature error (spectral cross terms + exact basis Gram data).
double interpolation_residual_sq(const SpectralField& phi,
                                 const InterpolantBasis& basis,
                                 ObservationKind obs_kind);

/// Construction-grid verification of the smooth-partition properties
/// (supports, partition of unity, means, gradient bounds, near-orthogonality).
/// Independent of any simulation grid.
struct PartitionReport {
    int K = 0;
    double h = 0.0;
    double eps = 0.0;
    double min_value = 0.0;              // min psi~ over samples
    double max_value = 0.0;              // max psi~ over samples
    double max_outside_support = 0.0;    // sup |psi~| outside U_n
    double max_plateau_deviation = 0.0;  // sup |psi~ - 1| on C_n
    double max_partition_deviation = 0.0;
    double mean_abs_error = 0.0;         // |<psi~> - h^2/L^2|
    double psi_l2 = 0.0;                 // ||psi~||_L2
    double grad_max = 0.0;               // sup |grad psi~|
    double grad_l2 = 0.0;                // ||grad psi~||_L2
    double max_grad_outside_band = 0.0;  // sup |grad psi~| outside U_n \ C_n
    double gram_psi_edge = 0.0;          // int psi~_n psi~_m, edge offset
    double gram_psi_corner = 0.0;
    double gram_psi_same = 0.0;
    double gram_grad_same = 0.0;
    double gram_grad_edge = 0.0;         // signed values; bound uses |.|
    double gram_grad_corner = 0.0;
    double gram_psi_disjoint = 0.0;      // max |int| over offsets outside K (exact 0)
    double gram_grad_disjoint = 0.0;
};
PartitionReport check_partition_properties(double L, int K);

/// Observation-log CSV: header "t, v_1, ..., v_{2N}", one row per sample,
/// times strictly increasing.
void write_observation_log(const std::string& path,
                           const std::vector<double>& times,
                           const std::vector<ObservationVector>& obs);
struct ObservationLog {
    std::vector<double> times;
    std::vector<ObservationVector> obs;
};
ObservationLog read_observation_log(const std::string& path,
                                    ObservationKind kind);

} // namespace nsda

#endif
