#include "nsda/observables.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>

#include "nsda/fft.hpp"

namespace nsda {

namespace {

constexpr double pi = std::numbers::pi;

// sum over retained modes of phi_hat(j) * w(j) * e^{i k . tau_n} for every
// square corner tau_n, via mod-K folding and one K x K inverse DFT per
// component.  Returns interleaved per-square complex values.
std::vector<Complex> fold_sum(const SpectralField& phi, int K,
                              const std::vector<Complex>& weight) {
    const WaveGrid& g = phi.grid();
    const int M = g.modes();
    const size_t nk = static_cast<size_t>(K) * K;
    std::vector<Complex> out(2 * nk);
    std::vector<Complex> folded(nk);

    for (int comp = 0; comp < 2; ++comp) {
        std::fill(folded.begin(), folded.end(), Complex(0, 0));
        const Complex* c = phi.component(comp);
        for (int a1 = 0; a1 < M; ++a1) {
            const int j1 = g.index_to_j(a1);
            const int b1 = ((j1 % K) + K) % K;
            for (int a2 = 0; a2 < M; ++a2) {
                if (!g.retained(a1, a2)) continue;
                const size_t i = static_cast<size_t>(a1) * M + a2;
                if (c[i] == Complex(0, 0)) continue;
                const int j2 = g.index_to_j(a2);
                const int b2 = ((j2 % K) + K) % K;
                folded[static_cast<size_t>(b1) * K + b2] += c[i] * weight[i];
            }
        }
        fft::backward(folded, K);
        // folded is now indexed [m1*K + m2] with square corner (m1 h, m2 h);
        // square index n = m1 + m2*K.
        for (int m1 = 0; m1 < K; ++m1)
            for (int m2 = 0; m2 < K; ++m2)
                out[2 * (static_cast<size_t>(m2) * K + m1) + comp] =
                    folded[static_cast<size_t>(m1) * K + m2];
    }
    return out;
}

// Lift without the Leray projection: coefficients of sum_d zeta_d (ell_d
// restricted to the retained disk).  Used internally and by the residual
// computation; `interpolate` composes this with the projection.
std::vector<Complex> lift_raw(const ObservationVector& zeta,
                              const InterpolantBasis& basis) {
    if (zeta.K != basis.K)
        throw std::invalid_argument(
            "interpolate: observation dimension 2*" + std::to_string(zeta.squares()) +
            " does not match basis dimension 2*" + std::to_string(basis.K * basis.K));
    const WaveGrid& g = *basis.grid;
    const int M = g.modes();
    const int K = basis.K;
    const size_t nk = static_cast<size_t>(K) * K;
    std::vector<Complex> coeffs(2 * static_cast<size_t>(M) * M, Complex(0, 0));
    std::vector<Complex> z(nk);

    for (int comp = 0; comp < 2; ++comp) {
        for (int m1 = 0; m1 < K; ++m1)
            for (int m2 = 0; m2 < K; ++m2)
                z[static_cast<size_t>(m1) * K + m2] =
                    Complex(zeta.values[2 * (static_cast<size_t>(m2) * K + m1) + comp], 0.0);
        fft::forward(z, K);
        Complex* out = coeffs.data() + static_cast<size_t>(comp) * M * M;
        for (int a1 = 0; a1 < M; ++a1) {
            const int j1 = g.index_to_j(a1);
            const int b1 = ((j1 % K) + K) % K;
            for (int a2 = 0; a2 < M; ++a2) {
                if (!g.retained(a1, a2)) continue;
                if (a1 == 0 && a2 == 0) continue;
                const size_t i = static_cast<size_t>(a1) * M + a2;
                if (basis.profile[i] == Complex(0, 0)) continue;
                const int j2 = g.index_to_j(a2);
                const int b2 = ((j2 % K) + K) % K;
                out[i] = basis.profile[i] * z[static_cast<size_t>(b1) * K + b2];
            }
        }
    }
    return coeffs;
}

void require_divides(int K, int M) {
    if (K < 1 || M % K != 0)
        throw std::invalid_argument(
            "observation squares per side K=" + std::to_string(K) +
            " must divide the grid resolution M=" + std::to_string(M) +
            "; choose K from the divisors of M");
}

std::complex<double> step_gbar(double kappa, double h) {
    if (kappa == 0.0) return {h, 0.0};
    const std::complex<double> ik(0.0, kappa);
    return (1.0 - std::exp(-ik * h)) / ik;
}

// Composite Gauss-Legendre rule over [-eps, h+eps] with panel breaks at the
// plateau boundaries; nodes_per_panel per panel.
struct CompositeRule {
    std::vector<double> x, w;
};
CompositeRule panel_rule(double h, double eps, int nodes_per_panel) {
    const auto& g = moll::gauss_rule(nodes_per_panel);
    const double breaks[] = {-eps, eps, h - eps, h + eps};
    CompositeRule r;
    for (int p = 0; p < 3; ++p) {
        const double a = breaks[p], b = breaks[p + 1];
        const double c = 0.5 * (b - a), m = 0.5 * (b + a);
        for (int i = 0; i < nodes_per_panel; ++i) {
            r.x.push_back(m + c * g.nodes[i]);
            r.w.push_back(c * g.weights[i]);
        }
    }
    return r;
}

// integral of psi~^2 over the box, by panel quadrature (support is inside
// [-eps, h+eps]^2 up to periodic images, which the window avoids for K >= 2).
double psi_l2_sq(const moll::PsiTilde& psi, int nodes_per_panel = 32) {
    const CompositeRule r = panel_rule(psi.h(), psi.eps(), nodes_per_panel);
    const size_t n = r.x.size();
    double sum = 0.0;
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < n; ++j) {
            const double v = psi.value(r.x[i], r.x[j]);
            sum += r.w[i] * r.w[j] * v * v;
        }
    }
    return sum;
}

} // namespace

InterpolantBasis build_basis(BasisKind kind, int K, GridPtr grid) {
    const int M = grid->modes();
    require_divides(K, M);
    if (kind == BasisKind::mollified && K < 2)
        throw std::invalid_argument("mollified basis requires K >= 2");

    InterpolantBasis b;
    b.kind = kind;
    b.K = K;
    b.grid = grid;
    const double L = grid->length();
    const double h = L / K;
    b.profile.assign(static_cast<size_t>(M) * M, Complex(0, 0));

    std::shared_ptr<const moll::PsiTilde> psi;
    if (kind == BasisKind::mollified) {
        psi = std::make_shared<const moll::PsiTilde>(L, K);
        b.psi = psi;
        b.under_resolved = M / K < 20;
    }

    // Reference-profile Fourier coefficients on the retained disk (mean mode
    // removed).  These are exact per mode; no construction-grid FFT involved.
    for (int a1 = 0; a1 < M; ++a1) {
        const int j1 = grid->index_to_j(a1);
        for (int a2 = 0; a2 < M; ++a2) {
            if (!grid->retained(a1, a2)) continue;
            if (a1 == 0 && a2 == 0) continue;
            const int j2 = grid->index_to_j(a2);
            const size_t i = static_cast<size_t>(a1) * M + a2;
            if (kind == BasisKind::step) {
                const double k1 = 2.0 * pi / L * j1;
                const double k2 = 2.0 * pi / L * j2;
                b.profile[i] = step_gbar(k1, h) * step_gbar(k2, h) / (L * L);
            } else {
                b.profile[i] = psi->fourier(j1, j2);
            }
        }
    }

    // Exact squared L2 norm of one basis function (pre-projection).
    if (kind == BasisKind::step) {
        b.channel_l2_sq_exact = h * h - h * h * h * h / (L * L);
    } else {
        b.channel_l2_sq_exact = psi_l2_sq(*psi) - h * h * h * h / (L * L);
    }

    // Per-channel norms of gamma_d = Pi ell_d at simulation fidelity (the
    // retained disk).  All channels share these by the profile's symmetry.
    {
        double sum_h = 0.0, sum_v = 0.0;
        for (int a1 = 0; a1 < M; ++a1) {
            for (int a2 = 0; a2 < M; ++a2) {
                if (!grid->retained(a1, a2) || (a1 == 0 && a2 == 0)) continue;
                const size_t i = static_cast<size_t>(a1) * M + a2;
                const double p2 = std::norm(b.profile[i]);
                if (p2 == 0.0) continue;
                const double k2c = grid->k_of(a2);
                const double frac = k2c * k2c / grid->ksq(a1, a2);
                sum_h += p2 * frac;
                sum_v += p2 * frac * grid->ksq(a1, a2);
            }
        }
        b.gamma_h_sq_sim = L * L * sum_h;
        b.gamma_v_sq_sim = L * L * sum_v;
    }

    // Construction fidelity: extend the mode sum well past the grid cutoff.
    {
        const int jmax = std::max(4 * (M / 2), 40 * K);
        double sum_h = 0.0, sum_v = 0.0;
        for (int j1 = -jmax; j1 <= jmax; ++j1) {
            for (int j2 = -jmax; j2 <= jmax; ++j2) {
                if (j1 == 0 && j2 == 0) continue;
                Complex prof;
                if (kind == BasisKind::step) {
                    const double k1 = 2.0 * pi / L * j1;
                    const double k2 = 2.0 * pi / L * j2;
                    prof = step_gbar(k1, h) * step_gbar(k2, h) / (L * L);
                } else {
                    prof = psi->fourier(j1, j2);
                }
                const double p2 = std::norm(prof);
                if (p2 == 0.0) continue;
                const double k1 = 2.0 * pi / L * j1;
                const double k2 = 2.0 * pi / L * j2;
                const double kk = k1 * k1 + k2 * k2;
                const double frac = k2 * k2 / kk;
                sum_h += p2 * frac;
                sum_v += p2 * frac * kk;
            }
        }
        b.gamma_h_sq_cons = L * L * sum_h;
        b.gamma_v_sq_cons =
            kind == BasisKind::step ? std::numeric_limits<double>::infinity()
                                    : L * L * sum_v;
    }

    return b;
}

ObservationVector observe_volumes(const SpectralField& phi, int K) {
    const WaveGrid& g = phi.grid();
    const int M = g.modes();
    require_divides(K, M);
    const double L = g.length();
    const double h = L / K;

    std::vector<Complex> weight(static_cast<size_t>(M) * M, Complex(0, 0));
    for (int a1 = 0; a1 < M; ++a1) {
        const double k1 = g.k_of(a1);
        for (int a2 = 0; a2 < M; ++a2) {
            if (!g.retained(a1, a2)) continue;
            const double k2 = g.k_of(a2);
            // (1/h^2) * integral over [0,h)^2 of e^{i k s} ds
            weight[static_cast<size_t>(a1) * M + a2] =
                std::conj(step_gbar(k1, h)) * std::conj(step_gbar(k2, h)) / (h * h);
        }
    }
    const auto vals = fold_sum(phi, K, weight);
    ObservationVector out;
    out.K = K;
    out.kind = ObservationKind::volume;
    out.values.resize(vals.size());
    for (size_t i = 0; i < vals.size(); ++i) out.values[i] = vals[i].real();
    return out;
}

ObservationVector observe_nodes_regular(const SpectralField& phi, int K,
                                        double off1, double off2) {
    if (!(off1 >= 0.0 && off1 < 1.0 && off2 >= 0.0 && off2 < 1.0))
        throw std::invalid_argument("observe_nodes_regular: offsets must lie in [0,1)");
    const WaveGrid& g = phi.grid();
    const int M = g.modes();
    const double h = g.length() / K;
    const double d1 = off1 * h, d2 = off2 * h;

    std::vector<Complex> weight(static_cast<size_t>(M) * M, Complex(0, 0));
    for (int a1 = 0; a1 < M; ++a1) {
        const double k1 = g.k_of(a1);
        for (int a2 = 0; a2 < M; ++a2) {
            if (!g.retained(a1, a2)) continue;
            const double k2 = g.k_of(a2);
            weight[static_cast<size_t>(a1) * M + a2] =
                std::polar(1.0, k1 * d1 + k2 * d2);
        }
    }
    const auto vals = fold_sum(phi, K, weight);
    ObservationVector out;
    out.K = K;
    out.kind = ObservationKind::nodal;
    out.values.resize(vals.size());
    for (size_t i = 0; i < vals.size(); ++i) out.values[i] = vals[i].real();
    return out;
}

ObservationVector observe_nodes(const SpectralField& phi,
                                const std::vector<std::array<double, 2>>& nodes) {
    const int K = static_cast<int>(std::lround(std::sqrt(static_cast<double>(nodes.size()))));
    if (static_cast<size_t>(K) * K != nodes.size())
        throw std::invalid_argument("observe_nodes: need K^2 nodes, one per square");
    const double h = phi.grid().length() / K;
    for (int n = 0; n < K * K; ++n) {
        const int i = n % K, j = n / K;
        const auto& x = nodes[n];
        if (!(x[0] >= i * h && x[0] < (i + 1) * h && x[1] >= j * h && x[1] < (j + 1) * h))
            throw std::invalid_argument("observe_nodes: node " + std::to_string(n) +
                                        " lies outside its square Q_n");
    }
    ObservationVector out;
    out.K = K;
    out.kind = ObservationKind::nodal;
    out.values.resize(2 * nodes.size());
    for (size_t n = 0; n < nodes.size(); ++n) {
        const auto v = phi.evaluate_at(nodes[n][0], nodes[n][1]);
        out.values[2 * n] = v[0];
        out.values[2 * n + 1] = v[1];
    }
    return out;
}

SpectralField interpolate(const ObservationVector& zeta,
                          const InterpolantBasis& basis) {
    auto coeffs = lift_raw(zeta, basis);
    SpectralField f(basis.grid);
    f.coeffs() = std::move(coeffs);
    f.leray_project();
    return f;
}

ObservationVector oversample_average(const ObservationVector& fine, int q) {
    if (q < 1) throw std::invalid_argument("oversample_average: q must be >= 1");
    if (q == 1) return fine;
    if (fine.K % q != 0)
        throw std::invalid_argument("oversample_average: fine K=" + std::to_string(fine.K) +
                                    " is not divisible by q=" + std::to_string(q));
    const int Kc = fine.K / q;
    ObservationVector out;
    out.K = Kc;
    out.kind = fine.kind;
    out.values.assign(2 * static_cast<size_t>(Kc) * Kc, 0.0);
    const double inv = 1.0 / (static_cast<double>(q) * q);
    for (int jc = 0; jc < Kc; ++jc) {
        for (int ic = 0; ic < Kc; ++ic) {
            double s0 = 0.0, s1 = 0.0;
            for (int r2 = 0; r2 < q; ++r2) {
                for (int r1 = 0; r1 < q; ++r1) {
                    const int nf = (ic * q + r1) + (jc * q + r2) * fine.K;
                    s0 += fine.values[2 * nf];
                    s1 += fine.values[2 * nf + 1];
                }
            }
            const int nc = ic + jc * Kc;
            out.values[2 * nc] = s0 * inv;
            out.values[2 * nc + 1] = s1 * inv;
        }
    }
    return out;
}

double interpolation_residual_sq(const SpectralField& phi,
                                 const InterpolantBasis& basis,
                                 ObservationKind obs_kind) {
    ObservationVector zeta = obs_kind == ObservationKind::volume
                                 ? observe_volumes(phi, basis.K)
                                 : observe_nodes_regular(phi, basis.K);
    const auto lifted = lift_raw(zeta, basis);
    const WaveGrid& g = phi.grid();
    const int M = g.modes();
    const double L2 = g.length() * g.length();
    double phi_sq = 0.0, cross = 0.0, lift_sq = 0.0;
    for (int comp = 0; comp < 2; ++comp) {
        const Complex* pc = phi.component(comp);
        const Complex* lc = lifted.data() + static_cast<size_t>(comp) * M * M;
        for (size_t i = 0; i < static_cast<size_t>(M) * M; ++i) {
            phi_sq += std::norm(pc[i]);
            cross += (pc[i] * std::conj(lc[i])).real();
            lift_sq += std::norm(lc[i]);
        }
    }
    return L2 * (phi_sq - 2.0 * cross + lift_sq);
}

ApproxReport verify_approximation(const InterpolantBasis& basis,
                                  ObservationKind obs_kind, ApproxMode mode,
                                  int trials, std::uint64_t seed) {
    if (trials < 1) throw std::invalid_argument("verify_approximation: trials must be >= 1");
    ApproxReport rep;
    rep.trials = trials;
    const double h = basis.h();
    const int disk = static_cast<int>(std::sqrt(static_cast<double>(basis.grid->max_jsq())));
    const double decays[] = {1.2, 1.6, 2.0, 2.4};

    std::vector<std::array<double, 3>> samples;  // {resid^2, h^2 V^2, h^4 DA^2}
    samples.reserve(trials);
    for (int t = 0; t < trials; ++t) {
        const double decay = decays[t % 4] + (mode == ApproxMode::R2 ? 1.0 : 0.0);
        const int jmax = std::min(disk, std::max(3 * basis.K, 8));
        auto phi = random_divfree_field(basis.grid, seed, rng::Purpose::calibration,
                                        static_cast<std::uint32_t>(t), decay, jmax);
        const double resid = interpolation_residual_sq(phi, basis, obs_kind);
        const double v2 = std::pow(phi.norm(Space::V), 2);
        const double da2 = std::pow(phi.norm(Space::DA), 2);
        samples.push_back({resid, h * h * v2, h * h * h * h * da2});
        rep.c1_max = std::max(rep.c1_max, resid / (h * h * v2));
    }

    if (mode == ApproxMode::R2) {
        // Least squares fit resid^2 ~ c1 * x + c2 * y with nonnegative
        // coefficients, then scale so the fit bounds every sample.
        double sxx = 0, sxy = 0, syy = 0, sxr = 0, syr = 0;
        for (const auto& s : samples) {
            sxx += s[1] * s[1];
            sxy += s[1] * s[2];
            syy += s[2] * s[2];
            sxr += s[1] * s[0];
            syr += s[2] * s[0];
        }
        double c1 = 0.0, c2 = 0.0;
        const double det = sxx * syy - sxy * sxy;
        if (det > 0) {
            c1 = (syy * sxr - sxy * syr) / det;
            c2 = (sxx * syr - sxy * sxr) / det;
        }
        if (c1 < 0) { c1 = 0.0; c2 = syy > 0 ? syr / syy : 0.0; }
        if (c2 < 0) { c2 = 0.0; c1 = sxx > 0 ? sxr / sxx : 0.0; }
        double scale = 0.0;
        for (const auto& s : samples) {
            const double denom = c1 * s[1] + c2 * s[2];
            if (denom > 0) scale = std::max(scale, s[0] / denom);
        }
        if (scale == 0.0) scale = 1.0;
        rep.c1_fit = c1 * scale;
        rep.c2_fit = c2 * scale;
    }
    return rep;
}

PartitionReport check_partition_properties(double L, int K) {
    moll::PsiTilde psi(L, K);
    PartitionReport rep;
    rep.K = K;
    rep.h = psi.h();
    rep.eps = psi.eps();
    const double h = rep.h, eps = rep.eps;

    // Partition of unity on a uniform sample of one period cell: the sum over
    // all squares reduces to the distinct wrapped neighbors.
    {
        const int ns = 97;
        std::set<std::pair<int, int>> offsets;
        for (int d1 = -1; d1 <= 1; ++d1)
            for (int d2 = -1; d2 <= 1; ++d2)
                offsets.insert({((d1 % K) + K) % K, ((d2 % K) + K) % K});
        for (int i = 0; i < ns; ++i) {
            for (int j = 0; j < ns; ++j) {
                const double x1 = h * i / ns, x2 = h * j / ns;
                double sum = 0.0;
                for (const auto& [o1, o2] : offsets)
                    sum += psi.value(x1 - o1 * h, x2 - o2 * h);
                rep.max_partition_deviation =
                    std::max(rep.max_partition_deviation, std::abs(sum - 1.0));
            }
        }
    }

    // Quadrature sweep over the support for means, norms and Gram products.
    const CompositeRule r = panel_rule(h, eps, 32);
    const size_t n = r.x.size();
    std::vector<double> val(n * n), gx(n * n), gy(n * n);
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < n; ++j) {
            val[i * n + j] = psi.value(r.x[i], r.x[j]);
            const auto gr = psi.gradient(r.x[i], r.x[j]);
            gx[i * n + j] = gr[0];
            gy[i * n + j] = gr[1];
        }
    }

    double mean = 0.0, l2 = 0.0, gl2 = 0.0;
    rep.min_value = 1.0;
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < n; ++j) {
            const double w = r.w[i] * r.w[j];
            const double v = val[i * n + j];
            mean += w * v;
            l2 += w * v * v;
            const double g2 = gx[i * n + j] * gx[i * n + j] + gy[i * n + j] * gy[i * n + j];
            gl2 += w * g2;
            rep.min_value = std::min(rep.min_value, v);
            rep.max_value = std::max(rep.max_value, v);
            rep.grad_max = std::max(rep.grad_max, std::sqrt(g2));
            // Plateau and off-band checks.
            const double x1 = r.x[i], x2 = r.x[j];
            const bool plateau = x1 >= eps && x1 <= h - eps && x2 >= eps && x2 <= h - eps;
            if (plateau) {
                rep.max_plateau_deviation =
                    std::max(rep.max_plateau_deviation, std::abs(v - 1.0));
                rep.max_grad_outside_band =
                    std::max(rep.max_grad_outside_band, std::sqrt(g2));
            }
        }
    }
    rep.mean_abs_error = std::abs(mean / (L * L) - (h / L) * (h / L));
    rep.psi_l2 = std::sqrt(l2);
    rep.grad_l2 = std::sqrt(gl2);

    // Fine 1D scan across an edge for the gradient supremum.
    for (int i = 0; i <= 2000; ++i) {
        const double x1 = -eps + 2.0 * eps * i / 2000.0;
        const auto g = psi.gradient(x1, 0.5 * h);
        rep.grad_max = std::max(rep.grad_max, std::hypot(g[0], g[1]));
    }

    // Support: values and gradients outside U_n must vanish identically.
    for (int i = 0; i <= 50; ++i) {
        const double t = -2.0 * eps + (h + 4.0 * eps) * i / 50.0;
        for (double s : {-2.0 * eps, -1.2 * eps, h + 1.2 * eps, h + 2.0 * eps}) {
            rep.max_outside_support = std::max({rep.max_outside_support,
                                                std::abs(psi.value(t, s)),
                                                std::abs(psi.value(s, t))});
        }
    }

    // Gram products for neighbor offsets; the shifted factor reuses the panel
    // structure (panel 3 shifted by -h lands on panel 1's nodes).
    auto gram = [&](int d1, int d2, const std::vector<double>& f,
                    const std::vector<double>& gxx, const std::vector<double>& gyy,
                    bool grads) {
        double sum = 0.0;
        for (size_t i = 0; i < n; ++i) {
            for (size_t j = 0; j < n; ++j) {
                const double x1 = r.x[i] - d1 * h;
                const double x2 = r.x[j] - d2 * h;
                if (x1 < -eps || x1 > h + eps || x2 < -eps || x2 > h + eps) continue;
                const double w = r.w[i] * r.w[j];
                if (!grads) {
                    sum += w * f[i * n + j] * psi.value(x1, x2);
                } else {
                    const auto g2 = psi.gradient(x1, x2);
                    sum += w * (gxx[i * n + j] * g2[0] + gyy[i * n + j] * g2[1]);
                }
            }
        }
        return sum;
    };
    rep.gram_psi_same = l2;
    rep.gram_psi_edge = gram(1, 0, val, gx, gy, false);
    rep.gram_psi_corner = gram(1, 1, val, gx, gy, false);
    rep.gram_grad_same = gl2;
    rep.gram_grad_edge = gram(1, 0, val, gx, gy, true);
    rep.gram_grad_corner = gram(1, 1, val, gx, gy, true);
    rep.gram_psi_disjoint = std::max(std::abs(gram(2, 0, val, gx, gy, false)),
                                     std::abs(gram(2, 2, val, gx, gy, false)));
    rep.gram_grad_disjoint = std::max(std::abs(gram(2, 0, val, gx, gy, true)),
                                      std::abs(gram(2, 1, val, gx, gy, true)));
    return rep;
}

void write_observation_log(const std::string& path,
                           const std::vector<double>& times,
                           const std::vector<ObservationVector>& obs) {
    if (times.size() != obs.size())
        throw std::invalid_argument("observation log: times/observations size mismatch");
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open observation log for writing: " + path);
    const int nch = obs.empty() ? 0 : obs.front().channels();
    f << "t";
    for (int c = 1; c <= nch; ++c) f << ", v_" << c;
    f << "\n";
    char buf[32];
    for (size_t i = 0; i < times.size(); ++i) {
        if (i > 0 && times[i] <= times[i - 1])
            throw std::invalid_argument("observation log: times must be strictly increasing");
        std::snprintf(buf, sizeof buf, "%.17g", times[i]);
        f << buf;
        for (double v : obs[i].values) {
            std::snprintf(buf, sizeof buf, "%.17g", v);
            f << ", " << buf;
        }
        f << "\n";
    }
}

ObservationLog read_observation_log(const std::string& path, ObservationKind kind) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open observation log: " + path);
    ObservationLog log;
    std::string line;
    if (!std::getline(f, line))
        throw std::runtime_error("observation log is empty: " + path);
    size_t lineno = 1;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string tok;
        std::vector<double> row;
        while (std::getline(ss, tok, ',')) row.push_back(std::stod(tok));
        if (row.size() < 3)
            throw std::runtime_error("observation log line " + std::to_string(lineno) +
                                     ": expected t and at least two values");
        const size_t nch = row.size() - 1;
        const int K = static_cast<int>(std::lround(std::sqrt(nch / 2.0)));
        if (2 * static_cast<size_t>(K) * K != nch)
            throw std::runtime_error("observation log line " + std::to_string(lineno) +
                                     ": channel count is not of the form 2*K^2");
        if (!log.times.empty() && row[0] <= log.times.back())
            throw std::runtime_error("observation log line " + std::to_string(lineno) +
                                     ": times must be strictly increasing");
        ObservationVector ov;
        ov.K = K;
        ov.kind = kind;
        ov.values.assign(row.begin() + 1, row.end());
        log.times.push_back(row[0]);
        log.obs.push_back(std::move(ov));
    }
    return log;
}

} // namespace nsda
