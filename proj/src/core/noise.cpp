#include "nsda/noise.hpp"

#include <cmath>
#include <stdexcept>

namespace nsda {

std::vector<double> sample_increments(double dt, const NoiseModel& model,
                                      std::uint32_t member, std::uint32_t step) {
    if (!(dt > 0.0)) throw std::invalid_argument("sample_increments: dt must be > 0");
    std::vector<double> out(model.channels, 0.0);
    if (model.sigma_sq == 0.0) return out;
    const double scale = std::sqrt(dt * model.sigma_sq / 2.0);
    for (int p = 0; 2 * p < model.channels; ++p) {
        rng::Draw d{model.seed, rng::Purpose::observation_noise, member, step,
                    static_cast<std::uint32_t>(p)};
        const auto [g1, g2] = rng::gaussian_pair(d);
        out[2 * p] = scale * g1;
        if (2 * p + 1 < model.channels) out[2 * p + 1] = scale * g2;
    }
    return out;
}

SpectralField lift_increment(const std::vector<double>& dbeta,
                             const InterpolantBasis& basis) {
    if (static_cast<int>(dbeta.size()) != 2 * basis.K * basis.K)
        throw std::invalid_argument("lift_increment: increment dimension " +
                                    std::to_string(dbeta.size()) +
                                    " does not match basis dimension " +
                                    std::to_string(2 * basis.K * basis.K));
    ObservationVector zeta;
    zeta.K = basis.K;
    zeta.values = dbeta;
    return interpolate(zeta, basis);
}

WienerStats covariance_traces(const InterpolantBasis& basis, double sigma_sq,
                              Fidelity fidelity) {
    WienerStats s;
    s.basis_kind = basis.kind;
    s.fidelity = fidelity;
    const double D = 2.0 * basis.K * basis.K;
    if (fidelity == Fidelity::simulation) {
        s.trace_q = 0.5 * sigma_sq * D * basis.gamma_h_sq_sim;
        // Finite for both kinds at simulation fidelity: the retained disk
        // truncates the step basis's divergent gradient energy.
        s.trace_ahalf_q = 0.5 * sigma_sq * D * basis.gamma_v_sq_sim;
    } else {
        s.trace_q = 0.5 * sigma_sq * D * basis.gamma_h_sq_cons;
        s.trace_ahalf_q = 0.5 * sigma_sq * D * basis.gamma_v_sq_cons;
    }
    return s;
}

double trace_ahalf_q_checked(const InterpolantBasis& basis, double sigma_sq,
                             Fidelity fidelity) {
    if (basis.kind == BasisKind::step && fidelity == Fidelity::construction)
        throw std::invalid_argument(
            "trace[A^1/2 Q A^1/2] is infinite for the step basis: the step "
            "functions are not in H^1; use the mollified basis");
    return covariance_traces(basis, sigma_sq, fidelity).trace_ahalf_q;
}

std::vector<ModeMass> trace_mass_by_mode(const InterpolantBasis& basis,
                                         double sigma_sq) {
    const WaveGrid& g = *basis.grid;
    const int M = g.modes();
    const double L2 = g.length() * g.length();
    const double N = static_cast<double>(basis.K) * basis.K;
    std::vector<ModeMass> out;
    for (int a1 = 0; a1 < M; ++a1) {
        for (int a2 = 0; a2 < M; ++a2) {
            if (!g.retained(a1, a2) || (a1 == 0 && a2 == 0)) continue;
            const size_t i = static_cast<size_t>(a1) * M + a2;
            const double p2 = std::norm(basis.profile[i]);
            if (p2 == 0.0) continue;
            ModeMass m;
            m.a1 = a1;
            m.a2 = a2;
            m.lambda = g.ksq(a1, a2);
            // sum_d |gamma_d_hat(k)|^2 = N |profile(k)|^2: the x- and
            // y-channel projections of the translated profile add up to the
            // full coefficient magnitude.
            m.sum_gamma_sq = L2 * N * p2;
            m.mass = 0.5 * sigma_sq * m.sum_gamma_sq;
            out.push_back(m);
        }
    }
    return out;
}

SpectralField ou_step(const SpectralField& z, double dt, double nu, double mu,
                      const SpectralField& dW) {
    if (!(dt > 0.0)) throw std::invalid_argument("ou_step: dt must be > 0");
    if (z.grid() != dW.grid())
        throw std::invalid_argument("ou_step: grid mismatch between z and dW");
    const WaveGrid& g = z.grid();
    const int M = g.modes();
    SpectralField out(z.grid_ptr());
    for (int comp = 0; comp < 2; ++comp) {
        const Complex* zc = z.component(comp);
        const Complex* wc = dW.component(comp);
        Complex* oc = out.component(comp);
        for (int a1 = 0; a1 < M; ++a1) {
            for (int a2 = 0; a2 < M; ++a2) {
                if (!g.retained(a1, a2) || (a1 == 0 && a2 == 0)) continue;
                const size_t i = static_cast<size_t>(a1) * M + a2;
                const double x = nu * g.ksq(a1, a2) * dt;
                const double decay = std::exp(-x);
                // g(x)^2 = (1 - e^{-2x}) / (2x); stable via expm1 for small x.
                const double gfac = std::sqrt(-std::expm1(-2.0 * x) / (2.0 * x));
                oc[i] = decay * zc[i] + mu * gfac * wc[i];
            }
        }
    }
    return out;
}

} // namespace nsda
