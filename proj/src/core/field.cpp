#include "nsda/field.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

#include "nsda/fft.hpp"

namespace nsda {

namespace {

void require_same_grid(const SpectralField& a, const SpectralField& b) {
    if (a.grid() != b.grid())
        throw std::invalid_argument("field operation: grid mismatch");
}

// Scratch buffers for the pseudospectral advective term, reused per thread.
struct AdvectWorkspace {
    std::vector<Complex> u1, u2, t1, t2;
    void resize(size_t n) {
        u1.resize(n);
        u2.resize(n);
        t1.resize(n);
        t2.resize(n);
    }
};

AdvectWorkspace& workspace_for(int M) {
    thread_local std::map<int, AdvectWorkspace> pool;
    auto& ws = pool[M];
    ws.resize(static_cast<size_t>(M) * M);
    return ws;
}

} // namespace

SpectralField::SpectralField(GridPtr grid)
    : grid_(std::move(grid)),
      n_per_comp_(static_cast<size_t>(grid_->modes()) * grid_->modes()),
      coeffs_(2 * n_per_comp_, Complex(0.0, 0.0)) {}

void SpectralField::set_zero() {
    std::fill(coeffs_.begin(), coeffs_.end(), Complex(0.0, 0.0));
}

SpectralField& SpectralField::operator+=(const SpectralField& o) {
    require_same_grid(*this, o);
    for (size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
    return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& o) {
    require_same_grid(*this, o);
    for (size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
    return *this;
}

SpectralField& SpectralField::operator*=(double s) {
    for (auto& c : coeffs_) c *= s;
    return *this;
}

void SpectralField::axpy(double a, const SpectralField& x) {
    require_same_grid(*this, x);
    for (size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += a * x.coeffs_[i];
}

void SpectralField::leray_project() {
    const int M = grid_->modes();
    Complex* c1 = component(0);
    Complex* c2 = component(1);

    // Project onto k-perp, zero the mean mode and everything outside the
    // retained disk.
    for (int a1 = 0; a1 < M; ++a1) {
        const double k1 = grid_->k_of(a1);
        for (int a2 = 0; a2 < M; ++a2) {
            const size_t i = static_cast<size_t>(a1) * M + a2;
            if (!grid_->retained(a1, a2) || (a1 == 0 && a2 == 0)) {
                c1[i] = Complex(0.0, 0.0);
                c2[i] = Complex(0.0, 0.0);
                continue;
            }
            const double k2 = grid_->k_of(a2);
            const double kk = grid_->ksq(a1, a2);
            const Complex kdotu = k1 * c1[i] + k2 * c2[i];
            c1[i] -= k1 * kdotu / kk;
            c2[i] -= k2 * kdotu / kk;
        }
    }

    // Re-impose conjugate symmetry exactly by pairwise averaging.
    for (int a1 = 0; a1 < M; ++a1) {
        const int b1 = (M - a1) % M;
        for (int a2 = 0; a2 < M; ++a2) {
            const int b2 = (M - a2) % M;
            const size_t i = static_cast<size_t>(a1) * M + a2;
            const size_t j = static_cast<size_t>(b1) * M + b2;
            if (j < i) continue;
            for (Complex* c : {c1, c2}) {
                if (i == j) {
                    c[i] = Complex(c[i].real(), 0.0);
                } else {
                    const Complex avg = 0.5 * (c[i] + std::conj(c[j]));
                    c[i] = avg;
                    c[j] = std::conj(avg);
                }
            }
        }
    }
}

void SpectralField::apply_stokes_power(double alpha) {
    const int M = grid_->modes();
    for (int comp = 0; comp < 2; ++comp) {
        Complex* c = component(comp);
        for (int a1 = 0; a1 < M; ++a1) {
            for (int a2 = 0; a2 < M; ++a2) {
                const size_t i = static_cast<size_t>(a1) * M + a2;
                if (a1 == 0 && a2 == 0) {
                    c[i] = Complex(0.0, 0.0);
                    continue;
                }
                const double kk = grid_->ksq(a1, a2);
                double w;
                if (alpha == 0.0) w = 1.0;
                else if (alpha == 1.0) w = kk;
                else if (alpha == 0.5) w = std::sqrt(kk);
                else if (alpha == -1.0) w = 1.0 / kk;
                else w = std::pow(kk, alpha);
                c[i] *= w;
            }
        }
    }
}

double SpectralField::norm_dalpha(double alpha) const {
    const int M = grid_->modes();
    const double L2 = grid_->length() * grid_->length();
    double sum = 0.0;
    for (int comp = 0; comp < 2; ++comp) {
        const Complex* c = component(comp);
        for (int a1 = 0; a1 < M; ++a1) {
            for (int a2 = 0; a2 < M; ++a2) {
                const size_t i = static_cast<size_t>(a1) * M + a2;
                if (a1 == 0 && a2 == 0) continue;
                const double kk = grid_->ksq(a1, a2);
                const double w = alpha == 0.0 ? 1.0
                               : alpha == 1.0 ? kk * kk
                               : alpha == 0.5 ? kk
                               : std::pow(kk, 2.0 * alpha);
                sum += w * std::norm(c[i]);
            }
        }
    }
    return std::sqrt(L2 * sum);
}

double SpectralField::norm(Space space) const {
    switch (space) {
    case Space::H: return norm_dalpha(0.0);
    case Space::V: return norm_dalpha(0.5);
    case Space::DA: return norm_dalpha(1.0);
    case Space::L4: {
        const int M = grid_->modes();
        const auto u1 = to_physical(0);
        const auto u2 = to_physical(1);
        double sum = 0.0;
        for (size_t i = 0; i < u1.size(); ++i) {
            const double m2 = u1[i] * u1[i] + u2[i] * u2[i];
            sum += m2 * m2;
        }
        const double L2 = grid_->length() * grid_->length();
        return std::pow(sum * L2 / (static_cast<double>(M) * M), 0.25);
    }
    case Space::Linf: {
        const auto u1 = to_physical(0);
        const auto u2 = to_physical(1);
        double mx = 0.0;
        for (size_t i = 0; i < u1.size(); ++i)
            mx = std::max(mx, u1[i] * u1[i] + u2[i] * u2[i]);
        return std::sqrt(mx);
    }
    }
    return 0.0;
}

std::array<double, 2> SpectralField::evaluate_at(double x1, double x2) const {
    const int M = grid_->modes();
    const double L = grid_->length();
    x1 -= L * std::floor(x1 / L);
    x2 -= L * std::floor(x2 / L);

    std::vector<Complex> e1(M), e2(M);
    for (int a = 0; a < M; ++a) {
        e1[a] = std::polar(1.0, grid_->k_of(a) * x1);
        e2[a] = std::polar(1.0, grid_->k_of(a) * x2);
    }
    Complex s1(0.0, 0.0), s2(0.0, 0.0);
    const Complex* c1 = component(0);
    const Complex* c2 = component(1);
    for (int a1 = 0; a1 < M; ++a1) {
        Complex r1(0.0, 0.0), r2(0.0, 0.0);
        const size_t base = static_cast<size_t>(a1) * M;
        for (int a2 = 0; a2 < M; ++a2) {
            r1 += c1[base + a2] * e2[a2];
            r2 += c2[base + a2] * e2[a2];
        }
        s1 += r1 * e1[a1];
        s2 += r2 * e1[a1];
    }
    return {s1.real(), s2.real()};
}

std::vector<std::array<double, 2>> SpectralField::evaluate_at_points(
    const std::vector<std::array<double, 2>>& pts) const {
    std::vector<std::array<double, 2>> out;
    out.reserve(pts.size());
    for (const auto& p : pts) out.push_back(evaluate_at(p[0], p[1]));
    return out;
}

std::vector<double> SpectralField::to_physical(int comp) const {
    const int M = grid_->modes();
    std::vector<Complex> buf(component(comp), component(comp) + n_per_comp_);
    fft::backward(buf, M);
    std::vector<double> out(n_per_comp_);
    for (size_t i = 0; i < out.size(); ++i) out[i] = buf[i].real();
    return out;
}

double SpectralField::max_divergence() const {
    const int M = grid_->modes();
    double max_div = 0.0, max_coeff = 0.0;
    const Complex* c1 = component(0);
    const Complex* c2 = component(1);
    for (int a1 = 0; a1 < M; ++a1) {
        const double k1 = grid_->k_of(a1);
        for (int a2 = 0; a2 < M; ++a2) {
            const size_t i = static_cast<size_t>(a1) * M + a2;
            const double k2 = grid_->k_of(a2);
            max_div = std::max(max_div, std::abs(k1 * c1[i] + k2 * c2[i]));
            max_coeff = std::max({max_coeff, std::abs(c1[i]), std::abs(c2[i])});
        }
    }
    return max_coeff > 0.0 ? max_div / max_coeff : 0.0;
}

double SpectralField::mean_magnitude() const {
    return std::max(std::abs(at(0, 0, 0)), std::abs(at(1, 0, 0)));
}

bool SpectralField::finite() const {
    for (const auto& c : coeffs_)
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
    return true;
}

double inner_weighted(const SpectralField& u, const SpectralField& v, double alpha) {
    require_same_grid(u, v);
    const int M = u.grid().modes();
    const double L2 = u.grid().length() * u.grid().length();
    double sum = 0.0;
    for (int comp = 0; comp < 2; ++comp) {
        const Complex* cu = u.component(comp);
        const Complex* cv = v.component(comp);
        for (int a1 = 0; a1 < M; ++a1) {
            for (int a2 = 0; a2 < M; ++a2) {
                const size_t i = static_cast<size_t>(a1) * M + a2;
                if (a1 == 0 && a2 == 0) continue;
                const double kk = u.grid().ksq(a1, a2);
                const double w = alpha == 0.0 ? 1.0
                               : alpha == 1.0 ? kk
                               : alpha == 0.5 ? std::sqrt(kk)
                               : std::pow(kk, 2.0 * alpha);
                sum += w * (cu[i] * std::conj(cv[i])).real();
            }
        }
    }
    return L2 * sum;
}

double inner_h(const SpectralField& u, const SpectralField& v) {
    return inner_weighted(u, v, 0.0);
}

double inner_v(const SpectralField& u, const SpectralField& v) {
    return inner_weighted(u, v, 0.5);
}

SpectralField leray_project(GridPtr grid, const std::vector<Complex>& raw) {
    SpectralField f(std::move(grid));
    if (raw.size() != f.coeffs().size())
        throw std::invalid_argument("leray_project: coefficient array size mismatch");
    f.coeffs() = raw;
    f.leray_project();
    return f;
}

SpectralField stokes_power(const SpectralField& u, double alpha) {
    SpectralField out = u;
    out.apply_stokes_power(alpha);
    return out;
}

SpectralField bilinear(const SpectralField& u, const SpectralField& v) {
    require_same_grid(u, v);
    const int M = u.grid().modes();
    const size_t n = static_cast<size_t>(M) * M;
    auto& ws = workspace_for(M);

    // Advecting velocity in physical space.
    std::copy(u.component(0), u.component(0) + n, ws.u1.begin());
    std::copy(u.component(1), u.component(1) + n, ws.u2.begin());
    fft::backward(ws.u1, M);
    fft::backward(ws.u2, M);

    SpectralField out(u.grid_ptr());
    const double inv_n = 1.0 / static_cast<double>(n);

    for (int comp = 0; comp < 2; ++comp) {
        const Complex* vc = v.component(comp);
        // Spectral derivatives of v_comp, then to physical space.
        for (int a1 = 0; a1 < M; ++a1) {
            const double k1 = u.grid().k_of(a1);
            for (int a2 = 0; a2 < M; ++a2) {
                const size_t i = static_cast<size_t>(a1) * M + a2;
                const double k2 = u.grid().k_of(a2);
                const Complex ik(0.0, 1.0);
                ws.t1[i] = ik * k1 * vc[i];
                ws.t2[i] = ik * k2 * vc[i];
            }
        }
        fft::backward(ws.t1, M);
        fft::backward(ws.t2, M);

        // (u . grad) v_comp on the grid, back to coefficients.
        Complex* oc = out.component(comp);
        for (size_t i = 0; i < n; ++i) {
            const double w = ws.u1[i].real() * ws.t1[i].real() +
                             ws.u2[i].real() * ws.t2[i].real();
            oc[i] = Complex(w, 0.0);
        }
        fft::forward(oc, M);
        for (size_t i = 0; i < n; ++i) oc[i] *= inv_n;
    }

    out.leray_project();
    return out;
}

namespace {

// Fill canonical half-spectrum modes through `emit(a1, a2, j1, j2)` and mirror
// with conjugate symmetry afterwards.
template <typename F>
void for_canonical_modes(const WaveGrid& g, F&& emit) {
    const int M = g.modes();
    for (int a1 = 0; a1 < M; ++a1) {
        const int j1 = g.index_to_j(a1);
        for (int a2 = 0; a2 < M; ++a2) {
            const int j2 = g.index_to_j(a2);
            if (a1 == 0 && a2 == 0) continue;
            if (!g.retained(a1, a2)) continue;
            const bool canonical = j1 > 0 || (j1 == 0 && j2 > 0);
            if (!canonical) continue;
            emit(a1, a2, j1, j2);
        }
    }
}

void mirror_conjugate(SpectralField& f) {
    const int M = f.grid().modes();
    for (int comp = 0; comp < 2; ++comp) {
        Complex* c = f.component(comp);
        for (int a1 = 0; a1 < M; ++a1) {
            const int b1 = (M - a1) % M;
            for (int a2 = 0; a2 < M; ++a2) {
                const int j1 = f.grid().index_to_j(a1);
                const int j2 = f.grid().index_to_j(a2);
                const bool canonical = j1 > 0 || (j1 == 0 && j2 > 0);
                if (!canonical) continue;
                const int b2 = (M - a2) % M;
                c[static_cast<size_t>(b1) * M + b2] =
                    std::conj(c[static_cast<size_t>(a1) * M + a2]);
            }
        }
    }
}

} // namespace

SpectralField random_divfree_field(GridPtr grid, std::uint64_t seed,
                                   rng::Purpose purpose, std::uint32_t stream,
                                   double decay, int jmax, double norm_h) {
    SpectralField f(grid);
    const int M = grid->modes();
    for_canonical_modes(*grid, [&](int a1, int a2, int j1, int j2) {
        const std::int64_t jsq =
            static_cast<std::int64_t>(j1) * j1 + static_cast<std::int64_t>(j2) * j2;
        if (jsq > static_cast<std::int64_t>(jmax) * jmax) return;
        rng::Draw d{seed, purpose, stream, 0,
                    static_cast<std::uint32_t>(a1 * M + a2)};
        const auto [g1, g2] = rng::gaussian_pair(d);
        const double amp = std::pow(static_cast<double>(jsq), -0.5 * decay);
        const Complex coeff = amp * Complex(g1, g2);
        // Divergence-free direction k-perp / |k|.
        const double k1 = grid->k_of(a1), k2 = grid->k_of(a2);
        const double kn = std::sqrt(k1 * k1 + k2 * k2);
        f.at(0, a1, a2) = coeff * (-k2 / kn);
        f.at(1, a1, a2) = coeff * (k1 / kn);
    });
    mirror_conjugate(f);
    if (norm_h > 0.0) {
        const double h = f.norm(Space::H);
        if (h > 0.0) f *= norm_h / h;
    }
    return f;
}

SpectralField random_blob_field(GridPtr grid, std::uint64_t seed,
                                rng::Purpose purpose, std::uint32_t stream,
                                int n_blobs, double norm_h) {
    const int M = grid->modes();
    const double L = grid->length();
    const size_t n = static_cast<size_t>(M) * M;
    std::vector<Complex> u1(n, Complex(0, 0)), u2(n, Complex(0, 0));

    const double dx = L / M;
    for (int b = 0; b < n_blobs; ++b) {
        rng::Draw d{seed, purpose, stream, static_cast<std::uint32_t>(b), 0};
        const auto [r1, r2] = rng::uniform_pair(d);
        rng::Draw d2 = d;
        d2.index = 1;
        const auto [r3, r4] = rng::uniform_pair(d2);
        const double cx = r1 * L;
        const double cy = r2 * L;
        // Blob radius between 4 grid cells and L/8, log-uniform.
        const double dmin = 4.0 * dx, dmax = L / 8.0;
        const double delta = dmin * std::pow(dmax / dmin, r3);
        const double amp = (r4 < 0.5 ? -1.0 : 1.0);

        // Velocity = amp/delta * grad-perp of bump(((x-c)/delta)), evaluated
        // on grid points inside the support (periodically wrapped).
        const int reach = static_cast<int>(std::ceil(delta / dx)) + 1;
        const int ic = static_cast<int>(std::floor(cx / dx));
        const int jc = static_cast<int>(std::floor(cy / dx));
        for (int i = ic - reach; i <= ic + reach; ++i) {
            const double x = i * dx;
            for (int j = jc - reach; j <= jc + reach; ++j) {
                const double y = j * dx;
                double z1 = (x - cx) / delta, z2 = (y - cy) / delta;
                const double r2b = z1 * z1 + z2 * z2;
                if (r2b >= 1.0) continue;
                const double denom = 1.0 - r2b;
                const double bump = std::exp(-1.0 / denom);
                const double gscale = -2.0 * bump / (denom * denom);
                const double g1 = gscale * z1, g2 = gscale * z2;
                const int ii = ((i % M) + M) % M;
                const int jj = ((j % M) + M) % M;
                const size_t idx = static_cast<size_t>(ii) * M + jj;
                u1[idx] += Complex(amp / delta * (-g2), 0.0);
                u2[idx] += Complex(amp / delta * (g1), 0.0);
            }
        }
    }

    fft::forward(u1, M);
    fft::forward(u2, M);
    const double inv_n = 1.0 / static_cast<double>(n);
    SpectralField f(grid);
    for (size_t i = 0; i < n; ++i) {
        f.component(0)[i] = u1[i] * inv_n;
        f.component(1)[i] = u2[i] * inv_n;
    }
    f.leray_project();
    if (norm_h > 0.0) {
        const double h = f.norm(Space::H);
        if (h > 0.0) f *= norm_h / h;
    }
    return f;
}

SpectralField make_shell_forcing(GridPtr grid, std::uint64_t seed,
                                 double norm_h, int shell_min, int shell_max) {
    SpectralField f(grid);
    const int M = grid->modes();
    for_canonical_modes(*grid, [&](int a1, int a2, int j1, int j2) {
        const std::int64_t jsq =
            static_cast<std::int64_t>(j1) * j1 + static_cast<std::int64_t>(j2) * j2;
        if (jsq < static_cast<std::int64_t>(shell_min) * shell_min ||
            jsq > static_cast<std::int64_t>(shell_max) * shell_max)
            return;
        rng::Draw d{seed, rng::Purpose::forcing, 0, 0,
                    static_cast<std::uint32_t>(a1 * M + a2)};
        const auto [g1, g2] = rng::gaussian_pair(d);
        const Complex coeff(g1, g2);
        const double k1 = grid->k_of(a1), k2 = grid->k_of(a2);
        const double kn = std::sqrt(k1 * k1 + k2 * k2);
        f.at(0, a1, a2) = coeff * (-k2 / kn);
        f.at(1, a1, a2) = coeff * (k1 / kn);
    });
    mirror_conjugate(f);
    const double h = f.norm(Space::H);
    if (h > 0.0) f *= norm_h / h;
    return f;
}

} // namespace nsda
