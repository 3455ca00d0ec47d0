#pragma once

#include <array>
#include <cmath>
#include <complex>

#include "belh/grid.hpp"
#include "belh/transforms.hpp"

namespace belh {

// ---------------------------------------------------------------------------
// Spectral differential operators. All act mode-by-mode on r2c arrays and are
// exact on resolved trigonometric polynomials.
// ---------------------------------------------------------------------------

/// out = d(in)/dx_axis  (symbol i*k_axis)
inline void deriv_spec(const Grid& g, const CplxVec& in, int axis, CplxVec& out) {
    const std::complex<double> I(0.0, 1.0);
    std::size_t s = 0;
    for (int i = 0; i < g.n; ++i) {
        const double ki = g.wavenumber(i);
        for (int j = 0; j < g.n; ++j) {
            const double kj = g.wavenumber(j);
            for (int k = 0; k < g.nz_spec(); ++k, ++s) {
                const double kk = k / g.box_radius;
                const double ka = axis == 0 ? ki : (axis == 1 ? kj : kk);
                out[s] = I * ka * in[s];
            }
        }
    }
}

/// out = lap(in)  (symbol -|k|^2)
inline void laplacian_spec(const Grid& g, const CplxVec& in, CplxVec& out) {
    std::size_t s = 0;
    for (int i = 0; i < g.n; ++i) {
        const double ki = g.wavenumber(i);
        for (int j = 0; j < g.n; ++j) {
            const double kj = g.wavenumber(j);
            for (int k = 0; k < g.nz_spec(); ++k, ++s) {
                const double kk = k / g.box_radius;
                out[s] = -(ki * ki + kj * kj + kk * kk) * in[s];
            }
        }
    }
}

/// out = lap(lap(in))  (symbol |k|^4)
inline void biharmonic_spec(const Grid& g, const CplxVec& in, CplxVec& out) {
    std::size_t s = 0;
    for (int i = 0; i < g.n; ++i) {
        const double ki = g.wavenumber(i);
        for (int j = 0; j < g.n; ++j) {
            const double kj = g.wavenumber(j);
            for (int k = 0; k < g.nz_spec(); ++k, ++s) {
                const double kk = k / g.box_radius;
                const double k2 = ki * ki + kj * kj + kk * kk;
                out[s] = k2 * k2 * in[s];
            }
        }
    }
}

/// out = div(u)  for a spectral vector field
inline void divergence_spec(const Grid& g, const std::array<const CplxVec*, 3>& u,
                            CplxVec& out) {
    const std::complex<double> I(0.0, 1.0);
    std::size_t s = 0;
    for (int i = 0; i < g.n; ++i) {
        const double ki = g.wavenumber(i);
        for (int j = 0; j < g.n; ++j) {
            const double kj = g.wavenumber(j);
            for (int k = 0; k < g.nz_spec(); ++k, ++s) {
                const double kk = k / g.box_radius;
                out[s] = I * (ki * (*u[0])[s] + kj * (*u[1])[s] + kk * (*u[2])[s]);
            }
        }
    }
}

/// In-place Leray projection u -> u - k (k.u)/|k|^2. The zero mode (mean
/// velocity) is left untouched. The projected field is divergence-free to
/// rounding and the operation is idempotent.
inline void leray_project_spec(const Grid& g, CplxVec& ux, CplxVec& uy, CplxVec& uz) {
    std::size_t s = 0;
    for (int i = 0; i < g.n; ++i) {
        const double ki = g.wavenumber(i);
        for (int j = 0; j < g.n; ++j) {
            const double kj = g.wavenumber(j);
            for (int k = 0; k < g.nz_spec(); ++k, ++s) {
                const double kk = k / g.box_radius;
                const double k2 = ki * ki + kj * kj + kk * kk;
                if (k2 == 0.0) continue;
                const std::complex<double> kdotu =
                    (ki * ux[s] + kj * uy[s] + kk * uz[s]) / k2;
                ux[s] -= ki * kdotu;
                uy[s] -= kj * kdotu;
                uz[s] -= kk * kdotu;
            }
        }
    }
}

/// In-place 2/3-rule dealiasing; idempotent.
inline void dealias_spec(const Grid& g, CplxVec& f) {
    std::size_t s = 0;
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j)
            for (int k = 0; k < g.nz_spec(); ++k, ++s)
                if (!g.dealias_keep(i, j, k)) f[s] = 0.0;
}

inline void zero_mean_spec(CplxVec& f) { f[0] = 0.0; }

// ---------------------------------------------------------------------------
// Reductions. Physical-space quadrature uses the uniform cell volume (exact
// for periodic trigonometric polynomials); spectral norms use the r2c
// conjugate-pair weights. Accumulation order is fixed, so results are
// bit-reproducible for a given binary and seed.
// ---------------------------------------------------------------------------

inline double integral_phys(const Grid& g, const RealVec& f) {
    double s = 0.0;
    for (double v : f) s += v;
    return s * g.cell_volume();
}

inline double inner_phys(const Grid& g, const RealVec& f, const RealVec& h) {
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * h[i];
    return s * g.cell_volume();
}

inline double l2_norm_sq_phys(const Grid& g, const RealVec& f) { return inner_phys(g, f, f); }

inline double l2_norm_sq_spec(const Grid& g, const CplxVec& f) {
    double s = 0.0;
    std::size_t idx = 0;
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j)
            for (int k = 0; k < g.nz_spec(); ++k, ++idx) s += g.spec_weight(k) * std::norm(f[idx]);
    return s * g.volume();
}

inline double max_abs(const RealVec& f) {
    double m = 0.0;
    for (double v : f) m = std::max(m, std::abs(v));
    return m;
}

/// ||div u|| / ||grad u|| for a spectral velocity; the constraint metric of
/// the projected state.
inline double divergence_ratio_spec(const Grid& g, const CplxVec& ux, const CplxVec& uy,
                                    const CplxVec& uz) {
    double div2 = 0.0, grad2 = 0.0;
    std::size_t s = 0;
    for (int i = 0; i < g.n; ++i) {
        const double ki = g.wavenumber(i);
        for (int j = 0; j < g.n; ++j) {
            const double kj = g.wavenumber(j);
            for (int k = 0; k < g.nz_spec(); ++k, ++s) {
                const double kk = k / g.box_radius;
                const double w = g.spec_weight(k);
                const double k2 = ki * ki + kj * kj + kk * kk;
                const std::complex<double> d = ki * ux[s] + kj * uy[s] + kk * uz[s];
                div2 += w * std::norm(d);
                grad2 += w * k2 * (std::norm(ux[s]) + std::norm(uy[s]) + std::norm(uz[s]));
            }
        }
    }
    return grad2 > 0.0 ? std::sqrt(div2 / grad2) : 0.0;
}

// ---------------------------------------------------------------------------
// Pressure recovery: -lap(p) = d_i d_j (u_i u_j - stress_ij) with mean-free
// gauge. Inputs are physical-space fields; the quadratic source is assembled
// pointwise and solved mode-by-mode.
// ---------------------------------------------------------------------------
inline void solve_pressure(const Fft& fft, const std::array<const RealVec*, 3>& u,
                           const std::array<const RealVec*, 9>& stress, CplxVec& p_spec) {
    const Grid& g = fft.grid();
    RealVec w(g.npts());
    CplxVec what(g.nspec());
    std::vector<CplxVec> src;
    src.reserve(6);
    // assemble the six independent components of u_i u_j - stress symmetric part
    // (the skew part of the stress has vanishing double divergence, but is kept)
    for (int i = 0; i < 3; ++i)
        for (int j = i; j < 3; ++j) {
            for (std::size_t s = 0; s < g.npts(); ++s) {
                double uij = (*u[i])[s] * (*u[j])[s];
                double tij = stress[3 * i + j] ? (*stress[3 * i + j])[s] : 0.0;
                double tji = stress[3 * j + i] ? (*stress[3 * j + i])[s] : 0.0;
                w[s] = uij - 0.5 * (tij + tji);
            }
            src.push_back(fft.forward(w));
        }
    auto comp = [&](int i, int j) -> const CplxVec& {
        static const int map[3][3] = {{0, 1, 2}, {1, 3, 4}, {2, 4, 5}};
        return src[map[i][j]];
    };
    std::size_t s = 0;
    for (int i = 0; i < g.n; ++i) {
        const double ki = g.wavenumber(i);
        for (int j = 0; j < g.n; ++j) {
            const double kj = g.wavenumber(j);
            for (int k = 0; k < g.nz_spec(); ++k, ++s) {
                const double kk = k / g.box_radius;
                const double kv[3] = {ki, kj, kk};
                const double k2 = ki * ki + kj * kj + kk * kk;
                if (k2 == 0.0) {
                    p_spec[s] = 0.0;
                    continue;
                }
                std::complex<double> num(0.0, 0.0);
                for (int a = 0; a < 3; ++a)
                    for (int b = 0; b < 3; ++b) num += kv[a] * kv[b] * comp(a, b)[s];
                // -lap(p) = d_i d_j w_ij: |k|^2 p = (i k_i)(i k_j) w = -k_i k_j w
                p_spec[s] = -num / k2;
            }
        }
    }
}

}  // namespace belh
