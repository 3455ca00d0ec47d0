#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "belh/checkpoint.hpp"
#include "belh/field.hpp"
#include "belh/spectral_ops.hpp"

namespace belh {

enum class InitKind { Zero, Random, Uniaxial, Localized, Checkpoint };

struct InitialData {
    InitKind kind = InitKind::Random;
    unsigned long seed = 1;
    double u_norm = 0.5;         ///< target L2 norm of the velocity (Random)
    double q_norm = 0.5;         ///< target L2 norm of the Q field (Random)
    double spectrum_k0 = 2.0;    ///< spectral peak of the seeded random data
    double uniaxial_amplitude = 0.1;
    int uniaxial_mode = 1;
    double localized_width = 1.0;
    double localized_u_amp = 1.0;
    double localized_q_amp = 0.5;
    std::string checkpoint_path;
};

namespace detail {

/// White noise shaped so |f_hat(k)|^2 ~ k^2 exp(-(k/k0)^2); mean-free.
inline void shape_spectrum(const Grid& g, double k0, CplxVec& spec) {
    std::size_t s = 0;
    for (int i = 0; i < g.n; ++i) {
        const double ki = g.wavenumber(i);
        for (int j = 0; j < g.n; ++j) {
            const double kj = g.wavenumber(j);
            for (int k = 0; k < g.nz_spec(); ++k, ++s) {
                const double kk = k / g.box_radius;
                const double kmag = std::sqrt(ki * ki + kj * kj + kk * kk);
                spec[s] *= kmag * std::exp(-0.5 * (kmag / k0) * (kmag / k0));
            }
        }
    }
}

inline void fill_noise(RealVec& f, std::mt19937_64& eng) {
    std::normal_distribution<double> dist(0.0, 1.0);
    for (auto& v : f) v = dist(eng);
}

}  // namespace detail

/// Build the initial state described by `init` on the given grid. The
/// returned state is dealiased, has a divergence-free velocity, and carries
/// valid physical and spectral views.
inline FieldSet make_initial_state(const Fft& fft, const InitialData& init) {
    const Grid& g = fft.grid();
    FieldSet state(g);

    switch (init.kind) {
        case InitKind::Zero:
            break;

        case InitKind::Random: {
            std::mt19937_64 eng(init.seed);
            RealVec noise(g.npts());
            for (auto& f : state.q) {
                detail::fill_noise(noise, eng);
                fft.forward(noise, f.spec);
                detail::shape_spectrum(g, init.spectrum_k0, f.spec);
                f.mark_spec();
            }
            for (auto& f : state.u) {
                detail::fill_noise(noise, eng);
                fft.forward(noise, f.spec);
                detail::shape_spectrum(g, init.spectrum_k0, f.spec);
                f.mark_spec();
            }
            break;
        }

        case InitKind::Uniaxial: {
            // Q = amp * sin(m x1 / R) A0, u = 0
            auto& c0 = state.q[0];
            for (int i = 0; i < g.n; ++i) {
                const double v =
                    kSqrt6 * init.uniaxial_amplitude *
                    std::sin(double(init.uniaxial_mode) * g.x(i) / g.box_radius);
                for (int j = 0; j < g.n; ++j)
                    for (int k = 0; k < g.n; ++k) c0.phys[g.phys_index(i, j, k)] = v;
            }
            c0.mark_phys();
            break;
        }

        case InitKind::Localized: {
            // Gaussian-enveloped blobs around the box center. The Q profile
            // (1 - r^2/(3 w^2)) exp(-r^2/(2 w^2)) has zero spatial mean, so
            // on the torus the far field carries no constant offset and the
            // tail energies decay the way the whole-space setting suggests.
            // The velocity is an exactly solenoidal swirl.
            const double cx = 0.5 * g.side(), w2 = init.localized_width * init.localized_width;
            for (int i = 0; i < g.n; ++i)
                for (int j = 0; j < g.n; ++j)
                    for (int k = 0; k < g.n; ++k) {
                        const double dx = g.x(i) - cx, dy = g.x(j) - cx, dz = g.x(k) - cx;
                        const double r2 = dx * dx + dy * dy + dz * dz;
                        const double bump = std::exp(-0.5 * r2 / w2);
                        const double hat = (1.0 - r2 / (3.0 * w2)) * bump;
                        const std::size_t s = g.phys_index(i, j, k);
                        state.q[0].phys[s] = init.localized_q_amp * hat;
                        state.q[2].phys[s] = 0.4 * init.localized_q_amp * hat;
                        state.u[0].phys[s] = -init.localized_u_amp * dy * bump / init.localized_width;
                        state.u[1].phys[s] = init.localized_u_amp * dx * bump / init.localized_width;
                        state.u[2].phys[s] = 0.0;
                    }
            for (auto& f : state.q) f.mark_phys();
            for (auto& f : state.u) f.mark_phys();
            break;
        }

        case InitKind::Checkpoint: {
            CheckpointHeader h;
            FieldSet loaded = read_checkpoint(init.checkpoint_path, &h);
            if (!(loaded.grid == g))
                throw std::runtime_error("initial state: checkpoint grid does not match config");
            // A checkpoint stores the canonical (dealiased, projected)
            // physical view; re-normalizing here would break bit-exact
            // restarts.
            loaded.u_projected = true;
            return loaded;
        }
    }

    state.ensure_spec(fft);
    for (auto& f : state.q) dealias_spec(g, f.spec);
    for (auto& f : state.u) dealias_spec(g, f.spec);
    leray_project_spec(g, state.u[0].spec, state.u[1].spec, state.u[2].spec);
    zero_mean_spec(state.u[0].spec);
    zero_mean_spec(state.u[1].spec);
    zero_mean_spec(state.u[2].spec);

    if (init.kind == InitKind::Random) {
        double q2 = 0.0, u2 = 0.0;
        for (auto& f : state.q) q2 += l2_norm_sq_spec(g, f.spec);
        for (auto& f : state.u) u2 += l2_norm_sq_spec(g, f.spec);
        if (q2 > 0.0 && init.q_norm > 0.0) {
            const double sc = init.q_norm / std::sqrt(q2);
            for (auto& f : state.q)
                for (auto& v : f.spec) v *= sc;
        }
        if (u2 > 0.0 && init.u_norm > 0.0) {
            const double sc = init.u_norm / std::sqrt(u2);
            for (auto& f : state.u)
                for (auto& v : f.spec) v *= sc;
        }
    }

    // canonical state between steps is the physical view
    for (auto& f : state.q) f.mark_spec();
    for (auto& f : state.u) f.mark_spec();
    state.ensure_phys(fft);
    for (auto& f : state.q) f.mark_phys();
    for (auto& f : state.u) f.mark_phys();
    state.u_projected = true;
    return state;
}

}  // namespace belh
