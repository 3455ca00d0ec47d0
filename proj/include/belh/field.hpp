#pragma once

#include <array>

#include "belh/grid.hpp"
#include "belh/spectral_ops.hpp"
#include "belh/tensor_algebra.hpp"
#include "belh/transforms.hpp"

namespace belh {

// ---------------------------------------------------------------------------
// One scalar field with a physical and a spectral view plus validity flags.
// Writers mark the view they touched; readers lazily transform.
// ---------------------------------------------------------------------------
struct DualField {
    RealVec phys;
    CplxVec spec;
    bool phys_ok = false;
    bool spec_ok = false;

    void init(const Grid& g) {
        phys.assign(g.npts(), 0.0);
        spec.assign(g.nspec(), {0.0, 0.0});
        phys_ok = spec_ok = true;
    }

    void mark_phys() {
        phys_ok = true;
        spec_ok = false;
    }
    void mark_spec() {
        spec_ok = true;
        phys_ok = false;
    }

    const RealVec& ensure_phys(const Fft& fft) {
        if (!phys_ok) {
            fft.inverse(spec, phys);
            phys_ok = true;
        }
        return phys;
    }
    const CplxVec& ensure_spec(const Fft& fft) {
        if (!spec_ok) {
            fft.forward(phys, spec);
            spec_ok = true;
        }
        return spec;
    }
};

// ---------------------------------------------------------------------------
// Coupled state: Q (five coefficient fields in the traceless symmetric
// basis), velocity u, pressure p, and the simulation time. Q reconstructed at
// any grid point is symmetric traceless by construction.
// ---------------------------------------------------------------------------
struct FieldSet {
    Grid grid;
    double time = 0.0;
    std::array<DualField, 5> q;
    std::array<DualField, 3> u;
    DualField p;
    bool u_projected = false;

    FieldSet() = default;
    explicit FieldSet(const Grid& g) : grid(g) {
        for (auto& f : q) f.init(g);
        for (auto& f : u) f.init(g);
        p.init(g);
    }

    void ensure_phys(const Fft& fft) {
        for (auto& f : q) f.ensure_phys(fft);
        for (auto& f : u) f.ensure_phys(fft);
    }
    void ensure_spec(const Fft& fft) {
        for (auto& f : q) f.ensure_spec(fft);
        for (auto& f : u) f.ensure_spec(fft);
    }

    /// Q at a flat physical index (physical views must be valid).
    TracelessSym3 q_at(std::size_t s) const {
        TracelessSym3 r;
        for (int c = 0; c < 5; ++c) r[c] = q[c].phys[s];
        return r;
    }

    std::array<double, 3> u_at(std::size_t s) const {
        return {u[0].phys[s], u[1].phys[s], u[2].phys[s]};
    }

    /// ||Q||_{L2}^2 of the tensor field from the physical views.
    double q_l2_sq(const Grid& g) const {
        double sum = 0.0;
        for (const auto& f : q) sum += l2_norm_sq_phys(g, f.phys);
        return sum;
    }

    double u_l2_sq(const Grid& g) const {
        double sum = 0.0;
        for (const auto& f : u) sum += l2_norm_sq_phys(g, f.phys);
        return sum;
    }
};

}  // namespace belh
