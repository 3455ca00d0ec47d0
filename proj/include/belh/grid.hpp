#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace belh {

inline constexpr double kTwoPi = 6.28318530717958647693;

// ---------------------------------------------------------------------------
// Periodic cubic box [0, 2*pi*R)^3 sampled on an n^3 collocation grid.
// Wavenumbers are integer mode indices divided by the box radius R; the
// dealias mask implements the 2/3 rule in mode-index units.
// ---------------------------------------------------------------------------
struct Grid {
    int n = 0;               ///< points per axis (even, >= 8)
    double box_radius = 1.0; ///< R; the box side is 2*pi*R

    Grid() = default;
    Grid(int n_, double box_radius_) : n(n_), box_radius(box_radius_) {
        if (n < 8 || n % 2 != 0) throw std::invalid_argument("Grid: n must be even and >= 8");
        if (!(box_radius > 0.0)) throw std::invalid_argument("Grid: box_radius must be > 0");
    }

    std::size_t npts() const { return std::size_t(n) * n * n; }
    std::size_t nspec() const { return std::size_t(n) * n * (n / 2 + 1); }
    int nz_spec() const { return n / 2 + 1; }

    double side() const { return kTwoPi * box_radius; }
    double dx() const { return side() / n; }
    double volume() const { return side() * side() * side(); }
    double cell_volume() const { return dx() * dx() * dx(); }

    double x(int i) const { return i * dx(); }

    /// Signed integer mode for storage index m along a full axis.
    int mode(int m) const { return m <= n / 2 ? m : m - n; }
    /// Physical wavenumber for storage index m along a full axis.
    double wavenumber(int m) const { return mode(m) / box_radius; }

    std::size_t phys_index(int i, int j, int k) const {
        return (std::size_t(i) * n + j) * n + k;
    }
    std::size_t spec_index(int i, int j, int k) const {
        return (std::size_t(i) * n + j) * nz_spec() + k;
    }

    /// 2/3-rule mask: keep a mode only if every |mode_i| <= n/3.
    bool dealias_keep(int mi, int mj, int mk) const {
        const int cut = n / 3;
        return std::abs(mode(mi)) <= cut && std::abs(mode(mj)) <= cut && mk <= cut;
    }

    /// Parseval weight of a stored r2c mode (conjugate pair counted once).
    double spec_weight(int k) const { return (k == 0 || k == n / 2) ? 1.0 : 2.0; }

    bool operator==(const Grid& o) const { return n == o.n && box_radius == o.box_radius; }
};

}  // namespace belh
