#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace belh {

// ---------------------------------------------------------------------------
// Mat3: dense 3x3 real matrix, row-major. Used for velocity gradients,
// stresses, and as the reconstruction target of TracelessSym3.
// ---------------------------------------------------------------------------
struct Mat3 {
    std::array<double, 9> m{};

    double& operator()(int i, int j) { return m[3 * i + j]; }
    double operator()(int i, int j) const { return m[3 * i + j]; }

    static Mat3 zero() { return Mat3{}; }
    static Mat3 identity() {
        Mat3 r;
        r(0, 0) = r(1, 1) = r(2, 2) = 1.0;
        return r;
    }
    static Mat3 diag(double a, double b, double c) {
        Mat3 r;
        r(0, 0) = a;
        r(1, 1) = b;
        r(2, 2) = c;
        return r;
    }

    Mat3 transpose() const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r(i, j) = (*this)(j, i);
        return r;
    }

    double trace() const { return m[0] + m[4] + m[8]; }

    double frobenius_sq() const {
        double s = 0.0;
        for (double v : m) s += v * v;
        return s;
    }
    double frobenius() const { return std::sqrt(frobenius_sq()); }

    Mat3& operator+=(const Mat3& o) {
        for (int i = 0; i < 9; ++i) m[i] += o.m[i];
        return *this;
    }
    Mat3& operator-=(const Mat3& o) {
        for (int i = 0; i < 9; ++i) m[i] -= o.m[i];
        return *this;
    }
    Mat3& operator*=(double s) {
        for (double& v : m) v *= s;
        return *this;
    }

    friend Mat3 operator+(Mat3 a, const Mat3& b) { return a += b; }
    friend Mat3 operator-(Mat3 a, const Mat3& b) { return a -= b; }
    friend Mat3 operator*(Mat3 a, double s) { return a *= s; }
    friend Mat3 operator*(double s, Mat3 a) { return a *= s; }

    friend Mat3 operator*(const Mat3& a, const Mat3& b) {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                double s = 0.0;
                for (int k = 0; k < 3; ++k) s += a(i, k) * b(k, j);
                r(i, j) = s;
            }
        return r;
    }
};

/// Frobenius inner product A:B = A_ij B_ij.
inline double ddot(const Mat3& a, const Mat3& b) {
    double s = 0.0;
    for (int i = 0; i < 9; ++i) s += a.m[i] * b.m[i];
    return s;
}

inline Mat3 sym(const Mat3& a) { return 0.5 * (a + a.transpose()); }
inline Mat3 skew(const Mat3& a) { return 0.5 * (a - a.transpose()); }
inline Mat3 commutator(const Mat3& a, const Mat3& b) { return a * b - b * a; }

// ---------------------------------------------------------------------------
// TracelessSym3: element of the 5-dimensional space of symmetric traceless
// 3x3 matrices, stored as coefficients in a fixed orthonormal basis so that
// symmetry and tracelessness hold by construction and |Q|^2 = sum c_i^2.
//
// Basis (Frobenius-orthonormal):
//   E0 = diag(2,-1,-1)/sqrt(6)      E1 = diag(0,1,-1)/sqrt(2)
//   E2 = (e1 e2 + e2 e1)/sqrt(2)    E3 = (e1 e3 + e3 e1)/sqrt(2)
//   E4 = (e2 e3 + e3 e2)/sqrt(2)
//
// The uniaxial matrix A0 = diag(2,-1,-1) is sqrt(6) * E0.
// ---------------------------------------------------------------------------
inline constexpr double kInvSqrt2 = 0.70710678118654752440;
inline constexpr double kInvSqrt6 = 0.40824829046386301637;
inline constexpr double kSqrt6 = 2.44948974278317809820;

struct TracelessSym3 {
    std::array<double, 5> c{};

    double& operator[](int i) { return c[i]; }
    double operator[](int i) const { return c[i]; }

    static TracelessSym3 zero() { return TracelessSym3{}; }

    /// Uniaxial generator A0 = diag(2,-1,-1) scaled by q.
    static TracelessSym3 uniaxial(double q) {
        TracelessSym3 r;
        r.c[0] = q * kSqrt6;
        return r;
    }

    double norm_sq() const {
        double s = 0.0;
        for (double v : c) s += v * v;
        return s;
    }
    double norm() const { return std::sqrt(norm_sq()); }

    Mat3 to_mat3() const {
        Mat3 r;
        const double d0 = c[0] * kInvSqrt6;
        const double d1 = c[1] * kInvSqrt2;
        r(0, 0) = 2.0 * d0;
        r(1, 1) = -d0 + d1;
        r(2, 2) = -d0 - d1;
        r(0, 1) = r(1, 0) = c[2] * kInvSqrt2;
        r(0, 2) = r(2, 0) = c[3] * kInvSqrt2;
        r(1, 2) = r(2, 1) = c[4] * kInvSqrt2;
        return r;
    }

    TracelessSym3& operator+=(const TracelessSym3& o) {
        for (int i = 0; i < 5; ++i) c[i] += o.c[i];
        return *this;
    }
    TracelessSym3& operator-=(const TracelessSym3& o) {
        for (int i = 0; i < 5; ++i) c[i] -= o.c[i];
        return *this;
    }
    TracelessSym3& operator*=(double s) {
        for (double& v : c) v *= s;
        return *this;
    }
    friend TracelessSym3 operator+(TracelessSym3 a, const TracelessSym3& b) { return a += b; }
    friend TracelessSym3 operator-(TracelessSym3 a, const TracelessSym3& b) { return a -= b; }
    friend TracelessSym3 operator*(TracelessSym3 a, double s) { return a *= s; }
    friend TracelessSym3 operator*(double s, TracelessSym3 a) { return a *= s; }
};

/// Coefficient inner product; equals the Frobenius product of the matrices.
inline double ddot(const TracelessSym3& a, const TracelessSym3& b) {
    double s = 0.0;
    for (int i = 0; i < 5; ++i) s += a.c[i] * b.c[i];
    return s;
}

/// Orthogonal projection of an arbitrary 3x3 matrix onto the symmetric
/// traceless class: (m + m^T)/2 - tr(m)/3 I, returned in coefficient form.
/// Equals the coefficient extraction <m, E_i>; idempotent on members of the
/// class up to rounding.
inline TracelessSym3 project_traceless_sym(const Mat3& m) {
    TracelessSym3 r;
    r.c[0] = (2.0 * m(0, 0) - m(1, 1) - m(2, 2)) * kInvSqrt6;
    r.c[1] = (m(1, 1) - m(2, 2)) * kInvSqrt2;
    r.c[2] = (m(0, 1) + m(1, 0)) * kInvSqrt2;
    r.c[3] = (m(0, 2) + m(2, 0)) * kInvSqrt2;
    r.c[4] = (m(1, 2) + m(2, 1)) * kInvSqrt2;
    return r;
}

/// Gradient of a Q-tensor at a point: slot i holds the spatial derivative of
/// Q in direction i.
struct GradQ {
    std::array<TracelessSym3, 3> d{};

    TracelessSym3& operator[](int i) { return d[i]; }
    const TracelessSym3& operator[](int i) const { return d[i]; }

    /// |grad Q|^2 = sum_i |d_i Q|^2.
    double norm_sq() const { return d[0].norm_sq() + d[1].norm_sq() + d[2].norm_sq(); }
};

// ---------------------------------------------------------------------------
// Physical parameters of the coupled system.
// ---------------------------------------------------------------------------
struct BulkParams {
    double L = 1.0;      ///< elastic constant, > 0
    double mu = 1.0;     ///< viscosity, > 0
    double gamma = 1.0;  ///< relaxation rate, > 0
    double a = 0.0;      ///< quadratic bulk coefficient
    double b = 0.0;      ///< cubic bulk coefficient
    double c = 1.0;      ///< quartic bulk coefficient; stable potential iff c > 0
    double xi = 0.0;     ///< tumbling parameter
    double eps = 0.0;    ///< hyperviscosity, >= 0

    bool stable() const { return c > 0.0; }

    void validate() const {
        if (!(L > 0.0)) throw std::invalid_argument("BulkParams: L must be > 0");
        if (!(mu > 0.0)) throw std::invalid_argument("BulkParams: mu must be > 0");
        if (!(gamma > 0.0)) throw std::invalid_argument("BulkParams: gamma must be > 0");
        if (!(eps >= 0.0)) throw std::invalid_argument("BulkParams: eps must be >= 0");
    }
};

// ---------------------------------------------------------------------------
// Constitutive quantities. All formulas are evaluated on 3x3 reconstructions
// and re-projected, so the outputs stay in the traceless symmetric class
// independently of rounding in the products.
// ---------------------------------------------------------------------------

/// Polynomial bulk force b(Q^2 - tr(Q^2)/3 I) - c Q tr(Q^2).
inline TracelessSym3 bulk_force(const TracelessSym3& q, const BulkParams& p) {
    const Mat3 Q = q.to_mat3();
    const Mat3 Q2 = Q * Q;
    const double tr2 = Q2.trace();
    const Mat3 B = p.b * (Q2 - (tr2 / 3.0) * Mat3::identity()) - p.c * tr2 * Q;
    return project_traceless_sym(B);
}

/// Molecular field L lap(Q) - a Q + B(Q); the caller supplies lap(Q).
inline TracelessSym3 molecular_field(const TracelessSym3& q, const TracelessSym3& lap_q,
                                     const BulkParams& p) {
    return p.L * lap_q - p.a * q + bulk_force(q, p);
}

/// Stretching term
///   S = xi (D G + G D) - 2 xi G tr(Q grad_u) + Omega Q - Q Omega,
/// with G = Q + I/3, D/Omega the symmetric/skew parts of grad_u.
/// grad_u must be trace-free (its trace is div u); violation beyond a small
/// relative tolerance is reported.
inline TracelessSym3 stretching(const Mat3& grad_u, const TracelessSym3& q, double xi) {
    const double tr = grad_u.trace();
    if (std::abs(tr) > 1e-8 * (1.0 + grad_u.frobenius()))
        throw std::invalid_argument("stretching: grad_u has nonzero trace (div u != 0)");

    const Mat3 Q = q.to_mat3();
    const Mat3 D = sym(grad_u);
    const Mat3 Om = skew(grad_u);
    Mat3 S = commutator(Om, Q);
    if (xi != 0.0) {
        const Mat3 G = Q + (1.0 / 3.0) * Mat3::identity();
        const double trQgu = ddot(Q, grad_u.transpose());  // tr(Q grad_u)
        S += xi * (D * G + G * D) - (2.0 * xi * trQgu) * G;
    }
    return project_traceless_sym(S);
}

/// Distortion + alignment stress
///   tau = -xi (G H + H G) + 2 xi G tr(Q H) - L grad_q (.) grad_q,
/// where ((grad Q) (.) (grad Q))_ij = d_j Q : d_i Q.
inline Mat3 stress_tau(const TracelessSym3& q, const TracelessSym3& h, const GradQ& grad_q,
                       const BulkParams& p) {
    Mat3 tau = Mat3::zero();
    if (p.xi != 0.0) {
        const Mat3 Q = q.to_mat3();
        const Mat3 H = h.to_mat3();
        const Mat3 G = Q + (1.0 / 3.0) * Mat3::identity();
        tau = (-p.xi) * (G * H + H * G) + (2.0 * p.xi * ddot(q, h)) * G;
    }
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) tau(i, j) -= p.L * ddot(grad_q[j], grad_q[i]);
    return tau;
}

/// Antisymmetric stress Q H - H Q.
inline Mat3 stress_sigma(const TracelessSym3& q, const TracelessSym3& h) {
    return commutator(q.to_mat3(), h.to_mat3());
}

/// Residual of the stress/stretching cancellation
///   (tau + sigma) : grad_u + H : S(grad_u, Q) + L (grad_q (.) grad_q) : grad_u,
/// identically zero for traceless symmetric Q, H and trace-free grad_u.
/// Each term is computed through its own constitutive routine.
inline double cancellation_residual(const TracelessSym3& q, const TracelessSym3& h,
                                    const Mat3& grad_u, const GradQ& grad_q,
                                    const BulkParams& p) {
    const Mat3 tau = stress_tau(q, h, grad_q, p);
    const Mat3 sigma = stress_sigma(q, h);
    const TracelessSym3 s = stretching(grad_u, q, p.xi);

    double elastic = 0.0;  // L (grad_q (.) grad_q) : grad_u
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) elastic += ddot(grad_q[j], grad_q[i]) * grad_u(i, j);

    return ddot(tau + sigma, grad_u) + ddot(h, s) + p.L * elastic;
}

/// Free-energy density (L/2)|grad Q|^2 + (a/2)|Q|^2 - (b/3)tr(Q^3) + (c/4)|Q|^4.
inline double energy_density(const TracelessSym3& q, const GradQ& grad_q, const BulkParams& p) {
    const Mat3 Q = q.to_mat3();
    const double q2 = q.norm_sq();
    const double trq3 = (Q * Q * Q).trace();
    return 0.5 * p.L * grad_q.norm_sq() + 0.5 * p.a * q2 - (p.b / 3.0) * trq3 +
           0.25 * p.c * q2 * q2;
}

/// Bulk part of the free-energy density (no gradient term).
inline double bulk_energy_density(const TracelessSym3& q, const BulkParams& p) {
    const Mat3 Q = q.to_mat3();
    const double q2 = q.norm_sq();
    return 0.5 * p.a * q2 - (p.b / 3.0) * (Q * Q * Q).trace() + 0.25 * p.c * q2 * q2;
}

/// Explicit constants (C, c0) with c0 > 0 such that for every traceless
/// symmetric Q
///   (a/2)|Q|^2 - (b/3)tr(Q^3) + (c/4)|Q|^4 >= -C|Q|^2 + c0|Q|^4.
/// Uses the sharp bound |tr(Q^3)| <= |Q|^3/sqrt(6) and Young's inequality;
/// requires c > 0.
inline std::pair<double, double> coercivity_constants(const BulkParams& p) {
    if (!(p.c > 0.0)) throw std::invalid_argument("coercivity_constants: requires c > 0");
    const double c0 = p.c / 8.0;
    const double C = 0.5 * std::abs(p.a) + (2.0 * p.b * p.b) / (3.0 * p.c);
    return {C, c0};
}

/// Low-order potential g(Q) = ((1-a)/2)|Q|^2 + (b/3)tr(Q^3) - (c/4)|Q|^4 and
/// its derivative A(Q) = (1-a)Q + B(Q) within the traceless symmetric class.
/// A(Q) commutes with Q.
inline std::pair<double, TracelessSym3> low_order_potential_and_force(const TracelessSym3& q,
                                                                      const BulkParams& p) {
    const Mat3 Q = q.to_mat3();
    const double q2 = q.norm_sq();
    const double trq3 = (Q * Q * Q).trace();
    const double g =
        0.5 * (1.0 - p.a) * q2 + (p.b / 3.0) * trq3 - 0.25 * p.c * q2 * q2;
    const TracelessSym3 A = (1.0 - p.a) * q + bulk_force(q, p);
    return {g, A};
}

}  // namespace belh
