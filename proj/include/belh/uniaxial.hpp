#pragma once

#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "belh/dynamics.hpp"
#include "belh/field.hpp"
#include "belh/tensor_algebra.hpp"

namespace belh {

// ---------------------------------------------------------------------------
// Scalar reduction on the interval (0, ell) with homogeneous Dirichlet data:
//   dq/dt = Gamma (L lap q - a q + b q^2 - 6 c q^3).
// q is stored at the n interior nodes x_j = j h, h = ell/(n+1).
// ---------------------------------------------------------------------------
struct ScalarRun {
    double ell = M_PI;   ///< interval length
    int n = 1023;        ///< interior nodes
    double dt = 1e-4;
    double t_final = 1.0;
    double gamma = 1.0, L = 1.0, a = 0.0, b = 0.0, c = 1.0;
    std::vector<double> q0;        ///< initial profile at interior nodes
    double blowup_ceiling = 1e6;   ///< max|q| threshold for the blow-up flag
    double adapt_rel_bound = 0.1;  ///< max step increment relative to 1 + max|q|
    int cadence = 10;

    double h() const { return ell / (n + 1); }
    double lambda1() const { return (M_PI / ell) * (M_PI / ell); }
    /// first Dirichlet eigenvalue of the centered-difference Laplacian
    double lambda1_discrete() const {
        const double s = std::sin(0.5 * M_PI * h() / ell);
        return 4.0 * s * s / (h() * h());
    }

    void validate() const {
        if (n < 3) throw std::invalid_argument("ScalarRun: n must be >= 3");
        if (!(ell > 0.0) || !(dt > 0.0) || !(t_final >= 0.0))
            throw std::invalid_argument("ScalarRun: ell, dt must be > 0, t_final >= 0");
        if (!(gamma > 0.0) || !(L > 0.0))
            throw std::invalid_argument("ScalarRun: gamma and L must be > 0");
        if (!q0.empty() && int(q0.size()) != n)
            throw std::invalid_argument("ScalarRun: q0 size does not match n");
        if (cadence < 1) throw std::invalid_argument("ScalarRun: cadence must be >= 1");
    }

    /// Eigenfunction initial data amp * sin(pi x / ell).
    static std::vector<double> eigen_profile(int n, double ell, double amp) {
        std::vector<double> q(n);
        const double h = ell / (n + 1);
        for (int j = 0; j < n; ++j) q[j] = amp * std::sin(M_PI * (j + 1) * h / ell);
        return q;
    }
};

/// Tendency Gamma (L lap_h q - a q + b q^2 - 6 c q^3) with the second-order
/// centered Laplacian and Dirichlet boundaries.
inline std::vector<double> scalar_rhs(const std::vector<double>& q, const ScalarRun& cfg) {
    const int n = int(q.size());
    const double ih2 = 1.0 / (cfg.h() * cfg.h());
    std::vector<double> out(n);
    for (int j = 0; j < n; ++j) {
        const double qm = j > 0 ? q[j - 1] : 0.0;
        const double qp = j + 1 < n ? q[j + 1] : 0.0;
        const double lap = (qm - 2.0 * q[j] + qp) * ih2;
        out[j] = cfg.gamma * (cfg.L * lap - cfg.a * q[j] + cfg.b * q[j] * q[j] -
                              6.0 * cfg.c * q[j] * q[j] * q[j]);
        if (!std::isfinite(out[j]))
            throw SimulationError("scalar_rhs: non-finite tendency", 0.0);
    }
    return out;
}

/// Kaplan pairing int q phi_1 dx by the trapezoid rule, phi_1 = sin(pi x/ell).
inline double kaplan_moment(const std::vector<double>& q, double ell) {
    const int n = int(q.size());
    const double h = ell / (n + 1);
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += q[j] * std::sin(M_PI * (j + 1) * h / ell);
    return s * h;  // boundary values vanish
}

struct ScalarSample {
    double time = 0.0;
    double max_q = 0.0;
    double min_q = 0.0;
    double moment = 0.0;
    double dt = 0.0;
};

struct BlowupReport {
    double lambda1 = 0.0;  ///< (pi/ell)^2
    bool blown_up = false;
    double blowup_time = std::numeric_limits<double>::quiet_NaN();
    double threshold_crossing_time = std::numeric_limits<double>::quiet_NaN();
    double comparison_threshold = std::numeric_limits<double>::quiet_NaN();
    double growth_rate_fit = std::numeric_limits<double>::quiet_NaN();
    std::vector<ScalarSample> series;
    std::vector<double> final_profile;
    double final_time = 0.0;
};

namespace detail {

/// Thomas solve of (1 + 2r) q_j - r(q_{j-1} + q_{j+1}) = rhs_j, Dirichlet.
inline void crank_nicolson_diffusion(std::vector<double>& q, double r,
                                     std::vector<double>& work_c, std::vector<double>& work_d) {
    const int n = int(q.size());
    work_c.resize(n);
    work_d.resize(n);
    // rhs of CN: (1 - 2r) q + r (q_- + q_+)
    double prev = 0.0;
    for (int j = 0; j < n; ++j) {
        const double qp = j + 1 < n ? q[j + 1] : 0.0;
        work_d[j] = (1.0 - 2.0 * r) * q[j] + r * (prev + qp);
        prev = q[j];
    }
    // forward elimination for the tridiagonal (-r, 1+2r, -r)
    const double b0 = 1.0 + 2.0 * r;
    work_c[0] = -r / b0;
    work_d[0] = work_d[0] / b0;
    for (int j = 1; j < n; ++j) {
        const double m = 1.0 / (b0 + r * work_c[j - 1]);
        work_c[j] = -r * m;
        work_d[j] = (work_d[j] + r * work_d[j - 1]) * m;
    }
    q[n - 1] = work_d[n - 1];
    for (int j = n - 2; j >= 0; --j) q[j] = work_d[j] - work_c[j] * q[j + 1];
}

inline double reaction(double q, const ScalarRun& cfg) {
    return cfg.gamma * (-cfg.a * q + cfg.b * q * q - 6.0 * cfg.c * q * q * q);
}

}  // namespace detail

/// Integrate the scalar reduction with Strang splitting (explicit midpoint
/// reaction halves around a Crank-Nicolson diffusion step). The step is
/// halved adaptively when the explicit increment exceeds the configured
/// relative bound; blow-up is declared when max|q| passes the ceiling after
/// at least three halvings in the immediately preceding steps.
inline BlowupReport run_scalar(const ScalarRun& cfg,
                               const std::function<void(const ScalarSample&)>& sink = {}) {
    cfg.validate();
    BlowupReport rep;
    rep.lambda1 = cfg.lambda1();

    std::vector<double> q = cfg.q0.empty()
                                ? ScalarRun::eigen_profile(cfg.n, cfg.ell, 1.0)
                                : cfg.q0;
    const double int_phi = 2.0 * cfg.ell / M_PI;
    if (cfg.c < 0.0)
        rep.comparison_threshold =
            std::sqrt(cfg.L * cfg.lambda1() * int_phi * int_phi / (6.0 * std::abs(cfg.c)));
    else if (cfg.c == 0.0 && cfg.b != 0.0)
        rep.comparison_threshold = cfg.L * cfg.lambda1() * int_phi / std::abs(cfg.b);

    double t = 0.0, dt = cfg.dt;
    const double dt_min = cfg.dt * std::ldexp(1.0, -48);
    std::deque<int> halvings_window;  // halvings in each of the last steps
    std::vector<double> wc, wd;

    auto sample_state = [&](double cur_dt) {
        ScalarSample s;
        s.time = t;
        s.dt = cur_dt;
        s.moment = kaplan_moment(q, cfg.ell);
        double mx = 0.0, mn = 0.0;
        for (double v : q) {
            mx = std::max(mx, std::abs(v));
            mn = std::min(mn, v);
        }
        s.max_q = mx;
        s.min_q = mn;
        rep.series.push_back(s);
        if (sink) sink(s);
        return mx;
    };

    sample_state(dt);

    long step_count = 0;
    while (t < cfg.t_final - 1e-14 * cfg.t_final && !rep.blown_up) {
        const double step_dt = std::min(dt, cfg.t_final - t);
        int halvings_this_step = 0;
        std::vector<double> qn;
        double trial_dt = step_dt;
        while (true) {
            qn = q;
            // Strang: half reaction (midpoint), CN diffusion, half reaction
            auto react_half = [&](std::vector<double>& v) {
                const double hdt = 0.5 * trial_dt;
                for (double& x : v) {
                    const double mid = x + 0.5 * hdt * detail::reaction(x, cfg);
                    x += hdt * detail::reaction(mid, cfg);
                }
            };
            react_half(qn);
            detail::crank_nicolson_diffusion(
                qn, 0.5 * trial_dt * cfg.gamma * cfg.L / (cfg.h() * cfg.h()), wc, wd);
            react_half(qn);

            double max_inc = 0.0, max_q = 0.0;
            bool finite = true;
            for (int j = 0; j < cfg.n; ++j) {
                if (!std::isfinite(qn[j])) {
                    finite = false;
                    break;
                }
                max_inc = std::max(max_inc, std::abs(qn[j] - q[j]));
                max_q = std::max(max_q, std::abs(q[j]));
            }
            if (finite && max_inc <= cfg.adapt_rel_bound * (1.0 + max_q)) break;
            trial_dt *= 0.5;
            ++halvings_this_step;
            if (trial_dt < dt_min)
                throw SimulationError("scalar solver: adaptive loop did not converge", t);
        }

        q.swap(qn);
        t += trial_dt;
        dt = std::min(cfg.dt, 2.0 * trial_dt);  // relax back toward the nominal step
        ++step_count;

        halvings_window.push_back(halvings_this_step);
        if (halvings_window.size() > 3) halvings_window.pop_front();

        double max_q = 0.0;
        for (double v : q) max_q = std::max(max_q, std::abs(v));

        if (std::isnan(rep.threshold_crossing_time) &&
            !std::isnan(rep.comparison_threshold) &&
            kaplan_moment(q, cfg.ell) > rep.comparison_threshold)
            rep.threshold_crossing_time = t;

        const bool record = (step_count % cfg.cadence == 0) || max_q >= cfg.blowup_ceiling;
        if (record) sample_state(trial_dt);

        if (max_q >= cfg.blowup_ceiling) {
            int recent = 0;
            for (int hsteps : halvings_window) recent += hsteps;
            if (recent >= 3) {
                rep.blown_up = true;
                rep.blowup_time = t;
            }
            // a crossing without stiffness pressure keeps running; the
            // adaptive loop engages as the profile sharpens
        }
    }

    if (rep.series.back().time != t) sample_state(dt);
    rep.final_profile = q;
    rep.final_time = t;

    // growth-rate fit: least-squares slope of 1/m^2 over the last samples;
    // for cubic focusing the theory value is -2 Gamma beta with
    // beta = 6|c|/(int phi_1)^2
    const std::size_t ns = rep.series.size();
    if (ns >= 5) {
        const std::size_t k0 = ns - std::min<std::size_t>(ns, 8);
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int cnt = 0;
        for (std::size_t k = k0; k < ns; ++k) {
            const double m = rep.series[k].moment;
            if (m <= 0.0) continue;
            const double y = 1.0 / (m * m);
            sx += rep.series[k].time;
            sy += y;
            sxx += rep.series[k].time * rep.series[k].time;
            sxy += rep.series[k].time * y;
            ++cnt;
        }
        if (cnt >= 3 && sxx * cnt - sx * sx > 0.0)
            rep.growth_rate_fit = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Embedding into the tensor solver: Q(x) = q(x_1) A0, u = 0, with q odd-
// reflected onto the second half of the periodic box [0, 2 ell). The box must
// satisfy 2 pi R = 2 ell and the scalar grid must align with the tensor grid
// ((n+1) divisible by N/2). Odd reflection preserves the Dirichlet analogy;
// it is an exact invariance of the scalar flow only when b = 0 (the
// quadratic term is even).
// ---------------------------------------------------------------------------
inline FieldSet embed_uniaxial(const std::vector<double>& q_interior, double ell,
                               const Fft& fft) {
    const Grid& g = fft.grid();
    if (std::abs(g.side() - 2.0 * ell) > 1e-12 * ell)
        throw std::invalid_argument("embed_uniaxial: box side must equal 2 ell");
    const int n = int(q_interior.size());
    if ((n + 1) % (g.n / 2) != 0)
        throw std::invalid_argument(
            "embed_uniaxial: scalar grid does not align with the tensor grid");
    const int stride = 2 * (n + 1) / g.n;

    FieldSet state(g);
    for (int i = 0; i < g.n; ++i) {
        double v = 0.0;
        if (i == 0 || i == g.n / 2) {
            v = 0.0;  // Dirichlet nodes
        } else if (i < g.n / 2) {
            v = q_interior[i * stride - 1];
        } else {
            v = -q_interior[(g.n - i) * stride - 1];
        }
        const double c0 = kSqrt6 * v;
        for (int j = 0; j < g.n; ++j)
            for (int k = 0; k < g.n; ++k) state.q[0].phys[g.phys_index(i, j, k)] = c0;
    }
    for (auto& f : state.q) f.mark_phys();
    for (auto& f : state.u) f.mark_phys();
    state.u_projected = true;
    return state;
}

/// Scalar profile of a (nominally uniaxial) tensor state at the tensor grid
/// nodes x_1 in (0, ell), plus the largest pointwise deviation from the
/// uniaxial class |Q - (Q:A0/|A0|^2) A0|.
struct UniaxialView {
    std::vector<double> q;  ///< values at tensor nodes i = 1 .. N/2 - 1
    double max_deviation = 0.0;
};

inline UniaxialView extract_uniaxial(const FieldSet& state) {
    const Grid& g = state.grid;
    UniaxialView view;
    view.q.resize(g.n / 2 - 1);
    for (int i = 1; i < g.n / 2; ++i)
        view.q[i - 1] = state.q[0].phys[g.phys_index(i, 0, 0)] / kSqrt6;
    for (std::size_t s = 0; s < g.npts(); ++s) {
        double dev2 = 0.0;
        for (int c = 1; c < 5; ++c) dev2 += state.q[c].phys[s] * state.q[c].phys[s];
        view.max_deviation = std::max(view.max_deviation, std::sqrt(dev2));
    }
    return view;
}

// ---------------------------------------------------------------------------
// Cross-validation of the scalar solver against the corotational tensor
// solver (xi = 0, u frozen at zero) on the embedded state.
// ---------------------------------------------------------------------------
struct UniaxialCompareConfig {
    double ell = M_PI;
    int scalar_n = 4095;
    int tensor_n = 32;
    double dt = 1e-4;
    double t_final = 0.5;
    double gamma = 1.0, L = 1.0, a = 1.0, b = 0.0, c = 1.0;
    double amplitude = 0.1;  ///< initial profile amplitude on sin(pi x/ell)
    int cadence = 250;       ///< steps between comparisons
};

struct UniaxialCompareSample {
    double time = 0.0;
    double max_q_diff = 0.0;
    double max_deviation = 0.0;
};

struct UniaxialCompareResult {
    std::vector<UniaxialCompareSample> series;
    double max_q_diff = 0.0;
    double max_deviation = 0.0;
};

inline UniaxialCompareResult run_compare_uniaxial(
    const UniaxialCompareConfig& cc,
    const std::function<void(const UniaxialCompareSample&)>& sink = {}) {
    if (cc.b != 0.0)
        throw std::invalid_argument(
            "compare-uniaxial: odd reflection requires b = 0 (the quadratic term breaks "
            "odd symmetry)");

    ScalarRun scfg;
    scfg.ell = cc.ell;
    scfg.n = cc.scalar_n;
    scfg.dt = cc.dt;
    scfg.t_final = cc.t_final;
    scfg.gamma = cc.gamma;
    scfg.L = cc.L;
    scfg.a = cc.a;
    scfg.b = cc.b;
    scfg.c = cc.c;
    scfg.q0 = ScalarRun::eigen_profile(scfg.n, scfg.ell, cc.amplitude);
    scfg.adapt_rel_bound = 1.0;  // smooth comparison runs never trigger halving
    scfg.validate();

    SolverConfig tcfg;
    tcfg.n = cc.tensor_n;
    tcfg.box_radius = cc.ell / M_PI;
    tcfg.dt = cc.dt;
    tcfg.t_final = cc.t_final;
    tcfg.params.gamma = cc.gamma;
    tcfg.params.L = cc.L;
    tcfg.params.a = cc.a;
    tcfg.params.b = cc.b;
    tcfg.params.c = cc.c;
    tcfg.params.xi = 0.0;
    tcfg.freeze_velocity = true;
    tcfg.cadence = cc.cadence;

    Stepper stepper(tcfg);
    FieldSet tstate = embed_uniaxial(scfg.q0, cc.ell, stepper.fft());

    std::vector<double> q = scfg.q0;
    std::vector<double> wc, wd;
    const int stride = 2 * (scfg.n + 1) / tcfg.n;

    UniaxialCompareResult result;
    auto compare_now = [&](double t) {
        UniaxialView view = extract_uniaxial(tstate);
        UniaxialCompareSample s;
        s.time = t;
        for (int i = 1; i < tcfg.n / 2; ++i)
            s.max_q_diff =
                std::max(s.max_q_diff, std::abs(view.q[i - 1] - q[i * stride - 1]));
        s.max_deviation = view.max_deviation;
        result.series.push_back(s);
        result.max_q_diff = std::max(result.max_q_diff, s.max_q_diff);
        result.max_deviation = std::max(result.max_deviation, s.max_deviation);
        if (sink) sink(s);
    };

    compare_now(0.0);
    const int nsteps = int(std::llround(cc.t_final / cc.dt));
    for (int i = 1; i <= nsteps; ++i) {
        stepper.step(tstate);
        // matching scalar step (fixed dt, Strang splitting)
        auto react_half = [&](std::vector<double>& v) {
            const double hdt = 0.5 * cc.dt;
            for (double& x : v) {
                const double mid = x + 0.5 * hdt * detail::reaction(x, scfg);
                x += hdt * detail::reaction(mid, scfg);
            }
        };
        react_half(q);
        detail::crank_nicolson_diffusion(
            q, 0.5 * cc.dt * scfg.gamma * scfg.L / (scfg.h() * scfg.h()), wc, wd);
        react_half(q);
        if (i % cc.cadence == 0 || i == nsteps) compare_now(i * cc.dt);
    }
    return result;
}

}  // namespace belh
