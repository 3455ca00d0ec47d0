#pragma once

#include <chrono>
#include <functional>
#include <string>
#include <vector>

#include "belh/diagnostics.hpp"
#include "belh/field.hpp"
#include "belh/initial_data.hpp"
#include "belh/spectral_ops.hpp"
#include "belh/tensor_algebra.hpp"
#include "belh/transforms.hpp"

namespace belh {

// ---------------------------------------------------------------------------
// Solver configuration: physics, grid, stepping, initial data, run controls.
// ---------------------------------------------------------------------------
struct SolverConfig {
    BulkParams params;
    int n = 32;
    double box_radius = 1.0;
    double dt = 1e-3;
    double t_final = 1.0;
    int scheme_order = 2;       ///< 1 = IF Euler, 2 = two-stage IF scheme
    bool dealias = true;
    bool freeze_velocity = false;  ///< keep u = 0 (scalar-reduction experiments)
    double cfl_limit = 0.4;
    InitialData init;
    int cadence = 10;          ///< steps between diagnostics records
    int checkpoint_every = 0;  ///< steps between checkpoints; 0 = off
    std::vector<double> tail_radii;

    void validate() const {
        params.validate();
        if (!(dt > 0.0)) throw std::invalid_argument("SolverConfig: dt must be > 0");
        if (!(t_final >= 0.0)) throw std::invalid_argument("SolverConfig: t_final must be >= 0");
        if (cadence < 1) throw std::invalid_argument("SolverConfig: cadence must be >= 1");
        if (scheme_order != 1 && scheme_order != 2)
            throw std::invalid_argument("SolverConfig: scheme_order must be 1 or 2");
        const double steps = t_final / dt;
        if (t_final > 0.0 && std::abs(steps - std::round(steps)) > 1e-8 * (1.0 + steps))
            throw std::invalid_argument("SolverConfig: t_final must be a multiple of dt");
    }

    int nsteps() const { return int(std::llround(t_final / dt)); }
};

/// Per-step health report.
struct StepReport {
    double time = 0.0;      ///< time after the step
    double cfl = 0.0;       ///< advective + reactive CFL number of the accepted step
    double max_q = 0.0;
    double max_u = 0.0;
    double div_u_rel = 0.0;      ///< ||div u|| / ||grad u|| after the step
    double q_trace_drift = 0.0;  ///< max pointwise |tr Q| / (1 + |Q|) after the step
    double wall_ms = 0.0;
};

/// Numerical failure carrying the failing time.
struct SimulationError : std::runtime_error {
    double time;
    SimulationError(const std::string& what, double t)
        : std::runtime_error(what + " at t = " + std::to_string(t)), time(t) {}
};

/// Explicit (non-stiff) tendencies in spectral space.
struct Tendencies {
    std::array<CplxVec, 5> q;
    std::array<CplxVec, 3> u;
    void init(const Grid& g) {
        for (auto& f : q) f.assign(g.nspec(), {0.0, 0.0});
        for (auto& f : u) f.assign(g.nspec(), {0.0, 0.0});
    }
};

using ForcingHook = std::function<void(double t, const Grid&, Tendencies&)>;

// ---------------------------------------------------------------------------
// Stepper: exponential integrating-factor scheme. The stiff diagonal terms
// (Gamma L lap Q in the Q-equation, mu lap u - eps lap^2 u in the velocity
// equation) are integrated exactly per mode; transport, stretching, bulk
// relaxation, and the elastic stresses are explicit.
// ---------------------------------------------------------------------------
class Stepper {
public:
    explicit Stepper(const SolverConfig& cfg) : cfg_(cfg), fft_(Grid(cfg.n, cfg.box_radius)) {
        cfg_.validate();
        const Grid& g = fft_.grid();
        build_factors();
        k1_.init(g);
        k2_.init(g);
        stage_ = FieldSet(g);
        alloc_scratch(g);
    }

    const Fft& fft() const { return fft_; }
    const Grid& grid() const { return fft_.grid(); }
    const SolverConfig& config() const { return cfg_; }

    FieldSet initial_state() const { return make_initial_state(fft_, cfg_.init); }

    /// Optional forcing added to the explicit tendencies (manufactured
    /// solutions); receives spectral tendencies to update in place.
    ForcingHook forcing;

    /// Explicit tendencies of the coupled system at the state's time. The
    /// stiff linear parts are NOT included; they are handled by the
    /// integrating factors (exposed via q_factor/u_factor).
    void compute_explicit_rhs(FieldSet& state, double t, Tendencies& out) {
        const Grid& g = fft_.grid();
        if (out.q[0].size() != g.nspec()) out.init(g);
        state.ensure_spec(fft_);
        state.ensure_phys(fft_);

        const bool with_u = !cfg_.freeze_velocity;

        // derivative fields in physical space
        CplxVec& tmp = ctmp_;
        if (with_u) {
            for (int c = 0; c < 5; ++c) {
                for (int ax = 0; ax < 3; ++ax) {
                    deriv_spec(g, state.q[c].spec, ax, tmp);
                    fft_.inverse(tmp, dq_[ax][c]);
                }
                laplacian_spec(g, state.q[c].spec, tmp);
                fft_.inverse(tmp, lapq_[c]);
            }
            for (int i = 0; i < 3; ++i)
                for (int ax = 0; ax < 3; ++ax) {
                    deriv_spec(g, state.u[i].spec, ax, tmp);
                    fft_.inverse(tmp, gu_[i][ax]);
                }
        }

        const BulkParams& p = cfg_.params;
        for (std::size_t s = 0; s < g.npts(); ++s) {
            const TracelessSym3 q = state.q_at(s);
            const TracelessSym3 B = bulk_force(q, p);
            TracelessSym3 tend = p.gamma * (B - p.a * q);

            if (with_u) {
                GradQ gq;
                TracelessSym3 lapq;
                for (int c = 0; c < 5; ++c) {
                    lapq[c] = lapq_[c][s];
                    for (int ax = 0; ax < 3; ++ax) gq[ax][c] = dq_[ax][c][s];
                }
                Mat3 gum;
                for (int i = 0; i < 3; ++i)
                    for (int ax = 0; ax < 3; ++ax) gum(i, ax) = gu_[i][ax][s];
                const double ux = state.u[0].phys[s], uy = state.u[1].phys[s],
                             uz = state.u[2].phys[s];

                // transport and stretching
                tend -= ux * gq[0] + uy * gq[1] + uz * gq[2];
                tend += stretching(gum, q, p.xi);

                // stresses need the full molecular field
                const TracelessSym3 H = p.L * lapq - p.a * q + B;
                const Mat3 T = stress_tau(q, H, gq, p) + stress_sigma(q, H);
                for (int i = 0; i < 3; ++i)
                    for (int j = 0; j < 3; ++j) t_field_[3 * i + j][s] = T(i, j);

                // convective term u . grad u (component i, (grad u)_{i,ax} = d_ax u_i)
                for (int i = 0; i < 3; ++i)
                    adv_u_[i][s] = ux * gu_[i][0][s] + uy * gu_[i][1][s] + uz * gu_[i][2][s];
            }

            for (int c = 0; c < 5; ++c) tend_q_[c][s] = tend[c];
        }

        for (int c = 0; c < 5; ++c) {
            fft_.forward(tend_q_[c], out.q[c]);
            if (cfg_.dealias) dealias_spec(g, out.q[c]);
        }

        if (with_u) {
            // du = P(-u.grad u + div(tau + sigma)), assembled in spectral space
            for (int i = 0; i < 3; ++i) {
                fft_.forward(adv_u_[i], out.u[i]);
                for (auto& v : out.u[i]) v = -v;
            }
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) {
                    fft_.forward(t_field_[3 * i + j], tmp);
                    deriv_spec(g, tmp, j, tmp);
                    for (std::size_t s = 0; s < g.nspec(); ++s) out.u[i][s] += tmp[s];
                }
            if (cfg_.dealias)
                for (int i = 0; i < 3; ++i) dealias_spec(g, out.u[i]);
            leray_project_spec(g, out.u[0], out.u[1], out.u[2]);
            zero_mean_spec(out.u[0]);
            zero_mean_spec(out.u[1]);
            zero_mean_spec(out.u[2]);
        } else {
            for (auto& f : out.u)
                std::fill(f.begin(), f.end(), std::complex<double>(0.0, 0.0));
        }

        if (forcing) forcing(t, g, out);
    }

    /// Advance the state by one dt in place. Throws SimulationError on
    /// non-finite values or CFL violation.
    StepReport step(FieldSet& state) {
        const auto t_start = std::chrono::steady_clock::now();
        const Grid& g = fft_.grid();
        const double dt = cfg_.dt;
        const double t0 = state.time;

        state.ensure_spec(fft_);
        compute_explicit_rhs(state, t0, k1_);

        if (cfg_.scheme_order == 1) {
            // x_{n+1} = E (x_n + dt k1)
            for (int c = 0; c < 5; ++c)
                for (std::size_t s = 0; s < g.nspec(); ++s)
                    state.q[c].spec[s] = eq_[s] * (state.q[c].spec[s] + dt * k1_.q[c][s]);
            for (int i = 0; i < 3; ++i)
                for (std::size_t s = 0; s < g.nspec(); ++s)
                    state.u[i].spec[s] = eu_[s] * (state.u[i].spec[s] + dt * k1_.u[i][s]);
        } else {
            // two-stage scheme:
            //   x*      = E (x_n + dt k1)
            //   x_{n+1} = E x_n + (dt/2) (E k1 + k2(x*, t+dt))
            for (int c = 0; c < 5; ++c) {
                for (std::size_t s = 0; s < g.nspec(); ++s)
                    stage_.q[c].spec[s] = eq_[s] * (state.q[c].spec[s] + dt * k1_.q[c][s]);
                stage_.q[c].mark_spec();
            }
            for (int i = 0; i < 3; ++i) {
                for (std::size_t s = 0; s < g.nspec(); ++s)
                    stage_.u[i].spec[s] = eu_[s] * (state.u[i].spec[s] + dt * k1_.u[i][s]);
                stage_.u[i].mark_spec();
            }
            stage_.time = t0 + dt;
            compute_explicit_rhs(stage_, t0 + dt, k2_);
            for (int c = 0; c < 5; ++c)
                for (std::size_t s = 0; s < g.nspec(); ++s)
                    state.q[c].spec[s] =
                        eq_[s] * state.q[c].spec[s] +
                        0.5 * dt * (eq_[s] * k1_.q[c][s] + k2_.q[c][s]);
            for (int i = 0; i < 3; ++i)
                for (std::size_t s = 0; s < g.nspec(); ++s)
                    state.u[i].spec[s] =
                        eu_[s] * state.u[i].spec[s] +
                        0.5 * dt * (eu_[s] * k1_.u[i][s] + k2_.u[i][s]);
        }

        // constraint hygiene: re-project u; Q stays in the traceless
        // symmetric class by representation
        leray_project_spec(g, state.u[0].spec, state.u[1].spec, state.u[2].spec);
        if (cfg_.dealias) {
            for (auto& f : state.q) dealias_spec(g, f.spec);
            for (auto& f : state.u) dealias_spec(g, f.spec);
        }

        StepReport rep;
        rep.div_u_rel =
            divergence_ratio_spec(g, state.u[0].spec, state.u[1].spec, state.u[2].spec);

        // back to the canonical physical view
        for (auto& f : state.q) {
            f.mark_spec();
            f.ensure_phys(fft_);
            f.mark_phys();
        }
        for (auto& f : state.u) {
            f.mark_spec();
            f.ensure_phys(fft_);
            f.mark_phys();
        }
        state.time = t0 + dt;
        state.u_projected = true;

        // health metrics
        double maxq2 = 0.0, maxu2 = 0.0, trace_drift = 0.0;
        for (std::size_t s = 0; s < g.npts(); ++s) {
            double q2 = 0.0;
            for (int c = 0; c < 5; ++c) q2 += state.q[c].phys[s] * state.q[c].phys[s];
            maxq2 = std::max(maxq2, q2);
            const double u2 = state.u[0].phys[s] * state.u[0].phys[s] +
                              state.u[1].phys[s] * state.u[1].phys[s] +
                              state.u[2].phys[s] * state.u[2].phys[s];
            maxu2 = std::max(maxu2, u2);
        }
        // reconstruction drift at a fixed sample of points
        for (std::size_t s = 0; s < g.npts(); s += 97) {
            const Mat3 m = state.q_at(s).to_mat3();
            trace_drift =
                std::max(trace_drift, std::abs(m.trace()) / (1.0 + m.frobenius()));
        }
        rep.time = state.time;
        rep.max_q = std::sqrt(maxq2);
        rep.max_u = std::sqrt(maxu2);
        rep.q_trace_drift = trace_drift;

        if (!std::isfinite(rep.max_q) || !std::isfinite(rep.max_u))
            throw SimulationError("non-finite state (NaN/Inf detected)", state.time);

        // advective CFL plus an explicit reaction-stiffness estimate from the
        // scalar reduction rate Gamma (|a| + 2|b| q + 18 |c| q^2), q = |Q|/sqrt(6)
        const BulkParams& p = cfg_.params;
        const double qs = rep.max_q / kSqrt6;
        const double react =
            p.gamma * (std::abs(p.a) + 2.0 * std::abs(p.b) * qs + 18.0 * std::abs(p.c) * qs * qs);
        rep.cfl = dt * (rep.max_u / g.dx() + react);
        if (rep.cfl > cfg_.cfl_limit)
            throw SimulationError("CFL bound exceeded (cfl = " + std::to_string(rep.cfl) + ")",
                                  state.time);

        rep.wall_ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - t_start)
                          .count();
        return rep;
    }

    /// Integrating factor of the Q diffusion over one dt at spectral index s.
    double q_factor(std::size_t s) const { return eq_[s]; }
    /// Integrating factor of the velocity diffusion + hyperviscosity.
    double u_factor(std::size_t s) const { return eu_[s]; }

private:
    void build_factors() {
        const Grid& g = fft_.grid();
        const BulkParams& p = cfg_.params;
        eq_.assign(g.nspec(), 0.0);
        eu_.assign(g.nspec(), 0.0);
        std::size_t s = 0;
        for (int i = 0; i < g.n; ++i) {
            const double ki = g.wavenumber(i);
            for (int j = 0; j < g.n; ++j) {
                const double kj = g.wavenumber(j);
                for (int k = 0; k < g.nz_spec(); ++k, ++s) {
                    const double kk = k / g.box_radius;
                    const double k2 = ki * ki + kj * kj + kk * kk;
                    eq_[s] = std::exp(-p.gamma * p.L * k2 * cfg_.dt);
                    eu_[s] = std::exp(-(p.mu * k2 + p.eps * k2 * k2) * cfg_.dt);
                }
            }
        }
    }

    void alloc_scratch(const Grid& g) {
        ctmp_.assign(g.nspec(), {0.0, 0.0});
        for (auto& a : dq_)
            for (auto& f : a) f.assign(g.npts(), 0.0);
        for (auto& f : lapq_) f.assign(g.npts(), 0.0);
        for (auto& a : gu_)
            for (auto& f : a) f.assign(g.npts(), 0.0);
        for (auto& f : tend_q_) f.assign(g.npts(), 0.0);
        for (auto& f : adv_u_) f.assign(g.npts(), 0.0);
        for (auto& f : t_field_) f.assign(g.npts(), 0.0);
    }

    SolverConfig cfg_;
    Fft fft_;
    RealVec eq_, eu_;  // per-mode integrating factors
    Tendencies k1_, k2_;
    FieldSet stage_;
    CplxVec ctmp_;
    std::array<std::array<RealVec, 5>, 3> dq_;
    std::array<RealVec, 5> lapq_;
    std::array<std::array<RealVec, 3>, 3> gu_;
    std::array<RealVec, 5> tend_q_;
    std::array<RealVec, 3> adv_u_;
    std::array<RealVec, 9> t_field_;
};

// ---------------------------------------------------------------------------
// Run orchestration.
// ---------------------------------------------------------------------------
struct RunSinks {
    std::function<void(const DiagnosticsRecord&)> on_record;
    std::function<void(const StepReport&)> on_step;
    std::function<void(const FieldSet&, int step)> on_checkpoint;
};

struct RunResult {
    FieldSet state;
    std::vector<DiagnosticsRecord> records;
    std::vector<StepReport> steps;
};

/// Integrate to t_final, recording diagnostics at the configured cadence.
/// Deterministic for a fixed seed. Step failures propagate as
/// SimulationError with the failing time.
inline RunResult run(Stepper& stepper, const RunSinks& sinks = {}) {
    const SolverConfig& cfg = stepper.config();
    RunResult out;
    out.state = stepper.initial_state();
    DiagnosticsEngine diag(cfg.params, stepper.fft(), cfg.tail_radii);

    auto record = [&](FieldSet& st) {
        DiagnosticsRecord rec = diag.compute(st);
        out.records.push_back(rec);
        if (sinks.on_record) sinks.on_record(rec);
    };

    record(out.state);
    const int nsteps = cfg.nsteps();
    for (int i = 1; i <= nsteps; ++i) {
        StepReport rep = stepper.step(out.state);
        out.steps.push_back(rep);
        if (sinks.on_step) sinks.on_step(rep);
        if (i % cfg.cadence == 0 || i == nsteps) record(out.state);
        if (cfg.checkpoint_every > 0 && (i % cfg.checkpoint_every == 0 || i == nsteps) &&
            sinks.on_checkpoint)
            sinks.on_checkpoint(out.state, i);
    }
    return out;
}

inline RunResult run(const SolverConfig& cfg, const RunSinks& sinks = {}) {
    Stepper stepper(cfg);
    return run(stepper, sinks);
}

}  // namespace belh
