#include <catch2/catch_amalgamated.hpp>

#include "belh/uniaxial.hpp"

using namespace belh;

TEST_CASE("scalar tendency") {
    ScalarRun cfg;
    cfg.n = 255;
    cfg.ell = 20.0;

    SECTION("zero profile") {
        std::vector<double> q(cfg.n, 0.0);
        for (double v : scalar_rhs(q, cfg)) REQUIRE(v == 0.0);
    }

    SECTION("constant interior value away from the boundary") {
        cfg.gamma = 1.0;
        cfg.a = 1.0;
        cfg.b = 2.0;
        cfg.c = -1.0;
        std::vector<double> q(cfg.n, 1.0);
        auto r = scalar_rhs(q, cfg);
        // at the midpoint the discrete Laplacian of a constant vanishes
        REQUIRE(r[cfg.n / 2] == Catch::Approx(-1.0 + 2.0 + 6.0).margin(1e-12));
    }

    SECTION("first eigenfunction with linear bulk") {
        ScalarRun ecfg;
        ecfg.n = 511;
        ecfg.ell = M_PI;
        ecfg.gamma = 1.3;
        ecfg.L = 0.7;
        ecfg.a = 0.4;
        ecfg.b = 0.0;
        ecfg.c = 0.0;
        auto q = ScalarRun::eigen_profile(ecfg.n, ecfg.ell, 0.8);
        auto r = scalar_rhs(q, ecfg);
        const double lam_h = ecfg.lambda1_discrete();
        // phi_1 is an exact eigenvector of the discrete Laplacian
        for (int j = 0; j < ecfg.n; ++j)
            REQUIRE(r[j] ==
                    Catch::Approx(-ecfg.gamma * (ecfg.L * lam_h + ecfg.a) * q[j]).margin(1e-11));
        // and the discrete eigenvalue converges at second order
        REQUIRE(std::abs(lam_h - ecfg.lambda1()) <=
                ecfg.lambda1() * std::pow(M_PI * ecfg.h() / ecfg.ell, 2));
    }
}

TEST_CASE("Kaplan moment") {
    const double ell = M_PI;
    const int n = 4095;

    SECTION("zero profile") {
        std::vector<double> q(n, 0.0);
        REQUIRE(kaplan_moment(q, ell) == 0.0);
    }

    SECTION("eigenfunction pairs to ell/2 (discrete orthogonality)") {
        auto q = ScalarRun::eigen_profile(n, ell, 1.0);
        REQUIRE(kaplan_moment(q, ell) == Catch::Approx(0.5 * ell).epsilon(1e-12));
    }

    SECTION("constant pairs to 2 ell s / pi up to quadrature order") {
        const double s = 0.7;
        std::vector<double> q(n, s);
        const double expect = 2.0 * ell * s / M_PI;
        const double h = ell / (n + 1);
        REQUIRE(std::abs(kaplan_moment(q, ell) - expect) <=
                2.0 * expect * std::pow(M_PI * h / ell, 2));
    }
}

TEST_CASE("stable potential: bounded relaxation, no blow-up flag") {
    ScalarRun cfg;
    cfg.ell = M_PI;
    cfg.n = 511;
    cfg.dt = 1e-3;
    cfg.t_final = 2.0;
    cfg.gamma = 1.0;
    cfg.L = 1.0;
    cfg.a = 0.0;
    cfg.b = 0.0;
    cfg.c = 1.0;
    cfg.q0 = ScalarRun::eigen_profile(cfg.n, cfg.ell, 2.0);
    BlowupReport rep = run_scalar(cfg);
    REQUIRE_FALSE(rep.blown_up);
    REQUIRE(rep.final_time == Catch::Approx(cfg.t_final));
    double max0 = rep.series.front().max_q, maxT = rep.series.back().max_q;
    REQUIRE(maxT < max0);
    // nonnegative data stays nonnegative (monitored maximum principle)
    for (const auto& s : rep.series) REQUIRE(s.min_q >= -1e-10);
}

TEST_CASE("unstable potential: Kaplan blow-up with ODE comparison domination") {
    ScalarRun cfg;
    cfg.ell = M_PI;
    cfg.n = 511;
    cfg.dt = 1e-3;
    cfg.t_final = 5.0;
    cfg.gamma = 1.0;
    cfg.L = 1.0;
    cfg.a = 0.0;
    cfg.b = 0.0;
    cfg.c = -1.0;
    cfg.cadence = 1;
    cfg.q0 = ScalarRun::eigen_profile(cfg.n, cfg.ell, 2.0);
    BlowupReport rep = run_scalar(cfg);

    REQUIRE(rep.blown_up);
    REQUIRE(std::isfinite(rep.blowup_time));
    REQUIRE(rep.blowup_time < cfg.t_final);
    REQUIRE(rep.lambda1 == Catch::Approx(1.0));

    // threshold sqrt(alpha/beta), beta = 6|c|/(int phi_1)^2, alpha = L lambda_1
    const double int_phi = 2.0 * cfg.ell / M_PI;
    const double beta = 6.0 * std::abs(cfg.c) / (int_phi * int_phi);
    const double alpha = cfg.L * cfg.lambda1();
    REQUIRE(rep.comparison_threshold == Catch::Approx(std::sqrt(alpha / beta)));
    // m0 = 2 * ell/2 = pi > threshold, so the crossing happens at once
    REQUIRE(rep.threshold_crossing_time <= 2.0 * cfg.dt);

    // the PDE moment dominates the comparison ODE m' = Gamma(-alpha m + beta m^3)
    // integrated with RK4 on a fine grid between the records
    double m_ode = rep.series.front().moment;
    std::size_t k = 1;
    auto rhs = [&](double m) { return cfg.gamma * (-alpha * m + beta * m * m * m); };
    bool dominated = true;
    double t = rep.series.front().time;
    while (k < rep.series.size() && std::isfinite(m_ode)) {
        const double t_next = rep.series[k].time;
        const int sub = 64;
        const double hh = (t_next - t) / sub;
        for (int i = 0; i < sub && std::isfinite(m_ode); ++i) {
            const double k1 = rhs(m_ode);
            const double k2 = rhs(m_ode + 0.5 * hh * k1);
            const double k3 = rhs(m_ode + 0.5 * hh * k2);
            const double k4 = rhs(m_ode + hh * k3);
            m_ode += hh / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            if (m_ode > 1e12) m_ode = std::numeric_limits<double>::infinity();
        }
        if (std::isfinite(m_ode)) {
            REQUIRE(rep.series[k].moment >= m_ode - 1e-6 * (1.0 + m_ode));
            dominated = dominated && rep.series[k].moment >= m_ode - 1e-6 * (1.0 + m_ode);
        }
        t = t_next;
        ++k;
    }
    REQUIRE(dominated);

    // after the crossing the moment is eventually monotone increasing
    bool monotone = true;
    for (std::size_t i = 2; i + 1 < rep.series.size(); ++i)
        if (rep.series[i].time > rep.threshold_crossing_time)
            monotone = monotone && rep.series[i + 1].moment >= rep.series[i].moment - 1e-12;
    REQUIRE(monotone);

    // growth of 1/m^2 approaches the theory slope -2 Gamma beta near blow-up
    REQUIRE(std::isfinite(rep.growth_rate_fit));
    REQUIRE(rep.growth_rate_fit < 0.0);
    REQUIRE(rep.growth_rate_fit ==
            Catch::Approx(-2.0 * cfg.gamma * beta).epsilon(0.25));
}

TEST_CASE("quadratic focusing at c = 0 with sign-chosen data") {
    ScalarRun cfg;
    cfg.ell = M_PI;
    cfg.n = 511;
    cfg.dt = 1e-3;
    cfg.t_final = 10.0;
    cfg.gamma = 1.0;
    cfg.L = 1.0;
    cfg.a = 0.0;
    cfg.b = 1.0;
    cfg.c = 0.0;
    cfg.q0 = ScalarRun::eigen_profile(cfg.n, cfg.ell, 3.0);  // m0 = 3 pi/2 > threshold 2
    BlowupReport rep = run_scalar(cfg);
    REQUIRE(rep.blown_up);
    REQUIRE(std::isfinite(rep.blowup_time));
    REQUIRE(rep.comparison_threshold == Catch::Approx(2.0));
}

TEST_CASE("uniaxial embedding") {
    const double ell = M_PI;
    Grid g(32, ell / M_PI);
    Fft fft(g);

    SECTION("zero profile embeds to the zero state") {
        std::vector<double> q(511, 0.0);
        FieldSet state = embed_uniaxial(q, ell, fft);
        for (const auto& f : state.q) REQUIRE(max_abs(f.phys) == 0.0);
        for (const auto& f : state.u) REQUIRE(max_abs(f.phys) == 0.0);
    }

    SECTION("constant profile embeds as +-A0 across the odd reflection") {
        std::vector<double> q(511, 1.0);
        FieldSet state = embed_uniaxial(q, ell, fft);
        // first half: Q = A0; reflected half: Q = -A0; Dirichlet nodes: 0
        auto at = [&](int i) { return state.q_at(g.phys_index(i, 2, 3)).to_mat3(); };
        REQUIRE(belh::test::max_abs_diff(at(5), Mat3::diag(2, -1, -1)) < 1e-14);
        REQUIRE(belh::test::max_abs_diff(at(g.n / 2 + 5), Mat3::diag(-2, 1, 1)) < 1e-14);
        REQUIRE(at(0).frobenius() == 0.0);
        REQUIRE(at(g.n / 2).frobenius() == 0.0);
    }

    SECTION("misaligned grids are rejected") {
        std::vector<double> q(100, 0.0);
        REQUIRE_THROWS_AS(embed_uniaxial(q, ell, fft), std::invalid_argument);
        Grid g2(32, 1.7);
        Fft fft2(g2);
        std::vector<double> q2(511, 0.0);
        REQUIRE_THROWS_AS(embed_uniaxial(q2, ell, fft2), std::invalid_argument);
    }
}

TEST_CASE("cross-solver consistency over a short horizon") {
    UniaxialCompareConfig cc;
    cc.ell = M_PI;
    cc.scalar_n = 2047;
    cc.tensor_n = 32;
    cc.dt = 5e-4;
    cc.t_final = 0.1;
    cc.gamma = 1.0;
    cc.L = 1.0;
    cc.a = 1.0;
    cc.b = 0.0;
    cc.c = 1.0;
    cc.amplitude = 0.1;
    cc.cadence = 50;
    UniaxialCompareResult res = run_compare_uniaxial(cc);
    INFO("max |q_tensor - q_scalar| = " << res.max_q_diff
                                        << ", uniaxial deviation = " << res.max_deviation);
    REQUIRE(res.max_q_diff <= 1e-6);
    // with frozen velocity the tensor state stays exactly uniaxial
    REQUIRE(res.max_deviation <= 1e-10);

    // b != 0 breaks the odd-reflection equivalence and is rejected
    UniaxialCompareConfig bad = cc;
    bad.b = 0.5;
    REQUIRE_THROWS_AS(run_compare_uniaxial(bad), std::invalid_argument);
}
