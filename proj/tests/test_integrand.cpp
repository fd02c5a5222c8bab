#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "fharm/errors.hpp"
#include "fharm/integrand.hpp"
#include "oracles.hpp"

using namespace fharm;

static bool close_rel(double a, double b, double tol) {
    return std::fabs(a - b) <= tol * std::max({1.0, std::fabs(a), std::fabs(b)});
}

TEST_CASE("power integrand evaluates |eta|^p and its gradient") {
    Integrand F2 = make_power_integrand(2.0);
    CHECK(eval_f(F2, {3.0, 4.0}) == doctest::Approx(25.0).epsilon(1e-14));
    Vec2 g = grad_f(F2, {3.0, 4.0});
    CHECK(g.x == doctest::Approx(6.0).epsilon(1e-14));
    CHECK(g.y == doctest::Approx(8.0).epsilon(1e-14));

    Integrand F3 = make_power_integrand(3.0);
    Vec2 g3 = grad_f(F3, {1.0, 0.0});
    CHECK(g3.x == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(g3.y == doctest::Approx(0.0).epsilon(1e-14));

    Integrand F4 = make_power_integrand(4.0);
    Sym2 h = hessian_f(F4, {1.0, 0.0});
    CHECK(h.xx == doctest::Approx(12.0).epsilon(1e-12));
    CHECK(h.yy == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(h.xy == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("quadratic form integrand") {
    Integrand F = make_quadratic_integrand(2.0, 0.0, 1.0);
    CHECK(eval_f(F, {1.0, 1.0}) == doctest::Approx(3.0).epsilon(1e-14));
    Sym2 h = hessian_f(F, {0.7, -0.3});
    CHECK(h.xx == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(h.yy == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(h.xy == doctest::Approx(0.0).epsilon(1e-12));
    // constant Hessian extends to the origin
    Sym2 h0 = hessian_f(F, {0.0, 0.0});
    CHECK(h0.xx == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("degree must exceed 1") {
    CHECK_THROWS_AS(make_power_integrand(1.0), InputError);
    CHECK_THROWS_AS(make_power_integrand(0.5), InputError);
}

TEST_CASE("homogeneity of degree p") {
    for (double p : {1.5, 2.0, 2.5, 3.0, 4.0}) {
        Integrand F = make_power_integrand(p);
        for (double s : {0.03, 0.7, 2.0, 19.0}) {
            for (int k = 0; k < 12; ++k) {
                const double th = 2.0 * M_PI * k / 12.0;
                Vec2 eta{1.3 * std::cos(th), 1.3 * std::sin(th)};
                const double lhs = eval_f(F, eta * s);
                const double rhs = std::pow(s, p) * eval_f(F, eta);
                CHECK(close_rel(lhs, rhs, 1e-12));
            }
        }
    }
    Integrand Q = make_quadratic_integrand(2.0, 0.3, 1.0);
    CHECK(close_rel(eval_f(Q, {0.4, -2.2}), 4.0 * eval_f(Q, {0.2, -1.1}), 1e-13));
}

TEST_CASE("Euler identities on a grid") {
    std::vector<Integrand> fs = {make_power_integrand(1.5), make_power_integrand(2.0),
                                 make_power_integrand(3.0), make_quadratic_integrand(2.0, 0.4, 1.0)};
    for (const Integrand& F : fs) {
        double worst0 = 0.0, worst1 = 0.0;
        for (int i = 0; i < 100; ++i) {
            for (int j = 0; j < 100; ++j) {
                Vec2 eta{-2.0 + 4.0 * (i + 0.5) / 100.0, -2.0 + 4.0 * (j + 0.5) / 100.0};
                if (norm(eta) < 1e-3) continue;
                const double f = eval_f(F, eta);
                const Vec2 g = grad_f(F, eta);
                const Sym2 h = hessian_f(F, eta);
                const double e0 = std::fabs(dot(eta, g) - F.p * f) / std::max(1.0, std::fabs(F.p * f));
                const Vec2 he = h.apply(eta);
                const Vec2 want = g * (F.p - 1.0);
                const double scale = std::max(1.0, norm(want));
                const double e1 = norm(he - want) / scale;
                worst0 = std::max(worst0, e0);
                worst1 = std::max(worst1, e1);
            }
        }
        CHECK(worst0 <= 1e-10);
        CHECK(worst1 <= 1e-10);
    }
}

TEST_CASE("gradient and Hessian agree with finite differences") {
    std::vector<Integrand> fs = {make_power_integrand(1.5), make_power_integrand(3.0),
                                 make_quadratic_integrand(1.4, -0.2, 0.9)};
    // sampled profile: table of a smooth positive function
    std::vector<double> tab(1024);
    for (int i = 0; i < 1024; ++i) {
        const double th = 2.0 * M_PI * i / 1024.0;
        tab[i] = 1.0 + 0.3 * std::cos(th) + 0.12 * std::sin(2.0 * th);
    }
    fs.push_back(make_sampled_integrand(2.5, tab));

    for (const Integrand& F : fs) {
        auto fun = [&](Vec2 x) { return eval_f(F, x); };
        for (Vec2 eta : {Vec2{1.1, 0.4}, Vec2{-0.8, 0.9}, Vec2{0.05, -1.7}, Vec2{2.4, 2.2}}) {
            const Vec2 g = grad_f(F, eta);
            const Vec2 gfd = oracle::fd_gradient(fun, eta, 1e-5);
            CHECK(norm(g - gfd) <= 1e-6 * std::max(1.0, norm(g)));
            const Sym2 h = hessian_f(F, eta);
            const Sym2 hfd = oracle::fd_hessian(fun, eta, 3e-4);
            const double scale = std::max({1.0, std::fabs(h.xx), std::fabs(h.yy)});
            CHECK(std::fabs(h.xx - hfd.xx) <= 1e-5 * scale);
            CHECK(std::fabs(h.yy - hfd.yy) <= 1e-5 * scale);
            CHECK(std::fabs(h.xy - hfd.xy) <= 1e-5 * scale);
        }
    }
}

TEST_CASE("origin handling") {
    Integrand F15 = make_power_integrand(1.5);
    CHECK(eval_f(F15, {0.0, 0.0}) == 0.0);
    CHECK_THROWS_AS(grad_f(F15, {0.0, 0.0}), NumericalError);
    CHECK_THROWS_AS(hessian_f(F15, {0.0, 0.0}), NumericalError);

    Integrand F3 = make_power_integrand(3.0);
    Vec2 g0 = grad_f(F3, {0.0, 0.0});
    CHECK(norm(g0) == 0.0);
    Sym2 h0 = hessian_f(F3, {0.0, 0.0});
    CHECK(h0.xx == 0.0);
    CHECK(h0.yy == 0.0);

    // mollified evaluation is finite at the origin for every p
    Integrand M = mollify(F15, 0.25);
    const double v0 = eval_f(M, {0.0, 0.0});
    CHECK(std::isfinite(v0));
    CHECK(v0 > 0.0);
}

TEST_CASE("mollification argument checks") {
    Integrand F = make_power_integrand(3.0);
    CHECK_THROWS_AS(mollify(F, -0.1), InputError);
    Integrand M = mollify(F, 0.2);
    CHECK(M.epsilon == doctest::Approx(0.2));
    CHECK_THROWS_AS(mollify(M, 0.1), InputError);
    // eps = 0 keeps the plain integrand
    Integrand Z = mollify(F, 0.0);
    CHECK(eval_f(Z, {1.2, -0.3}) == doctest::Approx(eval_f(F, {1.2, -0.3})).epsilon(1e-15));
}

TEST_CASE("mollifying |eta|^2 adds the exact second-moment constant") {
    // independent Simpson computation of m2 = int bump |w|^2 / int bump
    const int n = 20000;
    double num = 0.0, den = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double rho = double(i) / n;
        const double w = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        const double b = (rho < 1.0) ? std::exp(1.0 / (rho * rho - 1.0)) : 0.0;
        num += w * b * rho * rho * rho;
        den += w * b * rho;
    }
    const double m2_ref = num / den;
    CHECK(close_rel(mollifier_moments().m2, m2_ref, 1e-9));

    Integrand F = make_power_integrand(2.0);
    for (double eps : {0.5, 0.2, 0.05}) {
        Integrand M = mollify(F, eps);
        for (Vec2 eta : {Vec2{1.0, 0.0}, Vec2{0.3, -0.4}, Vec2{0.0, 0.0}, Vec2{1.4, 1.1}}) {
            const double got = eval_f(M, eta);
            const double want = norm2(eta) + m2_ref * eps * eps;
            CHECK(close_rel(got, want, 1e-6));
        }
    }
}

TEST_CASE("mollified integrand approaches the plain one as eps halves") {
    Integrand F = make_power_integrand(3.0);
    double prev = 1e300;
    for (double eps : {0.4, 0.2, 0.1, 0.05}) {
        Integrand M = mollify(F, eps);
        double sup = 0.0;
        for (int i = 0; i < 40; ++i) {
            const double r = 1.0 + i / 39.0;
            for (int j = 0; j < 16; ++j) {
                const double th = 2.0 * M_PI * j / 16.0;
                Vec2 eta{r * std::cos(th), r * std::sin(th)};
                sup = std::max(sup, std::fabs(eval_f(M, eta) - eval_f(F, eta)));
            }
        }
        CHECK(sup < prev);
        CHECK(sup <= 3.0 * eps); // first-order in eps on 1 <= |eta| <= 2
        prev = sup;
    }
}

TEST_CASE("mollified values match the independent reference quadrature") {
    for (const Integrand& F : {make_power_integrand(1.5), make_power_integrand(3.0),
                               make_quadratic_integrand(1.3, 0.2, 0.8)}) {
        Integrand M = mollify(F, 0.3);
        for (Vec2 eta : {Vec2{1.0, 0.2}, Vec2{-0.9, 0.8}, Vec2{0.6, -1.4}}) {
            const double got = eval_f(M, eta);
            const double ref = oracle::mollify_value_reference(F, eta, 0.3);
            CHECK(close_rel(got, ref, 2e-5));
        }
    }
}

TEST_CASE("mollified gradient is consistent with mollified values") {
    Integrand F = make_power_integrand(1.5);
    Integrand M = mollify(F, 0.25);
    auto fun = [&](Vec2 x) { return eval_f(M, x); };
    for (Vec2 eta : {Vec2{0.8, 0.1}, Vec2{-0.4, 0.6}, Vec2{0.05, 0.02}}) {
        const Vec2 g = grad_f(M, eta);
        const Vec2 gfd = oracle::fd_gradient(fun, eta, 1e-4);
        CHECK(norm(g - gfd) <= 2e-5 * std::max(1.0, norm(g)));
    }
}

TEST_CASE("mollified gradient differences satisfy the shifted sandwich") {
    // <grad f_eps(a)-grad f_eps(b), a-b> comparable to (|a|+|b|+eps)^{p-2} |a-b|^2
    for (double p : {1.5, 3.0}) {
        Integrand M = mollify(make_power_integrand(p), 0.3);
        double qmin = 1e300, qmax = 0.0;
        for (int i = 0; i < 12; ++i) {
            for (int j = 0; j < 12; ++j) {
                const double t1 = 2.0 * M_PI * i / 12.0, t2 = 2.0 * M_PI * (j + 0.41) / 12.0;
                Vec2 a{1.1 * std::cos(t1), 1.1 * std::sin(t1)};
                Vec2 b{0.25 * std::cos(t2), 0.25 * std::sin(t2)};
                const Vec2 de = a - b;
                const double lhs = dot(grad_f(M, a) - grad_f(M, b), de);
                const double q = lhs / (std::pow(norm(a) + norm(b) + 0.3, p - 2.0) * norm2(de));
                qmin = std::min(qmin, q);
                qmax = std::max(qmax, q);
            }
        }
        CHECK(qmin > 0.0);
        CHECK(qmax / qmin <= 100.0);
    }
}

TEST_CASE("delta estimate is exact for the quadratic power") {
    Integrand F = make_power_integrand(2.0);
    DeltaEstimate est = verify_delta_monotone(F, 10000);
    CHECK(est.delta_hat >= 1.0 - 1e-6);
}

TEST_CASE("delta estimate matches the dense-grid scan for |eta|^3") {
    Integrand F = make_power_integrand(3.0);
    const double dense = oracle::dense_delta_scan(F, 1000, 1000, 0.1, 10.0);
    DeltaEstimate est = verify_delta_monotone(F, 20000, 0.1, 10.0);
    CHECK(std::fabs(est.delta_hat - dense) <= 0.02 * std::fabs(dense));
    CHECK(est.delta_hat < 1.0);
    CHECK(est.delta_hat > 0.8);
}

TEST_CASE("delta estimate is invariant under scaling the radius range") {
    Integrand F = make_power_integrand(1.5);
    DeltaEstimate a = verify_delta_monotone(F, 20000, 0.25, 4.0, 7);
    DeltaEstimate b = verify_delta_monotone(F, 20000, 0.5, 8.0, 7);
    CHECK(std::fabs(a.delta_hat - b.delta_hat) <= 0.02);
}

TEST_CASE("amplified anisotropy is flagged as non-monotone") {
    // profile 1 + a cos^2(theta) with p = 1.5 loses convexity once a > 3
    double a_fail = 0.0;
    for (double a : {0.9, 1.8, 2.7, 3.6, 4.5}) {
        Integrand F;
        F.p = 1.5;
        F.profile = AngularProfile::quadratic(1.0 + a, 0.0, 1.0);
        const double dense = oracle::dense_delta_scan(F, 400, 400, 0.2, 5.0);
        if (dense <= 0.0) {
            a_fail = a;
            DeltaEstimate est = verify_delta_monotone(F, 20000, 0.2, 5.0);
            CHECK(est.delta_hat <= 0.0);
            break;
        }
    }
    CHECK(a_fail > 0.0);
}

TEST_CASE("quasiconformal constant from delta") {
    CHECK(quasiconformal_K(1.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(quasiconformal_K(0.6) == doctest::Approx(9.0).epsilon(1e-12));
    CHECK(quasiconformal_K(0.8) == doctest::Approx(4.0).epsilon(1e-12));
    CHECK_THROWS_AS(quasiconformal_K(0.0), InputError);
    CHECK_THROWS_AS(quasiconformal_K(1.2), InputError);
    CHECK_THROWS_AS(quasiconformal_K(-0.3), InputError);
}

TEST_CASE("structure constants") {
    Integrand P = make_power_integrand(2.5);
    StructureConstants sp = structure_constants(P, 4000);
    CHECK(sp.M == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_FALSE(sp.K.has_value());

    Integrand Q = make_quadratic_integrand(2.0, 0.0, 1.0);
    StructureConstants sq = structure_constants(Q, 4000);
    CHECK(sq.M == doctest::Approx(2.0).epsilon(1e-12));

    // |eta|^2: f = 1 and |eta||grad f| = 2 on the unit circle, and
    // <grad f(a)-grad f(b), a-b> = 2|a-b|^2 exactly, so the sandwich constant is 2
    Integrand F2 = make_power_integrand(2.0);
    StructureConstants s2 = structure_constants(F2, 4000);
    CHECK(s2.M_prime == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(s2.c_star_mono == doctest::Approx(2.0).epsilon(1e-10));

    F2.delta_certified = 0.8;
    StructureConstants s2k = structure_constants(F2, 4000);
    CHECK(s2k.K.has_value());
    CHECK(*s2k.K == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("sandwich constant for |eta|^3 matches the dense scan within 10 percent") {
    Integrand F = make_power_integrand(3.0);
    const double dense = oracle::dense_sandwich_scan(F, 600, 600, 0.1, 10.0);
    StructureConstants sc = structure_constants(F, 30000);
    CHECK(std::fabs(sc.c_star_mono - dense) <= 0.10 * dense);
}

TEST_CASE("sampled profile reproduces its generating quadratic form") {
    std::vector<double> tab(1024);
    for (int i = 0; i < 1024; ++i) {
        const double th = 2.0 * M_PI * i / 1024.0;
        const double c = std::cos(th), s = std::sin(th);
        tab[i] = 1.7 * c * c + 2.0 * 0.25 * c * s + 0.9 * s * s;
    }
    Integrand S = make_sampled_integrand(2.0, tab);
    Integrand Q = make_quadratic_integrand(1.7, 0.25, 0.9);
    for (Vec2 eta : {Vec2{1.0, 0.3}, Vec2{-0.5, 1.2}, Vec2{2.0, -0.7}}) {
        CHECK(close_rel(eval_f(S, eta), eval_f(Q, eta), 1e-9));
        CHECK(norm(grad_f(S, eta) - grad_f(Q, eta)) <= 1e-7 * norm(grad_f(Q, eta)));
        Sym2 hs = hessian_f(S, eta), hq = hessian_f(Q, eta);
        CHECK(std::fabs(hs.xx - hq.xx) <= 1e-5 * std::fabs(hq.xx));
        CHECK(std::fabs(hs.yy - hq.yy) <= 1e-5 * std::fabs(hq.yy));
    }
}

TEST_CASE("profile positivity is enforced") {
    CHECK_THROWS_AS(AngularProfile::constant(0.0), InputError);
    CHECK_THROWS_AS(AngularProfile::quadratic(1.0, 2.0, 1.0), InputError);
    std::vector<double> bad(32, 1.0);
    bad[7] = -0.1;
    CHECK_THROWS_AS(AngularProfile::sampled(bad), InputError);
}
