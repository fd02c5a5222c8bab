#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "fharm/errors.hpp"
#include "fharm/geometry.hpp"
#include "fharm/integrand.hpp"
#include "fharm/io_util.hpp"
#include "fharm/measure.hpp"
#include "fharm/solver.hpp"
#include "oracles.hpp"

using namespace fharm;

namespace {

constexpr double kPi = 3.14159265358979323846;

Integrand certified_power(double p) {
    Integrand F = make_power_integrand(p);
    F.delta_certified = verify_delta_monotone(F, 20000).delta_hat;
    return F;
}

struct Solved {
    std::shared_ptr<const Mesh> mesh;
    ScalarField u;
    Integrand F;
};

// one shared solve per degree keeps the suite fast
const Solved& ring_solution(double p, double h = 0.1, double grading = 1.0) {
    static std::map<std::tuple<double, double, double>, Solved> cache;
    const auto key = std::make_tuple(p, h, grading);
    auto it = cache.find(key);
    if (it == cache.end()) {
        Solved s;
        s.mesh = std::make_shared<const Mesh>(generate_mesh(make_domain_disk(10.0), h, grading));
        s.F = certified_power(p);
        s.u = solve_capacitary(s.mesh, s.F);
        it = cache.emplace(key, std::move(s)).first;
    }
    return it->second;
}

} // namespace

TEST_CASE("harmonic ring measure is uniform with the oracle mass") {
    const Solved& s = ring_solution(2.0);
    const BoundaryMeasure mu = boundary_measure(s.u, s.F);

    const oracle::RadialRing ring{2.0, 5.0};
    CHECK(mu.total_mass == doctest::Approx(ring.total_flux()).epsilon(0.02));
    CHECK(mu.method == "weak-identity");
    CHECK(mu.field_checksum == field_checksum(s.u));
    CHECK(mu.min_raw_weight >= -1e-8 * mu.total_mass);
    CHECK(mu.clamp_total <= 0.01 * mu.total_mass);

    // by symmetry the density is constant, so weight/length is flat
    const double density_ref = mu.total_mass / (2.0 * kPi * 5.0);
    for (const MeasureArc& arc : mu.arcs) {
        CHECK(arc.weight >= 0.0);
        CHECK(arc.weight / arc.length == doctest::Approx(density_ref).epsilon(0.02));
        CHECK(std::fabs(norm(arc.midpoint) - 5.0) <= 1e-3);
    }

    // arcs partition the circle: lengths close the full perimeter
    double len = 0.0;
    for (const MeasureArc& arc : mu.arcs) len += arc.length;
    CHECK(len == doctest::Approx(2.0 * kPi * 5.0).epsilon(1e-3));
}

TEST_CASE("measure arcs walk the outer cycle in order") {
    const Solved& s = ring_solution(2.0);
    const BoundaryMeasure mu = boundary_measure(s.u, s.F);
    REQUIRE(mu.arcs.size() >= 3);
    for (std::size_t k = 0; k < mu.arcs.size(); ++k) {
        const MeasureArc& cur = mu.arcs[k];
        const MeasureArc& nxt = mu.arcs[(k + 1) % mu.arcs.size()];
        CHECK(cur.vb == nxt.va); // consecutive arcs share a vertex
    }
    // counterclockwise: the cycle encloses positive area
    double area2 = 0.0;
    for (std::size_t k = 0; k < mu.arcs.size(); ++k) {
        const Vec2 a = s.mesh->vertices[mu.arcs[k].va];
        const Vec2 b = s.mesh->vertices[mu.arcs[k].vb];
        area2 += cross(a, b);
    }
    CHECK(area2 > 0.0);
}

TEST_CASE("total mass matches the radial flux oracle across degrees") {
    for (double p : {1.5, 3.0}) {
        CAPTURE(p);
        const Solved& s = ring_solution(p);
        const BoundaryMeasure mu = boundary_measure(s.u, s.F);
        const oracle::RadialRing ring{p, 5.0};
        CHECK(mu.total_mass == doctest::Approx(ring.total_flux()).epsilon(0.02));
        CHECK(mu.min_raw_weight >= -1e-8 * mu.total_mass);
    }
}

TEST_CASE("level flux is conserved and matches the measure mass") {
    for (double p : {2.0, 3.0}) {
        CAPTURE(p);
        const Solved& s = ring_solution(p);
        const oracle::RadialRing ring{p, 5.0};

        std::vector<double> fluxes;
        for (double t : {0.1, 0.2, 0.5, 0.8, 0.9}) {
            LevelFluxInfo info;
            const double v = level_flux(s.u, s.F, t, &info);
            CHECK(info.dropped_length == 0.0);
            CHECK(v == doctest::Approx(ring.total_flux()).epsilon(0.02));
            fluxes.push_back(v);
        }
        const auto [lo, hi] = std::minmax_element(fluxes.begin(), fluxes.end());
        const double mean = std::accumulate(fluxes.begin(), fluxes.end(), 0.0) / fluxes.size();
        CHECK((*hi - *lo) <= 0.02 * mean);

        const BoundaryMeasure mu = boundary_measure(s.u, s.F);
        CHECK(std::fabs(mu.total_mass - level_flux(s.u, s.F, 0.05)) <= 0.03 * mu.total_mass);
    }
}

TEST_CASE("ball queries respect the uniform-measure oracle") {
    const Solved& s = ring_solution(2.0);
    const BoundaryMeasure mu = boundary_measure(s.u, s.F);

    CHECK(measure_ball(mu, {0.0, 0.0}, 11.0) == doctest::Approx(mu.total_mass));
    CHECK(measure_ball(mu, {5.0, 0.0}, 1e-6) == 0.0);
    CHECK_THROWS_AS(measure_ball(mu, {5.0, 0.0}, 0.0), InputError);

    // a small ball at the circle catches mass ~ chord/(2 pi R) of the total
    const Vec2 w{5.0, 0.0};
    const double r = 0.8;
    const double expected = (2.0 * r) / (2.0 * kPi * 5.0) * mu.total_mass;
    CHECK(measure_ball(mu, w, r) == doctest::Approx(expected).epsilon(0.08));

    // monotone in the radius and capped by the total
    double prev = 0.0;
    for (double rr : {0.2, 0.4, 0.8, 2.0, 20.0}) {
        const double m = measure_ball(mu, w, rr);
        CHECK(m >= prev);
        CHECK(m <= mu.total_mass + 1e-12);
        prev = m;
    }
}

TEST_CASE("measure and solution are two-sided comparable near the boundary") {
    // the smallest probe ball has radius 0.05, so refine the boundary well
    // below that scale to keep ball masses from jumping arc by arc
    const Solved& s = ring_solution(2.0, 0.1, 0.2);
    const BoundaryMeasure mu = boundary_measure(s.u, s.F);

    // the two ratios differ by roughly mass(B(2r))/mass(B(r/2)), a factor of
    // about 4 on a uniform measure, so each gets its own stability band
    double lo_low = std::numeric_limits<double>::infinity(), hi_low = 0.0;
    double lo_up = std::numeric_limits<double>::infinity(), hi_up = 0.0;
    for (double ang : {0.0, 1.0, 2.2, 4.0}) {
        const Vec2 w{5.0 * std::cos(ang), 5.0 * std::sin(ang)};
        for (double r : {0.1, 0.2, 0.4}) {
            const ComparabilityReport rep =
                check_measure_solution_comparability(s.u, mu, w, r, 2.0);
            CAPTURE(ang);
            CAPTURE(r);
            REQUIRE(!rep.degenerate);
            CHECK(rep.ratio_lower > 0.0);
            CHECK(rep.ratio_upper > 0.0);
            CHECK(rep.ratio_upper <= rep.ratio_lower); // mass grows with the ball
            lo_low = std::min(lo_low, rep.ratio_lower);
            hi_low = std::max(hi_low, rep.ratio_lower);
            lo_up = std::min(lo_up, rep.ratio_upper);
            hi_up = std::max(hi_up, rep.ratio_upper);
        }
    }
    // stability: each ratio stays within a modest band over the whole sweep
    CHECK(hi_low / lo_low <= 3.0);
    CHECK(hi_up / lo_up <= 3.0);

    const ComparabilityReport far =
        check_measure_solution_comparability(s.u, mu, {0.0, 0.0}, 0.3, 2.0);
    CHECK(far.degenerate); // no arcs near the center
}

TEST_CASE("weak-identity and level-limit extractions agree arcwise") {
    const Solved& s = ring_solution(2.0);
    const BoundaryMeasure weak = boundary_measure(s.u, s.F);
    const BoundaryMeasure limit = measure_via_level_limit(s.u, s.F, 0.05);

    CHECK(limit.method == "level-limit");
    REQUIRE(limit.arcs.size() == weak.arcs.size());
    CHECK(limit.total_mass == doctest::Approx(weak.total_mass).epsilon(0.03));

    // mutual absolute continuity proxy: windowed masses stay comparable
    double ratio_lo = std::numeric_limits<double>::infinity(), ratio_hi = 0.0;
    for (double ang = 0.0; ang < 2.0 * kPi; ang += 0.3) {
        const Vec2 w{5.0 * std::cos(ang), 5.0 * std::sin(ang)};
        const double a = measure_ball(weak, w, 0.5);
        const double b = measure_ball(limit, w, 0.5);
        REQUIRE(a > 0.0);
        REQUIRE(b > 0.0);
        ratio_lo = std::min(ratio_lo, b / a);
        ratio_hi = std::max(ratio_hi, b / a);
    }
    CHECK(ratio_lo >= 0.5);
    CHECK(ratio_hi <= 2.0);
}

TEST_CASE("dilating the domain rescales the measure covariantly") {
    // solving on the domain scaled by d multiplies ball masses by d^{2-p}
    const double d = 2.0, p = 3.0, h = 0.15;
    const Solved& s = ring_solution(p, h);
    const BoundaryMeasure mu = boundary_measure(s.u, s.F);

    const Domain big = dilate_domain(make_domain_disk(10.0), d);
    auto big_mesh = std::make_shared<const Mesh>(generate_mesh(big, h * d, 1.0));
    const ScalarField u_big = solve_capacitary(big_mesh, s.F);
    const BoundaryMeasure mu_big = boundary_measure(u_big, s.F);

    const double factor = std::pow(d, 2.0 - p);
    CHECK(mu_big.total_mass == doctest::Approx(factor * mu.total_mass).epsilon(0.02));
    for (double ang : {0.0, 0.7, 1.9, 3.1, 4.6, 5.8}) {
        const Vec2 w{5.0 * std::cos(ang), 5.0 * std::sin(ang)};
        const double m_small = measure_ball(mu, w, 0.6);
        const double m_big = measure_ball(mu_big, w * d, 0.6 * d);
        CAPTURE(ang);
        CHECK(m_big == doctest::Approx(factor * m_small).epsilon(0.02));
    }
}

TEST_CASE("measure files round-trip with provenance") {
    const Solved& s = ring_solution(2.0);
    const BoundaryMeasure mu = boundary_measure(s.u, s.F);
    write_measure_csv(mu, "measure_test.csv");

    const BoundaryMeasure back = read_measure_csv("measure_test.csv");
    CHECK(back.method == mu.method);
    CHECK(back.field_checksum == mu.field_checksum);
    CHECK(back.total_mass == doctest::Approx(mu.total_mass).epsilon(1e-12));
    REQUIRE(back.arcs.size() == mu.arcs.size());
    for (std::size_t k = 0; k < mu.arcs.size(); ++k) {
        CHECK(back.arcs[k].weight == mu.arcs[k].weight);
        CHECK(back.arcs[k].length == mu.arcs[k].length);
        CHECK(back.arcs[k].midpoint.x == mu.arcs[k].midpoint.x);
    }
    std::remove("measure_test.csv");

    write_text_file("measure_bad.csv", "# totals 1 field 0 method x\n");
    CHECK_THROWS_AS(read_measure_csv("measure_bad.csv"), InputError);
    std::remove("measure_bad.csv");
}

TEST_CASE("extraction rejects unconverged fields") {
    const Solved& s = ring_solution(2.0);

    // bumps of alternating sign just inside the outer circle drive roughly
    // half the boundary fluxes inward, far past the 1% clamp allowance
    ScalarField trashed = s.u;
    for (std::size_t v = 0; v < trashed.values.size(); ++v) {
        if (s.mesh->vertex_tag[v] >= 0) continue;
        const Vec2 z = s.mesh->vertices[v];
        if (norm(z) < 4.5) continue;
        trashed.values[v] += std::sin(40.0 * std::atan2(z.y, z.x)) >= 0.0 ? 0.3 : -0.3;
    }
    trashed.tri_grad.clear();
    CHECK_THROWS_AS(boundary_measure(trashed, s.F), NumericalError);

    ScalarField empty;
    CHECK_THROWS_AS(boundary_measure(empty, s.F), InputError);
    CHECK_THROWS_AS(measure_via_level_limit(s.u, s.F, 0.0), InputError);
    CHECK_THROWS_AS(measure_via_level_limit(s.u, s.F, 1.0), InputError);
}
