#include "fharm/integrand.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

#include "fharm/errors.hpp"
#include "fharm/quadrature.hpp"

namespace fharm {

namespace {

const double kPi = 3.14159265358979323846;

double frac(double x) { return x - std::floor(x); }

} // namespace

// ---------------------------------------------------------------------------
// AngularProfile

AngularProfile AngularProfile::constant(double value) {
    if (!(value > 0.0)) throw InputError("angular profile must be strictly positive");
    AngularProfile g;
    g.kind_ = Kind::Constant;
    g.const_value_ = value;
    return g;
}

AngularProfile AngularProfile::quadratic(double a11, double a12, double a22) {
    // positivity of the form <=> positive eigenvalues
    const double tr = a11 + a22;
    const double det = a11 * a22 - a12 * a12;
    if (!(tr > 0.0) || !(det > 0.0))
        throw InputError("quadratic profile matrix must be positive definite");
    AngularProfile g;
    g.kind_ = Kind::Quadratic;
    g.a11 = a11;
    g.a12 = a12;
    g.a22 = a22;
    return g;
}

AngularProfile AngularProfile::sampled(std::vector<double> samples) {
    if (samples.size() < 16) throw InputError("sampled profile needs at least 16 samples");
    double lo = samples[0], hi = samples[0];
    for (double v : samples) {
        if (!std::isfinite(v)) throw InputError("sampled profile contains a non-finite value");
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (!(lo > 0.0)) throw InputError("angular profile must be strictly positive");
    AngularProfile g;
    g.kind_ = Kind::Sampled;
    const double dtheta = 2.0 * kPi / double(samples.size());
    g.table_ = CubicSpline(0.0, dtheta, std::move(samples), CubicSpline::Boundary::Periodic);
    g.table_min_ = lo;
    g.table_max_ = hi;
    return g;
}

void AngularProfile::derivs(double theta, std::array<double, 5>& d) const {
    switch (kind_) {
        case Kind::Constant:
            d = {const_value_, 0.0, 0.0, 0.0, 0.0};
            return;
        case Kind::Quadratic: {
            // g = (a11+a22)/2 + (a11-a22)/2 cos 2t + a12 sin 2t
            const double mean = 0.5 * (a11 + a22);
            const double dc = 0.5 * (a11 - a22);
            const double c2 = std::cos(2.0 * theta), s2 = std::sin(2.0 * theta);
            d[0] = mean + dc * c2 + a12 * s2;
            d[1] = -2.0 * dc * s2 + 2.0 * a12 * c2;
            d[2] = -4.0 * dc * c2 - 4.0 * a12 * s2;
            d[3] = 8.0 * dc * s2 - 8.0 * a12 * c2;
            d[4] = 16.0 * dc * c2 + 16.0 * a12 * s2;
            return;
        }
        case Kind::Sampled: {
            double v, d1, d2, d3;
            table_.eval_all(theta, v, d1, d2, d3);
            d = {v, d1, d2, d3, 0.0};
            return;
        }
    }
    d = {1.0, 0.0, 0.0, 0.0, 0.0};
}

double AngularProfile::value(double theta) const {
    std::array<double, 5> d;
    derivs(theta, d);
    return d[0];
}

double AngularProfile::min_value() const {
    switch (kind_) {
        case Kind::Constant: return const_value_;
        case Kind::Quadratic: {
            const double mean = 0.5 * (a11 + a22);
            const double amp = std::hypot(0.5 * (a11 - a22), a12);
            return mean - amp;
        }
        case Kind::Sampled: {
            // spline can undershoot the table slightly; scan finely
            double lo = table_min_;
            for (int i = 0; i < 8192; ++i)
                lo = std::min(lo, table_.value(2.0 * kPi * i / 8192.0));
            return lo;
        }
    }
    return 1.0;
}

double AngularProfile::max_value() const {
    switch (kind_) {
        case Kind::Constant: return const_value_;
        case Kind::Quadratic: {
            const double mean = 0.5 * (a11 + a22);
            const double amp = std::hypot(0.5 * (a11 - a22), a12);
            return mean + amp;
        }
        case Kind::Sampled: {
            double hi = table_max_;
            for (int i = 0; i < 8192; ++i)
                hi = std::max(hi, table_.value(2.0 * kPi * i / 8192.0));
            return hi;
        }
    }
    return 1.0;
}

// ---------------------------------------------------------------------------
// Integrand construction

static void check_degree(double p) {
    if (!(p > 1.0)) throw InputError("homogeneity degree p must exceed 1");
    if (!std::isfinite(p)) throw InputError("homogeneity degree p must be finite");
}

Integrand make_power_integrand(double p) {
    check_degree(p);
    Integrand F;
    F.p = p;
    F.profile = AngularProfile::constant(1.0);
    return F;
}

Integrand make_quadratic_integrand(double a11, double a12, double a22) {
    Integrand F;
    F.p = 2.0;
    F.profile = AngularProfile::quadratic(a11, a12, a22);
    return F;
}

Integrand make_sampled_integrand(double p, std::vector<double> samples) {
    check_degree(p);
    Integrand F;
    F.p = p;
    F.profile = AngularProfile::sampled(std::move(samples));
    return F;
}

// ---------------------------------------------------------------------------
// Plain (unmollified) evaluation

FValues eval_all_plain(const Integrand& F, Vec2 eta) {
    check_degree(F.p);
    const double p = F.p;
    const double r = norm(eta);
    FValues out;
    if (r == 0.0) {
        out.f = 0.0;
        // gradient extends by zero for every p > 1; the Hessian extends only
        // when it is constant (quadratic form) or vanishes (p > 2)
        out.grad = {0.0, 0.0};
        if (p > 2.0) {
            out.hess = {0.0, 0.0, 0.0};
        } else if (F.profile.kind() == AngularProfile::Kind::Quadratic && p == 2.0) {
            out.hess = {2.0 * F.profile.a11, 2.0 * F.profile.a12, 2.0 * F.profile.a22};
        } else if (F.profile.kind() == AngularProfile::Kind::Constant && p == 2.0) {
            const double g0 = F.profile.value(0.0);
            out.hess = {2.0 * g0, 0.0, 2.0 * g0};
        } else {
            throw NumericalError("integrand Hessian is singular at the origin");
        }
        return out;
    }

    const double c = eta.x / r, s = eta.y / r;
    const double theta = std::atan2(eta.y, eta.x);
    std::array<double, 5> g;
    F.profile.derivs(theta, g);

    const double rp2 = std::pow(r, p - 2.0);
    const double rp1 = rp2 * r;
    const double rp = rp1 * r;

    out.f = rp * g[0];
    // grad = r^{p-1} (p g rhat + g' that)
    out.grad = {rp1 * (p * g[0] * c - g[1] * s), rp1 * (p * g[0] * s + g[1] * c)};

    const double cc = c * c, ss = s * s, cs = c * s;
    out.hess.xx = rp2 * (p * (p - 1.0) * g[0] * cc + (p * g[0] + g[2]) * ss + 2.0 * (1.0 - p) * g[1] * cs);
    out.hess.yy = rp2 * (p * (p - 1.0) * g[0] * ss + (p * g[0] + g[2]) * cc + 2.0 * (p - 1.0) * g[1] * cs);
    out.hess.xy = rp2 * ((p * (p - 2.0) * g[0] - g[2]) * cs + (p - 1.0) * g[1] * (cc - ss));
    return out;
}

// ---------------------------------------------------------------------------
// Mollifier

static double bump(double s2) {
    // exp(1/(s^2-1)) for s^2 < 1, else 0
    if (s2 >= 1.0) return 0.0;
    return std::exp(1.0 / (s2 - 1.0));
}

static MollifierMoments compute_mollifier_moments() {
    // radial integrals of the bump over the unit disk, composite Gauss
    const GaussRule& gr = gauss_legendre(32);
    const int panels = 16;
    double i1 = 0.0, i3 = 0.0, i5 = 0.0;
    for (int pnl = 0; pnl < panels; ++pnl) {
        const double a = double(pnl) / panels, b = double(pnl + 1) / panels;
        const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
        for (std::size_t k = 0; k < gr.nodes.size(); ++k) {
            const double rho = mid + half * gr.nodes[k];
            const double w = half * gr.weights[k] * bump(rho * rho) * rho;
            i1 += w;
            i3 += w * rho * rho;
            i5 += w * rho * rho * rho * rho;
        }
    }
    MollifierMoments m;
    m.c = 1.0 / (2.0 * kPi * i1);
    m.m2 = i3 / i1;
    m.m4 = i5 / i1;
    return m;
}

const MollifierMoments& mollifier_moments() {
    static const MollifierMoments m = compute_mollifier_moments();
    return m;
}

namespace {

// fixed tensor-product rule over the unit mollifier disk, discrete weights
// renormalized to unit mass so constants are mollified exactly
struct MollRule {
    std::vector<Vec2> node; // positions inside the unit disk
    std::vector<double> weight;
};

const MollRule& moll_rule() {
    static const MollRule rule = [] {
        MollRule r;
        const GaussRule& gr = gauss_legendre(16);
        double total = 0.0;
        for (std::size_t i = 0; i < gr.nodes.size(); ++i) {
            const double s = 0.5 * (gr.nodes[i] + 1.0);
            const double ws = 0.5 * gr.weights[i] * bump(s * s) * s;
            if (ws == 0.0) continue;
            for (std::size_t j = 0; j < gr.nodes.size(); ++j) {
                const double phi = kPi * (gr.nodes[j] + 1.0);
                const double w = ws * kPi * gr.weights[j];
                r.node.push_back({s * std::cos(phi), s * std::sin(phi)});
                r.weight.push_back(w);
                total += w;
            }
        }
        for (double& w : r.weight) w /= total;
        return r;
    }();
    return rule;
}

} // namespace

FValues eval_all_mollified(const Integrand& F, Vec2 eta, double eps) {
    if (!(eps > 0.0)) throw InputError("mollified evaluation needs eps > 0");
    const MollRule& rule = moll_rule();
    FValues acc;
    for (std::size_t k = 0; k < rule.node.size(); ++k) {
        const Vec2 q = eta - rule.node[k] * eps;
        if (norm2(q) < 1e-280) continue; // cone point carries no mass
        const double w = rule.weight[k];
        FValues v = eval_all_plain(F, q);
        acc.f += w * v.f;
        acc.grad += w * v.grad;
        acc.hess.xx += w * v.hess.xx;
        acc.hess.xy += w * v.hess.xy;
        acc.hess.yy += w * v.hess.yy;
    }
    return acc;
}

double mollified_value_accurate(const Integrand& F, Vec2 eta, int n_phi, int n_rho) {
    // integrate over B(eta,1) in polar coordinates about the origin, so the
    // radial factor is a clean power rho^{p+1} and the bump cuts off smoothly.
    // Once the ball no longer wraps the origin it subtends only the arc
    // |phi - arg eta| < asin(1/|eta|); concentrating the angular panels there
    // keeps the resolution independent of |eta|. The integrand vanishes to
    // all orders at the arc ends, so the midpoint rule stays spectral.
    const MollifierMoments& mm = mollifier_moments();
    const double se = norm(eta);
    const GaussRule& gr = gauss_legendre(n_rho);
    double phi_start = 0.0, span = 2.0 * kPi;
    if (se > 1.0) {
        const double half_arc = std::asin(1.0 / se);
        phi_start = std::atan2(eta.y, eta.x) - half_arc;
        span = 2.0 * half_arc;
    }
    const double dphi = span / n_phi;
    double total = 0.0;
    for (int j = 0; j < n_phi; ++j) {
        const double phi = phi_start + (j + 0.5) * dphi;
        const Vec2 dir{std::cos(phi), std::sin(phi)};
        const double b = dot(eta, dir);
        const double disc = b * b - (se * se - 1.0);
        if (disc <= 0.0) continue;
        const double root = std::sqrt(disc);
        const double lo = std::max(0.0, b - root);
        const double hi = b + root;
        if (hi <= lo) continue;
        std::array<double, 5> g;
        F.profile.derivs(phi, g);
        const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
        double line = 0.0;
        for (int k = 0; k < n_rho; ++k) {
            const double rho = mid + half * gr.nodes[k];
            const Vec2 x = dir * rho;
            const double d2 = norm2(eta - x);
            line += half * gr.weights[k] * std::pow(rho, F.p + 1.0) * bump(d2);
        }
        total += g[0] * line * dphi;
    }
    return mm.c * total;
}

// ---------------------------------------------------------------------------
// Public point evaluations

double eval_f(const Integrand& F, Vec2 eta) {
    if (F.epsilon > 0.0) return eval_all_mollified(F, eta, F.epsilon).f;
    if (norm2(eta) == 0.0) return 0.0;
    return eval_all_plain(F, eta).f;
}

Vec2 grad_f(const Integrand& F, Vec2 eta) {
    if (F.epsilon > 0.0) return eval_all_mollified(F, eta, F.epsilon).grad;
    if (norm2(eta) == 0.0) {
        if (F.p < 2.0)
            throw NumericalError("gradient evaluation at the origin requires p >= 2 or mollification");
        return {0.0, 0.0};
    }
    return eval_all_plain(F, eta).grad;
}

Sym2 hessian_f(const Integrand& F, Vec2 eta) {
    if (F.epsilon > 0.0) return eval_all_mollified(F, eta, F.epsilon).hess;
    if (norm2(eta) == 0.0 && F.p < 2.0)
        throw NumericalError("Hessian evaluation at the origin requires p >= 2 or mollification");
    return eval_all_plain(F, eta).hess;
}

Integrand mollify(const Integrand& F, double eps) {
    if (eps < 0.0) throw InputError("mollification radius must be nonnegative");
    if (F.epsilon > 0.0) throw InputError("integrand is already mollified; single-stage only");
    Integrand out = F;
    out.epsilon = eps;
    return out;
}

// ---------------------------------------------------------------------------
// Monotonicity estimate and structure constants

namespace {

// additive lattice in 3 dimensions (generalized golden ratio)
struct Lattice3 {
    double a1, a2, a3;
    double o1, o2, o3;
    explicit Lattice3(std::uint64_t seed) {
        const double g = 1.2207440846057594754; // root of x^3 = x + 1
        a1 = frac(1.0 / g);
        a2 = frac(1.0 / (g * g));
        a3 = frac(1.0 / (g * g * g));
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        o1 = uni(rng);
        o2 = uni(rng);
        o3 = uni(rng);
    }
    void point(std::size_t i, double& u1, double& u2, double& u3) const {
        u1 = frac(o1 + a1 * double(i + 1));
        u2 = frac(o2 + a2 * double(i + 1));
        u3 = frac(o3 + a3 * double(i + 1));
    }
};

struct PairSampler {
    const Integrand& F;
    Lattice3 lat;
    double radius_lo, radius_hi;
    PairSampler(const Integrand& F_, double lo, double hi, std::uint64_t seed)
        : F(F_), lat(seed), radius_lo(lo), radius_hi(hi) {}
    void pair(std::size_t i, Vec2& a, Vec2& b) const {
        double u1, u2, u3;
        lat.point(i, u1, u2, u3);
        const double phi1 = 2.0 * kPi * u1;
        a = {std::cos(phi1), std::sin(phi1)};
        const double phi2 = 2.0 * kPi * u2;
        if (i % 4 == 3) {
            // nearly coincident pair probing the local (Hessian) regime
            b = a + Vec2{1e-4 * std::cos(phi2), 1e-4 * std::sin(phi2)};
        } else {
            const double rho = radius_lo * std::exp(u3 * std::log(radius_hi / radius_lo));
            b = {rho * std::cos(phi2), rho * std::sin(phi2)};
        }
    }
};

} // namespace

DeltaEstimate verify_delta_monotone(const Integrand& F, std::size_t n_samples,
                                    double radius_lo, double radius_hi, std::uint64_t seed) {
    if (n_samples < 1000) throw InputError("delta estimation needs at least 1000 sample pairs");
    if (!(radius_lo > 0.0) || !(radius_hi > radius_lo))
        throw InputError("delta estimation radius range must satisfy 0 < lo < hi");
    PairSampler sampler(F, radius_lo, radius_hi, seed);
    DeltaEstimate est;
    est.delta_hat = 1.0;
    for (std::size_t i = 0; i < n_samples; ++i) {
        Vec2 a, b;
        sampler.pair(i, a, b);
        const Vec2 da = grad_f(F, a) - grad_f(F, b);
        const Vec2 de = a - b;
        const double na = norm(da), ne = norm(de);
        if (na < 1e-14 || ne < 1e-14) continue;
        const double q = dot(da, de) / (na * ne);
        if (q < est.delta_hat) {
            est.delta_hat = q;
            est.arg_a = a;
            est.arg_b = b;
        }
        ++est.n_pairs;
    }
    return est;
}

double quasiconformal_K(double delta) {
    if (!(delta > 0.0) || delta > 1.0)
        throw InputError("monotonicity constant delta must lie in (0,1]");
    const double root = std::sqrt(std::max(0.0, 1.0 - delta * delta));
    return (1.0 + root) / (1.0 - root);
}

StructureConstants structure_constants(const Integrand& F, std::size_t n_samples, std::uint64_t seed) {
    check_degree(F.p);
    StructureConstants sc;

    const double gmin = F.profile.min_value();
    const double gmax = F.profile.max_value();
    if (!(gmin > 0.0)) throw NumericalError("profile not strictly positive");
    sc.M = std::max(gmax, 1.0 / gmin);

    // bounds of f and |eta||grad f| on the unit circle
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    const int n_theta = 4096;
    for (int i = 0; i < n_theta; ++i) {
        const double theta = 2.0 * kPi * i / n_theta;
        std::array<double, 5> g;
        F.profile.derivs(theta, g);
        const double fv = g[0];
        const double gv = std::hypot(F.p * g[0], g[1]);
        lo = std::min(lo, std::min(fv, gv));
        hi = std::max(hi, std::max(fv, gv));
    }
    sc.M_prime = std::max(hi, 1.0 / lo);

    // tightest two-sided constant of the monotonicity sandwich over pairs
    PairSampler sampler(F, 0.25, 4.0, seed);
    double qmin = std::numeric_limits<double>::infinity();
    double qmax = 0.0;
    for (std::size_t i = 0; i < n_samples; ++i) {
        Vec2 a, b;
        sampler.pair(i, a, b);
        const Vec2 de = a - b;
        const double ne2 = norm2(de);
        if (ne2 < 1e-28) continue;
        const double lhs = dot(grad_f(F, a) - grad_f(F, b), de);
        const double wgt = std::pow(norm(a) + norm(b), F.p - 2.0) * ne2;
        const double q = lhs / wgt;
        qmin = std::min(qmin, q);
        qmax = std::max(qmax, q);
    }
    if (!(qmin > 0.0))
        throw NumericalError("monotonicity sandwich failed: gradient map is not monotone on samples");
    sc.c_star_mono = std::max(qmax, 1.0 / qmin);

    if (F.delta_certified) sc.K = quasiconformal_K(*F.delta_certified);
    return sc;
}

} // namespace fharm
