#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "fharm/spline.hpp"
#include "fharm/vec.hpp"

namespace fharm {

// Angular profile of a positively homogeneous integrand: the restriction of
// the integrand to the unit circle. Three flavors: a constant (isotropic
// powers), a quadratic form in the direction vector, and a sampled table
// interpolated by a periodic cubic spline on a uniform angular grid.
class AngularProfile {
  public:
    enum class Kind { Constant, Quadratic, Sampled };

    static AngularProfile constant(double value);
    // profile(theta) = a11 cos^2 + 2 a12 cos sin + a22 sin^2
    static AngularProfile quadratic(double a11, double a12, double a22);
    // samples on theta_i = 2*pi*i/n, n >= 16; interpolated periodically
    static AngularProfile sampled(std::vector<double> samples);

    Kind kind() const { return kind_; }
    // value and first four derivatives at angle theta (d[0]..d[4]);
    // for sampled profiles the third derivative is piecewise constant and
    // the fourth is taken as zero.
    void derivs(double theta, std::array<double, 5>& d) const;
    double value(double theta) const;
    double min_value() const;
    double max_value() const;

    double a11 = 0.0, a12 = 0.0, a22 = 0.0; // quadratic kind only

  private:
    Kind kind_ = Kind::Constant;
    double const_value_ = 1.0;
    CubicSpline table_;
    double table_min_ = 0.0, table_max_ = 0.0;
};

// Integrand of the variational problem: f(eta) = |eta|^p * profile(arg eta).
// epsilon > 0 designates the mollified version; evaluations then integrate
// the plain integrand against the standard bump mollifier of radius epsilon.
struct Integrand {
    double p = 2.0;
    AngularProfile profile = AngularProfile::constant(1.0);
    double epsilon = 0.0;
    std::optional<double> delta_certified;
};

Integrand make_power_integrand(double p);
Integrand make_quadratic_integrand(double a11, double a12, double a22);
Integrand make_sampled_integrand(double p, std::vector<double> samples);

struct FValues {
    double f = 0.0;
    Vec2 grad;
    Sym2 hess;
};

// Point evaluations; these honor F.epsilon (quadrature when positive).
double eval_f(const Integrand& F, Vec2 eta);
Vec2 grad_f(const Integrand& F, Vec2 eta);
Sym2 hessian_f(const Integrand& F, Vec2 eta);

// Unmollified closed-form evaluation of value+gradient+Hessian in one pass.
// Requires eta != 0 unless the values extend continuously.
FValues eval_all_plain(const Integrand& F, Vec2 eta);

// Mollified evaluation of all three by the fixed-order tensor product rule
// in polar coordinates over the mollifier support.
FValues eval_all_mollified(const Integrand& F, Vec2 eta, double eps);

// Single-stage mollification: returns a copy with epsilon set.
Integrand mollify(const Integrand& F, double eps);

// Moments of the standard bump exp(1/(|z|^2-1)) normalized to unit mass:
// c the normalization constant, m2 = int theta |z|^2, m4 = int theta |z|^4.
struct MollifierMoments {
    double c;
    double m2;
    double m4;
};
const MollifierMoments& mollifier_moments();

// High-accuracy value of the unit-radius mollification at eta, integrating
// in polar coordinates about the integrand's homogeneity center so the cone
// point of f never sits inside a smooth quadrature panel. Used to build
// solver lookup tables and as an oracle.
double mollified_value_accurate(const Integrand& F, Vec2 eta, int n_phi = 192, int n_rho = 48);

// Estimate of the monotonicity constant: minimum over sampled pairs of
//   <grad f(a) - grad f(b), a - b> / (|grad f(a) - grad f(b)| |a - b|).
// Sampling is a seeded low-discrepancy lattice over (angle, angle, radius)
// plus a share of nearly coincident pairs probing the Hessian regime.
struct DeltaEstimate {
    double delta_hat = 1.0;
    Vec2 arg_a;
    Vec2 arg_b;
    std::size_t n_pairs = 0;
};
DeltaEstimate verify_delta_monotone(const Integrand& F, std::size_t n_samples,
                                    double radius_lo = 0.25, double radius_hi = 4.0,
                                    std::uint64_t seed = 1);

// K = (1 + sqrt(1-delta^2)) / (1 - sqrt(1-delta^2)), delta in (0,1].
double quasiconformal_K(double delta);

struct StructureConstants {
    double M = 1.0;            // profile bounds: 1/M <= profile <= M
    double M_prime = 1.0;      // bounds of f and |eta||grad f| on the unit circle
    double c_star_mono = 1.0;  // tightest two-sided constant in the monotonicity sandwich
    std::optional<double> K;   // from delta_certified when present
};
StructureConstants structure_constants(const Integrand& F, std::size_t n_samples = 20000,
                                       std::uint64_t seed = 1);

} // namespace fharm
