#pragma once

// Structural diagnostics of a solved capacitary field: the log-density of the
// integrand along the gradient, its truncations, moment integrals over level
// curves with their factorial-scale bound, the exceptional-set flux, the
// correction gauge lambda, winding-number certification of a nonvanishing
// gradient, and dimension estimators for the extracted boundary measure.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fharm/geometry.hpp"
#include "fharm/integrand.hpp"
#include "fharm/measure.hpp"
#include "fharm/solver.hpp"
#include "fharm/vec.hpp"

namespace fharm {

// --- Log-density field --------------------------------------------------------

// Which part of v = log f(grad u) feeds the moment machinery. The positive
// part is the natural choice for degrees below 2, the negative part above 2;
// at exactly 2 both are informative and callers typically run both.
enum class Branch { positive_part, negative_part };

Branch default_branch(double p);

struct LogDensityField {
    std::shared_ptr<const Mesh> mesh;
    double p = 2.0;
    Branch branch = Branch::positive_part;

    // Per triangle: v = log f(grad u), the branch part w, and the truncation
    // g = max(w - c_prime, 0). Triangles whose gradient is numerically zero
    // carry v = -infinity and are excluded from all integrals.
    std::vector<double> v;
    std::vector<double> w;
    std::vector<double> g;
    std::vector<char> excluded;

    double c_prime = 0.0;
    double excluded_area = 0.0;
};

// Builds v, w, g from the solved field. When c_prime is absent it is chosen
// as the maximum of w over triangles meeting B(0,2), so that g vanishes on
// the core neighborhood of the inner disk.
LogDensityField log_density(const ScalarField& u, const Integrand& F, Branch branch,
                            std::optional<double> c_prime = std::nullopt);

// --- Moment integrals over level curves ----------------------------------------

// Line integral of (f(grad u)/|grad u|) * w^{2m} along the level curve u = t,
// t in (0, 1/2). With truncated = true the factor uses g instead of w; since
// g <= w this never increases the value. m = 0 reduces to level_flux.
// Accumulation runs in the log domain so large powers cannot overflow.
double moment_integral(const ScalarField& u, const Integrand& F, const LogDensityField& ld,
                       double t, int m, bool truncated = false);

struct MomentRow {
    double t = 0.0;
    int m = 0;
    double log_value = 0.0;  // log of the moment integral; -infinity when it is 0
};

struct MomentTable {
    std::vector<double> t_grid;
    int m_max = 0;
    std::vector<MomentRow> rows;  // t-major, m ascending within each t
};

MomentTable moment_table(const ScalarField& u, const Integrand& F, const LogDensityField& ld,
                         const std::vector<double>& t_grid, int m_max, bool truncated = false);

// Smallest constant certifying the factorial moment bound
//   I_m(t) <= c^{m+1} m! (log 1/t)^m
// over the table rows: c_star_hat = exp(max over rows with m >= 1 of
// [log I_m - log m! - m log log(1/t)] / (m+1)); when every m >= 1 row is zero
// the m = 0 rows decide. A single finite constant always certifies finite
// data, so max_violation is 0; the informative diagnostic is bracket_slope,
// the steepest least-squares trend of the bracketed quantity against m.
struct MomentFit {
    double c_star_hat = 1.0;
    double max_violation = 0.0;
    double bracket_slope = 0.0;
};

MomentFit moment_bound_fit(const MomentTable& table);

// --- Gauge ----------------------------------------------------------------------

// The sub-logarithmic deviation scale sqrt(4 c_star log(1/t) loglog(1/t)),
// defined for t in (0, e^-2).
double gauge_exponent(double t, double c_star);

// Correction gauge lambda(r) = r exp(sign * A * gauge_exponent(r)). The sign
// is +1 for degrees at or below 2 and -1 above, so lambda/r diverges in the
// first regime and vanishes in the second as r -> 0.
struct GaugeFunction {
    double A = 0.0;
    int sign = +1;
    double c_star = 1.0;
};

GaugeFunction make_gauge(double p, double A, double c_star);
double gauge_value(const GaugeFunction& gauge, double r);

// Flux of f(grad u)/|grad u| along u = t restricted to segments where the
// log-density part w reaches gauge_exponent(t); t in (0, e^-2).
double exceptional_flux(const ScalarField& u, const Integrand& F, const LogDensityField& ld,
                        double t, const GaugeFunction& gauge);

// --- Winding numbers -------------------------------------------------------------

// Winding of the phase of u_x - i u_y along each closed level-curve component.
// A capacitary field with nonvanishing gradient yields exactly -1 on every
// component, and equal counts on two levels certify a zero-free region in
// between. Throws NumericalError, naming the vertex, if any curve vertex
// carries a gradient too small to certify a phase.
std::vector<int> component_windings(const ScalarField& u, const LevelCurve& curve);
int winding_number(const ScalarField& u, const LevelCurve& curve);  // sum over components

// --- Dimension estimators ---------------------------------------------------------

struct RegressionFit {
    double slope = 0.0;
    double intercept = 0.0;
    double stderr_slope = 0.0;
    double rms_residual = 0.0;
    int n = 0;
};

struct CenterDimension {
    Vec2 center;
    double slope = 0.0;          // d log mu(B(center, r)) / d log r
    double stderr_slope = 0.0;
    double rms_residual = 0.0;
    double ball_mass = 0.0;      // mu(B(center, r_max)), the aggregation weight
    int n_radii = 0;
    bool skipped = false;        // no mass at r_max, or fewer than 2 usable radii
};

struct DimensionReport {
    std::vector<double> radii;
    std::vector<CenterDimension> centers;

    // mass-weighted mean of the per-center slopes with a 95% half-width
    double local_dimension = 0.0;
    double local_ci = 0.0;

    // slope of the partition entropy sum mu_i log mu_i against log block
    // length over dyadic splits of the boundary cycle
    double information_dimension = 0.0;
    double information_ci = 0.0;
    RegressionFit information_fit;
    std::vector<double> partition_scales;
    std::vector<double> partition_entropy;

    // fraction of mass whose ball at the finest radius stays below the gauge;
    // -1 when no gauge was supplied
    double gauge_small_mass_fraction = -1.0;

    std::string note;
};

// Per-center slopes of log mu(B(z,r)) vs log r over the given radius grid,
// plus the dyadic-partition information dimension. Radii should sit within
// [10 * arc scale, diameter / 10]; at least 4 are required.
DimensionReport local_dimension(const BoundaryMeasure& mu, const std::vector<Vec2>& centers,
                                const std::vector<double>& radii,
                                const GaugeFunction* gauge = nullptr);

// Geometric ratio-2 radius grid descending from r_max while staying >= r_min.
std::vector<double> geometric_radius_grid(double r_min, double r_max);

// --- Gauge comparison --------------------------------------------------------------

// Per-arc trend of mu(B(midpoint, r)) / lambda(r) over a descending radius
// grid: the finite-scale proxy for the gauge dichotomy. An arc counts as
// increasing when the ratio grows as r shrinks (log-log slope below the dead
// band), decreasing in the opposite case; fractions are mass-weighted.
struct GaugeTrendReport {
    std::vector<double> radii;
    std::vector<double> arc_slope;     // per arc, log ratio vs log r
    std::vector<double> finest_ratio;  // ratio at the smallest radius
    double fraction_increasing = 0.0;
    double fraction_decreasing = 0.0;
    double fraction_flat = 0.0;
    double mean_ratio = 0.0;  // mass-weighted over arcs, averaged over radii
};

GaugeTrendReport gauge_comparison(const BoundaryMeasure& mu, const GaugeFunction& gauge,
                                  const std::vector<double>& radii);

// --- Files ---------------------------------------------------------------------------

// Moments CSV: header comment with provenance, then rows t, m, log_value.
void write_moments_csv(const MomentTable& table, std::uint64_t field_checksum,
                       const std::string& path);
MomentTable read_moments_csv(const std::string& path);

// Dimension report as key: value blocks, plus a per-center CSV for plotting.
void write_dimension_report(const DimensionReport& report, const std::string& path);
void write_dimension_centers_csv(const DimensionReport& report, const std::string& path);

}  // namespace fharm
