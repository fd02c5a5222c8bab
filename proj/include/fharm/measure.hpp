#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fharm/geometry.hpp"
#include "fharm/integrand.hpp"
#include "fharm/solver.hpp"
#include "fharm/vec.hpp"

namespace fharm {

// One edge of the outer boundary polyline with the mass attributed to it.
struct MeasureArc {
    int va = -1, vb = -1; // mesh vertex ids of the arc endpoints, cycle order
    Vec2 midpoint;
    double length = 0.0;
    double weight = 0.0; // nonnegative after clamping
};

// Discrete boundary measure induced by a capacitary field: arc weights in
// cycle order along the outer boundary, plus extraction provenance.
struct BoundaryMeasure {
    std::vector<MeasureArc> arcs;
    double total_mass = 0.0;
    std::string method;              // "weak-identity" or "level-limit"
    std::uint64_t field_checksum = 0;
    double clamp_total = 0.0;        // mass removed when clamping negatives
    double min_raw_weight = 0.0;     // most negative pre-clamp arc weight
};

// Fingerprint of the exact bytes write_field would emit; ties measures and
// derived tables back to the field they were extracted from.
std::uint64_t field_checksum(const ScalarField& u);

// Extracts the measure by testing the weak form with the hat functions of
// outer-boundary vertices: weight(vertex) = -sum_T area <grad f(grad u),
// grad phi_vertex>, split onto the two adjacent arcs in proportion to
// their length.
// Negative arc weights are clamped to zero; a clamp total above 1% of the
// mass throws NumericalError (under-resolved field). Honors F.epsilon.
BoundaryMeasure boundary_measure(const ScalarField& u, const Integrand& F);

// Same arcs, but weighted by pushing the level-curve flux density
// f(grad u)/|grad u| at level t onto the nearest outer arc. Cross-check
// for the weak-identity extraction, tagged "level-limit".
BoundaryMeasure measure_via_level_limit(const ScalarField& u, const Integrand& F, double t);

struct LevelFluxInfo {
    double dropped_length = 0.0; // level-curve length skipped for |grad| < 1e-14
    double curve_length = 0.0;
};

// Line integral of f(grad u)/|grad u| along the level curve {u = t},
// midpoint quadrature per segment with the piecewise-constant gradient.
double level_flux(const ScalarField& u, const Integrand& F, double t,
                  LevelFluxInfo* info = nullptr);

// Mass of the arcs whose midpoint lies in the closed ball B(w, r).
double measure_ball(const BoundaryMeasure& mu, Vec2 w, double r);

// Two-sided comparability of the measure with the solution near a boundary
// point: ratios of sup u^{p-1} over B(w,r) against r^{p-2} mu(B(w,r/2))
// and r^{p-2} mu(B(w,2r)).
struct ComparabilityReport {
    Vec2 w;
    double r = 0.0;
    double sup_u_pm1 = 0.0;
    double mass_half = 0.0;
    double mass_double = 0.0;
    double ratio_lower = 0.0; // sup / (r^{p-2} mass_half)
    double ratio_upper = 0.0; // sup / (r^{p-2} mass_double)
    bool degenerate = false;  // no mass in B(w,2r) or no nodes in B(w,r)
    std::string note;
};
ComparabilityReport check_measure_solution_comparability(const ScalarField& u,
                                                         const BoundaryMeasure& mu, Vec2 w,
                                                         double r, double p);

// Plain-text emission and parsing. Format:
//   # total_mass <v> field <checksum> method <tag>
//   arc_index,midpoint_x,midpoint_y,arc_length,weight
//   k,x,y,len,w          (one line per arc)
void write_measure_csv(const BoundaryMeasure& mu, const std::string& path);
BoundaryMeasure read_measure_csv(const std::string& path);

} // namespace fharm
