#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "fharm/geometry.hpp"
#include "fharm/integrand.hpp"
#include "fharm/vec.hpp"

namespace fharm {

// Nodal P1 field on a triangulation together with the Dirichlet data it
// carries: 0 on the outer boundary, 1 on the inner one for capacitary
// solves. Gradients are piecewise constant, one per triangle.
struct ScalarField {
    std::shared_ptr<const Mesh> mesh;
    std::vector<double> values;
    double outer_value = 0.0;
    double inner_value = 1.0;
    std::vector<Vec2> tri_grad; // filled by solve_capacitary and read_field
};

// Per-triangle gradients of the field; returns the cached reconstruction
// when present, otherwise recomputes it from the nodal values.
std::vector<Vec2> gradient_field(const ScalarField& u);

struct SolveOptions {
    // Strictly decreasing mollification radii; the last entry may be zero
    // (plain integrand). Empty selects the default halving schedule.
    std::vector<double> epsilon_schedule;
    int max_newton_iterations = 60;
    double residual_tolerance = 1e-9; // weak-form norm, final stage
    double stage_tolerance = 1e-6;    // weak-form norm, intermediate stages
    double energy_tolerance = 1e-13;  // relative decrease treated as stalled
    double armijo_c1 = 1e-4;
    double backtrack_factor = 0.5;
    int max_backtracks = 45;
    double linear_tolerance = 1e-10;  // relative, conjugate gradient
    std::string convergence_log_path; // CSV written here when nonempty
};

// Default continuation schedule: radii 1, 1/2, 1/4, ... down to 1e-8 for
// p >= 2 and 1e-6 for p < 2. Integrands that are already smooth (p = 2 with
// a constant or quadratic profile) get the single plain stage {0}.
std::vector<double> default_epsilon_schedule(const Integrand& F);

// Minimizes the discrete energy sum_T area * f_eps(grad w) over nodal
// fields with w = 0 on the outer boundary and w = 1 on the inner one,
// walking the mollification schedule with warm starts. Damped Newton with
// Armijo backtracking; the linearized steps use a conjugate gradient solve
// with an incomplete Cholesky preconditioner. Requires F.delta_certified.
// Throws InputError on bad options or meshes without both boundaries, and
// NumericalError (carrying the residual history) on divergence.
ScalarField solve_capacitary(std::shared_ptr<const Mesh> mesh, const Integrand& F,
                             const SolveOptions& opts = {});

// Energy of an arbitrary nodal field: sum over triangles of
// area * f(grad w), honoring F.epsilon.
double energy(const ScalarField& w, const Integrand& F);

// Euclidean norm of the discrete weak-form vector over interior vertices,
// R_i = sum_T area * <grad f(grad w), grad phi_i>, honoring F.epsilon.
double residual(const ScalarField& w, const Integrand& F);

// Consistent value/gradient/Hessian of the mollified integrand as the
// solver evaluates it: closed form for eps == 0, a cached radial profile
// table plus far-field expansion for constant-profile integrands, and
// direct quadrature otherwise.
FValues regularized_values(const Integrand& F, double eps, Vec2 eta);
double regularized_value(const Integrand& F, double eps, Vec2 eta);

struct Ball {
    Vec2 center;
    double radius = 0.0;
};

struct HarnackBall {
    Vec2 center;
    double radius = 0.0;
    double ratio = 0.0; // max/min of the field over mesh nodes in the ball
    bool skipped = false;
    std::string note;   // reason when skipped
};

struct HarnackReport {
    std::vector<HarnackBall> balls;
    double max_ratio = 0.0; // over balls that were not skipped
};

// Oscillation ratios of a positive field over mesh balls. A ball is only
// rated when the concentric double ball stays inside the meshed domain;
// otherwise it is reported as skipped with a note.
HarnackReport harnack_diagnostic(const ScalarField& u, const std::vector<Ball>& balls);

// Plain-text emission and parsing of nodal fields. Format:
//   field N mesh <checksum>
//   v                    (N lines)
// The checksum ties the file to the exact mesh serialization; read_field
// throws ConsistencyError when it does not match the supplied mesh.
void write_field(const ScalarField& u, const std::string& path);
ScalarField read_field(const std::string& path, std::shared_ptr<const Mesh> mesh);

} // namespace fharm
