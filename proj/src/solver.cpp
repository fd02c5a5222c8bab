#include "fharm/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>

#include "fharm/errors.hpp"
#include "fharm/io_util.hpp"
#include "fharm/spline.hpp"

namespace fharm {

namespace {

// The mollified integrand at radius eps equals eps^p times the unit-radius
// mollification evaluated at eta/eps, so a single radial table per degree
// serves every stage of the continuation schedule. The table covers
// s = |eta|/eps up to kTableMax; past kBlendHi the two-term expansion of
// the mollification in even moments takes over, and the two are joined by
// a quintic C^2 ramp on [kBlendLo, kBlendHi].
constexpr double kBlendLo = 8.0;
constexpr double kBlendHi = 11.0;
constexpr double kTableMax = 12.0;
constexpr int kTableSamples = 721;

struct Radial {
    double v = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
};

// f + (m2 eps^2/4) lap f + (m4 eps^4/64) lap^2 f for f = r^p, written in
// r so large s never exponentiates; valid once r >> eps.
Radial far_field_power(double p, double eps, double r) {
    const MollifierMoments& mm = mollifier_moments();
    const double a2 = 0.25 * mm.m2 * eps * eps * p * p;
    const double a4 = mm.m4 * eps * eps * eps * eps / 64.0 * p * p * (p - 2.0) * (p - 2.0);
    Radial out;
    out.v = std::pow(r, p);
    out.d1 = p * std::pow(r, p - 1.0);
    out.d2 = p * (p - 1.0) * std::pow(r, p - 2.0);
    if (a2 != 0.0) {
        out.v += a2 * std::pow(r, p - 2.0);
        out.d1 += a2 * (p - 2.0) * std::pow(r, p - 3.0);
        out.d2 += a2 * (p - 2.0) * (p - 3.0) * std::pow(r, p - 4.0);
    }
    if (a4 != 0.0) {
        out.v += a4 * std::pow(r, p - 4.0);
        out.d1 += a4 * (p - 4.0) * std::pow(r, p - 5.0);
        out.d2 += a4 * (p - 4.0) * (p - 5.0) * std::pow(r, p - 6.0);
    }
    return out;
}

struct RadialCore {
    double p = 2.0;
    CubicSpline table; // unit-radius mollification of r^p on [0, kTableMax]
};

std::shared_ptr<const RadialCore> radial_core_for(double p) {
    static std::mutex mu;
    static std::map<double, std::shared_ptr<const RadialCore>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(p);
    if (it != cache.end()) return it->second;

    const Integrand unit = make_power_integrand(p);
    const double ds = kTableMax / double(kTableSamples - 1);
    std::vector<double> y(kTableSamples);
    for (int i = 0; i < kTableSamples; ++i)
        y[i] = mollified_value_accurate(unit, {i * ds, 0.0});

    auto core = std::make_shared<RadialCore>();
    core->p = p;
    // the mollification is an even function of s, so zero slope at s = 0 is
    // exact; the clamp at s = kTableMax is wrong but its influence decays
    // geometrically and the table is never read past kBlendHi
    core->table = CubicSpline(0.0, ds, std::move(y), CubicSpline::Boundary::ClampedZeroSlope);
    cache.emplace(p, core);
    return cache[p];
}

// quintic smoothstep and its derivatives on [0,1]
inline double ramp0(double x) { return x * x * x * (10.0 + x * (-15.0 + 6.0 * x)); }
inline double ramp1(double x) { return 30.0 * x * x * (1.0 + x * (-2.0 + x)); }
inline double ramp2(double x) { return x * (60.0 + x * (-180.0 + 120.0 * x)); }

// Consistent evaluation of one continuation stage. Three execution paths:
// the plain closed form when eps == 0, the radial table + far field for
// constant profiles, and mollification quadrature for everything else.
class StageEvaluator {
  public:
    StageEvaluator(const Integrand& F, double eps) : F_(F), eps_(eps) {
        if (eps_ <= 0.0) {
            mode_ = Mode::Plain;
        } else if (F.profile.kind() == AngularProfile::Kind::Constant) {
            mode_ = Mode::Table;
            scale_ = F.profile.value(0.0);
            core_ = radial_core_for(F.p);
        } else {
            mode_ = Mode::Quadrature;
        }
    }

    FValues eval(Vec2 eta) const {
        switch (mode_) {
        case Mode::Plain:
            return eval_all_plain(F_, eta);
        case Mode::Quadrature:
            return eval_all_mollified(F_, eta, eps_);
        case Mode::Table:
        default:
            return table_eval(eta);
        }
    }

    double value(Vec2 eta) const {
        if (mode_ == Mode::Table) return table_value(eta);
        return eval(eta).f;
    }

  private:
    enum class Mode { Plain, Table, Quadrature };

    const Integrand& F_;
    double eps_ = 0.0;
    Mode mode_ = Mode::Plain;
    double scale_ = 1.0;
    std::shared_ptr<const RadialCore> core_;

    // value and first two derivatives of s -> (unit mollification of s^p),
    // blended into the far-field expansion across [kBlendLo, kBlendHi]
    Radial unit_radial(double s) const {
        Radial c;
        double d3;
        core_->table.eval_all(s, c.v, c.d1, c.d2, d3);
        if (s <= kBlendLo) return c;
        const Radial t = far_field_power(core_->p, 1.0, s);
        const double w = 1.0 / (kBlendHi - kBlendLo);
        const double x = (s - kBlendLo) * w;
        const double b = ramp0(x), b1 = ramp1(x) * w, b2 = ramp2(x) * w * w;
        Radial out;
        out.v = c.v + b * (t.v - c.v);
        out.d1 = c.d1 + b1 * (t.v - c.v) + b * (t.d1 - c.d1);
        out.d2 = c.d2 + b2 * (t.v - c.v) + 2.0 * b1 * (t.d1 - c.d1) + b * (t.d2 - c.d2);
        return out;
    }

    FValues table_eval(Vec2 eta) const {
        const double r = norm(eta);
        const double s = r / eps_;
        FValues out;
        if (s < 1e-10) {
            // radial limit: F''(0) I, with F'' read off the table's origin
            const double d2 = scale_ * std::pow(eps_, F_.p - 2.0) * core_->table.deriv2(0.0);
            out.f = scale_ * std::pow(eps_, F_.p) * core_->table.value(0.0);
            out.grad = d2 * eta;
            out.hess = {d2, 0.0, d2};
            return out;
        }
        Radial rad;
        double over_r; // F'(r)/r
        if (s >= kBlendHi) {
            rad = far_field_power(F_.p, eps_, r);
            rad.v *= scale_;
            rad.d1 *= scale_;
            rad.d2 *= scale_;
            over_r = rad.d1 / r;
        } else {
            const Radial u = unit_radial(s);
            const double ep = std::pow(eps_, F_.p);
            rad.v = scale_ * ep * u.v;
            rad.d1 = scale_ * (ep / eps_) * u.d1;
            rad.d2 = scale_ * (ep / (eps_ * eps_)) * u.d2;
            over_r = scale_ * (ep / (eps_ * eps_)) * (u.d1 / s);
        }
        const Vec2 er = eta / r;
        out.f = rad.v;
        out.grad = rad.d1 * er;
        out.hess.xx = rad.d2 * er.x * er.x + over_r * er.y * er.y;
        out.hess.yy = rad.d2 * er.y * er.y + over_r * er.x * er.x;
        out.hess.xy = (rad.d2 - over_r) * er.x * er.y;
        return out;
    }

    double table_value(Vec2 eta) const {
        const double r = norm(eta);
        const double s = r / eps_;
        if (s >= kBlendHi) return scale_ * far_field_power(F_.p, eps_, r).v;
        if (s < 1e-10) return scale_ * std::pow(eps_, F_.p) * core_->table.value(0.0);
        return scale_ * std::pow(eps_, F_.p) * unit_radial(s).v;
    }
};

// precomputed P1 element geometry: areas and barycentric gradients
struct ElementData {
    std::vector<double> area;
    std::vector<std::array<Vec2, 3>> phi;
    double total_area = 0.0;
};

ElementData element_data(const Mesh& mesh) {
    ElementData e;
    const std::size_t nt = mesh.triangles.size();
    e.area.resize(nt);
    e.phi.resize(nt);
    for (std::size_t t = 0; t < nt; ++t) {
        const auto& tri = mesh.triangles[t];
        const Vec2 a = mesh.vertices[tri[0]];
        const Vec2 b = mesh.vertices[tri[1]];
        const Vec2 c = mesh.vertices[tri[2]];
        const double twoA = cross(b - a, c - a);
        if (twoA <= 0.0) throw InputError("mesh triangle with non-positive area");
        auto rot90 = [](Vec2 v) { return Vec2{-v.y, v.x}; };
        e.phi[t] = {rot90(c - b) / twoA, rot90(a - c) / twoA, rot90(b - a) / twoA};
        e.area[t] = 0.5 * twoA;
        e.total_area += e.area[t];
    }
    return e;
}

Vec2 tri_gradient(const ElementData& e, const Mesh& mesh, const std::vector<double>& u, std::size_t t) {
    const auto& tri = mesh.triangles[t];
    return u[tri[0]] * e.phi[t][0] + u[tri[1]] * e.phi[t][1] + u[tri[2]] * e.phi[t][2];
}

double assemble_energy(const Mesh& mesh, const ElementData& e, const StageEvaluator& ev,
                       const std::vector<double>& u) {
    double E = 0.0;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t)
        E += e.area[t] * ev.value(tri_gradient(e, mesh, u, t));
    return E;
}

// gradient of the discrete energy over the free vertices; optionally the
// Hessian triplets in the same dense free numbering
double assemble_system(const Mesh& mesh, const ElementData& e, const StageEvaluator& ev,
                       const std::vector<double>& u, const std::vector<int>& free_index,
                       Eigen::VectorXd& grad, std::vector<Eigen::Triplet<double>>* trip) {
    double E = 0.0;
    grad.setZero();
    if (trip) {
        trip->clear();
        trip->reserve(mesh.triangles.size() * 9);
    }
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        const FValues fv = ev.eval(tri_gradient(e, mesh, u, t));
        E += e.area[t] * fv.f;
        for (int i = 0; i < 3; ++i) {
            const int fi = free_index[tri[i]];
            if (fi < 0) continue;
            grad[fi] += e.area[t] * dot(fv.grad, e.phi[t][i]);
            if (!trip) continue;
            for (int j = 0; j < 3; ++j) {
                const int fj = free_index[tri[j]];
                if (fj < 0) continue;
                trip->emplace_back(fi, fj, e.area[t] * dot(e.phi[t][i], fv.hess.apply(e.phi[t][j])));
            }
        }
    }
    return E;
}

std::vector<int> build_free_index(const Mesh& mesh, int& n_free) {
    std::vector<int> free_index(mesh.vertices.size(), -1);
    n_free = 0;
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v)
        if (mesh.vertex_tag[v] < 0) free_index[v] = n_free++;
    return free_index;
}

std::string residual_history_tail(const std::vector<double>& hist) {
    std::ostringstream os;
    const std::size_t n = hist.size();
    const std::size_t from = n > 8 ? n - 8 : 0;
    for (std::size_t i = from; i < n; ++i) {
        if (i > from) os << ", ";
        os << hist[i];
    }
    return os.str();
}

struct ConvergenceLog {
    std::string rows = "iteration,epsilon,energy,residual,step_length\n";
    int iteration = 0;

    void add(double eps, double E, double res, double alpha) {
        rows += std::to_string(iteration++) + "," + fmt17(eps) + "," + fmt17(E) + "," +
                fmt17(res) + "," + fmt17(alpha) + "\n";
    }
};

// One continuation stage: damped Newton until the weak-form norm drops
// below tol. Returns the residual history for error reporting.
void run_stage(const Mesh& mesh, const ElementData& e, const StageEvaluator& ev, double eps,
               const std::vector<int>& free_index, int n_free, std::vector<double>& u,
               double tol, const SolveOptions& opts, ConvergenceLog& log,
               std::vector<double>& history) {
    Eigen::VectorXd grad(n_free);
    std::vector<Eigen::Triplet<double>> trip;
    double E = assemble_system(mesh, e, ev, u, free_index, grad, nullptr);
    double res = grad.norm();
    history.push_back(res);
    log.add(eps, E, res, 0.0);
    if (res <= tol) return;

    for (int iter = 0; iter < opts.max_newton_iterations; ++iter) {
        assemble_system(mesh, e, ev, u, free_index, grad, &trip);
        Eigen::SparseMatrix<double> H(n_free, n_free);
        H.setFromTriplets(trip.begin(), trip.end());

        Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                                 Eigen::IncompleteCholesky<double>>
            cg;
        cg.setTolerance(opts.linear_tolerance);
        cg.compute(H);
        if (cg.info() != Eigen::Success)
            throw NumericalError("stage eps=" + fmt17(eps) +
                                 ": could not factor the Newton matrix preconditioner");
        Eigen::VectorXd d = cg.solve(-grad);
        if (cg.info() != Eigen::Success)
            throw NumericalError("stage eps=" + fmt17(eps) +
                                 ": linear solve stalled; residual history " +
                                 residual_history_tail(history));

        double dirder = grad.dot(d);
        if (!(dirder < 0.0)) {
            // indefinite or null step; fall back to steepest descent
            d = -grad;
            dirder = -grad.squaredNorm();
        }

        // Armijo backtracking on the stage energy
        std::vector<double> trial = u;
        double alpha = 1.0;
        double E_new = 0.0;
        int bt = 0;
        for (;; ++bt) {
            if (bt > opts.max_backtracks)
                throw NumericalError("stage eps=" + fmt17(eps) +
                                     ": line search exhausted; residual history " +
                                     residual_history_tail(history));
            for (std::size_t v = 0; v < u.size(); ++v)
                if (free_index[v] >= 0) trial[v] = u[v] + alpha * d[free_index[v]];
            E_new = assemble_energy(mesh, e, ev, trial);
            if (E_new <= E + opts.armijo_c1 * alpha * dirder && std::isfinite(E_new)) break;
            alpha *= opts.backtrack_factor;
        }
        u = trial;

        const double E_prev = E;
        E = assemble_system(mesh, e, ev, u, free_index, grad, nullptr);
        res = grad.norm();
        history.push_back(res);
        log.add(eps, E, res, alpha);
        if (res <= tol) return;
        // stalled within round-off of the energy while already near the
        // target: accept rather than polish noise
        if (std::fabs(E_prev - E) <= opts.energy_tolerance * (1.0 + std::fabs(E)) &&
            res <= 1e3 * tol && iter >= 1)
            return;
    }
    throw NumericalError("stage eps=" + fmt17(eps) + " did not converge in " +
                         std::to_string(opts.max_newton_iterations) +
                         " Newton iterations; residual history " + residual_history_tail(history));
}

void validate_options(const SolveOptions& opts, const std::vector<double>& schedule) {
    if (schedule.empty()) throw InputError("empty mollification schedule");
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        if (schedule[i] < 0.0) throw InputError("mollification radius must be nonnegative");
        if (i > 0 && schedule[i] >= schedule[i - 1])
            throw InputError("mollification schedule must be strictly decreasing");
    }
    if (opts.max_newton_iterations < 1) throw InputError("max_newton_iterations must be positive");
    if (opts.residual_tolerance <= 0.0 || opts.stage_tolerance <= 0.0)
        throw InputError("residual tolerances must be positive");
    if (opts.armijo_c1 <= 0.0 || opts.armijo_c1 >= 1.0) throw InputError("armijo_c1 must be in (0,1)");
    if (opts.backtrack_factor <= 0.0 || opts.backtrack_factor >= 1.0)
        throw InputError("backtrack_factor must be in (0,1)");
    if (opts.linear_tolerance <= 0.0) throw InputError("linear_tolerance must be positive");
}

} // namespace

std::vector<double> default_epsilon_schedule(const Integrand& F) {
    const bool smooth = F.p == 2.0 && F.profile.kind() != AngularProfile::Kind::Sampled;
    if (smooth) return {0.0};
    const double eps_final = F.p >= 2.0 ? 1e-8 : 1e-6;
    std::vector<double> s;
    for (double eps = 1.0; eps > eps_final; eps *= 0.5) s.push_back(eps);
    s.push_back(eps_final);
    return s;
}

FValues regularized_values(const Integrand& F, double eps, Vec2 eta) {
    return StageEvaluator(F, eps).eval(eta);
}

double regularized_value(const Integrand& F, double eps, Vec2 eta) {
    return StageEvaluator(F, eps).value(eta);
}

ScalarField solve_capacitary(std::shared_ptr<const Mesh> mesh, const Integrand& F,
                             const SolveOptions& opts) {
    if (!mesh || mesh->triangles.empty()) throw InputError("solve requires a nonempty mesh");
    if (!F.delta_certified)
        throw InputError("integrand lacks a certified monotonicity constant; "
                         "run the monotonicity check before solving");
    bool has_outer = false, has_inner = false;
    for (int tag : mesh->vertex_tag) {
        has_outer |= tag == kOuterBoundary;
        has_inner |= tag == kInnerBoundary;
    }
    if (!has_outer || !has_inner) throw InputError("mesh lacks a tagged outer or inner boundary");

    std::vector<double> schedule = opts.epsilon_schedule;
    if (schedule.empty()) schedule = default_epsilon_schedule(F);
    validate_options(opts, schedule);

    const ElementData e = element_data(*mesh);
    int n_free = 0;
    const std::vector<int> free_index = build_free_index(*mesh, n_free);
    if (n_free == 0) throw InputError("mesh has no interior vertices");

    ScalarField out;
    out.mesh = mesh;
    out.values.assign(mesh->vertices.size(), 0.0);
    for (std::size_t v = 0; v < mesh->vertices.size(); ++v)
        if (mesh->vertex_tag[v] == kInnerBoundary) out.values[v] = 1.0;

    ConvergenceLog log;
    std::vector<double> history;
    try {
        // harmonic start: one quadratic solve gives a smooth interior field
        // obeying both boundary values, a safe base for every integrand
        const Integrand harmonic = make_power_integrand(2.0);
        {
            const StageEvaluator ev(harmonic, 0.0);
            run_stage(*mesh, e, ev, 0.0, free_index, n_free, out.values,
                      opts.stage_tolerance, opts, log, history);
        }
        log = ConvergenceLog{}; // the published log covers the schedule only
        history.clear();

        for (std::size_t k = 0; k < schedule.size(); ++k) {
            const double eps = schedule[k];
            const bool last = k + 1 == schedule.size();
            const double tol = last ? opts.residual_tolerance : opts.stage_tolerance;
            const StageEvaluator ev(F, eps);
            run_stage(*mesh, e, ev, eps, free_index, n_free, out.values, tol, opts, log, history);
        }
    } catch (...) {
        if (!opts.convergence_log_path.empty())
            write_text_file(opts.convergence_log_path, log.rows);
        throw;
    }
    if (!opts.convergence_log_path.empty())
        write_text_file(opts.convergence_log_path, log.rows);

    // snap round-off excursions onto the attained bounds; genuine violations
    // of the discrete maximum principle are left visible
    for (double& v : out.values) {
        if (v < 0.0 && v >= -1e-12) v = 0.0;
        if (v > 1.0 && v <= 1.0 + 1e-12) v = 1.0;
    }

    out.tri_grad = all_triangle_gradients(*mesh, out.values);
    return out;
}

std::vector<Vec2> gradient_field(const ScalarField& u) {
    if (!u.mesh) throw InputError("field has no mesh");
    if (u.tri_grad.size() == u.mesh->triangles.size()) return u.tri_grad;
    return all_triangle_gradients(*u.mesh, u.values);
}

double energy(const ScalarField& w, const Integrand& F) {
    if (!w.mesh) throw InputError("field has no mesh");
    if (w.values.size() != w.mesh->vertices.size())
        throw InputError("field length does not match its mesh");
    const ElementData e = element_data(*w.mesh);
    const StageEvaluator ev(F, F.epsilon);
    return assemble_energy(*w.mesh, e, ev, w.values);
}

double residual(const ScalarField& w, const Integrand& F) {
    if (!w.mesh) throw InputError("field has no mesh");
    if (w.values.size() != w.mesh->vertices.size())
        throw InputError("field length does not match its mesh");
    const ElementData e = element_data(*w.mesh);
    int n_free = 0;
    const std::vector<int> free_index = build_free_index(*w.mesh, n_free);
    Eigen::VectorXd grad(n_free);
    const StageEvaluator ev(F, F.epsilon);
    assemble_system(*w.mesh, e, ev, w.values, free_index, grad, nullptr);
    return grad.norm();
}

HarnackReport harnack_diagnostic(const ScalarField& u, const std::vector<Ball>& balls) {
    if (!u.mesh) throw InputError("field has no mesh");
    const Mesh& mesh = *u.mesh;
    HarnackReport report;
    report.max_ratio = 0.0;

    auto segment_distance = [](Vec2 p, Vec2 a, Vec2 b) {
        const Vec2 ab = b - a;
        const double t = std::clamp(dot(p - a, ab) / norm2(ab), 0.0, 1.0);
        return dist(p, a + t * ab);
    };

    for (const Ball& ball : balls) {
        HarnackBall hb;
        hb.center = ball.center;
        hb.radius = ball.radius;
        if (ball.radius <= 0.0) {
            hb.skipped = true;
            hb.note = "nonpositive radius";
            report.balls.push_back(hb);
            continue;
        }
        double boundary_dist = std::numeric_limits<double>::infinity();
        for (const BoundaryEdge& e : mesh.boundary_edges)
            boundary_dist = std::min(
                boundary_dist, segment_distance(ball.center, mesh.vertices[e.a], mesh.vertices[e.b]));
        if (boundary_dist <= 2.0 * ball.radius) {
            hb.skipped = true;
            hb.note = "double ball reaches the boundary";
            report.balls.push_back(hb);
            continue;
        }
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
            if (dist(mesh.vertices[v], ball.center) > ball.radius) continue;
            lo = std::min(lo, u.values[v]);
            hi = std::max(hi, u.values[v]);
        }
        if (!std::isfinite(lo)) {
            hb.skipped = true;
            hb.note = "no mesh nodes inside the ball";
            report.balls.push_back(hb);
            continue;
        }
        if (lo <= 0.0) {
            hb.skipped = true;
            hb.note = "field not positive on the ball";
            report.balls.push_back(hb);
            continue;
        }
        hb.ratio = hi / lo;
        report.max_ratio = std::max(report.max_ratio, hb.ratio);
        report.balls.push_back(hb);
    }
    return report;
}

void write_field(const ScalarField& u, const std::string& path) {
    if (!u.mesh) throw InputError("field has no mesh");
    if (u.values.size() != u.mesh->vertices.size())
        throw InputError("field length does not match its mesh");
    std::string out = "field " + std::to_string(u.values.size()) + " mesh " +
                      checksum_hex(mesh_checksum(*u.mesh)) + "\n";
    out.reserve(out.size() + u.values.size() * 24);
    for (double v : u.values) out += fmt17(v) + "\n";
    write_text_file(path, out);
}

ScalarField read_field(const std::string& path, std::shared_ptr<const Mesh> mesh) {
    if (!mesh) throw InputError("read_field requires a mesh");
    std::istringstream in(read_text_file(path));
    std::string word, hex;
    std::size_t n = 0;
    if (!(in >> word >> n) || word != "field")
        throw InputError("malformed field file header: " + path);
    if (!(in >> word >> hex) || word != "mesh")
        throw InputError("malformed field file header: " + path);
    if (hex != checksum_hex(mesh_checksum(*mesh)))
        throw ConsistencyError("field file " + path + " was written for a different mesh");
    if (n != mesh->vertices.size())
        throw ConsistencyError("field file " + path + " has " + std::to_string(n) +
                               " values for a mesh with " + std::to_string(mesh->vertices.size()) +
                               " nodes");
    ScalarField out;
    out.mesh = mesh;
    out.values.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        if (!(in >> out.values[i])) throw InputError("truncated field file: " + path);
    out.tri_grad = all_triangle_gradients(*mesh, out.values);
    return out;
}

} // namespace fharm
