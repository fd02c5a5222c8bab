#include "fharm/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <sstream>

#include "fharm/errors.hpp"
#include "fharm/io_util.hpp"

namespace fharm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// loglog(1/t) stays positive with margin on (0, e^-2)
const double kGaugeDomainMax = std::exp(-2.0);

void require_solved_field(const ScalarField& u) {
    if (!u.mesh) throw InputError("field has no mesh");
    if (u.values.size() != u.mesh->vertices.size())
        throw InputError("field length does not match its mesh");
}

void require_matching_density(const ScalarField& u, const LogDensityField& ld) {
    if (!ld.mesh) throw InputError("log-density field has no mesh");
    if (ld.mesh != u.mesh || ld.v.size() != u.mesh->triangles.size())
        throw ConsistencyError("log-density field does not belong to this solution");
}

RegressionFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
    RegressionFit fit;
    fit.n = static_cast<int>(xs.size());
    if (fit.n < 2) return fit;
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / fit.n;
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / fit.n;
    double sxx = 0.0, sxy = 0.0;
    for (int i = 0; i < fit.n; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (sxx == 0.0) return fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double sse = 0.0;
    for (int i = 0; i < fit.n; ++i) {
        const double e = ys[i] - (fit.intercept + fit.slope * xs[i]);
        sse += e * e;
    }
    fit.rms_residual = std::sqrt(sse / fit.n);
    if (fit.n > 2) fit.stderr_slope = std::sqrt(sse / (fit.n - 2) / sxx);
    return fit;
}

double log_sum_exp(const std::vector<double>& terms) {
    double top = -kInf;
    for (double t : terms) top = std::max(top, t);
    if (top == -kInf) return -kInf;
    double acc = 0.0;
    for (double t : terms) acc += std::exp(t - top);
    return top + std::log(acc);
}

}  // namespace

// --- Log-density field --------------------------------------------------------

Branch default_branch(double p) {
    return p > 2.0 ? Branch::negative_part : Branch::positive_part;
}

LogDensityField log_density(const ScalarField& u, const Integrand& F, Branch branch,
                            std::optional<double> c_prime) {
    require_solved_field(u);
    const Mesh& mesh = *u.mesh;
    const std::vector<Vec2> grads = gradient_field(u);

    LogDensityField ld;
    ld.mesh = u.mesh;
    ld.p = F.p;
    ld.branch = branch;
    ld.v.resize(mesh.triangles.size(), -kInf);
    ld.w.resize(mesh.triangles.size(), 0.0);
    ld.g.resize(mesh.triangles.size(), 0.0);
    ld.excluded.assign(mesh.triangles.size(), 0);

    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const double gn = norm(grads[t]);
        if (gn < 1e-14) {
            ld.excluded[t] = 1;
            ld.excluded_area += triangle_area(mesh, static_cast<int>(t));
            continue;
        }
        ld.v[t] = std::log(regularized_value(F, F.epsilon, grads[t]));
        ld.w[t] = branch == Branch::positive_part ? std::max(ld.v[t], 0.0)
                                                  : std::max(-ld.v[t], 0.0);
    }

    if (c_prime) {
        if (*c_prime < 0.0) throw InputError("the truncation level cannot be negative");
        ld.c_prime = *c_prime;
    } else {
        // smallest level that silences g on the core neighborhood B(0,2)
        double needed = 0.0;
        for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
            if (ld.excluded[t]) continue;
            const auto& tri = mesh.triangles[t];
            const bool meets_core = norm(mesh.vertices[tri[0]]) <= 2.0 ||
                                    norm(mesh.vertices[tri[1]]) <= 2.0 ||
                                    norm(mesh.vertices[tri[2]]) <= 2.0;
            if (meets_core) needed = std::max(needed, ld.w[t]);
        }
        ld.c_prime = needed;
    }
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t)
        if (!ld.excluded[t]) ld.g[t] = std::max(ld.w[t] - ld.c_prime, 0.0);
    return ld;
}

// --- Moment integrals over level curves ----------------------------------------

double moment_integral(const ScalarField& u, const Integrand& F, const LogDensityField& ld,
                       double t, int m, bool truncated) {
    require_solved_field(u);
    require_matching_density(u, ld);
    if (!(t > 0.0 && t < 0.5)) throw InputError("moment level must sit in (0, 1/2)");
    if (m < 0) throw InputError("moment order cannot be negative");
    if (m == 0) return level_flux(u, F, t);

    const LevelCurve curve = extract_level_curve(*u.mesh, u.values, t);
    const std::vector<Vec2> grads = gradient_field(u);
    std::vector<double> log_terms;
    for (const LevelComponent& comp : curve.components) {
        const std::size_t n = comp.points.size();
        for (std::size_t j = 0; j < n; ++j) {
            const int tri = comp.seg_triangle[j];
            if (ld.excluded[tri]) continue;
            const double weight = truncated ? ld.g[tri] : ld.w[tri];
            if (weight <= 0.0) continue;
            const double len = dist(comp.points[j], comp.points[(j + 1) % n]);
            if (len <= 0.0) continue;
            const Vec2 g = grads[tri];
            const double density = regularized_value(F, F.epsilon, g) / norm(g);
            log_terms.push_back(std::log(density) + 2.0 * m * std::log(weight) +
                                std::log(len));
        }
    }
    const double ls = log_sum_exp(log_terms);
    return ls == -kInf ? 0.0 : std::exp(ls);
}

MomentTable moment_table(const ScalarField& u, const Integrand& F, const LogDensityField& ld,
                         const std::vector<double>& t_grid, int m_max, bool truncated) {
    if (t_grid.empty()) throw InputError("moment table needs at least one level");
    if (m_max < 0) throw InputError("moment order cannot be negative");
    MomentTable table;
    table.t_grid = t_grid;
    table.m_max = m_max;
    for (double t : t_grid) {
        for (int m = 0; m <= m_max; ++m) {
            const double value = moment_integral(u, F, ld, t, m, truncated);
            table.rows.push_back({t, m, value > 0.0 ? std::log(value) : -kInf});
        }
    }
    return table;
}

MomentFit moment_bound_fit(const MomentTable& table) {
    if (table.rows.empty()) throw InputError("moment table has no rows");

    const auto bracket = [](const MomentRow& row) {
        return (row.log_value - std::lgamma(row.m + 1.0) -
                row.m * std::log(std::log(1.0 / row.t))) /
               (row.m + 1.0);
    };

    MomentFit fit;
    double best = -kInf;
    for (const MomentRow& row : table.rows) {
        if (row.m < 1 || row.log_value == -kInf) continue;
        best = std::max(best, bracket(row));
    }
    if (best == -kInf) {
        // all higher moments vanish; the base flux rows decide the constant
        for (const MomentRow& row : table.rows)
            if (row.m == 0 && row.log_value != -kInf) best = std::max(best, row.log_value);
    }
    if (best == -kInf) throw NumericalError("every moment row is zero; nothing to fit");
    fit.c_star_hat = std::exp(best);

    // trend of the bracketed quantity against m, one fit per level, steepest kept
    double steepest = -kInf;
    for (double t : table.t_grid) {
        std::vector<double> xs, ys;
        for (const MomentRow& row : table.rows) {
            if (row.t != t || row.m < 1 || row.log_value == -kInf) continue;
            xs.push_back(row.m);
            ys.push_back(bracket(row));
        }
        if (xs.size() >= 2) steepest = std::max(steepest, fit_line(xs, ys).slope);
    }
    fit.bracket_slope = steepest == -kInf ? 0.0 : steepest;
    return fit;
}

// --- Gauge ----------------------------------------------------------------------

double gauge_exponent(double t, double c_star) {
    if (!(t > 0.0 && t < kGaugeDomainMax))
        throw InputError("gauge scale is defined on (0, e^-2)");
    if (c_star <= 0.0) throw InputError("the gauge constant must be positive");
    const double l = std::log(1.0 / t);
    return std::sqrt(4.0 * c_star * l * std::log(l));
}

GaugeFunction make_gauge(double p, double A, double c_star) {
    GaugeFunction g;
    g.A = A;
    g.sign = p <= 2.0 ? +1 : -1;
    g.c_star = std::max(1.0, c_star);
    return g;
}

double gauge_value(const GaugeFunction& gauge, double r) {
    return r * std::exp(gauge.sign * gauge.A * gauge_exponent(r, gauge.c_star));
}

double exceptional_flux(const ScalarField& u, const Integrand& F, const LogDensityField& ld,
                        double t, const GaugeFunction& gauge) {
    require_solved_field(u);
    require_matching_density(u, ld);
    const double threshold = gauge_exponent(t, gauge.c_star);  // validates t

    const LevelCurve curve = extract_level_curve(*u.mesh, u.values, t);
    const std::vector<Vec2> grads = gradient_field(u);
    double flux = 0.0;
    for (const LevelComponent& comp : curve.components) {
        const std::size_t n = comp.points.size();
        for (std::size_t j = 0; j < n; ++j) {
            const int tri = comp.seg_triangle[j];
            if (ld.excluded[tri] || ld.w[tri] < threshold) continue;
            const double len = dist(comp.points[j], comp.points[(j + 1) % n]);
            const Vec2 g = grads[tri];
            flux += regularized_value(F, F.epsilon, g) / norm(g) * len;
        }
    }
    return flux;
}

// --- Winding numbers -------------------------------------------------------------

std::vector<int> component_windings(const ScalarField& u, const LevelCurve& curve) {
    require_solved_field(u);
    std::vector<int> windings;
    for (std::size_t c = 0; c < curve.components.size(); ++c) {
        const LevelComponent& comp = curve.components[c];
        const std::size_t n = comp.points.size();
        if (n < 3 || comp.vertex_grad.size() != n)
            throw InputError("level-curve component is not a closed polyline");

        for (std::size_t j = 0; j < n; ++j)
            if (norm(comp.vertex_grad[j]) <= 1e-12)
                throw NumericalError(
                    "cannot certify a winding number: |grad u| = " +
                    fmt17(norm(comp.vertex_grad[j])) + " at curve vertex " +
                    std::to_string(j) + " of component " + std::to_string(c) + " near (" +
                    fmt17(comp.points[j].x) + ", " + fmt17(comp.points[j].y) + ")");

        // phase steps of u_x - i u_y between consecutive curve vertices
        double total = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const Vec2 ga = comp.vertex_grad[j];
            const Vec2 gb = comp.vertex_grad[(j + 1) % n];
            const double ax = ga.x, ay = -ga.y;
            const double bx = gb.x, by = -gb.y;
            total += std::atan2(by * ax - bx * ay, bx * ax + by * ay);
        }
        const double turns = total / (2.0 * M_PI);
        const int rounded = static_cast<int>(std::lround(turns));
        if (std::fabs(turns - rounded) > 0.25)
            throw NumericalError("phase steps do not close to an integer winding (" +
                                 fmt17(turns) + " turns); the curve is under-resolved");
        windings.push_back(rounded);
    }
    return windings;
}

int winding_number(const ScalarField& u, const LevelCurve& curve) {
    const std::vector<int> per = component_windings(u, curve);
    return std::accumulate(per.begin(), per.end(), 0);
}

// --- Dimension estimators ---------------------------------------------------------

std::vector<double> geometric_radius_grid(double r_min, double r_max) {
    if (!(r_min > 0.0 && r_min <= r_max))
        throw InputError("radius grid needs 0 < r_min <= r_max");
    std::vector<double> radii;
    for (double r = r_max; r >= r_min * (1.0 - 1e-12); r *= 0.5) radii.push_back(r);
    return radii;
}

DimensionReport local_dimension(const BoundaryMeasure& mu, const std::vector<Vec2>& centers,
                                const std::vector<double>& radii,
                                const GaugeFunction* gauge) {
    if (radii.size() < 4) throw InputError("dimension fits need at least 4 radii");
    for (double r : radii)
        if (r <= 0.0) throw InputError("radii must be positive");
    if (mu.arcs.empty() || mu.total_mass <= 0.0)
        throw InputError("dimension fits need a measure with mass");

    DimensionReport report;
    report.radii = radii;
    std::sort(report.radii.begin(), report.radii.end(), std::greater<>());
    const double r_max = report.radii.front();
    const double r_min = report.radii.back();

    for (const Vec2& z : centers) {
        CenterDimension cd;
        cd.center = z;
        cd.ball_mass = measure_ball(mu, z, r_max);
        if (cd.ball_mass <= 0.0) {
            cd.skipped = true;
            report.centers.push_back(cd);
            continue;
        }
        std::vector<double> xs, ys;
        for (double r : report.radii) {
            const double mball = measure_ball(mu, z, r);
            if (mball <= 0.0) continue;
            xs.push_back(std::log(r));
            ys.push_back(std::log(mball));
        }
        cd.n_radii = static_cast<int>(xs.size());
        if (cd.n_radii < 2) {
            cd.skipped = true;
            report.centers.push_back(cd);
            continue;
        }
        const RegressionFit fit = fit_line(xs, ys);
        cd.slope = fit.slope;
        cd.stderr_slope = fit.stderr_slope;
        cd.rms_residual = fit.rms_residual;
        report.centers.push_back(cd);
    }

    // mass-weighted aggregate of the per-center slopes
    double wsum = 0.0, wmean = 0.0;
    for (const CenterDimension& cd : report.centers) {
        if (cd.skipped) continue;
        wsum += cd.ball_mass;
        wmean += cd.ball_mass * cd.slope;
    }
    if (wsum > 0.0) {
        wmean /= wsum;
        double wvar = 0.0, w2 = 0.0;
        for (const CenterDimension& cd : report.centers) {
            if (cd.skipped) continue;
            wvar += cd.ball_mass * (cd.slope - wmean) * (cd.slope - wmean);
            w2 += cd.ball_mass * cd.ball_mass;
        }
        wvar /= wsum;
        const double n_eff = wsum * wsum / std::max(w2, 1e-300);
        report.local_dimension = wmean;
        report.local_ci = 2.0 * std::sqrt(wvar / std::max(n_eff, 1.0));
    } else {
        report.note = "every center was skipped; ";
    }

    // entropy of dyadic splits of the boundary cycle. The blocks are cut by
    // equal arc length, but the regression abscissa must be their spatial
    // extent: on a rough boundary a block of arc length l spans far less than
    // l in the plane, and regressing on l would deflate the slope by exactly
    // the roughness of the curve. Levels whose blocks are still macroscopic
    // carry no scaling information and bias the slope low, so a level enters
    // the regression only once its typical block extent drops to a tenth of
    // the support diameter, the same upper cutoff the ball radii observe.
    double total_len = 0.0, max_arc = 0.0;
    double sup_lo_x = kInf, sup_hi_x = -kInf, sup_lo_y = kInf, sup_hi_y = -kInf;
    for (const MeasureArc& arc : mu.arcs) {
        total_len += arc.length;
        max_arc = std::max(max_arc, arc.length);
        sup_lo_x = std::min(sup_lo_x, arc.midpoint.x);
        sup_hi_x = std::max(sup_hi_x, arc.midpoint.x);
        sup_lo_y = std::min(sup_lo_y, arc.midpoint.y);
        sup_hi_y = std::max(sup_hi_y, arc.midpoint.y);
    }
    const double support_diameter = std::hypot(sup_hi_x - sup_lo_x, sup_hi_y - sup_lo_y);
    const int k_max =
        static_cast<int>(std::floor(std::log2(total_len / (10.0 * max_arc))));
    std::vector<double> xs, ys;
    for (int k = 3; k <= k_max; ++k) {
        const std::size_t blocks = std::size_t{1} << k;
        const double block_len = total_len / static_cast<double>(blocks);
        std::vector<double> block_mass(blocks, 0.0);
        std::vector<double> lo_x(blocks, kInf), hi_x(blocks, -kInf);
        std::vector<double> lo_y(blocks, kInf), hi_y(blocks, -kInf);
        std::vector<double> long_arc(blocks, 0.0);
        double cum = 0.0;
        for (const MeasureArc& arc : mu.arcs) {
            const double s = cum + 0.5 * arc.length;
            cum += arc.length;
            std::size_t b = static_cast<std::size_t>(s / block_len);
            if (b >= blocks) b = blocks - 1;
            block_mass[b] += arc.weight;
            lo_x[b] = std::min(lo_x[b], arc.midpoint.x);
            hi_x[b] = std::max(hi_x[b], arc.midpoint.x);
            lo_y[b] = std::min(lo_y[b], arc.midpoint.y);
            hi_y[b] = std::max(hi_y[b], arc.midpoint.y);
            long_arc[b] = std::max(long_arc[b], arc.length);
        }
        double entropy = 0.0, mean_log_diam = 0.0;
        for (std::size_t b = 0; b < blocks; ++b) {
            if (block_mass[b] <= 0.0) continue;
            const double q = block_mass[b] / mu.total_mass;
            entropy += q * std::log(q);
            const double diag = std::hypot(hi_x[b] - lo_x[b], hi_y[b] - lo_y[b]);
            mean_log_diam += q * std::log(std::max(diag, long_arc[b]));
        }
        if (std::exp(mean_log_diam) > 0.1 * support_diameter) continue;
        xs.push_back(mean_log_diam);
        ys.push_back(entropy);
        report.partition_scales.push_back(std::exp(mean_log_diam));
        report.partition_entropy.push_back(entropy);
    }
    if (xs.size() >= 3) {
        report.information_fit = fit_line(xs, ys);
        report.information_dimension = report.information_fit.slope;
        report.information_ci = 2.0 * report.information_fit.stderr_slope;
    } else {
        report.information_dimension = -1.0;
        report.note += "too few dyadic scales between arc length and boundary length; ";
    }

    if (gauge) {
        if (r_min < kGaugeDomainMax) {
            const double lam = gauge_value(*gauge, r_min);
            double small = 0.0;
            for (const MeasureArc& arc : mu.arcs)
                if (measure_ball(mu, arc.midpoint, r_min) <= lam) small += arc.weight;
            report.gauge_small_mass_fraction = small / mu.total_mass;
        } else {
            report.note += "finest radius exceeds the gauge domain; ";
        }
    }
    return report;
}

// --- Gauge comparison --------------------------------------------------------------

GaugeTrendReport gauge_comparison(const BoundaryMeasure& mu, const GaugeFunction& gauge,
                                  const std::vector<double>& radii) {
    if (radii.size() < 2) throw InputError("gauge trends need at least 2 radii");
    if (mu.arcs.empty() || mu.total_mass <= 0.0)
        throw InputError("gauge trends need a measure with mass");

    GaugeTrendReport report;
    report.radii = radii;
    std::sort(report.radii.begin(), report.radii.end(), std::greater<>());
    std::vector<double> lambda(report.radii.size());
    for (std::size_t i = 0; i < report.radii.size(); ++i)
        lambda[i] = gauge_value(gauge, report.radii[i]);  // validates the domain

    double ratio_mass = 0.0;
    for (const MeasureArc& arc : mu.arcs) {
        std::vector<double> xs, ys;
        double ratio_sum = 0.0;
        int ratio_n = 0;
        double finest = 0.0;
        for (std::size_t i = 0; i < report.radii.size(); ++i) {
            const double q = measure_ball(mu, arc.midpoint, report.radii[i]) / lambda[i];
            finest = q;
            ratio_sum += q;
            ++ratio_n;
            if (q > 0.0) {
                xs.push_back(std::log(report.radii[i]));
                ys.push_back(std::log(q));
            }
        }
        report.finest_ratio.push_back(finest);
        const double frac = arc.weight / mu.total_mass;
        double slope = 0.0;
        if (xs.size() >= 2) slope = fit_line(xs, ys).slope;
        report.arc_slope.push_back(slope);
        // the ratio grows as r shrinks exactly when the log-log slope is negative
        if (xs.size() < 2 || std::fabs(slope) <= 0.1)
            report.fraction_flat += frac;
        else if (slope < 0.0)
            report.fraction_increasing += frac;
        else
            report.fraction_decreasing += frac;
        ratio_mass += frac * ratio_sum / std::max(ratio_n, 1);
    }
    report.mean_ratio = ratio_mass;
    return report;
}

// --- Files ---------------------------------------------------------------------------

void write_moments_csv(const MomentTable& table, std::uint64_t field_checksum,
                       const std::string& path) {
    std::string text = "# field " + checksum_hex(field_checksum) + " m_max " +
                       std::to_string(table.m_max) + " rows " +
                       std::to_string(table.rows.size()) + "\n";
    text += "t,m,log_value\n";
    for (const MomentRow& row : table.rows)
        text += fmt17(row.t) + "," + std::to_string(row.m) + "," + fmt17(row.log_value) + "\n";
    write_text_file(path, text);
}

MomentTable read_moments_csv(const std::string& path) {
    std::istringstream in(read_text_file(path));
    std::string line;
    if (!std::getline(in, line)) throw InputError("moments file is empty: " + path);
    const std::vector<std::string> head = split_ws(line);
    if (head.size() != 7 || head[0] != "#" || head[1] != "field" || head[3] != "m_max" ||
        head[5] != "rows")
        throw InputError("moments file has a malformed header: " + path);
    std::size_t expected = 0;
    MomentTable table;
    try {
        table.m_max = std::stoi(head[4]);
        expected = std::stoul(head[6]);
    } catch (const std::exception&) {
        throw InputError("moments file has a malformed header: " + path);
    }
    if (!std::getline(in, line) || trim(line) != "t,m,log_value")
        throw InputError("moments file is missing its column header: " + path);

    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        const std::vector<std::string> parts = split_ws(line);
        if (parts.size() != 3) throw InputError("moments row needs 3 columns: " + line);
        MomentRow row;
        try {
            row.t = std::stod(parts[0]);
            row.m = std::stoi(parts[1]);
            row.log_value = std::stod(parts[2]);
        } catch (const std::exception&) {
            throw InputError("moments row is not numeric: " + line);
        }
        if (table.t_grid.empty() || table.t_grid.back() != row.t)
            table.t_grid.push_back(row.t);
        table.rows.push_back(row);
    }
    if (table.rows.size() != expected)
        throw ConsistencyError("moments file row count does not match its header");
    std::sort(table.t_grid.begin(), table.t_grid.end());
    table.t_grid.erase(std::unique(table.t_grid.begin(), table.t_grid.end()),
                       table.t_grid.end());
    return table;
}

namespace {

std::string join17(const std::vector<double>& vs) {
    std::string out;
    for (std::size_t i = 0; i < vs.size(); ++i) {
        if (i) out += " ";
        out += fmt17(vs[i]);
    }
    return out;
}

}  // namespace

void write_dimension_report(const DimensionReport& report, const std::string& path) {
    int used = 0, skipped = 0;
    for (const CenterDimension& cd : report.centers) (cd.skipped ? skipped : used)++;
    std::string text;
    text += "radii: " + join17(report.radii) + "\n";
    text += "centers_used: " + std::to_string(used) + "\n";
    text += "centers_skipped: " + std::to_string(skipped) + "\n";
    text += "local_dimension: " + fmt17(report.local_dimension) + "\n";
    text += "local_ci: " + fmt17(report.local_ci) + "\n";
    text += "information_dimension: " + fmt17(report.information_dimension) + "\n";
    text += "information_ci: " + fmt17(report.information_ci) + "\n";
    text += "information_rms_residual: " + fmt17(report.information_fit.rms_residual) + "\n";
    text += "partition_scales: " + join17(report.partition_scales) + "\n";
    text += "partition_entropy: " + join17(report.partition_entropy) + "\n";
    text += "gauge_small_mass_fraction: " + fmt17(report.gauge_small_mass_fraction) + "\n";
    text += "note: " + (report.note.empty() ? std::string("none") : report.note) + "\n";
    write_text_file(path, text);
}

void write_dimension_centers_csv(const DimensionReport& report, const std::string& path) {
    std::string text = "center_x,center_y,slope,stderr_slope,rms_residual,ball_mass,n_radii,skipped\n";
    for (const CenterDimension& cd : report.centers) {
        text += fmt17(cd.center.x) + "," + fmt17(cd.center.y) + "," + fmt17(cd.slope) + "," +
                fmt17(cd.stderr_slope) + "," + fmt17(cd.rms_residual) + "," +
                fmt17(cd.ball_mass) + "," + std::to_string(cd.n_radii) + "," +
                (cd.skipped ? "1" : "0") + "\n";
    }
    write_text_file(path, text);
}

}  // namespace fharm
