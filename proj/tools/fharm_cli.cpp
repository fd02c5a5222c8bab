// Configuration-driven pipeline around the library: solve a capacitary
// field, extract its boundary measure, run the moment/dimension analysis,
// and leave every artifact on disk with a manifest of checksums so a rerun
// can be compared byte for byte.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fharm/analysis.hpp"
#include "fharm/errors.hpp"
#include "fharm/geometry.hpp"
#include "fharm/integrand.hpp"
#include "fharm/io_util.hpp"
#include "fharm/measure.hpp"
#include "fharm/solver.hpp"

namespace fs = std::filesystem;
using namespace fharm;

namespace {

constexpr const char* kVersion = "1.0.0";

// the gauge lives on (0, e^-2); comparisons start just inside that window
constexpr double kGaugeGridMax = 0.12;

struct RunConfig {
    // integrand
    std::string integrand_kind = "power";
    double p = 2.0;
    double a11 = 1.0, a12 = 0.0, a22 = 1.0;
    std::string profile_file;
    // domain
    std::string domain_kind = "disk";
    double radius = 10.0;
    double half_side = 6.0;
    int level = 3;
    double base_size = 1.0;
    std::string outer_file;
    double z0_x = 0.0, z0_y = 0.0;
    // mesh
    double h_max = 0.1;
    double grading = 1.0;
    // solve
    SolveOptions solve;
    // analysis
    std::vector<double> t_grid = {0.4, 0.2, 0.1, 0.05, 0.02};
    int m_max = 5;
    std::vector<double> radii;  // empty = derive from the measure
    std::vector<double> gauge_A = {1.0};
    std::string regime = "auto";
    double c_star_override = 0.0;  // 0 = take it from the moment fit
    int centers = 64;
    // output
    std::string out_dir = "out";
    std::uint64_t seed = 0;

    std::string text;  // the verbatim config file, copied into the manifest
};

double parse_number(const std::string& section, const std::string& key,
                    const std::string& value) {
    try {
        std::size_t used = 0;
        const double x = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return x;
    } catch (const std::exception&) {
        throw InputError("config " + section + "." + key + ": not a number: " + value);
    }
}

std::vector<double> parse_numbers(const std::string& section, const std::string& key,
                                  const std::string& value) {
    std::vector<double> out;
    for (const std::string& tok : split_ws(value))
        out.push_back(parse_number(section, key, tok));
    return out;
}

RunConfig parse_config(const std::string& path) {
    if (!file_exists(path)) throw InputError("config file not found: " + path);
    RunConfig cfg;
    cfg.text = read_text_file(path);

    std::istringstream in(cfg.text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw InputError("config line " + std::to_string(lineno) +
                                 ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw InputError("config line " + std::to_string(lineno) +
                             ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const auto num = [&] { return parse_number(section, key, value); };
        const auto nums = [&] { return parse_numbers(section, key, value); };

        if (section == "integrand") {
            if (key == "kind") cfg.integrand_kind = value;
            else if (key == "p") cfg.p = num();
            else if (key == "a11") cfg.a11 = num();
            else if (key == "a12") cfg.a12 = num();
            else if (key == "a22") cfg.a22 = num();
            else if (key == "profile_file") cfg.profile_file = value;
            else throw InputError("config: unknown key integrand." + key);
        } else if (section == "domain") {
            if (key == "kind") cfg.domain_kind = value;
            else if (key == "radius") cfg.radius = num();
            else if (key == "half_side") cfg.half_side = num();
            else if (key == "level") cfg.level = static_cast<int>(num());
            else if (key == "base_size") cfg.base_size = num();
            else if (key == "outer_file") cfg.outer_file = value;
            else if (key == "z0_x") cfg.z0_x = num();
            else if (key == "z0_y") cfg.z0_y = num();
            else throw InputError("config: unknown key domain." + key);
        } else if (section == "mesh") {
            if (key == "h_max") cfg.h_max = num();
            else if (key == "grading") cfg.grading = num();
            else throw InputError("config: unknown key mesh." + key);
        } else if (section == "solve") {
            if (key == "max_newton_iterations")
                cfg.solve.max_newton_iterations = static_cast<int>(num());
            else if (key == "residual_tolerance") cfg.solve.residual_tolerance = num();
            else if (key == "stage_tolerance") cfg.solve.stage_tolerance = num();
            else if (key == "energy_tolerance") cfg.solve.energy_tolerance = num();
            else if (key == "linear_tolerance") cfg.solve.linear_tolerance = num();
            else if (key == "epsilon_schedule") cfg.solve.epsilon_schedule = nums();
            else throw InputError("config: unknown key solve." + key);
        } else if (section == "analysis") {
            if (key == "t_grid") cfg.t_grid = nums();
            else if (key == "m_max") cfg.m_max = static_cast<int>(num());
            else if (key == "radii") cfg.radii = value == "auto" ? std::vector<double>{} : nums();
            else if (key == "gauge_A") cfg.gauge_A = nums();
            else if (key == "regime") cfg.regime = value;
            else if (key == "c_star") cfg.c_star_override = value == "auto" ? 0.0 : num();
            else if (key == "centers") cfg.centers = static_cast<int>(num());
            else throw InputError("config: unknown key analysis." + key);
        } else if (section == "output") {
            if (key == "dir") cfg.out_dir = value;
            else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(num());
            else throw InputError("config: unknown key output." + key);
        } else {
            throw InputError("config: unknown section [" + section + "]");
        }
    }

    // validation that does not need any file access
    if (!(cfg.p > 1.0) || !std::isfinite(cfg.p))
        throw InputError("config integrand.p: must lie in (1, infinity), got " + fmt17(cfg.p));
    if (cfg.integrand_kind == "quadratic" && cfg.p != 2.0)
        throw InputError("config integrand.p: quadratic profiles are degree 2 forms");
    if (cfg.integrand_kind != "power" && cfg.integrand_kind != "quadratic" &&
        cfg.integrand_kind != "sampled")
        throw InputError("config integrand.kind: unknown kind " + cfg.integrand_kind);
    if (cfg.domain_kind != "disk" && cfg.domain_kind != "square" &&
        cfg.domain_kind != "koch" && cfg.domain_kind != "custom")
        throw InputError("config domain.kind: unknown kind " + cfg.domain_kind);
    if (cfg.h_max <= 0.0) throw InputError("config mesh.h_max: must be positive");
    if (cfg.grading <= 0.0 || cfg.grading > 1.0)
        throw InputError("config mesh.grading: must lie in (0, 1]");
    if (cfg.t_grid.empty()) throw InputError("config analysis.t_grid: must be nonempty");
    for (double t : cfg.t_grid)
        if (t <= 0.0 || t >= 0.5)
            throw InputError("config analysis.t_grid: levels must lie in (0, 1/2), got " +
                             fmt17(t));
    if (cfg.m_max < 0) throw InputError("config analysis.m_max: must be nonnegative");
    if (cfg.centers < 4) throw InputError("config analysis.centers: need at least 4");
    if (cfg.regime != "auto" && cfg.regime != "positive" && cfg.regime != "negative")
        throw InputError("config analysis.regime: auto, positive, or negative");
    return cfg;
}

Integrand build_integrand(const RunConfig& cfg) {
    Integrand F;
    if (cfg.integrand_kind == "power") {
        F = make_power_integrand(cfg.p);
    } else if (cfg.integrand_kind == "quadratic") {
        F = make_quadratic_integrand(cfg.a11, cfg.a12, cfg.a22);
    } else {
        if (!file_exists(cfg.profile_file))
            throw InputError("config integrand.profile_file: file not found: " +
                             cfg.profile_file);
        std::vector<double> samples;
        for (const std::string& tok : split_ws(read_text_file(cfg.profile_file)))
            samples.push_back(parse_number("integrand", "profile_file", tok));
        F = make_sampled_integrand(cfg.p, std::move(samples));
    }
    F.delta_certified = verify_delta_monotone(F, 20000).delta_hat;
    return F;
}

Domain build_domain(const RunConfig& cfg) {
    if (cfg.domain_kind == "disk") return make_domain_disk(cfg.radius);
    if (cfg.domain_kind == "square") return make_domain_square(cfg.half_side);
    if (cfg.domain_kind == "koch") return make_domain_koch(cfg.level, cfg.base_size);
    if (!file_exists(cfg.outer_file))
        throw InputError("config domain.outer_file: file not found: " + cfg.outer_file);
    std::vector<Vec2> outer;
    const std::vector<std::string> toks = split_ws(read_text_file(cfg.outer_file));
    if (toks.size() < 6 || toks.size() % 2 != 0)
        throw InputError("config domain.outer_file: expected x y pairs, one per vertex");
    for (std::size_t k = 0; k + 1 < toks.size(); k += 2)
        outer.push_back({parse_number("domain", "outer_file", toks[k]),
                         parse_number("domain", "outer_file", toks[k + 1])});
    return make_domain_custom(outer, {cfg.z0_x, cfg.z0_y});
}

Branch build_branch(const RunConfig& cfg) {
    if (cfg.regime == "positive") return Branch::positive_part;
    if (cfg.regime == "negative") return Branch::negative_part;
    return default_branch(cfg.p);
}

// ---------------------------------------------------------------- manifest

// The manifest carries the verbatim config, per-stage wall-clock, summary
// numbers, and a checksum per artifact. Timing and summary entries from
// earlier stages are carried forward so running the pipeline command by
// command builds the same record as one combined run.
struct Manifest {
    std::string config_text;
    std::map<std::string, std::string> timing;
    std::map<std::string, std::string> summary;

    static Manifest load(const std::string& path) {
        Manifest m;
        if (!file_exists(path)) return m;
        std::istringstream in(read_text_file(path));
        std::string line, section;
        while (std::getline(in, line)) {
            if (line == "[timing]" || line == "[summary]" || line == "[files]" ||
                line == "[config]") {
                section = line;
                continue;
            }
            const std::size_t colon = line.find(": ");
            if (colon == std::string::npos) continue;
            const std::string key = line.substr(0, colon);
            const std::string value = line.substr(colon + 2);
            if (section == "[timing]") m.timing[key] = value;
            else if (section == "[summary]") m.summary[key] = value;
        }
        return m;
    }

    void save(const std::string& path, const std::string& out_dir,
              std::uint64_t seed) const {
        std::string text;
        text += "version: " + std::string(kVersion) + "\n";
        text += "seed: " + std::to_string(seed) + "\n";
        text += "[timing]\n";
        for (const auto& [k, v] : timing) text += k + ": " + v + "\n";
        text += "[summary]\n";
        for (const auto& [k, v] : summary) text += k + ": " + v + "\n";
        text += "[files]\n";
        std::vector<std::string> names;
        for (const auto& entry : fs::directory_iterator(out_dir)) {
            const std::string name = entry.path().filename().string();
            if (name != "manifest.txt" && entry.is_regular_file()) names.push_back(name);
        }
        std::sort(names.begin(), names.end());
        for (const std::string& name : names)
            text += name + ": " +
                    checksum_hex(fnv1a64_file(out_dir + "/" + name)) + "\n";
        text += "[config]\n";
        text += config_text;
        write_text_file(path, text);
    }
};

class StageClock {
  public:
    explicit StageClock(Manifest& m, const std::string& stage)
        : manifest_(m), stage_(stage), start_(std::chrono::steady_clock::now()) {}
    ~StageClock() {
        const auto stop = std::chrono::steady_clock::now();
        const double s = std::chrono::duration<double>(stop - start_).count();
        manifest_.timing[stage_ + "_seconds"] = fmt17(s);
    }

  private:
    Manifest& manifest_;
    std::string stage_;
    std::chrono::steady_clock::time_point start_;
};

// ------------------------------------------------------------------ stages

std::string artifact(const RunConfig& cfg, const std::string& name) {
    return cfg.out_dir + "/" + name;
}

void require_artifact(const RunConfig& cfg, const std::string& name,
                      const std::string& producer) {
    if (!file_exists(artifact(cfg, name)))
        throw InputError("missing " + artifact(cfg, name) + "; run the " + producer +
                         " command first");
}

void cmd_solve(const RunConfig& cfg, Manifest& manifest) {
    StageClock clock(manifest, "solve");
    const Integrand F = build_integrand(cfg);
    const Domain domain = build_domain(cfg);
    auto mesh = std::make_shared<const Mesh>(generate_mesh(domain, cfg.h_max, cfg.grading));
    write_mesh(*mesh, artifact(cfg, "mesh.txt"));

    SolveOptions opts = cfg.solve;
    opts.convergence_log_path = artifact(cfg, "convergence.csv");
    const ScalarField u = solve_capacitary(mesh, F, opts);
    write_field(u, artifact(cfg, "field.txt"));

    manifest.summary["mesh_vertices"] = std::to_string(mesh->vertices.size());
    manifest.summary["mesh_triangles"] = std::to_string(mesh->triangles.size());
    manifest.summary["delta_certified"] = fmt17(*F.delta_certified);
    manifest.summary["final_energy"] = fmt17(energy(u, F));
}

struct LoadedRun {
    Integrand F;
    std::shared_ptr<const Mesh> mesh;
    ScalarField u;
};

LoadedRun load_solved(const RunConfig& cfg) {
    require_artifact(cfg, "mesh.txt", "solve");
    require_artifact(cfg, "field.txt", "solve");
    LoadedRun run;
    run.F = build_integrand(cfg);
    run.mesh = std::make_shared<const Mesh>(read_mesh(artifact(cfg, "mesh.txt")));
    run.u = read_field(artifact(cfg, "field.txt"), run.mesh);
    return run;
}

void cmd_measure(const RunConfig& cfg, Manifest& manifest) {
    StageClock clock(manifest, "measure");
    const LoadedRun run = load_solved(cfg);
    const BoundaryMeasure mu = boundary_measure(run.u, run.F);
    write_measure_csv(mu, artifact(cfg, "measure.csv"));
    manifest.summary["total_mass"] = fmt17(mu.total_mass);
    manifest.summary["clamp_total"] = fmt17(mu.clamp_total);
    manifest.summary["measure_arcs"] = std::to_string(mu.arcs.size());
}

// deterministic subsample of arc midpoints, mass-blind, seeded by the run
std::vector<Vec2> pick_centers(const BoundaryMeasure& mu, int count, std::uint64_t seed) {
    std::vector<std::size_t> idx(mu.arcs.size());
    for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = k;
    std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ull + 1);
    for (std::size_t k = idx.size(); k > 1; --k) {
        const std::size_t j = rng() % k;
        std::swap(idx[k - 1], idx[j]);
    }
    const std::size_t n = std::min<std::size_t>(count, idx.size());
    std::vector<Vec2> centers;
    for (std::size_t k = 0; k < n; ++k) centers.push_back(mu.arcs[idx[k]].midpoint);
    return centers;
}

double median_arc_length(const BoundaryMeasure& mu) {
    std::vector<double> lengths;
    for (const MeasureArc& arc : mu.arcs) lengths.push_back(arc.length);
    std::sort(lengths.begin(), lengths.end());
    return lengths[lengths.size() / 2];
}

// Explicit radii are passed through (and validated downstream). Automatic
// grids span [10 x median arc, diameter/10]; when that interval cannot hold
// four halving radii the mesh is too coarse for reliable ball queries and an
// empty grid is returned so the caller can skip the estimate honestly.
std::vector<double> measure_radius_grid(const RunConfig& cfg, const BoundaryMeasure& mu,
                                        const Domain& domain) {
    if (!cfg.radii.empty()) {
        std::vector<double> radii = cfg.radii;
        std::sort(radii.rbegin(), radii.rend());
        return radii;
    }
    const double r_min = 10.0 * median_arc_length(mu);
    const double r_max = domain_diameter(domain) / 10.0;
    if (r_min > r_max / 8.0) return {};
    return geometric_radius_grid(r_min, r_max);
}

void cmd_analyze(const RunConfig& cfg, Manifest& manifest) {
    StageClock clock(manifest, "analyze");
    const LoadedRun run = load_solved(cfg);
    require_artifact(cfg, "measure.csv", "measure");
    const BoundaryMeasure mu = read_measure_csv(artifact(cfg, "measure.csv"));
    const std::uint64_t fsum = field_checksum(run.u);
    if (mu.field_checksum != fsum)
        throw ConsistencyError("measure.csv was extracted from a different field (checksum " +
                               checksum_hex(mu.field_checksum) + ", field is " +
                               checksum_hex(fsum) + ")");

    // moments over the configured level grid, then the growth-constant fit
    const Branch branch = build_branch(cfg);
    const LogDensityField ld = log_density(run.u, run.F, branch);
    const MomentTable moments = moment_table(run.u, run.F, ld, cfg.t_grid, cfg.m_max);
    write_moments_csv(moments, fsum, artifact(cfg, "moments.csv"));
    const MomentFit fit = moment_bound_fit(moments);
    const double c_star =
        cfg.c_star_override > 0.0 ? cfg.c_star_override : std::max(1.0, fit.c_star_hat);
    {
        std::string text;
        text += "c_star_hat: " + fmt17(fit.c_star_hat) + "\n";
        text += "c_star_used: " + fmt17(c_star) + "\n";
        text += "max_violation: " + fmt17(fit.max_violation) + "\n";
        text += "bracket_slope: " + fmt17(fit.bracket_slope) + "\n";
        write_text_file(artifact(cfg, "moment_fit.txt"), text);
    }
    manifest.summary["c_star_hat"] = fmt17(fit.c_star_hat);
    manifest.summary["bracket_slope"] = fmt17(fit.bracket_slope);

    // winding of the gradient phase along every configured level
    {
        std::string text;
        bool all_ok = true;
        for (double t : cfg.t_grid) {
            const LevelCurve curve = extract_level_curve(*run.mesh, run.u.values, t);
            const int w = winding_number(run.u, curve);
            all_ok = all_ok && w == -1;
            text += "t " + fmt17(t) + " components " +
                    std::to_string(curve.components.size()) + " winding " +
                    std::to_string(w) + "\n";
        }
        write_text_file(artifact(cfg, "winding.txt"), text);
        manifest.summary["winding_all_minus_one"] = all_ok ? "yes" : "no";
    }

    // exceptional (gauge-thresholded) flux where the threshold is defined
    {
        const GaugeFunction gauge = make_gauge(cfg.p, cfg.gauge_A.empty() ? 1.0 : cfg.gauge_A[0],
                                               c_star);
        std::string text = "t,threshold,flux,flux_log_sq\n";
        for (double t : cfg.t_grid) {
            if (t >= std::exp(-2.0)) continue;
            const double flux = exceptional_flux(run.u, run.F, ld, t, gauge);
            const double logt = std::log(1.0 / t);
            text += fmt17(t) + "," + fmt17(gauge_exponent(t, c_star)) + "," + fmt17(flux) +
                    "," + fmt17(flux * logt * logt) + "\n";
        }
        write_text_file(artifact(cfg, "exceptional.csv"), text);
    }

    // local and information dimension over a seeded center sample
    const Domain domain = build_domain(cfg);
    const std::vector<double> radii = measure_radius_grid(cfg, mu, domain);
    const GaugeFunction gauge = make_gauge(cfg.p, cfg.gauge_A.empty() ? 1.0 : cfg.gauge_A[0],
                                           c_star);
    if (!radii.empty()) {
        const std::vector<Vec2> centers = pick_centers(mu, cfg.centers, cfg.seed);
        const DimensionReport dim = local_dimension(mu, centers, radii, &gauge);
        write_dimension_report(dim, artifact(cfg, "dimension.txt"));
        write_dimension_centers_csv(dim, artifact(cfg, "dimension_centers.csv"));
        manifest.summary["local_dimension"] = fmt17(dim.local_dimension);
        manifest.summary["information_dimension"] = fmt17(dim.information_dimension);
    } else {
        write_text_file(artifact(cfg, "dimension.txt"),
                        "note: skipped; boundary arcs too coarse to hold four halving "
                        "radii between 10 x median arc and diameter/10\n");
        manifest.summary["local_dimension"] = "skipped (arcs too coarse)";
        manifest.summary["information_dimension"] = "skipped (arcs too coarse)";
    }

    // gauge-comparison trends per configured amplitude, on radii inside the
    // gauge window; skipped honestly when the mesh is too coarse for any
    const double median = median_arc_length(mu);
    const std::vector<double> gauge_radii =
        10.0 * median < kGaugeGridMax
            ? geometric_radius_grid(10.0 * median, kGaugeGridMax)
            : std::vector<double>{};
    {
        std::string text = "A,sign,c_star,fraction_increasing,fraction_decreasing,"
                           "fraction_flat,mean_ratio\n";
        if (gauge_radii.size() >= 2) {
            for (double A : cfg.gauge_A) {
                const GaugeFunction g = make_gauge(cfg.p, A, c_star);
                const GaugeTrendReport trend = gauge_comparison(mu, g, gauge_radii);
                text += fmt17(A) + "," + std::to_string(g.sign) + "," + fmt17(g.c_star) +
                        "," + fmt17(trend.fraction_increasing) + "," +
                        fmt17(trend.fraction_decreasing) + "," + fmt17(trend.fraction_flat) +
                        "," + fmt17(trend.mean_ratio) + "\n";
            }
            manifest.summary["gauge_trend"] = "computed";
        } else {
            text += "# skipped: boundary arcs too coarse for radii below e^-2\n";
            manifest.summary["gauge_trend"] = "skipped (arcs too coarse)";
        }
        write_text_file(artifact(cfg, "gauge_trends.csv"), text);
    }
}

void cmd_report(const RunConfig& cfg) {
    require_artifact(cfg, "manifest.txt", "solve");
    const Manifest m = Manifest::load(artifact(cfg, "manifest.txt"));
    std::string out = "run report for " + cfg.out_dir + "\n";
    for (const auto& [k, v] : m.summary) out += "  " + k + ": " + v + "\n";
    for (const auto& [k, v] : m.timing) out += "  " + k + ": " + v + "\n";
    if (file_exists(artifact(cfg, "moments.csv"))) {
        const MomentTable table = read_moments_csv(artifact(cfg, "moments.csv"));
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (const MomentRow& row : table.rows)
            if (row.m == 0) {
                lo = std::min(lo, std::exp(row.log_value));
                hi = std::max(hi, std::exp(row.log_value));
            }
        if (hi > 0.0)
            out += "  base_flux_range: [" + fmt17(lo) + ", " + fmt17(hi) + "]\n";
    }
    std::fputs(out.c_str(), stdout);
}

int run(int argc, char** argv) {
    CLI::App app{"capacitary measure laboratory"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string config_path, out_override;
    std::int64_t seed_override = -1;
    double stage_tol_override = 0.0;
    app.add_option("--config", config_path, "experiment configuration file")->required();
    app.add_option("--out", out_override, "override the configured output directory");
    app.add_option("--seed", seed_override, "override the configured seed");
    app.add_option("--stage-tolerance", stage_tol_override,
                   "override the continuation stage tolerance");
    CLI::App* c_solve = app.add_subcommand("solve", "mesh the domain and solve the field");
    CLI::App* c_measure = app.add_subcommand("measure", "extract the boundary measure");
    CLI::App* c_analyze = app.add_subcommand("analyze", "moments, windings, dimensions");
    CLI::App* c_report = app.add_subcommand("report", "print the run summary");
    CLI::App* c_all = app.add_subcommand("all", "full pipeline");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    RunConfig cfg = parse_config(config_path);
    if (!out_override.empty()) cfg.out_dir = out_override;
    if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);
    if (stage_tol_override > 0.0) cfg.solve.stage_tolerance = stage_tol_override;
    fs::create_directories(cfg.out_dir);

    Manifest manifest = Manifest::load(artifact(cfg, "manifest.txt"));
    manifest.config_text = cfg.text;

    const bool all = c_all->parsed();
    if (all || c_solve->parsed()) cmd_solve(cfg, manifest);
    if (all || c_measure->parsed()) cmd_measure(cfg, manifest);
    if (all || c_analyze->parsed()) cmd_analyze(cfg, manifest);
    if (all || c_solve->parsed() || c_measure->parsed() || c_analyze->parsed())
        manifest.save(artifact(cfg, "manifest.txt"), cfg.out_dir, cfg.seed);
    if (all || c_report->parsed()) cmd_report(cfg);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const InputError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 2;
    } catch (const ConsistencyError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 4;
    } catch (const NumericalError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}
