#include "fharm/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <unordered_map>

#include "fharm/errors.hpp"
#include "fharm/io_util.hpp"

namespace fharm {

namespace {

// Orders the outer boundary edges into one CCW vertex cycle. The mesher
// emits them unordered, so walk the (undirected) edge graph and fix the
// orientation by the signed area of the resulting loop.
std::vector<int> outer_vertex_cycle(const Mesh& mesh) {
    std::unordered_map<int, std::array<int, 2>> nbr;
    for (const BoundaryEdge& e : mesh.boundary_edges) {
        if (e.tag != kOuterBoundary) continue;
        for (int pass = 0; pass < 2; ++pass) {
            const int v = pass == 0 ? e.a : e.b;
            const int w = pass == 0 ? e.b : e.a;
            auto [it, fresh] = nbr.try_emplace(v, std::array<int, 2>{-1, -1});
            auto& slots = it->second;
            if (slots[0] < 0)
                slots[0] = w;
            else if (slots[1] < 0)
                slots[1] = w;
            else
                throw NumericalError("outer boundary vertex with more than two arcs");
        }
    }
    if (nbr.empty()) throw InputError("mesh has no outer boundary arcs");

    int start = std::numeric_limits<int>::max();
    for (const auto& [v, slots] : nbr) {
        if (slots[1] < 0) throw NumericalError("outer boundary is not a closed cycle");
        start = std::min(start, v);
    }

    std::vector<int> cycle;
    cycle.reserve(nbr.size());
    int prev = -1, cur = start;
    do {
        cycle.push_back(cur);
        const auto& slots = nbr.at(cur);
        int next = slots[0] == prev ? slots[1] : slots[0];
        // deterministic first step: pick the smaller-id neighbor
        if (prev < 0) next = std::min(slots[0], slots[1]);
        prev = cur;
        cur = next;
    } while (cur != start && cycle.size() <= nbr.size());
    if (cur != start || cycle.size() != nbr.size())
        throw NumericalError("outer boundary walk did not close into a single cycle");

    double area2 = 0.0;
    for (std::size_t i = 0; i < cycle.size(); ++i) {
        const Vec2 a = mesh.vertices[cycle[i]];
        const Vec2 b = mesh.vertices[cycle[(i + 1) % cycle.size()]];
        area2 += cross(a, b);
    }
    if (area2 < 0.0) {
        std::reverse(cycle.begin(), cycle.end());
        std::rotate(cycle.begin(), std::find(cycle.begin(), cycle.end(), start), cycle.end());
    }
    return cycle;
}

std::vector<MeasureArc> boundary_arcs(const Mesh& mesh) {
    const std::vector<int> cycle = outer_vertex_cycle(mesh);
    std::vector<MeasureArc> arcs(cycle.size());
    for (std::size_t i = 0; i < cycle.size(); ++i) {
        MeasureArc& arc = arcs[i];
        arc.va = cycle[i];
        arc.vb = cycle[(i + 1) % cycle.size()];
        const Vec2 a = mesh.vertices[arc.va], b = mesh.vertices[arc.vb];
        arc.midpoint = 0.5 * (a + b);
        arc.length = dist(a, b);
    }
    return arcs;
}

void clamp_weights(BoundaryMeasure& mu) {
    mu.min_raw_weight = 0.0;
    mu.clamp_total = 0.0;
    mu.total_mass = 0.0;
    for (MeasureArc& arc : mu.arcs) {
        mu.min_raw_weight = std::min(mu.min_raw_weight, arc.weight);
        if (arc.weight < 0.0) {
            mu.clamp_total -= arc.weight;
            arc.weight = 0.0;
        }
        mu.total_mass += arc.weight;
    }
}

void require_solved_field(const ScalarField& u) {
    if (!u.mesh) throw InputError("field has no mesh");
    if (u.values.size() != u.mesh->vertices.size())
        throw InputError("field length does not match its mesh");
}

} // namespace

std::uint64_t field_checksum(const ScalarField& u) {
    require_solved_field(u);
    std::string text = "field " + std::to_string(u.values.size()) + " mesh " +
                       checksum_hex(mesh_checksum(*u.mesh)) + "\n";
    text.reserve(text.size() + u.values.size() * 24);
    for (double v : u.values) text += fmt17(v) + "\n";
    return fnv1a64(text.data(), text.size());
}

BoundaryMeasure boundary_measure(const ScalarField& u, const Integrand& F) {
    require_solved_field(u);
    const Mesh& mesh = *u.mesh;

    // hat-function test of the weak form at every outer-boundary vertex
    std::vector<double> vertex_weight(mesh.vertices.size(), 0.0);
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        bool touches_outer = false;
        for (int k = 0; k < 3; ++k) touches_outer |= mesh.vertex_tag[tri[k]] == kOuterBoundary;
        if (!touches_outer) continue;

        const Vec2 a = mesh.vertices[tri[0]];
        const Vec2 b = mesh.vertices[tri[1]];
        const Vec2 c = mesh.vertices[tri[2]];
        const double twoA = cross(b - a, c - a);
        auto rot90 = [](Vec2 v) { return Vec2{-v.y, v.x}; };
        const std::array<Vec2, 3> phi = {rot90(c - b) / twoA, rot90(a - c) / twoA,
                                         rot90(b - a) / twoA};
        const Vec2 g = u.values[tri[0]] * phi[0] + u.values[tri[1]] * phi[1] +
                       u.values[tri[2]] * phi[2];
        // A triangle whose vertices all sit on the outer boundary carries a
        // vanishing field gradient; the integrand gradient extends by zero
        // there for every degree above one, so the flux contribution is zero,
        // and the plain evaluator must not be asked for derivatives at the
        // cone point.
        if (norm2(g) == 0.0) continue;
        const Vec2 flux = regularized_values(F, F.epsilon, g).grad;
        const double area = 0.5 * twoA;
        for (int k = 0; k < 3; ++k)
            if (mesh.vertex_tag[tri[k]] == kOuterBoundary)
                vertex_weight[tri[k]] -= area * dot(flux, phi[k]);
    }

    // The hat test measures the flux of the gradient map, whose density along a
    // level set is p·f(∇u)/|∇u| because homogeneity gives <∇f(η),η> = p·f(η).
    // Divide by p so the arc density is f(∇u)/|∇u|, the same normalization the
    // level-limit extraction and the radial flux oracles use.
    for (double& w : vertex_weight) w /= F.p;

    BoundaryMeasure mu;
    mu.arcs = boundary_arcs(mesh);

    // Split each vertex weight onto its two arcs in proportion to arc length.
    // An even split would smear mass wherever adjacent arcs differ in length
    // (graded meshes, corners); the proportional split keeps a uniform flux
    // uniform in density while still handing out each vertex weight exactly.
    std::vector<double> adjacent_length(mesh.vertices.size(), 0.0);
    for (const MeasureArc& arc : mu.arcs) {
        adjacent_length[arc.va] += arc.length;
        adjacent_length[arc.vb] += arc.length;
    }
    for (MeasureArc& arc : mu.arcs)
        arc.weight = vertex_weight[arc.va] * (arc.length / adjacent_length[arc.va]) +
                     vertex_weight[arc.vb] * (arc.length / adjacent_length[arc.vb]);
    clamp_weights(mu);
    mu.method = "weak-identity";
    mu.field_checksum = field_checksum(u);

    if (mu.total_mass <= 0.0)
        throw NumericalError("boundary measure extraction produced no mass");
    if (mu.clamp_total > 0.01 * mu.total_mass)
        throw NumericalError("boundary measure extraction clamped " + fmt17(mu.clamp_total) +
                             " of mass " + fmt17(mu.total_mass) +
                             "; the field looks under-resolved");
    return mu;
}

double level_flux(const ScalarField& u, const Integrand& F, double t, LevelFluxInfo* info) {
    require_solved_field(u);
    const LevelCurve curve = extract_level_curve(*u.mesh, u.values, t);
    const std::vector<Vec2> grads = gradient_field(u);

    double flux = 0.0, dropped = 0.0, total_len = 0.0;
    for (const LevelComponent& comp : curve.components) {
        const std::size_t n = comp.points.size();
        for (std::size_t j = 0; j < n; ++j) {
            const Vec2 a = comp.points[j];
            const Vec2 b = comp.points[(j + 1) % n];
            const double len = dist(a, b);
            total_len += len;
            const Vec2 g = grads[comp.seg_triangle[j]];
            const double gn = norm(g);
            if (gn < 1e-14) {
                dropped += len;
                continue;
            }
            flux += regularized_value(F, F.epsilon, g) / gn * len;
        }
    }
    if (info) {
        info->dropped_length = dropped;
        info->curve_length = total_len;
    }
    return flux;
}

BoundaryMeasure measure_via_level_limit(const ScalarField& u, const Integrand& F, double t) {
    require_solved_field(u);
    if (t <= 0.0 || t >= 1.0) throw InputError("level-limit extraction needs t in (0,1)");
    BoundaryMeasure mu;
    mu.arcs = boundary_arcs(*u.mesh);
    const LevelCurve curve = extract_level_curve(*u.mesh, u.values, t);
    const std::vector<Vec2> grads = gradient_field(u);

    // push each segment's flux onto the nearest arc midpoint
    for (const LevelComponent& comp : curve.components) {
        const std::size_t n = comp.points.size();
        for (std::size_t j = 0; j < n; ++j) {
            const Vec2 a = comp.points[j];
            const Vec2 b = comp.points[(j + 1) % n];
            const double len = dist(a, b);
            const Vec2 g = grads[comp.seg_triangle[j]];
            const double gn = norm(g);
            if (gn < 1e-14) continue;
            const double seg_flux = regularized_value(F, F.epsilon, g) / gn * len;
            const Vec2 mid = 0.5 * (a + b);
            std::size_t best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (std::size_t k = 0; k < mu.arcs.size(); ++k) {
                const double d = dist(mid, mu.arcs[k].midpoint);
                if (d < best_d) {
                    best_d = d;
                    best = k;
                }
            }
            mu.arcs[best].weight += seg_flux;
        }
    }
    clamp_weights(mu);
    mu.method = "level-limit";
    mu.field_checksum = field_checksum(u);
    if (mu.total_mass <= 0.0)
        throw NumericalError("level-limit extraction produced no mass");
    return mu;
}

double measure_ball(const BoundaryMeasure& mu, Vec2 w, double r) {
    if (r <= 0.0) throw InputError("measure_ball needs a positive radius");
    double mass = 0.0;
    for (const MeasureArc& arc : mu.arcs)
        if (dist(arc.midpoint, w) <= r) mass += arc.weight;
    return mass;
}

ComparabilityReport check_measure_solution_comparability(const ScalarField& u,
                                                         const BoundaryMeasure& mu, Vec2 w,
                                                         double r, double p) {
    require_solved_field(u);
    if (r <= 0.0) throw InputError("comparability check needs a positive radius");
    ComparabilityReport rep;
    rep.w = w;
    rep.r = r;

    double umax = -1.0;
    for (std::size_t v = 0; v < u.values.size(); ++v)
        if (dist(u.mesh->vertices[v], w) <= r) umax = std::max(umax, u.values[v]);
    if (umax < 0.0) {
        rep.degenerate = true;
        rep.note = "no mesh nodes inside the ball";
        return rep;
    }
    rep.sup_u_pm1 = std::pow(std::max(umax, 0.0), p - 1.0);
    rep.mass_half = measure_ball(mu, w, 0.5 * r);
    rep.mass_double = measure_ball(mu, w, 2.0 * r);
    if (rep.mass_double <= 0.0) {
        rep.degenerate = true;
        rep.note = "no mass in the doubled ball";
        return rep;
    }
    const double scale = std::pow(r, p - 2.0);
    rep.ratio_upper = rep.sup_u_pm1 / (scale * rep.mass_double);
    rep.ratio_lower = rep.mass_half > 0.0
                          ? rep.sup_u_pm1 / (scale * rep.mass_half)
                          : std::numeric_limits<double>::infinity();
    return rep;
}

void write_measure_csv(const BoundaryMeasure& mu, const std::string& path) {
    std::string out = "# total_mass " + fmt17(mu.total_mass) + " field " +
                      checksum_hex(mu.field_checksum) + " method " + mu.method + "\n";
    out += "arc_index,midpoint_x,midpoint_y,arc_length,weight\n";
    for (std::size_t k = 0; k < mu.arcs.size(); ++k) {
        const MeasureArc& arc = mu.arcs[k];
        out += std::to_string(k) + "," + fmt17(arc.midpoint.x) + "," + fmt17(arc.midpoint.y) +
               "," + fmt17(arc.length) + "," + fmt17(arc.weight) + "\n";
    }
    write_text_file(path, out);
}

BoundaryMeasure read_measure_csv(const std::string& path) {
    std::istringstream in(read_text_file(path));
    std::string line;
    if (!std::getline(in, line)) throw InputError("empty measure file: " + path);
    std::istringstream hs(line);
    std::string hash, key, hex;
    BoundaryMeasure mu;
    double stated_mass = 0.0;
    if (!(hs >> hash >> key >> stated_mass) || hash != "#" || key != "total_mass")
        throw InputError("malformed measure header: " + path);
    if (!(hs >> key >> hex) || key != "field")
        throw InputError("malformed measure header: " + path);
    mu.field_checksum = std::stoull(hex, nullptr, 16);
    if (!(hs >> key >> mu.method) || key != "method")
        throw InputError("malformed measure header: " + path);
    if (!std::getline(in, line) || line != "arc_index,midpoint_x,midpoint_y,arc_length,weight")
        throw InputError("malformed measure column header: " + path);

    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string tok;
        std::vector<double> cols;
        while (std::getline(ls, tok, ',')) cols.push_back(std::stod(tok));
        if (cols.size() != 5) throw InputError("malformed measure row: " + line);
        MeasureArc arc;
        arc.midpoint = {cols[1], cols[2]};
        arc.length = cols[3];
        arc.weight = cols[4];
        if (arc.weight < 0.0) throw InputError("negative stored arc weight: " + line);
        mu.arcs.push_back(arc);
        mu.total_mass += arc.weight;
    }
    if (mu.arcs.empty()) throw InputError("measure file has no arcs: " + path);
    if (std::fabs(mu.total_mass - stated_mass) > 1e-9 * std::max(1.0, stated_mass))
        throw ConsistencyError("measure file mass does not match its rows: " + path);
    return mu;
}

} // namespace fharm
