#include "fharm/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>
#include <unordered_map>

#include "fharm/errors.hpp"
#include "fharm/io_util.hpp"

namespace fharm {

namespace {

constexpr double kPi = 3.14159265358979323846;

bool finite_vec(Vec2 v) { return std::isfinite(v.x) && std::isfinite(v.y); }

// Orientation of the triple (a, b, c): positive for counterclockwise.
double orient(Vec2 a, Vec2 b, Vec2 c) {
    return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

bool on_segment(Vec2 a, Vec2 b, Vec2 p) {
    return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) &&
           std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y);
}

// True when segments [a,b] and [c,d] share any point, endpoints included.
bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
    const double o1 = orient(a, b, c);
    const double o2 = orient(a, b, d);
    const double o3 = orient(c, d, a);
    const double o4 = orient(c, d, b);
    if (((o1 > 0) != (o2 > 0)) && ((o3 > 0) != (o4 > 0)) && o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0)
        return true;
    if (o1 == 0 && on_segment(a, b, c)) return true;
    if (o2 == 0 && on_segment(a, b, d)) return true;
    if (o3 == 0 && on_segment(c, d, a)) return true;
    if (o4 == 0 && on_segment(c, d, b)) return true;
    return false;
}

void require_simple_polygon(const std::vector<Vec2>& poly) {
    const int n = static_cast<int>(poly.size());
    if (n < 3) throw InputError("outer polyline needs at least 3 vertices");
    for (const Vec2& v : poly)
        if (!finite_vec(v)) throw InputError("outer polyline has a non-finite vertex");
    for (int i = 0; i < n; ++i) {
        const Vec2 a = poly[i], b = poly[(i + 1) % n];
        if (dist(a, b) == 0.0) throw InputError("outer polyline has a zero-length edge");
        for (int j = i + 1; j < n; ++j) {
            // Skip the pair (i, j) when the segments are adjacent in the cycle.
            if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
            const Vec2 c = poly[j], d = poly[(j + 1) % n];
            if (segments_intersect(a, b, c, d))
                throw InputError("outer polyline intersects itself");
        }
    }
}

std::vector<Vec2> circle_polyline(Vec2 center, double radius, int n) {
    std::vector<Vec2> pts(n);
    for (int k = 0; k < n; ++k) {
        const double th = 2.0 * kPi * k / n;
        pts[k] = {center.x + radius * std::cos(th), center.y + radius * std::sin(th)};
    }
    return pts;
}

// One Koch subdivision step: each edge gains an outward equilateral bump.
// For a counterclockwise polygon the outward apex of the middle third [a,b]
// is a + R(-60 deg)(b - a).
std::vector<Vec2> koch_subdivide(const std::vector<Vec2>& poly) {
    const double c = 0.5, s = std::sqrt(3.0) / 2.0;
    std::vector<Vec2> out;
    out.reserve(poly.size() * 4);
    const int n = static_cast<int>(poly.size());
    for (int i = 0; i < n; ++i) {
        const Vec2 p = poly[i], q = poly[(i + 1) % n];
        const Vec2 a = p + (q - p) / 3.0;
        const Vec2 b = p + (q - p) * (2.0 / 3.0);
        const Vec2 d = b - a;
        const Vec2 apex = {a.x + c * d.x + s * d.y, a.y - s * d.x + c * d.y};
        out.push_back(p);
        out.push_back(a);
        out.push_back(apex);
        out.push_back(b);
    }
    return out;
}

}  // namespace

double polygon_signed_area(const std::vector<Vec2>& poly) {
    double twice = 0.0;
    const int n = static_cast<int>(poly.size());
    for (int i = 0; i < n; ++i) {
        const Vec2 a = poly[i], b = poly[(i + 1) % n];
        twice += a.x * b.y - b.x * a.y;
    }
    return 0.5 * twice;
}

bool point_in_polygon(const std::vector<Vec2>& poly, Vec2 z) {
    // Winding number; nonzero means inside.
    int winding = 0;
    const int n = static_cast<int>(poly.size());
    for (int i = 0; i < n; ++i) {
        const Vec2 a = poly[i], b = poly[(i + 1) % n];
        if (a.y <= z.y) {
            if (b.y > z.y && orient(a, b, z) > 0) ++winding;
        } else {
            if (b.y <= z.y && orient(a, b, z) < 0) --winding;
        }
    }
    return winding != 0;
}

double distance_to_polyline(const std::vector<Vec2>& poly, Vec2 z) {
    double best = std::numeric_limits<double>::infinity();
    const int n = static_cast<int>(poly.size());
    for (int i = 0; i < n; ++i) {
        const Vec2 a = poly[i], b = poly[(i + 1) % n];
        const Vec2 ab = b - a;
        const double len2 = norm2(ab);
        double t = len2 > 0.0 ? dot(z - a, ab) / len2 : 0.0;
        t = std::clamp(t, 0.0, 1.0);
        best = std::min(best, dist(z, a + ab * t));
    }
    return best;
}

Domain normalize_domain(const Domain& raw, Vec2 z0) {
    if (!finite_vec(z0)) throw InputError("normalization center must be finite");
    const bool inside = raw.outer_is_circle
                            ? dist(z0, raw.outer_circle_center) < raw.outer_circle_radius
                            : point_in_polygon(raw.outer, z0);
    if (!inside)
        throw InputError("normalization center must lie strictly inside the outer boundary");
    const double d = distance_to_outer(raw, z0);
    if (!(d > 0.0))
        throw InputError("normalization center must keep a positive distance to the outer boundary");
    const double scale = 4.0 / d;

    Domain out;
    out.kind = raw.kind;
    out.koch_level = raw.koch_level;
    out.outer.reserve(raw.outer.size());
    for (const Vec2& v : raw.outer) out.outer.push_back((v - z0) * scale);
    out.inner_center = {0.0, 0.0};
    out.inner_radius = 1.0;
    if (raw.outer_is_circle) {
        out.outer_is_circle = true;
        out.outer_circle_center = (raw.outer_circle_center - z0) * scale;
        out.outer_circle_radius = raw.outer_circle_radius * scale;
    }
    // Compose with the record already attached to the raw domain, so the
    // result always maps original coordinates to normalized ones.
    const NormalizationRecord& r = raw.normalization;
    out.normalization.shift = r.shift + z0 / r.scale;
    out.normalization.scale = r.scale * scale;
    return out;
}

Domain make_domain_disk(double raw_radius) {
    if (!(raw_radius > 1.0) || !std::isfinite(raw_radius))
        throw InputError("disk domain needs a finite radius greater than 1");
    // The capacitary ring 1 < |z| < 5: unit inner disk, outer circle four
    // units away from it. The raw radius only enters the scaling record.
    Domain d;
    d.kind = DomainKind::Disk;
    d.outer = circle_polyline({0.0, 0.0}, 5.0, 256);
    d.outer_is_circle = true;
    d.outer_circle_center = {0.0, 0.0};
    d.outer_circle_radius = 5.0;
    d.inner_center = {0.0, 0.0};
    d.inner_radius = 1.0;
    d.normalization.shift = {0.0, 0.0};
    d.normalization.scale = 5.0 / raw_radius;
    return d;
}

Domain make_domain_square(double raw_half_side) {
    if (!(raw_half_side > 0.0) || !std::isfinite(raw_half_side))
        throw InputError("square domain needs a positive half-side");
    const double h = raw_half_side;
    Domain raw;
    raw.kind = DomainKind::Square;
    raw.outer = {{h, h}, {-h, h}, {-h, -h}, {h, -h}};
    raw.inner_radius = h / 4.0;
    return normalize_domain(raw, {0.0, 0.0});
}

Domain make_domain_koch(int level, double base_size) {
    if (level < 0 || level > 5)
        throw InputError("koch prefractal level must be between 0 and 5");
    if (!(base_size > 0.0) || !std::isfinite(base_size))
        throw InputError("koch prefractal needs a positive base size");
    // Equilateral triangle with centroid at the origin, counterclockwise.
    const double rc = base_size / std::sqrt(3.0);
    std::vector<Vec2> poly;
    for (double deg : {90.0, 210.0, 330.0}) {
        const double th = deg * kPi / 180.0;
        poly.push_back({rc * std::cos(th), rc * std::sin(th)});
    }
    for (int l = 0; l < level; ++l) poly = koch_subdivide(poly);

    Domain raw;
    raw.kind = DomainKind::Koch;
    raw.koch_level = level;
    raw.outer = std::move(poly);
    raw.inner_radius = base_size / 16.0;
    return normalize_domain(raw, {0.0, 0.0});
}

Domain make_domain_custom(const std::vector<Vec2>& outer, Vec2 z0) {
    require_simple_polygon(outer);
    Domain raw;
    raw.kind = DomainKind::Custom;
    raw.outer = outer;
    if (polygon_signed_area(raw.outer) < 0.0)
        std::reverse(raw.outer.begin(), raw.outer.end());
    return normalize_domain(raw, z0);
}

Domain dilate_domain(const Domain& d, double s) {
    if (!(s > 0.0) || !std::isfinite(s)) throw InputError("dilation factor must be positive");
    Domain out = d;
    for (Vec2& v : out.outer) v = v * s;
    out.inner_center = d.inner_center * s;
    out.inner_radius = d.inner_radius * s;
    if (d.outer_is_circle) {
        out.outer_circle_center = d.outer_circle_center * s;
        out.outer_circle_radius = d.outer_circle_radius * s;
    }
    out.normalization.scale = d.normalization.scale * s;
    return out;
}

bool domain_contains(const Domain& d, Vec2 z) {
    if (dist(z, d.inner_center) <= d.inner_radius) return false;
    if (d.outer_is_circle) return dist(z, d.outer_circle_center) < d.outer_circle_radius;
    return point_in_polygon(d.outer, z);
}

double distance_to_outer(const Domain& d, Vec2 z) {
    if (d.outer_is_circle) return std::fabs(d.outer_circle_radius - dist(z, d.outer_circle_center));
    return distance_to_polyline(d.outer, z);
}

double outer_length(const Domain& d) {
    if (d.outer_is_circle) return 2.0 * kPi * d.outer_circle_radius;
    double len = 0.0;
    const int n = static_cast<int>(d.outer.size());
    for (int i = 0; i < n; ++i) len += dist(d.outer[i], d.outer[(i + 1) % n]);
    return len;
}

double domain_diameter(const Domain& d) {
    if (d.outer_is_circle) return 2.0 * d.outer_circle_radius;
    double xlo = 1e300, xhi = -1e300, ylo = 1e300, yhi = -1e300;
    for (const Vec2& v : d.outer) {
        xlo = std::min(xlo, v.x);
        xhi = std::max(xhi, v.x);
        ylo = std::min(ylo, v.y);
        yhi = std::max(yhi, v.y);
    }
    return std::hypot(xhi - xlo, yhi - ylo);
}

// --- Mesh helpers -------------------------------------------------------------

double triangle_area(const Mesh& mesh, int tri) {
    const auto& t = mesh.triangles[tri];
    return 0.5 * orient(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]);
}

std::vector<std::array<int, 3>> triangle_adjacency(const Mesh& mesh) {
    std::vector<std::array<int, 3>> adj(mesh.triangles.size(), {-1, -1, -1});
    std::unordered_map<std::uint64_t, std::pair<int, int>> open;
    open.reserve(mesh.triangles.size() * 2);
    for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
        for (int k = 0; k < 3; ++k) {
            const int a = mesh.triangles[t][(k + 1) % 3];
            const int b = mesh.triangles[t][(k + 2) % 3];
            const std::uint64_t key =
                (static_cast<std::uint64_t>(std::min(a, b)) << 32) | static_cast<std::uint32_t>(std::max(a, b));
            auto it = open.find(key);
            if (it == open.end()) {
                open.emplace(key, std::make_pair(t, k));
            } else {
                adj[t][k] = it->second.first;
                adj[it->second.first][it->second.second] = t;
                open.erase(it);
            }
        }
    }
    return adj;
}

Vec2 triangle_gradient(const Mesh& mesh, int tri, const std::vector<double>& u) {
    const auto& t = mesh.triangles[tri];
    const Vec2 a = mesh.vertices[t[0]], b = mesh.vertices[t[1]], c = mesh.vertices[t[2]];
    const double inv2A = 1.0 / orient(a, b, c);
    // Gradient of the linear interpolant: each basis gradient is the opposite
    // edge rotated a quarter turn, divided by twice the area.
    auto rot90 = [](Vec2 v) { return Vec2{-v.y, v.x}; };
    const Vec2 g = rot90(c - b) * u[t[0]] + rot90(a - c) * u[t[1]] + rot90(b - a) * u[t[2]];
    return g * inv2A;
}

std::vector<Vec2> all_triangle_gradients(const Mesh& mesh, const std::vector<double>& u) {
    std::vector<Vec2> g(mesh.triangles.size());
    for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t)
        g[t] = triangle_gradient(mesh, t, u);
    return g;
}

double mesh_min_angle_degrees(const Mesh& mesh) {
    double worst = 180.0;
    for (const auto& t : mesh.triangles) {
        const Vec2 p[3] = {mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]};
        for (int k = 0; k < 3; ++k) {
            const Vec2 u = p[(k + 1) % 3] - p[k];
            const Vec2 v = p[(k + 2) % 3] - p[k];
            const double ang = std::atan2(std::fabs(cross(u, v)), dot(u, v));
            worst = std::min(worst, ang * 180.0 / kPi);
        }
    }
    return worst;
}

std::string mesh_to_text(const Mesh& mesh) {
    std::string out;
    out.reserve(mesh.vertices.size() * 48 + mesh.triangles.size() * 24);
    out += "nodes " + std::to_string(mesh.vertices.size()) + " triangles " +
           std::to_string(mesh.triangles.size()) + "\n";
    for (const Vec2& v : mesh.vertices) out += fmt17(v.x) + " " + fmt17(v.y) + "\n";
    for (const auto& t : mesh.triangles)
        out += std::to_string(t[0]) + " " + std::to_string(t[1]) + " " + std::to_string(t[2]) + "\n";
    out += "boundary " + std::to_string(mesh.boundary_edges.size()) + "\n";
    for (const BoundaryEdge& e : mesh.boundary_edges)
        out += std::to_string(e.a) + " " + std::to_string(e.b) + " " +
               (e.tag == kInnerBoundary ? "inner" : "outer") + "\n";
    return out;
}

std::uint64_t mesh_checksum(const Mesh& mesh) {
    const std::string text = mesh_to_text(mesh);
    return fnv1a64(text.data(), text.size());
}

void write_mesh(const Mesh& mesh, const std::string& path) {
    write_text_file(path, mesh_to_text(mesh));
}

namespace {

void derive_vertex_tags(Mesh& mesh) {
    mesh.vertex_tag.assign(mesh.vertices.size(), -1);
    for (const BoundaryEdge& e : mesh.boundary_edges) {
        mesh.vertex_tag[e.a] = e.tag;
        mesh.vertex_tag[e.b] = e.tag;
    }
}

}  // namespace

Mesh read_mesh(const std::string& path) {
    std::istringstream in(read_text_file(path));
    std::string word;
    std::size_t n = 0, m = 0, k = 0;
    if (!(in >> word >> n) || word != "nodes") throw InputError("mesh file: bad header in " + path);
    if (!(in >> word >> m) || word != "triangles") throw InputError("mesh file: bad header in " + path);
    Mesh mesh;
    mesh.vertices.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        if (!(in >> mesh.vertices[i].x >> mesh.vertices[i].y))
            throw InputError("mesh file: truncated vertex list in " + path);
    mesh.triangles.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        auto& t = mesh.triangles[i];
        if (!(in >> t[0] >> t[1] >> t[2]))
            throw InputError("mesh file: truncated triangle list in " + path);
        for (int v : t)
            if (v < 0 || static_cast<std::size_t>(v) >= n)
                throw InputError("mesh file: triangle vertex out of range in " + path);
    }
    if (!(in >> word >> k) || word != "boundary")
        throw InputError("mesh file: missing boundary section in " + path);
    mesh.boundary_edges.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
        BoundaryEdge& e = mesh.boundary_edges[i];
        std::string tag;
        if (!(in >> e.a >> e.b >> tag))
            throw InputError("mesh file: truncated boundary list in " + path);
        if (tag == "outer")
            e.tag = kOuterBoundary;
        else if (tag == "inner")
            e.tag = kInnerBoundary;
        else
            throw InputError("mesh file: unknown boundary tag '" + tag + "' in " + path);
        if (e.a < 0 || e.b < 0 || static_cast<std::size_t>(e.a) >= n || static_cast<std::size_t>(e.b) >= n)
            throw InputError("mesh file: boundary vertex out of range in " + path);
    }
    derive_vertex_tags(mesh);
    return mesh;
}

// --- Level curves -------------------------------------------------------------

namespace {

// Crossing point of the linear field with level t on the edge (a, b).
Vec2 edge_crossing(Vec2 pa, Vec2 pb, double ua, double ub, double t) {
    const double s = (t - ua) / (ub - ua);
    return pa + (pb - pa) * s;
}

struct Chain {
    std::vector<Vec2> pts;
    std::vector<Vec2> grads;
    std::vector<int> segs;
};

void rotate_to_min_point(LevelComponent& c) {
    const int n = static_cast<int>(c.points.size());
    int best = 0;
    for (int i = 1; i < n; ++i) {
        const Vec2 &p = c.points[i], &q = c.points[best];
        if (p.x < q.x || (p.x == q.x && p.y < q.y)) best = i;
    }
    std::rotate(c.points.begin(), c.points.begin() + best, c.points.end());
    std::rotate(c.vertex_grad.begin(), c.vertex_grad.begin() + best, c.vertex_grad.end());
    std::rotate(c.seg_triangle.begin(), c.seg_triangle.begin() + best, c.seg_triangle.end());
}

void reverse_component(LevelComponent& c) {
    const int n = static_cast<int>(c.points.size());
    std::reverse(c.points.begin(), c.points.end());
    std::reverse(c.vertex_grad.begin(), c.vertex_grad.end());
    // Segment j of the reversed polyline retraces original segment n-2-j
    // (indices mod n); remap the attached triangle indices accordingly.
    std::vector<int> segs(n);
    for (int j = 0; j < n; ++j) segs[j] = c.seg_triangle[((n - 2 - j) % n + n) % n];
    c.seg_triangle = std::move(segs);
}

}  // namespace

LevelCurve extract_level_curve(const Mesh& mesh, const std::vector<double>& u, double t) {
    if (u.size() != mesh.vertices.size())
        throw InputError("level curve: field size does not match the mesh");
    double lo = 1e300, hi = -1e300;
    for (double v : u) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (!(t > lo && t < hi))
        throw InputError("level curve: level must lie strictly between the field extremes");

    // Deterministic tie-break: nudge the level off nodal values.
    for (int guard = 0; guard < 64; ++guard) {
        bool clean = true;
        for (double v : u)
            if (std::fabs(v - t) < 1e-12) {
                clean = false;
                break;
            }
        if (clean) break;
        t += 1e-12;
    }

    const auto adj = triangle_adjacency(mesh);
    const auto grads = all_triangle_gradients(mesh, u);
    const int nt = static_cast<int>(mesh.triangles.size());

    // Local edge k of a triangle joins the two vertices other than vertex k.
    // A triangle is crossed on exactly zero or two of its edges.
    std::vector<std::array<int, 2>> crossed(nt, {-1, -1});
    for (int ti = 0; ti < nt; ++ti) {
        int cnt = 0;
        for (int k = 0; k < 3; ++k) {
            const int a = mesh.triangles[ti][(k + 1) % 3];
            const int b = mesh.triangles[ti][(k + 2) % 3];
            if ((u[a] > t) != (u[b] > t)) {
                if (cnt < 2) crossed[ti][cnt] = k;
                ++cnt;
            }
        }
        if (cnt != 0 && cnt != 2)
            throw NumericalError("level curve: inconsistent edge crossings after tie-break");
    }

    LevelCurve curve;
    curve.t = t;
    std::vector<char> visited(nt, 0);

    for (int start = 0; start < nt; ++start) {
        if (visited[start] || crossed[start][0] < 0) continue;
        Chain chain;
        int tri = start;
        int entry = crossed[start][0];
        const int stop_edge = entry;
        for (;;) {
            visited[tri] = 1;
            const int exit = (crossed[tri][0] == entry) ? crossed[tri][1] : crossed[tri][0];
            const int a = mesh.triangles[tri][(entry + 1) % 3];
            const int b = mesh.triangles[tri][(entry + 2) % 3];
            Vec2 p = edge_crossing(mesh.vertices[a], mesh.vertices[b], u[a], u[b], t);
            // The crossing vertex sits on an edge shared by at most two
            // triangles; attach the mean of their constant gradients.
            const int other = adj[tri][entry];
            Vec2 g = grads[tri];
            if (other >= 0) g = (g + grads[other]) * 0.5;
            chain.pts.push_back(p);
            chain.grads.push_back(g);
            chain.segs.push_back(tri);

            const int next = adj[tri][exit];
            if (next < 0)
                throw NumericalError("level curve: contour reached the mesh boundary");
            // Find which local edge of the neighbor we are entering through.
            int next_entry = -1;
            for (int k = 0; k < 3; ++k)
                if (adj[next][k] == tri) next_entry = k;
            if (next_entry < 0)
                throw ConsistencyError("level curve: adjacency tables disagree");
            if (next == start && next_entry == stop_edge) break;
            tri = next;
            entry = next_entry;
        }
        if (chain.pts.size() < 3)
            throw NumericalError("level curve: degenerate contour component");

        LevelComponent comp;
        comp.points = std::move(chain.pts);
        comp.vertex_grad = std::move(chain.grads);
        comp.seg_triangle = std::move(chain.segs);
        if (polygon_signed_area(comp.points) < 0.0) reverse_component(comp);
        rotate_to_min_point(comp);
        curve.components.push_back(std::move(comp));
    }

    if (curve.components.empty())
        throw NumericalError("level curve: no crossings found in the field");
    std::sort(curve.components.begin(), curve.components.end(),
              [](const LevelComponent& a, const LevelComponent& b) {
                  return a.points[0].x < b.points[0].x ||
                         (a.points[0].x == b.points[0].x && a.points[0].y < b.points[0].y);
              });
    return curve;
}

double level_curve_length(const LevelCurve& curve) {
    double len = 0.0;
    for (const LevelComponent& c : curve.components) {
        const int n = static_cast<int>(c.points.size());
        for (int i = 0; i < n; ++i) len += dist(c.points[i], c.points[(i + 1) % n]);
    }
    return len;
}

}  // namespace fharm
