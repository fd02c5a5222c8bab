#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

#include "fharm/errors.hpp"
#include "fharm/geometry.hpp"

// Mesh generation: incremental Delaunay triangulation (Bowyer-Watson) of the
// boundary samples, conformity by splitting encroached boundary subsegments,
// then quality and size refinement by circumcenter insertion. Boundary
// subsegments act as walls: insertion cavities never cross them, so region
// labels (ring, hole, exterior) stay consistent throughout refinement.

namespace fharm {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr int kRegionNone = 0;
constexpr int kRegionDomain = 1;
constexpr int kRegionOutside = 2;
constexpr int kRegionHole = 3;

constexpr int kCurveStraight = 0;
constexpr int kCurveOuterCircle = 1;
constexpr int kCurveInnerCircle = 2;

long double orient_ld(Vec2 a, Vec2 b, Vec2 c) {
    const long double abx = static_cast<long double>(b.x) - a.x;
    const long double aby = static_cast<long double>(b.y) - a.y;
    const long double acx = static_cast<long double>(c.x) - a.x;
    const long double acy = static_cast<long double>(c.y) - a.y;
    return abx * acy - aby * acx;
}

// Positive when p lies strictly inside the circumcircle of the CCW triangle (a,b,c).
long double incircle_ld(Vec2 a, Vec2 b, Vec2 c, Vec2 p) {
    const long double ax = static_cast<long double>(a.x) - p.x;
    const long double ay = static_cast<long double>(a.y) - p.y;
    const long double bx = static_cast<long double>(b.x) - p.x;
    const long double by = static_cast<long double>(b.y) - p.y;
    const long double cx = static_cast<long double>(c.x) - p.x;
    const long double cy = static_cast<long double>(c.y) - p.y;
    const long double a2 = ax * ax + ay * ay;
    const long double b2 = bx * bx + by * by;
    const long double c2 = cx * cx + cy * cy;
    return ax * (by * c2 - cy * b2) - ay * (bx * c2 - cx * b2) + a2 * (bx * cy - cx * by);
}

Vec2 circumcenter(Vec2 a, Vec2 b, Vec2 c) {
    const Vec2 B = b - a, C = c - a;
    const double d = 2.0 * (B.x * C.y - B.y * C.x);
    const double b2 = norm2(B), c2 = norm2(C);
    return {a.x + (C.y * b2 - B.y * c2) / d, a.y + (B.x * c2 - C.x * b2) / d};
}

std::uint64_t edge_key(int a, int b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

struct Tri {
    int v[3];
    int adj[3];  // adj[k] faces the edge opposite vertex k
    int region = kRegionNone;
    bool alive = false;
};

struct Segment {
    int a = -1, b = -1;
    int tag = kOuterBoundary;
    int curve = kCurveStraight;
    bool alive = true;
};

struct SizeField {
    const Domain* domain;
    double h_max;
    double grading;
    double operator()(Vec2 z) const {
        if (grading >= 1.0) return h_max;
        const double d = distance_to_outer(*domain, z);
        const double f = std::clamp(grading + (1.0 - grading) * d / 1.5, grading, 1.0);
        return h_max * f;
    }
};

class Mesher {
  public:
    Mesher(const Domain& domain, double h_max, double grading)
        : domain_(domain), size_{&domain, h_max, grading}, h_max_(h_max), grading_(grading) {}

    Mesh run();

  private:
    // Triangulation state.
    std::vector<Vec2> pts_;
    std::vector<bool> is_corner_;
    std::vector<Tri> tris_;
    std::vector<int> free_tris_;
    std::vector<int> v2t_;
    std::vector<int> mark_;  // per-triangle visit stamps
    int stamp_ = 0;
    int last_tri_ = -1;

    std::vector<Segment> segs_;
    std::unordered_map<std::uint64_t, int> seg_index_;

    std::deque<int> seg_queue_;
    std::deque<std::pair<int, int>> quality_queue_;  // (triangle, birth stamp)
    std::vector<int> tri_birth_;

    const Domain& domain_;
    SizeField size_;
    double h_max_;
    double grading_;
    std::size_t vertex_budget_ = 0;

    // Scratch reused across cavity operations.
    std::vector<int> cavity_;
    std::vector<int> around_;

    int add_point(Vec2 p, bool corner);
    int new_triangle(int a, int b, int c, int region);
    void kill_triangle(int t);
    int next_stamp();

    int locate(Vec2 p, int hint) const;
    bool walk_blocked(int from_tri, Vec2 target, int* blocking_seg) const;

    bool is_wall(int a, int b) const { return seg_index_.count(edge_key(a, b)) != 0; }

    void triangles_around(int v, std::vector<int>& out) const;
    bool find_edge_triangles(int a, int b, int out[2]) const;

    // Bowyer-Watson insertion. exempt is a segment id whose edge the cavity may
    // cross (the segment being split), or -1. Returns the new vertex index or
    // -1 when the insertion was rejected; a rejected insertion leaves the
    // triangulation untouched and *conflict_seg names an offending segment.
    int insert_vertex(Vec2 p, int hint, int exempt, int* conflict_seg);

    void declare_segment(int a, int b, int tag, int curve);
    void split_segment(int si);
    Vec2 split_point(const Segment& s) const;
    bool segment_missing(const Segment& s) const;
    bool segment_encroached(const Segment& s) const;

    void build_boundary();
    void enforce_conformity();
    void classify_regions();
    void refine();
    void queue_if_bad(int t);
    bool triangle_bad(int t) const;
    Mesh finalize();
};

int Mesher::add_point(Vec2 p, bool corner) {
    if (vertex_budget_ && pts_.size() >= vertex_budget_)
        throw NumericalError(
            "mesh refinement exceeded the vertex budget (" + std::to_string(vertex_budget_) +
            "): h_max may be too small for this geometry");
    pts_.push_back(p);
    is_corner_.push_back(corner);
    v2t_.push_back(-1);
    return static_cast<int>(pts_.size()) - 1;
}

int Mesher::new_triangle(int a, int b, int c, int region) {
    int id;
    if (!free_tris_.empty()) {
        id = free_tris_.back();
        free_tris_.pop_back();
    } else {
        id = static_cast<int>(tris_.size());
        tris_.emplace_back();
        mark_.push_back(0);
        tri_birth_.push_back(0);
    }
    Tri& t = tris_[id];
    t.v[0] = a;
    t.v[1] = b;
    t.v[2] = c;
    t.adj[0] = t.adj[1] = t.adj[2] = -1;
    t.region = region;
    t.alive = true;
    ++tri_birth_[id];
    v2t_[a] = v2t_[b] = v2t_[c] = id;
    return id;
}

void Mesher::kill_triangle(int t) {
    tris_[t].alive = false;
    free_tris_.push_back(t);
}

int Mesher::next_stamp() {
    if (++stamp_ == std::numeric_limits<int>::max()) {
        std::fill(mark_.begin(), mark_.end(), 0);
        stamp_ = 1;
    }
    return stamp_;
}

// Straight visibility walk toward p. Returns the containing triangle.
int Mesher::locate(Vec2 p, int hint) const {
    int cur = hint;
    if (cur < 0 || !tris_[cur].alive) {
        for (int t = static_cast<int>(tris_.size()) - 1; t >= 0; --t)
            if (tris_[t].alive) {
                cur = t;
                break;
            }
    }
    const int cap = static_cast<int>(tris_.size()) * 4 + 64;
    int prev = -1;
    for (int step = 0; step < cap; ++step) {
        const Tri& t = tris_[cur];
        int next = -1;
        for (int k = 0; k < 3; ++k) {
            const int n = t.adj[k];
            if (n == prev && n >= 0) continue;
            const Vec2 a = pts_[t.v[(k + 1) % 3]];
            const Vec2 b = pts_[t.v[(k + 2) % 3]];
            if (orient_ld(a, b, p) < 0.0L && n >= 0) {
                next = n;
                break;
            }
        }
        if (next < 0) {
            bool inside = true;
            for (int k = 0; k < 3; ++k) {
                const Vec2 a = pts_[t.v[(k + 1) % 3]];
                const Vec2 b = pts_[t.v[(k + 2) % 3]];
                if (orient_ld(a, b, p) < 0.0L) inside = false;
            }
            if (inside) return cur;
            // Walk got stuck against the hull; fall through to the scan below.
            break;
        }
        prev = cur;
        cur = next;
    }
    for (int t = 0; t < static_cast<int>(tris_.size()); ++t) {
        if (!tris_[t].alive) continue;
        bool inside = true;
        for (int k = 0; k < 3; ++k) {
            const Vec2 a = pts_[tris_[t].v[(k + 1) % 3]];
            const Vec2 b = pts_[tris_[t].v[(k + 2) % 3]];
            if (orient_ld(a, b, p) < 0.0L) inside = false;
        }
        if (inside) return t;
    }
    throw NumericalError("mesh generation: point location failed");
}

// Walks from the centroid of from_tri straight toward target. Returns true
// and the first constrained edge crossed when a wall blocks the path.
bool Mesher::walk_blocked(int from_tri, Vec2 target, int* blocking_seg) const {
    const Tri& t0 = tris_[from_tri];
    Vec2 src = (pts_[t0.v[0]] + pts_[t0.v[1]] + pts_[t0.v[2]]) / 3.0;
    int cur = from_tri;
    int prev = -1;
    const int cap = static_cast<int>(tris_.size()) * 4 + 64;
    for (int step = 0; step < cap; ++step) {
        const Tri& t = tris_[cur];
        bool inside = true;
        int exit_k = -1;
        for (int k = 0; k < 3; ++k) {
            const Vec2 a = pts_[t.v[(k + 1) % 3]];
            const Vec2 b = pts_[t.v[(k + 2) % 3]];
            if (orient_ld(a, b, target) < 0.0L) {
                inside = false;
                // Prefer an edge actually crossed by the segment src->target.
                if (t.adj[k] != prev || t.adj[k] < 0) {
                    const long double sa = orient_ld(src, target, a);
                    const long double sb = orient_ld(src, target, b);
                    if ((sa >= 0.0L) != (sb >= 0.0L) || exit_k < 0) exit_k = k;
                }
            }
        }
        if (inside) return false;
        if (exit_k < 0) return false;
        const int a = t.v[(exit_k + 1) % 3];
        const int b = t.v[(exit_k + 2) % 3];
        auto it = seg_index_.find(edge_key(a, b));
        if (it != seg_index_.end()) {
            *blocking_seg = it->second;
            return true;
        }
        const int n = t.adj[exit_k];
        if (n < 0) return false;
        prev = cur;
        cur = n;
    }
    return false;
}

void Mesher::triangles_around(int v, std::vector<int>& out) const {
    out.clear();
    const int start = v2t_[v];
    if (start < 0 || !tris_[start].alive) return;
    // Local breadth-first search over triangles sharing v; degrees are small.
    out.push_back(start);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const Tri& t = tris_[out[i]];
        int li = -1;
        for (int k = 0; k < 3; ++k)
            if (t.v[k] == v) li = k;
        if (li < 0) continue;
        for (int step = 1; step <= 2; ++step) {
            const int n = t.adj[(li + step) % 3];
            if (n < 0 || !tris_[n].alive) continue;
            bool seen = false;
            for (int s : out)
                if (s == n) seen = true;
            bool has_v = false;
            for (int k = 0; k < 3; ++k)
                if (tris_[n].v[k] == v) has_v = true;
            if (!seen && has_v) out.push_back(n);
        }
    }
}

bool Mesher::find_edge_triangles(int a, int b, int out[2]) const {
    out[0] = out[1] = -1;
    std::vector<int>& around = const_cast<Mesher*>(this)->around_;
    triangles_around(a, around);
    int n = 0;
    for (int t : around) {
        for (int k = 0; k < 3; ++k)
            if (tris_[t].v[k] == b && n < 2) out[n++] = t;
    }
    return n > 0;
}

int Mesher::insert_vertex(Vec2 p, int hint, int exempt, int* conflict_seg) {
    if (conflict_seg) *conflict_seg = -1;

    cavity_.clear();
    const int stamp = next_stamp();
    auto push_cavity = [&](int t) {
        if (mark_[t] != stamp) {
            mark_[t] = stamp;
            cavity_.push_back(t);
        }
    };

    if (exempt >= 0) {
        // Splitting a segment: seed with both triangles on the edge.
        int et[2];
        if (!find_edge_triangles(segs_[exempt].a, segs_[exempt].b, et))
            throw ConsistencyError("mesh generation: splitting a segment that is not an edge");
        for (int i = 0; i < 2; ++i)
            if (et[i] >= 0) push_cavity(et[i]);
    } else {
        const int t0 = locate(p, hint);
        // Snap to an existing vertex when the new point is indistinguishable.
        for (int k = 0; k < 3; ++k) {
            const int v = tris_[t0].v[k];
            if (dist(pts_[v], p) < 1e-12 * (1.0 + norm(p))) return -1;
        }
        push_cavity(t0);
    }

    // Grow the cavity across edges whose circumcircle contains p, walls excluded.
    const std::uint64_t exempt_key =
        exempt >= 0 ? edge_key(segs_[exempt].a, segs_[exempt].b) : ~0ULL;
    for (std::size_t i = 0; i < cavity_.size(); ++i) {
        const Tri& t = tris_[cavity_[i]];
        for (int k = 0; k < 3; ++k) {
            const int n = t.adj[k];
            if (n < 0 || mark_[n] == stamp || !tris_[n].alive) continue;
            const std::uint64_t key = edge_key(t.v[(k + 1) % 3], t.v[(k + 2) % 3]);
            if (key != exempt_key && seg_index_.count(key)) continue;
            const Tri& tn = tris_[n];
            if (incircle_ld(pts_[tn.v[0]], pts_[tn.v[1]], pts_[tn.v[2]], p) > 0.0L)
                push_cavity(n);
        }
    }

    // A constrained edge buried inside the cavity would be destroyed by the
    // carve; treat it as encroached and let the caller split it first.
    for (int ci : cavity_) {
        const Tri& t = tris_[ci];
        for (int k = 0; k < 3; ++k) {
            const int n = t.adj[k];
            if (n < 0 || mark_[n] != stamp) continue;
            const std::uint64_t key = edge_key(t.v[(k + 1) % 3], t.v[(k + 2) % 3]);
            if (key == exempt_key) continue;
            auto it = seg_index_.find(key);
            if (it != seg_index_.end()) {
                if (conflict_seg) *conflict_seg = it->second;
                return -1;
            }
        }
    }

    // Star-shape repair: grow the cavity until every boundary edge sees p
    // positively. Growth across a wall is impossible; reject in that case.
    for (bool grew = true; grew;) {
        grew = false;
        for (std::size_t i = 0; i < cavity_.size() && !grew; ++i) {
            const Tri& t = tris_[cavity_[i]];
            for (int k = 0; k < 3 && !grew; ++k) {
                const int n = t.adj[k];
                if (n >= 0 && mark_[n] == stamp) continue;
                const Vec2 a = pts_[t.v[(k + 1) % 3]];
                const Vec2 b = pts_[t.v[(k + 2) % 3]];
                if (orient_ld(a, b, p) > 0.0L) continue;
                const std::uint64_t key = edge_key(t.v[(k + 1) % 3], t.v[(k + 2) % 3]);
                if (n < 0 || (key != exempt_key && seg_index_.count(key))) {
                    auto it = seg_index_.find(key);
                    if (conflict_seg && it != seg_index_.end()) *conflict_seg = it->second;
                    return -1;
                }
                push_cavity(n);
                grew = true;
            }
        }
    }

    // Collect the directed boundary loop of the cavity.
    struct Rim {
        int b;         // edge runs a -> b counterclockwise around the cavity
        int out_tri;   // neighbor outside the cavity (-1 on the hull)
        int out_k;     // local index of the edge in out_tri
        int region;    // region label inherited from the cavity side
    };
    std::unordered_map<int, Rim> rim;
    rim.reserve(cavity_.size() * 2);
    for (int ci : cavity_) {
        const Tri& t = tris_[ci];
        for (int k = 0; k < 3; ++k) {
            const int n = t.adj[k];
            if (n >= 0 && mark_[n] == stamp) continue;
            const int a = t.v[(k + 1) % 3];
            const int b = t.v[(k + 2) % 3];
            int out_k = -1;
            if (n >= 0)
                for (int j = 0; j < 3; ++j)
                    if (tris_[n].adj[j] == ci) out_k = j;
            if (!rim.emplace(a, Rim{b, n, out_k, t.region}).second)
                return -1;  // pinched cavity; reject the insertion
        }
    }
    if (rim.size() < 3) return -1;

    // Every vertex of the cavity must sit on its rim, or the carve would
    // disconnect it from the triangulation.
    for (int ci : cavity_)
        for (int k = 0; k < 3; ++k)
            if (!rim.count(tris_[ci].v[k])) return -1;

    const int pv = add_point(p, false);
    for (int ci : cavity_) kill_triangle(ci);

    // Fan: walk the rim loop and connect consecutive fan triangles, starting
    // from the smallest vertex id so construction order is reproducible.
    int first_vertex = rim.begin()->first;
    for (const auto& kv : rim) first_vertex = std::min(first_vertex, kv.first);
    int a = first_vertex;
    int prev_tri = -1, first_tri = -1;
    std::size_t built = 0;
    do {
        auto it = rim.find(a);
        if (it == rim.end()) throw ConsistencyError("mesh generation: broken cavity rim");
        const Rim& r = it->second;
        const int nt = new_triangle(a, r.b, pv, r.region);
        Tri& t = tris_[nt];
        t.adj[2] = r.out_tri;  // edge (a, b) faces the old outside neighbor
        if (r.out_tri >= 0 && r.out_k >= 0) tris_[r.out_tri].adj[r.out_k] = nt;
        if (prev_tri >= 0) {
            // Previous fan triangle (x, a, pv): its edge (a, pv) is opposite x.
            tris_[prev_tri].adj[0] = nt;
            t.adj[1] = prev_tri;  // edge (pv, a) is opposite r.b at local 1
        }
        if (first_tri < 0) first_tri = nt;
        prev_tri = nt;
        a = r.b;
        ++built;
    } while (a != first_vertex && built <= rim.size());
    if (a != first_vertex || built != rim.size())
        throw ConsistencyError("mesh generation: cavity rim did not close");
    tris_[prev_tri].adj[0] = first_tri;
    tris_[first_tri].adj[1] = prev_tri;

    last_tri_ = first_tri;
    return pv;
}

void Mesher::declare_segment(int a, int b, int tag, int curve) {
    Segment s;
    s.a = a;
    s.b = b;
    s.tag = tag;
    s.curve = curve;
    segs_.push_back(s);
    const int idx = static_cast<int>(segs_.size()) - 1;
    seg_index_[edge_key(a, b)] = idx;
    seg_queue_.push_back(idx);
}

Vec2 Mesher::split_point(const Segment& s) const {
    const Vec2 a = pts_[s.a], b = pts_[s.b];
    if (s.curve == kCurveOuterCircle || s.curve == kCurveInnerCircle) {
        const double radius =
            s.curve == kCurveOuterCircle ? domain_.outer_circle_radius : domain_.inner_radius;
        const Vec2 center =
            s.curve == kCurveOuterCircle ? domain_.outer_circle_center : domain_.inner_center;
        Vec2 m = (a + b) * 0.5 - center;
        const double n = norm(m);
        if (n == 0.0) throw NumericalError("mesh generation: degenerate circle chord");
        return center + m * (radius / n);
    }
    // Concentric-shell split: when one endpoint is an input corner, place the
    // split at a power-of-two distance from it so cascades at small input
    // angles settle onto matching shells.
    const bool ca = is_corner_[s.a], cb = is_corner_[s.b];
    if (ca != cb) {
        const Vec2 corner = ca ? a : b;
        const Vec2 other = ca ? b : a;
        const double len = dist(corner, other);
        double r = std::exp2(std::round(std::log2(len * 0.5)));
        if (r < len / 3.0) r *= 2.0;
        if (r > 2.0 * len / 3.0) r *= 0.5;
        return corner + (other - corner) * (r / len);
    }
    return (a + b) * 0.5;
}

bool Mesher::segment_missing(const Segment& s) const {
    int et[2];
    return !const_cast<Mesher*>(this)->find_edge_triangles(s.a, s.b, et);
}

bool Mesher::segment_encroached(const Segment& s) const {
    int et[2];
    if (!const_cast<Mesher*>(this)->find_edge_triangles(s.a, s.b, et)) return false;
    const Vec2 a = pts_[s.a], b = pts_[s.b];
    for (int i = 0; i < 2; ++i) {
        if (et[i] < 0) continue;
        const Tri& t = tris_[et[i]];
        for (int k = 0; k < 3; ++k) {
            const int w = t.v[k];
            if (w == s.a || w == s.b) continue;
            // Apex inside the diametral circle means the angle at w is obtuse.
            if (dot(a - pts_[w], b - pts_[w]) < 0.0) return true;
        }
    }
    return false;
}

void Mesher::split_segment(int si) {
    Segment s = segs_[si];
    if (!s.alive) return;
    const Vec2 m = split_point(s);

    int conflict = -1;
    int mv;
    if (segment_missing(s)) {
        mv = insert_vertex(m, last_tri_, -1, &conflict);
    } else {
        mv = insert_vertex(m, last_tri_, si, &conflict);
    }
    if (mv < 0) {
        if (conflict >= 0 && conflict != si) {
            // Another wall stands in the way; split it first, then retry.
            seg_queue_.push_front(si);
            split_segment(conflict);
            return;
        }
        throw NumericalError("mesh generation: segment split rejected");
    }

    segs_[si].alive = false;
    seg_index_.erase(edge_key(s.a, s.b));
    declare_segment(s.a, mv, s.tag, s.curve);
    declare_segment(mv, s.b, s.tag, s.curve);

    // The new vertex may leave nearby segments encroached; recheck walls that
    // appear in the freshly built fan around it.
    triangles_around(mv, around_);
    for (int t : around_) {
        for (int k = 0; k < 3; ++k) {
            auto it = seg_index_.find(edge_key(tris_[t].v[(k + 1) % 3], tris_[t].v[(k + 2) % 3]));
            if (it != seg_index_.end()) seg_queue_.push_back(it->second);
        }
        queue_if_bad(t);
    }
}

void Mesher::build_boundary() {
    // Bounding box of everything, inflated, carried by four far-away points.
    double xlo = -1.0, xhi = 1.0, ylo = -1.0, yhi = 1.0;
    for (const Vec2& v : domain_.outer) {
        xlo = std::min(xlo, v.x);
        xhi = std::max(xhi, v.x);
        ylo = std::min(ylo, v.y);
        yhi = std::max(yhi, v.y);
    }
    const double span = std::max(xhi - xlo, yhi - ylo) * 8.0;
    const Vec2 mid{(xlo + xhi) / 2.0, (ylo + yhi) / 2.0};
    const int s0 = add_point({mid.x - span, mid.y - span}, false);
    const int s1 = add_point({mid.x + span, mid.y - span}, false);
    const int s2 = add_point({mid.x + span, mid.y + span}, false);
    const int s3 = add_point({mid.x - span, mid.y + span}, false);
    const int t0 = new_triangle(s0, s1, s2, kRegionNone);
    const int t1 = new_triangle(s0, s2, s3, kRegionNone);
    tris_[t0].adj[1] = t1;  // edge (s2, s0) of t0
    tris_[t1].adj[2] = t0;  // edge (s0, s2) of t1
    last_tri_ = t0;

    struct Sample {
        Vec2 p;
        bool corner;
    };
    std::vector<Sample> chain;
    std::vector<int> chain_curve;  // curve type of the piece after sample i
    const double h_outer = grading_ * h_max_;

    if (domain_.outer_is_circle) {
        const Vec2 cc = domain_.outer_circle_center;
        const double R = domain_.outer_circle_radius;
        const int n = std::max(48, static_cast<int>(std::ceil(2.0 * kPi * R / h_outer)));
        for (int k = 0; k < n; ++k) {
            const double th = 2.0 * kPi * k / n;
            chain.push_back({{cc.x + R * std::cos(th), cc.y + R * std::sin(th)}, false});
            chain_curve.push_back(kCurveOuterCircle);
        }
    } else {
        const int n = static_cast<int>(domain_.outer.size());
        for (int i = 0; i < n; ++i) {
            const Vec2 a = domain_.outer[i], b = domain_.outer[(i + 1) % n];
            const double len = dist(a, b);
            const int pieces = std::max(1, static_cast<int>(std::ceil(len / h_outer)));
            for (int j = 0; j < pieces; ++j) {
                chain.push_back({a + (b - a) * (static_cast<double>(j) / pieces), j == 0});
                chain_curve.push_back(kCurveStraight);
            }
        }
    }

    std::vector<int> ids(chain.size());
    for (std::size_t i = 0; i < chain.size(); ++i) {
        int conflict = -1;
        ids[i] = insert_vertex(chain[i].p, last_tri_, -1, &conflict);
        if (ids[i] < 0) throw NumericalError("mesh generation: duplicate outer boundary sample");
        is_corner_[ids[i]] = chain[i].corner;
    }
    for (std::size_t i = 0; i < chain.size(); ++i)
        declare_segment(ids[i], ids[(i + 1) % chain.size()], kOuterBoundary, chain_curve[i]);

    // Inner circle.
    const double r = domain_.inner_radius;
    const Vec2 c = domain_.inner_center;
    const int n_in = std::max(32, static_cast<int>(std::ceil(2.0 * kPi * r / h_max_)));
    std::vector<int> inner_ids(n_in);
    for (int k = 0; k < n_in; ++k) {
        const double th = 2.0 * kPi * k / n_in;
        int conflict = -1;
        inner_ids[k] = insert_vertex({c.x + r * std::cos(th), c.y + r * std::sin(th)}, last_tri_, -1, &conflict);
        if (inner_ids[k] < 0) throw NumericalError("mesh generation: duplicate inner boundary sample");
    }
    for (int k = 0; k < n_in; ++k)
        declare_segment(inner_ids[k], inner_ids[(k + 1) % n_in], kInnerBoundary, kCurveInnerCircle);
}

void Mesher::enforce_conformity() {
    std::size_t guard = 0;
    while (!seg_queue_.empty()) {
        if (++guard > vertex_budget_ * 8)
            throw NumericalError("mesh generation: boundary conformity did not settle");
        const int si = seg_queue_.front();
        seg_queue_.pop_front();
        if (!segs_[si].alive) continue;
        if (segment_missing(segs_[si]) || segment_encroached(segs_[si])) split_segment(si);
    }
}

void Mesher::classify_regions() {
    for (Tri& t : tris_)
        if (t.alive) t.region = kRegionNone;

    auto flood = [&](int seed, int region) {
        if (seed < 0 || !tris_[seed].alive || tris_[seed].region != kRegionNone) return;
        std::vector<int> stack{seed};
        tris_[seed].region = region;
        while (!stack.empty()) {
            const int ti = stack.back();
            stack.pop_back();
            const Tri& t = tris_[ti];
            for (int k = 0; k < 3; ++k) {
                const int n = t.adj[k];
                if (n < 0 || !tris_[n].alive || tris_[n].region != kRegionNone) continue;
                if (is_wall(t.v[(k + 1) % 3], t.v[(k + 2) % 3])) continue;
                tris_[n].region = region;
                stack.push_back(n);
            }
        }
    };

    // Super-box corners are vertices 0..3; anything connected to them without
    // crossing a wall is exterior. The hole is seeded by the inner center.
    flood(v2t_[0], kRegionOutside);
    flood(locate(domain_.inner_center, last_tri_), kRegionHole);
    for (int t = 0; t < static_cast<int>(tris_.size()); ++t)
        if (tris_[t].alive && tris_[t].region == kRegionNone) flood(t, kRegionDomain);
}

bool Mesher::triangle_bad(int t) const {
    const Tri& tr = tris_[t];
    const Vec2 a = pts_[tr.v[0]], b = pts_[tr.v[1]], c = pts_[tr.v[2]];
    const double la = dist(b, c), lb = dist(c, a), lc = dist(a, b);
    const double shortest = std::min({la, lb, lc});
    if (shortest < 0.02 * grading_ * h_max_) return false;  // refuse runaway cascades
    const double area = 0.5 * std::fabs(cross(b - a, c - a));
    // min angle via the circumradius-to-shortest-edge ratio: sin(min angle) =
    // shortest / (2 R_circ), R_circ = la lb lc / (4 area).
    const double rcirc = la * lb * lc / (4.0 * area);
    const double sin_min = shortest / (2.0 * rcirc);
    if (sin_min < std::sin(25.0 * kPi / 180.0)) return true;
    const Vec2 centroid = (a + b + c) / 3.0;
    const double h = size_(centroid);
    return area > 0.55 * h * h;
}

void Mesher::queue_if_bad(int t) {
    if (tris_[t].alive && tris_[t].region == kRegionDomain && triangle_bad(t))
        quality_queue_.emplace_back(t, tri_birth_[t]);
}

void Mesher::refine() {
    for (int t = 0; t < static_cast<int>(tris_.size()); ++t) queue_if_bad(t);

    std::size_t guard = 0;
    while (!quality_queue_.empty() || !seg_queue_.empty()) {
        if (++guard > vertex_budget_ * 16)
            throw NumericalError("mesh generation: refinement did not settle");
        if (!seg_queue_.empty()) {
            const int si = seg_queue_.front();
            seg_queue_.pop_front();
            if (segs_[si].alive && (segment_missing(segs_[si]) || segment_encroached(segs_[si])))
                split_segment(si);
            continue;
        }
        auto [ti, birth] = quality_queue_.front();
        quality_queue_.pop_front();
        if (!tris_[ti].alive || tri_birth_[ti] != birth) continue;
        if (tris_[ti].region != kRegionDomain || !triangle_bad(ti)) continue;

        const Tri& t = tris_[ti];
        const Vec2 cc = circumcenter(pts_[t.v[0]], pts_[t.v[1]], pts_[t.v[2]]);
        if (!std::isfinite(cc.x) || !std::isfinite(cc.y)) continue;

        int blocker = -1;
        if (walk_blocked(ti, cc, &blocker)) {
            // The circumcenter lies behind a wall; refine the wall instead.
            seg_queue_.push_back(blocker);
            quality_queue_.emplace_back(ti, tri_birth_[ti]);
            continue;
        }
        int conflict = -1;
        const int nv = insert_vertex(cc, ti, -1, &conflict);
        if (nv < 0) {
            if (conflict >= 0) {
                seg_queue_.push_back(conflict);
                quality_queue_.emplace_back(ti, tri_birth_[ti]);
            }
            continue;
        }
        triangles_around(nv, around_);
        for (int nt : around_) {
            queue_if_bad(nt);
            for (int k = 0; k < 3; ++k) {
                auto it = seg_index_.find(
                    edge_key(tris_[nt].v[(k + 1) % 3], tris_[nt].v[(k + 2) % 3]));
                if (it != seg_index_.end()) seg_queue_.push_back(it->second);
            }
        }
    }
}

Mesh Mesher::finalize() {
    Mesh mesh;
    mesh.h_max = h_max_;
    mesh.grading = grading_;

    std::vector<int> vmap(pts_.size(), -1);
    for (const Tri& t : tris_) {
        if (!t.alive || t.region != kRegionDomain) continue;
        std::array<int, 3> tri;
        for (int k = 0; k < 3; ++k) {
            const int v = t.v[k];
            if (vmap[v] < 0) {
                vmap[v] = static_cast<int>(mesh.vertices.size());
                mesh.vertices.push_back(pts_[v]);
            }
            tri[k] = vmap[v];
        }
        mesh.triangles.push_back(tri);
    }
    if (mesh.triangles.empty())
        throw NumericalError("mesh generation: no triangles inside the ring");

    for (const Segment& s : segs_) {
        if (!s.alive) continue;
        if (vmap[s.a] < 0 || vmap[s.b] < 0)
            throw ConsistencyError("mesh generation: boundary segment detached from the ring");
        mesh.boundary_edges.push_back({vmap[s.a], vmap[s.b], s.tag});
    }

    mesh.vertex_tag.assign(mesh.vertices.size(), -1);
    for (const BoundaryEdge& e : mesh.boundary_edges) {
        mesh.vertex_tag[e.a] = e.tag;
        mesh.vertex_tag[e.b] = e.tag;
    }

    const double min_angle = mesh_min_angle_degrees(mesh);
    if (min_angle < 20.0 - 1e-9)
        throw NumericalError("mesh generation: min angle " + std::to_string(min_angle) +
                             " degrees fell below the 20 degree floor");
    return mesh;
}

Mesh Mesher::run() {
    // Budget scales with the requested resolution; the factor leaves room for
    // graded boundary layers without letting a bad cascade run away.
    const double h_eff = grading_ * h_max_;
    const double diam = domain_diameter(domain_);
    vertex_budget_ = static_cast<std::size_t>(
        std::min(8.0e6, 2.0e5 + 40.0 * diam * diam / (h_eff * h_eff)));

    build_boundary();
    enforce_conformity();
    classify_regions();
    refine();
    classify_regions();  // splits during refinement may have churned labels
    return finalize();
}

}  // namespace

Mesh generate_mesh(const Domain& domain, double h_max, double grading) {
    if (!(h_max > 0.0) || !std::isfinite(h_max))
        throw InputError("mesh: h_max must be positive");
    if (h_max > 0.2 * domain.inner_radius + 1e-15)
        throw InputError("mesh: h_max must not exceed a fifth of the inner radius");
    if (!(grading > 0.0) || grading > 1.0)
        throw InputError("mesh: grading must lie in (0, 1]");
    if (domain.outer.empty()) throw InputError("mesh: domain has no outer boundary");
    Mesher m(domain, h_max, grading);
    return m.run();
}

}  // namespace fharm
