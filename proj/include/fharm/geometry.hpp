#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "fharm/vec.hpp"

namespace fharm {

// Ring-shaped planar domains: a simple closed outer polyline (counterclockwise)
// minus a closed inner disk. The inner disk carries the unit Dirichlet datum,
// the outer boundary the zero datum.

enum class DomainKind { Disk, Square, Koch, Custom };

// Record of the translate/dilate applied when a raw domain was normalized:
//   normalized point = (raw point - shift) * scale.
// Measures computed on the normalized domain map back to the raw one with the
// weight scale^(p-2) attached (see the measure module).
struct NormalizationRecord {
    Vec2 shift{0.0, 0.0};
    double scale = 1.0;
};

struct Domain {
    std::vector<Vec2> outer;      // closed CCW polyline, last vertex != first
    Vec2 inner_center{0.0, 0.0};
    double inner_radius = 1.0;
    DomainKind kind = DomainKind::Custom;
    int koch_level = 0;
    NormalizationRecord normalization;

    // When the outer boundary is an exact circle the mesher snaps boundary
    // vertices onto it instead of using the polyline chords.
    bool outer_is_circle = false;
    Vec2 outer_circle_center{0.0, 0.0};
    double outer_circle_radius = 0.0;
};

// Factories. Every factory returns a normalized domain: inner disk B(0,1),
// outer boundary at the conventional distance from the origin.
//  - disk: the capacitary ring 1 < |z| < 5 regardless of the raw radius.
//  - square / koch / custom: translated and dilated so dist(0, outer) = 4.
Domain make_domain_disk(double raw_radius);
Domain make_domain_square(double raw_half_side);
Domain make_domain_koch(int level, double base_size);
Domain make_domain_custom(const std::vector<Vec2>& outer, Vec2 z0);

// Translate by -z0 and dilate by 4/dist(z0, outer); the inner disk becomes
// B(0,1). Throws InputError if z0 is not strictly inside the outer polyline.
Domain normalize_domain(const Domain& raw, Vec2 z0);

// Scale the whole domain by s about the origin (inner radius s, outer
// boundary dilated). Used for scaling-covariance checks.
Domain dilate_domain(const Domain& d, double s);

// Point membership in the open ring (inside outer, outside closed inner disk).
bool domain_contains(const Domain& d, Vec2 z);

double distance_to_outer(const Domain& d, Vec2 z);
double outer_length(const Domain& d);
double domain_diameter(const Domain& d);

// --- Meshes -----------------------------------------------------------------

enum BoundaryTag : int { kOuterBoundary = 0, kInnerBoundary = 1 };

struct BoundaryEdge {
    int a = -1;
    int b = -1;
    int tag = kOuterBoundary;
};

struct Mesh {
    std::vector<Vec2> vertices;
    std::vector<std::array<int, 3>> triangles;  // CCW vertex triples
    std::vector<BoundaryEdge> boundary_edges;
    double h_max = 0.0;
    double grading = 1.0;

    // -1 interior, else BoundaryTag. Derived from boundary_edges.
    std::vector<int> vertex_tag;
};

// Conforming triangulation of the ring with min angle >= 20 degrees. Edge
// length approaches grading*h_max at the outer boundary and h_max away from
// it. Throws InputError on bad parameters and NumericalError if refinement
// fails to terminate within budget.
Mesh generate_mesh(const Domain& domain, double h_max, double grading);

// Plain-text emission and parsing. Format:
//   nodes N triangles M
//   x y                 (N lines)
//   a b c               (M lines)
//   boundary K
//   a b outer|inner     (K lines)
void write_mesh(const Mesh& mesh, const std::string& path);
Mesh read_mesh(const std::string& path);

// Canonical serialization (the exact bytes write_mesh produces) and its
// FNV-1a fingerprint; field files carry the fingerprint so a stale pairing
// of mesh and nodal data is detected on load.
std::string mesh_to_text(const Mesh& mesh);
std::uint64_t mesh_checksum(const Mesh& mesh);

double mesh_min_angle_degrees(const Mesh& mesh);

// adjacency[t][k] = index of the triangle sharing the edge opposite vertex k
// of triangle t, or -1 on the boundary.
std::vector<std::array<int, 3>> triangle_adjacency(const Mesh& mesh);

// Piecewise-constant gradient of the nodal field u on each triangle.
Vec2 triangle_gradient(const Mesh& mesh, int tri, const std::vector<double>& u);
std::vector<Vec2> all_triangle_gradients(const Mesh& mesh, const std::vector<double>& u);

double triangle_area(const Mesh& mesh, int tri);

// --- Level curves -----------------------------------------------------------

struct LevelComponent {
    std::vector<Vec2> points;      // closed CCW polyline, last != first
    std::vector<Vec2> vertex_grad; // field gradient attached per vertex
    std::vector<int> seg_triangle; // triangle crossed by segment i -> i+1
};

struct LevelCurve {
    double t = 0.0;
    std::vector<LevelComponent> components;
};

// Marching-triangles contour of the piecewise-linear field u at level t.
// t colliding with a nodal value is perturbed by +1e-12 (deterministic).
LevelCurve extract_level_curve(const Mesh& mesh, const std::vector<double>& u, double t);

double level_curve_length(const LevelCurve& curve);

// Signed area of a closed polyline (positive for CCW).
double polygon_signed_area(const std::vector<Vec2>& poly);
bool point_in_polygon(const std::vector<Vec2>& poly, Vec2 z);
double distance_to_polyline(const std::vector<Vec2>& poly, Vec2 z);

}  // namespace fharm
