// Unstructured triangle mesh with tagged, oriented boundary facets.
//
// Meshes are immutable once finalize() has run: shape updates go through
// deformed(), which returns a brand-new mesh and leaves the original intact.
// Boundary facets are stored (a, b)-ordered so that the domain lies on the
// left of the walk direction, i.e. the outward normal is the right-rotated
// tangent. That ordering is what the discrete curvature and the surface
// shape-derivative terms rely on.
#pragma once

#include "eroopt/vec.hpp"

#include <array>
#include <string>
#include <vector>

namespace eroopt {

enum class BoundaryRole { Inflow, Wall, Outflow };

struct BoundaryFacet {
    int v[2] = {-1, -1};  // endpoint vertex ids, domain-on-the-left order
    int cell = -1;        // the unique adjacent cell
    BoundaryRole role = BoundaryRole::Wall;
    bool deformable = false;  // design boundary membership (wall facets only)
};

// Per-cell deformation safeguards: 1/2 <= det(I + t*DW) <= 2 and
// ||t*DW||_F <= 0.3 by default (the step-size caps of the optimizer).
struct QualityLimits {
    double det_lo = 0.5;
    double det_hi = 2.0;
    double frob_cap = 0.3;
};

struct DeformationQuality {
    double det_min = 1.0;
    double det_max = 1.0;
    double frob_max = 0.0;
    bool admissible(const QualityLimits& lim) const {
        return det_min >= lim.det_lo && det_max <= lim.det_hi &&
               frob_max <= lim.frob_cap;
    }
};

struct MeshQualityReport {
    double min_area = 0.0;
    double max_aspect = 0.0;    // longest edge / inradius-scaled
    double min_angle_deg = 0.0;
    int inverted_cells = 0;
};

class Mesh {
public:
    // -- primary data ------------------------------------------------------
    std::vector<Vec2> X;                     // vertex coordinates
    std::vector<std::array<int, 3>> cells;   // vertex ids, CCW after finalize
    std::vector<BoundaryFacet> facets;

    // -- caches filled by finalize() ---------------------------------------
    std::vector<double> area;                   // per cell
    std::vector<std::array<Vec2, 3>> grad;      // P1 basis gradients per cell
    std::vector<double> hcell;                  // stabilization length sqrt(2A)
    std::vector<double> facet_len;
    std::vector<Vec2> facet_normal;             // outward unit normal
    std::vector<char> vertex_on_boundary;
    // A vertex is deformable iff it lies on the boundary and ALL its boundary
    // facets are deformable (junction vertices between design and fixed wall
    // therefore stay fixed).
    std::vector<char> vertex_deformable;
    // Boundary chain: for each boundary vertex, the facet arriving at it and
    // the facet leaving it (-1 for interior vertices).
    std::vector<int> facet_into_vertex;
    std::vector<int> facet_out_of_vertex;

    int n_vertices() const { return static_cast<int>(X.size()); }
    int n_cells() const { return static_cast<int>(cells.size()); }
    int n_facets() const { return static_cast<int>(facets.size()); }

    // Fixes cell orientation, orders boundary facets domain-on-the-left,
    // computes normals/areas/basis gradients and validates the boundary
    // (every facet borders exactly one cell, chains are closed).
    // Throws std::runtime_error on inconsistent input.
    void finalize();

    // Evaluate the per-cell deformation safeguards for the map x -> x + t*W
    // (W interleaved [2i], [2i+1]) without building the deformed mesh.
    DeformationQuality deformation_quality(const std::vector<double>& W,
                                           double t) const;

    // Returns a new mesh with vertices X + t*W; connectivity, tags and
    // deformable flags are carried over. Throws if the quality limits are
    // violated (pass nullptr limits semantics via check=false to skip).
    Mesh deformed(const std::vector<double>& W, double t,
                  const QualityLimits& lim = QualityLimits(),
                  bool check = true) const;

    MeshQualityReport quality() const;

    double total_area() const;
};

// Discrete boundary curvature data (2D): at each boundary vertex the turning
// angle between the adjacent facets divided by the averaged facet length,
// convex-outward positive (a CCW-walked circle of radius R gives h = +1/R).
struct BoundaryCurvature {
    std::vector<double> h;       // per vertex, 0 for interior vertices
    std::vector<double> mu;      // lumped boundary measure (half length sum)
    std::vector<Vec2> normal;    // averaged unit vertex normal
    std::vector<char> valid;     // vertex has the two-facet chain
};

BoundaryCurvature boundary_curvature(const Mesh& mesh);

// -- built-in generators (desk-scale geometries only; anything else is an
//    input .msh file) ------------------------------------------------------

// Axis-aligned channel [0,Lx] x [0,Ly]; inflow at x=0, outflow at x=Lx,
// walls at y=0 and y=Ly. If deformable_walls is true, wall facets whose both
// endpoints satisfy margin <= x <= Lx - margin are marked deformable.
Mesh make_rectangle_channel(int nx, int ny, double Lx, double Ly,
                            bool deformable_walls = false,
                            double margin = 0.0);

// 90-degree bend channel of width `width`: straight horizontal inlet run of
// length inlet_len, quarter-arc of centerline radius `radius` turning the
// flow from +x to -y, straight vertical outlet run of length outlet_len.
// Wall facets strictly inside the arc section are deformable.
Mesh make_bend_channel(int n_along, int n_across, double width, double radius,
                       double inlet_len, double outlet_len);

} // namespace eroopt
