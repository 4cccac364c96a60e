// Mesh finalization, deformation safeguards, curvature and built-in
// generators.

#include "eroopt/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <stdexcept>

namespace eroopt {

void Mesh::finalize() {
    const int nv = n_vertices();
    const int nc = n_cells();
    if (nv < 3 || nc < 1)
        throw std::runtime_error("mesh: needs at least one triangle");

    // Orient cells counterclockwise.
    for (auto& c : cells) {
        for (int k = 0; k < 3; ++k)
            if (c[k] < 0 || c[k] >= nv)
                throw std::runtime_error("mesh: cell vertex id out of range");
        const Vec2 e1 = X[c[1]] - X[c[0]];
        const Vec2 e2 = X[c[2]] - X[c[0]];
        if (cross(e1, e2) < 0.0) std::swap(c[1], c[2]);
    }

    area.assign(nc, 0.0);
    grad.assign(nc, {});
    hcell.assign(nc, 0.0);
    for (int c = 0; c < nc; ++c) {
        const auto& v = cells[c];
        const Vec2 p0 = X[v[0]], p1 = X[v[1]], p2 = X[v[2]];
        const double twoA = cross(p1 - p0, p2 - p0);
        if (twoA <= 0.0)
            throw std::runtime_error("mesh: degenerate or inverted cell");
        area[c] = 0.5 * twoA;
        // grad(phi_i) = perp(p_{i+2} - p_{i+1}) / (2A); perp is the +90 deg
        // rotation, which points from the opposite edge toward vertex i for a
        // CCW triangle.
        grad[c][0] = perp(p2 - p1) * (1.0 / twoA);
        grad[c][1] = perp(p0 - p2) * (1.0 / twoA);
        grad[c][2] = perp(p1 - p0) * (1.0 / twoA);
        hcell[c] = std::sqrt(2.0 * area[c]);
    }

    // Map boundary facets to their unique adjacent cell and check that every
    // facet is an actual mesh edge with exactly one neighbor.
    std::map<std::pair<int, int>, std::pair<int, int>> edge_count; // edge -> (count, cell)
    for (int c = 0; c < nc; ++c) {
        for (int k = 0; k < 3; ++k) {
            int a = cells[c][k], b = cells[c][(k + 1) % 3];
            auto key = std::minmax(a, b);
            auto it = edge_count.find(key);
            if (it == edge_count.end())
                edge_count[key] = {1, c};
            else
                it->second.first += 1;
        }
    }

    facet_len.assign(facets.size(), 0.0);
    facet_normal.assign(facets.size(), Vec2());
    vertex_on_boundary.assign(nv, 0);
    for (size_t f = 0; f < facets.size(); ++f) {
        auto& bf = facets[f];
        auto key = std::minmax(bf.v[0], bf.v[1]);
        auto it = edge_count.find(key);
        if (it == edge_count.end() || it->second.first != 1)
            throw std::runtime_error(
                "mesh: boundary facet is not a boundary edge of exactly one cell");
        bf.cell = it->second.second;

        const Vec2 pa = X[bf.v[0]], pb = X[bf.v[1]];
        const double len = norm(pb - pa);
        if (len <= 0.0) throw std::runtime_error("mesh: zero-length facet");
        // Outward normal: the one pointing away from the opposite cell vertex.
        Vec2 n = normalized(perp(pb - pa));
        const auto& cv = cells[bf.cell];
        Vec2 centroid = (X[cv[0]] + X[cv[1]] + X[cv[2]]) * (1.0 / 3.0);
        Vec2 mid = (pa + pb) * 0.5;
        if (dot(n, mid - centroid) < 0.0) {
            std::swap(bf.v[0], bf.v[1]);
            n = -n;
        }
        // After the possible swap the tangent t = (b-a)/len satisfies
        // n = rot(-90) t, i.e. the domain lies on the left of the walk.
        facet_len[f] = len;
        facet_normal[f] = -perp(normalized(X[bf.v[1]] - X[bf.v[0]])); // = rot(-90) t
        vertex_on_boundary[bf.v[0]] = 1;
        vertex_on_boundary[bf.v[1]] = 1;
    }

    // Every boundary edge of the triangulation must carry a facet tag.
    size_t n_boundary_edges = 0;
    for (const auto& kv : edge_count)
        if (kv.second.first == 1) ++n_boundary_edges;
    if (n_boundary_edges != facets.size())
        throw std::runtime_error("mesh: boundary facet tags do not cover the boundary");

    // Boundary chains: each boundary vertex has exactly one incoming and one
    // outgoing facet in the domain-left orientation.
    facet_into_vertex.assign(nv, -1);
    facet_out_of_vertex.assign(nv, -1);
    for (size_t f = 0; f < facets.size(); ++f) {
        const auto& bf = facets[f];
        if (facet_out_of_vertex[bf.v[0]] != -1 || facet_into_vertex[bf.v[1]] != -1)
            throw std::runtime_error("mesh: non-manifold boundary vertex");
        facet_out_of_vertex[bf.v[0]] = static_cast<int>(f);
        facet_into_vertex[bf.v[1]] = static_cast<int>(f);
    }
    for (int v = 0; v < nv; ++v)
        if (vertex_on_boundary[v] &&
            (facet_into_vertex[v] < 0 || facet_out_of_vertex[v] < 0))
            throw std::runtime_error("mesh: open boundary chain");

    vertex_deformable.assign(nv, 0);
    for (int v = 0; v < nv; ++v) {
        if (!vertex_on_boundary[v]) continue;
        const auto& fin = facets[facet_into_vertex[v]];
        const auto& fout = facets[facet_out_of_vertex[v]];
        vertex_deformable[v] = (fin.deformable && fout.deformable) ? 1 : 0;
    }
}

DeformationQuality Mesh::deformation_quality(const std::vector<double>& W,
                                             double t) const {
    if (W.size() != static_cast<size_t>(2 * n_vertices()))
        throw std::runtime_error("deformation_quality: field size mismatch");
    DeformationQuality q;
    q.det_min = 1e300;
    q.det_max = -1e300;
    q.frob_max = 0.0;
    for (int c = 0; c < n_cells(); ++c) {
        // DW on the cell from the constant P1 gradients.
        Mat2 DW;
        for (int k = 0; k < 3; ++k) {
            const int v = cells[c][k];
            const Vec2 g = grad[c][k];
            const Vec2 w(W[2 * v], W[2 * v + 1]);
            DW += Mat2::outer(w, g);
        }
        const Mat2 F = Mat2::identity() + t * DW;
        q.det_min = std::min(q.det_min, det(F));
        q.det_max = std::max(q.det_max, det(F));
        q.frob_max = std::max(q.frob_max, std::abs(t) * frobenius_norm(DW));
    }
    return q;
}

Mesh Mesh::deformed(const std::vector<double>& W, double t,
                    const QualityLimits& lim, bool check) const {
    if (check) {
        const DeformationQuality q = deformation_quality(W, t);
        if (!q.admissible(lim))
            throw std::runtime_error("deformed: step violates mesh quality safeguards");
    }
    Mesh out;
    out.X.resize(X.size());
    for (int v = 0; v < n_vertices(); ++v)
        out.X[v] = Vec2(X[v].x + t * W[2 * v], X[v].y + t * W[2 * v + 1]);
    out.cells = cells;
    out.facets = facets;  // finalize() recomputes cell links/normals
    for (auto& f : out.facets) f.cell = -1;
    out.finalize();
    return out;
}

MeshQualityReport Mesh::quality() const {
    MeshQualityReport r;
    r.min_area = 1e300;
    r.min_angle_deg = 180.0;
    r.max_aspect = 0.0;
    for (int c = 0; c < n_cells(); ++c) {
        r.min_area = std::min(r.min_area, area[c]);
        const Vec2 p[3] = {X[cells[c][0]], X[cells[c][1]], X[cells[c][2]]};
        double lmax = 0.0, per = 0.0;
        for (int k = 0; k < 3; ++k) {
            const Vec2 a = p[(k + 1) % 3] - p[k];
            const Vec2 b = p[(k + 2) % 3] - p[k];
            const double ang = std::atan2(std::abs(cross(a, b)), dot(a, b));
            r.min_angle_deg = std::min(r.min_angle_deg, ang * 180.0 / M_PI);
            lmax = std::max(lmax, norm(a));
            per += norm(a);
        }
        const double inradius = 2.0 * area[c] / per;
        r.max_aspect = std::max(r.max_aspect, lmax / (2.0 * std::sqrt(3.0) * inradius));
        if (area[c] <= 0.0) ++r.inverted_cells;
    }
    return r;
}

double Mesh::total_area() const {
    double a = 0.0;
    for (double v : area) a += v;
    return a;
}

BoundaryCurvature boundary_curvature(const Mesh& mesh) {
    const int nv = mesh.n_vertices();
    BoundaryCurvature bc;
    bc.h.assign(nv, 0.0);
    bc.mu.assign(nv, 0.0);
    bc.normal.assign(nv, Vec2());
    bc.valid.assign(nv, 0);
    for (int v = 0; v < nv; ++v) {
        if (!mesh.vertex_on_boundary[v]) continue;
        const int fi = mesh.facet_into_vertex[v];
        const int fo = mesh.facet_out_of_vertex[v];
        if (fi < 0 || fo < 0) continue;
        const Vec2 e_in = mesh.X[v] - mesh.X[mesh.facets[fi].v[0]];
        const Vec2 e_out = mesh.X[mesh.facets[fo].v[1]] - mesh.X[v];
        // Signed turning angle of the domain-left walk; convex-outward (e.g.
        // walking CCW around a disk) turns left, giving positive curvature.
        const double theta = std::atan2(cross(e_in, e_out), dot(e_in, e_out));
        const double mu = 0.5 * (norm(e_in) + norm(e_out));
        bc.h[v] = theta / mu;
        bc.mu[v] = mu;
        bc.normal[v] = normalized(mesh.facet_normal[fi] + mesh.facet_normal[fo]);
        bc.valid[v] = 1;
    }
    return bc;
}

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

namespace {

// Build a structured quad grid in (i=0..ni, j=0..nj) parameter space mapped by
// `map`, split each quad into two triangles, and tag the four sides.
Mesh structured_grid(int ni, int nj, const std::function<Vec2(int, int)>& map,
                     const std::function<BoundaryRole(int)>& side_role,
                     const std::function<bool(int, int, int)>& side_deformable) {
    Mesh m;
    auto vid = [&](int i, int j) { return j * (ni + 1) + i; };
    m.X.resize((ni + 1) * (nj + 1));
    for (int j = 0; j <= nj; ++j)
        for (int i = 0; i <= ni; ++i) m.X[vid(i, j)] = map(i, j);
    for (int j = 0; j < nj; ++j) {
        for (int i = 0; i < ni; ++i) {
            const int v00 = vid(i, j), v10 = vid(i + 1, j);
            const int v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
            // Alternate the diagonal to avoid a preferred direction.
            if ((i + j) % 2 == 0) {
                m.cells.push_back({v00, v10, v11});
                m.cells.push_back({v00, v11, v01});
            } else {
                m.cells.push_back({v00, v10, v01});
                m.cells.push_back({v10, v11, v01});
            }
        }
    }
    // Sides: 0 = i=0, 1 = i=ni, 2 = j=0, 3 = j=nj.
    auto add_facet = [&](int side, int a, int b, int ia, int ib) {
        BoundaryFacet f;
        f.v[0] = a;
        f.v[1] = b;
        f.role = side_role(side);
        f.deformable = side_deformable(side, ia, ib);
        m.facets.push_back(f);
    };
    for (int j = 0; j < nj; ++j) {
        add_facet(0, vid(0, j), vid(0, j + 1), j, j + 1);
        add_facet(1, vid(ni, j), vid(ni, j + 1), j, j + 1);
    }
    for (int i = 0; i < ni; ++i) {
        add_facet(2, vid(i, 0), vid(i + 1, 0), i, i + 1);
        add_facet(3, vid(i, nj), vid(i + 1, nj), i, i + 1);
    }
    m.finalize();
    return m;
}

} // namespace

Mesh make_rectangle_channel(int nx, int ny, double Lx, double Ly,
                            bool deformable_walls, double margin) {
    auto map = [&](int i, int j) {
        return Vec2(Lx * i / double(nx), Ly * j / double(ny));
    };
    auto role = [](int side) {
        if (side == 0) return BoundaryRole::Inflow;
        if (side == 1) return BoundaryRole::Outflow;
        return BoundaryRole::Wall;
    };
    auto deformable = [&](int side, int i0, int i1) {
        if (!deformable_walls || side < 2) return false;
        const double x0 = Lx * i0 / double(nx), x1 = Lx * i1 / double(nx);
        return std::min(x0, x1) >= margin - 1e-12 &&
               std::max(x0, x1) <= Lx - margin + 1e-12;
    };
    return structured_grid(nx, ny, map, role, deformable);
}

Mesh make_bend_channel(int n_along, int n_across, double width, double radius,
                       double inlet_len, double outlet_len) {
    const double arc_len = radius * M_PI / 2.0;
    const double L = inlet_len + arc_len + outlet_len;
    // Centerline point and left unit normal at arclength s.
    auto frame = [&](double s, Vec2& p, Vec2& nl) {
        if (s <= inlet_len) {
            p = Vec2(s - inlet_len, 0.0);
            nl = Vec2(0.0, 1.0);
        } else if (s <= inlet_len + arc_len) {
            const double phi = (s - inlet_len) / radius;
            p = Vec2(radius * std::sin(phi), -radius + radius * std::cos(phi));
            nl = Vec2(std::sin(phi), std::cos(phi));
        } else {
            const double u = s - inlet_len - arc_len;
            p = Vec2(radius, -radius - u);
            nl = Vec2(1.0, 0.0);
        }
    };
    std::vector<double> s_of_i(n_along + 1);
    for (int i = 0; i <= n_along; ++i) s_of_i[i] = L * i / double(n_along);
    auto map = [&](int i, int j) {
        Vec2 p, nl;
        frame(s_of_i[i], p, nl);
        const double r = -0.5 * width + width * j / double(n_across);
        return p + r * nl;
    };
    auto role = [](int side) {
        if (side == 0) return BoundaryRole::Inflow;
        if (side == 1) return BoundaryRole::Outflow;
        return BoundaryRole::Wall;
    };
    auto deformable = [&](int side, int i0, int i1) {
        if (side < 2) return false;
        const double lo = inlet_len - 1e-12, hi = inlet_len + arc_len + 1e-12;
        return s_of_i[i0] >= lo && s_of_i[i1] >= lo && s_of_i[i0] <= hi &&
               s_of_i[i1] <= hi;
    };
    return structured_grid(n_along, n_across, map, role, deformable);
}

} // namespace eroopt
