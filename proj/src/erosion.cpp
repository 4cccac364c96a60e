#include "eroopt/erosion.hpp"

#include "eroopt/fem.hpp"

#include <algorithm>
#include <cmath>

namespace eroopt {

namespace {

constexpr double kSpeedFloor = 1e-12;
constexpr double kCosFloor = 1e-6;

// C^1 smoothstep ramp chi on [-eps, eps] and its derivative.
void smooth_indicator(double w, double eps, double& chi, double& dchi) {
    if (w <= -eps) {
        chi = 0.0;
        dchi = 0.0;
    } else if (w >= eps) {
        chi = 1.0;
        dchi = 0.0;
    } else {
        const double t = (w + eps) / (2.0 * eps);
        chi = t * t * (3.0 - 2.0 * t);
        dchi = 6.0 * t * (1.0 - t) / (2.0 * eps);
    }
}

// zeta as a function of sigma = sin(gamma) in [0, 1], and d zeta / d sigma.
void zeta_of_sigma(double sigma, const ErosionParams& par, double& z, double& dz) {
    sigma = std::clamp(sigma, 0.0, 1.0);
    const double base = 1.0 + par.hv * (1.0 - sigma);
    if (sigma <= 0.0) {
        z = 0.0;
        dz = 0.0;  // (one-sided; the n1 < 1 exponent is cut off at 0)
        return;
    }
    const double s1 = std::pow(sigma, par.n1);
    const double b2 = std::pow(base, par.n2);
    z = s1 * b2;
    dz = par.n1 * std::pow(sigma, par.n1 - 1.0) * b2 -
         par.n2 * par.hv * s1 * std::pow(base, par.n2 - 1.0);
}

} // namespace

double impact_angle(const Vec2& up, const Vec2& n) {
    const double s = std::max(norm(up), kSpeedFloor);
    const double sigma = std::clamp(dot(up, n) / s, 0.0, 1.0);
    return std::asin(sigma);
}

double angle_factor(double gamma, const ErosionParams& par) {
    double z, dz;
    zeta_of_sigma(std::sin(std::clamp(gamma, 0.0, M_PI / 2.0)), par, z, dz);
    return z;
}

Vec2 impact_angle_normal_gradient(const Vec2& up, const Vec2& n) {
    const double s = std::max(norm(up), kSpeedFloor);
    const double cosg = std::max(std::cos(impact_angle(up, n)), kCosFloor);
    return up * (1.0 / (s * cosg));
}

ErosionSensitivity erosion_sensitivities(double alpha, const Vec2& up,
                                         const Vec2& n, const ErosionParams& par) {
    ErosionSensitivity out;
    const double w = dot(up, n);
    const double s = std::max(norm(up), kSpeedFloor);
    double chi, dchi;
    smooth_indicator(w, par.eps_n, chi, dchi);

    const double sigma_raw = w / s;
    const bool clamped = (sigma_raw <= 0.0) || (sigma_raw >= 1.0);
    double zeta, dzeta;
    zeta_of_sigma(sigma_raw, par, zeta, dzeta);
    if (clamped) dzeta = 0.0;

    const double sm = std::pow(s, par.m);
    const double P = alpha * w * sm * zeta;  // e without the indicator
    out.e = chi * P;
    out.g = 0.5 * out.e * out.e;

    // d sigma / d up = n/s - w up / s^3 ; d sigma / d n = up / s
    const Vec2 dsig_dup = clamped ? Vec2() : (1.0 / s) * n - (w / (s * s * s)) * up;
    const Vec2 dsig_dn = clamped ? Vec2() : (1.0 / s) * up;

    out.de_dalpha = chi * w * sm * zeta;
    out.de_dup = dchi * P * n +
                 chi * alpha *
                     (sm * zeta * n + w * par.m * std::pow(s, par.m - 2.0) * zeta * up +
                      w * sm * dzeta * dsig_dup);
    out.de_dn = dchi * P * up + chi * alpha * (sm * zeta * up + w * sm * dzeta * dsig_dn);

    out.dg_dalpha = out.e * out.de_dalpha;
    out.dg_dup = out.e * out.de_dup;
    out.dg_dn = out.e * out.de_dn;
    return out;
}

double erosion_rate(double alpha, const Vec2& up, const Vec2& n,
                    const ErosionParams& par) {
    return erosion_sensitivities(alpha, up, n, par).e;
}

namespace {

// Facet quadrature evaluation of alpha/u_p on a boundary facet.
void facet_values(const Mesh& mesh, const std::vector<double>& alpha,
                  const std::vector<double>& up, int f, int q, double& aq,
                  Vec2& upq) {
    const auto& bf = mesh.facets[f];
    const double s = EdgeQuadrature::s[q];
    aq = (1 - s) * alpha[bf.v[0]] + s * alpha[bf.v[1]];
    upq = Vec2((1 - s) * up[2 * bf.v[0]] + s * up[2 * bf.v[1]],
               (1 - s) * up[2 * bf.v[0] + 1] + s * up[2 * bf.v[1] + 1]);
}

} // namespace

CostBreakdown cost_functional(const Mesh& mesh, const std::vector<double>& alpha,
                              const std::vector<double>& up,
                              const ErosionParams& par, double c1) {
    CostBreakdown cb;
    for (int f = 0; f < mesh.n_facets(); ++f) {
        if (mesh.facets[f].role != BoundaryRole::Wall) continue;
        const Vec2 n = mesh.facet_normal[f];
        for (int q = 0; q < EdgeQuadrature::n; ++q) {
            double aq;
            Vec2 upq;
            facet_values(mesh, alpha, up, f, q, aq, upq);
            const double e = erosion_rate(aq, upq, n, par);
            cb.erosion += EdgeQuadrature::weight[q] * mesh.facet_len[f] * 0.5 * e * e;
        }
    }
    const BoundaryCurvature bc = boundary_curvature(mesh);
    double wsum = 0.0;
    for (int v = 0; v < mesh.n_vertices(); ++v) {
        if (!bc.valid[v]) continue;
        const int fi = mesh.facet_into_vertex[v];
        const int fo = mesh.facet_out_of_vertex[v];
        if (!mesh.facets[fi].deformable && !mesh.facets[fo].deformable) continue;
        wsum += 0.5 * bc.h[v] * bc.h[v] * bc.mu[v];
    }
    if (c1 < 0.0) c1 = (wsum > 0.0) ? 0.01 * cb.erosion / wsum : 0.0;
    cb.c1 = c1;
    cb.willmore = c1 * wsum;
    cb.total = cb.erosion + cb.willmore;
    return cb;
}

double integrated_erosion(const Mesh& mesh, const std::vector<double>& alpha,
                          const std::vector<double>& up, const ErosionParams& par) {
    double E = 0.0;
    for (int f = 0; f < mesh.n_facets(); ++f) {
        if (mesh.facets[f].role != BoundaryRole::Wall) continue;
        const Vec2 n = mesh.facet_normal[f];
        for (int q = 0; q < EdgeQuadrature::n; ++q) {
            double aq;
            Vec2 upq;
            facet_values(mesh, alpha, up, f, q, aq, upq);
            E += EdgeQuadrature::weight[q] * mesh.facet_len[f] *
                 erosion_rate(aq, upq, n, par);
        }
    }
    return E;
}

double impact_rate(const Mesh& mesh, const std::vector<double>& alpha,
                   const std::vector<double>& up) {
    double in_flux = 0.0, out_flux = 0.0;
    for (int f = 0; f < mesh.n_facets(); ++f) {
        const auto& bf = mesh.facets[f];
        if (bf.role == BoundaryRole::Wall) continue;
        for (int q = 0; q < EdgeQuadrature::n; ++q) {
            double aq;
            Vec2 upq;
            facet_values(mesh, alpha, up, f, q, aq, upq);
            const double fl = EdgeQuadrature::weight[q] * mesh.facet_len[f] * aq *
                              dot(upq, mesh.facet_normal[f]);
            if (bf.role == BoundaryRole::Inflow) in_flux -= fl;  // u_p.(-n)
            else out_flux += fl;
        }
    }
    if (in_flux <= 0.0) return 0.0;
    return 1.0 - out_flux / in_flux;
}

void erosion_cost_gradients(const Mesh& mesh, const std::vector<double>& alpha,
                            const std::vector<double>& up,
                            const ErosionParams& par,
                            std::vector<double>& dJ_dalpha,
                            std::vector<double>& dJ_dup) {
    dJ_dalpha.assign(mesh.n_vertices(), 0.0);
    dJ_dup.assign(2 * mesh.n_vertices(), 0.0);
    for (int f = 0; f < mesh.n_facets(); ++f) {
        const auto& bf = mesh.facets[f];
        if (bf.role != BoundaryRole::Wall) continue;
        const Vec2 n = mesh.facet_normal[f];
        for (int q = 0; q < EdgeQuadrature::n; ++q) {
            double aq;
            Vec2 upq;
            facet_values(mesh, alpha, up, f, q, aq, upq);
            const ErosionSensitivity sn = erosion_sensitivities(aq, upq, n, par);
            const double w = EdgeQuadrature::weight[q] * mesh.facet_len[f];
            const double sq = EdgeQuadrature::s[q];
            const double phi[2] = {1.0 - sq, sq};
            for (int k = 0; k < 2; ++k) {
                dJ_dalpha[bf.v[k]] += w * sn.dg_dalpha * phi[k];
                dJ_dup[2 * bf.v[k]] += w * sn.dg_dup.x * phi[k];
                dJ_dup[2 * bf.v[k] + 1] += w * sn.dg_dup.y * phi[k];
            }
        }
    }
}

} // namespace eroopt
