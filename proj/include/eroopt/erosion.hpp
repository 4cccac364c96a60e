// Oka-type erosion model on the wall boundary, its analytic sensitivities
// with respect to (alpha, u_p, n), and the shape cost functional
// J = int_wall g ds + c1 * int_design 1/2 h^2 ds with g = e^2 / 2.
#pragma once

#include "eroopt/mesh.hpp"
#include "eroopt/params.hpp"

#include <vector>

namespace eroopt {

// Impact angle gamma = arcsin(u_p.n / |u_p|), clamped to [0, pi/2]; negative
// normal velocities are handled upstream by the C^1 impact indicator.
double impact_angle(const Vec2& up, const Vec2& n);

// Angle dependency zeta(gamma) = (sin gamma)^n1 (1 + Hv (1 - sin gamma))^n2.
double angle_factor(double gamma, const ErosionParams& par);

// Pointwise erosion rate e = chi(u_p.n) alpha (u_p.n) |u_p|^m zeta(gamma)
// with chi the C^1 smoothstep ramp on [-eps_n, eps_n].
double erosion_rate(double alpha, const Vec2& up, const Vec2& n,
                    const ErosionParams& par);

struct ErosionSensitivity {
    double e = 0.0, g = 0.0;     // rate and surface density g = e^2/2
    double de_dalpha = 0.0;
    Vec2 de_dup, de_dn;
    double dg_dalpha = 0.0;      // = e * de_dalpha, etc.
    Vec2 dg_dup, dg_dn;
};

ErosionSensitivity erosion_sensitivities(double alpha, const Vec2& up,
                                         const Vec2& n, const ErosionParams& par);

// d gamma / d n = u_p / (|u_p| cos gamma) with cos gamma floored at 1e-6.
Vec2 impact_angle_normal_gradient(const Vec2& up, const Vec2& n);

struct CostBreakdown {
    double total = 0.0;
    double erosion = 0.0;   // int_wall g ds
    double willmore = 0.0;  // c1 * sum 1/2 h^2 mu over design vertices
    double c1 = 0.0;
};

// Evaluate the cost on the current geometry. c1 < 0 applies the auto-rule
// c1 = 0.01 * erosion part / (unweighted Willmore sum) on this geometry.
CostBreakdown cost_functional(const Mesh& mesh, const std::vector<double>& alpha,
                              const std::vector<double>& up,
                              const ErosionParams& par, double c1);

// Integrated erosion E = int_wall e ds (reporting quantity).
double integrated_erosion(const Mesh& mesh, const std::vector<double>& alpha,
                          const std::vector<double>& up, const ErosionParams& par);

// Impact rate eta = 1 - (outflow particle flux) / (inflow particle flux),
// fluxes weighted by alpha.
double impact_rate(const Mesh& mesh, const std::vector<double>& alpha,
                   const std::vector<double>& up);

// Dual vectors dJ/d(alpha dofs) (size n) and dJ/d(u_p dofs) (size 2n) of the
// erosion surface integral (Willmore does not depend on the state).
void erosion_cost_gradients(const Mesh& mesh, const std::vector<double>& alpha,
                            const std::vector<double>& up,
                            const ErosionParams& par,
                            std::vector<double>& dJ_dalpha,
                            std::vector<double>& dJ_dup);

} // namespace eroopt
