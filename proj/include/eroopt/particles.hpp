// Eulerian particle phase: momentum equation with Schiller-Naumann drag and
// viscosity ramping, inflow/outflow classification of the boundary, and the
// volume-fraction transport equation.
#pragma once

#include "eroopt/flow.hpp"

#include <cstdint>
#include <vector>

namespace eroopt {

// Particle Reynolds number for a dimensionless slip speed |u_p - u_f|:
// Re_p = drag_c * slip with drag_c = rho_f d_p u_ref / mu_f (the SI-unit
// conversion folded into one constant).
inline double particle_reynolds(double drag_c, double slip) {
    return drag_c * slip;
}

// Schiller-Naumann drag correction d_SN = 1 + 0.15 Re_p^0.687.
inline double drag_coefficient(double re_p) {
    return 1.0 + 0.15 * std::pow(re_p, 0.687);
}

// d(d_SN)/d(slip vector w): 0.10305 drag_c^0.687 |w|^-1.313 w
// (0.10305 = 0.15 * 0.687). The slip speed is clamped at 1e-10.
Vec2 drag_coefficient_gradient(double drag_c, const Vec2& slip);

// Assemble the particle momentum residual / Newton matrix / d(residual)/d(u_f)
// coupling block at particle state up, fluid state uf and effective inverse
// permeability keff_inv (ramp level; final value 1/K).
void assemble_particle_momentum(const Mesh& mesh, const PhysicsParams& phys,
                                const SolverSettings& solver,
                                const std::vector<double>& up,
                                const std::vector<double>& uf, double keff_inv,
                                std::vector<double>* residual,
                                COOBuilder* jac_up, COOBuilder* jac_uf);

// Damped-Newton solve with geometric viscosity ramping (warm-started levels
// from solver.ramp_start down to 1/K). Throws SolverFailure.
std::vector<double> solve_particle_velocity(const Mesh& mesh,
                                            const PhysicsParams& phys,
                                            const SolverSettings& solver,
                                            const std::vector<double>& uf,
                                            NewtonReport* report = nullptr);

// Frozen inflow/outflow partition of the boundary: a facet belongs to
// Gamma^- iff u_p . n <= 0 at its midpoint (ties are Gamma^-).
struct BoundaryPartition {
    std::vector<char> is_minus;  // per facet
    std::uint64_t signature = 0;  // for detecting reclassification
};

BoundaryPartition classify_boundary(const Mesh& mesh,
                                    const std::vector<double>& up);

// Volume-fraction Dirichlet set: alpha_in on inflow vertices, 0 on vertices
// of Gamma^- \ Gamma_in facets (inflow wins at junctions).
DirichletBC volume_fraction_dirichlet(const Mesh& mesh, const PhysicsParams& phys,
                                      const BoundaryPartition& part);

// Assemble the transport operator (rows already in divergence + SUPG form)
// and optionally the coupling block d(residual)/d(u_p) at a given alpha.
void assemble_transport(const Mesh& mesh, const PhysicsParams& phys,
                        const SolverSettings& solver,
                        const std::vector<double>& up,
                        const std::vector<double>* alpha, COOBuilder* matrix,
                        COOBuilder* jac_up);

std::vector<double> solve_volume_fraction(const Mesh& mesh,
                                          const PhysicsParams& phys,
                                          const SolverSettings& solver,
                                          const std::vector<double>& up,
                                          const BoundaryPartition& part);

} // namespace eroopt
