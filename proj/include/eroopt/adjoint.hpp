// Adjoint system: three decoupled solves in reverse dependency order
// (transport -> particle velocity -> fluid). Every adjoint matrix is the
// transpose of the frozen forward Newton linearization with the identical
// symmetric Dirichlet elimination, so the transpose oracle holds entrywise
// and the shape derivative is the exact derivative of the discrete cost.
#pragma once

#include "eroopt/erosion.hpp"
#include "eroopt/particles.hpp"

#include <vector>

namespace eroopt {

struct ForwardState {
    FlowState flow;                // u_f (2n), p (n)
    std::vector<double> up;        // 2n
    std::vector<double> alpha;     // n
    BoundaryPartition partition;   // frozen Gamma^- classification
};

struct AdjointState {
    std::vector<double> z_alpha;   // n
    std::vector<double> z_up;      // 2n
    std::vector<double> z_uf;      // 2n
    std::vector<double> z_p;       // n
    bool transport_done = false;
    bool particle_done = false;
    bool fluid_done = false;
};

// Pointwise drag-adjoint sensitivities of
// dtilde := d_SN(u_f, u_p) (u_p - u_f) . z_up.
// Returns d(dtilde)/d(u_f); d(dtilde)/d(u_p) is its exact negative.
Vec2 drag_sensitivity_uf(const Vec2& uf, const Vec2& up, const Vec2& zup,
                         double drag_c);
Vec2 drag_sensitivity_up(const Vec2& uf, const Vec2& up, const Vec2& zup,
                         double drag_c);

// Stage solves. Each enforces that its predecessor ran (std::logic_error).
void solve_adjoint_transport(const Mesh& mesh, const PhysicsParams& phys,
                             const ErosionParams& eros,
                             const SolverSettings& solver,
                             const ForwardState& fwd, AdjointState& adj);
void solve_adjoint_particle(const Mesh& mesh, const PhysicsParams& phys,
                            const ErosionParams& eros,
                            const SolverSettings& solver,
                            const ForwardState& fwd, AdjointState& adj);
void solve_adjoint_fluid(const Mesh& mesh, const PhysicsParams& phys,
                         const SolverSettings& solver, const ForwardState& fwd,
                         AdjointState& adj);

AdjointState solve_adjoint(const Mesh& mesh, const PhysicsParams& phys,
                           const ErosionParams& eros,
                           const SolverSettings& solver,
                           const ForwardState& fwd);

// Eliminated forward linearizations (oracle surface for the transpose check).
CSRMatrix forward_transport_matrix(const Mesh& mesh, const PhysicsParams& phys,
                                   const SolverSettings& solver,
                                   const ForwardState& fwd);
CSRMatrix forward_particle_matrix(const Mesh& mesh, const PhysicsParams& phys,
                                  const SolverSettings& solver,
                                  const ForwardState& fwd);
CSRMatrix forward_fluid_matrix(const Mesh& mesh, const PhysicsParams& phys,
                               const SolverSettings& solver,
                               const ForwardState& fwd);
// The matrices actually factored by the adjoint solves.
CSRMatrix adjoint_transport_matrix(const Mesh& mesh, const PhysicsParams& phys,
                                   const SolverSettings& solver,
                                   const ForwardState& fwd);
CSRMatrix adjoint_particle_matrix(const Mesh& mesh, const PhysicsParams& phys,
                                  const SolverSettings& solver,
                                  const ForwardState& fwd);
CSRMatrix adjoint_fluid_matrix(const Mesh& mesh, const PhysicsParams& phys,
                               const SolverSettings& solver,
                               const ForwardState& fwd);

} // namespace eroopt
