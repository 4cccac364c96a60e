// Stationary incompressible Navier-Stokes (dimensionless) on P1/P1 with
// SUPG/PSPG/LSIC stabilization, solved by damped Newton from a Stokes initial
// guess. Coupled dof layout: velocity interleaved in [0, 2n), pressure in
// [2n, 3n).
#pragma once

#include "eroopt/config.hpp"
#include "eroopt/fem.hpp"
#include "eroopt/krylov.hpp"
#include "eroopt/mesh.hpp"
#include "eroopt/params.hpp"

#include <string>
#include <vector>

namespace eroopt {

struct FlowState {
    std::vector<double> u;  // 2n, interleaved
    std::vector<double> p;  // n
};

struct NewtonReport {
    bool converged = false;
    int iterations = 0;
    double residual = 0.0;       // final free-dof residual norm
    double initial_residual = 0.0;
    std::string message;
};

// Thrown when a nonlinear solve fails; the CLI maps it to exit code 3.
struct SolverFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DirichletBC {
    std::vector<int> dofs;
    std::vector<double> values;
};

// Parabolic inflow 6 * mean * s(1-s) along the inward inlet normal, returned
// as a full interleaved 2n vector (zero away from the inlet).
std::vector<double> inflow_profile(const Mesh& mesh, double mean_speed);

// Velocity Dirichlet set for the flow problem: inflow profile + no-slip walls.
DirichletBC flow_dirichlet(const Mesh& mesh, double mean_inflow);

// Stabilization parameter tau = (4 nu / h^2 + 2 U / h)^{-1}.
inline double stab_tau(double nu, double h, double u_stab) {
    return 1.0 / (4.0 * nu / (h * h) + 2.0 * u_stab / h);
}

// Assemble the stabilized NS residual and/or Newton matrix at state (u, p).
// Rows follow the coupled layout; no boundary conditions are applied here.
// include_convection=false gives the (linear) Stokes operator.
void assemble_navier_stokes(const Mesh& mesh, const PhysicsParams& phys,
                            const SolverSettings& solver,
                            const std::vector<double>& u,
                            const std::vector<double>& p,
                            bool include_convection,
                            std::vector<double>* residual, COOBuilder* jacobian);

FlowState solve_stokes(const Mesh& mesh, const PhysicsParams& phys,
                       const SolverSettings& solver);

// Damped Newton (halving line search on the residual norm, minimum damping
// 2^-max_damping_halvings). Throws SolverFailure when not converged.
FlowState solve_navier_stokes(const Mesh& mesh, const PhysicsParams& phys,
                              const SolverSettings& solver,
                              NewtonReport* report = nullptr);

// Net volumetric flux through all facets with the given role (u . n summed).
double boundary_flux(const Mesh& mesh, const std::vector<double>& u,
                     BoundaryRole role);

// Max facet-averaged norm of p n - Re^-1 du/dn over the outflow (natural BC
// residual; a consistency diagnostic used in tests).
double outflow_traction_residual(const Mesh& mesh, const PhysicsParams& phys,
                                 const FlowState& state);

} // namespace eroopt
