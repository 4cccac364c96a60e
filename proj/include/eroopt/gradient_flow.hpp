// Elasticity-projected descent direction: harmonic extension of the Lame
// coefficient, H1-elasticity Riesz representation of the shape gradient, and
// the tangential saddle correction that removes sliding components on the
// design boundary without touching normal movement.
#pragma once

#include "eroopt/config.hpp"
#include "eroopt/flow.hpp"
#include "eroopt/krylov.hpp"
#include "eroopt/mesh.hpp"

#include <vector>

namespace eroopt {

// Scalar Laplace solve with Dirichlet data (CG + SSOR).
std::vector<double> harmonic_scalar(const Mesh& mesh, const DirichletBC& bc);

// Harmonic extension of the stiffening coefficient mu*: mu_max on deformable
// boundary vertices, mu_min on the remaining boundary. The elasticity form
// uses mu = sqrt(mu*).
std::vector<double> lame_coefficient(const Mesh& mesh, double mu_min, double mu_max);

// Riesz representative: solve A(G, Theta) = b(Theta) with A the eps-eps
// elasticity form (mu = sqrt(mu*)) and G = 0 on non-deformable boundary
// vertices. b is the shape-derivative dual vector (2n).
std::vector<double> project_gradient(const Mesh& mesh,
                                     const std::vector<double>& mu_star,
                                     const std::vector<double>& b,
                                     const OptimizerSettings& opt,
                                     ConvergenceRecord* record = nullptr);

// A-orthogonal projection Pi of G onto the vertex-lumped zero-normal-trace
// space on the design boundary: Pi . n_v = 0 at every design vertex. The
// corrected direction is G - Pi. saddle_minres selects the assembled
// KKT/MINRES path; otherwise a null-space CG reduction is used (both satisfy
// the constraint far below the acceptance threshold).
std::vector<double> correct_gradient(const Mesh& mesh,
                                     const std::vector<double>& mu_star,
                                     const std::vector<double>& G,
                                     const OptimizerSettings& opt,
                                     ConvergenceRecord* record = nullptr);

// Trapezoidal L2 norm of a vertex field restricted to the design boundary.
double design_boundary_norm(const Mesh& mesh, const std::vector<double>& G);

// Lumped design-boundary norm of the normal component G . n_v (used by the
// tangentiality check of the correction).
double design_normal_norm(const Mesh& mesh, const std::vector<double>& G);

} // namespace eroopt
