// Volumetric shape derivative of the erosion cost: transformation-identity
// building blocks, the full assembled dual vector (surface + Willmore +
// volume + stabilization-geometry blocks), and oracle helpers.
//
// For P1 fields on affine triangles the transformation-calculus volume terms
// are the exact derivative of the discrete Galerkin forms with respect to
// vertex positions, so pairing them with the discrete adjoints yields the
// exact gradient of the discrete reduced cost (up to solver tolerances) —
// which is what makes the Taylor tests pass at 1e-3 step sizes.
#pragma once

#include "eroopt/adjoint.hpp"

#include <vector>

namespace eroopt {

// First-order transformation derivatives at t = 0 of T_t = id + t V
// (the identities behind every term here):
//   d/dt det DT_t            = div V
//   d/dt (DT_t)^{-T}         = -(DV)^T
//   d/dt tangential Jacobian = div_G V = div V - n^T DV n
//   d/dt (n_t o T_t)         = -(D_G V)^T n,  D_G V = DV (I - n n^T)
struct TransformationDerivatives {
    double det_prime = 0.0;
    Mat2 m_prime;
    double det_gamma_prime = 0.0;
    Vec2 normal_prime;
};

TransformationDerivatives transformation_derivatives(const Mat2& JV, const Vec2& n);

// The volume/surface blocks of the shape-derivative assembly. The first eight
// are the Theorem-style volume blocks (the mutation-sensitivity set); the
// stabilization block carries the geometry dependence of SUPG/PSPG/LSIC and
// is part of the exact discrete derivative but not of the mutation set.
enum class ShapeBlock : unsigned {
    FluidDiv = 0,        // fluid momentum + incompressibility  x div V
    FluidGrad,           // fluid convection/diffusion gradient corrections
    PressureTraceGrad,   // p tr(Dz DV) and z_p tr(Du DV) corrections
    ParticleDiv,         // particle momentum (incl. drag, gravity) x div V
    ParticleGrad,        // particle convection/diffusion corrections
    KDiffusionDiv,       // K^-1 grad u_p : grad z_up  x div V
    TransportDiv,        // transport advection + diffusion  x div V
    TransportGrad,       // transport gradient corrections
    SurfaceErosion,      // wall term  g div_G V - (dg/dn).(D_G V)^T n
    Willmore,            // design-boundary regularization term
    Stabilization,       // SUPG/PSPG/LSIC geometry coupling
    COUNT
};

constexpr unsigned shape_block_bit(ShapeBlock b) {
    return 1u << static_cast<unsigned>(b);
}
constexpr unsigned kMutationBlockCount = 8;  // FluidDiv .. TransportGrad

struct ShapeDerivativeOptions {
    unsigned negate_mask = 0;       // mutation hooks: flip the sign of blocks
    bool include_stabilization = true;
    bool willmore_paper_form = false;  // default: exact discrete gradient
    double c1 = 0.0;                   // frozen Willmore weight
};

// Assemble the dual vector b (2n, interleaved): dJ(V) = sum_dofs b . V.
std::vector<double> shape_derivative(const Mesh& mesh, const PhysicsParams& phys,
                                     const ErosionParams& eros,
                                     const SolverSettings& solver,
                                     const ForwardState& fwd,
                                     const AdjointState& adj,
                                     const ShapeDerivativeOptions& opt);

// dJ(V) for a concrete P1 displacement field.
double shape_directional(const std::vector<double>& b, const std::vector<double>& V);

// Zero all entries of b at non-deformable boundary vertices (admissible-space
// restriction; interior dofs stay).
void restrict_to_admissible(const Mesh& mesh, std::vector<double>& b);

// Oracle: exact shape gradient of J(Omega) = |Omega| (dJ(V) = int div V).
std::vector<double> volume_shape_gradient(const Mesh& mesh);

// Willmore gradients: exact derivative of the discrete turning-angle energy,
// and the paper-form surface expression with P1 arc-length operators.
std::vector<double> willmore_gradient_discrete(const Mesh& mesh, double c1);
std::vector<double> willmore_gradient_paper(const Mesh& mesh, double c1);

// The discrete Willmore energy itself (c1 * sum 1/2 h^2 mu over the design
// vertex set), shared by cost evaluation and the gradient tests.
double willmore_energy(const Mesh& mesh, double c1);

} // namespace eroopt
