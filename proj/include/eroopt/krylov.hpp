// Krylov solvers (CG, restarted GMRES, MINRES) with Jacobi / SSOR / ILU(0)
// preconditioning. All solvers report a convergence record instead of
// throwing: callers decide whether a non-converged solve is fatal.
#pragma once

#include "eroopt/sparse.hpp"

#include <memory>
#include <string>
#include <vector>

namespace eroopt {

enum class KrylovMethod { CG, GMRES, MINRES };
enum class PrecondKind { None, Jacobi, SSOR, ILU0 };

struct LinearSolverConfig {
    KrylovMethod method = KrylovMethod::GMRES;
    PrecondKind precond = PrecondKind::ILU0;
    double rel_tol = 1e-10;
    double abs_tol = 1e-14;
    int max_iter = 5000;
    int restart = 50;  // GMRES Krylov dimension between restarts
};

struct ConvergenceRecord {
    bool converged = false;
    bool breakdown = false;
    int iterations = 0;
    double rel_residual = 0.0;  // final true-residual norm / rhs norm
    std::string message;
};

// Preconditioner interface: z = M^{-1} r.
class Preconditioner {
public:
    virtual ~Preconditioner() = default;
    virtual void apply(const std::vector<double>& r, std::vector<double>& z) const = 0;
};

std::unique_ptr<Preconditioner> make_preconditioner(const CSRMatrix& A,
                                                    PrecondKind kind);

// Solve A x = b starting from the current content of x.
ConvergenceRecord solve_linear(const CSRMatrix& A, const std::vector<double>& b,
                               std::vector<double>& x,
                               const LinearSolverConfig& cfg);

// Same, with a caller-supplied preconditioner (cfg.precond is ignored); used
// where the standard kinds do not apply, e.g. saddle-point systems.
ConvergenceRecord solve_linear(const CSRMatrix& A, const std::vector<double>& b,
                               std::vector<double>& x,
                               const LinearSolverConfig& cfg,
                               const Preconditioner& M);

} // namespace eroopt
