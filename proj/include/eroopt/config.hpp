// Run configuration: flat `key = value` file with [section] headers.
// Unknown keys are hard errors (typo protection); everything has a default.
#pragma once

#include "eroopt/krylov.hpp"
#include "eroopt/mesh.hpp"
#include "eroopt/params.hpp"

#include <string>
#include <vector>

namespace eroopt {

struct MeshSpec {
    std::string kind = "bend";  // bend | rectangle | gmsh
    std::string file;           // for kind = gmsh
    int n_along = 48, n_across = 12;
    double width = 1.0;
    double radius = 2.86;       // bend centerline radius (r_b / d_t)
    double inlet_len = 1.0, outlet_len = 2.0;
    double lx = 4.0, ly = 1.0;  // rectangle
    bool deformable_walls = false;  // rectangle only
    double margin = 0.5;
};

struct SolverSettings {
    double newton_rel_tol = 1e-10;
    double newton_abs_tol = 1e-12;
    int newton_max_iter = 40;
    int max_damping_halvings = 10;  // minimum damping factor 2^-10
    double linear_rel_tol = 1e-12;
    int linear_max_iter = 20000;
    int gmres_restart = 50;
    PrecondKind precond = PrecondKind::ILU0;
    double u_stab = 2.0;            // fixed reference speed in tau
    double ramp_start = 1e-2;       // particle viscosity ramp start
    double ramp_factor = 10.0;      // geometric reduction per level
    bool export_matrices = false;   // MatrixMarket debug dumps
    std::string debug_dir = ".";
};

struct OptimizerSettings {
    int max_iters = 30;
    double t0 = 1.0;                 // initial trial step
    double c_armijo = 1e-4;
    double ls_shrink = 0.5;
    int ls_max_evals = 25;
    double mu_min = 1.0, mu_max = 100.0;
    QualityLimits quality;           // det in [0.5,2], ||t DW||_F <= 0.3
    double grad_tol = 0.0;           // stop when ||G||_Gamma_d below this
    bool saddle_minres = true;       // false: unpreconditioned CG fallback
    double saddle_tol = 1e-12;
    double c1 = -1.0;                // Willmore weight; < 0 means auto-rule
};

struct SweepSettings {
    std::vector<double> d_p_list;    // particle diameters [m]
};

struct RunConfig {
    MeshSpec mesh;
    PhysicsParams physics;
    ErosionParams erosion;
    SolverSettings solver;
    OptimizerSettings optimizer;
    SweepSettings sweep;
    SIParams si;        // used by sweep / dimensionless derivation
    bool use_si = false;  // derive re/fr/stk/drag_c from [si] at load time
};

// Parse the config file; throws std::runtime_error with file/line context on
// malformed input or unknown keys.
RunConfig load_config(const std::string& path);

// Build the mesh described by cfg.mesh (generator or gmsh file).
Mesh build_mesh(const MeshSpec& spec);

// Number of worker threads for embarrassingly parallel drivers (sweep):
// EROOPT_THREADS, default 1.
int env_thread_count();

} // namespace eroopt
