#include "eroopt/config.hpp"

#include "eroopt/io.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace eroopt {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    size_t b = s.find_last_not_of(" \t\r");
    return (a == std::string::npos) ? "" : s.substr(a, b - a + 1);
}

[[noreturn]] void fail(const std::string& path, int line, const std::string& msg) {
    throw std::runtime_error(path + ":" + std::to_string(line) + ": " + msg);
}

double to_double(const std::string& v, const std::string& path, int line) {
    try {
        size_t pos = 0;
        double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (...) {
        fail(path, line, "expected a number, got '" + v + "'");
    }
}

int to_int(const std::string& v, const std::string& path, int line) {
    const double d = to_double(v, path, line);
    return static_cast<int>(d);
}

bool to_bool(const std::string& v, const std::string& path, int line) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    fail(path, line, "expected a boolean, got '" + v + "'");
}

PrecondKind to_precond(const std::string& v, const std::string& path, int line) {
    if (v == "none") return PrecondKind::None;
    if (v == "jacobi") return PrecondKind::Jacobi;
    if (v == "ssor") return PrecondKind::SSOR;
    if (v == "ilu0") return PrecondKind::ILU0;
    fail(path, line, "unknown preconditioner '" + v + "'");
}

std::vector<double> to_list(const std::string& v, const std::string& path, int line) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(to_double(item, path, line));
    }
    return out;
}

} // namespace

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_config: cannot open " + path);

    RunConfig cfg;
    std::string section, line;
    int lineno = 0;
    bool si_seen = false;

    while (std::getline(in, line)) {
        ++lineno;
        const size_t hash = line.find_first_of("#;");
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') fail(path, lineno, "malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const size_t eq = line.find('=');
        if (eq == std::string::npos) fail(path, lineno, "expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));

        auto unknown = [&]() { fail(path, lineno, "unknown key '" + key + "' in section [" + section + "]"); };

        if (section == "mesh") {
            if (key == "kind") cfg.mesh.kind = val;
            else if (key == "file") cfg.mesh.file = val;
            else if (key == "n_along") cfg.mesh.n_along = to_int(val, path, lineno);
            else if (key == "n_across") cfg.mesh.n_across = to_int(val, path, lineno);
            else if (key == "width") cfg.mesh.width = to_double(val, path, lineno);
            else if (key == "radius") cfg.mesh.radius = to_double(val, path, lineno);
            else if (key == "inlet_len") cfg.mesh.inlet_len = to_double(val, path, lineno);
            else if (key == "outlet_len") cfg.mesh.outlet_len = to_double(val, path, lineno);
            else if (key == "lx") cfg.mesh.lx = to_double(val, path, lineno);
            else if (key == "ly") cfg.mesh.ly = to_double(val, path, lineno);
            else if (key == "deformable_walls") cfg.mesh.deformable_walls = to_bool(val, path, lineno);
            else if (key == "margin") cfg.mesh.margin = to_double(val, path, lineno);
            else unknown();
        } else if (section == "physics") {
            if (key == "re") cfg.physics.re = to_double(val, path, lineno);
            else if (key == "fr") cfg.physics.fr = to_double(val, path, lineno);
            else if (key == "stk") cfg.physics.stk = to_double(val, path, lineno);
            else if (key == "k") cfg.physics.k_perm = to_double(val, path, lineno);
            else if (key == "pe") cfg.physics.pe = to_double(val, path, lineno);
            else if (key == "drag_c") cfg.physics.drag_c = to_double(val, path, lineno);
            else if (key == "alpha_in") cfg.physics.alpha_in = to_double(val, path, lineno);
            else if (key == "mean_inflow") cfg.physics.mean_inflow = to_double(val, path, lineno);
            else if (key == "g_dir_x") cfg.physics.g_dir_x = to_double(val, path, lineno);
            else if (key == "g_dir_y") cfg.physics.g_dir_y = to_double(val, path, lineno);
            else unknown();
        } else if (section == "si") {
            si_seen = true;
            if (key == "d_t") cfg.si.d_t = to_double(val, path, lineno);
            else if (key == "r_b") cfg.si.r_b = to_double(val, path, lineno);
            else if (key == "rho_f") cfg.si.rho_f = to_double(val, path, lineno);
            else if (key == "mu_f") cfg.si.mu_f = to_double(val, path, lineno);
            else if (key == "u_mean") cfg.si.u_mean = to_double(val, path, lineno);
            else if (key == "rho_p") cfg.si.rho_p = to_double(val, path, lineno);
            else if (key == "d_p") cfg.si.d_p = to_double(val, path, lineno);
            else if (key == "gravity") cfg.si.gravity = to_double(val, path, lineno);
            else if (key == "nominal_re") cfg.si.nominal_re = to_double(val, path, lineno);
            else if (key == "derive") cfg.use_si = to_bool(val, path, lineno);
            else unknown();
        } else if (section == "erosion") {
            if (key == "m") cfg.erosion.m = to_double(val, path, lineno);
            else if (key == "hv") cfg.erosion.hv = to_double(val, path, lineno);
            else if (key == "n1") cfg.erosion.n1 = to_double(val, path, lineno);
            else if (key == "n2") cfg.erosion.n2 = to_double(val, path, lineno);
            else if (key == "eps_n") cfg.erosion.eps_n = to_double(val, path, lineno);
            else if (key == "c1") cfg.optimizer.c1 = to_double(val, path, lineno);
            else unknown();
        } else if (section == "solver") {
            if (key == "newton_rel_tol") cfg.solver.newton_rel_tol = to_double(val, path, lineno);
            else if (key == "newton_abs_tol") cfg.solver.newton_abs_tol = to_double(val, path, lineno);
            else if (key == "newton_max_iter") cfg.solver.newton_max_iter = to_int(val, path, lineno);
            else if (key == "linear_rel_tol") cfg.solver.linear_rel_tol = to_double(val, path, lineno);
            else if (key == "linear_max_iter") cfg.solver.linear_max_iter = to_int(val, path, lineno);
            else if (key == "gmres_restart") cfg.solver.gmres_restart = to_int(val, path, lineno);
            else if (key == "precond") cfg.solver.precond = to_precond(val, path, lineno);
            else if (key == "u_stab") cfg.solver.u_stab = to_double(val, path, lineno);
            else if (key == "ramp_start") cfg.solver.ramp_start = to_double(val, path, lineno);
            else if (key == "ramp_factor") cfg.solver.ramp_factor = to_double(val, path, lineno);
            else if (key == "export_matrices") cfg.solver.export_matrices = to_bool(val, path, lineno);
            else if (key == "debug_dir") cfg.solver.debug_dir = val;
            else unknown();
        } else if (section == "optimizer") {
            if (key == "max_iters") cfg.optimizer.max_iters = to_int(val, path, lineno);
            else if (key == "t0") cfg.optimizer.t0 = to_double(val, path, lineno);
            else if (key == "c_armijo") cfg.optimizer.c_armijo = to_double(val, path, lineno);
            else if (key == "ls_shrink") cfg.optimizer.ls_shrink = to_double(val, path, lineno);
            else if (key == "ls_max_evals") cfg.optimizer.ls_max_evals = to_int(val, path, lineno);
            else if (key == "mu_min") cfg.optimizer.mu_min = to_double(val, path, lineno);
            else if (key == "mu_max") cfg.optimizer.mu_max = to_double(val, path, lineno);
            else if (key == "det_lo") cfg.optimizer.quality.det_lo = to_double(val, path, lineno);
            else if (key == "det_hi") cfg.optimizer.quality.det_hi = to_double(val, path, lineno);
            else if (key == "frob_cap") cfg.optimizer.quality.frob_cap = to_double(val, path, lineno);
            else if (key == "grad_tol") cfg.optimizer.grad_tol = to_double(val, path, lineno);
            else if (key == "saddle_minres") cfg.optimizer.saddle_minres = to_bool(val, path, lineno);
            else if (key == "saddle_tol") cfg.optimizer.saddle_tol = to_double(val, path, lineno);
            else unknown();
        } else if (section == "sweep") {
            if (key == "d_p_list") cfg.sweep.d_p_list = to_list(val, path, lineno);
            else unknown();
        } else {
            fail(path, lineno, "unknown section [" + section + "]");
        }
    }

    if (cfg.use_si && si_seen) {
        const DimensionlessNumbers d = derive_dimensionless(cfg.si);
        cfg.physics.re = d.re;
        cfg.physics.fr = d.fr;
        cfg.physics.stk = d.stk;
        cfg.physics.drag_c = d.drag_c;
    }
    return cfg;
}

Mesh build_mesh(const MeshSpec& spec) {
    if (spec.kind == "bend")
        return make_bend_channel(spec.n_along, spec.n_across, spec.width,
                                 spec.radius, spec.inlet_len, spec.outlet_len);
    if (spec.kind == "rectangle")
        return make_rectangle_channel(spec.n_along, spec.n_across, spec.lx,
                                      spec.ly, spec.deformable_walls, spec.margin);
    if (spec.kind == "gmsh") return load_gmsh(spec.file);
    throw std::runtime_error("build_mesh: unknown mesh kind '" + spec.kind + "'");
}

int env_thread_count() {
    const char* env = std::getenv("EROOPT_THREADS");
    if (!env) return 1;
    const int n = std::atoi(env);
    return n > 0 ? n : 1;
}

} // namespace eroopt
