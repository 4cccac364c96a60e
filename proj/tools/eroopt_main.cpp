// Command-line driver: forward solve, Stokes-number sweep, shape
// optimization, and the verification suite. Exit codes: 0 ok, 1 check
// failure, 2 usage/IO error, 3 solver failure.
#include "eroopt/gradient_flow.hpp"
#include "eroopt/io.hpp"
#include "eroopt/optimizer.hpp"
#include "eroopt/pipeline.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <thread>

namespace {

using namespace eroopt;

constexpr int kExitOk = 0;
constexpr int kExitCheckFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitSolver = 3;

void write_state_vtk(const std::string& path, const Mesh& mesh,
                     const ForwardState& fwd) {
    write_vtk(path, mesh,
              {{"velocity", true, &fwd.flow.u},
               {"pressure", false, &fwd.flow.p},
               {"particle_velocity", true, &fwd.up},
               {"volume_fraction", false, &fwd.alpha}});
}

int cmd_forward(const RunConfig& cfg, const std::string& out, bool vtk) {
    const Mesh mesh = build_mesh(cfg.mesh);
    ForwardReport rep;
    const ForwardState fwd = solve_forward(mesh, cfg, cfg.optimizer.c1, &rep);
    std::printf("cost J          = %.10e\n", rep.cost.total);
    std::printf("  erosion term  = %.10e\n", rep.cost.erosion);
    std::printf("  willmore term = %.10e (c1 = %.6e)\n", rep.cost.willmore,
                rep.cost.c1);
    std::printf("impact rate eta = %.6f\n", rep.impact_rate);
    std::printf("integrated E    = %.10e\n", rep.integrated_erosion);
    std::printf("newton iters    = %d (flow), %d (particles)\n",
                rep.flow_newton.iterations, rep.particle_newton.iterations);
    if (vtk) write_state_vtk(out + "/forward.vtk", mesh, fwd);
    return kExitOk;
}

int cmd_sweep(const RunConfig& cfg, const std::string& out) {
    if (cfg.sweep.d_p_list.empty()) {
        std::fprintf(stderr, "sweep: [sweep] d_p list is empty\n");
        return kExitUsage;
    }
    const Mesh mesh = build_mesh(cfg.mesh);
    const int ns = static_cast<int>(cfg.sweep.d_p_list.size());
    struct Row {
        double d_p, stk, eta, e;
        bool failed = false;
        std::string error;
    };
    std::vector<Row> rows(ns);

    std::atomic<int> next{0};
    auto worker = [&]() {
        for (int i = next.fetch_add(1); i < ns; i = next.fetch_add(1)) {
            Row& r = rows[i];
            r.d_p = cfg.sweep.d_p_list[i];
            try {
                SIParams si = cfg.si;
                si.d_p = r.d_p;
                const DimensionlessNumbers dn = derive_dimensionless(si);
                RunConfig species = cfg;
                species.physics.stk = dn.stk;
                species.physics.drag_c = dn.drag_c;
                r.stk = dn.stk;
                ForwardReport rep;
                solve_forward(mesh, species, cfg.optimizer.c1, &rep);
                r.eta = rep.impact_rate;
                r.e = rep.integrated_erosion;
            } catch (const std::exception& ex) {
                r.failed = true;
                r.error = ex.what();
                r.eta = r.e = std::nan("");
            }
        }
    };
    const int nthreads = std::min(env_thread_count(), ns);
    std::vector<std::thread> pool;
    for (int t = 1; t < nthreads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    std::vector<std::vector<double>> csv;
    for (const Row& r : rows) {
        if (r.failed)
            std::fprintf(stderr, "sweep: d_p = %.3e failed: %s\n", r.d_p,
                         r.error.c_str());
        std::printf("d_p = %.3e  Stk = %.4f  eta = %.4f  E = %.6e\n", r.d_p,
                    r.stk, r.eta, r.e);
        csv.push_back({r.d_p, r.stk, r.eta, r.e});
    }
    write_csv(out + "/sweep.csv", "stokes-sweep-v1",
              {"d_p", "stk", "eta", "integrated_erosion"}, csv);
    return kExitOk;
}

int cmd_optimize(const RunConfig& cfg, const std::string& out, bool vtk) {
    const Mesh mesh = build_mesh(cfg.mesh);
    if (vtk) {
        ForwardReport rep;
        const ForwardState fwd = solve_forward(mesh, cfg, cfg.optimizer.c1, &rep);
        write_state_vtk(out + "/initial.vtk", mesh, fwd);
    }
    const OptimizationResult res = optimize_shape(mesh, cfg);
    write_history_csv(out + "/history.csv", res.history);
    for (const auto& h : res.history)
        std::printf("iter %3d  J = %.10e  |G| = %.4e  step = %.4e\n", h.iter,
                    h.cost, h.grad_norm, h.step);
    std::printf("stopped: %s\n", res.stop_reason.c_str());
    if (vtk) {
        ForwardReport rep;
        const ForwardState fwd =
            solve_forward(res.mesh, cfg, res.c1, &rep);
        write_state_vtk(out + "/final.vtk", res.mesh, fwd);
    }
    return kExitOk;
}

// ---- verification suite -----------------------------------------------------

struct CheckTally {
    int run = 0, failed = 0;
    void report(const char* name, bool ok, const char* detail = "") {
        ++run;
        if (!ok) ++failed;
        std::printf("[%s] %s%s%s\n", ok ? "PASS" : "FAIL", name,
                    *detail ? ": " : "", detail);
    }
};

// Lemma-style transformation identities against centered finite differences
// of the algebraic maps t -> det(I + t JV), (I + t JV)^-T, tangential
// Jacobian and transported normal.
void verify_lemma1(CheckTally& tally) {
    std::mt19937 rng(91);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    const double h = 1e-6;
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        Mat2 JV;
        JV(0, 0) = U(rng);
        JV(0, 1) = U(rng);
        JV(1, 0) = U(rng);
        JV(1, 1) = U(rng);
        const double ang = 3.14159 * U(rng);
        const Vec2 n(std::cos(ang), std::sin(ang));
        const TransformationDerivatives d = transformation_derivatives(JV, n);

        auto at = [&](double t) {
            const Mat2 DT = Mat2::identity() + t * JV;
            const Mat2 M = transpose(inverse(DT));
            const Vec2 mn = M * n;
            struct {
                double det, detg;
                Mat2 m;
                Vec2 nt;
            } r{det(DT), det(DT) * norm(mn), M, (1.0 / norm(mn)) * mn};
            return r;
        };
        const auto p = at(h), m = at(-h);
        const double inv2h = 0.5 / h;
        auto rel = [](double got, double want) {
            return std::abs(got - want) / std::max(1.0, std::abs(want));
        };
        worst = std::max(worst, rel((p.det - m.det) * inv2h, d.det_prime));
        worst = std::max(worst, rel((p.detg - m.detg) * inv2h, d.det_gamma_prime));
        const Mat2 fdm = inv2h * (p.m - m.m);
        worst = std::max(worst, frobenius_norm(fdm - d.m_prime) /
                                    std::max(1.0, frobenius_norm(d.m_prime)));
        const Vec2 ntd = inv2h * (p.nt - m.nt);
        worst = std::max(worst, norm(ntd - d.normal_prime));
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "max deviation %.3e", worst);
    tally.report("lemma1 transformation identities", worst <= 1e-6, buf);
}

void verify_sensitivities(CheckTally& tally, const RunConfig& cfg) {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    const double h = 1e-6;
    double worst_e = 0.0, worst_d = 0.0, worst_anti = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const double alpha = 0.2 + 0.8 * std::abs(U(rng));
        const double ang = 3.14159 * U(rng);
        const Vec2 n(std::cos(ang), std::sin(ang));
        // bias toward impacts, away from the chi ramp and the sigma clamp
        Vec2 up = Vec2(U(rng), U(rng)) + 1.5 * n;
        if (std::abs(dot(up, n)) < 10 * cfg.erosion.eps_n) up += 0.1 * n;
        const ErosionSensitivity es = erosion_sensitivities(alpha, up, n, cfg.erosion);
        auto rel = [](double got, double want) {
            return std::abs(got - want) / std::max(1e-12, std::abs(want));
        };
        const double fd_a =
            (erosion_rate(alpha + h, up, n, cfg.erosion) -
             erosion_rate(alpha - h, up, n, cfg.erosion)) /
            (2 * h);
        worst_e = std::max(worst_e, rel(es.de_dalpha, fd_a));
        for (int k = 0; k < 2; ++k) {
            Vec2 dup = up, dum = up;
            (k == 0 ? dup.x : dup.y) += h;
            (k == 0 ? dum.x : dum.y) -= h;
            const double fd = (erosion_rate(alpha, dup, n, cfg.erosion) -
                               erosion_rate(alpha, dum, n, cfg.erosion)) /
                              (2 * h);
            worst_e = std::max(worst_e, rel(k == 0 ? es.de_dup.x : es.de_dup.y, fd));
            Vec2 np = n, nm = n;
            (k == 0 ? np.x : np.y) += h;
            (k == 0 ? nm.x : nm.y) -= h;
            const double fdn = (erosion_rate(alpha, up, np, cfg.erosion) -
                                erosion_rate(alpha, up, nm, cfg.erosion)) /
                               (2 * h);
            worst_e = std::max(worst_e, rel(k == 0 ? es.de_dn.x : es.de_dn.y, fdn));
        }

        // drag sensitivities of d_SN(slip) slip . z
        const double drag_c = 50.0 + 50.0 * std::abs(U(rng));
        const Vec2 uf(U(rng), U(rng));
        const Vec2 zq(U(rng), U(rng));
        const Vec2 up2(uf.x + 0.5 + std::abs(U(rng)), uf.y + U(rng));
        auto dval = [&](const Vec2& f, const Vec2& p) {
            const Vec2 slip = p - f;
            const double s = std::max(norm(slip), 1e-10);
            return drag_coefficient(particle_reynolds(drag_c, s)) * dot(slip, zq);
        };
        const Vec2 guf = drag_sensitivity_uf(uf, up2, zq, drag_c);
        const Vec2 gup = drag_sensitivity_up(uf, up2, zq, drag_c);
        worst_anti = std::max({worst_anti, std::abs(guf.x + gup.x),
                               std::abs(guf.y + gup.y)});
        for (int k = 0; k < 2; ++k) {
            Vec2 fp = uf, fm = uf;
            (k == 0 ? fp.x : fp.y) += h;
            (k == 0 ? fm.x : fm.y) -= h;
            const double fd = (dval(fp, up2) - dval(fm, up2)) / (2 * h);
            worst_d = std::max(worst_d, rel(k == 0 ? guf.x : guf.y, fd));
        }
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "erosion %.3e, drag %.3e", worst_e, worst_d);
    tally.report("erosion/drag sensitivity FD oracle",
                 worst_e <= 1e-4 && worst_d <= 1e-4, buf);
    std::snprintf(buf, sizeof buf, "max |duf + dup| = %.3e", worst_anti);
    tally.report("drag antisymmetry identity", worst_anti <= 1e-12, buf);
}

void verify_adjoint_transpose(CheckTally& tally, const RunConfig& cfg) {
    MeshSpec spec;
    spec.kind = "rectangle";
    spec.n_along = 6;
    spec.n_across = 3;
    const Mesh mesh = build_mesh(spec);
    const ForwardState fwd = solve_forward(mesh, cfg, cfg.optimizer.c1, nullptr);
    double worst = 0.0;
    auto check = [&](const CSRMatrix& fwdm, const CSRMatrix& adjm) {
        const CSRMatrix ft = fwdm.transposed();
        for (int i = 0; i < ft.n_rows; ++i)
            for (int k = ft.row_ptr[i]; k < ft.row_ptr[i + 1]; ++k)
                worst = std::max(worst, std::abs(ft.val[k] -
                                                 adjm.coeff(i, ft.col_idx[k])));
    };
    check(forward_transport_matrix(mesh, cfg.physics, cfg.solver, fwd),
          adjoint_transport_matrix(mesh, cfg.physics, cfg.solver, fwd));
    check(forward_particle_matrix(mesh, cfg.physics, cfg.solver, fwd),
          adjoint_particle_matrix(mesh, cfg.physics, cfg.solver, fwd));
    check(forward_fluid_matrix(mesh, cfg.physics, cfg.solver, fwd),
          adjoint_fluid_matrix(mesh, cfg.physics, cfg.solver, fwd));
    char buf[64];
    std::snprintf(buf, sizeof buf, "max entry deviation %.3e", worst);
    tally.report("adjoint transpose oracle", worst <= 1e-10, buf);
}

void verify_taylor(CheckTally& tally, const RunConfig& cfg) {
    const Mesh mesh = build_mesh(cfg.mesh);
    const std::vector<double> V = random_admissible_field(mesh, 3);
    const TaylorResult res =
        taylor_test(mesh, cfg, V, default_taylor_steps(), nullptr);
    char buf[96];
    std::snprintf(buf, sizeof buf, "slope %.3f%s", res.slope,
                  res.partition_changed ? " (partition changed!)" : "");
    tally.report("taylor remainder slope in [1.8, 2.2]",
                 res.slope >= 1.8 && res.slope <= 2.2 && !res.partition_changed,
                 buf);
}

int cmd_verify(const RunConfig& cfg, const std::vector<std::string>& suites) {
    CheckTally tally;
    for (const std::string& s : suites) {
        if (s == "lemma1") verify_lemma1(tally);
        else if (s == "sensitivities") verify_sensitivities(tally, cfg);
        else if (s == "adjoint") verify_adjoint_transpose(tally, cfg);
        else if (s == "taylor") verify_taylor(tally, cfg);
        else {
            std::fprintf(stderr, "verify: unknown suite '%s'\n", s.c_str());
            return kExitUsage;
        }
    }
    if (tally.run == 0) {
        std::printf("warning: no checks selected\n");
        return kExitOk;
    }
    std::printf("%d/%d checks passed\n", tally.run - tally.failed, tally.run);
    return tally.failed == 0 ? kExitOk : kExitCheckFailure;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"particle-erosion shape optimization toolkit"};
    app.require_subcommand(1);

    std::string config_path, out_dir = ".";
    bool vtk = false;
    std::vector<std::string> suites = {"lemma1", "sensitivities", "adjoint",
                                       "taylor"};
    for (auto* sub : {app.add_subcommand("forward", "solve the forward chain"),
                      app.add_subcommand("sweep", "Stokes-number species sweep"),
                      app.add_subcommand("optimize", "run the shape optimizer"),
                      app.add_subcommand("verify", "run verification checks")}) {
        sub->add_option("--config", config_path, "config file")->required();
        sub->add_option("--out", out_dir, "output directory");
        sub->add_flag("--vtk", vtk, "write VTK snapshots");
    }
    app.get_subcommand("verify")->add_option(
        "--suite", suites,
        "subset of {lemma1,sensitivities,adjoint,taylor}; 'none' disables all");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        const eroopt::RunConfig cfg = eroopt::load_config(config_path);
        std::error_code ec;
        std::filesystem::create_directories(out_dir, ec);
        if (ec) {
            std::fprintf(stderr, "cannot create output directory %s: %s\n",
                         out_dir.c_str(), ec.message().c_str());
            return kExitUsage;
        }
        if (app.got_subcommand("forward")) return cmd_forward(cfg, out_dir, vtk);
        if (app.got_subcommand("sweep")) return cmd_sweep(cfg, out_dir);
        if (app.got_subcommand("optimize")) return cmd_optimize(cfg, out_dir, vtk);
        if (suites.size() == 1 && suites[0] == "none") suites.clear();
        return cmd_verify(cfg, suites);
    } catch (const eroopt::SolverFailure& ex) {
        std::fprintf(stderr, "solver failure: %s\n", ex.what());
        return kExitSolver;
    } catch (const std::exception& ex) {
        std::fprintf(stderr, "error: %s\n", ex.what());
        return kExitUsage;
    }
}
