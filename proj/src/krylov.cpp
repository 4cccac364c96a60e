#include "eroopt/krylov.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace eroopt {

namespace {

double dot_v(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}
double norm_v(const std::vector<double>& a) { return std::sqrt(dot_v(a, a)); }
void axpy(double a, const std::vector<double>& x, std::vector<double>& y) {
    for (size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

class IdentityPrecond : public Preconditioner {
public:
    void apply(const std::vector<double>& r, std::vector<double>& z) const override {
        z = r;
    }
};

class JacobiPrecond : public Preconditioner {
public:
    explicit JacobiPrecond(const CSRMatrix& A) : inv_diag_(A.n_rows, 1.0) {
        for (int r = 0; r < A.n_rows; ++r) {
            const double d = A.coeff(r, r);
            inv_diag_[r] = (d != 0.0) ? 1.0 / d : 1.0;
        }
    }
    void apply(const std::vector<double>& r, std::vector<double>& z) const override {
        z.resize(r.size());
        for (size_t i = 0; i < r.size(); ++i) z[i] = r[i] * inv_diag_[i];
    }

private:
    std::vector<double> inv_diag_;
};

// Symmetric SOR with omega = 1 (symmetric Gauss-Seidel):
// M = (D + L) D^{-1} (D + U).
class SSORPrecond : public Preconditioner {
public:
    explicit SSORPrecond(const CSRMatrix& A) : A_(A), diag_(A.n_rows, 1.0) {
        for (int r = 0; r < A.n_rows; ++r) {
            const double d = A.coeff(r, r);
            diag_[r] = (d != 0.0) ? d : 1.0;
        }
    }
    void apply(const std::vector<double>& r, std::vector<double>& z) const override {
        const int n = A_.n_rows;
        std::vector<double> w(n);
        for (int i = 0; i < n; ++i) {  // (D + L) w = r
            double s = r[i];
            for (int k = A_.row_ptr[i]; k < A_.row_ptr[i + 1]; ++k)
                if (A_.col_idx[k] < i) s -= A_.val[k] * w[A_.col_idx[k]];
            w[i] = s / diag_[i];
        }
        for (int i = 0; i < n; ++i) w[i] *= diag_[i];  // u = D w
        z.assign(n, 0.0);
        for (int i = n - 1; i >= 0; --i) {  // (D + U) z = u
            double s = w[i];
            for (int k = A_.row_ptr[i]; k < A_.row_ptr[i + 1]; ++k)
                if (A_.col_idx[k] > i) s -= A_.val[k] * z[A_.col_idx[k]];
            z[i] = s / diag_[i];
        }
    }

private:
    const CSRMatrix& A_;
    std::vector<double> diag_;
};

// Zero-fill incomplete LU on the sparsity pattern of A.
class ILU0Precond : public Preconditioner {
public:
    explicit ILU0Precond(const CSRMatrix& A)
        : n_(A.n_rows), row_ptr_(A.row_ptr), col_idx_(A.col_idx), val_(A.val) {
        diag_pos_.assign(n_, -1);
        for (int r = 0; r < n_; ++r)
            for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
                if (col_idx_[k] == r) diag_pos_[r] = k;
        for (int r = 0; r < n_; ++r)
            if (diag_pos_[r] < 0)
                throw std::runtime_error("ILU0: missing diagonal entry");
        factorize();
    }
    void apply(const std::vector<double>& r, std::vector<double>& z) const override {
        std::vector<double> w(n_);
        for (int i = 0; i < n_; ++i) {  // L w = r (unit lower)
            double s = r[i];
            for (int k = row_ptr_[i]; k < diag_pos_[i]; ++k)
                s -= val_[k] * w[col_idx_[k]];
            w[i] = s;
        }
        z.assign(n_, 0.0);
        for (int i = n_ - 1; i >= 0; --i) {  // U z = w
            double s = w[i];
            for (int k = diag_pos_[i] + 1; k < row_ptr_[i + 1]; ++k)
                s -= val_[k] * z[col_idx_[k]];
            z[i] = s / val_[diag_pos_[i]];
        }
    }

private:
    void factorize() {
        for (int i = 0; i < n_; ++i) {
            for (int kk = row_ptr_[i]; kk < diag_pos_[i]; ++kk) {
                const int k = col_idx_[kk];
                const double piv = val_[diag_pos_[k]];
                if (piv == 0.0) throw std::runtime_error("ILU0: zero pivot");
                const double lik = val_[kk] / piv;
                val_[kk] = lik;
                // Update row i against the strict upper part of row k.
                for (int kj = diag_pos_[k] + 1; kj < row_ptr_[k + 1]; ++kj) {
                    const int j = col_idx_[kj];
                    const int pos = find(i, j);
                    if (pos >= 0) val_[pos] -= lik * val_[kj];
                }
            }
        }
    }
    int find(int r, int c) const {
        int lo = row_ptr_[r], hi = row_ptr_[r + 1] - 1;
        while (lo <= hi) {
            const int mid = (lo + hi) / 2;
            if (col_idx_[mid] == c) return mid;
            if (col_idx_[mid] < c) lo = mid + 1;
            else hi = mid - 1;
        }
        return -1;
    }

    int n_;
    std::vector<int> row_ptr_, col_idx_;
    std::vector<double> val_;
    std::vector<int> diag_pos_;
};

ConvergenceRecord solve_cg(const CSRMatrix& A, const std::vector<double>& b,
                           std::vector<double>& x, const Preconditioner& M,
                           const LinearSolverConfig& cfg) {
    ConvergenceRecord rec;
    const int n = A.n_rows;
    std::vector<double> r(n), z(n), p(n), Ap(n);
    A.matvec(x.data(), Ap.data());
    for (int i = 0; i < n; ++i) r[i] = b[i] - Ap[i];
    const double bnorm = std::max(norm_v(b), 1e-300);
    double rnorm = norm_v(r);
    if (rnorm <= cfg.abs_tol || rnorm / bnorm <= cfg.rel_tol) {
        rec.converged = true;
        rec.rel_residual = rnorm / bnorm;
        return rec;
    }
    M.apply(r, z);
    p = z;
    double rz = dot_v(r, z);
    for (int it = 1; it <= cfg.max_iter; ++it) {
        A.matvec(p.data(), Ap.data());
        const double pAp = dot_v(p, Ap);
        if (pAp <= 0.0) {
            rec.breakdown = true;
            rec.iterations = it;
            rec.rel_residual = norm_v(r) / bnorm;
            rec.message = "CG breakdown: operator not SPD (p'Ap <= 0)";
            return rec;
        }
        const double alpha = rz / pAp;
        axpy(alpha, p, x);
        axpy(-alpha, Ap, r);
        rnorm = norm_v(r);
        rec.iterations = it;
        if (rnorm <= cfg.abs_tol || rnorm / bnorm <= cfg.rel_tol) {
            rec.converged = true;
            rec.rel_residual = rnorm / bnorm;
            return rec;
        }
        M.apply(r, z);
        const double rz_new = dot_v(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    rec.rel_residual = rnorm / bnorm;
    rec.message = "CG: max iterations reached";
    return rec;
}

// Right-preconditioned restarted GMRES.
ConvergenceRecord solve_gmres(const CSRMatrix& A, const std::vector<double>& b,
                              std::vector<double>& x, const Preconditioner& M,
                              const LinearSolverConfig& cfg) {
    ConvergenceRecord rec;
    const int n = A.n_rows;
    const int m = std::max(1, cfg.restart);
    const double bnorm = std::max(norm_v(b), 1e-300);
    std::vector<double> r(n), w(n), z(n);
    int total_it = 0;
    while (total_it < cfg.max_iter) {
        A.matvec(x.data(), r.data());
        for (int i = 0; i < n; ++i) r[i] = b[i] - r[i];
        double beta = norm_v(r);
        rec.rel_residual = beta / bnorm;
        if (beta <= cfg.abs_tol || beta / bnorm <= cfg.rel_tol) {
            rec.converged = true;
            return rec;
        }
        std::vector<std::vector<double>> V;
        V.emplace_back(n);
        for (int i = 0; i < n; ++i) V[0][i] = r[i] / beta;
        std::vector<std::vector<double>> H;  // H[j] holds column j (j+2 entries)
        std::vector<double> cs, sn, g;
        g.assign(m + 1, 0.0);
        g[0] = beta;
        int j = 0;
        for (; j < m && total_it < cfg.max_iter; ++j, ++total_it) {
            M.apply(V[j], z);
            A.matvec(z.data(), w.data());
            std::vector<double> h(j + 2, 0.0);
            for (int i = 0; i <= j; ++i) {  // modified Gram-Schmidt
                h[i] = dot_v(w, V[i]);
                axpy(-h[i], V[i], w);
            }
            h[j + 1] = norm_v(w);
            bool happy = h[j + 1] < 1e-300;
            if (!happy) {
                V.emplace_back(n);
                for (int i = 0; i < n; ++i) V[j + 1][i] = w[i] / h[j + 1];
            }
            // Apply previous Givens rotations to the new column.
            for (int i = 0; i < j; ++i) {
                const double t = cs[i] * h[i] + sn[i] * h[i + 1];
                h[i + 1] = -sn[i] * h[i] + cs[i] * h[i + 1];
                h[i] = t;
            }
            const double denom = std::hypot(h[j], h[j + 1]);
            if (denom < 1e-300) {
                rec.breakdown = true;
                rec.iterations = total_it + 1;
                rec.message = "GMRES breakdown: zero Hessenberg column";
                return rec;
            }
            cs.push_back(h[j] / denom);
            sn.push_back(h[j + 1] / denom);
            h[j] = denom;
            h[j + 1] = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] *= cs[j];
            H.push_back(h);
            rec.iterations = total_it + 1;
            const double res = std::abs(g[j + 1]);
            if (res <= cfg.abs_tol || res / bnorm <= cfg.rel_tol || happy) {
                ++j;
                break;
            }
        }
        // Back-substitute y and update x += M^{-1} (V y).
        std::vector<double> y(j, 0.0);
        for (int i = j - 1; i >= 0; --i) {
            double s = g[i];
            for (int k = i + 1; k < j; ++k) s -= H[k][i] * y[k];
            y[i] = s / H[i][i];
        }
        std::vector<double> corr(n, 0.0);
        for (int k = 0; k < j; ++k) axpy(y[k], V[k], corr);
        M.apply(corr, z);
        axpy(1.0, z, x);
        A.matvec(x.data(), r.data());
        for (int i = 0; i < n; ++i) r[i] = b[i] - r[i];
        const double rn = norm_v(r);
        rec.rel_residual = rn / bnorm;
        if (rn <= cfg.abs_tol || rn / bnorm <= cfg.rel_tol) {
            rec.converged = true;
            return rec;
        }
    }
    rec.message = "GMRES: max iterations reached";
    return rec;
}

// Preconditioned MINRES (Paige & Saunders); preconditioner must be SPD.
ConvergenceRecord solve_minres(const CSRMatrix& A, const std::vector<double>& b,
                               std::vector<double>& x, const Preconditioner& M,
                               const LinearSolverConfig& cfg) {
    ConvergenceRecord rec;
    const int n = A.n_rows;
    std::vector<double> r(n), y(n), v(n);
    A.matvec(x.data(), r.data());
    for (int i = 0; i < n; ++i) r[i] = b[i] - r[i];
    const double bnorm = std::max(norm_v(b), 1e-300);
    M.apply(r, y);
    double beta1 = dot_v(r, y);
    if (beta1 < 0.0) {
        rec.breakdown = true;
        rec.message = "MINRES breakdown: preconditioner not SPD";
        return rec;
    }
    beta1 = std::sqrt(std::max(beta1, 0.0));
    if (beta1 < 1e-300) {
        rec.converged = true;
        rec.rel_residual = norm_v(r) / bnorm;
        return rec;
    }
    std::vector<double> r1 = r, r2 = r;
    double beta = beta1, beta_old = 0.0, dbar = 0.0, epsln = 0.0;
    double phibar = beta1, cs = -1.0, sn = 0.0;
    std::vector<double> w(n, 0.0), w1(n, 0.0), w2(n, 0.0);
    for (int it = 1; it <= cfg.max_iter; ++it) {
        for (int i = 0; i < n; ++i) v[i] = y[i] / beta;
        A.matvec(v.data(), y.data());
        if (it >= 2) axpy(-beta / beta_old, r1, y);
        const double alfa = dot_v(v, y);
        axpy(-alfa / beta, r2, y);
        r1 = r2;
        r2 = y;
        M.apply(r2, y);
        beta_old = beta;
        double bb = dot_v(r2, y);
        if (bb < 0.0) {
            rec.breakdown = true;
            rec.iterations = it;
            rec.message = "MINRES breakdown: preconditioner not SPD";
            return rec;
        }
        beta = std::sqrt(bb);
        const double oldeps = epsln;
        const double delta = cs * dbar + sn * alfa;
        const double gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        const double gamma = std::max(std::hypot(gbar, beta), 1e-300);
        cs = gbar / gamma;
        sn = beta / gamma;
        const double phi = cs * phibar;
        phibar = sn * phibar;
        w1 = w2;
        w2 = w;
        for (int i = 0; i < n; ++i)
            w[i] = (v[i] - oldeps * w1[i] - delta * w2[i]) / gamma;
        axpy(phi, w, x);
        rec.iterations = it;
        // phibar tracks the preconditioned residual norm; check cheaply, then
        // confirm with the true residual before declaring convergence.
        if (phibar / beta1 <= 0.1 * cfg.rel_tol || phibar <= cfg.abs_tol ||
            it == cfg.max_iter) {
            std::vector<double> rr(n);
            A.matvec(x.data(), rr.data());
            for (int i = 0; i < n; ++i) rr[i] = b[i] - rr[i];
            rec.rel_residual = norm_v(rr) / bnorm;
            if (rec.rel_residual <= cfg.rel_tol || norm_v(rr) <= cfg.abs_tol) {
                rec.converged = true;
                return rec;
            }
        }
    }
    rec.message = "MINRES: max iterations reached";
    return rec;
}

} // namespace

std::unique_ptr<Preconditioner> make_preconditioner(const CSRMatrix& A,
                                                    PrecondKind kind) {
    switch (kind) {
        case PrecondKind::None: return std::make_unique<IdentityPrecond>();
        case PrecondKind::Jacobi: return std::make_unique<JacobiPrecond>(A);
        case PrecondKind::SSOR: return std::make_unique<SSORPrecond>(A);
        case PrecondKind::ILU0: return std::make_unique<ILU0Precond>(A);
    }
    return std::make_unique<IdentityPrecond>();
}

ConvergenceRecord solve_linear(const CSRMatrix& A, const std::vector<double>& b,
                               std::vector<double>& x,
                               const LinearSolverConfig& cfg) {
    if (A.n_rows != A.n_cols || A.n_rows != static_cast<int>(b.size()))
        throw std::runtime_error("solve_linear: dimension mismatch");
    if (x.size() != b.size()) x.assign(b.size(), 0.0);
    const auto M = make_preconditioner(A, cfg.precond);
    switch (cfg.method) {
        case KrylovMethod::CG: return solve_cg(A, b, x, *M, cfg);
        case KrylovMethod::GMRES: return solve_gmres(A, b, x, *M, cfg);
        case KrylovMethod::MINRES: return solve_minres(A, b, x, *M, cfg);
    }
    throw std::runtime_error("solve_linear: unknown method");
}

ConvergenceRecord solve_linear(const CSRMatrix& A, const std::vector<double>& b,
                               std::vector<double>& x,
                               const LinearSolverConfig& cfg,
                               const Preconditioner& M) {
    if (A.n_rows != A.n_cols || A.n_rows != static_cast<int>(b.size()))
        throw std::runtime_error("solve_linear: dimension mismatch");
    if (x.size() != b.size()) x.assign(b.size(), 0.0);
    switch (cfg.method) {
        case KrylovMethod::CG: return solve_cg(A, b, x, M, cfg);
        case KrylovMethod::GMRES: return solve_gmres(A, b, x, M, cfg);
        case KrylovMethod::MINRES: return solve_minres(A, b, x, M, cfg);
    }
    throw std::runtime_error("solve_linear: unknown method");
}

} // namespace eroopt
