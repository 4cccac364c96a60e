#include "eroopt/sparse.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

namespace eroopt {

void CSRMatrix::matvec(const double* x, double* y) const {
    for (int r = 0; r < n_rows; ++r) {
        double s = 0.0;
        for (int k = row_ptr[r]; k < row_ptr[r + 1]; ++k)
            s += val[k] * x[col_idx[k]];
        y[r] = s;
    }
}

std::vector<double> CSRMatrix::matvec(const std::vector<double>& x) const {
    if (static_cast<int>(x.size()) != n_cols)
        throw std::runtime_error("matvec: size mismatch");
    std::vector<double> y(n_rows);
    matvec(x.data(), y.data());
    return y;
}

CSRMatrix CSRMatrix::transposed() const {
    CSRMatrix T;
    T.n_rows = n_cols;
    T.n_cols = n_rows;
    T.row_ptr.assign(n_cols + 1, 0);
    for (int c : col_idx) ++T.row_ptr[c + 1];
    for (int r = 0; r < n_cols; ++r) T.row_ptr[r + 1] += T.row_ptr[r];
    T.col_idx.resize(val.size());
    T.val.resize(val.size());
    std::vector<int> fill(T.row_ptr.begin(), T.row_ptr.end() - 1);
    for (int r = 0; r < n_rows; ++r) {
        for (int k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
            const int pos = fill[col_idx[k]]++;
            T.col_idx[pos] = r;
            T.val[pos] = val[k];
        }
    }
    return T;  // columns come out sorted because rows were traversed in order
}

double CSRMatrix::coeff(int r, int c) const {
    for (int k = row_ptr[r]; k < row_ptr[r + 1]; ++k)
        if (col_idx[k] == c) return val[k];
    return 0.0;
}

void CSRMatrix::eliminate_dirichlet(const std::vector<int>& dofs,
                                    const std::vector<double>& values,
                                    std::vector<double>& rhs) {
    if (dofs.size() != values.size())
        throw std::runtime_error("eliminate_dirichlet: dof/value size mismatch");
    std::vector<char> constrained(n_rows, 0);
    std::vector<double> gval(n_rows, 0.0);
    for (size_t i = 0; i < dofs.size(); ++i) {
        constrained[dofs[i]] = 1;
        gval[dofs[i]] = values[i];
    }
    for (int r = 0; r < n_rows; ++r) {
        if (constrained[r]) {
            for (int k = row_ptr[r]; k < row_ptr[r + 1]; ++k)
                val[k] = (col_idx[k] == r) ? 1.0 : 0.0;
            rhs[r] = gval[r];
        } else {
            for (int k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
                const int c = col_idx[k];
                if (constrained[c]) {
                    rhs[r] -= val[k] * gval[c];
                    val[k] = 0.0;
                }
            }
        }
    }
}

void CSRMatrix::write_matrix_market(const std::string& path) const {
    FILE* fp = std::fopen(path.c_str(), "w");
    if (!fp) throw std::runtime_error("write_matrix_market: cannot open " + path);
    std::fprintf(fp, "%%%%MatrixMarket matrix coordinate real general\n");
    std::fprintf(fp, "%d %d %zu\n", n_rows, n_cols, val.size());
    for (int r = 0; r < n_rows; ++r)
        for (int k = row_ptr[r]; k < row_ptr[r + 1]; ++k)
            std::fprintf(fp, "%d %d %.17g\n", r + 1, col_idx[k] + 1, val[k]);
    std::fclose(fp);
}

CSRMatrix COOBuilder::to_csr() const {
    CSRMatrix A;
    A.n_rows = rows_;
    A.n_cols = cols_;
    std::vector<Triplet> sorted = entries_;
    std::sort(sorted.begin(), sorted.end(), [](const Triplet& a, const Triplet& b) {
        return (a.r != b.r) ? a.r < b.r : a.c < b.c;
    });
    A.row_ptr.assign(rows_ + 1, 0);
    size_t i = 0;
    while (i < sorted.size()) {
        size_t j = i + 1;
        double s = sorted[i].v;
        while (j < sorted.size() && sorted[j].r == sorted[i].r &&
               sorted[j].c == sorted[i].c) {
            s += sorted[j].v;
            ++j;
        }
        A.col_idx.push_back(sorted[i].c);
        A.val.push_back(s);
        ++A.row_ptr[sorted[i].r + 1];
        i = j;
    }
    for (int r = 0; r < rows_; ++r) A.row_ptr[r + 1] += A.row_ptr[r];
    return A;
}

} // namespace eroopt
