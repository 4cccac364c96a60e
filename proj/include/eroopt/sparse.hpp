// Compressed sparse row matrix with a COO assembly builder, transpose,
// Dirichlet elimination and MatrixMarket export.
#pragma once

#include <string>
#include <vector>

namespace eroopt {

struct CSRMatrix {
    int n_rows = 0;
    int n_cols = 0;
    std::vector<int> row_ptr;   // size n_rows + 1
    std::vector<int> col_idx;   // sorted within each row
    std::vector<double> val;

    void matvec(const double* x, double* y) const;          // y = A x
    std::vector<double> matvec(const std::vector<double>& x) const;
    CSRMatrix transposed() const;

    // Entry lookup (0 if outside the pattern).
    double coeff(int r, int c) const;

    // Symmetric Dirichlet elimination: for every constrained dof i the row and
    // column are zeroed, the diagonal is set to 1, and the right-hand side is
    // updated so that free equations see the prescribed values and
    // rhs[i] = value[i]. Applying the same elimination to A and A^T yields
    // transposes of each other, which the discrete adjoints rely on.
    void eliminate_dirichlet(const std::vector<int>& dofs,
                             const std::vector<double>& values,
                             std::vector<double>& rhs);

    void write_matrix_market(const std::string& path) const;
};

// Accumulating triplet builder; duplicate entries are summed.
class COOBuilder {
public:
    COOBuilder(int n_rows, int n_cols) : rows_(n_rows), cols_(n_cols) {}

    void add(int r, int c, double v) {
        if (v != 0.0) entries_.push_back({r, c, v});
    }
    CSRMatrix to_csr() const;

    int n_rows() const { return rows_; }
    int n_cols() const { return cols_; }

private:
    struct Triplet { int r, c; double v; };
    int rows_, cols_;
    std::vector<Triplet> entries_;
};

} // namespace eroopt
