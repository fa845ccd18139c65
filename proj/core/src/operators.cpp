#include "epd/operators.hpp"

#include "epd/errors.hpp"

#include <cmath>
#include <string>

namespace epd {

TriDiagMatrix::TriDiagMatrix(int size)
    : size_(size),
      sub_(static_cast<std::size_t>(size > 1 ? size - 1 : 0), 0.0),
      diag_(static_cast<std::size_t>(size), 0.0),
      sup_(static_cast<std::size_t>(size > 1 ? size - 1 : 0), 0.0) {
    if (size < 1) {
        throw DimensionError("TriDiagMatrix: size must be >= 1");
    }
}

TriDiagMatrix TriDiagMatrix::identity(int size) {
    TriDiagMatrix I(size);
    for (int i = 0; i < size; ++i) {
        I.diag(i) = 1.0;
    }
    return I;
}

double TriDiagMatrix::operator()(int i, int j) const {
    if (i == j) return diag(i);
    if (i == j + 1) return sub(j);
    if (j == i + 1) return sup(i);
    return 0.0;
}

Matrix TriDiagMatrix::dense() const {
    Matrix M = Matrix::Zero(size_, size_);
    for (int i = 0; i < size_; ++i) {
        M(i, i) = diag(i);
        if (i + 1 < size_) {
            M(i + 1, i) = sub(i);
            M(i, i + 1) = sup(i);
        }
    }
    return M;
}

TriDiagMatrix TriDiagMatrix::transposed() const {
    TriDiagMatrix T = *this;
    T.sub_.swap(T.sup_);
    return T;
}

TriDiagMatrix& TriDiagMatrix::operator+=(const TriDiagMatrix& other) {
    if (other.size_ != size_) {
        throw DimensionError("TriDiagMatrix: size mismatch in +");
    }
    for (std::size_t i = 0; i < diag_.size(); ++i) diag_[i] += other.diag_[i];
    for (std::size_t i = 0; i < sub_.size(); ++i) {
        sub_[i] += other.sub_[i];
        sup_[i] += other.sup_[i];
    }
    return *this;
}

TriDiagMatrix& TriDiagMatrix::operator*=(double s) {
    for (double& v : diag_) v *= s;
    for (double& v : sub_) v *= s;
    for (double& v : sup_) v *= s;
    return *this;
}

OperatorSet build_operator_set(const Grid& grid, double lambda, double gamma,
                               SingularPolicy policy) {
    const int n = grid.size();
    const int last = n - 1;
    OperatorSet ops{TriDiagMatrix(n), TriDiagMatrix(n), TriDiagMatrix(n), {}, {}, {}, {}};

    for (int j = 0; j < n; ++j) ops.A.diag(j) = -2.0;
    for (int j = 1; j < last; ++j) {
        ops.A.sup(j) = 1.0;
        ops.A.sub(j - 1) = 1.0;
    }
    ops.A.sup(0) = 2.0;
    ops.A.sub(last - 1) = 2.0;

    ops.lambda_j.assign(static_cast<std::size_t>(n), 0.0);
    ops.gamma_m.assign(static_cast<std::size_t>(n), 0.0);
    for (int j = 1; j < last; ++j) {
        if (grid.is_singular(j)) {
            ops.singular_x.push_back(j);
            ops.singular_y.push_back(j);
            continue;
        }
        ops.lambda_j[static_cast<std::size_t>(j)] = lambda / grid.x(j);
        ops.gamma_m[static_cast<std::size_t>(j)] = gamma / grid.y(j);
    }

    // Boundary rows of Theta and boundary columns of Lambda stay zero.
    for (int j = 1; j < last; ++j) {
        const double lj = ops.lambda_j[static_cast<std::size_t>(j)];
        ops.Theta.sup(j) = lj;
        ops.Theta.sub(j - 1) = -lj;

        const double gm = ops.gamma_m[static_cast<std::size_t>(j)];
        ops.Lambda.sub(j) = gm;        // Lambda(m+1, m)
        ops.Lambda.sup(j - 1) = -gm;   // Lambda(m-1, m)
    }

    if (policy == SingularPolicy::limit) {
        // sigma h Theta v = l^2 * 2 lambda (v_{j+1} - 2 v_j + v_{j-1}) / h^2
        const double cx = 2.0 * lambda / grid.h();
        const double cy = 2.0 * gamma / grid.h();
        for (int j : ops.singular_x) {
            ops.Theta.sub(j - 1) = cx;
            ops.Theta.diag(j) = -2.0 * cx;
            ops.Theta.sup(j) = cx;
        }
        for (int m : ops.singular_y) {
            ops.Lambda.sup(m - 1) = cy;
            ops.Lambda.diag(m) = -2.0 * cy;
            ops.Lambda.sub(m) = cy;
        }
    }
    return ops;
}

StepOperators assemble_step_operators(const OperatorSet& ops, const Grid& grid, int n,
                                      double alpha, double a) {
    const double tn = grid.t(n);
    if (!(tn > 0.0)) {
        throw SingularTimeError("assemble_step_operators: t_" + std::to_string(n) +
                                " = " + std::to_string(tn) + " is not positive");
    }
    const int size = grid.size();
    const double sigma = grid.sigma();
    const double h = grid.h();
    const double l = grid.l();
    const double a_n = a / tn;
    const TriDiagMatrix I = TriDiagMatrix::identity(size);
    const TriDiagMatrix damping = (0.5 * l * a_n) * I;

    StepOperators out;
    out.n = n;
    out.alpha = alpha;
    out.a_n = a_n;
    out.W_alpha = 0.5 * I + (-alpha * sigma) * ops.A;
    out.W_alpha_minus_half = 0.5 * I + (-(alpha - 0.5) * sigma) * ops.A;
    out.R_pos = damping + (-alpha * sigma * h) * ops.Theta;
    out.S_pos = damping + (-alpha * sigma * h) * ops.Lambda;
    out.R_neg = damping + (alpha * sigma * h) * ops.Theta;
    out.S_neg = damping + (alpha * sigma * h) * ops.Lambda;
    return out;
}

Field apply_x(const TriDiagMatrix& M, const Field& X) {
    const int n = M.size();
    if (X.rows() != n) {
        throw DimensionError("apply_x: matrix size " + std::to_string(n) +
                             " does not match field rows " + std::to_string(X.rows()));
    }
    Field out(n, X.cols());
    out.row(0) = M.diag(0) * X.row(0);
    if (n > 1) {
        out.row(0) += M.sup(0) * X.row(1);
        for (int i = 1; i < n - 1; ++i) {
            out.row(i) = M.sub(i - 1) * X.row(i - 1) + M.diag(i) * X.row(i) + M.sup(i) * X.row(i + 1);
        }
        out.row(n - 1) = M.sub(n - 2) * X.row(n - 2) + M.diag(n - 1) * X.row(n - 1);
    }
    return out;
}

Field apply_y(const Field& X, const TriDiagMatrix& M) {
    const int n = M.size();
    if (X.cols() != n) {
        throw DimensionError("apply_y: matrix size " + std::to_string(n) +
                             " does not match field columns " + std::to_string(X.cols()));
    }
    // (X M)(:, k) = X(:, k-1) M(k-1, k) + X(:, k) M(k, k) + X(:, k+1) M(k+1, k)
    Field out(X.rows(), n);
    out.col(0) = M.diag(0) * X.col(0);
    if (n > 1) {
        out.col(0) += M.sub(0) * X.col(1);
        for (int k = 1; k < n - 1; ++k) {
            out.col(k) = M.sup(k - 1) * X.col(k - 1) + M.diag(k) * X.col(k) + M.sub(k) * X.col(k + 1);
        }
        out.col(n - 1) = M.sup(n - 2) * X.col(n - 2) + M.diag(n - 1) * X.col(n - 1);
    }
    return out;
}

Field apply_both(const TriDiagMatrix& W, const Field& X) {
    return apply_x(W, X) + apply_y(X, W.transposed());
}

}  // namespace epd
