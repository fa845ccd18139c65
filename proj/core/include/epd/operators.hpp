#pragma once

#include "epd/grid.hpp"

#include <vector>

namespace epd {

/// Square tridiagonal matrix in banded storage.
/// sub[i] = M(i+1, i), diag[i] = M(i, i), sup[i] = M(i, i+1).
class TriDiagMatrix {
public:
    TriDiagMatrix() = default;
    explicit TriDiagMatrix(int size);

    static TriDiagMatrix identity(int size);

    int size() const noexcept { return size_; }

    double& sub(int i) { return sub_[static_cast<std::size_t>(i)]; }
    double& diag(int i) { return diag_[static_cast<std::size_t>(i)]; }
    double& sup(int i) { return sup_[static_cast<std::size_t>(i)]; }
    double sub(int i) const { return sub_[static_cast<std::size_t>(i)]; }
    double diag(int i) const { return diag_[static_cast<std::size_t>(i)]; }
    double sup(int i) const { return sup_[static_cast<std::size_t>(i)]; }

    /// Entry (i, j); zero outside the three diagonals.
    double operator()(int i, int j) const;

    Matrix dense() const;
    TriDiagMatrix transposed() const;

    TriDiagMatrix& operator+=(const TriDiagMatrix& other);
    TriDiagMatrix& operator*=(double s);
    friend TriDiagMatrix operator+(TriDiagMatrix a, const TriDiagMatrix& b) { return a += b; }
    friend TriDiagMatrix operator*(double s, TriDiagMatrix a) { return a *= s; }

private:
    int size_ = 0;
    std::vector<double> sub_;
    std::vector<double> diag_;
    std::vector<double> sup_;
};

/// Treatment of nodes on the coordinate axes, where lambda / x is singular.
///   limit: the term 2 lambda v_x / x is replaced by its limit 2 lambda v_xx (three-point stencil).
///   zero:  the coefficient is dropped.
enum class SingularPolicy { limit, zero };

/// Time-independent difference matrices of the scheme.
struct OperatorSet {
    /// Second difference with Neumann ghost elimination: rows [-2, 2] and [2, -2] at the ends.
    TriDiagMatrix A;
    /// x-gradient weights, left multiplication: Theta(j, j+1) = lambda_j, Theta(j, j-1) = -lambda_j.
    TriDiagMatrix Theta;
    /// y-gradient weights, right multiplication: Lambda(m+1, m) = gamma_m, Lambda(m-1, m) = -gamma_m.
    TriDiagMatrix Lambda;
    std::vector<double> lambda_j;
    std::vector<double> gamma_m;
    /// Indices handled by the singular-node policy; lambda_j / gamma_m are 0 there.
    std::vector<int> singular_x;
    std::vector<int> singular_y;
};

OperatorSet build_operator_set(const Grid& grid, double lambda, double gamma,
                               SingularPolicy policy = SingularPolicy::limit);

/// Composite matrices for one time step n.
///   W_alpha            = I/2 - alpha sigma A
///   W_alpha_minus_half = I/2 - (alpha - 1/2) sigma A
///   R_pos / R_neg      = (l a_n / 2) I -/+ alpha sigma h Theta
///   S_pos / S_neg      = (l a_n / 2) I -/+ alpha sigma h Lambda
struct StepOperators {
    TriDiagMatrix W_alpha;
    TriDiagMatrix W_alpha_minus_half;
    TriDiagMatrix R_pos;
    TriDiagMatrix S_pos;
    TriDiagMatrix R_neg;
    TriDiagMatrix S_neg;
    int n = 0;
    double alpha = 0.0;
    double a_n = 0.0;
};

/// Throws SingularTimeError when t_n <= 0.
StepOperators assemble_step_operators(const OperatorSet& ops, const Grid& grid, int n,
                                      double alpha, double a);

/// M * X (acts along x, the row index).
Field apply_x(const TriDiagMatrix& M, const Field& X);
/// X * M (acts along y, the column index).
Field apply_y(const Field& X, const TriDiagMatrix& M);

/// W X + X W^T: the same one-dimensional operator applied along both axes.
Field apply_both(const TriDiagMatrix& W, const Field& X);

}  // namespace epd
