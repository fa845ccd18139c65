#pragma once

#include "epd/grid.hpp"

namespace epd {

/// L X + X R = C.
struct SylvesterProblem {
    Matrix L;
    Matrix R;
    Matrix C;
};

/// The coupled pair
///   W_left X + X W_right + R Y + Y S = C1
///   W_left Y + Y W_right + R X + X S = C2.
/// The scheme uses W_right = W_left^T so that the Neumann rows act along y as well.
struct CoupledProblem {
    Matrix W_left;
    Matrix W_right;
    Matrix R;
    Matrix S;
    Matrix C1;
    Matrix C2;
};

struct CoupledSolution {
    Matrix X;
    Matrix Y;
};

struct SylvesterOptions {
    /// A pivot below tolerance * (||L||_inf + ||R||_inf) is treated as a
    /// common eigenvalue of L and -R.
    double tolerance = 1e-12;
};

/// Hessenberg-Schur solve: R is reduced to real quasi-triangular Schur form,
/// L is kept in place and each Schur column (or 2x2 column pair) becomes one
/// banded linear system in the band of L. O(n^3) overall, O(n) per column
/// when L is tridiagonal. Throws NonSolvableError when the spectra of L and
/// -R (nearly) intersect.
Matrix solve_sylvester(const SylvesterProblem& p, const SylvesterOptions& opts = {});

/// Sum/difference decoupling: P = X + Y and Q = X - Y solve
///   (W_l + R) P + P (W_r + S) = C1 + C2,
///   (W_l - R) Q + Q (W_r - S) = C1 - C2.
CoupledSolution solve_coupled(const CoupledProblem& p, const SylvesterOptions& opts = {});

struct KroneckerOptions {
    /// Largest admissible matrix dimension (J + 2); the dense system has 2 n^2 rows.
    int max_size = 201;
};

/// Dense baseline: stack vec(X), vec(Y) into one 2n^2 vector and solve the
/// Kronecker-expanded system by LU with partial pivoting.
CoupledSolution kronecker_solve(const CoupledProblem& p, const KroneckerOptions& opts = {});

/// Dense 2 n^2 x 2 n^2 matrix of the coupled operator in column-major vec ordering.
Matrix kronecker_matrix(const CoupledProblem& p);

/// ||L X + X R - C|| / ||C||, with 0/0 taken as 0.
double residual(const SylvesterProblem& p, const Matrix& X);
/// Relative residual of both coupled equations in the stacked norm.
double residual(const CoupledProblem& p, const CoupledSolution& s);

/// min over both decoupled branches of min_{i,j} |lambda_i + mu_j|, with
/// lambda_i in spec(W_l +/- R) and mu_j in spec(W_r +/- S).
double solvability_margin(const Matrix& W_left, const Matrix& W_right, const Matrix& R,
                          const Matrix& S);
double solvability_margin(const Matrix& W, const Matrix& R, const Matrix& S);

}  // namespace epd
