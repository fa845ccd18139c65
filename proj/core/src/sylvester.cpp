#include "epd/sylvester.hpp"

#include "epd/banded.hpp"
#include "epd/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>

namespace epd {

namespace {

struct Bandwidth {
    int lower = 0;
    int upper = 0;
};

Bandwidth bandwidth_of(const Matrix& M) {
    Bandwidth b;
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
        for (Eigen::Index i = 0; i < M.rows(); ++i) {
            if (M(i, j) != 0.0) {
                b.lower = std::max(b.lower, static_cast<int>(i - j));
                b.upper = std::max(b.upper, static_cast<int>(j - i));
            }
        }
    }
    return b;
}

void require_square(const Matrix& M, const char* what) {
    if (M.rows() != M.cols()) {
        throw DimensionError(std::string("solve_sylvester: ") + what + " is not square");
    }
}

void require_finite(const Matrix& M, const char* what) {
    if (!M.allFinite()) {
        throw DimensionError(std::string("solve_sylvester: ") + what + " has non-finite entries");
    }
}

[[noreturn]] void throw_non_solvable(double re, double im, double pivot) {
    std::ostringstream os;
    os << "solve_sylvester: operator is singular to working precision; eigenvalue mu = " << re;
    if (im != 0.0) os << (im > 0 ? " + " : " - ") << std::abs(im) << "i";
    os << " of the right coefficient nearly cancels an eigenvalue of the left coefficient"
       << " (pivot " << pivot << ")";
    throw NonSolvableError(os.str(), re, im);
}

double relative(double num, double den) {
    if (den == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return num / den;
}

}  // namespace

Matrix solve_sylvester(const SylvesterProblem& p, const SylvesterOptions& opts) {
    require_square(p.L, "L");
    require_square(p.R, "R");
    if (p.C.rows() != p.L.rows() || p.C.cols() != p.R.rows()) {
        throw DimensionError("solve_sylvester: C must be rows(L) x rows(R)");
    }
    require_finite(p.L, "L");
    require_finite(p.R, "R");
    require_finite(p.C, "C");

    const int n = static_cast<int>(p.L.rows());
    const int m = static_cast<int>(p.R.rows());
    const double scale = std::max(p.L.lpNorm<Eigen::Infinity>() + p.R.lpNorm<Eigen::Infinity>(),
                                  std::numeric_limits<double>::min());
    const double threshold = opts.tolerance * scale;
    const Bandwidth band = bandwidth_of(p.L);

    // R = Z T Z^T with T quasi upper triangular; solve L Y + Y T = C Z, X = Y Z^T.
    Eigen::RealSchur<Matrix> schur(p.R);
    if (schur.info() != Eigen::Success) {
        throw EigenvalueError("solve_sylvester: real Schur decomposition did not converge");
    }
    const Matrix& T = schur.matrixT();
    const Matrix& Z = schur.matrixU();
    const Matrix F = p.C * Z;
    Matrix Y = Matrix::Zero(n, m);

    int k = 0;
    while (k < m) {
        const bool pair = k + 1 < m && T(k + 1, k) != 0.0;
        if (!pair) {
            Eigen::VectorXd rhs = F.col(k);
            if (k > 0) rhs.noalias() -= Y.leftCols(k) * T.col(k).head(k);

            BandedLU lu(n, band.lower, band.upper);
            for (int i = 0; i < n; ++i) {
                const int j0 = std::max(0, i - band.lower);
                const int j1 = std::min(n - 1, i + band.upper);
                for (int j = j0; j <= j1; ++j) lu.set(i, j, p.L(i, j));
                lu.set(i, i, p.L(i, i) + T(k, k));
            }
            const double pivot = lu.factorize();
            if (!(pivot > threshold)) throw_non_solvable(T(k, k), 0.0, pivot);
            lu.solve(std::span<double>(rhs.data(), static_cast<std::size_t>(n)));
            Y.col(k) = rhs;
            k += 1;
            continue;
        }

        // 2x2 block: unknowns interleaved as (y_k[0], y_{k+1}[0], y_k[1], ...).
        Eigen::VectorXd r0 = F.col(k);
        Eigen::VectorXd r1 = F.col(k + 1);
        if (k > 0) {
            r0.noalias() -= Y.leftCols(k) * T.col(k).head(k);
            r1.noalias() -= Y.leftCols(k) * T.col(k + 1).head(k);
        }
        const int N = 2 * n;
        BandedLU lu(N, 2 * band.lower + 1, 2 * band.upper + 1);
        for (int i = 0; i < n; ++i) {
            const int j0 = std::max(0, i - band.lower);
            const int j1 = std::min(n - 1, i + band.upper);
            for (int j = j0; j <= j1; ++j) {
                lu.set(2 * i, 2 * j, p.L(i, j));
                lu.set(2 * i + 1, 2 * j + 1, p.L(i, j));
            }
            for (int a = 0; a < 2; ++a) {
                for (int b = 0; b < 2; ++b) {
                    const int row = 2 * i + a;
                    const int col = 2 * i + b;
                    lu.set(row, col, lu.get(row, col) + T(k + b, k + a));
                }
            }
        }
        const double pivot = lu.factorize();
        if (!(pivot > threshold)) {
            const double tr = 0.5 * (T(k, k) + T(k + 1, k + 1));
            const double det = T(k, k) * T(k + 1, k + 1) - T(k, k + 1) * T(k + 1, k);
            const double disc = det - tr * tr;
            throw_non_solvable(tr, disc > 0 ? std::sqrt(disc) : 0.0, pivot);
        }
        Eigen::VectorXd z(N);
        for (int i = 0; i < n; ++i) {
            z(2 * i) = r0(i);
            z(2 * i + 1) = r1(i);
        }
        lu.solve(std::span<double>(z.data(), static_cast<std::size_t>(N)));
        for (int i = 0; i < n; ++i) {
            Y(i, k) = z(2 * i);
            Y(i, k + 1) = z(2 * i + 1);
        }
        k += 2;
    }
    return Y * Z.transpose();
}

CoupledSolution solve_coupled(const CoupledProblem& p, const SylvesterOptions& opts) {
    Matrix P;
    Matrix Q;
    try {
        P = solve_sylvester({p.W_left + p.R, p.W_right + p.S, p.C1 + p.C2}, opts);
    } catch (const NonSolvableError& e) {
        throw NonSolvableError(std::string("sum branch: ") + e.what(), e.eigenvalue_re(),
                               e.eigenvalue_im(), "sum");
    }
    try {
        Q = solve_sylvester({p.W_left - p.R, p.W_right - p.S, p.C1 - p.C2}, opts);
    } catch (const NonSolvableError& e) {
        throw NonSolvableError(std::string("difference branch: ") + e.what(), e.eigenvalue_re(),
                               e.eigenvalue_im(), "difference");
    }
    return {0.5 * (P + Q), 0.5 * (P - Q)};
}

Matrix kronecker_matrix(const CoupledProblem& p) {
    const Eigen::Index n = p.W_left.rows();
    const Eigen::Index m = p.W_right.rows();
    const Eigen::Index N = n * m;
    Matrix K = Matrix::Zero(2 * N, 2 * N);
    // Row (i, j) of vec(M X) + vec(X B) has M(i, k) at (k, j) and B(l, j) at (i, l).
    auto add_block = [&](Eigen::Index row0, Eigen::Index col0, const Matrix& left,
                         const Matrix& right) {
        for (Eigen::Index j = 0; j < m; ++j) {
            for (Eigen::Index i = 0; i < n; ++i) {
                const Eigen::Index row = row0 + i + j * n;
                for (Eigen::Index k = 0; k < n; ++k) {
                    K(row, col0 + k + j * n) += left(i, k);
                }
                for (Eigen::Index l = 0; l < m; ++l) {
                    K(row, col0 + i + l * n) += right(l, j);
                }
            }
        }
    };
    add_block(0, 0, p.W_left, p.W_right);
    add_block(0, N, p.R, p.S);
    add_block(N, 0, p.R, p.S);
    add_block(N, N, p.W_left, p.W_right);
    return K;
}

CoupledSolution kronecker_solve(const CoupledProblem& p, const KroneckerOptions& opts) {
    const Eigen::Index n = p.W_left.rows();
    const Eigen::Index m = p.W_right.rows();
    if (n > opts.max_size || m > opts.max_size) {
        throw SizeGuardError("kronecker_solve: size " + std::to_string(std::max(n, m)) +
                             " exceeds the dense guard " + std::to_string(opts.max_size));
    }
    if (p.W_left.cols() != n || p.R.rows() != n || p.R.cols() != n || p.W_right.cols() != m ||
        p.S.rows() != m || p.S.cols() != m || p.C1.rows() != n || p.C1.cols() != m ||
        p.C2.rows() != n || p.C2.cols() != m) {
        throw DimensionError("kronecker_solve: inconsistent dimensions");
    }
    const Eigen::Index N = n * m;
    Matrix K = kronecker_matrix(p);
    const double max_entry = K.lpNorm<Eigen::Infinity>();

    Eigen::PartialPivLU<Eigen::Ref<Matrix>> lu(K);
    const double min_pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
    if (!(min_pivot > static_cast<double>(2 * N) * std::numeric_limits<double>::epsilon() * max_entry)) {
        throw SingularSystemError("kronecker_solve: Kronecker system is singular (pivot " +
                                  std::to_string(min_pivot) + ")");
    }

    Eigen::VectorXd rhs(2 * N);
    rhs.head(N) = Eigen::Map<const Eigen::VectorXd>(p.C1.data(), N);
    rhs.tail(N) = Eigen::Map<const Eigen::VectorXd>(p.C2.data(), N);
    const Eigen::VectorXd z = lu.solve(rhs);

    CoupledSolution s{Matrix(n, m), Matrix(n, m)};
    Eigen::Map<Eigen::VectorXd>(s.X.data(), N) = z.head(N);
    Eigen::Map<Eigen::VectorXd>(s.Y.data(), N) = z.tail(N);
    return s;
}

double residual(const SylvesterProblem& p, const Matrix& X) {
    const Matrix r = p.L * X + X * p.R - p.C;
    return relative(r.norm(), p.C.norm());
}

double residual(const CoupledProblem& p, const CoupledSolution& s) {
    const Matrix r1 = p.W_left * s.X + s.X * p.W_right + p.R * s.Y + s.Y * p.S - p.C1;
    const Matrix r2 = p.W_left * s.Y + s.Y * p.W_right + p.R * s.X + s.X * p.S - p.C2;
    const double num = std::sqrt(r1.squaredNorm() + r2.squaredNorm());
    const double den = std::sqrt(p.C1.squaredNorm() + p.C2.squaredNorm());
    return relative(num, den);
}

namespace {

Eigen::VectorXcd eigenvalues_of(const Matrix& M) {
    Eigen::EigenSolver<Matrix> es(M, false);
    if (es.info() != Eigen::Success) {
        throw EigenvalueError("solvability_margin: eigenvalue iteration did not converge");
    }
    return es.eigenvalues();
}

double min_pair_sum(const Matrix& left, const Matrix& right) {
    const Eigen::VectorXcd a = eigenvalues_of(left);
    const Eigen::VectorXcd b = eigenvalues_of(right);
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        for (Eigen::Index j = 0; j < b.size(); ++j) {
            best = std::min(best, std::abs(a(i) + b(j)));
        }
    }
    return best;
}

}  // namespace

double solvability_margin(const Matrix& W_left, const Matrix& W_right, const Matrix& R,
                          const Matrix& S) {
    const double sum = min_pair_sum(W_left + R, W_right + S);
    const double diff = min_pair_sum(W_left - R, W_right - S);
    return std::min(sum, diff);
}

double solvability_margin(const Matrix& W, const Matrix& R, const Matrix& S) {
    return solvability_margin(W, W, R, S);
}

}  // namespace epd
