#include "epd/banded.hpp"
#include "epd/errors.hpp"
#include "epd/sylvester.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace epd;

namespace {

Matrix rnd(std::mt19937_64& rng, int r, int c, double scale = 1.0) {
    std::uniform_real_distribution<double> u(-1, 1);
    Matrix M(r, c);
    for (int i = 0; i < M.size(); ++i) M.data()[i] = scale * u(rng);
    return M;
}

Matrix tridiag(std::mt19937_64& rng, int n, double shift) {
    Matrix M = Matrix::Zero(n, n);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int i = 0; i < n; ++i) {
        M(i, i) = shift + u(rng);
        if (i + 1 < n) {
            M(i, i + 1) = u(rng);
            M(i + 1, i) = u(rng);
        }
    }
    return M;
}

double rel_diff(const Matrix& A, const Matrix& B) {
    const double s = std::max(B.norm(), 1e-300);
    return (A - B).norm() / s;
}

}  // namespace

TEST(BandedLU, MatchesDenseSolve) {
    std::mt19937_64 rng(5);
    for (int kl : {0, 1, 3}) {
        for (int ku : {0, 1, 2}) {
            const int n = 17;
            Matrix M = Matrix::Zero(n, n);
            BandedLU lu(n, kl, ku);
            std::uniform_real_distribution<double> u(-1, 1);
            for (int i = 0; i < n; ++i)
                for (int j = std::max(0, i - kl); j <= std::min(n - 1, i + ku); ++j) {
                    M(i, j) = u(rng) + (i == j ? 0.1 : 0.0);
                    lu.set(i, j, M(i, j));
                }
            EXPECT_EQ(lu.get(0, 0), M(0, 0));
            const Eigen::VectorXd b = Eigen::VectorXd::Random(n);
            const double pivot = lu.factorize();
            EXPECT_GT(pivot, 0.0);
            Eigen::VectorXd x = b;
            lu.solve(std::span<double>(x.data(), static_cast<std::size_t>(n)));
            EXPECT_LE((M * x - b).norm(), 1e-13 * (M.norm() * x.norm() + b.norm())) << "kl=" << kl << " ku=" << ku;
        }
    }
}

TEST(BandedLU, Errors) {
    BandedLU lu(3, 1, 1);
    EXPECT_THROW(lu.set(0, 2, 1.0), DimensionError);
    std::vector<double> b(3, 1.0);
    EXPECT_THROW(lu.solve(b), Error);
    lu.set(0, 0, 1);
    lu.set(1, 1, 1);
    lu.set(2, 2, 1);
    lu.factorize();
    std::vector<double> wrong(2, 1.0);
    EXPECT_THROW(lu.solve(wrong), DimensionError);
    EXPECT_THROW(BandedLU(0, 1, 1), DimensionError);
}

TEST(Sylvester, HalfIdentityIsIdentityMap) {
    std::mt19937_64 rng(1);
    const Matrix C = rnd(rng, 5, 5);
    const Matrix H = 0.5 * Matrix::Identity(5, 5);
    EXPECT_LE(rel_diff(solve_sylvester({H, H, C}), C), 1e-15);
}

TEST(Sylvester, DiagonalClosedForm) {
    Matrix L = Matrix::Zero(2, 2), R = Matrix::Zero(2, 2);
    L.diagonal() << 1, 2;
    R.diagonal() << 3, 4;
    const Matrix X = solve_sylvester({L, R, Matrix::Ones(2, 2)});
    Matrix expect(2, 2);
    expect << 1.0 / 4, 1.0 / 5, 1.0 / 5, 1.0 / 6;
    EXPECT_LE((X - expect).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Sylvester, NonSolvable) {
    Matrix L(1, 1), R(1, 1), C(1, 1);
    L << 1;
    R << -1;
    C << 3;
    try {
        solve_sylvester({L, R, C});
        FAIL();
    } catch (const NonSolvableError& e) {
        EXPECT_DOUBLE_EQ(e.eigenvalue_re(), -1.0);
    }
}

TEST(Sylvester, RandomTridiagonalAndDenseRight) {
    std::mt19937_64 rng(9);
    for (int n : {1, 2, 3, 8, 30}) {
        const Matrix L = tridiag(rng, n, 3.0);
        const Matrix R = rnd(rng, n, n) + 3.0 * Matrix::Identity(n, n);  // complex pairs likely
        const Matrix C = rnd(rng, n, n);
        const Matrix X = solve_sylvester({L, R, C});
        EXPECT_LE(residual(SylvesterProblem{L, R, C}, X), 1e-12) << n;
    }
}

TEST(Sylvester, RectangularRhs) {
    std::mt19937_64 rng(21);
    const Matrix L = tridiag(rng, 4, 3.0);
    const Matrix R = tridiag(rng, 6, 3.0);
    const Matrix C = rnd(rng, 4, 6);
    EXPECT_LE(residual(SylvesterProblem{L, R, C}, solve_sylvester({L, R, C})), 1e-13);
}

TEST(Sylvester, DimensionChecks) {
    EXPECT_THROW(solve_sylvester({Matrix::Identity(2, 3), Matrix::Identity(2, 2), Matrix::Ones(2, 2)}),
                 DimensionError);
    EXPECT_THROW(solve_sylvester({Matrix::Identity(2, 2), Matrix::Identity(2, 2), Matrix::Ones(3, 2)}),
                 DimensionError);
}

TEST(Coupled, EntrywiseTwoByTwo) {
    std::mt19937_64 rng(2);
    const int n = 4;
    const Matrix I = Matrix::Identity(n, n);
    const Matrix M = rnd(rng, n, n);
    // W X + X W = 2X, R Y + Y S = Y: 2X + Y = M, 2Y + X = -M.
    const CoupledProblem p{I, I, 0.5 * I, 0.5 * I, M, -M};
    for (const CoupledSolution& s : {solve_coupled(p), kronecker_solve(p)}) {
        EXPECT_LE((s.X - M).cwiseAbs().maxCoeff(), 1e-14);
        EXPECT_LE((s.Y + M).cwiseAbs().maxCoeff(), 1e-14);
    }
}

TEST(Coupled, ZeroRhs) {
    std::mt19937_64 rng(4);
    const Matrix W = tridiag(rng, 5, 3.0);
    const Matrix Z = Matrix::Zero(5, 5);
    const CoupledProblem p{W, W.transpose(), 0.1 * W, 0.2 * W, Z, Z};
    const CoupledSolution s = solve_coupled(p);
    EXPECT_EQ(s.X.norm(), 0.0);
    EXPECT_EQ(s.Y.norm(), 0.0);
    EXPECT_EQ(residual(p, s), 0.0);
}

TEST(Coupled, KroneckerScalar) {
    Matrix W(1, 1), Z(1, 1), C1(1, 1), C2(1, 1);
    W << 2;
    Z << 0;
    C1 << 8;
    C2 << 4;
    const CoupledSolution s = kronecker_solve({W, W, Z, Z, C1, C2});
    EXPECT_DOUBLE_EQ(s.X(0, 0), 2.0);
    EXPECT_DOUBLE_EQ(s.Y(0, 0), 1.0);
}

TEST(Coupled, KroneckerMatrixMatchesOperator) {
    std::mt19937_64 rng(8);
    const int n = 3;
    const CoupledProblem p{rnd(rng, n, n), rnd(rng, n, n), rnd(rng, n, n), rnd(rng, n, n),
                           Matrix::Zero(n, n), Matrix::Zero(n, n)};
    const Matrix X = rnd(rng, n, n), Y = rnd(rng, n, n);
    Eigen::VectorXd z(2 * n * n);
    z << Eigen::Map<const Eigen::VectorXd>(X.data(), n * n), Eigen::Map<const Eigen::VectorXd>(Y.data(), n * n);
    const Eigen::VectorXd Kz = kronecker_matrix(p) * z;
    const Matrix E1 = p.W_left * X + X * p.W_right + p.R * Y + Y * p.S;
    const Matrix E2 = p.W_left * Y + Y * p.W_right + p.R * X + X * p.S;
    EXPECT_LE((Kz.head(n * n) - Eigen::Map<const Eigen::VectorXd>(E1.data(), n * n)).norm(), 1e-13);
    EXPECT_LE((Kz.tail(n * n) - Eigen::Map<const Eigen::VectorXd>(E2.data(), n * n)).norm(), 1e-13);
}

TEST(Coupled, RandomAgreementWithKronecker) {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> size(1, 8);
    int tested = 0;
    while (tested < 50) {
        const int n = size(rng);
        const Matrix W = tridiag(rng, n, 2.0);
        const CoupledProblem p{W, W.transpose(), tridiag(rng, n, 0.0) * 0.5,
                               tridiag(rng, n, 0.0) * 0.5, rnd(rng, n, n), rnd(rng, n, n)};
        if (solvability_margin(p.W_left, p.W_right, p.R, p.S) <= 1e-6) continue;
        ++tested;
        const CoupledSolution a = solve_coupled(p);
        const CoupledSolution b = kronecker_solve(p);
        const double scale = std::max(b.X.cwiseAbs().maxCoeff(), b.Y.cwiseAbs().maxCoeff());
        EXPECT_LE((a.X - b.X).cwiseAbs().maxCoeff(), 1e-10 * scale);
        EXPECT_LE((a.Y - b.Y).cwiseAbs().maxCoeff(), 1e-10 * scale);
        EXPECT_LE(residual(p, a), 1e-10);
    }
}

TEST(Coupled, Linearity) {
    std::mt19937_64 rng(12);
    const int n = 6;
    const Matrix W = tridiag(rng, n, 2.0);
    const Matrix R = tridiag(rng, n, 0.0) * 0.3, S = tridiag(rng, n, 0.0) * 0.3;
    const Matrix A1 = rnd(rng, n, n), A2 = rnd(rng, n, n), B1 = rnd(rng, n, n), B2 = rnd(rng, n, n);
    const double a = 0.7, b = -1.3;
    const auto s1 = solve_coupled({W, W.transpose(), R, S, A1, A2});
    const auto s2 = solve_coupled({W, W.transpose(), R, S, B1, B2});
    const auto s = solve_coupled({W, W.transpose(), R, S, a * A1 + b * B1, a * A2 + b * B2});
    EXPECT_LE(rel_diff(s.X, a * s1.X + b * s2.X), 1e-10);
    EXPECT_LE(rel_diff(s.Y, a * s1.Y + b * s2.Y), 1e-10);
}

TEST(Coupled, LimitingOperator) {
    // W = I/2, R = S = (a'/2) I: X + a'Y = C1, Y + a'X = C2 entrywise.
    std::mt19937_64 rng(13);
    const int n = 5;
    const double ap = 0.37;
    const Matrix I = Matrix::Identity(n, n);
    const Matrix C1 = rnd(rng, n, n), C2 = rnd(rng, n, n);
    const auto s = solve_coupled({0.5 * I, 0.5 * I, 0.5 * ap * I, 0.5 * ap * I, C1, C2});
    const double det = 1 - ap * ap;
    EXPECT_LE(((C1 - ap * C2) / det - s.X).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LE(((C2 - ap * C1) / det - s.Y).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Coupled, BranchIsReported) {
    const Matrix I = Matrix::Identity(2, 2);
    try {
        solve_coupled({I, I, I, I, I, I});
        FAIL();
    } catch (const NonSolvableError& e) {
        EXPECT_EQ(e.branch(), "difference");
    }
}

TEST(Kronecker, Guards) {
    const Matrix I = Matrix::Identity(3, 3);
    KroneckerOptions small;
    small.max_size = 2;
    EXPECT_THROW(kronecker_solve({I, I, I, I, I, I}, small), SizeGuardError);
    EXPECT_THROW(kronecker_solve({I, I, I, I, I, I}), SingularSystemError);
}

TEST(Residual, ExactPerturbedAndZero) {
    std::mt19937_64 rng(6);
    const int n = 5;
    const Matrix W = tridiag(rng, n, 2.0);
    const CoupledProblem p{W, W.transpose(), 0.2 * W, 0.1 * W, rnd(rng, n, n), rnd(rng, n, n)};
    const CoupledSolution s = solve_coupled(p);
    EXPECT_LE(residual(p, s), 1e-14);
    const Matrix E = rnd(rng, n, n);
    const double r1 = residual(p, {s.X + 1e-6 * E, s.Y});
    const double r2 = residual(p, {s.X + 2e-6 * E, s.Y});
    EXPECT_NEAR(r2 / r1, 2.0, 1e-3);
    const Matrix Z = Matrix::Zero(n, n);
    EXPECT_EQ(residual(CoupledProblem{W, W, W, W, Z, Z}, {Z, Z}), 0.0);
    EXPECT_EQ(residual(SylvesterProblem{W, W, Z}, Z), 0.0);
}

TEST(Margin, Examples) {
    const Matrix I = Matrix::Identity(4, 4);
    const Matrix Z = Matrix::Zero(4, 4);
    EXPECT_NEAR(solvability_margin(0.5 * I, Z, Z), 1.0, 1e-12);
    EXPECT_NEAR(solvability_margin(I, I, I), 0.0, 1e-12);
    Matrix W = Matrix::Zero(2, 2);
    W.diagonal() << 1, 3;
    // Sum branch diag(1.5, 3.5) with diag(1, 3); difference branch diag(0.5, 2.5) with diag(1, 3).
    EXPECT_NEAR(solvability_margin(W, W, 0.5 * Matrix::Identity(2, 2), Matrix::Zero(2, 2)), 1.5, 1e-12);
}
