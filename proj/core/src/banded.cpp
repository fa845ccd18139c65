#include "epd/banded.hpp"

#include "epd/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace epd {

BandedLU::BandedLU(int n, int kl, int ku)
    : n_(n),
      kl_(kl),
      ku_(ku),
      width_(static_cast<std::size_t>(2 * kl + ku + 1)),
      band_(static_cast<std::size_t>(n) * width_, 0.0),
      mult_(static_cast<std::size_t>(n) * static_cast<std::size_t>(std::max(kl, 1)), 0.0),
      pivot_(static_cast<std::size_t>(n), 0) {
    if (n < 1 || kl < 0 || ku < 0) {
        throw DimensionError("BandedLU: invalid dimensions");
    }
}

void BandedLU::set(int i, int j, double value) {
    if (i < 0 || j < 0 || i >= n_ || j >= n_ || j - i > ku_ || i - j > kl_) {
        throw DimensionError("BandedLU::set: entry outside the band");
    }
    at(i, j) = value;
    factored_ = false;
}

double BandedLU::get(int i, int j) const {
    if (i < 0 || j < 0 || i >= n_ || j >= n_ || j - i > ku_ + kl_ || i - j > kl_) {
        return 0.0;
    }
    return at(i, j);
}

double BandedLU::factorize() {
    double min_pivot = std::numeric_limits<double>::infinity();
    for (int k = 0; k < n_; ++k) {
        const int last_row = std::min(n_ - 1, k + kl_);
        const int last_col = std::min(n_ - 1, k + ku_ + kl_);

        int p = k;
        double best = std::abs(at(k, k));
        for (int r = k + 1; r <= last_row; ++r) {
            const double v = std::abs(at(r, k));
            if (v > best) {
                best = v;
                p = r;
            }
        }
        pivot_[static_cast<std::size_t>(k)] = p;
        if (p != k) {
            for (int j = k; j <= last_col; ++j) {
                std::swap(at(k, j), at(p, j));
            }
        }
        const double piv = at(k, k);
        min_pivot = std::min(min_pivot, std::abs(piv));
        if (piv == 0.0) {
            continue;
        }
        for (int r = k + 1; r <= last_row; ++r) {
            const double f = at(r, k) / piv;
            mult_[static_cast<std::size_t>(k) * static_cast<std::size_t>(std::max(kl_, 1)) +
                  static_cast<std::size_t>(r - k - 1)] = f;
            at(r, k) = 0.0;
            if (f == 0.0) continue;
            for (int j = k + 1; j <= last_col; ++j) {
                at(r, j) -= f * at(k, j);
            }
        }
    }
    factored_ = true;
    return min_pivot;
}

void BandedLU::solve(std::span<double> b) const {
    if (!factored_) {
        throw Error("BandedLU::solve: factorize() has not been called");
    }
    if (static_cast<int>(b.size()) != n_) {
        throw DimensionError("BandedLU::solve: right-hand side has wrong length");
    }
    const std::size_t stride = static_cast<std::size_t>(std::max(kl_, 1));
    for (int k = 0; k < n_; ++k) {
        const int p = pivot_[static_cast<std::size_t>(k)];
        if (p != k) std::swap(b[static_cast<std::size_t>(k)], b[static_cast<std::size_t>(p)]);
        const double bk = b[static_cast<std::size_t>(k)];
        const int last_row = std::min(n_ - 1, k + kl_);
        for (int r = k + 1; r <= last_row; ++r) {
            b[static_cast<std::size_t>(r)] -=
                mult_[static_cast<std::size_t>(k) * stride + static_cast<std::size_t>(r - k - 1)] * bk;
        }
    }
    for (int i = n_ - 1; i >= 0; --i) {
        double s = b[static_cast<std::size_t>(i)];
        const int last_col = std::min(n_ - 1, i + ku_ + kl_);
        for (int j = i + 1; j <= last_col; ++j) {
            s -= at(i, j) * b[static_cast<std::size_t>(j)];
        }
        b[static_cast<std::size_t>(i)] = s / at(i, i);
    }
}

}  // namespace epd
